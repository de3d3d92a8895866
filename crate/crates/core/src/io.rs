//! Plot-ready CSV tables. Floats use `{:.16e}` (17 significant digits),
//! rows end in `\n`, and the output depends only on the data.

use std::fmt::Write;

use crate::compare::FlowComparison;
use crate::continuation::BifurcationCurve;
use crate::hill::HillRegion;
use crate::impact::CollisionEvent;
use crate::model::{PhaseState, WedgeModel};
use crate::orbit::{PeriodicOrbit, PointCloud};

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

struct Table {
    out: String,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        let mut out = header.join(",");
        out.push('\n');
        Table { out }
    }

    fn row(&mut self, cells: &[Cell]) {
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.out.push(',');
            }
            match c {
                Cell::F(x) => write!(self.out, "{x:.16e}").unwrap(),
                Cell::I(k) => write!(self.out, "{k}").unwrap(),
                Cell::S(s) => self.out.push_str(s),
            }
        }
        self.out.push('\n');
    }
}

enum Cell<'a> {
    F(f64),
    I(usize),
    S(&'a str),
}

/// `t,u1,u2,v1,v2[,u3,v3],H`; `H` includes the wall term when `epsilon > 0`.
pub fn trajectory_csv(model: &WedgeModel, states: &[PhaseState]) -> String {
    let d = model.dim();
    let mut header = vec!["t", "u1", "u2", "v1", "v2"];
    if d == 3 {
        header.extend(["u3", "v3"]);
    }
    header.push("H");
    let mut t = Table::new(&header);
    for s in states {
        let mut cells = vec![
            Cell::F(s.t),
            Cell::F(s.q[0]),
            Cell::F(s.q[1]),
            Cell::F(s.p[0]),
            Cell::F(s.p[1]),
        ];
        if d == 3 {
            cells.extend([Cell::F(s.q[2]), Cell::F(s.p[2])]);
        }
        cells.push(Cell::F(model.energy_unchecked(&s.q, &s.p)));
        t.row(&cells);
    }
    t.out
}

/// `t_c,wall,v1_pre,v2_pre,v1_post,v2_post,class`.
pub fn events_csv(events: &[CollisionEvent]) -> String {
    let mut t = Table::new(&[
        "t_c", "wall", "v1_pre", "v2_pre", "v1_post", "v2_post", "class",
    ]);
    for e in events {
        t.row(&[
            Cell::F(e.t_c),
            Cell::S(e.wall.name()),
            Cell::F(e.state_pre.p[0]),
            Cell::F(e.state_pre.p[1]),
            Cell::F(e.state_post.p[0]),
            Cell::F(e.state_post.p[1]),
            Cell::S(e.classification.name()),
        ]);
    }
    t.out
}

/// `k,u1,v1[,u3,v3],t` with `k` counted from 1.
pub fn section_csv(points: &[PhaseState]) -> String {
    let d = points.first().map_or(2, |p| p.dim());
    let mut header = vec!["k", "u1", "v1"];
    if d == 3 {
        header.extend(["u3", "v3"]);
    }
    header.push("t");
    let mut t = Table::new(&header);
    for (k, s) in points.iter().enumerate() {
        let mut cells = vec![Cell::I(k + 1), Cell::F(s.q[0]), Cell::F(s.p[0])];
        if d == 3 {
            cells.extend([Cell::F(s.q[2]), Cell::F(s.p[2])]);
        }
        cells.push(Cell::F(s.t));
        t.row(&cells);
    }
    t.out
}

/// `seed_id,k,u1,v1`.
pub fn point_cloud_csv(cloud: &PointCloud) -> String {
    let mut t = Table::new(&["seed_id", "k", "u1", "v1"]);
    for p in &cloud.points {
        t.row(&[
            Cell::I(p.seed_id),
            Cell::I(p.k),
            Cell::F(p.state.q[0]),
            Cell::F(p.state.p[0]),
        ]);
    }
    t.out
}

/// `epsilon,ratio,u10,trace,stability`; failed grid points get `NaN,failed`.
pub fn bifurcation_csv(curves: &[BifurcationCurve]) -> String {
    let mut t = Table::new(&["epsilon", "ratio", "u10", "trace", "stability"]);
    for curve in curves {
        for c in curve.raw.iter().flatten() {
            t.row(&[
                Cell::F(curve.epsilon),
                Cell::F(c.ratio),
                Cell::F(c.u10),
                Cell::F(c.trace.unwrap_or(f64::NAN)),
                Cell::S(c.stability.map_or("failed", |s| s.name())),
            ]);
        }
    }
    t.out
}

/// `ratio,u_c,epsilon`; ratios without a transition get `NaN`.
pub fn curve_csv(curves: &[BifurcationCurve]) -> String {
    let mut t = Table::new(&["ratio", "u_c", "epsilon"]);
    for c in curves {
        for (r, u) in c.ratio_grid.iter().zip(&c.u_c) {
            t.row(&[
                Cell::F(*r),
                Cell::F(u.unwrap_or(f64::NAN)),
                Cell::F(c.epsilon),
            ]);
        }
    }
    t.out
}

/// `polyline_id,part_tag,x,y`.
pub fn region_csv(region: &HillRegion) -> String {
    let mut t = Table::new(&["polyline_id", "part_tag", "x", "y"]);
    for (id, (line, tag)) in region.boundary.iter().zip(&region.parts).enumerate() {
        for p in line {
            t.row(&[
                Cell::I(id),
                Cell::S(tag.name()),
                Cell::F(p[0]),
                Cell::F(p[1]),
            ]);
        }
    }
    t.out
}

/// `x,y,class`.
pub fn corners_csv(region: &HillRegion) -> String {
    let mut t = Table::new(&["x", "y", "class"]);
    for c in &region.corners {
        t.row(&[
            Cell::F(c.point[0]),
            Cell::F(c.point[1]),
            Cell::S(c.class.name()),
        ]);
    }
    t.out
}

/// `epsilon,polyline_id,x,y` for smooth level sets, one block per region.
pub fn level_sets_csv(regions: &[HillRegion]) -> String {
    let mut t = Table::new(&["epsilon", "polyline_id", "x", "y"]);
    for r in regions {
        for (id, line) in r.boundary.iter().enumerate() {
            for p in line {
                t.row(&[
                    Cell::F(r.epsilon),
                    Cell::I(id),
                    Cell::F(p[0]),
                    Cell::F(p[1]),
                ]);
            }
        }
    }
    t.out
}

/// `epsilon,u10,v20,H,t_c,trace,re_lambda,stability`.
pub fn orbits_csv(orbits: &[PeriodicOrbit]) -> String {
    let mut t = Table::new(&[
        "epsilon",
        "u10",
        "v20",
        "H",
        "t_c",
        "trace",
        "re_lambda",
        "stability",
    ]);
    for o in orbits {
        t.row(&[
            Cell::F(o.epsilon),
            Cell::F(o.u10),
            Cell::F(o.v20),
            Cell::F(o.h),
            Cell::F(o.t_c),
            Cell::F(o.trace()),
            Cell::F(o.multiplier_real_part()),
            Cell::S(o.stability.name()),
        ]);
    }
    t.out
}

/// `epsilon,sup_distance,sup_distance_all,samples,excluded`.
pub fn comparison_csv(rows: &[FlowComparison]) -> String {
    let mut t = Table::new(&[
        "epsilon",
        "sup_distance",
        "sup_distance_all",
        "samples",
        "excluded",
    ]);
    for r in rows {
        t.row(&[
            Cell::F(r.epsilon),
            Cell::F(r.sup_distance),
            Cell::F(r.sup_distance_all),
            Cell::I(r.samples),
            Cell::I(r.excluded),
        ]);
    }
    t.out
}

/// `epsilon,t,u1,u2,v1,v2,H` for a set of labelled planar trajectories.
pub fn labelled_trajectories_csv(runs: &[(WedgeModel, Vec<PhaseState>)]) -> String {
    let mut t = Table::new(&["epsilon", "t", "u1", "u2", "v1", "v2", "H"]);
    for (m, states) in runs {
        for s in states {
            t.row(&[
                Cell::F(m.epsilon),
                Cell::F(s.t),
                Cell::F(s.q[0]),
                Cell::F(s.q[1]),
                Cell::F(s.p[0]),
                Cell::F(s.p[1]),
                Cell::F(m.energy_unchecked(&s.q, &s.p)),
            ]);
        }
    }
    t.out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_has_17_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.5), "-2.5000000000000000e0");
    }

    #[test]
    fn trajectory_header_and_energy() {
        let m = WedgeModel::reference();
        let s = PhaseState::planar(9.23, 0.0, 0.0, 4.91);
        let csv = trajectory_csv(&m, &[s]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t,u1,u2,v1,v2,H"));
        let h: f64 = lines
            .next()
            .unwrap()
            .split(',')
            .last()
            .unwrap()
            .parse()
            .unwrap();
        assert!((h - 34.7005).abs() < 1e-4);
        assert!(csv.ends_with('\n') && !csv.contains('\r'));
    }

    #[test]
    fn three_dof_columns() {
        let m = WedgeModel::reference().with_oscillator(3f64.sqrt(), 0.0, 0.0);
        let s = PhaseState::new(vec![9.0, 0.0, 0.1], vec![0.0, 1.0, 0.0], 0.0).unwrap();
        assert!(trajectory_csv(&m, &[s.clone()]).starts_with("t,u1,u2,v1,v2,u3,v3,H\n"));
        assert!(section_csv(&[s]).starts_with("k,u1,v1,u3,v3,t\n"));
    }
}
