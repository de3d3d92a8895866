//! Hill's regions of allowed motion at fixed energy: the impact region
//! `{U <= H*}` cut by the closed wedge, the smooth region `{U + V <= H*}`,
//! their boundaries as polylines, and the corner taxonomy.

mod contour;

use serde::{Deserialize, Serialize};

pub use contour::Polyline;

use crate::conditions::{EnergyBudget, Rect};
use crate::error::{Error, Result};
use crate::model::{Wall, WedgeModel};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartTag {
    /// Piece of a wall where `U < H*`.
    #[serde(rename = "wall")]
    WallPart,
    /// Piece of the level set `U = H*` inside the wedge.
    #[serde(rename = "interior")]
    InteriorPart,
    /// Level set of `U + V`; the smooth boundary is not split.
    Smooth,
}

impl PartTag {
    pub fn name(self) -> &'static str {
        match self {
            PartTag::WallPart => "wall",
            PartTag::InteriorPart => "interior",
            PartTag::Smooth => "smooth",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CornerClass {
    Transverse,
    InteriorNonTransverse,
    Bifurcating,
}

impl CornerClass {
    pub fn name(self) -> &'static str {
        match self {
            CornerClass::Transverse => "transverse",
            CornerClass::InteriorNonTransverse => "interior_non_transverse",
            CornerClass::Bifurcating => "bifurcating",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Corner {
    pub point: [f64; 2],
    pub wall: Wall,
    pub class: CornerClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HillRegion {
    pub h_star: f64,
    pub epsilon: f64,
    pub window: Rect,
    /// Cells per axis.
    pub resolution: usize,
    pub boundary: Vec<Polyline>,
    /// One tag per polyline.
    pub parts: Vec<PartTag>,
    pub corners: Vec<Corner>,
}

impl HillRegion {
    /// Larger side of a grid cell.
    pub fn cell(&self) -> f64 {
        self.window.width().max(self.window.height()) / self.resolution as f64
    }

    pub fn polylines_tagged(&self, tag: PartTag) -> impl Iterator<Item = &Polyline> {
        self.boundary
            .iter()
            .zip(&self.parts)
            .filter(move |(_, t)| **t == tag)
            .map(|(l, _)| l)
    }
}

/// Angle below which the background gradient counts as parallel to the
/// wall normal.
pub const TRANSVERSE_ANGLE: f64 = 1e-6;

pub const MIN_RESOLUTION: usize = 64;

fn check_inputs(model: &WedgeModel, h_star: f64, window: &Rect, resolution: usize) -> Result<()> {
    if model.dim() != 2 {
        return Err(Error::domain(
            "Hill regions are computed for the planar model",
        ));
    }
    if resolution < MIN_RESOLUTION {
        return Err(Error::domain(format!(
            "resolution {resolution} below {MIN_RESOLUTION} cells per axis"
        )));
    }
    if !h_star.is_finite() {
        return Err(Error::domain("H* must be finite"));
    }
    EnergyBudget::for_window(model, window, h_star)?.require_admissible()
}

/// Coefficients `(a, b, c)` of `U(s d) = a s^2 + b s + c` along a wall.
fn wall_quadratic(model: &WedgeModel, wall: Wall) -> (f64, f64, f64) {
    let d = model.wall_direction(wall);
    let at = |s: f64| model.background_value(&[s * d[0], s * d[1]]);
    let (f0, f1, f2) = (at(0.0), at(1.0), at(2.0));
    let a = 0.5 * (f2 - 2.0 * f1 + f0);
    (a, f1 - f0 - a, f0)
}

/// Arc lengths in `(lo, hi)` where `U = h` on `wall`, ascending.
fn wall_roots(model: &WedgeModel, wall: Wall, h: f64, lo: f64, hi: f64) -> Vec<f64> {
    let (a, b, c) = wall_quadratic(model, wall);
    let c = c - h;
    let mut r = Vec::new();
    if a.abs() < 1e-14 * (b.abs() + c.abs()).max(1.0) {
        if b != 0.0 {
            r.push(-c / b);
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            let q = -0.5 * (b + b.signum() * disc.sqrt());
            if q != 0.0 {
                r.push(q / a);
                r.push(c / q);
            } else {
                r.push(-b / (2.0 * a));
            }
        }
    }
    r.retain(|s| *s > lo && *s < hi && *s > 0.0);
    r.sort_by(f64::total_cmp);
    r.dedup();
    r
}

/// Splits a polyline at the wedge walls and keeps the pieces in the closed
/// wedge. Crossing points are placed on the wall line.
fn clip_to_wedge(model: &WedgeModel, line: &Polyline) -> Vec<Polyline> {
    let inside = |p: &[f64; 2]| {
        let (a, b) = model.patterns(p);
        a >= 0.0 && b >= 0.0
    };
    let cut = |p: &[f64; 2], q: &[f64; 2]| {
        let mut t_best = 1.0f64;
        for w in Wall::BOTH {
            let (gp, gq) = (model.pattern(p, w), model.pattern(q, w));
            if (gp >= 0.0) != (gq >= 0.0) {
                t_best = t_best.min(gp / (gp - gq));
            }
        }
        [p[0] + t_best * (q[0] - p[0]), p[1] + t_best * (q[1] - p[1])]
    };
    let mut out = Vec::new();
    let mut cur: Polyline = Vec::new();
    for k in 0..line.len() {
        let p = line[k];
        let pin = inside(&p);
        if k > 0 {
            let prev = line[k - 1];
            let prev_in = inside(&prev);
            if prev_in && !pin {
                cur.push(cut(&prev, &p));
                out.push(std::mem::take(&mut cur));
            } else if !prev_in && pin {
                cur.push(cut(&p, &prev));
            }
        }
        if pin {
            cur.push(p);
        }
    }
    if cur.len() >= 2 {
        out.push(cur);
    }
    out.retain(|l| l.len() >= 2);
    out
}

/// Impact Hill boundary: `U = H*` inside the closed wedge plus the wall
/// pieces with `U < H*`, with classified corners.
pub fn impact_hill_region(
    model: &WedgeModel,
    h_star: f64,
    window: &Rect,
    resolution: usize,
) -> Result<HillRegion> {
    let m = model.with_epsilon(0.0);
    check_inputs(&m, h_star, window, resolution)?;
    let f = |p: [f64; 2]| m.background_value(&p) - h_star;
    let raw = contour::level_set(&f, window, resolution, resolution);

    let cell = window.width().max(window.height()) / resolution as f64;
    let mut corners = Vec::new();
    let mut boundary = Vec::new();
    let mut parts = Vec::new();
    for wall in Wall::BOTH {
        let Some((s0, s1)) = window.clip_wall(&m, wall) else {
            continue;
        };
        let d = m.wall_direction(wall);
        let roots = wall_roots(&m, wall, h_star, s0, s1);
        for &s in &roots {
            corners.push(Corner {
                point: [s * d[0], s * d[1]],
                wall,
                class: CornerClass::Transverse,
            });
        }
        let mut cuts = vec![s0.max(0.0)];
        cuts.extend(&roots);
        cuts.push(s1);
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mid = 0.5 * (a + b);
            if !(b > a) || !(m.background_value(&[mid * d[0], mid * d[1]]) < h_star) {
                continue;
            }
            let n = ((b - a) / cell).ceil().max(1.0) as usize;
            let line: Polyline = (0..=n)
                .map(|k| {
                    let s = a + (b - a) * k as f64 / n as f64;
                    [s * d[0], s * d[1]]
                })
                .collect();
            boundary.push(line);
            parts.push(PartTag::WallPart);
        }
    }

    // snap clipped ends onto the exact corners
    let snap = 2.0 * cell * std::f64::consts::SQRT_2;
    for line in raw.iter().flat_map(|l| clip_to_wedge(&m, l)) {
        let mut line = line;
        for idx in [0, line.len() - 1] {
            let p = line[idx];
            let near = corners
                .iter()
                .map(|c| (c.point, (c.point[0] - p[0]).hypot(c.point[1] - p[1])))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            if let Some((c, dist)) = near {
                if dist > 0.0 && dist < snap {
                    line[idx] = c;
                }
            }
        }
        boundary.push(line);
        parts.push(PartTag::InteriorPart);
    }

    let region = HillRegion {
        h_star,
        epsilon: 0.0,
        window: *window,
        resolution,
        boundary,
        parts,
        corners,
    };
    Ok(classify_boundary_points(&m, region))
}

/// Smooth Hill boundary `U + V = H*` over the window.
pub fn smooth_hill_boundary(
    model: &WedgeModel,
    h_star: f64,
    epsilon: f64,
    window: &Rect,
    resolution: usize,
) -> Result<HillRegion> {
    if !(epsilon > 0.0) {
        return Err(Error::domain("the smooth Hill boundary needs epsilon > 0"));
    }
    let m = model.with_epsilon(epsilon);
    m.validate()?;
    check_inputs(&m, h_star, window, resolution)?;
    let f = |p: [f64; 2]| m.potential_value(&p) - h_star;
    let boundary = contour::level_set(&f, window, resolution, resolution);
    let parts = vec![PartTag::Smooth; boundary.len()];
    Ok(HillRegion {
        h_star,
        epsilon,
        window: *window,
        resolution,
        boundary,
        parts,
        corners: Vec::new(),
    })
}

/// Class of a corner point on `wall` from the background gradient there.
pub fn classify_corner(model: &WedgeModel, point: [f64; 2], wall: Wall) -> CornerClass {
    let mut g = [0.0; 2];
    model.background_into(&point, &mut g);
    let n = model.inward_normal(wall);
    let along_normal = g[0] * n[0] + g[1] * n[1];
    let across = (g[0] * n[1] - g[1] * n[0]).abs();
    let angle = across.atan2(along_normal.abs());
    let norm = g[0].hypot(g[1]);
    if norm > 0.0 && angle > TRANSVERSE_ANGLE {
        CornerClass::Transverse
    } else if along_normal < 0.0 {
        CornerClass::InteriorNonTransverse
    } else {
        CornerClass::Bifurcating
    }
}

/// Reclassifies every corner of an impact region.
pub fn classify_boundary_points(model: &WedgeModel, mut region: HillRegion) -> HillRegion {
    for c in &mut region.corners {
        c.class = classify_corner(model, c.point, c.wall);
    }
    region
}

fn point_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p[0] - a[0] - t * dx).hypot(p[1] - a[1] - t * dy)
}

fn distance_to_set(p: [f64; 2], set: &[Polyline]) -> f64 {
    let mut best = f64::INFINITY;
    for line in set {
        if line.len() == 1 {
            best = best.min((p[0] - line[0][0]).hypot(p[1] - line[0][1]));
        }
        for w in line.windows(2) {
            best = best.min(point_segment(p, w[0], w[1]));
        }
    }
    best
}

fn one_sided(a: &[Polyline], b: &[Polyline], keep: &(impl Fn([f64; 2]) -> bool + Sync)) -> f64 {
    let pts: Vec<[f64; 2]> = a.iter().flatten().copied().filter(|p| keep(*p)).collect();
    par::map(&pts, |p| distance_to_set(*p, b))
        .into_iter()
        .fold(0.0, f64::max)
}

fn check_sets(a: &[Polyline], b: &[Polyline]) -> Result<()> {
    if a.iter().all(|l| l.is_empty()) || b.iter().all(|l| l.is_empty()) {
        return Err(Error::domain(
            "Hausdorff distance needs two non-empty polyline sets",
        ));
    }
    Ok(())
}

/// Symmetric Hausdorff distance between the vertex sets of `a` and `b`,
/// each measured against the other set's segments.
pub fn hausdorff_distance(a: &[Polyline], b: &[Polyline]) -> Result<f64> {
    check_sets(a, b)?;
    let all = |_: [f64; 2]| true;
    Ok(one_sided(a, b, &all).max(one_sided(b, a, &all)))
}

/// As [`hausdorff_distance`], ignoring vertices within `radius` of any of
/// the `excluded` points.
pub fn hausdorff_distance_away_from(
    a: &[Polyline],
    b: &[Polyline],
    excluded: &[[f64; 2]],
    radius: f64,
) -> Result<f64> {
    check_sets(a, b)?;
    let keep = |p: [f64; 2]| {
        excluded
            .iter()
            .all(|c| (c[0] - p[0]).hypot(c[1] - p[1]) > radius)
    };
    Ok(one_sided(a, b, &keep).max(one_sided(b, a, &keep)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2() -> (WedgeModel, Rect) {
        (
            WedgeModel::reference(),
            Rect::new(0.0, 6.0, -2.0, 2.0).unwrap(),
        )
    }

    #[test]
    fn axis_crossings_on_interior_part() {
        let (m, w) = fig2();
        let r = impact_hill_region(&m, 0.5, &w, 128).unwrap();
        let interior: Vec<Polyline> = r.polylines_tagged(PartTag::InteriorPart).cloned().collect();
        for x in [1.5, 3.5] {
            assert!(distance_to_set([x, 0.0], &interior) < 1e-6, "{x}");
        }
        assert_eq!(r.corners.len(), 2);
        for c in &r.corners {
            assert_eq!(c.class, CornerClass::Transverse);
            assert!((m.background_value(&c.point) - 0.5).abs() < 1e-12);
        }
        assert_eq!(r.polylines_tagged(PartTag::WallPart).count(), 2);
    }

    #[test]
    fn low_energy_region_has_no_wall_part() {
        let m = WedgeModel::reference();
        let w = Rect::new(2.0, 3.0, -0.5, 0.5).unwrap();
        let r = impact_hill_region(&m, 0.05, &w, 64).unwrap();
        assert_eq!(r.polylines_tagged(PartTag::WallPart).count(), 0);
        assert!(r.corners.is_empty());
        assert!(r.polylines_tagged(PartTag::InteriorPart).count() > 0);
    }

    #[test]
    fn mirror_symmetry() {
        let (m, w) = fig2();
        let r = impact_hill_region(&m, 0.5, &w, 96).unwrap();
        let mirrored: Vec<Polyline> = r
            .boundary
            .iter()
            .map(|l| l.iter().map(|p| [p[0], -p[1]]).collect())
            .collect();
        assert!(hausdorff_distance(&r.boundary, &mirrored).unwrap() < 1e-9);
    }

    #[test]
    fn smooth_boundary_far_from_walls_matches_background() {
        let (m, w) = fig2();
        let r = smooth_hill_boundary(&m, 0.5, 0.01, &w, 128).unwrap();
        for p in r.boundary.iter().flatten() {
            let v = m.with_epsilon(0.01).potential_value(p) - 0.5;
            assert!(v.abs() < 1e-9, "{p:?} {v}");
        }
        assert!(smooth_hill_boundary(&m, 0.5, 0.0, &w, 128).is_err());
    }

    #[test]
    fn input_checks() {
        let (m, w) = fig2();
        assert!(impact_hill_region(&m, 0.5, &w, 32).is_err());
        assert!(impact_hill_region(&m, -10.0, &w, 64).is_err());
        let m3 = m.with_oscillator(3f64.sqrt(), 0.0, 0.0);
        assert!(impact_hill_region(&m3, 0.5, &w, 64).is_err());
    }

    #[test]
    fn hausdorff_examples() {
        let a = vec![vec![[0.0, 0.0], [1.0, 0.0]]];
        let b = vec![vec![[0.0, 0.1], [1.0, 0.1]]];
        assert!((hausdorff_distance(&a, &b).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        assert!(hausdorff_distance(&a, &[]).is_err());
        assert!(hausdorff_distance_away_from(&a, &b, &[[0.0, 0.0]], 0.5).unwrap() < 0.1 + 1e-15);
    }

    /// Model whose saddle sits off the axis, so `U = H*` can be tangent to
    /// the upper wall; the sign of `dU/dn` there follows `u2 - u2s`.
    fn tangent_corner(u2s: f64) -> (WedgeModel, [f64; 2]) {
        let mut m = WedgeModel::reference().with_lambda(0.5);
        m.u2s = u2s;
        let (a, b, _) = wall_quadratic(&m, Wall::Upper);
        let s = -b / (2.0 * a);
        let d = m.wall_direction(Wall::Upper);
        (m, [s * d[0], s * d[1]])
    }

    #[test]
    fn tangent_corner_classes() {
        let (m, p) = tangent_corner(0.0);
        assert!(p[1] > 0.0);
        assert_eq!(
            classify_corner(&m, p, Wall::Upper),
            CornerClass::Bifurcating
        );
        let (m, p) = tangent_corner(5.0);
        assert!(p[1] < 5.0);
        assert_eq!(
            classify_corner(&m, p, Wall::Upper),
            CornerClass::InteriorNonTransverse
        );
        let (m, _) = fig2();
        assert_eq!(
            classify_corner(&m, [1.13, 0.65], Wall::Upper),
            CornerClass::Transverse
        );
    }
}
