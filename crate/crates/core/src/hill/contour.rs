//! Marching squares on a uniform grid. Edge crossings are located by
//! bracketed root finding on the exact function rather than by linear
//! interpolation, so steep wall layers narrower than a cell still land on
//! the level set.

use std::collections::HashMap;

use crate::conditions::Rect;
use crate::par;

pub type Polyline = Vec<[f64; 2]>;

struct Grid<'a, F> {
    f: &'a F,
    window: Rect,
    nx: usize,
    ny: usize,
    values: Vec<f64>,
}

fn inside(v: f64) -> bool {
    v < 0.0
}

impl<F: Fn([f64; 2]) -> f64 + Sync> Grid<'_, F> {
    fn node(&self, i: usize, j: usize) -> [f64; 2] {
        [
            self.window.x0 + self.window.width() * i as f64 / self.nx as f64,
            self.window.y0 + self.window.height() * j as f64 / self.ny as f64,
        ]
    }

    fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * (self.nx + 1) + i]
    }

    /// Horizontal edge `(i, j) - (i+1, j)` gets `2 k`, vertical edge
    /// `(i, j) - (i, j+1)` gets `2 k + 1`, with `k` the index of `(i, j)`.
    fn edge_nodes(&self, id: usize) -> ((usize, usize), (usize, usize)) {
        let k = id / 2;
        let (i, j) = (k % (self.nx + 1), k / (self.nx + 1));
        if id % 2 == 0 {
            ((i, j), (i + 1, j))
        } else {
            ((i, j), (i, j + 1))
        }
    }

    fn h_edge(&self, i: usize, j: usize) -> usize {
        2 * (j * (self.nx + 1) + i)
    }

    fn v_edge(&self, i: usize, j: usize) -> usize {
        2 * (j * (self.nx + 1) + i) + 1
    }

    fn crossing(&self, id: usize) -> [f64; 2] {
        let ((ia, ja), (ib, jb)) = self.edge_nodes(id);
        let (a, b) = (self.node(ia, ja), self.node(ib, jb));
        let at = |t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let (mut flo, mut fhi) = (self.value(ia, ja), self.value(ib, jb));
        let mut side = 0i8;
        // every third step bisects, which bounds the work when the two ends
        // differ by hundreds of orders of magnitude
        for it in 0..200 {
            if hi - lo <= 1e-13 {
                break;
            }
            let mut t = if it % 3 != 2 && flo.is_finite() && fhi.is_finite() && flo != fhi {
                (lo * fhi - hi * flo) / (fhi - flo)
            } else {
                0.5 * (lo + hi)
            };
            if !(t > lo && t < hi) {
                t = 0.5 * (lo + hi);
            }
            let ft = (self.f)(at(t));
            if ft == 0.0 {
                return at(t);
            }
            if inside(ft) == inside(fhi) {
                hi = t;
                fhi = ft;
                if side == 1 {
                    flo *= 0.5;
                }
                side = 1;
            } else {
                lo = t;
                flo = ft;
                if side == -1 {
                    fhi *= 0.5;
                }
                side = -1;
            }
        }
        at(0.5 * (lo + hi))
    }

    /// Pairs of crossed edges per cell.
    fn segments(&self) -> Vec<[usize; 2]> {
        let mut out = Vec::new();
        for j in 0..self.ny {
            for i in 0..self.nx {
                let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
                let ins = corners.map(|(a, b)| inside(self.value(a, b)));
                // edge k joins corner k and corner k+1
                let edges = [
                    self.h_edge(i, j),
                    self.v_edge(i + 1, j),
                    self.h_edge(i, j + 1),
                    self.v_edge(i, j),
                ];
                let crossed: Vec<usize> = (0..4).filter(|&k| ins[k] != ins[(k + 1) % 4]).collect();
                match crossed.len() {
                    2 => out.push([edges[crossed[0]], edges[crossed[1]]]),
                    4 => {
                        let c = self.node(i, j);
                        let d = self.node(i + 1, j + 1);
                        let centre = inside((self.f)([0.5 * (c[0] + d[0]), 0.5 * (c[1] + d[1])]));
                        // cut off the corners whose side differs from the centre
                        for k in 0..4 {
                            if ins[k] != centre {
                                out.push([edges[(k + 3) % 4], edges[k]]);
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
        out
    }
}

/// Zero level set of `f` on a `nx` by `ny` cell grid over `window`, as
/// chained polylines. Closed loops repeat their first point at the end.
pub(crate) fn level_set<F>(f: &F, window: &Rect, nx: usize, ny: usize) -> Vec<Polyline>
where
    F: Fn([f64; 2]) -> f64 + Sync,
{
    let mut grid = Grid {
        f,
        window: *window,
        nx,
        ny,
        values: Vec::new(),
    };
    grid.values = par::map_range((nx + 1) * (ny + 1), |k| {
        let (i, j) = (k % (nx + 1), k / (nx + 1));
        f(grid.node(i, j))
    });
    let segs = grid.segments();

    let mut ids: Vec<usize> = segs.iter().flatten().copied().collect();
    ids.sort_unstable();
    ids.dedup();
    let pts = par::map(&ids, |&id| grid.crossing(id));
    let point: HashMap<usize, [f64; 2]> = ids.iter().copied().zip(pts).collect();

    let mut links: HashMap<usize, Vec<usize>> = HashMap::new();
    for (s, seg) in segs.iter().enumerate() {
        for e in seg {
            links.entry(*e).or_default().push(s);
        }
    }
    let mut used = vec![false; segs.len()];
    let walk = |start_edge: usize, first: usize, used: &mut Vec<bool>| -> Polyline {
        let mut line = vec![point[&start_edge]];
        let (mut edge, mut seg) = (start_edge, first);
        loop {
            used[seg] = true;
            let next = if segs[seg][0] == edge {
                segs[seg][1]
            } else {
                segs[seg][0]
            };
            line.push(point[&next]);
            edge = next;
            match links[&edge].iter().find(|&&s| !used[s]) {
                Some(&s) => seg = s,
                None => break,
            }
        }
        line
    };

    let mut lines = Vec::new();
    let mut ends: Vec<usize> = links
        .iter()
        .filter(|(_, v)| v.len() == 1)
        .map(|(e, _)| *e)
        .collect();
    ends.sort_unstable();
    for e in ends {
        let s = links[&e][0];
        if !used[s] {
            lines.push(walk(e, s, &mut used));
        }
    }
    for s in 0..segs.len() {
        if !used[s] {
            lines.push(walk(segs[s][0], s, &mut used));
        }
    }
    lines
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_is_one_closed_loop() {
        let w = Rect::new(-2.0, 2.0, -2.0, 2.0).unwrap();
        let f = |p: [f64; 2]| p[0] * p[0] + p[1] * p[1] - 1.0;
        let lines = level_set(&f, &w, 64, 64);
        assert_eq!(lines.len(), 1);
        let l = &lines[0];
        assert_eq!(l.first(), l.last());
        for p in l {
            assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn open_curves_end_on_the_window() {
        let w = Rect::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        let f = |p: [f64; 2]| p[1] - 0.3 * p[0];
        let lines = level_set(&f, &w, 16, 16);
        assert_eq!(lines.len(), 1);
        let l = &lines[0];
        assert!(
            (l[0][0].abs() - 1.0).abs() < 1e-12 && (l.last().unwrap()[0].abs() - 1.0).abs() < 1e-12
        );
    }

    #[test]
    fn infinite_values_are_bracketed() {
        let w = Rect::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        let f = |p: [f64; 2]| {
            if p[0] > 0.25 {
                f64::INFINITY
            } else {
                (5000.0 * (p[0] - 0.2)).exp() - 1.0
            }
        };
        let lines = level_set(&f, &w, 8, 8);
        assert_eq!(lines.len(), 1);
        for p in &lines[0] {
            assert!((p[0] - 0.2).abs() < 1e-10, "{p:?}");
        }
    }
}
