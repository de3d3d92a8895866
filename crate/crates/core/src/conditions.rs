//! Energy window and numerical checks of the regularity conditions on the
//! exponential wedge walls.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Wall, WedgeModel};

/// Axis-aligned window `[x0, x1] x [y0, y1]` in the `(u1, u2)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        let r = Rect { x0, x1, y0, y1 };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.x0, self.x1, self.y0, self.y1]
            .iter()
            .all(|v| v.is_finite())
            && self.x1 > self.x0
            && self.y1 > self.y0;
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "degenerate or non-finite window {self:?}"
            )))
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    /// Arc-length interval `[s0, s1]` of `wall` (parametrised from the vertex)
    /// lying inside the window, if any.
    pub fn clip_wall(&self, model: &WedgeModel, wall: Wall) -> Option<(f64, f64)> {
        let d = model.wall_direction(wall);
        let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
        for (dk, a, b) in [(d[0], self.x0, self.x1), (d[1], self.y0, self.y1)] {
            if dk.abs() < 1e-300 {
                if 0.0 < a || 0.0 > b {
                    return None;
                }
                continue;
            }
            let (t0, t1) = if dk > 0.0 {
                (a / dk, b / dk)
            } else {
                (b / dk, a / dk)
            };
            lo = lo.max(t0);
            hi = hi.min(t1);
        }
        (hi >= lo).then_some((lo, hi))
    }

    fn intersects_wedge(&self, model: &WedgeModel) -> bool {
        let corners = [
            (self.x0, self.y0),
            (self.x0, self.y1),
            (self.x1, self.y0),
            (self.x1, self.y1),
        ];
        corners
            .iter()
            .any(|&(x, y)| model.in_closed_wedge(&[x, y], 0.0))
            || Wall::BOTH
                .iter()
                .any(|&w| self.clip_wall(model, w).is_some())
    }
}

/// Minimum of the planar background `U` over the window's portion of the
/// wedge boundary, or `None` when no wall crosses the window.
///
/// `U` restricted to a straight wall is a quadratic in arc length, so the
/// minimum is found exactly from three samples.
pub fn wall_minimum(model: &WedgeModel, window: &Rect) -> Option<(f64, [f64; 2])> {
    let planar = model.planar();
    let mut best: Option<(f64, [f64; 2])> = None;
    for wall in Wall::BOTH {
        let Some((s0, s1)) = window.clip_wall(&planar, wall) else {
            continue;
        };
        let d = planar.wall_direction(wall);
        let at = |s: f64| planar.background_value(&[s * d[0], s * d[1]]);
        let (f0, f1, f2) = (at(0.0), at(1.0), at(2.0));
        let a = 0.5 * (f2 - 2.0 * f1 + f0);
        let b = f1 - f0 - a;
        let mut cands = vec![s0, s1];
        if a > 0.0 {
            let s = -b / (2.0 * a);
            if s > s0 && s < s1 {
                cands.push(s);
            }
        }
        for s in cands {
            let u = at(s);
            if best.is_none_or(|(m, _)| u < m) {
                best = Some((u, [s * d[0], s * d[1]]));
            }
        }
    }
    best
}

/// Energy bookkeeping for a Hill's-region or propagation run.
///
/// The exponential wall has an unbounded barrier; `e_barrier` holds the
/// effective finite barrier `b`, the wall value at zero pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBudget {
    pub h_star: f64,
    pub e_barrier: f64,
    pub u_hat: f64,
}

impl EnergyBudget {
    pub fn for_window(model: &WedgeModel, window: &Rect, h_star: f64) -> Result<Self> {
        window.validate()?;
        if !window.intersects_wedge(model) {
            return Err(Error::domain("window does not intersect the wedge"));
        }
        let u_hat = wall_minimum(model, window).map_or(f64::INFINITY, |(u, _)| u);
        Ok(EnergyBudget {
            h_star,
            e_barrier: model.b,
            u_hat,
        })
    }

    /// `U_hat < H* < E + U_hat`. Without a wall in the window only the
    /// upper bound is void, and any finite energy below it is accepted.
    pub fn is_admissible(&self) -> bool {
        if self.u_hat.is_infinite() {
            return self.h_star.is_finite();
        }
        self.u_hat < self.h_star && self.h_star < self.e_barrier + self.u_hat
    }

    pub fn require_admissible(&self) -> Result<()> {
        if self.is_admissible() {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "energy {} outside the admissible window ({}, {})",
                self.h_star,
                self.u_hat,
                self.e_barrier + self.u_hat
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionSettings {
    /// Margin defining the compact interior set `K = {Q_upper, Q_lower > delta_k}`.
    pub delta_k: f64,
    /// Grid points per axis used to sample `K`.
    pub samples: usize,
}

impl Default for ConditionSettings {
    fn default() -> Self {
        ConditionSettings {
            delta_k: 0.5,
            samples: 201,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonCheck {
    pub epsilon: f64,
    pub max_v_on_k: f64,
    pub max_grad_v_on_k: f64,
    pub barrier_monotone: bool,
    pub sup_inverse: f64,
    pub sup_inverse_derivative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub delta_k: f64,
    pub per_epsilon: Vec<EpsilonCheck>,
    /// `V` and `|grad V|` on `K` strictly decrease along the epsilon list.
    pub interior_decay: bool,
    /// Inverse barrier and its derivative strictly decrease along the list.
    pub inverse_decay: bool,
    pub u_hat: Option<f64>,
    pub u_hat_at: Option<[f64; 2]>,
    /// Nominal barrier height; infinite for the exponential wall.
    pub barrier_nominal: f64,
    pub barrier_effective: f64,
    /// `-E < U_hat` with the effective barrier.
    pub no_escape: bool,
}

pub fn check_conditions(
    model: &WedgeModel,
    window: &Rect,
    epsilons: &[f64],
) -> Result<ConditionReport> {
    check_conditions_with(model, window, epsilons, &ConditionSettings::default())
}

pub fn check_conditions_with(
    model: &WedgeModel,
    window: &Rect,
    epsilons: &[f64],
    settings: &ConditionSettings,
) -> Result<ConditionReport> {
    window.validate()?;
    let planar = model.planar();
    if !window.intersects_wedge(&planar) {
        return Err(Error::domain("window does not intersect the wedge"));
    }
    if epsilons.is_empty() || epsilons.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::domain(
            "epsilons must be a non-empty list of positive values",
        ));
    }
    if epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::domain("epsilons must be sorted strictly decreasing"));
    }
    if settings.samples < 2 || !(settings.delta_k > 0.0) {
        return Err(Error::domain("invalid condition-check settings"));
    }

    let n = settings.samples;
    let k_points: Vec<[f64; 2]> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| {
            let x = window.x0 + window.width() * i as f64 / (n - 1) as f64;
            let y = window.y0 + window.height() * j as f64 / (n - 1) as f64;
            [x, y]
        })
        .filter(|q| {
            let (a, b) = planar.patterns(q);
            a > settings.delta_k && b > settings.delta_k
        })
        .collect();
    if k_points.is_empty() {
        return Err(Error::domain("compact set K is empty in this window"));
    }

    let b = model.b;
    let mut per_epsilon = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let m = planar.with_epsilon(eps);
        let (mut vmax, mut gmax) = (0.0f64, 0.0f64);
        let mut g = [0.0; 2];
        for q in &k_points {
            let v = m.wall_into(q, &mut g);
            vmax = vmax.max(v);
            gmax = gmax.max(g[0].hypot(g[1]));
        }

        // W(Q) = b exp(-Q/eps) sampled across the boundary layer
        let ws: Vec<f64> = (0..=400)
            .map(|i| b * (-eps * (-2.0 + 0.05 * i as f64) / eps).exp())
            .collect();
        let barrier_monotone = ws.windows(2).all(|w| w[1] < w[0]);

        // inverse Q(W) = -eps ln(W/b) on [0.1 b, 0.9 b]
        let (mut qsup, mut dqsup) = (0.0f64, 0.0f64);
        for i in 0..=200 {
            let w = b * (0.1 + 0.8 * i as f64 / 200.0);
            qsup = qsup.max((-eps * (w / b).ln()).abs());
            dqsup = dqsup.max((eps / w).abs());
        }
        per_epsilon.push(EpsilonCheck {
            epsilon: eps,
            max_v_on_k: vmax,
            max_grad_v_on_k: gmax,
            barrier_monotone,
            sup_inverse: qsup,
            sup_inverse_derivative: dqsup,
        });
    }

    let strictly =
        |f: fn(&EpsilonCheck) -> f64| per_epsilon.windows(2).all(|w| f(&w[1]) < f(&w[0]));
    let interior_decay = strictly(|c| c.max_v_on_k) && strictly(|c| c.max_grad_v_on_k);
    let inverse_decay = strictly(|c| c.sup_inverse) && strictly(|c| c.sup_inverse_derivative);

    let wall_min = wall_minimum(&planar, window);
    let no_escape = wall_min.is_none_or(|(u, _)| -b < u);
    Ok(ConditionReport {
        delta_k: settings.delta_k,
        per_epsilon,
        interior_decay,
        inverse_decay,
        u_hat: wall_min.map(|(u, _)| u),
        u_hat_at: wall_min.map(|(_, q)| q),
        barrier_nominal: f64::INFINITY,
        barrier_effective: b,
        no_escape,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fig2_window() -> Rect {
        Rect::new(0.0, 12.0, -4.0, 4.0).unwrap()
    }

    #[test]
    fn interior_decay_matches_analytic_ratio() {
        let m = WedgeModel::reference();
        let r = check_conditions(&m, &fig2_window(), &[0.1, 0.01]).unwrap();
        assert!(r.interior_decay);
        let ratio = r.per_epsilon[0].max_v_on_k / r.per_epsilon[1].max_v_on_k;
        assert!(ratio > 1e3, "ratio {ratio}");
        // the sup over K sits at pattern delta_k on both walls at most
        let analytic = (-0.5f64 / 0.1).exp() / (-0.5f64 / 0.01).exp();
        assert!(ratio > 0.5 * analytic.min(1e10));
    }

    #[test]
    fn inverse_barrier_scales_linearly() {
        let m = WedgeModel::reference();
        let r = check_conditions(&m, &fig2_window(), &[0.2, 0.1]).unwrap();
        assert!(r.inverse_decay);
        assert_relative_eq!(
            r.per_epsilon[0].sup_inverse,
            2.0 * r.per_epsilon[1].sup_inverse,
            max_relative = 1e-12
        );
        assert!(r.per_epsilon.iter().all(|c| c.barrier_monotone));
    }

    #[test]
    fn no_escape_with_effective_barrier() {
        let m = WedgeModel::reference();
        let r = check_conditions(&m, &fig2_window(), &[0.1]).unwrap();
        assert!(r.no_escape);
        assert!(r.barrier_nominal.is_infinite());
        assert_eq!(r.barrier_effective, 10.0);
        // U along the wall is convex (lambda^2 tan^2(beta/2) < omega^2) but
        // its minimum on this window is below zero
        let u = r.u_hat.unwrap();
        assert!(u < 0.0 && u > -10.0, "{u}");
    }

    #[test]
    fn global_wall_minimum_is_analytic() {
        let m = WedgeModel::reference();
        let big = Rect::new(0.0, 100.0, -100.0, 100.0).unwrap();
        let (u, q) = wall_minimum(&m, &big).unwrap();
        // U(s) along a wall: s^2/8 - 2.5 s cos(pi/6) + 3.125
        let c = (std::f64::consts::PI / 6.0).cos();
        let s = 4.0 * 2.5 * c;
        assert_relative_eq!(u, s * s / 8.0 - 2.5 * s * c + 3.125, max_relative = 1e-10);
        assert_relative_eq!(q[0], s * c, max_relative = 1e-10);
    }

    #[test]
    fn bad_inputs() {
        let m = WedgeModel::reference();
        let outside = Rect::new(-5.0, -1.0, -1.0, 1.0).unwrap();
        assert!(matches!(
            check_conditions(&m, &outside, &[0.1]),
            Err(Error::Domain(_))
        ));
        assert!(check_conditions(&m, &fig2_window(), &[0.01, 0.1]).is_err());
        assert!(Rect::new(1.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn energy_budget_window() {
        let m = WedgeModel::reference();
        let w = Rect::new(0.0, 6.0, -2.0, 2.0).unwrap();
        let e = EnergyBudget::for_window(&m, &w, 0.5).unwrap();
        assert!(e.is_admissible());
        assert!(EnergyBudget::for_window(&m, &w, 20.0)
            .unwrap()
            .require_admissible()
            .is_err());
    }
}
