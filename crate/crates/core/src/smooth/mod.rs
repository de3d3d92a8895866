//! Smooth impact flow: the Hamiltonian flow of `|p|^2/2 + U + V(.; epsilon)`
//! integrated with an adaptive eighth-order Runge–Kutta method.

mod integrator;
mod tableau;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{PhaseState, WedgeModel};
use integrator::{drive, Field, Node, Stepper};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Relative energy drift `|H - H0| / max(|H0|, 1)` that aborts a run.
    pub energy_drift_abort: f64,
    /// Upper bound on integration time when waiting for section crossings.
    pub max_time: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 0.1,
            energy_drift_abort: 1e-6,
            max_time: 1e3,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.max_step > 0.0 && self.max_time > 0.0)
        {
            return Err(Error::domain(
                "integrator tolerances, max_step and max_time must be positive",
            ));
        }
        if !(self.energy_drift_abort > self.rel_tol) {
            return Err(Error::domain("energy_drift_abort must exceed rel_tol"));
        }
        Ok(())
    }

    /// Tight settings used for finite-difference Jacobians.
    pub fn precise() -> Self {
        IntegratorConfig {
            rel_tol: 1e-13,
            abs_tol: 1e-15,
            max_step: 0.05,
            energy_drift_abort: 1e-8,
            max_time: 1e3,
        }
    }
}

/// Restriction of section crossings to a thin slab of another coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Slab {
    pub index: usize,
    pub half_width: f64,
    /// Required sign of the slab coordinate's momentum; 0 accepts both.
    pub velocity_sign: i8,
}

/// Poincaré section `q[coordinate] = value`, crossed with momentum sign
/// `direction`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SectionSpec {
    pub coordinate: usize,
    pub value: f64,
    pub direction: i8,
    pub slab: Option<Slab>,
}

impl Default for SectionSpec {
    fn default() -> Self {
        SectionSpec {
            coordinate: 1,
            value: 0.0,
            direction: 1,
            slab: None,
        }
    }
}

impl SectionSpec {
    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.coordinate >= dim || !(self.direction == 1 || self.direction == -1) {
            return Err(Error::domain(
                "section needs a valid coordinate and direction +1 or -1",
            ));
        }
        if let Some(s) = self.slab {
            if s.index >= dim || s.index == self.coordinate || !(s.half_width > 0.0) {
                return Err(Error::domain(
                    "slab needs a distinct valid index and positive half width",
                ));
            }
        }
        Ok(())
    }
}

pub(crate) struct SmoothField {
    pub model: WedgeModel,
    d: usize,
}

impl SmoothField {
    pub fn new(model: &WedgeModel) -> Result<Self> {
        if !(model.epsilon > 0.0) {
            return Err(Error::domain(
                "the smooth flow needs epsilon > 0; use the impact flow for epsilon = 0",
            ));
        }
        Ok(SmoothField {
            model: *model,
            d: model.dim(),
        })
    }
}

impl Field for SmoothField {
    fn dim(&self) -> usize {
        2 * self.d
    }

    fn eval(&self, y: &[f64], dy: &mut [f64]) {
        let d = self.d;
        let (dq, dp) = dy.split_at_mut(d);
        dq.copy_from_slice(&y[d..]);
        self.model.potential_into(&y[..d], dp);
        for g in dp.iter_mut() {
            *g = -*g;
        }
    }
}

/// Phase-space velocity `(p, -grad U - grad V)` in flat `[q, p]` layout.
pub fn smooth_rhs(model: &WedgeModel, s: &PhaseState) -> Result<Vec<f64>> {
    let f = SmoothField::new(model)?;
    if s.dim() != model.dim() {
        return Err(Error::domain("state dimension does not match the model"));
    }
    let mut dy = vec![0.0; 2 * s.dim()];
    f.eval(&s.to_flat(), &mut dy);
    Ok(dy)
}

/// Energy-drift and escape guards shared by every integration.
struct Guards {
    model: WedgeModel,
    h0: f64,
    drift_abort: f64,
    escape: f64,
}

impl Guards {
    fn new(model: &WedgeModel, y0: &[f64], cfg: &IntegratorConfig) -> Self {
        let d = model.dim();
        Guards {
            model: *model,
            h0: model.energy_unchecked(&y0[..d], &y0[d..]),
            drift_abort: cfg.energy_drift_abort,
            escape: -10.0 * model.epsilon,
        }
    }

    fn drift(&self, y: &[f64]) -> f64 {
        let d = self.model.dim();
        let h = self.model.energy_unchecked(&y[..d], &y[d..]);
        (h - self.h0).abs() / self.h0.abs().max(1.0)
    }

    fn check(&self, t: f64, y: &[f64]) -> Result<()> {
        let drift = self.drift(y);
        if !(drift <= self.drift_abort) {
            return Err(Error::EnergyDriftExceeded { drift, t });
        }
        let (a, b) = self.model.patterns(y);
        if a < self.escape || b < self.escape {
            return Err(Error::Escaped { t });
        }
        Ok(())
    }
}

/// Dense-output solution of the smooth flow.
#[derive(Debug, Clone)]
pub struct SmoothTrajectory {
    model: WedgeModel,
    cfg: IntegratorConfig,
    nodes: Vec<Node>,
    /// Largest relative energy drift seen at the step nodes.
    pub max_drift: f64,
}

impl SmoothTrajectory {
    pub fn t_start(&self) -> f64 {
        self.nodes[0].t
    }

    pub fn t_end(&self) -> f64 {
        self.nodes.last().map(|n| n.t).unwrap_or(0.0)
    }

    pub fn steps(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn final_state(&self) -> PhaseState {
        let n = self.nodes.last().expect("non-empty trajectory");
        PhaseState::from_flat(&n.y, n.t)
    }

    /// Interpolated state at `t` between the first and last node.
    pub fn state_at(&self, t: f64) -> PhaseState {
        let forward = self.t_end() >= self.t_start();
        let idx = if forward {
            self.nodes.partition_point(|n| n.t <= t)
        } else {
            self.nodes.partition_point(|n| n.t >= t)
        };
        let node = &self.nodes[idx.saturating_sub(1).min(self.nodes.len() - 1)];
        let field = SmoothField {
            model: self.model,
            d: self.model.dim(),
        };
        let mut st = Stepper::new(&field, self.cfg.rel_tol, self.cfg.abs_tol);
        PhaseState::from_flat(&st.dense(node, t), t)
    }

    /// Uniform samples `t_start + k dt` up to the end.
    pub fn samples(&self, dt: f64) -> Vec<PhaseState> {
        let span = self.t_end() - self.t_start();
        let n = (span.abs() / dt + 1e-9).floor() as usize;
        let sg = span.signum();
        (0..=n)
            .map(|k| self.state_at(self.t_start() + sg * k as f64 * dt))
            .collect()
    }

    /// States at the accepted step boundaries.
    pub fn node_states(&self) -> Vec<PhaseState> {
        self.nodes
            .iter()
            .map(|n| PhaseState::from_flat(&n.y, n.t))
            .collect()
    }
}

fn check_state(model: &WedgeModel, s0: &PhaseState) -> Result<()> {
    if s0.dim() != model.dim() {
        return Err(Error::domain("state dimension does not match the model"));
    }
    if s0.q.iter().chain(&s0.p).any(|v| !v.is_finite()) {
        return Err(Error::domain("non-finite initial state"));
    }
    Ok(())
}

/// Integrates the smooth flow for time `span` (negative runs backwards).
pub fn integrate_smooth(
    model: &WedgeModel,
    s0: &PhaseState,
    span: f64,
    cfg: &IntegratorConfig,
) -> Result<SmoothTrajectory> {
    cfg.validate()?;
    check_state(model, s0)?;
    let field = SmoothField::new(model)?;
    let y0 = s0.to_flat();
    let guards = Guards::new(model, &y0, cfg);
    guards.check(s0.t, &y0)?;
    let mut st = Stepper::new(&field, cfg.rel_tol, cfg.abs_tol);
    let mut max_drift = 0.0f64;
    let nodes = drive(&mut st, &y0, s0.t, span, cfg.max_step, |_, _, t1, y1| {
        guards.check(t1, y1)?;
        max_drift = max_drift.max(guards.drift(y1));
        Ok(true)
    })?;
    Ok(SmoothTrajectory {
        model: *model,
        cfg: *cfg,
        nodes,
        max_drift,
    })
}

/// Crossing of `q[c] = value` inside the step from `node` to `t1`; `d` is
/// the configuration dimension.
fn locate<F: Field>(
    st: &mut Stepper<'_, F>,
    node: &Node,
    t1: f64,
    y1: &[f64],
    spec: &SectionSpec,
    d: usize,
) -> (f64, Vec<f64>) {
    let c = spec.coordinate;
    let g = |y: &[f64]| y[c] - spec.value;
    let (mut ta, mut ga) = (node.t, g(&node.y));
    let (mut tb, mut gb) = (t1, g(y1));
    let mut yb = y1.to_vec();
    // Illinois variant of regula falsi, then Newton with g' = p_c
    let mut side = 0i8;
    for _ in 0..60 {
        if (tb - ta).abs() <= 1e-14 * tb.abs().max(1.0) {
            break;
        }
        let t = (ta * gb - tb * ga) / (gb - ga);
        let t = if t > ta.min(tb) && t < ta.max(tb) {
            t
        } else {
            0.5 * (ta + tb)
        };
        let y = st.dense(node, t);
        let gt = g(&y);
        if gt == 0.0 {
            return (t, y);
        }
        if (gt > 0.0) == (gb > 0.0) {
            tb = t;
            gb = gt;
            yb = y;
            if side == 1 {
                ga *= 0.5;
            }
            side = 1;
        } else {
            ta = t;
            ga = gt;
            if side == -1 {
                gb *= 0.5;
            }
            side = -1;
        }
    }
    let mut t = tb;
    let mut y = yb;
    for _ in 0..2 {
        let rate = y[d + c];
        if rate == 0.0 {
            break;
        }
        let next = t - g(&y) / rate;
        if (next - t).abs() > 1e-6 {
            break;
        }
        t = next;
        y = st.dense(node, t);
    }
    (t, y)
}

fn accepts(spec: &SectionSpec, model: &WedgeModel, y: &[f64], d: usize) -> bool {
    let Some(slab) = spec.slab else { return true };
    let centre = if slab.index == 2 {
        model.oscillator.map_or(0.0, |o| o.u3s)
    } else {
        0.0
    };
    if (y[slab.index] - centre).abs() > slab.half_width {
        return false;
    }
    match slab.velocity_sign {
        0 => true,
        s => (y[d + slab.index] > 0.0) == (s > 0),
    }
}

/// Section crossings of any field whose leading `2d` components are the
/// phase-space state.
fn crossings_of<F: Field>(
    field: &F,
    model: &WedgeModel,
    y0: &[f64],
    t0: f64,
    n: usize,
    spec: &SectionSpec,
    cfg: &IntegratorConfig,
) -> Result<Vec<(f64, Vec<f64>)>> {
    cfg.validate()?;
    spec.validate(model.dim())?;
    if n == 0 {
        return Err(Error::domain("at least one crossing must be requested"));
    }
    let d = model.dim();
    let guards = Guards::new(model, &y0[..2 * d], cfg);
    guards.check(t0, &y0[..2 * d])?;
    let mut st = Stepper::new(field, cfg.rel_tol, cfg.abs_tol);
    let c = spec.coordinate;
    let dir = spec.direction as f64;
    let mut out = Vec::with_capacity(n);
    drive(
        &mut st,
        y0,
        t0,
        cfg.max_time,
        cfg.max_step,
        |st, node, t1, y1| {
            guards.check(t1, &y1[..2 * d])?;
            let ga = dir * (node.y[c] - spec.value);
            let gb = dir * (y1[c] - spec.value);
            if ga < 0.0 && gb >= 0.0 {
                let (t, y) = locate(st, node, t1, y1, spec, d);
                if accepts(spec, model, &y, d) {
                    out.push((t, y));
                }
            }
            Ok(out.len() < n)
        },
    )?;
    if out.len() < n {
        return Err(Error::Timeout {
            found: out.len(),
            wanted: n,
            t_max: t0 + cfg.max_time,
        });
    }
    Ok(out)
}

/// First `n` crossings of the section (with the slab filter), excluding
/// the starting point itself.
pub fn section_crossings(
    model: &WedgeModel,
    s0: &PhaseState,
    n: usize,
    spec: &SectionSpec,
    cfg: &IntegratorConfig,
) -> Result<Vec<PhaseState>> {
    check_state(model, s0)?;
    let field = SmoothField::new(model)?;
    let out = crossings_of(&field, model, &s0.to_flat(), s0.t, n, spec, cfg)?;
    Ok(out
        .into_iter()
        .map(|(t, y)| PhaseState::from_flat(&y, t))
        .collect())
}

/// Planar flow together with its linearization acting on `K` tangent
/// vectors, laid out as `[z, w_1, .., w_K]`.
struct TangentField {
    model: WedgeModel,
    k: usize,
}

impl Field for TangentField {
    fn dim(&self) -> usize {
        4 * (self.k + 1)
    }

    fn eval(&self, y: &[f64], dy: &mut [f64]) {
        dy[0] = y[2];
        dy[1] = y[3];
        let mut g = [0.0; 2];
        self.model.potential_into(&y[..2], &mut g);
        dy[2] = -g[0];
        dy[3] = -g[1];
        let hs = self.model.hessian_planar(&y[..2]);
        for j in 1..=self.k {
            let w = &y[4 * j..4 * j + 4];
            let o = &mut dy[4 * j..4 * j + 4];
            o[0] = w[2];
            o[1] = w[3];
            o[2] = -(hs[0][0] * w[0] + hs[0][1] * w[1]);
            o[3] = -(hs[1][0] * w[0] + hs[1][1] * w[1]);
        }
    }
}

/// First section crossing of the planar smooth flow from `s0`, with the
/// tangent vectors `tangents` transported to the crossing time (not
/// projected onto the section).
pub(crate) fn crossing_with_tangents(
    model: &WedgeModel,
    s0: &PhaseState,
    tangents: &[[f64; 4]],
    spec: &SectionSpec,
    cfg: &IntegratorConfig,
) -> Result<(PhaseState, Vec<[f64; 4]>)> {
    check_state(model, s0)?;
    if model.dim() != 2 {
        return Err(Error::domain(
            "tangent transport is implemented for the planar model",
        ));
    }
    SmoothField::new(model)?;
    let field = TangentField {
        model: *model,
        k: tangents.len(),
    };
    let mut y0 = s0.to_flat();
    for w in tangents {
        y0.extend_from_slice(w);
    }
    let (t, y) = crossings_of(&field, model, &y0, s0.t, 1, spec, cfg)?.remove(0);
    let ws = (1..=tangents.len())
        .map(|j| [y[4 * j], y[4 * j + 1], y[4 * j + 2], y[4 * j + 3]])
        .collect();
    Ok((PhaseState::from_flat(&y[..4], t), ws))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fig3_smooth() -> WedgeModel {
        WedgeModel::reference().with_epsilon(0.1)
    }

    #[test]
    fn rhs_vanishes_at_saddle() {
        let m = fig3_smooth();
        let s = PhaseState::planar(2.5, 0.0, 0.0, 0.0);
        let f = smooth_rhs(&m, &s).unwrap();
        // wall term at the saddle: b exp(-2.5 sin(pi/6) / 0.1) ~ 4e-5
        assert!(f[2].abs() < 1e-3 && f[3].abs() < 1e-12);
        let deep = WedgeModel::reference().with_epsilon(0.01);
        let f = smooth_rhs(&deep, &s).unwrap();
        assert!(f[2].hypot(f[3]) < 1e-10);
    }

    #[test]
    fn rhs_pushes_inward_at_wall() {
        let m = fig3_smooth();
        let d = m.wall_direction(crate::Wall::Upper);
        let n = m.inward_normal(crate::Wall::Upper);
        let s = PhaseState::planar(6.0 * d[0], 6.0 * d[1], 0.0, 0.0);
        let f = smooth_rhs(&m, &s).unwrap();
        let mut g = [0.0; 2];
        m.background_into(&s.q, &mut g);
        let push = (f[2] + g[0]) * n[0] + (f[3] + g[1]) * n[1];
        assert_relative_eq!(push, m.b / m.epsilon, max_relative = 1e-6);
    }

    #[test]
    fn requires_positive_epsilon() {
        let s = PhaseState::planar(9.0, 0.0, 0.0, 1.0);
        assert!(smooth_rhs(&WedgeModel::reference(), &s).is_err());
    }

    #[test]
    fn reversibility() {
        let m = fig3_smooth();
        let s0 = PhaseState::planar(9.23, 0.0, 0.0, 4.91);
        let cfg = IntegratorConfig::default();
        let fwd = integrate_smooth(&m, &s0, 1.7, &cfg).unwrap();
        let back = integrate_smooth(&m, &fwd.final_state(), -1.7, &cfg).unwrap();
        assert!(back.final_state().distance(&s0) < 1e-7);
    }

    #[test]
    fn starting_on_section_skips_start() {
        let m = fig3_smooth();
        let s0 = PhaseState::planar(9.23, 0.0, 0.0, 4.91);
        let cfg = IntegratorConfig::default();
        let x = section_crossings(&m, &s0, 1, &SectionSpec::default(), &cfg).unwrap();
        assert!(x[0].t > 1.0);
        assert!(x[0].q[1].abs() < 1e-12);
        assert!(x[0].p[1] > 0.0);
    }

    #[test]
    fn dense_output_matches_nodes() {
        let m = fig3_smooth();
        let s0 = PhaseState::planar(9.23, 0.0, 0.0, 4.91);
        let tr = integrate_smooth(&m, &s0, 1.0, &IntegratorConfig::default()).unwrap();
        let nodes = tr.node_states();
        let k = nodes.len() / 2;
        assert!(tr.state_at(nodes[k].t).distance(&nodes[k]) < 1e-12);
    }

    #[test]
    fn config_validation() {
        let bad = IntegratorConfig {
            energy_drift_abort: 1e-12,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let spec = SectionSpec {
            coordinate: 5,
            ..Default::default()
        };
        assert!(spec.validate(2).is_err());
    }
}
