//! Wedge geometry, potential terms and energy bookkeeping.
//!
//! Coordinates are the normal-form coordinates `(u1, u2[, u3])` of the
//! collinear-reaction model, with conjugate momenta `(v1, v2[, v3])`. The
//! billiard domain is the symmetric wedge `|u2| < u1 tan(beta/2)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Position, momentum and time of the point particle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub t: f64,
}

impl PhaseState {
    pub fn new(q: Vec<f64>, p: Vec<f64>, t: f64) -> Result<Self> {
        if q.len() != p.len() || !(2..=3).contains(&q.len()) {
            return Err(Error::domain(format!(
                "q and p must have equal length 2 or 3 (got {} and {})",
                q.len(),
                p.len()
            )));
        }
        if !t.is_finite() || q.iter().chain(&p).any(|x| !x.is_finite()) {
            return Err(Error::domain("phase state has non-finite components"));
        }
        Ok(Self { q, p, t })
    }

    /// Two degree-of-freedom state `(u1, u2, v1, v2)` at `t = 0`.
    pub fn planar(u1: f64, u2: f64, v1: f64, v2: f64) -> Self {
        Self {
            q: vec![u1, u2],
            p: vec![v1, v2],
            t: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    /// Flat `[q..., p...]` layout used by the integrators.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut y = self.q.clone();
        y.extend_from_slice(&self.p);
        y
    }

    pub fn from_flat(y: &[f64], t: f64) -> Self {
        let d = y.len() / 2;
        Self {
            q: y[..d].to_vec(),
            p: y[d..].to_vec(),
            t,
        }
    }

    pub fn speed(&self) -> f64 {
        self.p.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Euclidean phase-space distance, ignoring time.
    pub fn distance(&self, other: &PhaseState) -> f64 {
        self.q
            .iter()
            .chain(&self.p)
            .zip(other.q.iter().chain(&other.p))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Wall {
    Upper,
    Lower,
}

impl Wall {
    pub const BOTH: [Wall; 2] = [Wall::Upper, Wall::Lower];

    pub fn name(self) -> &'static str {
        match self {
            Wall::Upper => "upper",
            Wall::Lower => "lower",
        }
    }

    fn sign(self) -> f64 {
        match self {
            Wall::Upper => 1.0,
            Wall::Lower => -1.0,
        }
    }
}

/// Third degree of freedom: quartic oscillator `U3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Oscillator {
    pub kappa: f64,
    pub u3s: f64,
}

/// Complete parameter set of the wedge model.
///
/// `epsilon = 0` selects the hard-wall impact flow; `epsilon > 0` the smooth
/// flow with the exponential wall potential of strength `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelConfig", into = "ModelConfig")]
pub struct WedgeModel {
    pub beta: f64,
    pub omega: f64,
    pub lambda: f64,
    pub u1s: f64,
    pub u2s: f64,
    pub b: f64,
    pub epsilon: f64,
    pub oscillator: Option<Oscillator>,
    pub delta: f64,
}

/// JSON shape of [`WedgeModel`]: flat keys, optional oscillator fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub beta: f64,
    pub omega: f64,
    pub lambda: f64,
    pub u1s: f64,
    pub u2s: f64,
    pub b: f64,
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u3s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

impl TryFrom<ModelConfig> for WedgeModel {
    type Error = Error;

    fn try_from(c: ModelConfig) -> Result<Self> {
        let oscillator = match (c.kappa, c.u3s) {
            (Some(kappa), u3s) => Some(Oscillator {
                kappa,
                u3s: u3s.unwrap_or(0.0),
            }),
            (None, Some(_)) => return Err(Error::domain("u3s given without kappa")),
            (None, None) => None,
        };
        let model = WedgeModel {
            beta: c.beta,
            omega: c.omega,
            lambda: c.lambda,
            u1s: c.u1s,
            u2s: c.u2s,
            b: c.b,
            epsilon: c.epsilon,
            oscillator,
            delta: c.delta.unwrap_or(0.0),
        };
        model.validate()?;
        Ok(model)
    }
}

impl From<WedgeModel> for ModelConfig {
    fn from(m: WedgeModel) -> Self {
        ModelConfig {
            beta: m.beta,
            omega: m.omega,
            lambda: m.lambda,
            u1s: m.u1s,
            u2s: m.u2s,
            b: m.b,
            epsilon: m.epsilon,
            kappa: m.oscillator.map(|o| o.kappa),
            u3s: m.oscillator.map(|o| o.u3s),
            delta: m.oscillator.map(|_| m.delta),
        }
    }
}

impl WedgeModel {
    /// Symmetric two degree-of-freedom model, validated.
    pub fn new(beta: f64, omega: f64, lambda: f64, u1s: f64, b: f64, epsilon: f64) -> Result<Self> {
        let m = WedgeModel {
            beta,
            omega,
            lambda,
            u1s,
            u2s: 0.0,
            b,
            epsilon,
            oscillator: None,
            delta: 0.0,
        };
        m.validate()?;
        Ok(m)
    }

    /// The reference parameters used throughout: `omega = 1`,
    /// `lambda = sqrt(2)`, `beta = pi/3`, `u1s = 2.5`, `b = 10`, hard wall.
    pub fn reference() -> Self {
        WedgeModel {
            beta: std::f64::consts::FRAC_PI_3,
            omega: 1.0,
            lambda: std::f64::consts::SQRT_2,
            u1s: 2.5,
            u2s: 0.0,
            b: 10.0,
            epsilon: 0.0,
            oscillator: None,
            delta: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.beta,
            self.omega,
            self.lambda,
            self.u1s,
            self.u2s,
            self.b,
            self.epsilon,
            self.delta,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return Err(Error::domain("model parameters must be finite"));
        }
        if !(self.beta > 0.0 && self.beta < std::f64::consts::PI) {
            return Err(Error::domain(format!(
                "beta = {} outside (0, pi)",
                self.beta
            )));
        }
        if self.omega <= 0.0 || self.lambda <= 0.0 || self.b <= 0.0 {
            return Err(Error::domain(
                "omega, lambda and b must be strictly positive",
            ));
        }
        if self.epsilon < 0.0 || self.delta < 0.0 {
            return Err(Error::domain("epsilon and delta must be non-negative"));
        }
        if let Some(o) = self.oscillator {
            if !(o.kappa > 0.0) || !o.u3s.is_finite() {
                return Err(Error::domain("oscillator needs kappa > 0 and finite u3s"));
            }
        } else if self.delta != 0.0 {
            return Err(Error::domain(
                "coupling delta requires the third oscillator",
            ));
        }
        Ok(())
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_b(mut self, b: f64) -> Self {
        self.b = b;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_oscillator(mut self, kappa: f64, u3s: f64, delta: f64) -> Self {
        self.oscillator = Some(Oscillator { kappa, u3s });
        self.delta = delta;
        self
    }

    /// Drops the third degree of freedom.
    pub fn planar(mut self) -> Self {
        self.oscillator = None;
        self.delta = 0.0;
        self
    }

    pub fn dim(&self) -> usize {
        if self.oscillator.is_some() {
            3
        } else {
            2
        }
    }

    pub fn is_hard_wall(&self) -> bool {
        self.epsilon == 0.0
    }

    pub(crate) fn half_sin(&self) -> f64 {
        (0.5 * self.beta).sin()
    }

    pub(crate) fn half_cos(&self) -> f64 {
        (0.5 * self.beta).cos()
    }

    pub(crate) fn half_tan(&self) -> f64 {
        (0.5 * self.beta).tan()
    }

    /// Signed pattern value of `wall` at `q`: positive inside the wedge,
    /// zero on the wall, equal to the Euclidean distance to the wall line.
    pub fn pattern(&self, q: &[f64], wall: Wall) -> f64 {
        q[0] * self.half_sin() - wall.sign() * q[1] * self.half_cos()
    }

    /// `(Q_upper, Q_lower)` at `q`.
    pub fn patterns(&self, q: &[f64]) -> (f64, f64) {
        (self.pattern(q, Wall::Upper), self.pattern(q, Wall::Lower))
    }

    /// Unit inward normal of `wall` in the `(u1, u2)` plane.
    pub fn inward_normal(&self, wall: Wall) -> [f64; 2] {
        [self.half_sin(), -wall.sign() * self.half_cos()]
    }

    /// Unit vector along `wall`, pointing away from the vertex.
    pub fn wall_direction(&self, wall: Wall) -> [f64; 2] {
        [self.half_cos(), wall.sign() * self.half_sin()]
    }

    pub fn in_closed_wedge(&self, q: &[f64], tol: f64) -> bool {
        let (a, b) = self.patterns(q);
        a >= -tol && b >= -tol
    }

    fn check_dim(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.dim() {
            return Err(Error::domain(format!(
                "position has {} components, model has {} degrees of freedom",
                q.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// Background potential `U(q)` and its analytic gradient.
    pub fn background_potential(&self, q: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check_dim(q)?;
        let mut g = vec![0.0; q.len()];
        let u = self.background_into(q, &mut g);
        Ok((u, g))
    }

    /// Steep wall potential `V(q; epsilon)` and its analytic gradient.
    pub fn wall_potential(&self, q: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check_dim(q)?;
        if self.epsilon <= 0.0 {
            return Err(Error::domain(
                "wall potential needs epsilon > 0; use the impact flow for epsilon = 0",
            ));
        }
        let mut g = vec![0.0; q.len()];
        let v = self.wall_into(q, &mut g);
        Ok((v, g))
    }

    /// `U` only; `grad` is overwritten.
    pub(crate) fn background_into(&self, q: &[f64], grad: &mut [f64]) -> f64 {
        let x = q[0] - self.u1s;
        let y = q[1] - self.u2s;
        let w2 = self.omega * self.omega;
        let l2 = self.lambda * self.lambda;
        let mut u = 0.5 * w2 * x * x - 0.5 * l2 * y * y;
        grad[0] = w2 * x;
        grad[1] = -l2 * y;
        if let Some(osc) = self.oscillator {
            let z = q[2] - osc.u3s;
            let k2 = (osc.kappa * self.omega).powi(2);
            u += 0.5 * k2 * z * z + 0.25 * z.powi(4);
            grad[2] = k2 * z + z.powi(3);
            if self.delta != 0.0 {
                let (a, b, c) = (q[0] - q[1], q[1] - q[2], q[2] - q[0]);
                u += self.delta * (a.sin() + b.sin() + c.sin());
                let (ca, cb, cc) = (a.cos(), b.cos(), c.cos());
                grad[0] += self.delta * (ca - cc);
                grad[1] += self.delta * (cb - ca);
                grad[2] += self.delta * (cc - cb);
            }
        }
        u
    }

    /// `V` only; `grad` is overwritten. Requires `epsilon > 0`.
    pub(crate) fn wall_into(&self, q: &[f64], grad: &mut [f64]) -> f64 {
        let (s, c) = (self.half_sin(), self.half_cos());
        let (qu, ql) = self.patterns(q);
        let eu = self.b * (-qu / self.epsilon).exp();
        let el = self.b * (-ql / self.epsilon).exp();
        grad[0] = -(s / self.epsilon) * (el + eu);
        grad[1] = -(c / self.epsilon) * (el - eu);
        for g in grad.iter_mut().skip(2) {
            *g = 0.0;
        }
        el + eu
    }

    /// `U + V` (or `U` for the hard wall) with gradient into `grad`.
    pub(crate) fn potential_into(&self, q: &[f64], grad: &mut [f64]) -> f64 {
        let u = self.background_into(q, grad);
        if self.epsilon > 0.0 {
            let mut gw = [0.0; 3];
            let v = self.wall_into(q, &mut gw[..q.len()]);
            for (g, w) in grad.iter_mut().zip(gw) {
                *g += w;
            }
            u + v
        } else {
            u
        }
    }

    /// Hessian of `U + V` for the planar model.
    pub(crate) fn hessian_planar(&self, q: &[f64]) -> [[f64; 2]; 2] {
        let mut hs = [
            [self.omega * self.omega, 0.0],
            [0.0, -self.lambda * self.lambda],
        ];
        if self.epsilon > 0.0 {
            let (s, c) = (self.half_sin(), self.half_cos());
            let (qu, ql) = self.patterns(q);
            let k = self.b / (self.epsilon * self.epsilon);
            for (e, n) in [
                ((-qu / self.epsilon).exp(), [s, -c]),
                ((-ql / self.epsilon).exp(), [s, c]),
            ] {
                for i in 0..2 {
                    for j in 0..2 {
                        hs[i][j] += k * e * n[i] * n[j];
                    }
                }
            }
        }
        hs
    }

    pub(crate) fn background_value(&self, q: &[f64]) -> f64 {
        let mut g = [0.0; 3];
        self.background_into(q, &mut g[..q.len()])
    }

    pub(crate) fn potential_value(&self, q: &[f64]) -> f64 {
        let mut g = [0.0; 3];
        self.potential_into(q, &mut g[..q.len()])
    }

    /// `H = |p|^2/2 + U(q) [+ V(q; epsilon)]`.
    ///
    /// For the hard wall the state must lie in the closed wedge.
    pub fn total_energy(&self, s: &PhaseState) -> Result<f64> {
        self.check_dim(&s.q)?;
        if self.is_hard_wall() {
            let tol = 1e-9 * (1.0 + s.q[0].abs() + s.q[1].abs());
            if !self.in_closed_wedge(&s.q, tol) {
                return Err(Error::domain(
                    "hard-wall energy is undefined outside the wedge",
                ));
            }
        }
        Ok(self.energy_unchecked(&s.q, &s.p))
    }

    pub(crate) fn energy_unchecked(&self, q: &[f64], p: &[f64]) -> f64 {
        0.5 * p.iter().map(|x| x * x).sum::<f64>() + self.potential_value(q)
    }

    /// Non-negative `v20` on the section fixing the energy at `h` for the
    /// quadratic background (wall potential ignored).
    pub fn v20_from_energy(&self, h: f64, u10: f64, v10: f64, u20: f64) -> Result<f64> {
        let x = u10 - self.u1s;
        let y = u20 - self.u2s;
        let radicand = 2.0 * h - v10 * v10 - self.omega * self.omega * x * x
            + self.lambda * self.lambda * y * y;
        if radicand < 0.0 || !radicand.is_finite() {
            return Err(Error::InfeasibleEnergy {
                energy: h,
                radicand,
            });
        }
        Ok(radicand.sqrt())
    }
}
