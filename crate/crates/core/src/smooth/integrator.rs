//! Explicit DOP853 stepper with PI step-size control.
//!
//! Dense output is obtained by re-stepping from the start of an accepted
//! step, which reproduces the method's full order at any interior time.

use super::tableau::{A, B, E3, E5, STAGES};
use crate::error::{Error, Result};

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 1.0 / 3.0;
const FAC_MAX: f64 = 6.0;
const BETA: f64 = 0.04;
const EXPO1: f64 = 1.0 / 8.0 - BETA * 0.2;

/// Autonomous vector field `dy = f(y)`.
pub(crate) trait Field {
    fn dim(&self) -> usize;
    fn eval(&self, y: &[f64], dy: &mut [f64]);
}

/// An accepted step `[t0, t0 + h]` with the data needed to re-step from `t0`.
#[derive(Debug, Clone)]
pub(crate) struct Node {
    pub t: f64,
    pub y: Vec<f64>,
    pub f: Vec<f64>,
}

pub(crate) struct Stepper<'a, F: Field> {
    field: &'a F,
    pub rtol: f64,
    pub atol: f64,
    k: Vec<Vec<f64>>,
    tmp: Vec<f64>,
}

impl<'a, F: Field> Stepper<'a, F> {
    pub fn new(field: &'a F, rtol: f64, atol: f64) -> Self {
        let n = field.dim();
        Stepper {
            field,
            rtol,
            atol,
            k: vec![vec![0.0; n]; STAGES],
            tmp: vec![0.0; n],
        }
    }

    pub fn field(&self) -> &F {
        self.field
    }

    /// One Runge–Kutta step of size `h` from `(y, f0)`; writes the 8th-order
    /// solution to `out` and returns the scaled error norm.
    pub fn step(&mut self, y: &[f64], f0: &[f64], h: f64, out: &mut [f64]) -> f64 {
        let n = y.len();
        self.k[0].copy_from_slice(f0);
        for s in 1..STAGES {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, a) in A[s][..s].iter().enumerate() {
                    acc += a * self.k[j][i];
                }
                self.tmp[i] = y[i] + h * acc;
            }
            let (_, rest) = self.k.split_at_mut(s);
            self.field.eval(&self.tmp, &mut rest[0]);
        }
        let (mut e5n, mut e3n) = (0.0, 0.0);
        for i in 0..n {
            let (mut acc, mut e5, mut e3) = (0.0, 0.0, 0.0);
            for s in 0..STAGES {
                acc += B[s] * self.k[s][i];
                e5 += E5[s] * self.k[s][i];
                e3 += E3[s] * self.k[s][i];
            }
            out[i] = y[i] + h * acc;
            let sc = self.atol + self.rtol * y[i].abs().max(out[i].abs());
            e5n += (e5 / sc).powi(2);
            e3n += (e3 / sc).powi(2);
        }
        if out.iter().any(|v| !v.is_finite()) {
            return f64::INFINITY;
        }
        let den = e5n + 0.01 * e3n;
        if den > 0.0 {
            h.abs() * e5n / (den * n as f64).sqrt()
        } else {
            0.0
        }
    }

    /// State at `t` inside the step that starts at `node`.
    pub fn dense(&mut self, node: &Node, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; node.y.len()];
        if t == node.t {
            out.copy_from_slice(&node.y);
        } else {
            self.step(&node.y, &node.f, t - node.t, &mut out);
        }
        out
    }

    pub fn initial_step(&self, y: &[f64], f0: &[f64], dir: f64, max_step: f64) -> f64 {
        let n = y.len() as f64;
        let scale: Vec<f64> = y.iter().map(|v| self.atol + v.abs() * self.rtol).collect();
        let rms = |v: &[f64]| {
            (v.iter()
                .zip(&scale)
                .map(|(a, s)| (a / s).powi(2))
                .sum::<f64>()
                / n)
                .sqrt()
        };
        let d0 = rms(y);
        let d1 = rms(f0);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let y1: Vec<f64> = y.iter().zip(f0).map(|(a, b)| a + dir * h0 * b).collect();
        let mut f1 = vec![0.0; y.len()];
        self.field.eval(&y1, &mut f1);
        let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
        let d2 = rms(&diff) / h0;
        let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / 8.0)
        };
        (100.0 * h0).min(h1).min(max_step)
    }
}

/// Step-size controller state.
pub(crate) struct Controller {
    fac_old: f64,
}

impl Controller {
    pub fn new() -> Self {
        Controller { fac_old: 1e-4 }
    }

    /// New step magnitude after a step of `h` with error `err`; the flag
    /// tells whether the step is accepted.
    pub fn propose(&mut self, h: f64, err: f64) -> (bool, f64) {
        if !err.is_finite() {
            return (false, h * FAC_MIN);
        }
        let fac11 = err.max(1e-300).powf(EXPO1);
        if err <= 1.0 {
            let fac = fac11 / self.fac_old.powf(BETA);
            let fac = (fac / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            self.fac_old = err.max(1e-4);
            (true, h / fac)
        } else {
            (false, h / (fac11 / SAFETY).min(1.0 / FAC_MIN))
        }
    }
}

/// Drives the stepper from `t0` to `t0 + span` (either sign). `visit` sees
/// each accepted step as `(start node, end time, end state)` and may stop
/// the run by returning `Ok(false)`. Returns the accepted nodes including
/// the terminal one.
pub(crate) fn drive<F: Field>(
    stepper: &mut Stepper<'_, F>,
    y0: &[f64],
    t0: f64,
    span: f64,
    max_step: f64,
    mut visit: impl FnMut(&mut Stepper<'_, F>, &Node, f64, &[f64]) -> Result<bool>,
) -> Result<Vec<Node>> {
    let n = y0.len();
    let dir = if span < 0.0 { -1.0 } else { 1.0 };
    let t_end = t0 + span;
    let mut f0 = vec![0.0; n];
    stepper.field().eval(y0, &mut f0);
    let mut node = Node {
        t: t0,
        y: y0.to_vec(),
        f: f0,
    };
    let mut nodes = Vec::new();
    if span == 0.0 {
        nodes.push(node);
        return Ok(nodes);
    }
    let mut h = stepper.initial_step(y0, &node.f, dir, max_step);
    let mut ctl = Controller::new();
    let mut y1 = vec![0.0; n];
    loop {
        let remaining = (t_end - node.t) * dir;
        if remaining <= 0.0 {
            break;
        }
        let h_min = 16.0 * f64::EPSILON * node.t.abs().max(1.0);
        if h < h_min {
            return Err(Error::StepUnderflow { t: node.t, h });
        }
        let last = h >= remaining;
        let hs = if last { remaining } else { h.min(max_step) };
        let err = stepper.step(&node.y, &node.f, dir * hs, &mut y1);
        let (ok, h_new) = ctl.propose(hs, err);
        if !ok {
            h = h_new;
            continue;
        }
        let t1 = if last { t_end } else { node.t + dir * hs };
        let go_on = visit(stepper, &node, t1, &y1)?;
        let mut f1 = vec![0.0; n];
        stepper.field().eval(&y1, &mut f1);
        let next = Node {
            t: t1,
            y: y1.clone(),
            f: f1,
        };
        nodes.push(std::mem::replace(&mut node, next));
        h = h_new.min(max_step);
        if !go_on {
            break;
        }
    }
    nodes.push(node);
    Ok(nodes)
}
