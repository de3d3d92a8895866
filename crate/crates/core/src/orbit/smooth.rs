//! Symmetric period-2 orbits of the smooth flow.
//!
//! The orbits are symmetric under `(u1, u2, v1, v2) -> (u1, -u2, -v1, v2)`
//! composed with time reversal, whose fixed set on the section is `v1 = 0`.
//! A trajectory leaving `(u10, 0, 0, v20)` that comes back to `u2 = 0`
//! (moving down) with `v1 = 0` is therefore periodic, and the search is a
//! scalar root problem for every constraint.

use serde::{Deserialize, Serialize};

use super::impact::{find_period2_impact, require_symmetric_hard};
use super::{classify_stability, Constraint, Mat2, PeriodicOrbit};
use crate::error::{Error, Result};
use crate::model::{PhaseState, WedgeModel};
use crate::roots::secant;
use crate::smooth::{crossing_with_tangents, section_crossings, IntegratorConfig, SectionSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SmoothSolveSettings {
    pub integrator: IntegratorConfig,
    /// Tolerance on `v1` at the symmetric half return.
    pub tol: f64,
    /// Tolerance on the full return-map residual `|P(x) - x|`.
    pub fixed_point_tol: f64,
    /// Tolerance on `Re(Lambda) - target` for the fixed-multiplier constraint.
    pub multiplier_tol: f64,
    pub max_iter: usize,
}

impl Default for SmoothSolveSettings {
    fn default() -> Self {
        SmoothSolveSettings {
            integrator: IntegratorConfig {
                max_time: 50.0,
                ..IntegratorConfig::precise()
            },
            tol: 1e-11,
            fixed_point_tol: 1e-9,
            multiplier_tol: 1e-8,
            max_iter: 50,
        }
    }
}

/// `v2 >= 0` on the section at `(u1, 0)` for total energy `h`, wall term
/// included.
fn section_speed(m: &WedgeModel, u1: f64, v1: f64, h: f64) -> Result<f64> {
    let r = 2.0 * (h - m.potential_value(&[u1, 0.0])) - v1 * v1;
    if !(r >= 0.0) {
        return Err(Error::InfeasibleEnergy {
            energy: h,
            radicand: r,
        });
    }
    Ok(r.sqrt())
}

fn crossing(
    m: &WedgeModel,
    s0: PhaseState,
    direction: i8,
    cfg: &IntegratorConfig,
) -> Result<PhaseState> {
    let spec = SectionSpec {
        direction,
        ..Default::default()
    };
    Ok(section_crossings(m, &s0, 1, &spec, cfg)?.remove(0))
}

/// `v1` and time at the first downward return to `u2 = 0`.
fn half_return(m: &WedgeModel, u10: f64, v20: f64, cfg: &IntegratorConfig) -> Result<(f64, f64)> {
    let s = crossing(m, PhaseState::planar(u10, 0.0, 0.0, v20), -1, cfg)?;
    Ok((s.p[0], s.t))
}

/// One iterate of the smooth return map on `u2 = 0, v2 > 0` at energy `h`.
pub fn smooth_return_map(
    model: &WedgeModel,
    u1: f64,
    v1: f64,
    h: f64,
    cfg: &IntegratorConfig,
) -> Result<(f64, f64, f64)> {
    if model.dim() != 2 || !(model.epsilon > 0.0) {
        return Err(Error::domain(
            "smooth return map needs the planar model with epsilon > 0",
        ));
    }
    let v2 = section_speed(model, u1, v1, h)?;
    let s = crossing(model, PhaseState::planar(u1, 0.0, v1, v2), 1, cfg)?;
    Ok((s.q[0], s.p[0], s.t))
}

/// Jacobian of [`smooth_return_map`] from the variational equations, with
/// the section-time correction `dT = -du2 / v2`.
pub fn smooth_monodromy(
    model: &WedgeModel,
    u1: f64,
    v1: f64,
    h: f64,
    cfg: &IntegratorConfig,
) -> Result<Mat2> {
    if model.dim() != 2 || !(model.epsilon > 0.0) {
        return Err(Error::domain(
            "smooth monodromy needs the planar model with epsilon > 0",
        ));
    }
    let v2 = section_speed(model, u1, v1, h)?;
    if !(v2 > 0.0) {
        return Err(Error::SingularLinearization("zero section speed".into()));
    }
    let mut g = [0.0; 2];
    model.potential_into(&[u1, 0.0], &mut g);
    let tangents = [[1.0, 0.0, 0.0, -g[0] / v2], [0.0, 0.0, 1.0, -v1 / v2]];
    let spec = SectionSpec::default();
    let (s, ws) = crossing_with_tangents(
        model,
        &PhaseState::planar(u1, 0.0, v1, v2),
        &tangents,
        &spec,
        cfg,
    )?;
    let rate = s.p[1];
    if !(rate.abs() > 0.0) {
        return Err(Error::SingularLinearization(
            "tangential section crossing".into(),
        ));
    }
    model.potential_into(&s.q, &mut g);
    let mut j = [[0.0; 2]; 2];
    for (k, w) in ws.iter().enumerate() {
        let dt = -w[1] / rate;
        j[0][k] = w[0] + s.p[0] * dt;
        j[1][k] = w[2] - g[0] * dt;
    }
    Ok(j)
}

/// Central finite-difference Jacobian of [`smooth_return_map`].
pub fn smooth_monodromy_fd(
    model: &WedgeModel,
    u1: f64,
    v1: f64,
    h: f64,
    cfg: &IntegratorConfig,
    rel_step: f64,
) -> Result<Mat2> {
    let mut j = [[0.0; 2]; 2];
    let x = [u1, v1];
    for k in 0..2 {
        let step = rel_step * x[k].abs().max(1.0);
        let mut xp = x;
        let mut xm = x;
        xp[k] += step;
        xm[k] -= step;
        let (a0, a1, _) = smooth_return_map(model, xp[0], xp[1], h, cfg)?;
        let (b0, b1, _) = smooth_return_map(model, xm[0], xm[1], h, cfg)?;
        j[0][k] = (a0 - b0) / (2.0 * step);
        j[1][k] = (a1 - b1) / (2.0 * step);
    }
    Ok(j)
}

fn v20_residual(m: &WedgeModel, u10: f64, v20: f64, cfg: &IntegratorConfig) -> Result<f64> {
    if !(v20 > 0.0) {
        return Err(Error::domain("v20 left the positive half line"));
    }
    Ok(half_return(m, u10, v20, cfg)?.0)
}

fn solve_fix_u10(m: &WedgeModel, u10: f64, v20_guess: f64, s: &SmoothSolveSettings) -> Result<f64> {
    solve_fix_u10_step(m, u10, v20_guess, 1e-4 * v20_guess.abs().max(1.0), s)
}

fn solve_fix_u10_step(
    m: &WedgeModel,
    u10: f64,
    v20_guess: f64,
    dv: f64,
    s: &SmoothSolveSettings,
) -> Result<f64> {
    let (v, r) = secant(
        |v| v20_residual(m, u10, v, &s.integrator),
        v20_guess,
        v20_guess + dv,
        s.tol,
        1e-15,
        s.max_iter,
    )?;
    if !(r.abs() <= s.tol * 10.0) {
        return Err(Error::NoConvergence {
            iterations: s.max_iter,
            residual: r.abs(),
        });
    }
    Ok(v)
}

fn solve_fix_energy(
    m: &WedgeModel,
    h: f64,
    u10_guess: f64,
    s: &SmoothSolveSettings,
) -> Result<f64> {
    let f = |u: f64| {
        let v20 = section_speed(m, u, 0.0, h)?;
        v20_residual(m, u, v20, &s.integrator)
    };
    let (u, r) = secant(f, u10_guess, u10_guess + 1e-4, s.tol, 1e-15, s.max_iter)?;
    if !(r.abs() <= s.tol * 10.0) {
        return Err(Error::NoConvergence {
            iterations: s.max_iter,
            residual: r.abs(),
        });
    }
    Ok(u)
}

/// Orbit record at a converged `(u10, v20)`, with the full fixed-point
/// check and the variational monodromy.
fn finish(m: &WedgeModel, u10: f64, v20: f64, s: &SmoothSolveSettings) -> Result<PeriodicOrbit> {
    let h = m.energy_unchecked(&[u10, 0.0], &[0.0, v20]);
    let (u1r, v1r, period) = smooth_return_map(m, u10, 0.0, h, &s.integrator)?;
    let residual = (u1r - u10).hypot(v1r);
    if !(residual < s.fixed_point_tol) {
        return Err(Error::NoConvergence {
            iterations: s.max_iter,
            residual,
        });
    }
    let mono = smooth_monodromy(m, u10, 0.0, h, &s.integrator)?;
    PeriodicOrbit::assemble(m.epsilon, u10, v20, h, 0.25 * period, mono)
}

fn real_part(mono: &Mat2) -> Result<f64> {
    Ok(classify_stability(mono)?.1[0].re)
}

/// Period-2 orbit of the smooth flow near `guess` under `constraint`.
pub fn find_period2_smooth(
    model: &WedgeModel,
    guess: &PeriodicOrbit,
    constraint: Constraint,
    s: &SmoothSolveSettings,
) -> Result<PeriodicOrbit> {
    require_symmetric_hard(model)?;
    if !(model.epsilon > 0.0) {
        return Err(Error::domain("smooth orbit search needs epsilon > 0"));
    }
    s.integrator.validate()?;
    match constraint {
        Constraint::FixU10 => {
            let v20 = solve_fix_u10(model, guess.u10, guess.v20, s)?;
            finish(model, guess.u10, v20, s)
        }
        Constraint::FixEnergy => {
            let u10 = solve_fix_energy(model, guess.h, guess.u10, s)?;
            let v20 = section_speed(model, u10, 0.0, guess.h)?;
            finish(model, u10, v20, s)
        }
        Constraint::FixMultiplierRealPart(target) => {
            let mut v20_last = guess.v20;
            let mut objective = |u: f64| -> Result<f64> {
                let v20 = solve_fix_u10(model, u, v20_last, s)?;
                v20_last = v20;
                let h = model.energy_unchecked(&[u, 0.0], &[0.0, v20]);
                let mono = smooth_monodromy(model, u, 0.0, h, &s.integrator)?;
                Ok(real_part(&mono)? - target)
            };
            let (u10, r) = secant(
                &mut objective,
                guess.u10,
                guess.u10 + 1e-2,
                s.multiplier_tol,
                1e-13,
                s.max_iter,
            )?;
            if !(r.abs() <= s.multiplier_tol) {
                return Err(Error::NoConvergence {
                    iterations: s.max_iter,
                    residual: r.abs(),
                });
            }
            let v20 = solve_fix_u10(model, u10, v20_last, s)?;
            finish(model, u10, v20, s)
        }
    }
}

/// Fixed-`u10` smooth orbit from a predicted `v20` with secant step `dv`.
/// Used close to stability changes, where a second branch of symmetric
/// orbits crosses the first and the default step can jump onto it.
pub(crate) fn smooth_orbit_near(
    m: &WedgeModel,
    u10: f64,
    v20_pred: f64,
    dv: f64,
    s: &SmoothSolveSettings,
) -> Result<PeriodicOrbit> {
    require_symmetric_hard(m)?;
    let v20 = solve_fix_u10_step(m, u10, v20_pred, dv, s)?;
    finish(m, u10, v20, s)
}

/// Hard-wall counterpart of [`find_period2_smooth`] driven by the analytic
/// monodromy.
pub(crate) fn find_period2_impact_constrained(
    model: &WedgeModel,
    guess: &PeriodicOrbit,
    constraint: Constraint,
    max_iter: usize,
) -> Result<PeriodicOrbit> {
    let m = model.with_epsilon(0.0);
    match constraint {
        Constraint::FixU10 => find_period2_impact(&m, guess.u10),
        Constraint::FixEnergy => {
            let (u, _) = secant(
                |u| Ok(find_period2_impact(&m, u)?.h - guess.h),
                guess.u10,
                guess.u10 + 1e-3,
                1e-11,
                1e-14,
                max_iter,
            )?;
            find_period2_impact(&m, u)
        }
        Constraint::FixMultiplierRealPart(target) => {
            let (u, _) = secant(
                |u| Ok(find_period2_impact(&m, u)?.multiplier_real_part() - target),
                guess.u10,
                guess.u10 + 1e-2,
                1e-12,
                1e-14,
                max_iter,
            )?;
            find_period2_impact(&m, u)
        }
    }
}

/// Dispatches on `model.epsilon`: impact solver at zero, smooth otherwise.
pub fn solve_orbit(
    model: &WedgeModel,
    guess: &PeriodicOrbit,
    constraint: Constraint,
    s: &SmoothSolveSettings,
) -> Result<PeriodicOrbit> {
    if model.epsilon == 0.0 {
        find_period2_impact_constrained(model, guess, constraint, s.max_iter)
    } else {
        find_period2_smooth(model, guess, constraint, s)
    }
}
