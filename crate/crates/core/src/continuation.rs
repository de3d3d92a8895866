//! Continuation of period-2 orbits in epsilon and stability scans over
//! `(omega/lambda, u10)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::WedgeModel;
use crate::orbit::{
    find_period2_impact, smooth_orbit_near, solve_orbit, Constraint, PeriodicOrbit,
    SmoothSolveSettings, Stability,
};
use crate::par;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationRun {
    pub constraint: Constraint,
    pub path: Vec<f64>,
    pub orbits: Vec<PeriodicOrbit>,
    pub failures: Vec<(f64, String)>,
}

/// Walks `eps_path`, warm-starting every solve from the previous orbit.
/// The first entry is `orbit0` re-solved under `constraint` at `eps_path[0]`.
/// A failed step is retried once through the midpoint; a second failure
/// is recorded and ends the run.
pub fn continue_orbit(
    model: &WedgeModel,
    orbit0: &PeriodicOrbit,
    eps_path: &[f64],
    constraint: Constraint,
    settings: &SmoothSolveSettings,
) -> Result<ContinuationRun> {
    if eps_path.is_empty() || eps_path.iter().any(|e| !(*e >= 0.0)) {
        return Err(Error::domain(
            "epsilon path must be a non-empty list of non-negative values",
        ));
    }
    let mut run = ContinuationRun {
        constraint,
        path: eps_path.to_vec(),
        orbits: Vec::new(),
        failures: Vec::new(),
    };
    let start = model.with_epsilon(eps_path[0]);
    let seeded = if orbit0.epsilon == eps_path[0] && constraint == Constraint::FixU10 {
        Ok(orbit0.clone())
    } else {
        solve_orbit(&start, orbit0, constraint, settings)
    };
    let mut prev = match seeded {
        Ok(o) => o,
        Err(e) => {
            run.failures.push((eps_path[0], e.to_string()));
            return Ok(run);
        }
    };
    run.orbits.push(prev.clone());
    for &eps in &eps_path[1..] {
        let step =
            solve_orbit(&model.with_epsilon(eps), &prev, constraint, settings).or_else(|first| {
                let mid = 0.5 * (prev.epsilon + eps);
                let via = solve_orbit(&model.with_epsilon(mid), &prev, constraint, settings)
                    .map_err(|_| first.clone())?;
                solve_orbit(&model.with_epsilon(eps), &via, constraint, settings).map_err(|_| first)
            });
        match step {
            Ok(o) => {
                prev = o.clone();
                run.orbits.push(o);
            }
            Err(e) => {
                run.failures.push((eps, e.to_string()));
                break;
            }
        }
    }
    Ok(run)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanCell {
    pub ratio: f64,
    pub u10: f64,
    pub trace: Option<f64>,
    pub stability: Option<Stability>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationCurve {
    pub epsilon: f64,
    pub b: f64,
    pub ratio_grid: Vec<f64>,
    pub u10_grid: Vec<f64>,
    /// First hyperbolic-to-elliptic transition per ratio, `None` if absent.
    pub u_c: Vec<Option<f64>>,
    /// Number of stability changes seen along each ratio's grid.
    pub transitions: Vec<usize>,
    /// `raw[i][j]` belongs to `ratio_grid[i]`, `u10_grid[j]`.
    pub raw: Vec<Vec<ScanCell>>,
}

/// Bisection tolerance on `u_c`.
pub const UC_TOL: f64 = 1e-6;

/// Period-2 orbit through `u10` at the model's own epsilon, reached from the
/// hard wall through `[0, epsilon / 2, epsilon]` with `u10` held fixed.
pub fn orbit_at(
    model: &WedgeModel,
    u10: f64,
    settings: &SmoothSolveSettings,
) -> Result<PeriodicOrbit> {
    let o0 = find_period2_impact(model, u10)?;
    if model.epsilon == 0.0 {
        return Ok(o0);
    }
    let path = [0.0, 0.5 * model.epsilon, model.epsilon];
    let run = continue_orbit(model, &o0, &path, Constraint::FixU10, settings)?;
    match run.failures.first() {
        Some((_, e)) => Err(Error::NoRoot(e.clone())),
        None => Ok(run
            .orbits
            .last()
            .cloned()
            .expect("continuation keeps the seed")),
    }
}

fn margin(o: &PeriodicOrbit) -> f64 {
    o.trace().abs() - 2.0
}

/// Stability scan over `u10_grid` for each `omega/lambda` ratio at fixed
/// `omega`, with the transition refined by bisection on `|trace| - 2`.
pub fn bifurcation_scan(
    model_base: &WedgeModel,
    ratios: &[f64],
    u10_grid: &[f64],
    epsilon: f64,
    settings: &SmoothSolveSettings,
) -> Result<BifurcationCurve> {
    if ratios.is_empty() || ratios.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::domain("ratios must be positive"));
    }
    if u10_grid.len() < 2 || u10_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain(
            "u10 grid must be ascending with at least two points",
        ));
    }
    if u10_grid[0] <= model_base.u1s {
        return Err(Error::domain(
            "u10 grid must lie to the right of the saddle",
        ));
    }
    let models: Vec<WedgeModel> = ratios
        .iter()
        .map(|r| {
            model_base
                .with_lambda(model_base.omega / r)
                .with_epsilon(epsilon)
        })
        .collect();
    for m in &models {
        m.validate()?;
    }

    let cells: Vec<(usize, f64)> = (0..ratios.len())
        .flat_map(|i| u10_grid.iter().map(move |&u| (i, u)))
        .collect();
    let orbits = par::map(&cells, |&(i, u)| orbit_at(&models[i], u, settings).ok());

    let mut raw = Vec::with_capacity(ratios.len());
    let mut u_c = Vec::with_capacity(ratios.len());
    let mut transitions = Vec::with_capacity(ratios.len());
    for (i, &ratio) in ratios.iter().enumerate() {
        let row = &orbits[i * u10_grid.len()..(i + 1) * u10_grid.len()];
        raw.push(
            row.iter()
                .zip(u10_grid)
                .map(|(o, &u10)| ScanCell {
                    ratio,
                    u10,
                    trace: o.as_ref().map(|o| o.trace()),
                    stability: o.as_ref().map(|o| o.stability),
                })
                .collect(),
        );
        let valid: Vec<(f64, &PeriodicOrbit)> = row
            .iter()
            .zip(u10_grid)
            .filter_map(|(o, &u)| o.as_ref().map(|o| (u, o)))
            .collect();
        let mut count = 0;
        let mut first = None;
        for w in valid.windows(2) {
            let (_, oa) = w[0];
            let (_, ob) = w[1];
            let (ma, mb) = (margin(oa), margin(ob));
            if (ma > 0.0) == (mb > 0.0) {
                continue;
            }
            count += 1;
            if first.is_none() && ma > 0.0 && oa.stability == Stability::Hyperbolic {
                first = bisect_transition(&models[i], oa, ob, settings).ok();
            }
        }
        transitions.push(count);
        u_c.push(first);
    }
    Ok(BifurcationCurve {
        epsilon,
        b: model_base.b,
        ratio_grid: ratios.to_vec(),
        u10_grid: u10_grid.to_vec(),
        u_c,
        transitions,
        raw,
    })
}

/// Bisection on `|trace| - 2` between a hyperbolic `lo` and elliptic `hi`.
/// For `epsilon > 0` every midpoint orbit is predicted by interpolating
/// `v20` between the bracketing orbits and must stay inside their `v20`
/// range; a solve that leaves it has switched branch and ends the search.
fn bisect_transition(
    model: &WedgeModel,
    a: &PeriodicOrbit,
    b: &PeriodicOrbit,
    settings: &SmoothSolveSettings,
) -> Result<f64> {
    let (mut lo, mut hi) = (a.clone(), b.clone());
    while hi.u10 - lo.u10 > UC_TOL {
        let mid = 0.5 * (lo.u10 + hi.u10);
        let o = if model.epsilon == 0.0 {
            find_period2_impact(model, mid)?
        } else {
            let pred = 0.5 * (lo.v20 + hi.v20);
            let gap = (hi.v20 - lo.v20).abs();
            let o = smooth_orbit_near(model, mid, pred, 0.05 * gap.max(1e-9), settings)?;
            if (o.v20 - pred).abs() > 0.5 * gap {
                return Err(Error::NoRoot(format!(
                    "orbit branch switched at u10 = {mid}"
                )));
            }
            o
        };
        if margin(&o) > 0.0 {
            lo = o;
        } else {
            hi = o;
        }
    }
    Ok(0.5 * (lo.u10 + hi.u10))
}
