//! Experiment configuration files. Every struct rejects unknown keys.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use softimpact::compare::CompareSettings;
use softimpact::conditions::ConditionSettings;
use softimpact::orbit::{Constraint, ShootingSettings, SmoothSolveSettings};
use softimpact::smooth::{IntegratorConfig, SectionSpec};
use softimpact::{Rect, WedgeModel};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: WedgeModel,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    pub experiment: Experiment,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    Simulate(Simulate),
    FindOrbit(FindOrbit),
    Continue(Continue),
    BifurcationScan(BifurcationScan),
    Hill(Hill),
    Poincare(Poincare),
    CompareFlows(CompareFlows),
    CheckConditions(CheckConditions),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Simulate(_) => "simulate",
            Experiment::FindOrbit(_) => "find-orbit",
            Experiment::Continue(_) => "continue",
            Experiment::BifurcationScan(_) => "bifurcation-scan",
            Experiment::Hill(_) => "hill",
            Experiment::Poincare(_) => "poincare",
            Experiment::CompareFlows(_) => "compare-flows",
            Experiment::CheckConditions(_) => "check-conditions",
        }
    }

    /// Library module blamed when the run fails numerically.
    pub fn module(&self) -> &'static str {
        match self {
            Experiment::Simulate(_) => "impact_flow/smooth_flow",
            Experiment::FindOrbit(_) | Experiment::Poincare(_) => "orbit",
            Experiment::Continue(_) | Experiment::BifurcationScan(_) => "continuation",
            Experiment::Hill(_) => "hill",
            Experiment::CompareFlows(_) => "smooth_flow",
            Experiment::CheckConditions(_) => "core_model",
        }
    }
}

/// Trajectory from `initial = [u1, u2, v1, v2]` (or six entries with the
/// oscillator). Impact flow when the model's epsilon is 0.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Simulate {
    pub initial: Vec<f64>,
    pub t_end: f64,
    pub sample_dt: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FindOrbit {
    pub u10: f64,
    #[serde(default)]
    pub shooting: ShootingSettings,
    #[serde(default)]
    pub solver: SmoothSolveSettings,
    /// When set, one period of the orbit is also written, sampled at this step.
    #[serde(default)]
    pub trajectory_dt: Option<f64>,
}

/// Continuation along `eps_path` from the hard-wall orbit through `u10`.
/// `h` replaces that orbit's energy as the target for `fix_energy`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Continue {
    pub u10: f64,
    pub constraint: Constraint,
    pub eps_path: Vec<f64>,
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(default)]
    pub solver: SmoothSolveSettings,
    #[serde(default)]
    pub trajectory_dt: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BifurcationScan {
    /// `omega / lambda` values; `lambda` is set from each ratio.
    pub ratios: Vec<f64>,
    pub u10_min: f64,
    pub u10_max: f64,
    pub u10_step: f64,
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub solver: SmoothSolveSettings,
}

impl BifurcationScan {
    pub fn grid(&self) -> Vec<f64> {
        let n = ((self.u10_max - self.u10_min) / self.u10_step + 1e-9).floor() as usize;
        (0..=n)
            .map(|k| self.u10_min + self.u10_step * k as f64)
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hill {
    pub h_star: f64,
    pub window: Rect,
    pub resolution: usize,
    /// Smooth level sets to compare against the impact region.
    #[serde(default)]
    pub epsilons: Vec<f64>,
}

/// Random seeds on the section: `count` pairs `(u1, v1)` drawn uniformly
/// from the two ranges with the config's `seed`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scatter {
    pub count: usize,
    pub u1: [f64; 2],
    pub v1: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Poincare {
    pub h: f64,
    /// `[u1, v1]`, or `[u1, v1, u3, v3]` with the oscillator.
    #[serde(default)]
    pub seeds: Vec<Vec<f64>>,
    #[serde(default)]
    pub scatter: Option<Scatter>,
    pub n_returns: usize,
    #[serde(default)]
    pub section: SectionSpec,
}

/// Starts from the period-2 orbit through `orbit_u10`, or from `initial`.
/// `t_end` defaults to that orbit's period.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareFlows {
    #[serde(default)]
    pub orbit_u10: Option<f64>,
    #[serde(default)]
    pub initial: Option<[f64; 4]>,
    #[serde(default)]
    pub t_end: Option<f64>,
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub settings: CompareSettings,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConditions {
    pub window: Rect,
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub settings: ConditionSettings,
}

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

/// Checks that do not need any numerics; failures are config errors.
pub fn validate(c: &ExperimentConfig) -> Result<(), String> {
    c.integrator.validate().map_err(|e| e.to_string())?;
    let d = c.model.dim();
    match &c.experiment {
        Experiment::Simulate(s) => {
            if s.initial.len() != 2 * d {
                return Err(format!(
                    "initial must have {} entries for this model",
                    2 * d
                ));
            }
            if !positive(s.t_end) || !positive(s.sample_dt) {
                return Err("t_end and sample_dt must be positive".into());
            }
        }
        Experiment::FindOrbit(f) => {
            if !positive(f.u10) || f.trajectory_dt.is_some_and(|dt| !positive(dt)) {
                return Err("u10 and trajectory_dt must be positive".into());
            }
        }
        Experiment::Continue(k) => {
            if k.eps_path.is_empty() || k.eps_path.iter().any(|e| !(*e >= 0.0)) {
                return Err("eps_path must be a non-empty list of non-negative values".into());
            }
            if matches!(k.constraint, Constraint::FixEnergy) && k.h.is_none() {
                return Err("fix_energy needs h".into());
            }
            if k.trajectory_dt.is_some_and(|dt| !positive(dt)) {
                return Err("trajectory_dt must be positive".into());
            }
        }
        Experiment::BifurcationScan(b) => {
            if !positive(b.u10_step)
                || !(b.u10_max > b.u10_min)
                || b.epsilons.is_empty()
                || b.ratios.is_empty()
            {
                return Err(
                    "scan needs ratios, epsilons and an ascending u10 range with positive step"
                        .into(),
                );
            }
        }
        Experiment::Hill(h) => {
            h.window.validate().map_err(|e| e.to_string())?;
            if h.epsilons.iter().any(|e| !positive(*e)) {
                return Err("hill epsilons must be positive".into());
            }
        }
        Experiment::Poincare(p) => {
            let want = if d == 3 { 4 } else { 2 };
            if p.seeds.iter().any(|s| s.len() != want) {
                return Err(format!("each seed needs {want} entries for this model"));
            }
            if p.seeds.is_empty() && p.scatter.is_none() {
                return Err("poincare needs seeds or scatter".into());
            }
            if p.scatter.is_some() && d == 3 {
                return Err("scatter draws planar seeds only".into());
            }
            if let Some(s) = &p.scatter {
                if !(s.u1[1] > s.u1[0]) || !(s.v1[1] >= s.v1[0]) {
                    return Err("scatter ranges must be ascending".into());
                }
            }
            if p.n_returns == 0 {
                return Err("n_returns must be positive".into());
            }
            p.section.validate(d).map_err(|e| e.to_string())?;
        }
        Experiment::CompareFlows(k) => {
            if k.orbit_u10.is_some() == k.initial.is_some() {
                return Err("give exactly one of orbit_u10 and initial".into());
            }
            if k.initial.is_some() && k.t_end.is_none() {
                return Err("t_end is required with initial".into());
            }
            if d != 2 {
                return Err("compare-flows is planar".into());
            }
        }
        Experiment::CheckConditions(k) => {
            k.window.validate().map_err(|e| e.to_string())?;
        }
    }
    Ok(())
}
