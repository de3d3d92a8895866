//! Distance between the smooth and impact trajectories from one initial
//! state, for a sequence of wall steepness parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::impact::propagate_impact;
use crate::model::{PhaseState, WedgeModel};
use crate::par;
use crate::smooth::{integrate_smooth, IntegratorConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareSettings {
    pub integrator: IntegratorConfig,
    pub sample_dt: f64,
    /// Samples closer than `guard * epsilon` to an impact time are left out
    /// of the sup; inside that window the smooth particle is still turning
    /// around in the wall layer.
    pub guard: f64,
}

impl Default for CompareSettings {
    fn default() -> Self {
        CompareSettings {
            integrator: IntegratorConfig::default(),
            sample_dt: 1e-3,
            guard: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowComparison {
    pub epsilon: f64,
    /// Sup of the phase-space distance outside the impact windows.
    pub sup_distance: f64,
    /// Sup over every sample, impact windows included.
    pub sup_distance_all: f64,
    pub samples: usize,
    pub excluded: usize,
}

pub fn compare_flows(
    model: &WedgeModel,
    s0: &PhaseState,
    t: f64,
    epsilons: &[f64],
) -> Result<Vec<FlowComparison>> {
    compare_flows_with(model, s0, t, epsilons, &CompareSettings::default())
}

/// One entry per `epsilons` value, in input order.
pub fn compare_flows_with(
    model: &WedgeModel,
    s0: &PhaseState,
    t: f64,
    epsilons: &[f64],
    s: &CompareSettings,
) -> Result<Vec<FlowComparison>> {
    if epsilons.is_empty() || epsilons.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::domain(
            "epsilons must be a non-empty list of positive values",
        ));
    }
    if !(s.sample_dt > 0.0) || !(s.guard >= 0.0) {
        return Err(Error::domain(
            "sample_dt must be positive and guard non-negative",
        ));
    }
    let hard = model.with_epsilon(0.0);
    let imp = propagate_impact(&hard, s0, t, s.sample_dt)?;
    let reference = imp.samples.as_ref().expect("samples requested");
    let hits: Vec<f64> = imp.events.iter().map(|e| e.t_c).collect();

    let runs = par::map(epsilons, |&eps| -> Result<FlowComparison> {
        let tr = integrate_smooth(&model.with_epsilon(eps), s0, t, &s.integrator)?;
        let band = s.guard * eps;
        let (mut sup, mut sup_all, mut excluded) = (0.0f64, 0.0f64, 0);
        for r in reference {
            let d = tr.state_at(r.t).distance(r);
            sup_all = sup_all.max(d);
            if hits.iter().any(|h| (r.t - h).abs() <= band) {
                excluded += 1;
            } else {
                sup = sup.max(d);
            }
        }
        Ok(FlowComparison {
            epsilon: eps,
            sup_distance: sup,
            sup_distance_all: sup_all,
            samples: reference.len(),
            excluded,
        })
    });
    runs.into_iter().collect()
}
