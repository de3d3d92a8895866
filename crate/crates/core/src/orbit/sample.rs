//! Point clouds of the section return map from a set of seeds.

use serde::{Deserialize, Serialize};

use super::impact::impact_return_map;
use crate::error::{Error, Result};
use crate::model::{PhaseState, WedgeModel};
use crate::par;
use crate::smooth::{section_crossings, IntegratorConfig, SectionSpec};

/// Seed on `u2 = 0` with `v2 >= 0` fixed by the energy `h`. For the third
/// degree of freedom pass `(u3, v3)`.
pub fn seed_on_section(
    model: &WedgeModel,
    h: f64,
    u1: f64,
    v1: f64,
    third: Option<(f64, f64)>,
) -> Result<PhaseState> {
    let (q, mut p) = match (model.dim(), third) {
        (2, None) => (vec![u1, 0.0], vec![v1, 0.0]),
        (3, Some((u3, v3))) => (vec![u1, 0.0, u3], vec![v1, 0.0, v3]),
        _ => return Err(Error::domain("seed dimension does not match the model")),
    };
    let kinetic = p.iter().map(|x| x * x).sum::<f64>();
    let r = 2.0 * (h - model.potential_value(&q)) - kinetic;
    if !(r >= 0.0) {
        return Err(Error::InfeasibleEnergy {
            energy: h,
            radicand: r,
        });
    }
    p[1] = r.sqrt();
    PhaseState::new(q, p, 0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnPoint {
    pub seed_id: usize,
    pub k: usize,
    pub state: PhaseState,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<ReturnPoint>,
    pub failures: Vec<(usize, String)>,
}

fn impact_returns(model: &WedgeModel, seed: &PhaseState, n: usize) -> Result<Vec<PhaseState>> {
    if seed.dim() != 2 {
        return Err(Error::domain("impact return maps are planar"));
    }
    let h = model.with_epsilon(0.0).total_energy(seed)?;
    let (mut u, mut v, mut t) = (seed.q[0], seed.p[0], seed.t);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let (u1, v1, dt) = impact_return_map(model, u, v, h)?;
        u = u1;
        v = v1;
        t += dt;
        let v2 = model.v20_from_energy(h, u, v, 0.0)?;
        out.push(PhaseState {
            q: vec![u, 0.0],
            p: vec![v, v2],
            t,
        });
    }
    Ok(out)
}

/// Iterates the return map `n_returns` times from each seed. Seeds that
/// fail are reported in `failures`; the others are unaffected.
pub fn sample_return_map(
    model: &WedgeModel,
    seeds: &[PhaseState],
    n_returns: usize,
    spec: &SectionSpec,
    cfg: &IntegratorConfig,
) -> Result<PointCloud> {
    spec.validate(model.dim())?;
    if model.epsilon == 0.0
        && (spec.coordinate != 1 || spec.value != 0.0 || spec.direction != 1 || spec.slab.is_some())
    {
        return Err(Error::domain(
            "the impact return map uses the section u2 = 0 crossed upwards",
        ));
    }
    let runs = par::map(seeds, |s| {
        if model.epsilon == 0.0 {
            impact_returns(model, s, n_returns)
        } else {
            section_crossings(model, s, n_returns, spec, cfg)
        }
    });
    let mut cloud = PointCloud::default();
    for (seed_id, run) in runs.into_iter().enumerate() {
        match run {
            Ok(states) => {
                cloud.points.extend(
                    states
                        .into_iter()
                        .enumerate()
                        .map(|(k, state)| ReturnPoint {
                            seed_id,
                            k: k + 1,
                            state,
                        }),
                )
            }
            Err(e) => cloud.failures.push((seed_id, e.to_string())),
        }
    }
    Ok(cloud)
}
