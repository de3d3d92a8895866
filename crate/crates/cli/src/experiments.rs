//! One function per subcommand. Each returns the artifact files as
//! `(name, contents)` pairs plus a short JSON summary for the manifest;
//! nothing touches the disk here.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use softimpact::compare::compare_flows_with;
use softimpact::conditions::check_conditions_with;
use softimpact::continuation::{bifurcation_scan, continue_orbit};
use softimpact::hill::{hausdorff_distance, impact_hill_region, smooth_hill_boundary};
use softimpact::impact::propagate_impact;
use softimpact::io;
use softimpact::orbit::{
    find_period2_impact, find_period2_impact_with, sample_return_map, seed_on_section,
    PeriodicOrbit,
};
use softimpact::smooth::{integrate_smooth, IntegratorConfig};
use softimpact::{Error, PhaseState, Result, WedgeModel};

use crate::config::*;

pub struct Artifacts {
    pub files: Vec<(&'static str, String)>,
    pub summary: Value,
}

fn to_json<T: serde::Serialize>(x: &T) -> String {
    let mut s = serde_json::to_string_pretty(x).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn run(c: &ExperimentConfig) -> Result<Artifacts> {
    let m = &c.model;
    match &c.experiment {
        Experiment::Simulate(s) => simulate(m, &c.integrator, s),
        Experiment::FindOrbit(f) => find_orbit(m, &c.integrator, f),
        Experiment::Continue(k) => continuation(m, &c.integrator, k),
        Experiment::BifurcationScan(b) => scan(m, b),
        Experiment::Hill(h) => hill(m, h),
        Experiment::Poincare(p) => poincare(m, &c.integrator, p, c.seed),
        Experiment::CompareFlows(k) => compare(m, k),
        Experiment::CheckConditions(k) => {
            let r = check_conditions_with(m, &k.window, &k.epsilons, &k.settings)?;
            Ok(Artifacts {
                files: vec![("conditions.json", to_json(&r))],
                summary: json!({}),
            })
        }
    }
}

fn state_from(v: &[f64]) -> Result<PhaseState> {
    let d = v.len() / 2;
    PhaseState::new(v[..d].to_vec(), v[d..].to_vec(), 0.0)
}

fn trajectory(
    m: &WedgeModel,
    cfg: &IntegratorConfig,
    s0: &PhaseState,
    t_end: f64,
    dt: f64,
) -> Result<(Vec<PhaseState>, String)> {
    if m.epsilon == 0.0 {
        let tr = propagate_impact(m, s0, t_end, dt)?;
        Ok((tr.samples.unwrap_or_default(), io::events_csv(&tr.events)))
    } else {
        let tr = integrate_smooth(m, s0, t_end, cfg)?;
        Ok((tr.samples(dt), io::events_csv(&[])))
    }
}

fn simulate(m: &WedgeModel, cfg: &IntegratorConfig, s: &Simulate) -> Result<Artifacts> {
    let s0 = state_from(&s.initial)?;
    let (samples, events) = trajectory(m, cfg, &s0, s.t_end, s.sample_dt)?;
    let h0 = m.total_energy(&s0)?;
    let mut drift = 0.0f64;
    for x in &samples {
        drift = drift.max((m.total_energy(x)? - h0).abs() / h0.abs().max(1.0));
    }
    Ok(Artifacts {
        files: vec![
            ("trajectory.csv", io::trajectory_csv(m, &samples)),
            ("events.csv", events),
        ],
        summary: json!({ "H0": h0, "max_relative_energy_drift": drift, "samples": samples.len() }),
    })
}

fn orbit_trajectories(
    cfg: &IntegratorConfig,
    runs: &[(WedgeModel, &PeriodicOrbit)],
    dt: f64,
) -> Result<String> {
    let mut out = Vec::with_capacity(runs.len());
    for (m, o) in runs {
        let s0 = PhaseState::planar(o.u10, 0.0, 0.0, o.v20);
        out.push((*m, trajectory(m, cfg, &s0, o.period(), dt)?.0));
    }
    Ok(io::labelled_trajectories_csv(&out))
}

fn find_orbit(m: &WedgeModel, cfg: &IntegratorConfig, f: &FindOrbit) -> Result<Artifacts> {
    let o0 = find_period2_impact_with(m, f.u10, &f.shooting)?;
    let o = if m.epsilon == 0.0 {
        o0
    } else {
        let path = [0.0, 0.5 * m.epsilon, m.epsilon];
        let run = continue_orbit(
            m,
            &o0,
            &path,
            softimpact::orbit::Constraint::FixU10,
            &f.solver,
        )?;
        if let Some((_, e)) = run.failures.first() {
            return Err(Error::NoRoot(e.clone()));
        }
        run.orbits
            .last()
            .cloned()
            .expect("no failures means a full path")
    };
    let mut files = vec![("orbit.json", to_json(&o))];
    if let Some(dt) = f.trajectory_dt {
        files.push((
            "orbit_trajectory.csv",
            orbit_trajectories(cfg, &[(*m, &o)], dt)?,
        ));
    }
    Ok(Artifacts {
        files,
        summary: json!({ "v20": o.v20, "H": o.h, "stability": o.stability }),
    })
}

fn continuation(m: &WedgeModel, cfg: &IntegratorConfig, k: &Continue) -> Result<Artifacts> {
    let mut o0 = find_period2_impact(m, k.u10)?;
    if let Some(h) = k.h {
        o0.h = h;
    }
    let run = continue_orbit(m, &o0, &k.eps_path, k.constraint, &k.solver)?;
    if run.orbits.is_empty() {
        let (_, e) = &run.failures[0];
        return Err(Error::NoRoot(e.clone()));
    }
    let mut files = vec![
        ("continuation.json", to_json(&run)),
        ("orbits.csv", io::orbits_csv(&run.orbits)),
    ];
    if let Some(dt) = k.trajectory_dt {
        let runs: Vec<_> = run
            .orbits
            .iter()
            .map(|o| (m.with_epsilon(o.epsilon), o))
            .collect();
        files.push((
            "orbit_trajectories.csv",
            orbit_trajectories(cfg, &runs, dt)?,
        ));
    }
    Ok(Artifacts {
        files,
        summary: json!({ "orbits": run.orbits.len(), "failures": run.failures }),
    })
}

fn scan(m: &WedgeModel, b: &BifurcationScan) -> Result<Artifacts> {
    let grid = b.grid();
    let curves = b
        .epsilons
        .iter()
        .map(|&eps| bifurcation_scan(m, &b.ratios, &grid, eps, &b.solver))
        .collect::<Result<Vec<_>>>()?;
    let summary: Vec<Value> = curves
        .iter()
        .map(|c| json!({ "epsilon": c.epsilon, "u_c": c.u_c, "transitions": c.transitions }))
        .collect();
    Ok(Artifacts {
        files: vec![
            ("scan.csv", io::bifurcation_csv(&curves)),
            ("curve.csv", io::curve_csv(&curves)),
        ],
        summary: Value::Array(summary),
    })
}

fn hill(m: &WedgeModel, h: &Hill) -> Result<Artifacts> {
    let imp = impact_hill_region(m, h.h_star, &h.window, h.resolution)?;
    let smooth = h
        .epsilons
        .iter()
        .map(|&e| smooth_hill_boundary(m, h.h_star, e, &h.window, h.resolution))
        .collect::<Result<Vec<_>>>()?;
    let mut dist = String::from("epsilon,hausdorff,cells\n");
    for s in &smooth {
        let d = hausdorff_distance(&s.boundary, &imp.boundary)?;
        dist.push_str(&format!(
            "{},{},{}\n",
            io::fmt_f64(s.epsilon),
            io::fmt_f64(d),
            io::fmt_f64(d / imp.cell())
        ));
    }
    let mut files = vec![
        ("region.csv", io::region_csv(&imp)),
        ("corners.csv", io::corners_csv(&imp)),
    ];
    if !smooth.is_empty() {
        files.push(("level_sets.csv", io::level_sets_csv(&smooth)));
        files.push(("hausdorff.csv", dist));
    }
    let classes: Vec<&str> = imp.corners.iter().map(|c| c.class.name()).collect();
    Ok(Artifacts {
        files,
        summary: json!({ "corners": classes, "cell": imp.cell() }),
    })
}

fn poincare(m: &WedgeModel, cfg: &IntegratorConfig, p: &Poincare, seed: u64) -> Result<Artifacts> {
    let mut seeds = p
        .seeds
        .iter()
        .map(|s| {
            let third = (s.len() == 4).then(|| (s[2], s[3]));
            seed_on_section(m, p.h, s[0], s[1], third)
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(sc) = &p.scatter {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..sc.count {
            let u1 = rng.random_range(sc.u1[0]..sc.u1[1]);
            let v1 = if sc.v1[1] > sc.v1[0] {
                rng.random_range(sc.v1[0]..sc.v1[1])
            } else {
                sc.v1[0]
            };
            // draws outside the energy shell are skipped, not fatal
            if let Ok(s) = seed_on_section(m, p.h, u1, v1, None) {
                seeds.push(s);
            }
        }
    }
    let cloud = sample_return_map(m, &seeds, p.n_returns, &p.section, cfg)?;
    Ok(Artifacts {
        files: vec![("points.csv", io::point_cloud_csv(&cloud))],
        summary: json!({ "seeds": seeds.len(), "points": cloud.points.len(), "failures": cloud.failures }),
    })
}

fn compare(m: &WedgeModel, k: &CompareFlows) -> Result<Artifacts> {
    let (s0, period) = match (k.orbit_u10, k.initial) {
        (Some(u10), _) => {
            let o = find_period2_impact(m, u10)?;
            (PhaseState::planar(o.u10, 0.0, 0.0, o.v20), Some(o.period()))
        }
        (None, Some(v)) => (PhaseState::planar(v[0], v[1], v[2], v[3]), None),
        (None, None) => unreachable!("validated"),
    };
    let t = k.t_end.or(period).expect("validated");
    let rows = compare_flows_with(m, &s0, t, &k.epsilons, &k.settings)?;
    let sup: Vec<f64> = rows.iter().map(|r| r.sup_distance).collect();
    Ok(Artifacts {
        files: vec![("compare.csv", io::comparison_csv(&rows))],
        summary: json!({ "t_end": t, "sup_distance": sup }),
    })
}
