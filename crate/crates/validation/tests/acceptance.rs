//! One PASS/FAIL line per acceptance criterion. Exits non-zero when any
//! criterion fails; every criterion runs regardless.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use softimpact::compare::compare_flows;
use softimpact::continuation::{bifurcation_scan, continue_orbit};
use softimpact::hill::{hausdorff_distance, impact_hill_region, smooth_hill_boundary, CornerClass};
use softimpact::orbit::{
    det2, find_period2_impact, impact_monodromy_fd, linearized_return_map_impact,
    sample_return_map, seed_on_section, Constraint, Mat2, PeriodicOrbit, SmoothSolveSettings,
    Stability,
};
use softimpact::smooth::{integrate_smooth, IntegratorConfig, SectionSpec, Slab};
use softimpact::{PhaseState, Rect, WedgeModel};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fig3() -> WedgeModel {
    WedgeModel::reference()
}

fn c1_impact_orbit() -> Outcome {
    let m = fig3();
    let t = Instant::now();
    let o = find_period2_impact(&m, 9.23).map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    let h = m
        .total_energy(&PhaseState::planar(o.u10, 0.0, 0.0, o.v20))
        .map_err(|e| e.to_string())?;
    check(
        (o.v20 - 4.89).abs() <= 0.01 && (h - 34.602).abs() <= 0.001 && secs < 1.0,
        format!(
            "v20 = {:.6} (want 4.89 +- 0.01), H = {h:.6} (want 34.602 +- 0.001), {secs:.3} s",
            o.v20
        ),
    )
}

fn c2_smooth_orbit() -> Outcome {
    let m = fig3();
    let t = Instant::now();
    let o0 = find_period2_impact(&m, 9.23).map_err(|e| e.to_string())?;
    let run = continue_orbit(
        &m,
        &o0,
        &[0.0, 0.05, 0.1],
        Constraint::FixU10,
        &SmoothSolveSettings::default(),
    )
    .map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    let o = run
        .orbits
        .last()
        .filter(|o| o.epsilon == 0.1)
        .ok_or(format!("continuation stopped: {:?}", run.failures))?;
    check(
        (o.v20 - 4.91).abs() <= 0.02 && (o.h - 34.695).abs() <= 0.01 && secs < 30.0,
        format!("v20 = {:.6}, H = {:.6}, {secs:.3} s", o.v20, o.h),
    )
}

fn entrywise(a: &Mat2, b: &Mat2) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            worst = worst.max((a[i][j] - b[i][j]).abs() / a[i][j].abs().max(1.0));
        }
    }
    worst
}

fn c3_symplecticity() -> Outcome {
    let m = fig3();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut u10s = vec![9.23];
    u10s.extend((0..10).map(|_| rng.random_range(4.0..12.0)));
    let (mut det_err, mut fd_err) = (0.0f64, 0.0f64);
    for &u in &u10s {
        let o = find_period2_impact(&m, u).map_err(|e| format!("u10 = {u}: {e}"))?;
        let a = linearized_return_map_impact(&m, &o).map_err(|e| e.to_string())?;
        let fd = impact_monodromy_fd(&m, o.u10, 0.0, o.h).map_err(|e| e.to_string())?;
        det_err = det_err.max((det2(&a) - 1.0).abs());
        fd_err = fd_err.max(entrywise(&a, &fd));
    }
    check(
        det_err < 1e-9 && fd_err < 1e-5,
        format!(
            "{} orbits, max |det - 1| = {det_err:.1e}, max entrywise FD mismatch = {fd_err:.1e}",
            u10s.len()
        ),
    )
}

fn c4_stability_structure() -> Outcome {
    let m = fig3();
    let ratio = m.omega / m.lambda;
    let grid: Vec<f64> = (0..=47).map(|k| 2.6 + 0.2 * k as f64).collect();
    let s = SmoothSolveSettings::default();
    let t = Instant::now();
    let a = bifurcation_scan(&m, &[ratio], &grid, 0.0, &s).map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    let b = bifurcation_scan(&m, &[ratio], &grid, 0.0, &s).map_err(|e| e.to_string())?;
    let first = a.raw[0][0].stability;
    let at_923 = find_period2_impact(&m, 9.23).map(|o| o.stability).ok();
    let repro = match (a.u_c[0], b.u_c[0]) {
        (Some(x), Some(y)) => (x - y).abs() < 1e-6,
        _ => false,
    };
    check(
        a.transitions[0] == 1
            && first == Some(Stability::Hyperbolic)
            && at_923 == Some(Stability::Elliptic)
            && repro
            && secs < 1.0,
        format!(
            "transitions = {}, u_c = {:?}, u10 = 2.6 -> {}, u10 = 9.23 -> {:?}, reproducible = {repro}, {secs:.3} s",
            a.transitions[0],
            a.u_c[0],
            first.map_or("no orbit", |s| s.name()),
            at_923,
        ),
    )
}

fn c5_flow_convergence() -> Outcome {
    let m = fig3();
    let t = Instant::now();
    let o = find_period2_impact(&m, 9.23).map_err(|e| e.to_string())?;
    let s0 = PhaseState::planar(o.u10, 0.0, 0.0, o.v20);
    let r =
        compare_flows(&m, &s0, o.period(), &[0.1, 0.03, 0.01, 0.003]).map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    let sup: Vec<f64> = r.iter().map(|c| c.sup_distance).collect();
    check(
        sup.windows(2).all(|w| w[1] < w[0]) && secs < 120.0,
        format!("sup distances {sup:.4?}, {secs:.2} s"),
    )
}

fn c6_hill_convergence() -> Outcome {
    let m = fig3();
    let w = Rect::new(0.0, 6.0, -2.0, 2.0).map_err(|e| e.to_string())?;
    let t = Instant::now();
    let imp = impact_hill_region(&m, 0.5, &w, 512).map_err(|e| e.to_string())?;
    let mut d = Vec::new();
    for e in [0.3, 0.2, 0.1, 0.01, 0.001] {
        let s = smooth_hill_boundary(&m, 0.5, e, &w, 512).map_err(|e| e.to_string())?;
        d.push(hausdorff_distance(&s.boundary, &imp.boundary).map_err(|e| e.to_string())?);
    }
    let secs = t.elapsed().as_secs_f64();
    let cells = d[4] / imp.cell();
    let transverse = !imp.corners.is_empty()
        && imp
            .corners
            .iter()
            .all(|c| c.class == CornerClass::Transverse);
    check(
        d.windows(2).all(|p| p[1] < p[0]) && cells < 2.0 && transverse && secs < 60.0,
        format!(
            "Hausdorff {d:.4?}, {cells:.2} cells at eps = 0.001, {} corners all transverse = {transverse}, {secs:.2} s",
            imp.corners.len()
        ),
    )
}

const PATH: [f64; 6] = [0.0, 0.001, 0.01, 0.1, 0.2, 0.3];

fn family(constraint: Constraint, h: Option<f64>) -> Result<Vec<PeriodicOrbit>, String> {
    let m = fig3().with_b(50.0);
    let mut o0 = find_period2_impact(&m, 9.23).map_err(|e| e.to_string())?;
    if let Some(h) = h {
        o0.h = h;
    }
    let run = continue_orbit(&m, &o0, &PATH, constraint, &SmoothSolveSettings::default())
        .map_err(|e| e.to_string())?;
    if run.orbits.len() != PATH.len() {
        return Err(format!(
            "found {} of {} orbits: {:?}",
            run.orbits.len(),
            PATH.len(),
            run.failures
        ));
    }
    Ok(run.orbits)
}

fn c7_fixed_multiplier() -> Outcome {
    let orbits = family(Constraint::FixMultiplierRealPart(0.8), None)?;
    let worst = orbits
        .iter()
        .map(|o| (o.multiplier_real_part() - 0.8).abs())
        .fold(0.0, f64::max);
    let elliptic = orbits.iter().all(|o| o.stability == Stability::Elliptic);
    let u10: Vec<f64> = orbits.iter().map(|o| o.u10).collect();
    check(
        elliptic && worst < 1e-6,
        format!("u10 {u10:.4?}, all elliptic = {elliptic}, max |Re - 0.8| = {worst:.1e}"),
    )
}

fn c8_fixed_energy() -> Outcome {
    let orbits = family(Constraint::FixEnergy, Some(35.0))?;
    let tags: Vec<&str> = orbits.iter().map(|o| o.stability.name()).collect();
    check(
        orbits[3].stability != orbits[4].stability,
        format!("stability along eps {PATH:?}: {tags:?}"),
    )
}

fn c9_three_dof() -> Outcome {
    let m2 = fig3().with_epsilon(0.001);
    let m3 = m2.with_oscillator(3f64.sqrt(), 0.0, 0.0);
    let cfg = IntegratorConfig::precise();
    let s2 = seed_on_section(&m2, 35.0, 9.27, 0.0, None).map_err(|e| e.to_string())?;
    let s3 = PhaseState::new(vec![9.27, 0.0, 0.0], vec![0.0, s2.p[1], 0.0], 0.0)
        .map_err(|e| e.to_string())?;
    let span = 3.0;
    let a = integrate_smooth(&m2, &s2, span, &cfg).map_err(|e| e.to_string())?;
    let b = integrate_smooth(&m3, &s3, span, &cfg).map_err(|e| e.to_string())?;
    let mut diff = 0.0f64;
    for k in 0..=300 {
        let t = span * k as f64 / 300.0;
        let (x, y) = (a.state_at(t), b.state_at(t));
        for i in 0..2 {
            diff = diff
                .max((x.q[i] - y.q[i]).abs())
                .max((x.p[i] - y.p[i]).abs());
        }
    }

    let m = fig3()
        .with_epsilon(0.001)
        .with_oscillator(3f64.sqrt(), 0.0, 0.1);
    let seeds = [0.0, 0.02, 0.05]
        .iter()
        .map(|&u3| seed_on_section(&m, 35.0, 9.27, 0.0, Some((u3, 0.0))))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let spec = SectionSpec {
        slab: Some(Slab {
            index: 2,
            half_width: 0.1,
            velocity_sign: 1,
        }),
        ..Default::default()
    };
    let cloud = sample_return_map(
        &m,
        &seeds,
        20,
        &spec,
        &IntegratorConfig {
            max_time: 2000.0,
            ..cfg
        },
    )
    .map_err(|e| e.to_string())?;
    let inside = cloud.points.iter().all(|p| p.state.q[2].abs() <= 0.1);
    check(
        diff < 1e-8 && !cloud.points.is_empty() && inside,
        format!(
            "decoupled max diff {diff:.1e}; coupled slab points {}, all |u3| <= 0.1 = {inside}, failed seeds {}",
            cloud.points.len(),
            cloud.failures.len()
        ),
    )
}

fn central(f: impl Fn(&[f64]) -> f64, q: &[f64], h: f64) -> Vec<f64> {
    (0..q.len())
        .map(|i| {
            let (mut a, mut b) = (q.to_vec(), q.to_vec());
            a[i] += h;
            b[i] -= h;
            (f(&a) - f(&b)) / (2.0 * h)
        })
        .collect()
}

fn c10_integrator_quality() -> Outcome {
    let hard = fig3();
    let o0 = find_period2_impact(&hard, 9.23).map_err(|e| e.to_string())?;
    let run = continue_orbit(
        &hard,
        &o0,
        &[0.0, 0.05, 0.1],
        Constraint::FixU10,
        &SmoothSolveSettings::default(),
    )
    .map_err(|e| e.to_string())?;
    let o = run
        .orbits
        .last()
        .filter(|o| o.epsilon == 0.1)
        .ok_or("no orbit at eps = 0.1")?;
    let m = hard.with_epsilon(0.1);
    let s0 = PhaseState::planar(o.u10, 0.0, 0.0, o.v20);
    let tr = integrate_smooth(&m, &s0, o.period(), &IntegratorConfig::default())
        .map_err(|e| e.to_string())?;
    let h0 = m.total_energy(&s0).map_err(|e| e.to_string())?;
    let mut drift = 0.0f64;
    for s in tr.node_states() {
        drift = drift.max((m.total_energy(&s).map_err(|e| e.to_string())? - h0).abs() / h0.abs());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut grad_err = 0.0f64;
    for _ in 0..100 {
        let eps = rng.random_range(0.01..0.5);
        let m = fig3().with_epsilon(eps);
        let u1 = rng.random_range(0.5..12.0);
        let u2 = rng.random_range(-0.95..0.95) * u1 * (m.beta / 2.0).tan();
        let q = [u1, u2];
        let total =
            |x: &[f64]| m.background_potential(x).unwrap().0 + m.wall_potential(x).unwrap().0;
        let g: Vec<f64> = {
            let (_, gb) = m.background_potential(&q).map_err(|e| e.to_string())?;
            let (_, gw) = m.wall_potential(&q).map_err(|e| e.to_string())?;
            gb.iter().zip(&gw).map(|(a, b)| a + b).collect()
        };
        let fd = central(total, &q, 1e-6 * eps);
        for (a, b) in g.iter().zip(&fd) {
            grad_err = grad_err.max((a - b).abs() / a.abs().max(b.abs()).max(1.0));
        }
    }
    check(
        drift < 1e-8 && grad_err < 1e-5,
        format!("energy drift over one period {drift:.1e}; max gradient mismatch over 100 states {grad_err:.1e}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("impact period-2 orbit at u10 = 9.23", c1_impact_orbit),
        ("smooth period-2 orbit at eps = 0.1", c2_smooth_orbit),
        (
            "monodromy symplectic and matches finite differences",
            c3_symplecticity,
        ),
        (
            "single hyperbolic-to-elliptic transition at eps = 0",
            c4_stability_structure,
        ),
        (
            "smooth trajectory converges to the impact trajectory",
            c5_flow_convergence,
        ),
        (
            "smooth Hill boundary converges, transverse corners",
            c6_hill_convergence,
        ),
        (
            "fixed-multiplier continuation Re = 0.8",
            c7_fixed_multiplier,
        ),
        (
            "fixed-energy stability change between eps 0.1 and 0.2",
            c8_fixed_energy,
        ),
        (
            "three degrees of freedom: decoupling and slab section",
            c9_three_dof,
        ),
        (
            "energy drift and analytic gradients",
            c10_integrator_quality,
        ),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
