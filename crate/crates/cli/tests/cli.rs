use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_softimpact");

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(sub: &str, config: &Path, out: &Path, extra: &[&str]) -> i32 {
    Command::new(BIN)
        .arg(sub)
        .arg("--config")
        .arg(config)
        .arg("--output_dir")
        .arg(out)
        .args(extra)
        .status()
        .expect("binary runs")
        .code()
        .expect("exit code")
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

const MODEL: &str = r#""model": { "beta": 1.0471975511965979, "omega": 1.0, "lambda": 1.4142135623730951, "u1s": 2.5, "u2s": 0.0, "b": 10.0, "epsilon": 0.0 }"#;

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, body).unwrap();
    p
}

#[test]
fn hill_writes_region_corners_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("fig2");
    assert_eq!(run("hill", &configs().join("fig2.json"), &out, &[]), 0);
    let m = manifest(&out);
    assert_eq!(m["status"], "ok");
    for f in [
        "region.csv",
        "corners.csv",
        "level_sets.csv",
        "hausdorff.csv",
    ] {
        let body = fs::read(out.join(f)).unwrap();
        assert_eq!(
            m["files"][f]["bytes"].as_u64().unwrap() as usize,
            body.len()
        );
    }
    let corners = fs::read_to_string(out.join("corners.csv")).unwrap();
    assert!(corners.starts_with("x,y,class\n"));
    assert_eq!(
        corners
            .lines()
            .filter(|l| l.ends_with(",transverse"))
            .count(),
        2
    );
    assert!(fs::read_to_string(out.join("region.csv"))
        .unwrap()
        .starts_with("polyline_id,part_tag,x,y\n"));
    assert_eq!(m["config"]["experiment"]["hill"]["resolution"], 512);
}

#[test]
fn find_orbit_reports_the_impact_orbit() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        &format!(
            r#"{{ {MODEL}, "experiment": {{ "find-orbit": {{ "u10": 9.23 }} }}, "seed": 1 }}"#
        ),
    );
    let out = tmp.path().join("out");
    assert_eq!(run("find-orbit", &cfg, &out, &[]), 0);
    let o: Value =
        serde_json::from_str(&fs::read_to_string(out.join("orbit.json")).unwrap()).unwrap();
    for key in [
        "epsilon",
        "u10",
        "v20",
        "H",
        "t_c",
        "monodromy",
        "multipliers",
        "stability",
    ] {
        assert!(o.get(key).is_some(), "missing {key}");
    }
    let lib =
        softimpact::orbit::find_period2_impact(&softimpact::WedgeModel::reference(), 9.23).unwrap();
    assert_eq!(o["v20"].as_f64().unwrap(), lib.v20);
    assert_eq!(o["stability"], "elliptic");
}

#[test]
fn malformed_json_exits_2_without_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "{ \"model\": ");
    let out = tmp.path().join("never");
    assert_eq!(run("hill", &cfg, &out, &[]), 2);
    assert!(!out.exists());
}

#[test]
fn unknown_keys_and_wrong_subcommand_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("never");
    let cfg = write_config(
        tmp.path(),
        &format!(
            r#"{{ {MODEL}, "experiment": {{ "find-orbit": {{ "u10": 9.23, "colour": 1 }} }} }}"#
        ),
    );
    assert_eq!(run("find-orbit", &cfg, &out, &[]), 2);
    let cfg = write_config(
        tmp.path(),
        &format!(r#"{{ {MODEL}, "experiment": {{ "find-orbit": {{ "u10": 9.23 }} }} }}"#),
    );
    assert_eq!(run("hill", &cfg, &out, &[]), 2);
    let bad_model = MODEL.replace("\"omega\": 1.0", "\"omega\": -1.0");
    let cfg = write_config(
        tmp.path(),
        &format!(r#"{{ {bad_model}, "experiment": {{ "find-orbit": {{ "u10": 9.23 }} }} }}"#),
    );
    assert_eq!(run("find-orbit", &cfg, &out, &[]), 2);
    assert!(!out.exists());
}

#[test]
fn numerical_failure_exits_3_with_the_error_in_the_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    // no symmetric period-2 orbit exists this close to the barrier
    let cfg = write_config(
        tmp.path(),
        &format!(r#"{{ {MODEL}, "experiment": {{ "find-orbit": {{ "u10": 2.6 }} }} }}"#),
    );
    let out = tmp.path().join("out");
    assert_eq!(run("find-orbit", &cfg, &out, &[]), 3);
    let m = manifest(&out);
    assert_eq!(m["status"], "numerical_failure");
    assert_eq!(m["error"]["module"], "orbit");
    assert!(!out.join("orbit.json").exists());
}

#[test]
fn csv_outputs_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        assert_eq!(run("continue", &configs().join("fig3.json"), d, &[]), 0);
    }
    for f in ["orbits.csv", "orbit_trajectories.csv", "continuation.json"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    assert_eq!(manifest(&a)["files"], manifest(&b)["files"]);
}

#[test]
fn scan_does_not_depend_on_worker_count() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        &format!(
            r#"{{ {MODEL}, "experiment": {{ "bifurcation-scan": {{ "ratios": [0.7071067811865476, 0.8], "u10_min": 4.0, "u10_max": 12.0, "u10_step": 0.5, "epsilons": [0.0] }} }} }}"#
        ),
    );
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(run("bifurcation-scan", &cfg, &a, &["--workers", "1"]), 0);
    assert_eq!(run("bifurcation-scan", &cfg, &b, &["--workers", "3"]), 0);
    assert_eq!(manifest(&b)["workers"], 3);
    for f in ["scan.csv", "curve.csv"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn scattered_poincare_seeds_follow_the_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let body = |seed: u64| {
        format!(
            r#"{{ {MODEL}, "experiment": {{ "poincare": {{ "h": 34.8, "scatter": {{ "count": 4, "u1": [9.0, 9.4], "v1": [-0.1, 0.1] }}, "n_returns": 3 }} }}, "seed": {seed} }}"#
        )
    };
    let mut outs = Vec::new();
    for (i, seed) in [5, 5, 6].into_iter().enumerate() {
        let dir = tmp.path().join(format!("r{i}"));
        fs::create_dir_all(&dir).unwrap();
        let cfg = write_config(&dir, &body(seed));
        assert_eq!(run("poincare", &cfg, &dir.join("out"), &[]), 0);
        outs.push(fs::read(dir.join("out/points.csv")).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
    assert_ne!(outs[0], outs[2]);
}

#[test]
fn simulate_and_check_conditions() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        &format!(
            r#"{{ {MODEL}, "experiment": {{ "simulate": {{ "initial": [9.23, 0.0, 0.0, 4.914266865887791], "t_end": 2.95, "sample_dt": 0.01 }} }} }}"#
        ),
    );
    let out = tmp.path().join("sim");
    assert_eq!(run("simulate", &cfg, &out, &[]), 0);
    let events = fs::read_to_string(out.join("events.csv")).unwrap();
    assert_eq!(events.lines().count(), 3);
    assert!(events.lines().skip(1).all(|l| l.ends_with(",regular")));
    assert!(
        manifest(&out)["summary"]["max_relative_energy_drift"]
            .as_f64()
            .unwrap()
            < 1e-10
    );

    let cfg = write_config(
        tmp.path(),
        &format!(
            r#"{{ {MODEL}, "experiment": {{ "check-conditions": {{ "window": {{ "x0": 0.0, "x1": 6.0, "y0": -2.0, "y1": 2.0 }}, "epsilons": [0.3, 0.1, 0.01] }} }} }}"#
        ),
    );
    let out = tmp.path().join("cond");
    assert_eq!(run("check-conditions", &cfg, &out, &[]), 0);
    let r: Value =
        serde_json::from_str(&fs::read_to_string(out.join("conditions.json")).unwrap()).unwrap();
    assert_eq!(r["interior_decay"], true);
}

#[test]
fn shipped_configs_run() {
    let tmp = tempfile::tempdir().unwrap();
    let subs = [
        ("fig2", "hill"),
        ("fig3", "continue"),
        ("fig4", "bifurcation-scan"),
        ("fig5", "continue"),
        ("fig6", "continue"),
        ("fig7", "poincare"),
    ];
    let t = std::time::Instant::now();
    for (fig, sub) in subs {
        let out = tmp.path().join(fig);
        assert_eq!(
            run(sub, &configs().join(format!("{fig}.json")), &out, &[]),
            0,
            "{fig}"
        );
        assert_eq!(manifest(&out)["status"], "ok");
    }
    assert!(t.elapsed().as_secs() < 600);
}
