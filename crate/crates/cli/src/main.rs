//! `softimpact <subcommand> --config F [--output_dir D]`
//!
//! Exit status 0 on success, 2 for configuration errors (nothing is
//! written), 3 for numerical failures (only `manifest.json` is written,
//! carrying the error).

mod config;
mod experiments;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use sha2::{Digest, Sha256};

use config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "softimpact", version, about = "Wedge soft-impact experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    Simulate(Common),
    FindOrbit(Common),
    Continue(Common),
    BifurcationScan {
        #[command(flatten)]
        common: Common,
        /// Worker threads; defaults to the number of cores.
        #[arg(long)]
        workers: Option<usize>,
    },
    Hill(Common),
    Poincare(Common),
    CompareFlows(Common),
    CheckConditions(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `output_dir` from the config file.
    #[arg(long = "output_dir")]
    output_dir: Option<PathBuf>,
}

impl Command {
    fn parts(&self) -> (&'static str, &Common, Option<usize>) {
        match self {
            Command::Simulate(c) => ("simulate", c, None),
            Command::FindOrbit(c) => ("find-orbit", c, None),
            Command::Continue(c) => ("continue", c, None),
            Command::BifurcationScan { common, workers } => {
                ("bifurcation-scan", common, Some(workers.unwrap_or(0)))
            }
            Command::Hill(c) => ("hill", c, None),
            Command::Poincare(c) => ("poincare", c, None),
            Command::CompareFlows(c) => ("compare-flows", c, None),
            Command::CheckConditions(c) => ("check-conditions", c, None),
        }
    }
}

fn config_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("config error: {msg}");
    ExitCode::from(2)
}

fn load(path: &Path) -> Result<ExperimentConfig, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let cfg: ExperimentConfig =
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    config::validate(&cfg)?;
    Ok(cfg)
}

fn sha256_hex(data: &[u8]) -> String {
    Sha256::digest(data)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common, workers) = cli.command.parts();
    let mut cfg = match load(&common.config) {
        Ok(c) => c,
        Err(e) => return config_error(e),
    };
    if cfg.experiment.name() != name {
        return config_error(format!(
            "config describes `{}` but `{name}` was run",
            cfg.experiment.name()
        ));
    }
    if let Some(d) = &common.output_dir {
        cfg.output_dir = Some(d.clone());
    }
    let Some(out_dir) = cfg.output_dir.clone() else {
        return config_error("no output directory: set output_dir or pass --output_dir");
    };
    // only scans fan out; everything else runs on one thread
    let threads = match workers {
        Some(0) => std::thread::available_parallelism().map_or(1, |n| n.get()),
        Some(n) => n,
        None => 1,
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => return config_error(e),
    };

    let start = Instant::now();
    let result = pool.install(|| experiments::run(&cfg));
    let elapsed = start.elapsed().as_secs_f64();

    let (files, status, error, summary, code) = match result {
        Ok(a) => (a.files, "ok", None, a.summary, 0),
        Err(e) => {
            let err = json!({ "module": cfg.experiment.module(), "message": e.to_string() });
            eprintln!("numerical failure in {}: {e}", cfg.experiment.module());
            (
                Vec::new(),
                "numerical_failure",
                Some(err),
                serde_json::Value::Null,
                3,
            )
        }
    };

    if let Err(e) = fs::create_dir_all(&out_dir) {
        eprintln!("cannot create {}: {e}", out_dir.display());
        return ExitCode::from(3);
    }
    let mut checksums = serde_json::Map::new();
    for (file, body) in &files {
        if let Err(e) = fs::write(out_dir.join(file), body) {
            eprintln!("cannot write {file}: {e}");
            return ExitCode::from(3);
        }
        checksums.insert(
            file.to_string(),
            json!({ "sha256": sha256_hex(body.as_bytes()), "bytes": body.len() }),
        );
    }
    let manifest = json!({
        "command": name,
        "version": env!("CARGO_PKG_VERSION"),
        "library": "softimpact",
        "config": cfg,
        "workers": threads,
        "wall_clock_seconds": elapsed,
        "status": status,
        "error": error,
        "summary": summary,
        "files": checksums,
    });
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    if let Err(e) = fs::write(out_dir.join("manifest.json"), text) {
        eprintln!("cannot write manifest: {e}");
        return ExitCode::from(3);
    }
    ExitCode::from(code)
}
