//! Config-driven experiment runner for the `bmolab` library.
#![allow(clippy::neg_cmp_op_on_partial_ord)]


pub mod config;
pub mod experiments;
pub mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

use config::{ConfigError, ExperimentConfig, Kind};
use report::Report;

/// One line per experiment kind, in the order `list` prints them.
pub fn catalogue() -> Vec<(Kind, &'static str)> {
    Kind::ALL
        .iter()
        .map(|&k| {
            let d = match k {
                Kind::Envelope => "minimal locally concave envelope on a Bellman domain",
                Kind::Extend => "heat and Poisson extensions",
                Kind::Norm => "semigroup BMO norm and A_p characteristic over probe points",
                Kind::Simulate => "exit-law representation and supermartingale check",
                Kind::Constants => "polygamma identity for the heat variance of log|x|; heat kernel on balls; sqrt(n) norm ratio",
                Kind::Jn => "John-Nirenberg bound with explicit constants",
                Kind::Transfer => "transference inequality sampled check",
                Kind::Ball => "ball-average estimate",
            };
            (k, d)
        })
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
}

pub struct RunOutcome {
    pub report: Report,
    pub report_path: PathBuf,
}

/// Loads, validates and runs a config, then writes the report.
pub fn run_file(path: &Path, opts: &RunOptions) -> Result<RunOutcome, ConfigError> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    let params = cfg.validate(&path.display().to_string())?;
    let out_dir = opts
        .out_dir
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir).map_err(|e| ConfigError::Io(out_dir.display().to_string(), e))?;
    let start = Instant::now();
    let out = experiments::run(
        &params,
        &experiments::Context { seed: cfg.seed, out_dir: &out_dir, output: &cfg.output },
    );
    let report_name = cfg.output.report.clone().unwrap_or_else(|| format!("{}.report.json", cfg.name));
    let report_path = out_dir.join(report_name);
    let report = Report::new(cfg, out.records, out.artifacts, start.elapsed().as_secs_f64());
    std::fs::write(&report_path, report.to_json()).map_err(|e| ConfigError::Io(report_path.display().to_string(), e))?;
    Ok(RunOutcome { report, report_path })
}
