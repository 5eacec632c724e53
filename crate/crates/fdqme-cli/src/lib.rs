//! Scenario runner behind the `fdqme` binary.

pub mod config;
pub mod output;
pub mod scenarios;

use std::path::{Path, PathBuf};

use anyhow::Result;
use toml::{Table, Value};

use config::ScenarioConfig;
use scenarios::RunOptions;

/// Numerical tolerances recorded with every run.
pub fn tolerances() -> Table {
    let ode = fdqme::ode::OdeOptions::default();
    let mut t = Table::new();
    for (k, v) in [
        ("kl_tail_cutoff", fdqme::measures::TAIL_CUTOFF),
        ("zero_excitation", fdqme::fdme::ZERO_EXCITATION),
        ("inverse_transform", fdqme::fdme::INVERSE_TOL),
        ("fock_truncation", fdqme::oracle::TRUNCATION_TOL),
        ("ode_rtol", ode.rtol),
        ("ode_atol", ode.atol),
        ("purity_threshold", scenarios::PURITY_THRESHOLD),
    ] {
        t.insert(k.into(), Value::Float(v));
    }
    t
}

/// Sidecar contents apart from the file list and summary.
pub fn metadata(cfg: &ScenarioConfig, opts: &RunOptions) -> Table {
    let mut meta = Table::new();
    meta.insert("scenario".into(), Value::String(cfg.scenario.tag().into()));
    meta.insert("version".into(), Value::String(env!("CARGO_PKG_VERSION").into()));
    let mut o = Table::new();
    o.insert("gap".into(), Value::String(opts.gap.to_string()));
    o.insert("include_sum_frequency".into(), Value::Boolean(opts.include_sum_frequency));
    meta.insert("options".into(), Value::Table(o));
    meta.insert("tolerances".into(), Value::Table(tolerances()));
    let echo: Table = cfg.echo().parse().expect("echo is valid TOML");
    meta.insert("config".into(), Value::Table(echo));
    meta
}

/// Runs `cfg` and writes its tables and sidecar under `dir` (or the
/// configured output directory).
pub fn run_and_write(cfg: &ScenarioConfig, opts: &RunOptions, dir: Option<&Path>) -> Result<Vec<PathBuf>> {
    let out = scenarios::run(cfg, opts)?;
    let dir = dir.unwrap_or(&cfg.output.dir);
    output::write_run(dir, &cfg.output.prefix, &out, metadata(cfg, opts))
}
