//! Experiment runner behind the `singlab` binary.
//!
//! A run reads a TOML config, validates it, executes one experiment and
//! writes `report.json`, `summary.txt`, the experiment's CSV tables and
//! `run_meta.json` into the output directory. Everything except
//! `run_meta.json` depends only on the config and seed, never on the thread
//! count or the clock.

pub mod config;
pub mod experiments;

use config::{validate, ExperimentConfig};
use experiments::{run_experiment, section, Check, ResolvedSurface};
use serde::Serialize;
use serde_json::Value;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

pub const REPORT_SCHEMA_VERSION: u32 = 1;
/// Environment variable overriding the config seed (the only one read).
pub const SEED_ENV: &str = "SINGLAB_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_MISMATCH: i32 = 2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedConfig {
    pub experiment: String,
    pub seed: u64,
    pub surfaces: Vec<ResolvedSurface>,
    pub parameters: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub artifact: String,
    pub version: String,
    pub experiment: String,
    pub config: ResolvedConfig,
    pub verdict: String,
    pub expected: Option<String>,
    pub matches_expectation: Option<bool>,
    pub checks: Vec<Check>,
    pub results: Value,
    pub errors: Vec<String>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    pub fn exit_code(&self) -> i32 {
        if !self.errors.is_empty() {
            EXIT_ERROR
        } else if self.matches_expectation == Some(false) {
            EXIT_MISMATCH
        } else {
            EXIT_OK
        }
    }
}

/// Command-line choices for one run.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub experiment: String,
    pub config_path: PathBuf,
    pub seed: Option<u64>,
    pub expect: Option<String>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

pub struct RunOutput {
    pub report: Report,
    pub summary: String,
    pub out_dir: PathBuf,
}

/// Reads and validates the config; diagnostics come back as the error.
pub fn load(opts: &RunOptions) -> Result<(ExperimentConfig, PathBuf), Vec<String>> {
    let path = &opts.config_path;
    let text = std::fs::read_to_string(path).map_err(|e| vec![format!("cannot read {}: {e}", path.display())])?;
    let config = ExperimentConfig::parse(&text).map_err(|e| vec![format!("{}: {e}", path.display())])?;
    let base = path.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf);
    let diags = validate(&config, &opts.experiment, &base);
    if diags.is_empty() {
        Ok((config, base))
    } else {
        Err(diags)
    }
}

/// `--seed`, then `SINGLAB_SEED`, then the config.
pub fn resolve_seed(cli: Option<u64>, env: Option<&str>, config: u64) -> Result<u64, String> {
    if let Some(s) = cli {
        return Ok(s);
    }
    match env {
        Some(v) => v.trim().parse().map_err(|_| format!("{SEED_ENV} must be an unsigned 64-bit integer, got `{v}`")),
        None => Ok(config),
    }
}

fn summary_text(report: &Report, lines: &[String]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "experiment: {}", report.experiment);
    let _ = writeln!(s, "singlab {} (report schema {})", report.version, report.schema_version);
    let _ = writeln!(s, "seed: {}", report.config.seed);
    for surf in &report.config.surfaces {
        let _ = writeln!(s, "surface: {}", surf.label);
    }
    for l in lines {
        let _ = writeln!(s, "{l}");
    }
    for e in &report.errors {
        let _ = writeln!(s, "error: {e}");
    }
    let _ = writeln!(s, "verdict: {}", report.verdict);
    if let (Some(e), Some(m)) = (&report.expected, report.matches_expectation) {
        let _ = writeln!(s, "expected: {e} ({})", if m { "match" } else { "MISMATCH" });
    }
    s
}

fn unix_millis(t: SystemTime) -> u128 {
    t.duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis())
}

/// Runs a validated config and writes every output file.
pub fn execute(opts: &RunOptions, config: &ExperimentConfig, base_dir: &Path, env_seed: Option<&str>) -> Result<RunOutput, String> {
    let started = SystemTime::now();
    let clock = Instant::now();
    let seed = resolve_seed(opts.seed, env_seed, config.seed)?;
    let surfaces = config.surfaces.iter().map(|s| s.resolve(base_dir)).collect::<Result<Vec<_>, _>>()?;
    let outcome = run_experiment(config, &opts.experiment, &surfaces, seed);
    let matches = opts.expect.as_ref().map(|e| *e == outcome.verdict);
    let report = Report {
        schema_version: REPORT_SCHEMA_VERSION,
        artifact: "singlab".into(),
        version: singlab_core::VERSION.into(),
        experiment: opts.experiment.clone(),
        config: ResolvedConfig {
            experiment: opts.experiment.clone(),
            seed,
            surfaces: surfaces.iter().map(ResolvedSurface::new).collect(),
            parameters: section(config, &opts.experiment),
        },
        verdict: outcome.verdict,
        expected: opts.expect.clone(),
        matches_expectation: matches,
        checks: outcome.checks,
        results: outcome.results,
        errors: outcome.errors,
    };
    let out_dir = match (&opts.out, &config.out) {
        (Some(d), _) => d.clone(),
        (None, Some(d)) => base_dir.join(d),
        (None, None) => PathBuf::from("singlab-out").join(&opts.experiment),
    };
    std::fs::create_dir_all(&out_dir).map_err(|e| format!("cannot create {}: {e}", out_dir.display()))?;
    let write = |name: &str, content: &str| {
        std::fs::write(out_dir.join(name), content).map_err(|e| format!("cannot write {name}: {e}"))
    };
    let summary = summary_text(&report, &outcome.summary);
    write("report.json", &report.to_json())?;
    write("summary.txt", &summary)?;
    for t in &outcome.tables {
        write(&t.file, &t.content)?;
    }
    let meta = serde_json::json!({
        "started_unix_ms": unix_millis(started),
        "finished_unix_ms": unix_millis(SystemTime::now()),
        "elapsed_seconds": clock.elapsed().as_secs_f64(),
        "threads": opts.threads.unwrap_or_else(rayon::current_num_threads),
        "config_path": opts.config_path.display().to_string(),
        "version": singlab_core::VERSION,
    });
    write("run_meta.json", &(serde_json::to_string_pretty(&meta).expect("metadata serialises") + "\n"))?;
    Ok(RunOutput { report, summary, out_dir })
}
