use clap::Parser;
use singlab_cli::{execute, load, RunOptions, EXIT_ERROR, SEED_ENV};
use std::path::PathBuf;
use std::process::ExitCode;

/// Run one numerical experiment and write its report.
#[derive(Debug, Parser)]
#[command(name = "singlab", version)]
struct Cli {
    /// mu-constancy, slice-components, separating, tangent-cone, thin-wedge,
    /// monodromy, lipschitz-bounds, conicality or density-anchors.
    experiment: String,
    /// TOML experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides SINGLAB_SEED and the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Expected verdict; a different verdict exits with status 2.
    #[arg(long)]
    expect: Option<String>,
    /// Output directory (default: the config's `out`, else singlab-out/<experiment>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Only validate the config and list its problems.
    #[arg(long)]
    check: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 || rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            eprintln!("singlab: invalid thread count {n}");
            return ExitCode::from(EXIT_ERROR as u8);
        }
    }
    let opts = RunOptions {
        experiment: cli.experiment,
        config_path: cli.config,
        seed: cli.seed,
        expect: cli.expect,
        out: cli.out,
        threads: cli.threads,
    };
    let (config, base) = match load(&opts) {
        Ok(v) => v,
        Err(diags) => {
            for d in diags {
                eprintln!("singlab: {d}");
            }
            return ExitCode::from(EXIT_ERROR as u8);
        }
    };
    if cli.check {
        println!("config ok");
        return ExitCode::SUCCESS;
    }
    let env_seed = std::env::var(SEED_ENV).ok();
    match execute(&opts, &config, &base, env_seed.as_deref()) {
        Ok(out) => {
            print!("{}", out.summary);
            println!("report: {}", out.out_dir.join("report.json").display());
            ExitCode::from(out.report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("singlab: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
