//! The `sim` command-line front end.
//!
//! ```text
//! sim run   [--config FILE] [--set k=v ...] [--seed N] [--out FILE.csv] [--threads N]
//! sim sweep [--config FILE] [--set k=v ...] [--seed N] [--out DIR] [--preset fig2|fig3|fig4] [--threads N]
//! ```
//!
//! `run` evaluates the configured operating point and writes one CSV row per
//! Monte Carlo run plus a JSON summary next to it. `sweep` runs a built-in
//! preset or the `[sweep]` table of the configuration and writes, per mode,
//! an aggregate CSV `<name>_<mode>.csv`, plus `<name>_raw.csv` and
//! `<name>_summary.json`. The worker count defaults to `SIM_THREADS`, then to
//! the number of CPUs. Exit status: 0 success, 2 configuration error, 3 I/O
//! error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::{Result, SimError};
use crate::harness::{run_point_indexed, run_sweep, KpiStats, Preset, SweepResult};
use crate::output;

#[derive(Debug, Parser)]
#[command(name = "sim", version, about = "TN/NTN disaster-fallback Monte Carlo simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the configured operating point.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Per-run CSV; the JSON summary is written alongside.
        #[arg(long, default_value = "results/run.csv")]
        out: PathBuf,
    },
    /// Sweep one parameter over a preset or the `[sweep]` table.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Output directory.
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[arg(long)]
        preset: Option<Preset>,
    },
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// TOML configuration file; missing keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set disaster.p_f=0.3`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Master seed (overrides `scenario.master_seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, env = "SIM_THREADS")]
    threads: Option<usize>,
}

impl CommonArgs {
    fn load(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::load(self.config.as_deref(), &self.overrides)?;
        if let Some(seed) = self.seed {
            cfg.set_seed(seed);
        }
        Ok(cfg)
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.threads {
            if n == 0 {
                return Err(SimError::config("threads", "must be >= 1"));
            }
            builder = builder.num_threads(n);
        }
        builder
            .build()
            .map_err(|e| SimError::config("threads", e.to_string()))
    }
}

/// Entry point of the `sim` binary; returns the process exit status.
pub fn main() -> i32 {
    run_with_args(std::env::args_os())
}

/// Parses `args` (including the program name) and executes the command.
pub fn run_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match &cli.command {
        Command::Run { common, out } => cmd_run(common, out),
        Command::Sweep { common, out, preset } => cmd_sweep(common, out, *preset),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn cmd_run(args: &CommonArgs, out: &Path) -> Result<()> {
    let cfg = args.load()?;
    let scenario = cfg.scenario();
    let records = args
        .pool()?
        .install(|| run_point_indexed(&scenario, 0, cfg.run.runs))?;
    let kpis: Vec<_> = records.iter().map(|r| r.kpis).collect();
    let stats = KpiStats::from_kpis(&kpis);

    output::write_file(out, &output::raw_csv(&scenario, &records))?;
    let json = out.with_extension("json");
    output::write_file(&json, &output::run_summary_json(&cfg, &stats))?;

    println!(
        "{} K={} runs={}: {:.3} Mbps/user, {:.2} ms, PRR {:.3}, fallback {:.3}",
        scenario.mode,
        scenario.n_users,
        stats.runs,
        stats.per_user_throughput_bps.mean / 1e6,
        stats.mean_latency_s.mean * 1e3,
        stats.prr.mean,
        stats.fallback_ratio.mean
    );
    println!("wrote {} and {}", out.display(), json.display());
    Ok(())
}

fn cmd_sweep(args: &CommonArgs, out: &Path, preset: Option<Preset>) -> Result<()> {
    let cfg = args.load()?;
    let (name, specs) = match preset {
        Some(p) => {
            let mut specs = p.specs(&cfg.scenario(), cfg.run.runs);
            for s in &mut specs {
                s.common_random_numbers = cfg.sweep.common_random_numbers;
            }
            (p.name(), specs)
        }
        None => match cfg.sweep_spec()? {
            Some(spec) => ("sweep", vec![spec]),
            None => {
                return Err(SimError::config(
                    "sweep.parameter",
                    "no sweep defined: pass --preset fig2|fig3|fig4 or set sweep.parameter and sweep.values",
                ))
            }
        },
    };

    let pool = args.pool()?;
    let results: Vec<SweepResult> = pool.install(|| specs.iter().map(run_sweep).collect::<Result<_>>())?;

    let mut written = Vec::new();
    for r in &results {
        let path = out.join(format!("{name}_{}.csv", r.mode));
        output::write_file(&path, &output::aggregate_csv(r))?;
        written.push(path);
    }
    let raw = out.join(format!("{name}_raw.csv"));
    output::write_file(&raw, &output::sweeps_raw_csv(&results))?;
    written.push(raw);
    let json = out.join(format!("{name}_summary.json"));
    output::write_file(&json, &output::sweep_summary_json(&cfg, preset.map(|p| p.name()), &results))?;
    written.push(json);

    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}
