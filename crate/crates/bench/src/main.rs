use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use geoldp_bench::report::{self, mean_ratios, summarize, trace_path, write_profile};
use geoldp_bench::{
    find_cell, mechanism_profile, run_cell, run_suite, ExperimentConfig, Prepared, SuiteOptions,
};

#[derive(Parser, Debug)]
#[command(name = "geoldp", version, about = "Geometric vs k-RR utility benchmark")]
struct Cli {
    /// TOML file mirroring the experiment configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed (overrides the config file)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads for `run`
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,

    /// Keep likelihood traces for every replicate, not just replicate 0
    #[arg(long, global = true)]
    full_traces: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Output distribution of every mechanism for one true value
    Profile {
        #[arg(long, default_value_t = 50)]
        x: usize,
    },
    /// Run the full experiment grid
    Run {
        /// Fill the wall_time_s column of records.csv (makes it non-reproducible)
        #[arg(long)]
        wall_time: bool,
    },
    /// Summarize an existing records.csv
    Summarize {
        /// Defaults to <out>/records.csv
        #[arg(long)]
        records: Option<PathBuf>,
        #[arg(long, default_value = "geometric")]
        baseline: String,
        #[arg(long, default_value = "krr")]
        versus: String,
    },
    /// Per-iteration log-likelihood of one cell
    Trace {
        #[arg(long)]
        mechanism: String,
        #[arg(long)]
        prior: String,
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        replicate: usize,
    },
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)
            .with_context(|| format!("loading {}", path.display()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let cfg = load_config(&cli)?;
    match &cli.command {
        Command::Profile { x } => {
            ensure_dir(&cli.out)?;
            for (idx, m) in cfg.mechanisms.iter().enumerate() {
                let profile = mechanism_profile(&cfg, idx, *x)?;
                let path = cli.out.join(format!("profile_{}_{}.csv", m.name, x));
                write_profile(&path, &profile)?;
                println!("{}", path.display());
            }
        }
        Command::Run { wall_time } => {
            let options = SuiteOptions {
                workers: cli.workers,
                full_traces: cli.full_traces,
            };
            let outcome = run_suite(&cfg, options)?;
            let summary =
                report::write_suite(&cli.out, &cfg, &outcome, cli.full_traces, *wall_time)?;
            for row in &summary {
                println!(
                    "{:<12} {:<10} {:>7}  mean {:.4}  std {:.4}",
                    row.mechanism, row.prior, row.sample_size, row.mean, row.std
                );
            }
            if !outcome.failures.is_empty() {
                eprintln!("{} cells failed, see failures.csv", outcome.failures.len());
            }
        }
        Command::Summarize {
            records,
            baseline,
            versus,
        } => {
            let path = records.clone().unwrap_or_else(|| cli.out.join("records.csv"));
            let records = report::read_records(&path)
                .with_context(|| format!("reading {}", path.display()))?;
            anyhow::ensure!(!records.is_empty(), "{} holds no records", path.display());
            let summary = summarize(&records);
            ensure_dir(&cli.out)?;
            report::write_summary(&cli.out.join("summary.csv"), &summary)?;
            let ratios = mean_ratios(&summary, baseline, versus);
            report::write_ratios(&cli.out.join("ratios.csv"), &ratios)?;
            for r in &ratios {
                println!(
                    "{:<10} {:>7}  {}/{} = {:.3}",
                    r.prior, r.sample_size, r.numerator, r.denominator, r.ratio
                );
            }
        }
        Command::Trace {
            mechanism,
            prior,
            size,
            replicate,
        } => {
            let cell = find_cell(&cfg, mechanism, prior, *size, *replicate)?;
            let prepared = Prepared::new(&cfg)?;
            let out = run_cell(&cfg, &prepared, cell)?;
            ensure_dir(&cli.out)?;
            let path = trace_path(&cli.out, &out.record.cell);
            let trace = out.record.likelihood_trace.as_deref().unwrap_or_default();
            report::write_trace(&path, trace)?;
            println!(
                "{}  kantorovich(estimate) {:.4}  kantorovich(noisy) {:.4}",
                path.display(),
                out.record.kantorovich_estimate,
                out.record.kantorovich_noisy
            );
        }
    }
    Ok(())
}
