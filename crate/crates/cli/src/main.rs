//! Command-line front end: `simulate` runs a Monte Carlo sweep described
//! by a flat `key = value` config file and writes a CSV or JSON table;
//! `validate` runs the library's built-in self-check suites. The
//! `BSC_SEED` environment variable overrides the configured RNG seed.

use anyhow::{bail, Context};
use bscopt_core::{
    emit_table, run_experiment, run_suite, ExperimentConfig, OutputFormat, ResultTable,
};
use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "bscopt",
    version,
    about = "Monte Carlo design studies for a multiantenna reader serving backscatter tags"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Monte Carlo sweep described by a config file.
    Simulate {
        /// Experiment config file (flat `key = value` lines).
        #[arg(long)]
        config: PathBuf,
        /// Concurrent realizations; 0 picks the machine default.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Output format: csv or json.
        #[arg(long, default_value = "csv")]
        format: String,
        /// Output path; defaults to the config's output_path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in self-check suites.
    Validate {
        /// Suite name: invariants, oracles, or all.
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

/// Reads the optional `BSC_SEED` override.
fn seed_override() -> anyhow::Result<Option<u64>> {
    match std::env::var("BSC_SEED") {
        Ok(v) => {
            let seed = v
                .trim()
                .parse()
                .with_context(|| format!("BSC_SEED must be an unsigned integer, got {v:?}"))?;
            Ok(Some(seed))
        }
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(e).context("reading BSC_SEED"),
    }
}

/// Prints per-(scheme, sweep value) mean rates in canonical order.
fn print_summary(table: &ResultTable) {
    let mut groups: Vec<(usize, usize)> = table
        .rows
        .iter()
        .map(|r| (r.scheme as usize, r.sweep_index))
        .collect();
    groups.sort();
    groups.dedup();
    println!(
        "{:<18} {:>14} {:>8} {:>16}",
        "scheme",
        table.sweep_parameter.name(),
        "rows",
        "mean_rate_bps_hz"
    );
    for (scheme_tag, sweep_index) in groups {
        let rows: Vec<_> = table
            .rows
            .iter()
            .filter(|r| r.scheme as usize == scheme_tag && r.sweep_index == sweep_index)
            .collect();
        let mean = rows.iter().map(|r| r.sum_rate).sum::<f64>() / rows.len() as f64;
        println!(
            "{:<18} {:>14.6} {:>8} {:>16.9}",
            rows[0].scheme.name(),
            rows[0].sweep_value,
            rows.len(),
            mean
        );
    }
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate {
            config,
            workers,
            format,
            out,
        } => {
            let format = OutputFormat::parse(&format)?;
            let mut exp = ExperimentConfig::from_kv_file(&config)
                .with_context(|| format!("loading experiment config {}", config.display()))?;
            if let Some(seed) = seed_override()? {
                exp.base.rng_seed = seed;
            }
            let table = run_experiment(&exp, workers)?;
            let path = out.unwrap_or_else(|| PathBuf::from(&exp.output_path));
            emit_table(&table, &path, format)?;
            print_summary(&table);
            println!("wrote {} rows to {}", table.rows.len(), path.display());
            Ok(())
        }
        Command::Validate { suite } => {
            let seed = seed_override()?.unwrap_or(1);
            let report = run_suite(&suite, seed)?;
            for check in &report.checks {
                println!(
                    "{} {}: {}",
                    if check.passed { "PASS" } else { "FAIL" },
                    check.name,
                    check.detail
                );
            }
            let failed = report.checks.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                bail!("{failed} of {} checks failed", report.checks.len());
            }
            println!(
                "suite {}: all {} checks passed",
                report.suite,
                report.checks.len()
            );
            Ok(())
        }
    }
}
