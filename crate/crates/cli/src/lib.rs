//! Command-line front end: simulation, distance estimation,
//! reconstruction, evaluation, benchmarking and sample-size planning.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

use clap::{Parser, Subcommand};

pub use config::{RunConfig, Sampler};
pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "hgt", version, about = "Evolutionary tree reconstruction with harmonic greedy triplets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Generate a random tree and evolve sequences on it; writes
    /// <out>.nwk, <out>.fasta and <out>.json.
    Simulate(RunConfig),
    /// Write a PHYLIP distance matrix from FASTA, or from a tree with --exact.
    Distances(RunConfig),
    /// Reconstruct a tree from a PHYLIP matrix or FASTA file; writes the
    /// tree to --out and a report to <out>.report.json.
    Reconstruct(RunConfig),
    /// Compare --in with --truth, or without --in run Monte Carlo trials.
    Evaluate(RunConfig),
    /// Time reconstruction on exact distances over --sizes.
    Bench(RunConfig),
    /// Sequence length sufficient for recovery with probability 1 - delta.
    SampleSize(RunConfig),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Distances(_) => "distances",
            Command::Reconstruct(_) => "reconstruct",
            Command::Evaluate(_) => "evaluate",
            Command::Bench(_) => "bench",
            Command::SampleSize(_) => "sample-size",
        }
    }
}

/// Runs one command and returns the text to print.
pub fn run(command: &Command) -> CliResult<String> {
    use std::fmt::Write;
    let mut s = String::new();
    match command {
        Command::Simulate(cfg) => {
            for path in commands::simulate(cfg)? {
                writeln!(s, "wrote {}", path.display()).unwrap();
            }
        }
        Command::Distances(cfg) => {
            let d = commands::distances(cfg)?;
            writeln!(s, "wrote {} ({} taxa)", cfg.out()?.display(), d.n()).unwrap();
        }
        Command::Reconstruct(cfg) => {
            let (topo, stats) = commands::reconstruct(cfg)?;
            writeln!(
                s,
                "reconstructed {} leaves in {} iterations ({} split-edge calls)",
                topo.n_leaves(),
                stats.iterations,
                stats.split_edge_calls
            )
            .unwrap();
        }
        Command::Evaluate(cfg) if cfg.input.is_some() => {
            let c = commands::evaluate_pair(cfg)?;
            writeln!(s, "topology_matches {}", c.topology_matches).unwrap();
            writeln!(s, "rf_distance {}", c.rf_distance).unwrap();
            if let Some(e) = c.max_length_error {
                writeln!(s, "max_length_error {}", hgt_core::fmt_real(e)).unwrap();
            }
            if let (Some(b), Some(w)) = (c.bound, c.within_bound) {
                writeln!(s, "bound {} within {}", hgt_core::fmt_real(b), w).unwrap();
            }
        }
        Command::Evaluate(cfg) => {
            let r = commands::evaluate_trials(cfg)?;
            let a = &r.aggregates;
            writeln!(
                s,
                "recovered {}/{} (rate {:.4}, 95% band [{:.4}, {:.4}]), {} failures, sampler {}",
                a.recovered, a.trials, a.rate, a.band[0], a.band[1], a.failures, r.sampler
            )
            .unwrap();
        }
        Command::Bench(cfg) => {
            let r = commands::bench(cfg)?;
            writeln!(s, "{:>6} {:>12} {:>14} {:>8} {:>8}", "n", "seconds", "split_edge", "peak", "nodes").unwrap();
            for row in &r.rows {
                writeln!(
                    s,
                    "{:>6} {:>12.6} {:>14} {:>8} {:>8}",
                    row.n, row.seconds, row.split_edge_calls, row.peak_live_tuples, row.tree_nodes
                )
                .unwrap();
            }
            writeln!(s, "count slope {:.4}, time slope {:.4}", r.count_slope, r.time_slope).unwrap();
        }
        Command::SampleSize(cfg) => s = commands::format_sample_size(&commands::sample_size(cfg)?),
    }
    Ok(s)
}
