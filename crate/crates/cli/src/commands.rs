use std::fs;
use std::path::Path;
use std::time::Instant;

use hgt_core::distmat::{read_phylip, write_phylip, DistanceMatrix};
use hgt_core::evolve::{
    evolve_sequences, exact_distance_matrix, gen_tree, read_fasta, site_pattern_counts,
    write_fasta, EdgeProbSampler, EvoModel, MAX_PATTERNS,
};
use hgt_core::hgt::{fast_hgt, sample_length, HgtStats, SampleLength};
use hgt_core::treecore::{
    g_depth, max_length_error, parse_newick, rf_distance, suppress_root, LeafId, Metric,
    RootedEvoTree, WeightedTopology,
};
use hgt_core::fmt_real;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::config::{with_suffix, RunConfig, Sampler};
use crate::error::{invalid, CliError, CliResult};
use crate::report::{log_log_slope, Aggregates, BenchReport, BenchRow, RunReport, TrialRow};

pub const DEFAULT_TRIALS: usize = 50;
pub const DEFAULT_SIZES: [usize; 5] = [200, 400, 800, 1600, 3200];
/// Largest `n * ell` the site sampler will allocate.
const MAX_SITE_BYTES: u128 = 1 << 32;

/// Tree and sampling seeds for trial `trial` of a run seeded with `seed`.
/// Trials use separate ChaCha streams, so any subset can be rerun alone.
pub fn trial_seeds(seed: u64, trial: u64) -> (u64, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    (rng.next_u64(), rng.next_u64())
}

/// `1 + floor(log2(n - 1))`, the largest g-depth a tree on `n` leaves can have.
pub fn depth_bound(n: usize) -> usize {
    1 + (usize::BITS - 1 - (n - 1).leading_zeros()) as usize
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    write_text(path, &text)
}

/// An unrooted weighted tree from Newick in either metric; rooted
/// probability trees are root-suppressed.
pub fn read_topology(text: &str, m: usize) -> CliResult<WeightedTopology> {
    let tree = parse_newick(text)?;
    Ok(match tree.metric {
        Some(Metric::Prob) => suppress_root(&tree.to_rooted(m)?),
        _ => tree.to_topology()?,
    })
}

/// Path-sum distances between the leaves of a weighted tree.
pub fn topology_distances(t: &WeightedTopology) -> CliResult<DistanceMatrix> {
    let n = t.n_leaves();
    if t.edges().iter().any(|e| e.length.is_none()) {
        return Err(invalid("every branch needs a length"));
    }
    let mut c = vec![1.0; n * n];
    for i in 0..n {
        let mut dist = vec![f64::NAN; t.node_count()];
        let start = t.leaf_node(LeafId(i));
        dist[start] = 0.0;
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &(v, e) in t.neighbors(u) {
                if dist[v].is_nan() {
                    dist[v] = dist[u] + t.edges()[e].length.expect("checked");
                    stack.push(v);
                }
            }
        }
        for j in 0..n {
            c[i * n + j] = (-dist[t.leaf_node(LeafId(j))]).exp();
        }
    }
    // Mirror the upper triangle so the matrix is exactly symmetric.
    for i in 0..n {
        for j in 0..i {
            c[i * n + j] = c[j * n + i];
        }
    }
    Ok(DistanceMatrix::from_closeness(t.names().to_vec(), c)?)
}

/// PHYLIP or FASTA, told apart by the first character.
pub fn read_matrix(path: &Path, m: usize) -> CliResult<DistanceMatrix> {
    let text = read_text(path)?;
    if text.trim_start().starts_with('>') {
        Ok(DistanceMatrix::from_sequences(&read_fasta(&text, m)?)?)
    } else {
        Ok(read_phylip(&text)?)
    }
}

fn stats_json(s: &HgtStats) -> serde_json::Value {
    json!({
        "iterations": s.iterations,
        "split_edge_calls": s.split_edge_calls,
        "update_calls": s.update_calls,
        "peak_live_tuples": s.peak_live_tuples,
        "tree_nodes": s.tree_nodes,
    })
}

fn ell_usize(ell: u64) -> CliResult<usize> {
    usize::try_from(ell).map_err(|_| invalid(format!("--ell {ell} is too large")))
}

/// Writes `<out>.nwk`, `<out>.fasta` and `<out>.json`; returns their paths.
pub fn simulate(cfg: &RunConfig) -> CliResult<Vec<std::path::PathBuf>> {
    let n = cfg.n()?;
    let model = cfg.model()?;
    let ell = match cfg.ell {
        Some(ell) if ell >= 1 => ell_usize(ell)?,
        _ => return Err(invalid("--ell must be at least 1")),
    };
    let out = cfg.out()?;
    if (n as u128) * (ell as u128) > MAX_SITE_BYTES {
        return Err(invalid("n * ell is too large to hold in memory"));
    }
    let (tree_seed, sample_seed) = trial_seeds(cfg.seed, 0);
    let tree = gen_tree(n, cfg.shape, &model, EdgeProbSampler::default_for(&model), tree_seed)?;
    let seqs = evolve_sequences(&tree, ell, sample_seed, None)?;

    let paths = [".nwk", ".fasta", ".json"].map(|s| with_suffix(out, s));
    write_text(&paths[0], &(tree.to_newick() + "\n"))?;
    let mut fasta = vec![];
    write_fasta(&seqs, &mut fasta).expect("writing to memory");
    fs::write(&paths[1], fasta).map_err(|e| CliError::io(&paths[1], e))?;
    let sidecar = json!({
        "command": "simulate",
        "config": cfg,
        "config_hash": cfg.hash("simulate"),
        "tree_seed": tree_seed,
        "sample_seed": sample_seed,
        "g_depth": g_depth(&tree),
        "unrooted": suppress_root(&tree).to_newick(),
    });
    write_json(&paths[2], &sidecar)?;
    Ok(paths.to_vec())
}

/// Writes a PHYLIP matrix estimated from FASTA, or exact from a tree.
pub fn distances(cfg: &RunConfig) -> CliResult<DistanceMatrix> {
    let input = cfg.input()?;
    let out = cfg.out()?;
    let text = read_text(input)?;
    let d = if cfg.exact {
        let tree = parse_newick(&text)?;
        match tree.metric {
            Some(Metric::Prob) => exact_distance_matrix(&tree.to_rooted(cfg.m)?),
            _ => topology_distances(&tree.to_topology()?)?,
        }
    } else {
        DistanceMatrix::from_sequences(&read_fasta(&text, cfg.m)?)?
    };
    let mut buf = vec![];
    write_phylip(&d, &mut buf).expect("writing to memory");
    fs::write(out, buf).map_err(|e| CliError::io(out, e))?;
    Ok(d)
}

/// Reconstructs from `--in`, writes the tree to `--out` and a report to
/// `<out>.report.json`. The report is written on failure too.
pub fn reconstruct(cfg: &RunConfig) -> CliResult<(WeightedTopology, HgtStats)> {
    let params = cfg.params()?;
    let out = cfg.out()?;
    let d = read_matrix(cfg.input()?, cfg.m)?;
    let start = Instant::now();
    let result = fast_hgt(&d, params.delta_min());
    let seconds = start.elapsed().as_secs_f64();
    let mut report = json!({
        "command": "reconstruct",
        "config": cfg,
        "config_hash": cfg.hash("reconstruct"),
        "n": d.n(),
        "delta_min": params.delta_min(),
        "seconds": seconds,
    });
    match result {
        Ok(output) => {
            let topo = output.tree.to_topology(d.names());
            write_text(out, &(topo.to_newick() + "\n"))?;
            report["success"] = json!(true);
            report["stats"] = stats_json(&output.stats);
            write_json(&with_suffix(out, ".report.json"), &report)?;
            Ok((topo, output.stats))
        }
        Err(failure) => {
            report["success"] = json!(false);
            report["failure"] = json!({
                "line": failure.line.to_string(),
                "iteration": failure.iteration,
                "inserted": failure.inserted,
            });
            write_json(&with_suffix(out, ".report.json"), &report)?;
            Err(failure.into())
        }
    }
}

/// Result of comparing one tree with the truth.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Comparison {
    pub topology_matches: bool,
    pub rf_distance: usize,
    /// Largest edge length error; only defined when the topologies match.
    pub max_length_error: Option<f64>,
    pub bound: Option<f64>,
    pub within_bound: Option<bool>,
}

pub fn compare(estimate: &WeightedTopology, truth: &WeightedTopology, delta_min: Option<f64>) -> CliResult<Comparison> {
    let rf = rf_distance(estimate, truth)?;
    let err = if rf == 0 { Some(max_length_error(estimate, truth)?) } else { None };
    let bound = delta_min.map(|d| 2.0 * d);
    Ok(Comparison {
        topology_matches: rf == 0,
        rf_distance: rf,
        max_length_error: err,
        bound,
        within_bound: bound.map(|b| err.is_some_and(|e| e < b)),
    })
}

/// Compare mode: `--in` against `--truth`.
pub fn evaluate_pair(cfg: &RunConfig) -> CliResult<Comparison> {
    let estimate = read_topology(&read_text(cfg.input()?)?, cfg.m)?;
    let truth_path = cfg.truth.as_ref().ok_or_else(|| invalid("--truth is required with --in"))?;
    let truth = read_topology(&read_text(truth_path)?, cfg.m)?;
    let delta_min = match (cfg.delta_min, cfg.f) {
        (None, None) => None,
        _ => Some(cfg.params()?.delta_min()),
    };
    let cmp = compare(&estimate, &truth, delta_min)?;
    if let Some(out) = &cfg.out {
        let report = json!({
            "command": "evaluate",
            "config": cfg,
            "config_hash": cfg.hash("evaluate"),
            "comparison": cmp,
        });
        write_json(out, &report)?;
    }
    Ok(cmp)
}

/// How trials produce their matrices, after resolving `auto`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialInput {
    Exact,
    Sites(usize),
    Patterns(u64),
}

impl TrialInput {
    fn name(self) -> &'static str {
        match self {
            TrialInput::Exact => "exact",
            TrialInput::Sites(_) => "sites",
            TrialInput::Patterns(_) => "patterns",
        }
    }

    fn ell(self) -> u64 {
        match self {
            TrialInput::Exact => 0,
            TrialInput::Sites(ell) => ell as u64,
            TrialInput::Patterns(ell) => ell,
        }
    }
}

fn trial_input(cfg: &RunConfig, n: usize, model: &EvoModel, delta_min: f64) -> CliResult<TrialInput> {
    if cfg.exact {
        return Ok(TrialInput::Exact);
    }
    let ell = match (cfg.ell, cfg.delta) {
        (Some(ell), _) if ell >= 1 => ell,
        (Some(_), _) => return Err(invalid("--ell must be at least 1")),
        (None, Some(delta)) => {
            let d = cfg.depth.unwrap_or_else(|| depth_bound(n));
            sample_length(n, delta, model, d, delta_min)?.ell
        }
        (None, None) => return Err(invalid("need --ell, --delta or --exact")),
    };
    let patterns_fit = (cfg.m as f64).powi(n as i32) <= MAX_PATTERNS as f64;
    let sites_fit = (n as u128) * (ell as u128) <= MAX_SITE_BYTES;
    match cfg.sampler {
        Sampler::Patterns if !patterns_fit => Err(invalid("m^n is too large for the pattern sampler")),
        Sampler::Patterns => Ok(TrialInput::Patterns(ell)),
        Sampler::Auto if patterns_fit => Ok(TrialInput::Patterns(ell)),
        _ if !sites_fit => Err(invalid("n * ell is too large for the site sampler")),
        _ => Ok(TrialInput::Sites(ell_usize(ell)?)),
    }
}

fn run_trial(
    cfg: &RunConfig,
    n: usize,
    model: &EvoModel,
    delta_min: f64,
    input: TrialInput,
    trial: usize,
) -> CliResult<TrialRow> {
    let (tree_seed, sample_seed) = trial_seeds(cfg.seed, trial as u64);
    let tree = gen_tree(n, cfg.shape, model, EdgeProbSampler::default_for(model), tree_seed)?;
    let d = trial_matrix(&tree, input, sample_seed)?;
    let start = Instant::now();
    let result = fast_hgt(&d, delta_min);
    let seconds = start.elapsed().as_secs_f64();
    let mut row = TrialRow {
        trial,
        tree_seed,
        sample_seed,
        ell: input.ell(),
        recovered: false,
        topology_matches: false,
        rf_distance: None,
        max_length_error: None,
        failure: None,
        seconds,
    };
    match result {
        Ok(output) => {
            let cmp = compare(&output.tree.to_topology(tree.names()), &suppress_root(&tree), Some(delta_min))?;
            row.topology_matches = cmp.topology_matches;
            row.rf_distance = Some(cmp.rf_distance);
            row.max_length_error = cmp.max_length_error;
            row.recovered = cmp.topology_matches && cmp.within_bound == Some(true);
        }
        Err(failure) => row.failure = Some(failure.line.to_string()),
    }
    Ok(row)
}

pub fn trial_matrix(tree: &RootedEvoTree, input: TrialInput, seed: u64) -> CliResult<DistanceMatrix> {
    Ok(match input {
        TrialInput::Exact => exact_distance_matrix(tree),
        TrialInput::Sites(ell) => DistanceMatrix::from_sequences(&evolve_sequences(tree, ell, seed, None)?)?,
        TrialInput::Patterns(ell) => {
            DistanceMatrix::from_site_patterns(tree.names().to_vec(), &site_pattern_counts(tree, ell, seed)?)
        }
    })
}

/// Monte Carlo mode: fresh tree and data per trial. Writes the report to
/// `--out` and one JSON row per trial to `<out>.rows.ndjson`.
pub fn evaluate_trials(cfg: &RunConfig) -> CliResult<RunReport> {
    let n = cfg.n()?;
    let model = cfg.model()?;
    let delta_min = cfg.params()?.delta_min();
    let trials = cfg.trials.unwrap_or(DEFAULT_TRIALS);
    if trials == 0 {
        return Err(invalid("--trials must be at least 1"));
    }
    let input = trial_input(cfg, n, &model, delta_min)?;
    let rows = (0..trials)
        .into_par_iter()
        .map(|i| run_trial(cfg, n, &model, delta_min, input, i))
        .collect::<CliResult<Vec<_>>>()?;
    let report = RunReport {
        command: "evaluate".into(),
        config: serde_json::to_value(cfg).expect("config serializes"),
        config_hash: cfg.hash("evaluate"),
        delta_min,
        sampler: input.name().into(),
        aggregates: Aggregates::from_rows(&rows),
        rows,
    };
    if let Some(out) = &cfg.out {
        write_json(out, &report)?;
        let mut nd = String::new();
        for row in &report.rows {
            nd.push_str(&serde_json::to_string(row).expect("rows serialize"));
            nd.push('\n');
        }
        write_text(&with_suffix(out, ".rows.ndjson"), &nd)?;
    }
    Ok(report)
}

/// Times reconstruction on exact distances over a schedule of sizes.
pub fn bench(cfg: &RunConfig) -> CliResult<BenchReport> {
    let model = cfg.model()?;
    let delta_min = cfg.params()?.delta_min();
    let sizes = if cfg.sizes.is_empty() { DEFAULT_SIZES.to_vec() } else { cfg.sizes.clone() };
    if sizes.len() < 2 || sizes.iter().any(|&n| n < 3) {
        return Err(invalid("--sizes needs at least two sizes, each at least 3"));
    }
    let reps = cfg.trials.unwrap_or(3).max(1);
    let mut rows = vec![];
    for &n in &sizes {
        let (tree_seed, _) = trial_seeds(cfg.seed, n as u64);
        let tree = gen_tree(n, cfg.shape, &model, EdgeProbSampler::default_for(&model), tree_seed)?;
        let d = exact_distance_matrix(&tree);
        d.precompute_distances();
        let warm = fast_hgt(&d, delta_min)?.stats;
        let mut samples = Vec::with_capacity(reps);
        for _ in 0..reps {
            let start = Instant::now();
            let stats = fast_hgt(&d, delta_min)?.stats;
            samples.push(start.elapsed().as_secs_f64());
            debug_assert_eq!(stats, warm);
        }
        let mut sorted = samples.clone();
        sorted.sort_by(f64::total_cmp);
        rows.push(BenchRow {
            n,
            seconds: sorted[sorted.len() / 2],
            samples,
            split_edge_calls: warm.split_edge_calls,
            update_calls: warm.update_calls,
            peak_live_tuples: warm.peak_live_tuples,
            tree_nodes: warm.tree_nodes,
        });
    }
    let counts: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.split_edge_calls as f64)).collect();
    let times: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.seconds.max(1e-9))).collect();
    let report = BenchReport {
        config: serde_json::to_value(cfg).expect("config serializes"),
        config_hash: cfg.hash("bench"),
        count_slope: log_log_slope(&counts),
        time_slope: log_log_slope(&times),
        peak_within_n: rows.iter().all(|r| r.peak_live_tuples <= r.n),
        nodes_within_2n: rows.iter().all(|r| r.tree_nodes <= 2 * r.n),
        rows,
    };
    if let Some(out) = &cfg.out {
        write_json(out, &report)?;
    }
    Ok(report)
}

pub fn sample_size(cfg: &RunConfig) -> CliResult<SampleLength> {
    let n = cfg.n()?;
    let delta = cfg.delta.ok_or_else(|| invalid("--delta is required"))?;
    let model = cfg.model()?;
    let delta_min = cfg.params()?.delta_min();
    let d = cfg.depth.unwrap_or_else(|| depth_bound(n));
    Ok(sample_length(n, delta, &model, d, delta_min)?)
}

pub fn format_sample_size(s: &SampleLength) -> String {
    format!(
        "ell {}\nell_g {}\nell_c {}\nc_lg {}\nd {}\n",
        s.ell,
        fmt_real(s.ell_g),
        fmt_real(s.ell_c),
        fmt_real(s.c_lg),
        s.d
    )
}
