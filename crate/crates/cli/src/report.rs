use serde::{Deserialize, Serialize};

/// Outcome of one Monte Carlo trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: usize,
    pub tree_seed: u64,
    pub sample_seed: u64,
    pub ell: u64,
    /// Topology matches and every length error is below `2 delta_min`.
    pub recovered: bool,
    pub topology_matches: bool,
    pub rf_distance: Option<usize>,
    pub max_length_error: Option<f64>,
    /// Failure step label when reconstruction gave up.
    pub failure: Option<String>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub trials: usize,
    pub recovered: usize,
    pub failures: usize,
    pub rate: f64,
    /// 95% Wilson score interval for the recovery rate.
    pub band: [f64; 2],
    pub mean_seconds: f64,
}

impl Aggregates {
    pub fn from_rows(rows: &[TrialRow]) -> Self {
        let trials = rows.len();
        let recovered = rows.iter().filter(|r| r.recovered).count();
        let failures = rows.iter().filter(|r| r.failure.is_some()).count();
        let (lo, hi) = wilson(recovered, trials, 1.959_963_984_540_054);
        let total: f64 = rows.iter().map(|r| r.seconds).sum();
        Self {
            trials,
            recovered,
            failures,
            rate: if trials == 0 { 0.0 } else { recovered as f64 / trials as f64 },
            band: [lo, hi],
            mean_seconds: if trials == 0 { 0.0 } else { total / trials as f64 },
        }
    }
}

/// Wilson score interval for `k` successes in `n` trials at normal
/// quantile `z`. `(0, 1)` when `n = 0`.
pub fn wilson(k: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let center = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Monte Carlo evaluation report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub config: serde_json::Value,
    pub config_hash: String,
    pub delta_min: f64,
    pub sampler: String,
    pub rows: Vec<TrialRow>,
    pub aggregates: Aggregates,
}

impl RunReport {
    /// Whether the stored aggregates equal a recomputation from the rows.
    pub fn is_consistent(&self) -> bool {
        Aggregates::from_rows(&self.rows) == self.aggregates
    }
}

/// One size in a benchmark schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    /// Median over the timed repetitions; the warm-up run is not included.
    pub seconds: f64,
    pub samples: Vec<f64>,
    pub split_edge_calls: u64,
    pub update_calls: u64,
    pub peak_live_tuples: usize,
    pub tree_nodes: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: serde_json::Value,
    pub config_hash: String,
    pub rows: Vec<BenchRow>,
    pub count_slope: f64,
    pub time_slope: f64,
    pub peak_within_n: bool,
    pub nodes_within_2n: bool,
}

/// Least-squares slope of `ln y` on `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0.ln()).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1.ln()).sum::<f64>() / k;
    let num: f64 = points.iter().map(|&(x, y)| (x.ln() - mx) * (y.ln() - my)).sum();
    let den: f64 = points.iter().map(|&(x, _)| (x.ln() - mx).powi(2)).sum();
    num / den
}
