use std::path::PathBuf;

use clap::{Args, ValueEnum};
use hgt_core::evolve::{EvoModel, TreeShape};
use hgt_core::hgt::HgtParams;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{invalid, CliResult};

/// How Monte Carlo trials turn a tree into a distance matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampler {
    /// Evolve every site and count matches.
    Sites,
    /// Draw site-pattern counts from their multinomial; same distribution,
    /// cost independent of the sequence length. Needs m^n <= 2^22.
    Patterns,
    /// Patterns when they fit, else sites.
    Auto,
}

fn shape_name<S: serde::Serializer>(shape: &TreeShape, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(shape)
}

/// Every flag any subcommand understands; each command reads what it
/// needs and validates it.
#[derive(Debug, Clone, Args, Serialize)]
pub struct RunConfig {
    /// Number of leaves.
    #[arg(long)]
    pub n: Option<usize>,
    /// Alphabet size.
    #[arg(long, default_value_t = 4)]
    pub m: usize,
    /// Smallest edge mutation probability.
    #[arg(long)]
    pub f: Option<f64>,
    /// Largest edge mutation probability.
    #[arg(long)]
    pub g: Option<f64>,
    /// Sequence length.
    #[arg(long)]
    pub ell: Option<u64>,
    /// Allowed failure probability, for choosing the sequence length.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Center separation threshold.
    #[arg(long)]
    pub delta_min: Option<f64>,
    /// Threshold as a fraction of the shortest edge length (default 0.25).
    #[arg(long)]
    pub c: Option<f64>,
    /// g-depth used by the sample-size bound (default: the worst case for n).
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long, default_value = "uniform")]
    #[serde(serialize_with = "shape_name")]
    pub shape: TreeShape,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Monte Carlo trials, or timed repetitions per size for bench.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Ground-truth tree for evaluate.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Use exact tree distances instead of sequences.
    #[arg(long)]
    pub exact: bool,
    #[arg(long, value_enum, default_value_t = Sampler::Auto)]
    pub sampler: Sampler,
    /// Comma-separated leaf counts for bench.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: None,
            m: 4,
            f: None,
            g: None,
            ell: None,
            delta: None,
            delta_min: None,
            c: None,
            depth: None,
            shape: TreeShape::Uniform,
            seed: 1,
            trials: None,
            input: None,
            truth: None,
            out: None,
            exact: false,
            sampler: Sampler::Auto,
            sizes: vec![],
        }
    }
}

impl RunConfig {
    /// Hex SHA-256 of the command name and the config as JSON.
    pub fn hash(&self, command: &str) -> String {
        let body = serde_json::json!({ "command": command, "config": self });
        hex::encode(Sha256::digest(body.to_string().as_bytes()))
    }

    pub fn n(&self) -> CliResult<usize> {
        match self.n {
            Some(n) if n >= 3 => Ok(n),
            Some(n) => Err(invalid(format!("--n must be at least 3, got {n}"))),
            None => Err(invalid("--n is required")),
        }
    }

    /// The full model; `--f` and `--g` are both required.
    pub fn model(&self) -> CliResult<EvoModel> {
        let (Some(f), Some(g)) = (self.f, self.g) else {
            return Err(invalid("--f and --g are required"));
        };
        Ok(EvoModel::new(self.m, f, g)?)
    }

    /// The threshold: `--delta-min` if given (checked against the model
    /// when `--f` is known), else derived from `--f` and `--c`.
    pub fn params(&self) -> CliResult<HgtParams> {
        let model = match self.f {
            Some(f) => Some(EvoModel::new(self.m, f, self.g.unwrap_or(f))?),
            None => None,
        };
        let p = match (self.delta_min, model) {
            (Some(dm), Some(model)) => {
                if self.c.is_some() {
                    return Err(invalid("give --delta-min or --c, not both"));
                }
                HgtParams::with_model(model, dm)?
            }
            (Some(dm), None) => HgtParams::new(dm)?,
            (None, Some(model)) => {
                HgtParams::from_model(model, self.c.unwrap_or(HgtParams::DEFAULT_C))?
            }
            (None, None) => return Err(invalid("need --delta-min, or --f to derive it")),
        };
        Ok(p)
    }

    pub fn out(&self) -> CliResult<&PathBuf> {
        self.out.as_ref().ok_or_else(|| invalid("--out is required"))
    }

    pub fn input(&self) -> CliResult<&PathBuf> {
        self.input.as_ref().ok_or_else(|| invalid("--in is required"))
    }
}

/// `path` with `suffix` appended to its file name.
pub fn with_suffix(path: &std::path::Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}
