//! Run parameters, analysis thresholds and the sample-size calculator.

use crate::error::{invalid, Result};
use crate::evolve::EvoModel;

/// Smallest edge length the model allows: `-ln(1 - alpha f)`.
pub fn min_edge_length(model: &EvoModel) -> f64 {
    -(1.0 - model.alpha() * model.f()).ln()
}

/// `delta_min` for a given `c`: `c * -ln(1 - alpha f)`.
pub fn delta_min_for(model: &EvoModel, c: f64) -> f64 {
    c * min_edge_length(model)
}

/// The separation threshold `delta_min`, plus the model when known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HgtParams {
    delta_min: f64,
    model: Option<EvoModel>,
}

impl HgtParams {
    pub const DEFAULT_C: f64 = 0.25;

    /// Bare threshold, no model knowledge.
    pub fn new(delta_min: f64) -> Result<Self> {
        if !(delta_min > 0.0 && delta_min.is_finite()) {
            return Err(invalid(format!("delta_min must be positive, got {delta_min}")));
        }
        Ok(Self { delta_min, model: None })
    }

    /// Threshold from the model and `c`, which must lie in `(0, 1/2)`.
    pub fn from_model(model: EvoModel, c: f64) -> Result<Self> {
        if !(c > 0.0 && c < 0.5) {
            return Err(invalid(format!("c must be in (0, 1/2), got {c}")));
        }
        Ok(Self { delta_min: delta_min_for(&model, c), model: Some(model) })
    }

    /// Explicit threshold checked against the model's admissible interval.
    pub fn with_model(model: EvoModel, delta_min: f64) -> Result<Self> {
        let upper = min_edge_length(&model) / 2.0;
        if !(delta_min > 0.0 && delta_min < upper) {
            return Err(invalid(format!("delta_min must be in (0, {upper}), got {delta_min}")));
        }
        Ok(Self { delta_min, model: Some(model) })
    }

    pub fn delta_min(&self) -> f64 {
        self.delta_min
    }

    pub fn model(&self) -> Option<&EvoModel> {
        self.model.as_ref()
    }

    /// `delta_min / -ln(1 - alpha f)` when the model is known.
    pub fn c(&self) -> Option<f64> {
        self.model.map(|m| self.delta_min / min_edge_length(&m))
    }
}

/// Closeness levels separating large triplets from small ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub c_lg: f64,
    pub c_sm: f64,
    pub c_md: f64,
}

/// `c_lg = (3 sqrt2 / 2) ((sqrt2 - 1)/(sqrt2 + 1))^2 (1 - alpha g)^(2d + 4)`,
/// `c_sm = c_lg / sqrt2`, `c_md` their midpoint.
pub fn thresholds(m: usize, g: f64, d: usize) -> Result<Thresholds> {
    if m < 2 {
        return Err(invalid("alphabet size must be at least 2"));
    }
    let alpha = m as f64 / (m as f64 - 1.0);
    if !(g >= 0.0 && alpha * g < 1.0) {
        return Err(invalid(format!("need 0 <= alpha g < 1, got alpha g = {}", alpha * g)));
    }
    if d < 1 {
        return Err(invalid("g-depth must be at least 1"));
    }
    let r2 = std::f64::consts::SQRT_2;
    let ratio = (r2 - 1.0) / (r2 + 1.0);
    let c_lg = 1.5 * r2 * ratio * ratio * (1.0 - alpha * g).powi(2 * d as i32 + 4);
    let c_sm = c_lg / r2;
    Ok(Thresholds { c_lg, c_sm, c_md: (c_lg + c_sm) / 2.0 })
}

/// The two candidate lengths and the one chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleLength {
    pub ell: u64,
    pub ell_g: f64,
    pub ell_c: f64,
    pub c_lg: f64,
    pub c: f64,
    pub d: usize,
}

/// Sequence length sufficient for recovery with probability `1 - delta`:
/// `ceil(max(ell_g, ell_c))` with
/// `ell_g = 210 alpha^2 (3 ln n + ln(3/delta)) / c_lg^2` and
/// `ell_c = 81 (3 ln n + ln(7/delta)) / (c_lg^2 f^2 c^2)`.
pub fn sample_length(
    n: usize,
    delta: f64,
    model: &EvoModel,
    d: usize,
    delta_min: f64,
) -> Result<SampleLength> {
    if n < 3 {
        return Err(invalid("need at least 3 leaves"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("delta must be in (0, 1), got {delta}")));
    }
    let params = HgtParams::with_model(*model, delta_min)?;
    let c = params.c().expect("model given");
    let c_lg = thresholds(model.m(), model.g(), d)?.c_lg;
    let alpha = model.alpha();
    let ln_n = (n as f64).ln();
    let ell_g = 210.0 * alpha * alpha * (3.0 * ln_n + (3.0 / delta).ln()) / (c_lg * c_lg);
    let f = model.f();
    let ell_c = 81.0 * (3.0 * ln_n + (7.0 / delta).ln()) / (c_lg * c_lg * f * f * c * c);
    let ell = ell_g.max(ell_c).ceil();
    if ell > u64::MAX as f64 {
        return Err(invalid("sample length overflows"));
    }
    Ok(SampleLength { ell: ell as u64, ell_g, ell_c, c_lg, c, d })
}

fn choose3(n: usize) -> f64 {
    let n = n as f64;
    n * (n - 1.0) * (n - 2.0) / 6.0
}

/// Union bounds on the failure of the center-accuracy event and the
/// greedy-ordering event at length `ell`: `(center, greedy)`.
pub fn event_bounds(n: usize, ell: f64, model: &EvoModel, d: usize, c: f64) -> Result<(f64, f64)> {
    let c_lg = thresholds(model.m(), model.g(), d)?.c_lg;
    let center = 3.0 * choose3(n) * crate::distmat::center_error_tail(ell, c, c_lg, model.f());
    let greedy = choose3(n) * crate::distmat::greedy_tail(ell, c_lg, model.alpha());
    Ok((center, greedy))
}
