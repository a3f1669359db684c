//! Tail-bound formulas for closeness and center estimates.
//!
//! These are analytic upper bounds used to check simulations against; the
//! reconstruction itself never evaluates them.

/// Sample length, relative error, true closeness and `alpha = m/(m-1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBoundParams {
    pub ell: f64,
    pub epsilon: f64,
    pub closeness: f64,
    pub alpha: f64,
}

/// Bound on `P(c_hat / c <= 1 - eps)` (and on `>= 1 + eps`) for one leaf
/// pair: `exp(-(2 / alpha^2) ell c^2 eps^2)`.
pub fn hoeffding_pair_tail(p: &TailBoundParams) -> f64 {
    (-(2.0 / (p.alpha * p.alpha)) * p.ell * p.closeness.powi(2) * p.epsilon.powi(2)).exp()
}

/// Bound on `P(d_hat_XP - d_XP >= -ln(1 - eps) / 2)` for the center P of a
/// triplet of closeness `c_xyz`. Not capped at 1.
pub fn center_tail(ell: f64, c_xyz: f64, epsilon: f64, alpha: f64) -> f64 {
    3.0 * (-(2.0 / (9.0 * alpha * alpha)) * ell * c_xyz * c_xyz * epsilon * epsilon).exp()
}

/// Bound on a large triplet's estimate falling to the midpoint threshold
/// (and on a small one rising to it).
pub fn greedy_tail(ell: f64, c_lg: f64, alpha: f64) -> f64 {
    let s = std::f64::consts::SQRT_2 - 1.0;
    (-(s * s) / (36.0 * alpha * alpha) * ell * c_lg * c_lg).exp()
}

/// Bound on `P(|d_hat_XP - d_XP| >= delta_min / 2)` for a triplet that is
/// not small; `c = delta_min / -ln(1 - alpha f)`.
pub fn center_error_tail(ell: f64, c: f64, c_lg: f64, f: f64) -> f64 {
    7.0 * (-(c * c) / 81.0 * ell * c_lg * c_lg * f * f).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(ell: f64, epsilon: f64) -> TailBoundParams {
        TailBoundParams { ell, epsilon, closeness: 0.5, alpha: 4.0 / 3.0 }
    }

    #[test]
    fn hoeffding_examples() {
        assert_eq!(hoeffding_pair_tail(&params(1e4, 0.0)), 1.0);
        let b = hoeffding_pair_tail(&params(1e4, 0.1));
        assert!((b.ln() + 28.125).abs() < 1e-9, "{}", b.ln());
        let doubled = hoeffding_pair_tail(&params(2e4, 0.1));
        assert!((doubled - b * b).abs() <= 1e-12 * doubled);
    }

    #[test]
    fn center_examples() {
        let alpha = 4.0 / 3.0;
        assert_eq!(center_tail(1e4, 0.5, 0.0, alpha), 3.0);
        let b = center_tail(1e4, 0.5, 0.1, alpha);
        assert!(((b / 3.0).ln() + 28.125 / 9.0).abs() < 1e-9);
        let mut prev = f64::INFINITY;
        for ell in [10.0, 100.0, 1e3, 1e4] {
            let v = center_tail(ell, 0.5, 0.1, alpha);
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn remaining_bounds_decrease_in_ell() {
        assert!(greedy_tail(1e6, 0.03, 4.0 / 3.0) < greedy_tail(1e5, 0.03, 4.0 / 3.0));
        assert!(center_error_tail(1e9, 0.25, 0.03, 0.05) < center_error_tail(1e8, 0.25, 0.03, 0.05));
        assert_eq!(center_error_tail(0.0, 0.25, 0.03, 0.05), 7.0);
    }
}
