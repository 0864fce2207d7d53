//! Numerical evaluation of the Laplace transforms, coverage probability,
//! data rate and harvested data of the UAV harvesting network.

mod coverage;
pub mod jet;
mod laplace;

use thiserror::Error;

use crate::model::ConfigError;
use crate::quadrature::QuadratureError;

pub use coverage::{
    conditional_coverage, conditional_rate, coverage_integral, coverage_probability,
    coverage_probability_2d, harvested_data, mean_rate, mean_rate_2d, AnalyticOptions,
    AnalyticValue, CoverageIntegral,
};
pub use jet::MAX_ORDER;
pub use laplace::{LaplaceEvaluator, LaplaceValue, ProductTruncation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("derivative order {order} exceeds the supported maximum {cap}")]
    UnsupportedOrder { order: usize, cap: usize },
    #[error("{0}")]
    InvalidArgument(String),
}

fn require_center(eval: &LaplaceEvaluator, excluded: bool, op: &str) -> Result<(), AnalyticError> {
    if eval.exclude_center == excluded {
        Ok(())
    } else {
        Err(AnalyticError::InvalidArgument(format!(
            "{op} needs an evaluator with exclude_center = {excluded}"
        )))
    }
}

/// Laplace transform of the full shot-noise (all windows).
pub fn laplace_shot_noise(eval: &LaplaceEvaluator, s: f64) -> Result<LaplaceValue, AnalyticError> {
    require_center(eval, false, "laplace_shot_noise")?;
    value_with_noise(eval, s, 0.0)
}

/// Laplace transform of the interference (own window removed).
pub fn laplace_interference(eval: &LaplaceEvaluator, s: f64) -> Result<LaplaceValue, AnalyticError> {
    require_center(eval, true, "laplace_interference")?;
    value_with_noise(eval, s, 0.0)
}

/// `e^{-s N0}` times the evaluator's transform.
pub fn laplace_interference_plus_noise(
    eval: &LaplaceEvaluator,
    s: f64,
    noise: f64,
) -> Result<LaplaceValue, AnalyticError> {
    if !(noise >= 0.0) {
        return Err(AnalyticError::InvalidArgument(format!(
            "noise must be >= 0, got {noise}"
        )));
    }
    value_with_noise(eval, s, noise)
}

fn value_with_noise(eval: &LaplaceEvaluator, s: f64, noise: f64) -> Result<LaplaceValue, AnalyticError> {
    let (jet, mut out) = eval.jet_with_noise(s, 1, noise)?;
    out.value = jet.value();
    Ok(out)
}

/// `sum_{i<m} (-s)^i / i! * d^i/ds^i L(s)` for the evaluator's transform.
pub fn laplace_derivative_sum(
    eval: &LaplaceEvaluator,
    s: f64,
    m: usize,
) -> Result<LaplaceValue, AnalyticError> {
    eval.derivative_sum(s, m)
}
