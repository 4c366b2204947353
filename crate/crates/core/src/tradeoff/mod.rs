//! Design parameters, latency/throughput tradeoff curves, the counting bound and
//! LP-dual throughput bounds.

mod curves;
mod dual;
mod params;

pub use curves::{curve, curve_sweep, sweep_csv, Curve, CurvePoint, CURVE_CSV_HEADER};
pub use dual::{
    counting_bound, dual_throughput_bound, expected_dual_bound, maxlat_lowerbound, CountingBound, DualEstimate,
    EdgeReach,
};
pub use params::{assess_params, derive_params, DesignParams, Hypothesis, Inequality};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("1/r is an integer, so eps = 1")]
    EpsilonOne,
    #[error("rate must lie in (0, 1/2]")]
    InvalidRate,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("p = {p} violates {}", .violated.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", "))]
    PrimeTooSmall { p: u64, violated: Vec<Inequality> },
    #[error("N must exceed 1")]
    SizeTooSmall,
}
