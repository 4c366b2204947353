//! Design laboratory for oblivious and semi-oblivious reconfigurable networks.
//!
//! * [`ff`]: prime fields, Vandermonde vectors and small linear algebra over `F_p`.
//! * [`schedule`]: the round-robin connection schedules and their time-expanded graphs.
//! * [`routing`]: pseudo-path routing, two-hop failover and exact per-edge loads.
//! * [`prob`]: negative association, Chernoff bounds and bilinear tail experiments.
//! * [`tradeoff`]: design parameters, tradeoff curves and dual throughput bounds.
//!
//! Loads are generic over [`scalar::LoadScalar`] and real-valued formulas over
//! [`scalar::Real`]; the aliases below fix the common choices.

pub mod ff;
pub mod perm;
pub mod prob;
pub mod rng;
pub mod routing;
pub mod scalar;
pub mod schedule;
pub mod tradeoff;

use num_rational::BigRational;

pub type ExactLoadMap = routing::LoadMap<BigRational>;
pub type FloatLoadMap = routing::LoadMap<f64>;
pub type ExactHopLoads = routing::HopLoads<BigRational>;
pub type BilinearSpec64 = prob::BilinearSpec<f64>;
pub type CurvePoint64 = tradeoff::CurvePoint<f64>;
