//! Pseudo-path routing, the two-hop failover scheme and exact edge loads.

mod failover;
mod load;
mod pseudopath;
mod semi;

pub use failover::{
    direct_connections, failover_hop_loads, failover_paths, failover_route, induced_load_failover, scaled_hop,
    valid_intermediates, FailoverChoice,
};
pub use load::{
    hop_flow_decomposition, hop_loads_oblivious, induced_load_oblivious, max_feasible_rate, path_weight_hops, HopLoads,
    LoadMap, LoadRecord,
};
pub use pseudopath::{
    departure, enumerate_pseudopaths, max_latency, pseudopath_count_rho, template, window_keys, Hop, PseudoPath,
    RhoQuery, RoutePath, TemplatePath, Window,
};
pub use semi::{
    contentious_constellations, mixed_bound, mixed_route, semi_oblivious_route, Contention, RoutingDecision,
    RoutingMode,
};

use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::perm::Permutation;
use crate::schedule::{Schedule, ScheduleError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RoutingError {
    #[error("invalid rate {0}: must be a rational in [0, 1/2]")]
    InvalidRate(String),
    #[error("no intermediate node for {a} -> {b}: p is too small")]
    NoIntermediate { a: usize, b: usize },
    #[error("demand covers {got} nodes, schedule has {expected}")]
    DemandSize { expected: usize, got: usize },
    #[error("operation requires a SORN schedule")]
    NotSorn,
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

/// Exact injection rate per source per timestep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Rate(Rational64);

impl Rate {
    pub fn new(num: i64, den: i64) -> Result<Self, RoutingError> {
        if den == 0 {
            return Err(RoutingError::InvalidRate(format!("{num}/{den}")));
        }
        Self::from_ratio(Rational64::new(num, den))
    }

    pub fn from_ratio(r: Rational64) -> Result<Self, RoutingError> {
        if r < Rational64::zero() || r > Rational64::new(1, 2) {
            return Err(RoutingError::InvalidRate(r.to_string()));
        }
        Ok(Self(r))
    }

    pub fn zero() -> Self {
        Self(Rational64::zero())
    }

    pub fn half() -> Self {
        Self(Rational64::new(1, 2))
    }

    pub fn value(&self) -> &Rational64 {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// `1/r`, if non-zero.
    pub fn recip(&self) -> Option<Rational64> {
        (!self.0.is_zero()).then(|| Rational64::one() / self.0)
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Rate {
    type Err = RoutingError;
    fn from_str(s: &str) -> Result<Self, RoutingError> {
        let bad = || RoutingError::InvalidRate(s.to_string());
        let (num, den) = match s.trim().split_once('/') {
            Some((n, d)) => (n.trim().parse().map_err(|_| bad())?, d.trim().parse().map_err(|_| bad())?),
            None => (s.trim().parse().map_err(|_| bad())?, 1),
        };
        Rate::new(num, den)
    }
}

impl TryFrom<String> for Rate {
    type Error = RoutingError;
    fn try_from(s: String) -> Result<Self, RoutingError> {
        s.parse()
    }
}

impl From<Rate> for String {
    fn from(r: Rate) -> String {
        r.to_string()
    }
}

/// Every source `a` sends `rate` per timestep to `sigma(a)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermDemand {
    pub sigma: Permutation,
    pub rate: Rate,
}

impl PermDemand {
    pub fn new(sigma: Permutation, rate: Rate) -> Self {
        Self { sigma, rate }
    }

    pub fn check(&self, sched: &Schedule) -> Result<(), RoutingError> {
        if self.sigma.len() != sched.node_count() {
            return Err(RoutingError::DemandSize { expected: sched.node_count(), got: self.sigma.len() });
        }
        Ok(())
    }
}
