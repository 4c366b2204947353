use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::failover::failover_loads_for_starts;
use super::load::{oblivious_tally, HopLoads, LoadMap};
use super::{PermDemand, Rate, RoutingError};
use crate::scalar::big;
use crate::schedule::{PhysEdge, Schedule, ScheduleKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RoutingMode {
    GPlusOneHop,
    TwoHopFailover,
}

#[derive(Debug, Clone)]
pub struct RoutingDecision {
    pub mode: RoutingMode,
    pub load: LoadMap<BigRational>,
    /// Edges whose `(g+1)`-hop load exceeded 1.
    pub overloaded_edges: Vec<PhysEdge>,
}

/// Routes on `(g+1)`-hop pseudo-paths when that is feasible, otherwise falls back
/// to two-hop routing for the whole demand.
pub fn semi_oblivious_route(sched: &Schedule, demand: &PermDemand) -> Result<RoutingDecision, RoutingError> {
    if sched.kind() != ScheduleKind::Sorn {
        return Err(RoutingError::NotSorn);
    }
    demand.check(sched)?;
    let primary = super::induced_load_oblivious::<BigRational>(sched, demand);
    let overloaded = primary.overloaded();
    if overloaded.is_empty() {
        return Ok(RoutingDecision { mode: RoutingMode::GPlusOneHop, load: primary, overloaded_edges: overloaded });
    }
    let load = super::induced_load_failover(sched, demand)?;
    Ok(RoutingDecision { mode: RoutingMode::TwoHopFailover, load, overloaded_edges: overloaded })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Contention {
    pub constellations: Vec<usize>,
    pub k_max: u64,
    pub delta_prime: BigRational,
    pub threshold: BigRational,
    pub mixed_applicable: bool,
}

fn epsilon_for(g: usize, rate: &Rate) -> Option<BigRational> {
    rate.recip().map(|inv| BigRational::from_integer(BigInt::from(g + 2)) - big(&inv))
}

/// `(1 - eps) / (2(g+1))` with `eps = g + 2 - 1/r`.
fn delta_prime(g: usize, rate: &Rate) -> BigRational {
    match epsilon_for(g, rate) {
        Some(eps) => (BigRational::one() - eps) / BigRational::from_integer(BigInt::from(2 * (g + 1))),
        None => BigRational::zero(),
    }
}

/// Constellations containing an edge whose `(g+1)`-hop load exceeds
/// `(1 + delta') (g+1) r`, and the largest count the mixed scheme tolerates.
pub fn contentious_constellations(sched: &Schedule, demand: &PermDemand) -> Result<Contention, RoutingError> {
    if sched.kind() != ScheduleKind::Sorn {
        return Err(RoutingError::NotSorn);
    }
    demand.check(sched)?;
    let g = sched.g();
    let p = sched.p();
    let dp = delta_prime(g, &demand.rate);
    let r = big(demand.rate.value());
    let threshold = (BigRational::one() + &dp) * BigRational::from_integer(BigInt::from(g + 1)) * &r;
    let k_max = match epsilon_for(g, &demand.rate) {
        Some(eps) => {
            let num = (BigRational::one() - eps) * BigRational::from_integer(BigInt::from(p - 2).pow(g as u32));
            let q = num / BigRational::from_integer(BigInt::from(4 * (p - 1)));
            if q.is_negative() {
                0
            } else {
                q.to_integer().to_u64().unwrap_or(u64::MAX)
            }
        }
        None => 0,
    };
    let mut hit = vec![false; sched.constellation_count()];
    if !demand.rate.is_zero() {
        let load = super::induced_load_oblivious::<BigRational>(sched, demand);
        let len = sched.constellation_len() as usize;
        for (e, s) in load.iter() {
            if *s > threshold {
                hit[e.k / len] = true;
            }
        }
    }
    let constellations: Vec<usize> = (0..hit.len()).filter(|&f| hit[f]).collect();
    let mixed_applicable = constellations.len() as u64 <= k_max;
    Ok(Contention { constellations, k_max, delta_prime: dp, threshold, mixed_applicable })
}

/// Traffic whose departure constellation is contentious takes two hops; all other
/// traffic keeps its `(g+1)`-hop pseudo-paths.
pub fn mixed_route(
    sched: &Schedule,
    demand: &PermDemand,
    contentious: &[usize],
) -> Result<LoadMap<BigRational>, RoutingError> {
    if sched.kind() != ScheduleKind::Sorn {
        return Err(RoutingError::NotSorn);
    }
    demand.check(sched)?;
    let primary = oblivious_tally(sched, &demand.sigma, &|key| !contentious.contains(&key));
    let primary = HopLoads::<BigRational>::from_parts(
        sched.node_count(),
        sched.period(),
        sched.g() + 1,
        primary.finish(demand.rate.value()),
    )
    .total();
    if contentious.is_empty() {
        return Ok(primary);
    }
    let starts = sched.constellation_len() as u128 * contentious.len() as u128;
    let fallback = failover_loads_for_starts::<BigRational>(sched, demand, starts, demand.rate.value())?.total();
    Ok(primary.add(&fallback))
}

/// `(1 + delta') (g+1) r + 2 r k (p-1) / (p-2)^g`.
pub fn mixed_bound(sched: &Schedule, rate: &Rate, k: u64) -> BigRational {
    let g = sched.g();
    let p = sched.p();
    let r = big(rate.value());
    let base = (BigRational::one() + delta_prime(g, rate)) * BigRational::from_integer(BigInt::from(g + 1)) * &r;
    let spill = BigRational::new(BigInt::from(2 * k * (p - 1)), BigInt::from(p - 2).pow(g as u32)) * r;
    base + spill
}
