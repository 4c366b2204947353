use std::collections::BTreeMap;

use num_rational::Rational64;
use rayon::prelude::*;

use super::load::{HopLoads, LoadMap, Tally};
use super::pseudopath::RoutePath;
use super::{PermDemand, RoutingError};
use crate::ff::NodeVec;
use crate::scalar::LoadScalar;
use crate::schedule::{Schedule, ScheduleKind, Timestep};

/// One equally likely two-hop route: `a -> intermediate -> b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FailoverChoice {
    pub intermediate: usize,
    pub first: Timestep,
    pub second: Timestep,
}

/// Nodes `b'` such that `b' - a` and `b - b'` have only non-zero coordinates.
pub fn valid_intermediates(sched: &Schedule, a: usize, b: usize) -> Vec<usize> {
    let va = sched.node_vec(a);
    let vb = sched.node_vec(b);
    (0..sched.node_count())
        .filter(|&m| {
            let vm = sched.node_vec(m);
            vm.sub(&va).all_nonzero() && vb.sub(&vm).all_nonzero()
        })
        .collect()
}

/// The unique `(A_f, s)` with `d = s A_f v_phase`, as a timestep; `None` when `d`
/// has a zero coordinate.
pub fn scaled_hop(sched: &Schedule, d: &NodeVec, phase: usize) -> Option<Timestep> {
    if !d.all_nonzero() {
        return None;
    }
    let field = sched.field();
    let p = sched.p();
    // family[0] is the identity, so this is the untwisted v_phase
    let v = sched.phase_vector(0, phase);
    let s = field.mul(d.coords()[0], field.inv(v.coords()[0])?);
    let mut f = 0usize;
    for i in 1..sched.g() {
        let entry = field.mul(d.coords()[i], field.inv(field.mul(s, v.coords()[i]))?);
        f = f * (p as usize - 1) + (entry as usize - 1);
    }
    debug_assert_eq!(sched.phase_vector(f, phase).scale(s), *d);
    Some(Timestep { constellation: f, phase, shift: s })
}

fn require_sorn(sched: &Schedule) -> Result<(), RoutingError> {
    match sched.kind() {
        ScheduleKind::Sorn => Ok(()),
        ScheduleKind::Orn => Err(RoutingError::NotSorn),
    }
}

/// The uniform two-hop distribution for `a -> b`.
pub fn failover_paths(sched: &Schedule, a: usize, b: usize) -> Result<Vec<FailoverChoice>, RoutingError> {
    require_sorn(sched)?;
    let mids = valid_intermediates(sched, a, b);
    if mids.is_empty() {
        return Err(RoutingError::NoIntermediate { a, b });
    }
    let va = sched.node_vec(a);
    let vb = sched.node_vec(b);
    let phases = sched.phase_count();
    let mut out = Vec::with_capacity(mids.len() * phases * phases);
    for m in mids {
        let vm = sched.node_vec(m);
        let (d1, d2) = (vm.sub(&va), vb.sub(&vm));
        for x1 in 0..phases {
            let first = scaled_hop(sched, &d1, x1).expect("all-nonzero difference");
            for x2 in 0..phases {
                let second = scaled_hop(sched, &d2, x2).expect("all-nonzero difference");
                out.push(FailoverChoice { intermediate: m, first, second });
            }
        }
    }
    Ok(out)
}

/// Realizes a choice for traffic injected at `t`: wait for the next constellation
/// boundary `t0`, hop once in `[t0, t0+T)` and once in `[t0+T, t0+2T)`.
pub fn failover_route(sched: &Schedule, a: usize, choice: &FailoverChoice, t: u64) -> RoutePath {
    let period = sched.period();
    let t0 = t.div_ceil(sched.constellation_len()) * sched.constellation_len();
    let at_or_after = |from: u64, k: u64| from + (k + period - from % period) % period;
    let k1 = at_or_after(t0, sched.compose(choice.first).expect("valid timestep"));
    let k2 = at_or_after(t0 + period, sched.compose(choice.second).expect("valid timestep"));
    let mut nodes = vec![a; (k1 - t + 1) as usize];
    let mid = sched.permute(k1, a);
    debug_assert_eq!(mid, choice.intermediate);
    nodes.extend(std::iter::repeat(mid).take((k2 - k1) as usize));
    nodes.push(sched.permute(k2, mid));
    RoutePath { start: t, nodes }
}

/// Number of timesteps per period at which `a` is directly connected to `b`.
pub fn direct_connections(sched: &Schedule, a: usize, b: usize) -> usize {
    (0..sched.period()).filter(|&k| sched.permute(k, a) == b).count()
}

/// Unit-rate tally of two-hop routing for traffic departing in the windows with
/// the given keys (`starts` injection times per key).
pub(crate) fn failover_tally(
    sched: &Schedule,
    demand: &PermDemand,
    starts: u128,
) -> Result<Tally, RoutingError> {
    require_sorn(sched)?;
    demand.check(sched)?;
    let n = sched.node_count();
    let period = sched.period();
    let phases = sched.phase_count();
    let per_node: Vec<(usize, Vec<usize>)> = (0..n)
        .into_par_iter()
        .map(|a| {
            let b = demand.sigma.apply(a);
            (b, valid_intermediates(sched, a, b))
        })
        .collect();
    if let Some(a) = per_node.iter().position(|(_, m)| m.is_empty()) {
        return Err(RoutingError::NoIntermediate { a, b: per_node[a].0 });
    }
    let mut dens: Vec<u128> = per_node.iter().map(|(_, m)| (m.len() * phases) as u128).collect();
    dens.sort_unstable();
    dens.dedup();
    let den_index: BTreeMap<u128, usize> = dens.iter().enumerate().map(|(i, &d)| (d, i)).collect();
    let slots = n * period as usize * 2;
    Ok((0..n)
        .into_par_iter()
        .fold(
            || Tally::new(slots, dens.clone()),
            |mut tally, a| {
                let (b, mids) = &per_node[a];
                let den = den_index[&((mids.len() * phases) as u128)];
                let va = sched.node_vec(a);
                let vb = sched.node_vec(*b);
                for &m in mids {
                    let vm = sched.node_vec(m);
                    for x in 0..phases {
                        let k1 = sched.compose(scaled_hop(sched, &vm.sub(&va), x).expect("valid")).expect("in period");
                        tally.add((k1 as usize * n + a) * 2, den, starts);
                        let k2 = sched.compose(scaled_hop(sched, &vb.sub(&vm), x).expect("valid")).expect("in period");
                        tally.add((k2 as usize * n + m) * 2 + 1, den, starts);
                    }
                }
                tally
            },
        )
        .reduce(|| Tally::new(slots, dens.clone()), Tally::merge))
}

/// Exact first-hop and second-hop loads of the failover scheme.
pub fn failover_hop_loads<S: LoadScalar>(sched: &Schedule, demand: &PermDemand) -> Result<HopLoads<S>, RoutingError> {
    let tally = failover_tally(sched, demand, sched.period() as u128)?;
    Ok(HopLoads::from_parts(sched.node_count(), sched.period(), 2, tally.finish(demand.rate.value())))
}

pub fn induced_load_failover<S: LoadScalar>(sched: &Schedule, demand: &PermDemand) -> Result<LoadMap<S>, RoutingError> {
    Ok(failover_hop_loads(sched, demand)?.total())
}

pub(crate) fn failover_loads_for_starts<S: LoadScalar>(
    sched: &Schedule,
    demand: &PermDemand,
    starts: u128,
    rate: &Rational64,
) -> Result<HopLoads<S>, RoutingError> {
    let tally = failover_tally(sched, demand, starts)?;
    Ok(HopLoads::from_parts(sched.node_count(), sched.period(), 2, tally.finish(rate)))
}
