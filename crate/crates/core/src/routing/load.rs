use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::pseudopath::{template, window_for_key, window_keys, TemplatePath};
use super::PermDemand;
use crate::ff::NodeVec;
use crate::perm::Permutation;
use crate::scalar::LoadScalar;
use crate::schedule::{PhysEdge, Schedule};

/// Flow per period on every physical edge class `(tail, k mod T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadMap<S> {
    nodes: usize,
    period: u64,
    loads: Vec<S>,
}

impl<S: LoadScalar> LoadMap<S> {
    pub fn zeros(nodes: usize, period: u64) -> Self {
        Self { nodes, period, loads: vec![S::zero(); nodes * period as usize] }
    }

    pub(crate) fn from_vec(nodes: usize, period: u64, loads: Vec<S>) -> Self {
        debug_assert_eq!(loads.len(), nodes * period as usize);
        Self { nodes, period, loads }
    }

    fn slot(&self, e: PhysEdge) -> usize {
        e.k * self.nodes + e.tail
    }

    pub fn get(&self, e: PhysEdge) -> &S {
        &self.loads[self.slot(e)]
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn iter(&self) -> impl Iterator<Item = (PhysEdge, &S)> + '_ {
        let n = self.nodes;
        self.loads.iter().enumerate().map(move |(i, s)| (PhysEdge { tail: i % n, k: i / n }, s))
    }

    pub fn total(&self) -> S {
        self.loads.iter().cloned().fold(S::zero(), |a, b| a + b)
    }

    /// Largest load and an edge attaining it (the first in `(k, tail)` order).
    pub fn max_load(&self) -> Option<(PhysEdge, S)> {
        let mut best: Option<(PhysEdge, &S)> = None;
        for (e, s) in self.iter() {
            if best.map_or(true, |(_, b)| s > b) {
                best = Some((e, s));
            }
        }
        best.map(|(e, s)| (e, s.clone()))
    }

    /// Every load is at most 1.
    pub fn is_feasible(&self) -> bool {
        let one = S::one();
        self.loads.iter().all(|s| *s <= one)
    }

    pub fn overloaded(&self) -> Vec<PhysEdge> {
        let one = S::one();
        self.iter().filter(|(_, s)| **s > one).map(|(e, _)| e).collect()
    }

    pub fn add(&self, other: &LoadMap<S>) -> LoadMap<S> {
        debug_assert_eq!((self.nodes, self.period), (other.nodes, other.period));
        let loads = self.loads.iter().zip(&other.loads).map(|(a, b)| a.clone() + b.clone()).collect();
        LoadMap { nodes: self.nodes, period: self.period, loads }
    }

    pub fn map<T: LoadScalar>(&self, f: impl Fn(&S) -> T) -> LoadMap<T> {
        LoadMap { nodes: self.nodes, period: self.period, loads: self.loads.iter().map(f).collect() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LoadRecord {
    pub tail_index: usize,
    pub timestep_k: usize,
    pub head_index: usize,
    pub load_num: String,
    pub load_den: String,
}

impl LoadMap<BigRational> {
    pub fn records(&self, sched: &Schedule) -> Vec<LoadRecord> {
        self.iter()
            .map(|(e, s)| LoadRecord {
                tail_index: e.tail,
                timestep_k: e.k,
                head_index: e.head(sched),
                load_num: s.numer().to_string(),
                load_den: s.denom().to_string(),
            })
            .collect()
    }

    /// CSV with columns `tail_index,timestep_k,head_index,load_num,load_den`, rows in `(k, tail)` order.
    pub fn to_csv(&self, sched: &Schedule) -> String {
        let mut out = String::from("tail_index,timestep_k,head_index,load_num,load_den\n");
        for r in self.records(sched) {
            writeln!(out, "{},{},{},{},{}", r.tail_index, r.timestep_k, r.head_index, r.load_num, r.load_den)
                .expect("writing to a String");
        }
        out
    }
}

/// Loads split by hop position within the path.
#[derive(Debug, Clone, PartialEq)]
pub struct HopLoads<S> {
    nodes: usize,
    period: u64,
    hops: usize,
    values: Vec<S>,
}

impl<S: LoadScalar> HopLoads<S> {
    pub(crate) fn from_parts(nodes: usize, period: u64, hops: usize, values: Vec<S>) -> Self {
        debug_assert_eq!(values.len(), nodes * period as usize * hops);
        Self { nodes, period, hops, values }
    }

    pub fn hop_count(&self) -> usize {
        self.hops
    }

    /// Entry `q` is the flow on `e` contributed by hop `q` of its paths.
    pub fn hop_flow(&self, e: PhysEdge) -> &[S] {
        let base = (e.k * self.nodes + e.tail) * self.hops;
        &self.values[base..base + self.hops]
    }

    pub fn hop(&self, q: usize) -> LoadMap<S> {
        let loads = self.values.iter().skip(q).step_by(self.hops).cloned().collect();
        LoadMap::from_vec(self.nodes, self.period, loads)
    }

    pub fn total(&self) -> LoadMap<S> {
        let loads = self.values.chunks(self.hops).map(|c| c.iter().cloned().fold(S::zero(), |a, b| a + b)).collect();
        LoadMap::from_vec(self.nodes, self.period, loads)
    }
}

/// Integer flow counts over a fixed set of denominators; the exact load of a
/// slot is `rate * sum_d cells[slot][d] / dens[d]`.
#[derive(Debug, Clone)]
pub(crate) struct Tally {
    slots: usize,
    dens: Vec<u128>,
    cells: Vec<u128>,
}

impl Tally {
    pub(crate) fn new(slots: usize, dens: Vec<u128>) -> Self {
        let cells = vec![0; slots * dens.len()];
        Self { slots, dens, cells }
    }

    #[inline]
    pub(crate) fn add(&mut self, slot: usize, den: usize, amount: u128) {
        let w = self.dens.len();
        self.cells[slot * w + den] += amount;
    }

    pub(crate) fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.cells.iter_mut().zip(other.cells) {
            *a += b;
        }
        self
    }

    pub(crate) fn finish<S: LoadScalar>(&self, rate: &Rational64) -> Vec<S> {
        let w = self.dens.len();
        if w == 0 {
            return vec![S::zero(); self.slots];
        }
        let r = S::from_rational(rate);
        self.cells
            .chunks(w)
            .map(|row| {
                if row.iter().all(|&c| c == 0) {
                    return S::zero();
                }
                let sum = row
                    .iter()
                    .zip(&self.dens)
                    .filter(|(&c, _)| c != 0)
                    .fold(S::zero(), |acc, (&c, &d)| acc + S::from_ratio(c, d));
                r.clone() * sum
            })
            .collect()
    }
}

/// Templates for every (window key, displacement) a demand needs.
pub(crate) struct TemplateBook {
    pub(crate) by_key: HashMap<(usize, u64), Vec<TemplatePath>>,
}

impl TemplateBook {
    pub(crate) fn build(sched: &Schedule, displacements: impl IntoIterator<Item = u64>, keys: &[usize]) -> Self {
        let mut wanted: Vec<(usize, u64)> = Vec::new();
        let mut ds: Vec<u64> = displacements.into_iter().collect();
        ds.sort_unstable();
        ds.dedup();
        for &key in keys {
            for &d in &ds {
                wanted.push((key, d));
            }
        }
        let space = sched.space();
        let by_key = wanted
            .into_par_iter()
            .map(|(key, d)| {
                let dv = space.index_to_node(d).expect("valid displacement");
                ((key, d), template(sched, key, &dv))
            })
            .collect();
        Self { by_key }
    }

    pub(crate) fn get(&self, key: usize, d: u64) -> &[TemplatePath] {
        &self.by_key[&(key, d)]
    }

    /// Distinct pseudo-path counts, used as tally denominators.
    pub(crate) fn denominators(&self) -> Vec<u128> {
        let mut dens: Vec<u128> = self.by_key.values().map(|t| t.len() as u128).filter(|&c| c > 0).collect();
        dens.sort_unstable();
        dens.dedup();
        dens
    }
}

/// Base-coordinate displacement `tau(b) - tau(a)` as a node index.
pub(crate) fn displacement(sched: &Schedule, a: usize, b: usize) -> u64 {
    let d: NodeVec = sched.node_vec(b).sub(&sched.node_vec(a));
    sched.space().node_to_index(&d).expect("valid vector")
}

/// Which window keys carry `(g+1)`-hop traffic; others are skipped.
pub(crate) type KeyFilter<'a> = &'a (dyn Fn(usize) -> bool + Sync);

/// Unit-rate tally of the `(g+1)`-hop scheme, split by hop index.
pub(crate) fn oblivious_tally(sched: &Schedule, sigma: &Permutation, keep_key: KeyFilter<'_>) -> Tally {
    let n = sched.node_count();
    let hops = sched.g() + 1;
    let period = sched.period();
    let keys: Vec<usize> = (0..window_keys(sched)).filter(|&k| keep_key(k)).collect();
    let book = TemplateBook::build(sched, (0..n).map(|a| displacement(sched, a, sigma.apply(a))), &keys);
    let dens = book.denominators();
    let den_index: BTreeMap<u128, usize> = dens.iter().enumerate().map(|(i, &d)| (d, i)).collect();
    // each window key is the departure window for exactly `starts` injection times per period
    let starts = period / window_keys(sched) as u64;
    let slots = n * period as usize * hops;
    (0..n)
        .into_par_iter()
        .fold(
            || Tally::new(slots, dens.clone()),
            |mut tally, a| {
                let d = displacement(sched, a, sigma.apply(a));
                for &key in &keys {
                    let window = window_for_key(sched, key, 0);
                    let paths = book.get(key, d);
                    let den = den_index[&(paths.len() as u128)];
                    for path in paths {
                        let mut cur = a;
                        for (hop, offset) in path.physical() {
                            let k = window.start + offset;
                            let slot = ((k % period) as usize * n + cur) * hops + hop;
                            tally.add(slot, den, starts as u128);
                            cur = sched.permute(k, cur);
                        }
                        debug_assert_eq!(cur, sigma.apply(a));
                    }
                }
                tally
            },
        )
        .reduce(|| Tally::new(slots, dens.clone()), Tally::merge)
}

/// Exact per-edge loads of the `(g+1)`-hop pseudo-path scheme, split by hop.
pub fn hop_loads_oblivious<S: LoadScalar>(sched: &Schedule, demand: &PermDemand) -> HopLoads<S> {
    let tally = oblivious_tally(sched, &demand.sigma, &|_| true);
    HopLoads::from_parts(sched.node_count(), sched.period(), sched.g() + 1, tally.finish(demand.rate.value()))
}

/// Exact per-edge loads of the `(g+1)`-hop pseudo-path scheme.
pub fn induced_load_oblivious<S: LoadScalar>(sched: &Schedule, demand: &PermDemand) -> LoadMap<S> {
    hop_loads_oblivious(sched, demand).total()
}

/// Flow on `e` from each hop position.
pub fn hop_flow_decomposition<S: LoadScalar>(sched: &Schedule, demand: &PermDemand, e: PhysEdge) -> Vec<S> {
    hop_loads_oblivious::<S>(sched, demand).hop_flow(e).to_vec()
}

/// `sum over (a, t, path) of weight * physical hops`, computed path by path
/// without touching any edge.
pub fn path_weight_hops(sched: &Schedule, demand: &PermDemand) -> BigRational {
    let n = sched.node_count();
    let period = sched.period();
    let r = crate::scalar::big(demand.rate.value());
    (0..n)
        .into_par_iter()
        .map(|a| {
            let b = demand.sigma.apply(a);
            let mut acc = BigRational::zero();
            for t in 0..period {
                let paths = super::enumerate_pseudopaths(sched, a, b, t);
                let count = BigInt::from(paths.len());
                let hops: usize = paths.iter().map(|p| p.physical_hops()).sum();
                acc += BigRational::new(BigInt::from(hops), count);
            }
            acc * &r
        })
        .reduce(BigRational::zero, |x, y| x + y)
}

/// Largest rate the `(g+1)`-hop scheme can carry for `sigma`: `1 / max unit load`.
pub fn max_feasible_rate(sched: &Schedule, sigma: &Permutation) -> BigRational {
    let unit: Vec<BigRational> = oblivious_tally(sched, sigma, &|_| true).finish(&Rational64::one());
    let hops = sched.g() + 1;
    let max = unit
        .chunks(hops)
        .map(|c| c.iter().fold(BigRational::zero(), |a, b| a + b))
        .max()
        .unwrap_or_else(BigRational::zero);
    max.recip()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feasibility_is_non_strict() {
        let mut m = LoadMap::<BigRational>::zeros(2, 1);
        assert!(m.is_feasible());
        m.loads[0] = BigRational::one();
        assert!(m.is_feasible());
        m.loads[1] = BigRational::one() + BigRational::new(1.into(), 1_000_000_000.into());
        assert!(!m.is_feasible());
        assert_eq!(m.max_load().unwrap().0, PhysEdge { tail: 1, k: 0 });
        assert_eq!(m.overloaded().len(), 1);
    }

    #[test]
    fn empty_map_is_feasible() {
        let m = LoadMap::<BigRational>::zeros(0, 0);
        assert!(m.is_feasible());
        assert!(m.max_load().is_none());
    }
}
