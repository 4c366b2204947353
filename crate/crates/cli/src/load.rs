use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use ornlab::perm::Permutation;
use ornlab::rng;
use ornlab::routing::{
    enumerate_pseudopaths, failover_hop_loads, failover_paths, failover_route, hop_loads_oblivious, path_weight_hops,
    semi_oblivious_route, HopLoads, PermDemand, Rate, RoutingMode,
};
use ornlab::schedule::{PhysEdge, Schedule, ScheduleDescription, ScheduleKind};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{resolve, Check, CommandConfig, Exact, Meta, Outcome, Verdict};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DemandSource {
    /// Uniform permutation drawn from the config seed.
    #[default]
    Random,
    Identity,
    /// `a -> a + k mod N` on node indices.
    Shift { k: usize },
    /// JSON array with the image of every node.
    File { path: PathBuf },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoutingChoice {
    #[default]
    Oblivious,
    Failover,
    Semi,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadConfig {
    pub schedule: PathBuf,
    pub rate: Rate,
    #[serde(default)]
    pub demand: DemandSource,
    #[serde(default)]
    pub routing: RoutingChoice,
    #[serde(default)]
    pub seed: u64,
}

impl CommandConfig for LoadConfig {
    fn seed_mut(&mut self) -> &mut u64 {
        &mut self.seed
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ScheduleFile {
    Wrapped { schedule: ScheduleDescription },
    Bare(ScheduleDescription),
}

/// Reads a schedule written by `build`, or a bare description.
pub fn read_schedule(path: &Path) -> anyhow::Result<Schedule> {
    let text = fs::read_to_string(path).with_context(|| format!("reading schedule {}", path.display()))?;
    let desc = match serde_json::from_str(&text).with_context(|| format!("parsing schedule {}", path.display()))? {
        ScheduleFile::Wrapped { schedule } | ScheduleFile::Bare(schedule) => schedule,
    };
    Ok(desc.build()?)
}

pub fn demand_permutation(source: &DemandSource, n: usize, seed: u64, base: &Path) -> anyhow::Result<Permutation> {
    Ok(match source {
        DemandSource::Random => Permutation::random(n, &mut rng::master(seed)),
        DemandSource::Identity => Permutation::identity(n),
        DemandSource::Shift { k } => Permutation::new((0..n).map(|a| (a + k) % n).collect())?,
        DemandSource::File { path } => {
            let path = resolve(base, path);
            let text = fs::read_to_string(&path).with_context(|| format!("reading demand {}", path.display()))?;
            let sigma: Permutation =
                serde_json::from_str(&text).with_context(|| format!("malformed demand file {}", path.display()))?;
            anyhow::ensure!(sigma.len() == n, "demand has {} entries, schedule has {n} nodes", sigma.len());
            sigma
        }
    })
}

fn big(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn rate_big(rate: &Rate) -> BigRational {
    BigRational::new(BigInt::from(*rate.value().numer()), BigInt::from(*rate.value().denom()))
}

/// `(p-1)/(p-2) r`, the deterministic first- and last-hop bound.
pub fn first_last_bound(sched: &Schedule, rate: &Rate) -> BigRational {
    rate_big(rate) * BigRational::new(BigInt::from(sched.p() - 1), BigInt::from(sched.p() - 2))
}

/// `r (g+1) (p-1)^g / (p-2)^g`, the per-hop failover bound.
pub fn failover_hop_bound(sched: &Schedule, rate: &Rate) -> BigRational {
    let g = sched.g() as u32;
    rate_big(rate)
        * big(sched.g() as u64 + 1)
        * BigRational::new(BigInt::from(sched.p() - 1).pow(g), BigInt::from(sched.p() - 2).pow(g))
}

/// Worst-case latency of the `(g+1)`-hop scheme.
pub fn oblivious_latency_bound(sched: &Schedule) -> u64 {
    let (c, g, p) = (sched.c() as u64, sched.g() as u64, sched.p());
    match sched.kind() {
        ScheduleKind::Orn => c * (g + 2) * (p - 1),
        ScheduleKind::Sorn => 2 * c * (g + 1) * (p - 1),
    }
}

pub fn failover_latency_bound(sched: &Schedule) -> u64 {
    2 * sched.period() + sched.constellation_len()
}

/// Longest route of the `(g+1)`-hop scheme over every source and start in a period.
pub fn oblivious_max_latency(sched: &Schedule, sigma: &Permutation) -> u64 {
    (0..sched.node_count())
        .into_par_iter()
        .map(|a| {
            (0..sched.period())
                .flat_map(|t| enumerate_pseudopaths(sched, a, sigma.apply(a), t))
                .map(|pp| pp.route(sched).latency())
                .max()
                .unwrap_or(0)
        })
        .max()
        .unwrap_or(0)
}

pub fn failover_max_latency(sched: &Schedule, sigma: &Permutation) -> anyhow::Result<u64> {
    let per_source: Vec<u64> = (0..sched.node_count())
        .into_par_iter()
        .map(|a| -> anyhow::Result<u64> {
            let choices = failover_paths(sched, a, sigma.apply(a))?;
            Ok(choices
                .iter()
                .flat_map(|ch| (0..sched.period()).map(move |t| failover_route(sched, a, ch, t).latency()))
                .max()
                .unwrap_or(0))
        })
        .collect::<anyhow::Result<_>>()?;
    Ok(per_source.into_iter().max().unwrap_or(0))
}

fn hop_max(hops: &HopLoads<BigRational>, q: usize) -> BigRational {
    hops.hop(q).max_load().map(|(_, l)| l).unwrap_or_else(BigRational::zero)
}

#[derive(Debug, Clone, Serialize)]
pub struct LoadSummary {
    pub meta: Meta,
    pub routing: RoutingChoice,
    /// Scheme actually used: `g_plus_one_hop` or `two_hop_failover`.
    pub mode: &'static str,
    pub rate: Rate,
    pub nodes: usize,
    pub period: u64,
    pub max_load: Exact,
    pub max_load_edge: Option<PhysEdge>,
    pub feasible: bool,
    pub overloaded_edges: usize,
    /// Edges whose `(g+1)`-hop load exceeded 1 when the semi-oblivious rule fell back.
    pub fallback_trigger_edges: usize,
    pub max_latency: u64,
    pub latency_bound: u64,
    pub latency_check: Verdict,
    /// Maximum per-edge flow at each hop position.
    pub hop_max: Vec<Exact>,
    pub hop_bound: Exact,
    pub first_hop_max: Exact,
    pub last_hop_max: Exact,
    pub first_last_hop: Verdict,
    pub total_load: Exact,
    pub conservation: Verdict,
}

pub struct LoadResult {
    pub summary: LoadSummary,
    pub csv: String,
}

pub fn compute(sched: &Schedule, demand: &PermDemand, routing: RoutingChoice, meta: &Meta) -> anyhow::Result<LoadResult> {
    let (use_failover, trigger) = match routing {
        RoutingChoice::Oblivious => (false, 0),
        RoutingChoice::Failover => (true, 0),
        RoutingChoice::Semi => {
            let d = semi_oblivious_route(sched, demand)?;
            (d.mode == RoutingMode::TwoHopFailover, d.overloaded_edges.len())
        }
    };
    let (hops, hop_bound, conserved, max_latency, latency_bound) = if use_failover {
        let hops = failover_hop_loads::<BigRational>(sched, demand)?;
        let conserved = hops.hop(0).total() == hops.hop(1).total();
        let lat = failover_max_latency(sched, &demand.sigma)?;
        (hops, failover_hop_bound(sched, &demand.rate), conserved, lat, failover_latency_bound(sched))
    } else {
        let hops = hop_loads_oblivious::<BigRational>(sched, demand);
        let conserved = hops.total().total() == path_weight_hops(sched, demand);
        let lat = oblivious_max_latency(sched, &demand.sigma);
        (hops, first_last_bound(sched, &demand.rate), conserved, lat, oblivious_latency_bound(sched))
    };
    let total = hops.total();
    let (edge, max) = total.max_load().map_or((None, BigRational::zero()), |(e, l)| (Some(e), l));
    let last = hops.hop_count() - 1;
    let (first_max, last_max) = (hop_max(&hops, 0), hop_max(&hops, last));
    let summary = LoadSummary {
        meta: meta.clone(),
        routing,
        mode: if use_failover { "two_hop_failover" } else { "g_plus_one_hop" },
        rate: demand.rate,
        nodes: sched.node_count(),
        period: sched.period(),
        max_load: Exact::from(&max),
        max_load_edge: edge,
        feasible: total.is_feasible(),
        overloaded_edges: total.overloaded().len(),
        fallback_trigger_edges: trigger,
        max_latency,
        latency_bound,
        latency_check: Verdict::from(max_latency <= latency_bound),
        hop_max: (0..hops.hop_count()).map(|q| Exact::from(&hop_max(&hops, q))).collect(),
        hop_bound: Exact::from(&hop_bound),
        first_hop_max: Exact::from(&first_max),
        last_hop_max: Exact::from(&last_max),
        first_last_hop: Verdict::from(first_max <= hop_bound && last_max <= hop_bound),
        total_load: Exact::from(&total.total()),
        conservation: Verdict::from(conserved),
    };
    Ok(LoadResult { summary, csv: meta.comment() + &total.to_csv(sched) })
}

pub fn run(cfg: &LoadConfig, meta: &Meta, base: &Path) -> anyhow::Result<Outcome> {
    let sched = read_schedule(&resolve(base, &cfg.schedule))?;
    let sigma = demand_permutation(&cfg.demand, sched.node_count(), cfg.seed, base)?;
    let demand = PermDemand::new(sigma, cfg.rate);
    let res = compute(&sched, &demand, cfg.routing, meta)?;
    let s = &res.summary;
    let mut out = Outcome::default();
    out.checks.push(Check::new(
        "first/last-hop bound",
        s.first_last_hop == Verdict::Pass,
        format!("first {} last {} bound {}", s.first_hop_max.value, s.last_hop_max.value, s.hop_bound.value),
    ));
    out.checks.push(Check::new("load conservation", s.conservation == Verdict::Pass, "exact identity"));
    out.checks.push(Check::new(
        "max latency",
        s.latency_check == Verdict::Pass,
        format!("{} <= {}", s.max_latency, s.latency_bound),
    ));
    out.add_text("loads.csv", res.csv);
    out.add_json("summary.json", &res.summary);
    Ok(out)
}
