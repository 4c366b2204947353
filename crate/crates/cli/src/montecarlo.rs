use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use ornlab::perm::Permutation;
use ornlab::prob::normal_halfwidth;
use ornlab::rng;
use ornlab::routing::{induced_load_failover, max_feasible_rate, PermDemand, Rate};
use ornlab::schedule::Schedule;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::load::{read_schedule, RoutingChoice};
use crate::{resolve, Check, CommandConfig, Exact, Meta, Outcome};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloConfig {
    pub schedule: PathBuf,
    pub rate: Rate,
    #[serde(default = "default_trials")]
    pub trials: u64,
    /// `oblivious` or `failover`.
    #[serde(default)]
    pub routing: RoutingChoice,
    /// Optional assertion on the observed overload frequency.
    #[serde(default)]
    pub max_overload_frequency: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

fn default_trials() -> u64 {
    100
}

impl CommandConfig for MonteCarloConfig {
    fn seed_mut(&mut self) -> &mut u64 {
        &mut self.seed
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub max_load: Exact,
    pub overloaded: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonteCarloReport {
    pub meta: Meta,
    pub routing: RoutingChoice,
    pub rate: Rate,
    pub nodes: usize,
    pub trials: u64,
    pub overloads: u64,
    pub overload_frequency: f64,
    pub ci_halfwidth: f64,
    pub max_load_min: f64,
    pub max_load_median: f64,
    pub max_load_max: f64,
    pub per_trial: Vec<TrialRecord>,
}

/// Exact maximum edge load of one demand.
pub fn max_load(sched: &Schedule, sigma: &Permutation, rate: &Rate, routing: RoutingChoice) -> anyhow::Result<BigRational> {
    let r = BigRational::new(BigInt::from(*rate.value().numer()), BigInt::from(*rate.value().denom()));
    if r.is_zero() {
        return Ok(r);
    }
    Ok(match routing {
        RoutingChoice::Oblivious => r / max_feasible_rate(sched, sigma),
        RoutingChoice::Failover => induced_load_failover::<BigRational>(sched, &PermDemand::new(sigma.clone(), *rate))?
            .max_load()
            .map_or_else(BigRational::zero, |(_, l)| l),
        RoutingChoice::Semi => anyhow::bail!("montecarlo supports oblivious or failover routing"),
    })
}

pub fn run(cfg: &MonteCarloConfig, meta: &Meta, base: &Path) -> anyhow::Result<Outcome> {
    anyhow::ensure!(cfg.trials >= 1, "trials must be at least 1");
    let sched = read_schedule(&resolve(base, &cfg.schedule))?;
    let n = sched.node_count();
    let loads: Vec<BigRational> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| max_load(&sched, &Permutation::random(n, &mut rng::trial(cfg.seed, t)), &cfg.rate, cfg.routing))
        .collect::<anyhow::Result<_>>()?;
    let one = BigRational::one();
    let overloads = loads.iter().filter(|l| **l > one).count() as u64;
    let freq = overloads as f64 / cfg.trials as f64;
    let mut sorted: Vec<f64> = loads.iter().map(|l| l.to_f64().unwrap_or(f64::NAN)).collect();
    sorted.sort_by(f64::total_cmp);
    let report = MonteCarloReport {
        meta: meta.clone(),
        routing: cfg.routing,
        rate: cfg.rate,
        nodes: n,
        trials: cfg.trials,
        overloads,
        overload_frequency: freq,
        ci_halfwidth: normal_halfwidth((freq * (1.0 - freq)).sqrt(), cfg.trials),
        max_load_min: sorted[0],
        max_load_median: sorted[sorted.len() / 2],
        max_load_max: sorted[sorted.len() - 1],
        per_trial: loads
            .iter()
            .enumerate()
            .map(|(t, l)| TrialRecord { trial: t as u64, max_load: Exact::from(l), overloaded: *l > one })
            .collect(),
    };
    let mut out = Outcome::default();
    if let Some(limit) = cfg.max_overload_frequency {
        out.checks.push(Check::new("overload frequency", freq <= limit, format!("{freq} <= {limit}")));
    }
    out.add_json("montecarlo.json", &report);
    Ok(out)
}
