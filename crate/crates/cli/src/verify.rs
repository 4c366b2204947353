use itertools::Itertools;
use num_bigint::BigUint;
use num_traits::One;
use ornlab::ff::{is_constellation, is_prime, vandermonde, PrimeField};
use ornlab::perm::Permutation;
use ornlab::routing::{
    direct_connections, enumerate_pseudopaths, hop_loads_oblivious, max_feasible_rate, path_weight_hops, PermDemand,
    Rate,
};
use ornlab::rng;
use ornlab::schedule::{diagonal_family, reachable_set, Schedule};
use ornlab::tradeoff::{counting_bound, curve_sweep, derive_params, EdgeReach, ParamError};
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::load::{first_last_bound, oblivious_latency_bound, oblivious_max_latency};
use crate::tails::{coloring_suite, counterexample, na_corpus, NaConfig};
use crate::{Check, CommandConfig, Meta, Outcome};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Random demands per routing check.
    pub sigma_samples: u64,
    pub na_cases: u64,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { sigma_samples: 10, na_cases: 2_000, seed: 0 }
    }
}

impl CommandConfig for VerifyConfig {
    fn seed_mut(&mut self) -> &mut u64 {
        &mut self.seed
    }
}

fn constellations() -> Check {
    let mut sets = 0u64;
    let mut ok = true;
    for p in (2..=7).filter(|&p| is_prime(p)) {
        let field = PrimeField::new(p).expect("prime");
        for g in 2..=3usize {
            let family = diagonal_family(field, g);
            for c in (1..).take_while(|c| c * (g + 1) <= p as usize) {
                for xs in (0..p).combinations(c * (g + 1)) {
                    let vs: Vec<_> = xs.iter().map(|&x| vandermonde(field, x, g)).collect();
                    sets += 1;
                    ok &= is_constellation(field, &vs, g);
                    ok &= family.iter().all(|a| is_constellation(field, &a.twist(&vs).expect("same dimension"), g));
                }
            }
        }
    }
    Check::new("constellations and twists", ok, format!("{sets} vector sets, p <= 7"))
}

fn pseudopath_bracket(s: &Schedule) -> Check {
    let (p, c, g) = (s.p() as usize, s.c(), s.g() as u32);
    let (lo, hi) = ((p - 2) * c.pow(g + 1), (p - 1) * c.pow(g + 1));
    let n = s.node_count();
    let counts = (0..n).cartesian_product(0..n).flat_map(|(a, b)| (0..s.period()).map(move |t| (a, b, t)));
    let bad = counts.filter(|&(a, b, t)| !(lo..=hi).contains(&enumerate_pseudopaths(s, a, b, t).len())).count();
    Check::new("pseudo-path count bracket", bad == 0, format!("[{lo}, {hi}] at p={p} g={g} C={c}, {bad} outside"))
}

fn routing_checks(s: &Schedule, samples: u64, seed: u64) -> Vec<Check> {
    let rate = Rate::new(3, 10).expect("valid rate");
    let bound = first_last_bound(s, &rate);
    let lat_bound = oblivious_latency_bound(s);
    let (mut hop_ok, mut cons_ok, mut lat_ok, mut dual_ok) = (true, true, true, true);
    let mut worst_lat = 0;
    let latency = lat_bound;
    let reach = EdgeReach::new(s, s.g() as u32 + 1, latency);
    for t in 0..samples {
        let sigma = Permutation::random(s.node_count(), &mut rng::trial(seed, t));
        let d = PermDemand::new(sigma.clone(), rate);
        let hops = hop_loads_oblivious::<BigRational>(s, &d);
        let g = s.g();
        hop_ok &= [0, g].iter().all(|&q| hops.hop(q).iter().all(|(_, l)| *l <= bound));
        cons_ok &= hops.total().total() == path_weight_hops(s, &d);
        let lat = oblivious_max_latency(s, &sigma);
        worst_lat = worst_lat.max(lat);
        lat_ok &= lat <= lat_bound;
        if let Some(dual) = reach.bound(&sigma) {
            dual_ok &= max_feasible_rate(s, &sigma) <= dual;
        }
    }
    vec![
        Check::new("first/last-hop bound", hop_ok, format!("{samples} demands, bound {bound}")),
        Check::new("load conservation", cons_ok, format!("{samples} demands")),
        Check::new("max latency", lat_ok, format!("{worst_lat} <= {lat_bound}")),
        Check::new("weak duality", dual_ok, format!("{samples} demands, L = {latency}")),
    ]
}

fn sorn_coverage() -> Check {
    let s = Schedule::sorn(5, 2, 1).expect("valid design");
    let want = s.c() * (s.g() + 1);
    let n = s.node_count();
    let bad = (0..n)
        .cartesian_product(0..n)
        .filter(|&(a, b)| {
            let diff = s.node_vec(b).sub(&s.node_vec(a));
            let expected = if diff.all_nonzero() { want } else { 0 };
            direct_connections(&s, a, b) != expected
        })
        .count();
    Check::new("sorn coverage", bad == 0, format!("{bad} pairs off at p=5 g=2 C=1"))
}

fn counting_lemma() -> Check {
    let mut worst = 0usize;
    let mut ok = true;
    for s in [Schedule::orn(5, 2, 1).expect("valid"), Schedule::sorn(5, 2, 1).expect("valid")] {
        for a in (0..s.node_count()).step_by(6) {
            for l in [3u64, 6, 9, 12] {
                for h in 0..=l / 3 {
                    let k = reachable_set(&s, a, 1, l, h as usize).len();
                    worst = worst.max(k);
                    ok &= BigUint::from(k) <= counting_bound(l, h).value;
                }
            }
        }
    }
    Check::new("counting lemma", ok, format!("largest reachable set {worst}"))
}

fn gating() -> Check {
    let mut ok = true;
    for m in 2..=50 {
        let r = Rate::new(1, m).expect("valid rate");
        ok &= derive_params(r, 101, ornlab::schedule::ScheduleKind::Orn) == Err(ParamError::EpsilonOne);
    }
    let small = derive_params(Rate::new(3, 10).expect("valid"), 7, ornlab::schedule::ScheduleKind::Orn);
    ok &= matches!(small, Err(ParamError::PrimeTooSmall { .. }));
    Check::new("hypothesis gating", ok, "1/r integer and small p rejected")
}

fn curves_half_bound() -> Check {
    let pts = curve_sweep(1e20f64, 500).expect("valid sweep");
    let applicable: Vec<_> = pts.iter().filter(|p| p.half_bound_applies()).collect();
    let bad = applicable.iter().filter(|p| !p.half_bound_holds()).count();
    Check::new("half bound", bad == 0, format!("{} applicable points at N = 1e20", applicable.len()))
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    meta: &'a Meta,
    checks: &'a [Check],
}

pub fn run(cfg: &VerifyConfig, meta: &Meta) -> anyhow::Result<Outcome> {
    let orn = Schedule::orn(5, 2, 1)?;
    let mut checks = vec![constellations(), pseudopath_bracket(&orn)];
    checks.extend(routing_checks(&orn, cfg.sigma_samples, cfg.seed));
    checks.push(sorn_coverage());
    checks.push(counting_lemma());
    let na = na_corpus(&NaConfig { cases: cfg.na_cases, max_n: 5 }, cfg.seed)?;
    checks.push(Check::new("negative association", na.positive_cases.is_empty(), format!("{} cases", na.cases)));
    let cx = counterexample();
    let sixth = BigRational::one() / BigRational::from_integer(6.into());
    checks.push(Check::new(
        "double-sided counterexample",
        cx.e_x1x2 == crate::Exact::from(&sixth),
        format!("E[X1 X2] = {}/{}", cx.e_x1x2.num, cx.e_x1x2.den),
    ));
    let col = coloring_suite(6);
    checks.push(Check::new("balanced 3-coloring", col.failures == 0, format!("{} permutations", col.permutations)));
    checks.push(curves_half_bound());
    checks.push(gating());
    let mut out = Outcome::default();
    out.add_json("verify.json", &VerifyReport { meta, checks: &checks });
    out.checks = checks;
    Ok(out)
}
