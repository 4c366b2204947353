//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_UNATTAINABLE` still run and still print FAIL; they
//! only stop failing the process. If one of them starts passing the process
//! fails too, so the list cannot go stale.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use itertools::Itertools;
use num_bigint::{BigInt, BigUint};
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};
use ornlab::ff::{is_constellation, is_prime, vandermonde, NodeVec, PrimeField};
use ornlab::perm::Permutation;
use ornlab::prob::{
    balanced_3_coloring, bilinear_value, covariance_oracle, default_corpus, double_sided_moments, submatrix_experiment,
    tail_experiment, ConsistentMatrix, CovMode, Covariance, MonotoneFn, Sided, Stochastic,
};
use ornlab::rng;
use ornlab::routing::{
    enumerate_pseudopaths, failover_hop_loads, hop_loads_oblivious, induced_load_failover, induced_load_oblivious,
    max_feasible_rate, path_weight_hops, PermDemand, Rate,
};
use ornlab::schedule::{diagonal_family, reachable_set, PhysEdge, Schedule, ScheduleKind};
use ornlab::tradeoff::{assess_params, counting_bound, derive_params, EdgeReach, Inequality, ParamError};
use ornlab_cli::{run, Command};
use rand::Rng;
use rayon::prelude::*;

/// Relative tolerance for curve recomputation.
const CURVE_RTOL: f64 = 1e-12;
/// Binomial standard deviations of slack on Monte Carlo tail frequencies.
const TAIL_SIGMAS: f64 = 3.0;
const TAIL_TRIALS: u64 = 100_000;
const NA_CASES: u64 = 10_000;
const RANDOM_DEMANDS: u64 = 100;
const SEED: u64 = 20_240_601;

const LIMIT_C1: Duration = Duration::from_secs(10);
const LIMIT_C2: Duration = Duration::from_secs(60);
const LIMIT_C3: Duration = Duration::from_secs(300);
const LIMIT_C8: Duration = Duration::from_secs(600);

/// Criterion 11 asserts `L_low <= L_upp <= vlb` pointwise, which the closed forms
/// contradict near integer `1/r` and at small `r`.
const KNOWN_UNATTAINABLE: &[u32] = &[11];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn rate_big(r: &Rate) -> BigRational {
    q(*r.value().numer(), *r.value().denom())
}

/// Determinant over `F_p` by cofactor expansion, for `g <= 3`.
fn det_mod(rows: &[Vec<u64>], p: u64) -> u64 {
    let n = rows.len();
    if n == 1 {
        return rows[0][0] % p;
    }
    let mut acc = 0u64;
    for j in 0..n {
        let minor: Vec<Vec<u64>> = rows[1..].iter().map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect()).collect();
        let term = rows[0][j] * det_mod(&minor, p) % p;
        acc = if j % 2 == 0 { (acc + term) % p } else { (acc + p - term) % p };
    }
    acc
}

fn c1_constellations() -> Outcome {
    let start = Instant::now();
    let mut jobs = Vec::new();
    for p in (2..=13u64).filter(|&p| is_prime(p)) {
        for g in [2usize, 3] {
            for c in (1..).take_while(|c| c * (g + 1) <= p as usize) {
                jobs.push((p, g, c));
            }
        }
    }
    let results: Vec<(u64, u64, bool)> = jobs
        .par_iter()
        .map(|&(p, g, c)| {
            let field = PrimeField::new(p).unwrap();
            let family = diagonal_family(field, g);
            let mut sets = 0u64;
            let mut twists = 0u64;
            let mut ok = family.len() == (p as usize - 1).pow(g as u32 - 1);
            for xs in (0..p).combinations(c * (g + 1)) {
                let vs: Vec<NodeVec> = xs.iter().map(|&x| vandermonde(field, x, g)).collect();
                // oracle: every g-subset has a non-zero determinant
                let oracle = vs.iter().combinations(g).all(|sub| {
                    let rows: Vec<Vec<u64>> = sub.iter().map(|v| v.coords().to_vec()).collect();
                    det_mod(&rows, p) != 0
                });
                ok &= oracle && is_constellation(field, &vs, g);
                for a in &family {
                    ok &= is_constellation(field, &a.twist(&vs).unwrap(), g);
                    twists += 1;
                }
                sets += 1;
            }
            (sets, twists, ok)
        })
        .collect();
    let sets: u64 = results.iter().map(|r| r.0).sum();
    let twists: u64 = results.iter().map(|r| r.1).sum();
    let ok = results.iter().all(|r| r.2);
    let t = start.elapsed();
    outcome(ok && t < LIMIT_C1, format!("{sets} sets, {twists} twists, p <= 13, g in {{2,3}}, {t:.1?} (limit {LIMIT_C1:?})"))
}

/// Brute force over every phase and coefficient tuple of the departure window.
fn oracle_pseudopath_count(s: &Schedule, a: usize, b: usize, t: u64) -> usize {
    let w = ornlab::routing::departure(s, t);
    let (g, p, c) = (s.g(), s.p(), s.c());
    let d = s.node_vec(b).sub(&s.node_vec(a));
    let blocks: Vec<usize> = (0..=g).map(|i| (w.first_block + i) % (g + 1)).collect();
    let mut count = 0;
    for tcode in 0..(c as u64).pow(g as u32 + 1) {
        let phases: Vec<usize> =
            (0..=g).map(|i| blocks[i] * c + (tcode / (c as u64).pow(i as u32) % c as u64) as usize).collect();
        for code in 0..p.pow(g as u32 + 1) {
            let alpha: Vec<u64> = (0..=g).map(|i| code / p.pow(i as u32) % p).collect();
            if alpha[0] == 0 || alpha[g] == 0 {
                continue;
            }
            let mut acc = NodeVec::zero(s.field(), g);
            for (x, al) in phases.iter().zip(&alpha) {
                acc = acc.add_scaled(*al, s.phase_vector(w.constellation, *x));
            }
            count += usize::from(acc == d);
        }
    }
    count
}

struct EnumerationStats {
    outside: usize,
    min: usize,
    max: usize,
    oracle_mismatch: usize,
    paths: u64,
    max_latency: u64,
    bad_routes: u64,
}

fn enumerate_all(s: &Schedule, lo: usize, hi: usize) -> EnumerationStats {
    let n = s.node_count();
    let per_source: Vec<EnumerationStats> = (0..n)
        .into_par_iter()
        .map(|a| {
            let mut st = EnumerationStats { outside: 0, min: usize::MAX, max: 0, oracle_mismatch: 0, paths: 0, max_latency: 0, bad_routes: 0 };
            for b in 0..n {
                for t in 0..s.period() {
                    let pps = enumerate_pseudopaths(s, a, b, t);
                    let k = pps.len();
                    st.min = st.min.min(k);
                    st.max = st.max.max(k);
                    st.outside += usize::from(!(lo..=hi).contains(&k));
                    if (a * n + b) % 97 == 0 && t % 5 == 0 {
                        st.oracle_mismatch += usize::from(oracle_pseudopath_count(s, a, b, t) != k);
                    }
                    for pp in &pps {
                        let route = pp.route(s);
                        // walk the route through the schedule independently
                        let mut cur = a;
                        let mut ok = route.nodes[0] == a && route.start == t;
                        for (i, w) in route.nodes.windows(2).enumerate() {
                            let step = s.permute(t + i as u64, cur);
                            ok &= w[1] == cur || w[1] == step;
                            cur = w[1];
                        }
                        ok &= cur == b;
                        st.bad_routes += u64::from(!ok);
                        st.max_latency = st.max_latency.max(route.latency());
                        st.paths += 1;
                    }
                }
            }
            st
        })
        .collect();
    per_source.into_iter().fold(
        EnumerationStats { outside: 0, min: usize::MAX, max: 0, oracle_mismatch: 0, paths: 0, max_latency: 0, bad_routes: 0 },
        |acc, s| EnumerationStats {
            outside: acc.outside + s.outside,
            min: acc.min.min(s.min),
            max: acc.max.max(s.max),
            oracle_mismatch: acc.oracle_mismatch + s.oracle_mismatch,
            paths: acc.paths + s.paths,
            max_latency: acc.max_latency.max(s.max_latency),
            bad_routes: acc.bad_routes + s.bad_routes,
        },
    )
}

fn c2_c4_enumeration(s: &Schedule) -> (Outcome, Outcome) {
    let start = Instant::now();
    let (p, c, g) = (s.p() as usize, s.c(), s.g() as u32);
    let (lo, hi) = ((p - 2) * c.pow(g + 1), (p - 1) * c.pow(g + 1));
    let st = enumerate_all(s, lo, hi);
    let t = start.elapsed();
    let triples = s.node_count() * s.node_count() * s.period() as usize;
    let c2 = outcome(
        (lo, hi) == (40, 48) && st.outside == 0 && st.oracle_mismatch == 0 && t < LIMIT_C2,
        format!(
            "{triples} (a,b,t): counts in [{}, {}] vs [{lo}, {hi}], {} outside, {} oracle mismatches, {t:.1?} (limit {LIMIT_C2:?}; includes route walk)",
            st.min, st.max, st.outside, st.oracle_mismatch
        ),
    );
    let bound = s.c() as u64 * (s.g() as u64 + 2) * (s.p() - 1);
    let c4 = outcome(
        bound == 48 && st.max_latency <= bound && st.bad_routes == 0,
        format!("{} routes, max latency {} <= {bound}, {} routes fail the walk", st.paths, st.max_latency, st.bad_routes),
    );
    (c2, c4)
}

/// First-hop flow per edge, accumulated path by path.
fn oracle_first_hop(s: &Schedule, sigma: &Permutation, rate: &BigRational) -> Vec<BigRational> {
    let n = s.node_count();
    let mut flow = vec![BigRational::zero(); n * s.period() as usize];
    for a in 0..n {
        for t in 0..s.period() {
            let pps = enumerate_pseudopaths(s, a, sigma.apply(a), t);
            let w = rate / BigRational::from_integer(BigInt::from(pps.len()));
            for pp in &pps {
                if let Some(e) = pp.route(s).physical_edges(s).first() {
                    flow[e.k * n + e.tail] += &w;
                }
            }
        }
    }
    flow
}

fn c3_hop_bounds(s: &Schedule) -> Outcome {
    let start = Instant::now();
    let rate = Rate::new(3, 10).unwrap();
    let bound = q(s.p() as i64 - 1, s.p() as i64 - 2) * rate_big(&rate);
    let n = s.node_count();
    let results: Vec<(bool, bool, bool, BigRational)> = (0..RANDOM_DEMANDS)
        .into_par_iter()
        .map(|i| {
            let sigma = Permutation::random(n, &mut rng::trial(SEED, i));
            let d = PermDemand::new(sigma.clone(), rate);
            let hops = hop_loads_oblivious::<BigRational>(s, &d);
            let g = s.g();
            let worst = [0, g].iter().flat_map(|&qq| hops.hop(qq).iter().map(|(_, l)| l.clone()).collect::<Vec<_>>()).max().unwrap();
            let within = worst <= bound;
            let conserved = hops.total().total() == path_weight_hops(s, &d);
            let oracle_ok = if i < 3 {
                let want = oracle_first_hop(s, &sigma, &rate_big(&rate));
                let got = hops.hop(0);
                (0..s.period() as usize).all(|k| (0..n).all(|tail| *got.get(PhysEdge { tail, k }) == want[k * n + tail]))
            } else {
                true
            };
            (within, conserved, oracle_ok, worst)
        })
        .collect();
    let t = start.elapsed();
    let worst = results.iter().map(|r| r.3.clone()).max().unwrap();
    let ok = results.iter().all(|r| r.0 && r.1 && r.2);
    outcome(
        ok && t < LIMIT_C3,
        format!(
            "{RANDOM_DEMANDS} demands at r=3/10: worst first/last-hop {worst} <= {bound}, conservation {}, oracle {}, {t:.1?} (limit {LIMIT_C3:?})",
            if results.iter().all(|r| r.1) { "exact" } else { "broken" },
            if results.iter().all(|r| r.2) { "agrees" } else { "disagrees" },
        ),
    )
}

fn c5_failover() -> Outcome {
    let s = Schedule::sorn(7, 2, 1).unwrap();
    let n = s.node_count();
    let g = s.g() as u32;
    let cap_factor = q(g as i64 + 1, 1) * q(6i64.pow(g), 5i64.pow(g));
    let demands: Vec<Permutation> = (0..20).map(|i| Permutation::random(n, &mut rng::trial(SEED + 5, i))).collect();
    let rates = [Rate::new(3, 10).unwrap(), Rate::new(2, 7).unwrap(), Rate::new(1, 5).unwrap()];
    let mut per_hop_ok = true;
    let mut worst_ratio = BigRational::zero();
    for rate in rates {
        let cap = rate_big(&rate) * &cap_factor;
        for sigma in &demands {
            let hops = failover_hop_loads::<BigRational>(&s, &PermDemand::new(sigma.clone(), rate)).unwrap();
            for qq in 0..2 {
                for (_, l) in hops.hop(qq).iter() {
                    per_hop_ok &= *l <= cap;
                    worst_ratio = worst_ratio.max(l / &cap);
                }
            }
        }
    }
    // rates with g = 2 where every prime lower bound holds at p = 7
    let mut hyp_rates = 0;
    let mut hyp_ok = true;
    for i in 251..=333 {
        let r = Rate::new(i, 1000).unwrap();
        let Ok(params) = assess_params(r, 7, ScheduleKind::Sorn) else { continue };
        if params.g == 2 && params.violated().is_empty() {
            hyp_rates += 1;
            for sigma in &demands {
                let load = induced_load_failover::<BigRational>(&s, &PermDemand::new(sigma.clone(), r)).unwrap();
                hyp_ok &= load.is_feasible();
            }
        }
    }
    // coverage at p = 5
    let s5 = Schedule::sorn(5, 2, 1).unwrap();
    let want = s5.c() * (s5.g() + 1);
    let m = s5.node_count();
    let mut counts = vec![0usize; m * m];
    for k in 0..s5.period() {
        for a in 0..m {
            counts[a * m + s5.permute(k, a)] += 1;
        }
    }
    let coverage_bad = (0..m)
        .cartesian_product(0..m)
        .filter(|&(a, b)| {
            let (va, vb) = (s5.node_vec(a), s5.node_vec(b));
            let all_nonzero = va.coords().iter().zip(vb.coords()).all(|(x, y)| x != y);
            counts[a * m + b] != if all_nonzero { want } else { 0 }
        })
        .count();
    outcome(
        per_hop_ok && hyp_ok && coverage_bad == 0,
        format!(
            "per-hop loads <= r(g+1)(p-1)^g/(p-2)^g for 3 rates x 20 demands (worst ratio {}), \
             {hyp_rates} grid rates satisfy every prime bound at p=7 (load <= 1 checked there), \
             coverage {} of {} pairs off",
            worst_ratio.to_f64().unwrap(),
            coverage_bad,
            m * m
        ),
    )
}

/// Reachable nodes by dynamic programming over (node, hops used).
fn oracle_reach(s: &Schedule, a: usize, t0: u64, l: u64, h: usize) -> BTreeSet<usize> {
    let n = s.node_count();
    let mut best = vec![usize::MAX; n];
    best[a] = 0;
    for step in 0..l {
        let mut next = best.clone();
        for u in 0..n {
            if best[u] < h {
                let v = s.permute(t0 + step, u);
                next[v] = next[v].min(best[u] + 1);
            }
        }
        best = next;
    }
    (0..n).filter(|&u| u != a && best[u] != usize::MAX).collect()
}

fn c6_counting() -> Outcome {
    let schedules = [
        Schedule::orn(7, 2, 2).unwrap(),
        Schedule::orn(5, 3, 1).unwrap(),
        Schedule::sorn(5, 2, 1).unwrap(),
        Schedule::sorn(7, 2, 1).unwrap(),
    ];
    let mut samples = 0u64;
    let mut ok = true;
    let mut oracle_ok = true;
    let mut tightest = 0.0f64;
    for s in &schedules {
        let n = s.node_count();
        for a in (0..n).step_by(n / 8 + 1) {
            for t0 in [0, 1, s.period() / 3, s.period() - 1] {
                for l in (3..=36).step_by(3) {
                    for h in 0..=l / 3 {
                        let b = counting_bound(l, h);
                        assert!(b.asserted);
                        let got = reachable_set(s, a, t0, l, h as usize);
                        ok &= BigUint::from(got.len()) <= b.value;
                        tightest = tightest.max(got.len() as f64 / b.value.to_f64().unwrap());
                        if l <= 12 {
                            oracle_ok &= got.iter().copied().collect::<BTreeSet<_>>() == oracle_reach(s, a, t0, l, h as usize);
                        }
                        samples += 1;
                    }
                }
            }
        }
    }
    outcome(
        ok && oracle_ok,
        format!("{samples} (a,t0,L,h) samples on 4 schedules, max |reach|/2C(L,h) = {tightest:.3}, BFS oracle {}", if oracle_ok { "agrees" } else { "disagrees" }),
    )
}

fn brute_cov(x_of: &dyn Fn(&[usize]) -> (i128, i128), n: usize) -> BigRational {
    let (mut sf, mut sg, mut sfg, mut m) = (0i128, 0i128, 0i128, 0i128);
    for pi in (0..n).permutations(n) {
        let (f, g) = x_of(&pi);
        sf += f;
        sg += g;
        sfg += f * g;
        m += 1;
    }
    BigRational::new(BigInt::from(m * sfg - sf * sg), BigInt::from(m * m))
}

fn c7_negative_association() -> Outcome {
    let ri = Rational64::from_integer;
    let results: Vec<(BigRational, bool)> = (0..NA_CASES)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::trial(SEED + 7, i);
            let n = 2 + (i % 4) as usize;
            let order = Permutation::random(n, &mut r);
            let a: Vec<Vec<i64>> = (0..n)
                .map(|_| {
                    let mut row: Vec<i64> = (0..n).map(|_| r.gen_range(0..10)).collect();
                    row.sort_unstable();
                    (0..n).map(|j| row[order.apply(j)]).collect()
                })
                .collect();
            let idx = Permutation::random(n, &mut r);
            let split = r.gen_range(1..n);
            let (sf, sg) = (idx.as_slice()[..split].to_vec(), idx.as_slice()[split..].to_vec());
            let cf: Vec<i64> = sf.iter().map(|_| r.gen_range(0..11)).collect();
            let cg: Vec<i64> = sg.iter().map(|_| r.gen_range(0..11)).collect();
            let f_sum = r.gen_bool(0.5);
            let g_sum = r.gen_bool(0.5);
            let decreasing = r.gen_bool(0.5);
            let make = |sum: bool, idx: &[usize], caps: &[i64]| {
                let caps: Vec<Rational64> = caps.iter().map(|&c| ri(c)).collect();
                let f = if sum { MonotoneFn::threshold_sum(idx.to_vec(), caps) } else { MonotoneFn::step(idx.to_vec(), caps) };
                if decreasing { f.decreasing() } else { f }
            };
            let f = make(f_sum, &sf, &cf);
            let g = make(g_sum, &sg, &cg);
            let m = ConsistentMatrix::new(a.iter().map(|row| row.iter().map(|&x| ri(x)).collect()).collect()).unwrap();
            let Covariance::Exact(cov) = covariance_oracle(&m, &f, &g, CovMode::Exact).unwrap() else { unreachable!() };
            let eval = |sum: bool, idx: &[usize], caps: &[i64], x: &[i64]| -> i128 {
                let v = if sum {
                    idx.iter().zip(caps).map(|(&i, &c)| x[i].min(c)).sum::<i64>()
                } else {
                    i64::from(idx.iter().zip(caps).all(|(&i, &c)| x[i] >= c))
                };
                if decreasing { -(v as i128) } else { v as i128 }
            };
            let want = brute_cov(
                &|pi| {
                    let x: Vec<i64> = (0..n).map(|k| a[k][pi[k]]).collect();
                    (eval(f_sum, &sf, &cf, &x), eval(g_sum, &sg, &cg, &x))
                },
                n,
            );
            let agrees = want == cov;
            (cov, agrees)
        })
        .collect();
    let positive = results.iter().filter(|r| r.0.is_positive()).count();
    let disagree = results.iter().filter(|r| !r.1).count();
    let max = results.iter().map(|r| r.0.clone()).max().unwrap();

    // the double-sided counterexample, against a direct enumeration over tau
    let sigma = Permutation::from_cycles(4, &[&[0, 1], &[2, 3]]).unwrap();
    let u = [1i64, 1, 0, 0];
    let m = double_sided_moments(&u, &u, &sigma, 0, 1).unwrap();
    let mut exy = 0i64;
    for tau in (0..4).permutations(4) {
        let x = |k: usize| u[tau[k]] * u[tau[sigma.apply(k)]];
        exy += x(0) * x(1);
    }
    let direct = q(exy, 24);
    let cx_ok = m.e_xy == q(1, 6) && direct == q(1, 6) && m.covariance() == q(5, 36);
    outcome(
        positive == 0 && disagree == 0 && cx_ok && results.len() as u64 >= 10_000,
        format!(
            "{} cases n<=5: {positive} positive, {disagree} oracle mismatches, max Cov {max}; counterexample E[X1X2] = {} (direct {direct}), Cov = {}",
            results.len(),
            m.e_xy,
            m.covariance()
        ),
    )
}

fn c8_tails() -> Outcome {
    let start = Instant::now();
    let corpus = default_corpus();
    let gammas = [0.3, 0.5, 1.0];
    let mut reports = 0;
    let mut above = Vec::new();
    let mut formula_ok = true;
    let mut value_ok = true;
    let mut min_c = f64::INFINITY;
    for entry in &corpus.specs {
        let spec = entry.build::<f64>().unwrap();
        let c = spec.c_ratio();
        min_c = min_c.min(c);
        // independent evaluation of one draw through the full matrix
        let tau = Permutation::random(spec.n(), &mut rng::master(SEED));
        let n = spec.n();
        let dense: Vec<Vec<f64>> = match spec.matrix() {
            Stochastic::Permutation(s) => (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(s.apply(i) == j && i != j))).collect()).collect(),
            Stochastic::Dense(d) => (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { d[i][j].to_f64().unwrap() }).collect()).collect(),
        };
        let pv: Vec<f64> = (0..n).map(|j| spec.v()[tau.apply(j)]).collect();
        let pu: Vec<f64> = (0..n).map(|i| spec.u()[tau.apply(i)]).collect();
        let bl = |x: &[f64]| (0..n).map(|i| x[i] * (0..n).map(|j| dense[i][j] * pv[j]).sum::<f64>()).sum::<f64>();
        let (single, double) = (bl(spec.u()), bl(&pu));
        value_ok &= (single - bilinear_value(&spec, &tau, Sided::Single)).abs() <= 1e-9 * single.abs().max(1.0);
        value_ok &= (double - bilinear_value(&spec, &tau, Sided::Double)).abs() <= 1e-9 * double.abs().max(1.0);

        let m_factor = match spec.matrix() {
            Stochastic::Permutation(_) => 1.0,
            Stochastic::Dense(_) => (n * n) as f64,
        };
        for sided in [Sided::Single, Sided::Double] {
            for rep in tail_experiment(&spec, &gammas, sided, TAIL_TRIALS, SEED).unwrap() {
                let g = rep.gamma;
                let want = match sided {
                    Sided::Single => m_factor * (-g * g * c / 2.0).exp(),
                    Sided::Double => 15.0 * m_factor * (-g * g * c / 100.0).exp(),
                };
                formula_ok &= (rep.bound - want).abs() <= 1e-12 * want;
                let b = want.min(1.0);
                let slack = TAIL_SIGMAS * (b * (1.0 - b) / TAIL_TRIALS as f64).sqrt();
                if rep.empirical_freq > want + slack {
                    above.push(format!("{} {:?} gamma={}", entry.name, sided, g));
                }
                reports += 1;
            }
        }
    }
    // submatrix lemma
    let nsub = 64;
    let u: Vec<f64> = {
        let mut r = rng::master(SEED + 8);
        (0..nsub).map(|_| r.gen_range(0.5..=1.0)).collect()
    };
    let v = vec![1.0; nsub];
    let mut sub_reports = 0;
    let mut sub_above = 0;
    let mut sub_applicable = 0;
    for k in [8, 16, 32] {
        for rep in submatrix_experiment(&u, &v, k, &gammas, TAIL_TRIALS, SEED).unwrap() {
            sub_reports += 1;
            if rep.applicable {
                sub_applicable += 1;
                let e = rep.gamma * rep.gamma * rep.c_ratio * k as f64 / nsub as f64;
                let (ub, lb) = (2.0 * (-e / 8.0).exp(), 2.0 * (-e / 12.0).exp());
                let sl = |b: f64| TAIL_SIGMAS * (b.min(1.0) * (1.0 - b.min(1.0)) / TAIL_TRIALS as f64).sqrt();
                sub_above += usize::from(rep.upper_freq > ub + sl(ub) || rep.lower_freq > lb + sl(lb));
            }
        }
    }
    let t = start.elapsed();
    outcome(
        corpus.specs.len() >= 20 && min_c >= 4.0 && above.is_empty() && formula_ok && value_ok && sub_above == 0 && t < LIMIT_C8,
        format!(
            "{} specs (min C {min_c:.2}), {reports} reports at {TAIL_TRIALS} trials, {} above bound + {TAIL_SIGMAS} sigma {:?}; \
             submatrix {sub_reports} reports ({sub_applicable} with gamma < 1), {sub_above} above; {t:.1?} (limit {LIMIT_C8:?})",
            corpus.specs.len(),
            above.len(),
            above
        ),
    )
}

fn c9_coloring() -> Outcome {
    let mut cases = 0u64;
    let mut bad = 0u64;
    let mut no_witness = 0u64;
    for n in 0..=7usize {
        for pi in (0..n).permutations(n) {
            let sigma = Permutation::new(pi).unwrap();
            let col = balanced_3_coloring(&sigma);
            let moving: Vec<usize> = (0..n).filter(|&i| sigma.apply(i) != i).collect();
            let m = moving.len();
            let shape_ok = (0..n).all(|i| col.colors[i].is_none() == (sigma.apply(i) == i));
            let proper = moving.iter().all(|&i| col.colors[i].unwrap() < 3 && col.colors[i] != col.colors[sigma.apply(i)]);
            let counts: Vec<usize> = (0..3u8).map(|c| moving.iter().filter(|&&i| col.colors[i] == Some(c)).count()).collect();
            let balanced = counts.iter().all(|&c| m / 3 <= c && c <= m.div_ceil(3));
            bad += u64::from(!(shape_ok && proper && balanced));
            // brute force: some proper balanced coloring exists
            let exists = (0..3usize.pow(m as u32)).any(|code| {
                let mut c = vec![0u8; n];
                for (k, &i) in moving.iter().enumerate() {
                    c[i] = (code / 3usize.pow(k as u32) % 3) as u8;
                }
                let cnt: Vec<usize> = (0..3u8).map(|x| moving.iter().filter(|&&i| c[i] == x).count()).collect();
                moving.iter().all(|&i| c[i] != c[sigma.apply(i)]) && cnt.iter().all(|&x| m / 3 <= x && x <= m.div_ceil(3))
            });
            no_witness += u64::from(!exists);
            cases += 1;
        }
    }
    outcome(
        bad == 0 && no_witness == 0 && cases >= 5040,
        format!("{cases} permutations of size <= 7: {bad} improper or unbalanced, brute force found {no_witness} without any balanced coloring"),
    )
}

fn c10_weak_duality(s: &Schedule) -> Outcome {
    let latency = s.c() as u64 * (s.g() as u64 + 2) * (s.p() - 1);
    let theta = s.g() as u32 + 1;
    let reach = EdgeReach::new(s, theta, latency);
    let n = s.node_count();
    let results: Vec<(bool, bool, f64)> = (0..RANDOM_DEMANDS)
        .into_par_iter()
        .map(|i| {
            let sigma = Permutation::random(n, &mut rng::trial(SEED + 10, i));
            let rstar = max_feasible_rate(s, &sigma);
            // r* by scaling: loads are linear in the rate
            let scaled_ok = if i < 10 {
                let probe = Rate::new(1, 10).unwrap();
                let load = induced_load_oblivious::<BigRational>(s, &PermDemand::new(sigma.clone(), probe));
                let (_, m) = load.max_load().unwrap();
                rate_big(&probe) / m == rstar
            } else {
                true
            };
            match reach.bound(&sigma) {
                Some(dual) => (rstar <= dual && scaled_ok, scaled_ok, (&dual - &rstar).to_f64().unwrap()),
                None => (scaled_ok, scaled_ok, f64::INFINITY),
            }
        })
        .collect();
    let ok = results.iter().all(|r| r.0);
    let gap = results.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
    outcome(
        ok,
        format!(
            "{RANDOM_DEMANDS} demands, theta={theta}, L={latency}: r* <= dual everywhere (min gap {gap:.4}), scaling cross-check {}",
            if results.iter().all(|r| r.1) { "agrees" } else { "disagrees" }
        ),
    )
}

fn parse_rational(s: &str) -> (i64, i64) {
    match s.split_once('/') {
        Some((a, b)) => (a.parse().unwrap(), b.parse().unwrap()),
        None => (s.parse().unwrap(), 1),
    }
}

fn c11_curves() -> Outcome {
    let config = r#"{"n": 1e20, "points": 1000, "dual": []}"#;
    let out = run(Command::Curves, Some(config), Path::new("."), Some(SEED)).unwrap();
    let csv = out.file("curves.csv").unwrap();
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let (c_upp, c_low, c_obl, c_sem, c_vlb, c_r) =
        (col("L_upp"), col("L_low"), col("L_obl"), col("L_sem"), col("vlb_line"), col("r_exact"));
    let ln_n = 20.0 * 10f64.ln();
    let (mut rows, mut worst_rel, mut low_above, mut above_vlb, mut half_app, mut half_bad) = (0, 0.0f64, 0, 0, 0, 0);
    let mut min_r = f64::INFINITY;
    let mut max_r = 0.0f64;
    let mut first_low_above = None;
    let mut last_low_above = None;
    let mut last_vlb = None;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let (num, den) = parse_rational(f[c_r]);
        let inv = Rational64::new(den, num);
        let g = (inv - 1).floor().to_integer();
        let eps = (Rational64::from_integer(g + 1) - (inv - 1)).to_f64().unwrap();
        let h = (inv / 2).floor().to_integer();
        let eps_o = (Rational64::from_integer(h + 1) - inv / 2).to_f64().unwrap();
        let (gf, hf) = (g as f64, h as f64);
        let upp = (gf.ln() + ln_n / gf).exp();
        let low = gf * (((eps.ln() + ln_n) / gf).exp() + (ln_n / (gf + 1.0)).exp());
        let obl = eps_o * ((eps_o.ln() + ln_n) / hf).exp() + (ln_n / (hf + 1.0)).exp();
        let sem = eps * ((eps.ln() + ln_n) / gf).exp() + (ln_n / (gf + 1.0)).exp();
        let vlb = (hf.ln() + ln_n / hf).exp();
        let got: Vec<f64> = [c_upp, c_low, c_obl, c_sem, c_vlb].iter().map(|&i| f[i].parse().unwrap()).collect();
        for (x, y) in got.iter().zip([upp, low, obl, sem, vlb]) {
            worst_rel = worst_rel.max((x - y).abs() / y);
        }
        let r = num as f64 / den as f64;
        min_r = min_r.min(r);
        max_r = max_r.max(r);
        if low > upp {
            low_above += 1;
            first_low_above.get_or_insert(f[c_r].to_string());
            last_low_above = Some(f[c_r].to_string());
        }
        if upp > vlb || low > vlb {
            above_vlb += 1;
            last_vlb = Some(f[c_r].to_string());
        }
        if eps >= 2f64.powi(-(g as i32)) {
            half_app += 1;
            half_bad += usize::from(2.0 * low < upp);
        }
        rows += 1;
    }
    let recompute_ok = worst_rel <= CURVE_RTOL && rows > 0;
    let range_ok = min_r > 0.0 && max_r <= 0.5;
    let order_ok = low_above == 0 && above_vlb == 0;
    let half_ok = half_bad == 0 && half_app > 0;
    let v = |b: bool| if b { "PASS" } else { "FAIL" };
    outcome(
        recompute_ok && range_ok && order_ok && half_ok,
        format!(
            "{rows} grid points r in [{min_r}, {max_r}] at N=1e20; recompute {} (worst rel {worst_rel:.1e} vs {CURVE_RTOL:.0e}); \
             ordering {} (L_low > L_upp at {low_above} points, r from {} to {}; above vlb line at {above_vlb} points, up to r={}); \
             half bound {} ({half_app} applicable, {half_bad} violations)",
            v(recompute_ok),
            v(order_ok),
            first_low_above.unwrap_or_default(),
            last_low_above.unwrap_or_default(),
            last_vlb.unwrap_or_default(),
            v(half_ok)
        ),
    )
}

/// Independent recomputation of which prime lower bounds fail.
fn oracle_violations(r: Rate, p: u64, kind: ScheduleKind) -> Vec<Inequality> {
    let inv = Rational64::one() / *r.value();
    let g = (inv - 1).floor().to_integer();
    let eps_r = Rational64::from_integer(g + 1) - (inv - 1);
    let (gf, eps, pf) = (g as f64, eps_r.to_f64().unwrap(), p as f64);
    let ln_n = gf * pf.ln();
    let required_c = |gamma: f64| -> Option<f64> {
        (gamma > 0.0 && ln_n > 1.0).then(|| (ln_n.ln() / (gamma * gamma) * ln_n).ceil().max(1.0))
    };
    let c = match kind {
        ScheduleKind::Orn if g < 2 => Some(1.0),
        ScheduleKind::Orn => {
            let arg = (gf - eps - 2.0 / (pf - 2.0)) / (gf - 1.0);
            if p > 2 && arg > 0.0 { required_c(arg.ln()) } else { None }
        }
        ScheduleKind::Sorn => required_c(((gf + 2.0 - eps) / (gf + 1.0)).ln()),
    };
    let mut v = Vec::new();
    if !c.is_some_and(|c| pf > c * (gf + 1.0)) {
        v.push(Inequality::PhaseCount);
    }
    if !(pf > 2.0 + 2.0 / (1.0 - eps)) {
        v.push(Inequality::FirstLastHop);
    }
    if kind == ScheduleKind::Sorn {
        if !(pf > (gf + 3.0) / eps - 2.0) {
            v.push(Inequality::SornEdgeBlocks);
        }
        let delta = ((gf + 1.0) / (gf + 2.0 - eps)).powf(1.0 / gf);
        if !(pf > (2.0 - delta) / (1.0 - delta)) {
            v.push(Inequality::SornFailover);
        }
    }
    v
}

fn c12_gating() -> Outcome {
    let kinds = [ScheduleKind::Orn, ScheduleKind::Sorn];
    let mut eps_one = 0;
    let mut eps_bad = 0;
    for m in 2..=1000 {
        for kind in kinds {
            eps_one += 1;
            eps_bad += usize::from(derive_params(Rate::new(1, m).unwrap(), 101, kind) != Err(ParamError::EpsilonOne));
        }
    }
    let primes: Vec<u64> = (3..4000).filter(|&p| is_prime(p)).step_by(7).chain([5, 7, 11, 13, 10_007, 100_003]).collect();
    let (mut checked, mut rejected, mut accepted, mut mismatch, mut unnamed) = (0, 0, 0, 0, 0);
    for i in 1..=500 {
        let r = Rate::new(i, 1000).unwrap();
        if r.recip().unwrap().is_integer() {
            continue;
        }
        for &p in &primes {
            for kind in kinds {
                checked += 1;
                let want = oracle_violations(r, p, kind);
                match derive_params(r, p, kind) {
                    Ok(_) => {
                        accepted += 1;
                        mismatch += usize::from(!want.is_empty());
                    }
                    Err(e @ ParamError::PrimeTooSmall { .. }) => {
                        rejected += 1;
                        let ParamError::PrimeTooSmall { violated, .. } = &e else { unreachable!() };
                        mismatch += usize::from(*violated != want);
                        let msg = e.to_string();
                        unnamed += usize::from(!want.iter().all(|ineq| msg.contains(&ineq.to_string())));
                    }
                    Err(_) => mismatch += 1,
                }
            }
        }
    }
    outcome(
        eps_bad == 0 && mismatch == 0 && unnamed == 0,
        format!(
            "{eps_one} integer-1/r cases ({eps_bad} not EpsilonOne); {checked} (r,p,mode): {rejected} rejected, {accepted} accepted, \
             {mismatch} disagree with the oracle, {unnamed} messages missing an inequality"
        ),
    )
}

fn main() -> ExitCode {
    let orn = Schedule::orn(7, 2, 2).unwrap();
    let mut results: Vec<(u32, &str, Outcome, Duration)> = Vec::new();
    let mut timed = |id: u32, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let t = start.elapsed();
        println!("{} [{id:>2}] {name}: {} ({t:.1?})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((id, name, o, t));
    };
    timed(1, "constellations", &mut c1_constellations);
    let mut c4 = None;
    timed(2, "pseudo-path count bracket", &mut || {
        let (c2, c4o) = c2_c4_enumeration(&orn);
        c4 = Some(c4o);
        c2
    });
    timed(3, "deterministic hop bounds", &mut || c3_hop_bounds(&orn));
    timed(4, "ORN max latency", &mut || c4.take().unwrap());
    timed(5, "SORN failover feasibility", &mut c5_failover);
    timed(6, "counting lemma", &mut c6_counting);
    timed(7, "negative association", &mut c7_negative_association);
    timed(8, "tail-bound lab", &mut c8_tails);
    timed(9, "balanced 3-coloring", &mut c9_coloring);
    timed(10, "weak duality", &mut || c10_weak_duality(&orn));
    timed(11, "curve reproduction", &mut c11_curves);
    timed(12, "hypothesis gating", &mut c12_gating);

    let passed = results.iter().filter(|r| r.2.pass).count();
    println!("acceptance: {passed}/{} criteria PASS", results.len());
    let mut exit_ok = true;
    for (id, name, o, _) in &results {
        let known = KNOWN_UNATTAINABLE.contains(id);
        if !o.pass && known {
            println!("note: criterion {id} ({name}) is a known unattainable claim; it is reported as FAIL above");
        } else if o.pass && known {
            println!("error: criterion {id} ({name}) now passes; remove it from the known-unattainable list");
            exit_ok = false;
        } else if !o.pass {
            exit_ok = false;
        }
    }
    if exit_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
