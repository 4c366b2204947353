use num_bigint::{BigInt, BigUint};
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use super::ParamError;
use crate::perm::Permutation;
use crate::prob::normal_halfwidth;
use crate::rng;
use crate::routing::Rate;
use crate::scalar::{real_from_rational, Real};
use crate::schedule::Schedule;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountingBound {
    /// `2 binomial(L, h)`
    pub value: BigUint,
    /// The bound is only claimed for `h <= L/3`.
    pub asserted: bool,
}

pub fn counting_bound(l: u64, h: u64) -> CountingBound {
    let value = if h > l { BigUint::from(0u8) } else { binomial(BigUint::from(l), BigUint::from(h)) * 2u8 };
    CountingBound { value, asserted: 3 * h <= l }
}

const INF: u8 = u8::MAX;

/// For every physical edge `e = (x, k)` of one period and every pair `(u, w)`, the
/// fewest physical hops of a path `u -> x`, `e`, `y -> w` that fits in `latency`
/// timesteps, counting the hops other than `e`. Independent of the demand.
#[derive(Debug, Clone)]
pub struct EdgeReach {
    n: usize,
    period: u64,
    theta: u32,
    /// `[edge][u][w]`
    pair_hops: Vec<u8>,
}

impl EdgeReach {
    pub fn new(sched: &Schedule, theta: u32, latency: u64) -> Self {
        assert!(theta >= 1 && theta < u32::from(INF), "theta out of range");
        let n = sched.node_count();
        let period = sched.period();
        let cap = (theta - 1) as u8;
        let l = latency as usize;
        let pair_hops: Vec<u8> = (0..period as usize * n)
            .into_par_iter()
            .flat_map_iter(|e| {
                let (k, x) = ((e / n) as u64, e % n);
                let y = sched.permute(k, x);
                let clamp = |v: u8| if v > cap { INF } else { v };
                // back[s][u]: hops from (u, k - s) to (x, k)
                let mut back = vec![vec![INF; n]; l.max(1)];
                if l > 0 {
                    back[0][x] = 0;
                }
                for s in 1..l {
                    let t = (k as i64 - s as i64).rem_euclid(period as i64) as u64;
                    let (prev, cur) = back.split_at_mut(s);
                    let prev = &prev[s - 1];
                    for u in 0..n {
                        let via = prev[sched.permute(t, u)].saturating_add(1);
                        cur[0][u] = clamp(prev[u].min(via));
                    }
                }
                // fwd[s][w]: hops from (y, k + 1) to (w, k + 1 + s)
                let mut fwd = vec![vec![INF; n]; l.max(1)];
                if l > 0 {
                    fwd[0][y] = 0;
                }
                for s in 1..l {
                    let t = (k + s as u64) % period;
                    let (prev, cur) = fwd.split_at_mut(s);
                    let prev = &prev[s - 1];
                    let cur = &mut cur[0];
                    cur.copy_from_slice(prev);
                    for w in 0..n {
                        if prev[w] < cap {
                            let to = sched.permute(t, w);
                            cur[to] = cur[to].min(prev[w] + 1);
                        }
                    }
                }
                // before-hops at offset s pair with after-hops at L - 1 - s
                let mut pair = vec![INF; n * n];
                for s in 0..l {
                    let (b, f) = (&back[s], &fwd[l - 1 - s]);
                    for u in 0..n {
                        if b[u] == INF {
                            continue;
                        }
                        for w in 0..n {
                            if f[w] != INF {
                                let v = b[u] + f[w];
                                let slot = &mut pair[u * n + w];
                                if v <= cap && v < *slot {
                                    *slot = v;
                                }
                            }
                        }
                    }
                }
                pair
            })
            .collect();
        Self { n, period, theta, pair_hops }
    }

    pub fn theta(&self) -> u32 {
        self.theta
    }

    /// Whether edge `k n + tail` lies on a short path between some `u -> sigma(u)`.
    pub fn matched(&self, edge: usize, sigma: &Permutation) -> bool {
        let base = edge * self.n * self.n;
        (0..self.n).any(|u| {
            let w = sigma.apply(u);
            u != w && self.pair_hops[base + u * self.n + w] != INF
        })
    }

    /// `sum_e beta_e / sum_(a,t) alpha_(a,t)` with `beta = theta+1` on matched edges,
    /// `1` elsewhere, and `alpha = theta+1` for every non-fixed source. `None` for
    /// the identity demand.
    pub fn bound(&self, sigma: &Permutation) -> Option<BigRational> {
        let edges = self.n * self.period as usize;
        let matched = (0..edges).filter(|&e| self.matched(e, sigma)).count() as u64;
        let t1 = u64::from(self.theta) + 1;
        let beta = matched * t1 + (edges as u64 - matched);
        let moving = (self.n - sigma.fixed_points()) as u64;
        (moving > 0).then(|| BigRational::new(BigInt::from(beta), BigInt::from(moving * self.period * t1)))
    }
}

/// Upper bound on the throughput any routing with latency at most `latency` can
/// give the demand `sigma`, from the constructed dual solution.
pub fn dual_throughput_bound(sched: &Schedule, sigma: &Permutation, theta: u32, latency: u64) -> Option<BigRational> {
    EdgeReach::new(sched, theta, latency).bound(sigma)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualEstimate {
    pub mean: f64,
    pub half_width: f64,
    /// `(1 + 4 theta / N binomial(2L, theta-1)) / (theta+1)`
    pub closed_form: f64,
    pub trials: u64,
    pub seed: u64,
    pub theta: u32,
    pub latency: u64,
}

/// Monte Carlo mean of the dual bound over uniform permutations.
pub fn expected_dual_bound(sched: &Schedule, theta: u32, latency: u64, trials: u64, seed: u64) -> DualEstimate {
    let reach = EdgeReach::new(sched, theta, latency);
    let n = sched.node_count();
    let values: Vec<f64> = (0..trials)
        .into_par_iter()
        .filter_map(|t| {
            let sigma = Permutation::random(n, &mut rng::trial(seed, t));
            reach.bound(&sigma).and_then(|b| b.to_f64())
        })
        .collect();
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let sd = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    } else {
        0.0
    };
    let binom = binomial(BigUint::from(2 * latency), BigUint::from(theta - 1)).to_f64().unwrap_or(f64::INFINITY);
    let closed_form = (1.0 + 4.0 * f64::from(theta) / n as f64 * binom) / (f64::from(theta) + 1.0);
    DualEstimate {
        mean,
        half_width: normal_halfwidth(sd, values.len().max(1) as u64),
        closed_form,
        trials,
        seed,
        theta,
        latency,
    }
}

/// `(theta-1)/(2e) N^(1/(theta-1)) (((N^d - 1)/N^d r - 1/(theta+1)) sqrt(2 pi (theta-1)) / (4 theta))^(1/(theta-1))`
/// with `theta = floor(1/r)`; zero when the inner factor is not positive.
pub fn maxlat_lowerbound<F: Real>(r: Rate, n: F, d: F) -> Result<F, ParamError> {
    let inv = r.recip().ok_or(ParamError::InvalidRate)?;
    if inv.is_integer() {
        return Err(ParamError::EpsilonOne);
    }
    if !(n > F::one()) {
        return Err(ParamError::SizeTooSmall);
    }
    let theta = F::from_i64(inv.floor().to_integer()).expect("small integer");
    let tm1 = theta - F::one();
    let rf: F = real_from_rational(r.value());
    let keep = F::one() - (-d * n.ln()).exp();
    let inner = (keep * rf - (theta + F::one()).recip()) * (F::lit(2.0) * F::PI() * tm1).sqrt() / (F::lit(4.0) * theta);
    if !(inner > F::zero()) {
        return Ok(F::zero());
    }
    Ok(tm1 / (F::lit(2.0) * F::E()) * n.powf(tm1.recip()) * inner.powf(tm1.recip()))
}
