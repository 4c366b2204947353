use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::binomial_sigma;
use super::ProbError;
use crate::rng;
use crate::scalar::Real;

fn check<F: Real>(u: &[F], v: &[F], k: usize) -> Result<(), ProbError> {
    let n = u.len();
    let bad = |w: &[F]| w.len() != n || w.iter().any(|x| !(*x >= F::zero())) || w.iter().all(|x| x.is_zero());
    if bad(u) || bad(v) {
        return Err(ProbError::BadVector(n));
    }
    if 2 * k > n {
        return Err(ProbError::KTooLarge { k, n });
    }
    Ok(())
}

/// `sum_{i in Q} sum_{j in R} u_i v_j` for a uniform ordered pair of disjoint `K`-subsets.
pub fn submatrix_sample<F: Real, R: Rng + ?Sized>(u: &[F], v: &[F], k: usize, rng: &mut R) -> Result<F, ProbError> {
    check(u, v, k)?;
    Ok(draw(u, v, k, rng))
}

fn draw<F: Real, R: Rng + ?Sized>(u: &[F], v: &[F], k: usize, rng: &mut R) -> F {
    let picked = sample(rng, u.len(), 2 * k).into_vec();
    let (q, r) = picked.split_at(k);
    let su: F = q.iter().map(|&i| u[i]).sum();
    let sv: F = r.iter().map(|&j| v[j]).sum();
    su * sv
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmatrixReport {
    pub gamma: f64,
    pub k: usize,
    pub trials: u64,
    pub seed: u64,
    pub c_ratio: f64,
    /// The bounds are only claimed for `0 < gamma < 1`.
    pub applicable: bool,
    pub upper_freq: f64,
    pub upper_bound: f64,
    pub lower_freq: f64,
    pub lower_bound: f64,
    pub upper_slack: f64,
    pub lower_slack: f64,
}

impl SubmatrixReport {
    pub fn within_bound(&self) -> bool {
        !self.applicable
            || (self.upper_freq <= self.upper_bound + self.upper_slack
                && self.lower_freq <= self.lower_bound + self.lower_slack)
    }
}

/// Upper and lower tail frequencies around `(K/N)^2 |u|_1 |v|_1` with bounds
/// `2 e^(-g^2 C K / 8N)` and `2 e^(-g^2 C K / 12N)`.
pub fn submatrix_experiment<F: Real>(
    u: &[F],
    v: &[F],
    k: usize,
    gammas: &[F],
    trials: u64,
    seed: u64,
) -> Result<Vec<SubmatrixReport>, ProbError> {
    check(u, v, k)?;
    if trials == 0 {
        return Err(ProbError::NoTrials);
    }
    let n = F::from_usize(u.len()).expect("size fits");
    let kf = F::from_usize(k).expect("size fits");
    let norm = |w: &[F]| (w.iter().copied().sum::<F>(), w.iter().copied().fold(F::zero(), F::max));
    let ((u1, ui), (v1, vi)) = (norm(u), norm(v));
    let c = u1 / ui * (v1 / vi) / n;
    if c < F::one() {
        return Err(ProbError::HypothesisViolated(c.to_f64().unwrap_or(f64::NAN)));
    }
    let values: Vec<F> = (0..trials).into_par_iter().map(|t| draw(u, v, k, &mut rng::trial(seed, t))).collect();
    let mean = kf * kf / (n * n) * u1 * v1;
    let f64of = |x: F| x.to_f64().unwrap_or(f64::NAN);
    Ok(gammas
        .iter()
        .map(|&g| {
            let hi = g.exp() * mean;
            let lo = (-g).exp() * mean;
            let up = values.iter().filter(|&&x| x >= hi).count() as f64 / trials as f64;
            let down = values.iter().filter(|&&x| x <= lo).count() as f64 / trials as f64;
            let e = g * g * c * kf / n;
            let ub = f64of(F::lit(2.0) * (-e / F::lit(8.0)).exp());
            let lb = f64of(F::lit(2.0) * (-e / F::lit(12.0)).exp());
            SubmatrixReport {
                gamma: f64of(g),
                k,
                trials,
                seed,
                c_ratio: f64of(c),
                applicable: g > F::zero() && g < F::one(),
                upper_freq: up,
                upper_bound: ub,
                lower_freq: down,
                lower_bound: lb,
                upper_slack: 3.0 * binomial_sigma(ub, trials),
                lower_slack: 3.0 * binomial_sigma(lb, trials),
            }
        })
        .collect())
}
