use num_rational::Rational64;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::stats::{binomial_sigma, normal_halfwidth};
use super::ProbError;
use crate::perm::Permutation;
use crate::rng;
use crate::scalar::{real_from_rational, Real};

/// A doubly stochastic matrix: either a permutation or an explicit rational matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stochastic {
    Permutation(Permutation),
    Dense(Vec<Vec<Rational64>>),
}

impl Stochastic {
    pub fn dim(&self) -> usize {
        match self {
            Stochastic::Permutation(p) => p.len(),
            Stochastic::Dense(m) => m.len(),
        }
    }

    fn validate(&self) -> Result<(), ProbError> {
        let Stochastic::Dense(m) = self else { return Ok(()) };
        let n = m.len();
        if m.iter().any(|row| row.len() != n) {
            return Err(ProbError::Shape);
        }
        let one = Rational64::from_integer(1);
        let rows_ok = m.iter().all(|row| row.iter().all(|x| *x >= Rational64::zero()) && row.iter().sum::<Rational64>() == one);
        let cols_ok = (0..n).all(|j| m.iter().map(|row| row[j]).sum::<Rational64>() == one);
        if rows_ok && cols_ok {
            Ok(())
        } else {
            Err(ProbError::NotDoublyStochastic)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sided {
    /// `B(u, Pv)`.
    Single,
    /// `B(Pu, Pv)`.
    Double,
}

/// `B(x, y) = sum_{i != j} D_ij x_i y_j` together with the vectors `u, v`.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearSpec<F> {
    u: Vec<F>,
    v: Vec<F>,
    d: Stochastic,
    dense: Vec<Vec<F>>,
}

fn norms<F: Real>(w: &[F]) -> (F, F) {
    let l1 = w.iter().copied().sum::<F>();
    let linf = w.iter().copied().fold(F::zero(), F::max);
    (l1, linf)
}

impl<F: Real> BilinearSpec<F> {
    pub fn new(u: Vec<F>, v: Vec<F>, d: Stochastic) -> Result<Self, ProbError> {
        let n = d.dim();
        for w in [&u, &v] {
            let bad = w.len() != n || w.iter().any(|x| !(*x >= F::zero()) || !x.is_finite()) || w.iter().all(|x| x.is_zero());
            if bad {
                return Err(ProbError::BadVector(n));
            }
        }
        d.validate()?;
        let dense = match &d {
            Stochastic::Permutation(_) => Vec::new(),
            Stochastic::Dense(m) => m.iter().map(|row| row.iter().map(real_from_rational).collect()).collect(),
        };
        Ok(Self { u, v, d, dense })
    }

    pub fn n(&self) -> usize {
        self.u.len()
    }

    pub fn u(&self) -> &[F] {
        &self.u
    }

    pub fn v(&self) -> &[F] {
        &self.v
    }

    pub fn matrix(&self) -> &Stochastic {
        &self.d
    }

    /// `(|u|_1/|u|_inf)(|v|_1/|v|_inf)/N`.
    pub fn c_ratio(&self) -> F {
        let (u1, ui) = norms(&self.u);
        let (v1, vi) = norms(&self.v);
        u1 / ui * (v1 / vi) / F::from_usize(self.n()).expect("size fits")
    }

    /// `1` for a permutation matrix, `N^2` otherwise.
    pub fn m_factor(&self) -> F {
        match self.d {
            Stochastic::Permutation(_) => F::one(),
            Stochastic::Dense(_) => F::from_usize(self.n() * self.n()).expect("size fits"),
        }
    }

    /// `e^gamma |u|_1 |v|_1 / N`.
    pub fn threshold(&self, gamma: F) -> F {
        gamma.exp() * norms(&self.u).0 * norms(&self.v).0 / F::from_usize(self.n()).expect("size fits")
    }

    /// The tail bound for `Pr(B >= threshold)`.
    pub fn bound(&self, gamma: F, sided: Sided) -> F {
        let c = self.c_ratio();
        match sided {
            Sided::Single => self.m_factor() * (-gamma * gamma * c / F::lit(2.0)).exp(),
            Sided::Double => F::lit(15.0) * self.m_factor() * (-gamma * gamma * c / F::lit(100.0)).exp(),
        }
    }

    /// SHA-256 over the canonical JSON of `(u, v, D)`.
    pub fn digest(&self) -> String {
        let as64 = |w: &[F]| w.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect::<Vec<f64>>();
        let json = serde_json::to_vec(&(as64(&self.u), as64(&self.v), &self.d)).expect("serializable");
        hex(&Sha256::digest(json))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Evaluates `B(u, Pv)` or `B(Pu, Pv)` where `(Pw)_i = w[tau(i)]`.
pub fn bilinear_value<F: Real>(spec: &BilinearSpec<F>, tau: &Permutation, sided: Sided) -> F {
    let x = |i: usize| match sided {
        Sided::Single => spec.u[i],
        Sided::Double => spec.u[tau.apply(i)],
    };
    let y = |j: usize| spec.v[tau.apply(j)];
    match &spec.d {
        Stochastic::Permutation(sigma) => (0..spec.n())
            .filter(|&i| sigma.apply(i) != i)
            .map(|i| x(i) * y(sigma.apply(i)))
            .sum(),
        Stochastic::Dense(_) => {
            let n = spec.n();
            let ys: Vec<F> = (0..n).map(y).collect();
            (0..n)
                .map(|i| {
                    let row = &spec.dense[i];
                    let inner: F = (0..n).filter(|&j| j != i).map(|j| row[j] * ys[j]).sum();
                    x(i) * inner
                })
                .sum()
        }
    }
}

/// Result of one tail experiment, serialized as a JSON record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub spec_digest: String,
    pub sided: Sided,
    pub gamma: f64,
    pub trials: u64,
    pub seed: u64,
    pub c_ratio: f64,
    pub threshold: f64,
    pub hits: u64,
    pub empirical_freq: f64,
    pub ci_halfwidth: f64,
    pub bound: f64,
    /// Three binomial standard deviations at the bound.
    pub slack: f64,
}

impl TailReport {
    pub fn within_bound(&self) -> bool {
        self.empirical_freq <= self.bound + self.slack
    }
}

fn sample_values<F: Real>(spec: &BilinearSpec<F>, sided: Sided, trials: u64, seed: u64) -> Vec<F> {
    (0..trials)
        .into_par_iter()
        .map(|t| bilinear_value(spec, &Permutation::random(spec.n(), &mut rng::trial(seed, t)), sided))
        .collect()
}

/// Frequency of `B >= e^gamma |u|_1 |v|_1 / N` over uniform permutations, for each `gamma`.
/// One sample of permutations is shared by all `gammas`.
pub fn tail_experiment<F: Real>(
    spec: &BilinearSpec<F>,
    gammas: &[F],
    sided: Sided,
    trials: u64,
    seed: u64,
) -> Result<Vec<TailReport>, ProbError> {
    let c = spec.c_ratio();
    if c < F::one() {
        return Err(ProbError::HypothesisViolated(c.to_f64().unwrap_or(f64::NAN)));
    }
    if trials == 0 {
        return Err(ProbError::NoTrials);
    }
    let values = sample_values(spec, sided, trials, seed);
    let digest = spec.digest();
    Ok(gammas
        .iter()
        .map(|&gamma| {
            let threshold = spec.threshold(gamma);
            let hits = values.iter().filter(|&&b| b >= threshold).count() as u64;
            let freq = hits as f64 / trials as f64;
            let bound = spec.bound(gamma, sided).to_f64().unwrap_or(f64::INFINITY);
            TailReport {
                spec_digest: digest.clone(),
                sided,
                gamma: gamma.to_f64().unwrap_or(f64::NAN),
                trials,
                seed,
                c_ratio: c.to_f64().unwrap_or(f64::NAN),
                threshold: threshold.to_f64().unwrap_or(f64::NAN),
                hits,
                empirical_freq: freq,
                ci_halfwidth: normal_halfwidth((freq * (1.0 - freq)).sqrt(), trials),
                bound,
                slack: 3.0 * binomial_sigma(bound, trials),
            }
        })
        .collect())
}

/// Declarative vector for corpus files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VectorDef {
    Ones,
    Basis { index: usize },
    /// `high` on the first `high_count` coordinates, `low` elsewhere.
    TwoLevel { low: f64, high: f64, high_count: usize },
    Uniform { low: f64, high: f64, seed: u64 },
    Explicit { values: Vec<f64> },
}

impl VectorDef {
    pub fn build<F: Real>(&self, n: usize) -> Vec<F> {
        let raw: Vec<f64> = match self {
            VectorDef::Ones => vec![1.0; n],
            VectorDef::Basis { index } => (0..n).map(|i| f64::from(u8::from(i == *index))).collect(),
            VectorDef::TwoLevel { low, high, high_count } => {
                (0..n).map(|i| if i < *high_count { *high } else { *low }).collect()
            }
            VectorDef::Uniform { low, high, seed } => {
                let mut r = rng::master(*seed);
                (0..n).map(|_| r.gen_range(*low..=*high)).collect()
            }
            VectorDef::Explicit { values } => values.clone(),
        };
        raw.into_iter().map(F::lit).collect()
    }
}

/// Declarative doubly stochastic matrix for corpus files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MatrixDef {
    /// `i -> i + k mod N`.
    Shift { k: usize },
    RandomPerm { seed: u64 },
    /// Uniform random permutation without fixed points, by rejection.
    Derangement { seed: u64 },
    Explicit { map: Vec<usize> },
    /// Every entry `1/N`.
    Uniform,
    /// Average of two random permutation matrices.
    PermMix { seed: u64 },
}

impl MatrixDef {
    pub fn build(&self, n: usize) -> Result<Stochastic, ProbError> {
        let perm = |map: Vec<usize>| Permutation::new(map).map_err(|_| ProbError::Shape);
        Ok(match self {
            MatrixDef::Shift { k } => Stochastic::Permutation(perm((0..n).map(|i| (i + k) % n).collect())?),
            MatrixDef::RandomPerm { seed } => Stochastic::Permutation(Permutation::random(n, &mut rng::master(*seed))),
            MatrixDef::Derangement { seed } => {
                let mut r = rng::master(*seed);
                let mut map: Vec<usize> = (0..n).collect();
                loop {
                    map.shuffle(&mut r);
                    if n < 2 || map.iter().enumerate().all(|(i, &x)| i != x) {
                        break;
                    }
                }
                Stochastic::Permutation(perm(map)?)
            }
            MatrixDef::Explicit { map } => Stochastic::Permutation(perm(map.clone())?),
            MatrixDef::Uniform => Stochastic::Dense(vec![vec![Rational64::new(1, n as i64); n]; n]),
            MatrixDef::PermMix { seed } => {
                let mut r = rng::master(*seed);
                let (a, b) = (Permutation::random(n, &mut r), Permutation::random(n, &mut r));
                let mut m = vec![vec![Rational64::zero(); n]; n];
                for i in 0..n {
                    m[i][a.apply(i)] += Rational64::new(1, 2);
                    m[i][b.apply(i)] += Rational64::new(1, 2);
                }
                Stochastic::Dense(m)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub name: String,
    pub n: usize,
    pub u: VectorDef,
    pub v: VectorDef,
    pub d: MatrixDef,
}

impl CorpusEntry {
    pub fn build<F: Real>(&self) -> Result<BilinearSpec<F>, ProbError> {
        BilinearSpec::new(self.u.build(self.n), self.v.build(self.n), self.d.build(self.n)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCorpus {
    pub specs: Vec<CorpusEntry>,
}

/// Twenty-four specs, all with `C ratio >= 4`.
pub fn default_corpus() -> TailCorpus {
    let mut specs = Vec::new();
    let mut push = |name: String, n, u, v, d| specs.push(CorpusEntry { name, n, u, v, d });
    for (i, n) in [16usize, 32, 64, 128].into_iter().enumerate() {
        let s = 100 + i as u64;
        push(format!("ones-derangement-{n}"), n, VectorDef::Ones, VectorDef::Ones, MatrixDef::Derangement { seed: s });
        push(
            format!("two-level-shift-{n}"),
            n,
            VectorDef::TwoLevel { low: 1.0, high: 2.0, high_count: n / 4 },
            VectorDef::TwoLevel { low: 0.5, high: 1.0, high_count: n / 2 },
            MatrixDef::Shift { k: 1 },
        );
        push(
            format!("uniform-random-perm-{n}"),
            n,
            VectorDef::Uniform { low: 0.2, high: 1.0, seed: s },
            VectorDef::Uniform { low: 0.2, high: 1.0, seed: s + 50 },
            MatrixDef::RandomPerm { seed: s },
        );
        push(
            format!("sparse-heavy-{n}"),
            n,
            VectorDef::TwoLevel { low: 0.25, high: 1.0, high_count: n / 4 },
            VectorDef::Uniform { low: 0.5, high: 1.0, seed: s + 7 },
            MatrixDef::Derangement { seed: s + 7 },
        );
    }
    for n in [12usize, 16, 24, 32] {
        push(
            format!("uniform-dense-{n}"),
            n,
            VectorDef::Uniform { low: 0.3, high: 1.0, seed: n as u64 },
            VectorDef::Ones,
            MatrixDef::Uniform,
        );
        push(
            format!("perm-mix-{n}"),
            n,
            VectorDef::TwoLevel { low: 0.5, high: 1.0, high_count: n / 3 },
            VectorDef::Uniform { low: 0.25, high: 1.0, seed: n as u64 + 1 },
            MatrixDef::PermMix { seed: n as u64 },
        );
    }
    TailCorpus { specs }
}
