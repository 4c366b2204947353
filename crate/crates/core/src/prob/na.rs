use std::cmp::Ordering;
use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::normal_halfwidth;
use super::ProbError;
use crate::perm::Permutation;
use crate::rng;

/// Matrix entries usable both exactly and in floating point.
pub trait Entry: Clone + PartialOrd + Debug + Zero + Send + Sync {
    fn to_big(&self) -> BigRational;
    fn to_f64(&self) -> f64;
}

impl Entry for Rational64 {
    fn to_big(&self) -> BigRational {
        crate::scalar::big(self)
    }
    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

impl Entry for BigRational {
    fn to_big(&self) -> BigRational {
        self.clone()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

impl Entry for i64 {
    fn to_big(&self) -> BigRational {
        BigRational::from_integer(BigInt::from(*self))
    }
    fn to_f64(&self) -> f64 {
        *self as f64
    }
}

impl Entry for f64 {
    /// Exact binary value of the float.
    fn to_big(&self) -> BigRational {
        BigRational::from_float(*self).expect("finite entry")
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

/// Non-negative matrix whose rows are all sorted by one common column order.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistentMatrix<T> {
    entries: Vec<Vec<T>>,
    witness: Vec<usize>,
}

impl<T: Entry> ConsistentMatrix<T> {
    pub fn new(entries: Vec<Vec<T>>) -> Result<Self, ProbError> {
        let m = entries.first().map_or(0, Vec::len);
        if entries.iter().any(|row| row.len() != m) {
            return Err(ProbError::Shape);
        }
        for (row, r) in entries.iter().enumerate() {
            if let Some(col) = r.iter().position(|x| *x < T::zero()) {
                return Err(ProbError::NegativeEntry { row, col });
            }
        }
        // Consistent columns form a chain in the product order, so a
        // lexicographic sort recovers an ordering whenever one exists.
        let mut witness: Vec<usize> = (0..m).collect();
        witness.sort_by(|&a, &b| {
            entries
                .iter()
                .map(|row| row[a].partial_cmp(&row[b]).unwrap_or(Ordering::Equal))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        });
        let sorted = entries.iter().all(|row| witness.windows(2).all(|w| row[w[0]] <= row[w[1]]));
        if !sorted {
            return Err(ProbError::NotConsistent);
        }
        Ok(Self { entries, witness })
    }

    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.witness.len()
    }

    pub fn entries(&self) -> &[Vec<T>] {
        &self.entries
    }

    /// Column order under which every row is non-decreasing.
    pub fn witness(&self) -> &[usize] {
        &self.witness
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.entries[i][j]
    }

    fn require_square(&self) -> Result<(), ProbError> {
        if self.rows() == self.cols() {
            Ok(())
        } else {
            Err(ProbError::Shape)
        }
    }

    /// `X_i = A[i, pi(i)]`.
    pub fn realize(&self, pi: &Permutation) -> Vec<T> {
        (0..self.rows()).map(|i| self.entries[i][pi.apply(i)].clone()).collect()
    }
}

/// Draws `X_i = A[i, pi(i)]` for a uniform permutation `pi`.
pub fn sample_na<T: Entry, R: Rng + ?Sized>(a: &ConsistentMatrix<T>, rng: &mut R) -> Result<Vec<T>, ProbError> {
    a.require_square()?;
    Ok(a.realize(&Permutation::random(a.rows(), rng)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonotoneKind<T> {
    Constant(T),
    /// `sum_i min(X_i, cap_i)`.
    ThresholdSum { indices: Vec<usize>, caps: Vec<T> },
    /// Indicator that `X_i >= threshold_i` for every listed index.
    Step { indices: Vec<usize>, thresholds: Vec<T> },
    /// Value of the last step whose threshold is `<= X_index`, or `base`.
    Piecewise { index: usize, base: T, steps: Vec<(T, T)> },
}

/// A monotone test function; decreasing ones are negated increasing ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneFn<T> {
    pub kind: MonotoneKind<T>,
    pub direction: Direction,
}

impl<T: Entry> MonotoneFn<T> {
    pub fn constant(c: T) -> Self {
        Self { kind: MonotoneKind::Constant(c), direction: Direction::Increasing }
    }

    pub fn threshold_sum(indices: Vec<usize>, caps: Vec<T>) -> Self {
        Self { kind: MonotoneKind::ThresholdSum { indices, caps }, direction: Direction::Increasing }
    }

    pub fn step(indices: Vec<usize>, thresholds: Vec<T>) -> Self {
        Self { kind: MonotoneKind::Step { indices, thresholds }, direction: Direction::Increasing }
    }

    pub fn piecewise(index: usize, base: T, steps: Vec<(T, T)>) -> Self {
        Self { kind: MonotoneKind::Piecewise { index, base, steps }, direction: Direction::Increasing }
    }

    pub fn decreasing(mut self) -> Self {
        self.direction = Direction::Decreasing;
        self
    }

    pub fn indices(&self) -> Vec<usize> {
        match &self.kind {
            MonotoneKind::Constant(_) => Vec::new(),
            MonotoneKind::ThresholdSum { indices, .. } | MonotoneKind::Step { indices, .. } => indices.clone(),
            MonotoneKind::Piecewise { index, .. } => vec![*index],
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, MonotoneKind::Constant(_))
    }

    pub fn validate(&self, dim: usize) -> Result<(), ProbError> {
        if let Some(&index) = self.indices().iter().find(|&&i| i >= dim) {
            return Err(ProbError::IndexRange { index, dim });
        }
        match &self.kind {
            MonotoneKind::ThresholdSum { indices, caps: params } | MonotoneKind::Step { indices, thresholds: params } => {
                if indices.len() != params.len() {
                    return Err(ProbError::NotMonotone(format!(
                        "{} indices but {} parameters",
                        indices.len(),
                        params.len()
                    )));
                }
            }
            MonotoneKind::Piecewise { base, steps, .. } => {
                let mut prev = base;
                for (i, (t, v)) in steps.iter().enumerate() {
                    if i > 0 && steps[i - 1].0 >= *t {
                        return Err(ProbError::NotMonotone(format!("step thresholds not increasing at {i}")));
                    }
                    if v < prev {
                        return Err(ProbError::NotMonotone(format!("value decreases at step {i}")));
                    }
                    prev = v;
                }
            }
            MonotoneKind::Constant(_) => {}
        }
        Ok(())
    }

    fn raw_big(&self, x: &[T]) -> BigRational {
        match &self.kind {
            MonotoneKind::Constant(c) => c.to_big(),
            MonotoneKind::ThresholdSum { indices, caps } => indices
                .iter()
                .zip(caps)
                .map(|(&i, c)| if x[i] < *c { x[i].to_big() } else { c.to_big() })
                .fold(BigRational::zero(), |acc, y| acc + y),
            MonotoneKind::Step { indices, thresholds } => {
                let hit = indices.iter().zip(thresholds).all(|(&i, t)| x[i] >= *t);
                BigRational::from_integer(BigInt::from(u8::from(hit)))
            }
            MonotoneKind::Piecewise { index, base, steps } => {
                steps.iter().rev().find(|(t, _)| x[*index] >= *t).map_or(base, |(_, v)| v).to_big()
            }
        }
    }

    fn raw_f64(&self, x: &[T]) -> f64 {
        match &self.kind {
            MonotoneKind::Constant(c) => c.to_f64(),
            MonotoneKind::ThresholdSum { indices, caps } => {
                indices.iter().zip(caps).map(|(&i, c)| x[i].to_f64().min(c.to_f64())).sum()
            }
            MonotoneKind::Step { indices, thresholds } => {
                f64::from(u8::from(indices.iter().zip(thresholds).all(|(&i, t)| x[i] >= *t)))
            }
            MonotoneKind::Piecewise { index, base, steps } => {
                steps.iter().rev().find(|(t, _)| x[*index] >= *t).map_or(base, |(_, v)| v).to_f64()
            }
        }
    }

    pub fn eval_exact(&self, x: &[T]) -> BigRational {
        let y = self.raw_big(x);
        match self.direction {
            Direction::Increasing => y,
            Direction::Decreasing => -y,
        }
    }

    pub fn eval_f64(&self, x: &[T]) -> f64 {
        let y = self.raw_f64(x);
        match self.direction {
            Direction::Increasing => y,
            Direction::Decreasing => -y,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovMode {
    /// Enumerates all `n!` permutations; `n <= 8`.
    Exact,
    MonteCarlo { trials: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Covariance {
    Exact(BigRational),
    Estimate { value: f64, half_width: f64, trials: u64 },
}

impl Covariance {
    pub fn value_f64(&self) -> f64 {
        match self {
            Covariance::Exact(c) => Entry::to_f64(c),
            Covariance::Estimate { value, .. } => *value,
        }
    }

    /// Whether the covariance is non-positive (for estimates, up to the half-width).
    pub fn is_nonpositive(&self) -> bool {
        match self {
            Covariance::Exact(c) => !c.is_positive(),
            Covariance::Estimate { value, half_width, .. } => *value <= *half_width,
        }
    }
}

pub const MAX_EXACT_N: usize = 8;

/// `Cov(f(X), g(X))` for `X_i = A[i, pi(i)]` with `pi` uniform.
pub fn covariance_oracle<T: Entry>(
    a: &ConsistentMatrix<T>,
    f: &MonotoneFn<T>,
    g: &MonotoneFn<T>,
    mode: CovMode,
) -> Result<Covariance, ProbError> {
    a.require_square()?;
    let n = a.rows();
    f.validate(n)?;
    g.validate(n)?;
    let fi = f.indices();
    if let Some(&i) = g.indices().iter().find(|i| fi.contains(i)) {
        return Err(ProbError::IndexOverlap(i));
    }
    if !f.is_constant() && !g.is_constant() && f.direction != g.direction {
        return Err(ProbError::DirectionMismatch);
    }
    match mode {
        CovMode::Exact => {
            if n > MAX_EXACT_N {
                return Err(ProbError::TooLarge { n, max: MAX_EXACT_N });
            }
            let (mut sf, mut sg, mut sfg) = (BigRational::zero(), BigRational::zero(), BigRational::zero());
            let mut count = 0u64;
            for pi in Permutation::all(n) {
                let x = a.realize(&pi);
                let (fx, gx) = (f.eval_exact(&x), g.eval_exact(&x));
                sfg += &fx * &gx;
                sf += fx;
                sg += gx;
                count += 1;
            }
            let m = BigRational::from_integer(BigInt::from(count));
            Ok(Covariance::Exact((&m * sfg - sf * sg) / (&m * &m)))
        }
        CovMode::MonteCarlo { trials, seed } => {
            if trials < 2 {
                return Err(ProbError::NoTrials);
            }
            let pairs: Vec<(f64, f64)> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let x = a.realize(&Permutation::random(n, &mut rng::trial(seed, t)));
                    (f.eval_f64(&x), g.eval_f64(&x))
                })
                .collect();
            let k = trials as f64;
            let mf = pairs.iter().map(|p| p.0).sum::<f64>() / k;
            let mg = pairs.iter().map(|p| p.1).sum::<f64>() / k;
            let prods: Vec<f64> = pairs.iter().map(|(x, y)| (x - mf) * (y - mg)).collect();
            let value = prods.iter().sum::<f64>() / (k - 1.0);
            let var = prods.iter().map(|z| (z - value).powi(2)).sum::<f64>() / (k - 1.0);
            Ok(Covariance::Estimate { value, half_width: normal_halfwidth(var.sqrt(), trials), trials })
        }
    }
}

/// Exact moments of the double-sided variables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Moments {
    pub e_xy: BigRational,
    pub e_x: BigRational,
    pub e_y: BigRational,
}

impl Moments {
    pub fn covariance(&self) -> BigRational {
        &self.e_xy - &self.e_x * &self.e_y
    }
}

/// Moments of `X_i, X_j` where `X_k = u[tau(k)] v[tau(sigma(k))] / (|u|_inf |v|_inf)`
/// and `tau` is uniform over all permutations.
pub fn double_sided_moments<T: Entry>(
    u: &[T],
    v: &[T],
    sigma: &Permutation,
    i: usize,
    j: usize,
) -> Result<Moments, ProbError> {
    let n = u.len();
    if v.len() != n || sigma.len() != n || i >= n || j >= n {
        return Err(ProbError::Shape);
    }
    if n > MAX_EXACT_N {
        return Err(ProbError::TooLarge { n, max: MAX_EXACT_N });
    }
    let max = |w: &[T]| w.iter().map(Entry::to_big).max().unwrap_or_else(BigRational::zero);
    let scale = max(u) * max(v);
    if scale.is_zero() {
        return Err(ProbError::BadVector(n));
    }
    let x = |tau: &Permutation, k: usize| u[tau.apply(k)].to_big() * v[tau.apply(sigma.apply(k))].to_big() / &scale;
    let (mut sxy, mut sx, mut sy) = (BigRational::zero(), BigRational::zero(), BigRational::zero());
    let mut count = 0u64;
    for tau in Permutation::all(n) {
        let (xi, xj) = (x(&tau, i), x(&tau, j));
        sxy += &xi * &xj;
        sx += xi;
        sy += xj;
        count += 1;
    }
    let m = BigRational::from_integer(BigInt::from(count));
    Ok(Moments { e_xy: sxy / &m, e_x: sx / &m, e_y: sy / m })
}
