use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{Signed, Zero};
use ornlab::perm::Permutation;
use ornlab::prob::{
    balanced_3_coloring, covariance_oracle, default_corpus, double_sided_moments, submatrix_experiment,
    tail_experiment, ConsistentMatrix, CovMode, Covariance, MonotoneFn, Sided, SubmatrixReport, TailCorpus,
    TailReport, VectorDef,
};
use ornlab::rng;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{resolve, Check, CommandConfig, Exact, Meta, Outcome};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NaConfig {
    pub cases: u64,
    pub max_n: usize,
}

impl Default for NaConfig {
    fn default() -> Self {
        Self { cases: 10_000, max_n: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TailConfig {
    pub trials: u64,
    pub gammas: Vec<f64>,
    /// Corpus file; the built-in corpus when absent.
    pub corpus: Option<PathBuf>,
}

impl Default for TailConfig {
    fn default() -> Self {
        Self { trials: 100_000, gammas: vec![0.3, 0.5, 1.0], corpus: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SubmatrixConfig {
    pub n: usize,
    pub u: VectorDef,
    pub v: VectorDef,
    pub ks: Vec<usize>,
    pub trials: u64,
    pub gammas: Vec<f64>,
}

impl Default for SubmatrixConfig {
    fn default() -> Self {
        Self {
            n: 64,
            u: VectorDef::Uniform { low: 0.5, high: 1.0, seed: 1 },
            v: VectorDef::Ones,
            ks: vec![8, 16, 32],
            trials: 100_000,
            gammas: vec![0.3, 0.5, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TailsConfig {
    pub na: NaConfig,
    pub tail: TailConfig,
    pub submatrix: SubmatrixConfig,
    /// Exhaustive coloring check over all permutations of `0..=max_n`.
    pub coloring_max_n: usize,
    pub seed: u64,
}

impl Default for TailsConfig {
    fn default() -> Self {
        Self {
            na: NaConfig::default(),
            tail: TailConfig::default(),
            submatrix: SubmatrixConfig::default(),
            coloring_max_n: 7,
            seed: 0,
        }
    }
}

impl CommandConfig for TailsConfig {
    fn seed_mut(&mut self) -> &mut u64 {
        &mut self.seed
    }
}

/// One randomized negative-association case: a consistently ordered matrix and
/// two monotone functions of the same direction on disjoint index sets.
#[derive(Debug, Clone)]
pub struct NaCase {
    pub matrix: ConsistentMatrix<Rational64>,
    pub f: MonotoneFn<Rational64>,
    pub g: MonotoneFn<Rational64>,
}

fn int(v: i64) -> Rational64 {
    Rational64::from_integer(v)
}

/// Case `index` of the corpus drawn from `seed`, with `n` cycling over `2..=max_n`.
pub fn na_case(seed: u64, index: u64, max_n: usize) -> NaCase {
    let mut r = rng::trial(seed, index);
    let n = 2 + (index as usize) % (max_n.max(2) - 1);
    let cols = Permutation::random(n, &mut r);
    let entries: Vec<Vec<Rational64>> = (0..n)
        .map(|_| {
            let mut row: Vec<i64> = (0..n).map(|_| r.gen_range(0..8)).collect();
            row.sort_unstable();
            (0..n).map(|j| int(row[cols.apply(j)])).collect()
        })
        .collect();
    let matrix = ConsistentMatrix::new(entries).expect("rows share one column order");
    let idx = Permutation::random(n, &mut r);
    let split = r.gen_range(1..n);
    let mut f = monotone_on(&mut r, &idx.as_slice()[..split]);
    let mut g = monotone_on(&mut r, &idx.as_slice()[split..]);
    if r.gen_bool(0.5) {
        f = f.decreasing();
        g = g.decreasing();
    }
    NaCase { matrix, f, g }
}

/// Threshold-sum or step function on a non-empty prefix of `set`.
fn monotone_on(r: &mut impl Rng, set: &[usize]) -> MonotoneFn<Rational64> {
    let chosen = set[..r.gen_range(1..=set.len())].to_vec();
    let params: Vec<Rational64> = chosen.iter().map(|_| int(r.gen_range(0..9))).collect();
    if r.gen_bool(0.5) {
        MonotoneFn::threshold_sum(chosen, params)
    } else {
        MonotoneFn::step(chosen, params)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NaSummary {
    pub cases: u64,
    pub max_n: usize,
    pub positive_cases: Vec<u64>,
    pub max_covariance: Exact,
}

pub fn na_corpus(cfg: &NaConfig, seed: u64) -> anyhow::Result<NaSummary> {
    let covs: Vec<BigRational> = (0..cfg.cases)
        .into_par_iter()
        .map(|i| {
            let c = na_case(seed, i, cfg.max_n);
            match covariance_oracle(&c.matrix, &c.f, &c.g, CovMode::Exact)? {
                Covariance::Exact(v) => Ok(v),
                Covariance::Estimate { .. } => unreachable!("exact mode"),
            }
        })
        .collect::<Result<_, ornlab::prob::ProbError>>()?;
    let positive_cases = covs.iter().enumerate().filter(|(_, c)| c.is_positive()).map(|(i, _)| i as u64).collect();
    let max = covs.iter().max().cloned().unwrap_or_else(BigRational::zero);
    Ok(NaSummary { cases: cfg.cases, max_n: cfg.max_n, positive_cases, max_covariance: Exact::from(&max) })
}

#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    pub e_x1x2: Exact,
    pub e_x1: Exact,
    pub e_x2: Exact,
    pub covariance: Exact,
}

/// `u = v = (1,1,0,0)`, `sigma = (0 1)(2 3)`: the double-sided variables are positively correlated.
pub fn counterexample() -> Counterexample {
    let sigma = Permutation::from_cycles(4, &[&[0, 1], &[2, 3]]).expect("valid cycles");
    let u = [1i64, 1, 0, 0];
    let m = double_sided_moments(&u, &u, &sigma, 0, 1).expect("small instance");
    Counterexample {
        e_x1x2: Exact::from(&m.e_xy),
        e_x1: Exact::from(&m.e_x),
        e_x2: Exact::from(&m.e_y),
        covariance: Exact::from(&m.covariance()),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NamedTail {
    pub spec: String,
    #[serde(flatten)]
    pub report: TailReport,
}

pub fn tail_corpus(cfg: &TailConfig, seed: u64, base: &Path) -> anyhow::Result<Vec<NamedTail>> {
    let corpus = match &cfg.corpus {
        None => default_corpus(),
        Some(p) => {
            let p = resolve(base, p);
            let text = fs::read_to_string(&p).with_context(|| format!("reading corpus {}", p.display()))?;
            serde_json::from_str::<TailCorpus>(&text).with_context(|| format!("parsing corpus {}", p.display()))?
        }
    };
    let mut out = Vec::new();
    for entry in &corpus.specs {
        let spec = entry.build::<f64>()?;
        for sided in [Sided::Single, Sided::Double] {
            for report in tail_experiment(&spec, &cfg.gammas, sided, cfg.trials, seed)? {
                out.push(NamedTail { spec: entry.name.clone(), report });
            }
        }
    }
    Ok(out)
}

pub fn submatrix_suite(cfg: &SubmatrixConfig, seed: u64) -> anyhow::Result<Vec<SubmatrixReport>> {
    let (u, v): (Vec<f64>, Vec<f64>) = (cfg.u.build(cfg.n), cfg.v.build(cfg.n));
    let mut out = Vec::new();
    for &k in &cfg.ks {
        out.extend(submatrix_experiment(&u, &v, k, &cfg.gammas, cfg.trials, seed)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct ColoringSummary {
    pub max_n: usize,
    pub permutations: u64,
    pub failures: u64,
}

pub fn coloring_suite(max_n: usize) -> ColoringSummary {
    let (mut permutations, mut failures) = (0, 0);
    for n in 0..=max_n {
        for sigma in Permutation::all(n) {
            let c = balanced_3_coloring(&sigma);
            permutations += 1;
            failures += u64::from(!(c.is_proper() && c.is_balanced()));
        }
    }
    ColoringSummary { max_n, permutations, failures }
}

#[derive(Debug, Clone, Serialize)]
struct TailsReport<'a> {
    meta: &'a Meta,
    negative_association: NaSummary,
    counterexample: Counterexample,
    tails: Vec<NamedTail>,
    submatrix: Vec<SubmatrixReport>,
    coloring: ColoringSummary,
}

pub fn run(cfg: &TailsConfig, meta: &Meta, base: &Path) -> anyhow::Result<Outcome> {
    let na = na_corpus(&cfg.na, cfg.seed)?;
    let cx = counterexample();
    let tails = tail_corpus(&cfg.tail, cfg.seed, base)?;
    let sub = submatrix_suite(&cfg.submatrix, cfg.seed)?;
    let coloring = coloring_suite(cfg.coloring_max_n);

    let mut out = Outcome::default();
    out.checks.push(Check::new(
        "negative association",
        na.positive_cases.is_empty(),
        format!("{} cases, max covariance {}/{}", na.cases, na.max_covariance.num, na.max_covariance.den),
    ));
    let sixth = BigRational::new(BigInt::from(1), BigInt::from(6));
    out.checks.push(Check::new(
        "double-sided counterexample",
        cx.e_x1x2 == Exact::from(&sixth) && cx.covariance.value > 0.0,
        format!("E[X1 X2] = {}/{}", cx.e_x1x2.num, cx.e_x1x2.den),
    ));
    let bad_tails = tails.iter().filter(|t| !t.report.within_bound()).count();
    out.checks.push(Check::new(
        "tail bounds",
        bad_tails == 0,
        format!("{} of {} reports above bound + 3 sigma", bad_tails, tails.len()),
    ));
    let bad_sub = sub.iter().filter(|s| !s.within_bound()).count();
    out.checks.push(Check::new(
        "submatrix bounds",
        bad_sub == 0,
        format!("{} of {} reports above bound + 3 sigma", bad_sub, sub.len()),
    ));
    out.checks.push(Check::new(
        "balanced 3-coloring",
        coloring.failures == 0,
        format!("{} permutations of size <= {}", coloring.permutations, coloring.max_n),
    ));
    out.add_json(
        "tails.json",
        &TailsReport { meta, negative_association: na, counterexample: cx, tails, submatrix: sub, coloring },
    );
    Ok(out)
}
