//! Prime-field arithmetic and small linear algebra over `F_p^g`.
//!
//! Nodes of a design are vectors in `F_p^g`; they are numbered by reading the
//! coordinates as little-endian base-`p` digits (coordinate 0 is the least
//! significant digit).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest modulus accepted; keeps every product of two residues inside `u64`.
pub const MAX_MODULUS: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} exceeds the supported maximum")]
    ModulusTooLarge(u64),
    #[error("basis is linearly dependent")]
    SingularBasis,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("diagonal entry {index} is zero")]
    ZeroDiagonal { index: usize },
    #[error("node index {index} out of range for {count} nodes")]
    IndexOutOfRange { index: u64, count: u64 },
    #[error("vectors live in different fields")]
    FieldMismatch,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct PrimeField {
    p: u64,
}

impl TryFrom<u64> for PrimeField {
    type Error = FieldError;
    fn try_from(p: u64) -> Result<Self, FieldError> {
        PrimeField::new(p)
    }
}

impl From<PrimeField> for u64 {
    fn from(f: PrimeField) -> u64 {
        f.p
    }
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if p >= MAX_MODULUS {
            return Err(FieldError::ModulusTooLarge(p));
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(Self { p })
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn elem(&self, v: u64) -> Fp {
        Fp { value: v % self.p, p: self.p }
    }

    /// Embeds a signed integer, wrapping negatives.
    pub fn elem_i64(&self, v: i64) -> Fp {
        self.elem(v.rem_euclid(self.p as i64) as u64)
    }

    pub fn zero(&self) -> Fp {
        self.elem(0)
    }

    pub fn one(&self) -> Fp {
        self.elem(1)
    }

    pub fn elements(&self) -> impl Iterator<Item = Fp> + '_ {
        (0..self.p).map(move |v| self.elem(v))
    }

    pub fn nonzero(&self) -> impl Iterator<Item = Fp> + '_ {
        (1..self.p).map(move |v| self.elem(v))
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.p
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.p;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: u64) -> Option<u64> {
        let a = a % self.p;
        (a != 0).then(|| self.pow(a, self.p - 2))
    }
}

/// An element of `F_p`, kept reduced.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fp {
    value: u64,
    p: u64,
}

impl Fp {
    #[inline]
    pub fn value(self) -> u64 {
        self.value
    }

    #[inline]
    pub fn modulus(self) -> u64 {
        self.p
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    pub fn inv(self) -> Option<Fp> {
        let f = PrimeField { p: self.p };
        f.inv(self.value).map(|v| Fp { value: v, p: self.p })
    }
}

impl fmt::Debug for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(mod {})", self.value, self.p)
    }
}

impl fmt::Display for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Add for Fp {
    type Output = Fp;
    fn add(self, rhs: Fp) -> Fp {
        debug_assert_eq!(self.p, rhs.p);
        Fp { value: PrimeField { p: self.p }.add(self.value, rhs.value), p: self.p }
    }
}

impl Sub for Fp {
    type Output = Fp;
    fn sub(self, rhs: Fp) -> Fp {
        debug_assert_eq!(self.p, rhs.p);
        Fp { value: PrimeField { p: self.p }.sub(self.value, rhs.value), p: self.p }
    }
}

impl Mul for Fp {
    type Output = Fp;
    fn mul(self, rhs: Fp) -> Fp {
        debug_assert_eq!(self.p, rhs.p);
        Fp { value: self.value * rhs.value % self.p, p: self.p }
    }
}

impl Neg for Fp {
    type Output = Fp;
    fn neg(self) -> Fp {
        Fp { value: PrimeField { p: self.p }.neg(self.value), p: self.p }
    }
}

/// A vector in `F_p^g`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NodeVec {
    p: u64,
    coords: Vec<u64>,
}

impl fmt::Debug for NodeVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.coords.iter().join(","))
    }
}

impl NodeVec {
    pub fn new(field: PrimeField, coords: impl IntoIterator<Item = u64>) -> Self {
        Self { p: field.p, coords: coords.into_iter().map(|c| c % field.p).collect() }
    }

    pub fn from_fp(coords: &[Fp]) -> Result<Self, FieldError> {
        let p = coords.first().map(|c| c.p).ok_or(FieldError::DimensionMismatch { expected: 1, got: 0 })?;
        if coords.iter().any(|c| c.p != p) {
            return Err(FieldError::FieldMismatch);
        }
        Ok(Self { p, coords: coords.iter().map(|c| c.value).collect() })
    }

    pub fn zero(field: PrimeField, g: usize) -> Self {
        Self { p: field.p, coords: vec![0; g] }
    }

    pub fn field(&self) -> PrimeField {
        PrimeField { p: self.p }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> Fp {
        Fp { value: self.coords[i], p: self.p }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    pub fn all_nonzero(&self) -> bool {
        self.coords.iter().all(|&c| c != 0)
    }

    pub fn add(&self, other: &NodeVec) -> NodeVec {
        let f = self.field();
        debug_assert_eq!(self.coords.len(), other.coords.len());
        NodeVec { p: self.p, coords: self.coords.iter().zip(&other.coords).map(|(&a, &b)| f.add(a, b)).collect() }
    }

    pub fn sub(&self, other: &NodeVec) -> NodeVec {
        let f = self.field();
        debug_assert_eq!(self.coords.len(), other.coords.len());
        NodeVec { p: self.p, coords: self.coords.iter().zip(&other.coords).map(|(&a, &b)| f.sub(a, b)).collect() }
    }

    pub fn scale(&self, s: u64) -> NodeVec {
        let f = self.field();
        NodeVec { p: self.p, coords: self.coords.iter().map(|&a| f.mul(a, s % self.p)).collect() }
    }

    /// `self + s * other`
    pub fn add_scaled(&self, s: u64, other: &NodeVec) -> NodeVec {
        let f = self.field();
        let s = s % self.p;
        NodeVec {
            p: self.p,
            coords: self.coords.iter().zip(&other.coords).map(|(&a, &b)| f.add(a, f.mul(s, b))).collect(),
        }
    }
}

/// Bijection between `F_p^g` and `0..p^g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeSpace {
    field: PrimeField,
    g: usize,
    count: u64,
}

impl NodeSpace {
    pub fn new(field: PrimeField, g: usize) -> Result<Self, FieldError> {
        let count = (0..g).try_fold(1u64, |acc, _| acc.checked_mul(field.p));
        match count {
            Some(count) if count <= u32::MAX as u64 => Ok(Self { field, g, count }),
            _ => Err(FieldError::ModulusTooLarge(field.p)),
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.g
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn index_to_node(&self, index: u64) -> Result<NodeVec, FieldError> {
        if index >= self.count {
            return Err(FieldError::IndexOutOfRange { index, count: self.count });
        }
        let p = self.field.p;
        let mut rest = index;
        let coords = (0..self.g)
            .map(|_| {
                let d = rest % p;
                rest /= p;
                d
            })
            .collect();
        Ok(NodeVec { p, coords })
    }

    pub fn node_to_index(&self, v: &NodeVec) -> Result<u64, FieldError> {
        if v.p != self.field.p {
            return Err(FieldError::FieldMismatch);
        }
        if v.dim() != self.g {
            return Err(FieldError::DimensionMismatch { expected: self.g, got: v.dim() });
        }
        Ok(v.coords.iter().rev().fold(0u64, |acc, &c| acc * self.field.p + c))
    }
}

/// The Vandermonde vector `(1, x, x^2, ..., x^{g-1})`.
pub fn vandermonde(field: PrimeField, x: u64, g: usize) -> NodeVec {
    let mut coords = Vec::with_capacity(g);
    let mut acc = 1 % field.p;
    for _ in 0..g {
        coords.push(acc);
        acc = field.mul(acc, x % field.p);
    }
    NodeVec { p: field.p, coords }
}

/// Solution set `{ particular + sum_j t_j kernel[j] }` of a linear system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineSolution {
    pub particular: Vec<u64>,
    pub kernel: Vec<Vec<u64>>,
}

impl AffineSolution {
    /// Iterates all `p^{dim kernel}` solutions.
    pub fn solutions(&self, field: PrimeField) -> impl Iterator<Item = Vec<u64>> + '_ {
        let p = field.modulus();
        let k = self.kernel.len();
        let total = p.pow(k as u32);
        (0..total).map(move |mut code| {
            let mut sol = self.particular.clone();
            for basis in &self.kernel {
                let t = code % p;
                code /= p;
                for (s, &b) in sol.iter_mut().zip(basis) {
                    *s = field.add(*s, field.mul(t, b));
                }
            }
            sol
        })
    }
}

/// Solves `sum_i alpha_i * vectors[i] = target` by Gauss-Jordan elimination.
/// Returns `None` when the system is inconsistent.
pub fn solve_affine(
    field: PrimeField,
    vectors: &[NodeVec],
    target: &NodeVec,
) -> Result<Option<AffineSolution>, FieldError> {
    let rows = target.dim();
    let cols = vectors.len();
    if let Some(v) = vectors.iter().find(|v| v.dim() != rows) {
        return Err(FieldError::DimensionMismatch { expected: rows, got: v.dim() });
    }
    // augmented matrix, row-major, columns = vectors
    let mut m: Vec<Vec<u64>> = (0..rows)
        .map(|r| {
            let mut row: Vec<u64> = vectors.iter().map(|v| v.coords[r]).collect();
            row.push(target.coords[r]);
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(pr) = (r..rows).find(|&i| m[i][c] != 0) else { continue };
        m.swap(r, pr);
        let inv = field.inv(m[r][c]).expect("pivot is nonzero");
        for x in m[r].iter_mut() {
            *x = field.mul(*x, inv);
        }
        for i in 0..rows {
            if i != r && m[i][c] != 0 {
                let factor = m[i][c];
                for j in 0..=cols {
                    let sub = field.mul(factor, m[r][j]);
                    m[i][j] = field.sub(m[i][j], sub);
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    if m[r..].iter().any(|row| row[cols] != 0) {
        return Ok(None);
    }
    let mut particular = vec![0; cols];
    for (i, &c) in pivots.iter().enumerate() {
        particular[c] = m[i][cols];
    }
    let kernel = (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut k = vec![0; cols];
            k[free] = 1;
            for (i, &c) in pivots.iter().enumerate() {
                k[c] = field.neg(m[i][free]);
            }
            k
        })
        .collect();
    Ok(Some(AffineSolution { particular, kernel }))
}

pub fn rank(field: PrimeField, vectors: &[NodeVec]) -> usize {
    let Some(first) = vectors.first() else { return 0 };
    let zero = NodeVec::zero(field, first.dim());
    let sol = solve_affine(field, vectors, &zero).expect("consistent dimensions").expect("homogeneous");
    vectors.len() - sol.kernel.len()
}

/// Coefficients expressing `target` in the basis `basis` (g vectors in `F_p^g`).
pub fn solve_coeffs(field: PrimeField, basis: &[NodeVec], target: &NodeVec) -> Result<Vec<Fp>, FieldError> {
    if basis.len() != target.dim() {
        return Err(FieldError::DimensionMismatch { expected: target.dim(), got: basis.len() });
    }
    match solve_affine(field, basis, target)? {
        Some(sol) if sol.kernel.is_empty() => Ok(sol.particular.into_iter().map(|v| field.elem(v)).collect()),
        _ => Err(FieldError::SingularBasis),
    }
}

/// True iff every g-subset of `vectors` is a basis of `F_p^g`.
pub fn is_constellation(field: PrimeField, vectors: &[NodeVec], g: usize) -> bool {
    if g == 0 || vectors.len() < g || vectors.iter().any(|v| v.dim() != g) {
        return false;
    }
    let mut m = vec![0u64; g * g];
    (0..vectors.len()).combinations(g).all(|subset| {
        for (r, &i) in subset.iter().enumerate() {
            m[r * g..(r + 1) * g].copy_from_slice(&vectors[i].coords);
        }
        full_rank_in_place(field, &mut m, g)
    })
}

/// Gaussian elimination on a row-major `g x g` matrix; true iff it is invertible.
fn full_rank_in_place(field: PrimeField, m: &mut [u64], g: usize) -> bool {
    for col in 0..g {
        let Some(piv) = (col..g).find(|&r| m[r * g + col] != 0) else { return false };
        for k in 0..g {
            m.swap(col * g + k, piv * g + k);
        }
        let inv = field.inv(m[col * g + col]).expect("non-zero pivot");
        for r in col + 1..g {
            let factor = field.mul(m[r * g + col], inv);
            if factor != 0 {
                for k in col..g {
                    m[r * g + k] = field.sub(m[r * g + k], field.mul(factor, m[col * g + k]));
                }
            }
        }
    }
    true
}

/// Invertible diagonal matrix over `F_p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiagMatrix {
    diag: Vec<u64>,
}

impl DiagMatrix {
    pub fn new(field: PrimeField, diag: impl IntoIterator<Item = u64>) -> Result<Self, FieldError> {
        let diag: Vec<u64> = diag.into_iter().map(|d| d % field.modulus()).collect();
        if let Some(index) = diag.iter().position(|&d| d == 0) {
            return Err(FieldError::ZeroDiagonal { index });
        }
        Ok(Self { diag })
    }

    pub fn identity(g: usize) -> Self {
        Self { diag: vec![1; g] }
    }

    pub fn entries(&self) -> &[u64] {
        &self.diag
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn apply(&self, v: &NodeVec) -> NodeVec {
        let f = v.field();
        debug_assert_eq!(v.dim(), self.diag.len());
        NodeVec { p: v.p, coords: v.coords.iter().zip(&self.diag).map(|(&a, &d)| f.mul(a, d)).collect() }
    }

    pub fn inverse(&self, field: PrimeField) -> DiagMatrix {
        DiagMatrix { diag: self.diag.iter().map(|&d| field.inv(d).expect("nonzero diagonal")).collect() }
    }

    /// Applies the matrix to every vector of a constellation.
    pub fn twist(&self, vectors: &[NodeVec]) -> Result<Vec<NodeVec>, FieldError> {
        vectors
            .iter()
            .map(|v| {
                if v.dim() == self.diag.len() {
                    Ok(self.apply(v))
                } else {
                    Err(FieldError::DimensionMismatch { expected: self.diag.len(), got: v.dim() })
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    /// Exhaustive search over all coefficient tuples.
    fn brute_solutions(field: PrimeField, vectors: &[NodeVec], target: &NodeVec) -> Vec<Vec<u64>> {
        let p = field.modulus();
        let q = vectors.len();
        let mut out = Vec::new();
        for code in 0..p.pow(q as u32) {
            let alpha: Vec<u64> = (0..q).map(|i| code / p.pow(i as u32) % p).collect();
            let mut acc = NodeVec::zero(field, target.dim());
            for (a, v) in alpha.iter().zip(vectors) {
                acc = acc.add_scaled(*a, v);
            }
            if &acc == target {
                out.push(alpha);
            }
        }
        out.sort();
        out
    }

    #[test]
    fn trial_division_rejects_composites() {
        assert!(PrimeField::new(5).is_ok());
        assert_eq!(PrimeField::new(1), Err(FieldError::NotPrime(1)));
        assert_eq!(PrimeField::new(9), Err(FieldError::NotPrime(9)));
        assert_eq!(PrimeField::new(2).unwrap().modulus(), 2);
    }

    #[test]
    fn vandermonde_example() {
        assert_eq!(vandermonde(f(5), 2, 3).coords(), &[1, 2, 4]);
        assert_eq!(vandermonde(f(5), 0, 3).coords(), &[1, 0, 0]);
    }

    #[test]
    fn solve_matches_exhaustive_oracle() {
        let field = f(5);
        let basis = [NodeVec::new(field, [1, 1]), NodeVec::new(field, [1, 2])];
        let target = NodeVec::new(field, [1, 0]);
        let brute = brute_solutions(field, &basis, &target);
        assert_eq!(brute, vec![vec![2, 4]]);
        let alpha: Vec<u64> = solve_coeffs(field, &basis, &target).unwrap().into_iter().map(Fp::value).collect();
        assert_eq!(alpha, brute[0]);
    }

    #[test]
    fn singular_basis_detected() {
        let field = f(5);
        let basis = [NodeVec::new(field, [1, 2]), NodeVec::new(field, [2, 4])];
        let target = NodeVec::new(field, [1, 0]);
        assert_eq!(solve_coeffs(field, &basis, &target), Err(FieldError::SingularBasis));
    }

    #[test]
    fn affine_solutions_match_oracle_for_overcomplete_systems() {
        let field = f(5);
        let vs: Vec<NodeVec> = (0..3).map(|x| vandermonde(field, x, 2)).collect();
        for idx in 0..25 {
            let target = NodeSpace::new(field, 2).unwrap().index_to_node(idx).unwrap();
            let sol = solve_affine(field, &vs, &target).unwrap().unwrap();
            let mut ours: Vec<Vec<u64>> = sol.solutions(field).collect();
            ours.sort();
            assert_eq!(ours, brute_solutions(field, &vs, &target));
        }
    }

    #[test]
    fn twist_example() {
        let field = f(5);
        let d = DiagMatrix::new(field, [2, 3]).unwrap();
        let vs: Vec<NodeVec> = (0..3).map(|x| vandermonde(field, x, 2)).collect();
        let tw = d.twist(&vs).unwrap();
        let got: Vec<&[u64]> = tw.iter().map(|v| v.coords()).collect();
        assert_eq!(got, vec![&[2, 0][..], &[2, 3], &[2, 1]]);
        assert!(is_constellation(field, &tw, 2));
        assert_eq!(DiagMatrix::new(field, [1, 0]), Err(FieldError::ZeroDiagonal { index: 1 }));
    }

    #[test]
    fn repeated_vector_is_not_a_constellation() {
        let field = f(7);
        let v = vandermonde(field, 3, 2);
        assert!(!is_constellation(field, &[v.clone(), vandermonde(field, 1, 2), v], 2));
        assert!(is_constellation(field, &[vandermonde(field, 0, 2), vandermonde(field, 1, 2)], 2));
    }

    #[test]
    fn node_indexing_is_little_endian() {
        let space = NodeSpace::new(f(3), 2).unwrap();
        assert_eq!(space.index_to_node(5).unwrap().coords(), &[2, 1]);
        assert_eq!(space.node_to_index(&NodeVec::new(f(3), [2, 1])).unwrap(), 5);
        assert_eq!(space.index_to_node(9), Err(FieldError::IndexOutOfRange { index: 9, count: 9 }));
    }
}
