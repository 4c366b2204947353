//! Vandermonde connection schedules.
//!
//! An ORN schedule cycles through the phases `v(0), ..., v(C(g+1)-1)`; phase
//! `x` is a round robin over the lines `a + span(v(x))`. A SORN schedule runs
//! the twisted constellations `A v(1), ..., A v(C(g+1))` for every diagonal `A`
//! in the family, one after another.

mod desc;
mod reach;

pub use desc::ScheduleDescription;
pub use reach::{reachable_set, virtual_topology_edges, TopologyEdge, DEFAULT_WINDOW_CAP};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ff::{self, DiagMatrix, FieldError, NodeSpace, NodeVec, PrimeField};
use crate::perm::Permutation;

/// Upper limit on `N * T` for the precomputed permutation tables.
pub const MAX_TABLE_ENTRIES: u64 = 1 << 25;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("dimension g = {0} is not supported by this schedule kind")]
    UnsupportedDimension(usize),
    #[error("C must be at least 1")]
    ZeroPhases,
    #[error("p = {p} is too small for {needed} distinct phase vectors")]
    TooFewVectors { p: u64, needed: u64 },
    #[error("phase vectors do not form a constellation")]
    NotConstellation,
    #[error("relabeling has length {got}, expected {expected}")]
    RelabelLength { expected: usize, got: usize },
    #[error("timestep {k} outside period {period}")]
    OutOfPeriod { k: u64, period: u64 },
    #[error("window of {len} timesteps exceeds the cap of {cap}")]
    WindowTooLarge { len: u64, cap: u64 },
    #[error("schedule with N*T = {0} is too large to tabulate")]
    TooLarge(u64),
    #[error("description does not match the canonical construction: {0}")]
    DescriptionMismatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    Orn,
    Sorn,
}

/// Mixed-radix decomposition of a timestep within one period.
/// For ORN schedules `constellation` is always 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Timestep {
    pub constellation: usize,
    pub phase: usize,
    pub shift: u64,
}

/// A physical edge, identified by its tail and timestep class mod `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PhysEdge {
    pub tail: usize,
    pub k: usize,
}

impl PhysEdge {
    pub fn head(&self, sched: &Schedule) -> usize {
        sched.permute(self.k as u64, self.tail)
    }
}

/// Canonical diagonal representatives `diag(1, d_2, ..., d_g)` in lexicographic order.
pub fn diagonal_family(field: PrimeField, g: usize) -> Vec<DiagMatrix> {
    let p = field.modulus();
    let tail = g.saturating_sub(1);
    let count = (p - 1).pow(tail as u32);
    (0..count)
        .map(|mut code| {
            let mut entries = vec![0u64; tail];
            for e in entries.iter_mut().rev() {
                *e = code % (p - 1) + 1;
                code /= p - 1;
            }
            let diag = std::iter::once(1).chain(entries);
            DiagMatrix::new(field, diag).expect("entries are nonzero")
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct Schedule {
    kind: ScheduleKind,
    field: PrimeField,
    space: NodeSpace,
    g: usize,
    c: usize,
    phase_x: Vec<u64>,
    family: Vec<DiagMatrix>,
    /// `vectors[f][x] = A_f v_x`
    vectors: Vec<Vec<NodeVec>>,
    relabel: Option<(Permutation, Permutation)>,
    period: u64,
    table: Vec<u32>,
    inverse: Vec<u32>,
}

impl Schedule {
    pub fn orn(p: u64, g: usize, c: usize) -> Result<Self, ScheduleError> {
        let field = PrimeField::new(p)?;
        if g == 0 {
            return Err(ScheduleError::UnsupportedDimension(g));
        }
        if c == 0 {
            return Err(ScheduleError::ZeroPhases);
        }
        let needed = (c * (g + 1)) as u64;
        if needed > p {
            return Err(ScheduleError::TooFewVectors { p, needed });
        }
        let phase_x: Vec<u64> = (0..needed).collect();
        Self::build(ScheduleKind::Orn, field, g, c, phase_x, vec![DiagMatrix::identity(g)])
    }

    pub fn sorn(p: u64, g: usize, c: usize) -> Result<Self, ScheduleError> {
        let field = PrimeField::new(p)?;
        if g < 2 {
            return Err(ScheduleError::UnsupportedDimension(g));
        }
        if c == 0 {
            return Err(ScheduleError::ZeroPhases);
        }
        let needed = (c * (g + 1)) as u64;
        // v(0) is excluded, so x runs over 1..=C(g+1)
        if needed + 1 > p {
            return Err(ScheduleError::TooFewVectors { p, needed: needed + 1 });
        }
        let phase_x: Vec<u64> = (1..=needed).collect();
        Self::build(ScheduleKind::Sorn, field, g, c, phase_x, diagonal_family(field, g))
    }

    pub fn new(kind: ScheduleKind, p: u64, g: usize, c: usize) -> Result<Self, ScheduleError> {
        match kind {
            ScheduleKind::Orn => Self::orn(p, g, c),
            ScheduleKind::Sorn => Self::sorn(p, g, c),
        }
    }

    fn build(
        kind: ScheduleKind,
        field: PrimeField,
        g: usize,
        c: usize,
        phase_x: Vec<u64>,
        family: Vec<DiagMatrix>,
    ) -> Result<Self, ScheduleError> {
        let space = NodeSpace::new(field, g)?;
        let base: Vec<NodeVec> = phase_x.iter().map(|&x| ff::vandermonde(field, x, g)).collect();
        if !ff::is_constellation(field, &base, g) {
            return Err(ScheduleError::NotConstellation);
        }
        let vectors = family.iter().map(|a| a.twist(&base)).collect::<Result<Vec<_>, _>>()?;
        let p = field.modulus();
        let period = family.len() as u64 * phase_x.len() as u64 * (p - 1);
        let entries = period * space.count();
        if entries > MAX_TABLE_ENTRIES {
            return Err(ScheduleError::TooLarge(entries));
        }
        let mut sched = Self {
            kind,
            field,
            space,
            g,
            c,
            phase_x,
            family,
            vectors,
            relabel: None,
            period,
            table: Vec::new(),
            inverse: Vec::new(),
        };
        sched.tabulate();
        Ok(sched)
    }

    /// Returns the same schedule with node `a` playing the role of base node `tau(a)`.
    pub fn with_relabel(mut self, tau: Permutation) -> Result<Self, ScheduleError> {
        let n = self.node_count();
        if tau.len() != n {
            return Err(ScheduleError::RelabelLength { expected: n, got: tau.len() });
        }
        let inv = tau.inverse();
        self.relabel = Some((tau, inv));
        self.tabulate();
        Ok(self)
    }

    fn tabulate(&mut self) {
        let n = self.node_count();
        let coords: Vec<NodeVec> = (0..n as u64).map(|u| self.space.index_to_node(u).expect("in range")).collect();
        let mut table = vec![0u32; n * self.period as usize];
        let mut inverse = vec![0u32; n * self.period as usize];
        for k in 0..self.period {
            let ts = self.decompose(k).expect("k within period");
            let w = self.vectors[ts.constellation][ts.phase].scale(ts.shift);
            let row = k as usize * n;
            for a in 0..n {
                let u = self.to_base(a);
                let moved = coords[u].add(&w);
                let v = self.space.node_to_index(&moved).expect("same space") as usize;
                let b = self.from_base(v);
                table[row + a] = b as u32;
                inverse[row + b] = a as u32;
            }
        }
        self.table = table;
        self.inverse = inverse;
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn space(&self) -> NodeSpace {
        self.space
    }

    pub fn p(&self) -> u64 {
        self.field.modulus()
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn node_count(&self) -> usize {
        self.space.count() as usize
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    /// Number of phases in one constellation, `C(g+1)`.
    pub fn phase_count(&self) -> usize {
        self.phase_x.len()
    }

    /// The `x` values whose Vandermonde vectors make up the base constellation.
    pub fn phase_x(&self) -> &[u64] {
        &self.phase_x
    }

    pub fn family(&self) -> &[DiagMatrix] {
        &self.family
    }

    pub fn constellation_count(&self) -> usize {
        self.family.len()
    }

    /// Timesteps per phase block, `C(p-1)`.
    pub fn block_len(&self) -> u64 {
        self.c as u64 * (self.p() - 1)
    }

    /// Timesteps per constellation, `C(g+1)(p-1)`.
    pub fn constellation_len(&self) -> u64 {
        self.phase_x.len() as u64 * (self.p() - 1)
    }

    /// `A_f v_x` for constellation `f` and phase index `x`.
    pub fn phase_vector(&self, constellation: usize, phase: usize) -> &NodeVec {
        &self.vectors[constellation][phase]
    }

    pub fn constellation(&self, f: usize) -> &[NodeVec] {
        &self.vectors[f]
    }

    pub fn relabeling(&self) -> Option<&Permutation> {
        self.relabel.as_ref().map(|(t, _)| t)
    }

    /// `tau(a)`: the base-schedule node that `a` stands for.
    #[inline]
    pub fn to_base(&self, a: usize) -> usize {
        match &self.relabel {
            Some((t, _)) => t.apply(a),
            None => a,
        }
    }

    #[inline]
    pub fn from_base(&self, u: usize) -> usize {
        match &self.relabel {
            Some((_, inv)) => inv.apply(u),
            None => u,
        }
    }

    /// Coordinates of node `a` in `F_p^g` (through the relabeling).
    pub fn node_vec(&self, a: usize) -> NodeVec {
        self.space.index_to_node(self.to_base(a) as u64).expect("valid node")
    }

    pub fn node_index(&self, v: &NodeVec) -> usize {
        self.from_base(self.space.node_to_index(v).expect("valid vector") as usize)
    }

    pub fn decompose(&self, k: u64) -> Result<Timestep, ScheduleError> {
        if k >= self.period {
            return Err(ScheduleError::OutOfPeriod { k, period: self.period });
        }
        let pm1 = self.p() - 1;
        let per_constellation = self.constellation_len();
        let rem = k % per_constellation;
        Ok(Timestep {
            constellation: (k / per_constellation) as usize,
            phase: (rem / pm1) as usize,
            shift: rem % pm1 + 1,
        })
    }

    pub fn compose(&self, ts: Timestep) -> Result<u64, ScheduleError> {
        let pm1 = self.p() - 1;
        let k = ts.constellation as u64 * self.constellation_len() + ts.phase as u64 * pm1 + ts.shift.wrapping_sub(1);
        if ts.constellation >= self.family.len() || ts.phase >= self.phase_x.len() || ts.shift == 0 || ts.shift > pm1 {
            return Err(ScheduleError::OutOfPeriod { k, period: self.period });
        }
        Ok(k)
    }

    /// `pi_k(a)`; `k` is an absolute timestep.
    #[inline]
    pub fn permute(&self, k: u64, a: usize) -> usize {
        let n = self.node_count();
        self.table[(k % self.period) as usize * n + a] as usize
    }

    /// The unique `a` with `pi_k(a) = b`.
    #[inline]
    pub fn preimage(&self, k: u64, b: usize) -> usize {
        let n = self.node_count();
        self.inverse[(k % self.period) as usize * n + b] as usize
    }

    /// Absolute timestep at which the constellation containing `t` began.
    pub fn constellation_floor(&self, t: u64) -> u64 {
        t - t % self.constellation_len()
    }

    pub fn describe(&self) -> ScheduleDescription {
        ScheduleDescription::of(self)
    }
}
