use itertools::Itertools;

use crate::ff::{self, NodeVec};
use crate::schedule::{PhysEdge, Schedule, ScheduleKind, TopologyEdge};

/// The stretch of `g+1` consecutive phase blocks a pseudo-path uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Window {
    /// Absolute timestep at which the first block begins.
    pub start: u64,
    /// ORN: index of the first phase block. SORN: always 0.
    pub first_block: usize,
    /// SORN: constellation index. ORN: always 0.
    pub constellation: usize,
}

impl Window {
    /// Dense key used to cache templates: first block for ORN, constellation for SORN.
    pub fn key(&self) -> usize {
        self.first_block.max(self.constellation)
    }
}

/// Number of distinct window keys of a schedule.
pub fn window_keys(sched: &Schedule) -> usize {
    match sched.kind() {
        ScheduleKind::Orn => sched.g() + 1,
        ScheduleKind::Sorn => sched.constellation_count(),
    }
}

/// Window used by traffic injected at `t`. A start exactly on a boundary departs
/// in the block (or constellation) that begins at `t`.
pub fn departure(sched: &Schedule, t: u64) -> Window {
    match sched.kind() {
        ScheduleKind::Orn => {
            let b = sched.block_len();
            let start = t.div_ceil(b) * b;
            Window { start, first_block: ((start / b) % (sched.g() as u64 + 1)) as usize, constellation: 0 }
        }
        ScheduleKind::Sorn => {
            let len = sched.constellation_len();
            let start = t.div_ceil(len) * len;
            let f = ((start / len) % sched.constellation_count() as u64) as usize;
            Window { start, first_block: 0, constellation: f }
        }
    }
}

/// Window with the given key whose start is the first at or after `t`.
pub(crate) fn window_for_key(sched: &Schedule, key: usize, t: u64) -> Window {
    let (unit, cycle) = match sched.kind() {
        ScheduleKind::Orn => (sched.block_len(), sched.g() as u64 + 1),
        ScheduleKind::Sorn => (sched.constellation_len(), sched.constellation_count() as u64),
    };
    let mut idx = t.div_ceil(unit);
    while idx % cycle != key as u64 {
        idx += 1;
    }
    let start = idx * unit;
    match sched.kind() {
        ScheduleKind::Orn => Window { start, first_block: key, constellation: 0 },
        ScheduleKind::Sorn => Window { start, first_block: 0, constellation: key },
    }
}

/// Block `j` of a schedule as phase indices (mod g+1 for ORN).
pub(crate) fn block_phases(sched: &Schedule, j: usize) -> std::ops::Range<usize> {
    let c = sched.c();
    let j = j % (sched.g() + 1);
    j * c..(j + 1) * c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Hop {
    /// Index into the schedule's phase list.
    pub phase: usize,
    pub coeff: u64,
    /// Absolute timestep at which the phase begins.
    pub phase_start: u64,
}

impl Hop {
    /// Timestep of the physical hop, if the coefficient is non-zero.
    pub fn timestep(&self) -> Option<u64> {
        (self.coeff != 0).then(|| self.phase_start + self.coeff - 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudoPath {
    pub src: usize,
    pub dst: usize,
    pub start: u64,
    pub window: Window,
    pub hops: Vec<Hop>,
}

impl PseudoPath {
    pub fn physical_hops(&self) -> usize {
        self.hops.iter().filter(|h| h.coeff != 0).count()
    }

    /// Walks the path through the time-expanded graph.
    pub fn route(&self, sched: &Schedule) -> RoutePath {
        let mut nodes = vec![self.src];
        let mut t = self.start;
        let mut cur = self.src;
        for h in &self.hops {
            let Some(k) = h.timestep() else { continue };
            while t < k {
                nodes.push(cur);
                t += 1;
            }
            cur = sched.permute(k, cur);
            nodes.push(cur);
            t += 1;
        }
        RoutePath { start: self.start, nodes }
    }

    /// `sum_i alpha_i w_i`, in base coordinates.
    pub fn displacement(&self, sched: &Schedule) -> NodeVec {
        let mut acc = NodeVec::zero(sched.field(), sched.g());
        for h in &self.hops {
            acc = acc.add_scaled(h.coeff, sched.phase_vector(self.window.constellation, h.phase));
        }
        acc
    }
}

/// A path in the time-expanded graph, stored as the node occupied at each time layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutePath {
    pub start: u64,
    pub nodes: Vec<usize>,
}

impl RoutePath {
    /// Number of edges, virtual and physical.
    pub fn latency(&self) -> u64 {
        self.nodes.len() as u64 - 1
    }

    pub fn edges(&self) -> impl Iterator<Item = TopologyEdge> + '_ {
        self.nodes.windows(2).zip(self.start..).map(|(w, t)| {
            if w[0] == w[1] {
                TopologyEdge::Virtual { node: w[0], t }
            } else {
                TopologyEdge::Physical { tail: w[0], head: w[1], t }
            }
        })
    }

    pub fn physical_edges(&self, sched: &Schedule) -> Vec<PhysEdge> {
        let period = sched.period();
        self.edges()
            .filter_map(|e| match e {
                TopologyEdge::Physical { tail, t, .. } => Some(PhysEdge { tail, k: (t % period) as usize }),
                TopologyEdge::Virtual { .. } => None,
            })
            .collect()
    }
}

pub fn max_latency<'a>(paths: impl IntoIterator<Item = &'a RoutePath>) -> u64 {
    paths.into_iter().map(RoutePath::latency).max().unwrap_or(0)
}

/// A pseudo-path relative to its window: phases, coefficients and hop offsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplatePath {
    pub phases: Vec<usize>,
    pub coeffs: Vec<u64>,
    /// Offset from the window start at which each phase begins.
    pub offsets: Vec<u64>,
}

impl TemplatePath {
    /// `(hop index, offset of the physical hop)` for every non-zero coefficient.
    pub fn physical(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.coeffs
            .iter()
            .zip(&self.offsets)
            .enumerate()
            .filter(|(_, (&c, _))| c != 0)
            .map(|(i, (&c, &o))| (i, o + c - 1))
    }

    pub fn last_offset(&self) -> u64 {
        self.physical().last().map(|(_, o)| o).expect("non-degenerate path has a last hop")
    }
}

fn window_blocks(sched: &Schedule, key: usize) -> Vec<usize> {
    match sched.kind() {
        ScheduleKind::Orn => (0..=sched.g()).map(|i| (key + i) % (sched.g() + 1)).collect(),
        ScheduleKind::Sorn => (0..=sched.g()).collect(),
    }
}

fn constellation_of_key(sched: &Schedule, key: usize) -> usize {
    match sched.kind() {
        ScheduleKind::Orn => 0,
        ScheduleKind::Sorn => key,
    }
}

/// Solutions of `sum alpha_i w_{x_i} = d` over the given blocks, for every phase tuple,
/// keeping those accepted by `keep`.
fn solve_over_blocks(
    sched: &Schedule,
    constellation: usize,
    blocks: &[usize],
    block_positions: &[u64],
    d: &NodeVec,
    keep: impl Fn(&[u64]) -> bool,
) -> Vec<TemplatePath> {
    let field = sched.field();
    let pm1 = sched.p() - 1;
    let block_len = sched.block_len();
    if blocks.is_empty() {
        // the empty tuple is a pseudo-path iff d = 0
        return if d.is_zero() && keep(&[]) {
            vec![TemplatePath { phases: vec![], coeffs: vec![], offsets: vec![] }]
        } else {
            vec![]
        };
    }
    let mut out = Vec::new();
    for phases in blocks.iter().map(|&j| block_phases(sched, j)).multi_cartesian_product() {
        let vectors: Vec<NodeVec> = phases.iter().map(|&x| sched.phase_vector(constellation, x).clone()).collect();
        let Some(sol) = ff::solve_affine(field, &vectors, d).expect("dimensions agree") else { continue };
        let offsets: Vec<u64> = phases
            .iter()
            .zip(blocks)
            .zip(block_positions)
            .map(|((&x, &j), &pos)| pos * block_len + (x - block_phases(sched, j).start) as u64 * pm1)
            .collect();
        for coeffs in sol.solutions(field) {
            if keep(&coeffs) {
                out.push(TemplatePath { phases: phases.clone(), coeffs, offsets: offsets.clone() });
            }
        }
    }
    out
}

/// Non-degenerate `(g+1)`-hop templates for window `key` and base displacement `d`.
pub fn template(sched: &Schedule, key: usize, d: &NodeVec) -> Vec<TemplatePath> {
    let blocks = window_blocks(sched, key);
    let positions: Vec<u64> = (0..blocks.len() as u64).collect();
    solve_over_blocks(sched, constellation_of_key(sched, key), &blocks, &positions, d, |c| {
        c[0] != 0 && c[c.len() - 1] != 0
    })
}

/// All non-degenerate `(g+1)`-hop pseudo-paths from `a` to `b` for traffic injected at `t`.
pub fn enumerate_pseudopaths(sched: &Schedule, a: usize, b: usize, t: u64) -> Vec<PseudoPath> {
    let window = departure(sched, t);
    let d = sched.node_vec(b).sub(&sched.node_vec(a));
    template(sched, window.key(), &d)
        .into_iter()
        .map(|tp| PseudoPath {
            src: a,
            dst: b,
            start: t,
            window,
            hops: tp
                .phases
                .iter()
                .zip(&tp.coeffs)
                .zip(&tp.offsets)
                .map(|((&phase, &coeff), &off)| Hop { phase, coeff, phase_start: window.start + off })
                .collect(),
        })
        .collect()
}

/// Arguments for [`pseudopath_count_rho`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhoQuery {
    /// q-hop pseudo-paths from `source` to `tail(edge)` over the q blocks before the
    /// edge's block, with non-zero first coefficient.
    Minus { q: usize, source: usize, edge: PhysEdge },
    /// q-hop pseudo-paths from `head(edge)` to `dest` over the q blocks after the
    /// edge's block, with non-zero last coefficient.
    Plus { q: usize, edge: PhysEdge, dest: usize },
    /// Non-degenerate `(g+1)`-hop pseudo-paths for traffic injected at `start`.
    Full { source: usize, dest: usize, start: u64 },
}

/// Exact pseudo-path counts by enumeration.
pub fn pseudopath_count_rho(sched: &Schedule, query: RhoQuery) -> usize {
    let g = sched.g();
    let c = sched.c();
    match query {
        RhoQuery::Full { source, dest, start } => enumerate_pseudopaths(sched, source, dest, start).len(),
        RhoQuery::Minus { q, source, edge } | RhoQuery::Plus { q, edge, dest: source } => {
            let minus = matches!(query, RhoQuery::Minus { .. });
            let ts = sched.decompose(edge.k as u64 % sched.period()).expect("reduced timestep");
            let block = ts.phase / c;
            let blocks: Option<Vec<usize>> = match (sched.kind(), minus) {
                (ScheduleKind::Orn, true) => Some((0..q).map(|i| (block + (g + 1) * q - q + i) % (g + 1)).collect()),
                (ScheduleKind::Orn, false) => Some((1..=q).map(|i| (block + i) % (g + 1)).collect()),
                (ScheduleKind::Sorn, true) => (q <= block).then(|| (block - q..block).collect()),
                (ScheduleKind::Sorn, false) => (block + q <= g).then(|| (block + 1..=block + q).collect()),
            };
            let Some(blocks) = blocks else { return 0 };
            let positions: Vec<u64> = (0..q as u64).collect();
            let d = if minus {
                sched.node_vec(edge.tail).sub(&sched.node_vec(source))
            } else {
                sched.node_vec(source).sub(&sched.node_vec(edge.head(sched)))
            };
            solve_over_blocks(sched, ts.constellation, &blocks, &positions, &d, |coeffs| match coeffs {
                [] => true,
                _ if minus => coeffs[0] != 0,
                _ => coeffs[coeffs.len() - 1] != 0,
            })
            .len()
        }
    }
}
