use super::{Schedule, ScheduleError};

pub const DEFAULT_WINDOW_CAP: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TopologyEdge {
    /// `(node, t) -> (node, t+1)`
    Virtual { node: usize, t: u64 },
    /// `(tail, t) -> (head, t+1)`
    Physical { tail: usize, head: usize, t: u64 },
}

/// Nodes other than `a` reachable from `(a, t0)` within `latency` timesteps
/// using at most `hops` physical edges, in increasing order.
pub fn reachable_set(sched: &Schedule, a: usize, t0: u64, latency: u64, hops: usize) -> Vec<usize> {
    let n = sched.node_count();
    const UNSEEN: usize = usize::MAX;
    // fewest physical hops needed to sit at each node at the current time
    let mut best = vec![UNSEEN; n];
    best[a] = 0;
    let mut reached = vec![false; n];
    for t in t0..t0 + latency {
        let mut next = best.clone();
        for tail in 0..n {
            if best[tail] < hops {
                let head = sched.permute(t, tail);
                next[head] = next[head].min(best[tail] + 1);
            }
        }
        best = next;
        for (r, &b) in reached.iter_mut().zip(&best) {
            *r |= b != UNSEEN;
        }
    }
    (0..n).filter(|&v| v != a && reached[v]).collect()
}

/// Every virtual and physical edge leaving time layers `start..start+len`.
pub fn virtual_topology_edges(
    sched: &Schedule,
    start: u64,
    len: u64,
    cap: u64,
) -> Result<impl Iterator<Item = TopologyEdge> + '_, ScheduleError> {
    if len > cap {
        return Err(ScheduleError::WindowTooLarge { len, cap });
    }
    let n = sched.node_count();
    Ok((start..start + len).flat_map(move |t| {
        (0..n).flat_map(move |i| {
            [TopologyEdge::Virtual { node: i, t }, TopologyEdge::Physical { tail: i, head: sched.permute(t, i), t }]
        })
    }))
}
