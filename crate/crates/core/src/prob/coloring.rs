use itertools::Itertools;
use serde::Serialize;

use crate::perm::Permutation;

/// A 3-coloring of the non-fixed points of a permutation's cycle diagram.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColoredCycles {
    pub sigma: Permutation,
    /// Non-fixed points in increasing order.
    pub non_fixed: Vec<usize>,
    /// Color per node; `None` on fixed points.
    pub colors: Vec<Option<u8>>,
}

impl ColoredCycles {
    pub fn counts(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for &x in self.colors.iter().flatten() {
            c[x as usize] += 1;
        }
        c
    }

    pub fn is_proper(&self) -> bool {
        self.non_fixed.iter().all(|&i| {
            let j = self.sigma.apply(i);
            self.colors[i].is_some() && self.colors[i] != self.colors[j]
        })
    }

    pub fn is_balanced(&self) -> bool {
        let n = self.non_fixed.len();
        self.counts().iter().all(|&c| c >= n / 3 && c <= n.div_ceil(3))
    }
}

/// Colors used more than `floor(n/3)` times.
fn overused(counts: &[usize; 3], n: usize) -> Vec<u8> {
    (0..3u8).filter(|&c| counts[c as usize] > n / 3).collect()
}

/// Colors the `i`-th cycle vertex (from 1) with `i mod 3`; when the length is
/// `1 mod 3` the last vertex takes the color missing from its two neighbors.
fn color_cycle(len: usize) -> Vec<u8> {
    let mut colors: Vec<u8> = (1..=len).map(|i| (i % 3) as u8).collect();
    if len % 3 == 1 {
        let (prev, next) = (colors[len - 2], colors[0]);
        colors[len - 1] = (0..3u8).find(|&c| c != prev && c != next).expect("three colors");
    }
    colors
}

/// Balanced proper 3-coloring built cycle by cycle, recoloring each new cycle so
/// overused colors do not pile up.
pub fn balanced_3_coloring(sigma: &Permutation) -> ColoredCycles {
    let mut colors = vec![None; sigma.len()];
    let mut counts = [0usize; 3];
    let mut total = 0usize;
    for cycle in sigma.cycles() {
        let local = color_cycle(cycle.len());
        let mut lc = [0usize; 3];
        for &c in &local {
            lc[c as usize] += 1;
        }
        let over0 = overused(&counts, total);
        let over1 = overused(&lc, cycle.len());
        let renaming = (0..3u8)
            .permutations(3)
            .find(|perm| {
                let mapped: Vec<u8> = over1.iter().map(|&c| perm[c as usize]).collect();
                let shared = mapped.iter().filter(|c| over0.contains(c)).count();
                if over0.len() + over1.len() <= 3 {
                    shared == 0
                } else {
                    shared == 1
                }
            })
            .expect("a valid renaming always exists");
        for (&node, &c) in cycle.iter().zip(&local) {
            let c = renaming[c as usize];
            colors[node] = Some(c);
            counts[c as usize] += 1;
        }
        total += cycle.len();
    }
    let non_fixed = (0..sigma.len()).filter(|&i| sigma.apply(i) != i).collect();
    ColoredCycles { sigma: sigma.clone(), non_fixed, colors }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_cycle() {
        let s = Permutation::from_cycles(3, &[&[0, 1, 2]]).unwrap();
        let c = balanced_3_coloring(&s);
        assert_eq!(c.colors, vec![Some(1), Some(2), Some(0)]);
    }

    #[test]
    fn four_cycle_last_vertex() {
        assert_eq!(color_cycle(4), vec![1, 2, 0, 2]);
        assert_eq!(color_cycle(2), vec![1, 2]);
        assert_eq!(color_cycle(7), vec![1, 2, 0, 1, 2, 0, 2]);
    }

    #[test]
    fn two_transpositions() {
        let s = Permutation::from_cycles(4, &[&[0, 1], &[2, 3]]).unwrap();
        let c = balanced_3_coloring(&s);
        assert!(c.is_proper() && c.is_balanced());
        let mut counts = c.counts();
        counts.sort_unstable();
        assert_eq!(counts, [1, 1, 2]);
    }
}
