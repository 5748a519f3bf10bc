// SPDX-License-Identifier: Apache-2.0

//! K-feasible cut enumeration with local truth tables.

use super::Aig;
use crate::truth::{self, var};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cut {
    /// Sorted leaf variables.
    pub leaves: Vec<u32>,
    /// Function of the root over the leaves (leaf `i` is variable `i`).
    pub tt: u64,
}

impl Cut {
    pub fn trivial(v: usize) -> Self {
        Cut {
            leaves: vec![v as u32],
            tt: var(0),
        }
    }

    pub fn is_trivial(&self, root: usize) -> bool {
        self.leaves.len() == 1 && self.leaves[0] as usize == root
    }

    /// Whether the function depends on every leaf.
    pub fn is_full_support(&self) -> bool {
        (0..self.leaves.len()).all(|i| truth::depends_on(self.tt, i))
    }
}

/// Re-express `tt` over `from` leaves as a function over `to` (a superset).
pub fn expand(tt: u64, from: &[u32], to: &[u32]) -> u64 {
    if from == to {
        return tt;
    }
    let pos: Vec<usize> = from
        .iter()
        .map(|l| to.iter().position(|t| t == l).expect("superset"))
        .collect();
    let n = to.len();
    let mut out = 0u64;
    for m in 0..1usize << n {
        let old = pos
            .iter()
            .enumerate()
            .fold(0usize, |acc, (j, &p)| acc | (((m >> p) & 1) << j));
        if (tt >> old) & 1 == 1 {
            out |= 1 << m;
        }
    }
    truth::replicate(out, n)
}

fn merge(a: &[u32], b: &[u32], k: usize) -> Option<Vec<u32>> {
    let mut out = Vec::with_capacity(k);
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x == y => {
                i += 1;
                j += 1;
                x
            }
            (Some(&x), Some(&y)) if x < y => {
                i += 1;
                x
            }
            (Some(_), Some(&y)) => {
                j += 1;
                y
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        if out.len() == k {
            return None;
        }
        out.push(next);
    }
    Some(out)
}

/// Enumerate up to `limit` non-trivial `k`-feasible cuts per variable, plus
/// the trivial cut (always last). Cuts are ordered by size then leaves.
pub fn enumerate(aig: &Aig, k: usize, limit: usize) -> Vec<Vec<Cut>> {
    assert!(k <= truth::MAX_VARS);
    let mut cuts: Vec<Vec<Cut>> = Vec::with_capacity(aig.num_vars());
    for v in 0..aig.num_vars() {
        if !aig.is_and(v) {
            cuts.push(vec![Cut::trivial(v)]);
            continue;
        }
        let (a, b) = aig.fanins(v);
        let mut found: Vec<Cut> = Vec::new();
        for ca in &cuts[a.var()] {
            for cb in &cuts[b.var()] {
                let Some(leaves) = merge(&ca.leaves, &cb.leaves, k) else {
                    continue;
                };
                if found.iter().any(|c| c.leaves == leaves) {
                    continue;
                }
                let ta = expand(ca.tt, &ca.leaves, &leaves);
                let tb = expand(cb.tt, &cb.leaves, &leaves);
                let ta = if a.is_complement() { !ta } else { ta };
                let tb = if b.is_complement() { !tb } else { tb };
                found.push(Cut {
                    leaves,
                    tt: ta & tb,
                });
            }
        }
        // drop dominated cuts (a strict superset of another cut)
        let mut kept: Vec<Cut> = Vec::new();
        found.sort_by(|x, y| x.leaves.len().cmp(&y.leaves.len()).then(x.leaves.cmp(&y.leaves)));
        for c in found {
            let dominated = kept
                .iter()
                .any(|d| d.leaves.iter().all(|l| c.leaves.contains(l)));
            if !dominated {
                kept.push(c);
            }
        }
        kept.truncate(limit);
        kept.push(Cut::trivial(v));
        cuts.push(kept);
    }
    cuts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aig::AigBuilder;

    #[test]
    fn xor_cut_function() {
        let mut b = AigBuilder::new(vec!["a".into(), "b".into()], vec!["y".into()]);
        let (x, y) = (b.input(0), b.input(1));
        let o = b.xor(x, y);
        let aig = b.finish(vec![o]);
        let cuts = enumerate(&aig, 4, 8);
        let root = o.var();
        let c = cuts[root].iter().find(|c| c.leaves == vec![1, 2]).unwrap();
        let f = if o.is_complement() { !c.tt } else { c.tt };
        assert_eq!(f & 0xf, (var(0) ^ var(1)) & 0xf);
    }

    #[test]
    fn expand_permutes_correctly() {
        // f = leaf 5 over [5], expanded to [2, 5, 7] is variable 1
        assert_eq!(expand(var(0), &[5], &[2, 5, 7]), var(1));
        let and = var(0) & var(1);
        assert_eq!(expand(and, &[3, 9], &[1, 3, 9]), var(1) & var(2));
    }
}
