//! Lattice corpora: exhaustive enumeration up to isomorphism and random draws.
//!
//! Both go through posets of join-irreducibles, whose down-set lattices are
//! exactly the finite distributive lattices.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;

use super::FinDistLattice;

/// A poset on `0..k` given by strict lower sets as bitmasks.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Poset {
    below: Vec<u32>,
}

impl Poset {
    fn len(&self) -> usize {
        self.below.len()
    }

    fn is_down_set(&self, mask: u32) -> bool {
        (0..self.len()).all(|i| mask >> i & 1 == 0 || self.below[i] & !mask == 0)
    }

    fn down_sets(&self) -> Vec<u32> {
        (0u32..1 << self.len()).filter(|&m| self.is_down_set(m)).collect()
    }

    fn signature(&self) -> Vec<(u32, u32)> {
        let k = self.len();
        let mut s: Vec<_> = (0..k)
            .map(|i| {
                let above = (0..k).filter(|&j| self.below[j] >> i & 1 == 1).count() as u32;
                (self.below[i].count_ones(), above)
            })
            .collect();
        s.sort_unstable();
        s
    }

    fn isomorphic(&self, other: &Poset) -> bool {
        let k = self.len();
        if k != other.len() || self.signature() != other.signature() {
            return false;
        }
        fn go(i: usize, a: &Poset, b: &Poset, f: &mut Vec<usize>, used: &mut [bool]) -> bool {
            if i == a.len() {
                return true;
            }
            for c in 0..b.len() {
                if used[c] || a.below[i].count_ones() != b.below[c].count_ones() {
                    continue;
                }
                let ok = (0..i).all(|p| {
                    (a.below[i] >> p & 1) == (b.below[c] >> f[p] & 1)
                        && (a.below[p] >> i & 1) == (b.below[f[p]] >> c & 1)
                });
                if ok {
                    used[c] = true;
                    f.push(c);
                    if go(i + 1, a, b, f, used) {
                        return true;
                    }
                    f.pop();
                    used[c] = false;
                }
            }
            false
        }
        go(0, self, other, &mut Vec::new(), &mut vec![false; k])
    }

    fn lattice(&self) -> FinDistLattice {
        let mut downs = self.down_sets();
        downs.sort_by_key(|&m| (m.count_ones(), m));
        FinDistLattice::from_leq(downs.len(), |a, b| downs[a] & !downs[b] == 0).expect("down-set lattices are distributive")
    }
}

/// Every distributive lattice with at most `max_n` elements, one per
/// isomorphism class, ordered by size.
pub fn all_lattices(max_n: usize) -> Vec<FinDistLattice> {
    assert!(max_n <= 32, "enumeration is only meant for small sizes");
    let mut out = vec![FinDistLattice::chain(1)];
    let mut level = vec![Poset { below: vec![] }];
    while !level.is_empty() {
        let mut next: Vec<Poset> = Vec::new();
        let mut buckets: HashMap<Vec<(u32, u32)>, Vec<usize>> = HashMap::new();
        for p in &level {
            for d in p.down_sets() {
                let mut below = p.below.clone();
                below.push(d);
                let q = Poset { below };
                if q.down_sets().len() > max_n {
                    continue;
                }
                let b = buckets.entry(q.signature()).or_default();
                if b.iter().any(|&i| next[i].isomorphic(&q)) {
                    continue;
                }
                b.push(next.len());
                next.push(q);
            }
        }
        out.extend(next.iter().map(Poset::lattice));
        level = next;
    }
    out.sort_by_key(|l| l.len());
    out
}

/// A random distributive lattice with at most `max_size` elements, built from
/// a random poset on at most `max_poset` points and then randomly relabelled.
pub fn random_lattice(rng: &mut impl Rng, max_poset: usize, max_size: usize) -> FinDistLattice {
    loop {
        let k = rng.gen_range(0..=max_poset);
        let density: f64 = rng.gen_range(0.1..0.9);
        let mut below = vec![0u32; k];
        for i in 0..k {
            for j in 0..i {
                if rng.gen_bool(density) {
                    below[i] |= 1 << j | below[j];
                }
            }
        }
        let p = Poset { below };
        if p.down_sets().len() <= max_size {
            let l = p.lattice();
            return shuffle(rng, &l);
        }
    }
}

/// A random relabelling of `l`.
pub fn shuffle(rng: &mut impl Rng, l: &FinDistLattice) -> FinDistLattice {
    let mut perm: Vec<usize> = (0..l.len()).collect();
    perm.shuffle(rng);
    l.permuted(&perm)
}
