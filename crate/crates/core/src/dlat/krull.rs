//! Krull dimension, by prime-filter chains and by the algebraic criterion.
//!
//! The algebraic side decides "dimension <= n" by the condition: for every
//! tuple x_1..x_{n+1} there are a_1..a_{n+1} with
//!
//! ```text
//! a_1 & x_1 = 0,   a_{k+1} & x_{k+1} <= a_k | x_k,   a_{n+1} | x_{n+1} = 1.
//! ```
//!
//! Taking each a_k as large as the constraints allow (a Heyting implication)
//! is optimal: any other witness sequence lies pointwise below the greedy
//! one, and the last condition is monotone. So the tuple only matters through
//! the running value s_k = a_k | x_k, and the search over all tuples collapses
//! to a reachability computation over lattice elements.

use serde::Serialize;

use super::{spec, DlatError, FinDistLattice};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KrullOutcome {
    Dim(usize),
    /// Trivial lattice (no prime filters).
    Undefined,
    /// The search stopped at the configured depth without settling.
    Inconclusive { tested_up_to: usize },
}

/// Longest chain of prime filters under strict inclusion, minus one.
pub fn krull_dim_chains(l: &FinDistLattice) -> KrullOutcome {
    let s = match spec(l) {
        Ok(s) => s,
        Err(_) => return KrullOutcome::Undefined,
    };
    let k = s.points.len();
    // order points by size so strict inclusion goes forward
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&i| s.points[i].members.count_ones(..));
    let mut longest = vec![0usize; k];
    for (pos, &p) in order.iter().enumerate() {
        for &q in &order[..pos] {
            if q != p && s.specialization[q][p] && s.points[q] != s.points[p] {
                longest[p] = longest[p].max(longest[q] + 1);
            }
        }
    }
    KrullOutcome::Dim(longest.into_iter().max().unwrap_or(0))
}

#[derive(Debug, Clone, Serialize)]
pub struct KrullStep {
    pub n: usize,
    /// A tuple x_1..x_{n+1} admitting no witness, when the test fails.
    pub counterexample: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct KrullAlgebraic {
    pub outcome: KrullOutcome,
    pub steps: Vec<KrullStep>,
}

/// The greedy witness a_1..a_{n+1} for a tuple, in the order of the tuple.
pub fn greedy_witness(l: &FinDistLattice, xs: &[usize]) -> Vec<usize> {
    let mut s = l.bot();
    let mut out = Vec::with_capacity(xs.len());
    for &x in xs {
        let a = l.implies(x, s);
        out.push(a);
        s = l.join(a, x);
    }
    out
}

/// Least n for which the algebraic dimension criterion holds.
///
/// `max_n` bounds the search depth; beyond it the answer is inconclusive.
pub fn krull_dim_algebraic(l: &FinDistLattice, max_n: usize) -> Result<KrullAlgebraic, DlatError> {
    if l.len() < 2 {
        return Err(DlatError::Trivial);
    }
    let size = l.len();
    let imp: Vec<usize> = (0..size * size).map(|i| l.implies(i / size, i % size)).collect();
    let step = |s: usize, x: usize| l.join(imp[x * size + s], x);
    // reach[s] = Some((prev state, x)) records how s was first reached
    let mut frontier: Vec<Option<(usize, usize)>> = vec![None; size];
    frontier[l.bot()] = Some((usize::MAX, usize::MAX));
    let mut history: Vec<Vec<Option<(usize, usize)>>> = vec![frontier.clone()];
    let mut steps = Vec::new();
    for n in 0..=max_n {
        let mut next = vec![None; size];
        for s in 0..size {
            if frontier[s].is_none() {
                continue;
            }
            for x in 0..size {
                let t = step(s, x);
                if next[t].is_none() {
                    next[t] = Some((s, x));
                }
            }
        }
        history.push(next.clone());
        let bad = (0..size).find(|&t| t != l.top() && next[t].is_some());
        match bad {
            None => {
                steps.push(KrullStep { n, counterexample: None });
                return Ok(KrullAlgebraic { outcome: KrullOutcome::Dim(n), steps });
            }
            Some(t) => {
                let mut tuple = Vec::with_capacity(n + 1);
                let mut cur = t;
                for level in (1..history.len()).rev() {
                    let (prev, x) = history[level][cur].expect("reached state has a parent");
                    tuple.push(x);
                    cur = prev;
                }
                tuple.reverse();
                steps.push(KrullStep { n, counterexample: Some(tuple) });
            }
        }
        frontier = next;
    }
    Ok(KrullAlgebraic { outcome: KrullOutcome::Inconclusive { tested_up_to: max_n }, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dlat::gen;

    /// The criterion read literally: every tuple, lexicographic witness search.
    fn literal_criterion(l: &FinDistLattice, n: usize) -> bool {
        let m = l.len();
        let len = n + 1;
        let tuples = |len: usize| {
            (0..m.pow(len as u32)).map(move |mut c| {
                let mut t = vec![0; len];
                for slot in t.iter_mut().rev() {
                    *slot = c % m;
                    c /= m;
                }
                t
            })
        };
        tuples(len).all(|x| {
            tuples(len).any(|a| {
                l.meet(a[0], x[0]) == l.bot()
                    && (0..n).all(|k| l.leq(l.meet(a[k + 1], x[k + 1]), l.join(a[k], x[k])))
                    && l.join(a[n], x[n]) == l.top()
            })
        })
    }

    fn literal_dim(l: &FinDistLattice) -> usize {
        (0..).find(|&n| literal_criterion(l, n)).unwrap()
    }

    #[test]
    fn small_examples() {
        assert_eq!(krull_dim_chains(&FinDistLattice::chain(2)), KrullOutcome::Dim(0));
        assert_eq!(krull_dim_chains(&FinDistLattice::chain(3)), KrullOutcome::Dim(1));
        assert_eq!(krull_dim_chains(&FinDistLattice::chain(1)), KrullOutcome::Undefined);
        assert_eq!(krull_dim_algebraic(&FinDistLattice::chain(2), 8).unwrap().outcome, KrullOutcome::Dim(0));
        assert_eq!(krull_dim_algebraic(&FinDistLattice::chain(3), 8).unwrap().outcome, KrullOutcome::Dim(1));
        for n in 2..10 {
            let c = FinDistLattice::chain(n);
            assert_eq!(krull_dim_chains(&c), KrullOutcome::Dim(n - 2));
            assert_eq!(krull_dim_algebraic(&c, 20).unwrap().outcome, KrullOutcome::Dim(n - 2));
        }
        assert_eq!(krull_dim_algebraic(&FinDistLattice::boolean(3), 8).unwrap().outcome, KrullOutcome::Dim(0));
    }

    #[test]
    fn counterexamples_really_fail() {
        let l = FinDistLattice::chain(5);
        let r = krull_dim_algebraic(&l, 8).unwrap();
        for step in &r.steps {
            if let Some(x) = &step.counterexample {
                assert_eq!(x.len(), step.n + 1);
                let a = greedy_witness(&l, x);
                assert_ne!(l.join(a[step.n], x[step.n]), l.top());
            }
        }
    }

    #[test]
    fn literal_search_agrees_on_small_lattices() {
        for l in gen::all_lattices(5) {
            if l.len() < 2 {
                continue;
            }
            let d = literal_dim(&l);
            assert_eq!(krull_dim_algebraic(&l, 8).unwrap().outcome, KrullOutcome::Dim(d));
            assert_eq!(krull_dim_chains(&l), KrullOutcome::Dim(d));
        }
    }

    #[test]
    fn greedy_dominates_every_witness() {
        for l in gen::all_lattices(5) {
            let m = l.len();
            for x1 in 0..m {
                for x2 in 0..m {
                    let g = greedy_witness(&l, &[x1, x2]);
                    for a1 in 0..m {
                        for a2 in 0..m {
                            let ok = l.meet(a1, x1) == l.bot() && l.leq(l.meet(a2, x2), l.join(a1, x1));
                            if ok {
                                assert!(l.leq(a1, g[0]) && l.leq(a2, g[1]));
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn depth_cutoff_is_inconclusive() {
        let r = krull_dim_algebraic(&FinDistLattice::chain(6), 2).unwrap();
        assert_eq!(r.outcome, KrullOutcome::Inconclusive { tested_up_to: 2 });
    }
}
