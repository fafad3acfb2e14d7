use fixedbitset::FixedBitSet;

use super::FinModel;
use crate::syntax::{Formula, Sequent, SortId, Term};

pub fn eval_term(m: &FinModel, t: &Term, ctx: &[(String, SortId)], tuple: &[usize]) -> usize {
    match t {
        Term::Var(v) => {
            let i = ctx.iter().rposition(|(n, _)| n == v).expect("variable bound by the context");
            tuple[i]
        }
        Term::App(f, args) => {
            let vals: Vec<usize> = args.iter().map(|a| eval_term(m, a, ctx, tuple)).collect();
            m.apply(*f, &vals)
        }
    }
}

/// Calls `visit` on every tuple of the product in index order.
fn for_each_tuple(cards: &[usize], mut visit: impl FnMut(usize, &[usize])) {
    if cards.iter().any(|&k| k == 0) {
        return;
    }
    let total: usize = cards.iter().product();
    let mut t = vec![0; cards.len()];
    for idx in 0..total {
        visit(idx, &t);
        for j in (0..cards.len()).rev() {
            t[j] += 1;
            if t[j] < cards[j] {
                break;
            }
            t[j] = 0;
        }
    }
}

/// The extension of `f` in `m` over the context `ctx`.
pub fn eval_formula(m: &FinModel, f: &Formula, ctx: &[(String, SortId)]) -> FixedBitSet {
    let cards: Vec<usize> = ctx.iter().map(|&(_, s)| m.card(s)).collect();
    let total: usize = cards.iter().product();
    let mut out = FixedBitSet::with_capacity(total);
    match f {
        Formula::Top => out.insert_range(..),
        Formula::Bot => {}
        Formula::Eq(a, b) => for_each_tuple(&cards, |i, t| {
            if eval_term(m, a, ctx, t) == eval_term(m, b, ctx, t) {
                out.insert(i);
            }
        }),
        Formula::Rel(r, ts) => for_each_tuple(&cards, |i, t| {
            let args: Vec<usize> = ts.iter().map(|x| eval_term(m, x, ctx, t)).collect();
            if m.rel_holds(*r, &args) {
                out.insert(i);
            }
        }),
        Formula::And(a, b) => {
            out = eval_formula(m, a, ctx);
            out.intersect_with(&eval_formula(m, b, ctx));
        }
        Formula::Or(a, b) => {
            out = eval_formula(m, a, ctx);
            out.union_with(&eval_formula(m, b, ctx));
        }
        Formula::Exists(v, s, body) => {
            let mut ext = ctx.to_vec();
            ext.push((v.clone(), *s));
            let k = m.card(*s);
            for i in eval_formula(m, body, &ext).ones() {
                out.insert(i / k);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequentCheck {
    pub holds: bool,
    /// A tuple satisfying the left side but not the right.
    pub counterexample: Option<Vec<usize>>,
}

pub fn check_sequent(m: &FinModel, s: &Sequent) -> SequentCheck {
    let mut bad = eval_formula(m, &s.lhs, &s.context);
    bad.difference_with(&eval_formula(m, &s.rhs, &s.context));
    let sorts: Vec<SortId> = s.context.iter().map(|&(_, so)| so).collect();
    let counterexample = bad.ones().next().map(|i| m.decode(&sorts, i));
    SequentCheck { holds: counterexample.is_none(), counterexample }
}
