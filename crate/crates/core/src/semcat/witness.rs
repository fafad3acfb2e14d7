use std::collections::HashMap;

use super::{CtxId, Provenance, SemCat};
use crate::syntax::{Formula, SortId, Term};

/// The variables `v0, v1, ..` naming the coordinates of a context.
pub fn canonical_context(sorts: &[SortId]) -> Vec<(String, SortId)> {
    sorts.iter().enumerate().map(|(i, &s)| (format!("v{i}"), s)).collect()
}

impl SemCat {
    /// A formula over [`canonical_context`] defining stored set `d`.
    /// Bound variables are renamed `w0, w1, ..` so that none shadows another.
    pub fn witness(&self, c: CtxId, d: usize) -> Formula {
        let mut memo = HashMap::new();
        let raw = self.raw_witness(c, d, &mut memo);
        let mut counter = 0;
        normalize(&raw, &mut Vec::new(), &mut counter)
    }

    fn raw_witness(&self, c: CtxId, d: usize, memo: &mut HashMap<(CtxId, usize), Formula>) -> Formula {
        if let Some(f) = memo.get(&(c, d)) {
            return f.clone();
        }
        let f = match self.provenance(c, d) {
            Provenance::Atom(f) => f.clone(),
            Provenance::Meet(a, b) => match (self.raw_witness(c, *a, memo), self.raw_witness(c, *b, memo)) {
                (Formula::Top, g) | (g, Formula::Top) => g,
                (g, h) if g == h => g,
                (g, h) => Formula::and(g, h),
            },
            Provenance::Join(a, b) => match (self.raw_witness(c, *a, memo), self.raw_witness(c, *b, memo)) {
                (Formula::Bot, g) | (g, Formula::Bot) => g,
                (g, h) if g == h => g,
                (g, h) => Formula::or(g, h),
            },
            Provenance::Exists { ctx, id } => {
                let body = self.raw_witness(*ctx, *id, memo);
                let n = self.sorts(*ctx).len() - 1;
                Formula::Exists(format!("v{n}"), self.sorts(*ctx)[n], Box::new(body))
            }
            Provenance::Pullback { ctx, id, sigma } => {
                let body = self.raw_witness(*ctx, *id, memo);
                let map: HashMap<String, String> =
                    sigma.iter().enumerate().map(|(j, &i)| (format!("v{j}"), format!("v{i}"))).collect();
                body.rename_free(&map)
            }
        };
        memo.insert((c, d), f.clone());
        f
    }
}

fn normalize(f: &Formula, scope: &mut Vec<(String, String)>, counter: &mut usize) -> Formula {
    fn term(t: &Term, scope: &[(String, String)]) -> Term {
        match t {
            Term::Var(v) => Term::Var(scope.iter().rev().find(|(o, _)| o == v).map_or_else(|| v.clone(), |(_, n)| n.clone())),
            Term::App(f, args) => Term::App(*f, args.iter().map(|a| term(a, scope)).collect()),
        }
    }
    match f {
        Formula::Top | Formula::Bot => f.clone(),
        Formula::Eq(a, b) => Formula::Eq(term(a, scope), term(b, scope)),
        Formula::Rel(r, ts) => Formula::Rel(*r, ts.iter().map(|t| term(t, scope)).collect()),
        Formula::And(a, b) => Formula::and(normalize(a, scope, counter), normalize(b, scope, counter)),
        Formula::Or(a, b) => Formula::or(normalize(a, scope, counter), normalize(b, scope, counter)),
        Formula::Exists(v, s, body) => {
            let name = format!("w{counter}");
            *counter += 1;
            scope.push((v.clone(), name.clone()));
            let body = normalize(body, scope, counter);
            scope.pop();
            Formula::Exists(name, *s, Box::new(body))
        }
    }
}
