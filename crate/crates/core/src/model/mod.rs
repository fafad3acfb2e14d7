//! Finite set-valued models.
//!
//! Subsets of a carrier product are bitsets indexed row-major: the last
//! coordinate varies fastest.

mod eval;
mod hom;

use std::sync::Arc;

use fixedbitset::FixedBitSet;

use crate::syntax::{FuncId, RelId, Signature, SortId};

pub use eval::{check_sequent, eval_formula, eval_term, SequentCheck};
pub use hom::{enumerate_homomorphisms, is_elementary_hom, ElementaryFailure, HomEnumeration, Homomorphism};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinModel {
    pub sig: Arc<Signature>,
    /// Element names per sort; element `k` of sort `s` is `names[s][k]`.
    pub names: Vec<Vec<String>>,
    /// Per relation, the set of tuples over its arity.
    pub rels: Vec<FixedBitSet>,
    /// Per function, the value at each input tuple of its domain.
    pub funcs: Vec<Vec<u32>>,
}

impl FinModel {
    /// A model with the given carrier sizes, empty relations and functions
    /// sending everything to element 0 (callers fill in real tables).
    pub fn empty(sig: Arc<Signature>, sizes: Vec<usize>) -> Self {
        assert_eq!(sizes.len(), sig.sorts.len());
        let names = sizes.iter().map(|&k| (0..k).map(|i| i.to_string()).collect()).collect();
        let mut m = FinModel { sig: sig.clone(), names, rels: Vec::new(), funcs: Vec::new() };
        m.rels = sig.rels.iter().map(|r| FixedBitSet::with_capacity(m.product_size(&r.arity))).collect();
        m.funcs = sig.funcs.iter().map(|f| vec![0; m.product_size(&f.domain)]).collect();
        m
    }

    pub fn card(&self, s: SortId) -> usize {
        self.names[s.0].len()
    }

    pub fn product_size(&self, sorts: &[SortId]) -> usize {
        sorts.iter().map(|&s| self.card(s)).product()
    }

    pub fn encode(&self, sorts: &[SortId], tuple: &[usize]) -> usize {
        debug_assert_eq!(sorts.len(), tuple.len());
        sorts.iter().zip(tuple).fold(0, |acc, (&s, &x)| acc * self.card(s) + x)
    }

    pub fn decode(&self, sorts: &[SortId], mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; sorts.len()];
        for (slot, &s) in out.iter_mut().zip(sorts).rev() {
            let k = self.card(s);
            *slot = idx % k;
            idx /= k;
        }
        out
    }

    pub fn rel_holds(&self, r: RelId, tuple: &[usize]) -> bool {
        let arity = &self.sig.rel(r).arity;
        self.rels[r.0].contains(self.encode(arity, tuple))
    }

    pub fn set_rel(&mut self, r: RelId, tuple: &[usize], on: bool) {
        let idx = self.encode(&self.sig.rel(r).arity.clone(), tuple);
        self.rels[r.0].set(idx, on);
    }

    pub fn apply(&self, f: FuncId, args: &[usize]) -> usize {
        let dom = &self.sig.func(f).domain;
        self.funcs[f.0][self.encode(dom, args)] as usize
    }

    /// Checks that every interpretation stays inside the carriers.
    pub fn validate(&self) -> Result<(), String> {
        for (i, f) in self.sig.funcs.iter().enumerate() {
            if self.funcs[i].len() != self.product_size(&f.domain) {
                return Err(format!("table of `{}` has the wrong length", f.name));
            }
            if let Some(&v) = self.funcs[i].iter().find(|&&v| v as usize >= self.card(f.codomain)) {
                return Err(format!("`{}` takes value {v} outside its codomain", f.name));
            }
        }
        for (i, r) in self.sig.rels.iter().enumerate() {
            if self.rels[i].len() != self.product_size(&r.arity) {
                return Err(format!("tuple set of `{}` has the wrong universe", r.name));
            }
        }
        Ok(())
    }

    /// Prints the model in the model DSL.
    pub fn to_text(&self) -> String {
        let sig = &self.sig;
        let mut out = String::new();
        for (s, name) in sig.sorts.iter().enumerate() {
            out.push_str(&format!("{name} = {{{}}}\n", self.names[s].join(", ")));
        }
        let tuple = |sorts: &[SortId], t: &[usize]| -> String {
            let parts: Vec<&str> = t.iter().zip(sorts).map(|(&x, s)| self.names[s.0][x].as_str()).collect();
            format!("({})", parts.join(","))
        };
        for (r, sym) in sig.rels.iter().enumerate() {
            let ts: Vec<String> = self.rels[r].ones().map(|i| tuple(&sym.arity, &self.decode(&sym.arity, i))).collect();
            out.push_str(&format!("{} = {{{}}}\n", sym.name, ts.join(", ")));
        }
        for (f, sym) in sig.funcs.iter().enumerate() {
            let entries: Vec<String> = (0..self.funcs[f].len())
                .map(|i| {
                    let v = &self.names[sym.codomain.0][self.funcs[f][i] as usize];
                    format!("{} -> {v}", tuple(&sym.domain, &self.decode(&sym.domain, i)))
                })
                .collect();
            out.push_str(&format!("{} = {{{}}}\n", sym.name, entries.join(", ")));
        }
        out
    }
}

/// The pointwise product. Element `(a, b)` of sort `s` has index
/// `a * |N_s| + b`.
pub fn model_product(m: &FinModel, n: &FinModel) -> FinModel {
    assert_eq!(m.sig, n.sig, "product needs a shared signature");
    let sig = m.sig.clone();
    let sizes: Vec<usize> = (0..sig.sorts.len()).map(|s| m.card(SortId(s)) * n.card(SortId(s))).collect();
    let mut p = FinModel::empty(sig.clone(), sizes);
    for s in 0..sig.sorts.len() {
        let s = SortId(s);
        p.names[s.0] = (0..m.card(s))
            .flat_map(|a| (0..n.card(s)).map(move |b| (a, b)))
            .map(|(a, b)| format!("{}_{}", m.names[s.0][a], n.names[s.0][b]))
            .collect();
    }
    let split = |sorts: &[SortId], t: &[usize]| -> (Vec<usize>, Vec<usize>) {
        t.iter().zip(sorts).map(|(&x, &s)| (x / n.card(s), x % n.card(s))).unzip()
    };
    for (r, sym) in sig.rels.iter().enumerate() {
        for i in 0..p.product_size(&sym.arity) {
            let (a, b) = split(&sym.arity, &p.decode(&sym.arity, i));
            if m.rel_holds(RelId(r), &a) && n.rel_holds(RelId(r), &b) {
                p.rels[r].insert(i);
            }
        }
    }
    for (f, sym) in sig.funcs.iter().enumerate() {
        let nc = n.card(sym.codomain);
        for i in 0..p.product_size(&sym.domain) {
            let (a, b) = split(&sym.domain, &p.decode(&sym.domain, i));
            p.funcs[f][i] = (m.apply(FuncId(f), &a) * nc + n.apply(FuncId(f), &b)) as u32;
        }
    }
    p
}

/// The one-point model interpreting every relation as full.
pub fn terminal_model(sig: Arc<Signature>) -> FinModel {
    let k = sig.sorts.len();
    let mut m = FinModel::empty(sig, vec![1; k]);
    for r in &mut m.rels {
        r.insert_range(..);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_model, parse_theory};

    #[test]
    fn encode_decode_roundtrip() {
        let th = parse_theory("sort A B").unwrap();
        let m = parse_model("A = {a,b,c} B = {x,y}", &th.sig).unwrap();
        let sorts = [SortId(0), SortId(1), SortId(0)];
        for i in 0..m.product_size(&sorts) {
            assert_eq!(m.encode(&sorts, &m.decode(&sorts, i)), i);
        }
        assert_eq!(m.encode(&sorts, &[0, 0, 1]), 1);
        assert_eq!(m.encode(&sorts, &[0, 1, 0]), 3);
    }

    #[test]
    fn product_sizes_and_text() {
        let th = parse_theory("sort A rel R : A A func f : A -> A").unwrap();
        let m = parse_model("A = {0,1} R = {(0,1)} f = {0 -> 1, 1 -> 0}", &th.sig).unwrap();
        let n = parse_model("A = {0,1,2} R = {(2,2)} f = {0 -> 0, 1 -> 0, 2 -> 1}", &th.sig).unwrap();
        let p = model_product(&m, &n);
        assert_eq!(p.card(SortId(0)), 6);
        assert!(p.rel_holds(RelId(0), &[2, 5]));
        assert_eq!(p.rels[0].count_ones(..), 1);
        p.validate().unwrap();
        let again = parse_model(&p.to_text(), &th.sig).unwrap();
        assert_eq!(again, p);
    }
}
