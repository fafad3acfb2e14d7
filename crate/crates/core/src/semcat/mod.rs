//! Saturated lattices of simultaneously definable sets.
//!
//! For a family `M_0..M_k` and every context `x` (a list of at most `n_max`
//! sorts) we store the set of tuples `(φ^{M_0}, .., φ^{M_k})` for positive
//! existential `φ` with free variables in `x`. A tuple is one bitset: the
//! members' product carriers laid end to end.

mod saturate;
mod witness;

use std::collections::HashMap;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use serde::Serialize;
use thiserror::Error;

use crate::dlat::{DlatError, FinDistLattice};
use crate::model::FinModel;
use crate::syntax::{Formula, Signature, SortId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CtxId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SemCatConfig {
    pub n_max: usize,
    pub max_lattice: usize,
    /// Maximal term depth in atomic formulas.
    pub term_depth: usize,
}

impl Default for SemCatConfig {
    fn default() -> Self {
        SemCatConfig { n_max: 3, max_lattice: 4096, term_depth: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SatError {
    #[error("the model family is empty")]
    EmptyFamily,
    #[error("member {0} has a different signature")]
    SignatureMismatch(usize),
    #[error("member {member} is malformed: {message}")]
    Malformed { member: usize, message: String },
    #[error("lattice at context [{context}] exceeded {limit} elements during {stage}; partial sizes: {partial}")]
    Cutoff { context: String, stage: &'static str, limit: usize, partial: String },
    #[error("context [{0}] is not stored")]
    UnknownContext(String),
}

/// How a stored set was first obtained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    Atom(Formula),
    Meet(usize, usize),
    Join(usize, usize),
    /// Image along dropping the last coordinate of `ctx`.
    Exists { ctx: CtxId, id: usize },
    /// Pullback along the coordinate map with the given index list.
    Pullback { ctx: CtxId, id: usize, sigma: Vec<usize> },
}

#[derive(Debug, Clone, Default)]
pub(crate) struct SubStore {
    pub(crate) elems: Vec<FixedBitSet>,
    pub(crate) prov: Vec<Provenance>,
    pub(crate) index: HashMap<FixedBitSet, usize>,
    /// Member of the meet-closure of primitives.
    pub(crate) in_q: Vec<bool>,
    pub(crate) prim: Vec<bool>,
}

impl SubStore {
    fn lookup(&self, bits: &FixedBitSet) -> Option<usize> {
        self.index.get(bits).copied()
    }
}

#[derive(Debug, Clone)]
pub struct SemCat {
    pub family: Vec<FinModel>,
    pub sig: Arc<Signature>,
    pub config: SemCatConfig,
    contexts: Vec<Vec<SortId>>,
    ctx_index: HashMap<Vec<SortId>, CtxId>,
    /// Per context, member offsets followed by the total length.
    offsets: Vec<Vec<usize>>,
    store: Vec<SubStore>,
    top: Vec<usize>,
    bot: Vec<usize>,
}

/// Saturates with the default configuration and the given context bound.
pub fn saturate(family: Vec<FinModel>, n_max: usize) -> Result<SemCat, SatError> {
    SemCat::saturate(family, SemCatConfig { n_max, ..SemCatConfig::default() })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WbCounterexample {
    pub context: Vec<SortId>,
    pub a: usize,
    pub b: usize,
}

impl SemCat {
    pub fn num_contexts(&self) -> usize {
        self.contexts.len()
    }

    pub fn contexts(&self) -> impl Iterator<Item = CtxId> {
        (0..self.contexts.len()).map(CtxId)
    }

    pub fn sorts(&self, c: CtxId) -> &[SortId] {
        &self.contexts[c.0]
    }

    pub fn ctx_id(&self, sorts: &[SortId]) -> Option<CtxId> {
        self.ctx_index.get(sorts).copied()
    }

    pub fn context_name(&self, c: CtxId) -> String {
        self.sorts(c).iter().map(|&s| self.sig.sort_name(s)).collect::<Vec<_>>().join(",")
    }

    pub fn offset(&self, c: CtxId, member: usize) -> usize {
        self.offsets[c.0][member]
    }

    pub fn member_size(&self, c: CtxId, member: usize) -> usize {
        self.offsets[c.0][member + 1] - self.offsets[c.0][member]
    }

    pub fn total(&self, c: CtxId) -> usize {
        *self.offsets[c.0].last().unwrap()
    }

    pub fn sub_len(&self, c: CtxId) -> usize {
        self.store[c.0].elems.len()
    }

    pub fn bits(&self, c: CtxId, id: usize) -> &FixedBitSet {
        &self.store[c.0].elems[id]
    }

    pub fn provenance(&self, c: CtxId, id: usize) -> &Provenance {
        &self.store[c.0].prov[id]
    }

    pub fn lookup(&self, c: CtxId, bits: &FixedBitSet) -> Option<usize> {
        self.store[c.0].lookup(bits)
    }

    pub fn top(&self, c: CtxId) -> usize {
        self.top[c.0]
    }

    pub fn bot(&self, c: CtxId) -> usize {
        self.bot[c.0]
    }

    pub fn leq(&self, c: CtxId, a: usize, b: usize) -> bool {
        self.bits(c, a).is_subset(self.bits(c, b))
    }

    pub fn meet(&self, c: CtxId, a: usize, b: usize) -> usize {
        let mut m = self.bits(c, a).clone();
        m.intersect_with(self.bits(c, b));
        self.lookup(c, &m).expect("saturated lattices are closed under meets")
    }

    pub fn join(&self, c: CtxId, a: usize, b: usize) -> usize {
        let mut m = self.bits(c, a).clone();
        m.union_with(self.bits(c, b));
        self.lookup(c, &m).expect("saturated lattices are closed under joins")
    }

    /// Whether `d` contains tuple `idx` of member `member`.
    pub fn contains(&self, c: CtxId, d: usize, member: usize, idx: usize) -> bool {
        self.bits(c, d).contains(self.offset(c, member) + idx)
    }

    /// The component `ev_member(d)` as a subset of the member's product.
    pub fn component(&self, c: CtxId, d: usize, member: usize) -> FixedBitSet {
        let off = self.offset(c, member);
        let mut out = FixedBitSet::with_capacity(self.member_size(c, member));
        for i in 0..self.member_size(c, member) {
            if self.bits(c, d).contains(off + i) {
                out.insert(i);
            }
        }
        out
    }

    /// Global index table of the coordinate map `f: x -> y` given by
    /// `y_j = x_{sigma[j]}`: entry `k` is the position of `f(t)` for the
    /// tuple at position `k` of `x`.
    pub fn map_table(&self, x: CtxId, y: CtxId, sigma: &[usize]) -> Vec<usize> {
        let (xs, ys) = (self.sorts(x), self.sorts(y));
        assert_eq!(sigma.len(), ys.len());
        assert!(sigma.iter().zip(ys).all(|(&j, &s)| xs[j] == s), "coordinate map must respect sorts");
        let mut tbl = Vec::with_capacity(self.total(x));
        for (i, m) in self.family.iter().enumerate() {
            for k in 0..self.member_size(x, i) {
                let t = m.decode(xs, k);
                let u: Vec<usize> = sigma.iter().map(|&j| t[j]).collect();
                tbl.push(self.offset(y, i) + m.encode(ys, &u));
            }
        }
        tbl
    }

    fn pullback_bits(&self, tbl: &[usize], d: &FixedBitSet) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(tbl.len());
        for (k, &j) in tbl.iter().enumerate() {
            if d.contains(j) {
                out.insert(k);
            }
        }
        out
    }

    fn image_bits(&self, tbl: &[usize], len: usize, d: &FixedBitSet) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(len);
        for k in d.ones() {
            out.insert(tbl[k]);
        }
        out
    }

    /// Pullback of `d` in `Sub(y)` along `f: x -> y`.
    pub fn pullback(&self, x: CtxId, y: CtxId, sigma: &[usize], d: usize) -> Option<usize> {
        let tbl = self.map_table(x, y, sigma);
        self.lookup(x, &self.pullback_bits(&tbl, self.bits(y, d)))
    }

    /// Image of `d` in `Sub(x)` along `f: x -> y`.
    pub fn image(&self, x: CtxId, y: CtxId, sigma: &[usize], d: usize) -> Option<usize> {
        let tbl = self.map_table(x, y, sigma);
        self.lookup(y, &self.image_bits(&tbl, self.total(y), self.bits(x, d)))
    }

    /// Image along the projection keeping the coordinates `keep`, in order.
    pub fn image_along_projection(&self, c: CtxId, d: usize, keep: &[usize]) -> Result<(CtxId, usize), SatError> {
        let xs = self.sorts(c);
        let target: Vec<SortId> = keep.iter().map(|&j| xs[j]).collect();
        let y = self.ctx_id(&target).ok_or_else(|| SatError::UnknownContext(self.sort_list_name(&target)))?;
        let id = self.image(c, y, keep, d).expect("saturated lattices are closed under images");
        Ok((y, id))
    }

    fn sort_list_name(&self, sorts: &[SortId]) -> String {
        sorts.iter().map(|&s| self.sig.sort_name(s)).collect::<Vec<_>>().join(",")
    }

    /// `Sub(x)` as an abstract lattice; element `i` is stored set `i`.
    pub fn sub_lattice(&self, c: CtxId) -> Result<FinDistLattice, DlatError> {
        FinDistLattice::from_leq(self.sub_len(c), |a, b| self.leq(c, a, b))
    }

    /// The largest stored set disjoint from `b`.
    pub fn pseudo_complement(&self, c: CtxId, b: usize) -> usize {
        let mut acc = self.bot(c);
        for u in 0..self.sub_len(c) {
            if self.bits(c, u).is_disjoint(self.bits(c, b)) {
                acc = self.join(c, acc, u);
            }
        }
        acc
    }

    /// Every `a ≰ b` is witnessed by a nonzero `u ≤ a` disjoint from `b`.
    /// In a finite distributive lattice `u = a ∧ ¬b` is the largest candidate.
    pub fn is_weakly_boolean(&self) -> Result<(), WbCounterexample> {
        for c in self.contexts() {
            for b in 0..self.sub_len(c) {
                let nb = self.pseudo_complement(c, b);
                for a in 0..self.sub_len(c) {
                    if !self.leq(c, a, b) && self.meet(c, a, nb) == self.bot(c) {
                        return Err(WbCounterexample { context: self.sorts(c).to_vec(), a, b });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_two_valued(&self) -> bool {
        self.sub_len(self.ctx_id(&[]).unwrap()) == 2
    }

    /// Nonzero sets with nothing stored strictly between them and the bottom.
    pub fn atom_subobjects(&self, c: CtxId) -> Vec<usize> {
        let bot = self.bot(c);
        (0..self.sub_len(c))
            .filter(|&a| a != bot)
            .filter(|&a| (0..self.sub_len(c)).all(|u| u == bot || u == a || !self.leq(c, u, a)))
            .collect()
    }

    /// Re-evaluates every witness formula in every member.
    pub fn verify_witnesses(&self) -> Result<(), String> {
        for c in self.contexts() {
            let ctx = witness::canonical_context(self.sorts(c));
            for d in 0..self.sub_len(c) {
                let f = self.witness(c, d);
                for (i, m) in self.family.iter().enumerate() {
                    if crate::model::eval_formula(m, &f, &ctx) != self.component(c, d, i) {
                        return Err(format!("witness of set {d} at [{}] is wrong in member {i}", self.context_name(c)));
                    }
                }
            }
        }
        Ok(())
    }

    /// Checks that `ev_member` preserves bottom, top, meets, joins,
    /// images along projections and pullbacks along coordinate maps,
    /// by recomputing each on plain subsets of the member's products.
    pub fn check_ev_coherence(&self, member: usize) -> Result<(), String> {
        let m = &self.family[member];
        for c in self.contexts() {
            let size = self.member_size(c, member);
            if self.component(c, self.bot(c), member).count_ones(..) != 0 {
                return Err(format!("bottom at [{}]", self.context_name(c)));
            }
            if self.component(c, self.top(c), member).count_ones(..) != size {
                return Err(format!("top at [{}]", self.context_name(c)));
            }
            let n = self.sub_len(c);
            let comps: Vec<FixedBitSet> = (0..n).map(|d| self.component(c, d, member)).collect();
            for a in 0..n {
                for b in 0..n {
                    let mut i = comps[a].clone();
                    i.intersect_with(&comps[b]);
                    let mut u = comps[a].clone();
                    u.union_with(&comps[b]);
                    if comps[self.meet(c, a, b)] != i || comps[self.join(c, a, b)] != u {
                        return Err(format!("lattice operations at [{}]", self.context_name(c)));
                    }
                }
            }
            let xs = self.sorts(c).to_vec();
            for keep in coordinate_projections(xs.len()) {
                let ys: Vec<SortId> = keep.iter().map(|&j| xs[j]).collect();
                let y = self.ctx_id(&ys).unwrap();
                for d in 0..n {
                    let (_, img) = self.image_along_projection(c, d, &keep).unwrap();
                    let mut direct = FixedBitSet::with_capacity(self.member_size(y, member));
                    for k in comps[d].ones() {
                        let t = m.decode(&xs, k);
                        let u: Vec<usize> = keep.iter().map(|&j| t[j]).collect();
                        direct.insert(m.encode(&ys, &u));
                    }
                    if self.component(y, img, member) != direct {
                        return Err(format!("image from [{}] keeping {keep:?}", self.context_name(c)));
                    }
                    let back = self.pullback(c, y, &keep, img).ok_or("pullback missing")?;
                    let mut direct_back = FixedBitSet::with_capacity(size);
                    for k in 0..size {
                        let t = m.decode(&xs, k);
                        let u: Vec<usize> = keep.iter().map(|&j| t[j]).collect();
                        if direct.contains(m.encode(&ys, &u)) {
                            direct_back.insert(k);
                        }
                    }
                    if self.component(c, back, member) != direct_back {
                        return Err(format!("pullback into [{}] along {keep:?}", self.context_name(c)));
                    }
                }
            }
        }
        Ok(())
    }

    /// Sizes of all `Sub(x)`, for reports.
    pub fn size_summary(&self) -> Vec<(String, usize)> {
        self.contexts().map(|c| (self.context_name(c), self.sub_len(c))).collect()
    }
}

/// All order-preserving coordinate selections of `0..n` (projections),
/// including the empty one.
pub fn coordinate_projections(n: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n).map(|mask| (0..n).filter(|&j| mask >> j & 1 == 1).collect()).collect()
}

/// All maps `sigma : 0..m -> 0..n`, as index lists.
pub fn all_coordinate_maps(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..m {
        out = out.into_iter().flat_map(|p: Vec<usize>| (0..n).map(move |j| [p.clone(), vec![j]].concat())).collect();
    }
    out
}

pub use witness::canonical_context;
