use fixedbitset::FixedBitSet;

use crate::semcat::{CtxId, SemCat};

/// A set-valued functor on the saturated category that is read off the
/// family: a single member, a pointwise product of members, or a member
/// cut down to chosen elements of each sort.
///
/// A point at context `x` lists one tuple index per factor, and a stored
/// set contains the point iff every factor's component contains its tuple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelView {
    pub factors: Vec<usize>,
    /// Allowed elements per sort (single-factor views only).
    pub restrict: Option<Vec<FixedBitSet>>,
}

pub type Point = Vec<usize>;

impl ModelView {
    pub fn member(i: usize) -> Self {
        ModelView { factors: vec![i], restrict: None }
    }

    /// The pointwise product of two members.
    pub fn product(i: usize, j: usize) -> Self {
        ModelView { factors: vec![i, j], restrict: None }
    }

    pub fn restricted(i: usize, sets: Vec<FixedBitSet>) -> Self {
        ModelView { factors: vec![i], restrict: Some(sets) }
    }

    fn allowed(&self, cat: &SemCat, x: CtxId, member: usize, idx: usize) -> bool {
        match &self.restrict {
            None => true,
            Some(sets) => {
                let sorts = cat.sorts(x);
                let t = cat.family[member].decode(sorts, idx);
                t.iter().zip(sorts).all(|(&a, s)| sets[s.0].contains(a))
            }
        }
    }

    /// All points at `x`, in lexicographic order of factor indices.
    pub fn points(&self, cat: &SemCat, x: CtxId) -> Vec<Point> {
        let mut out: Vec<Point> = vec![Vec::new()];
        for &m in &self.factors {
            let here: Vec<usize> =
                (0..cat.member_size(x, m)).filter(|&k| self.allowed(cat, x, m, k)).collect();
            out = out
                .into_iter()
                .flat_map(|p| here.iter().map(move |&k| [p.clone(), vec![k]].concat()))
                .collect();
        }
        out
    }

    pub fn contains(&self, cat: &SemCat, x: CtxId, d: usize, p: &[usize]) -> bool {
        self.factors.iter().zip(p).all(|(&m, &k)| cat.contains(x, d, m, k))
    }

    /// The image of `p` under the coordinate map `x -> y` with index list `sigma`.
    pub fn map_point(&self, cat: &SemCat, x: CtxId, y: CtxId, sigma: &[usize], p: &[usize]) -> Point {
        self.factors
            .iter()
            .zip(p)
            .map(|(&m, &k)| {
                let model = &cat.family[m];
                let t = model.decode(cat.sorts(x), k);
                let u: Vec<usize> = sigma.iter().map(|&j| t[j]).collect();
                model.encode(cat.sorts(y), &u)
            })
            .collect()
    }

    /// The point of `x ⋆ y` pairing `a` at `x` with `b` at `y`.
    pub fn pair_point(&self, cat: &SemCat, x: CtxId, y: CtxId, a: &[usize], b: &[usize]) -> Point {
        self.factors
            .iter()
            .enumerate()
            .map(|(f, &m)| {
                let model = &cat.family[m];
                let mut t = model.decode(cat.sorts(x), a[f]);
                t.extend(model.decode(cat.sorts(y), b[f]));
                let z: Vec<_> = cat.sorts(x).iter().chain(cat.sorts(y)).copied().collect();
                model.encode(&z, &t)
            })
            .collect()
    }

    /// The smallest stored set containing `p`.
    pub fn tau(&self, cat: &SemCat, x: CtxId, p: &[usize]) -> usize {
        let mut acc = cat.bits(x, cat.top(x)).clone();
        for d in 0..cat.sub_len(x) {
            if self.contains(cat, x, d, p) {
                acc.intersect_with(cat.bits(x, d));
            }
        }
        cat.lookup(x, &acc).expect("finite meets are stored")
    }

    /// `{ d : p ∈ d }` as a set of stored-set ids.
    pub fn type_of(&self, cat: &SemCat, x: CtxId, p: &[usize]) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(cat.sub_len(x));
        out.extend((0..cat.sub_len(x)).filter(|&d| self.contains(cat, x, d, p)));
        out
    }
}
