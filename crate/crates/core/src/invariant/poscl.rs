//! Positive closedness, types of points, transformations into the type
//! space functor, and the action of homomorphisms.

use std::collections::{HashMap, HashSet};

use fixedbitset::FixedBitSet;
use serde::Serialize;

use super::lm::LmLattice;
use super::view::{ModelView, Point};
use crate::dlat::{spec, FinDistLattice, PrimeFilter};
use crate::model::{is_elementary_hom, Homomorphism};
use crate::semcat::{CtxId, SemCat};
use crate::syntax::SortId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PcCounterexample {
    pub context: Vec<SortId>,
    pub ctx: CtxId,
    pub u: usize,
    pub point: Point,
}

/// Every point outside a stored `u` lies in a stored set disjoint from `u`.
/// The union of all sets disjoint from `u` is the pseudo-complement, so
/// it suffices to test membership there.
pub fn is_positively_closed_direct(cat: &SemCat, view: &ModelView) -> Result<(), PcCounterexample> {
    match failing_triples(cat, view, 1).into_iter().next() {
        Some(c) => Err(c),
        None => Ok(()),
    }
}

/// Up to `limit` triples `(x, u, a)` violating positive closedness.
pub fn failing_triples(cat: &SemCat, view: &ModelView, limit: usize) -> Vec<PcCounterexample> {
    let mut out = Vec::new();
    for x in cat.contexts() {
        let points = view.points(cat, x);
        if points.is_empty() {
            continue;
        }
        for u in 0..cat.sub_len(x) {
            let nu = cat.pseudo_complement(x, u);
            for p in &points {
                if !view.contains(cat, x, u, p) && !view.contains(cat, x, nu, p) {
                    out.push(PcCounterexample { context: cat.sorts(x).to_vec(), ctx: x, u, point: p.clone() });
                    if out.len() == limit {
                        return out;
                    }
                }
            }
        }
    }
    out
}

/// `{ u ∈ Sub(x) : p ∈ u }` as a filter on the stored sets at `x`.
pub fn tp(cat: &SemCat, view: &ModelView, x: CtxId, p: &[usize]) -> PrimeFilter {
    PrimeFilter { members: view.type_of(cat, x, p) }
}

/// A transformation from the model to the type space functor, given by
/// its component at every point inside the bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NatTrans {
    /// The prime filter of the colimit lattice inducing it.
    pub filter: PrimeFilter,
    pub components: Vec<((CtxId, Point), FixedBitSet)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NatReport {
    pub spec_size: usize,
    pub constructed: usize,
    pub distinct: usize,
    pub all_natural: bool,
    pub all_prime: bool,
    /// The transformation induced by `{1}` agrees with `tp` everywhere.
    pub tp_matches: bool,
    /// `tp(a) ⊆ τ(a)` for every transformation and point.
    pub tp_minimal: bool,
    pub problems: Vec<String>,
}

/// Converts each prime filter of the colimit lattice into a
/// transformation and verifies it.
pub fn nat_transformations(cat: &SemCat, lm: &LmLattice) -> Result<(Vec<NatTrans>, NatReport), String> {
    let l = lm.lattice.as_ref().ok_or("the colimit order is not a lattice")?;
    let sp = spec(l).map_err(|e| e.to_string())?;
    let mut subs: HashMap<CtxId, FinDistLattice> = HashMap::new();
    let mut report = NatReport {
        spec_size: sp.points.len(),
        constructed: 0,
        distinct: 0,
        all_natural: true,
        all_prime: true,
        tp_matches: true,
        tp_minimal: true,
        problems: Vec::new(),
    };
    let ctxs: Vec<CtxId> = cat.contexts().filter(|&c| cat.sorts(c).len() <= lm.pair_bound).collect();
    // naturality is checked along every coordinate map inside the bound
    let mut maps = Vec::new();
    for &x in &ctxs {
        for &y in &ctxs {
            let (xs, ys) = (cat.sorts(x), cat.sorts(y));
            for sigma in crate::semcat::all_coordinate_maps(xs.len(), ys.len()) {
                if sigma.iter().zip(ys).all(|(&j, &s)| xs[j] == s) {
                    let pb: Vec<usize> = (0..cat.sub_len(y)).map(|v| cat.pullback(x, y, &sigma, v).unwrap()).collect();
                    maps.push((x, y, sigma, pb));
                }
            }
        }
    }
    let mut out = Vec::new();
    let mut checked_prime: HashSet<(CtxId, FixedBitSet)> = HashSet::new();
    for filter in &sp.points {
        let mut components = Vec::new();
        let mut lookup: HashMap<(CtxId, Point), FixedBitSet> = HashMap::new();
        for &x in &ctxs {
            for p in lm.points_at(x) {
                let mut comp = FixedBitSet::with_capacity(cat.sub_len(x));
                comp.extend((0..cat.sub_len(x)).filter(|&u| filter.contains(lm.class_of(cat, x, p, u))));
                if checked_prime.insert((x, comp.clone())) {
                    let sub = subs.entry(x).or_insert_with(|| cat.sub_lattice(x).expect("stored sets form a lattice"));
                    if let Err(e) = (PrimeFilter { members: comp.clone() }).validate(sub) {
                        report.all_prime = false;
                        report.problems.push(format!("component at [{}] is not prime: {e}", cat.context_name(x)));
                    }
                }
                let t = tp(cat, &lm.view, x, p);
                if !t.members.is_subset(&comp) {
                    report.tp_minimal = false;
                    report.problems.push(format!("tp not below a component at [{}]", cat.context_name(x)));
                }
                if filter.members.count_ones(..) == 1 && t.members != comp {
                    report.tp_matches = false;
                    report.problems.push(format!("the {{1}} transformation differs from tp at [{}]", cat.context_name(x)));
                }
                lookup.insert((x, p.clone()), comp.clone());
                components.push(((x, p.clone()), comp));
            }
        }
        for (x, y, sigma, pb) in &maps {
            for p in lm.points_at(*x) {
                let q = lm.view.map_point(cat, *x, *y, sigma, p);
                let (cx, cy) = (&lookup[&(*x, p.clone())], &lookup[&(*y, q)]);
                if (0..cat.sub_len(*y)).any(|v| cy.contains(v) != cx.contains(pb[v])) {
                    report.all_natural = false;
                    report.problems.push(format!("not natural along {sigma:?} into [{}]", cat.context_name(*y)));
                }
            }
        }
        out.push(NatTrans { filter: filter.clone(), components });
    }
    report.constructed = out.len();
    let distinct: HashSet<Vec<FixedBitSet>> =
        out.iter().map(|t| t.components.iter().map(|(_, c)| c.clone()).collect()).collect();
    report.distinct = distinct.len();
    Ok((out, report))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LHom {
    /// Image of each class of the source.
    pub map: Vec<usize>,
    pub is_lattice_hom: bool,
}

/// `[u at a] ↦ [u at h(a)]` from the colimit of member `src` to that of `tgt`.
/// Fails with the offending pair if the assignment is not well defined.
pub fn l_of_hom(cat: &SemCat, h: &Homomorphism, lm_src: &LmLattice, lm_tgt: &LmLattice) -> Result<LHom, String> {
    let (i, j) = (lm_src.view.factors[0], lm_tgt.view.factors[0]);
    let (m, n) = (&cat.family[i], &cat.family[j]);
    let mut map = vec![usize::MAX; lm_src.len()];
    for (x, p, w, c) in lm_src.generators() {
        let q = vec![h.map_index(m, n, cat.sorts(x), p[0])];
        let d = lm_tgt.class_of(cat, x, &q, w);
        if map[c] == usize::MAX {
            map[c] = d;
        } else if map[c] != d {
            return Err(format!(
                "class {c} is sent to both {} and {d} (set {w} at [{}]); the bounded computation is incomplete here",
                map[c],
                cat.context_name(x)
            ));
        }
    }
    let is_lattice_hom = match (&lm_src.lattice, &lm_tgt.lattice) {
        (Some(a), Some(b)) => a.is_hom_to(b, &map) && map[a.top()] == b.top() && map[a.bot()] == b.bot(),
        _ => false,
    };
    Ok(LHom { map, is_lattice_hom })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ElementarityVsTp {
    pub elementary: bool,
    pub tp_preserved: bool,
}

/// Compares elementarity of `h : family[src] -> family[tgt]` with the
/// equality `tp(h(a)) = tp(a)` at every tuple of every stored context.
pub fn check_hom_elementarity_vs_tp(cat: &SemCat, src: usize, tgt: usize, h: &Homomorphism) -> Result<bool, ElementarityVsTp> {
    let elementary = is_elementary_hom(cat, src, tgt, h).is_ok();
    let (m, n) = (&cat.family[src], &cat.family[tgt]);
    let (vm, vn) = (ModelView::member(src), ModelView::member(tgt));
    let tp_preserved = cat.contexts().all(|x| {
        let sorts = cat.sorts(x);
        (0..m.product_size(sorts)).all(|a| {
            let b = h.map_index(m, n, sorts, a);
            tp(cat, &vm, x, &[a]) == tp(cat, &vn, x, &[b])
        })
    });
    if elementary == tp_preserved {
        Ok(elementary)
    } else {
        Err(ElementarityVsTp { elementary, tp_preserved })
    }
}
