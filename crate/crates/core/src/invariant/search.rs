//! A bounded search for positively closed models reachable by homomorphisms.
//!
//! A candidate `N` is usable only if it satisfies every containment between
//! definables that holds in the family: adding it to the family must not
//! split any stored set. Such an `N` is a model of the same category, and a
//! homomorphism into it moves the failing points somewhere else.

use fixedbitset::FixedBitSet;
use serde::Serialize;

use super::poscl::{failing_triples, PcCounterexample};
use super::view::ModelView;
use crate::model::{enumerate_homomorphisms, FinModel};
use crate::semcat::{SatError, SemCat, SemCatConfig};
use crate::syntax::Signature;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SearchConfig {
    pub size_bound: usize,
    pub step_bound: usize,
    /// Maximal number of candidate structures enumerated per step.
    pub candidate_cap: usize,
    pub sat: SemCatConfig,
}

#[derive(Debug, Clone)]
pub enum SearchOutcome {
    Found { model: FinModel, steps: usize, path: Vec<FinModel> },
    NoneFound { steps: usize, open: Vec<PcCounterexample>, candidates: usize, truncated: bool },
}

/// Every structure with carriers of size `1..=size_bound`, up to `cap`.
pub fn enumerate_models(sig: &std::sync::Arc<Signature>, size_bound: usize, cap: usize) -> (Vec<FinModel>, bool) {
    let k = sig.sorts.len();
    let mut out = Vec::new();
    let mut sizes = vec![1; k];
    loop {
        let template = FinModel::empty(sig.clone(), sizes.clone());
        // one digit per relation tuple and per function entry
        let mut radix = Vec::new();
        for r in &template.rels {
            radix.extend(std::iter::repeat(2).take(r.len()));
        }
        for (f, sym) in sig.funcs.iter().enumerate() {
            radix.extend(std::iter::repeat(template.card(sym.codomain)).take(template.funcs[f].len()));
        }
        if radix.iter().any(|&r| r == 0) {
            radix.clear();
        }
        let mut digits = vec![0usize; radix.len()];
        loop {
            if out.len() == cap {
                return (out, true);
            }
            let mut m = template.clone();
            let mut it = digits.iter();
            for r in m.rels.iter_mut() {
                for i in 0..r.len() {
                    r.set(i, *it.next().unwrap() == 1);
                }
            }
            for f in m.funcs.iter_mut() {
                for v in f.iter_mut() {
                    *v = *it.next().unwrap() as u32;
                }
            }
            out.push(m);
            let mut j = digits.len();
            loop {
                if j == 0 {
                    break;
                }
                j -= 1;
                digits[j] += 1;
                if digits[j] < radix[j] {
                    break;
                }
                digits[j] = 0;
                if j == 0 {
                    j = usize::MAX;
                    break;
                }
            }
            if j == usize::MAX || digits.is_empty() {
                break;
            }
        }
        let mut s = 0;
        while s < k {
            sizes[s] += 1;
            if sizes[s] <= size_bound {
                break;
            }
            sizes[s] = 1;
            s += 1;
        }
        if s == k {
            return (out, false);
        }
    }
}

/// For each context and each stored set of `cat`, the id of the set of
/// `ext` (the family plus one member) with the same old components, if
/// adding the member split nothing.
fn restriction(cat: &SemCat, ext: &SemCat) -> Option<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    for c in cat.contexts() {
        let e = ext.ctx_id(cat.sorts(c)).unwrap();
        if ext.sub_len(e) != cat.sub_len(c) {
            return None;
        }
        let len = cat.total(c);
        let mut inv = vec![usize::MAX; cat.sub_len(c)];
        for d in 0..ext.sub_len(e) {
            let mut b = FixedBitSet::with_capacity(len);
            b.extend(ext.bits(e, d).ones().take_while(|&i| i < len));
            inv[cat.lookup(c, &b)?] = d;
        }
        out.push(inv);
    }
    Some(out)
}

pub fn search_positively_closed(family: &[FinModel], start: usize, cfg: SearchConfig) -> Result<SearchOutcome, SatError> {
    let mut fam = family.to_vec();
    let mut cur = start;
    let mut cat = SemCat::saturate(fam.clone(), cfg.sat)?;
    let mut path = Vec::new();
    let (candidates, truncated) = enumerate_models(&fam[0].sig, cfg.size_bound, cfg.candidate_cap);
    for step in 0..=cfg.step_bound {
        let open = failing_triples(&cat, &ModelView::member(cur), usize::MAX);
        if open.is_empty() {
            return Ok(SearchOutcome::Found { model: fam[cur].clone(), steps: step, path });
        }
        if step == cfg.step_bound {
            return Ok(SearchOutcome::NoneFound { steps: step, open, candidates: candidates.len(), truncated });
        }
        // (own failures, -resolved, candidate)
        let mut best: Option<(usize, isize, usize, SemCat)> = None;
        for (ci, cand) in candidates.iter().enumerate() {
            let homs = enumerate_homomorphisms(&fam[cur], cand, 64).homs;
            if homs.is_empty() {
                continue;
            }
            let mut ext_fam = fam.clone();
            ext_fam.push(cand.clone());
            let Ok(ext) = SemCat::saturate(ext_fam, cfg.sat) else { continue };
            // a candidate that splits a stored set would change the category itself
            let Some(lift) = restriction(&cat, &ext) else { continue };
            let last = fam.len();
            let resolved = homs
                .iter()
                .map(|h| {
                    open.iter()
                        .filter(|t| {
                            let e = ext.ctx_id(&t.context).unwrap();
                            let q = h.map_index(&fam[cur], cand, &t.context, t.point[0]);
                            let u = lift[t.ctx.0][t.u];
                            ext.contains(e, u, last, q) || ext.contains(e, ext.pseudo_complement(e, u), last, q)
                        })
                        .count()
                })
                .max()
                .unwrap_or(0);
            if resolved == 0 {
                continue;
            }
            let own = failing_triples(&ext, &ModelView::member(last), usize::MAX).len();
            let key = (own, -(resolved as isize), ci);
            if best.as_ref().map_or(true, |b| (key.0, key.1, key.2) < (b.0, b.1, b.2)) {
                best = Some((key.0, key.1, key.2, ext));
            }
            if own == 0 {
                break;
            }
        }
        let Some((_, _, ci, ext)) = best else {
            return Ok(SearchOutcome::NoneFound { steps: step, open, candidates: candidates.len(), truncated });
        };
        fam.push(candidates[ci].clone());
        path.push(candidates[ci].clone());
        cur = fam.len() - 1;
        cat = ext;
    }
    unreachable!("the loop returns at the step bound")
}
