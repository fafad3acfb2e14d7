//! A finite distributive lattice `K` presented as a model family.
//!
//! One sort with a one-point carrier and a unary relation `R_j` for each
//! join-irreducible `j`. Each prime filter `q` of `K` gives a member in
//! which `R_j` holds iff `j ∈ q`. The sentence `∃x. R_j(x)` then holds
//! exactly in the members whose filter contains `j`, and by Birkhoff
//! duality the definable sentences form a copy of `K`.

use std::sync::Arc;

use fixedbitset::FixedBitSet;
use serde::Serialize;
use thiserror::Error;

use super::lm::{LmConfig, LmLattice};
use super::view::ModelView;
use crate::dlat::{find_isomorphism, join_irreducibles, quotient_by_prime, spec, DlatError, FinDistLattice, PrimeFilter};
use crate::model::FinModel;
use crate::semcat::{SatError, SemCat, SemCatConfig};
use crate::syntax::{RelId, Signature};

#[derive(Debug, Error)]
pub enum PosetalError {
    #[error("import cap: the lattice has {size} elements, more than the limit {limit}")]
    ImportCap { size: usize, limit: usize },
    #[error(transparent)]
    Lattice(#[from] DlatError),
    #[error(transparent)]
    Sat(#[from] SatError),
    #[error("the sentence lattice is not a copy of the input: {0}")]
    Encoding(String),
}

#[derive(Debug, Clone)]
pub struct PosetalFamily {
    pub models: Vec<FinModel>,
    /// `filters[i]` is the prime filter realized by member `i`.
    pub filters: Vec<PrimeFilter>,
}

pub fn posetal_family(k: &FinDistLattice) -> Result<PosetalFamily, DlatError> {
    let sp = spec(k)?;
    let js = join_irreducibles(k);
    let mut sig = Signature::default();
    let a = sig.add_sort("A");
    for &j in &js {
        sig.add_rel(&format!("R{j}"), vec![a]);
    }
    let sig = Arc::new(sig);
    let models = sp
        .points
        .iter()
        .map(|q| {
            let mut m = FinModel::empty(sig.clone(), vec![1]);
            for (r, &j) in js.iter().enumerate() {
                m.set_rel(RelId(r), &[0], q.contains(j));
            }
            m
        })
        .collect();
    Ok(PosetalFamily { models, filters: sp.points })
}

#[derive(Debug, Clone, Serialize)]
pub struct PosetalReport {
    pub lattice_size: usize,
    pub lm_size: usize,
    pub quotient_size: usize,
    /// `embed[k]` is the stored sentence standing for `k`.
    pub embed: Vec<usize>,
    /// The canonical map `K -> LM`, `k ↦ [k at the point]`.
    pub canonical: Vec<usize>,
    /// The canonical map is constant exactly on the classes of `K/p`.
    pub kernel_matches: bool,
    pub surjective: bool,
    /// The induced map `K/p -> LM` is a lattice isomorphism.
    pub iso: bool,
    /// An isomorphism `LM -> K/p` found by search, as a cross-check.
    pub searched_iso: Option<Vec<usize>>,
}

/// Imports `k`, takes the member realizing `p`, and compares its colimit
/// lattice with `K/p`.
pub fn posetal_import(k: &FinDistLattice, p: &PrimeFilter, cfg: SemCatConfig) -> Result<PosetalReport, PosetalError> {
    if k.len() > cfg.max_lattice {
        return Err(PosetalError::ImportCap { size: k.len(), limit: cfg.max_lattice });
    }
    p.validate(k)?;
    let fam = posetal_family(k)?;
    let member = fam.filters.iter().position(|q| q == p).expect("every prime filter is principal");
    let cat = SemCat::saturate(fam.models, cfg)?;
    let root = cat.ctx_id(&[]).unwrap();
    let mut embed = Vec::with_capacity(k.len());
    for e in 0..k.len() {
        let mut bits = FixedBitSet::with_capacity(cat.total(root));
        bits.extend((0..fam.filters.len()).filter(|&i| fam.filters[i].contains(e)));
        let d = cat
            .lookup(root, &bits)
            .ok_or_else(|| PosetalError::Encoding(format!("element {e} has no defining sentence")))?;
        embed.push(d);
    }
    if cat.sub_len(root) != k.len() {
        return Err(PosetalError::Encoding(format!("{} sentences for {} elements", cat.sub_len(root), k.len())));
    }
    for a in 0..k.len() {
        for b in 0..k.len() {
            if k.leq(a, b) != cat.leq(root, embed[a], embed[b]) {
                return Err(PosetalError::Encoding(format!("order differs at ({a},{b})")));
            }
        }
    }
    let lm = LmLattice::compute(&cat, &ModelView::member(member), LmConfig::for_cat(&cat)).expect("bound within saturation");
    let q = quotient_by_prime(k, p)?;
    let canonical: Vec<usize> = (0..k.len()).map(|e| lm.class_of(&cat, root, &[0], embed[e])).collect();
    let kernel_matches = (0..k.len()).all(|a| (0..k.len()).all(|b| (canonical[a] == canonical[b]) == (q.map[a] == q.map[b])));
    let mut hit = vec![false; lm.len()];
    canonical.iter().for_each(|&c| hit[c] = true);
    let surjective = hit.iter().all(|&h| h);
    let iso = kernel_matches
        && surjective
        && lm.len() == q.lattice.len()
        && (0..k.len()).all(|a| (0..k.len()).all(|b| q.lattice.leq(q.map[a], q.map[b]) == lm.leq(canonical[a], canonical[b])));
    let searched_iso = lm.lattice.as_ref().and_then(|l| find_isomorphism(l, &q.lattice));
    Ok(PosetalReport {
        lattice_size: k.len(),
        lm_size: lm.len(),
        quotient_size: q.lattice.len(),
        embed,
        canonical,
        kernel_matches,
        surjective,
        iso,
        searched_iso,
    })
}
