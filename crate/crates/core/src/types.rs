//! Type spaces `Spec(Sub(x))`, realization of types by tuples, the action
//! of coordinate maps on spectra, and semantic completeness.

use fixedbitset::FixedBitSet;
use serde::Serialize;
use thiserror::Error;

use crate::dlat::{spec, DlatError, PrimeFilter, SpecSpace};
use crate::semcat::{CtxId, SemCat, WbCounterexample};

#[derive(Debug, Error)]
pub enum TypesError {
    #[error("the category is trivial: the empty context has one stored set")]
    Trivial,
    #[error(transparent)]
    Lattice(#[from] DlatError),
}

/// The prime filters of `Sub(x)` with their basic opens and specialization.
pub fn type_space(cat: &SemCat, x: CtxId) -> Result<SpecSpace, TypesError> {
    let l = cat.sub_lattice(x)?;
    if l.len() < 2 {
        return Err(TypesError::Trivial);
    }
    Ok(spec(&l)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SomewhereDense {
    /// A nonzero `φ` with `ψ ∈ p ⟺ φ ∧ ψ ≠ ⊥` for every `ψ`.
    pub witness: Option<usize>,
    pub maximal: bool,
}

/// Searches every stored `φ` for a density witness and reports whether `p`
/// is a maximal filter.
pub fn somewhere_dense(cat: &SemCat, x: CtxId, p: &PrimeFilter) -> Result<SomewhereDense, TypesError> {
    let root = cat.ctx_id(&[]).unwrap();
    if cat.sub_len(root) < 2 {
        return Err(TypesError::Trivial);
    }
    let n = cat.sub_len(x);
    let bot = cat.bot(x);
    let witness = (0..n)
        .filter(|&phi| phi != bot)
        .find(|&phi| (0..n).all(|psi| p.contains(psi) == (cat.meet(x, phi, psi) != bot)));
    let sp = type_space(cat, x)?;
    let maximal = sp.points.iter().all(|q| !(p.is_subset(q) && q != p));
    Ok(SomewhereDense { witness, maximal })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Realization {
    /// Position of a tuple of the member whose type is `p`.
    Realized(usize),
    /// All tuples of the member were scanned.
    Omitted { scanned: usize },
}

/// The type `{ u : t ∈ u }` of tuple `t` of `member` at `x`.
pub fn type_of_tuple(cat: &SemCat, x: CtxId, member: usize, t: usize) -> PrimeFilter {
    let mut members = FixedBitSet::with_capacity(cat.sub_len(x));
    members.extend((0..cat.sub_len(x)).filter(|&u| cat.contains(x, u, member, t)));
    PrimeFilter { members }
}

/// Whether some tuple of `member` at `x` has type `p`.
///
/// A subset realizing `p` in the abstract sense cannot be split into two
/// disjoint nonempty parts, so in sets it is a single tuple, and scanning
/// tuples decides realization.
pub fn realized_by(cat: &SemCat, member: usize, x: CtxId, p: &PrimeFilter) -> Realization {
    let n = cat.member_size(x, member);
    match (0..n).find(|&t| &type_of_tuple(cat, x, member, t) == p) {
        Some(t) => Realization::Realized(t),
        None => Realization::Omitted { scanned: n },
    }
}

/// Every subset with at least two elements splits into two disjoint
/// nonempty subsets: the reduction behind [`realized_by`].
pub fn has_disjoint_split(a: &FixedBitSet) -> Option<(FixedBitSet, FixedBitSet)> {
    let first = a.ones().next()?;
    let mut b1 = FixedBitSet::with_capacity(a.len());
    b1.insert(first);
    let mut b2 = a.clone();
    b2.set(first, false);
    (b2.count_ones(..) > 0).then_some((b1, b2))
}

#[derive(Debug, Clone, Serialize)]
pub struct TypeRow {
    pub filter: Vec<usize>,
    /// For each member, a realizing tuple if any.
    pub realizers: Vec<Option<usize>>,
}

/// All types at `x` and where they are realized. Weakly omitted and omitted
/// coincide for set-valued models, so only one column is kept.
pub fn type_table(cat: &SemCat, x: CtxId) -> Result<Vec<TypeRow>, TypesError> {
    let sp = type_space(cat, x)?;
    Ok(sp
        .points
        .iter()
        .map(|p| TypeRow {
            filter: p.members_vec(),
            realizers: (0..cat.family.len())
                .map(|i| match realized_by(cat, i, x, p) {
                    Realization::Realized(t) => Some(t),
                    Realization::Omitted { .. } => None,
                })
                .collect(),
        })
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct ArrowReport {
    /// The map `S(x) -> S(y)` sends `p` to `{ v : f*v ∈ p }`.
    pub image: Vec<usize>,
    pub open: bool,
    pub injective: bool,
    pub surjective: bool,
    /// `f` is injective on tuples of every member.
    pub mono: bool,
    /// The image of `x` along `f` is all of `y`.
    pub effective_epi: bool,
    pub problems: Vec<String>,
}

impl ArrowReport {
    /// Open always; injective when mono; surjective when an effective epi.
    pub fn consistent(&self) -> bool {
        self.open && (!self.mono || self.injective) && (!self.effective_epi || self.surjective)
    }
}

/// The action of the coordinate map `f : x -> y` (`y_j = x_{sigma[j]}`) on
/// type spaces.
pub fn spec_arrow_checks(cat: &SemCat, x: CtxId, y: CtxId, sigma: &[usize]) -> Result<ArrowReport, TypesError> {
    let (sx, sy) = (type_space(cat, x)?, type_space(cat, y)?);
    let pb: Vec<usize> = (0..cat.sub_len(y)).map(|v| cat.pullback(x, y, sigma, v).expect("saturated")).collect();
    let mut image = Vec::with_capacity(sx.points.len());
    for p in &sx.points {
        let mut members = FixedBitSet::with_capacity(cat.sub_len(y));
        members.extend((0..cat.sub_len(y)).filter(|&v| p.contains(pb[v])));
        let q = PrimeFilter { members };
        image.push(sy.points.iter().position(|r| r == &q).expect("preimages of prime filters are prime"));
    }
    let mut problems = Vec::new();
    let mut open = true;
    for (u, o) in sx.basic_opens.iter().enumerate() {
        let mut img = FixedBitSet::with_capacity(sy.points.len());
        img.extend(o.ones().map(|p| image[p]));
        if !sy.is_open(&img) {
            open = false;
            problems.push(format!("image of the basic open of set {u} is not open"));
        }
    }
    let mut hit = vec![0usize; sy.points.len()];
    image.iter().for_each(|&q| hit[q] += 1);
    let injective = hit.iter().all(|&h| h <= 1);
    let surjective = hit.iter().all(|&h| h >= 1);
    let mono = (0..cat.sorts(x).len()).all(|i| sigma.contains(&i));
    let effective_epi = cat.image(x, y, sigma, cat.top(x)) == Some(cat.top(y));
    if mono && !injective {
        problems.push("mono but not injective on types".into());
    }
    if effective_epi && !surjective {
        problems.push("effective epi but not surjective on types".into());
    }
    Ok(ArrowReport { image, open, injective, surjective, mono, effective_epi, problems })
}

#[derive(Debug, Clone, Serialize)]
pub struct CompletenessReport {
    pub weakly_boolean: bool,
    pub wb_counterexample: Option<WbCounterexample>,
    pub two_valued: bool,
    /// `(i, j, equivalent)` for every pair of members.
    pub pairwise: Vec<(usize, usize, bool)>,
    pub all_equivalent: bool,
    /// Weakly Boolean and two-valued imply pairwise equivalence.
    pub implication_holds: bool,
}

/// Members `i` and `j` validate the same containments between stored sets.
pub fn elementarily_equivalent(cat: &SemCat, i: usize, j: usize) -> bool {
    cat.contexts().all(|x| {
        let ci: Vec<FixedBitSet> = (0..cat.sub_len(x)).map(|d| cat.component(x, d, i)).collect();
        let cj: Vec<FixedBitSet> = (0..cat.sub_len(x)).map(|d| cat.component(x, d, j)).collect();
        (0..ci.len()).all(|a| (0..ci.len()).all(|b| ci[a].is_subset(&ci[b]) == cj[a].is_subset(&cj[b])))
    })
}

/// Only the direction from weakly Boolean and two-valued to equivalence is
/// checked; the family is finite and cannot witness the converse.
pub fn semantic_completeness_analysis(cat: &SemCat) -> CompletenessReport {
    let wb = cat.is_weakly_boolean();
    let two_valued = cat.is_two_valued();
    let k = cat.family.len();
    let mut pairwise = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            pairwise.push((i, j, elementarily_equivalent(cat, i, j)));
        }
    }
    let all_equivalent = pairwise.iter().all(|p| p.2);
    let weakly_boolean = wb.is_ok();
    CompletenessReport {
        weakly_boolean,
        wb_counterexample: wb.err(),
        two_valued,
        pairwise,
        all_equivalent,
        implication_holds: !(weakly_boolean && two_valued) || all_equivalent,
    }
}
