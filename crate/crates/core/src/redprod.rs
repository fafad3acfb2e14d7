//! Reduced products over finite index sets.
//!
//! The reduced product is built as the colimit over `J ∈ F` of the products
//! `∏_{i∈J} M_i`: elements are pairs `(J, a)` identified when they agree on
//! some smaller member of `F`. Every filter on a finite set is principal, so
//! the colimit is always isomorphic to the product over the core `∩F`. Both
//! forms are built and the isomorphism between them is checked.

use fixedbitset::FixedBitSet;
use serde::Serialize;
use thiserror::Error;

use crate::model::{eval_formula, is_elementary_hom, ElementaryFailure, FinModel, Homomorphism};
use crate::semcat::{SatError, SemCat, SemCatConfig};
use crate::syntax::{Formula, SortId};

/// Printed at the top of reduced-product reports.
pub const FINITE_INDEX_NOTE: &str =
    "finite index set: every filter is principal, so the reduced product collapses to the product over its core";

/// Largest index set accepted.
pub const MAX_INDEX: usize = 12;

/// Largest number of stage tuples visited while interpreting one symbol.
const COMBO_CAP: usize = 4_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RedprodError {
    #[error("index set of size {0} is outside 1..={MAX_INDEX}")]
    IndexSize(usize),
    #[error("subset {0:#b} is not inside the index set")]
    OutOfRange(u32),
    #[error("no members")]
    Empty,
    #[error("the empty set is a member")]
    Improper,
    #[error("not upward closed: {0:#b} is a member but {1:#b} is not")]
    NotUpward(u32, u32),
    #[error("not closed under intersection: {0:#b} and {1:#b}")]
    NotMeetClosed(u32, u32),
    #[error("not principal: the core {0:#b} is missing")]
    NotPrincipal(u32),
    #[error("the filter is not an ultrafilter")]
    NotUltra,
    #[error("{models} models for an index set of size {size}")]
    Arity { models: usize, size: usize },
    #[error("models do not share a signature")]
    Signature,
    #[error("{0} is ill defined on classes")]
    IllDefined(String),
    #[error("the colimit and the product over the core are not isomorphic: {0}")]
    Collapse(String),
    #[error("`{0}` needs more than {COMBO_CAP} stage tuples")]
    TooLarge(String),
    #[error("containment disagreement: reduced product says {product}, index set {index:#b} says {filter}")]
    LosDisagreement { product: bool, filter: bool, index: u32 },
    #[error("the diagonal is not a homomorphism")]
    DiagonalNotHom,
    #[error("the diagonal is not injective at sort {0}")]
    DiagonalNotInjective(usize),
    #[error("the diagonal is not elementary: {0:?}")]
    DiagonalNotElementary(ElementaryFailure),
    #[error(transparent)]
    Sat(#[from] SatError),
}

/// A filter on `{0, .., size-1}`; subsets are bitmasks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndexFilter {
    size: usize,
    /// Sorted.
    members: Vec<u32>,
}

fn full_mask(size: usize) -> u32 {
    ((1u64 << size) - 1) as u32
}

fn check_size(size: usize) -> Result<(), RedprodError> {
    if size == 0 || size > MAX_INDEX {
        return Err(RedprodError::IndexSize(size));
    }
    Ok(())
}

impl IndexFilter {
    /// The filter generated by `gens`: closed under intersections and
    /// supersets. No generators gives `{I}`.
    pub fn generated(size: usize, gens: &[u32]) -> Result<Self, RedprodError> {
        check_size(size)?;
        let full = full_mask(size);
        if let Some(&g) = gens.iter().find(|&&g| g & !full != 0) {
            return Err(RedprodError::OutOfRange(g));
        }
        let mut inside = vec![false; 1 << size];
        inside[full as usize] = true;
        gens.iter().for_each(|&g| inside[g as usize] = true);
        loop {
            let cur: Vec<u32> = (0..=full).filter(|&s| inside[s as usize]).collect();
            let mut grew = false;
            for &a in &cur {
                for &b in &cur {
                    if !inside[(a & b) as usize] {
                        inside[(a & b) as usize] = true;
                        grew = true;
                    }
                }
                for s in 0..=full {
                    if s & a == a && !inside[s as usize] {
                        inside[s as usize] = true;
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
        Self::from_members(size, (0..=full).filter(|&s| inside[s as usize]).collect())
    }

    /// Validates an explicit member list.
    pub fn from_members(size: usize, mut members: Vec<u32>) -> Result<Self, RedprodError> {
        check_size(size)?;
        let full = full_mask(size);
        members.sort_unstable();
        members.dedup();
        if let Some(&g) = members.iter().find(|&&g| g & !full != 0) {
            return Err(RedprodError::OutOfRange(g));
        }
        if members.is_empty() {
            return Err(RedprodError::Empty);
        }
        if members[0] == 0 {
            return Err(RedprodError::Improper);
        }
        let f = IndexFilter { size, members };
        for &a in &f.members {
            for s in 0..=full {
                if s & a == a && !f.contains(s) {
                    return Err(RedprodError::NotUpward(a, s));
                }
            }
            for &b in &f.members {
                if !f.contains(a & b) {
                    return Err(RedprodError::NotMeetClosed(a, b));
                }
            }
        }
        let core = f.core();
        if !f.contains(core) {
            return Err(RedprodError::NotPrincipal(core));
        }
        Ok(f)
    }

    pub fn principal(size: usize, core: u32) -> Result<Self, RedprodError> {
        Self::generated(size, &[core])
    }

    /// The ultrafilter of sets containing `i`.
    pub fn ultra_at(size: usize, i: usize) -> Result<Self, RedprodError> {
        if i >= size {
            return Err(RedprodError::OutOfRange(1 << i.min(31)));
        }
        Self::principal(size, 1 << i)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn members(&self) -> &[u32] {
        &self.members
    }

    pub fn contains(&self, s: u32) -> bool {
        self.members.binary_search(&s).is_ok()
    }

    pub fn core(&self) -> u32 {
        self.members.iter().fold(full_mask(self.size), |acc, &m| acc & m)
    }

    pub fn is_ultra(&self) -> bool {
        let full = full_mask(self.size);
        (0..=full).all(|s| self.contains(s) || self.contains(full & !s))
    }
}

fn indices(mask: u32) -> Vec<usize> {
    (0..32).filter(|&i| mask >> i & 1 == 1).collect()
}

/// One object `∏_{i∈J} M_i` of the colimit diagram.
#[derive(Debug, Clone, Serialize)]
pub struct Stage {
    pub mask: u32,
    pub idx: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SortClasses {
    /// `class_of[stage][code]`: the class of the stage element with that
    /// row-major code over `idx`.
    pub class_of: Vec<Vec<usize>>,
    /// Per class, its representative `(stage, components)`.
    pub reps: Vec<(usize, Vec<usize>)>,
}

#[derive(Debug, Clone)]
pub struct ReducedProduct {
    pub filter: IndexFilter,
    pub models: Vec<FinModel>,
    pub stages: Vec<Stage>,
    pub sorts: Vec<SortClasses>,
    /// The colimit as a model; element `c` of a sort is class `c`.
    pub view: FinModel,
    /// `∏_{i∈core} M_i`.
    pub shortcut: FinModel,
    /// `view -> shortcut`, restricting a class to the core.
    pub iso: Homomorphism,
}

impl ReducedProduct {
    fn card(&self, i: usize, s: SortId) -> usize {
        self.models[i].card(s)
    }

    fn code(&self, stage: usize, s: SortId, comps: &[usize]) -> usize {
        self.stages[stage].idx.iter().zip(comps).fold(0, |acc, (&i, &a)| acc * self.card(i, s) + a)
    }

    /// The class of `(J, comps)` for the stage with mask `J`.
    pub fn class(&self, stage: usize, s: SortId, comps: &[usize]) -> usize {
        self.sorts[s.0].class_of[stage][self.code(stage, s, comps)]
    }

    pub fn full_stage(&self) -> usize {
        self.stages.len() - 1
    }

    /// The reduced product of per-index subsets of a context: a tuple of
    /// classes belongs to it when it has representatives over some `J ∈ F`
    /// lying in the subset at every `i ∈ J`. `member(i, t)` tests the tuple
    /// with index `t` in `M_i`.
    pub fn reduce_set(&self, ctx: &[SortId], member: impl Fn(usize, usize) -> bool) -> Result<FixedBitSet, RedprodError> {
        let mut out = FixedBitSet::with_capacity(self.view.product_size(ctx));
        for st in 0..self.stages.len() {
            for_each_combo(self, st, ctx, "a subset", |tuples| {
                if self.stages[st].idx.iter().zip(tuples).all(|(&i, &t)| member(i, t)) {
                    out.insert(self.combo_class(st, ctx, tuples));
                }
            })?;
        }
        Ok(out)
    }

    /// The tuple of classes, encoded in the view, of a stage combination.
    fn combo_class(&self, st: usize, ctx: &[SortId], tuples: &[usize]) -> usize {
        let idx = &self.stages[st].idx;
        let decoded: Vec<Vec<usize>> = idx.iter().zip(tuples).map(|(&i, &t)| self.models[i].decode(ctx, t)).collect();
        let classes: Vec<usize> = ctx
            .iter()
            .enumerate()
            .map(|(k, &s)| {
                let comps: Vec<usize> = decoded.iter().map(|d| d[k]).collect();
                self.class(st, s, &comps)
            })
            .collect();
        self.view.encode(ctx, &classes)
    }
}

/// Calls `f` with one tuple index per `i ∈ J` for every combination.
fn for_each_combo(
    rp: &ReducedProduct,
    st: usize,
    ctx: &[SortId],
    what: &str,
    mut f: impl FnMut(&[usize]),
) -> Result<(), RedprodError> {
    let radix: Vec<usize> = rp.stages[st].idx.iter().map(|&i| rp.models[i].product_size(ctx)).collect();
    let total = radix.iter().try_fold(1usize, |acc, &r| acc.checked_mul(r));
    match total {
        Some(0) => return Ok(()),
        Some(t) if t <= COMBO_CAP => {}
        _ => return Err(RedprodError::TooLarge(what.to_string())),
    }
    let mut digits = vec![0usize; radix.len()];
    loop {
        f(&digits);
        let mut j = digits.len();
        loop {
            if j == 0 {
                return Ok(());
            }
            j -= 1;
            digits[j] += 1;
            if digits[j] < radix[j] {
                break;
            }
            digits[j] = 0;
        }
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, a: usize) -> usize {
        let mut r = a;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut a = a;
        while self.0[a] != r {
            let next = self.0[a];
            self.0[a] = r;
            a = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

fn decode_stage(models: &[FinModel], idx: &[usize], s: SortId, mut code: usize) -> Vec<usize> {
    let mut out = vec![0; idx.len()];
    for (slot, &i) in out.iter_mut().zip(idx).rev() {
        let k = models[i].card(s);
        *slot = code % k;
        code /= k;
    }
    out
}

fn sort_classes(models: &[FinModel], filter: &IndexFilter, stages: &[Stage], s: SortId) -> SortClasses {
    let sizes: Vec<usize> = stages.iter().map(|st| st.idx.iter().map(|&i| models[i].card(s)).product()).collect();
    let mut offsets = vec![0];
    sizes.iter().for_each(|&n| offsets.push(offsets.last().unwrap() + n));
    let mut uf = UnionFind((0..*offsets.last().unwrap()).collect());
    // for each J'' ∈ F, glue elements of stages above it that restrict alike
    for &low in filter.members() {
        let mut first: std::collections::HashMap<Vec<usize>, usize> = std::collections::HashMap::new();
        for (k, st) in stages.iter().enumerate() {
            if st.mask & low != low {
                continue;
            }
            let keep: Vec<usize> = st.idx.iter().enumerate().filter(|(_, &i)| low >> i & 1 == 1).map(|(p, _)| p).collect();
            for code in 0..sizes[k] {
                let comps = decode_stage(models, &st.idx, s, code);
                let restricted: Vec<usize> = keep.iter().map(|&p| comps[p]).collect();
                let node = offsets[k] + code;
                match first.get(&restricted) {
                    Some(&other) => uf.union(node, other),
                    None => {
                        first.insert(restricted, node);
                    }
                }
            }
        }
    }
    // representative: smallest stage (fewest indices, then mask), then least tuple
    let mut best: std::collections::BTreeMap<usize, (usize, u32, Vec<usize>, usize)> = Default::default();
    for (k, st) in stages.iter().enumerate() {
        for code in 0..sizes[k] {
            let root = uf.find(offsets[k] + code);
            let key = (st.idx.len(), st.mask, decode_stage(models, &st.idx, s, code), k);
            let e = best.entry(root).or_insert_with(|| key.clone());
            if key < *e {
                *e = key;
            }
        }
    }
    let mut order: Vec<(usize, u32, Vec<usize>, usize, usize)> =
        best.into_iter().map(|(root, (n, m, t, k))| (n, m, t, k, root)).collect();
    order.sort();
    let mut id_of_root = std::collections::HashMap::new();
    let mut reps = Vec::new();
    for (c, (_, _, t, k, root)) in order.into_iter().enumerate() {
        id_of_root.insert(root, c);
        reps.push((k, t));
    }
    let class_of = (0..stages.len())
        .map(|k| (0..sizes[k]).map(|code| id_of_root[&uf.find(offsets[k] + code)]).collect())
        .collect();
    SortClasses { class_of, reps }
}

/// The reduced product `∏ M_i / F` as an explicit colimit, with its
/// comparison to the product over the core.
pub fn reduced_product(models: &[FinModel], filter: &IndexFilter) -> Result<ReducedProduct, RedprodError> {
    if models.len() != filter.size() {
        return Err(RedprodError::Arity { models: models.len(), size: filter.size() });
    }
    let sig = models[0].sig.clone();
    if models.iter().any(|m| m.sig != sig) {
        return Err(RedprodError::Signature);
    }
    // the full stage comes last
    let mut masks = filter.members().to_vec();
    masks.sort_by_key(|&m| (m.count_ones(), m));
    let stages: Vec<Stage> = masks.iter().map(|&mask| Stage { mask, idx: indices(mask) }).collect();
    let nsorts = sig.sorts.len();
    let sorts: Vec<SortClasses> = (0..nsorts).map(|s| sort_classes(models, filter, &stages, SortId(s))).collect();

    let mut view = FinModel::empty(sig.clone(), sorts.iter().map(|c| c.reps.len()).collect());
    for (s, cls) in sorts.iter().enumerate() {
        view.names[s] = cls
            .reps
            .iter()
            .map(|(k, t)| stages[*k].idx.iter().zip(t).map(|(&i, &a)| models[i].names[s][a].clone()).collect::<Vec<_>>().join("_"))
            .collect();
    }
    let mut rp = ReducedProduct {
        filter: filter.clone(),
        models: models.to_vec(),
        stages,
        sorts,
        view,
        shortcut: FinModel::empty(sig.clone(), vec![0; nsorts]),
        iso: Homomorphism { maps: Vec::new() },
    };
    interpret(&mut rp)?;
    collapse(&mut rp)?;
    Ok(rp)
}

/// Relations hold on a tuple of classes when they hold at every index of
/// some stage; functions act stagewise. Both are checked against every
/// stage, which is where ill-definedness would show.
fn interpret(rp: &mut ReducedProduct) -> Result<(), RedprodError> {
    let sig = rp.view.sig.clone();
    for (r, sym) in sig.rels.iter().enumerate() {
        let mut holds = FixedBitSet::with_capacity(rp.view.product_size(&sym.arity));
        for st in 0..rp.stages.len() {
            let ctx = &sym.arity;
            for_each_combo(rp, st, ctx, &sym.name, |tuples| {
                if rp.stages[st].idx.iter().zip(tuples).all(|(&i, &t)| rp.models[i].rels[r].contains(t)) {
                    holds.insert(rp.combo_class(st, ctx, tuples));
                }
            })?;
        }
        // on each stage the index set where the relation holds must lie in F
        // exactly when the classes are related
        let mut bad = None;
        for st in 0..rp.stages.len() {
            let ctx = &sym.arity;
            for_each_combo(rp, st, ctx, &sym.name, |tuples| {
                let mut set = 0u32;
                for (&i, &t) in rp.stages[st].idx.iter().zip(tuples) {
                    if rp.models[i].rels[r].contains(t) {
                        set |= 1 << i;
                    }
                }
                let upward = set | (full_mask(rp.filter.size()) & !rp.stages[st].mask);
                if rp.filter.contains(upward) != holds.contains(rp.combo_class(st, ctx, tuples)) {
                    bad = Some(sym.name.clone());
                }
            })?;
        }
        if let Some(name) = bad {
            return Err(RedprodError::IllDefined(name));
        }
        rp.view.rels[r] = holds;
    }
    for (f, sym) in sig.funcs.iter().enumerate() {
        let mut value: Vec<Option<usize>> = vec![None; rp.view.product_size(&sym.domain)];
        let mut bad = false;
        for st in 0..rp.stages.len() {
            let ctx = &sym.domain;
            for_each_combo(rp, st, ctx, &sym.name, |tuples| {
                let comps: Vec<usize> =
                    rp.stages[st].idx.iter().zip(tuples).map(|(&i, &t)| rp.models[i].funcs[f][t] as usize).collect();
                let v = rp.class(st, sym.codomain, &comps);
                let slot = &mut value[rp.combo_class(st, ctx, tuples)];
                match slot {
                    Some(w) if *w != v => bad = true,
                    _ => *slot = Some(v),
                }
            })?;
        }
        if bad {
            return Err(RedprodError::IllDefined(sym.name.clone()));
        }
        rp.view.funcs[f] = value.into_iter().map(|v| v.expect("every class has a full-stage member") as u32).collect();
    }
    Ok(())
}

/// Builds `∏_{i∈core} M_i` and the restriction map from the colimit, and
/// checks that the map is an isomorphism.
fn collapse(rp: &mut ReducedProduct) -> Result<(), RedprodError> {
    let core = indices(rp.filter.core());
    let mut shortcut = rp.models[core[0]].clone();
    for &i in &core[1..] {
        shortcut = crate::model::model_product(&shortcut, &rp.models[i]);
    }
    let full = rp.full_stage();
    let pos: Vec<usize> = core.iter().map(|i| rp.stages[full].idx.iter().position(|j| j == i).unwrap()).collect();
    let nsorts = rp.view.sig.sorts.len();
    let mut maps = vec![Vec::new(); nsorts];
    for s in 0..nsorts {
        let sort = SortId(s);
        maps[s] = vec![u32::MAX; rp.view.card(sort)];
        let n_full = rp.sorts[s].class_of[full].len();
        for code in 0..n_full {
            let comps = decode_stage(&rp.models, &rp.stages[full].idx, sort, code);
            let restricted: Vec<usize> = pos.iter().map(|&p| comps[p]).collect();
            let target = core.iter().zip(&restricted).fold(0, |acc, (&i, &a)| acc * rp.card(i, sort) + a);
            let c = rp.sorts[s].class_of[full][code];
            if maps[s][c] != u32::MAX && maps[s][c] as usize != target {
                return Err(RedprodError::Collapse(format!("class {c} of sort {s} restricts two ways")));
            }
            maps[s][c] = target as u32;
        }
        if rp.view.card(sort) != shortcut.card(sort) {
            return Err(RedprodError::Collapse(format!("sort {s}: {} classes, {} core tuples", rp.view.card(sort), shortcut.card(sort))));
        }
        let mut seen = vec![false; shortcut.card(sort)];
        for &t in &maps[s] {
            if t == u32::MAX || std::mem::replace(&mut seen[t as usize], true) {
                return Err(RedprodError::Collapse(format!("sort {s}: restriction is not a bijection")));
            }
        }
    }
    let iso = Homomorphism { maps };
    is_isomorphism(&rp.view, &shortcut, &iso).map_err(RedprodError::Collapse)?;
    rp.shortcut = shortcut;
    rp.iso = iso;
    Ok(())
}

/// A bijective homomorphism that also reflects every relation.
pub fn is_isomorphism(a: &FinModel, b: &FinModel, h: &Homomorphism) -> Result<(), String> {
    let sig = &a.sig;
    for s in 0..sig.sorts.len() {
        let mut img = h.maps[s].clone();
        img.sort_unstable();
        img.dedup();
        if img.len() != a.card(SortId(s)) || a.card(SortId(s)) != b.card(SortId(s)) {
            return Err(format!("sort {} is not a bijection", sig.sorts[s]));
        }
    }
    if !h.is_hom(a, b) {
        return Err("not a homomorphism".into());
    }
    for (r, sym) in sig.rels.iter().enumerate() {
        let count = (0..a.product_size(&sym.arity)).filter(|&t| b.rels[r].contains(h.map_index(a, b, &sym.arity, t))).count();
        if count != a.rels[r].count_ones(..) {
            return Err(format!("`{}` is not reflected", sym.name));
        }
    }
    Ok(())
}

/// `eval(φ)` in the view equals the reduced product of the per-index
/// evaluations.
pub fn formula_coherence(rp: &ReducedProduct, ctx: &[(String, SortId)], f: &Formula) -> Result<bool, RedprodError> {
    let sorts: Vec<SortId> = ctx.iter().map(|(_, s)| *s).collect();
    let evals: Vec<FixedBitSet> = rp.models.iter().map(|m| eval_formula(m, f, ctx)).collect();
    let reduced = rp.reduce_set(&sorts, |i, t| evals[i].contains(t))?;
    Ok(reduced == eval_formula(&rp.view, f, ctx))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LosVerdict {
    pub holds: bool,
    /// `{i : A_i ⊆ B_i}`.
    pub index_set: u32,
}

/// Decides `∏A_i/F ⊆ ∏B_i/F` twice: in the constructed reduced product and
/// by asking whether `{i : A_i ⊆ B_i}` is in `F`. The answers must agree.
pub fn los_containment(
    rp: &ReducedProduct,
    ctx: &[SortId],
    a: &[FixedBitSet],
    b: &[FixedBitSet],
) -> Result<LosVerdict, RedprodError> {
    if !rp.filter.is_ultra() {
        return Err(RedprodError::NotUltra);
    }
    let n = rp.models.len();
    if a.len() != n || b.len() != n {
        return Err(RedprodError::Arity { models: n, size: a.len().min(b.len()) });
    }
    let ra = rp.reduce_set(ctx, |i, t| a[i].contains(t))?;
    let rb = rp.reduce_set(ctx, |i, t| b[i].contains(t))?;
    let product = ra.is_subset(&rb);
    let index_set = (0..n).filter(|&i| a[i].is_subset(&b[i])).fold(0u32, |acc, i| acc | 1 << i);
    let filter = rp.filter.contains(index_set);
    if product != filter {
        return Err(RedprodError::LosDisagreement { product, filter, index: index_set });
    }
    Ok(LosVerdict { holds: product, index_set })
}

#[derive(Debug, Clone)]
pub struct DiagonalReport {
    pub power: ReducedProduct,
    pub diagonal: Homomorphism,
}

/// `Δ : M -> M^I/F`, checked to be an injective elementary homomorphism
/// against the saturation of `M` together with the power.
pub fn diagonal_map(m: &FinModel, filter: &IndexFilter, cfg: SemCatConfig) -> Result<DiagonalReport, RedprodError> {
    if !filter.is_ultra() {
        return Err(RedprodError::NotUltra);
    }
    let power = reduced_product(&vec![m.clone(); filter.size()], filter)?;
    let full = power.full_stage();
    let width = power.stages[full].idx.len();
    let maps: Vec<Vec<u32>> = (0..m.sig.sorts.len())
        .map(|s| (0..m.card(SortId(s))).map(|a| power.class(full, SortId(s), &vec![a; width]) as u32).collect())
        .collect();
    let diagonal = Homomorphism { maps };
    if !diagonal.is_hom(m, &power.view) {
        return Err(RedprodError::DiagonalNotHom);
    }
    for (s, map) in diagonal.maps.iter().enumerate() {
        let mut img = map.clone();
        img.sort_unstable();
        img.dedup();
        if img.len() != map.len() {
            return Err(RedprodError::DiagonalNotInjective(s));
        }
    }
    let cat = SemCat::saturate(vec![m.clone(), power.view.clone()], cfg)?;
    is_elementary_hom(&cat, 0, 1, &diagonal).map_err(RedprodError::DiagonalNotElementary)?;
    Ok(DiagonalReport { power, diagonal })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{random_formula, random_model, random_signature};
    use crate::syntax::{parse_model, parse_theory};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Every subset family that is a filter, by brute force over all
    /// families of subsets of a 3-element set.
    #[test]
    fn filters_on_three_points_are_principal() {
        let mut count = 0;
        for fam in 1u32..(1 << 8) {
            let members: Vec<u32> = (0..8).filter(|&s| fam >> s & 1 == 1).collect();
            if let Ok(f) = IndexFilter::from_members(3, members.clone()) {
                count += 1;
                assert_eq!(IndexFilter::principal(3, f.core()).unwrap(), f);
                assert_eq!(f.is_ultra(), f.core().count_ones() == 1);
            }
        }
        // one per nonempty core
        assert_eq!(count, 7);
    }

    #[test]
    fn filter_errors() {
        assert_eq!(IndexFilter::generated(3, &[0b001, 0b010]), Err(RedprodError::Improper));
        assert_eq!(IndexFilter::from_members(2, vec![0b01]), Err(RedprodError::NotUpward(0b01, 0b11)));
        assert_eq!(IndexFilter::from_members(2, vec![]), Err(RedprodError::Empty));
        assert!(matches!(IndexFilter::generated(0, &[]), Err(RedprodError::IndexSize(0))));
        assert_eq!(IndexFilter::generated(2, &[]).unwrap().members(), &[0b11]);
        assert_eq!(IndexFilter::generated(3, &[0b011, 0b110]).unwrap().core(), 0b010);
    }

    fn pair() -> Vec<FinModel> {
        let th = parse_theory("sort A rel R : A A func f : A -> A").unwrap();
        vec![
            parse_model("A = {0,1} R = {(0,1)} f = {(0) -> 1, (1) -> 1}", &th.sig).unwrap(),
            parse_model("A = {0,1,2} R = {(1,2),(2,2)} f = {(0) -> 0, (1) -> 2, (2) -> 0}", &th.sig).unwrap(),
        ]
    }

    #[test]
    fn full_filter_gives_the_product() {
        let ms = pair();
        let f = IndexFilter::generated(2, &[]).unwrap();
        let rp = reduced_product(&ms, &f).unwrap();
        let prod = crate::model::model_product(&ms[0], &ms[1]);
        assert_eq!(rp.view.card(SortId(0)), 6);
        assert!(is_isomorphism(&rp.view, &prod, &rp.iso).is_ok());
        assert_eq!(rp.shortcut, prod);
    }

    #[test]
    fn ultra_collapses_to_a_factor() {
        let ms = pair();
        for i in 0..2 {
            let rp = reduced_product(&ms, &IndexFilter::ultra_at(2, i).unwrap()).unwrap();
            assert_eq!(rp.shortcut, ms[i]);
            assert_eq!(rp.view.names[0], ms[i].names[0]);
            // representatives sit on the core
            assert!(rp.sorts[0].reps.iter().all(|(k, _)| rp.stages[*k].mask == 1 << i));
        }
    }

    #[test]
    fn colimit_classes_by_brute_force() {
        // (J, a) ~ (J', a') iff they agree on some member below both
        let ms = pair();
        let f = IndexFilter::ultra_at(2, 1).unwrap();
        let rp = reduced_product(&ms, &f).unwrap();
        let s = SortId(0);
        let mut nodes = Vec::new();
        for (k, st) in rp.stages.iter().enumerate() {
            let n: usize = st.idx.iter().map(|&i| ms[i].card(s)).product();
            for code in 0..n {
                nodes.push((k, decode_stage(&ms, &st.idx, s, code)));
            }
        }
        for (k1, a1) in &nodes {
            for (k2, a2) in &nodes {
                let (s1, s2) = (&rp.stages[*k1], &rp.stages[*k2]);
                let related = f.members().iter().any(|&low| {
                    low & s1.mask & s2.mask == low
                        && indices(low).iter().all(|i| {
                            let p1 = s1.idx.iter().position(|j| j == i).unwrap();
                            let p2 = s2.idx.iter().position(|j| j == i).unwrap();
                            a1[p1] == a2[p2]
                        })
                });
                assert_eq!(related, rp.class(*k1, s, a1) == rp.class(*k2, s, a2));
            }
        }
    }

    #[test]
    fn los_examples() {
        let th = parse_theory("sort A rel R : A").unwrap();
        let m = parse_model("A = {0,1}", &th.sig).unwrap();
        let ms = vec![m.clone(), m.clone(), m];
        let rp = reduced_product(&ms, &IndexFilter::ultra_at(3, 0).unwrap()).unwrap();
        let set = |xs: &[usize]| {
            let mut b = FixedBitSet::with_capacity(2);
            xs.iter().for_each(|&x| b.insert(x));
            b
        };
        let ctx = [SortId(0)];
        let a = vec![set(&[0]), set(&[0]), set(&[0])];
        let b = vec![set(&[0, 1]), set(&[0]), set(&[0])];
        assert!(los_containment(&rp, &ctx, &a, &b).unwrap().holds);
        assert!(los_containment(&rp, &ctx, &a, &a).unwrap().holds);
        // contained exactly off the principal index
        let b = vec![set(&[1]), set(&[0, 1]), set(&[0])];
        let v = los_containment(&rp, &ctx, &a, &b).unwrap();
        assert!(!v.holds);
        assert_eq!(v.index_set, 0b110);
        let rp = reduced_product(&[ms_one(&th)], &IndexFilter::generated(1, &[]).unwrap()).unwrap();
        assert!(los_containment(&rp, &ctx, &[set(&[1])], &[set(&[1])]).unwrap().holds);
    }

    fn ms_one(th: &crate::syntax::Theory) -> FinModel {
        parse_model("A = {0,1} R = {1}", &th.sig).unwrap()
    }

    #[test]
    fn los_needs_ultra() {
        let ms = pair();
        let rp = reduced_product(&ms, &IndexFilter::generated(2, &[]).unwrap()).unwrap();
        assert_eq!(los_containment(&rp, &[SortId(0)], &[], &[]), Err(RedprodError::NotUltra));
    }

    #[test]
    fn diagonal_examples() {
        let ms = pair();
        let cfg = SemCatConfig { n_max: 2, ..SemCatConfig::default() };
        let d = diagonal_map(&ms[1], &IndexFilter::ultra_at(1, 0).unwrap(), cfg).unwrap();
        assert_eq!(d.diagonal.maps[0], vec![0, 1, 2]);
        let d = diagonal_map(&ms[1], &IndexFilter::ultra_at(3, 0).unwrap(), cfg).unwrap();
        assert!(is_isomorphism(&ms[1], &d.power.view, &d.diagonal).is_ok());
        assert!(matches!(diagonal_map(&ms[1], &IndexFilter::generated(2, &[]).unwrap(), cfg), Err(RedprodError::NotUltra)));
    }

    #[test]
    fn random_collapses() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut done = 0;
        while done < 60 {
            let sig = random_signature(&mut rng);
            let size = rng.gen_range(1..=3);
            let ms: Vec<FinModel> = (0..size).map(|_| random_model(&mut rng, &sig, 2)).collect();
            let gens: Vec<u32> = (0..rng.gen_range(0..3)).map(|_| rng.gen_range(1..1u32 << size)).collect();
            let Ok(f) = IndexFilter::generated(size, &gens) else { continue };
            match reduced_product(&ms, &f) {
                Ok(rp) => {
                    assert!(is_isomorphism(&rp.view, &rp.shortcut, &rp.iso).is_ok());
                    done += 1;
                }
                Err(RedprodError::TooLarge(_)) => {}
                Err(e) => panic!("{e}"),
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn formulas_commute_with_reduction(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sig = random_signature(&mut rng);
            let size = rng.gen_range(1..=3);
            let ms: Vec<FinModel> = (0..size).map(|_| random_model(&mut rng, &sig, 2)).collect();
            let f = IndexFilter::principal(size, rng.gen_range(1..1u32 << size)).unwrap();
            let rp = reduced_product(&ms, &f).unwrap();
            for _ in 0..4 {
                let (ctx, phi) = random_formula(&mut rng, &sig, 2);
                prop_assert!(formula_coherence(&rp, &ctx, &phi).unwrap());
            }
        }

        #[test]
        fn diagonal_is_elementary(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sig = random_signature(&mut rng);
            let m = random_model(&mut rng, &sig, 2);
            let size = rng.gen_range(1..=4);
            let f = IndexFilter::ultra_at(size, rng.gen_range(0..size)).unwrap();
            let cfg = SemCatConfig { n_max: 2, ..SemCatConfig::default() };
            match diagonal_map(&m, &f, cfg) {
                Ok(_) | Err(RedprodError::Sat(SatError::Cutoff { .. })) | Err(RedprodError::TooLarge(_)) => {}
                Err(e) => prop_assert!(false, "{}", e),
            }
        }
    }
}
