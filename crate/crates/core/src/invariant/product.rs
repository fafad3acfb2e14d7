//! The comparison map from the colimit of a product to the product of colimits.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use super::lm::{closure, LmConfig, LmError, LmLattice, UnionFind};
use super::view::ModelView;
use crate::dlat::FinDistLattice;
use crate::model::{model_product, FinModel};
use crate::semcat::{SatError, SemCat, SemCatConfig};

/// How the product of two members is presented to the colimit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProductMode {
    /// The product structure is added to the family as a third member.
    Member,
    /// The pointwise product of the two evaluation functors, as a view.
    Pointwise,
    /// The pointwise product after adding binary coproducts of contexts:
    /// besides the pointwise points there are mixed points `(a, b)` of
    /// `x ⊔ y` with `a ∈ M(x)`, `b ∈ N(y)`, and `Sub(x ⊔ y) = Sub(x) × Sub(y)`.
    Completed,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProductCheck {
    pub mode: ProductMode,
    pub sizes: (usize, usize, usize),
    pub well_defined: bool,
    pub injective: bool,
    pub surjective: bool,
    pub order_iso: bool,
    /// Set when some colimit order failed to be a lattice or merged cycles.
    pub bound_flag: bool,
    pub offending: Option<String>,
}

impl ProductCheck {
    pub fn is_iso(&self) -> bool {
        self.well_defined && self.injective && self.surjective && self.order_iso
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ProductError {
    #[error(transparent)]
    Sat(#[from] SatError),
    #[error(transparent)]
    Lm(#[from] LmError),
    #[error("the colimit has {size} classes, more than the limit {limit}")]
    Cutoff { size: usize, limit: usize },
}

/// Builds the category for `m`, `n` and (in member mode) their product,
/// then compares `L(M×N)` with `LM × LN` through
/// `[u at (a,b)] ↦ ([u at a], [u at b])`.
pub fn lm_product_check(m: &FinModel, n: &FinModel, mode: ProductMode, cfg: SemCatConfig) -> Result<ProductCheck, ProductError> {
    let mut family = vec![m.clone(), n.clone()];
    if mode == ProductMode::Member {
        family.push(model_product(m, n));
    }
    let cat = SemCat::saturate(family, cfg)?;
    let lcfg = LmConfig::for_cat(&cat);
    let lm_m = LmLattice::compute(&cat, &ModelView::member(0), lcfg)?;
    let lm_n = LmLattice::compute(&cat, &ModelView::member(1), lcfg)?;
    let pview = match mode {
        ProductMode::Member => ModelView::member(2),
        ProductMode::Pointwise | ProductMode::Completed => ModelView::product(0, 1),
    };
    let lm_p = LmLattice::compute(&cat, &pview, lcfg)?;
    if mode == ProductMode::Completed {
        return completed(&cat, &lm_m, &lm_n, &lm_p);
    }
    Ok(compare(&cat, mode, &lm_m, &lm_n, &lm_p))
}

fn compare(cat: &SemCat, mode: ProductMode, lm_m: &LmLattice, lm_n: &LmLattice, lm_p: &LmLattice) -> ProductCheck {
    let (km, kn, kp) = (lm_m.len(), lm_n.len(), lm_p.len());
    let bound_flag = [lm_m, lm_n, lm_p].iter().any(|l| l.lattice.is_none() || l.audit.cycle_merges > 0);
    let mut check = ProductCheck {
        mode,
        sizes: (kp, km, kn),
        well_defined: true,
        injective: false,
        surjective: false,
        order_iso: false,
        bound_flag,
        offending: None,
    };
    let mut map = vec![usize::MAX; kp];
    for (x, p, w, c) in lm_p.generators() {
        let (a, b) = match mode {
            ProductMode::Pointwise | ProductMode::Completed => (p[0], p[1]),
            ProductMode::Member => {
                let sorts = cat.sorts(x);
                let (fm, fn_) = (&cat.family[0], &cat.family[1]);
                let t = cat.family[2].decode(sorts, p[0]);
                let ta: Vec<usize> = t.iter().zip(sorts).map(|(&e, &s)| e / fn_.card(s)).collect();
                let tb: Vec<usize> = t.iter().zip(sorts).map(|(&e, &s)| e % fn_.card(s)).collect();
                (fm.encode(sorts, &ta), fn_.encode(sorts, &tb))
            }
        };
        let img = lm_m.class_of(cat, x, &[a], w) * kn + lm_n.class_of(cat, x, &[b], w);
        if map[c] == usize::MAX {
            map[c] = img;
        } else if map[c] != img {
            check.well_defined = false;
            check.offending = Some(format!("class {c} has two images (set {w} at [{}])", cat.context_name(x)));
            return check;
        }
    }
    finish(&mut check, &map, kp, km, kn, |a, b| lm_p.leq(a, b), lm_m, lm_n);
    check
}

#[allow(clippy::too_many_arguments)]
fn finish(
    check: &mut ProductCheck,
    map: &[usize],
    kp: usize,
    km: usize,
    kn: usize,
    leq_p: impl Fn(usize, usize) -> bool,
    lm_m: &LmLattice,
    lm_n: &LmLattice,
) {
    let mut hit = vec![false; km * kn];
    check.injective = true;
    for &i in map {
        if std::mem::replace(&mut hit[i], true) {
            check.injective = false;
        }
    }
    check.surjective = hit.iter().all(|&h| h);
    if !check.injective {
        check.offending = Some("two classes of the product have the same image".into());
    } else if !check.surjective {
        let missing = hit.iter().position(|&h| !h).unwrap();
        check.offending = Some(format!("pair ({}, {}) of classes is not hit", missing / kn, missing % kn));
    }
    let leq_pair = |i: usize, j: usize| lm_m.leq(i / kn, j / kn) && lm_n.leq(i % kn, j % kn);
    check.order_iso = (0..kp).all(|a| (0..kp).all(|b| leq_p(a, b) == leq_pair(map[a], map[b])));
    if check.offending.is_none() && !check.order_iso {
        check.offending = Some("the map does not preserve and reflect the order".into());
    }
}

/// The colimit over mixed and pointwise generators, computed on the
/// product generator graph.
///
/// A mixed generator is a pair `(g, h)` of generators of `LM` and `LN`.
/// Along `f ⊔ id` and `id ⊔ g` it is identified componentwise, so the
/// spanning forests of the two factors generate all mixed identifications.
/// A pointwise generator `u` at `(a, b)` is identified with `(u, u)` at the
/// mixed point along the codiagonal `x ⊔ x -> x`.
fn completed(cat: &SemCat, lm_m: &LmLattice, lm_n: &LmLattice, lm_p: &LmLattice) -> Result<ProductCheck, ProductError> {
    let (gm, gn, gp) = (lm_m.num_generators(), lm_n.num_generators(), lm_p.num_generators());
    let mixed = |g: usize, h: usize| g * gn + h;
    let off = gm * gn;
    let mut uf = UnionFind((0..off + gp).collect());
    for &(a, b) in lm_m.merge_edges() {
        for h in 0..gn {
            uf.union(mixed(a, h), mixed(b, h));
        }
    }
    for &(a, b) in lm_n.merge_edges() {
        for g in 0..gm {
            uf.union(mixed(g, a), mixed(g, b));
        }
    }
    for &(a, b) in lm_p.merge_edges() {
        uf.union(off + a, off + b);
    }
    let mut pure = Vec::with_capacity(gp);
    for (x, p, w, _) in lm_p.generators() {
        let g = lm_m.generator_index(cat, x, &[p[0]], w);
        let h = lm_n.generator_index(cat, x, &[p[1]], w);
        pure.push(mixed(g, h));
    }
    for (i, &t) in pure.iter().enumerate() {
        uf.union(off + i, t);
    }
    let mut class = vec![0; off + gp];
    let mut roots: HashMap<usize, usize> = HashMap::new();
    for (g, slot) in class.iter_mut().enumerate() {
        let r = uf.find(g);
        let next = roots.len();
        *slot = *roots.entry(r).or_insert(next);
    }
    let mut k = roots.len();
    let limit = cat.config.max_lattice;
    if k > limit || lm_m.len() * lm_n.len() > limit {
        return Err(ProductError::Cutoff { size: k.max(lm_m.len() * lm_n.len()), limit });
    }
    let mut edges: HashSet<(usize, usize)> = HashSet::new();
    for (a, b) in lm_m.generator_covers(cat) {
        for h in 0..gn {
            edges.insert((class[mixed(a, h)], class[mixed(b, h)]));
        }
    }
    for (a, b) in lm_n.generator_covers(cat) {
        for g in 0..gm {
            edges.insert((class[mixed(g, a)], class[mixed(g, b)]));
        }
    }
    for (a, b) in lm_p.generator_covers(cat) {
        edges.insert((class[off + a], class[off + b]));
    }
    edges.retain(|(a, b)| a != b);
    let mut order = closure(k, &edges);
    let mut cuf = UnionFind((0..k).collect());
    let mut cycles = 0;
    for a in 0..k {
        for b in order[a].ones() {
            if a != b && order[b].contains(a) && cuf.union(a, b) {
                cycles += 1;
            }
        }
    }
    if cycles > 0 {
        let mut renum: HashMap<usize, usize> = HashMap::new();
        let map: Vec<usize> = (0..k)
            .map(|a| {
                let (r, next) = (cuf.find(a), renum.len());
                *renum.entry(r).or_insert(next)
            })
            .collect();
        class.iter_mut().for_each(|c| *c = map[*c]);
        let e: HashSet<(usize, usize)> = edges.iter().map(|&(a, b)| (map[a], map[b])).filter(|(a, b)| a != b).collect();
        k = renum.len();
        order = closure(k, &e);
    }
    let lattice = FinDistLattice::from_leq(k, |a, b| order[a].contains(b)).ok();
    let (km, kn) = (lm_m.len(), lm_n.len());
    let flag = lattice.is_none() || cycles > 0 || [lm_m, lm_n].iter().any(|l| l.lattice.is_none() || l.audit.cycle_merges > 0);
    let mut check = ProductCheck {
        mode: ProductMode::Completed,
        sizes: (k, km, kn),
        well_defined: true,
        injective: false,
        surjective: false,
        order_iso: false,
        bound_flag: flag,
        offending: None,
    };
    let mut map = vec![usize::MAX; k];
    for g in 0..gm {
        for h in 0..gn {
            let img = lm_m.generator_class(g) * kn + lm_n.generator_class(h);
            let c = class[mixed(g, h)];
            if map[c] == usize::MAX {
                map[c] = img;
            } else if map[c] != img {
                check.well_defined = false;
                check.offending = Some(format!("class {c} has two images"));
                return Ok(check);
            }
        }
    }
    finish(&mut check, &map, k, km, kn, |a, b| order[a].contains(b), lm_m, lm_n);
    Ok(check)
}

/// Convenience wrapper with the default configuration at bound `n_max`.
pub fn lm_product_check_default(m: &FinModel, n: &FinModel, mode: ProductMode, n_max: usize) -> Result<ProductCheck, ProductError> {
    lm_product_check(m, n, mode, SemCatConfig { n_max, ..SemCatConfig::default() })
}
