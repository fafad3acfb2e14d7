//! Subfunctors of an evaluation model generated by subsets of its sorts.
//!
//! A family `N(s) ⊆ M(s)` extends to every context by `N(x) = ∏ N(s_i)` and
//! to stored sets by `N(u) = N(x) ∩ ev(u)`. The extension is coherent
//! exactly when projections of definable sets restricted to `N` see the
//! same witnesses as in `M`.

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::invariant::{is_positively_closed_direct, ModelView, PcCounterexample};
use crate::semcat::{all_coordinate_maps, CtxId, SemCat};
use crate::syntax::SortId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortSubsetFamily {
    pub member: usize,
    /// `sets[s]` is a subset of the member's carrier at sort `s`.
    pub sets: Vec<FixedBitSet>,
}

impl SortSubsetFamily {
    pub fn full(cat: &SemCat, member: usize) -> Self {
        let m = &cat.family[member];
        let sets = (0..m.sig.sorts.len())
            .map(|s| {
                let mut b = FixedBitSet::with_capacity(m.card(SortId(s)));
                b.insert_range(..);
                b
            })
            .collect();
        SortSubsetFamily { member, sets }
    }

    pub fn empty(cat: &SemCat, member: usize) -> Self {
        let m = &cat.family[member];
        let sets = (0..m.sig.sorts.len()).map(|s| FixedBitSet::with_capacity(m.card(SortId(s)))).collect();
        SortSubsetFamily { member, sets }
    }

    pub fn validate(&self, cat: &SemCat) -> Result<(), String> {
        let m = &cat.family[self.member];
        if self.sets.len() != m.sig.sorts.len() {
            return Err(format!("{} subsets for {} sorts", self.sets.len(), m.sig.sorts.len()));
        }
        for (s, set) in self.sets.iter().enumerate() {
            if set.len() != m.card(SortId(s)) {
                return Err(format!("subset of sort {} has the wrong length", m.sig.sort_name(SortId(s))));
            }
        }
        Ok(())
    }

    /// `∏ N(s_i)` at `x`, as a subset of the member's tuples.
    pub fn carrier(&self, cat: &SemCat, x: CtxId) -> FixedBitSet {
        let m = &cat.family[self.member];
        let sorts = cat.sorts(x);
        let n = m.product_size(sorts);
        let mut out = FixedBitSet::with_capacity(n);
        for t in 0..n {
            if m.decode(sorts, t).iter().zip(sorts).all(|(&a, s)| self.sets[s.0].contains(a)) {
                out.insert(t);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TvViolation {
    pub context: Vec<SortId>,
    /// Number of leading coordinates projected away.
    pub split: usize,
    pub defset: usize,
    /// A tuple of the kept coordinates reached from `M` but not from `N`.
    pub tuple: usize,
}

/// Projection of the tuples in `set` at `x` onto the last `m` coordinates,
/// keeping only those whose leading part lies in `lead`.
fn project_suffix(set: &FixedBitSet, lead: Option<&FixedBitSet>, suffix_size: usize) -> FixedBitSet {
    let mut out = FixedBitSet::with_capacity(suffix_size);
    for t in set.ones() {
        if lead.is_none_or(|l| l.contains(t / suffix_size)) {
            out.insert(t % suffix_size);
        }
    }
    out
}

/// Which splits [`tv_check_with`] tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TvSense {
    /// Both sides nonempty. The empty family passes vacuously.
    Plain,
    /// `s'` may be empty, with `∏N(∅) = 1`: sentences true in `M` need
    /// witnesses in `N`. This is the sense that extends to a subfunctor.
    Strong,
}

/// [`tv_check_with`] in the strong sense.
pub fn tv_check(cat: &SemCat, fam: &SortSubsetFamily) -> Result<(), TvViolation> {
    tv_check_with(cat, fam, TvSense::Strong)
}

/// For every stored `φ` at every split `s ⋆ s'` with `s` nonempty, the
/// projections to `s'` of `ev(φ)` over `∏M(s) × ∏N(s')` and over
/// `∏N(s) × ∏N(s')` agree.
pub fn tv_check_with(cat: &SemCat, fam: &SortSubsetFamily, sense: TvSense) -> Result<(), TvViolation> {
    let i = fam.member;
    for x in cat.contexts() {
        let sorts = cat.sorts(x);
        let last = match sense {
            TvSense::Plain => sorts.len().saturating_sub(1),
            TvSense::Strong => sorts.len(),
        };
        for split in 1..=last {
            let (pre, suf) = sorts.split_at(split);
            let (px, sx) = (cat.ctx_id(pre).unwrap(), cat.ctx_id(suf).unwrap());
            let (lead, tail) = (fam.carrier(cat, px), fam.carrier(cat, sx));
            let suffix_size = cat.member_size(sx, i);
            for d in 0..cat.sub_len(x) {
                let ev = cat.component(x, d, i);
                let mut p = project_suffix(&ev, None, suffix_size);
                p.intersect_with(&tail);
                let mut q = project_suffix(&ev, Some(&lead), suffix_size);
                q.intersect_with(&tail);
                if p != q {
                    let tuple = p.difference(&q).next().unwrap();
                    return Err(TvViolation { context: sorts.to_vec(), split, defset: d, tuple });
                }
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubfunctorExtension {
    pub member: usize,
    /// `N(x)` for each context.
    pub carriers: Vec<FixedBitSet>,
    /// `N(u)` for each context and stored set.
    pub sets: Vec<Vec<FixedBitSet>>,
}

/// The extension by pullback. Rejected unless the family passes [`tv_check`].
pub fn tv_extend(cat: &SemCat, fam: &SortSubsetFamily) -> Result<SubfunctorExtension, TvViolation> {
    tv_check(cat, fam)?;
    Ok(extend_by_pullback(cat, fam))
}

/// `N` at every context by pullback of the product of sort components,
/// without checking anything.
pub fn extend_by_pullback(cat: &SemCat, fam: &SortSubsetFamily) -> SubfunctorExtension {
    let mut carriers = Vec::new();
    let mut sets = Vec::new();
    for x in cat.contexts() {
        let nx = fam.carrier(cat, x);
        sets.push(
            (0..cat.sub_len(x))
                .map(|d| {
                    let mut s = cat.component(x, d, fam.member);
                    s.intersect_with(&nx);
                    s
                })
                .collect(),
        );
        carriers.push(nx);
    }
    SubfunctorExtension { member: fam.member, carriers, sets }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SubfunctorReport {
    pub lattice: bool,
    pub coherence: bool,
    pub elementary: bool,
    /// `N(x · y) = N(x) × N(y)`.
    pub products: bool,
    pub first_failure: Option<String>,
}

impl SubfunctorReport {
    pub fn passes(&self) -> bool {
        self.lattice && self.coherence && self.elementary && self.products
    }

    fn fail(&mut self, what: &str, detail: String) {
        if self.first_failure.is_none() {
            self.first_failure = Some(format!("{what}: {detail}"));
        }
    }
}

/// Checks that `ext` is a lattice map at each context, commutes with images
/// along every coordinate map, is cut out of `ev` by `N(x)`, and preserves
/// products.
pub fn verify_subfunctor(cat: &SemCat, ext: &SubfunctorExtension) -> SubfunctorReport {
    let i = ext.member;
    let mut r = SubfunctorReport { lattice: true, coherence: true, elementary: true, products: true, first_failure: None };
    for x in cat.contexts() {
        let name = cat.context_name(x);
        let (nx, sets) = (&ext.carriers[x.0], &ext.sets[x.0]);
        if sets[cat.bot(x)].count_ones(..) != 0 || &sets[cat.top(x)] != nx {
            r.lattice = false;
            r.fail("lattice", format!("bounds at [{name}]"));
        }
        for a in 0..cat.sub_len(x) {
            for b in a + 1..cat.sub_len(x) {
                let mut m = sets[a].clone();
                m.intersect_with(&sets[b]);
                let mut j = sets[a].clone();
                j.union_with(&sets[b]);
                if sets[cat.meet(x, a, b)] != m || sets[cat.join(x, a, b)] != j {
                    r.lattice = false;
                    r.fail("lattice", format!("sets {a}, {b} at [{name}]"));
                }
            }
            let mut e = cat.component(x, a, i);
            e.intersect_with(nx);
            if sets[a] != e {
                r.elementary = false;
                r.fail("elementarity", format!("set {a} at [{name}]"));
            }
        }
        // products: N(x) is the product of its one-sort factors
        let sorts = cat.sorts(x);
        let m = &cat.family[i];
        for t in 0..m.product_size(sorts) {
            let tup = m.decode(sorts, t);
            let factors = tup.iter().zip(sorts).all(|(&a, &s)| {
                let c = cat.ctx_id(&[s]).unwrap();
                ext.carriers[c.0].contains(a)
            });
            if factors != nx.contains(t) {
                r.products = false;
                r.fail("products", format!("tuple {t} at [{name}]"));
                break;
            }
        }
    }
    for x in cat.contexts() {
        for y in cat.contexts() {
            let (xs, ys) = (cat.sorts(x), cat.sorts(y));
            if ys.len() > xs.len() {
                continue;
            }
            // projections: injective index lists into x
            for sigma in all_coordinate_maps(xs.len(), ys.len()) {
                if !sigma.iter().zip(ys).all(|(&j, &s)| xs[j] == s) || !is_injective(&sigma) {
                    continue;
                }
                let table = cat.map_table(x, y, &sigma);
                let (ox, oy) = (cat.offset(x, i), cat.offset(y, i));
                for d in 0..cat.sub_len(x) {
                    let img = cat.image(x, y, &sigma, d).expect("saturated");
                    let mut proj = FixedBitSet::with_capacity(cat.member_size(y, i));
                    proj.extend(ext.sets[x.0][d].ones().map(|t| table[ox + t] - oy));
                    if proj != ext.sets[y.0][img] {
                        r.coherence = false;
                        r.fail("coherence", format!("image of set {d} at [{}] along {sigma:?}", cat.context_name(x)));
                    }
                }
            }
        }
    }
    r
}

fn is_injective(sigma: &[usize]) -> bool {
    sigma.iter().enumerate().all(|(k, a)| !sigma[..k].contains(a))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PosclViolation {
    pub context: Vec<SortId>,
    pub split: usize,
    pub defset: usize,
    pub tuple: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PosclSubfunctor {
    pub violation: Option<PosclViolation>,
    /// On success: the extension's verification and positive closedness.
    pub extension: Option<SubfunctorReport>,
    pub extension_closed: Option<Result<(), PcCounterexample>>,
}

impl PosclSubfunctor {
    pub fn holds(&self) -> bool {
        self.violation.is_none()
    }
}

/// For every stored `φ` at every split `s ⋆ s'` (either side may be empty),
/// each tuple of `∏N(s')` lies in the projection of `φ` over `N` or in a
/// stored set disjoint from the projection of `φ`. On success the extension
/// is built and checked for coherence and positive closedness.
pub fn poscl_subfunctor_check(cat: &SemCat, fam: &SortSubsetFamily) -> PosclSubfunctor {
    let i = fam.member;
    for x in cat.contexts() {
        let sorts = cat.sorts(x);
        for split in 0..=sorts.len() {
            let (pre, suf) = sorts.split_at(split);
            let (px, sx) = (cat.ctx_id(pre).unwrap(), cat.ctx_id(suf).unwrap());
            let (lead, tail) = (fam.carrier(cat, px), fam.carrier(cat, sx));
            let suffix_size = cat.member_size(sx, i);
            let keep: Vec<usize> = (split..sorts.len()).collect();
            for d in 0..cat.sub_len(x) {
                let ev = cat.component(x, d, i);
                let mut covered = project_suffix(&ev, Some(&lead), suffix_size);
                let (_, img) = cat.image_along_projection(x, d, &keep).expect("saturated");
                covered.union_with(&cat.component(sx, cat.pseudo_complement(sx, img), i));
                if let Some(tuple) = tail.difference(&covered).next() {
                    return PosclSubfunctor {
                        violation: Some(PosclViolation { context: sorts.to_vec(), split, defset: d, tuple }),
                        extension: None,
                        extension_closed: None,
                    };
                }
            }
        }
    }
    let ext = extend_by_pullback(cat, fam);
    let report = verify_subfunctor(cat, &ext);
    let closed = is_positively_closed_direct(cat, &ModelView::restricted(fam.member, fam.sets.clone()));
    PosclSubfunctor { violation: None, extension: Some(report), extension_closed: Some(closed) }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::corpus::{random_model, random_signature};
    use crate::semcat::SemCatConfig;
    use crate::syntax::{parse_model, parse_theory};

    fn cfg(n_max: usize) -> SemCatConfig {
        SemCatConfig { n_max, ..SemCatConfig::default() }
    }

    fn edge() -> SemCat {
        let th = parse_theory("sort A rel R : A A").unwrap();
        let m = parse_model("A = {0,1} R = {(0,1)}", &th.sig).unwrap();
        SemCat::saturate(vec![m], cfg(2)).unwrap()
    }

    fn only(cat: &SemCat, xs: &[usize]) -> SortSubsetFamily {
        let mut f = SortSubsetFamily::empty(cat, 0);
        xs.iter().for_each(|&a| f.sets[0].insert(a));
        f
    }

    pub(crate) fn random_family(rng: &mut impl Rng, cat: &SemCat, member: usize) -> SortSubsetFamily {
        let mut f = SortSubsetFamily::full(cat, member);
        let keep = rng.gen_range(0.3..1.0);
        for s in f.sets.iter_mut() {
            for a in 0..s.len() {
                s.set(a, rng.gen_bool(keep));
            }
        }
        f
    }

    #[test]
    fn full_and_empty_pass() {
        let cat = edge();
        let full = SortSubsetFamily::full(&cat, 0);
        let ext = tv_extend(&cat, &full).unwrap();
        for x in cat.contexts() {
            for d in 0..cat.sub_len(x) {
                assert_eq!(ext.sets[x.0][d], cat.component(x, d, 0));
            }
        }
        assert!(verify_subfunctor(&cat, &ext).passes());
        let empty = SortSubsetFamily::empty(&cat, 0);
        assert!(tv_check_with(&cat, &empty, TvSense::Plain).is_ok());
        // ∃x∃y.R(x,y) holds in M
        let v = tv_check(&cat, &empty).unwrap_err();
        assert_eq!(v.split, v.context.len());
        let ext = extend_by_pullback(&cat, &empty);
        assert!(ext.carriers[cat.ctx_id(&[SortId(0)]).unwrap().0].is_clear());
        assert!(!verify_subfunctor(&cat, &ext).passes());
    }

    #[test]
    fn dropping_a_witness_fails() {
        let cat = edge();
        let f = only(&cat, &[0]);
        assert!(tv_check_with(&cat, &f, TvSense::Plain).is_err());
        assert!(tv_extend(&cat, &f).is_err());
        assert!(!verify_subfunctor(&cat, &extend_by_pullback(&cat, &f)).coherence);
        assert!(!poscl_subfunctor_check(&cat, &f).holds());
    }

    #[test]
    fn hand_example_extension() {
        // 2 is a retract of the whole model through the loop
        let th = parse_theory("sort A rel R : A A").unwrap();
        let m = parse_model("A = {0,1,2} R = {(0,1),(2,2)}", &th.sig).unwrap();
        let cat = SemCat::saturate(vec![m], cfg(2)).unwrap();
        let f = only(&cat, &[2]);
        let ext = tv_extend(&cat, &f).unwrap();
        assert!(verify_subfunctor(&cat, &ext).passes());
        let aa = cat.ctx_id(&[SortId(0), SortId(0)]).unwrap();
        assert_eq!(ext.carriers[aa.0].ones().collect::<Vec<_>>(), vec![8]);
        for d in 0..cat.sub_len(aa) {
            assert_eq!(ext.sets[aa.0][d].contains(8), cat.contains(aa, d, 0, 8));
        }
        assert!(tv_check(&cat, &only(&cat, &[1])).is_err());
    }

    #[test]
    fn empty_sort_gives_empty_contexts() {
        let th = parse_theory("sort A sort B rel R : A B").unwrap();
        let m = parse_model("A = {0} B = {0,1} R = {(0,1)}", &th.sig).unwrap();
        let cat = SemCat::saturate(vec![m], cfg(2)).unwrap();
        let mut f = SortSubsetFamily::full(&cat, 0);
        f.sets[0].clear();
        let ext = extend_by_pullback(&cat, &f);
        for x in cat.contexts() {
            if cat.sorts(x).contains(&SortId(0)) {
                assert!(ext.carriers[x.0].is_clear());
            }
        }
    }

    #[test]
    fn corrupted_extension_fails_lattice() {
        let cat = edge();
        let mut ext = tv_extend(&cat, &SortSubsetFamily::full(&cat, 0)).unwrap();
        let a = cat.ctx_id(&[SortId(0)]).unwrap();
        // drop element 0 from the top set only
        let top = cat.top(a);
        ext.sets[a.0][top].set(0, false);
        let r = verify_subfunctor(&cat, &ext);
        assert!(!r.lattice);
        assert!(r.first_failure.unwrap().starts_with("lattice"));
    }

    #[test]
    fn poscl_on_closed_model() {
        let th = parse_theory("sort A rel R : A rel S : A").unwrap();
        let m = parse_model("A = {0,1} R = {0} S = {1}", &th.sig).unwrap();
        let cat = SemCat::saturate(vec![m], cfg(2)).unwrap();
        let r = poscl_subfunctor_check(&cat, &SortSubsetFamily::full(&cat, 0));
        assert!(r.holds());
        assert!(r.extension.unwrap().passes());
        assert!(r.extension_closed.unwrap().is_ok());
    }

    #[test]
    fn poscl_sentence_case() {
        // N empty: the only points are at the empty context, where the
        // condition asks sentences to be decided
        let th = parse_theory("sort A rel R : A").unwrap();
        let m = parse_model("A = {0,1} R = {0}", &th.sig).unwrap();
        let cat = SemCat::saturate(vec![m], cfg(2)).unwrap();
        let r = poscl_subfunctor_check(&cat, &SortSubsetFamily::empty(&cat, 0));
        let v = r.violation.expect("∃x.R(x) holds in M but has no witness in N");
        assert_eq!(v.split, 1);
        assert!(v.context.len() == 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn tv_iff_verified(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sig = random_signature(&mut rng);
            let m = random_model(&mut rng, &sig, 3);
            if let Ok(cat) = SemCat::saturate(vec![m], cfg(2)) {
                let f = random_family(&mut rng, &cat, 0);
                let tv = tv_check(&cat, &f).is_ok();
                let rep = verify_subfunctor(&cat, &extend_by_pullback(&cat, &f));
                prop_assert_eq!(tv, rep.passes(), "{:?}", rep.first_failure);
                let pc = poscl_subfunctor_check(&cat, &f);
                if pc.holds() {
                    prop_assert!(tv);
                    prop_assert!(pc.extension_closed.unwrap().is_ok());
                }
            }
        }
    }
}
