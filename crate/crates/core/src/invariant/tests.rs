use std::collections::HashSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::corpus::{load_example, random_model, random_signature};
use crate::dlat::{krull_dim_chains, spec, FinDistLattice, KrullOutcome, PrimeFilter};
use crate::model::{check_sequent, enumerate_homomorphisms, eval_formula, terminal_model, FinModel};
use crate::semcat::{CtxId, SemCat, SemCatConfig};
use crate::syntax::{parse_model, parse_theory, Sequent};

fn cfg(n_max: usize) -> SemCatConfig {
    SemCatConfig { n_max, ..SemCatConfig::default() }
}

fn unary() -> SemCat {
    SemCat::saturate(load_example("unary").unwrap(), cfg(2)).unwrap()
}

fn lm_of(cat: &SemCat, i: usize) -> LmLattice {
    LmLattice::compute(cat, &ModelView::member(i), LmConfig::for_cat(cat)).unwrap()
}

/// Generator equivalence straight from the pair-context criterion: `u` at
/// `a` and `v` at `b` are related iff some stored `φ` at `x·y` contains
/// `(a, b)` and cuts `u × ⊤` and `⊤ × v` equally. Closed transitively over
/// contexts of at most half the bound. Returns the generators and their
/// class roots.
fn brute_classes(cat: &SemCat) -> (Vec<(CtxId, usize, usize)>, Vec<usize>) {
    let half = cat.config.n_max / 2;
    let ctxs: Vec<_> = cat.contexts().filter(|&c| cat.sorts(c).len() <= half).collect();
    let mut gens = Vec::new();
    for &x in &ctxs {
        for a in 0..cat.member_size(x, 0) {
            for u in 0..cat.sub_len(x) {
                gens.push((x, a, u));
            }
        }
    }
    let n = gens.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut a: usize) -> usize {
        while p[a] != a {
            a = p[a];
        }
        a
    }
    for i in 0..n {
        for j in 0..n {
            let ((x, a, u), (y, b, v)) = (gens[i], gens[j]);
            let zs: Vec<_> = cat.sorts(x).iter().chain(cat.sorts(y)).copied().collect();
            let Some(z) = cat.ctx_id(&zs) else { continue };
            let (lx, lz) = (cat.sorts(x).len(), zs.len());
            let left: Vec<usize> = (0..lx).collect();
            let right: Vec<usize> = (lx..lz).collect();
            let pu = cat.pullback(z, x, &left, u).unwrap();
            let pv = cat.pullback(z, y, &right, v).unwrap();
            let nb = cat.member_size(y, 0);
            let ab = a * nb + b;
            let related = (0..cat.sub_len(z))
                .any(|phi| cat.contains(z, phi, 0, ab) && cat.meet(z, phi, pu) == cat.meet(z, phi, pv));
            if related {
                let (ra, rb) = (find(&mut parent, i), find(&mut parent, j));
                parent[ra] = rb;
            }
        }
    }
    let roots = (0..n).map(|i| find(&mut parent, i)).collect();
    (gens, roots)
}

/// The brute partition and the computed classes agree on short contexts.
fn agrees_with_brute(cat: &SemCat, lm: &LmLattice) -> bool {
    let (gens, roots) = brute_classes(cat);
    let cls: Vec<usize> = gens.iter().map(|&(x, a, u)| lm.class_of(cat, x, &[a], u)).collect();
    (0..gens.len()).all(|i| (0..gens.len()).all(|j| (roots[i] == roots[j]) == (cls[i] == cls[j])))
}

#[test]
fn unary_lm_has_three_classes() {
    let cat = unary();
    let lm = lm_of(&cat, 0);
    assert_eq!(lm.len(), 3);
    let (_, roots) = brute_classes(&cat);
    assert_eq!(roots.iter().collect::<HashSet<_>>().len(), 3);
    assert!(agrees_with_brute(&cat, &lm));
    assert!(lm.is_complete());
    let l = lm.lattice.as_ref().unwrap();
    assert_eq!(l.len(), 3);
    assert_ne!(lm.top, lm.bot);
    assert_eq!(lm.audit.ops_failed, 0);
    assert!(lm.audit.witness_fraction() >= 0.95);
}

#[test]
fn brute_force_agrees_on_examples() {
    for name in ["unary", "point", "two-points", "cycle", "chain", "graphs", "successor"] {
        let cat = SemCat::saturate(load_example(name).unwrap(), cfg(2)).unwrap();
        let lm = lm_of(&cat, 0);
        assert!(agrees_with_brute(&cat, &lm), "{name}");
    }
}

#[test]
fn unary_direct_counterexample() {
    let cat = unary();
    let c = is_positively_closed_direct(&cat, &ModelView::member(0)).unwrap_err();
    assert_eq!(cat.context_name(c.ctx), "A");
    assert_eq!(c.point, vec![1]);
    assert_eq!(crate::syntax::print_formula(&cat.sig, &cat.witness(c.ctx, c.u)), "R(v0)");
}

#[test]
fn tp_of_zero_in_unary() {
    let cat = unary();
    let x = cat.ctx_id(&[crate::syntax::SortId(0)]).unwrap();
    let t = tp(&cat, &ModelView::member(0), x, &[0]);
    let names: HashSet<String> =
        t.members_vec().into_iter().map(|d| crate::syntax::print_formula(&cat.sig, &cat.witness(x, d))).collect();
    assert_eq!(names, HashSet::from(["R(v0)".to_string(), "true".to_string()]));
    t.validate(&cat.sub_lattice(x).unwrap()).unwrap();
}

#[test]
fn transformations_on_the_three_chain() {
    let cat = unary();
    let lm = lm_of(&cat, 0);
    let (ts, rep) = nat_transformations(&cat, &lm).unwrap();
    assert_eq!(rep.spec_size, 2);
    assert_eq!(rep.distinct, 2);
    assert!(rep.all_natural && rep.all_prime && rep.tp_matches && rep.tp_minimal, "{:?}", rep.problems);
    // components are pointwise comparable
    let (a, b) = (&ts[0], &ts[1]);
    let le = a.components.iter().zip(&b.components).all(|((_, s), (_, t))| s.is_subset(t));
    let ge = a.components.iter().zip(&b.components).all(|((_, s), (_, t))| t.is_subset(s));
    assert!(le || ge);
}

#[test]
fn positively_closed_has_one_transformation() {
    let cat = SemCat::saturate(load_example("point").unwrap(), cfg(2)).unwrap();
    let lm = lm_of(&cat, 0);
    assert_eq!(lm.len(), 2);
    let (_, rep) = nat_transformations(&cat, &lm).unwrap();
    assert_eq!((rep.spec_size, rep.distinct), (1, 1));
    assert!(rep.tp_matches);
}

#[test]
fn homs_into_closed_target() {
    let th = parse_theory("sort A rel R : A").unwrap();
    let m = parse_model("A = {0,1} R = {0}", &th.sig).unwrap();
    let n = parse_model("A = {0} R = {0}", &th.sig).unwrap();
    let cat = SemCat::saturate(vec![m.clone(), n.clone()], cfg(2)).unwrap();
    let (lm, ln) = (lm_of(&cat, 0), lm_of(&cat, 1));
    assert!(is_positively_closed_direct(&cat, &ModelView::member(1)).is_ok());
    assert_eq!(ln.len(), 2);
    for h in enumerate_homomorphisms(&m, &n, 16).homs {
        let lh = l_of_hom(&cat, &h, &lm, &ln).unwrap();
        assert!(lh.is_lattice_hom);
        assert!((0..ln.len()).all(|c| lh.map.contains(&c)));
    }
    let id = enumerate_homomorphisms(&m, &m, 16).homs.into_iter().find(|h| h.maps[0] == vec![0, 1]).unwrap();
    let lh = l_of_hom(&cat, &id, &lm, &lm).unwrap();
    assert_eq!(lh.map, (0..lm.len()).collect::<Vec<_>>());
}

#[test]
fn elementarity_matches_tp_on_examples() {
    let th = parse_theory("sort A rel R : A").unwrap();
    let m = parse_model("A = {0,1} R = {0}", &th.sig).unwrap();
    let n = parse_model("A = {0} R = {0}", &th.sig).unwrap();
    let cat = SemCat::saturate(vec![m.clone(), n.clone()], cfg(2)).unwrap();
    for (s, t, a, b) in [(0, 1, &m, &n), (0, 0, &m, &m), (1, 0, &n, &m)] {
        for h in enumerate_homomorphisms(a, b, 16).homs {
            check_hom_elementarity_vs_tp(&cat, s, t, &h).unwrap();
        }
    }
}

#[test]
fn product_with_terminal() {
    let m = load_example("unary").unwrap().remove(0);
    let one = terminal_model(m.sig.clone());
    let r = lm_product_check_default(&m, &one, ProductMode::Completed, 2).unwrap();
    assert_eq!(r.sizes, (6, 3, 2));
    assert!(r.is_iso() && !r.bound_flag);
    let r = lm_product_check_default(&m, &one, ProductMode::Member, 2).unwrap();
    assert!(!r.is_iso());
}

#[test]
fn product_modes_on_the_point() {
    let m = load_example("point").unwrap().remove(0);
    let r = lm_product_check_default(&m, &m, ProductMode::Completed, 3).unwrap();
    assert!(r.is_iso());
    assert_eq!(r.sizes, (4, 2, 2));
    // M × M ≅ M pointwise, so only two classes
    for mode in [ProductMode::Member, ProductMode::Pointwise] {
        let r = lm_product_check_default(&m, &m, mode, 3).unwrap();
        assert_eq!(r.sizes, (2, 2, 2));
        assert!(!r.surjective && !r.bound_flag);
    }
}

#[test]
fn product_on_powerset_pair() {
    let th = parse_theory("sort A rel R : A rel S : A").unwrap();
    let m = parse_model("A = {0,1} R = {0} S = {1}", &th.sig).unwrap();
    let r = lm_product_check_default(&m, &m, ProductMode::Completed, 2).unwrap();
    assert!(r.is_iso());
    assert_eq!(r.sizes, (4, 2, 2));
}

#[test]
fn posetal_examples() {
    let two = FinDistLattice::chain(2);
    let p = PrimeFilter { members: [1].into_iter().collect() };
    let r = posetal_import(&two, &p, cfg(2)).unwrap();
    assert!(r.iso && r.lm_size == 2);
    let three = FinDistLattice::chain(3);
    for q in spec(&three).unwrap().points {
        let r = posetal_import(&three, &q, cfg(2)).unwrap();
        assert!(r.iso && r.searched_iso.is_some());
    }
    let b = FinDistLattice::boolean(2);
    for q in spec(&b).unwrap().points {
        let r = posetal_import(&b, &q, cfg(2)).unwrap();
        assert!(r.iso);
        assert_eq!(r.lm_size, 2);
    }
}

#[test]
fn posetal_import_cap() {
    let k = FinDistLattice::boolean(4);
    let p = spec(&k).unwrap().points.remove(0);
    let c = SemCatConfig { max_lattice: 8, ..cfg(1) };
    assert!(matches!(posetal_import(&k, &p, c), Err(PosetalError::ImportCap { size: 16, limit: 8 })));
}

#[test]
fn posetal_two_is_weakly_boolean() {
    let fam = posetal_family(&FinDistLattice::chain(2)).unwrap();
    let cat = SemCat::saturate(fam.models, cfg(1)).unwrap();
    assert!(cat.is_weakly_boolean().is_ok());
    assert!(cat.is_two_valued());
}

fn search_cfg() -> SearchConfig {
    SearchConfig { size_bound: 3, step_bound: 3, candidate_cap: 10_000, sat: cfg(2) }
}

#[test]
fn search_from_closed_model_takes_no_steps() {
    let fam = load_example("point").unwrap();
    match search_positively_closed(&fam, 0, search_cfg()).unwrap() {
        SearchOutcome::Found { steps, model, .. } => {
            assert_eq!(steps, 0);
            assert_eq!(model.to_text(), fam[0].to_text());
        }
        other => panic!("{other:?}"),
    }
}

/// Sequents `φ ⊢ ψ` over random formulas that hold in every member.
fn sampled_theory(fam: &[FinModel], samples: usize) -> Vec<Sequent> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sig = fam[0].sig.clone();
    let mut out = Vec::new();
    for _ in 0..samples {
        let (ctx, f) = crate::corpus::random_formula(&mut rng, &sig, 2);
        let (ctx2, g) = crate::corpus::random_formula(&mut rng, &sig, 2);
        if ctx != ctx2 {
            continue;
        }
        let s = Sequent { context: ctx, lhs: f, rhs: g, pos: Default::default() };
        if fam.iter().all(|m| check_sequent(m, &s).holds) {
            out.push(s);
        }
    }
    out
}

#[test]
fn search_from_unary_reaches_the_point() {
    let fam = load_example("unary").unwrap();
    let SearchOutcome::Found { model, steps, .. } = search_positively_closed(&fam, 0, search_cfg()).unwrap() else {
        panic!("no model found");
    };
    assert_eq!(steps, 1);
    assert_eq!(model.to_text(), parse_model("A = {0} R = {0}", &fam[0].sig).unwrap().to_text());
    // the result satisfies every sampled sequent of the start model; the
    // two-element model with R everywhere does not
    let th = sampled_theory(&fam, 3000);
    assert!(th.iter().all(|s| check_sequent(&model, s).holds));
    let full = parse_model("A = {0,1} R = {0,1}", &fam[0].sig).unwrap();
    assert!(th.iter().any(|s| !check_sequent(&full, s).holds));
}

#[test]
fn search_with_no_room_reports_open_triples() {
    let fam = load_example("unary").unwrap();
    let c = SearchConfig { step_bound: 0, ..search_cfg() };
    match search_positively_closed(&fam, 0, c).unwrap() {
        SearchOutcome::NoneFound { open, .. } => assert!(!open.is_empty()),
        other => panic!("{other:?}"),
    }
}

#[test]
fn enumerated_models_count() {
    let th = parse_theory("sort A rel R : A").unwrap();
    let (ms, truncated) = enumerate_models(&th.sig, 3, 1000);
    assert!(!truncated);
    assert_eq!(ms.len(), 2 + 4 + 8);
    let th = parse_theory("sort A func f : A -> A").unwrap();
    assert_eq!(enumerate_models(&th.sig, 2, 1000).0.len(), 1 + 4);
    assert!(enumerate_models(&th.sig, 3, 10).1);
}

#[test]
fn lm_dimension_zero_means_two() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let sig = random_signature(&mut rng);
        let m = random_model(&mut rng, &sig, 3);
        let Ok(cat) = SemCat::saturate(vec![m], cfg(2)) else { continue };
        let lm = lm_of(&cat, 0);
        if !lm.is_complete() {
            continue;
        }
        if let KrullOutcome::Dim(0) = krull_dim_chains(lm.lattice.as_ref().unwrap()) {
            assert_eq!(lm.len(), 2);
        }
    }
}

#[test]
fn closed_models_have_maximal_types_and_elementary_homs() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut seen = 0;
    for _ in 0..60 {
        let sig = random_signature(&mut rng);
        let m = random_model(&mut rng, &sig, 3);
        let n = random_model(&mut rng, &sig, 2);
        let Ok(cat) = SemCat::saturate(vec![m.clone(), n.clone()], cfg(2)) else { continue };
        if is_positively_closed_direct(&cat, &ModelView::member(0)).is_err() {
            continue;
        }
        seen += 1;
        for x in cat.contexts() {
            let l = cat.sub_lattice(x).unwrap();
            for a in 0..cat.member_size(x, 0) {
                let t = tp(&cat, &ModelView::member(0), x, &[a]);
                // maximal: no prime filter strictly above
                let sp = spec(&l).unwrap();
                assert!(sp.points.iter().all(|q| !(t.is_subset(q) && q != &t)));
            }
        }
        for h in enumerate_homomorphisms(&m, &n, 16).homs {
            assert!(crate::model::is_elementary_hom(&cat, 0, 1, &h).is_ok());
        }
    }
    assert!(seen > 5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lm_equals_two_iff_closed(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sig = random_signature(&mut rng);
        let c = rng.gen_range(1..=3);
        let m = random_model(&mut rng, &sig, c);
        if let Ok(cat) = SemCat::saturate(vec![m], cfg(2)) {
            let lm = lm_of(&cat, 0);
            prop_assert!(lm.len() >= 2);
            prop_assert_eq!(is_positively_closed_direct(&cat, &ModelView::member(0)).is_ok(), lm.len() == 2);
            prop_assert_eq!(lm.audit.ops_failed, 0);
            prop_assert!(agrees_with_brute(&cat, &lm));
        }
    }

    #[test]
    fn tp_is_natural(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sig = random_signature(&mut rng);
        let m = random_model(&mut rng, &sig, 2);
        if let Ok(cat) = SemCat::saturate(vec![m], cfg(2)) {
            let v = ModelView::member(0);
            for x in cat.contexts() {
                for y in cat.contexts() {
                    let (xs, ys) = (cat.sorts(x).to_vec(), cat.sorts(y).to_vec());
                    for sigma in crate::semcat::all_coordinate_maps(xs.len(), ys.len()) {
                        if !sigma.iter().zip(&ys).all(|(&j, s)| xs[j] == *s) {
                            continue;
                        }
                        for a in 0..cat.member_size(x, 0) {
                            let b = v.map_point(&cat, x, y, &sigma, &[a]);
                            let (ta, tb) = (tp(&cat, &v, x, &[a]), tp(&cat, &v, y, &b));
                            for w in 0..cat.sub_len(y) {
                                prop_assert_eq!(tb.contains(w), ta.contains(cat.pullback(x, y, &sigma, w).unwrap()));
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn completed_product_is_iso(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sig = random_signature(&mut rng);
        let m = random_model(&mut rng, &sig, 2);
        let n = random_model(&mut rng, &sig, 2);
        if let Ok(r) = lm_product_check_default(&m, &n, ProductMode::Completed, 2) {
            prop_assert!(r.is_iso() || r.bound_flag, "{:?}", r);
        }
    }

    #[test]
    fn eval_agrees_with_view(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sig = random_signature(&mut rng);
        let m = random_model(&mut rng, &sig, 3);
        let (ctx, f) = crate::corpus::random_formula(&mut rng, &sig, 2);
        if let Ok(cat) = SemCat::saturate(vec![m.clone()], cfg(2)) {
            let sorts: Vec<_> = ctx.iter().map(|(_, s)| *s).collect();
            let x = cat.ctx_id(&sorts).unwrap();
            let bits = eval_formula(&m, &f, &ctx);
            let d = cat.lookup(x, &bits);
            prop_assert!(d.is_some());
        }
    }
}

