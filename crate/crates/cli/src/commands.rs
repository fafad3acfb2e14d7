use std::path::{Path, PathBuf};

use fixedbitset::FixedBitSet;
use serde_json::json;

use posmod::dlat::io::parse_lattice;
use posmod::dlat::{krull_dim_algebraic, krull_dim_chains, quotient_by_prime, spec, FinDistLattice, PrimeFilter};
use posmod::invariant::{is_positively_closed_direct, posetal_import, LmConfig, LmLattice, ModelView, PosetalError};
use posmod::model::{check_sequent, FinModel};
use posmod::redprod::{diagonal_map, los_containment, reduced_product, IndexFilter, RedprodError, FINITE_INDEX_NOTE};
use posmod::semcat::{CtxId, SatError, SemCat, SemCatConfig};
use posmod::subfunctor::{
    extend_by_pullback, poscl_subfunctor_check, tv_check, tv_check_with, verify_subfunctor, SortSubsetFamily, TvSense,
};
use posmod::syntax::{parse_model, parse_sort_subsets, parse_theory, print_formula, print_sequent, Theory};
use posmod::types::{semantic_completeness_analysis, type_space, type_table};

use crate::report::{CliError, Report};
use crate::{Ctx, Fault};

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_theory(path: &Path) -> Result<Theory, CliError> {
    parse_theory(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_models(th: &Theory, paths: &[PathBuf]) -> Result<Vec<FinModel>, CliError> {
    paths
        .iter()
        .map(|p| parse_model(&read(p)?, &th.sig).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))))
        .collect()
}

fn load_lattice(path: &Path) -> Result<FinDistLattice, CliError> {
    parse_lattice(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn sat_config(ctx: &Ctx) -> SemCatConfig {
    SemCatConfig { n_max: ctx.config.nmax, max_lattice: ctx.config.max_lattice, ..SemCatConfig::default() }
}

fn saturate(ctx: &Ctx, family: Vec<FinModel>) -> Result<SemCat, CliError> {
    SemCat::saturate(family, sat_config(ctx)).map_err(|e| match e {
        SatError::Malformed { .. } | SatError::SignatureMismatch(_) | SatError::EmptyFamily => CliError::Input(e.to_string()),
        other => CliError::Other(other.to_string()),
    })
}

fn tuple_names(m: &FinModel, sorts: &[posmod::syntax::SortId], idx: usize) -> String {
    let t = m.decode(sorts, idx);
    let parts: Vec<&str> = t.iter().zip(sorts).map(|(&a, s)| m.names[s.0][a].as_str()).collect();
    format!("({})", parts.join(","))
}

fn formula(cat: &SemCat, x: CtxId, d: usize) -> String {
    print_formula(&cat.sig, &cat.witness(x, d))
}

/// The least member of a prime filter of `Sub(x)`.
fn filter_generator(cat: &SemCat, x: CtxId, members: &[usize]) -> usize {
    members.iter().fold(cat.top(x), |acc, &d| cat.meet(x, acc, d))
}

fn lm_bound_note(ctx: &Ctx, lm: &LmLattice) -> String {
    if lm.is_complete() {
        format!("nmax={}, LM complete", ctx.config.nmax)
    } else {
        let a = &lm.audit;
        format!(
            "nmax={}, LM bound-incomplete: {} unlifted pairs, {} failed lifts, {} cycle merges{}",
            ctx.config.nmax,
            a.unlifted_pairs,
            a.ops_failed,
            a.cycle_merges,
            if lm.lattice.is_none() { ", order is not a lattice" } else { "" }
        )
    }
}

pub fn analyze(ctx: &Ctx, report: &mut Report, theory: &Path, models: &[PathBuf]) -> Result<(), CliError> {
    let th = load_theory(theory)?;
    let family = load_models(&th, models)?;
    let mut violations = Vec::new();
    for (i, m) in family.iter().enumerate() {
        for (k, ax) in th.axioms.iter().enumerate() {
            let c = check_sequent(m, ax);
            if !c.holds {
                let w = c.counterexample.unwrap_or_default();
                let names: Vec<String> =
                    w.iter().zip(&ax.context).map(|(&a, (v, s))| format!("{v}={}", m.names[s.0][a])).collect();
                violations.push(format!("model {i} fails axiom {k} `{}` at {}", print_sequent(&th.sig, ax), names.join(" ")));
            }
        }
    }
    if !violations.is_empty() {
        return Err(CliError::Axiom(violations.join("\n")));
    }
    report.section(
        "axioms",
        vec![format!("{} axioms hold in all {} models", th.axioms.len(), family.len())],
        json!({"axioms": th.axioms.len(), "models": family.len()}),
    );

    let cat = saturate(ctx, family)?;
    let sizes = cat.size_summary();
    report.section("lattices", sizes.iter().map(|(c, n)| format!("Sub([{c}]) = {n}")).collect(), &sizes);

    let mut type_lines = Vec::new();
    let mut type_data = Vec::new();
    for x in cat.contexts() {
        match type_space(&cat, x) {
            Ok(sp) => {
                type_lines.push(format!("[{}]: {} types", cat.context_name(x), sp.points.len()));
                type_data.push(json!({"context": cat.context_name(x), "types": sp.points.len()}));
            }
            Err(e) => type_lines.push(format!("[{}]: {e}", cat.context_name(x))),
        }
    }
    report.section("type spaces", type_lines, type_data);

    let mut table_lines = Vec::new();
    let mut table_data = Vec::new();
    for x in cat.contexts().filter(|&x| cat.sorts(x).len() == 1) {
        let Ok(rows) = type_table(&cat, x) else { continue };
        for row in rows {
            let g = filter_generator(&cat, x, &row.filter);
            let cells: Vec<String> = row
                .realizers
                .iter()
                .enumerate()
                .map(|(i, r)| match r {
                    Some(t) => format!("M{i} {}", tuple_names(&cat.family[i], cat.sorts(x), *t)),
                    None => format!("M{i} omitted"),
                })
                .collect();
            table_lines.push(format!("[{}] type of `{}`: {}", cat.context_name(x), formula(&cat, x, g), cells.join(", ")));
            table_data.push(json!({"context": cat.context_name(x), "generator": formula(&cat, x, g), "realizers": row.realizers}));
        }
    }
    report.section("omitted types", table_lines, table_data);

    for i in 0..cat.family.len() {
        let lm = LmLattice::compute(&cat, &ModelView::member(i), LmConfig { seed: ctx.config.seed, ..LmConfig::for_cat(&cat) })
            .map_err(|e| CliError::Other(e.to_string()))?;
        let mut direct = is_positively_closed_direct(&cat, &ModelView::member(i));
        if ctx.fault == Some(Fault::LmDirect) {
            direct = if direct.is_ok() { Err(dummy_counterexample(&cat)) } else { Ok(()) };
        }
        let by_lm = lm.len() == 2;
        let mut lines = vec![
            format!("|LM| = {}", lm.len()),
            format!("order is a distributive lattice: {}", lm.lattice.is_some()),
            format!("generators {}, merges {}, witnessed merges {:.3}", lm.audit.generators, lm.audit.merges, lm.audit.witness_fraction()),
        ];
        match &direct {
            Ok(()) => lines.push("direct test: positively closed".into()),
            Err(c) => lines.push(format!(
                "direct test: {} fails `{}` with nothing disjoint from it",
                tuple_names(&cat.family[i], &c.context, c.point[0]),
                formula(&cat, c.ctx, c.u)
            )),
        }
        report.section(format!("model {i}"), lines, json!({"lm": lm.len(), "lattice": lm.lattice.is_some(), "audit": lm.audit}));
        if direct.is_ok() != by_lm {
            return Err(CliError::Oracle(format!(
                "model {i}: direct test says {}, |LM| = {}",
                if direct.is_ok() { "closed" } else { "not closed" },
                lm.len()
            )));
        }
        report.verdict(format!("model {i} positively closed"), by_lm, Some(lm_bound_note(ctx, &lm)));
        if !lm.is_complete() {
            report.audit.push(format!("model {i}: {}", lm_bound_note(ctx, &lm)));
        }
    }

    let c = semantic_completeness_analysis(&cat);
    let pairs: Vec<String> = c.pairwise.iter().map(|(i, j, e)| format!("M{i} ~ M{j}: {e}")).collect();
    report.section("semantic completeness", pairs, &c);
    if !c.implication_holds {
        return Err(CliError::Oracle("weakly Boolean and two-valued, but some members are not equivalent".into()));
    }
    let bound = Some(format!("nmax={}", ctx.config.nmax));
    report
        .verdict("weakly Boolean", c.weakly_boolean, bound.clone())
        .verdict("two-valued", c.two_valued, bound.clone())
        .verdict("members pairwise equivalent", c.all_equivalent, bound);
    Ok(())
}

fn dummy_counterexample(cat: &SemCat) -> posmod::invariant::PcCounterexample {
    let x = cat.ctx_id(&[]).unwrap();
    posmod::invariant::PcCounterexample { context: Vec::new(), ctx: x, u: cat.bot(x), point: vec![0] }
}

fn parse_members(l: &FinDistLattice, text: &str) -> Result<PrimeFilter, CliError> {
    let mut members = FixedBitSet::with_capacity(l.len());
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let a: usize = part.parse().map_err(|_| CliError::Input(format!("bad element `{part}`")))?;
        if a >= l.len() {
            return Err(CliError::Input(format!("element {a} is outside the lattice")));
        }
        members.insert(a);
    }
    let p = PrimeFilter { members };
    p.validate(l).map_err(|e| CliError::Input(e.to_string()))?;
    Ok(p)
}

pub fn posetal(ctx: &Ctx, report: &mut Report, lattice: &Path, filter: Option<&str>) -> Result<(), CliError> {
    let k = load_lattice(lattice)?;
    let filters = match filter {
        Some(t) => vec![parse_members(&k, t)?],
        None => spec(&k).map_err(|e| CliError::Input(e.to_string()))?.points,
    };
    for p in filters {
        let r = posetal_import(&k, &p, sat_config(ctx)).map_err(|e| match e {
            PosetalError::ImportCap { .. } => CliError::Other(e.to_string()),
            PosetalError::Encoding(_) => CliError::Oracle(e.to_string()),
            other => CliError::Other(other.to_string()),
        })?;
        let name = format!("p = {:?}", p.members_vec());
        report.section(
            name.clone(),
            vec![
                format!("|K| = {}, |LM| = {}, |K/p| = {}", r.lattice_size, r.lm_size, r.quotient_size),
                format!("canonical map K -> LM: {:?}", r.canonical),
                format!("kernel matches K/p: {}, surjective: {}", r.kernel_matches, r.surjective),
                format!("searched isomorphism LM -> K/p: {:?}", r.searched_iso),
            ],
            &r,
        );
        if r.iso != r.searched_iso.is_some() {
            return Err(CliError::Oracle(format!("{name}: canonical map and isomorphism search disagree")));
        }
        report.verdict(format!("LM = K/p at {name}"), r.iso, None);
    }
    Ok(())
}

pub fn tv(ctx: &Ctx, report: &mut Report, theory: &Path, model: &Path, subsets: &Path) -> Result<(), CliError> {
    let th = load_theory(theory)?;
    let m = load_models(&th, &[model.to_path_buf()])?.remove(0);
    let sets = parse_sort_subsets(&read(subsets)?, &m).map_err(|e| CliError::Input(format!("{}: {e}", subsets.display())))?;
    let cat = saturate(ctx, vec![m])?;
    let fam = SortSubsetFamily { member: 0, sets };
    let shown: Vec<String> = fam
        .sets
        .iter()
        .enumerate()
        .map(|(s, b)| {
            let names: Vec<&str> = b.ones().map(|a| cat.family[0].names[s][a].as_str()).collect();
            format!("{} = {{{}}}", cat.sig.sorts[s], names.join(", "))
        })
        .collect();
    report.section("family", shown, fam.sets.iter().map(|b| b.ones().collect::<Vec<_>>()).collect::<Vec<_>>());

    let strong = tv_check(&cat, &fam);
    let plain = tv_check_with(&cat, &fam, TvSense::Plain).is_ok();
    let mut rep = verify_subfunctor(&cat, &extend_by_pullback(&cat, &fam));
    if ctx.fault == Some(Fault::TvVerify) {
        rep.coherence = !rep.coherence;
    }
    let mut lines = vec![format!("test with both sides nonempty: {}", if plain { "passes" } else { "fails" })];
    match &strong {
        Ok(()) => lines.push("test with sentences: passes".into()),
        Err(v) => {
            let x = cat.ctx_id(&v.context).unwrap();
            let kept = &v.context[v.split..];
            lines.push(format!(
                "test with sentences: `{}` over [{}] projected past {} coordinates reaches {} only from outside N",
                formula(&cat, x, v.defset),
                cat.context_name(x),
                v.split,
                tuple_names(&cat.family[0], kept, v.tuple)
            ));
        }
    }
    lines.push(format!(
        "extension: lattice {}, coherence {}, elementary {}, products {}",
        rep.lattice, rep.coherence, rep.elementary, rep.products
    ));
    if let Some(f) = &rep.first_failure {
        lines.push(format!("first failure: {f}"));
    }
    let pc = poscl_subfunctor_check(&cat, &fam);
    lines.push(format!("closedness condition: {}", if pc.holds() { "holds" } else { "fails" }));
    report.section("Tarski-Vaught", lines, json!({"strong": strong.is_ok(), "plain": plain, "extension": rep, "poscl": pc.holds()}));
    if strong.is_ok() != rep.passes() {
        return Err(CliError::Oracle(format!(
            "test says {}, extension check says {}",
            strong.is_ok(),
            rep.passes()
        )));
    }
    if pc.holds() && !matches!(pc.extension_closed, Some(Ok(()))) {
        return Err(CliError::Oracle("closedness condition holds but the extension is not positively closed".into()));
    }
    let bound = Some(format!("nmax={}", ctx.config.nmax));
    report
        .verdict("extends to an elementary subfunctor", strong.is_ok(), bound.clone())
        .verdict("extension positively closed", pc.holds(), bound);
    Ok(())
}

fn parse_gen(size: usize, text: &str) -> Result<u32, CliError> {
    let mut mask = 0u32;
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let i: usize = part.parse().map_err(|_| CliError::Input(format!("bad index `{part}`")))?;
        if i >= size {
            return Err(CliError::Input(format!("index {i} is outside 0..{size}")));
        }
        mask |= 1 << i;
    }
    Ok(mask)
}

fn mask_list(m: u32) -> Vec<usize> {
    (0..32).filter(|&i| m >> i & 1 == 1).collect()
}

pub fn redprod(ctx: &Ctx, report: &mut Report, theory: &Path, models: &[PathBuf], gens: &[String]) -> Result<(), CliError> {
    let th = load_theory(theory)?;
    let family = load_models(&th, models)?;
    let size = family.len();
    let masks = gens.iter().map(|g| parse_gen(size, g)).collect::<Result<Vec<_>, _>>()?;
    let filter = IndexFilter::generated(size, &masks).map_err(|e| CliError::Input(e.to_string()))?;
    report.notes.push(FINITE_INDEX_NOTE.to_string());
    report.section(
        "filter",
        vec![
            format!("members: {:?}", filter.members().iter().map(|&m| mask_list(m)).collect::<Vec<_>>()),
            format!("core: {:?}", mask_list(filter.core())),
            format!("ultra: {}", filter.is_ultra()),
        ],
        &filter,
    );
    let rp = reduced_product(&family, &filter).map_err(|e| match e {
        RedprodError::Collapse(_) | RedprodError::IllDefined(_) => CliError::Oracle(e.to_string()),
        other => CliError::Other(other.to_string()),
    })?;
    let mut lines = Vec::new();
    for (s, name) in th.sig.sorts.iter().enumerate() {
        lines.push(format!("{name}: {} classes, representatives {{{}}}", rp.view.card(posmod::syntax::SortId(s)), rp.view.names[s].join(", ")));
    }
    lines.push("restriction to the core is an isomorphism onto the product over the core".into());
    report.section("reduced product", lines, json!({"classes": rp.view.names}));
    report.section("model", rp.view.to_text().lines().map(str::to_string).collect(), json!({"text": rp.view.to_text()}));

    if filter.is_ultra() {
        let cat = saturate(ctx, family.clone())?;
        let (mut checks, mut holding) = (0, 0);
        for x in cat.contexts().filter(|&x| cat.sorts(x).len() <= 1) {
            for a in 0..cat.sub_len(x) {
                for b in 0..cat.sub_len(x) {
                    let sa: Vec<FixedBitSet> = (0..size).map(|i| cat.component(x, a, i)).collect();
                    let sb: Vec<FixedBitSet> = (0..size).map(|i| cat.component(x, b, i)).collect();
                    let v = los_containment(&rp, cat.sorts(x), &sa, &sb).map_err(|e| match e {
                        RedprodError::LosDisagreement { .. } => CliError::Oracle(e.to_string()),
                        other => CliError::Other(other.to_string()),
                    })?;
                    checks += 1;
                    holding += v.holds as usize;
                }
            }
        }
        report.section(
            "containment",
            vec![format!("{checks} containments between stored sets agree with the index sets ({holding} hold)")],
            json!({"checks": checks, "hold": holding}),
        );
        report.verdict("containment agrees with index sets", true, Some(format!("nmax={}", ctx.config.nmax)));
        if family.iter().all(|m| *m == family[0]) {
            let d = diagonal_map(&family[0], &filter, sat_config(ctx)).map_err(|e| match e {
                RedprodError::DiagonalNotElementary(_) | RedprodError::DiagonalNotHom | RedprodError::DiagonalNotInjective(_) => {
                    CliError::Oracle(e.to_string())
                }
                other => CliError::Other(other.to_string()),
            })?;
            report.section("diagonal", vec![format!("maps: {:?}", d.diagonal.maps)], &d.diagonal);
            report.verdict("diagonal elementary", true, Some(format!("nmax={}", ctx.config.nmax)));
        }
    }
    Ok(())
}

pub fn dlat_spec(report: &mut Report, lattice: &Path) -> Result<(), CliError> {
    let l = load_lattice(lattice)?;
    let sp = spec(&l).map_err(|e| CliError::Input(e.to_string()))?;
    let mut lines: Vec<String> = sp
        .points
        .iter()
        .zip(&sp.generators)
        .enumerate()
        .map(|(i, (p, g))| format!("point {i}: up({g}) = {:?}", p.members_vec()))
        .collect();
    for q in 0..sp.points.len() {
        for p in 0..sp.points.len() {
            if q != p && sp.specialization[q][p] {
                lines.push(format!("point {q} is contained in point {p}"));
            }
        }
    }
    report.section(
        "spectrum",
        lines,
        json!({"points": sp.points.iter().map(|p| p.members_vec()).collect::<Vec<_>>(), "generators": sp.generators}),
    );
    report.verdict(format!("{} points", sp.points.len()), true, None);
    Ok(())
}

pub fn dlat_krull(ctx: &Ctx, report: &mut Report, lattice: &Path) -> Result<(), CliError> {
    let l = load_lattice(lattice)?;
    let mut chains = krull_dim_chains(&l);
    if ctx.fault == Some(Fault::Krull) {
        if let posmod::dlat::KrullOutcome::Dim(d) = chains {
            chains = posmod::dlat::KrullOutcome::Dim(d + 1);
        }
    }
    let alg = krull_dim_algebraic(&l, l.len()).map_err(|e| CliError::Input(e.to_string()))?;
    let mut lines = vec![format!("longest chain of prime filters: {chains:?}"), format!("algebraic criterion: {:?}", alg.outcome)];
    for s in &alg.steps {
        if let Some(c) = &s.counterexample {
            lines.push(format!("n = {}: fails at {c:?}", s.n));
        }
    }
    report.section("Krull dimension", lines, json!({"chains": chains, "algebraic": alg}));
    if chains != alg.outcome {
        return Err(CliError::Oracle(format!("chains give {chains:?}, the algebraic criterion {:?}", alg.outcome)));
    }
    report.verdict("both computations agree", true, None);
    Ok(())
}

pub fn dlat_quotient(report: &mut Report, lattice: &Path, filter: &str) -> Result<(), CliError> {
    let l = load_lattice(lattice)?;
    let p = parse_members(&l, filter)?;
    let q = quotient_by_prime(&l, &p).map_err(|e| CliError::Input(e.to_string()))?;
    report.section(
        "quotient",
        vec![
            format!("|L| = {}, |L/p| = {}", l.len(), q.lattice.len()),
            format!("map: {:?}", q.map),
            format!("covers: {:?}", q.lattice.covers()),
        ],
        json!({"size": q.lattice.len(), "map": q.map, "covers": q.lattice.covers()}),
    );
    Ok(())
}
