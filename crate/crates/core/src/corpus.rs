//! Random and hand-picked inputs shared by tests, the CLI and the demo.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::FinModel;
use crate::syntax::{parse_model, parse_theory, Formula, FuncId, RelId, Signature, SortId, Term};

/// One or two sorts, up to two relations of arity at most 2 and at most
/// one unary function.
pub fn random_signature(rng: &mut impl Rng) -> Arc<Signature> {
    let mut sig = Signature::default();
    let k = rng.gen_range(1..=2);
    for s in 0..k {
        sig.add_sort(&["A", "B"][s]);
    }
    for r in 0..rng.gen_range(1..=2) {
        let arity = (0..rng.gen_range(1..=2)).map(|_| SortId(rng.gen_range(0..k))).collect();
        sig.add_rel(&["R", "S"][r], arity);
    }
    if rng.gen_bool(0.4) {
        let d = SortId(rng.gen_range(0..k));
        let c = SortId(rng.gen_range(0..k));
        sig.add_func("f", vec![d], c);
    }
    Arc::new(sig)
}

/// A model with carriers of size `1..=max_card` and random interpretations.
pub fn random_model(rng: &mut impl Rng, sig: &Arc<Signature>, max_card: usize) -> FinModel {
    let sizes = (0..sig.sorts.len()).map(|_| rng.gen_range(1..=max_card)).collect();
    let mut m = FinModel::empty(sig.clone(), sizes);
    randomize(rng, &mut m);
    m
}

/// Like [`random_model`] with fixed carrier sizes.
pub fn random_model_sized(rng: &mut impl Rng, sig: &Arc<Signature>, sizes: Vec<usize>) -> FinModel {
    let mut m = FinModel::empty(sig.clone(), sizes);
    randomize(rng, &mut m);
    m
}

fn randomize(rng: &mut impl Rng, m: &mut FinModel) {
    let density = rng.gen_range(0.2..0.7);
    for r in 0..m.rels.len() {
        for i in 0..m.rels[r].len() {
            m.rels[r].set(i, rng.gen_bool(density));
        }
    }
    for f in 0..m.funcs.len() {
        let k = m.card(m.sig.funcs[f].codomain);
        for v in m.funcs[f].iter_mut() {
            *v = rng.gen_range(0..k) as u32;
        }
    }
}

fn random_term(rng: &mut impl Rng, sig: &Signature, vars: &[(String, SortId)], s: SortId) -> Option<Term> {
    let here: Vec<&String> = vars.iter().filter(|(_, t)| *t == s).map(|(v, _)| v).collect();
    let fs: Vec<usize> = (0..sig.funcs.len()).filter(|&f| sig.funcs[f].codomain == s).collect();
    if !fs.is_empty() && rng.gen_bool(0.3) {
        let f = *fs.choose(rng).unwrap();
        let args: Option<Vec<Term>> = sig.funcs[f].domain.iter().map(|&d| random_term(rng, sig, vars, d)).collect();
        if let Some(args) = args {
            return Some(Term::App(FuncId(f), args));
        }
    }
    here.choose(rng).map(|v| Term::Var((*v).clone()))
}

fn random_body(rng: &mut impl Rng, sig: &Signature, vars: &mut Vec<(String, SortId)>, depth: usize, fresh: &mut usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        for _ in 0..4 {
            let pick = rng.gen_range(0..4);
            if pick == 0 {
                return if rng.gen_bool(0.5) { Formula::Top } else { Formula::Bot };
            }
            if pick == 1 {
                let s = SortId(rng.gen_range(0..sig.sorts.len()));
                if let (Some(a), Some(b)) = (random_term(rng, sig, vars, s), random_term(rng, sig, vars, s)) {
                    return Formula::Eq(a, b);
                }
                continue;
            }
            let r = rng.gen_range(0..sig.rels.len());
            let args: Option<Vec<Term>> = sig.rels[r].arity.iter().map(|&s| random_term(rng, sig, vars, s)).collect();
            if let Some(args) = args {
                return Formula::Rel(RelId(r), args);
            }
        }
        return Formula::Top;
    }
    match rng.gen_range(0..3) {
        0 => Formula::and(random_body(rng, sig, vars, depth - 1, fresh), random_body(rng, sig, vars, depth - 1, fresh)),
        1 => Formula::or(random_body(rng, sig, vars, depth - 1, fresh), random_body(rng, sig, vars, depth - 1, fresh)),
        _ => {
            let s = SortId(rng.gen_range(0..sig.sorts.len()));
            let v = format!("y{fresh}");
            *fresh += 1;
            vars.push((v.clone(), s));
            let body = random_body(rng, sig, vars, depth - 1, fresh);
            vars.pop();
            Formula::Exists(v, s, Box::new(body))
        }
    }
}

/// A random context of at most `max_vars` variables and a formula over it.
pub fn random_formula(rng: &mut impl Rng, sig: &Signature, max_vars: usize) -> (Vec<(String, SortId)>, Formula) {
    let n = rng.gen_range(0..=max_vars);
    let mut ctx: Vec<(String, SortId)> =
        (0..n).map(|i| (format!("x{i}"), SortId(rng.gen_range(0..sig.sorts.len())))).collect();
    let mut fresh = 0;
    let f = random_body(rng, sig, &mut ctx, 3, &mut fresh);
    (ctx, f)
}

/// Named example families used by the CLI and the demo.
pub fn example(name: &str) -> Option<(&'static str, Vec<&'static str>)> {
    EXAMPLES.iter().find(|(n, _, _)| *n == name).map(|&(_, th, ms)| (th, ms.to_vec()))
}

pub fn example_names() -> Vec<&'static str> {
    EXAMPLES.iter().map(|(n, _, _)| *n).collect()
}

pub fn load_example(name: &str) -> Option<Vec<FinModel>> {
    let (th, ms) = example(name)?;
    let th = parse_theory(th).ok()?;
    ms.iter().map(|m| parse_model(m, &th.sig).ok()).collect()
}

type Example = (&'static str, &'static str, &'static [&'static str]);

const EXAMPLES: &[Example] = &[
    ("unary", "sort A rel R : A", &["A = {0,1} R = {0}"]),
    ("point", "sort A rel R : A", &["A = {0} R = {}"]),
    ("two-points", "sort A rel R : A", &["A = {0} R = {}", "A = {0} R = {0}"]),
    ("cycle", "sort A rel E : A A", &["A = {0,1,2} E = {(0,1),(1,2),(2,0)}"]),
    ("chain", "sort A rel L : A A", &["A = {0,1,2} L = {(0,0),(0,1),(0,2),(1,1),(1,2),(2,2)}"]),
    (
        "graphs",
        "sort A rel E : A A",
        &["A = {0,1} E = {(0,1)}", "A = {0,1,2} E = {(0,1),(1,2)}"],
    ),
    ("successor", "sort A func s : A -> A", &["A = {0,1,2} s = {0 -> 1, 1 -> 2, 2 -> 0}"]),
];
