//! Canonical printer. Output reparses to the same AST.

use super::{Formula, Sequent, Signature, Term, Theory};

fn term(sig: &Signature, t: &Term, out: &mut String) {
    match t {
        Term::Var(v) => out.push_str(v),
        Term::App(f, args) => {
            out.push_str(&sig.func(*f).name);
            if !args.is_empty() {
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    term(sig, a, out);
                }
                out.push(')');
            }
        }
    }
}

fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Or(..) => 1,
        Formula::And(..) => 2,
        // quantifiers swallow everything to their right, so they are
        // parenthesized whenever they appear as an operand
        Formula::Exists(..) => 0,
        _ => 3,
    }
}

fn formula(sig: &Signature, f: &Formula, out: &mut String) {
    let operand = |g: &Formula, min: u8, out: &mut String| {
        if prec(g) < min {
            out.push('(');
            formula(sig, g, out);
            out.push(')');
        } else {
            formula(sig, g, out);
        }
    };
    match f {
        Formula::Top => out.push_str("true"),
        Formula::Bot => out.push_str("false"),
        Formula::Eq(a, b) => {
            term(sig, a, out);
            out.push_str(" = ");
            term(sig, b, out);
        }
        Formula::Rel(r, ts) => {
            out.push_str(&sig.rel(*r).name);
            out.push('(');
            for (i, t) in ts.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                term(sig, t, out);
            }
            out.push(')');
        }
        Formula::And(a, b) => {
            operand(a, 2, out);
            out.push_str(" & ");
            operand(b, 3, out);
        }
        Formula::Or(a, b) => {
            operand(a, 1, out);
            out.push_str(" | ");
            operand(b, 2, out);
        }
        Formula::Exists(v, s, body) => {
            out.push_str(&format!("exists {v}:{} . ", sig.sort_name(*s)));
            formula(sig, body, out);
        }
    }
}

pub fn print_formula(sig: &Signature, f: &Formula) -> String {
    let mut s = String::new();
    formula(sig, f, &mut s);
    s
}

pub fn print_sequent(sig: &Signature, s: &Sequent) -> String {
    let ctx: Vec<String> = s.context.iter().map(|(v, so)| format!("{v}:{}", sig.sort_name(*so))).collect();
    format!("({}) {} => {}", ctx.join(", "), print_formula(sig, &s.lhs), print_formula(sig, &s.rhs))
}

pub fn print_theory(th: &Theory) -> String {
    let sig = &th.sig;
    let mut out = String::new();
    if !sig.sorts.is_empty() {
        out.push_str(&format!("sort {}\n", sig.sorts.join(" ")));
    }
    for r in &sig.rels {
        let a: Vec<&str> = r.arity.iter().map(|s| sig.sort_name(*s)).collect();
        out.push_str(&format!("rel {} : {}\n", r.name, a.join(" ")));
    }
    for f in &sig.funcs {
        let d: Vec<&str> = f.domain.iter().map(|s| sig.sort_name(*s)).collect();
        let sep = if d.is_empty() { "" } else { " " };
        out.push_str(&format!("func {} : {}{sep}-> {}\n", f.name, d.join(" "), sig.sort_name(f.codomain)));
    }
    for ax in &th.axioms {
        out.push_str(&format!("axiom {}\n", print_sequent(sig, ax)));
    }
    out
}
