//! Multi-sorted positive-existential syntax.
//!
//! Formulas are built only from `true`, `false`, equations, relation atoms,
//! `&`, `|` and `exists`; there is no constructor for anything else.

mod lexer;
mod parser;
mod printer;

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub use parser::{parse_formula, parse_model, parse_sort_subsets, parse_theory};
pub use printer::{print_formula, print_sequent, print_theory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SortId(pub usize);
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct RelId(pub usize);
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FuncId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelSym {
    pub name: String,
    pub arity: Vec<SortId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuncSym {
    pub name: String,
    pub domain: Vec<SortId>,
    pub codomain: SortId,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    pub sorts: Vec<String>,
    pub rels: Vec<RelSym>,
    pub funcs: Vec<FuncSym>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symbol {
    Sort(SortId),
    Rel(RelId),
    Func(FuncId),
}

impl Signature {
    pub fn lookup(&self, name: &str) -> Option<Symbol> {
        if let Some(i) = self.sorts.iter().position(|s| s == name) {
            return Some(Symbol::Sort(SortId(i)));
        }
        if let Some(i) = self.rels.iter().position(|r| r.name == name) {
            return Some(Symbol::Rel(RelId(i)));
        }
        self.funcs.iter().position(|f| f.name == name).map(|i| Symbol::Func(FuncId(i)))
    }

    pub fn sort(&self, name: &str) -> Option<SortId> {
        match self.lookup(name) {
            Some(Symbol::Sort(s)) => Some(s),
            _ => None,
        }
    }

    pub fn sort_name(&self, s: SortId) -> &str {
        &self.sorts[s.0]
    }

    pub fn rel(&self, r: RelId) -> &RelSym {
        &self.rels[r.0]
    }

    pub fn func(&self, f: FuncId) -> &FuncSym {
        &self.funcs[f.0]
    }

    pub fn add_sort(&mut self, name: &str) -> SortId {
        self.sorts.push(name.to_string());
        SortId(self.sorts.len() - 1)
    }

    pub fn add_rel(&mut self, name: &str, arity: Vec<SortId>) -> RelId {
        self.rels.push(RelSym { name: name.to_string(), arity });
        RelId(self.rels.len() - 1)
    }

    pub fn add_func(&mut self, name: &str, domain: Vec<SortId>, codomain: SortId) -> FuncId {
        self.funcs.push(FuncSym { name: name.to_string(), domain, codomain });
        FuncId(self.funcs.len() - 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    App(FuncId, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn sort_in(&self, sig: &Signature, ctx: &[(String, SortId)]) -> Option<SortId> {
        match self {
            Term::Var(v) => ctx.iter().rev().find(|(n, _)| n == v).map(|&(_, s)| s),
            Term::App(f, _) => Some(sig.func(*f).codomain),
        }
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    fn rename(&self, map: &HashMap<String, String>) -> Term {
        match self {
            Term::Var(v) => Term::Var(map.get(v).cloned().unwrap_or_else(|| v.clone())),
            Term::App(f, args) => Term::App(*f, args.iter().map(|a| a.rename(map)).collect()),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Top,
    Bot,
    Eq(Term, Term),
    Rel(RelId, Vec<Term>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Exists(String, SortId, Box<Formula>),
}

impl Formula {
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn exists(v: &str, s: SortId, body: Formula) -> Formula {
        Formula::Exists(v.to_string(), s, Box::new(body))
    }

    /// Free variables in order of first occurrence.
    pub fn free_vars_unsorted(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        let push_term = |t: &Term, out: &mut Vec<String>| {
            let mut vs = Vec::new();
            t.collect_vars(&mut vs);
            for v in vs {
                if !bound.contains(&v) && !out.contains(&v) {
                    out.push(v);
                }
            }
        };
        match self {
            Formula::Top | Formula::Bot => {}
            Formula::Eq(a, b) => {
                push_term(a, out);
                push_term(b, out);
            }
            Formula::Rel(_, ts) => ts.iter().for_each(|t| push_term(t, out)),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(v, _, body) => {
                bound.push(v.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Renames free variables simultaneously. Bound variables that would
    /// capture a new name are renamed first.
    pub fn rename_free(&self, map: &HashMap<String, String>) -> Formula {
        match self {
            Formula::Top => Formula::Top,
            Formula::Bot => Formula::Bot,
            Formula::Eq(a, b) => Formula::Eq(a.rename(map), b.rename(map)),
            Formula::Rel(r, ts) => Formula::Rel(*r, ts.iter().map(|t| t.rename(map)).collect()),
            Formula::And(a, b) => Formula::and(a.rename_free(map), b.rename_free(map)),
            Formula::Or(a, b) => Formula::or(a.rename_free(map), b.rename_free(map)),
            Formula::Exists(v, s, body) => {
                let mut inner = map.clone();
                inner.remove(v);
                let targets: Vec<&String> = inner.values().collect();
                if targets.contains(&v) {
                    let used: Vec<String> = body
                        .all_vars()
                        .into_iter()
                        .chain(inner.values().cloned())
                        .chain(inner.keys().cloned())
                        .collect();
                    let fresh = fresh_name(v, &used);
                    inner.insert(v.clone(), fresh.clone());
                    Formula::Exists(fresh, *s, Box::new(body.rename_free(&inner)))
                } else {
                    Formula::Exists(v.clone(), *s, Box::new(body.rename_free(&inner)))
                }
            }
        }
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.walk(&mut |f| match f {
            Formula::Eq(a, b) => {
                a.collect_vars(&mut out);
                b.collect_vars(&mut out);
            }
            Formula::Rel(_, ts) => ts.iter().for_each(|t| t.collect_vars(&mut out)),
            Formula::Exists(v, _, _) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            _ => {}
        });
        out
    }

    pub fn walk(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        match self {
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Formula::Exists(_, _, body) => body.walk(f),
            _ => {}
        }
    }

    /// Nesting depth of connectives and quantifiers (atoms have depth 0).
    pub fn depth(&self) -> usize {
        match self {
            Formula::And(a, b) | Formula::Or(a, b) => 1 + a.depth().max(b.depth()),
            Formula::Exists(_, _, body) => 1 + body.depth(),
            _ => 0,
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }
}

/// A name based on `base` that avoids `used`.
pub fn fresh_name(base: &str, used: &[String]) -> String {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit() || c == '_');
    let stem = if stem.is_empty() { "w" } else { stem };
    (0..)
        .map(|i| format!("{stem}_{i}"))
        .find(|c| !used.iter().any(|u| u == c))
        .unwrap()
}

/// Free variables with their sorts, in order of first occurrence.
pub fn free_vars(f: &Formula, ctx: &[(String, SortId)]) -> Vec<(String, SortId)> {
    f.free_vars_unsorted()
        .into_iter()
        .map(|v| {
            let s = ctx.iter().find(|(n, _)| *n == v).map(|&(_, s)| s);
            (v, s.expect("formula is well-sorted in its context"))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sequent {
    pub context: Vec<(String, SortId)>,
    pub lhs: Formula,
    pub rhs: Formula,
    pub pos: Pos,
}

#[derive(Debug, Clone)]
pub struct Theory {
    pub sig: std::sync::Arc<Signature>,
    pub axioms: Vec<Sequent>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ErrorKind {
    Lexical,
    Grammar,
    SortMismatch,
    UnknownSymbol,
    Arity,
    VariableCapture,
    Duplicate,
    Model,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {kind:?}: {message}")]
pub struct ParseError {
    pub kind: ErrorKind,
    pub pos: Pos,
    pub message: String,
}
