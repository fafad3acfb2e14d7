//! Recursive-descent parser for theories, formulas, models and sort subsets.
//!
//! Grammar (whitespace-insensitive, `#` starts a comment):
//!
//! ```text
//! theory  := item*
//! item    := "sort" NAME+ | "rel" NAME ":" SORT+ | "func" NAME ":" SORT* "->" SORT
//!          | "axiom" "(" [VAR ":" SORT ("," VAR ":" SORT)*] ")" formula "=>" formula
//! formula := conj ("|" conj)*
//! conj    := unit ("&" unit)*
//! unit    := "exists" VAR ":" SORT "." formula | "true" | "false"
//!          | "(" formula ")" | REL "(" terms ")" | term "=" term
//! term    := VAR | FUNC ["(" terms ")"]
//! ```

use std::sync::Arc;

use fixedbitset::FixedBitSet;

use super::lexer::{lex, Tok};
use super::{ErrorKind, Formula, ParseError, Pos, Sequent, Signature, SortId, Symbol, Term, Theory};
use crate::model::FinModel;

const KEYWORDS: &[&str] = &["sort", "rel", "func", "axiom", "exists", "true", "false"];

struct Parser<'a> {
    toks: Vec<(Tok, Pos)>,
    i: usize,
    sig: &'a Signature,
}

fn err<T>(kind: ErrorKind, pos: Pos, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { kind, pos, message: message.into() })
}

impl<'a> Parser<'a> {
    fn new(text: &str, sig: &'a Signature) -> Result<Self, ParseError> {
        Ok(Parser { toks: lex(text)?, i: 0, sig })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<Pos, ParseError> {
        let (t, pos) = self.bump();
        if t == want {
            Ok(pos)
        } else {
            err(ErrorKind::Grammar, pos, format!("expected {}, found {}", want.describe(), t.describe()))
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), ParseError> {
        match self.bump() {
            (Tok::Ident(s), pos) if !KEYWORDS.contains(&s.as_str()) => Ok((s, pos)),
            (t, pos) => err(ErrorKind::Grammar, pos, format!("expected a name, found {}", t.describe())),
        }
    }

    fn sort(&mut self) -> Result<SortId, ParseError> {
        let (name, pos) = self.ident()?;
        match self.sig.lookup(&name) {
            Some(Symbol::Sort(s)) => Ok(s),
            _ => err(ErrorKind::UnknownSymbol, pos, format!("unknown sort `{name}`")),
        }
    }

    fn formula(&mut self, ctx: &mut Vec<(String, SortId)>) -> Result<Formula, ParseError> {
        let mut f = self.conj(ctx)?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let g = self.conj(ctx)?;
            f = Formula::or(f, g);
        }
        Ok(f)
    }

    fn conj(&mut self, ctx: &mut Vec<(String, SortId)>) -> Result<Formula, ParseError> {
        let mut f = self.unit(ctx)?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let g = self.unit(ctx)?;
            f = Formula::and(f, g);
        }
        Ok(f)
    }

    fn unit(&mut self, ctx: &mut Vec<(String, SortId)>) -> Result<Formula, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(k) if k == "true" => {
                self.bump();
                Ok(Formula::Top)
            }
            Tok::Ident(k) if k == "false" => {
                self.bump();
                Ok(Formula::Bot)
            }
            Tok::Ident(k) if k == "exists" => {
                self.bump();
                let (v, vpos) = self.ident()?;
                if ctx.iter().any(|(n, _)| *n == v) {
                    return err(ErrorKind::VariableCapture, vpos, format!("`{v}` is already bound"));
                }
                self.expect(Tok::Colon)?;
                let s = self.sort()?;
                self.expect(Tok::Dot)?;
                ctx.push((v.clone(), s));
                let body = self.formula(ctx);
                ctx.pop();
                Ok(Formula::Exists(v, s, Box::new(body?)))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula(ctx)?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(name) if matches!(self.sig.lookup(&name), Some(Symbol::Rel(_))) => {
                let Some(Symbol::Rel(r)) = self.sig.lookup(&name) else { unreachable!() };
                self.bump();
                self.expect(Tok::LParen)?;
                let args = self.terms(ctx)?;
                self.expect(Tok::RParen)?;
                let arity = &self.sig.rel(r).arity;
                if args.len() != arity.len() {
                    return err(
                        ErrorKind::Arity,
                        pos,
                        format!("`{name}` takes {} arguments, given {}", arity.len(), args.len()),
                    );
                }
                for (k, ((t, tpos), &want)) in args.iter().zip(arity).enumerate() {
                    let got = t.sort_in(self.sig, ctx).expect("terms are resolved");
                    if got != want {
                        return err(
                            ErrorKind::SortMismatch,
                            *tpos,
                            format!(
                                "argument {} of `{name}` has sort {}, expected {}",
                                k + 1,
                                self.sig.sort_name(got),
                                self.sig.sort_name(want)
                            ),
                        );
                    }
                }
                Ok(Formula::Rel(r, args.into_iter().map(|(t, _)| t).collect()))
            }
            _ => {
                let (a, apos) = self.term(ctx)?;
                self.expect(Tok::Eq)?;
                let (b, bpos) = self.term(ctx)?;
                let sa = a.sort_in(self.sig, ctx).unwrap();
                let sb = b.sort_in(self.sig, ctx).unwrap();
                if sa != sb {
                    return err(
                        ErrorKind::SortMismatch,
                        bpos,
                        format!(
                            "equation between sorts {} and {}",
                            self.sig.sort_name(sa),
                            self.sig.sort_name(sb)
                        ),
                    );
                }
                let _ = apos;
                Ok(Formula::Eq(a, b))
            }
        }
    }

    fn terms(&mut self, ctx: &[(String, SortId)]) -> Result<Vec<(Term, Pos)>, ParseError> {
        let mut out = Vec::new();
        if *self.peek() == Tok::RParen {
            return Ok(out);
        }
        out.push(self.term(ctx)?);
        while *self.peek() == Tok::Comma {
            self.bump();
            out.push(self.term(ctx)?);
        }
        Ok(out)
    }

    fn term(&mut self, ctx: &[(String, SortId)]) -> Result<(Term, Pos), ParseError> {
        let (name, pos) = self.ident()?;
        match self.sig.lookup(&name) {
            Some(Symbol::Func(f)) => {
                let args = if *self.peek() == Tok::LParen {
                    self.bump();
                    let a = self.terms(ctx)?;
                    self.expect(Tok::RParen)?;
                    a
                } else {
                    Vec::new()
                };
                let dom = &self.sig.func(f).domain;
                if args.len() != dom.len() {
                    return err(
                        ErrorKind::Arity,
                        pos,
                        format!("`{name}` takes {} arguments, given {}", dom.len(), args.len()),
                    );
                }
                for ((t, tpos), &want) in args.iter().zip(dom) {
                    let got = t.sort_in(self.sig, ctx).unwrap();
                    if got != want {
                        return err(
                            ErrorKind::SortMismatch,
                            *tpos,
                            format!(
                                "argument of `{name}` has sort {}, expected {}",
                                self.sig.sort_name(got),
                                self.sig.sort_name(want)
                            ),
                        );
                    }
                }
                Ok((Term::App(f, args.into_iter().map(|(t, _)| t).collect()), pos))
            }
            Some(Symbol::Rel(_)) => err(ErrorKind::Grammar, pos, format!("relation `{name}` used as a term")),
            _ if ctx.iter().any(|(n, _)| *n == name) => Ok((Term::Var(name), pos)),
            _ => err(ErrorKind::UnknownSymbol, pos, format!("unknown variable or function `{name}`")),
        }
    }
}

/// Parses a theory: declarations and coherent sequents.
pub fn parse_theory(text: &str) -> Result<Theory, ParseError> {
    let mut sig = Signature::default();
    let toks = lex(text)?;
    let mut axioms = Vec::new();
    let mut i = 0;
    // declarations mutate the signature, so the parser is rebuilt per item
    loop {
        let mut p = Parser { toks: toks.clone(), i, sig: &sig };
        let (tok, pos) = p.bump();
        let kw = match tok {
            Tok::Eof => break,
            Tok::Ident(k) if ["sort", "rel", "func", "axiom"].contains(&k.as_str()) => k,
            t => return err(ErrorKind::Grammar, pos, format!("expected a declaration, found {}", t.describe())),
        };
        let fresh = |p: &mut Parser, sig: &Signature| -> Result<String, ParseError> {
            let (name, npos) = p.ident()?;
            if sig.lookup(&name).is_some() {
                return err(ErrorKind::Duplicate, npos, format!("`{name}` is already declared"));
            }
            Ok(name)
        };
        let sort_list = |p: &mut Parser| -> Result<Vec<SortId>, ParseError> {
            let mut out = Vec::new();
            while let Tok::Ident(s) = p.peek() {
                if KEYWORDS.contains(&s.as_str()) {
                    break;
                }
                out.push(p.sort()?);
            }
            Ok(out)
        };
        match kw.as_str() {
            "sort" => {
                let mut names = vec![fresh(&mut p, &sig)?];
                while matches!(p.peek(), Tok::Ident(s) if !KEYWORDS.contains(&s.as_str())) {
                    let n = fresh(&mut p, &sig)?;
                    if names.contains(&n) {
                        return err(ErrorKind::Duplicate, p.toks[p.i - 1].1, format!("`{n}` is already declared"));
                    }
                    names.push(n);
                }
                i = p.i;
                for n in names {
                    sig.add_sort(&n);
                }
            }
            "rel" => {
                let name = fresh(&mut p, &sig)?;
                p.expect(Tok::Colon)?;
                let apos = p.pos();
                let arity = sort_list(&mut p)?;
                if arity.is_empty() {
                    return err(ErrorKind::Arity, apos, format!("relation `{name}` needs at least one sort"));
                }
                i = p.i;
                sig.add_rel(&name, arity);
            }
            "func" => {
                let name = fresh(&mut p, &sig)?;
                p.expect(Tok::Colon)?;
                let dom = sort_list(&mut p)?;
                p.expect(Tok::Arrow)?;
                let cod = p.sort()?;
                i = p.i;
                sig.add_func(&name, dom, cod);
            }
            _ => {
                p.expect(Tok::LParen)?;
                let mut ctx: Vec<(String, SortId)> = Vec::new();
                if *p.peek() != Tok::RParen {
                    loop {
                        let (v, vpos) = p.ident()?;
                        if ctx.iter().any(|(n, _)| *n == v) {
                            return err(ErrorKind::Duplicate, vpos, format!("variable `{v}` listed twice"));
                        }
                        if p.sig.lookup(&v).is_some() {
                            return err(ErrorKind::Duplicate, vpos, format!("variable `{v}` clashes with a symbol"));
                        }
                        p.expect(Tok::Colon)?;
                        let s = p.sort()?;
                        ctx.push((v, s));
                        if *p.peek() == Tok::Comma {
                            p.bump();
                        } else {
                            break;
                        }
                    }
                }
                p.expect(Tok::RParen)?;
                let mut scope = ctx.clone();
                let lhs = p.formula(&mut scope)?;
                p.expect(Tok::Implies)?;
                let rhs = p.formula(&mut scope)?;
                i = p.i;
                axioms.push(Sequent { context: ctx, lhs, rhs, pos });
            }
        }
    }
    Ok(Theory { sig: Arc::new(sig), axioms })
}

/// Parses a single formula in a given variable context.
pub fn parse_formula(sig: &Signature, ctx: &[(String, SortId)], text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser::new(text, sig)?;
    let mut scope = ctx.to_vec();
    let f = p.formula(&mut scope)?;
    match p.bump() {
        (Tok::Eof, _) => Ok(f),
        (t, pos) => err(ErrorKind::Grammar, pos, format!("trailing input at {}", t.describe())),
    }
}

/// `NAME = {...}` blocks, keyed by name, with the raw entries.
enum Entry {
    Atom(String, Pos),
    Tuple(Vec<(String, Pos)>, Pos),
    Map(Vec<(String, Pos)>, (String, Pos), Pos),
}

fn model_blocks(text: &str, sig: &Signature) -> Result<Vec<(String, Pos, Vec<Entry>)>, ParseError> {
    let mut p = Parser::new(text, sig)?;
    let mut blocks = Vec::new();
    let elem = |p: &mut Parser| -> Result<(String, Pos), ParseError> {
        match p.bump() {
            (Tok::Ident(s), pos) => Ok((s, pos)),
            (t, pos) => err(ErrorKind::Grammar, pos, format!("expected an element, found {}", t.describe())),
        }
    };
    let tuple = |p: &mut Parser| -> Result<Vec<(String, Pos)>, ParseError> {
        p.expect(Tok::LParen)?;
        let mut v = Vec::new();
        if *p.peek() != Tok::RParen {
            v.push(elem(p)?);
            while *p.peek() == Tok::Comma {
                p.bump();
                v.push(elem(p)?);
            }
        }
        p.expect(Tok::RParen)?;
        Ok(v)
    };
    while *p.peek() != Tok::Eof {
        let (name, pos) = p.ident()?;
        p.expect(Tok::Eq)?;
        let mut entries = Vec::new();
        if *p.peek() != Tok::LBrace {
            // `c = e` shorthand for a constant
            let e = elem(&mut p)?;
            entries.push(Entry::Map(vec![], e, pos));
            blocks.push((name, pos, entries));
            continue;
        }
        p.expect(Tok::LBrace)?;
        while *p.peek() != Tok::RBrace {
            let epos = p.pos();
            let lhs = if *p.peek() == Tok::LParen { Some(tuple(&mut p)?) } else { None };
            let first = match &lhs {
                Some(_) => None,
                None => Some(elem(&mut p)?),
            };
            if *p.peek() == Tok::Arrow {
                p.bump();
                let out = elem(&mut p)?;
                let args = lhs.unwrap_or_else(|| vec![first.clone().unwrap()]);
                entries.push(Entry::Map(args, out, epos));
            } else {
                entries.push(match lhs {
                    Some(t) => Entry::Tuple(t, epos),
                    None => {
                        let (s, sp) = first.unwrap();
                        Entry::Atom(s, sp)
                    }
                });
            }
            if *p.peek() == Tok::Comma {
                p.bump();
            } else {
                break;
            }
        }
        p.expect(Tok::RBrace)?;
        blocks.push((name, pos, entries));
    }
    Ok(blocks)
}

/// Parses a model description against a signature.
///
/// Every sort needs a carrier and every function a total table; relations
/// left out are empty.
pub fn parse_model(text: &str, sig: &Arc<Signature>) -> Result<FinModel, ParseError> {
    let blocks = model_blocks(text, sig)?;
    let mut carriers: Vec<Option<Vec<String>>> = vec![None; sig.sorts.len()];
    for (name, pos, entries) in &blocks {
        if let Some(Symbol::Sort(s)) = sig.lookup(name) {
            if carriers[s.0].is_some() {
                return err(ErrorKind::Duplicate, *pos, format!("carrier of `{name}` given twice"));
            }
            let mut elems = Vec::new();
            for e in entries {
                match e {
                    Entry::Atom(x, xpos) => {
                        if elems.contains(x) {
                            return err(ErrorKind::Duplicate, *xpos, format!("element `{x}` listed twice"));
                        }
                        elems.push(x.clone());
                    }
                    Entry::Tuple(_, p) | Entry::Map(_, _, p) => {
                        return err(ErrorKind::Model, *p, "carrier entries must be plain element names")
                    }
                }
            }
            carriers[s.0] = Some(elems);
        }
    }
    let mut names = Vec::new();
    for (i, c) in carriers.into_iter().enumerate() {
        match c {
            Some(c) => names.push(c),
            None => {
                return err(
                    ErrorKind::Model,
                    Pos::default(),
                    format!("no carrier given for sort `{}`", sig.sorts[i]),
                )
            }
        }
    }
    let find = |s: SortId, (x, pos): &(String, Pos)| -> Result<usize, ParseError> {
        names[s.0].iter().position(|e| e == x).map_or_else(
            || err(ErrorKind::Model, *pos, format!("`{x}` is not in the carrier of `{}`", sig.sorts[s.0])),
            Ok,
        )
    };
    let mut model = FinModel::empty(sig.clone(), names.iter().map(Vec::len).collect());
    model.names = names.clone();
    let mut given_funcs = vec![false; sig.funcs.len()];
    for (name, pos, entries) in &blocks {
        match sig.lookup(name) {
            Some(Symbol::Sort(_)) => {}
            Some(Symbol::Rel(r)) => {
                let arity = sig.rel(r).arity.clone();
                for e in entries {
                    let (elems, epos) = match e {
                        Entry::Atom(x, p) => (vec![(x.clone(), *p)], *p),
                        Entry::Tuple(t, p) => (t.clone(), *p),
                        Entry::Map(_, _, p) => return err(ErrorKind::Model, *p, "relations list tuples, not maps"),
                    };
                    if elems.len() != arity.len() {
                        return err(
                            ErrorKind::Arity,
                            epos,
                            format!("`{name}` has arity {}, tuple has {} entries", arity.len(), elems.len()),
                        );
                    }
                    let t: Vec<usize> = elems.iter().zip(&arity).map(|(x, &s)| find(s, x)).collect::<Result<_, _>>()?;
                    model.set_rel(r, &t, true);
                }
            }
            Some(Symbol::Func(f)) => {
                let sym = sig.func(f).clone();
                let mut table: Vec<Option<u32>> = vec![None; model.product_size(&sym.domain)];
                if sym.domain.is_empty() && model.card(sym.codomain) == 0 {
                    return err(ErrorKind::Model, *pos, format!("constant `{name}` into empty carrier"));
                }
                for e in entries {
                    let Entry::Map(args, out, epos) = e else {
                        return err(ErrorKind::Model, *pos, format!("`{name}` needs `args -> value` entries"));
                    };
                    if args.len() != sym.domain.len() {
                        return err(
                            ErrorKind::Arity,
                            *epos,
                            format!("`{name}` takes {} arguments, entry has {}", sym.domain.len(), args.len()),
                        );
                    }
                    let a: Vec<usize> = args.iter().zip(&sym.domain).map(|(x, &s)| find(s, x)).collect::<Result<_, _>>()?;
                    let v = find(sym.codomain, out)?;
                    let slot = &mut table[model.encode(&sym.domain, &a)];
                    if slot.is_some_and(|old| old as usize != v) {
                        return err(ErrorKind::Model, *epos, format!("`{name}` given two values on one input"));
                    }
                    *slot = Some(v as u32);
                }
                if let Some(missing) = table.iter().position(Option::is_none) {
                    let input = model.decode(&sym.domain, missing);
                    let shown: Vec<&str> = input
                        .iter()
                        .zip(&sym.domain)
                        .map(|(&x, s)| names[s.0][x].as_str())
                        .collect();
                    return err(
                        ErrorKind::Model,
                        *pos,
                        format!("`{name}` is partial: no value at ({})", shown.join(",")),
                    );
                }
                model.funcs[f.0] = table.into_iter().map(Option::unwrap).collect();
                given_funcs[f.0] = true;
            }
            None => return err(ErrorKind::UnknownSymbol, *pos, format!("unknown symbol `{name}`")),
        }
    }
    for (i, f) in sig.funcs.iter().enumerate() {
        if !given_funcs[i] {
            if f.domain.is_empty() && model.card(f.codomain) == 0 {
                return err(ErrorKind::Model, Pos::default(), format!("constant `{}` into empty carrier", f.name));
            }
            if model.product_size(&f.domain) > 0 {
                return err(ErrorKind::Model, Pos::default(), format!("no table given for `{}`", f.name));
            }
        }
    }
    Ok(model)
}

/// Parses per-sort element lists `S = {..}` against a model. Sorts that are
/// not mentioned get their full carrier.
pub fn parse_sort_subsets(text: &str, model: &FinModel) -> Result<Vec<FixedBitSet>, ParseError> {
    let sig = &model.sig;
    let blocks = model_blocks(text, sig)?;
    let mut out: Vec<FixedBitSet> = (0..sig.sorts.len())
        .map(|s| {
            let mut b = FixedBitSet::with_capacity(model.card(SortId(s)));
            b.insert_range(..);
            b
        })
        .collect();
    for (name, pos, entries) in blocks {
        let Some(Symbol::Sort(s)) = sig.lookup(&name) else {
            return err(ErrorKind::UnknownSymbol, pos, format!("`{name}` is not a sort"));
        };
        let mut b = FixedBitSet::with_capacity(model.card(s));
        for e in entries {
            let Entry::Atom(x, xpos) = e else {
                return err(ErrorKind::Model, pos, "subset entries must be plain element names");
            };
            match model.names[s.0].iter().position(|n| *n == x) {
                Some(i) => b.insert(i),
                None => return err(ErrorKind::Model, xpos, format!("`{x}` is not in the carrier of `{name}`")),
            }
        }
        out[s.0] = b;
    }
    Ok(out)
}
