//! The closure computation.
//!
//! Primitives are the atoms, their pullbacks along weakenings and adjacent
//! swaps, and images along dropping the last coordinate of anything in the
//! meet-closure `Q`. Pullbacks commute with meets, so `Q` is closed under
//! the generating pullbacks once primitives are, and every coordinate map
//! factors through these generators together with equality atoms and
//! projections. `Sub(x)` is then the join-closure of `Q(x)`.

use std::collections::VecDeque;

use fixedbitset::FixedBitSet;

use super::{CtxId, Provenance, SatError, SemCat, SemCatConfig, SubStore};
use crate::model::{eval_formula, FinModel};
use crate::syntax::{Formula, SortId, Term};

enum Task {
    Full(CtxId, usize),
    Prim(CtxId, usize),
}

/// A generating map `f: dom -> c` along which primitives at `c` are pulled back.
struct Gen {
    dom: CtxId,
    sigma: Vec<usize>,
    tbl: Vec<usize>,
}

impl SemCat {
    pub fn saturate(family: Vec<FinModel>, config: SemCatConfig) -> Result<SemCat, SatError> {
        let first = family.first().ok_or(SatError::EmptyFamily)?;
        let sig = first.sig.clone();
        for (i, m) in family.iter().enumerate() {
            if *m.sig != *sig {
                return Err(SatError::SignatureMismatch(i));
            }
            m.validate().map_err(|message| SatError::Malformed { member: i, message })?;
        }
        let k = sig.sorts.len();
        let mut contexts: Vec<Vec<SortId>> = vec![Vec::new()];
        let mut layer: Vec<Vec<SortId>> = vec![Vec::new()];
        for _ in 0..config.n_max {
            layer = layer
                .iter()
                .flat_map(|c| (0..k).map(move |s| [c.clone(), vec![SortId(s)]].concat()))
                .collect();
            contexts.extend(layer.iter().cloned());
        }
        let ctx_index = contexts.iter().enumerate().map(|(i, c)| (c.clone(), CtxId(i))).collect();
        let offsets = contexts
            .iter()
            .map(|c| {
                let mut acc = vec![0];
                for m in &family {
                    acc.push(acc.last().unwrap() + m.product_size(c));
                }
                acc
            })
            .collect();
        let n = contexts.len();
        let mut cat = SemCat {
            family,
            sig,
            config,
            contexts,
            ctx_index,
            offsets,
            store: vec![SubStore::default(); n],
            top: vec![0; n],
            bot: vec![0; n],
        };
        cat.run()?;
        Ok(cat)
    }

    fn generators(&self) -> (Vec<Vec<Gen>>, Vec<Option<(CtxId, Vec<usize>)>>) {
        let mut up: Vec<Vec<Gen>> = self.contexts().map(|_| Vec::new()).collect();
        let mut down = vec![None; self.num_contexts()];
        for c in self.contexts() {
            let xs = self.sorts(c).to_vec();
            let len = xs.len();
            if len > 0 {
                let y = self.ctx_id(&xs[..len - 1]).unwrap();
                let sigma: Vec<usize> = (0..len - 1).collect();
                down[c.0] = Some((y, self.map_table(c, y, &sigma)));
                // weakening: pullback along c -> y drops the last coordinate
                up[y.0].push(Gen { dom: c, tbl: self.map_table(c, y, &sigma), sigma });
            }
            for i in 0..len.saturating_sub(1) {
                let mut swapped = xs.clone();
                swapped.swap(i, i + 1);
                let dom = self.ctx_id(&swapped).unwrap();
                let mut sigma: Vec<usize> = (0..len).collect();
                sigma.swap(i, i + 1);
                up[c.0].push(Gen { dom, tbl: self.map_table(dom, c, &sigma), sigma });
            }
        }
        (up, down)
    }

    fn partial_summary(&self) -> String {
        self.size_summary().iter().map(|(c, n)| format!("[{c}]={n}")).collect::<Vec<_>>().join(" ")
    }

    fn add(
        &mut self,
        c: CtxId,
        bits: FixedBitSet,
        prov: Provenance,
        prim: bool,
        in_q: bool,
        queue: &mut VecDeque<Task>,
    ) -> Result<(), SatError> {
        let store = &mut self.store[c.0];
        if let Some(id) = store.lookup(&bits) {
            if prim && !store.prim[id] {
                store.prim[id] = true;
                queue.push_back(Task::Prim(c, id));
            }
            return Ok(());
        }
        if store.elems.len() >= self.config.max_lattice {
            return Err(SatError::Cutoff {
                context: self.context_name(c),
                stage: if in_q { "meet closure" } else { "join closure" },
                limit: self.config.max_lattice,
                partial: self.partial_summary(),
            });
        }
        let id = store.elems.len();
        store.index.insert(bits.clone(), id);
        store.elems.push(bits);
        store.prov.push(prov);
        store.in_q.push(in_q);
        store.prim.push(prim);
        queue.push_back(Task::Full(c, id));
        Ok(())
    }

    fn run(&mut self) -> Result<(), SatError> {
        let (up, down) = self.generators();
        let mut queue = VecDeque::new();
        for c in self.contexts().collect::<Vec<_>>() {
            let ctx = super::canonical_context(self.sorts(c));
            for atom in atoms(self, &ctx) {
                let mut bits = FixedBitSet::with_capacity(self.total(c));
                for (i, m) in self.family.iter().enumerate() {
                    let off = self.offset(c, i);
                    for j in eval_formula(m, &atom, &ctx).ones() {
                        bits.insert(off + j);
                    }
                }
                self.add(c, bits, Provenance::Atom(atom), true, true, &mut queue)?;
            }
        }
        while let Some(task) = queue.pop_front() {
            let (c, id, full) = match task {
                Task::Full(c, id) => (c, id, true),
                Task::Prim(c, id) => (c, id, false),
            };
            let e = self.store[c.0].elems[id].clone();
            if self.store[c.0].prim[id] {
                for g in &up[c.0] {
                    let bits = self.pullback_bits(&g.tbl, &e);
                    let prov = Provenance::Pullback { ctx: c, id, sigma: g.sigma.clone() };
                    self.add(g.dom, bits, prov, true, true, &mut queue)?;
                }
            }
            if !full {
                continue;
            }
            for q in 0..self.store[c.0].elems.len() {
                let mut m = e.clone();
                m.intersect_with(&self.store[c.0].elems[q]);
                self.add(c, m, Provenance::Meet(id, q), false, true, &mut queue)?;
            }
            if let Some((y, tbl)) = &down[c.0] {
                let bits = self.image_bits(tbl, self.total(*y), &e);
                self.add(*y, bits, Provenance::Exists { ctx: c, id }, true, true, &mut queue)?;
            }
        }
        for c in self.contexts().collect::<Vec<_>>() {
            let qn = self.store[c.0].elems.len();
            let mut pending: VecDeque<usize> = (0..qn).collect();
            let mut sink = VecDeque::new();
            while let Some(j) = pending.pop_front() {
                for q in 0..qn {
                    let mut u = self.store[c.0].elems[j].clone();
                    u.union_with(&self.store[c.0].elems[q]);
                    let before = self.store[c.0].elems.len();
                    self.add(c, u, Provenance::Join(j, q), false, false, &mut sink)?;
                    if self.store[c.0].elems.len() > before {
                        pending.push_back(before);
                    }
                }
            }
            let total = self.total(c);
            let mut full = FixedBitSet::with_capacity(total);
            full.insert_range(..);
            self.top[c.0] = self.store[c.0].lookup(&full).expect("true is an atom");
            self.bot[c.0] = self.store[c.0].lookup(&FixedBitSet::with_capacity(total)).expect("false is an atom");
        }
        Ok(())
    }
}

/// Terms of each sort over `ctx` up to the configured depth.
fn terms(cat: &SemCat, ctx: &[(String, SortId)]) -> Vec<Vec<Term>> {
    let sig = &cat.sig;
    let mut by_sort: Vec<Vec<Term>> = vec![Vec::new(); sig.sorts.len()];
    for (v, s) in ctx {
        by_sort[s.0].push(Term::Var(v.clone()));
    }
    for _ in 0..cat.config.term_depth {
        let prev = by_sort.clone();
        for (f, sym) in sig.funcs.iter().enumerate() {
            let mut args: Vec<Vec<Term>> = vec![Vec::new()];
            for s in &sym.domain {
                args = args
                    .into_iter()
                    .flat_map(|a| prev[s.0].iter().map(move |t| [a.clone(), vec![t.clone()]].concat()))
                    .collect();
            }
            for a in args {
                let t = Term::App(crate::syntax::FuncId(f), a);
                if !by_sort[sym.codomain.0].contains(&t) {
                    by_sort[sym.codomain.0].push(t);
                }
            }
        }
    }
    by_sort
}

/// Atomic formulas over `ctx`: truth values, equations and relation instances.
fn atoms(cat: &SemCat, ctx: &[(String, SortId)]) -> Vec<Formula> {
    let ts = terms(cat, ctx);
    let mut out = vec![Formula::Top, Formula::Bot];
    for sort_terms in &ts {
        for i in 0..sort_terms.len() {
            for j in i + 1..sort_terms.len() {
                out.push(Formula::Eq(sort_terms[i].clone(), sort_terms[j].clone()));
            }
        }
    }
    for (r, sym) in cat.sig.rels.iter().enumerate() {
        let mut args: Vec<Vec<Term>> = vec![Vec::new()];
        for s in &sym.arity {
            args = args
                .into_iter()
                .flat_map(|a| ts[s.0].iter().map(move |t| [a.clone(), vec![t.clone()]].concat()))
                .collect();
        }
        out.extend(args.into_iter().map(|a| Formula::Rel(crate::syntax::RelId(r), a)));
    }
    out
}
