use serde::Serialize;

use super::FinModel;
use crate::semcat::{CtxId, SemCat};
use crate::syntax::{FuncId, RelId, SortId};

/// A sort-indexed family of maps between carriers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Homomorphism {
    pub maps: Vec<Vec<u32>>,
}

impl Homomorphism {
    pub fn at(&self, s: SortId, a: usize) -> usize {
        self.maps[s.0][a] as usize
    }

    /// Image of a tuple index of `src` over `sorts` as a tuple index of `tgt`.
    pub fn map_index(&self, src: &FinModel, tgt: &FinModel, sorts: &[SortId], idx: usize) -> usize {
        let t: Vec<usize> = src.decode(sorts, idx).iter().zip(sorts).map(|(&a, &s)| self.at(s, a)).collect();
        tgt.encode(sorts, &t)
    }

    pub fn is_hom(&self, src: &FinModel, tgt: &FinModel) -> bool {
        let sig = &src.sig;
        for (r, sym) in sig.rels.iter().enumerate() {
            for i in src.rels[r].ones() {
                let t = src.decode(&sym.arity, i);
                let img: Vec<usize> = t.iter().zip(&sym.arity).map(|(&a, &s)| self.at(s, a)).collect();
                if !tgt.rel_holds(RelId(r), &img) {
                    return false;
                }
            }
        }
        for (f, sym) in sig.funcs.iter().enumerate() {
            for i in 0..src.product_size(&sym.domain) {
                let t = src.decode(&sym.domain, i);
                let img: Vec<usize> = t.iter().zip(&sym.domain).map(|(&a, &s)| self.at(s, a)).collect();
                let lhs = self.at(sym.codomain, src.funcs[f][i] as usize);
                if tgt.apply(FuncId(f), &img) != lhs {
                    return false;
                }
            }
        }
        true
    }
}

#[derive(Debug, Clone)]
pub struct HomEnumeration {
    pub homs: Vec<Homomorphism>,
    /// Set when the cap stopped the search early.
    pub truncated: bool,
}

/// A constraint that can be checked once all its positions are assigned.
enum Constraint {
    Rel(RelId, Vec<(SortId, usize)>),
    Func(FuncId, Vec<(SortId, usize)>, (SortId, usize)),
}

/// All homomorphisms `m -> n` in lexicographic order of their tables,
/// stopping after `cap`.
pub fn enumerate_homomorphisms(m: &FinModel, n: &FinModel, cap: usize) -> HomEnumeration {
    let sig = &m.sig;
    let positions: Vec<(SortId, usize)> =
        (0..sig.sorts.len()).flat_map(|s| (0..m.card(SortId(s))).map(move |a| (SortId(s), a))).collect();
    let pos_of = |s: SortId, a: usize| -> usize {
        (0..s.0).map(|t| m.card(SortId(t))).sum::<usize>() + a
    };
    let mut by_last: Vec<Vec<Constraint>> = (0..positions.len()).map(|_| Vec::new()).collect();
    for (r, sym) in sig.rels.iter().enumerate() {
        for i in m.rels[r].ones() {
            let t: Vec<(SortId, usize)> = m.decode(&sym.arity, i).into_iter().zip(&sym.arity).map(|(a, &s)| (s, a)).collect();
            let last = t.iter().map(|&(s, a)| pos_of(s, a)).max();
            match last {
                Some(p) => by_last[p].push(Constraint::Rel(RelId(r), t)),
                // a nullary fact must hold in the target outright
                None if !n.rel_holds(RelId(r), &[]) => return HomEnumeration { homs: Vec::new(), truncated: false },
                None => {}
            }
        }
    }
    for (f, sym) in sig.funcs.iter().enumerate() {
        for i in 0..m.product_size(&sym.domain) {
            let t: Vec<(SortId, usize)> = m.decode(&sym.domain, i).into_iter().zip(&sym.domain).map(|(a, &s)| (s, a)).collect();
            let out = (sym.codomain, m.funcs[f][i] as usize);
            let last = t.iter().chain([&out]).map(|&(s, a)| pos_of(s, a)).max().unwrap();
            by_last[last].push(Constraint::Func(FuncId(f), t, out));
        }
    }
    let mut maps: Vec<Vec<u32>> = (0..sig.sorts.len()).map(|s| vec![0; m.card(SortId(s))]).collect();
    let mut res = HomEnumeration { homs: Vec::new(), truncated: false };
    fn ok(c: &Constraint, maps: &[Vec<u32>], n: &FinModel) -> bool {
        let img = |t: &[(SortId, usize)]| -> Vec<usize> { t.iter().map(|&(s, a)| maps[s.0][a] as usize).collect() };
        match c {
            Constraint::Rel(r, t) => n.rel_holds(*r, &img(t)),
            Constraint::Func(f, t, (s, a)) => n.apply(*f, &img(t)) == maps[s.0][*a] as usize,
        }
    }
    fn go(
        k: usize,
        positions: &[(SortId, usize)],
        by_last: &[Vec<Constraint>],
        maps: &mut Vec<Vec<u32>>,
        n: &FinModel,
        cap: usize,
        res: &mut HomEnumeration,
    ) {
        if res.truncated {
            return;
        }
        if k == positions.len() {
            if res.homs.len() == cap {
                res.truncated = true;
            } else {
                res.homs.push(Homomorphism { maps: maps.clone() });
            }
            return;
        }
        let (s, a) = positions[k];
        for b in 0..n.card(s) {
            maps[s.0][a] = b as u32;
            if by_last[k].iter().all(|c| ok(c, maps, n)) {
                go(k + 1, positions, by_last, maps, n, cap, res);
            }
        }
    }
    go(0, &positions, &by_last, &mut maps, n, cap, &mut res);
    res
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ElementaryFailure {
    pub context: Vec<SortId>,
    pub defset: usize,
    /// A tuple of the source outside the definable set whose image lies inside.
    pub tuple: Vec<usize>,
}

/// Checks that `h : family[src] -> family[tgt]` reflects every definable
/// set of the saturated family. Preservation is automatic for
/// homomorphisms and is checked as well.
pub fn is_elementary_hom(cat: &SemCat, src: usize, tgt: usize, h: &Homomorphism) -> Result<(), ElementaryFailure> {
    let (m, n) = (&cat.family[src], &cat.family[tgt]);
    for c in 0..cat.num_contexts() {
        let ctx = CtxId(c);
        let sorts = cat.sorts(ctx).to_vec();
        let img: Vec<usize> = (0..m.product_size(&sorts)).map(|i| h.map_index(m, n, &sorts, i)).collect();
        for d in 0..cat.sub_len(ctx) {
            let bits = cat.bits(ctx, d);
            let (os, ot) = (cat.offset(ctx, src), cat.offset(ctx, tgt));
            for (i, &j) in img.iter().enumerate() {
                if bits.contains(os + i) != bits.contains(ot + j) {
                    return Err(ElementaryFailure { context: sorts.clone(), defset: d, tuple: m.decode(&sorts, i) });
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::syntax::{parse_model, parse_theory};
    use rand::SeedableRng;

    /// Every table, filtered by `is_hom`.
    fn brute(m: &FinModel, n: &FinModel) -> Vec<Homomorphism> {
        let k = m.sig.sorts.len();
        let mut out = Vec::new();
        let mut sizes = Vec::new();
        for s in 0..k {
            for _ in 0..m.card(SortId(s)) {
                sizes.push((s, n.card(SortId(s))));
            }
        }
        let total: usize = sizes.iter().map(|&(_, c)| c).product();
        for mut code in 0..total {
            let mut flat = vec![0u32; sizes.len()];
            for j in (0..sizes.len()).rev() {
                flat[j] = (code % sizes[j].1) as u32;
                code /= sizes[j].1;
            }
            let mut maps = Vec::new();
            let mut it = flat.into_iter();
            for s in 0..k {
                maps.push((0..m.card(SortId(s))).map(|_| it.next().unwrap()).collect());
            }
            let h = Homomorphism { maps };
            if h.is_hom(m, n) {
                out.push(h);
            }
        }
        out
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..60 {
            let sig = corpus::random_signature(&mut rng);
            let m = corpus::random_model(&mut rng, &sig, 3);
            let n = corpus::random_model(&mut rng, &sig, 3);
            let e = enumerate_homomorphisms(&m, &n, usize::MAX);
            assert!(!e.truncated);
            assert_eq!(e.homs, brute(&m, &n));
        }
    }

    #[test]
    fn cap_truncates() {
        let th = parse_theory("sort A").unwrap();
        let m = parse_model("A = {a,b}", &th.sig).unwrap();
        let e = enumerate_homomorphisms(&m, &m, 3);
        assert!(e.truncated);
        assert_eq!(e.homs.len(), 3);
        assert_eq!(enumerate_homomorphisms(&m, &m, 4).homs.len(), 4);
    }
}
