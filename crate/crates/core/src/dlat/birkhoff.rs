//! Join-irreducibles, down-set reconstruction and lattice isomorphism.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;

use super::{DlatError, FinDistLattice};

/// Join-irreducible elements in ascending index order.
pub fn join_irreducibles(l: &FinDistLattice) -> Vec<usize> {
    (0..l.len())
        .filter(|&j| {
            j != l.bot() && l.join_all(l.down_set(j).ones().filter(|&x| x != j)) != j
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct Roundtrip {
    pub lattice: FinDistLattice,
    /// `iso[x]` is the element of `lattice` corresponding to `x`.
    pub iso: Vec<usize>,
    /// The down-set of join-irreducibles each rebuilt element stands for.
    pub downsets: Vec<Vec<usize>>,
}

/// Rebuilds `l` as the lattice of down-sets of its join-irreducibles.
pub fn birkhoff_roundtrip(l: &FinDistLattice) -> Result<Roundtrip, DlatError> {
    let js = join_irreducibles(l);
    let k = js.len();
    let below = |a: usize, b: usize| l.leq(js[a], js[b]);
    // enumerate down-sets of (J, <=) by extending in index order
    let mut downs: Vec<FixedBitSet> = vec![FixedBitSet::with_capacity(k)];
    // js is in index order, which need not be a linear extension, so close
    // by brute force over candidate sets grown one element at a time
    let mut seen: HashMap<FixedBitSet, ()> = HashMap::new();
    seen.insert(downs[0].clone(), ());
    let mut i = 0;
    while i < downs.len() {
        let d = downs[i].clone();
        for j in 0..k {
            if d.contains(j) {
                continue;
            }
            if (0..k).all(|b| b == j || !below(b, j) || d.contains(b)) {
                let mut e = d.clone();
                e.insert(j);
                if seen.insert(e.clone(), ()).is_none() {
                    downs.push(e);
                }
            }
        }
        i += 1;
    }
    downs.sort_by_key(|d| (d.count_ones(..), d.ones().collect::<Vec<_>>()));
    let rebuilt = FinDistLattice::from_leq(downs.len(), |a, b| downs[a].is_subset(&downs[b]))
        .map_err(|_| DlatError::RoundtripFailed)?;
    let index: HashMap<&FixedBitSet, usize> = downs.iter().enumerate().map(|(i, d)| (d, i)).collect();
    let mut iso = Vec::with_capacity(l.len());
    for x in 0..l.len() {
        let mut d = FixedBitSet::with_capacity(k);
        d.extend((0..k).filter(|&a| l.leq(js[a], x)));
        iso.push(*index.get(&d).ok_or(DlatError::RoundtripFailed)?);
    }
    if rebuilt.len() != l.len() || !is_isomorphism(l, &rebuilt, &iso) {
        return Err(DlatError::RoundtripFailed);
    }
    let downsets = downs.iter().map(|d| d.ones().map(|a| js[a]).collect()).collect();
    Ok(Roundtrip { lattice: rebuilt, iso, downsets })
}

/// Whether `f` is an order isomorphism from `a` onto `b`.
pub fn is_isomorphism(a: &FinDistLattice, b: &FinDistLattice, f: &[usize]) -> bool {
    if a.len() != b.len() || f.len() != a.len() {
        return false;
    }
    let mut hit = vec![false; b.len()];
    for &y in f {
        if y >= b.len() || std::mem::replace(&mut hit[y], true) {
            return false;
        }
    }
    (0..a.len()).all(|x| (0..a.len()).all(|y| a.leq(x, y) == b.leq(f[x], f[y])))
}

/// Searches for a lattice isomorphism by matching join-irreducible posets.
pub fn find_isomorphism(a: &FinDistLattice, b: &FinDistLattice) -> Option<Vec<usize>> {
    if a.len() != b.len() {
        return None;
    }
    let ja = join_irreducibles(a);
    let jb = join_irreducibles(b);
    if ja.len() != jb.len() {
        return None;
    }
    let k = ja.len();
    let sig = |l: &FinDistLattice, js: &[usize], i: usize| {
        let below = js.iter().filter(|&&x| l.leq(x, js[i])).count();
        let above = js.iter().filter(|&&x| l.leq(js[i], x)).count();
        (below, above)
    };
    let sa: Vec<_> = (0..k).map(|i| sig(a, &ja, i)).collect();
    let sb: Vec<_> = (0..k).map(|i| sig(b, &jb, i)).collect();
    let mut ms = sa.clone();
    let mut ns = sb.clone();
    ms.sort_unstable();
    ns.sort_unstable();
    if ms != ns {
        return None;
    }
    let mut map = vec![usize::MAX; k];
    let mut used = vec![false; k];
    fn go(
        i: usize,
        a: &FinDistLattice,
        b: &FinDistLattice,
        ja: &[usize],
        jb: &[usize],
        sa: &[(usize, usize)],
        sb: &[(usize, usize)],
        map: &mut [usize],
        used: &mut [bool],
    ) -> bool {
        if i == ja.len() {
            return true;
        }
        for c in 0..jb.len() {
            if used[c] || sa[i] != sb[c] {
                continue;
            }
            let ok = (0..i).all(|p| {
                a.leq(ja[p], ja[i]) == b.leq(jb[map[p]], jb[c]) && a.leq(ja[i], ja[p]) == b.leq(jb[c], jb[map[p]])
            });
            if ok {
                map[i] = c;
                used[c] = true;
                if go(i + 1, a, b, ja, jb, sa, sb, map, used) {
                    return true;
                }
                used[c] = false;
            }
        }
        false
    }
    if !go(0, a, b, &ja, &jb, &sa, &sb, &mut map, &mut used) {
        return None;
    }
    let f: Vec<usize> = (0..a.len())
        .map(|x| b.join_all((0..k).filter(|&i| a.leq(ja[i], x)).map(|i| jb[map[i]])))
        .collect();
    is_isomorphism(a, b, &f).then_some(f)
}
