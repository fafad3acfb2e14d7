//! Quotients by the congruence a ~ b iff x & a = x & b for some x in p.

use super::{DlatError, FinDistLattice, PrimeFilter};

#[derive(Debug, Clone)]
pub struct Quotient {
    pub lattice: FinDistLattice,
    /// `map[a]` is the class of `a`.
    pub map: Vec<usize>,
}

/// Quotients `l` by the congruence induced by a prime filter.
pub fn quotient_by_prime(l: &FinDistLattice, p: &PrimeFilter) -> Result<Quotient, DlatError> {
    p.validate(l)?;
    let n = l.len();
    let related = |a: usize, b: usize| p.members.ones().any(|x| l.meet(x, a) == l.meet(x, b));
    let mut map = vec![usize::MAX; n];
    let mut reps = Vec::new();
    for a in 0..n {
        if map[a] != usize::MAX {
            continue;
        }
        let c = reps.len();
        reps.push(a);
        for b in a..n {
            if related(a, b) {
                map[b] = c;
            }
        }
    }
    // the relation must be an equivalence compatible with the operations
    for a in 0..n {
        for b in 0..n {
            if related(a, b) != (map[a] == map[b]) {
                return Err(DlatError::Malformed(format!("~ not transitive at ({a},{b})")));
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            if map[a] != map[b] {
                continue;
            }
            for c in 0..n {
                if map[l.meet(a, c)] != map[l.meet(b, c)] || map[l.join(a, c)] != map[l.join(b, c)] {
                    return Err(DlatError::Malformed(format!("~ not a congruence at ({a},{b},{c})")));
                }
            }
        }
    }
    let k = reps.len();
    let lattice = FinDistLattice::from_leq(k, |x, y| map[l.meet(reps[x], reps[y])] == x)?;
    if !l.is_hom_to(&lattice, &map) {
        return Err(DlatError::Malformed("quotient map is not a homomorphism".into()));
    }
    Ok(Quotient { lattice, map })
}
