//! Prime-filter spectra.

use fixedbitset::FixedBitSet;

use super::{join_irreducibles, DlatError, FinDistLattice};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PrimeFilter {
    pub members: FixedBitSet,
}

impl PrimeFilter {
    pub fn contains(&self, a: usize) -> bool {
        self.members.contains(a)
    }

    pub fn is_subset(&self, other: &PrimeFilter) -> bool {
        self.members.is_subset(&other.members)
    }

    /// Checks the prime-filter axioms against `l`, returning the first failure.
    pub fn validate(&self, l: &FinDistLattice) -> Result<(), DlatError> {
        let bad = |s: String| Err(DlatError::NotPrime(s));
        if self.members.len() != l.len() {
            return bad("member set has the wrong universe size".into());
        }
        if self.contains(l.bot()) {
            return bad("contains bottom".into());
        }
        if !self.contains(l.top()) {
            return bad("misses top".into());
        }
        for a in self.members.ones() {
            for b in 0..l.len() {
                if l.leq(a, b) && !self.contains(b) {
                    return bad(format!("not upward closed: {a} in, {b} above it out"));
                }
                if self.contains(b) && !self.contains(l.meet(a, b)) {
                    return bad(format!("not meet closed: {a}, {b} in, meet out"));
                }
            }
        }
        for a in 0..l.len() {
            for b in a..l.len() {
                if self.contains(l.join(a, b)) && !self.contains(a) && !self.contains(b) {
                    return bad(format!("not prime: join of {a} and {b} in, neither is"));
                }
            }
        }
        Ok(())
    }

    pub fn members_vec(&self) -> Vec<usize> {
        self.members.ones().collect()
    }
}

/// The finite spectral space of a lattice.
#[derive(Debug, Clone)]
pub struct SpecSpace {
    pub points: Vec<PrimeFilter>,
    /// The join-irreducible generating each point: `points[i] = up(generators[i])`.
    pub generators: Vec<usize>,
    /// `specialization[q][p]` iff point q is contained in point p.
    pub specialization: Vec<Vec<bool>>,
    /// For each lattice element, the set of points containing it.
    pub basic_opens: Vec<FixedBitSet>,
}

impl SpecSpace {
    /// Closure of a point, computed from basic opens: q is in the closure of
    /// p iff every basic open around q also contains p.
    pub fn closure(&self, p: usize) -> FixedBitSet {
        let mut cl = FixedBitSet::with_capacity(self.points.len());
        for q in 0..self.points.len() {
            if self.basic_opens.iter().all(|o| !o.contains(q) || o.contains(p)) {
                cl.insert(q);
            }
        }
        cl
    }

    /// Whether a set of points is open, i.e. a union of basic opens.
    pub fn is_open(&self, s: &FixedBitSet) -> bool {
        let mut u = FixedBitSet::with_capacity(self.points.len());
        for o in &self.basic_opens {
            if o.is_subset(s) {
                u.union_with(o);
            }
        }
        &u == s
    }
}

/// All prime filters of `l`, as principal filters of join-irreducibles.
pub fn spec(l: &FinDistLattice) -> Result<SpecSpace, DlatError> {
    if l.len() < 2 {
        return Err(DlatError::Trivial);
    }
    let n = l.len();
    let generators = join_irreducibles(l);
    let points: Vec<PrimeFilter> = generators
        .iter()
        .map(|&j| {
            let mut m = FixedBitSet::with_capacity(n);
            m.extend((0..n).filter(|&x| l.leq(j, x)));
            PrimeFilter { members: m }
        })
        .collect();
    let specialization = points
        .iter()
        .map(|q| points.iter().map(|p| q.is_subset(p)).collect())
        .collect();
    let basic_opens = (0..n)
        .map(|x| {
            let mut o = FixedBitSet::with_capacity(points.len());
            o.extend((0..points.len()).filter(|&i| points[i].contains(x)));
            o
        })
        .collect();
    Ok(SpecSpace { points, generators, specialization, basic_opens })
}
