//! Finite distributive lattices.
//!
//! A lattice is stored as its order relation together with meet and join
//! tables derived from it. Elements are plain indices `0..n`.

mod birkhoff;
pub mod gen;
pub mod io;
mod krull;
mod quotient;
mod spec;

use std::collections::HashMap;
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::Serialize;
use thiserror::Error;

pub use birkhoff::{birkhoff_roundtrip, find_isomorphism, is_isomorphism, join_irreducibles, Roundtrip};
pub use krull::{greedy_witness, krull_dim_algebraic, krull_dim_chains, KrullAlgebraic, KrullOutcome, KrullStep};
pub use quotient::{quotient_by_prime, Quotient};
pub use spec::{spec, PrimeFilter, SpecSpace};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DlatError {
    #[error("malformed lattice data: {0}")]
    Malformed(String),
    #[error("not a bounded distributive lattice: {0}")]
    Invalid(Violation),
    #[error("trivial lattice")]
    Trivial,
    #[error("not a prime filter: {0}")]
    NotPrime(String),
    #[error("birkhoff roundtrip produced no isomorphism (internal error)")]
    RoundtripFailed,
}

/// One violated lattice axiom instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Violation {
    NotReflexive(usize),
    NotAntisymmetric(usize, usize),
    NotTransitive(usize, usize, usize),
    NoMeet(usize, usize),
    NoJoin(usize, usize),
    MeetMismatch { a: usize, b: usize, given: usize, expected: usize },
    JoinMismatch { a: usize, b: usize, given: usize, expected: usize },
    NoBottom,
    NoTop,
    Distributivity(usize, usize, usize),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotReflexive(a) => write!(f, "{a} </= {a}"),
            Violation::NotAntisymmetric(a, b) => write!(f, "{a} <= {b} <= {a} with {a} != {b}"),
            Violation::NotTransitive(a, b, c) => write!(f, "{a} <= {b} <= {c} but not {a} <= {c}"),
            Violation::NoMeet(a, b) => write!(f, "no meet of {a} and {b}"),
            Violation::NoJoin(a, b) => write!(f, "no join of {a} and {b}"),
            Violation::MeetMismatch { a, b, given, expected } => {
                write!(f, "meet({a},{b}) given as {given}, order says {expected}")
            }
            Violation::JoinMismatch { a, b, given, expected } => {
                write!(f, "join({a},{b}) given as {given}, order says {expected}")
            }
            Violation::NoBottom => write!(f, "no bottom element"),
            Violation::NoTop => write!(f, "no top element"),
            Violation::Distributivity(a, b, c) => {
                write!(f, "{a} & ({b} | {c}) != ({a} & {b}) | ({a} & {c})")
            }
        }
    }
}

/// Candidate lattice data as supplied by a user or a file.
#[derive(Debug, Clone)]
pub struct LatticeData {
    pub n: usize,
    pub leq: Vec<Vec<bool>>,
    pub meet: Option<Vec<Vec<usize>>>,
    pub join: Option<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    /// Shape problems: wrong row lengths, indices out of range.
    pub malformed: Vec<String>,
    /// Axiom instances that fail.
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.malformed.is_empty() && self.violations.is_empty()
    }
}

/// Validates candidate lattice data and lists every violated axiom instance.
///
/// Malformed tables stop the check early, since the axioms are not even
/// expressible over them.
pub fn check_distributive(data: &LatticeData) -> ValidationReport {
    let mut rep = ValidationReport::default();
    let n = data.n;
    if data.leq.len() != n || data.leq.iter().any(|r| r.len() != n) {
        rep.malformed.push(format!("leq is not a {n}x{n} table"));
    }
    for (name, t) in [("meet", &data.meet), ("join", &data.join)] {
        if let Some(t) = t {
            if t.len() != n || t.iter().any(|r| r.len() != n) {
                rep.malformed.push(format!("{name} is not a {n}x{n} table"));
            } else if let Some((a, b)) = (0..n)
                .flat_map(|a| (0..n).map(move |b| (a, b)))
                .find(|&(a, b)| t[a][b] >= n)
            {
                rep.malformed.push(format!("{name}({a},{b}) = {} out of range", t[a][b]));
            }
        }
    }
    if n == 0 {
        rep.malformed.push("empty element set".into());
    }
    if !rep.malformed.is_empty() {
        return rep;
    }
    let le = |a: usize, b: usize| data.leq[a][b];
    for a in 0..n {
        if !le(a, a) {
            rep.violations.push(Violation::NotReflexive(a));
        }
        for b in 0..n {
            if a < b && le(a, b) && le(b, a) {
                rep.violations.push(Violation::NotAntisymmetric(a, b));
            }
            for c in 0..n {
                if le(a, b) && le(b, c) && !le(a, c) {
                    rep.violations.push(Violation::NotTransitive(a, b, c));
                }
            }
        }
    }
    if !rep.violations.is_empty() {
        return rep;
    }
    let inf = |a: usize, b: usize| -> Option<usize> {
        (0..n).find(|&m| le(m, a) && le(m, b) && (0..n).all(|c| !(le(c, a) && le(c, b)) || le(c, m)))
    };
    let sup = |a: usize, b: usize| -> Option<usize> {
        (0..n).find(|&j| le(a, j) && le(b, j) && (0..n).all(|c| !(le(a, c) && le(b, c)) || le(j, c)))
    };
    let mut meet = vec![vec![0; n]; n];
    let mut join = vec![vec![0; n]; n];
    let mut complete = true;
    for a in 0..n {
        for b in 0..n {
            match inf(a, b) {
                Some(m) => meet[a][b] = m,
                None => {
                    complete = false;
                    if a <= b {
                        rep.violations.push(Violation::NoMeet(a, b));
                    }
                }
            }
            match sup(a, b) {
                Some(j) => join[a][b] = j,
                None => {
                    complete = false;
                    if a <= b {
                        rep.violations.push(Violation::NoJoin(a, b));
                    }
                }
            }
        }
    }
    if !(0..n).any(|b| (0..n).all(|x| le(b, x))) {
        rep.violations.push(Violation::NoBottom);
    }
    if !(0..n).any(|t| (0..n).all(|x| le(x, t))) {
        rep.violations.push(Violation::NoTop);
    }
    if !complete {
        return rep;
    }
    if let Some(given) = &data.meet {
        for a in 0..n {
            for b in 0..n {
                if given[a][b] != meet[a][b] {
                    rep.violations.push(Violation::MeetMismatch {
                        a,
                        b,
                        given: given[a][b],
                        expected: meet[a][b],
                    });
                }
            }
        }
    }
    if let Some(given) = &data.join {
        for a in 0..n {
            for b in 0..n {
                if given[a][b] != join[a][b] {
                    rep.violations.push(Violation::JoinMismatch {
                        a,
                        b,
                        given: given[a][b],
                        expected: join[a][b],
                    });
                }
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if meet[a][join[b][c]] != join[meet[a][b]][meet[a][c]] {
                    rep.violations.push(Violation::Distributivity(a, b, c));
                }
            }
        }
    }
    rep
}

/// A validated finite bounded distributive lattice.
#[derive(Clone, PartialEq, Eq)]
pub struct FinDistLattice {
    n: usize,
    /// `down[a]` is the set of elements below `a`.
    down: Vec<FixedBitSet>,
    meet: Vec<u32>,
    join: Vec<u32>,
    bot: usize,
    top: usize,
}

impl fmt::Debug for FinDistLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FinDistLattice(n={}, covers={:?})", self.n, self.covers())
    }
}

impl FinDistLattice {
    /// Builds a lattice from its order relation, deriving meet and join.
    ///
    /// Meets are found by looking up the intersection of down-sets, so the
    /// cost is quadratic in `n` times a bitset operation.
    pub fn from_leq(n: usize, leq: impl Fn(usize, usize) -> bool) -> Result<Self, DlatError> {
        if n == 0 {
            return Err(DlatError::Malformed("empty element set".into()));
        }
        let mut down = vec![FixedBitSet::with_capacity(n); n];
        let mut up = vec![FixedBitSet::with_capacity(n); n];
        for a in 0..n {
            for b in 0..n {
                if leq(a, b) {
                    down[b].insert(a);
                    up[a].insert(b);
                }
            }
        }
        for a in 0..n {
            if !down[a].contains(a) {
                return Err(DlatError::Invalid(Violation::NotReflexive(a)));
            }
        }
        for a in 0..n {
            for b in up[a].ones() {
                if b != a && up[b].contains(a) {
                    return Err(DlatError::Invalid(Violation::NotAntisymmetric(a.min(b), a.max(b))));
                }
                // transitivity: everything above b is above a
                if !up[b].is_subset(&up[a]) {
                    let c = up[b].difference(&up[a]).next().unwrap();
                    return Err(DlatError::Invalid(Violation::NotTransitive(a, b, c)));
                }
            }
        }
        let by_down: HashMap<&FixedBitSet, usize> = down.iter().enumerate().map(|(i, d)| (d, i)).collect();
        let by_up: HashMap<&FixedBitSet, usize> = up.iter().enumerate().map(|(i, d)| (d, i)).collect();
        let mut meet = vec![0u32; n * n];
        let mut join = vec![0u32; n * n];
        let mut scratch = FixedBitSet::with_capacity(n);
        for a in 0..n {
            for b in a..n {
                scratch.clone_from(&down[a]);
                scratch.intersect_with(&down[b]);
                let m = *by_down
                    .get(&scratch)
                    .ok_or(DlatError::Invalid(Violation::NoMeet(a, b)))?;
                scratch.clone_from(&up[a]);
                scratch.intersect_with(&up[b]);
                let j = *by_up
                    .get(&scratch)
                    .ok_or(DlatError::Invalid(Violation::NoJoin(a, b)))?;
                meet[a * n + b] = m as u32;
                meet[b * n + a] = m as u32;
                join[a * n + b] = j as u32;
                join[b * n + a] = j as u32;
            }
        }
        let bot = (0..n)
            .find(|&b| up[b].count_ones(..) == n)
            .ok_or(DlatError::Invalid(Violation::NoBottom))?;
        let top = (0..n)
            .find(|&t| down[t].count_ones(..) == n)
            .ok_or(DlatError::Invalid(Violation::NoTop))?;
        let l = FinDistLattice { n, down, meet, join, bot, top };
        if let Some((a, b, c)) = l.first_distributivity_failure() {
            return Err(DlatError::Invalid(Violation::Distributivity(a, b, c)));
        }
        Ok(l)
    }

    /// Builds a lattice from covering pairs `(lower, upper)`.
    pub fn from_covers(n: usize, covers: &[(usize, usize)]) -> Result<Self, DlatError> {
        if let Some(&(a, b)) = covers.iter().find(|&&(a, b)| a >= n || b >= n) {
            return Err(DlatError::Malformed(format!("cover {a} < {b} out of range 0..{n}")));
        }
        let mut le = vec![FixedBitSet::with_capacity(n); n];
        for (a, row) in le.iter_mut().enumerate() {
            row.insert(a);
        }
        for &(a, b) in covers {
            le[a].insert(b);
        }
        // Warshall closure
        for k in 0..n {
            for i in 0..n {
                if le[i].contains(k) {
                    let row = le[k].clone();
                    le[i].union_with(&row);
                }
            }
        }
        Self::from_leq(n, |a, b| le[a].contains(b))
    }

    /// A chain `0 < 1 < ... < n-1`.
    pub fn chain(n: usize) -> Self {
        Self::from_leq(n, |a, b| a <= b).expect("chains are distributive")
    }

    /// The powerset of a `k`-element set, elements encoded as bitmasks.
    pub fn boolean(k: usize) -> Self {
        Self::from_leq(1 << k, |a, b| a & !b == 0).expect("powersets are distributive")
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.down[b].contains(a)
    }

    pub fn meet(&self, a: usize, b: usize) -> usize {
        self.meet[a * self.n + b] as usize
    }

    pub fn join(&self, a: usize, b: usize) -> usize {
        self.join[a * self.n + b] as usize
    }

    pub fn bot(&self) -> usize {
        self.bot
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn down_set(&self, a: usize) -> &FixedBitSet {
        &self.down[a]
    }

    pub fn meet_all(&self, xs: impl IntoIterator<Item = usize>) -> usize {
        xs.into_iter().fold(self.top, |m, x| self.meet(m, x))
    }

    pub fn join_all(&self, xs: impl IntoIterator<Item = usize>) -> usize {
        xs.into_iter().fold(self.bot, |m, x| self.join(m, x))
    }

    /// Heyting implication: the largest `c` with `c & a <= b`.
    pub fn implies(&self, a: usize, b: usize) -> usize {
        self.join_all((0..self.n).filter(|&c| self.leq(self.meet(c, a), b)))
    }

    /// Covering pairs `(lower, upper)` of the Hasse diagram, sorted.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for b in 0..self.n {
            for a in self.down[b].ones() {
                if a != b && !self.down[b].ones().any(|c| c != a && c != b && self.leq(a, c)) {
                    out.push((a, b));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// The lattice data this value was built from, for re-validation.
    pub fn to_data(&self) -> LatticeData {
        let n = self.n;
        LatticeData {
            n,
            leq: (0..n).map(|a| (0..n).map(|b| self.leq(a, b)).collect()).collect(),
            meet: Some((0..n).map(|a| (0..n).map(|b| self.meet(a, b)).collect()).collect()),
            join: Some((0..n).map(|a| (0..n).map(|b| self.join(a, b)).collect()).collect()),
        }
    }

    fn first_distributivity_failure(&self) -> Option<(usize, usize, usize)> {
        let n = self.n;
        for a in 0..n {
            for b in 0..n {
                for c in b + 1..n {
                    if self.meet(a, self.join(b, c)) != self.join(self.meet(a, b), self.meet(a, c)) {
                        return Some((a, b, c));
                    }
                }
            }
        }
        None
    }

    /// Relabels elements: element `i` of the result is element `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self::from_leq(self.n, |a, b| self.leq(perm[a], perm[b])).expect("relabelling preserves validity")
    }

    /// Whether `f` is a bounded lattice homomorphism from `self` to `other`.
    pub fn is_hom_to(&self, other: &FinDistLattice, f: &[usize]) -> bool {
        f.len() == self.n
            && f[self.bot] == other.bot
            && f[self.top] == other.top
            && (0..self.n).all(|a| {
                (0..self.n).all(|b| {
                    f[self.meet(a, b)] == other.meet(f[a], f[b]) && f[self.join(a, b)] == other.join(f[a], f[b])
                })
            })
    }
}
