//! Text format: a `dlat <n>` header, then one covering pair `i < j` per line.
//! Blank lines and `#` comments are ignored.

use super::{DlatError, FinDistLattice};

pub fn parse_lattice(text: &str) -> Result<FinDistLattice, DlatError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (_, header) = lines.next().ok_or_else(|| DlatError::Malformed("missing `dlat <n>` header".into()))?;
    let n: usize = header
        .strip_prefix("dlat")
        .map(str::trim)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| DlatError::Malformed(format!("bad header `{header}`")))?;
    let mut covers = Vec::new();
    for (no, line) in lines {
        let (a, b) = line
            .split_once('<')
            .ok_or_else(|| DlatError::Malformed(format!("line {no}: expected `i < j`")))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| DlatError::Malformed(format!("line {no}: bad element `{}`", s.trim())))
        };
        covers.push((parse(a)?, parse(b)?));
    }
    FinDistLattice::from_covers(n, &covers)
}

pub fn print_lattice(l: &FinDistLattice) -> String {
    let mut s = format!("dlat {}\n", l.len());
    for (a, b) in l.covers() {
        s.push_str(&format!("{a} < {b}\n"));
    }
    s
}
