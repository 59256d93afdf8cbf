//! Least solutions of max-plus constraint systems over `{1 < 2 < ... < ∞}`.
//!
//! Shared by the traversal bounds of alternating automata and the copy
//! bounds of transducers. Divergence is decided exactly: a variable is
//! infinite iff it depends on a strongly connected component containing a
//! constraint whose right-hand side can add a same-component variable to
//! anything else.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bound {
    Finite(u64),
    Infinite,
}

impl Bound {
    pub fn is_finite(self) -> bool {
        matches!(self, Bound::Finite(_))
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Bound::Finite(n) => Some(n),
            Bound::Infinite => None,
        }
    }

}

impl std::ops::Add for Bound {
    type Output = Bound;

    fn add(self, other: Bound) -> Bound {
        match (self, other) {
            (Bound::Finite(a), Bound::Finite(b)) => Bound::Finite(a.saturating_add(b)),
            _ => Bound::Infinite,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Finite(n) => write!(f, "{n}"),
            Bound::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Term {
    Zero,
    Var(usize),
    Sum(Vec<Term>),
    Max(Vec<Term>),
}

impl Term {
    fn vars(&self, out: &mut Vec<usize>) {
        match self {
            Term::Zero => {}
            Term::Var(v) => out.push(*v),
            Term::Sum(ts) | Term::Max(ts) => ts.iter().for_each(|t| t.vars(out)),
        }
    }

    fn eval(&self, val: &[u64]) -> u64 {
        match self {
            Term::Zero => 0,
            Term::Var(v) => val[*v],
            Term::Sum(ts) => ts.iter().fold(0u64, |s, t| s.saturating_add(t.eval(val))),
            Term::Max(ts) => ts.iter().map(|t| t.eval(val)).max().unwrap_or(0),
        }
    }

    /// Achievable shapes of the sums this term expands to, as a bitmask:
    /// `ZERO` (no variable), `OUTER` (only variables of other components),
    /// `ONE` (exactly one variable, from the head's component) and `GROW`
    /// (a head-component variable plus at least one more variable).
    fn shapes(&self, comp: &[usize], head: usize) -> u8 {
        match self {
            Term::Zero => ZERO,
            Term::Var(v) => {
                if comp[*v] == head {
                    ONE
                } else {
                    OUTER
                }
            }
            Term::Max(ts) => ts.iter().fold(0, |m, t| m | t.shapes(comp, head)),
            Term::Sum(ts) => ts
                .iter()
                .fold(ZERO, |acc, t| sum_shapes(acc, t.shapes(comp, head))),
        }
    }
}

const ZERO: u8 = 1;
const OUTER: u8 = 2;
const ONE: u8 = 4;
const GROW: u8 = 8;

fn sum_shape(a: u8, b: u8) -> u8 {
    match (a, b) {
        (ZERO, x) | (x, ZERO) => x,
        (OUTER, OUTER) => OUTER,
        _ => GROW,
    }
}

fn sum_shapes(a: u8, b: u8) -> u8 {
    let mut out = 0;
    for x in [ZERO, OUTER, ONE, GROW] {
        if a & x == 0 {
            continue;
        }
        for y in [ZERO, OUTER, ONE, GROW] {
            if b & y != 0 {
                out |= sum_shape(x, y);
            }
        }
    }
    out
}

/// Least solution of `x[h] ≥ term` for every `(h, term)`, all variables at
/// least 1.
pub(crate) fn least_solution(n: usize, constraints: &[(usize, Term)]) -> Vec<Bound> {
    let mut succ = vec![Vec::new(); n];
    for (h, t) in constraints {
        let mut vs = Vec::new();
        t.vars(&mut vs);
        succ[*h].extend(vs);
    }
    for s in succ.iter_mut() {
        s.sort_unstable();
        s.dedup();
    }
    let comp = components(&succ);
    let ncomp = comp.iter().copied().max().map_or(0, |m| m + 1);
    let mut growing = vec![false; ncomp];
    for (h, t) in constraints {
        if t.shapes(&comp, comp[*h]) & GROW != 0 {
            growing[comp[*h]] = true;
        }
    }
    let mut infinite: Vec<bool> = (0..n).map(|v| growing[comp[v]]).collect();
    let mut pred = vec![Vec::new(); n];
    for (h, s) in succ.iter().enumerate() {
        for &v in s {
            pred[v].push(h);
        }
    }
    let mut stack: Vec<usize> = (0..n).filter(|&v| infinite[v]).collect();
    while let Some(v) = stack.pop() {
        for &h in &pred[v] {
            if !infinite[h] {
                infinite[h] = true;
                stack.push(h);
            }
        }
    }
    let mut val = vec![1u64; n];
    loop {
        let mut changed = false;
        for (h, t) in constraints {
            if infinite[*h] {
                continue;
            }
            let e = t.eval(&val);
            if e > val[*h] {
                val[*h] = e;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    (0..n)
        .map(|v| {
            if infinite[v] {
                Bound::Infinite
            } else {
                Bound::Finite(val[v])
            }
        })
        .collect()
}

/// Strongly connected components (Kosaraju, iterative). Returns the
/// component index of every vertex.
fn components(succ: &[Vec<usize>]) -> Vec<usize> {
    let n = succ.len();
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut stack = vec![(s, 0usize)];
        while let Some((v, k)) = stack.pop() {
            if k < succ[v].len() {
                stack.push((v, k + 1));
                let w = succ[v][k];
                if !seen[w] {
                    seen[w] = true;
                    stack.push((w, 0));
                }
            } else {
                order.push(v);
            }
        }
    }
    let mut pred = vec![Vec::new(); n];
    for (v, s) in succ.iter().enumerate() {
        for &w in s {
            pred[w].push(v);
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut c = 0;
    for &s in order.iter().rev() {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = c;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &w in &pred[v] {
                if comp[w] == usize::MAX {
                    comp[w] = c;
                    stack.push(w);
                }
            }
        }
        c += 1;
    }
    comp
}
