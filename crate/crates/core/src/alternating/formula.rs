//! Hash-consed Boolean formulas over child-state atoms.

use std::collections::hash_map::DefaultHasher;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

/// Identifier of an alternating-automaton state.
pub type StateId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Kind {
    True,
    False,
    And(Formula, Formula),
    Or(Formula, Formula),
    /// `↓i X`: child `i` (1-based) is accepted by `X`.
    Atom(usize, StateId),
    /// `¬↓i X`.
    NegAtom(usize, StateId),
}

#[derive(Debug)]
struct Node {
    kind: Kind,
    hash: u64,
}

/// An immutable formula. Equality is structural with a pointer fast path;
/// formulas built through one [`FormulaFactory`] share their nodes.
#[derive(Clone)]
pub struct Formula(Arc<Node>);

impl Formula {
    fn raw(kind: Kind) -> Formula {
        let mut h = DefaultHasher::new();
        match &kind {
            Kind::True => 0u8.hash(&mut h),
            Kind::False => 1u8.hash(&mut h),
            Kind::And(a, b) => {
                2u8.hash(&mut h);
                h.write_u64(a.0.hash);
                h.write_u64(b.0.hash);
            }
            Kind::Or(a, b) => {
                3u8.hash(&mut h);
                h.write_u64(a.0.hash);
                h.write_u64(b.0.hash);
            }
            Kind::Atom(i, x) => (4u8, i, x).hash(&mut h),
            Kind::NegAtom(i, x) => (5u8, i, x).hash(&mut h),
        }
        Formula(Arc::new(Node {
            hash: h.finish(),
            kind,
        }))
    }

    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    pub fn is_true(&self) -> bool {
        matches!(self.kind(), Kind::True)
    }

    pub fn is_false(&self) -> bool {
        matches!(self.kind(), Kind::False)
    }

    pub fn ptr_eq(&self, other: &Formula) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    /// Number of nodes, counting shared subformulas once per occurrence.
    pub fn size(&self) -> usize {
        match self.kind() {
            Kind::And(a, b) | Kind::Or(a, b) => 1 + a.size() + b.size(),
            _ => 1,
        }
    }

    pub fn has_negation(&self) -> bool {
        let mut found = false;
        self.visit_atoms(&mut |_, _, neg| found |= neg);
        found
    }

    /// Calls `f(i, X, negated)` for every atom occurrence, left to right.
    pub fn visit_atoms(&self, f: &mut dyn FnMut(usize, StateId, bool)) {
        match self.kind() {
            Kind::True | Kind::False => {}
            Kind::And(a, b) | Kind::Or(a, b) => {
                a.visit_atoms(f);
                b.visit_atoms(f);
            }
            Kind::Atom(i, x) => f(*i, *x, false),
            Kind::NegAtom(i, x) => f(*i, *x, true),
        }
    }

    pub fn states(&self) -> Vec<StateId> {
        let mut v = Vec::new();
        self.visit_atoms(&mut |_, x, _| v.push(x));
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn max_child_index(&self) -> usize {
        let mut m = 0;
        self.visit_atoms(&mut |i, _, _| m = m.max(i));
        m
    }

    /// Evaluates the formula given an oracle `holds(i, X)` for `↓i X`.
    pub fn eval(&self, holds: &mut dyn FnMut(usize, StateId) -> bool) -> bool {
        match self.kind() {
            Kind::True => true,
            Kind::False => false,
            Kind::And(a, b) => a.eval(holds) && b.eval(holds),
            Kind::Or(a, b) => a.eval(holds) || b.eval(holds),
            Kind::Atom(i, x) => holds(*i, *x),
            Kind::NegAtom(i, x) => !holds(*i, *x),
        }
    }

    pub fn display<'a>(&'a self, names: &'a dyn Fn(StateId) -> String) -> impl fmt::Display + 'a {
        Shown { f: self, names }
    }
}

struct Shown<'a> {
    f: &'a Formula,
    names: &'a dyn Fn(StateId) -> String,
}

impl<'a> fmt::Display for Shown<'a> {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sub = |g: &'a Formula| Shown { f: g, names: self.names };
        match self.f.kind() {
            Kind::True => out.write_str("T"),
            Kind::False => out.write_str("F"),
            Kind::And(a, b) => write!(out, "({} & {})", sub(a), sub(b)),
            Kind::Or(a, b) => write!(out, "({} | {})", sub(a), sub(b)),
            Kind::Atom(i, x) => write!(out, "d {i} {}", (self.names)(*x)),
            Kind::NegAtom(i, x) => write!(out, "~d {i} {}", (self.names)(*x)),
        }
    }
}

impl PartialEq for Formula {
    fn eq(&self, other: &Formula) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.hash == other.0.hash && self.0.kind == other.0.kind)
    }
}

impl Eq for Formula {}

impl Hash for Formula {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = |x: StateId| format!("#{x}");
        let shown = self.display(&names).to_string();
        f.write_str(&shown)
    }
}

/// Which algebraic simplifications the smart constructors apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Simplify {
    /// `⊤∧φ=φ`, `⊥∧φ=⊥`, `⊤∨φ=⊤`, `⊥∨φ=φ`, `φ∧φ=φ`, `φ∨φ=φ`.
    Full,
    /// Only rewrites that leave the DNF unchanged: `⊤∧φ=φ`, `⊥∧φ=⊥`,
    /// `⊥∨φ=φ`, `φ∨φ=φ`.
    DnfPreserving,
}

/// Interning constructor for formulas.
pub struct FormulaFactory {
    mode: Simplify,
    table: HashSet<Formula>,
    negations: HashMap<Formula, Formula>,
    top: Formula,
    bottom: Formula,
}

impl Default for FormulaFactory {
    fn default() -> Self {
        FormulaFactory::new(Simplify::Full)
    }
}

impl FormulaFactory {
    pub fn new(mode: Simplify) -> Self {
        let top = Formula::raw(Kind::True);
        let bottom = Formula::raw(Kind::False);
        let mut table = HashSet::new();
        table.insert(top.clone());
        table.insert(bottom.clone());
        FormulaFactory {
            mode,
            table,
            negations: HashMap::new(),
            top,
            bottom,
        }
    }

    pub fn mode(&self) -> Simplify {
        self.mode
    }

    fn intern(&mut self, kind: Kind) -> Formula {
        let f = Formula::raw(kind);
        if let Some(old) = self.table.get(&f) {
            return old.clone();
        }
        self.table.insert(f.clone());
        f
    }

    pub fn top(&self) -> Formula {
        self.top.clone()
    }

    pub fn bottom(&self) -> Formula {
        self.bottom.clone()
    }

    pub fn constant(&self, b: bool) -> Formula {
        if b {
            self.top()
        } else {
            self.bottom()
        }
    }

    pub fn atom(&mut self, child: usize, x: StateId) -> Formula {
        assert!(child >= 1, "child indices are 1-based");
        self.intern(Kind::Atom(child, x))
    }

    pub fn neg_atom(&mut self, child: usize, x: StateId) -> Formula {
        assert!(child >= 1, "child indices are 1-based");
        self.intern(Kind::NegAtom(child, x))
    }

    pub fn and(&mut self, a: Formula, b: Formula) -> Formula {
        if a.is_false() || b.is_false() {
            return self.bottom();
        }
        if a.is_true() {
            return b;
        }
        if b.is_true() {
            return a;
        }
        if self.mode == Simplify::Full && a == b {
            return a;
        }
        self.intern(Kind::And(a, b))
    }

    pub fn or(&mut self, a: Formula, b: Formula) -> Formula {
        if self.mode == Simplify::Full && (a.is_true() || b.is_true()) {
            return self.top();
        }
        if a.is_false() {
            return b;
        }
        if b.is_false() || a == b {
            return a;
        }
        self.intern(Kind::Or(a, b))
    }

    pub fn and_all(&mut self, fs: impl IntoIterator<Item = Formula>) -> Formula {
        let mut acc = self.top();
        for f in fs {
            acc = self.and(acc, f);
        }
        acc
    }

    pub fn or_all(&mut self, fs: impl IntoIterator<Item = Formula>) -> Formula {
        let mut acc = self.bottom();
        for f in fs {
            acc = self.or(acc, f);
        }
        acc
    }

    /// Negation pushed down to the atoms by De Morgan.
    pub fn not(&mut self, f: &Formula) -> Formula {
        if let Some(n) = self.negations.get(f) {
            return n.clone();
        }
        let n = match f.kind() {
            Kind::True => self.bottom(),
            Kind::False => self.top(),
            Kind::And(a, b) => {
                let (na, nb) = (self.not(a), self.not(b));
                self.or(na, nb)
            }
            Kind::Or(a, b) => {
                let (na, nb) = (self.not(a), self.not(b));
                self.and(na, nb)
            }
            Kind::Atom(i, x) => self.neg_atom(*i, *x),
            Kind::NegAtom(i, x) => self.atom(*i, *x),
        };
        self.negations.insert(f.clone(), n.clone());
        n
    }

    /// Rebuilds `f` in this factory, replacing every atom through `map`.
    pub fn map_atoms(
        &mut self,
        f: &Formula,
        memo: &mut HashMap<Formula, Formula>,
        map: &mut dyn FnMut(&mut FormulaFactory, usize, StateId, bool) -> Formula,
    ) -> Formula {
        if let Some(g) = memo.get(f) {
            return g.clone();
        }
        let g = match f.kind() {
            Kind::True => self.top(),
            Kind::False => self.bottom(),
            Kind::And(a, b) => {
                let a = self.map_atoms(a, memo, map);
                let b = self.map_atoms(b, memo, map);
                self.and(a, b)
            }
            Kind::Or(a, b) => {
                let a = self.map_atoms(a, memo, map);
                let b = self.map_atoms(b, memo, map);
                self.or(a, b)
            }
            Kind::Atom(i, x) => map(self, *i, *x, false),
            Kind::NegAtom(i, x) => map(self, *i, *x, true),
        };
        memo.insert(f.clone(), g.clone());
        g
    }

    /// Renames states, keeping polarity.
    pub fn rename(
        &mut self,
        f: &Formula,
        memo: &mut HashMap<Formula, Formula>,
        rename: &mut dyn FnMut(StateId) -> StateId,
    ) -> Formula {
        self.map_atoms(f, memo, &mut |fac, i, x, neg| {
            let y = rename(x);
            if neg {
                fac.neg_atom(i, y)
            } else {
                fac.atom(i, y)
            }
        })
    }

    /// Number of distinct interned formulas.
    pub fn interned(&self) -> usize {
        self.table.len()
    }
}
