//! Emptiness of alternating automata.
//!
//! [`check_empty`] explores state-set pairs top-down under emptiness
//! assumptions and builds a witness tree when it finds a nonempty one.
//! [`build_implications`] and [`solve_implications`] give the plain Horn
//! system over state sets, used to cross-check it.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::alternating::{
    dnf, Alternating, Ata, Formula, FormulaFactory, Kind, Membership, StateId, StateSet, StateSetPair,
};
use crate::error::{Error, Result};
use crate::trees::{RankedAlphabet, SymbolId, Tree};

/// Default cap on `2^|Ξ|` for [`build_implications`].
pub const IMPLICATION_CAP: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Empty,
    NonEmpty(Tree),
}

impl Verdict {
    pub fn is_empty(&self) -> bool {
        matches!(self, Verdict::Empty)
    }

    pub fn witness(&self) -> Option<&Tree> {
        match self {
            Verdict::Empty => None,
            Verdict::NonEmpty(t) => Some(t),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize)]
pub struct EmptinessStats {
    /// Calls to the pair-level test, shortcuts included.
    pub calls: usize,
    /// Pairs whose transitions were expanded.
    pub expanded: usize,
    pub assumed_empty_hits: usize,
    pub known_nonempty_hits: usize,
    pub contradictions: usize,
    pub witness_reuse: usize,
    pub backtracks: usize,
}

/// Runs the check from every root; `Empty` iff all roots denote `∅`.
pub fn check_empty<A: Alternating>(a: A, roots: &[StateSetPair]) -> Verdict {
    let mut c = EmptinessChecker::new(a);
    c.check_all(roots)
}

/// `check_empty` from `{X}` for every initial state `X`.
pub fn check_language_empty<A: Alternating>(mut a: A) -> Verdict {
    let roots: Vec<StateSetPair> = a
        .initial_states()
        .into_iter()
        .map(|x| StateSetPair::positive(StateSet::singleton(x)))
        .collect();
    check_empty(a, &roots)
}

/// The top-down emptiness test with its assumption sets.
///
/// `P` holds pairs assumed empty and is cut back on contradiction; `N`
/// holds pairs known to be nonempty together with a witness and only
/// grows.
pub struct EmptinessChecker<A> {
    member: Membership<A>,
    factory: FormulaFactory,
    symbols: Vec<(SymbolId, usize)>,
    leaf: Tree,
    positive: Vec<StateSetPair>,
    negative: Vec<(StateSetPair, Tree)>,
    negative_index: HashMap<StateSetPair, usize>,
    pair_formulas: HashMap<(StateSetPair, SymbolId), Formula>,
    explored: Option<Vec<StateSetPair>>,
    stats: EmptinessStats,
}

/// One component of the DNF accumulator: a pair and a tree in it.
#[derive(Clone)]
struct Slot {
    pair: StateSetPair,
    witness: Tree,
}

impl<A: Alternating> EmptinessChecker<A> {
    pub fn new(a: A) -> Self {
        let alphabet = a.alphabet().clone();
        let mut symbols: Vec<(SymbolId, usize)> = alphabet.iter().map(|(s, _, n)| (s, n)).collect();
        // Leaves first, so witnesses stay small.
        symbols.sort_by_key(|&(s, n)| (n, s));
        let leaf = Tree::leaf(alphabet.name(alphabet.eps()).clone());
        EmptinessChecker {
            member: Membership::new(a),
            factory: FormulaFactory::default(),
            symbols,
            leaf,
            positive: Vec::new(),
            negative: Vec::new(),
            negative_index: HashMap::new(),
            pair_formulas: HashMap::new(),
            explored: None,
            stats: EmptinessStats::default(),
        }
    }

    /// Keep every pair passed to the pair-level test.
    pub fn record_explored(&mut self) {
        self.explored.get_or_insert_with(Vec::new);
    }

    pub fn explored(&self) -> &[StateSetPair] {
        self.explored.as_deref().unwrap_or(&[])
    }

    pub fn stats(&self) -> &EmptinessStats {
        &self.stats
    }

    pub fn automaton(&mut self) -> &mut A {
        self.member.inner()
    }

    pub fn into_inner(self) -> A {
        self.member.into_inner()
    }

    pub fn check_all(&mut self, roots: &[StateSetPair]) -> Verdict {
        for r in roots {
            if let Some(t) = self.check(r) {
                return Verdict::NonEmpty(t);
            }
        }
        Verdict::Empty
    }

    /// `None` if the pair denotes `∅`, else a tree in it.
    pub fn check(&mut self, root: &StateSetPair) -> Option<Tree> {
        let r = self.empty(root);
        debug_assert!(r.is_some() || self.positive.iter().any(|p| p.is_subset(root)) || root.is_contradictory());
        r
    }

    fn empty(&mut self, pair: &StateSetPair) -> Option<Tree> {
        self.stats.calls += 1;
        if let Some(log) = &mut self.explored {
            log.push(pair.clone());
        }
        if pair.is_contradictory() {
            self.stats.contradictions += 1;
            return None;
        }
        if self.positive.iter().any(|p| p.is_subset(pair)) {
            self.stats.assumed_empty_hits += 1;
            return None;
        }
        if let Some(&i) = self.negative_index.get(pair) {
            self.stats.known_nonempty_hits += 1;
            return Some(self.negative[i].1.clone());
        }
        if let Some((_, w)) = self.negative.iter().find(|(n, _)| pair.is_subset(n)) {
            self.stats.known_nonempty_hits += 1;
            return Some(w.clone());
        }
        self.stats.expanded += 1;
        let saved = self.positive.len();
        self.positive.push(pair.clone());
        for k in 0..self.symbols.len() {
            let (a, n) = self.symbols[k];
            let phi = self.pair_formula(pair, a);
            let mut acc = vec![
                Slot {
                    pair: StateSetPair::default(),
                    witness: self.leaf.clone(),
                };
                n
            ];
            if let Some(kids) = self.empty_dnf(&mut vec![phi], &mut acc) {
                self.positive.truncate(saved);
                self.stats.backtracks += 1;
                let w = Tree::new(self.member.inner().alphabet().name(a).clone(), kids);
                debug_assert!(self.holds(pair, &w), "invalid witness {w} for {pair}");
                self.negative_index.insert(pair.clone(), self.negative.len());
                self.negative.push((pair.clone(), w.clone()));
                return Some(w);
            }
        }
        None
    }

    /// `⋀_{X ∈ X̄} Φ(X, a) ∧ ⋀_{Y ∈ Ȳ} ¬Φ(Y, a)`.
    fn pair_formula(&mut self, pair: &StateSetPair, a: SymbolId) -> Formula {
        let key = (pair.clone(), a);
        if let Some(phi) = self.pair_formulas.get(&key) {
            return phi.clone();
        }
        let mut parts = Vec::with_capacity(pair.pos.len() + pair.neg.len());
        for x in pair.pos.iter() {
            parts.push(self.member.inner().transition(x, a));
        }
        for y in pair.neg.iter() {
            let phi = self.member.inner().transition(y, a);
            parts.push(self.factory.not(&phi));
        }
        let phi = self.factory.and_all(parts);
        self.pair_formulas.insert(key, phi.clone());
        phi
    }

    /// Lazily enumerates the DNF of the conjunction of `todo` (its last
    /// element first), extending `acc`. Returns the children of a witness
    /// when some DNF term has only nonempty components.
    fn empty_dnf(&mut self, todo: &mut Vec<Formula>, acc: &mut [Slot]) -> Option<Vec<Tree>> {
        let Some(head) = todo.pop() else {
            return Some(acc.iter().map(|s| s.witness.clone()).collect());
        };
        let r = match head.kind() {
            Kind::True => self.empty_dnf(todo, acc),
            Kind::False => None,
            Kind::Or(l, r) => {
                todo.push(l.clone());
                let found = self.empty_dnf(todo, acc);
                todo.pop();
                if found.is_some() {
                    found
                } else {
                    todo.push(r.clone());
                    let found = self.empty_dnf(todo, acc);
                    todo.pop();
                    found
                }
            }
            Kind::And(l, r) => {
                todo.push(r.clone());
                todo.push(l.clone());
                let found = self.empty_dnf(todo, acc);
                todo.truncate(todo.len() - 2);
                found
            }
            &Kind::Atom(h, x) => self.extend(todo, acc, h, x, true),
            &Kind::NegAtom(h, y) => self.extend(todo, acc, h, y, false),
        };
        todo.push(head);
        r
    }

    fn extend(&mut self, todo: &mut Vec<Formula>, acc: &mut [Slot], h: usize, x: StateId, pos: bool) -> Option<Vec<Tree>> {
        let slot = &acc[h - 1];
        let already = if pos { slot.pair.pos.contains(x) } else { slot.pair.neg.contains(x) };
        if already {
            return self.empty_dnf(todo, acc);
        }
        let mut pair = slot.pair.clone();
        if pos {
            pair.pos.insert(x);
        } else {
            pair.neg.insert(x);
        }
        let old = slot.witness.clone();
        let witness = if self.member.accepts(x, &old) == pos && !pair.is_contradictory() {
            self.stats.witness_reuse += 1;
            old
        } else {
            self.empty(&pair)?
        };
        let saved = std::mem::replace(&mut acc[h - 1], Slot { pair, witness });
        let r = self.empty_dnf(todo, acc);
        acc[h - 1] = saved;
        r
    }

    fn holds(&mut self, pair: &StateSetPair, t: &Tree) -> bool {
        pair.pos.iter().all(|x| self.member.accepts(x, t)) && pair.neg.iter().all(|y| !self.member.accepts(y, t))
    }
}

/// Replaces subformulas that are trivially empty by `⊥` and those whose
/// negation is trivially empty by `⊤`, using the greatest fixpoint of the
/// syntactic sufficient conditions. Every state keeps its language.
pub fn preprocess(a: &Ata) -> Ata {
    let n = a.state_count();
    let syms: Vec<SymbolId> = a.alphabet().ids().collect();
    // Greatest fixpoint: start from "everything trivially empty / full".
    let mut empty = vec![true; n];
    let mut full = vec![true; n];
    loop {
        let mut changed = false;
        for x in 0..n {
            if empty[x] && !syms.iter().all(|&s| trivially(a.phi(x as StateId, s), false, &empty, &full)) {
                empty[x] = false;
                changed = true;
            }
            if full[x] && !syms.iter().all(|&s| trivially(a.phi(x as StateId, s), true, &empty, &full)) {
                full[x] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut f = FormulaFactory::default();
    let mut memo = HashMap::new();
    let table = (0..n)
        .map(|x| {
            syms.iter()
                .map(|&s| simplify(&mut f, a.phi(x as StateId, s), &empty, &full, &mut memo))
                .collect()
        })
        .collect();
    let labels = (0..n).map(|x| a.label(x as StateId).to_string()).collect();
    Ata::new(a.alphabet().clone(), labels, a.initial().to_vec(), table).expect("same shape as the input")
}

/// Sufficient condition for `phi` (or `¬phi` when `negated`) to be empty.
fn trivially(phi: &Formula, negated: bool, empty: &[bool], full: &[bool]) -> bool {
    match (phi.kind(), negated) {
        (Kind::True, false) | (Kind::False, true) => false,
        (Kind::True, true) | (Kind::False, false) => true,
        (Kind::And(l, r), false) | (Kind::Or(l, r), true) => {
            trivially(l, negated, empty, full) || trivially(r, negated, empty, full)
        }
        (Kind::Or(l, r), false) | (Kind::And(l, r), true) => {
            trivially(l, negated, empty, full) && trivially(r, negated, empty, full)
        }
        (&Kind::Atom(_, x), false) | (&Kind::NegAtom(_, x), true) => empty[x as usize],
        (&Kind::NegAtom(_, x), false) | (&Kind::Atom(_, x), true) => full[x as usize],
    }
}

fn simplify(
    f: &mut FormulaFactory,
    phi: &Formula,
    empty: &[bool],
    full: &[bool],
    memo: &mut HashMap<Formula, Formula>,
) -> Formula {
    if let Some(g) = memo.get(phi) {
        return g.clone();
    }
    let g = if trivially(phi, false, empty, full) {
        f.bottom()
    } else if trivially(phi, true, empty, full) {
        f.top()
    } else {
        match phi.kind() {
            Kind::True => f.top(),
            Kind::False => f.bottom(),
            Kind::And(l, r) => {
                let (l, r) = (simplify(f, l, empty, full, memo), simplify(f, r, empty, full, memo));
                f.and(l, r)
            }
            Kind::Or(l, r) => {
                let (l, r) = (simplify(f, l, empty, full, memo), simplify(f, r, empty, full, memo));
                f.or(l, r)
            }
            &Kind::Atom(i, x) => f.atom(i, x),
            &Kind::NegAtom(i, x) => f.neg_atom(i, x),
        }
    };
    memo.insert(phi.clone(), g.clone());
    g
}

/// `head ⇐ body_1 ∧ … ∧ body_n`, contributed by `symbol`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clause {
    pub head: StateSet,
    pub symbol: SymbolId,
    pub body: Vec<StateSet>,
}

/// A propositional Horn system over sets of states: `X̄` is derivable when
/// some clause for it has every body set derivable.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ImplicationSystem {
    clauses: BTreeSet<Clause>,
}

impl ImplicationSystem {
    pub fn new(clauses: impl IntoIterator<Item = Clause>) -> Self {
        ImplicationSystem {
            clauses: clauses.into_iter().collect(),
        }
    }

    pub fn clauses(&self) -> impl Iterator<Item = &Clause> + '_ {
        self.clauses.iter()
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn insert(&mut self, c: Clause) -> bool {
        self.clauses.insert(c)
    }

    pub fn remove(&mut self, c: &Clause) -> bool {
        self.clauses.remove(c)
    }

    /// Renames every state through `map`.
    pub fn rename(&self, map: &mut dyn FnMut(StateId) -> StateId) -> ImplicationSystem {
        let mut set = |s: &StateSet| -> StateSet { s.iter().map(&mut *map).collect() };
        let clauses = self
            .clauses
            .iter()
            .map(|c| Clause {
                head: set(&c.head),
                symbol: c.symbol,
                body: c.body.iter().map(&mut set).collect(),
            })
            .collect();
        ImplicationSystem { clauses }
    }

    /// The heads that occur in the system.
    pub fn heads(&self) -> BTreeSet<StateSet> {
        self.clauses.iter().map(|c| c.head.clone()).collect()
    }

    /// The part of the system reachable from `goals` through clause bodies.
    pub fn restrict_to(&self, goals: &BTreeSet<StateSet>) -> ImplicationSystem {
        let mut by_head: HashMap<&StateSet, Vec<&Clause>> = HashMap::new();
        for c in &self.clauses {
            by_head.entry(&c.head).or_default().push(c);
        }
        let mut seen: HashSet<&StateSet> = HashSet::new();
        let mut stack: Vec<&StateSet> = goals.iter().collect();
        let mut out = BTreeSet::new();
        while let Some(h) = stack.pop() {
            if !seen.insert(h) {
                continue;
            }
            for c in by_head.get(h).into_iter().flatten() {
                out.insert((*c).clone());
                stack.extend(c.body.iter());
            }
        }
        ImplicationSystem { clauses: out }
    }
}

impl fmt::Display for ImplicationSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            write!(f, "{} <= #{}(", c.head, c.symbol.0)?;
            for (i, b) in c.body.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{b}")?;
            }
            writeln!(f, ")")?;
        }
        Ok(())
    }
}

/// The full system over every subset of the states, including `∅`.
pub fn build_implications(a: &Ata) -> Result<ImplicationSystem> {
    build_implications_capped(a, IMPLICATION_CAP)
}

pub fn build_implications_capped(a: &Ata, cap: usize) -> Result<ImplicationSystem> {
    if a.has_negation() {
        return Err(Error::NegationUnsupported);
    }
    let n = a.state_count();
    let too_big = Error::CapExceeded {
        what: format!("2^{n} state sets"),
        cap,
    };
    if n >= usize::BITS as usize - 1 || 1usize << n > cap {
        return Err(too_big);
    }
    let mut clauses = BTreeSet::new();
    for mask in 0usize..1 << n {
        let head: StateSet = (0..n).filter(|&x| mask >> x & 1 == 1).map(|x| x as StateId).collect();
        add_clauses(a, &head, &mut clauses);
    }
    Ok(ImplicationSystem { clauses })
}

/// The clauses for state sets reachable from `goals`, without enumerating
/// all subsets. Derivability of the goals is the same as in the full
/// system.
pub fn build_implications_from(a: &Ata, goals: &BTreeSet<StateSet>, cap: usize) -> Result<ImplicationSystem> {
    if a.has_negation() {
        return Err(Error::NegationUnsupported);
    }
    let mut clauses = BTreeSet::new();
    let mut seen: HashSet<StateSet> = HashSet::new();
    let mut stack: Vec<StateSet> = goals.iter().cloned().collect();
    while let Some(head) = stack.pop() {
        if !seen.insert(head.clone()) {
            continue;
        }
        if seen.len() > cap {
            return Err(Error::CapExceeded {
                what: "reachable state sets".into(),
                cap,
            });
        }
        let mut new = BTreeSet::new();
        add_clauses(a, &head, &mut new);
        for c in &new {
            stack.extend(c.body.iter().filter(|b| !seen.contains(*b)).cloned());
        }
        clauses.extend(new);
    }
    Ok(ImplicationSystem { clauses })
}

/// One clause per way of picking a DNF tuple for every member of `head`.
/// Picks are combined without absorption, also when members share a
/// formula.
fn add_clauses(a: &Ata, head: &StateSet, out: &mut BTreeSet<Clause>) {
    for (sym, _, arity) in a.alphabet().iter() {
        let mut tuples: BTreeSet<Vec<StateSetPair>> = BTreeSet::from([vec![StateSetPair::default(); arity]]);
        for x in head.iter() {
            let choices = dnf(a.phi(x, sym), arity);
            tuples = tuples
                .iter()
                .flat_map(|t| {
                    choices
                        .iter()
                        .map(move |c| t.iter().zip(c).map(|(u, v)| u.union(v)).collect::<Vec<_>>())
                })
                .collect();
        }
        for tuple in tuples {
            out.insert(Clause {
                head: head.clone(),
                symbol: sym,
                body: tuple.into_iter().map(|p| p.pos).collect(),
            });
        }
    }
}

/// Least-model derivability: true iff some goal is derivable.
pub fn solve_implications(rho: &ImplicationSystem, goals: &BTreeSet<StateSet>) -> bool {
    derivable(rho).iter().any(|s| goals.contains(s))
}

/// All derivable state sets.
pub fn derivable(rho: &ImplicationSystem) -> HashSet<StateSet> {
    least_model(rho, |_, _| ()).into_keys().collect()
}

/// Derivable state sets, each with a tree in the intersection of its
/// states' languages, read off the first clause that fired for it.
pub fn derivation_witnesses(rho: &ImplicationSystem, alphabet: &RankedAlphabet) -> HashMap<StateSet, Tree> {
    least_model(rho, |c, kids| {
        Tree::new(alphabet.name(c.symbol).clone(), kids.into_iter().cloned().collect())
    })
}

fn least_model<W>(rho: &ImplicationSystem, mut fire: impl FnMut(&Clause, Vec<&W>) -> W) -> HashMap<StateSet, W> {
    let clauses: Vec<&Clause> = rho.clauses.iter().collect();
    let mut waiting: HashMap<&StateSet, Vec<usize>> = HashMap::new();
    let mut missing: Vec<usize> = Vec::with_capacity(clauses.len());
    let mut ready: Vec<usize> = Vec::new();
    for (i, c) in clauses.iter().enumerate() {
        let distinct: HashSet<&StateSet> = c.body.iter().collect();
        missing.push(distinct.len());
        for b in distinct {
            waiting.entry(b).or_default().push(i);
        }
        if c.body.is_empty() {
            ready.push(i);
        }
    }
    let mut done: HashMap<StateSet, W> = HashMap::new();
    while let Some(i) = ready.pop() {
        let c = clauses[i];
        if done.contains_key(&c.head) {
            continue;
        }
        let w = fire(c, c.body.iter().map(|b| &done[b]).collect());
        done.insert(c.head.clone(), w);
        for &k in waiting.get(&c.head).into_iter().flatten() {
            missing[k] -= 1;
            if missing[k] == 0 {
                ready.push(k);
            }
        }
    }
    done
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alternating::{bta_to_ata, push_negation};
    use crate::automata::Bta;
    use crate::oracle::random_ata;
    use crate::trees::{enumerate_trees, RankedAlphabet};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn b_ata() -> Ata {
        bta_to_ata(
            &Bta::parse(
                "alphabet: eps/0, b/2
                 final: q0
                 q0 <- b(q1,q2)
                 q1 <- eps
                 q2 <- eps",
            )
            .unwrap(),
        )
    }

    fn set(xs: &[StateId]) -> StateSet {
        xs.iter().copied().collect()
    }

    fn goals(a: &Ata) -> BTreeSet<StateSet> {
        a.initial().iter().map(|&x| StateSet::singleton(x)).collect()
    }

    #[test]
    fn clause_examples() {
        let a = b_ata();
        let rho = build_implications(&a).unwrap();
        let b = a.alphabet().id("b").unwrap();
        let eps = a.alphabet().eps();
        assert!(rho.clauses().any(|c| c.head == set(&[0]) && c.symbol == b && c.body == [set(&[1]), set(&[2])]));
        assert!(rho.clauses().any(|c| c.head == set(&[1]) && c.symbol == eps && c.body.is_empty()));
        assert!(solve_implications(&rho, &goals(&a)));
        assert!(!solve_implications(&ImplicationSystem::default(), &goals(&a)));

        let dead = Ata::parse("alphabet: eps/0, a/1\ninitial: X\nstate X: eps(0) -> F").unwrap();
        let rho = build_implications(&dead).unwrap();
        assert!(!rho.clauses().any(|c| c.head == set(&[0])));
        let looping = Ata::parse("alphabet: eps/0, a/1\ninitial: X\nstate X: a(1) -> d 1 X").unwrap();
        assert_eq!(check_language_empty(looping), Verdict::Empty);
    }

    #[test]
    fn check_examples() {
        let leaf = bta_to_ata(&Bta::parse("final: q\nq <- eps").unwrap());
        assert_eq!(check_language_empty(leaf), Verdict::NonEmpty(Tree::eps()));
        let v = check_language_empty(b_ata());
        assert_eq!(v.witness().map(|t| t.to_string()).as_deref(), Some("b(eps,eps)"));
    }

    #[test]
    fn cap_is_enforced() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let al = RankedAlphabet::parse("eps/0, a/1").unwrap();
        let a = random_ata(&mut rng, &al, 5, false);
        assert!(matches!(build_implications_capped(&a, 16), Err(Error::CapExceeded { .. })));
        assert!(build_implications_capped(&a, 32).is_ok());
    }

    fn check_against_enumeration(a: &Ata, max_nodes: usize) {
        let al = a.alphabet().clone();
        let trees = enumerate_trees(&al, max_nodes);
        let mut mem = Membership::new(a.clone());
        let n = a.state_count() as StateId;
        let mut roots = Vec::new();
        for x in 0..n {
            roots.push(StateSetPair::positive(set(&[x])));
            for y in 0..n {
                roots.push(StateSetPair::new(set(&[x]), set(&[y])));
                if x < y {
                    roots.push(StateSetPair::positive(set(&[x, y])));
                }
            }
        }
        for root in roots {
            let verdict = check_empty(a.clone(), std::slice::from_ref(&root));
            let mut holds = |t: &Tree| {
                root.pos.iter().all(|x| mem.accepts(x, t)) && root.neg.iter().all(|y| !mem.accepts(y, t))
            };
            match verdict {
                Verdict::NonEmpty(w) => assert!(holds(&w), "{root}: bad witness {w}\n{a}"),
                Verdict::Empty => {
                    if let Some(t) = trees.iter().find(|t| holds(t)) {
                        panic!("{root} reported empty but contains {t}\n{a}");
                    }
                }
            }
        }
    }

    #[test]
    fn agrees_with_enumeration() {
        let al = RankedAlphabet::parse("eps/0, a/1, b/2").unwrap();
        for seed in 0..150 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_ata(&mut rng, &al, 3, seed % 2 == 1);
            check_against_enumeration(&a, 6);
        }
    }

    #[test]
    fn agrees_with_implications() {
        let al = RankedAlphabet::parse("eps/0, a/1, b/2").unwrap();
        for seed in 0..150 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_ata(&mut rng, &al, 4, seed % 2 == 1);
            let pushed = push_negation(&a);
            let rho = build_implications(&pushed).unwrap();
            let expect_nonempty = solve_implications(&rho, &goals(&pushed));
            let verdict = check_language_empty(a.clone());
            assert_eq!(!verdict.is_empty(), expect_nonempty, "seed {seed}\n{a}");
            let partial = build_implications_from(&pushed, &goals(&pushed), IMPLICATION_CAP).unwrap();
            assert_eq!(solve_implications(&partial, &goals(&pushed)), expect_nonempty);
            assert_eq!(partial, rho.restrict_to(&goals(&pushed)));
            let witnesses = derivation_witnesses(&rho, &al);
            assert_eq!(witnesses.len(), derivable(&rho).len());
            let mut m = Membership::new(pushed.clone());
            for (set, t) in &witnesses {
                assert!(set.iter().all(|x| m.accepts(x, t)), "seed {seed}: {t} for {set:?}");
            }
        }
    }

    #[test]
    fn preprocessing_keeps_languages() {
        let al = RankedAlphabet::parse("eps/0, a/1, b/2").unwrap();
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_ata(&mut rng, &al, 4, seed % 2 == 1);
            let p = preprocess(&a);
            let (mut ma, mut mp) = (Membership::new(a.clone()), Membership::new(p.clone()));
            for t in enumerate_trees(&al, 6) {
                for x in 0..a.state_count() as StateId {
                    assert_eq!(ma.accepts(x, &t), mp.accepts(x, &t), "seed {seed}, {t}");
                }
            }
        }
    }

    #[test]
    fn preprocessing_removes_dead_atoms() {
        let a = Ata::parse(
            "alphabet: eps/0, a/1
             initial: X
             state X: eps(0) -> T
             state X: a(1) -> (d 1 D | (d 1 X & d 1 Y))
             state D: a(1) -> d 1 D
             state Y: a(1) -> d 1 X",
        )
        .unwrap();
        let id = |name: &str| (0..a.state_count() as StateId).find(|&x| a.label(x) == name).unwrap();
        let p = preprocess(&a);
        let sym = a.alphabet().id("a").unwrap();
        assert_eq!(p.phi(id("X"), sym).states(), vec![id("X"), id("Y")]);
        assert!(p.phi(id("D"), sym).is_false());
    }
}
