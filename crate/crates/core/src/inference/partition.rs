//! Cartesian factorization and the equivalence relations used to collapse
//! parameter types in calls.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::rc::Rc;

use super::arena::{Arena, ExprId, Node};
use crate::alternating::{StateId, StateSet};
use crate::automata::Dbta;
use crate::error::{Error, Result};
use crate::transducer::{Mtt, ProcId};
use crate::trees::SymbolId;

/// Covers `tuples` exactly by a union of Cartesian products of state sets.
///
/// Starts from singleton products and repeatedly merges products that
/// agree on every column but one.
pub fn cartesian_decompose(tuples: &[Vec<StateId>]) -> Vec<Vec<StateSet>> {
    let mut products: Vec<Vec<StateSet>> = tuples
        .iter()
        .map(|t| t.iter().map(|&q| StateSet::singleton(q)).collect())
        .collect();
    products.sort();
    products.dedup();
    let width = products.first().map_or(0, Vec::len);
    loop {
        let mut merged = false;
        for j in 0..width {
            let mut buckets: BTreeMap<Vec<StateSet>, StateSet> = BTreeMap::new();
            for p in &products {
                let mut rest = p.clone();
                let col = std::mem::take(&mut rest[j]);
                let slot = buckets.entry(rest).or_default();
                if !slot.is_empty() {
                    merged = true;
                }
                *slot = slot.union(&col);
            }
            products = buckets
                .into_iter()
                .map(|(mut rest, col)| {
                    rest[j] = col;
                    rest
                })
                .collect();
        }
        if !merged {
            break;
        }
    }
    products.sort();
    products
}

/// The representative of a class: its least state.
pub fn choice(class: &StateSet) -> Result<StateId> {
    class
        .iter()
        .next()
        .ok_or_else(|| Error::InvalidAutomaton("choice from an empty class".into()))
}

/// A partition of the output states `0..n`, stored as canonical class
/// labels (classes numbered by their least member).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition(Vec<u32>);

impl Partition {
    pub fn one_class(n: usize) -> Self {
        Partition(vec![0; n])
    }

    pub fn discrete(n: usize) -> Self {
        Partition((0..n as u32).collect())
    }

    /// `{q̄, Q \ q̄}`, dropping an empty side.
    pub fn split(n: usize, qbar: &StateSet) -> Self {
        Partition::canonical((0..n as StateId).map(|q| u32::from(qbar.contains(q))).collect())
    }

    fn canonical(raw: Vec<u32>) -> Self {
        let mut names = HashMap::new();
        Partition(
            raw.into_iter()
                .map(|c| {
                    let k = names.len() as u32;
                    *names.entry(c).or_insert(k)
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.0.iter().max().map_or(0, |&m| m as usize + 1)
    }

    /// The least upper bound: intersection of the relations.
    pub fn join(&self, other: &Partition) -> Partition {
        let width = other.class_count().max(1) as u32;
        Partition::canonical(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| a * width + b)
                .collect(),
        )
    }

    /// `self ⊑ other`: every class of `other` lies inside a class of `self`.
    pub fn coarser_or_equal(&self, other: &Partition) -> bool {
        self.join(other) == *other
    }

    pub fn same_class(&self, a: StateId, b: StateId) -> bool {
        self.0[a as usize] == self.0[b as usize]
    }

    /// Classes ordered by least member.
    pub fn classes(&self) -> Vec<StateSet> {
        let mut out: Vec<Vec<StateId>> = vec![Vec::new(); self.class_count()];
        for (q, &c) in self.0.iter().enumerate() {
            out[c as usize].push(q as StateId);
        }
        out.into_iter().map(|v| v.into_iter().collect()).collect()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.classes().iter().map(|c| c.to_string()).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Transitions of the output automaton grouped by symbol, with memoized
/// Cartesian decompositions of `Δ(q̄, b)`.
pub(crate) struct Delta {
    by_symbol: Vec<Vec<(Vec<StateId>, StateId)>>,
    cartesian: bool,
    memo: HashMap<(SymbolId, StateSet), Rc<Vec<Vec<StateSet>>>>,
}

impl Delta {
    pub(crate) fn new(out: &Dbta, cartesian: bool) -> Self {
        let mut by_symbol = vec![Vec::new(); out.alphabet().len()];
        for r in out.as_bta().rules() {
            by_symbol[r.symbol.index()].push((
                r.children.iter().map(|&q| q as StateId).collect(),
                r.target as StateId,
            ));
        }
        Delta {
            by_symbol,
            cartesian,
            memo: HashMap::new(),
        }
    }

    /// `Cart(Δ(q̄, b))`, or the singleton products when factorization is off.
    pub(crate) fn cart(&mut self, b: SymbolId, qbar: &StateSet) -> Rc<Vec<Vec<StateSet>>> {
        if let Some(r) = self.memo.get(&(b, qbar.clone())) {
            return r.clone();
        }
        let tuples: Vec<Vec<StateId>> = self.by_symbol[b.index()]
            .iter()
            .filter(|(_, q)| qbar.contains(*q))
            .map(|(kids, _)| kids.clone())
            .collect();
        let products = if self.cartesian {
            cartesian_decompose(&tuples)
        } else {
            let mut ps: Vec<Vec<StateSet>> = tuples
                .iter()
                .map(|t| t.iter().map(|&q| StateSet::singleton(q)).collect())
                .collect();
            ps.sort();
            ps
        };
        let r = Rc::new(products);
        self.memo.insert((b, qbar.clone()), r.clone());
        r
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Key {
    Proc(ProcId, StateSet),
    Node(ExprId, StateSet),
}

/// The relations `E⟨p, q̄, j⟩` (and `E[e, q̄, j]` for expression nodes),
/// computed on demand for the `(p, q̄)` pairs inference asks about.
///
/// Each entry holds one partition per parameter position, up to the
/// largest procedure arity; positions a node never mentions stay `{Q}`.
pub struct EquivFamily {
    pub(crate) arena: Arena,
    pub(crate) delta: Delta,
    n: usize,
    width: usize,
    values: HashMap<Key, Vec<Partition>>,
    settled: HashSet<Key>,
    rounds: usize,
}

impl EquivFamily {
    pub fn new(m: &Mtt, out: &Dbta, cartesian: bool) -> Result<Self> {
        if m.alphabet() != out.alphabet() {
            return Err(Error::AlphabetMismatch(format!(
                "transducer over {{{}}}, output type over {{{}}}",
                m.alphabet(),
                out.alphabet()
            )));
        }
        Ok(EquivFamily {
            arena: Arena::new(m),
            delta: Delta::new(out, cartesian),
            n: out.state_count(),
            width: m.max_arity(),
            values: HashMap::new(),
            settled: HashSet::new(),
            rounds: 0,
        })
    }

    /// `E⟨p, q̄, j⟩` for `j = 1..=arity(p)` (index `j - 1`).
    pub fn relations(&mut self, p: ProcId, qbar: &StateSet) -> Vec<Partition> {
        let key = Key::Proc(p, qbar.clone());
        if !self.settled.contains(&key) {
            self.solve(key.clone());
        }
        let arity = self.arena.arity(p);
        self.values[&key][..arity].to_vec()
    }

    /// Classes of `E⟨p, q̄, j⟩`, `j` 1-based.
    pub fn classes(&mut self, p: ProcId, qbar: &StateSet, j: usize) -> Vec<StateSet> {
        self.relations(p, qbar)[j - 1].classes()
    }

    /// Total number of Kleene rounds performed so far.
    pub fn rounds(&self) -> usize {
        self.rounds
    }

    fn bottom(&self) -> Vec<Partition> {
        vec![Partition::one_class(self.n); self.width]
    }

    /// Iterates `x ← x ⊔ f(x)` over the keys reachable from `root` until
    /// nothing changes. Keys settled by earlier calls depend only on
    /// settled keys, so they are skipped.
    fn solve(&mut self, root: Key) {
        if !self.values.contains_key(&root) {
            self.values.insert(root, self.bottom());
        }
        loop {
            self.rounds += 1;
            let live: Vec<Key> = self
                .values
                .keys()
                .filter(|k| !self.settled.contains(*k))
                .cloned()
                .collect();
            let mut discovered = Vec::new();
            let mut updates = Vec::new();
            for k in &live {
                let fx = self.f(k, &mut discovered);
                let old = &self.values[k];
                let new: Vec<Partition> = old.iter().zip(&fx).map(|(a, b)| a.join(b)).collect();
                if &new != old {
                    updates.push((k.clone(), new));
                }
            }
            let mut changed = !updates.is_empty();
            for (k, v) in updates {
                self.values.insert(k, v);
            }
            for k in discovered {
                if !self.values.contains_key(&k) {
                    self.values.insert(k, self.bottom());
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        self.settled.extend(self.values.keys().cloned());
    }

    fn get(&self, k: &Key, discovered: &mut Vec<Key>) -> Vec<Partition> {
        match self.values.get(k) {
            Some(v) => v.clone(),
            None => {
                discovered.push(k.clone());
                self.bottom()
            }
        }
    }

    fn f(&mut self, k: &Key, discovered: &mut Vec<Key>) -> Vec<Partition> {
        let mut acc = self.bottom();
        let join = |acc: &mut Vec<Partition>, v: &[Partition]| {
            for (a, b) in acc.iter_mut().zip(v) {
                *a = a.join(b);
            }
        };
        match k {
            Key::Proc(p, qbar) => {
                for &e in self.arena.proc_bodies(*p) {
                    let v = self.get(&Key::Node(e, qbar.clone()), discovered);
                    join(&mut acc, &v);
                }
            }
            Key::Node(e, qbar) => match self.arena.node(*e).clone() {
                Node::Param(j) => acc[j - 1] = Partition::split(self.n, qbar),
                Node::Cons(b, args) => {
                    let comps = self.delta.cart(b, qbar);
                    for comp in comps.iter() {
                        for (arg, set) in args.iter().zip(comp) {
                            let v = self.get(&Key::Node(*arg, set.clone()), discovered);
                            join(&mut acc, &v);
                        }
                    }
                }
                Node::Call(p, _, args) => {
                    let rel = self.get(&Key::Proc(p, qbar.clone()), discovered);
                    for (j, arg) in args.iter().enumerate() {
                        for class in rel[j].classes() {
                            let v = self.get(&Key::Node(*arg, class), discovered);
                            join(&mut acc, &v);
                        }
                    }
                }
            },
        }
        acc
    }
}

/// Computes the relations for the initial procedures against both the
/// accepting and the rejecting states of `out`; further entries are added
/// on demand.
pub fn compute_equiv_family(m: &Mtt, out: &Dbta) -> Result<EquivFamily> {
    let mut fam = EquivFamily::new(m, out, true)?;
    let finals: StateSet = out.finals().map(|q| q as StateId).collect();
    let rest: StateSet = (0..out.state_count() as StateId)
        .filter(|&q| !finals.contains(q))
        .collect();
    for &p in m.initial() {
        fam.relations(p, &finals);
        fam.relations(p, &rest);
    }
    Ok(fam)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::Bta;
    use proptest::prelude::*;

    fn set(xs: &[StateId]) -> StateSet {
        xs.iter().copied().collect()
    }

    fn expand(products: &[Vec<StateSet>]) -> Vec<Vec<StateId>> {
        let mut out = Vec::new();
        for p in products {
            let mut acc: Vec<Vec<StateId>> = vec![Vec::new()];
            for col in p {
                acc = acc
                    .into_iter()
                    .flat_map(|t| {
                        col.iter().map(move |q| {
                            let mut t = t.clone();
                            t.push(q);
                            t
                        })
                    })
                    .collect();
            }
            out.extend(acc);
        }
        out.sort();
        out
    }

    #[test]
    fn decomposition_examples() {
        assert_eq!(
            cartesian_decompose(&[vec![1, 2]]),
            vec![vec![set(&[1]), set(&[2])]]
        );
        let square = [vec![1, 3], vec![1, 4], vec![2, 3], vec![2, 4]];
        assert_eq!(
            cartesian_decompose(&square),
            vec![vec![set(&[1, 2]), set(&[3, 4])]]
        );
        assert!(cartesian_decompose(&[]).is_empty());
        assert_eq!(cartesian_decompose(&[vec![]]), vec![Vec::<StateSet>::new()]);
    }

    proptest! {
        #[test]
        fn decomposition_roundtrip(raw in proptest::collection::vec(proptest::collection::vec(0u32..4, 3), 0..20)) {
            let mut tuples = raw.clone();
            tuples.sort();
            tuples.dedup();
            let products = cartesian_decompose(&tuples);
            prop_assert!(products.len() <= tuples.len());
            prop_assert_eq!(expand(&products), tuples);
        }
    }

    #[test]
    fn choice_is_least() {
        assert_eq!(choice(&set(&[2])).unwrap(), 2);
        assert_eq!(choice(&set(&[1, 3])).unwrap(), 1);
        assert_eq!(choice(&set(&[1, 3])).unwrap(), choice(&set(&[1, 3])).unwrap());
        assert!(choice(&StateSet::new()).is_err());
    }

    #[test]
    fn partition_lattice() {
        let a = Partition::split(4, &set(&[0, 1]));
        let b = Partition::split(4, &set(&[1, 2]));
        let j = a.join(&b);
        assert_eq!(j.class_count(), 4);
        assert!(a.coarser_or_equal(&j));
        assert!(Partition::one_class(4).coarser_or_equal(&a));
        assert_eq!(Partition::split(3, &set(&[0, 1, 2])), Partition::one_class(3));
        assert_eq!(a.to_string(), "{{0,1}, {2,3}}");
    }

    fn three_states() -> Dbta {
        // Q = {0, 1, 2} over eps/0, a/1: eps ↦ 0, a cycles 0 → 1 → 2 → 0.
        let bta = Bta::parse(
            "alphabet: eps/0, a/1
             states: s0, s1, s2
             final: s0
             s0 <- eps
             s1 <- a(s0)
             s2 <- a(s1)
             s0 <- a(s2)",
        )
        .unwrap();
        Dbta::try_from(bta).unwrap()
    }

    #[test]
    fn equivalence_examples() {
        let out = three_states();
        let ignore = Mtt::parse(
            "alphabet: eps/0, a/1
             initial: p0
             p0(eps) -> eps
             p0(a(x1)) -> p(x1, eps)
             p(eps, y1) -> eps
             p(a(x1), y1) -> a(eps)",
        )
        .unwrap();
        let mut fam = EquivFamily::new(&ignore, &out, true).unwrap();
        let p = ignore.proc_id("p").unwrap();
        assert_eq!(fam.relations(p, &set(&[1])), vec![Partition::one_class(3)]);

        let copy = Mtt::parse(
            "alphabet: eps/0, a/1
             initial: p0
             p0(eps) -> eps
             p0(a(x1)) -> p(x1, eps)
             p(eps, y1) -> y1
             p(a(x1), y1) -> eps",
        )
        .unwrap();
        let mut fam = EquivFamily::new(&copy, &out, true).unwrap();
        let p = copy.proc_id("p").unwrap();
        let qbar = set(&[0, 2]);
        assert_eq!(fam.relations(p, &qbar), vec![Partition::split(3, &qbar)]);

        // y1 is returned directly and also under `a`, so it is observed
        // against q̄ and against the preimage of q̄ under `a`.
        let twice = Mtt::parse(
            "alphabet: eps/0, a/1
             initial: p0
             p0(eps) -> eps
             p0(a(x1)) -> p(x1, eps)
             p(eps, y1) -> y1
             p(a(x1), y1) -> a(y1)",
        )
        .unwrap();
        let mut fam = EquivFamily::new(&twice, &out, true).unwrap();
        let p = twice.proc_id("p").unwrap();
        let qbar = set(&[0]);
        let pre = set(&[2]);
        let expected = Partition::split(3, &qbar).join(&Partition::split(3, &pre));
        assert_eq!(fam.relations(p, &qbar), vec![expected]);
    }
}
