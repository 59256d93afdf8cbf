//! State sets and disjunctive normal forms.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use super::formula::{Formula, Kind, StateId};

/// A sorted, duplicate-free set of automaton states.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateSet(Vec<StateId>);

impl StateSet {
    pub fn new() -> Self {
        StateSet(Vec::new())
    }

    pub fn singleton(x: StateId) -> Self {
        StateSet(vec![x])
    }

    pub fn as_slice(&self) -> &[StateId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: StateId) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    pub fn insert(&mut self, x: StateId) -> bool {
        match self.0.binary_search(&x) {
            Ok(_) => false,
            Err(k) => {
                self.0.insert(k, x);
                true
            }
        }
    }

    pub fn with(&self, x: StateId) -> StateSet {
        let mut s = self.clone();
        s.insert(x);
        s
    }

    pub fn union(&self, other: &StateSet) -> StateSet {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        StateSet(out)
    }

    pub fn is_subset(&self, other: &StateSet) -> bool {
        let mut j = 0;
        let b = &other.0;
        for &x in &self.0 {
            while j < b.len() && b[j] < x {
                j += 1;
            }
            if j == b.len() || b[j] != x {
                return false;
            }
            j += 1;
        }
        true
    }

    pub fn intersects(&self, other: &StateSet) -> bool {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    pub fn iter(&self) -> impl Iterator<Item = StateId> + '_ {
        self.0.iter().copied()
    }
}

impl FromIterator<StateId> for StateSet {
    fn from_iter<I: IntoIterator<Item = StateId>>(iter: I) -> Self {
        let mut v: Vec<StateId> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        StateSet(v)
    }
}

impl From<BTreeSet<StateId>> for StateSet {
    fn from(s: BTreeSet<StateId>) -> Self {
        StateSet(s.into_iter().collect())
    }
}

impl fmt::Display for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str("}")
    }
}

/// `(X̄, Ȳ)`: the trees accepted by every state of `pos` and by no state of
/// `neg`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateSetPair {
    pub pos: StateSet,
    pub neg: StateSet,
}

impl StateSetPair {
    pub fn new(pos: StateSet, neg: StateSet) -> Self {
        StateSetPair { pos, neg }
    }

    pub fn positive(pos: StateSet) -> Self {
        StateSetPair {
            pos,
            neg: StateSet::new(),
        }
    }

    pub fn union(&self, other: &StateSetPair) -> StateSetPair {
        StateSetPair {
            pos: self.pos.union(&other.pos),
            neg: self.neg.union(&other.neg),
        }
    }

    /// `self` constrains at most as much as `other`: its denotation is a
    /// superset of `other`'s.
    pub fn is_subset(&self, other: &StateSetPair) -> bool {
        self.pos.is_subset(&other.pos) && self.neg.is_subset(&other.neg)
    }

    /// A state both required and forbidden.
    pub fn is_contradictory(&self) -> bool {
        self.pos.intersects(&self.neg)
    }

    pub fn is_trivial(&self) -> bool {
        self.pos.is_empty() && self.neg.is_empty()
    }
}

impl fmt::Display for StateSetPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.pos, self.neg)
    }
}

pub type DnfTuple = Vec<StateSetPair>;

/// The DNF of `phi` attached to an `arity`-ary symbol, as a sorted set of
/// tuples. Each tuple denotes the componentwise intersection.
pub fn dnf(phi: &Formula, arity: usize) -> Vec<DnfTuple> {
    let mut memo = HashMap::new();
    let set = dnf_rec(phi, arity, &mut memo);
    set.into_iter().collect()
}

fn dnf_rec(
    phi: &Formula,
    arity: usize,
    memo: &mut HashMap<Formula, BTreeSet<DnfTuple>>,
) -> BTreeSet<DnfTuple> {
    if let Some(s) = memo.get(phi) {
        return s.clone();
    }
    let empty_tuple = || vec![StateSetPair::default(); arity];
    let out: BTreeSet<DnfTuple> = match phi.kind() {
        Kind::True => BTreeSet::from([empty_tuple()]),
        Kind::False => BTreeSet::new(),
        Kind::Atom(i, x) | Kind::NegAtom(i, x) => {
            assert!(*i >= 1 && *i <= arity, "child index {i} exceeds arity {arity}");
            let mut t = empty_tuple();
            if matches!(phi.kind(), Kind::Atom(..)) {
                t[i - 1].pos.insert(*x);
            } else {
                t[i - 1].neg.insert(*x);
            }
            BTreeSet::from([t])
        }
        Kind::Or(a, b) => {
            let mut s = dnf_rec(a, arity, memo);
            s.extend(dnf_rec(b, arity, memo));
            s
        }
        Kind::And(a, b) => {
            let sa = dnf_rec(a, arity, memo);
            let sb = dnf_rec(b, arity, memo);
            let mut s = BTreeSet::new();
            for ta in &sa {
                for tb in &sb {
                    s.insert(ta.iter().zip(tb).map(|(x, y)| x.union(y)).collect());
                }
            }
            s
        }
    };
    memo.insert(phi.clone(), out.clone());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alternating::formula::FormulaFactory;

    fn pos(xs: &[StateId]) -> StateSetPair {
        StateSetPair::positive(xs.iter().copied().collect())
    }

    #[test]
    fn dnf_examples() {
        let mut f = FormulaFactory::default();
        assert_eq!(dnf(&f.top(), 2), vec![vec![pos(&[]), pos(&[])]]);
        assert!(dnf(&f.bottom(), 2).is_empty());
        let x = f.atom(1, 0);
        let y = f.atom(2, 1);
        let g = f.or(x, y);
        let d = dnf(&g, 2);
        assert_eq!(d.len(), 2);
        assert!(d.contains(&vec![pos(&[0]), pos(&[])]));
        assert!(d.contains(&vec![pos(&[]), pos(&[1])]));
    }

    #[test]
    fn dnf_conjunction_merges_components() {
        let mut f = FormulaFactory::default();
        let a = f.atom(1, 0);
        let b = f.atom(1, 1);
        let c = f.neg_atom(1, 2);
        let ab = f.or(a, b);
        let g = f.and(ab, c);
        let d = dnf(&g, 1);
        let neg2 = |p: &[StateId]| StateSetPair::new(p.iter().copied().collect(), StateSet::singleton(2));
        assert_eq!(d, vec![vec![neg2(&[0])], vec![neg2(&[1])]]);
    }

    #[test]
    fn set_operations() {
        let a: StateSet = [3, 1, 2, 1].into_iter().collect();
        assert_eq!(a.as_slice(), &[1, 2, 3]);
        let b: StateSet = [2, 5].into_iter().collect();
        assert_eq!(a.union(&b).as_slice(), &[1, 2, 3, 5]);
        assert!(a.intersects(&b));
        assert!(!a.is_subset(&b));
        assert!(StateSet::singleton(2).is_subset(&a));
        assert!(StateSet::new().is_subset(&a));
    }
}
