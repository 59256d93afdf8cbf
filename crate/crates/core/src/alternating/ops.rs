use std::collections::hash_map::Entry;
use std::collections::{HashMap, VecDeque};

use super::dnf::StateSet;
use super::formula::{Formula, FormulaFactory, Kind, StateId};
use super::{Alternating, Ata};
use crate::automata::{close_bottom_up, Bta, Dbta};
use crate::error::{Error, Result};
use crate::maxplus::{least_solution, Bound, Term};

/// A materialized copy of a (possibly lazy) automaton. `origin[x]` is the
/// id that dense state `x` had in the source automaton.
pub struct Materialized {
    pub ata: Ata,
    pub origin: Vec<StateId>,
    pub index: HashMap<StateId, StateId>,
}

/// Computes every transition of every state reachable from the initial
/// states, renumbering states densely in discovery order.
pub fn materialize<A: Alternating>(a: &mut A) -> Materialized {
    let alphabet = a.alphabet().clone();
    let mut index: HashMap<StateId, StateId> = HashMap::new();
    let mut origin: Vec<StateId> = Vec::new();
    let mut queue = VecDeque::new();
    let initial = a.initial_states();
    for &x in &initial {
        if let Entry::Vacant(e) = index.entry(x) {
            e.insert(origin.len() as StateId);
            origin.push(x);
            queue.push_back(x);
        }
    }
    let mut raw: Vec<Vec<Formula>> = Vec::new();
    while let Some(x) = queue.pop_front() {
        let mut row = Vec::with_capacity(alphabet.len());
        for sym in alphabet.ids() {
            let phi = a.transition(x, sym);
            for y in phi.states() {
                if let Entry::Vacant(e) = index.entry(y) {
                    e.insert(origin.len() as StateId);
                    origin.push(y);
                    queue.push_back(y);
                }
            }
            row.push(phi);
        }
        raw.push(row);
    }
    let mut f = FormulaFactory::default();
    let mut memo = HashMap::new();
    let table = raw
        .iter()
        .map(|row| {
            row.iter()
                .map(|phi| f.rename(phi, &mut memo, &mut |y| index[&y]))
                .collect()
        })
        .collect();
    let labels = origin.iter().map(|&x| a.state_label(x)).collect();
    let init = initial.iter().map(|x| index[x]).collect();
    let ata = Ata::new(alphabet, labels, init, table).expect("materialized automaton is well-formed");
    Materialized { ata, origin, index }
}

impl Ata {
    /// Restriction to the states reachable from the initial ones.
    pub fn trim(&self) -> Ata {
        materialize(&mut self.clone()).ata
    }
}

/// Powerset construction of an alternating automaton: `subsets[r]` is the
/// set of alternating states accepting the trees that reach `r`.
#[derive(Debug, Clone)]
pub struct AtaDeterminized {
    pub dbta: Dbta,
    pub subsets: Vec<StateSet>,
}

/// Bottom-up determinization over reachable subsets:
/// `r ← a(r⃗)` with `r = { X | r⃗ ⊨ Φ(X, a) }`; `r` final iff it meets the
/// initial states.
pub fn determinize_ata(a: &Ata) -> Result<AtaDeterminized> {
    determinize_ata_capped(a, usize::MAX)
}

pub fn determinize_ata_capped(a: &Ata, cap: usize) -> Result<AtaDeterminized> {
    if a.has_negation() {
        return Err(Error::NegationUnsupported);
    }
    let n = a.state_count() as StateId;
    let closure = close_bottom_up(a.alphabet(), Vec::new(), cap, &mut |sym, kids: &[&StateSet]| {
        (0..n)
            .filter(|&x| {
                a.phi(x, sym)
                    .eval(&mut |i, y| kids[i - 1].contains(y))
            })
            .collect::<StateSet>()
    })?;
    let names = closure
        .states
        .iter()
        .map(|s| {
            let parts: Vec<&str> = s.iter().map(|x| a.label(x)).collect();
            format!("{{{}}}", parts.join(","))
        })
        .collect();
    let init: StateSet = a.initial().iter().copied().collect();
    let finals: Vec<usize> = closure
        .states
        .iter()
        .enumerate()
        .filter(|(_, s)| s.intersects(&init))
        .map(|(i, _)| i)
        .collect();
    let bta = Bta::new(a.alphabet().clone(), names, finals, closure.rules)?;
    let dbta = Dbta::try_from(bta)?;
    Ok(AtaDeterminized {
        dbta,
        subsets: closure.states,
    })
}

/// Eliminates negated atoms by adding a dual state `~X` (id `n + X`) for
/// every state `X`, with `Φ(~X, a)` the De Morgan dual of `Φ(X, a)`.
/// Original states keep their ids and languages.
pub fn push_negation(a: &Ata) -> Ata {
    let n = a.state_count() as StateId;
    let mut f = FormulaFactory::default();
    let mut memo = HashMap::new();
    let mut positive = |f: &mut FormulaFactory, phi: &Formula| {
        f.map_atoms(phi, &mut memo, &mut |f, i, x, neg| {
            f.atom(i, if neg { n + x } else { x })
        })
    };
    let mut table = Vec::with_capacity(2 * n as usize);
    for x in 0..n {
        let row = a
            .alphabet()
            .ids()
            .map(|sym| positive(&mut f, a.phi(x, sym)))
            .collect();
        table.push(row);
    }
    for x in 0..n {
        let row = a
            .alphabet()
            .ids()
            .map(|sym| {
                let dual = f.not(a.phi(x, sym));
                positive(&mut f, &dual)
            })
            .collect();
        table.push(row);
    }
    let labels = (0..n)
        .map(|x| a.label(x).to_string())
        .chain((0..n).map(|x| format!("~{}", a.label(x))))
        .collect();
    Ata::new(a.alphabet().clone(), labels, a.initial().to_vec(), table)
        .expect("dual automaton is well-formed")
}

/// Maximal traversal numbers `b[X]`.
#[derive(Debug, Clone)]
pub struct TraversalBounds {
    pub per_state: Vec<Bound>,
    /// Maximum over the initial states (`Finite(0)` when there are none).
    pub initial: Bound,
}

impl TraversalBounds {
    /// `Σ_{X ∈ xs} b[X]`.
    pub fn weight(&self, xs: &StateSet) -> Bound {
        xs.iter()
            .fold(Bound::Finite(0), |acc, x| acc + self.per_state[x as usize])
    }

    pub fn is_bounded_by(&self, b: u64) -> bool {
        self.initial <= Bound::Finite(b)
    }
}

/// Least solution of `b[X] ≥ b_i[Φ(X, a)]` over `{1 < 2 < ... < ∞}`.
/// Negated atoms are counted like positive ones.
pub fn traversal_bounds(a: &Ata) -> TraversalBounds {
    let n = a.state_count();
    let mut constraints = Vec::new();
    for x in 0..n as StateId {
        for (sym, _, arity) in a.alphabet().iter() {
            let phi = a.phi(x, sym);
            if phi.is_true() || phi.is_false() {
                continue;
            }
            for i in 1..=arity {
                let mut memo = HashMap::new();
                constraints.push((x as usize, bound_term(phi, i, &mut memo)));
            }
        }
    }
    let per_state = least_solution(n, &constraints);
    let initial = a
        .initial()
        .iter()
        .map(|&x| per_state[x as usize])
        .max()
        .unwrap_or(Bound::Finite(0));
    TraversalBounds { per_state, initial }
}

fn bound_term(phi: &Formula, i: usize, memo: &mut HashMap<Formula, Term>) -> Term {
    if let Some(t) = memo.get(phi) {
        return t.clone();
    }
    let t = match phi.kind() {
        Kind::True | Kind::False => Term::Zero,
        Kind::And(l, r) => Term::Sum(vec![bound_term(l, i, memo), bound_term(r, i, memo)]),
        Kind::Or(l, r) => Term::Max(vec![bound_term(l, i, memo), bound_term(r, i, memo)]),
        Kind::Atom(h, x) | Kind::NegAtom(h, x) => {
            if *h == i {
                Term::Var(*x as usize)
            } else {
                Term::Zero
            }
        }
    };
    memo.insert(phi.clone(), t.clone());
    t
}
