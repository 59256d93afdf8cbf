use std::collections::HashMap;

use super::formula::{Formula, FormulaFactory, StateId};
use super::ops::materialize;
use super::{Alternating, Ata};
use crate::error::{Error, Result};
use crate::trees::{RankedAlphabet, SymbolId};

/// A state of an [`Intersection`]: a state of either operand, or a fresh
/// product state `Z(x, y)` used as initial state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProductState {
    Left(StateId),
    Right(StateId),
    Pair(StateId, StateId),
}

/// Lazy intersection of two alternating automata over the same alphabet.
pub struct Intersection<A, B> {
    left: A,
    right: B,
    factory: FormulaFactory,
    states: Vec<ProductState>,
    index: HashMap<ProductState, StateId>,
    memo_left: HashMap<Formula, Formula>,
    memo_right: HashMap<Formula, Formula>,
    cache: HashMap<(StateId, SymbolId), Formula>,
    computed: Vec<bool>,
    initial: Option<Vec<StateId>>,
}

impl<A: Alternating, B: Alternating> Intersection<A, B> {
    pub fn new(left: A, right: B) -> Result<Self> {
        if left.alphabet() != right.alphabet() {
            return Err(Error::AlphabetMismatch(format!(
                "{{{}}} vs {{{}}}",
                left.alphabet(),
                right.alphabet()
            )));
        }
        Ok(Intersection {
            left,
            right,
            factory: FormulaFactory::default(),
            states: Vec::new(),
            index: HashMap::new(),
            memo_left: HashMap::new(),
            memo_right: HashMap::new(),
            cache: HashMap::new(),
            computed: Vec::new(),
            initial: None,
        })
    }

    pub fn left(&mut self) -> &mut A {
        &mut self.left
    }

    pub fn right(&mut self) -> &mut B {
        &mut self.right
    }

    pub fn into_parts(self) -> (A, B) {
        (self.left, self.right)
    }

    pub fn state(&self, x: StateId) -> ProductState {
        self.states[x as usize]
    }

    pub fn id_of(&mut self, s: ProductState) -> StateId {
        if let Some(&id) = self.index.get(&s) {
            return id;
        }
        let id = self.states.len() as StateId;
        self.states.push(s);
        self.computed.push(false);
        self.index.insert(s, id);
        id
    }

    /// Rewrites a formula of one operand into product state ids.
    fn lift(&mut self, f: &Formula, left: bool) -> Formula {
        for x in f.states() {
            self.id_of(if left {
                ProductState::Left(x)
            } else {
                ProductState::Right(x)
            });
        }
        let mut memo = std::mem::take(if left {
            &mut self.memo_left
        } else {
            &mut self.memo_right
        });
        let index = &self.index;
        let g = self.factory.rename(f, &mut memo, &mut |x| {
            index[&if left {
                ProductState::Left(x)
            } else {
                ProductState::Right(x)
            }]
        });
        if left {
            self.memo_left = memo;
        } else {
            self.memo_right = memo;
        }
        g
    }
}

impl<A: Alternating, B: Alternating> Alternating for Intersection<A, B> {
    fn alphabet(&self) -> &RankedAlphabet {
        self.left.alphabet()
    }

    fn initial_states(&mut self) -> Vec<StateId> {
        if let Some(init) = &self.initial {
            return init.clone();
        }
        let ls = self.left.initial_states();
        let rs = self.right.initial_states();
        let mut init = Vec::new();
        for &x in &ls {
            for &y in &rs {
                init.push(self.id_of(ProductState::Pair(x, y)));
            }
        }
        self.initial = Some(init.clone());
        init
    }

    fn transition(&mut self, x: StateId, a: SymbolId) -> Formula {
        if let Some(f) = self.cache.get(&(x, a)) {
            return f.clone();
        }
        let f = match self.states[x as usize] {
            ProductState::Left(l) => {
                let phi = self.left.transition(l, a);
                self.lift(&phi, true)
            }
            ProductState::Right(r) => {
                let phi = self.right.transition(r, a);
                self.lift(&phi, false)
            }
            ProductState::Pair(l, r) => {
                let pl = self.left.transition(l, a);
                let pr = self.right.transition(r, a);
                let fl = self.lift(&pl, true);
                let fr = self.lift(&pr, false);
                self.factory.and(fl, fr)
            }
        };
        self.computed[x as usize] = true;
        self.cache.insert((x, a), f.clone());
        f
    }

    fn state_label(&self, x: StateId) -> String {
        match self.states[x as usize] {
            ProductState::Left(l) => format!("L:{}", self.left.state_label(l)),
            ProductState::Right(r) => format!("R:{}", self.right.state_label(r)),
            ProductState::Pair(l, r) => format!(
                "Z({},{})",
                self.left.state_label(l),
                self.right.state_label(r)
            ),
        }
    }

    fn materialized_states(&self) -> usize {
        self.computed.iter().filter(|&&c| c).count()
    }
}

/// Materialized intersection; `L(result) = L(a) ∩ L(b)`.
pub fn intersect(a: &Ata, b: &Ata) -> Result<Ata> {
    let mut i = Intersection::new(a.clone(), b.clone())?;
    Ok(materialize(&mut i).ata)
}
