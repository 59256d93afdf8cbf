use std::collections::HashMap;

use super::arena::{ExprId, Node};
use super::partition::{choice, EquivFamily};
use super::triple_label;
use crate::alternating::{Alternating, Formula, FormulaFactory, StateId, StateSet};
use crate::automata::Dbta;
use crate::error::Result;
use crate::transducer::{Mtt, ProcId};
use crate::trees::{RankedAlphabet, SymbolId};

/// Independent switches for the optimizations of the set-state inference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InferOptions {
    pub cartesian: bool,
    pub partition: bool,
    /// Only takes effect on syntactically total deterministic transducers.
    pub complement: bool,
}

impl Default for InferOptions {
    fn default() -> Self {
        InferOptions {
            cartesian: true,
            partition: true,
            complement: true,
        }
    }
}

impl InferOptions {
    pub fn none() -> Self {
        InferOptions {
            cartesian: false,
            partition: false,
            complement: false,
        }
    }

    /// All eight combinations, `none()` first and `default()` last.
    pub fn all_combinations() -> Vec<InferOptions> {
        (0..8)
            .map(|bits| InferOptions {
                cartesian: bits & 4 != 0,
                partition: bits & 2 != 0,
                complement: bits & 1 != 0,
            })
            .collect()
    }
}

/// A state `⟨p, q̄, q⃗⟩`: trees on which `p`, with parameters of types
/// `q⃗`, may produce a tree in some state of `q̄`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InfState {
    pub proc: ProcId,
    pub outs: StateSet,
    pub params: Vec<StateId>,
}

/// The set-state inferred automaton, built on demand from the initial
/// states `⟨p0, Q \ F⟩` where `F` are the accepting states of the output
/// type.
pub struct OptimizedInference {
    alphabet: RankedAlphabet,
    mtt: Mtt,
    out_names: Vec<String>,
    family: EquivFamily,
    nq: usize,
    rejecting: StateSet,
    options: InferOptions,
    complement_active: bool,
    factory: FormulaFactory,
    states: Vec<InfState>,
    index: HashMap<InfState, StateId>,
    cache: HashMap<(StateId, SymbolId), Formula>,
    computed: Vec<bool>,
    memo: HashMap<(ExprId, StateSet, Vec<StateId>), Formula>,
    initial: Option<Vec<StateId>>,
}

pub fn infer_optimized(m: &Mtt, out_type: &Dbta, options: InferOptions) -> Result<OptimizedInference> {
    OptimizedInference::new(m, out_type, options)
}

impl OptimizedInference {
    pub fn new(m: &Mtt, out_type: &Dbta, options: InferOptions) -> Result<Self> {
        let family = EquivFamily::new(m, out_type, options.cartesian)?;
        let nq = out_type.state_count();
        let rejecting = (0..nq)
            .filter(|&q| !out_type.is_final(q))
            .map(|q| q as StateId)
            .collect();
        Ok(OptimizedInference {
            alphabet: m.alphabet().clone(),
            mtt: m.clone(),
            out_names: (0..nq).map(|q| out_type.state_name(q).to_string()).collect(),
            family,
            nq,
            rejecting,
            options,
            complement_active: options.complement && m.is_total_deterministic_syntactic(),
            factory: FormulaFactory::default(),
            states: Vec::new(),
            index: HashMap::new(),
            cache: HashMap::new(),
            computed: Vec::new(),
            memo: HashMap::new(),
            initial: None,
        })
    }

    pub fn options(&self) -> InferOptions {
        self.options
    }

    /// Whether the complement rule is in use for this transducer.
    pub fn complement_active(&self) -> bool {
        self.complement_active
    }

    pub fn state(&self, x: StateId) -> &InfState {
        &self.states[x as usize]
    }

    /// Number of states discovered so far (materialized or not).
    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn state_id(&mut self, s: InfState) -> StateId {
        if let Some(&x) = self.index.get(&s) {
            return x;
        }
        let x = self.states.len() as StateId;
        self.states.push(s.clone());
        self.computed.push(false);
        self.index.insert(s, x);
        x
    }

    pub fn family(&mut self) -> &mut EquivFamily {
        &mut self.family
    }

    /// `Inf(e, q̄, q⃗)` for a rule body, exposed for tests.
    pub fn inf_body(&mut self, p: ProcId, a: SymbolId, k: usize, qbar: &StateSet, qs: &[StateId]) -> Formula {
        let e = self.family.arena.bodies(p, a)[k];
        self.inf(e, qbar, qs)
    }

    fn all_states(&self) -> StateSet {
        (0..self.nq as StateId).collect()
    }

    fn co(&self, qbar: &StateSet) -> StateSet {
        (0..self.nq as StateId).filter(|&q| !qbar.contains(q)).collect()
    }

    fn inf(&mut self, e: ExprId, qbar: &StateSet, qs: &[StateId]) -> Formula {
        if qbar.is_empty() {
            return self.factory.bottom();
        }
        let key = (e, qbar.clone(), qs.to_vec());
        if let Some(phi) = self.memo.get(&key) {
            return phi.clone();
        }
        let phi = if self.complement_active && 2 * qbar.len() > self.nq {
            let co = self.co(qbar);
            let inner = self.inf(e, &co, qs);
            self.factory.not(&inner)
        } else {
            self.inf_direct(e, qbar, qs)
        };
        self.memo.insert(key, phi.clone());
        phi
    }

    fn inf_direct(&mut self, e: ExprId, qbar: &StateSet, qs: &[StateId]) -> Formula {
        match self.family.arena.node(e).clone() {
            Node::Param(j) => self.factory.constant(qbar.contains(qs[j - 1])),
            Node::Cons(b, args) => {
                let comps = self.family.delta.cart(b, qbar);
                let mut parts = Vec::with_capacity(comps.len());
                for comp in comps.iter() {
                    let mut conj = Vec::with_capacity(args.len());
                    for (&arg, set) in args.iter().zip(comp) {
                        let f = self.inf(arg, set, qs);
                        let stop = f.is_false();
                        conj.push(f);
                        if stop {
                            break;
                        }
                    }
                    parts.push(self.factory.and_all(conj));
                }
                self.factory.or_all(parts)
            }
            Node::Call(p, h, args) => {
                let classes: Vec<Vec<StateSet>> = (1..=args.len())
                    .map(|j| {
                        if self.options.partition {
                            self.family.classes(p, qbar, j)
                        } else {
                            (0..self.nq as StateId).map(StateSet::singleton).collect()
                        }
                    })
                    .collect();
                if classes.iter().any(Vec::is_empty) {
                    return self.factory.bottom();
                }
                let mut parts = Vec::new();
                let mut pick = vec![0; args.len()];
                loop {
                    let mut conj = Vec::with_capacity(args.len() + 1);
                    let mut rep = Vec::with_capacity(args.len());
                    for (j, &arg) in args.iter().enumerate() {
                        let class = &classes[j][pick[j]];
                        rep.push(choice(class).expect("classes are nonempty"));
                        conj.push(self.inf(arg, class, qs));
                    }
                    if !conj.iter().any(Formula::is_false) {
                        let x = self.state_id(InfState {
                            proc: p,
                            outs: qbar.clone(),
                            params: rep,
                        });
                        conj.insert(0, self.factory.atom(h, x));
                        parts.push(self.factory.and_all(conj));
                    }
                    if !advance(&mut pick, &classes) {
                        break;
                    }
                }
                self.factory.or_all(parts)
            }
        }
    }

    fn label(&self, s: &InfState) -> String {
        let outs: Vec<&str> = s.outs.iter().map(|q| &*self.out_names[q as usize]).collect();
        let outs = format!("{{{}}}", outs.join(","));
        let params: Vec<&str> = s.params.iter().map(|&q| &*self.out_names[q as usize]).collect();
        triple_label(&self.mtt, s.proc, &outs, &params)
    }

    /// `Q` as a set, for callers building states by hand.
    pub fn output_states(&self) -> StateSet {
        self.all_states()
    }
}

/// Mixed-radix increment over class choices.
fn advance(pick: &mut [usize], classes: &[Vec<StateSet>]) -> bool {
    for j in (0..pick.len()).rev() {
        pick[j] += 1;
        if pick[j] < classes[j].len() {
            return true;
        }
        pick[j] = 0;
    }
    false
}

impl Alternating for OptimizedInference {
    fn alphabet(&self) -> &RankedAlphabet {
        &self.alphabet
    }

    fn initial_states(&mut self) -> Vec<StateId> {
        if let Some(init) = &self.initial {
            return init.clone();
        }
        let procs = self.mtt.initial().to_vec();
        let rejecting = self.rejecting.clone();
        let init: Vec<StateId> = procs
            .into_iter()
            .map(|p| {
                self.state_id(InfState {
                    proc: p,
                    outs: rejecting.clone(),
                    params: Vec::new(),
                })
            })
            .collect();
        self.initial = Some(init.clone());
        init
    }

    fn transition(&mut self, x: StateId, a: SymbolId) -> Formula {
        if let Some(phi) = self.cache.get(&(x, a)) {
            return phi.clone();
        }
        let s = self.states[x as usize].clone();
        let bodies = self.family.arena.bodies(s.proc, a).to_vec();
        let parts: Vec<Formula> = bodies
            .into_iter()
            .map(|e| self.inf(e, &s.outs, &s.params))
            .collect();
        let phi = self.factory.or_all(parts);
        self.computed[x as usize] = true;
        self.cache.insert((x, a), phi.clone());
        phi
    }

    fn state_label(&self, x: StateId) -> String {
        self.label(&self.states[x as usize])
    }

    fn materialized_states(&self) -> usize {
        self.computed.iter().filter(|&&c| c).count()
    }
}
