//! Backward inference: from a transducer and an output automaton to an
//! alternating automaton for the preimage of the output language.

mod arena;
mod optimized;
mod partition;

use std::collections::HashMap;

use crate::alternating::{Ata, Formula, FormulaFactory, Simplify, StateId};
use crate::automata::{odometer, Bta, Dbta};
use crate::error::{Error, Result};
use crate::transducer::{Mtt, ProcId};
use crate::trees::SymbolId;
use arena::{Arena, ExprId, Node};

pub use optimized::{infer_optimized, InfState, InferOptions, OptimizedInference};
pub use partition::{cartesian_decompose, choice, compute_equiv_family, EquivFamily, Partition};

/// Largest state space the basic construction will allocate.
pub const BASIC_STATE_CAP: usize = 1 << 20;

/// Dense numbering of the basic states `⟨p, q, q⃗⟩`: procedures in order,
/// then `q`, then `q⃗` in lexicographic order.
#[derive(Debug, Clone)]
pub struct BasicLayout {
    nq: usize,
    offsets: Vec<usize>,
    arities: Vec<usize>,
    total: usize,
}

impl BasicLayout {
    pub fn new(m: &Mtt, nq: usize) -> Result<Self> {
        let mut offsets = Vec::with_capacity(m.proc_count());
        let mut total: usize = 0;
        let arities: Vec<usize> = (0..m.proc_count()).map(|p| m.proc_arity(p)).collect();
        for &k in &arities {
            offsets.push(total);
            let block = nq.checked_pow(k as u32 + 1);
            total = block
                .and_then(|b| total.checked_add(b))
                .filter(|&t| t <= BASIC_STATE_CAP)
                .ok_or(Error::CapExceeded {
                    what: "basic inference states".into(),
                    cap: BASIC_STATE_CAP,
                })?;
        }
        Ok(BasicLayout {
            nq,
            offsets,
            arities,
            total,
        })
    }

    pub fn state_count(&self) -> usize {
        self.total
    }

    pub fn id(&self, p: ProcId, q: usize, params: &[usize]) -> StateId {
        debug_assert_eq!(params.len(), self.arities[p]);
        let code = params.iter().fold(q, |acc, &x| acc * self.nq + x);
        (self.offsets[p] + code) as StateId
    }

    pub fn decode(&self, x: StateId) -> (ProcId, usize, Vec<usize>) {
        let x = x as usize;
        let p = self.offsets.partition_point(|&o| o <= x) - 1;
        let mut code = x - self.offsets[p];
        let k = self.arities[p];
        let mut params = vec![0; k];
        for slot in params.iter_mut().rev() {
            *slot = code % self.nq;
            code /= self.nq;
        }
        (p, code, params)
    }
}

/// `⟨p, q, q⃗⟩` rendered with procedure and state names.
pub(crate) fn triple_label(m: &Mtt, p: ProcId, q: &str, params: &[&str]) -> String {
    let mut s = format!("<{},{}", m.proc_name(p), q);
    for x in params {
        s.push(',');
        s.push_str(x);
    }
    s.push('>');
    s
}

/// The basic construction over every state `⟨p, q, q⃗⟩`, against the
/// complement of the output type given as a deterministic complete
/// automaton.
///
/// Formulas are built with [`Simplify::DnfPreserving`], so their DNFs are
/// exactly those of the defining equations.
pub fn infer_basic(m: &Mtt, out_complement: &Dbta) -> Result<Ata> {
    infer_basic_unchecked(m, out_complement.as_bta())
}

/// [`infer_basic`] without the determinism requirement. On a
/// nondeterministic automaton the result is generally wrong.
pub fn infer_basic_unchecked(m: &Mtt, out: &Bta) -> Result<Ata> {
    if m.alphabet() != out.alphabet() {
        return Err(Error::AlphabetMismatch(format!(
            "transducer over {{{}}}, output type over {{{}}}",
            m.alphabet(),
            out.alphabet()
        )));
    }
    let nq = out.state_count();
    let layout = BasicLayout::new(m, nq)?;
    let mut b = Basic {
        arena: Arena::new(m),
        layout: &layout,
        nq,
        f: FormulaFactory::new(Simplify::DnfPreserving),
        memo: HashMap::new(),
        by_target: HashMap::new(),
    };
    for r in out.rules() {
        b.by_target
            .entry((r.symbol, r.target))
            .or_default()
            .push(r.children.clone());
    }
    let mut table = Vec::with_capacity(layout.state_count());
    let mut labels = Vec::with_capacity(layout.state_count());
    for x in 0..layout.state_count() as StateId {
        let (p, q, params) = layout.decode(x);
        let row = m
            .alphabet()
            .ids()
            .map(|a| {
                let bodies = b.arena.bodies(p, a).to_vec();
                let parts: Vec<Formula> = bodies.iter().map(|&e| b.inf(e, q, &params)).collect();
                b.f.or_all(parts)
            })
            .collect();
        table.push(row);
        let names: Vec<&str> = params.iter().map(|&s| out.state_name(s)).collect();
        labels.push(triple_label(m, p, out.state_name(q), &names));
    }
    let initial = m
        .initial()
        .iter()
        .flat_map(|&p| out.finals().map(move |q| (p, q)))
        .map(|(p, q)| layout.id(p, q, &[]))
        .collect();
    Ata::new(m.alphabet().clone(), labels, initial, table)
}

struct Basic<'a> {
    arena: Arena,
    layout: &'a BasicLayout,
    nq: usize,
    f: FormulaFactory,
    memo: HashMap<(ExprId, usize, Vec<usize>), Formula>,
    by_target: HashMap<(SymbolId, usize), Vec<Vec<usize>>>,
}

impl Basic<'_> {
    fn inf(&mut self, e: ExprId, q: usize, qs: &[usize]) -> Formula {
        let key = (e, q, qs.to_vec());
        if let Some(phi) = self.memo.get(&key) {
            return phi.clone();
        }
        let phi = match self.arena.node(e).clone() {
            Node::Param(j) => self.f.constant(qs[j - 1] == q),
            Node::Cons(b, args) => {
                let tuples = self.by_target.get(&(b, q)).cloned().unwrap_or_default();
                let mut parts = Vec::with_capacity(tuples.len());
                for kids in tuples {
                    let conj: Vec<Formula> = args
                        .iter()
                        .zip(&kids)
                        .map(|(&arg, &qi)| self.inf(arg, qi, qs))
                        .collect();
                    parts.push(self.f.and_all(conj));
                }
                self.f.or_all(parts)
            }
            Node::Call(p, h, args) => {
                let mut parts = Vec::new();
                let mut tuple = vec![0; args.len()];
                loop {
                    let atom = self.f.atom(h, self.layout.id(p, q, &tuple));
                    let mut conj = vec![atom];
                    for (&arg, &qj) in args.iter().zip(&tuple) {
                        conj.push(self.inf(arg, qj, qs));
                    }
                    parts.push(self.f.and_all(conj));
                    if !odometer(&mut tuple, self.nq) {
                        break;
                    }
                }
                self.f.or_all(parts)
            }
        };
        self.memo.insert(key, phi.clone());
        phi
    }
}

#[cfg(test)]
mod tests;
