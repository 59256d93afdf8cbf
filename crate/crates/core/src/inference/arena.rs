//! Hash-consed rule bodies, so equal subexpressions share memo entries.

use std::collections::HashMap;

use crate::transducer::{Expr, Mtt, ProcId};
use crate::trees::SymbolId;

pub(crate) type ExprId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) enum Node {
    Cons(SymbolId, Vec<ExprId>),
    Call(ProcId, usize, Vec<ExprId>),
    Param(usize),
}

pub(crate) struct Arena {
    nodes: Vec<Node>,
    index: HashMap<Node, ExprId>,
    bodies: HashMap<(ProcId, SymbolId), Vec<ExprId>>,
    proc_bodies: Vec<Vec<ExprId>>,
    arities: Vec<usize>,
}

impl Arena {
    pub(crate) fn new(m: &Mtt) -> Self {
        let mut a = Arena {
            nodes: Vec::new(),
            index: HashMap::new(),
            bodies: HashMap::new(),
            proc_bodies: vec![Vec::new(); m.proc_count()],
            arities: (0..m.proc_count()).map(|p| m.proc_arity(p)).collect(),
        };
        for r in m.rules() {
            let id = a.intern(&r.body);
            a.bodies.entry((r.proc, r.symbol)).or_default().push(id);
            if !a.proc_bodies[r.proc].contains(&id) {
                a.proc_bodies[r.proc].push(id);
            }
        }
        a
    }

    fn intern(&mut self, e: &Expr) -> ExprId {
        let node = match e {
            Expr::Cons(b, args) => Node::Cons(*b, args.iter().map(|x| self.intern(x)).collect()),
            Expr::Call(p, h, args) => Node::Call(*p, *h, args.iter().map(|x| self.intern(x)).collect()),
            Expr::Param(j) => Node::Param(*j),
        };
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(node.clone());
        self.index.insert(node, id);
        id
    }

    pub(crate) fn node(&self, e: ExprId) -> &Node {
        &self.nodes[e]
    }

    pub(crate) fn bodies(&self, p: ProcId, a: SymbolId) -> &[ExprId] {
        self.bodies.get(&(p, a)).map_or(&[], Vec::as_slice)
    }

    /// Distinct bodies of `p` over all symbols.
    pub(crate) fn proc_bodies(&self, p: ProcId) -> &[ExprId] {
        &self.proc_bodies[p]
    }

    pub(crate) fn arity(&self, p: ProcId) -> usize {
        self.arities[p]
    }
}
