//! Two independent typecheckers used to validate the main pipeline: the
//! classical construction over functions from procedure/parameter-type
//! pairs to sets of output states, and specialization of the transducer
//! to the output automaton followed by a Horn system over procedures.

use std::collections::{BTreeSet, HashMap};

use crate::alternating::{AtaDeterminized, StateId, StateSet};
use crate::automata::{close_bottom_up, odometer, Bta, Dbta, Rule};
use crate::emptiness::{Clause, ImplicationSystem};
use crate::error::{Error, Result};
use crate::inference::{triple_label, BasicLayout};
use crate::transducer::{Expr, Mtt, MttRule, ProcId};
use crate::trees::{SymbolId, Tree};

/// Default cap on reachable classical states.
pub const CLASSICAL_CAP: usize = 1 << 16;

/// Dense numbering of the pairs `⟨p, q⃗⟩`.
#[derive(Debug, Clone)]
pub struct KeyLayout {
    nq: usize,
    offsets: Vec<usize>,
    total: usize,
}

impl KeyLayout {
    pub fn new(m: &Mtt, nq: usize) -> Result<Self> {
        let mut offsets = Vec::with_capacity(m.proc_count());
        let mut total = 0usize;
        for p in 0..m.proc_count() {
            offsets.push(total);
            total = nq
                .checked_pow(m.proc_arity(p) as u32)
                .and_then(|b| total.checked_add(b))
                .ok_or(Error::CapExceeded {
                    what: "procedure/parameter-type pairs".into(),
                    cap: usize::MAX,
                })?;
        }
        Ok(KeyLayout { nq, offsets, total })
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn key(&self, p: ProcId, params: &[usize]) -> usize {
        self.offsets[p] + params.iter().fold(0, |acc, &q| acc * self.nq + q)
    }
}

/// A state `d` of the classical automaton: `d[key(p, q⃗)]` is the set of
/// output states reachable by `p` with parameters of types `q⃗`.
pub type ClassicalState = Vec<BTreeSet<usize>>;

pub struct Classical {
    pub dbta: Dbta,
    pub states: Vec<ClassicalState>,
    pub keys: KeyLayout,
}

/// Builds the reachable part of the classical deterministic automaton for
/// `T⁻¹(L(out_complement))`.
pub fn classical_typecheck(m: &Mtt, out_complement: &Dbta) -> Result<Classical> {
    classical_typecheck_capped(m, out_complement, CLASSICAL_CAP)
}

pub fn classical_typecheck_capped(m: &Mtt, out_complement: &Dbta, cap: usize) -> Result<Classical> {
    if m.alphabet() != out_complement.alphabet() {
        return Err(Error::AlphabetMismatch("transducer and output type".into()));
    }
    let nq = out_complement.state_count();
    let keys = KeyLayout::new(m, nq)?;
    let mut rules_of: HashMap<(ProcId, SymbolId), Vec<&Expr>> = HashMap::new();
    for r in m.rules() {
        rules_of.entry((r.proc, r.symbol)).or_default().push(&r.body);
    }
    let delta = out_complement.as_bta();
    let closure = close_bottom_up(m.alphabet(), Vec::new(), cap, &mut |sym, kids: &[&ClassicalState]| {
        let mut d = vec![BTreeSet::new(); keys.len()];
        for p in 0..m.proc_count() {
            let mut qs = vec![0; m.proc_arity(p)];
            loop {
                let slot = &mut d[keys.key(p, &qs)];
                for e in rules_of.get(&(p, sym)).into_iter().flatten() {
                    slot.extend(dinf(e, kids, &qs, delta, &keys));
                }
                if !odometer(&mut qs, nq) {
                    break;
                }
            }
        }
        d
    })?;
    let names: Vec<String> = (0..closure.states.len()).map(|i| format!("d{i}")).collect();
    let finals: Vec<usize> = closure
        .states
        .iter()
        .enumerate()
        .filter(|(_, d)| {
            m.initial()
                .iter()
                .any(|&p0| d[keys.key(p0, &[])].iter().any(|&q| out_complement.is_final(q)))
        })
        .map(|(i, _)| i)
        .collect();
    let bta = Bta::new(m.alphabet().clone(), names, finals, closure.rules)?;
    Ok(Classical {
        dbta: Dbta::try_from(bta)?,
        states: closure.states,
        keys,
    })
}

fn dinf(e: &Expr, kids: &[&ClassicalState], qs: &[usize], delta: &Bta, keys: &KeyLayout) -> BTreeSet<usize> {
    match e {
        Expr::Param(j) => BTreeSet::from([qs[j - 1]]),
        Expr::Cons(b, args) => {
            let sets: Vec<BTreeSet<usize>> = args.iter().map(|a| dinf(a, kids, qs, delta, keys)).collect();
            delta
                .rules_for(*b)
                .filter(|r| r.children.iter().zip(&sets).all(|(q, s)| s.contains(q)))
                .map(|r| r.target)
                .collect()
        }
        Expr::Call(p, h, args) => {
            let sets: Vec<Vec<usize>> = args
                .iter()
                .map(|a| dinf(a, kids, qs, delta, keys).into_iter().collect())
                .collect();
            let mut out = BTreeSet::new();
            if sets.iter().any(Vec::is_empty) {
                return out;
            }
            let mut pick = vec![0; sets.len()];
            loop {
                let tuple: Vec<usize> = pick.iter().zip(&sets).map(|(&i, s)| s[i]).collect();
                out.extend(kids[h - 1][keys.key(*p, &tuple)].iter().copied());
                let mut j = pick.len();
                loop {
                    if j == 0 {
                        return out;
                    }
                    j -= 1;
                    pick[j] += 1;
                    if pick[j] < sets[j].len() {
                        break;
                    }
                    pick[j] = 0;
                }
            }
        }
    }
}

/// `β(d) = {⟨p, q, q⃗⟩ | q ∈ d(⟨p, q⃗⟩)}` as a set of basic state ids.
pub fn beta(m: &Mtt, layout: &BasicLayout, keys: &KeyLayout, nq: usize, d: &ClassicalState) -> StateSet {
    let mut out = BTreeSet::new();
    for p in 0..m.proc_count() {
        let mut qs = vec![0; m.proc_arity(p)];
        loop {
            for &q in &d[keys.key(p, &qs)] {
                out.insert(layout.id(p, q, &qs));
            }
            if !odometer(&mut qs, nq) {
                break;
            }
        }
    }
    out.into()
}

/// Whether `β` is a bijection between the reachable states of the
/// classical automaton and of the determinized basic inference, preserving
/// final states and commuting with transitions.
pub fn beta_isomorphism_check(m: &Mtt, nq: usize, classical: &Classical, det: &AtaDeterminized) -> Result<bool> {
    let layout = BasicLayout::new(m, nq)?;
    if classical.states.len() != det.subsets.len() {
        return Ok(false);
    }
    let index: HashMap<&StateSet, usize> = det.subsets.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let mut map = Vec::with_capacity(classical.states.len());
    for d in &classical.states {
        match index.get(&beta(m, &layout, &classical.keys, nq, d)) {
            Some(&r) => map.push(r),
            None => return Ok(false),
        }
    }
    let distinct: BTreeSet<usize> = map.iter().copied().collect();
    if distinct.len() != map.len() {
        return Ok(false);
    }
    for (i, &r) in map.iter().enumerate() {
        if classical.dbta.is_final(i) != det.dbta.is_final(r) {
            return Ok(false);
        }
    }
    for rule in classical.dbta.as_bta().rules() {
        let kids: Vec<usize> = rule.children.iter().map(|&c| map[c]).collect();
        if det.dbta.step(rule.symbol, &kids) != map[rule.target] {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The transducer specialized to output states: procedure `⟨p, q, q⃗⟩`
/// produces the outputs of `p` that lie in state `q` when its parameters
/// have types `q⃗`. Procedure ids follow [`BasicLayout`].
pub struct SpecializedMtt {
    pub mtt: Mtt,
    pub layout: BasicLayout,
}

/// Specializes `m` (whose input type should already be encoded) to the
/// deterministic automaton `out_complement`.
///
/// A parameter `y_i` is kept only when the requested state is its type
/// `q_i`; otherwise the specialized expression has no instance.
pub fn mps_specialize(m: &Mtt, out_complement: &Dbta) -> Result<SpecializedMtt> {
    if m.alphabet() != out_complement.alphabet() {
        return Err(Error::AlphabetMismatch("transducer and output type".into()));
    }
    let nq = out_complement.state_count();
    let layout = BasicLayout::new(m, nq)?;
    let delta = out_complement.as_bta();
    let mut by_target: HashMap<(SymbolId, usize), Vec<&Rule>> = HashMap::new();
    for r in delta.rules() {
        by_target.entry((r.symbol, r.target)).or_default().push(r);
    }
    let mut procs = Vec::with_capacity(layout.state_count());
    let mut rules = Vec::new();
    let mut memo = HashMap::new();
    for s in 0..layout.state_count() as StateId {
        let (p, q, qs) = layout.decode(s);
        let names: Vec<&str> = qs.iter().map(|&x| delta.state_name(x)).collect();
        procs.push((triple_label(m, p, delta.state_name(q), &names), qs.len()));
        for r in m.rules().iter().filter(|r| r.proc == p) {
            for body in spec(&r.body, q, &qs, nq, &layout, &by_target, &mut memo) {
                rules.push(MttRule {
                    proc: s as ProcId,
                    symbol: r.symbol,
                    body,
                });
            }
        }
    }
    let initial = m
        .initial()
        .iter()
        .flat_map(|&p0| out_complement.finals().map(move |q| (p0, q)))
        .map(|(p0, q)| layout.id(p0, q, &[]) as ProcId)
        .collect();
    Ok(SpecializedMtt {
        mtt: Mtt::new(m.alphabet().clone(), procs, initial, rules)?,
        layout,
    })
}

type SpecMemo = HashMap<(Expr, usize, Vec<usize>), Vec<Expr>>;

fn spec(
    e: &Expr,
    q: usize,
    qs: &[usize],
    nq: usize,
    layout: &BasicLayout,
    by_target: &HashMap<(SymbolId, usize), Vec<&Rule>>,
    memo: &mut SpecMemo,
) -> Vec<Expr> {
    let key = (e.clone(), q, qs.to_vec());
    if let Some(v) = memo.get(&key) {
        return v.clone();
    }
    let mut out: Vec<Expr> = Vec::new();
    let push = |x: Expr, out: &mut Vec<Expr>| {
        if !out.contains(&x) {
            out.push(x);
        }
    };
    match e {
        Expr::Param(i) => {
            if qs[i - 1] == q {
                out.push(e.clone());
            }
        }
        Expr::Cons(b, args) => {
            for r in by_target.get(&(*b, q)).into_iter().flatten() {
                let options: Vec<Vec<Expr>> = args
                    .iter()
                    .zip(&r.children)
                    .map(|(a, &qi)| spec(a, qi, qs, nq, layout, by_target, memo))
                    .collect();
                for args in product(&options) {
                    push(Expr::Cons(*b, args), &mut out);
                }
            }
        }
        Expr::Call(p, h, args) => {
            let mut tuple = vec![0; args.len()];
            loop {
                let options: Vec<Vec<Expr>> = args
                    .iter()
                    .zip(&tuple)
                    .map(|(a, &qi)| spec(a, qi, qs, nq, layout, by_target, memo))
                    .collect();
                let callee = layout.id(*p, q, &tuple) as ProcId;
                for args in product(&options) {
                    push(Expr::Call(callee, *h, args), &mut out);
                }
                if !odometer(&mut tuple, nq) {
                    break;
                }
            }
        }
    }
    memo.insert(key, out.clone());
    out
}

fn product(options: &[Vec<Expr>]) -> Vec<Vec<Expr>> {
    let mut out = vec![Vec::new()];
    for opts in options {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                opts.iter().map(move |o| {
                    let mut v = prefix.clone();
                    v.push(o.clone());
                    v
                })
            })
            .collect();
    }
    out
}

/// A Horn system together with its goals and the names of its states.
#[derive(Debug, Clone)]
pub struct LabeledSystem {
    pub system: ImplicationSystem,
    pub goals: BTreeSet<StateSet>,
    pub labels: Vec<String>,
}

/// The full system over all subsets of the specialized procedures.
pub fn mps_implications(u: &SpecializedMtt, cap: usize) -> Result<LabeledSystem> {
    let n = u.mtt.proc_count();
    if n >= usize::BITS as usize - 1 || 1usize << n > cap {
        return Err(Error::CapExceeded {
            what: format!("2^{n} procedure sets"),
            cap,
        });
    }
    let heads = (0usize..1 << n).map(|mask| (0..n).filter(|&s| mask >> s & 1 == 1).map(|s| s as StateId).collect());
    mps_system(u, heads, false, cap)
}

/// The clauses for the procedure sets reachable from the goals.
pub fn mps_implications_from(u: &SpecializedMtt, cap: usize) -> Result<LabeledSystem> {
    let goals: Vec<StateSet> = u.mtt.initial().iter().map(|&s| StateSet::singleton(s as StateId)).collect();
    mps_system(u, goals.into_iter(), true, cap)
}

/// Decides the domain of the specialized transducer bottom-up: each
/// reachable input shape gets the set of procedures with some output on
/// it. Returns an input on which an initial procedure has output, if any.
///
/// A procedure set is derivable in the system of
/// [`mps_implications_from`] iff it is contained in one of these sets, so
/// this gives the same verdict without enumerating clauses.
pub fn mps_domain_witness(u: &SpecializedMtt, cap: usize) -> Result<Option<Tree>> {
    let m = &u.mtt;
    let alphabet = m.alphabet();
    let calls: Vec<Vec<Vec<Vec<StateSet>>>> = (0..m.proc_count())
        .map(|s| {
            alphabet
                .iter()
                .map(|(sym, _, arity)| m.bodies(s, sym).map(|e| called(e, arity)).collect())
                .collect()
        })
        .collect();
    let closure = close_bottom_up(alphabet, Vec::new(), cap, &mut |sym, kids: &[&BTreeSet<usize>]| {
        (0..m.proc_count())
            .filter(|&s| {
                calls[s][sym.index()].iter().any(|body| {
                    body.iter()
                        .zip(kids)
                        .all(|(need, have)| need.iter().all(|x| have.contains(&(x as usize))))
                })
            })
            .collect::<BTreeSet<usize>>()
    })?;
    let names = (0..closure.states.len()).map(|i| format!("d{i}")).collect();
    let finals: Vec<usize> = closure
        .states
        .iter()
        .enumerate()
        .filter(|(_, d)| m.initial().iter().any(|p| d.contains(p)))
        .map(|(i, _)| i)
        .collect();
    Ok(Bta::new(alphabet.clone(), names, finals, closure.rules)?.witness())
}

fn mps_system(
    u: &SpecializedMtt,
    heads: impl Iterator<Item = StateSet>,
    follow: bool,
    cap: usize,
) -> Result<LabeledSystem> {
    let m = &u.mtt;
    let mut clauses = BTreeSet::new();
    let mut stack: Vec<StateSet> = heads.collect();
    let mut seen: BTreeSet<StateSet> = stack.iter().cloned().collect();
    let exceeded = |what: &str| Error::CapExceeded { what: what.into(), cap };
    while let Some(head) = stack.pop() {
        if seen.len() > cap {
            return Err(exceeded("reachable procedure sets"));
        }
        for (sym, _, arity) in m.alphabet().iter() {
            // One body per member; tuples are deduplicated as they grow.
            let mut tuples: BTreeSet<Vec<StateSet>> = BTreeSet::from([vec![StateSet::new(); arity]]);
            for s in head.iter() {
                let calls: Vec<Vec<StateSet>> = m.bodies(s as ProcId, sym).map(|e| called(e, arity)).collect();
                tuples = tuples
                    .iter()
                    .flat_map(|t| {
                        calls
                            .iter()
                            .map(move |c| t.iter().zip(c).map(|(x, y)| x.union(y)).collect::<Vec<StateSet>>())
                    })
                    .collect();
                if tuples.len() > cap {
                    return Err(exceeded("bodies of one clause head"));
                }
            }
            for body in tuples {
                if follow {
                    for b in &body {
                        if seen.insert(b.clone()) {
                            stack.push(b.clone());
                        }
                    }
                }
                clauses.insert(Clause {
                    head: head.clone(),
                    symbol: sym,
                    body,
                });
            }
            if clauses.len() > cap.saturating_mul(16) {
                return Err(exceeded("implication clauses"));
            }
        }
    }
    let goals = m.initial().iter().map(|&s| StateSet::singleton(s as StateId)).collect();
    let labels = (0..m.proc_count()).map(|s| m.proc_name(s).to_string()).collect();
    Ok(LabeledSystem {
        system: ImplicationSystem::new(clauses),
        goals,
        labels,
    })
}

/// Procedures called on each child `x_i` in `e`.
fn called(e: &Expr, arity: usize) -> Vec<StateSet> {
    let mut out = vec![BTreeSet::new(); arity];
    e.visit_calls(&mut |callee, h| {
        out[h - 1].insert(callee as StateId);
    });
    out.into_iter().map(StateSet::from).collect()
}

/// Equality of two systems after identifying equally labeled states.
pub fn compare_systems(rho: &LabeledSystem, rho_prime: &LabeledSystem) -> bool {
    let index: HashMap<&str, StateId> = rho
        .labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i as StateId))
        .collect();
    let mut missing = false;
    let mut rename = |s: StateId| match index.get(rho_prime.labels[s as usize].as_str()) {
        Some(&x) => x,
        None => {
            missing = true;
            StateId::MAX
        }
    };
    let renamed = rho_prime.system.rename(&mut rename);
    let goals: BTreeSet<StateSet> = rho_prime
        .goals
        .iter()
        .map(|g| g.iter().map(&mut rename).collect())
        .collect();
    !missing && renamed == rho.system && goals == rho.goals
}
