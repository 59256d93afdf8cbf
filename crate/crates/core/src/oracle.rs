//! Brute-force ground truth at desk scale.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alternating::{Alternating, Ata, Formula, FormulaFactory, Membership, StateId};
use crate::automata::{odometer, Bta, Rule};
use crate::transducer::{Expr, Mtt, MttRule};
use crate::trees::{enumerate_trees, RankedAlphabet, SymbolId, Tree};

/// A random formula over `states` states for a symbol of arity `arity`.
pub fn random_formula(
    rng: &mut impl Rng,
    f: &mut FormulaFactory,
    arity: usize,
    states: usize,
    depth: u32,
    negation: bool,
) -> Formula {
    let leaf = depth == 0 || rng.gen_bool(0.3);
    if leaf {
        if arity == 0 || rng.gen_bool(0.15) {
            return f.constant(rng.gen_bool(0.5));
        }
        let i = rng.gen_range(1..=arity);
        let x = rng.gen_range(0..states) as StateId;
        return if negation && rng.gen_bool(0.3) {
            f.neg_atom(i, x)
        } else {
            f.atom(i, x)
        };
    }
    let a = random_formula(rng, f, arity, states, depth - 1, negation);
    let b = random_formula(rng, f, arity, states, depth - 1, negation);
    if rng.gen_bool(0.5) {
        f.and(a, b)
    } else {
        f.or(a, b)
    }
}

/// A random materialized automaton with `states` states and one or two
/// initial states.
pub fn random_ata(
    rng: &mut impl Rng,
    alphabet: &RankedAlphabet,
    states: usize,
    negation: bool,
) -> Ata {
    let mut f = FormulaFactory::default();
    let table = (0..states)
        .map(|_| {
            alphabet
                .iter()
                .map(|(_, _, arity)| random_formula(rng, &mut f, arity, states, 2, negation))
                .collect()
        })
        .collect();
    let labels = (0..states).map(|x| format!("X{x}")).collect();
    let mut initial = vec![rng.gen_range(0..states) as StateId];
    if rng.gen_bool(0.3) {
        initial.push(rng.gen_range(0..states) as StateId);
    }
    Ata::new(alphabet.clone(), labels, initial, table).expect("well-formed")
}

/// Bounds for [`oracle_typecheck`] and the random suites.
#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    pub max_nodes: usize,
    pub max_cases: usize,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            max_nodes: 7,
            max_cases: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleVerdict {
    NoCounterexampleUpTo(usize),
    Counterexample(Tree),
}

/// Smallest input (in enumeration order) from `L(in_type)` with an output
/// outside `L(out_type)`.
pub fn oracle_typecheck(m: &Mtt, in_type: &Bta, out_type: &Bta, cfg: &OracleConfig) -> OracleVerdict {
    for t in enumerate_trees(m.alphabet(), cfg.max_nodes) {
        if in_type.in_language(&t) && !m.evaluate(&t).iter().all(|u| out_type.in_language(u)) {
            return OracleVerdict::Counterexample(t);
        }
    }
    OracleVerdict::NoCounterexampleUpTo(cfg.max_nodes)
}

/// `T(t) ∩ L(out) ≠ ∅`.
pub fn in_preimage(m: &Mtt, t: &Tree, out: &Bta) -> bool {
    m.evaluate(t).iter().any(|u| out.in_language(u))
}

/// Compares the languages of two automata on all trees up to `max_nodes`
/// nodes; returns the first tree on which they differ.
pub fn language_equal_upto<A: Alternating, B: Alternating>(
    a: A,
    b: B,
    max_nodes: usize,
) -> std::result::Result<(), Tree> {
    let alphabet = a.alphabet().clone();
    let (mut ma, mut mb) = (Membership::new(a), Membership::new(b));
    for t in enumerate_trees(&alphabet, max_nodes) {
        if ma.in_language(&t) != mb.in_language(&t) {
            return Err(t);
        }
    }
    Ok(())
}

/// Size limits for [`random_instance`].
#[derive(Debug, Clone, Copy)]
pub struct InstanceLimits {
    /// Symbols besides `eps`.
    pub symbols: usize,
    pub states: usize,
    pub procedures: usize,
    pub params: usize,
}

impl Default for InstanceLimits {
    fn default() -> Self {
        InstanceLimits {
            symbols: 2,
            states: 3,
            procedures: 3,
            params: 1,
        }
    }
}

/// A transducer with input and output types over one alphabet.
#[derive(Debug, Clone)]
pub struct Instance {
    pub mtt: Mtt,
    pub in_type: Bta,
    pub out_type: Bta,
}

/// Deterministic pseudo-random instance. About half the transducers are
/// total and deterministic; most output types are deterministic complete.
pub fn random_instance(seed: u64, limits: &InstanceLimits) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = [("a", 1), ("b", 2), ("c", 0)];
    let mut syms: Vec<(&str, usize)> = Vec::new();
    let want = rng.gen_range(1..=limits.symbols.clamp(1, pool.len()));
    let mut order: Vec<usize> = (0..pool.len()).collect();
    for i in 0..order.len() {
        let j = rng.gen_range(i..order.len());
        order.swap(i, j);
    }
    // Keep at least one symbol of positive arity.
    if pool[order[0]].1 == 0 {
        order.swap(0, 1);
    }
    syms.extend(order.iter().take(want).map(|&k| pool[k]));
    let alphabet = RankedAlphabet::new(syms).expect("valid alphabet");

    let nprocs = rng.gen_range(1..=limits.procedures.max(1));
    let mut procedures = vec![("p0".to_string(), 0)];
    for k in 1..nprocs {
        procedures.push((format!("p{k}"), rng.gen_range(0..=limits.params)));
    }
    let arities: Vec<usize> = procedures.iter().map(|p| p.1).collect();
    let total_det = rng.gen_bool(0.5);
    let mut rules = Vec::new();
    for (p, &k) in arities.iter().enumerate() {
        for (a, _, n) in alphabet.iter() {
            let count = if total_det {
                1
            } else {
                match rng.gen_range(0..10) {
                    0..=1 => 0,
                    2..=7 => 1,
                    _ => 2,
                }
            };
            for _ in 0..count {
                let body = random_expr(&mut rng, &alphabet, &arities, n, k, 2);
                rules.push(MttRule {
                    proc: p,
                    symbol: a,
                    body,
                });
            }
        }
    }
    let mtt = Mtt::new(alphabet.clone(), procedures, vec![0], rules).expect("well-formed transducer");
    let max_states = limits.states.max(1);
    let n = rng.gen_range(1..=max_states);
    let out_type = if rng.gen_bool(0.75) {
        random_complete_bta(&mut rng, &alphabet, n)
    } else {
        random_bta(&mut rng, &alphabet, n)
    };
    let n = rng.gen_range(1..=max_states);
    let in_type = if rng.gen_bool(0.2) {
        Bta::universal(&alphabet)
    } else {
        random_bta(&mut rng, &alphabet, n)
    };
    Instance {
        mtt,
        in_type,
        out_type,
    }
}

fn random_expr(
    rng: &mut impl Rng,
    alphabet: &RankedAlphabet,
    arities: &[usize],
    children: usize,
    params: usize,
    depth: u32,
) -> Expr {
    let choice = rng.gen_range(0..10);
    if params > 0 && (choice < 2 || (depth == 0 && choice < 5)) {
        return Expr::Param(rng.gen_range(1..=params));
    }
    if children > 0 && choice >= 6 {
        let p = rng.gen_range(0..arities.len());
        let l = arities[p];
        if depth > 0 || l == 0 {
            let args = (0..l)
                .map(|_| random_expr(rng, alphabet, arities, children, params, depth.saturating_sub(1)))
                .collect();
            return Expr::Call(p, rng.gen_range(1..=children), args);
        }
    }
    let candidates: Vec<(SymbolId, usize)> = alphabet
        .iter()
        .filter(|&(_, _, n)| depth > 0 || n == 0)
        .map(|(a, _, n)| (a, n))
        .collect();
    let (a, n) = candidates[rng.gen_range(0..candidates.len())];
    let args = (0..n)
        .map(|_| random_expr(rng, alphabet, arities, children, params, depth - 1))
        .collect();
    Expr::Cons(a, args)
}

fn state_names(n: usize) -> Vec<String> {
    (0..n).map(|q| format!("q{q}")).collect()
}

/// Every `(symbol, child states)` combination gets exactly one target.
pub fn random_complete_bta(rng: &mut impl Rng, alphabet: &RankedAlphabet, n: usize) -> Bta {
    let mut rules = Vec::new();
    for (a, _, arity) in alphabet.iter() {
        let mut kids = vec![0; arity];
        loop {
            rules.push(Rule {
                target: rng.gen_range(0..n),
                symbol: a,
                children: kids.clone(),
            });
            if !odometer(&mut kids, n) {
                break;
            }
        }
    }
    let finals = random_finals(rng, n);
    Bta::new(alphabet.clone(), state_names(n), finals, rules).expect("well-formed")
}

/// Each possible transition is present with probability one half.
pub fn random_bta(rng: &mut impl Rng, alphabet: &RankedAlphabet, n: usize) -> Bta {
    let mut rules = Vec::new();
    for (a, _, arity) in alphabet.iter() {
        let mut kids = vec![0; arity];
        loop {
            for q in 0..n {
                if rng.gen_bool(if arity == 0 { 0.6 } else { 0.4 }) {
                    rules.push(Rule {
                        target: q,
                        symbol: a,
                        children: kids.clone(),
                    });
                }
            }
            if !odometer(&mut kids, n) {
                break;
            }
        }
    }
    let finals = random_finals(rng, n);
    Bta::new(alphabet.clone(), state_names(n), finals, rules).expect("well-formed")
}

fn random_finals(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    let mut finals: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.4)).collect();
    if finals.is_empty() {
        finals.push(rng.gen_range(0..n));
    }
    finals
}
