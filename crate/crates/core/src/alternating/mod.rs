//! Alternating tree automata.

pub mod dnf;
pub mod formula;
mod ops;
mod product;

use std::collections::HashMap;
use std::fmt;

use crate::automata::Bta;
use crate::error::{Error, Result};
use crate::text::{self, Tok, Tokens};
use crate::trees::{RankedAlphabet, SymbolId, Tree};

pub use dnf::{dnf, DnfTuple, StateSet, StateSetPair};
pub use formula::{Formula, FormulaFactory, Kind, Simplify, StateId};
pub use ops::{
    determinize_ata, determinize_ata_capped, materialize, push_negation, traversal_bounds, AtaDeterminized,
    Materialized, TraversalBounds,
};
pub use product::{intersect, Intersection, ProductState};

/// An alternating automaton whose transitions may be computed on demand.
///
/// State identifiers are handed out as states are discovered; a lazy
/// implementation only knows the states reachable from what it has
/// computed so far.
pub trait Alternating {
    fn alphabet(&self) -> &RankedAlphabet;

    fn initial_states(&mut self) -> Vec<StateId>;

    /// `Φ(x, a)`. Atoms in the result use child indices `1..=arity(a)`.
    fn transition(&mut self, x: StateId, a: SymbolId) -> Formula;

    fn state_label(&self, x: StateId) -> String;

    /// Number of states whose transitions have been computed.
    fn materialized_states(&self) -> usize;
}

impl<A: Alternating + ?Sized> Alternating for &mut A {
    fn alphabet(&self) -> &RankedAlphabet {
        (**self).alphabet()
    }

    fn initial_states(&mut self) -> Vec<StateId> {
        (**self).initial_states()
    }

    fn transition(&mut self, x: StateId, a: SymbolId) -> Formula {
        (**self).transition(x, a)
    }

    fn state_label(&self, x: StateId) -> String {
        (**self).state_label(x)
    }

    fn materialized_states(&self) -> usize {
        (**self).materialized_states()
    }
}

/// A fully materialized alternating automaton with dense state ids.
#[derive(Clone)]
pub struct Ata {
    alphabet: RankedAlphabet,
    labels: Vec<String>,
    initial: Vec<StateId>,
    table: Vec<Vec<Formula>>,
}

impl Ata {
    /// `table[x][a]` is `Φ(x, a)`.
    pub fn new(
        alphabet: RankedAlphabet,
        labels: Vec<String>,
        initial: Vec<StateId>,
        table: Vec<Vec<Formula>>,
    ) -> Result<Ata> {
        let n = labels.len();
        if table.len() != n {
            return Err(Error::InvalidAutomaton("transition table size".into()));
        }
        for (x, row) in table.iter().enumerate() {
            if row.len() != alphabet.len() {
                return Err(Error::InvalidAutomaton("transition table size".into()));
            }
            for (a, phi) in row.iter().enumerate() {
                let arity = alphabet.arity(SymbolId(a as u32));
                if phi.max_child_index() > arity {
                    return Err(Error::InvalidAutomaton(format!(
                        "Φ({}, {}) mentions a child beyond arity {arity}",
                        labels[x],
                        alphabet.name(SymbolId(a as u32))
                    )));
                }
                if phi.states().iter().any(|&y| y as usize >= n) {
                    return Err(Error::InvalidAutomaton("formula mentions an unknown state".into()));
                }
            }
        }
        if initial.iter().any(|&x| x as usize >= n) {
            return Err(Error::InvalidAutomaton("unknown initial state".into()));
        }
        let mut initial = initial;
        initial.sort_unstable();
        initial.dedup();
        Ok(Ata {
            alphabet,
            labels,
            initial,
            table,
        })
    }

    pub fn alphabet(&self) -> &RankedAlphabet {
        &self.alphabet
    }

    pub fn state_count(&self) -> usize {
        self.labels.len()
    }

    pub fn initial(&self) -> &[StateId] {
        &self.initial
    }

    pub fn label(&self, x: StateId) -> &str {
        &self.labels[x as usize]
    }

    pub fn phi(&self, x: StateId, a: SymbolId) -> &Formula {
        &self.table[x as usize][a.index()]
    }

    pub fn has_negation(&self) -> bool {
        self.table.iter().flatten().any(Formula::has_negation)
    }

    pub fn with_initial(&self, initial: Vec<StateId>) -> Result<Ata> {
        Ata::new(
            self.alphabet.clone(),
            self.labels.clone(),
            initial,
            self.table.clone(),
        )
    }

    /// Parses the text format:
    ///
    /// ```text
    /// initial: X
    /// state X: eps(0) -> T
    /// state X: a(1) -> (d 1 X & ~d 1 Y)
    /// ```
    ///
    /// An optional `alphabet:` header fixes the alphabet; otherwise it is
    /// collected from the `symbol(arity)` annotations. Missing transitions
    /// are `F`.
    pub fn parse(input: &str) -> Result<Ata> {
        let mut alphabet: Option<RankedAlphabet> = None;
        let mut labels: Vec<String> = Vec::new();
        let mut index: HashMap<String, StateId> = HashMap::new();
        let mut intern = |name: &str, labels: &mut Vec<String>| -> StateId {
            *index.entry(name.to_string()).or_insert_with(|| {
                labels.push(name.to_string());
                (labels.len() - 1) as StateId
            })
        };
        let mut initial_names = Vec::new();
        let mut factory = FormulaFactory::default();
        let mut entries = Vec::new();
        let mut declared = Vec::new();
        for (line_no, line) in text::content_lines(input) {
            let offset = |rest: &str| line.len() - rest.len();
            if let Some(rest) = text::header(line, "alphabet") {
                alphabet = Some(RankedAlphabet::parse_at(rest, line_no, offset(rest))?);
                continue;
            }
            if let Some(rest) = text::header(line, "initial") {
                initial_names.extend(text::name_list(rest, line_no, offset(rest))?);
                continue;
            }
            let mut ts = Tokens::from_line(line, line_no)?;
            match ts.ident()? {
                (kw, _) if kw == "state" => {}
                (_, pos) => {
                    return Err(Error::Syntax {
                        pos,
                        message: "expected `state`, `initial:` or `alphabet:`".into(),
                    })
                }
            }
            let (x, _) = ts.ident()?;
            let x = intern(&x, &mut labels);
            ts.expect(&Tok::Colon)?;
            let (sym, spos) = ts.ident()?;
            ts.expect(&Tok::LParen)?;
            let (ar, apos) = ts.ident()?;
            let arity: usize = ar.parse().map_err(|_| Error::Syntax {
                pos: apos,
                message: format!("expected an arity, found `{ar}`"),
            })?;
            ts.expect(&Tok::RParen)?;
            ts.expect(&Tok::Arrow)?;
            let phi = parse_formula(&mut ts, &mut factory, &mut |n| intern(n, &mut labels))?;
            ts.expect_end()?;
            if phi.max_child_index() > arity {
                return Err(Error::Syntax {
                    pos: spos,
                    message: format!("formula uses a child index beyond arity {arity}"),
                });
            }
            declared.push((sym.clone(), arity));
            entries.push((x, sym, spos, arity, phi));
        }
        let alphabet = match alphabet {
            Some(a) => a,
            None => RankedAlphabet::new(declared)?,
        };
        let mut table = vec![vec![factory.bottom(); alphabet.len()]; labels.len()];
        for (x, sym, pos, arity, phi) in entries {
            let id = alphabet.id(&sym).ok_or_else(|| Error::UnknownSymbol {
                symbol: sym.clone(),
                pos: Some(pos),
            })?;
            if alphabet.arity(id) != arity {
                return Err(Error::ArityMismatch {
                    symbol: sym,
                    expected: alphabet.arity(id),
                    found: arity,
                    pos: Some(pos),
                });
            }
            let slot = &mut table[x as usize][id.index()];
            *slot = factory.or(slot.clone(), phi);
        }
        let mut initial = Vec::new();
        for (n, pos) in initial_names {
            let x = labels.iter().position(|l| *l == n).ok_or(Error::UnknownName {
                name: n,
                pos: Some(pos),
            })?;
            initial.push(x as StateId);
        }
        Ata::new(alphabet, labels, initial, table)
    }
}

fn parse_formula(
    ts: &mut Tokens,
    f: &mut FormulaFactory,
    state: &mut dyn FnMut(&str) -> StateId,
) -> Result<Formula> {
    let mut acc = parse_conj(ts, f, state)?;
    while ts.eat(&Tok::Pipe) {
        let rhs = parse_conj(ts, f, state)?;
        acc = f.or(acc, rhs);
    }
    Ok(acc)
}

fn parse_conj(
    ts: &mut Tokens,
    f: &mut FormulaFactory,
    state: &mut dyn FnMut(&str) -> StateId,
) -> Result<Formula> {
    let mut acc = parse_literal(ts, f, state)?;
    while ts.eat(&Tok::Amp) {
        let rhs = parse_literal(ts, f, state)?;
        acc = f.and(acc, rhs);
    }
    Ok(acc)
}

fn parse_literal(
    ts: &mut Tokens,
    f: &mut FormulaFactory,
    state: &mut dyn FnMut(&str) -> StateId,
) -> Result<Formula> {
    if ts.eat(&Tok::LParen) {
        let g = parse_formula(ts, f, state)?;
        ts.expect(&Tok::RParen)?;
        return Ok(g);
    }
    let negated = ts.eat(&Tok::Tilde);
    let (word, pos) = ts.ident()?;
    let index = match word.as_str() {
        "T" if !negated => return Ok(f.top()),
        "F" if !negated => return Ok(f.bottom()),
        "d" => {
            let (n, npos) = ts.ident()?;
            n.parse::<usize>().ok().filter(|&i| i >= 1).ok_or(Error::Syntax {
                pos: npos,
                message: format!("expected a child index, found `{n}`"),
            })?
        }
        w if w.len() > 1 && w.starts_with('d') && w[1..].bytes().all(|b| b.is_ascii_digit()) => {
            w[1..].parse::<usize>().ok().filter(|&i| i >= 1).ok_or(Error::Syntax {
                pos,
                message: "child indices start at 1".into(),
            })?
        }
        _ => {
            return Err(Error::Syntax {
                pos,
                message: format!("expected `T`, `F`, `d i X` or `~d i X`, found `{word}`"),
            })
        }
    };
    let (x, _) = ts.ident()?;
    let x = state(&x);
    Ok(if negated {
        f.neg_atom(index, x)
    } else {
        f.atom(index, x)
    })
}

impl fmt::Display for Ata {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "alphabet: {}", self.alphabet)?;
        let init: Vec<&str> = self.initial.iter().map(|&x| self.label(x)).collect();
        writeln!(f, "initial: {}", init.join(", "))?;
        let names = |x: StateId| self.labels[x as usize].clone();
        for x in 0..self.state_count() as StateId {
            for (a, name, arity) in self.alphabet.iter() {
                let phi = self.phi(x, a);
                if phi.is_false() {
                    continue;
                }
                writeln!(
                    f,
                    "state {}: {name}({arity}) -> {}",
                    self.label(x),
                    phi.display(&names)
                )?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Ata {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Alternating for Ata {
    fn alphabet(&self) -> &RankedAlphabet {
        &self.alphabet
    }

    fn initial_states(&mut self) -> Vec<StateId> {
        self.initial.clone()
    }

    fn transition(&mut self, x: StateId, a: SymbolId) -> Formula {
        self.table[x as usize][a.index()].clone()
    }

    fn state_label(&self, x: StateId) -> String {
        self.labels[x as usize].clone()
    }

    fn materialized_states(&self) -> usize {
        self.state_count()
    }
}

/// A bottom-up automaton seen as an alternating one:
/// `Φ(q, a) = ⋁_{q ← a(q⃗)} ⋀_i ↓i q_i`. State ids coincide.
pub fn bta_to_ata(m: &Bta) -> Ata {
    let mut f = FormulaFactory::default();
    let alphabet = m.alphabet().clone();
    let mut table = vec![vec![f.bottom(); alphabet.len()]; m.state_count()];
    for r in m.rules() {
        let conj: Vec<Formula> = r
            .children
            .iter()
            .enumerate()
            .map(|(i, &q)| f.atom(i + 1, q as StateId))
            .collect();
        let c = f.and_all(conj);
        let slot = &mut table[r.target][r.symbol.index()];
        *slot = f.or(slot.clone(), c);
    }
    let labels = (0..m.state_count()).map(|q| m.state_name(q).to_string()).collect();
    let initial = m.finals().map(|q| q as StateId).collect();
    Ata::new(alphabet, labels, initial, table).expect("well-formed")
}

/// Membership test with a persistent `(tree, state)` cache.
pub struct Membership<A> {
    ata: A,
    cache: HashMap<(Tree, StateId), bool>,
}

impl<A: Alternating> Membership<A> {
    pub fn new(ata: A) -> Self {
        Membership {
            ata,
            cache: HashMap::new(),
        }
    }

    pub fn inner(&mut self) -> &mut A {
        &mut self.ata
    }

    pub fn into_inner(self) -> A {
        self.ata
    }

    /// `t ∈ ⟦x⟧`.
    pub fn accepts(&mut self, x: StateId, t: &Tree) -> bool {
        if let Some(&b) = self.cache.get(&(t.clone(), x)) {
            return b;
        }
        let b = match self.ata.alphabet().id(t.label()) {
            Some(sym) if self.ata.alphabet().arity(sym) == t.children().len() => {
                let phi = self.ata.transition(x, sym);
                phi.eval(&mut |i, y| self.accepts(y, &t.children()[i - 1]))
            }
            _ => false,
        };
        self.cache.insert((t.clone(), x), b);
        b
    }

    /// `t` is accepted by some initial state.
    pub fn in_language(&mut self, t: &Tree) -> bool {
        let init = self.ata.initial_states();
        init.into_iter().any(|x| self.accepts(x, t))
    }

    /// `t` is accepted by every state of `pair.pos` and by none of `pair.neg`.
    pub fn accepts_pair(&mut self, pair: &StateSetPair, t: &Tree) -> bool {
        pair.pos.iter().all(|x| self.accepts(x, t)) && !pair.neg.iter().any(|y| self.accepts(y, t))
    }
}

/// `t ∈ ⟦x⟧`.
pub fn ata_accepts<A: Alternating>(a: A, x: StateId, t: &Tree) -> bool {
    Membership::new(a).accepts(x, t)
}

#[cfg(test)]
mod tests;
