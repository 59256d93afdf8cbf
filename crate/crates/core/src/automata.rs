//! Bottom-up tree automata.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::hash::Hash;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::text::{self, Tok, Tokens};
use crate::trees::{RankedAlphabet, SymbolId, Tree};

/// `target <- symbol(children...)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule {
    pub target: usize,
    pub symbol: SymbolId,
    pub children: Vec<usize>,
}

/// A nondeterministic bottom-up tree automaton. States are dense indices
/// `0..state_count()` with display names.
#[derive(Debug, Clone)]
pub struct Bta {
    alphabet: RankedAlphabet,
    names: Vec<Arc<str>>,
    name_index: HashMap<Arc<str>, usize>,
    finals: Vec<bool>,
    rules: Vec<Rule>,
    by_symbol: Vec<Vec<usize>>,
}

impl Bta {
    pub fn new(
        alphabet: RankedAlphabet,
        names: Vec<String>,
        finals: impl IntoIterator<Item = usize>,
        rules: Vec<Rule>,
    ) -> Result<Bta> {
        let n = names.len();
        let names: Vec<Arc<str>> = names.into_iter().map(Arc::from).collect();
        let mut name_index = HashMap::new();
        for (i, name) in names.iter().enumerate() {
            if name_index.insert(name.clone(), i).is_some() {
                return Err(Error::InvalidAutomaton(format!("duplicate state `{name}`")));
            }
        }
        let mut fin = vec![false; n];
        for f in finals {
            if f >= n {
                return Err(Error::InvalidAutomaton(format!("final state {f} out of range")));
            }
            fin[f] = true;
        }
        let mut rules = rules;
        rules.sort();
        rules.dedup();
        let mut by_symbol = vec![Vec::new(); alphabet.len()];
        for (k, r) in rules.iter().enumerate() {
            if r.symbol.index() >= alphabet.len() {
                return Err(Error::InvalidAutomaton(format!(
                    "rule symbol {} not in alphabet",
                    r.symbol.0
                )));
            }
            let arity = alphabet.arity(r.symbol);
            if arity != r.children.len() {
                return Err(Error::ArityMismatch {
                    symbol: alphabet.name(r.symbol).to_string(),
                    expected: arity,
                    found: r.children.len(),
                    pos: None,
                });
            }
            if r.target >= n || r.children.iter().any(|&c| c >= n) {
                return Err(Error::InvalidAutomaton("rule mentions an unknown state".into()));
            }
            by_symbol[r.symbol.index()].push(k);
        }
        Ok(Bta {
            alphabet,
            names,
            name_index,
            finals: fin,
            rules,
            by_symbol,
        })
    }

    /// One final state accepting every tree.
    pub fn universal(alphabet: &RankedAlphabet) -> Bta {
        let rules = alphabet
            .iter()
            .map(|(id, _, arity)| Rule {
                target: 0,
                symbol: id,
                children: vec![0; arity],
            })
            .collect();
        Bta::new(alphabet.clone(), vec!["all".into()], [0], rules).expect("well-formed")
    }

    pub fn alphabet(&self) -> &RankedAlphabet {
        &self.alphabet
    }

    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn state_name(&self, q: usize) -> &str {
        &self.names[q]
    }

    pub fn state_id(&self, name: &str) -> Option<usize> {
        self.name_index.get(name).copied()
    }

    pub fn is_final(&self, q: usize) -> bool {
        self.finals[q]
    }

    pub fn finals(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.state_count()).filter(|&q| self.finals[q])
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rules_for(&self, symbol: SymbolId) -> impl Iterator<Item = &Rule> + '_ {
        self.by_symbol[symbol.index()].iter().map(|&k| &self.rules[k])
    }

    /// The set of states accepting `t`. Trees with symbols outside the
    /// alphabet are accepted by no state.
    pub fn accepts(&self, t: &Tree) -> BTreeSet<usize> {
        self.accepting_mask(t)
            .into_iter()
            .enumerate()
            .filter_map(|(q, b)| b.then_some(q))
            .collect()
    }

    fn accepting_mask(&self, t: &Tree) -> Vec<bool> {
        let mut out = vec![false; self.state_count()];
        let Some(sym) = self.alphabet.id(t.label()) else {
            return out;
        };
        if self.alphabet.arity(sym) != t.children().len() {
            return out;
        }
        let kids: Vec<Vec<bool>> = t.children().iter().map(|c| self.accepting_mask(c)).collect();
        for r in self.rules_for(sym) {
            if r.children.iter().zip(&kids).all(|(&q, m)| m[q]) {
                out[r.target] = true;
            }
        }
        out
    }

    pub fn in_language(&self, t: &Tree) -> bool {
        self.accepting_mask(t)
            .iter()
            .zip(&self.finals)
            .any(|(&a, &f)| a && f)
    }

    /// A witness tree for every inhabited state, `None` for empty ones.
    /// Witnesses are found in rounds, so each has minimal height.
    pub fn witnesses(&self) -> Vec<Option<Tree>> {
        let mut wit: Vec<Option<Tree>> = vec![None; self.state_count()];
        loop {
            let mut next = wit.clone();
            let mut changed = false;
            for r in &self.rules {
                if next[r.target].is_some() {
                    continue;
                }
                if let Some(kids) = r
                    .children
                    .iter()
                    .map(|&c| wit[c].clone())
                    .collect::<Option<Vec<_>>>()
                {
                    next[r.target] = Some(Tree::new(self.alphabet.name(r.symbol).clone(), kids));
                    changed = true;
                }
            }
            wit = next;
            if !changed {
                return wit;
            }
        }
    }

    /// Some tree of the language, if any.
    pub fn witness(&self) -> Option<Tree> {
        let wit = self.witnesses();
        self.finals()
            .filter_map(|q| wit[q].clone())
            .min()
    }

    /// Re-expresses the automaton over a larger alphabet. Symbols not in the
    /// original alphabet get no rules.
    pub fn with_alphabet(&self, alphabet: &RankedAlphabet) -> Result<Bta> {
        if !self.alphabet.is_subset_of(alphabet) {
            return Err(Error::AlphabetMismatch(format!(
                "{{{}}} is not contained in {{{alphabet}}}",
                self.alphabet
            )));
        }
        let rules = self
            .rules
            .iter()
            .map(|r| Rule {
                target: r.target,
                symbol: alphabet.id(self.alphabet.name(r.symbol)).unwrap(),
                children: r.children.clone(),
            })
            .collect();
        Bta::new(
            alphabet.clone(),
            self.names.iter().map(|n| n.to_string()).collect(),
            self.finals(),
            rules,
        )
    }

    /// Product automaton restricted to inhabited state pairs.
    pub fn product(&self, other: &Bta) -> Result<Bta> {
        if self.alphabet != other.alphabet {
            return Err(Error::AlphabetMismatch(format!(
                "{{{}}} vs {{{}}}",
                self.alphabet, other.alphabet
            )));
        }
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        let mut rules = BTreeSet::new();
        loop {
            let before = (pairs.len(), rules.len());
            for sym in self.alphabet.ids() {
                for ra in self.rules_for(sym) {
                    for rb in other.rules_for(sym) {
                        let kids: Option<Vec<usize>> = ra
                            .children
                            .iter()
                            .zip(&rb.children)
                            .map(|(&x, &y)| index.get(&(x, y)).copied())
                            .collect();
                        let Some(kids) = kids else { continue };
                        let key = (ra.target, rb.target);
                        let target = *index.entry(key).or_insert_with(|| {
                            pairs.push(key);
                            pairs.len() - 1
                        });
                        rules.insert(Rule {
                            target,
                            symbol: sym,
                            children: kids,
                        });
                    }
                }
            }
            if (pairs.len(), rules.len()) == before {
                break;
            }
        }
        let names = pairs
            .iter()
            .map(|&(x, y)| format!("({},{})", self.names[x], other.names[y]))
            .collect();
        let finals: Vec<usize> = pairs
            .iter()
            .enumerate()
            .filter(|(_, &(x, y))| self.finals[x] && other.finals[y])
            .map(|(i, _)| i)
            .collect();
        Bta::new(self.alphabet.clone(), names, finals, rules.into_iter().collect())
    }

    /// Parses the text format:
    ///
    /// ```text
    /// alphabet: eps/0, a/1, b/2
    /// states: q0, q1
    /// final: q0
    /// q0 <- b(q1,q1)
    /// q1 <- eps
    /// ```
    ///
    /// `alphabet:` and `states:` are optional; missing ones are inferred
    /// from the rules.
    pub fn parse(input: &str) -> Result<Bta> {
        let mut alphabet: Option<RankedAlphabet> = None;
        let mut names: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut final_names = Vec::new();
        let mut raw_rules = Vec::new();
        let mut intern = |name: &str, names: &mut Vec<String>| -> usize {
            *index.entry(name.to_string()).or_insert_with(|| {
                names.push(name.to_string());
                names.len() - 1
            })
        };
        for (line_no, line) in text::content_lines(input) {
            let offset = |rest: &str| line.len() - rest.len();
            if let Some(rest) = text::header(line, "alphabet") {
                alphabet = Some(RankedAlphabet::parse_at(rest, line_no, offset(rest))?);
            } else if let Some(rest) = text::header(line, "states") {
                for (n, _) in text::name_list(rest, line_no, offset(rest))? {
                    intern(&n, &mut names);
                }
            } else if let Some(rest) = text::header(line, "final") {
                final_names.extend(text::name_list(rest, line_no, offset(rest))?);
            } else {
                let mut ts = Tokens::from_line(line, line_no)?;
                let (target, _) = ts.ident()?;
                ts.expect(&Tok::LeftArrow)?;
                let (sym, spos) = ts.ident()?;
                let mut kids = Vec::new();
                if ts.eat(&Tok::LParen) {
                    loop {
                        kids.push(ts.ident()?.0);
                        if ts.eat(&Tok::RParen) {
                            break;
                        }
                        ts.expect(&Tok::Comma)?;
                    }
                }
                ts.expect_end()?;
                let t = intern(&target, &mut names);
                let k: Vec<usize> = kids.iter().map(|c| intern(c, &mut names)).collect();
                raw_rules.push((t, sym, spos, k));
            }
        }
        let alphabet = match alphabet {
            Some(a) => a,
            None => RankedAlphabet::new(
                raw_rules
                    .iter()
                    .map(|(_, s, _, k)| (s.clone(), k.len()))
                    .collect::<Vec<_>>(),
            )?,
        };
        let mut rules = Vec::new();
        for (target, sym, pos, children) in raw_rules {
            let id = alphabet.id(&sym).ok_or_else(|| Error::UnknownSymbol {
                symbol: sym.clone(),
                pos: Some(pos),
            })?;
            if alphabet.arity(id) != children.len() {
                return Err(Error::ArityMismatch {
                    symbol: sym,
                    expected: alphabet.arity(id),
                    found: children.len(),
                    pos: Some(pos),
                });
            }
            rules.push(Rule {
                target,
                symbol: id,
                children,
            });
        }
        let mut finals = Vec::new();
        for (n, pos) in final_names {
            let q = names.iter().position(|x| *x == n).ok_or(Error::UnknownName {
                name: n.clone(),
                pos: Some(pos),
            })?;
            finals.push(q);
        }
        Bta::new(alphabet, names, finals, rules)
    }
}

impl fmt::Display for Bta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "alphabet: {}", self.alphabet)?;
        let names: Vec<&str> = self.names.iter().map(|n| &**n).collect();
        writeln!(f, "states: {}", names.join(", "))?;
        let fin: Vec<&str> = self.finals().map(|q| &*self.names[q]).collect();
        writeln!(f, "final: {}", fin.join(", "))?;
        for r in &self.rules {
            write!(f, "{} <- {}", self.names[r.target], self.alphabet.name(r.symbol))?;
            if !r.children.is_empty() {
                let kids: Vec<&str> = r.children.iter().map(|&c| &*self.names[c]).collect();
                write!(f, "({})", kids.join(","))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// A deterministic and complete bottom-up automaton: exactly one rule per
/// symbol and child-state tuple.
#[derive(Debug, Clone)]
pub struct Dbta {
    bta: Bta,
    table: Vec<HashMap<Vec<usize>, usize>>,
}

impl TryFrom<Bta> for Dbta {
    type Error = Error;

    fn try_from(bta: Bta) -> Result<Dbta> {
        let n = bta.state_count();
        let mut table = vec![HashMap::new(); bta.alphabet.len()];
        for r in &bta.rules {
            if let Some(old) = table[r.symbol.index()].insert(r.children.clone(), r.target) {
                if old != r.target {
                    return Err(Error::NotDeterministicComplete(format!(
                        "two rules for symbol `{}`",
                        bta.alphabet.name(r.symbol)
                    )));
                }
            }
        }
        for (id, name, arity) in bta.alphabet.iter() {
            let expected = (n as u128).checked_pow(arity as u32).unwrap_or(u128::MAX);
            if table[id.index()].len() as u128 != expected {
                return Err(Error::NotDeterministicComplete(format!(
                    "missing rules for symbol `{name}`"
                )));
            }
        }
        Ok(Dbta { bta, table })
    }
}

impl Dbta {
    pub fn as_bta(&self) -> &Bta {
        &self.bta
    }

    pub fn into_bta(self) -> Bta {
        self.bta
    }

    pub fn alphabet(&self) -> &RankedAlphabet {
        &self.bta.alphabet
    }

    pub fn state_count(&self) -> usize {
        self.bta.state_count()
    }

    pub fn state_name(&self, q: usize) -> &str {
        self.bta.state_name(q)
    }

    pub fn is_final(&self, q: usize) -> bool {
        self.bta.is_final(q)
    }

    pub fn finals(&self) -> impl Iterator<Item = usize> + '_ {
        self.bta.finals()
    }

    /// The unique target of `symbol(children)`.
    pub fn step(&self, symbol: SymbolId, children: &[usize]) -> usize {
        self.table[symbol.index()][children]
    }

    /// The unique state accepting `t`, or `None` when `t` uses symbols
    /// outside the alphabet.
    pub fn run(&self, t: &Tree) -> Option<usize> {
        let sym = self.bta.alphabet.id(t.label())?;
        if self.bta.alphabet.arity(sym) != t.children().len() {
            return None;
        }
        let kids: Option<Vec<usize>> = t.children().iter().map(|c| self.run(c)).collect();
        Some(self.step(sym, &kids?))
    }

    pub fn in_language(&self, t: &Tree) -> bool {
        self.run(t).is_some_and(|q| self.is_final(q))
    }

    /// Same rules, flipped final set.
    pub fn complement(&self) -> Dbta {
        let finals: Vec<usize> = (0..self.state_count())
            .filter(|&q| !self.is_final(q))
            .collect();
        let mut bta = self.bta.clone();
        bta.finals = vec![false; bta.state_count()];
        for q in finals {
            bta.finals[q] = true;
        }
        Dbta {
            bta,
            table: self.table.clone(),
        }
    }
}

impl fmt::Display for Dbta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.bta.fmt(f)
    }
}

pub fn complement(m: &Dbta) -> Dbta {
    m.complement()
}

/// Result of the subset construction: `subsets[r]` lists the original
/// states represented by the new state `r`.
#[derive(Debug, Clone)]
pub struct Determinized {
    pub dbta: Dbta,
    pub subsets: Vec<BTreeSet<usize>>,
}

/// Subset construction over reachable subsets. The empty subset is always
/// present (as state 0) and acts as the sink.
pub fn determinize_complete(m: &Bta) -> Determinized {
    determinize_complete_capped(m, usize::MAX).expect("no cap")
}

/// As [`determinize_complete`], failing once more than `cap` subsets appear.
pub fn determinize_complete_capped(m: &Bta, cap: usize) -> Result<Determinized> {
    let closure = close_bottom_up(m.alphabet(), vec![BTreeSet::new()], cap, &mut |sym, kids| {
        m.rules_for(sym)
            .filter(|r| r.children.iter().zip(kids).all(|(q, s)| s.contains(q)))
            .map(|r| r.target)
            .collect::<BTreeSet<usize>>()
    })?;
    let subsets = closure.states;
    let names: Vec<String> = subsets
        .iter()
        .map(|s| {
            let parts: Vec<&str> = s.iter().map(|&q| m.state_name(q)).collect();
            format!("{{{}}}", parts.join(","))
        })
        .collect();
    let finals: Vec<usize> = subsets
        .iter()
        .enumerate()
        .filter(|(_, s)| s.iter().any(|&q| m.is_final(q)))
        .map(|(i, _)| i)
        .collect();
    let bta = Bta::new(m.alphabet().clone(), names, finals, closure.rules).expect("well-formed");
    let dbta = Dbta::try_from(bta).expect("subset construction is deterministic and complete");
    Ok(Determinized { dbta, subsets })
}

/// States reachable bottom-up from `seeds`, with one rule per symbol and
/// tuple of reachable states.
pub(crate) struct Closure<K> {
    pub states: Vec<K>,
    pub rules: Vec<Rule>,
}

/// Generic reachable construction: applies `step` to every symbol and tuple
/// of known states until no new state appears. Fails once more than `cap`
/// states exist.
pub(crate) fn close_bottom_up<K: Clone + Eq + Hash>(
    alphabet: &RankedAlphabet,
    seeds: Vec<K>,
    cap: usize,
    step: &mut dyn FnMut(SymbolId, &[&K]) -> K,
) -> Result<Closure<K>> {
    let mut states: Vec<K> = Vec::new();
    let mut index: HashMap<K, usize> = HashMap::new();
    for k in seeds {
        if !index.contains_key(&k) {
            index.insert(k.clone(), states.len());
            states.push(k);
        }
    }
    let mut rules = Vec::new();
    let mut processed = 0;
    let mut first = true;
    while first || processed < states.len() {
        let frontier = processed;
        processed = states.len();
        let n = processed;
        for (sym, _, arity) in alphabet.iter() {
            if arity == 0 {
                if !first {
                    continue;
                }
            } else if n == 0 {
                continue;
            }
            let mut tuple = vec![0usize; arity];
            loop {
                // Only tuples touching a state discovered in the last round.
                if arity == 0 || tuple.iter().any(|&c| c >= frontier) {
                    let kids: Vec<&K> = tuple.iter().map(|&c| &states[c]).collect();
                    let target = step(sym, &kids);
                    let id = match index.get(&target) {
                        Some(&id) => id,
                        None => {
                            if states.len() >= cap {
                                return Err(Error::CapExceeded {
                                    what: "reachable states".into(),
                                    cap,
                                });
                            }
                            index.insert(target.clone(), states.len());
                            states.push(target);
                            states.len() - 1
                        }
                    };
                    rules.push(Rule {
                        target: id,
                        symbol: sym,
                        children: tuple.clone(),
                    });
                }
                if !odometer(&mut tuple, n) {
                    break;
                }
            }
        }
        first = false;
    }
    Ok(Closure { states, rules })
}

/// Advances `tuple` as a base-`n` counter. Returns false after wrapping.
pub(crate) fn odometer(tuple: &mut [usize], n: usize) -> bool {
    for slot in tuple.iter_mut().rev() {
        *slot += 1;
        if *slot < n {
            return true;
        }
        *slot = 0;
    }
    false
}

/// True iff the language is empty (least fixpoint of inhabited states).
pub fn bta_empty(m: &Bta) -> bool {
    let mut inhabited = vec![false; m.state_count()];
    loop {
        let mut changed = false;
        for r in &m.rules {
            if !inhabited[r.target] && r.children.iter().all(|&c| inhabited[c]) {
                inhabited[r.target] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    !m.finals().any(|q| inhabited[q])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::{enumerate_trees, parse_tree};

    fn sample_nd() -> Bta {
        Bta::parse(
            "alphabet: eps/0, a/1, b/2
             final: q0
             q0 <- b(q1,q2)
             q1 <- eps
             q2 <- eps",
        )
        .unwrap()
    }

    #[test]
    fn accepts_examples() {
        let m = sample_nd();
        let al = m.alphabet().clone();
        let q = |n| m.state_id(n).unwrap();
        let t = parse_tree("b(eps,eps)", &al).unwrap();
        assert_eq!(m.accepts(&t), BTreeSet::from([q("q0")]));
        assert_eq!(m.accepts(&Tree::eps()), BTreeSet::from([q("q1"), q("q2")]));
        let none = Bta::new(al.clone(), vec!["q".into()], [0], vec![]).unwrap();
        assert!(none.accepts(&t).is_empty());
    }

    #[test]
    fn determinize_examples() {
        let m = Bta::parse("final: q1\nq1 <- eps\nq2 <- eps").unwrap();
        let d = determinize_complete(&m);
        assert_eq!(d.subsets.len(), 2);
        assert!(d.subsets[0].is_empty());
        assert!(!d.dbta.is_final(0));
        assert_eq!(d.subsets[1], BTreeSet::from([0, 1]));
        assert!(d.dbta.is_final(1));
        assert_eq!(d.dbta.state_name(1), "{q1,q2}");

        let empty = Bta::new(m.alphabet().clone(), vec![], [], vec![]).unwrap();
        let d = determinize_complete(&empty);
        assert_eq!(d.dbta.state_count(), 1);
        assert!(bta_empty(d.dbta.as_bta()));
    }

    #[test]
    fn determinize_preserves_language() {
        let m = sample_nd();
        let d = determinize_complete(&m);
        for t in enumerate_trees(m.alphabet(), 7) {
            assert_eq!(m.in_language(&t), d.dbta.in_language(&t), "{t}");
            assert_eq!(d.dbta.as_bta().accepts(&t).len(), 1);
        }
    }

    #[test]
    fn determinize_of_deterministic_is_isomorphic() {
        let u = Bta::universal(&RankedAlphabet::parse("a/1, b/2").unwrap());
        let d = determinize_complete(&u);
        // The sink is unreachable but always present.
        assert_eq!(d.dbta.state_count(), 2);
        assert_eq!(d.subsets[1], BTreeSet::from([0]));
    }

    #[test]
    fn complement_flips_membership() {
        let d = determinize_complete(&sample_nd()).dbta;
        let c = complement(&d);
        for t in enumerate_trees(d.alphabet(), 6) {
            assert!(d.in_language(&t) ^ c.in_language(&t));
        }
        let cc = complement(&c);
        assert!((0..d.state_count()).all(|q| d.is_final(q) == cc.is_final(q)));
        let all = Dbta::try_from(Bta::universal(d.alphabet())).unwrap();
        assert!(bta_empty(complement(&all).as_bta()));
    }

    #[test]
    fn dbta_validation() {
        assert!(matches!(
            Dbta::try_from(sample_nd()),
            Err(Error::NotDeterministicComplete(_))
        ));
        let twice = Bta::parse("q <- eps\np <- eps").unwrap();
        assert!(Dbta::try_from(twice).is_err());
    }

    #[test]
    fn emptiness_examples() {
        let no_final = Bta::parse("q <- eps").unwrap();
        assert!(bta_empty(&no_final));
        assert!(!bta_empty(&Bta::parse("final: q\nq <- eps").unwrap()));
        let no_base = Bta::parse("alphabet: a/1\nfinal: q\nq <- a(q)").unwrap();
        assert!(bta_empty(&no_base));
        assert_eq!(no_base.witness(), None);
        assert_eq!(sample_nd().witness().unwrap().to_string(), "b(eps,eps)");
    }

    #[test]
    fn product_intersects() {
        let m = sample_nd();
        let only_b = Bta::parse(
            "alphabet: eps/0, a/1, b/2
             final: r
             r <- b(s,s)
             s <- eps
             s <- a(s)",
        )
        .unwrap();
        let p = m.product(&only_b).unwrap();
        for t in enumerate_trees(m.alphabet(), 6) {
            assert_eq!(p.in_language(&t), m.in_language(&t) && only_b.in_language(&t));
        }
    }

    #[test]
    fn parse_errors_and_roundtrip() {
        assert!(matches!(
            Bta::parse("alphabet: a/1\nq <- a"),
            Err(Error::ArityMismatch { .. })
        ));
        assert!(matches!(
            Bta::parse("final: z\nq <- eps"),
            Err(Error::UnknownName { .. })
        ));
        let m = sample_nd();
        let back = Bta::parse(&m.to_string()).unwrap();
        assert_eq!(back.rules(), m.rules());
        assert_eq!(back.finals().collect::<Vec<_>>(), m.finals().collect::<Vec<_>>());
    }

    #[test]
    fn with_alphabet_extends() {
        let m = Bta::parse("final: q\nq <- eps").unwrap();
        let big = RankedAlphabet::parse("a/1").unwrap();
        let m2 = m.with_alphabet(&big).unwrap();
        assert!(m2.in_language(&Tree::eps()));
        assert!(!m2.in_language(&Tree::new("a", vec![Tree::eps()])));
        let small = RankedAlphabet::parse("eps/0").unwrap();
        assert!(m2.with_alphabet(&small).is_err());
    }
}
