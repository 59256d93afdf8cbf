//! Ranked alphabets and finite ranked trees.

use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::error::{Error, Position, Result};
use crate::text::{Tok, Tokens};

/// Name of the distinguished nullary symbol present in every alphabet.
pub const EPS: &str = "eps";

/// Index of a symbol inside its [`RankedAlphabet`]. Ids follow the
/// lexicographic order of symbol names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolId(pub u32);

impl SymbolId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, PartialEq, Eq)]
struct AlphabetInner {
    names: Vec<Arc<str>>,
    arities: Vec<usize>,
    index: HashMap<Arc<str>, SymbolId>,
}

/// A finite set of symbols with arities. Always contains `eps/0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedAlphabet(Arc<AlphabetInner>);

impl RankedAlphabet {
    pub fn new<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: AsRef<str>,
    {
        let mut map: std::collections::BTreeMap<String, usize> = Default::default();
        map.insert(EPS.to_string(), 0);
        for (name, arity) in symbols {
            let name = name.as_ref();
            if name == EPS && arity != 0 {
                return Err(Error::ArityMismatch {
                    symbol: EPS.into(),
                    expected: 0,
                    found: arity,
                    pos: None,
                });
            }
            match map.get(name) {
                Some(&a) if a != arity => {
                    return Err(Error::ArityMismatch {
                        symbol: name.into(),
                        expected: a,
                        found: arity,
                        pos: None,
                    })
                }
                _ => {
                    map.insert(name.to_string(), arity);
                }
            }
        }
        let names: Vec<Arc<str>> = map.keys().map(|k| Arc::from(k.as_str())).collect();
        let arities = map.values().copied().collect();
        let index = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), SymbolId(i as u32)))
            .collect();
        Ok(RankedAlphabet(Arc::new(AlphabetInner {
            names,
            arities,
            index,
        })))
    }

    /// Parses `eps/0, a/1, b/2`.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_at(text, 1, 0)
    }

    pub(crate) fn parse_at(text: &str, line: usize, col_offset: usize) -> Result<Self> {
        let mut toks = crate::text::tokenize(text, line)?;
        for (_, p) in toks.iter_mut() {
            p.column += col_offset;
        }
        let end = Position::new(line, col_offset + text.chars().count() + 1);
        let mut ts = Tokens::new(toks, end);
        let mut syms = Vec::new();
        while !ts.at_end() {
            let (name, _) = ts.ident()?;
            ts.expect(&Tok::Slash)?;
            let (num, npos) = ts.ident()?;
            let arity: usize = num.parse().map_err(|_| Error::Syntax {
                pos: npos,
                message: format!("expected an arity, found `{num}`"),
            })?;
            syms.push((name, arity));
            if !ts.eat(&Tok::Comma) {
                ts.expect_end()?;
            }
        }
        Self::new(syms)
    }

    pub fn len(&self) -> usize {
        self.0.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.names.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<SymbolId> {
        self.0.index.get(name).copied()
    }

    pub fn name(&self, id: SymbolId) -> &Arc<str> {
        &self.0.names[id.index()]
    }

    pub fn arity(&self, id: SymbolId) -> usize {
        self.0.arities[id.index()]
    }

    pub fn arity_of(&self, name: &str) -> Option<usize> {
        self.id(name).map(|id| self.arity(id))
    }

    pub fn eps(&self) -> SymbolId {
        self.id(EPS).expect("alphabet always contains eps")
    }

    pub fn ids(&self) -> impl Iterator<Item = SymbolId> + '_ {
        (0..self.len() as u32).map(SymbolId)
    }

    /// `(id, name, arity)` in id order.
    pub fn iter(&self) -> impl Iterator<Item = (SymbolId, &str, usize)> + '_ {
        self.ids()
            .map(move |id| (id, &*self.0.names[id.index()], self.0.arities[id.index()]))
    }

    pub fn max_arity(&self) -> usize {
        self.0.arities.iter().copied().max().unwrap_or(0)
    }

    pub fn union(&self, other: &RankedAlphabet) -> Result<RankedAlphabet> {
        if self == other {
            return Ok(self.clone());
        }
        RankedAlphabet::new(
            self.iter()
                .chain(other.iter())
                .map(|(_, n, a)| (n.to_string(), a)),
        )
    }

    /// True if every symbol of `self` occurs in `other` with the same arity.
    pub fn is_subset_of(&self, other: &RankedAlphabet) -> bool {
        self.iter().all(|(_, n, a)| other.arity_of(n) == Some(a))
    }

    /// Checks the arity invariant for every node of `t`.
    pub fn check_tree(&self, t: &Tree) -> Result<()> {
        match self.arity_of(t.label()) {
            None => Err(Error::UnknownSymbol {
                symbol: t.label().to_string(),
                pos: None,
            }),
            Some(a) if a != t.children().len() => Err(Error::ArityMismatch {
                symbol: t.label().to_string(),
                expected: a,
                found: t.children().len(),
                pos: None,
            }),
            Some(_) => t.children().iter().try_for_each(|c| self.check_tree(c)),
        }
    }
}

impl fmt::Display for RankedAlphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (_, n, a)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{n}/{a}")?;
        }
        Ok(())
    }
}

struct Node {
    label: Arc<str>,
    children: Vec<Tree>,
    hash: u64,
    size: usize,
}

/// An immutable ranked tree with a cached structural hash.
#[derive(Clone)]
pub struct Tree(Arc<Node>);

impl Tree {
    pub fn new(label: impl Into<Arc<str>>, children: Vec<Tree>) -> Tree {
        let label = label.into();
        let mut h = DefaultHasher::new();
        label.hash(&mut h);
        for c in &children {
            h.write_u64(c.0.hash);
        }
        let size = 1 + children.iter().map(Tree::size).sum::<usize>();
        Tree(Arc::new(Node {
            label,
            children,
            hash: h.finish(),
            size,
        }))
    }

    pub fn leaf(label: impl Into<Arc<str>>) -> Tree {
        Tree::new(label, Vec::new())
    }

    pub fn eps() -> Tree {
        Tree::leaf(EPS)
    }

    pub fn label(&self) -> &str {
        &self.0.label
    }

    pub fn label_arc(&self) -> &Arc<str> {
        &self.0.label
    }

    pub fn children(&self) -> &[Tree] {
        &self.0.children
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        self.0.size
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(Tree::depth).max().unwrap_or(0)
    }
}

impl PartialEq for Tree {
    fn eq(&self, other: &Tree) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        self.0.hash == other.0.hash
            && self.0.size == other.0.size
            && self.0.label == other.0.label
            && self.0.children == other.0.children
    }
}

impl Eq for Tree {}

impl Hash for Tree {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl Ord for Tree {
    fn cmp(&self, other: &Tree) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        self.size()
            .cmp(&other.size())
            .then_with(|| self.label().cmp(other.label()))
            .then_with(|| self.children().cmp(other.children()))
    }
}

impl PartialOrd for Tree {
    fn partial_cmp(&self, other: &Tree) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())?;
        if !self.children().is_empty() {
            f.write_str("(")?;
            for (i, c) in self.children().iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{c}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub fn print_tree(t: &Tree) -> String {
    t.to_string()
}

pub fn parse_tree(text: &str, alphabet: &RankedAlphabet) -> Result<Tree> {
    let mut ts = Tokens::from_text(text)?;
    let t = parse_tree_tokens(&mut ts, alphabet)?;
    if !ts.at_end() {
        return Err(ts.unexpected("end of input"));
    }
    Ok(t)
}

pub(crate) fn parse_tree_tokens(ts: &mut Tokens, alphabet: &RankedAlphabet) -> Result<Tree> {
    let (name, pos) = ts.ident()?;
    let mut children = Vec::new();
    if ts.eat(&Tok::LParen) {
        loop {
            children.push(parse_tree_tokens(ts, alphabet)?);
            if ts.eat(&Tok::RParen) {
                break;
            }
            ts.expect(&Tok::Comma)?;
        }
    }
    let arity = alphabet.arity_of(&name).ok_or_else(|| Error::UnknownSymbol {
        symbol: name.clone(),
        pos: Some(pos),
    })?;
    if arity != children.len() {
        return Err(Error::ArityMismatch {
            symbol: name,
            expected: arity,
            found: children.len(),
            pos: Some(pos),
        });
    }
    let label = alphabet.name(alphabet.id(&name).unwrap()).clone();
    Ok(Tree::new(label, children))
}

/// Every tree over `alphabet` with at most `max_nodes` nodes, ordered by
/// size and then lexicographically on symbol names.
pub fn enumerate_trees(alphabet: &RankedAlphabet, max_nodes: usize) -> Vec<Tree> {
    let by_size = trees_by_size(alphabet, max_nodes);
    by_size.into_iter().flatten().collect()
}

/// `result[n]` holds the trees with exactly `n` nodes (index 0 is empty).
pub fn trees_by_size(alphabet: &RankedAlphabet, max_nodes: usize) -> Vec<Vec<Tree>> {
    let mut by_size: Vec<Vec<Tree>> = vec![Vec::new(); max_nodes + 1];
    for n in 1..=max_nodes {
        let mut out = Vec::new();
        for (id, _, arity) in alphabet.iter() {
            let label = alphabet.name(id).clone();
            if arity == 0 {
                if n == 1 {
                    out.push(Tree::leaf(label));
                }
                continue;
            }
            if n < 1 + arity {
                continue;
            }
            let mut acc = Vec::with_capacity(arity);
            fill_children(&by_size, arity, n - 1, &mut acc, &mut |kids| {
                out.push(Tree::new(label.clone(), kids.to_vec()))
            });
        }
        out.sort();
        by_size[n] = out;
    }
    by_size
}

fn fill_children(
    by_size: &[Vec<Tree>],
    remaining_slots: usize,
    budget: usize,
    acc: &mut Vec<Tree>,
    emit: &mut dyn FnMut(&[Tree]),
) {
    if remaining_slots == 0 {
        if budget == 0 {
            emit(acc);
        }
        return;
    }
    let max_here = budget - (remaining_slots - 1);
    for s in 1..=max_here {
        for t in &by_size[s] {
            acc.push(t.clone());
            fill_children(by_size, remaining_slots - 1, budget - s, acc, emit);
            acc.pop();
        }
    }
}
