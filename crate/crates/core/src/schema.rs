//! Regular tree grammars, unranked content models and their
//! first-child/next-sibling encoding.
//!
//! An unranked element `e` with children `c1 .. cn` followed by siblings
//! `s` becomes the binary node `e(enc(c1 .. cn), enc(s))`, and `eps` ends
//! every list.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::automata::{Bta, Rule};
use crate::error::{Error, Result};
use crate::text::{self, Tok, Tokens};
use crate::trees::{RankedAlphabet, SymbolId, Tree, EPS};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Production {
    /// `label(N1, .., Nk)`.
    Cons(SymbolId, Vec<usize>),
    /// Another nonterminal, read as language inclusion.
    Chain(usize),
}

/// A regular tree grammar in normal form plus chain productions.
#[derive(Debug, Clone)]
pub struct TreeGrammar {
    alphabet: RankedAlphabet,
    names: Vec<String>,
    start: Vec<usize>,
    productions: Vec<Vec<Production>>,
}

impl TreeGrammar {
    pub fn new(
        alphabet: RankedAlphabet,
        names: Vec<String>,
        start: Vec<usize>,
        productions: Vec<Vec<Production>>,
    ) -> Result<TreeGrammar> {
        let n = names.len();
        if productions.len() != n {
            return Err(Error::InvalidAutomaton(
                "one production list per nonterminal expected".into(),
            ));
        }
        let undeclared = |k: usize| Error::UndeclaredNonterminal(format!("#{k}"));
        if let Some(&s) = start.iter().find(|&&s| s >= n) {
            return Err(undeclared(s));
        }
        for alts in &productions {
            for p in alts {
                match p {
                    Production::Chain(m) if *m >= n => return Err(undeclared(*m)),
                    Production::Cons(a, args) => {
                        if a.index() >= alphabet.len() {
                            return Err(Error::UnknownSymbol {
                                symbol: format!("#{}", a.0),
                                pos: None,
                            });
                        }
                        if alphabet.arity(*a) != args.len() {
                            return Err(Error::ArityMismatch {
                                symbol: alphabet.name(*a).to_string(),
                                expected: alphabet.arity(*a),
                                found: args.len(),
                                pos: None,
                            });
                        }
                        if let Some(&m) = args.iter().find(|&&m| m >= n) {
                            return Err(undeclared(m));
                        }
                    }
                    Production::Chain(_) => {}
                }
            }
        }
        Ok(TreeGrammar {
            alphabet,
            names,
            start,
            productions,
        })
    }

    /// Reads
    ///
    /// ```text
    /// alphabet: eps/0, a/1      # optional, inferred otherwise
    /// nonterminals: S, T, E     # optional, for ones without productions
    /// start: S
    /// S -> a(S) | eps | T
    /// T -> b()
    /// ```
    ///
    /// A bare name is a chain to a nonterminal when one of that name has a
    /// left-hand side, and a nullary label otherwise; `b()` is always a label.
    pub fn parse(input: &str) -> Result<TreeGrammar> {
        struct Alt {
            label: String,
            pos: crate::error::Position,
            args: Option<Vec<(String, crate::error::Position)>>,
        }
        let mut alphabet = None;
        let mut start_names = Vec::new();
        let mut lhs: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut raw: Vec<Vec<Alt>> = Vec::new();
        for (line_no, line) in text::content_lines(input) {
            let offset = |rest: &str| line.len() - rest.len();
            if let Some(rest) = text::header(line, "alphabet") {
                alphabet = Some(RankedAlphabet::parse_at(rest, line_no, offset(rest))?);
                continue;
            }
            if let Some(rest) = text::header(line, "start") {
                start_names.extend(text::name_list(rest, line_no, offset(rest))?);
                continue;
            }
            if let Some(rest) = text::header(line, "nonterminals") {
                for (name, _) in text::name_list(rest, line_no, offset(rest))? {
                    index.entry(name.clone()).or_insert_with(|| {
                        lhs.push(name);
                        raw.push(Vec::new());
                        lhs.len() - 1
                    });
                }
                continue;
            }
            let mut ts = Tokens::from_line(line, line_no)?;
            let (name, _) = ts.ident()?;
            ts.expect(&Tok::Arrow)?;
            let k = *index.entry(name.clone()).or_insert_with(|| {
                lhs.push(name);
                raw.push(Vec::new());
                lhs.len() - 1
            });
            loop {
                let (label, pos) = ts.ident()?;
                let mut args = None;
                if ts.eat(&Tok::LParen) {
                    let mut v = Vec::new();
                    if !ts.eat(&Tok::RParen) {
                        loop {
                            v.push(ts.ident()?);
                            if ts.eat(&Tok::RParen) {
                                break;
                            }
                            ts.expect(&Tok::Comma)?;
                        }
                    }
                    args = Some(v);
                }
                raw[k].push(Alt { label, pos, args });
                if !ts.eat(&Tok::Pipe) {
                    ts.expect_end()?;
                    break;
                }
            }
        }
        let alphabet = match alphabet {
            Some(a) => a,
            None => {
                let mut syms = Vec::new();
                for alt in raw.iter().flatten() {
                    match &alt.args {
                        Some(args) => syms.push((alt.label.clone(), args.len())),
                        None if !index.contains_key(&alt.label) => {
                            syms.push((alt.label.clone(), 0))
                        }
                        None => {}
                    }
                }
                RankedAlphabet::new(syms)?
            }
        };
        let lookup = |n: &str| {
            index
                .get(n)
                .copied()
                .ok_or_else(|| Error::UndeclaredNonterminal(n.to_string()))
        };
        let mut productions = Vec::with_capacity(raw.len());
        for alts in &raw {
            let mut ps = Vec::new();
            for alt in alts {
                let p = match &alt.args {
                    None if index.contains_key(&alt.label) => Production::Chain(lookup(&alt.label)?),
                    args => {
                        let args = args.as_deref().unwrap_or(&[]);
                        let a = alphabet.id(&alt.label).ok_or_else(|| Error::UnknownSymbol {
                            symbol: alt.label.clone(),
                            pos: Some(alt.pos),
                        })?;
                        if alphabet.arity(a) != args.len() {
                            return Err(Error::ArityMismatch {
                                symbol: alt.label.clone(),
                                expected: alphabet.arity(a),
                                found: args.len(),
                                pos: Some(alt.pos),
                            });
                        }
                        let kids = args
                            .iter()
                            .map(|(n, _)| lookup(n))
                            .collect::<Result<Vec<_>>>()?;
                        Production::Cons(a, kids)
                    }
                };
                ps.push(p);
            }
            productions.push(ps);
        }
        let start = start_names
            .iter()
            .map(|(n, _)| lookup(n))
            .collect::<Result<Vec<_>>>()?;
        TreeGrammar::new(alphabet, lhs, start, productions)
    }

    pub fn alphabet(&self) -> &RankedAlphabet {
        &self.alphabet
    }

    pub fn nonterminal_count(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, n: usize) -> &str {
        &self.names[n]
    }

    pub fn start(&self) -> &[usize] {
        &self.start
    }

    pub fn productions(&self, n: usize) -> &[Production] {
        &self.productions[n]
    }
}

impl fmt::Display for TreeGrammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let declared: HashSet<&str> = self.names.iter().map(String::as_str).collect();
        writeln!(f, "alphabet: {}", self.alphabet)?;
        let start: Vec<&str> = self.start.iter().map(|&s| self.name(s)).collect();
        writeln!(f, "nonterminals: {}", self.names.join(", "))?;
        writeln!(f, "start: {}", start.join(", "))?;
        for (n, alts) in self.productions.iter().enumerate() {
            if alts.is_empty() {
                continue;
            }
            let shown: Vec<String> = alts
                .iter()
                .map(|p| match p {
                    Production::Chain(m) => self.names[*m].clone(),
                    Production::Cons(a, args) => {
                        let label = self.alphabet.name(*a);
                        if args.is_empty() && !declared.contains(&**label) {
                            label.to_string()
                        } else {
                            let kids: Vec<&str> = args.iter().map(|&m| self.name(m)).collect();
                            format!("{label}({})", kids.join(", "))
                        }
                    }
                })
                .collect();
            writeln!(f, "{} -> {}", self.names[n], shown.join(" | "))?;
        }
        Ok(())
    }
}

/// One state per nonterminal; chain productions are closed away.
pub fn grammar_to_bta(g: &TreeGrammar) -> Result<Bta> {
    let n = g.nonterminal_count();
    let mut rules = Vec::new();
    for a in 0..n {
        let mut seen = vec![false; n];
        let mut stack = vec![a];
        seen[a] = true;
        while let Some(b) = stack.pop() {
            for p in g.productions(b) {
                match p {
                    Production::Chain(c) => {
                        if !seen[*c] {
                            seen[*c] = true;
                            stack.push(*c);
                        }
                    }
                    Production::Cons(sym, args) => rules.push(Rule {
                        target: a,
                        symbol: *sym,
                        children: args.clone(),
                    }),
                }
            }
        }
    }
    Bta::new(
        g.alphabet.clone(),
        g.names.clone(),
        g.start.iter().copied(),
        rules,
    )
}

/// An unranked document node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Element {
    pub label: String,
    pub children: Vec<Element>,
}

impl Element {
    pub fn new(label: impl Into<String>, children: Vec<Element>) -> Element {
        Element {
            label: label.into(),
            children,
        }
    }

    pub fn leaf(label: impl Into<String>) -> Element {
        Element::new(label, Vec::new())
    }

    /// Reads the term syntax `html(head(title), body(div))`.
    pub fn parse(input: &str) -> Result<Element> {
        fn go(ts: &mut Tokens) -> Result<Element> {
            let (label, _) = ts.ident()?;
            let mut children = Vec::new();
            if ts.eat(&Tok::LParen) && !ts.eat(&Tok::RParen) {
                loop {
                    children.push(go(ts)?);
                    if ts.eat(&Tok::RParen) {
                        break;
                    }
                    ts.expect(&Tok::Comma)?;
                }
            }
            Ok(Element { label, children })
        }
        let mut ts = Tokens::from_text(input)?;
        let e = go(&mut ts)?;
        if !ts.at_end() {
            return Err(ts.unexpected("end of input"));
        }
        Ok(e)
    }

    pub fn encode(&self) -> Tree {
        encode_forest(std::slice::from_ref(self))
    }

    /// Decodes a tree that encodes exactly one element.
    pub fn decode(t: &Tree) -> Result<Element> {
        let mut v = decode_forest(t)?;
        if v.len() != 1 {
            return Err(Error::NotAnEncoding(format!(
                "expected one root element, found {}",
                v.len()
            )));
        }
        Ok(v.pop().expect("one element"))
    }
}

/// XML-like text, `<a><b/></a>`.
impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.children.is_empty() {
            return write!(f, "<{}/>", self.label);
        }
        write!(f, "<{}>", self.label)?;
        for c in &self.children {
            write!(f, "{c}")?;
        }
        write!(f, "</{}>", self.label)
    }
}

pub fn encode_forest(items: &[Element]) -> Tree {
    let mut t = Tree::eps();
    for e in items.iter().rev() {
        t = Tree::new(e.label.as_str(), vec![encode_forest(&e.children), t]);
    }
    t
}

pub fn decode_forest(t: &Tree) -> Result<Vec<Element>> {
    let mut out = Vec::new();
    let mut cur = t;
    loop {
        match cur.children() {
            [] if cur.label() == EPS => return Ok(out),
            [first, next] => {
                out.push(Element::new(cur.label(), decode_forest(first)?));
                cur = next;
            }
            kids => {
                return Err(Error::NotAnEncoding(format!(
                    "node `{}` has {} children",
                    cur.label(),
                    kids.len()
                )))
            }
        }
    }
}

/// A content model over element names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Content {
    Empty,
    Element(String),
    Seq(Vec<Content>),
    Alt(Vec<Content>),
    Opt(Box<Content>),
    Star(Box<Content>),
    Plus(Box<Content>),
}

impl Content {
    fn elements<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Content::Empty => {}
            Content::Element(e) => out.push(e),
            Content::Seq(xs) | Content::Alt(xs) => xs.iter().for_each(|x| x.elements(out)),
            Content::Opt(x) | Content::Star(x) | Content::Plus(x) => x.elements(out),
        }
    }
}

/// Element declarations with content models, in the style of a DTD:
///
/// ```text
/// start: html
/// html: head, body
/// ul: li+
/// li: (text | b)*
/// text: EMPTY
/// ```
#[derive(Debug, Clone)]
pub struct ContentSchema {
    start: Vec<String>,
    elements: Vec<(String, Content)>,
}

impl ContentSchema {
    pub fn new(start: Vec<String>, elements: Vec<(String, Content)>) -> Result<ContentSchema> {
        let declared: HashSet<&str> = elements.iter().map(|(e, _)| e.as_str()).collect();
        if declared.len() != elements.len() {
            return Err(Error::InvalidAutomaton("element declared twice".into()));
        }
        if declared.contains(EPS) {
            return Err(Error::InvalidAutomaton(format!("`{EPS}` is reserved")));
        }
        let mut used: Vec<&str> = start.iter().map(String::as_str).collect();
        for (_, c) in &elements {
            c.elements(&mut used);
        }
        if let Some(e) = used.iter().find(|e| !declared.contains(*e)) {
            return Err(Error::UndeclaredNonterminal(e.to_string()));
        }
        Ok(ContentSchema { start, elements })
    }

    pub fn parse(input: &str) -> Result<ContentSchema> {
        let mut start = Vec::new();
        let mut elements = Vec::new();
        for (line_no, line) in text::content_lines(input) {
            if let Some(rest) = text::header(line, "start") {
                let offset = line.len() - rest.len();
                start.extend(
                    text::name_list(rest, line_no, offset)?
                        .into_iter()
                        .map(|(n, _)| n),
                );
                continue;
            }
            let mut ts = Tokens::from_line(line, line_no)?;
            let (name, _) = ts.ident()?;
            ts.expect(&Tok::Colon)?;
            let model = parse_alt(&mut ts)?;
            ts.expect_end()?;
            elements.push((name, model));
        }
        ContentSchema::new(start, elements)
    }

    pub fn start(&self) -> &[String] {
        &self.start
    }

    pub fn elements(&self) -> &[(String, Content)] {
        &self.elements
    }
}

fn parse_alt(ts: &mut Tokens) -> Result<Content> {
    let mut alts = vec![parse_seq(ts)?];
    while ts.eat(&Tok::Pipe) {
        alts.push(parse_seq(ts)?);
    }
    Ok(if alts.len() == 1 {
        alts.pop().expect("one")
    } else {
        Content::Alt(alts)
    })
}

fn parse_seq(ts: &mut Tokens) -> Result<Content> {
    let mut items = vec![parse_postfix(ts)?];
    while ts.eat(&Tok::Comma) {
        items.push(parse_postfix(ts)?);
    }
    Ok(if items.len() == 1 {
        items.pop().expect("one")
    } else {
        Content::Seq(items)
    })
}

fn parse_postfix(ts: &mut Tokens) -> Result<Content> {
    let mut c = if ts.eat(&Tok::LParen) {
        let c = parse_alt(ts)?;
        ts.expect(&Tok::RParen)?;
        c
    } else {
        let (name, _) = ts.ident()?;
        if name == "EMPTY" {
            Content::Empty
        } else {
            Content::Element(name)
        }
    };
    loop {
        c = if ts.eat(&Tok::Question) {
            Content::Opt(Box::new(c))
        } else if ts.eat(&Tok::Star) {
            Content::Star(Box::new(c))
        } else if ts.eat(&Tok::Plus) {
            Content::Plus(Box::new(c))
        } else {
            return Ok(c);
        };
    }
}

struct Encoder<'a> {
    schema: &'a ContentSchema,
    alphabet: RankedAlphabet,
    names: Vec<String>,
    taken: HashSet<String>,
    reserved: HashSet<&'a str>,
    productions: Vec<Vec<Production>>,
    content: HashMap<&'a str, usize>,
    placed: HashMap<(&'a str, usize), usize>,
}

impl<'a> Encoder<'a> {
    fn push(&mut self, name: String) -> usize {
        self.taken.insert(name.clone());
        self.names.push(name);
        self.productions.push(Vec::new());
        self.names.len() - 1
    }

    /// Element names stay reserved for their content nonterminals.
    fn fresh(&mut self, base: &str) -> usize {
        let mut name = base.to_string();
        let mut k = 1;
        while self.taken.contains(&name) || self.reserved.contains(name.as_str()) {
            name = format!("{base}.{k}");
            k += 1;
        }
        self.push(name)
    }

    /// Nonterminal for the child list of `e`.
    fn content_of(&mut self, e: &'a str) -> usize {
        if let Some(&n) = self.content.get(e) {
            return n;
        }
        let n = self.push(e.to_string());
        self.content.insert(e, n);
        let model = &self
            .schema
            .elements
            .iter()
            .find(|(x, _)| x == e)
            .expect("validated")
            .1;
        let end = self.end();
        let body = self.compile(model, end);
        self.productions[n].push(Production::Chain(body));
        n
    }

    fn end(&mut self) -> usize {
        *self.content.get(EPS).expect("allocated first")
    }

    /// Nonterminal for `c` followed by whatever `cont` derives.
    fn compile(&mut self, c: &'a Content, cont: usize) -> usize {
        match c {
            Content::Empty => cont,
            Content::Element(e) => self.place(e, cont),
            Content::Seq(xs) => xs.iter().rev().fold(cont, |k, x| self.compile(x, k)),
            Content::Alt(xs) => {
                let n = self.fresh("alt");
                for x in xs {
                    let m = self.compile(x, cont);
                    self.productions[n].push(Production::Chain(m));
                }
                n
            }
            Content::Opt(x) => {
                let n = self.fresh("opt");
                let m = self.compile(x, cont);
                self.productions[n].extend([Production::Chain(cont), Production::Chain(m)]);
                n
            }
            Content::Star(x) => self.star(x, cont),
            Content::Plus(x) => {
                let s = self.star(x, cont);
                self.compile(x, s)
            }
        }
    }

    fn place(&mut self, e: &'a str, cont: usize) -> usize {
        if let Some(&n) = self.placed.get(&(e, cont)) {
            return n;
        }
        let n = self.fresh(&format!("{e}.at"));
        self.placed.insert((e, cont), n);
        let inner = self.content_of(e);
        let sym = self.alphabet.id(e).expect("element symbol");
        self.productions[n].push(Production::Cons(sym, vec![inner, cont]));
        n
    }

    fn star(&mut self, x: &'a Content, cont: usize) -> usize {
        let n = self.fresh("star");
        let m = self.compile(x, n);
        self.productions[n].extend([Production::Chain(cont), Production::Chain(m)]);
        n
    }
}

/// Ranked grammar for the encodings of documents valid under `s`. Every
/// element becomes a binary symbol next to `eps/0`.
pub fn encode_unranked(s: &ContentSchema) -> TreeGrammar {
    let alphabet = RankedAlphabet::new(s.elements.iter().map(|(e, _)| (e.as_str(), 2)))
        .expect("binary element symbols");
    let mut enc = Encoder {
        schema: s,
        alphabet: alphabet.clone(),
        names: Vec::new(),
        taken: HashSet::new(),
        reserved: s.elements.iter().map(|(e, _)| e.as_str()).collect(),
        productions: Vec::new(),
        content: HashMap::new(),
        placed: HashMap::new(),
    };
    let doc = enc.fresh("document");
    let end = enc.fresh("end");
    enc.productions[end].push(Production::Cons(alphabet.eps(), Vec::new()));
    enc.content.insert(EPS, end);
    for e in &s.start {
        let m = enc.place(e, end);
        enc.productions[doc].push(Production::Chain(m));
    }
    TreeGrammar::new(alphabet, enc.names, vec![doc], enc.productions).expect("well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::enumerate_trees;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    const MINI_XHTML: &str = include_str!("../data/mini-xhtml.schema");

    /// Trees derivable from each nonterminal with at most `k` nodes, by
    /// iterating the productions top-down.
    fn derivations(g: &TreeGrammar, k: usize) -> Vec<BTreeSet<Tree>> {
        let n = g.nonterminal_count();
        let mut lang: Vec<BTreeSet<Tree>> = vec![BTreeSet::new(); n];
        loop {
            let mut changed = false;
            for a in 0..n {
                let mut new = Vec::new();
                for p in g.productions(a) {
                    match p {
                        Production::Chain(b) => new.extend(lang[*b].iter().cloned()),
                        Production::Cons(sym, args) => {
                            let mut partial: Vec<(Vec<Tree>, usize)> = vec![(Vec::new(), 1)];
                            for &b in args {
                                let mut next = Vec::new();
                                for (kids, size) in &partial {
                                    for t in &lang[b] {
                                        if size + t.size() <= k {
                                            let mut kids = kids.clone();
                                            kids.push(t.clone());
                                            next.push((kids, size + t.size()));
                                        }
                                    }
                                }
                                partial = next;
                            }
                            let label = g.alphabet().name(*sym).clone();
                            new.extend(partial.into_iter().map(|(kids, _)| Tree::new(label.clone(), kids)));
                        }
                    }
                }
                for t in new {
                    changed |= lang[a].insert(t);
                }
            }
            if !changed {
                return lang;
            }
        }
    }

    fn check_against_derivations(g: &TreeGrammar, k: usize) {
        let bta = grammar_to_bta(g).unwrap();
        let lang = derivations(g, k);
        let expected: BTreeSet<Tree> = g.start().iter().flat_map(|&s| lang[s].iter().cloned()).collect();
        for t in enumerate_trees(g.alphabet(), k) {
            assert_eq!(bta.in_language(&t), expected.contains(&t), "{t} under\n{g}");
        }
    }

    fn random_grammar(seed: u64) -> TreeGrammar {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let alphabet = RankedAlphabet::parse("eps/0, c/0, a/1, b/2").unwrap();
        let syms: Vec<SymbolId> = alphabet.ids().collect();
        let n = rng.gen_range(1..=4);
        let mut productions = vec![Vec::new(); n];
        for alts in productions.iter_mut() {
            for _ in 0..rng.gen_range(0..=3) {
                if rng.gen_bool(0.2) {
                    alts.push(Production::Chain(rng.gen_range(0..n)));
                } else {
                    let s = syms[rng.gen_range(0..syms.len())];
                    let args = (0..alphabet.arity(s)).map(|_| rng.gen_range(0..n)).collect();
                    alts.push(Production::Cons(s, args));
                }
            }
        }
        let names = (0..n).map(|i| format!("N{i}")).collect();
        let start = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        TreeGrammar::new(alphabet, names, start, productions).unwrap()
    }

    /// End positions of matches of `c` against `seq` starting at `i`.
    fn matches(c: &Content, seq: &[&str], i: usize) -> BTreeSet<usize> {
        match c {
            Content::Empty => BTreeSet::from([i]),
            Content::Element(e) => {
                if seq.get(i) == Some(&e.as_str()) {
                    BTreeSet::from([i + 1])
                } else {
                    BTreeSet::new()
                }
            }
            Content::Seq(xs) => xs.iter().fold(BTreeSet::from([i]), |acc, x| {
                acc.iter().flat_map(|&j| matches(x, seq, j)).collect()
            }),
            Content::Alt(xs) => xs.iter().flat_map(|x| matches(x, seq, i)).collect(),
            Content::Opt(x) => {
                let mut r = matches(x, seq, i);
                r.insert(i);
                r
            }
            Content::Star(x) => {
                let mut seen = BTreeSet::from([i]);
                let mut todo = vec![i];
                while let Some(j) = todo.pop() {
                    for k in matches(x, seq, j) {
                        if seen.insert(k) {
                            todo.push(k);
                        }
                    }
                }
                seen
            }
            Content::Plus(x) => matches(x, seq, i)
                .into_iter()
                .flat_map(|j| matches(&Content::Star(x.clone()), seq, j))
                .collect(),
        }
    }

    fn valid(s: &ContentSchema, e: &Element) -> bool {
        let Some((_, model)) = s.elements().iter().find(|(x, _)| *x == e.label) else {
            return false;
        };
        let labels: Vec<&str> = e.children.iter().map(|c| c.label.as_str()).collect();
        matches(model, &labels, 0).contains(&labels.len()) && e.children.iter().all(|c| valid(s, c))
    }

    fn valid_document(s: &ContentSchema, t: &Tree) -> bool {
        match Element::decode(t) {
            Ok(e) => s.start().contains(&e.label) && valid(s, &e),
            Err(_) => false,
        }
    }

    fn doc(text: &str) -> Tree {
        Element::parse(text).unwrap().encode()
    }

    #[test]
    fn single_eps_production() {
        let g = TreeGrammar::parse("alphabet: eps/0, a/1\nstart: S\nS -> eps").unwrap();
        let bta = grammar_to_bta(&g).unwrap();
        for t in enumerate_trees(g.alphabet(), 5) {
            assert_eq!(bta.in_language(&t), t == Tree::eps(), "{t}");
        }
    }

    #[test]
    fn unary_chains() {
        let g = TreeGrammar::parse("alphabet: eps/0, a/1, b/2\nstart: S\nS -> a(S) | eps").unwrap();
        let bta = grammar_to_bta(&g).unwrap();
        for t in enumerate_trees(g.alphabet(), 5) {
            let chain = !t.to_string().contains('b');
            assert_eq!(bta.in_language(&t), chain, "{t}");
        }
    }

    #[test]
    fn chains_and_explicit_nullary_labels() {
        let g = TreeGrammar::parse(
            "start: S\nS -> T | f(S, S)\nT -> U\nU -> c | T()\n",
        )
        .unwrap();
        assert_eq!(g.alphabet().arity_of("T"), Some(0));
        check_against_derivations(&g, 5);
        let bta = grammar_to_bta(&g).unwrap();
        assert!(bta.in_language(&Tree::leaf("T")));
        assert!(bta.in_language(&Tree::new("f", vec![Tree::leaf("c"), Tree::leaf("T")])));
    }

    #[test]
    fn undeclared_nonterminal() {
        let err = TreeGrammar::parse("start: S\nS -> a(R)").unwrap_err();
        assert_eq!(err, Error::UndeclaredNonterminal("R".into()));
        let err = TreeGrammar::parse("start: R\nS -> eps").unwrap_err();
        assert_eq!(err, Error::UndeclaredNonterminal("R".into()));
        let err = ContentSchema::parse("start: x\nx: y*").unwrap_err();
        assert_eq!(err, Error::UndeclaredNonterminal("y".into()));
    }

    #[test]
    fn random_grammars_match_derivations() {
        for seed in 0..60 {
            let g = random_grammar(seed);
            check_against_derivations(&g, 5);
            let again = TreeGrammar::parse(&g.to_string()).unwrap();
            let (x, y) = (grammar_to_bta(&g).unwrap(), grammar_to_bta(&again).unwrap());
            for t in enumerate_trees(g.alphabet(), 5) {
                assert_eq!(x.in_language(&t), y.in_language(&t));
            }
        }
    }

    #[test]
    fn encoding_shapes() {
        let leaf = Element::leaf("p");
        assert_eq!(leaf.encode().to_string(), "p(eps,eps)");
        let two = encode_forest(&[Element::leaf("p"), Element::leaf("q")]);
        assert_eq!(two.to_string(), "p(eps,q(eps,eps))");
        let nested = Element::parse("html(head(title), body(div))").unwrap();
        assert_eq!(nested.to_string(), "<html><head><title/></head><body><div/></body></html>");
        assert_eq!(Element::decode(&nested.encode()).unwrap(), nested);
        assert!(Element::decode(&Tree::eps()).is_err());
        assert!(decode_forest(&Tree::new("p", vec![Tree::eps()])).is_err());
    }

    #[test]
    fn content_models_match_oracle() {
        let schemas = [
            "start: r\nr: (x | y)*, x?\nx: EMPTY\ny: x+",
            "start: r, x\nr: x, (y, x)+ | EMPTY\nx: y?\ny: EMPTY",
            "start: r\nr: ((x, y) | (y, x))*\nx: r?\ny: EMPTY",
        ];
        for text in schemas {
            let s = ContentSchema::parse(text).unwrap();
            let g = encode_unranked(&s);
            let bta = grammar_to_bta(&g).unwrap();
            let mut accepted = 0;
            for t in enumerate_trees(g.alphabet(), 9) {
                let want = valid_document(&s, &t);
                assert_eq!(bta.in_language(&t), want, "{t} under\n{text}");
                accepted += want as usize;
            }
            assert!(accepted > 3, "{text}");
        }
    }

    #[test]
    fn mini_xhtml_documents() {
        let s = ContentSchema::parse(MINI_XHTML).unwrap();
        let g = encode_unranked(&s);
        assert_eq!(g.alphabet().len(), 13);
        let bta = grammar_to_bta(&g).unwrap();
        let good = [
            "html(head(title), body(text))",
            "html(head(title(text)), body(div, h1(b(text)), ul(li, li(a(text)))))",
            "html(head(title), body(b(a, text), div(div(h2))))",
        ];
        let bad = [
            "html(head(title), body)",
            "html(head(title), body(b))",
            "html(head, body(text))",
            "html(body(text), head(title))",
            "html(head(title), body(ul))",
            "html(head(title), body(h1(div)))",
            "body(text)",
        ];
        for d in good {
            assert!(bta.in_language(&doc(d)), "{d}");
        }
        for d in bad {
            assert!(!bta.in_language(&doc(d)), "{d}");
        }
        assert!(!bta.in_language(&encode_forest(&[
            Element::parse("html(head(title), body(text))").unwrap(),
            Element::parse("html(head(title), body(text))").unwrap(),
        ])));
        let w = bta.witness().unwrap();
        assert!(valid_document(&s, &w));
    }

    fn arb_element() -> impl Strategy<Value = Element> {
        let leaf = prop::sample::select(vec!["p", "q", "r"]).prop_map(Element::leaf);
        leaf.prop_recursive(4, 24, 3, |inner| {
            (prop::sample::select(vec!["p", "q", "r"]), prop::collection::vec(inner, 0..4))
                .prop_map(|(l, c)| Element::new(l, c))
        })
    }

    proptest! {
        #[test]
        fn encode_decode_roundtrip(e in arb_element()) {
            prop_assert_eq!(Element::decode(&e.encode()).unwrap(), e.clone());
            let forest = vec![e.clone(), e];
            prop_assert_eq!(decode_forest(&encode_forest(&forest)).unwrap(), forest);
        }

        #[test]
        fn mini_xhtml_matches_oracle(e in arb_xhtml()) {
            let s = ContentSchema::parse(MINI_XHTML).unwrap();
            let bta = grammar_to_bta(&encode_unranked(&s)).unwrap();
            let t = e.encode();
            prop_assert_eq!(bta.in_language(&t), valid_document(&s, &t));
        }
    }

    /// Mostly well-formed documents, perturbed at random.
    fn arb_xhtml() -> impl Strategy<Value = Element> {
        let flow = vec!["div", "h1", "h2", "ul", "li", "text", "b", "a"];
        let inner = prop::sample::select(flow.clone()).prop_map(Element::leaf).prop_recursive(3, 16, 3, move |inner| {
            (prop::sample::select(flow.clone()), prop::collection::vec(inner, 0..3))
                .prop_map(|(l, c)| Element::new(l, c))
        });
        (prop::collection::vec(inner, 0..3), any::<bool>(), any::<bool>()).prop_map(|(body, title_text, swap)| {
            let title = if title_text {
                Element::new("title", vec![Element::leaf("text")])
            } else {
                Element::leaf("title")
            };
            let mut kids = vec![Element::new("head", vec![title]), Element::new("body", body)];
            if swap {
                kids.reverse();
            }
            Element::new("html", kids)
        })
    }
}
