//! Macro tree transducers with accumulating parameters.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::rc::Rc;

use crate::automata::Bta;
use crate::error::{Error, Position, Result};
use crate::maxplus::{least_solution, Bound, Term};
use crate::text::{self, Tok, Tokens};
use crate::trees::{RankedAlphabet, SymbolId, Tree};

pub type ProcId = usize;

/// A right-hand side. Child and parameter indices are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Cons(SymbolId, Vec<Expr>),
    /// `p(x_h, e_1, ..., e_l)`.
    Call(ProcId, usize, Vec<Expr>),
    Param(usize),
}

impl Expr {
    /// Calls `f(callee, h)` for every call, outermost first.
    pub fn visit_calls(&self, f: &mut dyn FnMut(ProcId, usize)) {
        match self {
            Expr::Cons(_, args) => args.iter().for_each(|e| e.visit_calls(f)),
            Expr::Call(p, h, args) => {
                f(*p, *h);
                args.iter().for_each(|e| e.visit_calls(f));
            }
            Expr::Param(_) => {}
        }
    }

    pub fn uses_param(&self, j: usize) -> bool {
        match self {
            Expr::Param(i) => *i == j,
            Expr::Cons(_, args) | Expr::Call(_, _, args) => args.iter().any(|e| e.uses_param(j)),
        }
    }

    fn map_calls(&self, f: &mut dyn FnMut(ProcId, usize) -> ProcId) -> Expr {
        match self {
            Expr::Cons(a, args) => Expr::Cons(*a, args.iter().map(|e| e.map_calls(f)).collect()),
            Expr::Call(p, h, args) => {
                let q = f(*p, *h);
                Expr::Call(q, *h, args.iter().map(|e| e.map_calls(f)).collect())
            }
            Expr::Param(j) => Expr::Param(*j),
        }
    }

    fn map_symbols(&self, f: &dyn Fn(SymbolId) -> SymbolId) -> Expr {
        match self {
            Expr::Cons(a, args) => Expr::Cons(f(*a), args.iter().map(|e| e.map_symbols(f)).collect()),
            Expr::Call(p, h, args) => Expr::Call(*p, *h, args.iter().map(|e| e.map_symbols(f)).collect()),
            Expr::Param(j) => Expr::Param(*j),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MttRule {
    pub proc: ProcId,
    pub symbol: SymbolId,
    pub body: Expr,
}

/// A macro tree transducer. Input and output trees share one alphabet.
#[derive(Debug, Clone)]
pub struct Mtt {
    alphabet: RankedAlphabet,
    names: Vec<String>,
    arities: Vec<usize>,
    initial: Vec<ProcId>,
    rules: Vec<MttRule>,
    by_key: HashMap<(ProcId, SymbolId), Vec<usize>>,
}

impl Mtt {
    pub fn new(
        alphabet: RankedAlphabet,
        procedures: Vec<(String, usize)>,
        initial: Vec<ProcId>,
        rules: Vec<MttRule>,
    ) -> Result<Mtt> {
        let (names, arities): (Vec<String>, Vec<usize>) = procedures.into_iter().unzip();
        let mut seen = HashSet::new();
        for n in &names {
            if !seen.insert(n) {
                return Err(Error::InvalidTransducer(format!("duplicate procedure `{n}`")));
            }
        }
        for &p in &initial {
            if p >= names.len() {
                return Err(Error::InvalidTransducer("unknown initial procedure".into()));
            }
            if arities[p] != 0 {
                return Err(Error::InvalidTransducer(format!(
                    "initial procedure `{}` must have no parameters",
                    names[p]
                )));
            }
        }
        let mut by_key: HashMap<(ProcId, SymbolId), Vec<usize>> = HashMap::new();
        for (k, r) in rules.iter().enumerate() {
            if r.proc >= names.len() || r.symbol.index() >= alphabet.len() {
                return Err(Error::InvalidTransducer("rule for unknown procedure or symbol".into()));
            }
            let n = alphabet.arity(r.symbol);
            check_expr(&r.body, n, arities[r.proc], &alphabet, &names, &arities).map_err(|m| {
                Error::InvalidTransducer(format!(
                    "rule {}({}): {m}",
                    names[r.proc],
                    alphabet.name(r.symbol)
                ))
            })?;
            by_key.entry((r.proc, r.symbol)).or_default().push(k);
        }
        let mut initial = initial;
        initial.sort_unstable();
        initial.dedup();
        Ok(Mtt {
            alphabet,
            names,
            arities,
            initial,
            rules,
            by_key,
        })
    }

    pub fn alphabet(&self) -> &RankedAlphabet {
        &self.alphabet
    }

    pub fn proc_count(&self) -> usize {
        self.names.len()
    }

    pub fn proc_name(&self, p: ProcId) -> &str {
        &self.names[p]
    }

    pub fn proc_arity(&self, p: ProcId) -> usize {
        self.arities[p]
    }

    pub fn proc_id(&self, name: &str) -> Option<ProcId> {
        self.names.iter().position(|n| n == name)
    }

    pub fn initial(&self) -> &[ProcId] {
        &self.initial
    }

    pub fn rules(&self) -> &[MttRule] {
        &self.rules
    }

    pub fn max_arity(&self) -> usize {
        self.arities.iter().copied().max().unwrap_or(0)
    }

    /// Bodies of the rules for `p` on `a`.
    pub fn bodies(&self, p: ProcId, a: SymbolId) -> impl Iterator<Item = &Expr> + '_ {
        self.by_key
            .get(&(p, a))
            .into_iter()
            .flatten()
            .map(|&k| &self.rules[k].body)
    }

    pub fn with_alphabet(&self, alphabet: &RankedAlphabet) -> Result<Mtt> {
        if !self.alphabet.is_subset_of(alphabet) {
            return Err(Error::AlphabetMismatch(format!(
                "{{{}}} is not contained in {{{alphabet}}}",
                self.alphabet
            )));
        }
        let remap = |a: SymbolId| alphabet.id(self.alphabet.name(a)).unwrap();
        let rules = self
            .rules
            .iter()
            .map(|r| MttRule {
                proc: r.proc,
                symbol: remap(r.symbol),
                body: r.body.map_symbols(&remap),
            })
            .collect();
        Mtt::new(alphabet.clone(), self.procedures(), self.initial.clone(), rules)
    }

    fn procedures(&self) -> Vec<(String, usize)> {
        self.names.iter().cloned().zip(self.arities.iter().copied()).collect()
    }

    /// `T(t)`: the union of `⟦p0⟧(t)` over the initial procedures.
    pub fn evaluate(&self, t: &Tree) -> BTreeSet<Tree> {
        let mut ev = Evaluator::new(self, Limits::unbounded());
        let mut out = BTreeSet::new();
        for &p in &self.initial {
            out.extend(ev.proc(p, t, &[]).expect("unbounded").iter().cloned());
        }
        out
    }

    /// Like [`Mtt::evaluate`] but gives up (returns `None`) once a result
    /// set or an output tree exceeds `limits`.
    pub fn evaluate_bounded(&self, t: &Tree, limits: Limits) -> Option<BTreeSet<Tree>> {
        let mut ev = Evaluator::new(self, limits);
        let mut out = BTreeSet::new();
        for &p in &self.initial {
            out.extend(ev.proc(p, t, &[]).ok()?.iter().cloned());
            if out.len() > limits.max_results {
                return None;
            }
        }
        Some(out)
    }

    /// `⟦p⟧(t, params)`.
    pub fn eval_proc(&self, p: ProcId, t: &Tree, params: &[Tree]) -> BTreeSet<Tree> {
        let mut ev = Evaluator::new(self, Limits::unbounded());
        ev.proc(p, t, params).expect("unbounded").as_ref().clone()
    }

    /// Procedures reachable from the initial ones through syntactic calls.
    pub fn reachable_procedures(&self) -> Vec<ProcId> {
        let mut seen = vec![false; self.proc_count()];
        let mut stack: Vec<ProcId> = self.initial.clone();
        for &p in &stack {
            seen[p] = true;
        }
        while let Some(p) = stack.pop() {
            for r in self.rules.iter().filter(|r| r.proc == p) {
                r.body.visit_calls(&mut |q, _| {
                    if !seen[q] {
                        seen[q] = true;
                        stack.push(q);
                    }
                });
            }
        }
        (0..self.proc_count()).filter(|&p| seen[p]).collect()
    }

    /// Every reachable procedure has exactly one rule per symbol.
    pub fn is_total_deterministic_syntactic(&self) -> bool {
        self.reachable_procedures().into_iter().all(|p| {
            self.alphabet
                .ids()
                .all(|a| self.by_key.get(&(p, a)).map_or(0, Vec::len) == 1)
        })
    }

    /// Per-procedure maximal copy numbers: the least solution of
    /// `b[p] ≥ Σ_{calls q(x_i, ...) in e} b[q]` for every rule `p(a(x⃗), y⃗) → e`
    /// and child `i`.
    pub fn copy_bounds(&self) -> Vec<Bound> {
        let mut constraints = Vec::new();
        for r in &self.rules {
            for i in 1..=self.alphabet.arity(r.symbol) {
                let mut calls = Vec::new();
                r.body.visit_calls(&mut |q, h| {
                    if h == i {
                        calls.push(Term::Var(q));
                    }
                });
                constraints.push((r.proc, Term::Sum(calls)));
            }
        }
        least_solution(self.proc_count(), &constraints)
    }

    /// The maximum copy bound over the initial procedures.
    pub fn copy_bound(&self) -> Bound {
        let per = self.copy_bounds();
        self.initial
            .iter()
            .map(|&p| per[p])
            .max()
            .unwrap_or(Bound::Finite(0))
    }

    /// A transducer `T′` with `T′(v) = T(v)` for `v ∈ L(in_type)` and
    /// `T′(v) = ∅` otherwise.
    ///
    /// Procedures are pairs `p@q`. For each rule of `p` on `a` and each
    /// transition `q ← a(q⃗)`, the rule of `p@q` calls `p′@q_h` on child `h`.
    /// Children the body never visits are checked by wrapping the body in
    /// `chk@q_h(x_h, body)`, where `chk@q` returns its parameter iff the
    /// subtree is in `⟦q⟧`. Since every subexpression is strict, a failed
    /// check empties the result.
    pub fn encode_input_type(&self, in_type: &Bta) -> Result<Mtt> {
        if in_type.alphabet() != &self.alphabet {
            return Err(Error::AlphabetMismatch(format!(
                "{{{}}} vs {{{}}}",
                self.alphabet,
                in_type.alphabet()
            )));
        }
        let nq = in_type.state_count();
        let np = self.proc_count();
        let pair = |p: ProcId, q: usize| p * nq + q;
        let guard = |q: usize| np * nq + q;
        let mut procedures = Vec::with_capacity(np * nq + nq);
        for p in 0..np {
            for q in 0..nq {
                procedures.push((
                    format!("{}@{}", self.names[p], in_type.state_name(q)),
                    self.arities[p],
                ));
            }
        }
        for q in 0..nq {
            procedures.push((format!("chk@{}", in_type.state_name(q)), 1));
        }
        let mut rules = Vec::new();
        for r in &self.rules {
            for tr in in_type.rules_for(r.symbol) {
                let mut visited = vec![false; tr.children.len()];
                let mut body = r.body.map_calls(&mut |callee, h| {
                    visited[h - 1] = true;
                    pair(callee, tr.children[h - 1])
                });
                for (i, &seen) in visited.iter().enumerate().rev() {
                    if !seen {
                        body = Expr::Call(guard(tr.children[i]), i + 1, vec![body]);
                    }
                }
                rules.push(MttRule {
                    proc: pair(r.proc, tr.target),
                    symbol: r.symbol,
                    body,
                });
            }
        }
        for tr in in_type.rules() {
            let mut body = Expr::Param(1);
            for (i, &qi) in tr.children.iter().enumerate().rev() {
                body = Expr::Call(guard(qi), i + 1, vec![body]);
            }
            rules.push(MttRule {
                proc: guard(tr.target),
                symbol: tr.symbol,
                body,
            });
        }
        let initial = self
            .initial
            .iter()
            .flat_map(|&p| in_type.finals().map(move |q| pair(p, q)))
            .collect();
        Mtt::new(self.alphabet.clone(), procedures, initial, rules)
    }

    /// Parses the text format:
    ///
    /// ```text
    /// alphabet: eps/0, a/1, b/2
    /// initial: p0
    /// procedures: p0/0, p/1
    /// p0(a(x1)) -> p(x1, eps)
    /// p(eps, y1) -> b(y1, y1)
    /// ```
    ///
    /// `alphabet:` and `procedures:` are optional and otherwise inferred.
    /// In bodies, `name(x_h, ...)` is a call when `name` is a procedure,
    /// `y_j` is a parameter, anything else is a constructor.
    pub fn parse(input: &str) -> Result<Mtt> {
        let mut alphabet: Option<RankedAlphabet> = None;
        let mut declared_procs: Vec<(String, usize, Position)> = Vec::new();
        let mut initial_names = Vec::new();
        let mut raw_rules = Vec::new();
        for (line_no, line) in text::content_lines(input) {
            let offset = |rest: &str| line.len() - rest.len();
            if let Some(rest) = text::header(line, "alphabet") {
                alphabet = Some(RankedAlphabet::parse_at(rest, line_no, offset(rest))?);
            } else if let Some(rest) = text::header(line, "initial") {
                initial_names.extend(text::name_list(rest, line_no, offset(rest))?);
            } else if let Some(rest) = text::header(line, "procedures") {
                let mut ts = Tokens::from_line(line, line_no)?;
                // Skip `procedures :`.
                ts.ident()?;
                ts.expect(&Tok::Colon)?;
                let _ = rest;
                while !ts.at_end() {
                    let (name, pos) = ts.ident()?;
                    ts.expect(&Tok::Slash)?;
                    let (num, npos) = ts.ident()?;
                    let k = num.parse().map_err(|_| Error::Syntax {
                        pos: npos,
                        message: format!("expected an arity, found `{num}`"),
                    })?;
                    declared_procs.push((name, k, pos));
                    if !ts.eat(&Tok::Comma) {
                        ts.expect_end()?;
                    }
                }
            } else {
                raw_rules.push(parse_rule_line(line, line_no)?);
            }
        }
        let mut procs: Vec<(String, usize)> = Vec::new();
        let mut proc_pos: HashMap<String, usize> = HashMap::new();
        for (name, k, pos) in declared_procs {
            if proc_pos.contains_key(&name) {
                return Err(Error::Syntax {
                    pos,
                    message: format!("procedure `{name}` declared twice"),
                });
            }
            proc_pos.insert(name.clone(), procs.len());
            procs.push((name, k));
        }
        for r in &raw_rules {
            let k = r.params.len();
            match proc_pos.get(&r.proc) {
                Some(&p) if procs[p].1 != k => {
                    return Err(Error::ArityMismatch {
                        symbol: r.proc.clone(),
                        expected: procs[p].1,
                        found: k,
                        pos: Some(r.pos),
                    })
                }
                Some(_) => {}
                None => {
                    proc_pos.insert(r.proc.clone(), procs.len());
                    procs.push((r.proc.clone(), k));
                }
            }
        }
        for (name, pos) in &initial_names {
            if !proc_pos.contains_key(name) {
                proc_pos.insert(name.clone(), procs.len());
                procs.push((name.clone(), 0));
                let _ = pos;
            }
        }
        // Procedures only ever called still need an entry.
        for r in &raw_rules {
            collect_called(&r.body, &mut procs, &mut proc_pos);
        }
        let alphabet = match alphabet {
            Some(a) => a,
            None => {
                let mut syms = Vec::new();
                for r in &raw_rules {
                    syms.push((r.symbol.clone(), r.children.len()));
                    collect_constructors(&r.body, &proc_pos, &mut syms);
                }
                RankedAlphabet::new(syms)?
            }
        };
        let mut rules = Vec::new();
        for r in raw_rules {
            let sym = alphabet.id(&r.symbol).ok_or_else(|| Error::UnknownSymbol {
                symbol: r.symbol.clone(),
                pos: Some(r.symbol_pos),
            })?;
            if alphabet.arity(sym) != r.children.len() {
                return Err(Error::ArityMismatch {
                    symbol: r.symbol,
                    expected: alphabet.arity(sym),
                    found: r.children.len(),
                    pos: Some(r.symbol_pos),
                });
            }
            let proc = proc_pos[&r.proc];
            let body = resolve(&r.body, &alphabet, &proc_pos, &procs, &r.children, &r.params)?;
            rules.push(MttRule {
                proc,
                symbol: sym,
                body,
            });
        }
        let mut initial = Vec::new();
        for (name, pos) in initial_names {
            let p = proc_pos[&name];
            if procs[p].1 != 0 {
                return Err(Error::Syntax {
                    pos,
                    message: format!("initial procedure `{name}` must have no parameters"),
                });
            }
            initial.push(p);
        }
        Mtt::new(alphabet, procs, initial, rules)
    }

    pub fn display_expr<'a>(&'a self, e: &'a Expr) -> impl fmt::Display + 'a {
        ShowExpr { m: self, e }
    }
}

fn check_expr(
    e: &Expr,
    n: usize,
    k: usize,
    alphabet: &RankedAlphabet,
    names: &[String],
    arities: &[usize],
) -> std::result::Result<(), String> {
    match e {
        Expr::Param(j) => {
            if *j == 0 || *j > k {
                return Err(format!("parameter y{j} out of range (arity {k})"));
            }
        }
        Expr::Cons(a, args) => {
            if a.index() >= alphabet.len() || alphabet.arity(*a) != args.len() {
                return Err("constructor arity mismatch".into());
            }
        }
        Expr::Call(p, h, args) => {
            if *p >= names.len() {
                return Err("call to an unknown procedure".into());
            }
            if *h == 0 || *h > n {
                return Err(format!("child x{h} out of range (arity {n})"));
            }
            if arities[*p] != args.len() {
                return Err(format!(
                    "`{}` expects {} parameters, got {}",
                    names[*p],
                    arities[*p],
                    args.len()
                ));
            }
        }
    }
    match e {
        Expr::Cons(_, args) | Expr::Call(_, _, args) => args
            .iter()
            .try_for_each(|a| check_expr(a, n, k, alphabet, names, arities)),
        Expr::Param(_) => Ok(()),
    }
}

/// Parsed but unresolved syntax.
#[derive(Debug)]
enum RawExpr {
    App(String, Position, Vec<RawExpr>),
    Name(String, Position),
}

struct RawRule {
    proc: String,
    pos: Position,
    symbol: String,
    symbol_pos: Position,
    children: Vec<String>,
    params: Vec<String>,
    body: RawExpr,
}

fn parse_rule_line(line: &str, line_no: usize) -> Result<RawRule> {
    let mut ts = Tokens::from_line(line, line_no)?;
    let (proc, pos) = ts.ident()?;
    ts.expect(&Tok::LParen)?;
    let (symbol, symbol_pos) = ts.ident()?;
    let mut children = Vec::new();
    if ts.eat(&Tok::LParen) {
        loop {
            let (x, xpos) = ts.ident()?;
            if x != format!("x{}", children.len() + 1) {
                return Err(Error::Syntax {
                    pos: xpos,
                    message: format!("expected `x{}`, found `{x}`", children.len() + 1),
                });
            }
            children.push(x);
            if ts.eat(&Tok::RParen) {
                break;
            }
            ts.expect(&Tok::Comma)?;
        }
    }
    let mut params = Vec::new();
    while ts.eat(&Tok::Comma) {
        let (y, ypos) = ts.ident()?;
        if y != format!("y{}", params.len() + 1) {
            return Err(Error::Syntax {
                pos: ypos,
                message: format!("expected `y{}`, found `{y}`", params.len() + 1),
            });
        }
        params.push(y);
    }
    ts.expect(&Tok::RParen)?;
    ts.expect(&Tok::Arrow)?;
    let body = parse_raw_expr(&mut ts)?;
    ts.expect_end()?;
    Ok(RawRule {
        proc,
        pos,
        symbol,
        symbol_pos,
        children,
        params,
        body,
    })
}

fn parse_raw_expr(ts: &mut Tokens) -> Result<RawExpr> {
    let (name, pos) = ts.ident()?;
    if !ts.eat(&Tok::LParen) {
        return Ok(RawExpr::Name(name, pos));
    }
    let mut args = Vec::new();
    loop {
        args.push(parse_raw_expr(ts)?);
        if ts.eat(&Tok::RParen) {
            break;
        }
        ts.expect(&Tok::Comma)?;
    }
    Ok(RawExpr::App(name, pos, args))
}

/// `x<n>` and `y<n>` are reserved for variables.
fn is_var_name(n: &str, prefix: char) -> bool {
    n.starts_with(prefix) && n.len() > 1 && n[1..].bytes().all(|b| b.is_ascii_digit())
}

fn is_child_var(args: &[RawExpr]) -> bool {
    matches!(args.first(), Some(RawExpr::Name(n, _)) if is_var_name(n, 'x'))
}

fn collect_called(e: &RawExpr, procs: &mut Vec<(String, usize)>, index: &mut HashMap<String, usize>) {
    if let RawExpr::App(name, _, args) = e {
        if !index.contains_key(name) && is_child_var(args) {
            index.insert(name.clone(), procs.len());
            procs.push((name.clone(), args.len() - 1));
        }
        args.iter().for_each(|a| collect_called(a, procs, index));
    }
}

fn collect_constructors(
    e: &RawExpr,
    procs: &HashMap<String, usize>,
    out: &mut Vec<(String, usize)>,
) {
    match e {
        RawExpr::Name(n, _) => {
            if !is_var_name(n, 'x') && !is_var_name(n, 'y') {
                out.push((n.clone(), 0));
            }
        }
        RawExpr::App(name, _, args) => {
            if procs.contains_key(name) {
                args.iter().skip(1).for_each(|a| collect_constructors(a, procs, out));
            } else {
                out.push((name.clone(), args.len()));
                args.iter().for_each(|a| collect_constructors(a, procs, out));
            }
        }
    }
}

fn resolve(
    e: &RawExpr,
    alphabet: &RankedAlphabet,
    procs: &HashMap<String, usize>,
    arities: &[(String, usize)],
    children: &[String],
    params: &[String],
) -> Result<Expr> {
    match e {
        RawExpr::Name(n, pos) => {
            if let Some(j) = params.iter().position(|y| y == n) {
                return Ok(Expr::Param(j + 1));
            }
            if is_var_name(n, 'x') {
                return Err(Error::Syntax {
                    pos: *pos,
                    message: format!("`{n}` may only appear as the first argument of a call"),
                });
            }
            if is_var_name(n, 'y') {
                return Err(Error::Syntax {
                    pos: *pos,
                    message: format!("`{n}` is not a parameter of this rule"),
                });
            }
            cons(alphabet, n, *pos, Vec::new())
        }
        RawExpr::App(name, pos, args) => {
            if let Some(&p) = procs.get(name) {
                let Some(RawExpr::Name(x, xpos)) = args.first() else {
                    return Err(Error::Syntax {
                        pos: *pos,
                        message: format!("call to `{name}` must start with a child variable"),
                    });
                };
                let h = children.iter().position(|c| c == x).ok_or_else(|| Error::Syntax {
                    pos: *xpos,
                    message: format!("`{x}` is not a child variable of this rule"),
                })? + 1;
                if arities[p].1 + 1 != args.len() {
                    return Err(Error::ArityMismatch {
                        symbol: name.clone(),
                        expected: arities[p].1,
                        found: args.len() - 1,
                        pos: Some(*pos),
                    });
                }
                let rest = args[1..]
                    .iter()
                    .map(|a| resolve(a, alphabet, procs, arities, children, params))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Expr::Call(p, h, rest))
            } else {
                let rest = args
                    .iter()
                    .map(|a| resolve(a, alphabet, procs, arities, children, params))
                    .collect::<Result<Vec<_>>>()?;
                cons(alphabet, name, *pos, rest)
            }
        }
    }
}

fn cons(alphabet: &RankedAlphabet, name: &str, pos: Position, args: Vec<Expr>) -> Result<Expr> {
    let id = alphabet.id(name).ok_or_else(|| Error::UnknownSymbol {
        symbol: name.to_string(),
        pos: Some(pos),
    })?;
    if alphabet.arity(id) != args.len() {
        return Err(Error::ArityMismatch {
            symbol: name.to_string(),
            expected: alphabet.arity(id),
            found: args.len(),
            pos: Some(pos),
        });
    }
    Ok(Expr::Cons(id, args))
}

struct ShowExpr<'a> {
    m: &'a Mtt,
    e: &'a Expr,
}

impl fmt::Display for ShowExpr<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args = |f: &mut fmt::Formatter<'_>, head: Option<usize>, es: &[Expr]| -> fmt::Result {
            let mut first = true;
            f.write_str("(")?;
            if let Some(h) = head {
                write!(f, "x{h}")?;
                first = false;
            }
            for e in es {
                if !first {
                    f.write_str(", ")?;
                }
                first = false;
                write!(f, "{}", ShowExpr { m: self.m, e })?;
            }
            f.write_str(")")
        };
        match self.e {
            Expr::Param(j) => write!(f, "y{j}"),
            Expr::Cons(a, es) => {
                f.write_str(self.m.alphabet.name(*a))?;
                if es.is_empty() {
                    Ok(())
                } else {
                    args(f, None, es)
                }
            }
            Expr::Call(p, h, es) => {
                f.write_str(&self.m.names[*p])?;
                args(f, Some(*h), es)
            }
        }
    }
}

impl fmt::Display for Mtt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "alphabet: {}", self.alphabet)?;
        let init: Vec<&str> = self.initial.iter().map(|&p| &*self.names[p]).collect();
        writeln!(f, "initial: {}", init.join(", "))?;
        let procs: Vec<String> = (0..self.proc_count())
            .map(|p| format!("{}/{}", self.names[p], self.arities[p]))
            .collect();
        writeln!(f, "procedures: {}", procs.join(", "))?;
        for r in &self.rules {
            let n = self.alphabet.arity(r.symbol);
            write!(f, "{}({}", self.names[r.proc], self.alphabet.name(r.symbol))?;
            if n > 0 {
                let xs: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
                write!(f, "({})", xs.join(","))?;
            }
            for j in 1..=self.arities[r.proc] {
                write!(f, ", y{j}")?;
            }
            writeln!(f, ") -> {}", self.display_expr(&r.body))?;
        }
        Ok(())
    }
}

/// Caps for [`Mtt::evaluate_bounded`].
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    pub max_results: usize,
    pub max_nodes: usize,
}

impl Limits {
    pub fn unbounded() -> Self {
        Limits {
            max_results: usize::MAX,
            max_nodes: usize::MAX,
        }
    }
}

#[derive(Debug)]
struct Overflow;

type Results = Rc<BTreeSet<Tree>>;

struct Evaluator<'a> {
    m: &'a Mtt,
    limits: Limits,
    memo: HashMap<(ProcId, Tree, Vec<Tree>), Results>,
}

impl<'a> Evaluator<'a> {
    fn new(m: &'a Mtt, limits: Limits) -> Self {
        Evaluator {
            m,
            limits,
            memo: HashMap::new(),
        }
    }

    fn proc(&mut self, p: ProcId, t: &Tree, params: &[Tree]) -> std::result::Result<Results, Overflow> {
        let key = (p, t.clone(), params.to_vec());
        if let Some(r) = self.memo.get(&key) {
            return Ok(r.clone());
        }
        let mut out = BTreeSet::new();
        if let Some(a) = self.m.alphabet.id(t.label()) {
            if self.m.alphabet.arity(a) == t.children().len() {
                let bodies: Vec<&Expr> = self.m.bodies(p, a).collect();
                for e in bodies {
                    let r = self.expr(e, t.children(), params)?;
                    out.extend(r.iter().cloned());
                    self.check(&out)?;
                }
            }
        }
        let r = Rc::new(out);
        self.memo.insert(key, r.clone());
        Ok(r)
    }

    fn check(&self, s: &BTreeSet<Tree>) -> std::result::Result<(), Overflow> {
        if s.len() > self.limits.max_results {
            return Err(Overflow);
        }
        if self.limits.max_nodes != usize::MAX
            && s.iter().any(|t| t.size() > self.limits.max_nodes)
        {
            return Err(Overflow);
        }
        Ok(())
    }

    fn expr(&mut self, e: &Expr, kids: &[Tree], params: &[Tree]) -> std::result::Result<Results, Overflow> {
        match e {
            Expr::Param(j) => Ok(Rc::new(BTreeSet::from([params[j - 1].clone()]))),
            Expr::Cons(a, args) => {
                let label = self.m.alphabet.name(*a).clone();
                let mut sets = Vec::with_capacity(args.len());
                for arg in args {
                    let s = self.expr(arg, kids, params)?;
                    if s.is_empty() {
                        return Ok(Rc::new(BTreeSet::new()));
                    }
                    sets.push(s);
                }
                let mut out = BTreeSet::new();
                for combo in product(&sets) {
                    out.insert(Tree::new(label.clone(), combo));
                }
                self.check(&out)?;
                Ok(Rc::new(out))
            }
            Expr::Call(p, h, args) => {
                let mut sets = Vec::with_capacity(args.len());
                for arg in args {
                    let s = self.expr(arg, kids, params)?;
                    if s.is_empty() {
                        return Ok(Rc::new(BTreeSet::new()));
                    }
                    sets.push(s);
                }
                let mut out = BTreeSet::new();
                for combo in product(&sets) {
                    let r = self.proc(*p, &kids[h - 1], &combo)?;
                    out.extend(r.iter().cloned());
                    self.check(&out)?;
                }
                Ok(Rc::new(out))
            }
        }
    }
}

/// All tuples picking one element per set.
fn product(sets: &[Results]) -> Vec<Vec<Tree>> {
    let mut out: Vec<Vec<Tree>> = vec![Vec::new()];
    for s in sets {
        let mut next = Vec::with_capacity(out.len() * s.len());
        for prefix in &out {
            for t in s.iter() {
                let mut v = prefix.clone();
                v.push(t.clone());
                next.push(v);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::{enumerate_trees, parse_tree};

    pub(crate) fn sample_mtt() -> Mtt {
        Mtt::parse(
            "alphabet: eps/0, a/1, b/2
             initial: p0
             p0(a(x1)) -> p(x1, eps)
             p(eps, y1) -> b(y1, y1)",
        )
        .unwrap()
    }

    fn identity(al: &RankedAlphabet) -> Mtt {
        let rules = al
            .iter()
            .map(|(a, _, n)| MttRule {
                proc: 0,
                symbol: a,
                body: Expr::Cons(a, (1..=n).map(|i| Expr::Call(0, i, vec![])).collect()),
            })
            .collect();
        Mtt::new(al.clone(), vec![("p0".into(), 0)], vec![0], rules).unwrap()
    }

    fn abc() -> RankedAlphabet {
        RankedAlphabet::parse("eps/0, a/1, b/2").unwrap()
    }

    #[test]
    fn evaluation_examples() {
        let m = sample_mtt();
        let al = m.alphabet().clone();
        let t = parse_tree("a(eps)", &al).unwrap();
        let out: Vec<String> = m.evaluate(&t).iter().map(|t| t.to_string()).collect();
        assert_eq!(out, ["b(eps,eps)"]);
        assert!(m.evaluate(&Tree::eps()).is_empty());
        let id = identity(&abc());
        for t in enumerate_trees(&abc(), 6) {
            assert_eq!(id.evaluate(&t), BTreeSet::from([t.clone()]));
        }
    }

    #[test]
    fn call_by_value_parameters() {
        // Each parameter value is chosen once, so copies agree.
        let m = Mtt::parse(
            "alphabet: eps/0, a/1, b/2, c/0
             initial: p0
             p0(a(x1)) -> p(x1, g(x1))
             p(eps, y1) -> b(y1, y1)
             g(eps) -> eps
             g(eps) -> c",
        )
        .unwrap();
        let out: Vec<String> = m
            .evaluate(&parse_tree("a(eps)", m.alphabet()).unwrap())
            .iter()
            .map(|t| t.to_string())
            .collect();
        assert_eq!(out, ["b(c,c)", "b(eps,eps)"]);
    }

    #[test]
    fn empty_parameter_empties_call() {
        let m = Mtt::parse(
            "alphabet: eps/0, a/1
             initial: p0
             p0(a(x1)) -> p(x1, g(x1))
             p(eps, y1) -> eps
             g(a(x1)) -> eps",
        )
        .unwrap();
        assert!(m.evaluate(&parse_tree("a(eps)", m.alphabet()).unwrap()).is_empty());
    }

    #[test]
    fn total_determinism() {
        assert!(identity(&abc()).is_total_deterministic_syntactic());
        assert!(!sample_mtt().is_total_deterministic_syntactic());
        let twice = Mtt::parse("initial: p0\np0(eps) -> eps\np0(eps) -> eps").unwrap();
        assert!(twice.rules().len() == 2);
        assert!(!twice.is_total_deterministic_syntactic());
    }

    #[test]
    fn determinism_check_is_sound() {
        let id = identity(&abc());
        for t in enumerate_trees(&abc(), 6) {
            assert_eq!(id.evaluate(&t).len(), 1);
        }
    }

    #[test]
    fn copy_bounds() {
        assert_eq!(identity(&abc()).copy_bound(), Bound::Finite(1));
        let doubling = Mtt::parse("alphabet: eps/0, a/1, b/2\ninitial: p0\np0(a(x1)) -> b(p0(x1), p0(x1))").unwrap();
        assert_eq!(doubling.copy_bound(), Bound::Infinite);
        let twice = Mtt::parse(
            "alphabet: eps/0, a/1, b/2
             initial: p0
             p0(a(x1)) -> b(q(x1), q(x1))
             q(a(x1)) -> a(q(x1))
             q(eps) -> eps",
        )
        .unwrap();
        assert_eq!(twice.copy_bound(), Bound::Finite(2));
    }

    #[test]
    fn input_type_encoding() {
        let m = sample_mtt();
        let al = m.alphabet().clone();
        let only = Bta::parse(
            "alphabet: eps/0, a/1, b/2
             final: r
             r <- a(s)
             s <- eps",
        )
        .unwrap();
        let enc = m.encode_input_type(&only).unwrap();
        let t = parse_tree("a(eps)", &al).unwrap();
        assert_eq!(enc.evaluate(&t), m.evaluate(&t));
        assert!(enc.evaluate(&Tree::eps()).is_empty());

        let empty = Bta::new(al.clone(), vec!["q".into()], [0], vec![]).unwrap();
        let enc = m.encode_input_type(&empty).unwrap();
        for t in enumerate_trees(&al, 5) {
            assert!(enc.evaluate(&t).is_empty());
        }

        let all = Bta::universal(&al);
        let enc = m.encode_input_type(&all).unwrap();
        for t in enumerate_trees(&al, 6) {
            assert_eq!(enc.evaluate(&t), m.evaluate(&t));
        }
    }

    #[test]
    fn encoding_checks_unvisited_children() {
        // p0 never looks below a(x1); the guard must still reject a(a(eps)).
        let m = Mtt::parse("alphabet: eps/0, a/1\ninitial: p0\np0(a(x1)) -> eps").unwrap();
        let t = Bta::parse("alphabet: eps/0, a/1\nfinal: r\nr <- a(s)\ns <- eps").unwrap();
        let enc = m.encode_input_type(&t).unwrap();
        let al = m.alphabet();
        for tree in enumerate_trees(al, 5) {
            let expected = if t.in_language(&tree) {
                m.evaluate(&tree)
            } else {
                BTreeSet::new()
            };
            assert_eq!(enc.evaluate(&tree), expected, "{tree}");
        }
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            Mtt::parse("initial: p0\np0(a(x2)) -> eps"),
            Err(Error::Syntax { .. })
        ));
        assert!(matches!(
            Mtt::parse("alphabet: a/1\ninitial: p0\np0(a(x1)) -> a"),
            Err(Error::ArityMismatch { .. })
        ));
        assert!(matches!(
            Mtt::parse("alphabet: a/1\ninitial: p0\np0(a(x1)) -> zz"),
            Err(Error::UnknownSymbol { .. })
        ));
        assert!(matches!(
            Mtt::parse("initial: p\np(eps, y1) -> y1"),
            Err(Error::Syntax { .. })
        ));
        assert!(Mtt::parse("initial: p0\np0(eps) -> x1").is_err());
    }

    #[test]
    fn display_roundtrip() {
        let m = sample_mtt();
        let back = Mtt::parse(&m.to_string()).unwrap();
        assert_eq!(back.rules(), m.rules());
        assert_eq!(back.initial(), m.initial());
    }

    #[test]
    fn bounded_evaluation_gives_up() {
        let m = Mtt::parse(
            "alphabet: eps/0, a/1, b/2
             initial: p0
             p0(a(x1)) -> b(p0(x1), p0(x1))
             p0(eps) -> eps",
        )
        .unwrap();
        let t = parse_tree("a(a(a(a(eps))))", m.alphabet()).unwrap();
        let lim = Limits {
            max_results: 10,
            max_nodes: 8,
        };
        assert!(m.evaluate_bounded(&t, lim).is_none());
        assert!(m.evaluate_bounded(&Tree::eps(), lim).is_some());
    }
}
