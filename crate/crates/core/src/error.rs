use std::fmt;

use thiserror::Error;

/// A line/column location inside a text input, both 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl Position {
    pub fn new(line: usize, column: usize) -> Self {
        Position { line, column }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

fn at(pos: &Option<Position>) -> String {
    match pos {
        Some(p) => format!("{p}: "),
        None => String::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{pos}: syntax error: {message}")]
    Syntax { pos: Position, message: String },

    #[error("{}unknown symbol `{symbol}`", at(.pos))]
    UnknownSymbol {
        symbol: String,
        pos: Option<Position>,
    },

    #[error("{}arity mismatch for `{symbol}`: expected {expected}, found {found}", at(.pos))]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
        pos: Option<Position>,
    },

    #[error("{}unknown name `{name}`", at(.pos))]
    UnknownName { name: String, pos: Option<Position> },

    #[error("alphabets differ: {0}")]
    AlphabetMismatch(String),

    #[error("invalid automaton: {0}")]
    InvalidAutomaton(String),

    #[error("invalid transducer: {0}")]
    InvalidTransducer(String),

    #[error("output automaton is not deterministic and complete: {0}")]
    NotDeterministicComplete(String),

    #[error("negated atoms are not supported here; apply push_negation first")]
    NegationUnsupported,

    #[error("{what} exceeds the configured cap of {cap}")]
    CapExceeded { what: String, cap: usize },

    #[error("undeclared nonterminal `{0}`")]
    UndeclaredNonterminal(String),

    #[error("witness failed validation: {0}")]
    InvalidWitness(String),

    #[error("not a first-child/next-sibling encoding: {0}")]
    NotAnEncoding(String),

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
