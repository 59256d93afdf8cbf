//! Line-oriented tokenizer shared by the text formats (trees, automata,
//! transducers, grammars).

use crate::error::{Error, Position, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Slash,
    Arrow,
    LeftArrow,
    Pipe,
    Amp,
    Tilde,
    Equals,
    Question,
    Star,
    Plus,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::LeftArrow => "`<-`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Tilde => "`~`".into(),
            Tok::Equals => "`=`".into(),
            Tok::Question => "`?`".into(),
            Tok::Star => "`*`".into(),
            Tok::Plus => "`+`".into(),
        }
    }
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\'' || c == '.'
}

pub(crate) fn tokenize(line: &str, line_no: usize) -> Result<Vec<(Tok, Position)>> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = Position::new(line_no, i + 1);
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            break;
        }
        if is_name_char(c) {
            let start = i;
            while i < chars.len() && is_name_char(chars[i]) {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            continue;
        }
        let (tok, len) = match (c, chars.get(i + 1).copied()) {
            ('-', Some('>')) => (Tok::Arrow, 2),
            ('<', Some('-')) => (Tok::LeftArrow, 2),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            (',', _) => (Tok::Comma, 1),
            (':', _) => (Tok::Colon, 1),
            ('/', _) => (Tok::Slash, 1),
            ('|', _) => (Tok::Pipe, 1),
            ('&', _) => (Tok::Amp, 1),
            ('~', _) => (Tok::Tilde, 1),
            ('=', _) => (Tok::Equals, 1),
            ('?', _) => (Tok::Question, 1),
            ('*', _) => (Tok::Star, 1),
            ('+', _) => (Tok::Plus, 1),
            _ => {
                return Err(Error::Syntax {
                    pos,
                    message: format!("unexpected character `{c}`"),
                })
            }
        };
        out.push((tok, pos));
        i += len;
    }
    Ok(out)
}

/// Cursor over the tokens of one logical unit (usually a line).
pub(crate) struct Tokens {
    toks: Vec<(Tok, Position)>,
    idx: usize,
    end: Position,
}

impl Tokens {
    pub fn new(toks: Vec<(Tok, Position)>, end: Position) -> Self {
        Tokens { toks, idx: 0, end }
    }

    pub fn from_line(line: &str, line_no: usize) -> Result<Self> {
        let toks = tokenize(line, line_no)?;
        Ok(Tokens::new(
            toks,
            Position::new(line_no, line.chars().count() + 1),
        ))
    }

    /// Tokenizes a multi-line text as one stream.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut toks = Vec::new();
        let mut end = Position::new(1, 1);
        for (i, line) in text.lines().enumerate() {
            toks.extend(tokenize(line, i + 1)?);
            end = Position::new(i + 1, line.chars().count() + 1);
        }
        Ok(Tokens::new(toks, end))
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(t, _)| t)
    }

    pub fn pos(&self) -> Position {
        self.toks.get(self.idx).map(|(_, p)| *p).unwrap_or(self.end)
    }

    pub fn at_end(&self) -> bool {
        self.idx >= self.toks.len()
    }

    pub fn next(&mut self) -> Option<(Tok, Position)> {
        let t = self.toks.get(self.idx).cloned();
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: &Tok) -> Result<Position> {
        let pos = self.pos();
        if self.eat(tok) {
            Ok(pos)
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    pub fn ident(&mut self) -> Result<(String, Position)> {
        match self.next() {
            Some((Tok::Ident(s), p)) => Ok((s, p)),
            Some((t, p)) => Err(Error::Syntax {
                pos: p,
                message: format!("expected a name, found {}", t.describe()),
            }),
            None => Err(Error::Syntax {
                pos: self.end,
                message: "expected a name, found end of input".into(),
            }),
        }
    }

    pub fn expect_end(&self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.unexpected("end of line"))
        }
    }

    pub fn unexpected(&self, wanted: &str) -> Error {
        let found = self
            .peek()
            .map(|t| t.describe())
            .unwrap_or_else(|| "end of input".into());
        Error::Syntax {
            pos: self.pos(),
            message: format!("expected {wanted}, found {found}"),
        }
    }
}

/// Splits `name: rest` header lines. Returns the header keyword and the
/// remaining tokens when the line starts with `<ident> :`.
pub(crate) fn header<'a>(line: &'a str, keyword: &str) -> Option<&'a str> {
    let trimmed = line.trim_start();
    let rest = trimmed.strip_prefix(keyword)?;
    let rest = rest.trim_start();
    rest.strip_prefix(':')
}

/// Parses a comma/whitespace separated list of names.
pub(crate) fn name_list(text: &str, line_no: usize, col_offset: usize) -> Result<Vec<(String, Position)>> {
    let mut toks = tokenize(text, line_no)?;
    for (_, p) in toks.iter_mut() {
        p.column += col_offset;
    }
    let mut names = Vec::new();
    for (t, p) in toks {
        match t {
            Tok::Ident(s) => names.push((s, p)),
            Tok::Comma => {}
            other => {
                return Err(Error::Syntax {
                    pos: p,
                    message: format!("expected a name, found {}", other.describe()),
                })
            }
        }
    }
    Ok(names)
}

/// Strips comments and blank lines, yielding `(1-based line number, text)`.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let body = match l.find('#') {
            Some(k) => &l[..k],
            None => l,
        };
        let body = match body.find("//") {
            Some(k) => &body[..k],
            None => body,
        };
        if body.trim().is_empty() {
            None
        } else {
            Some((i + 1, body))
        }
    })
}
