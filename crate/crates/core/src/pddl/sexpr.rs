//! S-expression reader with source positions. Symbols are lower-cased.

use std::fmt;

use super::{ErrorKind, PddlError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SExpr {
    Atom(String, Pos),
    List(Vec<SExpr>, Pos),
}

impl SExpr {
    pub fn pos(&self) -> Pos {
        match self {
            SExpr::Atom(_, p) | SExpr::List(_, p) => *p,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom(s, _) => Some(s),
            SExpr::List(..) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(items, _) => Some(items),
            SExpr::Atom(..) => None,
        }
    }

    /// First element of a list when it is an atom: `(and ...)` -> "and".
    pub fn head(&self) -> Option<&str> {
        self.as_list()?.first()?.as_atom()
    }
}

/// Parses a whole document that must consist of exactly one list.
pub fn parse_document(text: &str) -> Result<SExpr, PddlError> {
    let mut reader = Reader::new(text);
    reader.skip_trivia();
    let Some(start) = reader.peek() else {
        return Err(PddlError::at(reader.pos(), ErrorKind::Syntax("empty input".into())));
    };
    if start != '(' {
        return Err(PddlError::at(
            reader.pos(),
            ErrorKind::Syntax(format!("expected '(' but found '{start}'")),
        ));
    }
    let expr = reader.expr()?;
    reader.skip_trivia();
    if reader.peek().is_some() {
        return Err(PddlError::at(
            reader.pos(),
            ErrorKind::Syntax("trailing input after top-level form".into()),
        ));
    }
    Ok(expr)
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        Reader {
            chars: text.chars().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn expr(&mut self) -> Result<SExpr, PddlError> {
        let pos = self.pos();
        match self.peek() {
            None => Err(PddlError::at(pos, ErrorKind::Syntax("unexpected end of input".into()))),
            Some(')') => Err(PddlError::at(pos, ErrorKind::Syntax("unexpected ')'".into()))),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.peek() {
                        None => {
                            return Err(PddlError::at(
                                pos,
                                ErrorKind::Syntax("unclosed '('".into()),
                            ))
                        }
                        Some(')') => {
                            self.bump();
                            return Ok(SExpr::List(items, pos));
                        }
                        Some(_) => items.push(self.expr()?),
                    }
                }
            }
            Some(_) => {
                let mut s = String::new();
                while let Some(c) = self.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    s.extend(c.to_lowercase());
                    self.bump();
                }
                Ok(SExpr::Atom(s, pos))
            }
        }
    }
}
