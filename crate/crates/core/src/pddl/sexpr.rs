use std::fmt;

use super::PddlError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExpr {
    Atom { text: String, line: usize, col: usize },
    List { items: Vec<SExpr>, line: usize, col: usize },
}

impl SExpr {
    pub fn pos(&self) -> (usize, usize) {
        match self {
            SExpr::Atom { line, col, .. } | SExpr::List { line, col, .. } => (*line, *col),
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom { text, .. } => Some(text),
            SExpr::List { .. } => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List { items, .. } => Some(items),
            SExpr::Atom { .. } => None,
        }
    }

    /// The keyword heading a list, e.g. `:action` in `(:action ...)`.
    pub fn head(&self) -> Option<&str> {
        self.as_list().and_then(|items| items.first()).and_then(SExpr::as_atom)
    }

    pub fn error(&self, message: impl Into<String>) -> PddlError {
        let (line, col) = self.pos();
        PddlError::Syntax { line, col, message: message.into() }
    }
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SExpr::Atom { text, .. } => f.write_str(text),
            SExpr::List { items, .. } => {
                f.write_str("(")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{it}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Parses exactly one top-level s-expression. `;` starts a line comment.
pub fn parse_one(text: &str) -> Result<SExpr, PddlError> {
    let mut p = Parser { chars: text.chars().collect(), i: 0, line: 1, col: 1 };
    p.skip_ws();
    if p.i >= p.chars.len() {
        return Err(PddlError::Syntax { line: p.line, col: p.col, message: "empty input".into() });
    }
    let e = p.expr()?;
    p.skip_ws();
    if p.i < p.chars.len() {
        return Err(PddlError::Syntax { line: p.line, col: p.col, message: "trailing input after `)`".into() });
    }
    Ok(e)
}

struct Parser {
    chars: Vec<char>,
    i: usize,
    line: usize,
    col: usize,
}

impl Parser {
    fn bump(&mut self) -> Option<char> {
        let c = *self.chars.get(self.i)?;
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(&c) = self.chars.get(self.i) {
            if c == ';' {
                while self.chars.get(self.i).is_some_and(|&c| c != '\n') {
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn expr(&mut self) -> Result<SExpr, PddlError> {
        let (line, col) = (self.line, self.col);
        match self.chars.get(self.i) {
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.chars.get(self.i) {
                        None => return Err(PddlError::Syntax { line, col, message: "unbalanced `(`".into() }),
                        Some(')') => {
                            self.bump();
                            return Ok(SExpr::List { items, line, col });
                        }
                        Some(_) => items.push(self.expr()?),
                    }
                }
            }
            Some(')') => Err(PddlError::Syntax { line, col, message: "unexpected `)`".into() }),
            Some('"') => {
                self.bump();
                let mut text = String::from("\"");
                loop {
                    match self.bump() {
                        None => return Err(PddlError::Syntax { line, col, message: "unterminated string".into() }),
                        Some('"') => break,
                        Some(c) => text.push(c),
                    }
                }
                text.push('"');
                Ok(SExpr::Atom { text, line, col })
            }
            Some(_) => {
                let mut text = String::new();
                while let Some(&c) = self.chars.get(self.i) {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    text.push(c);
                    self.bump();
                }
                Ok(SExpr::Atom { text: text.to_ascii_lowercase(), line, col })
            }
            None => Err(PddlError::Syntax { line, col, message: "unexpected end of input".into() }),
        }
    }
}
