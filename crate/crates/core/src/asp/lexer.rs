//! Tokenizer shared by the fact parser and the rule parser.

use super::AspError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    /// Lowercase identifier, optionally with one leading underscore.
    Ident(String),
    /// Uppercase identifier (logic variable).
    Var(String),
    /// A lone `_`.
    Wildcard,
    Str(String),
    LParen,
    RParen,
    Comma,
    Dot,
    If,
    EqEq,
    NotEq,
    At,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Var(s) => format!("`{s}`"),
            Tok::Wildcard => "`_`".into(),
            Tok::Str(s) => format!("\"{s}\""),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::If => "`:-`".into(),
            Tok::EqEq => "`==`".into(),
            Tok::NotEq => "`!=`".into(),
            Tok::At => "`@`".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Spanned>, AspError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    let syntax = |line, col, message: String| AspError::Syntax { line, col, message };

    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
                continue;
            }
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '"' => {
                let mut j = i + 1;
                let mut s = String::new();
                let (mut l, mut cc) = (line, col + 1);
                loop {
                    match chars.get(j) {
                        None => return Err(syntax(start_line, start_col, "unterminated string".into())),
                        Some('"') => break,
                        Some(&ch) => {
                            if ch == '\n' {
                                l += 1;
                                cc = 1;
                            } else {
                                cc += 1;
                            }
                            s.push(ch);
                            j += 1;
                        }
                    }
                }
                out.push(Spanned { tok: Tok::Str(s), line: start_line, col: start_col });
                i = j + 1;
                line = l;
                col = cc + 1;
                continue;
            }
            '(' | ')' | ',' | '.' | '@' => {
                let tok = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    '.' => Tok::Dot,
                    _ => Tok::At,
                };
                out.push(Spanned { tok, line, col });
                i += 1;
                col += 1;
                continue;
            }
            ':' if chars.get(i + 1) == Some(&'-') => {
                out.push(Spanned { tok: Tok::If, line, col });
                i += 2;
                col += 2;
                continue;
            }
            '=' if chars.get(i + 1) == Some(&'=') => {
                out.push(Spanned { tok: Tok::EqEq, line, col });
                i += 2;
                col += 2;
                continue;
            }
            '!' if chars.get(i + 1) == Some(&'=') => {
                out.push(Spanned { tok: Tok::NotEq, line, col });
                i += 2;
                col += 2;
                continue;
            }
            c if c == '_' || c.is_ascii_alphabetic() => {
                let mut j = i;
                while j < chars.len() && (chars[j] == '_' || chars[j].is_ascii_alphanumeric()) {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                let tok = classify(&word).ok_or_else(|| syntax(line, col, format!("malformed identifier `{word}`")))?;
                out.push(Spanned { tok, line, col });
                col += j - i;
                i = j;
                continue;
            }
            other => {
                return Err(syntax(line, col, format!("unexpected character `{other}`")));
            }
        }
    }
    Ok(out)
}

fn classify(word: &str) -> Option<Tok> {
    if word == "_" {
        return Some(Tok::Wildcard);
    }
    let body = word.strip_prefix('_').unwrap_or(word);
    let first = body.chars().next()?;
    if first.is_ascii_lowercase() {
        Some(Tok::Ident(word.to_string()))
    } else if first.is_ascii_uppercase() && !word.starts_with('_') {
        Some(Tok::Var(word.to_string()))
    } else {
        None
    }
}

/// Cursor over a token stream with end-of-input position tracking.
pub(crate) struct Cursor {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
}

impl Cursor {
    pub(crate) fn new(text: &str) -> Result<Self, AspError> {
        let toks = tokenize(text)?;
        let line = text.lines().count().max(1);
        let col = text.lines().last().map(|l| l.chars().count() + 1).unwrap_or(1);
        Ok(Cursor { toks, pos: 0, end: (line, col) })
    }

    pub(crate) fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    pub(crate) fn peek_at(&self, offset: usize) -> Option<&Tok> {
        self.toks.get(self.pos + offset).map(|s| &s.tok)
    }

    pub(crate) fn next(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub(crate) fn location(&self) -> (usize, usize) {
        self.toks.get(self.pos).map(|s| (s.line, s.col)).unwrap_or(self.end)
    }

    pub(crate) fn error(&self, message: impl Into<String>) -> AspError {
        let (line, col) = self.location();
        AspError::Syntax { line, col, message: message.into() }
    }

    pub(crate) fn expect(&mut self, want: &Tok, what: &str) -> Result<(), AspError> {
        match self.peek() {
            Some(t) if t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(self.error(format!("expected {what}, found {}", t.describe()))),
            None => Err(self.error(format!("expected {what}, found end of input"))),
        }
    }
}
