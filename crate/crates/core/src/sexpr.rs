//! Minimal s-expression reader shared by the PDDL front end and the
//! SMT-LIB response parser.

use std::fmt;

/// Line/column of a token, both 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SExpr {
    Atom(String, Pos),
    List(Vec<SExpr>, Pos),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{pos}: {msg}")]
pub struct SyntaxError {
    pub pos: Pos,
    pub msg: String,
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

    /// Head symbol of a non-empty list whose first element is an atom.
    pub fn head(&self) -> Option<&str> {
        self.as_list().and_then(|l| l.first()).and_then(SExpr::as_atom)
    }
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SExpr::Atom(s, _) => f.write_str(s),
            SExpr::List(items, _) => {
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

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
    lowercase: bool,
}

impl Reader<'_> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
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

    fn read(&mut self) -> Result<Option<SExpr>, SyntaxError> {
        self.skip_trivia();
        let start = self.pos;
        let Some(&c) = self.chars.peek() else {
            return Ok(None);
        };
        match c {
            '(' => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.chars.peek() {
                        None => {
                            return Err(SyntaxError {
                                pos: start,
                                msg: "unbalanced '(': missing ')'".into(),
                            })
                        }
                        Some(')') => {
                            self.bump();
                            return Ok(Some(SExpr::List(items, start)));
                        }
                        Some(_) => {
                            if let Some(e) = self.read()? {
                                items.push(e);
                            }
                        }
                    }
                }
            }
            ')' => Err(SyntaxError {
                pos: start,
                msg: "unexpected ')'".into(),
            }),
            '"' => {
                self.bump();
                let mut s = String::from("\"");
                loop {
                    match self.bump() {
                        None => {
                            return Err(SyntaxError {
                                pos: start,
                                msg: "unterminated string literal".into(),
                            })
                        }
                        Some('"') => {
                            // SMT-LIB escapes a quote by doubling it.
                            if self.chars.peek() == Some(&'"') {
                                self.bump();
                                s.push('"');
                                continue;
                            }
                            s.push('"');
                            break;
                        }
                        Some(c) => s.push(c),
                    }
                }
                Ok(Some(SExpr::Atom(s, start)))
            }
            '|' => {
                self.bump();
                let mut s = String::from("|");
                loop {
                    match self.bump() {
                        None => {
                            return Err(SyntaxError {
                                pos: start,
                                msg: "unterminated quoted symbol".into(),
                            })
                        }
                        Some('|') => {
                            s.push('|');
                            break;
                        }
                        Some(c) => s.push(c),
                    }
                }
                Ok(Some(SExpr::Atom(s, start)))
            }
            _ => {
                let mut s = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    s.push(if self.lowercase { c.to_ascii_lowercase() } else { c });
                    self.bump();
                }
                Ok(Some(SExpr::Atom(s, start)))
            }
        }
    }
}

fn reader(text: &str, lowercase: bool) -> Reader<'_> {
    Reader {
        chars: text.chars().peekable(),
        pos: Pos { line: 1, col: 1 },
        lowercase,
    }
}

/// Parse every top-level expression in `text`.
pub fn parse_all(text: &str, lowercase: bool) -> Result<Vec<SExpr>, SyntaxError> {
    let mut r = reader(text, lowercase);
    let mut out = Vec::new();
    while let Some(e) = r.read()? {
        out.push(e);
    }
    Ok(out)
}

/// Parse exactly one expression; trailing content is an error.
pub fn parse_one(text: &str, lowercase: bool) -> Result<SExpr, SyntaxError> {
    let mut r = reader(text, lowercase);
    let first = r.read()?.ok_or(SyntaxError {
        pos: Pos { line: 1, col: 1 },
        msg: "empty input".into(),
    })?;
    r.skip_trivia();
    if r.chars.peek().is_some() {
        return Err(SyntaxError {
            pos: r.pos,
            msg: "trailing content after expression".into(),
        });
    }
    Ok(first)
}

/// Net parenthesis depth of `text`, ignoring comments, strings and quoted
/// symbols.
pub fn paren_balance(text: &str) -> i64 {
    let mut s = ParenScanner::default();
    s.feed(text);
    s.depth()
}

/// Incremental form of [`paren_balance`] for text arriving in pieces, used
/// to find the end of a multi-line response without rescanning it.
#[derive(Debug, Clone, Default)]
pub struct ParenScanner {
    depth: i64,
    in_str: bool,
    in_quote: bool,
    in_comment: bool,
}

impl ParenScanner {
    pub fn feed(&mut self, text: &str) {
        for c in text.chars() {
            if self.in_comment {
                if c == '\n' {
                    self.in_comment = false;
                }
                continue;
            }
            if self.in_str {
                if c == '"' {
                    self.in_str = false;
                }
                continue;
            }
            if self.in_quote {
                if c == '|' {
                    self.in_quote = false;
                }
                continue;
            }
            match c {
                ';' => self.in_comment = true,
                '"' => self.in_str = true,
                '|' => self.in_quote = true,
                '(' => self.depth += 1,
                ')' => self.depth -= 1,
                _ => {}
            }
        }
    }

    pub fn depth(&self) -> i64 {
        self.depth
    }
}
