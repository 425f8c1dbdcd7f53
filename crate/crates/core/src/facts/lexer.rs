//! Tokenizer for the Java-like source subset. Comments and literal contents
//! are dropped; only identifiers and punctuation matter to the extractor.

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct Pos {
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Punct(char),
    /// String, char, text-block or numeric literal.
    Literal,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub start: Pos,
    /// One past the last character.
    pub end: Pos,
}

impl Token {
    pub fn ident(&self) -> Option<&str> {
        match &self.tok {
            Tok::Ident(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_punct(&self, c: char) -> bool {
        self.tok == Tok::Punct(c)
    }

    pub fn is_ident(&self, s: &str) -> bool {
        matches!(&self.tok, Tok::Ident(t) if t == s)
    }
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl Cursor<'_> {
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

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next()
    }

    fn peek3(&self) -> (Option<char>, Option<char>) {
        let mut it = self.chars.clone();
        it.next();
        (it.next(), it.next())
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '$'
}

fn is_ident_part(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}

pub(crate) fn tokenize(src: &str) -> Vec<Token> {
    let mut cur = Cursor {
        chars: src.chars().peekable(),
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    while let Some(c) = cur.peek() {
        let start = cur.pos();
        if c.is_whitespace() || c == '\u{feff}' {
            cur.bump();
            continue;
        }
        if c == '/' && cur.peek2() == Some('/') {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        if c == '/' && cur.peek2() == Some('*') {
            cur.bump();
            cur.bump();
            let mut prev = '\0';
            while let Some(c) = cur.bump() {
                if prev == '*' && c == '/' {
                    break;
                }
                prev = c;
            }
            continue;
        }
        if c == '"' {
            if cur.peek3() == (Some('"'), Some('"')) {
                // text block
                cur.bump();
                cur.bump();
                cur.bump();
                let mut quotes = 0;
                while let Some(c) = cur.bump() {
                    if c == '\\' {
                        cur.bump();
                        quotes = 0;
                    } else if c == '"' {
                        quotes += 1;
                        if quotes == 3 {
                            break;
                        }
                    } else {
                        quotes = 0;
                    }
                }
            } else {
                skip_quoted(&mut cur, '"');
            }
            out.push(Token {
                tok: Tok::Literal,
                start,
                end: cur.pos(),
            });
            continue;
        }
        if c == '\'' {
            skip_quoted(&mut cur, '\'');
            out.push(Token {
                tok: Tok::Literal,
                start,
                end: cur.pos(),
            });
            continue;
        }
        if c.is_ascii_digit() {
            while let Some(c) = cur.peek() {
                let fraction = c == '.' && cur.peek2().is_some_and(|d| d.is_ascii_digit());
                if c.is_alphanumeric() || c == '_' || fraction {
                    cur.bump();
                } else {
                    break;
                }
            }
            out.push(Token {
                tok: Tok::Literal,
                start,
                end: cur.pos(),
            });
            continue;
        }
        if is_ident_start(c) {
            let mut s = String::new();
            while let Some(c) = cur.peek() {
                if is_ident_part(c) {
                    s.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            out.push(Token {
                tok: Tok::Ident(s),
                start,
                end: cur.pos(),
            });
            continue;
        }
        cur.bump();
        out.push(Token {
            tok: Tok::Punct(c),
            start,
            end: cur.pos(),
        });
    }
    out
}

/// Consumes a quoted literal; stops at the closing quote or end of line.
fn skip_quoted(cur: &mut Cursor<'_>, quote: char) {
    cur.bump();
    while let Some(c) = cur.peek() {
        if c == '\n' {
            return;
        }
        cur.bump();
        if c == '\\' {
            cur.bump();
        } else if c == quote {
            return;
        }
    }
}
