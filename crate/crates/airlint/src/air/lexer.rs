//! Tokenizer for AIR text. `#` starts a comment running to end of line;
//! string literals have no escape sequences and must close on one line.

use super::{AirError, CmpOp};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokKind {
    /// Identifier or keyword: `[A-Za-z_$][A-Za-z0-9_.$-]*`.
    Word(String),
    Int(u32),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Assign,
    Cmp(CmpOp),
    Eof,
}

impl TokKind {
    pub fn describe(&self) -> String {
        match self {
            TokKind::Word(w) => format!("`{w}`"),
            TokKind::Int(n) => format!("`{n}`"),
            TokKind::Str(_) => "string literal".into(),
            TokKind::LBrace => "`{`".into(),
            TokKind::RBrace => "`}`".into(),
            TokKind::LParen => "`(`".into(),
            TokKind::RParen => "`)`".into(),
            TokKind::LBracket => "`[`".into(),
            TokKind::RBracket => "`]`".into(),
            TokKind::Comma => "`,`".into(),
            TokKind::Colon => "`:`".into(),
            TokKind::Assign => "`=`".into(),
            TokKind::Cmp(op) => format!("`{}`", op.symbol()),
            TokKind::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Tok {
    pub kind: TokKind,
    pub line: u32,
    pub col: u32,
}

fn is_word_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_' || c == '$'
}

fn is_word_cont(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '$' | '-')
}

pub fn lex(text: &str) -> Result<Vec<Tok>, AirError> {
    let mut toks = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1u32, 1u32);

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else if c.is_some() {
                col += 1;
            }
            c
        }};
    }

    loop {
        let (tl, tc) = (line, col);
        let c = match chars.peek().copied() {
            Some(c) => c,
            None => {
                toks.push(Tok { kind: TokKind::Eof, line, col });
                return Ok(toks);
            }
        };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '#' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                bump!();
            }
            continue;
        }
        let kind = match c {
            '{' => {
                bump!();
                TokKind::LBrace
            }
            '}' => {
                bump!();
                TokKind::RBrace
            }
            '(' => {
                bump!();
                TokKind::LParen
            }
            ')' => {
                bump!();
                TokKind::RParen
            }
            '[' => {
                bump!();
                TokKind::LBracket
            }
            ']' => {
                bump!();
                TokKind::RBracket
            }
            ',' => {
                bump!();
                TokKind::Comma
            }
            ':' => {
                bump!();
                TokKind::Colon
            }
            '=' => {
                bump!();
                if chars.peek() == Some(&'=') {
                    bump!();
                    TokKind::Cmp(CmpOp::Eq)
                } else {
                    TokKind::Assign
                }
            }
            '<' => {
                bump!();
                if chars.peek() == Some(&'=') {
                    bump!();
                    TokKind::Cmp(CmpOp::Le)
                } else {
                    TokKind::Cmp(CmpOp::Lt)
                }
            }
            '>' => {
                bump!();
                if chars.peek() == Some(&'=') {
                    bump!();
                    TokKind::Cmp(CmpOp::Ge)
                } else {
                    TokKind::Cmp(CmpOp::Gt)
                }
            }
            '!' => {
                bump!();
                if chars.peek() == Some(&'=') {
                    bump!();
                    TokKind::Cmp(CmpOp::Ne)
                } else {
                    return Err(AirError::Syntax {
                        line: tl,
                        col: tc,
                        expected: "`!=`".into(),
                    });
                }
            }
            '"' => {
                bump!();
                let mut s = String::new();
                loop {
                    match chars.peek().copied() {
                        Some('"') => {
                            bump!();
                            break;
                        }
                        Some('\n') | None => {
                            return Err(AirError::Syntax {
                                line: tl,
                                col: tc,
                                expected: "closing `\"`".into(),
                            });
                        }
                        Some(c) => {
                            s.push(c);
                            bump!();
                        }
                    }
                }
                TokKind::Str(s)
            }
            c if c.is_ascii_digit() => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        s.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                let n = s.parse::<u32>().map_err(|_| AirError::Syntax {
                    line: tl,
                    col: tc,
                    expected: "integer in range".into(),
                })?;
                TokKind::Int(n)
            }
            c if is_word_start(c) => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if is_word_cont(c) {
                        s.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                TokKind::Word(s)
            }
            _ => {
                return Err(AirError::Syntax {
                    line: tl,
                    col: tc,
                    expected: "token".into(),
                });
            }
        };
        toks.push(Tok { kind, line: tl, col: tc });
    }
}
