//! Hand-rolled lexer. Produces a token stream with line/column positions
//! and byte offsets; `//` comments run to end of line.

use crate::parser::SyntaxError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Int(i64),
    Text(String),
    Ident(String),
    KwFn,
    KwLet,
    KwIf,
    KwElse,
    KwWhile,
    KwReturn,
    KwThrow,
    KwTrue,
    KwFalse,
    KwNull,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    AndAnd,
    OrOr,
    Bang,
    Eof,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Int(v) => format!("integer `{v}`"),
            TokenKind::Text(_) => "string literal".to_string(),
            TokenKind::Ident(name) => format!("identifier `{name}`"),
            TokenKind::Eof => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            TokenKind::KwFn => "fn",
            TokenKind::KwLet => "let",
            TokenKind::KwIf => "if",
            TokenKind::KwElse => "else",
            TokenKind::KwWhile => "while",
            TokenKind::KwReturn => "return",
            TokenKind::KwThrow => "throw",
            TokenKind::KwTrue => "true",
            TokenKind::KwFalse => "false",
            TokenKind::KwNull => "null",
            TokenKind::LParen => "(",
            TokenKind::RParen => ")",
            TokenKind::LBrace => "{",
            TokenKind::RBrace => "}",
            TokenKind::LBracket => "[",
            TokenKind::RBracket => "]",
            TokenKind::Comma => ",",
            TokenKind::Semi => ";",
            TokenKind::Colon => ":",
            TokenKind::Assign => "=",
            TokenKind::Plus => "+",
            TokenKind::Minus => "-",
            TokenKind::Star => "*",
            TokenKind::Slash => "/",
            TokenKind::Percent => "%",
            TokenKind::EqEq => "==",
            TokenKind::NotEq => "!=",
            TokenKind::Lt => "<",
            TokenKind::Le => "<=",
            TokenKind::Gt => ">",
            TokenKind::Ge => ">=",
            TokenKind::AndAnd => "&&",
            TokenKind::OrOr => "||",
            TokenKind::Bang => "!",
            _ => unreachable!(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: TokenKind,
    pub offset: usize,
    pub end: usize,
    pub line: u32,
    pub col: u32,
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, SyntaxError> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! push {
        ($kind:expr, $start:expr, $end:expr, $line:expr, $col:expr) => {
            tokens.push(Token { kind: $kind, offset: $start, end: $end, line: $line, col: $col })
        };
    }

    while i < bytes.len() {
        let c = bytes[i];
        let (tok_line, tok_col) = (line, col);
        match c {
            b'\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            b' ' | b'\t' | b'\r' => {
                i += 1;
                col += 1;
            }
            b'/' if i + 1 < bytes.len() && bytes[i + 1] == b'/' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                    col += 1;
                }
                let text = &source[start..i];
                let value: i64 = text.parse().map_err(|_| SyntaxError {
                    line: tok_line,
                    col: tok_col,
                    message: format!("integer literal `{text}` out of range"),
                })?;
                push!(TokenKind::Int(value), start, i, tok_line, tok_col);
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                    col += 1;
                }
                let word = &source[start..i];
                let kind = match word {
                    "fn" => TokenKind::KwFn,
                    "let" => TokenKind::KwLet,
                    "if" => TokenKind::KwIf,
                    "else" => TokenKind::KwElse,
                    "while" => TokenKind::KwWhile,
                    "return" => TokenKind::KwReturn,
                    "throw" => TokenKind::KwThrow,
                    "true" => TokenKind::KwTrue,
                    "false" => TokenKind::KwFalse,
                    "null" => TokenKind::KwNull,
                    _ => TokenKind::Ident(word.to_string()),
                };
                push!(kind, start, i, tok_line, tok_col);
            }
            b'"' => {
                let start = i;
                i += 1;
                col += 1;
                let mut text = String::new();
                loop {
                    if i >= bytes.len() || bytes[i] == b'\n' {
                        return Err(SyntaxError {
                            line: tok_line,
                            col: tok_col,
                            message: "unterminated string literal".to_string(),
                        });
                    }
                    match bytes[i] {
                        b'"' => {
                            i += 1;
                            col += 1;
                            break;
                        }
                        b'\\' => {
                            if i + 1 >= bytes.len() {
                                return Err(SyntaxError {
                                    line: tok_line,
                                    col: tok_col,
                                    message: "unterminated string escape".to_string(),
                                });
                            }
                            let esc = bytes[i + 1];
                            let ch = match esc {
                                b'"' => '"',
                                b'\\' => '\\',
                                b'n' => '\n',
                                b't' => '\t',
                                other => {
                                    return Err(SyntaxError {
                                        line: tok_line,
                                        col: tok_col,
                                        message: format!(
                                            "unknown string escape `\\{}`",
                                            other as char
                                        ),
                                    })
                                }
                            };
                            text.push(ch);
                            i += 2;
                            col += 2;
                        }
                        _ => {
                            // Consume a full UTF-8 scalar, not just one byte.
                            let rest = &source[i..];
                            let ch = rest.chars().next().unwrap();
                            text.push(ch);
                            i += ch.len_utf8();
                            col += 1;
                        }
                    }
                }
                push!(TokenKind::Text(text), start, i, tok_line, tok_col);
            }
            _ => {
                let two = if i + 1 < bytes.len() { &source[i..i + 2] } else { "" };
                let (kind, width) = match two {
                    "==" => (TokenKind::EqEq, 2),
                    "!=" => (TokenKind::NotEq, 2),
                    "<=" => (TokenKind::Le, 2),
                    ">=" => (TokenKind::Ge, 2),
                    "&&" => (TokenKind::AndAnd, 2),
                    "||" => (TokenKind::OrOr, 2),
                    _ => {
                        let kind = match c {
                            b'(' => TokenKind::LParen,
                            b')' => TokenKind::RParen,
                            b'{' => TokenKind::LBrace,
                            b'}' => TokenKind::RBrace,
                            b'[' => TokenKind::LBracket,
                            b']' => TokenKind::RBracket,
                            b',' => TokenKind::Comma,
                            b';' => TokenKind::Semi,
                            b':' => TokenKind::Colon,
                            b'=' => TokenKind::Assign,
                            b'+' => TokenKind::Plus,
                            b'-' => TokenKind::Minus,
                            b'*' => TokenKind::Star,
                            b'/' => TokenKind::Slash,
                            b'%' => TokenKind::Percent,
                            b'<' => TokenKind::Lt,
                            b'>' => TokenKind::Gt,
                            b'!' => TokenKind::Bang,
                            other => {
                                return Err(SyntaxError {
                                    line: tok_line,
                                    col: tok_col,
                                    message: format!("unexpected character `{}`", other as char),
                                })
                            }
                        };
                        (kind, 1)
                    }
                };
                push!(kind, i, i + width, tok_line, tok_col);
                i += width;
                col += width as u32;
            }
        }
    }
    tokens.push(Token { kind: TokenKind::Eof, offset: source.len(), end: source.len(), line, col });
    Ok(tokens)
}
