use std::fmt;

use num_bigint::BigInt;

use super::ParseError;
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(BigInt),
    /// A literal with a fractional part, such as `13.5`.
    Decimal(Rational),
    Assign,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    At,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "`{s}`"),
            Tok::Int(i) => return write!(f, "`{i}`"),
            Tok::Decimal(r) => return write!(f, "`{r}`"),
            Tok::Assign => ":=",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::At => "@",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Caret => "^",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Eq => "=",
            Tok::Eof => return f.write_str("end of input"),
        };
        write!(f, "`{s}`")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

/// Splits `src` into tokens. Comments run from `#` or `//` to end of line.
/// Unicode `≤`, `≥`, `⋆` and `∞` are accepted as `<=`, `>=`, `*` and `inf`.
pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let start = (line, col);
        let mut adv = 1;
        let tok = match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => None,
            '#' => {
                while i + adv < chars.len() && chars[i + adv] != '\n' {
                    adv += 1;
                }
                None
            }
            '/' if chars.get(i + 1) == Some(&'/') => {
                while i + adv < chars.len() && chars[i + adv] != '\n' {
                    adv += 1;
                }
                None
            }
            c if c.is_ascii_digit() => {
                while i + adv < chars.len() && chars[i + adv].is_ascii_digit() {
                    adv += 1;
                }
                let int: String = chars[i..i + adv].iter().collect();
                if chars.get(i + adv) == Some(&'.')
                    && chars.get(i + adv + 1).is_some_and(|c| c.is_ascii_digit())
                {
                    adv += 1;
                    while i + adv < chars.len() && chars[i + adv].is_ascii_digit() {
                        adv += 1;
                    }
                    let text: String = chars[i..i + adv].iter().collect();
                    let r = crate::prob::parse_rational(&text).expect("digits with one dot");
                    Some(Tok::Decimal(r))
                } else {
                    Some(Tok::Int(int.parse().expect("digits")))
                }
            }
            c if c.is_alphabetic() || c == '_' => {
                while i + adv < chars.len() && (chars[i + adv].is_alphanumeric() || chars[i + adv] == '_') {
                    adv += 1;
                }
                Some(Tok::Ident(chars[i..i + adv].iter().collect()))
            }
            ':' if chars.get(i + 1) == Some(&'=') => {
                adv = 2;
                Some(Tok::Assign)
            }
            '<' if chars.get(i + 1) == Some(&'=') => {
                adv = 2;
                Some(Tok::Le)
            }
            '>' if chars.get(i + 1) == Some(&'=') => {
                adv = 2;
                Some(Tok::Ge)
            }
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ',' => Some(Tok::Comma),
            ';' => Some(Tok::Semi),
            ':' => Some(Tok::Colon),
            '@' => Some(Tok::At),
            '+' => Some(Tok::Plus),
            '-' | '−' => Some(Tok::Minus),
            '*' | '⋆' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '<' => Some(Tok::Lt),
            '>' => Some(Tok::Gt),
            '≤' => Some(Tok::Le),
            '≥' => Some(Tok::Ge),
            '=' => Some(Tok::Eq),
            '∞' => Some(Tok::Ident("inf".into())),
            other => {
                return Err(ParseError::new(line, col, format!("unexpected character `{other}`")));
            }
        };
        if let Some(tok) = tok {
            out.push(Token { tok, line: start.0, col: start.1 });
        }
        i += adv;
        col += adv;
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}
