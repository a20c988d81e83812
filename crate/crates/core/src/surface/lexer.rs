//! Tokens with source positions.

use std::fmt;

use super::{ParseError, Span};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    LBrack,
    RBrack,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LAngle,
    RAngle,
    Comma,
    Semi,
    Colon,
    ColonEq,
    Bang,
    Plus,
    Arrow,
    EqEq,
    Tilde,
    Proj1,
    Proj2,
    /// Directive terminator: `.` followed by whitespace or end of input.
    Dot,
    Tau,
    Ident(String),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::LBrack => "`[`",
            Tok::RBrack => "`]`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::LAngle => "`<`",
            Tok::RAngle => "`>`",
            Tok::Comma => "`,`",
            Tok::Semi => "`;`",
            Tok::Colon => "`:`",
            Tok::ColonEq => "`:=`",
            Tok::Bang => "`!`",
            Tok::Plus => "`+`",
            Tok::Arrow => "`=>`",
            Tok::EqEq => "`==`",
            Tok::Tilde => "`~`",
            Tok::Proj1 => "`.1`",
            Tok::Proj2 => "`.2`",
            Tok::Dot => "`.`",
            Tok::Tau => "`tau`",
            Tok::Ident(s) => return write!(f, "identifier `{s}`"),
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
    /// No whitespace between this token and the previous one.
    pub glued: bool,
}

pub fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\'' || c == '@'
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let mut glued = false;
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            glued = false;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            glued = false;
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            glued = false;
            continue;
        }
        let start = (line, col);
        let next = chars.get(i + 1).copied();
        let (tok, len) = match c {
            '[' => (Tok::LBrack, 1),
            ']' => (Tok::RBrack, 1),
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '{' => (Tok::LBrace, 1),
            '}' => (Tok::RBrace, 1),
            '<' | '⟨' => (Tok::LAngle, 1),
            '>' | '⟩' => (Tok::RAngle, 1),
            ',' => (Tok::Comma, 1),
            ';' => (Tok::Semi, 1),
            ':' if next == Some('=') => (Tok::ColonEq, 2),
            ':' => (Tok::Colon, 1),
            '!' => (Tok::Bang, 1),
            '+' => (Tok::Plus, 1),
            '=' if next == Some('>') => (Tok::Arrow, 2),
            '=' if next == Some('=') => (Tok::EqEq, 2),
            '⇒' => (Tok::Arrow, 1),
            '~' | '¬' => (Tok::Tilde, 1),
            'τ' if !next.is_some_and(is_ident_char) => (Tok::Tau, 1),
            '.' => match next {
                Some('1') if !chars.get(i + 2).copied().is_some_and(is_ident_char) => (Tok::Proj1, 2),
                Some('2') if !chars.get(i + 2).copied().is_some_and(is_ident_char) => (Tok::Proj2, 2),
                None => (Tok::Dot, 1),
                Some(n) if n.is_whitespace() => (Tok::Dot, 1),
                Some(_) => {
                    return Err(ParseError::at(
                        Span::point(line, col),
                        vec!["`.1`".into(), "`.2`".into(), "`.` followed by whitespace".into()],
                        format!("`.{}`", next.unwrap_or(' ')),
                    ))
                }
            },
            c if is_ident_char(c) => {
                let mut j = i;
                while j < chars.len() && is_ident_char(chars[j]) {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                let tok = if word == "tau" { Tok::Tau } else { Tok::Ident(word) };
                (tok, j - i)
            }
            other => {
                return Err(ParseError::at(Span::point(line, col), vec!["a token".into()], format!("`{other}`")));
            }
        };
        i += len;
        col += len as u32;
        out.push(Token { tok, span: Span { line: start.0, col: start.1, end_line: line, end_col: col }, glued });
        glued = true;
    }
    out.push(Token { tok: Tok::Eof, span: Span::point(line, col), glued: false });
    Ok(out)
}
