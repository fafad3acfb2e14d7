use super::{ErrorKind, ParseError, Pos};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Dot,
    Eq,
    Amp,
    Bar,
    Arrow,
    Implies,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Bar => "`|`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Implies => "`=>`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

pub(crate) fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let mut adv = 1;
        match c {
            '\n' => {
                line += 1;
                col = 0;
            }
            c if c.is_whitespace() => {}
            '#' => {
                while i + adv < chars.len() && chars[i + adv] != '\n' {
                    adv += 1;
                }
            }
            '(' => out.push((Tok::LParen, pos)),
            ')' => out.push((Tok::RParen, pos)),
            '{' => out.push((Tok::LBrace, pos)),
            '}' => out.push((Tok::RBrace, pos)),
            ',' => out.push((Tok::Comma, pos)),
            ':' => out.push((Tok::Colon, pos)),
            '.' => out.push((Tok::Dot, pos)),
            '&' => out.push((Tok::Amp, pos)),
            '|' => out.push((Tok::Bar, pos)),
            '=' if chars.get(i + 1) == Some(&'>') => {
                out.push((Tok::Implies, pos));
                adv = 2;
            }
            '=' => out.push((Tok::Eq, pos)),
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push((Tok::Arrow, pos));
                adv = 2;
            }
            c if c.is_alphanumeric() || c == '_' => {
                let mut s = String::new();
                let mut j = i;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_' || chars[j] == '\'') {
                    s.push(chars[j]);
                    j += 1;
                }
                adv = j - i;
                out.push((Tok::Ident(s), pos));
            }
            other => {
                return Err(ParseError {
                    kind: ErrorKind::Lexical,
                    pos,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
        i += adv;
        col += adv;
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}
