// SPDX-License-Identifier: Apache-2.0

use crate::diagnostics::{codes, Diagnostic};
use crate::text::{FileId, SourceLocation};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Keyword {
    Module,
    Record,
    Fun,
    Public,
    Inline,
    Use,
    As,
    Let,
    If,
    Else,
    True,
    False,
}

impl Keyword {
    pub fn lookup(s: &str) -> Option<Keyword> {
        Some(match s {
            "module" => Keyword::Module,
            "record" => Keyword::Record,
            "fun" => Keyword::Fun,
            "public" => Keyword::Public,
            "inline" => Keyword::Inline,
            "use" => Keyword::Use,
            "as" => Keyword::As,
            "let" => Keyword::Let,
            "if" => Keyword::If,
            "else" => Keyword::Else,
            "true" => Keyword::True,
            "false" => Keyword::False,
            _ => return None,
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Keyword::Module => "module",
            Keyword::Record => "record",
            Keyword::Fun => "fun",
            Keyword::Public => "public",
            Keyword::Inline => "inline",
            Keyword::Use => "use",
            Keyword::As => "as",
            Keyword::Let => "let",
            Keyword::If => "if",
            Keyword::Else => "else",
            Keyword::True => "true",
            Keyword::False => "false",
        }
    }

    /// Keywords that may begin a module item.
    pub fn starts_item(&self) -> bool {
        matches!(
            self,
            Keyword::Record | Keyword::Fun | Keyword::Public | Keyword::Inline | Keyword::Use
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Punct {
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Semi,
    Colon,
    ColonColon,
    Dot,
    Plus,
    Minus,
    Star,
    Assign,
    EqEq,
    Lt,
    AndAnd,
    OrOr,
}

impl Punct {
    pub fn as_str(&self) -> &'static str {
        match self {
            Punct::LBrace => "{",
            Punct::RBrace => "}",
            Punct::LParen => "(",
            Punct::RParen => ")",
            Punct::Comma => ",",
            Punct::Semi => ";",
            Punct::Colon => ":",
            Punct::ColonColon => "::",
            Punct::Dot => ".",
            Punct::Plus => "+",
            Punct::Minus => "-",
            Punct::Star => "*",
            Punct::Assign => "=",
            Punct::EqEq => "==",
            Punct::Lt => "<",
            Punct::AndAnd => "&&",
            Punct::OrOr => "||",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    Keyword(Keyword),
    Ident,
    IntLit,
    AddressLit,
    Punct(Punct),
    Error,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub kind: TokenKind,
    pub loc: SourceLocation,
}

impl Token {
    pub fn text<'a>(&self, source: &'a str) -> &'a str {
        self.loc.slice(source)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TriviaKind {
    Whitespace,
    Comment,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trivia {
    pub kind: TriviaKind,
    pub loc: SourceLocation,
}

/// Output of [`tokenize`]: tokens and trivia together cover the input exactly.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lexed {
    pub tokens: Vec<Token>,
    pub trivia: Vec<Trivia>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Lexed {
    /// Rebuilds the source from tokens and trivia.
    pub fn reconstruct(&self, source: &str) -> String {
        let mut pieces: Vec<SourceLocation> = self
            .tokens
            .iter()
            .map(|t| t.loc)
            .chain(self.trivia.iter().map(|t| t.loc))
            .collect();
        pieces.sort_by_key(|l| l.start);
        pieces.iter().map(|l| l.slice(source)).collect()
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Splits `text` into tokens. Never fails: unknown characters become
/// [`TokenKind::Error`] tokens, each with a diagnostic.
pub fn tokenize(text: &str, file: FileId) -> Lexed {
    let bytes = text.as_bytes();
    let mut out = Lexed::default();
    let loc = |s: usize, e: usize| SourceLocation::new(file, s as u32, e as u32);
    let mut i = 0;
    while i < bytes.len() {
        let start = i;
        let c = text[i..].chars().next().unwrap();
        if c.is_whitespace() {
            while i < bytes.len() {
                let c = text[i..].chars().next().unwrap();
                if !c.is_whitespace() {
                    break;
                }
                i += c.len_utf8();
            }
            out.trivia.push(Trivia {
                kind: TriviaKind::Whitespace,
                loc: loc(start, i),
            });
            continue;
        }
        if text[i..].starts_with("//") {
            i = text[i..].find('\n').map(|n| i + n).unwrap_or(bytes.len());
            out.trivia.push(Trivia {
                kind: TriviaKind::Comment,
                loc: loc(start, i),
            });
            continue;
        }
        let kind = if is_ident_start(c) {
            while i < bytes.len() && is_ident_continue(bytes[i] as char) {
                i += 1;
            }
            match Keyword::lookup(&text[start..i]) {
                Some(kw) => TokenKind::Keyword(kw),
                None => TokenKind::Ident,
            }
        } else if c.is_ascii_digit() {
            if text[i..].starts_with("0x")
                && bytes.get(i + 2).is_some_and(|b| b.is_ascii_hexdigit())
            {
                i += 2;
                while i < bytes.len() && bytes[i].is_ascii_hexdigit() {
                    i += 1;
                }
                TokenKind::AddressLit
            } else {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                TokenKind::IntLit
            }
        } else {
            let two = text.get(i..i + 2).unwrap_or("");
            let (p, len) = match two {
                "::" => (Some(Punct::ColonColon), 2),
                "==" => (Some(Punct::EqEq), 2),
                "&&" => (Some(Punct::AndAnd), 2),
                "||" => (Some(Punct::OrOr), 2),
                _ => (
                    match c {
                        '{' => Some(Punct::LBrace),
                        '}' => Some(Punct::RBrace),
                        '(' => Some(Punct::LParen),
                        ')' => Some(Punct::RParen),
                        ',' => Some(Punct::Comma),
                        ';' => Some(Punct::Semi),
                        ':' => Some(Punct::Colon),
                        '.' => Some(Punct::Dot),
                        '+' => Some(Punct::Plus),
                        '-' => Some(Punct::Minus),
                        '*' => Some(Punct::Star),
                        '=' => Some(Punct::Assign),
                        '<' => Some(Punct::Lt),
                        _ => None,
                    },
                    1,
                ),
            };
            match p {
                Some(p) => {
                    i += len;
                    TokenKind::Punct(p)
                }
                None => {
                    i += c.len_utf8();
                    out.diagnostics.push(Diagnostic::error(
                        codes::UNEXPECTED_CHAR,
                        format!("unexpected character `{c}`"),
                        loc(start, i),
                    ));
                    TokenKind::Error
                }
            }
        };
        out.tokens.push(Token {
            kind,
            loc: loc(start, i),
        });
    }
    out
}
