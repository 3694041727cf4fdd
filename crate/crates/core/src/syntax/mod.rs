// SPDX-License-Identifier: Apache-2.0

//! Lexing, resilient parsing and cursor-context lookup.

pub mod ast;
mod context;
mod lexer;
mod parser;
mod summary;

pub use ast::*;
pub use context::{locate_access_context, AccessContext};
pub use lexer::{tokenize, Keyword, Lexed, Punct, Token, TokenKind, Trivia, TriviaKind};
pub use parser::{parse_source, parse_tokens};
pub use summary::{interface_digest, referenced_modules};

#[cfg(test)]
mod tests;
