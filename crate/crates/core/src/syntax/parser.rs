// SPDX-License-Identifier: Apache-2.0

//! Recursive-descent parser with panic-mode recovery.
//!
//! Errors inside an item header turn the whole item into an
//! [`ErrorRegion`]; errors inside function bodies are contained at the
//! statement level so the enclosing function survives. Both levels skip
//! to the next `;`, `}` or item-start keyword, keeping braces balanced.

use super::{ast::*, lexer::*};
use crate::{
    diagnostics::{codes, Diagnostic},
    text::{FileId, SourceLocation},
};

const MAX_NESTING: u32 = 200;

/// Parses one source file. Never fails; problems are reported as diagnostics.
pub fn parse_source(file: FileId, text: &str) -> ParseOutcome {
    let lexed = tokenize(text, file);
    parse_tokens(file, text, &lexed)
}

/// Parses an already tokenized file.
pub fn parse_tokens(file: FileId, text: &str, lexed: &Lexed) -> ParseOutcome {
    let mut p = Parser {
        text,
        file,
        tokens: &lexed.tokens,
        pos: 0,
        diags: lexed.diagnostics.clone(),
        last_error: None,
        nesting: 0,
    };
    let module = p.module();
    ParseOutcome {
        module,
        diagnostics: p.diags,
    }
}

struct Parser<'a> {
    text: &'a str,
    file: FileId,
    tokens: &'a [Token],
    pos: usize,
    diags: Vec<Diagnostic>,
    /// token index of the last reported syntax error, to avoid cascades
    last_error: Option<usize>,
    nesting: u32,
}

type Fail = ();

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<TokenKind> {
        self.tokens.get(self.pos).map(|t| t.kind)
    }

    fn peek_at(&self, n: usize) -> Option<TokenKind> {
        self.tokens.get(self.pos + n).map(|t| t.kind)
    }

    fn at(&self, kind: TokenKind) -> bool {
        self.peek() == Some(kind)
    }

    fn at_punct(&self, p: Punct) -> bool {
        self.at(TokenKind::Punct(p))
    }

    fn at_kw(&self, k: Keyword) -> bool {
        self.at(TokenKind::Keyword(k))
    }

    fn at_item_start(&self) -> bool {
        matches!(self.peek(), Some(TokenKind::Keyword(k)) if k.starts_item())
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos];
        self.pos += 1;
        t
    }

    fn eat_punct(&mut self, p: Punct) -> bool {
        if self.at_punct(p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: Keyword) -> bool {
        if self.at_kw(k) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    /// Location of the current token, or an empty location at end of input.
    fn here(&self) -> SourceLocation {
        match self.tokens.get(self.pos) {
            Some(t) => t.loc,
            None => {
                let end = self.text.len() as u32;
                SourceLocation::new(self.file, end, end)
            }
        }
    }

    fn here_empty(&self) -> SourceLocation {
        let h = self.here();
        SourceLocation::new(self.file, h.start, h.start)
    }

    fn prev_loc(&self) -> SourceLocation {
        self.tokens[self.pos - 1].loc
    }

    fn span_from(&self, start: usize) -> SourceLocation {
        if self.pos > start {
            self.tokens[start].loc.cover(self.prev_loc())
        } else {
            self.here_empty()
        }
    }

    fn describe_current(&self) -> String {
        match self.tokens.get(self.pos) {
            Some(t) => format!("`{}`", t.text(self.text)),
            None => "end of file".to_string(),
        }
    }

    fn error_here(&mut self, expected: &str) {
        if self.last_error == Some(self.pos) {
            return;
        }
        self.last_error = Some(self.pos);
        // lexer errors are already reported
        if self.peek() == Some(TokenKind::Error) {
            return;
        }
        let msg = format!("expected {expected}, found {}", self.describe_current());
        let loc = self.here();
        self.diags
            .push(Diagnostic::error(codes::UNEXPECTED_TOKEN, msg, loc));
    }

    fn expect_punct(&mut self, p: Punct) -> Result<Token, Fail> {
        if self.at_punct(p) {
            Ok(self.bump())
        } else {
            self.error_here(&format!("`{}`", p.as_str()));
            Err(())
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<Ident, Fail> {
        if self.at(TokenKind::Ident) {
            let t = self.bump();
            Ok(Ident {
                name: t.text(self.text).to_string(),
                loc: t.loc,
            })
        } else {
            self.error_here(what);
            Err(())
        }
    }

    fn address_lit(&mut self) -> AddressLit {
        let t = self.bump();
        let value = match Address::parse_hex(t.text(self.text)) {
            Some(a) => a,
            None => {
                self.diags.push(Diagnostic::error(
                    codes::BAD_LITERAL,
                    "address literal does not fit in 128 bits",
                    t.loc,
                ));
                Address(0)
            }
        };
        AddressLit { value, loc: t.loc }
    }

    // ---------------------------------------------------------------- module

    fn module(&mut self) -> Option<ParsedModule> {
        let start = self.pos;
        if !self.eat_kw(Keyword::Module) {
            if self.peek() != Some(TokenKind::Error) {
                let loc = self.here();
                self.diags.push(Diagnostic::error(
                    codes::MISSING_MODULE,
                    "expected `module` declaration",
                    loc,
                ));
            }
            return None;
        }
        if !self.at(TokenKind::AddressLit) {
            self.error_here("module address");
            return None;
        }
        let address = self.address_lit();
        self.expect_punct(Punct::ColonColon).ok()?;
        let name = self.expect_ident("module name").ok()?;
        self.expect_punct(Punct::LBrace).ok()?;

        let mut items: Vec<ParsedItem> = Vec::new();
        loop {
            match self.peek() {
                None => {
                    self.diags.push(Diagnostic::error(
                        codes::UNCLOSED,
                        "expected `}` to close the module",
                        self.here(),
                    ));
                    break;
                }
                Some(TokenKind::Punct(Punct::RBrace)) => {
                    // a `}` followed by more items is stray, not the module's
                    let stray =
                        matches!(self.peek_at(1), Some(TokenKind::Keyword(k)) if k.starts_item());
                    if !stray {
                        self.bump();
                        break;
                    }
                    let loc = self.here();
                    self.error_here("item");
                    self.bump();
                    let region = ParsedItem::Error(ErrorRegion { loc });
                    match items.last_mut() {
                        Some(ParsedItem::Error(prev)) => prev.loc = prev.loc.cover(loc),
                        _ => items.push(region),
                    }
                    continue;
                }
                _ => {}
            }
            let item_start = self.pos;
            let item = match self.item() {
                Ok(item) => item,
                Err(()) => {
                    let loc = self.recover_item(item_start);
                    ParsedItem::Error(ErrorRegion { loc })
                }
            };
            match (items.last_mut(), item) {
                (Some(ParsedItem::Error(prev)), ParsedItem::Error(next)) => {
                    prev.loc = prev.loc.cover(next.loc);
                }
                (_, item) => items.push(item),
            }
        }
        let loc = self.span_from(start);
        if self.pos < self.tokens.len() {
            let rest = self.tokens[self.pos]
                .loc
                .cover(self.tokens[self.tokens.len() - 1].loc);
            self.diags.push(Diagnostic::error(
                codes::TRAILING_INPUT,
                "unexpected input after the module",
                rest,
            ));
            self.pos = self.tokens.len();
        }
        Some(ParsedModule {
            address,
            name,
            items,
            loc,
        })
    }

    /// Skips the rest of a broken item and returns the location of the
    /// whole error region (from `item_start`).
    fn recover_item(&mut self, item_start: usize) -> SourceLocation {
        let mut depth: i32 = 0;
        for t in &self.tokens[item_start..self.pos] {
            match t.kind {
                TokenKind::Punct(Punct::LBrace) => depth += 1,
                TokenKind::Punct(Punct::RBrace) => depth = (depth - 1).max(0),
                _ => {}
            }
        }
        while let Some(kind) = self.peek() {
            let progressed = self.pos > item_start;
            match kind {
                TokenKind::Keyword(k) if k.starts_item() && progressed => break,
                TokenKind::Punct(Punct::RBrace) if depth == 0 => {
                    if !progressed {
                        // stray `}` would otherwise close the module early
                        self.error_here("item");
                        self.bump();
                    }
                    break;
                }
                TokenKind::Punct(Punct::RBrace) => {
                    depth -= 1;
                    self.bump();
                }
                TokenKind::Punct(Punct::LBrace) => {
                    depth += 1;
                    self.bump();
                }
                TokenKind::Punct(Punct::Semi) if depth == 0 => {
                    self.bump();
                    break;
                }
                _ => {
                    self.bump();
                }
            }
        }
        self.span_from(item_start)
    }

    fn item(&mut self) -> Result<ParsedItem, Fail> {
        match self.peek() {
            Some(TokenKind::Keyword(Keyword::Use)) => self.use_decl().map(ParsedItem::Use),
            Some(TokenKind::Keyword(Keyword::Record)) => self.record_decl().map(ParsedItem::Record),
            Some(TokenKind::Keyword(Keyword::Public | Keyword::Inline | Keyword::Fun)) => {
                self.fun_decl().map(ParsedItem::Fun)
            }
            _ => {
                self.error_here("`use`, `record` or `fun`");
                Err(())
            }
        }
    }

    fn use_decl(&mut self) -> Result<UseDecl, Fail> {
        let start = self.pos;
        self.bump();
        if !self.at(TokenKind::AddressLit) {
            self.error_here("module address");
            return Err(());
        }
        let address = self.address_lit();
        self.expect_punct(Punct::ColonColon)?;
        let module = self.expect_ident("module name")?;
        let alias = if self.eat_kw(Keyword::As) {
            Some(self.expect_ident("alias")?)
        } else {
            None
        };
        self.expect_punct(Punct::Semi)?;
        Ok(UseDecl {
            address,
            module,
            alias,
            loc: self.span_from(start),
        })
    }

    fn record_decl(&mut self) -> Result<RecordDecl, Fail> {
        let start = self.pos;
        self.bump();
        let name = self.expect_ident("record name")?;
        self.expect_punct(Punct::LBrace)?;
        let mut fields = Vec::new();
        while !self.at_punct(Punct::RBrace) {
            let fstart = self.pos;
            let fname = self.expect_ident("field name")?;
            self.expect_punct(Punct::Colon)?;
            let ty = self.ty()?;
            fields.push(FieldDecl {
                name: fname,
                ty,
                loc: self.span_from(fstart),
            });
            if !self.eat_punct(Punct::Comma) {
                break;
            }
        }
        self.expect_punct(Punct::RBrace)?;
        Ok(RecordDecl {
            name,
            fields,
            loc: self.span_from(start),
        })
    }

    fn fun_decl(&mut self) -> Result<FunDecl, Fail> {
        let start = self.pos;
        let is_public = self.eat_kw(Keyword::Public);
        let is_inline = self.eat_kw(Keyword::Inline);
        if !self.eat_kw(Keyword::Fun) {
            self.error_here("`fun`");
            return Err(());
        }
        let name = self.expect_ident("function name")?;
        self.expect_punct(Punct::LParen)?;
        let mut params = Vec::new();
        while !self.at_punct(Punct::RParen) {
            let pname = self.expect_ident("parameter name")?;
            self.expect_punct(Punct::Colon)?;
            let ty = self.ty()?;
            params.push(Param { name: pname, ty });
            if !self.eat_punct(Punct::Comma) {
                break;
            }
        }
        self.expect_punct(Punct::RParen)?;
        self.expect_punct(Punct::Colon)?;
        let ret = self.ty()?;
        if !self.at_punct(Punct::LBrace) {
            self.error_here("`{`");
            return Err(());
        }
        let body = self.block();
        Ok(FunDecl {
            is_public,
            is_inline,
            name,
            params,
            ret,
            body,
            loc: self.span_from(start),
        })
    }

    fn ty(&mut self) -> Result<ParsedType, Fail> {
        let start = self.pos;
        let address = if self.at(TokenKind::AddressLit) {
            let a = self.address_lit();
            self.expect_punct(Punct::ColonColon)?;
            Some(a)
        } else {
            None
        };
        let mut segments = vec![self.expect_ident("type name")?];
        while self.eat_punct(Punct::ColonColon) {
            segments.push(self.expect_ident("type name")?);
        }
        Ok(ParsedType::Named(PathName {
            address,
            segments,
            loc: self.span_from(start),
        }))
    }

    // ------------------------------------------------------------ statements

    /// `{ stmt; ... tail? }`. Always returns a block expression; an
    /// unclosed block ends at an item-start keyword or end of input.
    fn block(&mut self) -> ParsedExpr {
        let start = self.pos;
        self.bump(); // `{`
        let mut stmts = Vec::new();
        let mut tail: Option<Box<ParsedExpr>> = None;
        self.nesting += 1;
        if self.nesting > MAX_NESTING {
            self.error_here("less deeply nested code");
            self.skip_statement();
        }
        loop {
            if self.eat_punct(Punct::RBrace) {
                break;
            }
            if self.peek().is_none() || self.at_item_start() {
                let loc = self.here_empty();
                self.diags.push(Diagnostic::error(
                    codes::UNCLOSED,
                    "expected `}` to close the block",
                    loc,
                ));
                break;
            }
            if self.eat_punct(Punct::Semi) {
                continue;
            }
            let stmt_start = self.pos;
            let stmt = self.statement();
            if self.eat_punct(Punct::Semi) {
                stmts.push(stmt);
            } else if self.at_punct(Punct::RBrace) || self.peek().is_none() || self.at_item_start()
            {
                if matches!(stmt.kind, ExprKind::Let { .. }) {
                    stmts.push(stmt);
                } else {
                    tail = Some(Box::new(stmt));
                }
            } else if self.at_kw(Keyword::Let) {
                self.error_here("`;`");
                stmts.push(stmt);
            } else {
                self.error_here("`;` or `}`");
                self.skip_statement();
                let loc = self.span_from(stmt_start);
                stmts.push(ParsedExpr {
                    kind: ExprKind::Error(vec![stmt]),
                    loc,
                });
            }
        }
        self.nesting -= 1;
        ParsedExpr {
            kind: ExprKind::Block(Block { stmts, tail }),
            loc: self.span_from(start),
        }
    }

    /// Skips to the end of the current statement: past a `;`, or up to a
    /// closing `}` or item-start keyword, keeping nested braces balanced.
    fn skip_statement(&mut self) {
        let mut depth = 0u32;
        while let Some(kind) = self.peek() {
            match kind {
                TokenKind::Keyword(k) if k.starts_item() => break,
                TokenKind::Punct(Punct::RBrace) if depth == 0 => break,
                TokenKind::Punct(Punct::RBrace) => depth -= 1,
                TokenKind::Punct(Punct::LBrace) => depth += 1,
                TokenKind::Punct(Punct::Semi) if depth == 0 => {
                    self.bump();
                    break;
                }
                _ => {}
            }
            self.bump();
        }
    }

    fn statement(&mut self) -> ParsedExpr {
        if self.at_kw(Keyword::Let) {
            self.let_stmt()
        } else {
            self.expr()
        }
    }

    fn let_stmt(&mut self) -> ParsedExpr {
        let start = self.pos;
        self.bump();
        let Ok(name) = self.expect_ident("variable name") else {
            return self.error_expr(start, vec![]);
        };
        if self.expect_punct(Punct::Assign).is_err() {
            return self.error_expr(start, vec![]);
        }
        let init = self.expr();
        ParsedExpr {
            kind: ExprKind::Let {
                name,
                init: Box::new(init),
            },
            loc: self.span_from(start),
        }
    }

    fn error_expr(&self, start: usize, children: Vec<ParsedExpr>) -> ParsedExpr {
        ParsedExpr {
            kind: ExprKind::Error(children),
            loc: self.span_from(start),
        }
    }

    // ----------------------------------------------------------- expressions

    fn expr(&mut self) -> ParsedExpr {
        self.binary(0)
    }

    fn peek_binop(&self) -> Option<BinOp> {
        Some(match self.peek()? {
            TokenKind::Punct(Punct::Plus) => BinOp::Add,
            TokenKind::Punct(Punct::Minus) => BinOp::Sub,
            TokenKind::Punct(Punct::Star) => BinOp::Mul,
            TokenKind::Punct(Punct::EqEq) => BinOp::Eq,
            TokenKind::Punct(Punct::Lt) => BinOp::Lt,
            TokenKind::Punct(Punct::AndAnd) => BinOp::And,
            TokenKind::Punct(Punct::OrOr) => BinOp::Or,
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> ParsedExpr {
        let start = self.pos;
        let mut lhs = self.postfix();
        while let Some(op) = self.peek_binop() {
            if op.precedence() < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(op.precedence() + 1);
            lhs = ParsedExpr {
                kind: ExprKind::BinOp {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                loc: self.span_from(start),
            };
        }
        lhs
    }

    fn postfix(&mut self) -> ParsedExpr {
        let start = self.pos;
        let mut e = self.primary();
        while self.at_punct(Punct::Dot) {
            self.bump();
            if self.at(TokenKind::Ident) {
                let t = self.bump();
                e = ParsedExpr {
                    kind: ExprKind::FieldAccess {
                        receiver: Box::new(e),
                        field: Ident {
                            name: t.text(self.text).to_string(),
                            loc: t.loc,
                        },
                    },
                    loc: self.span_from(start),
                };
            } else {
                self.error_here("field name");
                e = ParsedExpr {
                    kind: ExprKind::IncompleteFieldAccess {
                        receiver: Box::new(e),
                    },
                    loc: self.span_from(start),
                };
                break;
            }
        }
        e
    }

    fn primary(&mut self) -> ParsedExpr {
        let start = self.pos;
        let Some(kind) = self.peek() else {
            self.error_here("expression");
            return self.error_expr(start, vec![]);
        };
        if self.nesting > MAX_NESTING {
            self.error_here("less deeply nested code");
            return self.error_expr(start, vec![]);
        }
        match kind {
            TokenKind::IntLit => {
                let t = self.bump();
                let value = t.text(self.text).parse::<u64>().ok();
                if value.is_none() {
                    self.diags.push(Diagnostic::error(
                        codes::BAD_LITERAL,
                        "integer literal does not fit in u64",
                        t.loc,
                    ));
                }
                ParsedExpr {
                    kind: ExprKind::IntLit(value),
                    loc: t.loc,
                }
            }
            TokenKind::Keyword(Keyword::True | Keyword::False) => {
                let t = self.bump();
                ParsedExpr {
                    kind: ExprKind::BoolLit(t.kind == TokenKind::Keyword(Keyword::True)),
                    loc: t.loc,
                }
            }
            TokenKind::AddressLit => {
                if self.peek_at(1) == Some(TokenKind::Punct(Punct::ColonColon)) {
                    self.path_expr()
                } else {
                    let a = self.address_lit();
                    ParsedExpr {
                        kind: ExprKind::AddressLit(a.value),
                        loc: a.loc,
                    }
                }
            }
            TokenKind::Ident => match self.peek_at(1) {
                Some(TokenKind::Punct(Punct::ColonColon)) => self.path_expr(),
                Some(TokenKind::Punct(Punct::LParen)) => {
                    let t = self.bump();
                    let func = Ident {
                        name: t.text(self.text).to_string(),
                        loc: t.loc,
                    };
                    let args = self.call_args();
                    ParsedExpr {
                        kind: ExprKind::Call { func, args },
                        loc: self.span_from(start),
                    }
                }
                _ => {
                    let t = self.bump();
                    ParsedExpr {
                        kind: ExprKind::Var(Ident {
                            name: t.text(self.text).to_string(),
                            loc: t.loc,
                        }),
                        loc: t.loc,
                    }
                }
            },
            TokenKind::Punct(Punct::LParen) => {
                self.bump();
                self.nesting += 1;
                let inner = self.expr();
                self.nesting -= 1;
                if !self.eat_punct(Punct::RParen) {
                    self.error_here("`)`");
                }
                inner
            }
            TokenKind::Punct(Punct::LBrace) => self.block(),
            TokenKind::Keyword(Keyword::If) => self.if_expr(),
            _ => {
                self.error_here("expression");
                self.error_expr(start, vec![])
            }
        }
    }

    fn if_expr(&mut self) -> ParsedExpr {
        let start = self.pos;
        self.bump();
        self.nesting += 1;
        let cond = self.expr();
        let then_branch = if self.at_punct(Punct::LBrace) {
            self.block()
        } else {
            self.error_here("`{`");
            self.error_expr(self.pos, vec![])
        };
        let else_branch = if self.eat_kw(Keyword::Else) {
            if self.at_kw(Keyword::If) {
                self.if_expr()
            } else if self.at_punct(Punct::LBrace) {
                self.block()
            } else {
                self.error_here("`{` or `if`");
                self.error_expr(self.pos, vec![])
            }
        } else {
            self.error_here("`else`");
            self.error_expr(self.pos, vec![])
        };
        self.nesting -= 1;
        ParsedExpr {
            kind: ExprKind::If {
                cond: Box::new(cond),
                then_branch: Box::new(then_branch),
                else_branch: Box::new(else_branch),
            },
            loc: self.span_from(start),
        }
    }

    fn call_args(&mut self) -> Vec<ParsedExpr> {
        self.bump(); // `(`
        self.nesting += 1;
        let mut args = Vec::new();
        loop {
            if self.eat_punct(Punct::RParen) {
                break;
            }
            if self.peek().is_none() {
                self.error_here("`)`");
                break;
            }
            args.push(self.expr());
            if self.eat_punct(Punct::Comma) {
                continue;
            }
            if !self.eat_punct(Punct::RParen) {
                self.error_here("`,` or `)`");
            }
            break;
        }
        self.nesting -= 1;
        args
    }

    /// Qualified path starting at an address literal or identifier followed by `::`.
    fn path_expr(&mut self) -> ParsedExpr {
        let start = self.pos;
        let address = if self.at(TokenKind::AddressLit) {
            Some(self.address_lit())
        } else {
            None
        };
        let mut segments = Vec::new();
        if address.is_none() {
            let t = self.bump();
            segments.push(Ident {
                name: t.text(self.text).to_string(),
                loc: t.loc,
            });
        }
        let mut incomplete = false;
        while self.eat_punct(Punct::ColonColon) {
            if self.at(TokenKind::Ident) {
                let t = self.bump();
                segments.push(Ident {
                    name: t.text(self.text).to_string(),
                    loc: t.loc,
                });
            } else {
                self.error_here("name after `::`");
                incomplete = true;
                break;
            }
        }
        let path_loc = self.span_from(start);
        if incomplete {
            return ParsedExpr {
                kind: ExprKind::IncompletePath {
                    path: PathName {
                        address,
                        segments,
                        loc: path_loc,
                    },
                    member: None,
                },
                loc: path_loc,
            };
        }
        if self.at_punct(Punct::LParen) {
            let args = self.call_args();
            return ParsedExpr {
                kind: ExprKind::PathCall {
                    path: PathName {
                        address,
                        segments,
                        loc: path_loc,
                    },
                    args,
                },
                loc: self.span_from(start),
            };
        }
        self.error_here("`(` after a qualified name");
        let member = if address.is_some() && segments.len() < 2 {
            None
        } else {
            segments.pop()
        };
        ParsedExpr {
            kind: ExprKind::IncompletePath {
                path: PathName {
                    address,
                    segments,
                    loc: path_loc,
                },
                member,
            },
            loc: path_loc,
        }
    }
}
