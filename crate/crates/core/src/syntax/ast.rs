// SPDX-License-Identifier: Apache-2.0

//! Parse-level AST. Every node keeps the location of the source it came
//! from; incomplete constructs are explicit nodes rather than errors.

use crate::{diagnostics::Diagnostic, text::SourceLocation};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Account address, written as a hex literal (`0x1`).
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default,
)]
pub struct Address(pub u128);

impl Address {
    pub fn parse_hex(lit: &str) -> Option<Address> {
        let digits = lit.strip_prefix("0x")?;
        u128::from_str_radix(digits, 16).ok().map(Address)
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{:x}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ident {
    pub name: String,
    pub loc: SourceLocation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AddressLit {
    pub value: Address,
    pub loc: SourceLocation,
}

/// A possibly qualified name: `x`, `m::x` or `0x1::m::x`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathName {
    pub address: Option<AddressLit>,
    pub segments: Vec<Ident>,
    pub loc: SourceLocation,
}

impl PathName {
    /// The last segment, i.e. the member being named.
    pub fn member(&self) -> &Ident {
        self.segments
            .last()
            .expect("paths have at least one segment")
    }

    /// The module part of the path (`m` in `m::f`), if any.
    pub fn module_segment(&self) -> Option<&Ident> {
        let n = self.segments.len();
        (n >= 2).then(|| &self.segments[n - 2])
    }
}

impl fmt::Display for PathName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(a) = &self.address {
            write!(f, "{}::", a.value)?;
        }
        let names: Vec<&str> = self.segments.iter().map(|s| s.name.as_str()).collect();
        f.write_str(&names.join("::"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParsedType {
    Named(PathName),
    Error(SourceLocation),
}

impl ParsedType {
    pub fn loc(&self) -> SourceLocation {
        match self {
            ParsedType::Named(p) => p.loc,
            ParsedType::Error(l) => *l,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParsedModule {
    pub address: AddressLit,
    pub name: Ident,
    pub items: Vec<ParsedItem>,
    pub loc: SourceLocation,
}

#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParsedItem {
    Use(UseDecl),
    Record(RecordDecl),
    Fun(FunDecl),
    Error(ErrorRegion),
}

impl ParsedItem {
    pub fn loc(&self) -> SourceLocation {
        match self {
            ParsedItem::Use(u) => u.loc,
            ParsedItem::Record(r) => r.loc,
            ParsedItem::Fun(f) => f.loc,
            ParsedItem::Error(e) => e.loc,
        }
    }

    pub fn name(&self) -> Option<&Ident> {
        match self {
            ParsedItem::Use(u) => Some(u.alias.as_ref().unwrap_or(&u.module)),
            ParsedItem::Record(r) => Some(&r.name),
            ParsedItem::Fun(f) => Some(&f.name),
            ParsedItem::Error(_) => None,
        }
    }
}

/// `use 0x1::m;` or `use 0x1::m as a;`
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UseDecl {
    pub address: AddressLit,
    pub module: Ident,
    pub alias: Option<Ident>,
    pub loc: SourceLocation,
}

impl UseDecl {
    pub fn alias_name(&self) -> &str {
        &self.alias.as_ref().unwrap_or(&self.module).name
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RecordDecl {
    pub name: Ident,
    pub fields: Vec<FieldDecl>,
    pub loc: SourceLocation,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldDecl {
    pub name: Ident,
    pub ty: ParsedType,
    pub loc: SourceLocation,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FunDecl {
    pub is_public: bool,
    pub is_inline: bool,
    pub name: Ident,
    pub params: Vec<Param>,
    pub ret: ParsedType,
    pub body: ParsedExpr,
    pub loc: SourceLocation,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Param {
    pub name: Ident,
    pub ty: ParsedType,
}

/// Tokens skipped during recovery. Always accompanied by at least one diagnostic.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ErrorRegion {
    pub loc: SourceLocation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Eq,
    Lt,
    And,
    Or,
}

impl BinOp {
    pub fn as_str(&self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Eq => "==",
            BinOp::Lt => "<",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding power; higher binds tighter.
    pub fn precedence(&self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq => 3,
            BinOp::Lt => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul => 6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParsedExpr {
    pub kind: ExprKind,
    pub loc: SourceLocation,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Block {
    pub stmts: Vec<ParsedExpr>,
    pub tail: Option<Box<ParsedExpr>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExprKind {
    /// `None` when the literal does not fit in `u64`.
    IntLit(Option<u64>),
    BoolLit(bool),
    AddressLit(Address),
    Var(Ident),
    FieldAccess {
        receiver: Box<ParsedExpr>,
        field: Ident,
    },
    /// `receiver.` with no field name yet.
    IncompleteFieldAccess {
        receiver: Box<ParsedExpr>,
    },
    /// Local call `f(args)`.
    Call {
        func: Ident,
        args: Vec<ParsedExpr>,
    },
    /// Qualified call `m::f(args)` / `0x1::m::f(args)`.
    PathCall {
        path: PathName,
        args: Vec<ParsedExpr>,
    },
    /// `m::` / `0x1::m::` with no member name yet, or `m::f` without
    /// call parentheses (then `member` holds the partial name).
    IncompletePath {
        path: PathName,
        member: Option<Ident>,
    },
    Let {
        name: Ident,
        init: Box<ParsedExpr>,
    },
    If {
        cond: Box<ParsedExpr>,
        then_branch: Box<ParsedExpr>,
        else_branch: Box<ParsedExpr>,
    },
    Block(Block),
    BinOp {
        op: BinOp,
        lhs: Box<ParsedExpr>,
        rhs: Box<ParsedExpr>,
    },
    /// Unparseable expression; sub-expressions that did parse are kept.
    Error(Vec<ParsedExpr>),
}

impl ParsedExpr {
    /// Direct sub-expressions in source order.
    pub fn children(&self) -> Vec<&ParsedExpr> {
        match &self.kind {
            ExprKind::IntLit(_)
            | ExprKind::BoolLit(_)
            | ExprKind::AddressLit(_)
            | ExprKind::Var(_)
            | ExprKind::IncompletePath { .. } => vec![],
            ExprKind::FieldAccess { receiver, .. }
            | ExprKind::IncompleteFieldAccess { receiver } => vec![receiver],
            ExprKind::Call { args, .. } | ExprKind::PathCall { args, .. } => args.iter().collect(),
            ExprKind::Let { init, .. } => vec![init],
            ExprKind::If {
                cond,
                then_branch,
                else_branch,
            } => vec![cond, then_branch, else_branch],
            ExprKind::Block(b) => b.stmts.iter().chain(b.tail.as_deref()).collect(),
            ExprKind::BinOp { lhs, rhs, .. } => vec![lhs, rhs],
            ExprKind::Error(children) => children.iter().collect(),
        }
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a ParsedExpr)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }
}

/// Result of parsing one file. `module` is absent only when no module
/// header could be recognized.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseOutcome {
    pub module: Option<ParsedModule>,
    pub diagnostics: Vec<Diagnostic>,
}
