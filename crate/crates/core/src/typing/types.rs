// SPDX-License-Identifier: Apache-2.0

//! Typing-level AST. Import declarations are resolved into each module's
//! use table; every node keeps the location of the parse node it came from.

use crate::{
    syntax::{Address, BinOp},
    text::{FileId, SourceLocation},
};
use serde::{Deserialize, Serialize};
use std::{
    collections::{BTreeMap, BTreeSet},
    fmt,
};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModuleId {
    pub address: Address,
    pub name: String,
}

impl ModuleId {
    pub fn new(address: Address, name: impl Into<String>) -> Self {
        Self {
            address,
            name: name.into(),
        }
    }
}

impl fmt::Display for ModuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}::{}", self.address, self.name)
    }
}

/// A record type or function named by its defining module.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MemberRef {
    pub module: ModuleId,
    pub name: String,
}

impl fmt::Display for MemberRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}::{}", self.module, self.name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TypeRepr {
    U64,
    Bool,
    Address,
    Record(MemberRef),
    /// Absorbs further checks so one root cause yields one diagnostic.
    Error,
}

impl TypeRepr {
    pub fn is_error(&self) -> bool {
        matches!(self, TypeRepr::Error)
    }

    pub fn record(&self) -> Option<&MemberRef> {
        match self {
            TypeRepr::Record(r) => Some(r),
            _ => None,
        }
    }
}

impl fmt::Display for TypeRepr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeRepr::U64 => f.write_str("u64"),
            TypeRepr::Bool => f.write_str("bool"),
            TypeRepr::Address => f.write_str("address"),
            TypeRepr::Record(r) => f.write_str(&r.name),
            TypeRepr::Error => f.write_str("_"),
        }
    }
}

/// A type annotation as written: the resolved type plus where its parts are.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TypeUse {
    pub ty: TypeRepr,
    pub loc: SourceLocation,
    /// location of the type's own name (last path segment)
    pub name_loc: SourceLocation,
    /// module segment of a qualified type and the module it resolved to
    pub module: Option<(SourceLocation, ModuleId)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Visibility {
    Public,
    Private,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParamSig {
    pub name: String,
    pub name_loc: SourceLocation,
    pub ty: TypeUse,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FunctionSignature {
    pub name: String,
    pub visibility: Visibility,
    pub is_inline: bool,
    pub params: Vec<ParamSig>,
    pub ret: TypeUse,
    /// location of the function's name identifier
    pub decl_loc: SourceLocation,
}

impl FunctionSignature {
    pub fn is_public(&self) -> bool {
        self.visibility == Visibility::Public
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldDef {
    pub name: String,
    pub decl_loc: SourceLocation,
    pub ty: TypeUse,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RecordDef {
    pub name: String,
    pub decl_loc: SourceLocation,
    pub fields: Vec<FieldDef>,
}

impl RecordDef {
    pub fn field(&self, name: &str) -> Option<&FieldDef> {
        self.fields.iter().find(|f| f.name == name)
    }
}

/// A resolved `use` declaration.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UseEntry {
    pub target: ModuleId,
    /// the whole `use ...;` declaration
    pub decl_loc: SourceLocation,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TypedFunction {
    pub sig: FunctionSignature,
    /// Absent when the function's file was checked in skip-bodies mode
    /// (inline functions always keep their body).
    pub body: Option<TypedExpr>,
    pub body_loc: SourceLocation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypedModule {
    pub id: ModuleId,
    pub file: FileId,
    pub name_loc: SourceLocation,
    pub loc: SourceLocation,
    pub records: BTreeMap<String, RecordDef>,
    pub functions: BTreeMap<String, TypedFunction>,
    pub use_table: BTreeMap<String, UseEntry>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypedPackage {
    pub modules: BTreeMap<ModuleId, TypedModule>,
}

impl TypedPackage {
    pub fn module_of_file(&self, file: FileId) -> Option<&TypedModule> {
        self.modules.values().find(|m| m.file == file)
    }
}

/// Which files get their (non-inline) function bodies checked.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypingMode {
    pub skip_bodies_for: BTreeSet<FileId>,
}

impl TypingMode {
    pub fn full() -> Self {
        Self::default()
    }

    pub fn skipping(files: impl IntoIterator<Item = FileId>) -> Self {
        Self {
            skip_bodies_for: files.into_iter().collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TypedExpr {
    pub kind: TExprKind,
    pub ty: TypeRepr,
    pub loc: SourceLocation,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TypedBlock {
    pub stmts: Vec<TypedExpr>,
    pub tail: Option<Box<TypedExpr>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TExprKind {
    Int(u64),
    Bool(bool),
    Address(Address),
    /// Use of a parameter or let-bound variable declared at `def_loc`.
    Local {
        name: String,
        def_loc: SourceLocation,
    },
    Field {
        receiver: Box<TypedExpr>,
        field: String,
        field_loc: SourceLocation,
        /// record that declares the field, when it resolved
        record: Option<MemberRef>,
    },
    IncompleteField {
        receiver: Box<TypedExpr>,
    },
    Call {
        target: MemberRef,
        inline: bool,
        name_loc: SourceLocation,
        /// module segment of a qualified call and the module it resolved to
        module: Option<(SourceLocation, ModuleId)>,
        args: Vec<TypedExpr>,
    },
    Let {
        name: String,
        name_loc: SourceLocation,
        init: Box<TypedExpr>,
    },
    If {
        cond: Box<TypedExpr>,
        then_branch: Box<TypedExpr>,
        else_branch: Box<TypedExpr>,
    },
    Block(TypedBlock),
    BinOp {
        op: BinOp,
        lhs: Box<TypedExpr>,
        rhs: Box<TypedExpr>,
    },
    /// Ill-formed expression; typed sub-expressions are kept for analysis.
    Error(Vec<TypedExpr>),
}

impl TypedExpr {
    pub fn children(&self) -> Vec<&TypedExpr> {
        match &self.kind {
            TExprKind::Int(_)
            | TExprKind::Bool(_)
            | TExprKind::Address(_)
            | TExprKind::Local { .. } => vec![],
            TExprKind::Field { receiver, .. } | TExprKind::IncompleteField { receiver } => {
                vec![receiver]
            }
            TExprKind::Call { args, .. } => args.iter().collect(),
            TExprKind::Let { init, .. } => vec![init],
            TExprKind::If {
                cond,
                then_branch,
                else_branch,
            } => vec![cond, then_branch, else_branch],
            TExprKind::Block(b) => b.stmts.iter().chain(b.tail.as_deref()).collect(),
            TExprKind::BinOp { lhs, rhs, .. } => vec![lhs, rhs],
            TExprKind::Error(children) => children.iter().collect(),
        }
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a TypedExpr)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }
}
