// SPDX-License-Identifier: Apache-2.0

//! Name resolution and type checking of a package.
//!
//! Checking runs in three phases: module skeletons (ids and record names),
//! signatures (use tables, record fields, function signatures), then
//! function bodies. Bodies of files in [`TypingMode::skip_bodies_for`] are
//! not checked, except for inline functions whose bodies dependents need.
//! Every checked body then goes through inline expansion.

use super::{
    inline::{expand_inline_calls, InlineError},
    interface::{ModuleDecls, ModuleInterface},
    types::*,
};
use crate::{
    diagnostics::{codes, Diagnostic},
    par,
    syntax::{
        AddressLit, BinOp, Block, ExprKind, FunDecl, Ident, ParsedExpr, ParsedItem, ParsedModule,
        ParsedType, PathName,
    },
    text::{FileId, SourceLocation},
};
use std::{
    collections::{BTreeMap, BTreeSet},
    sync::Arc,
};

/// Interfaces of every module available from dependency packages.
pub type DepInterfaces = BTreeMap<ModuleId, Arc<ModuleInterface>>;

/// Checks all `parsed` modules against `deps`.
///
/// Signatures and record types are checked for every file; function bodies
/// only for files not in `mode.skip_bodies_for`. Problems are reported as
/// diagnostics, never as failures. Diagnostics are sorted by location.
pub fn check_package<'a>(
    parsed: impl IntoIterator<Item = (FileId, &'a ParsedModule)>,
    deps: &DepInterfaces,
    mode: &TypingMode,
) -> (TypedPackage, Vec<Diagnostic>) {
    let mut diags = Vec::new();

    // phase 1: module ids and record names
    let mut sources: BTreeMap<ModuleId, (FileId, &ParsedModule)> = BTreeMap::new();
    let mut files: Vec<(FileId, &ParsedModule)> = parsed.into_iter().collect();
    files.sort_by_key(|(f, _)| *f);
    for (file, pm) in files {
        let id = ModuleId::new(pm.address.value, pm.name.name.clone());
        if sources.contains_key(&id) || deps.contains_key(&id) {
            diags.push(Diagnostic::error(
                codes::DUPLICATE,
                format!("duplicate module `{id}`"),
                pm.name.loc,
            ));
            continue;
        }
        sources.insert(id, (file, pm));
    }
    let record_names: BTreeMap<ModuleId, BTreeSet<String>> = sources
        .iter()
        .map(|(id, (_, pm))| {
            let names = pm
                .items
                .iter()
                .filter_map(|i| match i {
                    ParsedItem::Record(r) => Some(r.name.name.clone()),
                    _ => None,
                })
                .collect();
            (id.clone(), names)
        })
        .collect();

    // phase 2: signatures
    let mut modules: BTreeMap<ModuleId, TypedModule> = BTreeMap::new();
    let mut resolvers: BTreeMap<ModuleId, Resolver> = BTreeMap::new();
    for (id, (file, pm)) in &sources {
        let mut sig = SignatureCollector {
            resolver: Resolver {
                module: id.clone(),
                use_table: BTreeMap::new(),
                broken_aliases: BTreeSet::new(),
            },
            record_names: &record_names,
            deps,
            diags: Vec::new(),
        };
        let module = sig.collect(*file, pm);
        diags.append(&mut sig.diags);
        resolvers.insert(id.clone(), sig.resolver);
        modules.insert(id.clone(), module);
    }

    // phase 3: bodies
    let mut work: Vec<(&ModuleId, &FunDecl)> = Vec::new();
    for (id, (file, pm)) in &sources {
        let skip = mode.skip_bodies_for.contains(file);
        let module = &modules[id];
        for item in &pm.items {
            let ParsedItem::Fun(f) = item else { continue };
            let Some(tf) = module.functions.get(&f.name.name) else {
                continue;
            };
            // a duplicate function keeps only the first declaration
            if tf.sig.decl_loc != f.name.loc || (skip && !f.is_inline) {
                continue;
            }
            work.push((id, f));
        }
    }
    let env = Env {
        local: &modules,
        deps,
    };
    let checked = par::map(&work, |(id, f)| {
        let sig = &modules[*id].functions[&f.name.name].sig;
        let mut bc = BodyChecker {
            env: &env,
            resolver: &resolvers[*id],
            scopes: Vec::new(),
            diags: Vec::new(),
        };
        let body = bc.function_body(f, sig);
        (body, bc.diags)
    });
    let mut bodies: Vec<((&ModuleId, &FunDecl), TypedExpr)> = Vec::with_capacity(work.len());
    for (w, (body, mut d)) in work.into_iter().zip(checked) {
        diags.append(&mut d);
        bodies.push((w, body));
    }
    for ((id, f), body) in &bodies {
        let tf = modules
            .get_mut(*id)
            .unwrap()
            .functions
            .get_mut(&f.name.name)
            .unwrap();
        tf.body = Some(body.clone());
    }

    // phase 4: inline expansion of every checked body
    let env = Env {
        local: &modules,
        deps,
    };
    let expansion_diags = par::map(&bodies, |((id, f), body)| {
        let current = MemberRef {
            module: (*id).clone(),
            name: f.name.name.clone(),
        };
        let seed = f.is_inline.then_some(current);
        match expand_inline_calls(body, &env, seed) {
            Ok(expanded) => expanded.diagnostics,
            Err(InlineError::MissingBody(target)) => vec![Diagnostic::error(
                codes::INTERNAL,
                format!("no body available for inline function `{target}`"),
                body.loc,
            )],
        }
    });
    diags.extend(expansion_diags.into_iter().flatten());

    diags.sort();
    diags.dedup();
    (TypedPackage { modules }, diags)
}

/// Module lookup across a package's own modules and its dependencies.
pub struct Env<'a> {
    pub local: &'a BTreeMap<ModuleId, TypedModule>,
    pub deps: &'a DepInterfaces,
}

impl Env<'_> {
    pub fn module(&self, id: &ModuleId) -> Option<&dyn ModuleDecls> {
        if let Some(m) = self.local.get(id) {
            return Some(m);
        }
        self.deps.get(id).map(|m| m.as_ref() as &dyn ModuleDecls)
    }
}

/// Per-module name resolution state shared by signature and body checking.
struct Resolver {
    module: ModuleId,
    use_table: BTreeMap<String, UseEntry>,
    /// aliases whose `use` failed to resolve; uses of them stay silent
    broken_aliases: BTreeSet<String>,
}

enum ModuleRes {
    Found(ModuleId),
    /// already reported elsewhere
    Silent,
    Missing(Diagnostic),
}

impl Resolver {
    fn resolve_module(
        &self,
        address: Option<&AddressLit>,
        segs: &[Ident],
        exists: impl Fn(&ModuleId) -> bool,
        path_loc: SourceLocation,
    ) -> ModuleRes {
        match (address, segs) {
            (Some(a), [m]) => {
                let id = ModuleId::new(a.value, m.name.clone());
                if exists(&id) {
                    ModuleRes::Found(id)
                } else {
                    ModuleRes::Missing(Diagnostic::error(
                        codes::UNBOUND_MODULE,
                        format!("unbound module `{id}`"),
                        m.loc,
                    ))
                }
            }
            (None, [alias]) => {
                if let Some(u) = self.use_table.get(&alias.name) {
                    ModuleRes::Found(u.target.clone())
                } else if self.broken_aliases.contains(&alias.name) {
                    ModuleRes::Silent
                } else {
                    ModuleRes::Missing(Diagnostic::error(
                        codes::UNBOUND_MODULE,
                        format!("unbound module alias `{}`", alias.name),
                        alias.loc,
                    ))
                }
            }
            _ => ModuleRes::Missing(Diagnostic::error(
                codes::UNBOUND_NAME,
                "invalid path",
                path_loc,
            )),
        }
    }
}

struct SignatureCollector<'a> {
    resolver: Resolver,
    record_names: &'a BTreeMap<ModuleId, BTreeSet<String>>,
    deps: &'a DepInterfaces,
    diags: Vec<Diagnostic>,
}

impl SignatureCollector<'_> {
    fn module_exists(&self, id: &ModuleId) -> bool {
        self.record_names.contains_key(id) || self.deps.contains_key(id)
    }

    fn record_exists(&self, module: &ModuleId, name: &str) -> bool {
        if let Some(names) = self.record_names.get(module) {
            return names.contains(name);
        }
        self.deps
            .get(module)
            .is_some_and(|m| m.records.contains_key(name))
    }

    fn collect(&mut self, file: FileId, pm: &ParsedModule) -> TypedModule {
        let id = self.resolver.module.clone();
        // use declarations first: types may be qualified by aliases
        for item in &pm.items {
            let ParsedItem::Use(u) = item else { continue };
            let alias = u.alias_name().to_string();
            let alias_loc = u.alias.as_ref().unwrap_or(&u.module).loc;
            if self.resolver.use_table.contains_key(&alias)
                || self.resolver.broken_aliases.contains(&alias)
            {
                self.diags.push(Diagnostic::error(
                    codes::DUPLICATE,
                    format!("duplicate alias `{alias}`"),
                    alias_loc,
                ));
                continue;
            }
            let target = ModuleId::new(u.address.value, u.module.name.clone());
            if self.module_exists(&target) {
                self.resolver.use_table.insert(
                    alias,
                    UseEntry {
                        target,
                        decl_loc: u.loc,
                    },
                );
            } else {
                self.diags.push(Diagnostic::error(
                    codes::UNBOUND_MODULE,
                    format!("unbound module `{target}`"),
                    u.module.loc,
                ));
                self.resolver.broken_aliases.insert(alias);
            }
        }

        let mut records = BTreeMap::new();
        let mut functions = BTreeMap::new();
        for item in &pm.items {
            match item {
                ParsedItem::Record(r) => {
                    if records.contains_key(&r.name.name) {
                        self.diags.push(Diagnostic::error(
                            codes::DUPLICATE,
                            format!("duplicate record `{}`", r.name.name),
                            r.name.loc,
                        ));
                        continue;
                    }
                    let mut seen = BTreeSet::new();
                    let mut fields = Vec::new();
                    for f in &r.fields {
                        if !seen.insert(f.name.name.clone()) {
                            self.diags.push(Diagnostic::error(
                                codes::DUPLICATE,
                                format!("duplicate field `{}`", f.name.name),
                                f.name.loc,
                            ));
                            continue;
                        }
                        fields.push(FieldDef {
                            name: f.name.name.clone(),
                            decl_loc: f.name.loc,
                            ty: self.resolve_type(&f.ty),
                        });
                    }
                    records.insert(
                        r.name.name.clone(),
                        RecordDef {
                            name: r.name.name.clone(),
                            decl_loc: r.name.loc,
                            fields,
                        },
                    );
                }
                ParsedItem::Fun(f) => {
                    if functions.contains_key(&f.name.name) {
                        self.diags.push(Diagnostic::error(
                            codes::DUPLICATE,
                            format!("duplicate function `{}`", f.name.name),
                            f.name.loc,
                        ));
                        continue;
                    }
                    let mut seen = BTreeSet::new();
                    let mut params = Vec::new();
                    for p in &f.params {
                        let ty = self.resolve_type(&p.ty);
                        if !seen.insert(p.name.name.clone()) {
                            self.diags.push(Diagnostic::error(
                                codes::DUPLICATE,
                                format!("duplicate parameter `{}`", p.name.name),
                                p.name.loc,
                            ));
                            continue;
                        }
                        params.push(ParamSig {
                            name: p.name.name.clone(),
                            name_loc: p.name.loc,
                            ty,
                        });
                    }
                    let sig = FunctionSignature {
                        name: f.name.name.clone(),
                        visibility: if f.is_public {
                            Visibility::Public
                        } else {
                            Visibility::Private
                        },
                        is_inline: f.is_inline,
                        params,
                        ret: self.resolve_type(&f.ret),
                        decl_loc: f.name.loc,
                    };
                    functions.insert(
                        f.name.name.clone(),
                        TypedFunction {
                            sig,
                            body: None,
                            body_loc: f.body.loc,
                        },
                    );
                }
                ParsedItem::Use(_) | ParsedItem::Error(_) => {}
            }
        }
        TypedModule {
            id,
            file,
            name_loc: pm.name.loc,
            loc: pm.loc,
            records,
            functions,
            use_table: self.resolver.use_table.clone(),
        }
    }

    fn resolve_type(&mut self, ty: &ParsedType) -> TypeUse {
        let path = match ty {
            ParsedType::Named(p) => p,
            ParsedType::Error(loc) => {
                return TypeUse {
                    ty: TypeRepr::Error,
                    loc: *loc,
                    name_loc: *loc,
                    module: None,
                }
            }
        };
        let name = path.member();
        let mut out = TypeUse {
            ty: TypeRepr::Error,
            loc: path.loc,
            name_loc: name.loc,
            module: None,
        };
        let n = path.segments.len();
        if path.address.is_none() && n == 1 {
            out.ty = match name.name.as_str() {
                "u64" => TypeRepr::U64,
                "bool" => TypeRepr::Bool,
                "address" => TypeRepr::Address,
                _ if self.record_exists(&self.resolver.module, &name.name) => {
                    TypeRepr::Record(MemberRef {
                        module: self.resolver.module.clone(),
                        name: name.name.clone(),
                    })
                }
                _ => {
                    self.diags.push(Diagnostic::error(
                        codes::UNBOUND_TYPE,
                        format!("unbound type `{}`", name.name),
                        name.loc,
                    ));
                    TypeRepr::Error
                }
            };
            return out;
        }
        let module_segs = &path.segments[..n - 1];
        let res = self.resolver.resolve_module(
            path.address.as_ref(),
            module_segs,
            |id| self.module_exists(id),
            path.loc,
        );
        match res {
            ModuleRes::Found(m) => {
                out.module = Some((module_segs.last().unwrap().loc, m.clone()));
                if self.record_exists(&m, &name.name) {
                    out.ty = TypeRepr::Record(MemberRef {
                        module: m,
                        name: name.name.clone(),
                    });
                } else {
                    self.diags.push(Diagnostic::error(
                        codes::UNBOUND_TYPE,
                        format!("unbound type `{}` in module `{m}`", name.name),
                        name.loc,
                    ));
                }
            }
            ModuleRes::Silent => {}
            ModuleRes::Missing(d) => self.diags.push(d),
        }
        out
    }
}

struct BodyChecker<'a> {
    env: &'a Env<'a>,
    resolver: &'a Resolver,
    scopes: Vec<Vec<(String, SourceLocation, TypeRepr)>>,
    diags: Vec<Diagnostic>,
}

fn typed(kind: TExprKind, ty: TypeRepr, loc: SourceLocation) -> TypedExpr {
    TypedExpr { kind, ty, loc }
}

impl BodyChecker<'_> {
    fn mismatch(&mut self, expected: &TypeRepr, found: &TypeRepr, loc: SourceLocation) {
        self.diags.push(Diagnostic::error(
            codes::TYPE_MISMATCH,
            format!("type mismatch: expected `{expected}`, found `{found}`"),
            loc,
        ));
    }

    fn lookup_local(&self, name: &str) -> Option<(SourceLocation, TypeRepr)> {
        self.scopes
            .iter()
            .rev()
            .flat_map(|s| s.iter().rev())
            .find(|(n, _, _)| n == name)
            .map(|(_, loc, ty)| (*loc, ty.clone()))
    }

    fn function_body(&mut self, f: &FunDecl, sig: &FunctionSignature) -> TypedExpr {
        self.scopes.push(
            sig.params
                .iter()
                .map(|p| (p.name.clone(), p.name_loc, p.ty.ty.clone()))
                .collect(),
        );
        let body = self.expr(&f.body);
        self.scopes.pop();
        let has_value = match &body.kind {
            TExprKind::Block(b) => b.tail.is_some(),
            _ => true,
        };
        if !has_value {
            self.diags.push(Diagnostic::error(
                codes::TYPE_MISMATCH,
                format!(
                    "function `{}` must end with an expression of type `{}`",
                    sig.name, sig.ret.ty
                ),
                SourceLocation::new(
                    f.body.loc.file,
                    f.body.loc.end.saturating_sub(1).max(f.body.loc.start),
                    f.body.loc.end,
                ),
            ));
        } else if !body.ty.is_error() && !sig.ret.ty.is_error() && body.ty != sig.ret.ty {
            let loc = match &body.kind {
                TExprKind::Block(b) => b.tail.as_ref().map(|t| t.loc).unwrap_or(body.loc),
                _ => body.loc,
            };
            self.mismatch(&sig.ret.ty, &body.ty, loc);
        }
        body
    }

    fn block(&mut self, b: &Block, loc: SourceLocation) -> TypedExpr {
        self.scopes.push(Vec::new());
        let stmts: Vec<TypedExpr> = b.stmts.iter().map(|s| self.expr(s)).collect();
        let tail = b.tail.as_ref().map(|t| Box::new(self.expr(t)));
        self.scopes.pop();
        let ty = tail
            .as_ref()
            .map(|t| t.ty.clone())
            .unwrap_or(TypeRepr::Error);
        typed(TExprKind::Block(TypedBlock { stmts, tail }), ty, loc)
    }

    fn expr(&mut self, e: &ParsedExpr) -> TypedExpr {
        let loc = e.loc;
        match &e.kind {
            ExprKind::IntLit(Some(v)) => typed(TExprKind::Int(*v), TypeRepr::U64, loc),
            ExprKind::IntLit(None) => typed(TExprKind::Error(vec![]), TypeRepr::Error, loc),
            ExprKind::BoolLit(b) => typed(TExprKind::Bool(*b), TypeRepr::Bool, loc),
            ExprKind::AddressLit(a) => typed(TExprKind::Address(*a), TypeRepr::Address, loc),
            ExprKind::Var(id) => match self.lookup_local(&id.name) {
                Some((def_loc, ty)) => typed(
                    TExprKind::Local {
                        name: id.name.clone(),
                        def_loc,
                    },
                    ty,
                    loc,
                ),
                None => {
                    self.diags.push(Diagnostic::error(
                        codes::UNBOUND_NAME,
                        format!("unbound variable `{}`", id.name),
                        id.loc,
                    ));
                    typed(TExprKind::Error(vec![]), TypeRepr::Error, loc)
                }
            },
            ExprKind::FieldAccess { receiver, field } => {
                let recv = self.expr(receiver);
                let (ty, record) = self.field_type(&recv.ty, field);
                typed(
                    TExprKind::Field {
                        receiver: Box::new(recv),
                        field: field.name.clone(),
                        field_loc: field.loc,
                        record,
                    },
                    ty,
                    loc,
                )
            }
            ExprKind::IncompleteFieldAccess { receiver } => {
                let recv = self.expr(receiver);
                typed(
                    TExprKind::IncompleteField {
                        receiver: Box::new(recv),
                    },
                    TypeRepr::Error,
                    loc,
                )
            }
            ExprKind::Call { func, args } => {
                let args: Vec<TypedExpr> = args.iter().map(|a| self.expr(a)).collect();
                let module = self.resolver.module.clone();
                self.call(module, None, func, args, loc)
            }
            ExprKind::PathCall { path, args } => {
                let args: Vec<TypedExpr> = args.iter().map(|a| self.expr(a)).collect();
                self.path_call(path, args, loc)
            }
            ExprKind::IncompletePath { .. } => {
                typed(TExprKind::Error(vec![]), TypeRepr::Error, loc)
            }
            ExprKind::Let { name, init } => {
                let init = self.expr(init);
                let ty = init.ty.clone();
                if let Some(scope) = self.scopes.last_mut() {
                    scope.push((name.name.clone(), name.loc, ty.clone()));
                }
                typed(
                    TExprKind::Let {
                        name: name.name.clone(),
                        name_loc: name.loc,
                        init: Box::new(init),
                    },
                    ty,
                    loc,
                )
            }
            ExprKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let c = self.expr(cond);
                if !c.ty.is_error() && c.ty != TypeRepr::Bool {
                    self.mismatch(&TypeRepr::Bool, &c.ty, c.loc);
                }
                let t = self.expr(then_branch);
                let el = self.expr(else_branch);
                let ty = if t.ty.is_error() || el.ty.is_error() {
                    TypeRepr::Error
                } else if t.ty != el.ty {
                    self.mismatch(&t.ty, &el.ty, el.loc);
                    TypeRepr::Error
                } else {
                    t.ty.clone()
                };
                typed(
                    TExprKind::If {
                        cond: Box::new(c),
                        then_branch: Box::new(t),
                        else_branch: Box::new(el),
                    },
                    ty,
                    loc,
                )
            }
            ExprKind::Block(b) => self.block(b, loc),
            ExprKind::BinOp { op, lhs, rhs } => {
                let l = self.expr(lhs);
                let r = self.expr(rhs);
                let ty = self.binop_type(*op, &l, &r);
                typed(
                    TExprKind::BinOp {
                        op: *op,
                        lhs: Box::new(l),
                        rhs: Box::new(r),
                    },
                    ty,
                    loc,
                )
            }
            ExprKind::Error(children) => {
                let children = children.iter().map(|c| self.expr(c)).collect();
                typed(TExprKind::Error(children), TypeRepr::Error, loc)
            }
        }
    }

    fn binop_type(&mut self, op: BinOp, l: &TypedExpr, r: &TypedExpr) -> TypeRepr {
        if l.ty.is_error() || r.ty.is_error() {
            return TypeRepr::Error;
        }
        let (operand, result) = match op {
            BinOp::Add | BinOp::Sub | BinOp::Mul => (Some(TypeRepr::U64), TypeRepr::U64),
            BinOp::Lt => (Some(TypeRepr::U64), TypeRepr::Bool),
            BinOp::And | BinOp::Or => (Some(TypeRepr::Bool), TypeRepr::Bool),
            BinOp::Eq => (None, TypeRepr::Bool),
        };
        match operand {
            Some(expected) => {
                if l.ty != expected {
                    self.mismatch(&expected, &l.ty, l.loc);
                    TypeRepr::Error
                } else if r.ty != expected {
                    self.mismatch(&expected, &r.ty, r.loc);
                    TypeRepr::Error
                } else {
                    result
                }
            }
            None => {
                if l.ty != r.ty {
                    self.mismatch(&l.ty, &r.ty, r.loc);
                    TypeRepr::Error
                } else {
                    result
                }
            }
        }
    }

    fn field_type(&mut self, recv: &TypeRepr, field: &Ident) -> (TypeRepr, Option<MemberRef>) {
        let record_ref = match recv {
            TypeRepr::Error => return (TypeRepr::Error, None),
            TypeRepr::Record(r) => r,
            other => {
                self.diags.push(Diagnostic::error(
                    codes::NO_FIELD,
                    format!("type `{other}` has no fields"),
                    field.loc,
                ));
                return (TypeRepr::Error, None);
            }
        };
        let Some(def) = self
            .env
            .module(&record_ref.module)
            .and_then(|m| m.record(&record_ref.name))
        else {
            return (TypeRepr::Error, None);
        };
        let Some(fd) = def.field(&field.name) else {
            self.diags.push(Diagnostic::error(
                codes::NO_FIELD,
                format!("record `{}` has no field `{}`", def.name, field.name),
                field.loc,
            ));
            return (TypeRepr::Error, None);
        };
        if record_ref.module != self.resolver.module {
            self.diags.push(Diagnostic::error(
                codes::FIELD_ACCESS,
                format!(
                    "field `{}` of `{}` is only accessible inside module `{}`",
                    field.name, def.name, record_ref.module
                ),
                field.loc,
            ));
        }
        (fd.ty.ty.clone(), Some(record_ref.clone()))
    }

    fn path_call(
        &mut self,
        path: &PathName,
        args: Vec<TypedExpr>,
        loc: SourceLocation,
    ) -> TypedExpr {
        let n = path.segments.len();
        let module_segs = &path.segments[..n.saturating_sub(1)];
        let res = self.resolver.resolve_module(
            path.address.as_ref(),
            module_segs,
            |id| self.env.module(id).is_some(),
            path.loc,
        );
        match res {
            ModuleRes::Found(m) => {
                let seg_loc = module_segs.last().map(|s| s.loc);
                self.call(m, seg_loc, path.member(), args, loc)
            }
            ModuleRes::Silent => typed(TExprKind::Error(args), TypeRepr::Error, loc),
            ModuleRes::Missing(d) => {
                self.diags.push(d);
                typed(TExprKind::Error(args), TypeRepr::Error, loc)
            }
        }
    }

    fn call(
        &mut self,
        module: ModuleId,
        module_seg: Option<SourceLocation>,
        func: &Ident,
        args: Vec<TypedExpr>,
        loc: SourceLocation,
    ) -> TypedExpr {
        let Some(sig) = self
            .env
            .module(&module)
            .and_then(|m| m.function(&func.name))
        else {
            self.diags.push(Diagnostic::error(
                codes::UNBOUND_FUNCTION,
                format!("unbound function `{}` in module `{module}`", func.name),
                func.loc,
            ));
            return typed(TExprKind::Error(args), TypeRepr::Error, loc);
        };
        if module != self.resolver.module && !sig.is_public() {
            self.diags.push(Diagnostic::error(
                codes::VISIBILITY,
                format!("function `{module}::{}` is not public", func.name),
                func.loc,
            ));
        }
        if sig.params.len() != args.len() {
            self.diags.push(Diagnostic::error(
                codes::ARITY,
                format!(
                    "function `{}` expects {} argument(s), got {}",
                    func.name,
                    sig.params.len(),
                    args.len()
                ),
                func.loc,
            ));
        } else {
            for (p, a) in sig.params.iter().zip(&args) {
                if !a.ty.is_error() && !p.ty.ty.is_error() && a.ty != p.ty.ty {
                    self.mismatch(&p.ty.ty, &a.ty, a.loc);
                }
            }
        }
        let ret = sig.ret.ty.clone();
        let inline = sig.is_inline;
        typed(
            TExprKind::Call {
                target: MemberRef {
                    module: module.clone(),
                    name: func.name.clone(),
                },
                inline,
                name_loc: func.loc,
                module: module_seg.map(|l| (l, module)),
                args,
            },
            ret,
            loc,
        )
    }
}
