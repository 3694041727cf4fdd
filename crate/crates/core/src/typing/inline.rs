// SPDX-License-Identifier: Apache-2.0

use super::{check::Env, types::*};
use crate::{
    diagnostics::{codes, Diagnostic},
    text::SourceLocation,
};
use std::collections::HashMap;

/// Maximum nesting of inline expansions.
pub const MAX_INLINE_DEPTH: usize = 32;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InlineError {
    /// A called inline function has no typed body available.
    MissingBody(MemberRef),
}

impl std::fmt::Display for InlineError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InlineError::MissingBody(m) => write!(f, "no body for inline function `{m}`"),
        }
    }
}

impl std::error::Error for InlineError {}

#[derive(Clone, Debug)]
pub struct Expanded {
    pub expr: TypedExpr,
    pub diagnostics: Vec<Diagnostic>,
}

/// Replaces every call to an inline function in `body` with the callee's
/// body, parameters substituted by the call's arguments.
///
/// Expanded callee nodes take the location of the outermost call site;
/// arguments keep their own. Recursive inline calls and chains deeper than
/// [`MAX_INLINE_DEPTH`] are reported at the outermost call site and left
/// unexpanded. `current` is the function owning `body` when it is itself
/// inline, so direct self-recursion is caught.
pub fn expand_inline_calls(
    body: &TypedExpr,
    env: &Env<'_>,
    current: Option<MemberRef>,
) -> Result<Expanded, InlineError> {
    let mut ex = Expander {
        env,
        diagnostics: Vec::new(),
    };
    let mut stack: Vec<MemberRef> = current.into_iter().collect();
    let expr = ex.expand(body, &mut stack, 0, None)?;
    Ok(Expanded {
        expr,
        diagnostics: ex.diagnostics,
    })
}

struct Expander<'a> {
    env: &'a Env<'a>,
    diagnostics: Vec<Diagnostic>,
}

impl Expander<'_> {
    fn expand(
        &mut self,
        e: &TypedExpr,
        stack: &mut Vec<MemberRef>,
        depth: usize,
        outer: Option<SourceLocation>,
    ) -> Result<TypedExpr, InlineError> {
        let TExprKind::Call {
            target,
            inline: true,
            args,
            ..
        } = &e.kind
        else {
            return self.expand_children(e, stack, depth, outer);
        };
        let site = outer.unwrap_or(e.loc);
        let args = args
            .iter()
            .map(|a| self.expand(a, stack, depth, outer))
            .collect::<Result<Vec<_>, _>>()?;
        let keep_call = |args: Vec<TypedExpr>| {
            let mut call = e.clone();
            if let TExprKind::Call { args: a, .. } = &mut call.kind {
                *a = args;
            }
            call
        };
        if stack.contains(target) {
            self.diagnostics.push(Diagnostic::error(
                codes::INLINE_RECURSION,
                format!("recursive inline call to `{target}`"),
                site,
            ));
            return Ok(keep_call(args));
        }
        if depth >= MAX_INLINE_DEPTH {
            self.diagnostics.push(Diagnostic::error(
                codes::INLINE_DEPTH,
                format!("inline expansion exceeds depth {MAX_INLINE_DEPTH}"),
                site,
            ));
            return Ok(keep_call(args));
        }
        let module = self.env.module(&target.module);
        let sig = module.and_then(|m| m.function(&target.name));
        let body = module.and_then(|m| m.inline_body(&target.name));
        let (Some(sig), Some(body)) = (sig, body) else {
            return Err(InlineError::MissingBody(target.clone()));
        };
        stack.push(target.clone());
        let expanded = self.expand(body, stack, depth + 1, Some(site));
        stack.pop();
        let expanded = expanded?;
        let subst: HashMap<SourceLocation, &TypedExpr> =
            sig.params.iter().map(|p| p.name_loc).zip(&args).collect();
        let mut out = substitute(&expanded, &subst, e.loc);
        out.ty = e.ty.clone();
        Ok(out)
    }

    fn expand_children(
        &mut self,
        e: &TypedExpr,
        stack: &mut Vec<MemberRef>,
        depth: usize,
        outer: Option<SourceLocation>,
    ) -> Result<TypedExpr, InlineError> {
        let mut out = e.clone();
        let mut err = None;
        map_children(&mut out, &mut |c| {
            if err.is_some() {
                return;
            }
            match self.expand(c, stack, depth, outer) {
                Ok(x) => *c = x,
                Err(e) => err = Some(e),
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(out),
        }
    }
}

/// Copies `e` with parameter uses replaced and every copied node moved to `site`.
fn substitute(
    e: &TypedExpr,
    subst: &HashMap<SourceLocation, &TypedExpr>,
    site: SourceLocation,
) -> TypedExpr {
    if let TExprKind::Local { def_loc, .. } = &e.kind {
        if let Some(arg) = subst.get(def_loc) {
            return (*arg).clone();
        }
    }
    let mut out = e.clone();
    out.loc = site;
    map_children(&mut out, &mut |c| *c = substitute(c, subst, site));
    out
}

fn map_children(e: &mut TypedExpr, f: &mut impl FnMut(&mut TypedExpr)) {
    match &mut e.kind {
        TExprKind::Int(_)
        | TExprKind::Bool(_)
        | TExprKind::Address(_)
        | TExprKind::Local { .. } => {}
        TExprKind::Field { receiver, .. } | TExprKind::IncompleteField { receiver } => f(receiver),
        TExprKind::Call { args, .. } => args.iter_mut().for_each(f),
        TExprKind::Let { init, .. } => f(init),
        TExprKind::If {
            cond,
            then_branch,
            else_branch,
        } => {
            f(cond);
            f(then_branch);
            f(else_branch);
        }
        TExprKind::Block(b) => {
            b.stmts.iter_mut().for_each(&mut *f);
            if let Some(t) = &mut b.tail {
                f(t);
            }
        }
        TExprKind::BinOp { lhs, rhs, .. } => {
            f(lhs);
            f(rhs);
        }
        TExprKind::Error(children) => children.iter_mut().for_each(f),
    }
}
