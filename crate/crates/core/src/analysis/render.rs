// SPDX-License-Identifier: Apache-2.0

use super::{DefInfo, DefKind};
use crate::typing::{FunctionSignature, TypeRepr};

pub(crate) fn type_text(ty: &TypeRepr) -> String {
    ty.to_string()
}

/// `[public ][inline ]fun name(p: T, ...): R`
pub fn render_signature(sig: &FunctionSignature) -> String {
    let mut s = String::new();
    if sig.is_public() {
        s.push_str("public ");
    }
    if sig.is_inline {
        s.push_str("inline ");
    }
    s.push_str("fun ");
    s.push_str(&sig.name);
    s.push('(');
    for (i, p) in sig.params.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        s.push_str(&p.name);
        s.push_str(": ");
        s.push_str(&type_text(&p.ty.ty));
    }
    s.push_str("): ");
    s.push_str(&type_text(&sig.ret.ty));
    s
}

/// Hover text: `name: T` for variables, parameters and fields; the
/// signature for functions; `record Name` and `module 0x1::m` otherwise.
pub fn render_hover(def: &DefInfo) -> String {
    match def.kind {
        DefKind::Variable | DefKind::Parameter | DefKind::Field => {
            format!("{}: {}", def.name, def.type_text)
        }
        DefKind::Function | DefKind::Record | DefKind::Module => def.type_text.clone(),
    }
}
