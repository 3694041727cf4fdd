// SPDX-License-Identifier: Apache-2.0

use super::types::*;
use crate::text::{FileId, SourceLocation};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// What dependents compile against: record definitions, every function
/// signature, bodies of inline functions, and use-declaration locations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleInterface {
    pub id: ModuleId,
    pub file: FileId,
    pub name_loc: SourceLocation,
    pub records: BTreeMap<String, RecordDef>,
    pub functions: BTreeMap<String, FunctionSignature>,
    pub inline_bodies: BTreeMap<String, TypedExpr>,
    pub use_locs: BTreeMap<String, SourceLocation>,
}

pub fn interface_of(m: &TypedModule) -> ModuleInterface {
    ModuleInterface {
        id: m.id.clone(),
        file: m.file,
        name_loc: m.name_loc,
        records: m.records.clone(),
        functions: m
            .functions
            .iter()
            .map(|(n, f)| (n.clone(), f.sig.clone()))
            .collect(),
        inline_bodies: m
            .functions
            .iter()
            .filter(|(_, f)| f.sig.is_inline)
            .filter_map(|(n, f)| Some((n.clone(), f.body.clone()?)))
            .collect(),
        use_locs: m
            .use_table
            .iter()
            .map(|(alias, u)| (alias.clone(), u.decl_loc))
            .collect(),
    }
}

/// Read access to a module's declarations, whether it is being checked
/// or only available through its interface.
pub trait ModuleDecls {
    fn id(&self) -> &ModuleId;
    fn file(&self) -> FileId;
    fn name_loc(&self) -> SourceLocation;
    fn record(&self, name: &str) -> Option<&RecordDef>;
    fn function(&self, name: &str) -> Option<&FunctionSignature>;
    fn inline_body(&self, name: &str) -> Option<&TypedExpr>;
}

impl ModuleDecls for ModuleInterface {
    fn id(&self) -> &ModuleId {
        &self.id
    }
    fn file(&self) -> FileId {
        self.file
    }
    fn name_loc(&self) -> SourceLocation {
        self.name_loc
    }
    fn record(&self, name: &str) -> Option<&RecordDef> {
        self.records.get(name)
    }
    fn function(&self, name: &str) -> Option<&FunctionSignature> {
        self.functions.get(name)
    }
    fn inline_body(&self, name: &str) -> Option<&TypedExpr> {
        self.inline_bodies.get(name)
    }
}

impl ModuleDecls for TypedModule {
    fn id(&self) -> &ModuleId {
        &self.id
    }
    fn file(&self) -> FileId {
        self.file
    }
    fn name_loc(&self) -> SourceLocation {
        self.name_loc
    }
    fn record(&self, name: &str) -> Option<&RecordDef> {
        self.records.get(name)
    }
    fn function(&self, name: &str) -> Option<&FunctionSignature> {
        self.functions.get(name).map(|f| &f.sig)
    }
    fn inline_body(&self, name: &str) -> Option<&TypedExpr> {
        self.functions
            .get(name)
            .filter(|f| f.sig.is_inline)
            .and_then(|f| f.body.as_ref())
    }
}
