// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Optimization switches, read from `initializationOptions`. All default on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct Toggles {
    /// reuse compiled dependencies across runs
    pub pre_compiled_deps: bool,
    /// recompile and re-symbolicate only what changed
    pub incremental: bool,
    /// keep only interfaces and declaration locations of dependencies
    pub lean_deps: bool,
    /// one dependency cache for every open package
    pub cross_package_cache: bool,
}

impl Default for Toggles {
    fn default() -> Self {
        Self {
            pre_compiled_deps: true,
            incremental: true,
            lean_deps: true,
            cross_package_cache: true,
        }
    }
}

impl Toggles {
    pub fn all_off() -> Self {
        Self {
            pre_compiled_deps: false,
            incremental: false,
            lean_deps: false,
            cross_package_cache: false,
        }
    }
}

pub const DEFAULT_DEBOUNCE_MS: u64 = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct ServerConfig {
    #[serde(flatten)]
    pub toggles: Toggles,
    pub debounce_ms: u64,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            toggles: Toggles::default(),
            debounce_ms: DEFAULT_DEBOUNCE_MS,
        }
    }
}

impl ServerConfig {
    /// Applies the options a client sent; absent keys keep their defaults.
    /// Malformed options are ignored.
    pub fn from_init_options(options: Option<&Value>) -> Self {
        options
            .and_then(|v| serde_json::from_value(v.clone()).ok())
            .unwrap_or_default()
    }
}
