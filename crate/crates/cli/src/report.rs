use std::collections::BTreeMap;

use serde::Serialize;

/// Version string of the form `<crate version>-g<commit>` (commit `unknown`
/// outside a git checkout).
pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "-g", env!("MSDENOISE_GIT_REV"));

/// Envelope shared by every JSON report.
#[derive(Debug, Serialize)]
pub struct Report<C, R> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: C,
    pub result: R,
    pub checks: BTreeMap<String, bool>,
}

impl<C: Serialize, R: Serialize> Report<C, R> {
    pub fn new(command: &'static str, config: C, result: R) -> Self {
        Self {
            tool: "msdenoise",
            version: VERSION,
            command,
            config,
            result,
            checks: BTreeMap::new(),
        }
    }

    pub fn check(mut self, name: &str, pass: bool) -> Self {
        self.checks.insert(name.to_string(), pass);
        self
    }

    pub fn passed(&self) -> bool {
        self.checks.values().all(|&v| v)
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}
