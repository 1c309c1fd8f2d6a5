//! JSON reports. Field order is fixed by the struct definitions and every
//! expression is printed in canonical order, so equal runs give equal bytes.

use lagrep::pipeline::Check;
use serde::Serialize;
use serde_json::{Map, Value};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub pass: bool,
    pub stages: Vec<Check>,
    pub artifacts: Map<String, Value>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report { schema_version: SCHEMA_VERSION, command: command.into(), pass: true, stages: Vec::new(), artifacts: Map::new() }
    }

    pub fn push(&mut self, check: Check) {
        self.pass &= check.pass;
        self.stages.push(check);
    }

    pub fn extend(&mut self, checks: impl IntoIterator<Item = Check>) {
        for c in checks {
            self.push(c);
        }
    }

    pub fn artifact(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("artifacts serialize");
        self.artifacts.insert(key.into(), v);
    }

    pub fn summary(&self) -> String {
        let mut out = format!("{}: {}\n", self.command, if self.pass { "pass" } else { "FAIL" });
        for s in &self.stages {
            out.push_str(&format!("  [{}] {}", if s.pass { "ok" } else { "FAIL" }, s.name));
            if let Some(r) = &s.residual {
                let short: String = r.chars().take(300).collect();
                out.push_str(&format!(": {short}"));
                if r.chars().count() > 300 {
                    out.push_str("...");
                }
            }
            out.push('\n');
        }
        out
    }
}
