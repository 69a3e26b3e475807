//! Machine-readable run summary written next to the CSV outputs.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::config::Location;
use crate::model::{SecondOrderChar, SharingIndices};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Warning {
    pub location: Location,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Derived {
    pub omega0: f64,
    pub xi: f64,
    pub omega_c: f64,
    pub k1: f64,
    pub k2: f64,
}

impl Derived {
    pub fn new(ch: &SecondOrderChar, idx: &SharingIndices) -> Self {
        Self {
            omega0: ch.omega0,
            xi: ch.xi,
            omega_c: ch.omega_c,
            k1: idx.k1,
            k2: idx.k2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub subcommand: String,
    /// Resolved inputs, grouped by config section.
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub derived: Option<Derived>,
    /// Subcommand-specific results.
    pub results: BTreeMap<String, serde_json::Value>,
    pub warnings: Vec<Warning>,
    /// Files written, relative to the output directory.
    pub files: Vec<String>,
}

impl RunReport {
    pub fn new(subcommand: &str) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            parameters: BTreeMap::new(),
            derived: None,
            results: BTreeMap::new(),
            warnings: Vec::new(),
            files: Vec::new(),
        }
    }

    pub fn param(&mut self, section: &str, value: impl Serialize) {
        self.parameters.insert(section.to_string(), to_value(value));
    }

    pub fn result(&mut self, name: &str, value: impl Serialize) {
        self.results.insert(name.to_string(), to_value(value));
    }

    pub fn warn(&mut self, location: Location, message: impl Into<String>) {
        self.warnings.push(Warning {
            location,
            message: message.into(),
        });
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is plain data") + "\n"
    }

    /// Short human-readable summary for stdout.
    pub fn summary(&self) -> String {
        let mut out = format!("hhess {}\n", self.subcommand);
        if let Some(d) = &self.derived {
            out.push_str(&format!(
                "  omega0 = {:.6} rad/s, xi = {:.6}, k1 = {:.6}, k2 = {:.6}\n",
                d.omega0, d.xi, d.k1, d.k2
            ));
        }
        for (name, value) in &self.results {
            if let Some(line) = scalar_line(value) {
                out.push_str(&format!("  {name}: {line}\n"));
            }
        }
        for w in &self.warnings {
            out.push_str(&format!("  warning ({}): {}\n", w.location, w.message));
        }
        for f in &self.files {
            out.push_str(&format!("  wrote {f}\n"));
        }
        out
    }
}

fn to_value(value: impl Serialize) -> serde_json::Value {
    serde_json::to_value(value).expect("report values serialize")
}

/// One-line rendering of flat objects; nested results stay in the JSON.
fn scalar_line(value: &serde_json::Value) -> Option<String> {
    match value {
        serde_json::Value::Object(map) if map.len() <= 12 => {
            let parts: Option<Vec<String>> = map
                .iter()
                .map(|(k, v)| match v {
                    serde_json::Value::Number(n) => Some(format!("{k}={n}")),
                    serde_json::Value::Bool(b) => Some(format!("{k}={b}")),
                    serde_json::Value::String(s) => Some(format!("{k}={s}")),
                    serde_json::Value::Null => Some(format!("{k}=none")),
                    _ => None,
                })
                .collect();
            parts.map(|p| p.join(", "))
        }
        serde_json::Value::Number(n) => Some(n.to_string()),
        serde_json::Value::String(s) => Some(s.clone()),
        _ => None,
    }
}
