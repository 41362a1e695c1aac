//! Key-value run summaries, written as plain text and JSON side by side.

use serde_json::Value;
use std::path::Path;
use trade_sampler::Result;

/// Ordered key-value pairs describing one run. The text rendering keeps
/// insertion order; the JSON rendering sorts keys.
#[derive(Default)]
pub struct Summary {
    entries: Vec<(String, Value)>,
}

impl Summary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: &str, value: impl Into<Value>) {
        self.entries.push((key.to_string(), value.into()));
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        for (key, value) in &self.entries {
            let rendered = match value {
                Value::String(s) => s.clone(),
                Value::Null => String::new(),
                other => other.to_string(),
            };
            out.push_str(key);
            out.push_str(": ");
            out.push_str(&rendered);
            out.push('\n');
        }
        out
    }

    pub fn json(&self) -> String {
        let map: serde_json::Map<String, Value> = self.entries.iter().cloned().collect();
        let mut out = serde_json::to_string_pretty(&map).expect("summary serializes");
        out.push('\n');
        out
    }

    /// Write `summary.txt` and `summary.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::write(dir.join("summary.txt"), self.text())?;
        std::fs::write(dir.join("summary.json"), self.json())?;
        Ok(())
    }
}

/// Quote a field for a comma-separated file.
pub fn csv_quote(field: &str) -> String {
    format!("\"{}\"", field.replace('"', "\"\""))
}
