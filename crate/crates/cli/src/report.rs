use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

use crate::config::{Format, RunConfig};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub config_hash: String,
    pub config: RunConfig,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub data: Value,
}

impl Report {
    pub fn new(config: &RunConfig) -> Self {
        Report {
            command: config.command.clone(),
            config_hash: config.hash(),
            config: config.clone(),
            passed: true,
            checks: Vec::new(),
            data: Value::Object(Default::default()),
        }
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.passed &= passed;
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("report data serializes");
        self.data.as_object_mut().expect("data is an object").insert(key.into(), v);
    }

    /// Folds a sub-report in, prefixing its check names.
    pub fn absorb(&mut self, sub: Report) {
        for c in sub.checks {
            self.check(format!("{}: {}", sub.command, c.name), c.passed, c.detail);
        }
        self.set(&sub.command, sub.data);
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{} (config {})", self.command, &self.config_hash[..16]).unwrap();
        for c in &self.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            writeln!(s, "  {mark} {}: {}", c.name, c.detail).unwrap();
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        writeln!(s, "{} checks, {failed} failed", self.checks.len()).unwrap();
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Text => self.to_text(),
        }
    }
}

pub fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_artifact(dir, name, &s)
}
