//! Report envelope shared by every subcommand.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{json, Map, Value};

use ballchain_core::criteria::CriterionReport;

use crate::formats::{num, vector_json};

/// Name of the only field allowed to differ between runs with equal inputs.
pub const WALL_TIME_KEY: &str = "wall_time";

#[derive(Debug, Clone)]
pub struct Envelope {
    pub command: &'static str,
    pub config: Value,
    pub seed: u64,
    pub passed: bool,
    pub result: Value,
}

impl Envelope {
    pub fn to_json(&self, wall_time: f64) -> Value {
        json!({
            "version": crate::VERSION,
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "status": if self.passed { "pass" } else { "fail" },
            "result": self.result,
            WALL_TIME_KEY: wall_time,
        })
    }

    pub fn write(&self, path: &Path, wall_time: f64) -> Result<()> {
        let mut text = serde_json::to_string_pretty(&self.to_json(wall_time))?;
        text.push('\n');
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }
}

/// Removes every `wall_time` entry, recursively.
pub fn strip_wall_time(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.remove(WALL_TIME_KEY);
            m.values_mut().for_each(strip_wall_time);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_wall_time),
        _ => {}
    }
}

pub fn criterion_report_json(r: &CriterionReport) -> Value {
    let mut details = Map::new();
    for (k, v) in &r.details {
        details.insert((*k).to_string(), num(*v));
    }
    json!({
        "criterion": r.criterion.as_str(),
        "verdict": r.verdict.as_str(),
        "min_margin": num(r.min_margin),
        "sample_count": r.sample_count,
        "witness": r.witness.as_ref().map(|w| json!({
            "z": vector_json(&w.z),
            "v": w.v.as_ref().map(|v| vector_json(v)),
        })),
        "reason": r.reason,
        "details": details,
    })
}

/// Two-column plain-text table.
pub fn table(rows: &[(String, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in rows {
        let _ = writeln!(out, "{k:<width$}  {v}");
    }
    out
}
