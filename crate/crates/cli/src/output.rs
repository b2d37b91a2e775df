//! Output envelope: header (tool version, canonical config, its SHA-256, residual summary)
//! followed by the data, as CSV with `#` header lines or as one JSON document.

use std::collections::BTreeMap;
use std::io::Write;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::Cli;

pub const SCHEMA: &str = include_str!("../../../docs/output-schema.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

pub enum Body {
    Table { columns: Vec<&'static str>, rows: Vec<Vec<f64>> },
    /// Structured report; always written as JSON.
    Json(Value),
    /// Plain text for CSV mode, with a JSON equivalent for JSON mode.
    Text { text: String, json: Value },
}

pub struct Outcome {
    pub residuals: BTreeMap<String, f64>,
    pub body: Body,
    /// A check exceeded its threshold; the output is still written.
    pub failed: bool,
}

impl Outcome {
    pub fn new(body: Body) -> Self {
        Outcome { residuals: BTreeMap::new(), body, failed: false }
    }

    pub fn residual(mut self, name: &str, value: f64) -> Self {
        self.residuals.insert(name.into(), value);
        self
    }
}

/// Canonical config: sorted keys, no whitespace, output path left out.
pub fn canonical_config(cli: &Cli) -> String {
    let v = json!({
        "command": &cli.command,
        "format": cli.global.format,
        "precision_bits": cli.global.precision_bits,
    });
    // serde_json::Map is a BTreeMap, so keys come out sorted at every level
    serde_json::to_string(&v).expect("config serializes")
}

pub fn config_hash(canonical: &str) -> String {
    format!("{:x}", Sha256::digest(canonical.as_bytes()))
}

fn fmt(v: f64) -> String {
    format!("{v:e}")
}

pub fn render(cli: &Cli, outcome: &Outcome) -> String {
    let config = canonical_config(cli);
    let hash = config_hash(&config);
    let version = env!("CARGO_PKG_VERSION");
    let residuals = serde_json::to_string(&outcome.residuals).expect("residuals serialize");
    let comment_header = || {
        format!("# multicritical {version}\n# config: {config}\n# config-sha256: {hash}\n# residuals: {residuals}\n")
    };
    let envelope = |data: Value| {
        let doc = json!({
            "tool": "multicritical",
            "version": version,
            "config": serde_json::from_str::<Value>(&config).expect("round trip"),
            "config_sha256": hash,
            "residuals": &outcome.residuals,
            "data": data,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("json");
        s.push('\n');
        s
    };
    match (&outcome.body, cli.global.format) {
        (Body::Table { columns, rows }, Format::Csv) => {
            let mut s = comment_header();
            s.push_str(&columns.join(","));
            s.push('\n');
            for row in rows {
                s.push_str(&row.iter().map(|v| fmt(*v)).collect::<Vec<_>>().join(","));
                s.push('\n');
            }
            s
        }
        (Body::Table { columns, rows }, Format::Json) => envelope(json!({ "columns": columns, "rows": rows })),
        (Body::Text { text, .. }, Format::Csv) => {
            let mut s = comment_header();
            s.push_str(text);
            if !text.ends_with('\n') {
                s.push('\n');
            }
            s
        }
        (Body::Text { json, .. }, Format::Json) => envelope(json.clone()),
        (Body::Json(v), _) => envelope(v.clone()),
    }
}

pub fn emit(cli: &Cli, outcome: &Outcome) -> std::io::Result<()> {
    let text = render(cli, outcome);
    match &cli.global.out {
        Some(path) => std::fs::write(path, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}
