//! CSV/JSON emission with deterministic formatting.

use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Pick the format: explicit flag wins, then the output extension, then CSV.
pub fn resolve_format(flag: Option<Format>, out: Option<&Path>) -> Format {
    if let Some(f) = flag {
        return f;
    }
    if let Some(p) = out {
        if p.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            return Format::Json;
        }
    }
    Format::Csv
}

/// 17 significant digits, locale-free.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut s = String::new();
                s.push_str(&self.header.join(","));
                s.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(|v| fmt(*v)).collect();
                    s.push_str(&cells.join(","));
                    s.push('\n');
                }
                s
            }
            Format::Json => {
                let mut objs = Vec::with_capacity(self.rows.len());
                for row in &self.rows {
                    let mut map = serde_json::Map::new();
                    for (k, v) in self.header.iter().zip(row) {
                        map.insert(
                            (*k).to_string(),
                            serde_json::Value::String(fmt(*v)),
                        );
                    }
                    objs.push(serde_json::Value::Object(map));
                }
                let mut s = serde_json::to_string_pretty(&serde_json::Value::Array(objs)).unwrap();
                s.push('\n');
                s
            }
        }
    }
}

pub fn write_out(out: Option<&PathBuf>, content: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, content),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(content.as_bytes())
        }
    }
}
