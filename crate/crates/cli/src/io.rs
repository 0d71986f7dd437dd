//! Output plumbing: fixed-format numbers, CSV files, JSON records, and the
//! run manifest written alongside every output file.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

/// Fixed numeric formatting: 17 significant digits, infinities as inf/-inf.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.16e}")
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), String> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), String> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| format!("cannot serialize json: {e}"))?;
    fs::write(path, text + "\n").map_err(|e| format!("cannot write {}: {e}", path.display()))
}

#[derive(Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub subcommand: String,
    pub parameters: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
    pub wall_time_secs: f64,
}

pub struct ManifestTimer {
    start: Instant,
    subcommand: String,
    parameters: BTreeMap<String, String>,
    seed: Option<u64>,
}

impl ManifestTimer {
    pub fn new(subcommand: &str, parameters: BTreeMap<String, String>, seed: Option<u64>) -> Self {
        ManifestTimer {
            start: Instant::now(),
            subcommand: subcommand.into(),
            parameters,
            seed,
        }
    }

    /// Writes `<first output>.manifest.json` recording the full invocation.
    pub fn write(self, outputs: &[PathBuf]) -> Result<(), String> {
        let Some(first) = outputs.first() else {
            return Ok(()); // stdout-only runs have no file to anchor a manifest to
        };
        let manifest = RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").into(),
            subcommand: self.subcommand,
            parameters: self.parameters,
            seed: self.seed,
            outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
            wall_time_secs: self.start.elapsed().as_secs_f64(),
        };
        let path = PathBuf::from(format!("{}.manifest.json", first.display()));
        write_json(&path, &manifest)
    }
}

/// Reads a CSV of numbers; skips a header line if the first row fails to
/// parse. Returns row-major data.
pub fn read_numeric_csv(path: &Path) -> Result<Vec<Vec<f64>>, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut rows = vec![];
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = line
            .split(',')
            .map(|tok| tok.trim().parse::<f64>())
            .collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if lineno == 0 => continue, // header
            Err(e) => {
                return Err(format!(
                    "{}:{}: cannot parse '{line}': {e}",
                    path.display(),
                    lineno + 1
                ))
            }
        }
    }
    if rows.is_empty() {
        return Err(format!("{}: no numeric rows", path.display()));
    }
    let width = rows[0].len();
    if rows.iter().any(|r| r.len() != width) {
        return Err(format!("{}: ragged rows", path.display()));
    }
    Ok(rows)
}

pub fn write_stdout(text: &str) {
    let mut out = std::io::stdout();
    let _ = out.write_all(text.as_bytes());
    let _ = out.flush();
}
