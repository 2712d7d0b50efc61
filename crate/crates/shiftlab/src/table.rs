//! Two-column table files: `index value` per line, indices `0, 1, 2, ...`.
//! Blank lines and `#` comments are skipped; columns may be separated by
//! whitespace or a comma.

use std::path::Path;

use crate::config::ConfigError;

pub fn parse_table(text: &str, path: &Path) -> Result<Vec<f64>, ConfigError> {
    let bad = |line: usize, msg: String| ConfigError::Table { path: path.to_path_buf(), line, msg };
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        if cols.len() != 2 {
            return Err(bad(i + 1, format!("expected two columns, found {}", cols.len())));
        }
        let idx: usize = cols[0].parse().map_err(|_| bad(i + 1, format!("bad index {:?}", cols[0])))?;
        let val: f64 = cols[1].parse().map_err(|_| bad(i + 1, format!("bad value {:?}", cols[1])))?;
        if idx != out.len() {
            return Err(bad(i + 1, format!("index {idx} out of sequence, expected {}", out.len())));
        }
        if !val.is_finite() {
            return Err(bad(i + 1, "value is not finite".into()));
        }
        out.push(val);
    }
    if out.is_empty() {
        return Err(bad(0, "table is empty".into()));
    }
    Ok(out)
}

pub fn read_table(path: &Path) -> Result<Vec<f64>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io { path: path.to_path_buf(), source: e })?;
    parse_table(&text, path)
}
