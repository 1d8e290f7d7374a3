//! Optional JSON defaults and the list syntax shared by `--p`, `--k` and `--r`.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use graph_poincare::calculus::Exponent;
use serde::Deserialize;

use crate::usage;

/// A list given either in flag syntax (`"1,2,inf"`, `"8..256"`) or as a
/// JSON array.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ListValue {
    Text(String),
    Items(Vec<serde_json::Value>),
}

impl ListValue {
    fn into_text(self) -> String {
        match self {
            ListValue::Text(s) => s,
            ListValue::Items(items) => items
                .into_iter()
                .map(|v| match v {
                    serde_json::Value::String(s) => s,
                    other => other.to_string(),
                })
                .collect::<Vec<_>>()
                .join(","),
        }
    }
}

/// Defaults read from `--config`. Every key mirrors the flag of the same name;
/// a flag given on the command line always wins.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub p: Option<ListValue>,
    pub k: Option<ListValue>,
    pub r: Option<ListValue>,
    pub geometric: Option<bool>,
    pub trials: Option<usize>,
    pub tolerance: Option<f64>,
    pub out: Option<PathBuf>,
    pub b: Option<u32>,
    pub restarts: Option<usize>,
    pub iters: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(FileConfig::default()) };
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))
    }

    pub fn p(&mut self) -> Option<String> {
        self.p.take().map(ListValue::into_text)
    }

    pub fn k(&mut self) -> Option<String> {
        self.k.take().map(ListValue::into_text)
    }

    pub fn r(&mut self) -> Option<String> {
        self.r.take().map(ListValue::into_text)
    }
}

pub fn parse_exponents(text: &str) -> Result<Vec<Exponent>> {
    let out = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<Exponent>().map_err(|e| usage(e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    if out.is_empty() {
        return Err(usage("empty exponent list"));
    }
    Ok(out)
}

/// `a,b,c` or `a..b` (inclusive). With `geometric`, a range doubles from `a`
/// while it stays at most `b`.
pub fn parse_integers(text: &str, geometric: bool) -> Result<Vec<u64>> {
    let parse = |s: &str| -> Result<u64> {
        s.trim().parse().map_err(|_| usage(format!("expected a nonnegative integer, got {s:?}")))
    };
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let (a, b) = (parse(a)?, parse(b.trim_start_matches('='))?);
            if a > b {
                return Err(usage(format!("empty range {part}")));
            }
            if geometric {
                if a == 0 {
                    return Err(usage("a geometric range must start above 0"));
                }
                let mut x = a;
                while x <= b {
                    out.push(x);
                    x = x.checked_mul(2).unwrap_or(u64::MAX);
                    if x == u64::MAX {
                        break;
                    }
                }
            } else {
                out.extend(a..=b);
            }
        } else {
            out.push(parse(part)?);
        }
    }
    if out.is_empty() {
        return Err(usage("empty integer list"));
    }
    Ok(out)
}

pub fn to_u32(values: &[u64]) -> Result<Vec<u32>> {
    values
        .iter()
        .map(|&v| u32::try_from(v).map_err(|_| usage(format!("value {v} is too large"))))
        .collect()
}
