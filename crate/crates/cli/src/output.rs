use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde_json::Value;

use crate::CliError;

pub const DEFAULT_PRECISION: usize = 12;
pub const PRECISION_RANGE: (usize, usize) = (6, 17);
pub const PRECISION_ENV: &str = "HILMOD_PRECISION";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

/// Flag, then `HILMOD_PRECISION`, then the default.
pub fn resolve_precision(flag: Option<usize>) -> Result<usize, CliError> {
    let p = match flag {
        Some(p) => p,
        None => match std::env::var(PRECISION_ENV) {
            Ok(s) => s
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{PRECISION_ENV}={s:?} is not an integer")))?,
            Err(_) => DEFAULT_PRECISION,
        },
    };
    let (lo, hi) = PRECISION_RANGE;
    if !(lo..=hi).contains(&p) {
        return Err(CliError::Usage(format!(
            "precision {p} outside [{lo}, {hi}]"
        )));
    }
    Ok(p)
}

/// Rounds to `digits` significant digits. The result prints through
/// `{:?}` / serde_json as its shortest round-trip form.
#[derive(Debug, Clone, Copy)]
pub struct Numbers {
    pub digits: usize,
}

impl Numbers {
    pub fn round(&self, x: f64) -> f64 {
        if !x.is_finite() || x == 0.0 {
            // normalise -0.0 so output does not depend on the sign of zero
            return if x == 0.0 { 0.0 } else { x };
        }
        let s = format!("{:.*e}", self.digits - 1, x);
        s.parse().unwrap_or(x)
    }

    pub fn text(&self, x: f64) -> String {
        let r = self.round(x);
        if r.is_nan() {
            "nan".into()
        } else if r.is_infinite() {
            if r > 0.0 {
                "inf".into()
            } else {
                "-inf".into()
            }
        } else {
            format!("{r:?}")
        }
    }

    pub fn json(&self, x: f64) -> Value {
        serde_json::Number::from_f64(self.round(x))
            .map(Value::Number)
            .unwrap_or(Value::Null)
    }

    pub fn json_vec(&self, xs: &[f64]) -> Value {
        Value::Array(xs.iter().map(|&x| self.json(x)).collect())
    }

    pub fn complex_text(&self, re: f64, im: f64) -> String {
        let im_s = self.text(im.abs());
        let sign = if self.round(im) < 0.0 { '-' } else { '+' };
        format!("{}{sign}{im_s}i", self.text(re))
    }
}

/// Rows of already formatted cells under a header.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

/// Everything a command can emit; the requested format picks one.
#[derive(Debug, Clone)]
pub struct Report {
    pub json: Value,
    pub table: Table,
    /// Plain rendering, for results that are a single value or verdict.
    pub text: Option<String>,
    /// Text is the default format; otherwise JSON is.
    pub scalar: bool,
    /// Set when the result is an unresolved verdict.
    pub indeterminate: bool,
}

impl Report {
    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => Ok(format!("{}\n", self.json)),
            Format::Csv => Ok(self.table.render()),
            Format::Text => match &self.text {
                Some(t) => Ok(format!("{t}\n")),
                None => Err(CliError::Usage(
                    "this result is not a single value; use --format csv or json".into(),
                )),
            },
        }
    }

    pub fn default_format(&self) -> Format {
        if self.scalar && self.text.is_some() {
            Format::Text
        } else {
            Format::Json
        }
    }
}

/// Writes to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
