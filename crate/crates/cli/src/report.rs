use crate::Format;
use pirsd_core::rational::{self, Rational};
use pirsd_core::scheme::Measure;
use serde_json::{json, Map, Value};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILED: u8 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Verification(String),
    #[error("{0}")]
    Solver(String),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Input(_) | CliError::Write { .. } => 2,
            CliError::Solver(_) => 3,
        }
    }
}

pub fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

pub struct Context {
    pub format: Format,
    pub out: Option<PathBuf>,
    pub quiet: bool,
    pub args: Vec<String>,
}

pub fn parse_rational(s: &str) -> Result<Rational, CliError> {
    rational::parse(s).map_err(input)
}

/// Exact and decimal renderings of a rational.
pub fn num(r: &Rational) -> Value {
    json!({ "exact": rational::to_string(r), "decimal": rational::decimal(r, 12) })
}

/// A float is reported by its exact binary value.
pub fn num_f64(x: f64) -> Value {
    num(&rational::from_f64_exact(x))
}

pub fn measure(m: &Measure) -> Value {
    match &m.exact {
        Some(r) => num(r),
        None => json!({ "exact": Value::Null, "decimal": format!("{:.12}", m.approx) }),
    }
}

pub struct Report {
    command: &'static str,
    started: Instant,
    pub inputs: Map<String, Value>,
    pub results: Map<String, Value>,
    pub summary: Vec<String>,
}

impl Report {
    pub fn new(command: &'static str) -> Self {
        Report {
            command,
            started: Instant::now(),
            inputs: Map::new(),
            results: Map::new(),
            summary: Vec::new(),
        }
    }

    pub fn input(&mut self, key: &str, v: impl Into<Value>) {
        self.inputs.insert(key.into(), v.into());
    }

    pub fn result(&mut self, key: &str, v: impl Into<Value>) {
        self.results.insert(key.into(), v.into());
    }

    pub fn say(&mut self, line: impl Into<String>) {
        self.summary.push(line.into());
    }

    fn document(&self, ctx: &Context, passed: bool) -> Value {
        json!({
            "tool": "pirsd",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "args": ctx.args,
            "inputs": self.inputs,
            "results": self.results,
            "passed": passed,
            "timing": { "elapsed_ms": self.started.elapsed().as_secs_f64() * 1e3 },
        })
    }

    /// Writes the report (or `csv` when the CSV format is selected) and the
    /// summary, and returns the exit code for `passed`.
    pub fn finish(self, ctx: &Context, passed: bool, csv: Option<String>) -> Result<u8, CliError> {
        let body = match ctx.format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.document(ctx, passed)).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Csv => csv.unwrap_or_else(|| flatten_csv(&Value::Object(self.results.clone()))),
        };
        match &ctx.out {
            Some(path) => write_atomic(path, body.as_bytes())?,
            None => print!("{body}"),
        }
        if !ctx.quiet {
            for line in &self.summary {
                eprintln!("{line}");
            }
        }
        Ok(if passed { EXIT_OK } else { EXIT_FAILED })
    }
}

/// `key,exact,decimal` rows for every leaf of a results object.
fn flatten_csv(v: &Value) -> String {
    fn walk(prefix: &str, v: &Value, rows: &mut Vec<String>) {
        match v {
            Value::Object(m) if m.contains_key("exact") && m.contains_key("decimal") => {
                let exact = m["exact"].as_str().unwrap_or("");
                rows.push(format!("{prefix},{exact},{}", m["decimal"].as_str().unwrap_or("")));
            }
            Value::Object(m) => {
                for (k, x) in m {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&key, x, rows);
                }
            }
            Value::Array(a) => {
                for (i, x) in a.iter().enumerate() {
                    walk(&format!("{prefix}[{i}]"), x, rows);
                }
            }
            Value::String(s) => rows.push(format!("{prefix},{},", s.replace(',', ";"))),
            other => rows.push(format!("{prefix},{other},")),
        }
    }
    let mut rows = vec!["key,exact,decimal".to_string()];
    walk("", v, &mut rows);
    rows.join("\n") + "\n"
}

/// Temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let err = |source| CliError::Write {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(err)?;
    tmp.write_all(bytes).map_err(err)?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file()
            .set_permissions(std::fs::Permissions::from_mode(0o644))
            .map_err(err)?;
    }
    tmp.as_file().sync_all().map_err(err)?;
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}
