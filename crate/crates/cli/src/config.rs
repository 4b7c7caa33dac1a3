//! Config-file merging, output emission and exit-code mapping.

use clap::ValueEnum;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Failure classes with fixed process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Exit 2: an input violates a domain invariant.
    Validation(String),
    /// Exit 3: a computation or I/O step failed.
    Compute(String),
    /// Exit 4: an evaluation budget was exceeded.
    Budget(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Compute(_) => 3,
            CliError::Budget(_) => 4,
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Compute(m) => write!(f, "computation failed: {m}"),
            CliError::Budget(m) => write!(f, "budget exceeded: {m}"),
        }
    }
}

impl From<opplab_core::Error> for CliError {
    fn from(e: opplab_core::Error) -> Self {
        use opplab_core::Error as E;
        let msg = e.to_string();
        match e {
            E::BudgetExceeded { .. } => CliError::Budget(msg),
            E::QuadratureNotConverged { .. } | E::QuadratureImbalance { .. } => {
                CliError::Compute(msg)
            }
            E::Invalid { .. }
            | E::CapExceeded { .. }
            | E::DivisionByZero(_)
            | E::PositivityViolated { .. }
            | E::MixedN(_)
            | E::InsufficientRange(_) => CliError::Validation(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Compute(format!("i/o: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Flag values that override the config file; unset flags leave the file's
/// value (or the default) in place.
#[derive(Default)]
pub struct Overlay(Map<String, Value>);

impl Overlay {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set<V: Serialize>(mut self, key: &str, value: Option<V>) -> Self {
        if let Some(v) = value {
            self.0.insert(
                key.to_owned(),
                serde_json::to_value(v).expect("serializable flag"),
            );
        }
        self
    }

    /// Boolean switches can only turn a setting on.
    pub fn flag(self, key: &str, on: bool) -> Self {
        self.set(key, on.then_some(true))
    }
}

pub fn load_config(path: Option<&Path>) -> CliResult<Option<Value>> {
    let Some(path) = path else { return Ok(None) };
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::invalid(format!("config {}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::invalid(format!("config {}: {e}", path.display())))?;
    Ok(Some(v))
}

/// Merge flags over the config file and deserialize. A file holding a
/// previous report is accepted: its `config` echo is used.
pub fn resolve<T: DeserializeOwned>(file: Option<&Value>, overlay: Overlay) -> CliResult<T> {
    let mut base = match file {
        None => Map::new(),
        Some(Value::Object(m)) => match m.get("config") {
            Some(Value::Object(c)) => c.clone(),
            _ => m.clone(),
        },
        Some(_) => return Err(CliError::invalid("config file must hold a JSON object")),
    };
    base.extend(overlay.0);
    serde_json::from_value(Value::Object(base))
        .map_err(|e| CliError::invalid(format!("config: {e}")))
}

pub fn require<T>(v: Option<T>, name: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::invalid(format!("{name} is required")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// CSV when the command has a table, JSON otherwise.
    Auto,
    Csv,
    Json,
    Both,
}

/// Primary output of one command. Timings never enter it.
pub struct Output {
    pub stem: &'static str,
    pub json: Value,
    pub csv: Option<Vec<u8>>,
    /// Auxiliary files, written only with `--out`.
    pub extra: Vec<(String, Vec<u8>)>,
}

impl Output {
    pub fn new<C: Serialize, R: Serialize>(
        command: &str,
        stem: &'static str,
        config: &C,
        seed: u64,
        result: &R,
    ) -> CliResult<Self> {
        let json = serde_json::json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "seed": seed,
            "config": config,
            "result": result,
        });
        Ok(Self {
            stem,
            json,
            csv: None,
            extra: Vec::new(),
        })
    }

    pub fn with_csv(mut self, csv: Vec<u8>) -> Self {
        self.csv = Some(csv);
        self
    }

    fn json_bytes(&self) -> Vec<u8> {
        let mut s = serde_json::to_string_pretty(&self.json).expect("serializable report");
        s.push('\n');
        s.into_bytes()
    }

    pub fn emit(&self, format: Format, out_dir: Option<&Path>) -> CliResult<()> {
        let (want_csv, want_json) = match (format, self.csv.is_some()) {
            (Format::Auto | Format::Csv, true) => (true, out_dir.is_some()),
            (Format::Auto | Format::Csv, false) => (false, true),
            (Format::Json, _) => (false, true),
            (Format::Both, has) => (has, true),
        };
        match out_dir {
            Some(dir) => {
                fs::create_dir_all(dir)?;
                if want_json {
                    fs::write(dir.join(format!("{}.json", self.stem)), self.json_bytes())?;
                }
                if let (true, Some(csv)) = (want_csv, &self.csv) {
                    fs::write(dir.join(format!("{}.csv", self.stem)), csv)?;
                }
                for (name, bytes) in &self.extra {
                    fs::write(dir.join(name), bytes)?;
                }
            }
            None => {
                let mut stdout = std::io::stdout().lock();
                let mut write = || -> std::io::Result<()> {
                    if want_json {
                        stdout.write_all(&self.json_bytes())?;
                    }
                    if let (true, Some(csv)) = (want_csv, &self.csv) {
                        stdout.write_all(csv)?;
                    }
                    stdout.flush()
                };
                match write() {
                    // A closed reader (e.g. `| head`) is not a failure.
                    Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                    r => r?,
                }
            }
        }
        Ok(())
    }
}

/// Where wall-clock timings go: an explicit file, `timing.json` inside the
/// output directory, or stderr.
pub fn write_timing(
    explicit: Option<&Path>,
    out_dir: Option<&Path>,
    command: &str,
    threads: usize,
    elapsed: f64,
) -> CliResult<()> {
    let record = serde_json::json!({
        "command": command,
        "threads": threads,
        "elapsed_seconds": elapsed,
    });
    let path: Option<PathBuf> = explicit
        .map(Path::to_path_buf)
        .or_else(|| out_dir.map(|d| d.join("timing.json")));
    match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            fs::write(p, format!("{record}\n"))?;
        }
        None => eprintln!("{command}: {elapsed:.3} s on {threads} thread(s)"),
    }
    Ok(())
}

/// `auto` or a positive integer.
pub fn parse_threads(s: &str) -> CliResult<usize> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(0);
    }
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(CliError::invalid(format!(
            "threads must be \"auto\" or a positive integer, got {s:?}"
        ))),
    }
}
