use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// Failure classes with stable exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad input file, unreadable path or invalid flag combination.
    Input(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

pub fn input_err(e: impl Display) -> CliError {
    CliError::Input(e.to_string())
}

pub fn internal_err(e: impl Display) -> CliError {
    CliError::Internal(e.to_string())
}

pub type CliResult<T> = Result<T, CliError>;

/// Everything needed to re-run a command and regenerate its outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name, exactly as given.
    pub args: Vec<String>,
    /// Working directory the command ran in; relative inputs resolve here.
    pub cwd: PathBuf,
    pub master_seed: Option<u64>,
    pub config: serde_json::Value,
    pub versions: Versions,
    pub outputs: Vec<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Versions {
    pub lagonn: String,
    pub cli: String,
}

impl RunManifest {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| input_err(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| input_err(format!("{}: {e}", path.display())))
    }
}

/// Collects the files written by one command and finishes with its manifest.
pub struct Outputs {
    dir: PathBuf,
    command: String,
    written: Vec<PathBuf>,
}

impl Outputs {
    pub fn new(dir: &Path, command: &str) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| input_err(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            command: command.to_string(),
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Relative paths land inside the output directory.
    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.dir.join(path)
        }
    }

    pub fn csv<S: Serialize>(&mut self, name: &str, rows: impl IntoIterator<Item = S>) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path).map_err(internal_err)?;
        for row in rows {
            w.serialize(row).map_err(internal_err)?;
        }
        w.flush().map_err(internal_err)?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// CSV with a header computed at run time.
    pub fn csv_records(&mut self, path: PathBuf, header: &[String], rows: &[Vec<String>]) -> CliResult<PathBuf> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(internal_err)?;
        }
        let mut w = csv::Writer::from_path(&path).map_err(internal_err)?;
        w.write_record(header).map_err(internal_err)?;
        for r in rows {
            w.write_record(r).map_err(internal_err)?;
        }
        w.flush().map_err(internal_err)?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn json<S: Serialize>(&mut self, name: &str, value: &S) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        let text = serde_json::to_string_pretty(value).map_err(internal_err)?;
        fs::write(&path, text + "\n").map_err(internal_err)?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn record(&mut self, path: PathBuf) {
        self.written.push(path);
    }

    pub fn finish<C: Serialize>(mut self, args: &[String], seed: Option<u64>, config: &C) -> CliResult<PathBuf> {
        let path = self.dir.join(format!("{}.manifest.json", self.command));
        self.written.push(path.clone());
        let manifest = RunManifest {
            command: self.command.clone(),
            args: args.to_vec(),
            cwd: std::env::current_dir().map_err(internal_err)?,
            master_seed: seed,
            config: serde_json::to_value(config).map_err(internal_err)?,
            versions: Versions {
                lagonn: lagonn_version().to_string(),
                cli: env!("CARGO_PKG_VERSION").to_string(),
            },
            outputs: self.written.clone(),
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(internal_err)?;
        fs::write(&path, text + "\n").map_err(internal_err)?;
        Ok(path)
    }
}

fn lagonn_version() -> &'static str {
    lagonn::VERSION
}

pub fn fmt_f64(x: f64) -> String {
    let mut buf = ryu_like(x);
    if buf == "-0" {
        buf = "0".into();
    }
    buf
}

fn ryu_like(x: f64) -> String {
    // Shortest round-trip representation, same as serde/csv use.
    format!("{x:?}")
}
