//! Orchestration behind the `qnet` binary: configuration, experiment runs,
//! persistence and reports.
//!
//! Every command is a plain function returning a serializable report so the
//! same code path serves the binary and the acceptance suite.

pub mod analysis;
pub mod manifest;
pub mod process;
pub mod report;
pub mod storage;
pub mod table1;

use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use qnet_core::config::Calibration;
use qnet_core::netsim::RecordSet;
use qnet_core::RngStream;
use sha2::{Digest, Sha256};

pub use manifest::RunManifest;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const BAD_CONFIG: i32 = 2;
    pub const INFEASIBLE: i32 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("bad configuration: {0}")]
    Config(String),
    #[error("infeasible request: {0}")]
    Infeasible(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::BAD_CONFIG,
            CliError::Infeasible(_) => exit::INFEASIBLE,
            CliError::Other(_) => exit::FAILURE,
        }
    }
}

impl From<qnet_core::Error> for CliError {
    fn from(e: qnet_core::Error) -> Self {
        use qnet_core::Error as E;
        match e {
            E::Config(_) => CliError::Config(e.to_string()),
            E::InvalidArgument(_)
            | E::InsufficientData(_)
            | E::NonConvergence(_)
            | E::DimensionMismatch(_)
            | E::NotPhysical(_)
            | E::UnknownGate(_)
            | E::MissingQubit(_) => CliError::Infeasible(e.to_string()),
            E::Format(_) | E::Io(_) => CliError::Other(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Loaded calibration plus the seed every stream of the run derives from.
#[derive(Clone, Debug)]
pub struct RunContext {
    pub cal: Calibration,
    /// SHA-256 of the canonical calibration (defaults filled in).
    pub config_hash: String,
    pub config_path: Option<PathBuf>,
    pub seed: u64,
}

impl RunContext {
    pub fn new(cal: Calibration, config_path: Option<PathBuf>, seed: u64) -> Self {
        let config_hash = hex::encode(Sha256::digest(cal.canonical_toml().as_bytes()));
        Self {
            cal,
            config_hash,
            config_path,
            seed,
        }
    }

    /// Shipped calibration when `path` is `None`. Unreadable files count as bad config.
    pub fn load(path: Option<&Path>, seed: u64) -> CliResult<Self> {
        let cal = match path {
            Some(p) => {
                let src = fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                Calibration::from_toml_str(&src).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
            }
            None => Calibration::default_shipped(),
        };
        Ok(Self::new(cal, path.map(Path::to_path_buf), seed))
    }

    pub fn rng(&self, label: &str) -> RngStream {
        RngStream::new(self.seed).derive(label)
    }
}

pub fn read_records(path: &Path) -> CliResult<RecordSet> {
    let f = fs::File::open(path).map_err(|e| CliError::Other(format!("{}: {e}", path.display())))?;
    RecordSet::read(BufReader::new(f)).map_err(|e| CliError::Other(format!("{}: {e}", path.display())))
}

pub fn write_records(path: &Path, set: &RecordSet) -> CliResult<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    set.write(&mut w)?;
    w.flush()?;
    Ok(())
}

/// Write `<stem>.txt` and `<stem>.json` into `dir`; returns both paths.
pub fn write_report<T: serde::Serialize>(dir: &Path, stem: &str, text: &str, value: &T) -> CliResult<Vec<PathBuf>> {
    let txt = dir.join(format!("{stem}.txt"));
    let json = dir.join(format!("{stem}.json"));
    fs::write(&txt, text)?;
    let mut body = serde_json::to_string_pretty(value)?;
    body.push('\n');
    fs::write(&json, body)?;
    Ok(vec![txt, json])
}
