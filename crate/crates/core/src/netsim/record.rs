//! Line-delimited JSON shot records.
//!
//! The first line is a [`RecordHeader`]; every following line is one
//! [`ShotRecord`]. Readers reject unknown schema names and newer versions.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::ExperimentKind;
use crate::{Error, Result};

pub const RECORD_SCHEMA: &str = "qnet-shots";
pub const RECORD_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordHeader {
    pub schema: String,
    pub version: u32,
    pub kind: ExperimentKind,
    /// Qubit labels in measurement order.
    pub labels: Vec<String>,
    /// Size of the uniform parity phase grid over one fringe period (0 when unused).
    pub n_phases: usize,
    pub storage_ms: f64,
    pub seed: u64,
}

impl RecordHeader {
    pub fn new(kind: ExperimentKind, n_phases: usize, storage_ms: f64, seed: u64) -> Self {
        Self {
            schema: RECORD_SCHEMA.into(),
            version: RECORD_VERSION,
            kind,
            labels: kind.labels().iter().map(ToString::to_string).collect(),
            n_phases,
            storage_ms,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub shot: u64,
    /// Herald attempts summed over every round of the shot.
    pub attempts: u64,
    /// Wall-clock from the start of generation to usable entanglement.
    pub elapsed_us: f64,
    /// Rounds discarded by error detection.
    pub aborts: u32,
    pub setting: Vec<u8>,
    pub outcomes: Vec<u8>,
}

impl ShotRecord {
    /// Joint outcome index, first qubit most significant.
    pub fn outcome_index(&self) -> usize {
        self.outcomes.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecordSet {
    pub header: RecordHeader,
    pub records: Vec<ShotRecord>,
}

impl RecordSet {
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        let line = serde_json::to_string(&self.header).map_err(|e| Error::Format(e.to_string()))?;
        writeln!(w, "{line}")?;
        for r in &self.records {
            let line = serde_json::to_string(r).map_err(|e| Error::Format(e.to_string()))?;
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let header: RecordHeader = match lines.next() {
            Some((_, l)) => serde_json::from_str(&l?).map_err(|e| Error::Format(format!("line 1: {e}")))?,
            None => return Err(Error::Format("empty record file".into())),
        };
        if header.schema != RECORD_SCHEMA || header.version > RECORD_VERSION {
            return Err(Error::Format(format!(
                "unsupported record schema {} v{}",
                header.schema, header.version
            )));
        }
        let n = header.labels.len();
        let mut records = Vec::new();
        for (i, l) in lines {
            let l = l?;
            if l.trim().is_empty() {
                continue;
            }
            let rec: ShotRecord = serde_json::from_str(&l).map_err(|e| Error::Format(format!("line {}: {e}", i + 1)))?;
            if rec.outcomes.len() != n || rec.setting.len() != n {
                return Err(Error::Format(format!("line {}: expected {n} qubits", i + 1)));
            }
            records.push(rec);
        }
        Ok(Self { header, records })
    }
}
