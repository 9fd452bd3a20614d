//! Outcome counts per measurement setting.

use std::collections::BTreeMap;

use super::settings::{build_povm, MeasurementSetting};
use crate::device::ReadoutErrorModel;
use crate::netsim::ShotRecord;
use crate::qcore::CMatrix;
use crate::{Error, Result};

/// Counts `n_ij` with the readout model of every qubit.
///
/// Setting keys are canonical: the duplicated identity index is folded onto
/// index 0 so equal measurements share one entry.
#[derive(Clone, Debug, PartialEq)]
pub struct TomographyDataset {
    n_qubits: usize,
    readout: Vec<ReadoutErrorModel>,
    phases: Vec<f64>,
    counts: BTreeMap<MeasurementSetting, Vec<u64>>,
}

fn canonical(setting: &MeasurementSetting) -> MeasurementSetting {
    MeasurementSetting(setting.0.iter().map(|&i| if i == 1 { 0 } else { i }).collect())
}

impl TomographyDataset {
    pub fn new(n_qubits: usize, readout: Vec<ReadoutErrorModel>, phases: Vec<f64>) -> Result<Self> {
        if n_qubits == 0 || readout.len() != n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "{} readout models for {n_qubits} qubits",
                readout.len()
            )));
        }
        Ok(Self {
            n_qubits,
            readout,
            phases,
            counts: BTreeMap::new(),
        })
    }

    pub fn from_records(records: &[ShotRecord], readout: Vec<ReadoutErrorModel>, phases: Vec<f64>) -> Result<Self> {
        let n = readout.len();
        let mut ds = Self::new(n, readout, phases)?;
        for r in records {
            ds.add(&MeasurementSetting(r.setting.clone()), r.outcome_index(), 1)?;
        }
        Ok(ds)
    }

    pub fn add(&mut self, setting: &MeasurementSetting, outcome: usize, count: u64) -> Result<()> {
        if setting.n_qubits() != self.n_qubits || outcome >= 1 << self.n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "setting {:?} / outcome {outcome} for {} qubits",
                setting.0, self.n_qubits
            )));
        }
        let row = self
            .counts
            .entry(canonical(setting))
            .or_insert_with(|| vec![0; 1 << self.n_qubits]);
        row[outcome] += count;
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn readout(&self) -> &[ReadoutErrorModel] {
        &self.readout
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn counts(&self) -> &BTreeMap<MeasurementSetting, Vec<u64>> {
        &self.counts
    }

    pub fn total_shots(&self) -> u64 {
        self.counts.values().flatten().sum()
    }

    /// Same counts analysed with different readout models.
    pub fn with_readout(&self, readout: Vec<ReadoutErrorModel>) -> Result<Self> {
        if readout.len() != self.n_qubits {
            return Err(Error::DimensionMismatch("readout model count".into()));
        }
        Ok(Self {
            readout,
            ..self.clone()
        })
    }

    /// Effects and counts for every setting with data; zero-count outcomes are kept.
    pub fn effects(&self) -> Result<Vec<(CMatrix, f64)>> {
        let mut out = Vec::new();
        for (setting, row) in &self.counts {
            if row.iter().all(|&c| c == 0) {
                continue;
            }
            for (j, m) in build_povm(setting, &self.readout, &self.phases)? {
                out.push((m, row[j] as f64));
            }
        }
        Ok(out)
    }

    /// One `(setting, outcome)` entry per shot, for resampling.
    pub fn shots(&self) -> Vec<(MeasurementSetting, usize)> {
        let mut out = Vec::with_capacity(self.total_shots() as usize);
        for (s, row) in &self.counts {
            for (j, &c) in row.iter().enumerate() {
                out.extend(std::iter::repeat_n((s.clone(), j), c as usize));
            }
        }
        out
    }

    pub fn from_shots(&self, shots: &[(MeasurementSetting, usize)]) -> Result<Self> {
        let mut ds = Self::new(self.n_qubits, self.readout.clone(), self.phases.clone())?;
        for (s, j) in shots {
            ds.add(s, *j, 1)?;
        }
        Ok(ds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_indices_share_counts() {
        let mut ds = TomographyDataset::new(2, vec![ReadoutErrorModel::perfect(); 2], vec![]).unwrap();
        ds.add(&MeasurementSetting(vec![0, 1]), 3, 2).unwrap();
        ds.add(&MeasurementSetting(vec![1, 0]), 3, 1).unwrap();
        assert_eq!(ds.counts().len(), 1);
        assert_eq!(ds.total_shots(), 3);
        assert_eq!(ds.shots().len(), 3);
        assert!(ds.add(&MeasurementSetting(vec![0]), 0, 1).is_err());
        assert!(ds.add(&MeasurementSetting(vec![0, 0]), 4, 1).is_err());
    }
}
