//! Measurement settings and readout-dressed POVMs.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::device::ReadoutErrorModel;
use crate::qcore::{gates, tensor, CMatrix, RngStream};
use crate::{Error, Result};

/// Per-qubit analysis rotations; the identity appears twice so a third of all
/// draws measure in the computational basis.
pub const ROTATION_NAMES: [&str; 6] = ["I", "I", "X+", "Y+", "X-", "Y-"];
pub const N_ROTATIONS: u8 = 6;
/// Per-qubit index offset for parity analysis phases.
pub const PARITY_OFFSET: u8 = N_ROTATIONS;

/// One index per qubit: `0..6` selects a tomographic rotation, `6 + k` the
/// k-th parity analysis phase.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MeasurementSetting(pub Vec<u8>);

impl MeasurementSetting {
    pub fn n_qubits(&self) -> usize {
        self.0.len()
    }

    pub fn is_tomographic(&self) -> bool {
        self.0.iter().all(|&i| i < N_ROTATIONS)
    }

    /// All qubits in the computational basis.
    pub fn is_population(&self) -> bool {
        self.0.iter().all(|&i| i < 2)
    }

    /// Common parity phase index, if every qubit uses the same one.
    pub fn parity_phase(&self) -> Option<usize> {
        let first = *self.0.first()?;
        if first < PARITY_OFFSET || self.0.iter().any(|&i| i != first) {
            return None;
        }
        Some(usize::from(first - PARITY_OFFSET))
    }
}

pub fn tomographic_rotation(index: u8) -> Result<CMatrix> {
    Ok(match index {
        0 | 1 => gates::identity(2),
        2 => gates::r_phi(0.0, FRAC_PI_2),
        3 => gates::r_phi(FRAC_PI_2, FRAC_PI_2),
        4 => gates::r_phi(0.0, -FRAC_PI_2),
        5 => gates::r_phi(FRAC_PI_2, -FRAC_PI_2),
        _ => return Err(Error::InvalidArgument(format!("rotation index {index} out of range"))),
    })
}

/// Rotation `U` with `U^dag Z U = cos(phi) X + sin(phi) Y`.
pub fn parity_rotation(phi: f64) -> CMatrix {
    gates::r_phi(phi - FRAC_PI_2, FRAC_PI_2)
}

/// Uniform analysis phases over one period `2 pi / n_qubits` of the parity fringe.
pub fn phase_grid(n_phases: usize, n_qubits: usize) -> Vec<f64> {
    let period = 2.0 * PI / n_qubits.max(1) as f64;
    (0..n_phases).map(|k| period * k as f64 / n_phases as f64).collect()
}

/// Default phase count for an N-qubit parity scan.
pub fn default_phase_count(n_qubits: usize) -> usize {
    2 * n_qubits + 2
}

/// Single-qubit analysis unitary for a setting index.
pub fn setting_unitary(index: u8, phases: &[f64]) -> Result<CMatrix> {
    if index < N_ROTATIONS {
        return tomographic_rotation(index);
    }
    let k = usize::from(index - PARITY_OFFSET);
    phases
        .get(k)
        .map(|&phi| parity_rotation(phi))
        .ok_or_else(|| Error::InvalidArgument(format!("parity phase index {k} outside grid of {}", phases.len())))
}

/// I.i.d. uniform draws from the six per-qubit rotations.
pub fn generate_settings(n_qubits: usize, n_shots: usize, rng: &mut RngStream) -> Result<Vec<MeasurementSetting>> {
    if n_shots == 0 || n_qubits == 0 {
        return Err(Error::InvalidArgument("need at least one shot and one qubit".into()));
    }
    Ok((0..n_shots)
        .map(|_| MeasurementSetting((0..n_qubits).map(|_| rng.random_range(0..N_ROTATIONS)).collect()))
        .collect())
}

/// Single-qubit effects `M_down = (1-eps0) U^dag|0><0|U + eps1 U^dag|1><1|U` and its complement.
pub fn single_qubit_povm(u: &CMatrix, ro: &ReadoutErrorModel) -> [CMatrix; 2] {
    let ud = u.adjoint();
    let p0 = &ud * CMatrix::from_fn(2, 2, |r, c| if r == 0 && c == 0 { 1.0.into() } else { 0.0.into() }) * u;
    let p1 = &ud * CMatrix::from_fn(2, 2, |r, c| if r == 1 && c == 1 { 1.0.into() } else { 0.0.into() }) * u;
    let down = p0.scale(1.0 - ro.eps0) + p1.scale(ro.eps1);
    let up = p0.scale(ro.eps0) + p1.scale(1.0 - ro.eps1);
    [down, up]
}

/// Effects for every joint outcome `j` (bit of qubit 0 most significant).
pub fn build_povm(
    setting: &MeasurementSetting,
    readout: &[ReadoutErrorModel],
    phases: &[f64],
) -> Result<Vec<(usize, CMatrix)>> {
    let n = setting.n_qubits();
    if readout.len() != n {
        return Err(Error::DimensionMismatch(format!("{} readout models for {n} qubits", readout.len())));
    }
    let singles: Vec<[CMatrix; 2]> = setting
        .0
        .iter()
        .zip(readout)
        .map(|(&i, ro)| setting_unitary(i, phases).map(|u| single_qubit_povm(&u, ro)))
        .collect::<Result<_>>()?;
    Ok((0..1usize << n)
        .map(|j| {
            let mut m = CMatrix::identity(1, 1);
            for (q, pair) in singles.iter().enumerate() {
                let bit = (j >> (n - 1 - q)) & 1;
                m = tensor(&m, &pair[bit]);
            }
            (j, m)
        })
        .collect())
}
