//! Partial tomography: populations plus a parity fringe.

use serde::Serialize;

use super::settings::MeasurementSetting;
use crate::fitstats::{binomial_se, bootstrap, fit_parity_fringe, BootstrapCi, FringeFit};
use crate::netsim::ShotRecord;
use crate::qcore::RngStream;
use crate::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct ParityPoint {
    pub phase: f64,
    pub expectation: f64,
    pub error: f64,
    pub shots: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ParityPopulationEstimate {
    /// `P(0...0) + P(1...1)`.
    pub population: f64,
    pub population_err: f64,
    pub population_shots: usize,
    pub parity: Vec<ParityPoint>,
    pub fringe: FringeFit,
    pub contrast: f64,
    pub phase: f64,
    /// `(P + C) / 2`.
    pub fidelity: f64,
    pub fidelity_err: f64,
}

fn parity_sign(outcomes: &[u8]) -> f64 {
    if outcomes.iter().filter(|&&b| b == 1).count() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Population from computational-basis shots and a locked-frequency fit to
/// the parity expectation at each analysis phase.
pub fn estimate_parity_population(records: &[ShotRecord], n_qubits: usize, phases: &[f64]) -> Result<ParityPopulationEstimate> {
    let mut pop = (0usize, 0usize);
    let mut per_phase = vec![(0.0f64, 0usize); phases.len()];
    for r in records {
        if r.outcomes.len() != n_qubits || r.setting.len() != n_qubits {
            return Err(Error::DimensionMismatch(format!("record {} is not {n_qubits}-qubit", r.shot)));
        }
        let s = MeasurementSetting(r.setting.clone());
        if s.is_population() {
            pop.1 += 1;
            let first = r.outcomes[0];
            if r.outcomes.iter().all(|&b| b == first) {
                pop.0 += 1;
            }
        } else if let Some(k) = s.parity_phase() {
            let slot = per_phase
                .get_mut(k)
                .ok_or_else(|| Error::InvalidArgument(format!("phase index {k} outside grid of {}", phases.len())))?;
            slot.0 += parity_sign(&r.outcomes);
            slot.1 += 1;
        }
    }
    if pop.1 == 0 {
        return Err(Error::InsufficientData("no computational-basis shots".into()));
    }
    let parity: Vec<ParityPoint> = phases
        .iter()
        .zip(&per_phase)
        .filter(|(_, (_, n))| *n > 0)
        .map(|(&phase, &(sum, n))| {
            let e = sum / n as f64;
            ParityPoint {
                phase,
                expectation: e,
                error: ((1.0 - e * e).max(0.0) / n as f64).sqrt(),
                shots: n,
            }
        })
        .collect();
    let xs: Vec<f64> = parity.iter().map(|p| p.phase).collect();
    let ys: Vec<f64> = parity.iter().map(|p| p.expectation).collect();
    // a zero binomial error would dominate the weights; fall back to an unweighted fit
    let errs: Vec<f64> = if parity.iter().any(|p| p.error == 0.0) {
        vec![0.0; parity.len()]
    } else {
        parity.iter().map(|p| p.error).collect()
    };
    let fringe = fit_parity_fringe(&xs, &ys, &errs, n_qubits)?;
    let population = pop.0 as f64 / pop.1 as f64;
    let population_err = binomial_se(population, pop.1);
    let fidelity = 0.5 * (population + fringe.contrast);
    Ok(ParityPopulationEstimate {
        population,
        population_err,
        population_shots: pop.1,
        contrast: fringe.contrast,
        phase: fringe.phase,
        fidelity_err: 0.5 * (population_err.powi(2) + fringe.contrast_err.powi(2)).sqrt(),
        fidelity,
        parity,
        fringe,
    })
}

/// Shot-level bootstrap interval of the partial-tomography fidelity.
pub fn bootstrap_pst(
    records: &[ShotRecord],
    n_qubits: usize,
    phases: &[f64],
    n_resamples: usize,
    rng: &RngStream,
) -> Result<BootstrapCi> {
    bootstrap(
        records,
        |r| estimate_parity_population(r, n_qubits, phases).map(|e| e.fidelity),
        n_resamples,
        0.95,
        rng,
    )
}
