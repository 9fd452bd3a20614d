//! Process tomography through maximum-likelihood reconstruction of the Choi state.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use rand::Rng;

use crate::device::ReadoutErrorModel;
use crate::qcore::state::hermitian_eigenvalues;
use crate::qcore::{c, tensor, CMatrix, CVector, RngStream, Superoperator};
use crate::tomo::settings::{build_povm, N_ROTATIONS};
use crate::tomo::{mle_from_terms, LikelihoodTerms, MeasurementSetting, MleOptions, MleTrace};
use crate::{Error, Result};

/// `|0>, |1>, |+>, |->, |+i>, |-i>`.
pub fn cardinal_states() -> [CMatrix; 6] {
    let s = FRAC_1_SQRT_2;
    let kets = [
        [c(1.0, 0.0), c(0.0, 0.0)],
        [c(0.0, 0.0), c(1.0, 0.0)],
        [c(s, 0.0), c(s, 0.0)],
        [c(s, 0.0), c(-s, 0.0)],
        [c(s, 0.0), c(0.0, s)],
        [c(s, 0.0), c(0.0, -s)],
    ];
    kets.map(|k| {
        let v = CVector::from_vec(k.to_vec());
        &v * v.adjoint()
    })
}

/// Product input state with index digits in base 6, first qubit most significant.
pub fn input_state(index: usize, n_qubits: usize) -> CMatrix {
    let card = cardinal_states();
    (0..n_qubits).fold(CMatrix::identity(1, 1), |acc, q| {
        let digit = (index / 6usize.pow((n_qubits - 1 - q) as u32)) % 6;
        tensor(&acc, &card[digit])
    })
}

/// Every product of the per-qubit rotation indices.
pub fn all_settings(n_qubits: usize) -> Vec<MeasurementSetting> {
    let n_rot = usize::from(N_ROTATIONS);
    (0..n_rot.pow(n_qubits as u32))
        .map(|i| {
            MeasurementSetting(
                (0..n_qubits)
                    .map(|q| ((i / n_rot.pow((n_qubits - 1 - q) as u32)) % n_rot) as u8)
                    .collect(),
            )
        })
        .collect()
}

/// Counts per (input state, measurement setting).
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessDataset {
    n_qubits: usize,
    readout: Vec<ReadoutErrorModel>,
    counts: BTreeMap<(usize, MeasurementSetting), Vec<u64>>,
}

impl ProcessDataset {
    pub fn new(n_qubits: usize, readout: Vec<ReadoutErrorModel>) -> Result<Self> {
        if n_qubits == 0 || readout.len() != n_qubits {
            return Err(Error::DimensionMismatch("one readout model per qubit".into()));
        }
        Ok(Self {
            n_qubits,
            readout,
            counts: BTreeMap::new(),
        })
    }

    pub fn add(&mut self, input: usize, setting: &MeasurementSetting, outcome: usize, count: u64) -> Result<()> {
        if input >= 6usize.pow(self.n_qubits as u32) || setting.n_qubits() != self.n_qubits || outcome >= 1 << self.n_qubits {
            return Err(Error::DimensionMismatch(format!("input {input} / setting {:?} / outcome {outcome}", setting.0)));
        }
        let row = self
            .counts
            .entry((input, setting.clone()))
            .or_insert_with(|| vec![0; 1 << self.n_qubits]);
        row[outcome] += count;
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn counts(&self) -> &BTreeMap<(usize, MeasurementSetting), Vec<u64>> {
        &self.counts
    }

    pub fn total_shots(&self) -> u64 {
        self.counts.values().flatten().sum()
    }
}

fn draw(probs: &[f64], rng: &mut RngStream) -> usize {
    let x: f64 = rng.random::<f64>() * probs.iter().sum::<f64>();
    let mut acc = 0.0;
    for (j, p) in probs.iter().enumerate() {
        acc += p;
        if x < acc {
            return j;
        }
    }
    probs.len() - 1
}

/// Balanced design: every cardinal product input with every rotation setting,
/// `shots` shots each (36 x 36 x 25 = 32 400 for two qubits at 25 shots).
pub fn simulate_process_data(
    process: &Superoperator,
    readout: &[ReadoutErrorModel],
    shots: usize,
    rng: &mut RngStream,
) -> Result<ProcessDataset> {
    let d = process.dim_in();
    if d != process.dim_out() || !d.is_power_of_two() {
        return Err(Error::DimensionMismatch("process must map n qubits to n qubits".into()));
    }
    let n = d.trailing_zeros() as usize;
    let mut data = ProcessDataset::new(n, readout.to_vec())?;
    let settings = all_settings(n);
    let povms: Vec<Vec<(usize, CMatrix)>> = settings
        .iter()
        .map(|s| build_povm(s, readout, &[]))
        .collect::<Result<_>>()?;
    for k in 0..6usize.pow(n as u32) {
        let out = process.apply(&input_state(k, n))?;
        for (s, povm) in settings.iter().zip(&povms) {
            let probs: Vec<f64> = povm.iter().map(|(_, m)| m.dotc(&out).re.max(0.0)).collect();
            for _ in 0..shots {
                data.add(k, s, draw(&probs, rng), 1)?;
            }
        }
    }
    Ok(data)
}

#[derive(Clone, Debug)]
pub struct ProcessEstimate {
    pub superop: Superoperator,
    pub choi: CMatrix,
    pub trace: MleTrace,
}

/// Completely positive estimate from the Choi state `J / d`.
///
/// Outcome `j` of setting `s` on input `rho_k` has probability
/// `tr[(d rho_k^T (x) M_sj) J / d]`. The design must use every input equally
/// often so these effects are balanced.
pub fn reconstruct_process(data: &ProcessDataset, opts: &MleOptions) -> Result<ProcessEstimate> {
    let n = data.n_qubits;
    let d = 1usize << n;
    let total = data.total_shots() as f64;
    if total == 0.0 {
        return Err(Error::InsufficientData("empty process dataset".into()));
    }
    let mut terms = Vec::new();
    let mut normalizer = CMatrix::zeros(d * d, d * d);
    let id = CMatrix::identity(d, d);
    for ((k, s), row) in &data.counts {
        let shots: u64 = row.iter().sum();
        if shots == 0 {
            continue;
        }
        let rin = input_state(*k, n).transpose().scale(d as f64);
        normalizer += tensor(&rin, &id).scale(shots as f64 / total);
        for (j, m) in build_povm(s, &data.readout, &[])? {
            terms.push((tensor(&rin, &m), row[j] as f64));
        }
    }
    let lt = LikelihoodTerms::new(d * d, terms, &normalizer).map_err(|e| match e {
        Error::InvalidArgument(_) => Error::InsufficientData("process design uses inputs unequally".into()),
        other => other,
    })?;
    let (omega, trace) = mle_from_terms(&lt, opts)?;
    let choi = omega.scale(d as f64);
    Ok(ProcessEstimate {
        superop: Superoperator::from_choi(&choi, d, d)?,
        choi,
        trace,
    })
}

/// `F = (d + tr S_rel) / (d (d + 1))` with `S_rel = S_{U^dag} S`.
pub fn avg_gate_fidelity(s: &Superoperator, u: &CMatrix) -> Result<f64> {
    let d = s.dim_in();
    if s.dim_out() != d || u.shape() != (d, d) {
        return Err(Error::DimensionMismatch("process and unitary dimensions differ".into()));
    }
    let rel = s.then(&Superoperator::from_unitary(&u.adjoint()))?;
    let df = d as f64;
    Ok((df + rel.trace().re) / (df * (df + 1.0)))
}

/// Half the trace norm of the Choi difference divided by `d`; a lower bound on
/// the diamond distance.
pub fn diamond_proxy(a: &Superoperator, b: &Superoperator) -> Result<f64> {
    if a.dim_in() != b.dim_in() || a.dim_out() != b.dim_out() {
        return Err(Error::DimensionMismatch("processes act on different spaces".into()));
    }
    let diff = a.to_choi() - b.to_choi();
    let tn: f64 = hermitian_eigenvalues(&diff).iter().map(|v| v.abs()).sum();
    Ok(0.5 * tn / a.dim_in() as f64)
}
