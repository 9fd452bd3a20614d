#![allow(dead_code)]

use qnet_core::device::ReadoutErrorModel;
use qnet_core::qcore::{tensor, CMatrix};
use qnet_core::tomo::settings::setting_unitary;
use qnet_core::tomo::{MeasurementSetting, TomographyDataset};
use qnet_core::RngStream;
use rand::Rng;

/// Rotate, sample a computational-basis outcome, then flip each reported bit classically.
pub fn sample_shot(
    rho: &CMatrix,
    setting: &MeasurementSetting,
    readout: &[ReadoutErrorModel],
    phases: &[f64],
    rng: &mut RngStream,
) -> Vec<u8> {
    let n = setting.0.len();
    let u = setting
        .0
        .iter()
        .fold(CMatrix::identity(1, 1), |acc, &i| tensor(&acc, &setting_unitary(i, phases).unwrap()));
    let rotated = &u * rho * u.adjoint();
    let x: f64 = rng.random();
    let mut acc = 0.0;
    let mut truth = rotated.nrows() - 1;
    for k in 0..rotated.nrows() {
        acc += rotated[(k, k)].re;
        if x < acc {
            truth = k;
            break;
        }
    }
    (0..n)
        .map(|q| {
            let bit = ((truth >> (n - 1 - q)) & 1) as u8;
            let flip = if bit == 0 { readout[q].eps0 } else { readout[q].eps1 };
            if rng.random::<f64>() < flip {
                1 - bit
            } else {
                bit
            }
        })
        .collect()
}

pub fn outcome_index(bits: &[u8]) -> usize {
    bits.iter().fold(0, |a, &b| (a << 1) | b as usize)
}

/// Random tomographic dataset of `shots` shots drawn from `rho`.
pub fn tomography_data(
    rho: &CMatrix,
    n: usize,
    shots: usize,
    truth_readout: &[ReadoutErrorModel],
    model_readout: &[ReadoutErrorModel],
    seed: u64,
) -> TomographyDataset {
    let mut rng = RngStream::new(seed);
    let settings = qnet_core::tomo::generate_settings(n, shots, &mut rng).unwrap();
    let mut ds = TomographyDataset::new(n, model_readout.to_vec(), vec![]).unwrap();
    for s in &settings {
        let bits = sample_shot(rho, s, truth_readout, &[], &mut rng);
        ds.add(s, outcome_index(&bits), 1).unwrap();
    }
    ds
}
