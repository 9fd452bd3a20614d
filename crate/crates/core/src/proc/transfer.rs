//! Network-to-auxiliary state transfer built from a two-qubit iSWAP process.

use rayon::prelude::*;
use serde::Serialize;

use super::tomography::avg_gate_fidelity;
use crate::device::{transfer_phase_correction, PrepErrorModel, ReadoutErrorModel};
use crate::qcore::state::partial_trace_matrix;
use crate::qcore::{haar_sample, tensor, vectorize, CMatrix, RngStream, Superoperator};
use crate::{Error, Result};

pub const MIN_MC_SAMPLES: usize = 100;

/// Single-qubit transfer process with its headline numbers.
#[derive(Clone, Debug)]
pub struct TransferAnalysis {
    /// Network input to auxiliary output; not trace preserving when detecting.
    pub superop: Superoperator,
    pub error_detected: bool,
    /// Average fidelity to the identity (unnormalized when detecting).
    pub fidelity: f64,
    /// Mean detection probability over pure inputs, `1 - tr E(I/2)`.
    pub p_detect: f64,
}

impl TransferAnalysis {
    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.superop.is_trace_preserving(tol)
    }
}

/// Contract the auxiliary input of `s_iswap` (network first, auxiliary second)
/// with the prepared state, and the network output with the identity (plain)
/// or the reported-`0` readout effect (error detected). The ideal phase
/// correction is applied to the auxiliary output.
pub fn build_transfer_superop(
    s_iswap: &Superoperator,
    prep: PrepErrorModel,
    detect: Option<ReadoutErrorModel>,
) -> Result<TransferAnalysis> {
    if s_iswap.dim_in() != 4 || s_iswap.dim_out() != 4 {
        return Err(Error::DimensionMismatch("transfer needs a two-qubit process".into()));
    }
    let tau = prep.state();
    let keep = match detect {
        Some(ro) => ro.effect(0),
        None => CMatrix::identity(2, 2),
    };
    let post = tensor(&keep, &CMatrix::identity(2, 2));
    let corr = transfer_phase_correction();
    let mut m = CMatrix::zeros(4, 4);
    for b in 0..2 {
        for a in 0..2 {
            let mut basis = CMatrix::zeros(2, 2);
            basis[(a, b)] = 1.0.into();
            let out = s_iswap.apply(&tensor(&basis, &tau))?;
            let x = partial_trace_matrix(&(&post * out), 2, &[1]);
            let x = &corr * x * corr.adjoint();
            m.set_column(a + 2 * b, &vectorize(&x));
        }
    }
    let superop = Superoperator::new(m, 2, 2)?;
    let fidelity = avg_gate_fidelity(&superop, &CMatrix::identity(2, 2))?;
    let p_detect = 1.0 - superop.apply(&CMatrix::identity(2, 2).scale(0.5))?.trace().re;
    Ok(TransferAnalysis {
        superop,
        error_detected: detect.is_some(),
        fidelity,
        p_detect,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EdMetrics {
    /// Mean over inputs of the post-selected fidelity.
    pub f_bar: f64,
    pub f_se: f64,
    /// `1 - mean` acceptance probability.
    pub p_bar: f64,
    pub p_se: f64,
    pub n_samples: usize,
}

/// Haar average of the renormalized fidelity and of the rejection probability;
/// the ratio is taken per input state. Sample `i` uses `rng.substream(i)`.
pub fn monte_carlo_ed_metrics(analysis: &TransferAnalysis, n_samples: usize, rng: &RngStream) -> Result<EdMetrics> {
    if n_samples < MIN_MC_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "{n_samples} Monte-Carlo samples; need at least {MIN_MC_SAMPLES}"
        )));
    }
    let samples: Vec<(f64, f64)> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let psi = haar_sample(2, &mut rng.substream(i as u64))?;
            let out = analysis.superop.apply(&psi.projector())?;
            let t = out.trace().re;
            let overlap = psi.amplitudes().dotc(&(&out * psi.amplitudes())).re;
            Ok((if t > 0.0 { overlap / t } else { 0.0 }, t))
        })
        .collect::<Result<_>>()?;
    let n = n_samples as f64;
    let mean_sd = |f: &dyn Fn(&(f64, f64)) -> f64| {
        let m = samples.iter().map(f).sum::<f64>() / n;
        let v = samples.iter().map(|s| (f(s) - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (v / n).sqrt())
    };
    let (f_bar, f_se) = mean_sd(&|s| s.0);
    let (acc, p_se) = mean_sd(&|s| s.1);
    Ok(EdMetrics {
        f_bar,
        f_se,
        p_bar: 1.0 - acc,
        p_se,
        n_samples,
    })
}
