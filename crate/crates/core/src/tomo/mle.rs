//! Diluted iterative maximum-likelihood reconstruction.

use serde::Serialize;

use super::dataset::TomographyDataset;
use crate::fitstats::{bootstrap, BootstrapCi};
use crate::qcore::state::hermitian_eigenvalues;
use crate::qcore::{CMatrix, DensityMatrix, QubitLabel, RngStream};
use crate::{Error, Result};

/// Probabilities below this are clamped before division.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MleOptions {
    pub max_iterations: usize,
    /// Stop when the log-likelihood per shot gains less than this in one step.
    pub tolerance: f64,
    /// Initial dilution `lambda`; halved on any step that would lower the likelihood.
    pub dilution: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            max_iterations: 20_000,
            tolerance: 1e-10,
            dilution: 1.0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MleTrace {
    /// Log-likelihood after each accepted iterate (starting point first).
    pub log_likelihood: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Outcomes with counts whose probability hit the floor at the end.
    pub clamped_outcomes: usize,
}

#[derive(Clone, Debug)]
pub struct ReconstructionResult {
    pub rho: DensityMatrix,
    pub trace: MleTrace,
}

/// Effects with counts, ready for reconstruction. The count-weighted sum of
/// every group's completeness relation must be the identity.
pub struct LikelihoodTerms {
    dim: usize,
    effects: Vec<CMatrix>,
    counts: Vec<f64>,
    total: f64,
}

impl LikelihoodTerms {
    /// `terms` pairs each effect with its count; `normalizer` is
    /// `sum_g (n_g / N) sum_j E_gj`, which must equal the identity.
    pub fn new(dim: usize, terms: Vec<(CMatrix, f64)>, normalizer: &CMatrix) -> Result<Self> {
        if (normalizer - CMatrix::identity(dim, dim)).camax() > 1e-9 {
            return Err(Error::InvalidArgument(
                "effects are not balanced: weighted completeness sum differs from identity".into(),
            ));
        }
        Self::checked(dim, terms)
    }

    fn checked(dim: usize, terms: Vec<(CMatrix, f64)>) -> Result<Self> {
        if terms.iter().any(|(e, c)| e.shape() != (dim, dim) || *c < 0.0) {
            return Err(Error::DimensionMismatch("effect shape or negative count".into()));
        }
        let total: f64 = terms.iter().map(|t| t.1).sum();
        if total <= 0.0 {
            return Err(Error::InsufficientData("dataset has no shots".into()));
        }
        check_complete(dim, terms.iter().map(|t| &t.0))?;
        let (effects, counts): (Vec<_>, Vec<_>) = terms.into_iter().filter(|t| t.1 > 0.0).unzip();
        Ok(Self {
            dim,
            effects,
            counts,
            total,
        })
    }

    pub fn from_dataset(data: &TomographyDataset) -> Result<Self> {
        Self::checked(1 << data.n_qubits(), data.effects()?)
    }

    pub fn log_likelihood(&self, rho: &CMatrix) -> f64 {
        self.effects
            .iter()
            .zip(&self.counts)
            .map(|(e, &n)| n * e.dotc(rho).re.max(PROB_FLOOR).ln())
            .sum()
    }

    fn r_operator(&self, rho: &CMatrix) -> (CMatrix, f64, usize) {
        let mut r = CMatrix::zeros(self.dim, self.dim);
        let mut ll = 0.0;
        let mut clamped = 0;
        for (e, &n) in self.effects.iter().zip(&self.counts) {
            let p = e.dotc(rho).re;
            let p = if p < PROB_FLOOR {
                clamped += 1;
                PROB_FLOOR
            } else {
                p
            };
            ll += n * p.ln();
            let w = n / (self.total * p);
            for (ri, ei) in r.as_mut_slice().iter_mut().zip(e.as_slice()) {
                *ri += ei * w;
            }
        }
        (r, ll, clamped)
    }
}

/// Real span of the effects must be all Hermitian operators.
fn check_complete<'a>(dim: usize, effects: impl Iterator<Item = &'a CMatrix>) -> Result<()> {
    let d2 = dim * dim;
    let cols: Vec<&CMatrix> = effects.collect();
    let mut a = CMatrix::zeros(d2, cols.len());
    for (k, e) in cols.iter().enumerate() {
        a.column_mut(k).copy_from_slice(e.as_slice());
    }
    let gram = &a * a.adjoint();
    let ev = hermitian_eigenvalues(&gram);
    let top = ev.last().copied().unwrap_or(0.0);
    let rank = ev.iter().filter(|&&v| v > 1e-10 * top.max(1e-300)).count();
    if rank < d2 {
        return Err(Error::InsufficientData(format!(
            "measurements span {rank} of {d2} operator dimensions; not informationally complete"
        )));
    }
    Ok(())
}

/// Maximize `sum n_ij ln tr(M_ij rho)` from the maximally mixed start.
/// Each step is `rho <- N[(I + lambda R) rho (I + lambda R)]`, with `lambda`
/// halved until the likelihood does not decrease.
pub fn mle_from_terms(terms: &LikelihoodTerms, opts: &MleOptions) -> Result<(CMatrix, MleTrace)> {
    if !(opts.dilution > 0.0) || !(opts.tolerance >= 0.0) {
        return Err(Error::InvalidArgument("dilution must be positive and tolerance non-negative".into()));
    }
    let d = terms.dim;
    let id = CMatrix::identity(d, d);
    let mut rho = id.scale(1.0 / d as f64);
    let (mut r, mut ll, mut clamped) = terms.r_operator(&rho);
    let mut history = vec![ll];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;
        let mut lambda = opts.dilution;
        let mut accepted = None;
        while lambda > 1e-12 {
            let step = &id + r.scale(lambda);
            let mut next = &step * &rho * step.adjoint();
            next = (&next + next.adjoint()).scale(0.5);
            let tr = next.trace().re;
            next /= crate::qcore::c(tr, 0.0);
            let (r_next, ll_next, cl) = terms.r_operator(&next);
            if ll_next >= ll {
                accepted = Some((next, r_next, ll_next, cl));
                break;
            }
            lambda *= 0.5;
        }
        let Some((next, r_next, ll_next, cl)) = accepted else {
            converged = true;
            break;
        };
        let gain = (ll_next - ll) / terms.total;
        rho = next;
        r = r_next;
        ll = ll_next;
        clamped = cl;
        history.push(ll);
        if gain < opts.tolerance {
            converged = true;
            break;
        }
    }
    Ok((
        rho,
        MleTrace {
            log_likelihood: history,
            iterations,
            converged,
            clamped_outcomes: clamped,
        },
    ))
}

pub fn mle_reconstruct(data: &TomographyDataset, opts: &MleOptions) -> Result<ReconstructionResult> {
    let terms = LikelihoodTerms::from_dataset(data)?;
    let (m, trace) = mle_from_terms(&terms, opts)?;
    if trace.clamped_outcomes > 0 {
        log::warn!("{} observed outcomes have probability at the floor", trace.clamped_outcomes);
    }
    let labels = (0..data.n_qubits()).map(QubitLabel::Index).collect();
    Ok(ReconstructionResult {
        rho: DensityMatrix::new(m, labels)?,
        trace,
    })
}

/// Shot-level bootstrap of a fidelity-type statistic of the reconstruction.
pub fn bootstrap_reconstruction<F>(
    data: &TomographyDataset,
    opts: &MleOptions,
    statistic: F,
    n_resamples: usize,
    rng: &RngStream,
) -> Result<BootstrapCi>
where
    F: Fn(&DensityMatrix) -> Result<f64> + Sync,
{
    let shots = data.shots();
    bootstrap(
        &shots,
        |s| {
            let ds = data.from_shots(s)?;
            statistic(&mle_reconstruct(&ds, opts)?.rho)
        },
        n_resamples,
        0.95,
        rng,
    )
}
