//! Parity fringe `C cos(N phi - phi0)` fitted as a linear model in `cos N phi`, `sin N phi`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::{Error, Result};

const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Debug, Serialize)]
pub struct FringeFit {
    /// Bias-corrected contrast, clamped to `[0, 1]`.
    pub contrast: f64,
    /// `sqrt(a^2 + b^2)` without correction.
    pub contrast_raw: f64,
    pub contrast_err: f64,
    pub contrast_ci: (f64, f64),
    /// Fringe phase in `(-pi, pi]`.
    pub phase: f64,
    pub phase_err: f64,
    /// Locked fringe frequency.
    pub n_lock: usize,
    /// Cosine and sine amplitudes.
    pub a: f64,
    pub b: f64,
    pub covariance: [[f64; 2]; 2],
    pub residuals: Vec<f64>,
    pub chi2: f64,
    /// Set when the corrected contrast exceeded 1.
    pub clamped: bool,
}

impl FringeFit {
    pub fn predict(&self, phi: f64) -> f64 {
        self.a * (self.n_lock as f64 * phi).cos() + self.b * (self.n_lock as f64 * phi).sin()
    }
}

fn distinct_phases(phases: &[f64]) -> usize {
    let mut w: Vec<f64> = phases.iter().map(|p| p.rem_euclid(2.0 * PI)).collect();
    w.sort_by(f64::total_cmp);
    w.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    if w.len() > 1 && (w[0] + 2.0 * PI - w[w.len() - 1]).abs() < 1e-9 {
        w.pop();
    }
    w.len()
}

/// Weighted least squares with the frequency locked to `n`.
///
/// `errors` are one-sigma uncertainties; all zeros means an unweighted fit
/// with the covariance scaled by the residual variance.
pub fn fit_parity_fringe(phases: &[f64], values: &[f64], errors: &[f64], n: usize) -> Result<FringeFit> {
    if phases.len() != values.len() || phases.len() != errors.len() {
        return Err(Error::DimensionMismatch("phases, values and errors differ in length".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("fringe frequency must be positive".into()));
    }
    let distinct = distinct_phases(phases);
    if distinct < 2 * n + 1 {
        return Err(Error::InsufficientData(format!(
            "{distinct} distinct phases; a frequency-{n} fringe needs at least {}",
            2 * n + 1
        )));
    }
    let unweighted = errors.iter().all(|&e| e == 0.0);
    if !unweighted && errors.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidArgument("errors must be all positive or all zero".into()));
    }
    let nf = n as f64;
    let (mut scc, mut sss, mut scs, mut syc, mut sys) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for ((&p, &y), &e) in phases.iter().zip(values).zip(errors) {
        let w = if unweighted { 1.0 } else { 1.0 / (e * e) };
        let (c, s) = ((nf * p).cos(), (nf * p).sin());
        scc += w * c * c;
        sss += w * s * s;
        scs += w * c * s;
        syc += w * y * c;
        sys += w * y * s;
    }
    let det = scc * sss - scs * scs;
    if det.abs() < 1e-12 * (scc * sss).max(1e-300) {
        return Err(Error::InsufficientData("phases do not span the fringe".into()));
    }
    let a = (sss * syc - scs * sys) / det;
    let b = (scc * sys - scs * syc) / det;
    let residuals: Vec<f64> = phases
        .iter()
        .zip(values)
        .map(|(&p, &y)| y - a * (nf * p).cos() - b * (nf * p).sin())
        .collect();
    let chi2: f64 = residuals
        .iter()
        .zip(errors)
        .map(|(r, &e)| if unweighted { r * r } else { (r / e).powi(2) })
        .sum();
    let scale = if unweighted {
        chi2 / (phases.len() as f64 - 2.0).max(1.0)
    } else {
        1.0
    };
    let cov = [[scale * sss / det, -scale * scs / det], [-scale * scs / det, scale * scc / det]];
    let raw2 = a * a + b * b;
    let contrast_raw = raw2.sqrt();
    let corrected = (raw2 - cov[0][0] - cov[1][1]).max(0.0).sqrt();
    let clamped = corrected > 1.0;
    let contrast = corrected.min(1.0);
    let (contrast_err, phase_err) = if contrast_raw > 0.0 {
        let var_c = (a * a * cov[0][0] + b * b * cov[1][1] + 2.0 * a * b * cov[0][1]) / raw2;
        let var_p = (b * b * cov[0][0] + a * a * cov[1][1] - 2.0 * a * b * cov[0][1]) / (raw2 * raw2);
        (var_c.max(0.0).sqrt(), var_p.max(0.0).sqrt())
    } else {
        ((cov[0][0] + cov[1][1]).sqrt(), PI)
    };
    Ok(FringeFit {
        contrast,
        contrast_raw,
        contrast_err,
        contrast_ci: ((contrast - Z95 * contrast_err).max(0.0), (contrast + Z95 * contrast_err).min(1.0)),
        phase: b.atan2(a),
        phase_err,
        n_lock: n,
        a,
        b,
        covariance: cov,
        residuals,
        chi2,
        clamped,
    })
}
