//! Exponential fidelity decay `F(t) = offset + A exp(-t / T)`.

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use super::optim::golden_section;
use super::bootstrap::percentile;
use crate::qcore::RngStream;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum DecayModel {
    /// Offset fixed (0.5 is the fully mixed two-qubit baseline); `A >= 0`.
    Floor(f64),
    /// Offset fitted together with the amplitude.
    FreeAsymptote,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    pub model: DecayModel,
    /// Time constant in the units of the input times.
    pub t: f64,
    pub t_err: f64,
    /// 95% profile-likelihood interval for `t`.
    pub t_ci: (f64, f64),
    pub amplitude: f64,
    pub offset: f64,
    pub chi2: f64,
    /// False when the data do not constrain `t` (flat data or optimum at a search edge).
    pub identifiable: bool,
}

impl DecayFit {
    pub fn predict(&self, t: f64) -> f64 {
        self.offset + self.amplitude * (-t / self.t).exp()
    }
}

struct Problem<'a> {
    times: &'a [f64],
    values: &'a [f64],
    weights: Vec<f64>,
    model: DecayModel,
}

impl Problem<'_> {
    /// Best linear parameters and chi^2 at fixed time constant.
    fn profile(&self, t: f64) -> (f64, f64, f64) {
        let e: Vec<f64> = self.times.iter().map(|&x| (-x / t).exp()).collect();
        let (amp, off) = match self.model {
            DecayModel::Floor(f0) => {
                let (mut see, mut sey) = (0.0, 0.0);
                for ((&ei, &y), &w) in e.iter().zip(self.values).zip(&self.weights) {
                    see += w * ei * ei;
                    sey += w * ei * (y - f0);
                }
                ((sey / see).max(0.0), f0)
            }
            DecayModel::FreeAsymptote => {
                let (mut s1, mut se, mut see, mut sy, mut sey) = (0.0, 0.0, 0.0, 0.0, 0.0);
                for ((&ei, &y), &w) in e.iter().zip(self.values).zip(&self.weights) {
                    s1 += w;
                    se += w * ei;
                    see += w * ei * ei;
                    sy += w * y;
                    sey += w * ei * y;
                }
                let det = see * s1 - se * se;
                if det.abs() < 1e-300 {
                    (0.0, sy / s1)
                } else {
                    ((sey * s1 - se * sy) / det, (see * sy - se * sey) / det)
                }
            }
        };
        let chi2 = e
            .iter()
            .zip(self.values)
            .zip(&self.weights)
            .map(|((&ei, &y), &w)| w * (y - off - amp * ei).powi(2))
            .sum();
        (amp, off, chi2)
    }
}

/// Fit with the time constant profiled on a log grid and refined by golden section.
///
/// `errors` are one-sigma uncertainties; all zeros gives an unweighted fit.
pub fn fit_exp_decay(times: &[f64], values: &[f64], errors: &[f64], model: DecayModel) -> Result<DecayFit> {
    if times.len() != values.len() || times.len() != errors.len() {
        return Err(Error::DimensionMismatch("times, values and errors differ in length".into()));
    }
    let n_params = match model {
        DecayModel::Floor(_) => 2,
        DecayModel::FreeAsymptote => 3,
    };
    if times.len() < 3 || times.len() < n_params {
        return Err(Error::InsufficientData(format!("{} points; need at least 3", times.len())));
    }
    let unweighted = errors.iter().all(|&e| e == 0.0);
    if !unweighted && errors.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidArgument("errors must be all positive or all zero".into()));
    }
    let t_max = times.iter().copied().fold(f64::MIN, f64::max);
    let t_min = times.iter().copied().filter(|&t| t > 0.0).fold(f64::MAX, f64::min);
    if !(t_max > 0.0) || t_min == f64::MAX {
        return Err(Error::InsufficientData("need at least one positive time".into()));
    }
    let p = Problem {
        times,
        values,
        weights: errors.iter().map(|&e| if unweighted { 1.0 } else { 1.0 / (e * e) }).collect(),
        model,
    };
    let (lo, hi) = ((t_min / 100.0).ln(), (t_max * 100.0).ln());
    let steps = 400;
    let grid: Vec<f64> = (0..=steps).map(|i| lo + (hi - lo) * i as f64 / steps as f64).collect();
    let chis: Vec<f64> = grid.iter().map(|&u| p.profile(u.exp()).2).collect();
    let best = (0..grid.len()).min_by(|&a, &b| chis[a].total_cmp(&chis[b])).unwrap_or(0);
    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(steps)];
    let (u, chi2) = golden_section(|u| p.profile(u.exp()).2, a, b, 1e-10);
    let t = u.exp();
    let (amplitude, offset, _) = p.profile(t);

    let dof = (times.len() as f64 - n_params as f64).max(1.0);
    let s2 = if unweighted { (chi2 / dof).max(1e-300) } else { 1.0 };
    let crossing = |delta: f64, toward: f64| -> f64 {
        let target = chi2 + delta * s2;
        if p.profile(toward.exp()).2 < target {
            return toward.exp();
        }
        let (mut inner, mut outer) = (u, toward);
        for _ in 0..200 {
            let mid = 0.5 * (inner + outer);
            if p.profile(mid.exp()).2 < target {
                inner = mid;
            } else {
                outer = mid;
            }
        }
        (0.5 * (inner + outer)).exp()
    };
    let (l1, h1) = (crossing(1.0, lo), crossing(1.0, hi));
    let t_ci = (crossing(3.841_458_820_694_124, lo), crossing(3.841_458_820_694_124, hi));
    let at_edge = best == 0 || best == steps;
    let flat = chis.iter().copied().fold(f64::MIN, f64::max) - chi2 <= 1e-12 * (1.0 + chi2);
    let identifiable = !(at_edge || flat || amplitude == 0.0 || h1.ln() >= hi - 1e-9);
    Ok(DecayFit {
        model,
        t,
        t_err: 0.5 * (h1 - l1),
        t_ci,
        amplitude,
        offset,
        chi2,
        identifiable,
    })
}

/// Parametric bootstrap interval for the time constant: points are redrawn
/// around the fitted curve with their stated errors.
pub fn bootstrap_decay(
    times: &[f64],
    values: &[f64],
    errors: &[f64],
    model: DecayModel,
    n_resamples: usize,
    level: f64,
    rng: &RngStream,
) -> Result<(f64, f64)> {
    if n_resamples < 100 {
        return Err(Error::InvalidArgument(format!("{n_resamples} resamples; need at least 100")));
    }
    if errors.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidArgument("parametric bootstrap needs positive errors".into()));
    }
    let fit = fit_exp_decay(times, values, errors, model)?;
    let ts: Vec<f64> = (0..n_resamples)
        .into_par_iter()
        .map(|i| {
            let mut r = rng.substream(i as u64);
            let y: Vec<f64> = times
                .iter()
                .zip(errors)
                .map(|(&t, &e)| fit.predict(t) + Normal::new(0.0, e).expect("positive sigma").sample(&mut r))
                .collect();
            fit_exp_decay(times, &y, errors, model).map(|f| f.t)
        })
        .collect::<Result<_>>()?;
    Ok(percentile(&ts, level))
}
