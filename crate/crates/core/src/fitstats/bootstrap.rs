//! Shot-level bootstrap and binomial errors.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::qcore::RngStream;
use crate::{Error, Result};

pub const MIN_RESAMPLES: usize = 100;
pub const DEFAULT_RESAMPLES: usize = 200;

#[derive(Clone, Debug, Serialize)]
pub struct BootstrapCi {
    /// Statistic on the original sample.
    pub estimate: f64,
    pub mean: f64,
    pub std: f64,
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
    pub n_resamples: usize,
}

/// Two-sided percentile interval at `level` from unsorted samples.
pub fn percentile(samples: &[f64], level: f64) -> (f64, f64) {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let pos = p * (s.len() - 1) as f64;
        let (i, frac) = (pos.floor() as usize, pos.fract());
        if i + 1 < s.len() {
            s[i] * (1.0 - frac) + s[i + 1] * frac
        } else {
            s[i]
        }
    };
    let tail = 0.5 * (1.0 - level);
    (q(tail), q(1.0 - tail))
}

/// Percentile bootstrap of `statistic` over resamples of `items` with replacement.
/// Resample `i` draws from `rng.substream(i)`, so results do not depend on thread count.
pub fn bootstrap<T, F>(items: &[T], statistic: F, n_resamples: usize, level: f64, rng: &RngStream) -> Result<BootstrapCi>
where
    T: Clone + Sync,
    F: Fn(&[T]) -> Result<f64> + Sync,
{
    if items.is_empty() {
        return Err(Error::InsufficientData("bootstrap over no records".into()));
    }
    if n_resamples < MIN_RESAMPLES {
        return Err(Error::InvalidArgument(format!(
            "{n_resamples} resamples; need at least {MIN_RESAMPLES}"
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!("confidence level {level} outside (0, 1)")));
    }
    let estimate = statistic(items)?;
    let n = items.len();
    let samples: Vec<f64> = (0..n_resamples)
        .into_par_iter()
        .map(|i| {
            let mut r = rng.substream(i as u64);
            let draw: Vec<T> = (0..n).map(|_| items[r.random_range(0..n)].clone()).collect();
            statistic(&draw)
        })
        .collect::<Result<_>>()?;
    let mean = samples.iter().sum::<f64>() / n_resamples as f64;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n_resamples - 1) as f64;
    let (lo, hi) = percentile(&samples, level);
    Ok(BootstrapCi {
        estimate,
        mean,
        std: var.sqrt(),
        lo,
        hi,
        level,
        n_resamples,
    })
}

/// Standard error of a proportion.
pub fn binomial_se(p: f64, n: usize) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    (p * (1.0 - p) / n as f64).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean(x: &[f64]) -> Result<f64> {
        Ok(x.iter().sum::<f64>() / x.len() as f64)
    }

    #[test]
    fn constant_data_has_zero_width() {
        let ci = bootstrap(&[0.7; 50], mean, 200, 0.95, &RngStream::new(1)).unwrap();
        assert_eq!(ci.hi - ci.lo, 0.0);
        assert!((ci.lo - 0.7).abs() < 1e-12);
    }

    #[test]
    fn binomial_width() {
        let data: Vec<f64> = (0..1000).map(|i| (i % 2) as f64).collect();
        let ci = bootstrap(&data, mean, 2000, 0.95, &RngStream::new(2)).unwrap();
        let want = 2.0 * 1.96 * (0.25f64 / 1000.0).sqrt();
        assert!(((ci.hi - ci.lo) / want - 1.0).abs() < 0.1, "{} vs {want}", ci.hi - ci.lo);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(bootstrap(&[] as &[f64], mean, 200, 0.95, &RngStream::new(0)).is_err());
        assert!(bootstrap(&[1.0], mean, 50, 0.95, &RngStream::new(0)).is_err());
    }

    #[test]
    fn percentile_interpolates() {
        let (lo, hi) = percentile(&[4.0, 1.0, 3.0, 2.0, 5.0], 0.5);
        assert_eq!((lo, hi), (2.0, 4.0));
    }
}
