//! Fringe and decay fits, bootstrap intervals.

mod bootstrap;
mod decay;
mod fringe;
pub mod optim;

pub use bootstrap::{binomial_se, bootstrap, percentile, BootstrapCi, DEFAULT_RESAMPLES, MIN_RESAMPLES};
pub use decay::{bootstrap_decay, fit_exp_decay, DecayFit, DecayModel};
pub use fringe::{fit_parity_fringe, FringeFit};
