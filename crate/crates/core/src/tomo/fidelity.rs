//! Fidelity to the closest maximally entangled or GHZ state.

use std::f64::consts::PI;

use rand::Rng;

use crate::fitstats::optim::nelder_mead;
use crate::qcore::{gates, make_target_state, tensor, CMatrix, DensityMatrix, RngStream};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntanglementKind {
    /// Two qubits: maximum over local unitaries of the overlap with `|Phi+>`.
    Bipartite,
    /// N qubits: maximum over local Z rotations of the overlap with GHZ.
    Ghz,
}

pub const BIPARTITE_RESTARTS: usize = 20;

/// Best fidelity with a maximal-entangled search result.
#[derive(Clone, Debug)]
pub struct EntanglementFidelity {
    pub fidelity: f64,
    /// Local Euler angles `(a1, b1, g1, a2, b2, g2)` for the bipartite search.
    pub angles: Option<Vec<f64>>,
    pub converged: bool,
}

/// `(rho_00 + rho_LL) / 2 + |rho_0L|` with `L = 2^N - 1`.
pub fn ghz_fidelity(rho: &CMatrix) -> f64 {
    let l = rho.nrows() - 1;
    0.5 * (rho[(0, 0)].re + rho[(l, l)].re) + rho[(0, l)].norm()
}

fn bell_overlap(rho: &CMatrix, x: &[f64]) -> f64 {
    let u = tensor(&gates::euler(x[0], x[1], x[2]), &gates::euler(x[3], x[4], x[5]));
    let phi = make_target_state(2, 0.0).expect("two-qubit target");
    let v = u.adjoint() * phi.amplitudes();
    v.dotc(&(rho * &v)).re
}

/// Multi-start Nelder–Mead over two sets of local Euler angles.
pub fn bipartite_fidelity(rho: &CMatrix) -> EntanglementFidelity {
    let mut rng = RngStream::new(0x6265_6c6c);
    let mut best: Option<(f64, Vec<f64>, bool)> = None;
    for k in 0..BIPARTITE_RESTARTS {
        let x0: Vec<f64> = if k == 0 {
            vec![0.0; 6]
        } else {
            (0..6).map(|_| rng.random_range(-PI..PI)).collect()
        };
        let m = nelder_mead(|x| -bell_overlap(rho, x), &x0, 0.4, 1e-13, 4000);
        if best.as_ref().is_none_or(|b| -m.value > b.0) {
            best = Some((-m.value, m.x, m.converged));
        }
    }
    let (fidelity, angles, converged) = best.expect("at least one restart");
    EntanglementFidelity {
        fidelity: fidelity.clamp(0.0, 1.0),
        angles: Some(angles),
        converged,
    }
}

pub fn entanglement_fidelity(rho: &DensityMatrix, kind: EntanglementKind) -> Result<EntanglementFidelity> {
    match kind {
        EntanglementKind::Bipartite => {
            if rho.n_qubits() != 2 {
                return Err(Error::DimensionMismatch(format!(
                    "bipartite fidelity needs 2 qubits, got {}",
                    rho.n_qubits()
                )));
            }
            let r = bipartite_fidelity(rho.matrix());
            if !r.converged {
                log::warn!("entanglement fidelity search did not converge; best value {}", r.fidelity);
            }
            Ok(r)
        }
        EntanglementKind::Ghz => {
            if rho.n_qubits() < 2 {
                return Err(Error::DimensionMismatch("GHZ fidelity needs at least 2 qubits".into()));
            }
            Ok(EntanglementFidelity {
                fidelity: ghz_fidelity(rho.matrix()),
                angles: None,
                converged: true,
            })
        }
    }
}
