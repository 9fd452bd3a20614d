//! Pauli error budget of the iSWAP used for network-to-auxiliary transfer.
//!
//! Errors after the ideal gate are grouped by their action on the transfer
//! (network qubit first, auxiliary second):
//!
//! * A: network unflipped (`I`, `Z`), auxiliary corrupted
//! * B: network flipped (`X`, `Y`), auxiliary corrupted
//! * C: network flipped, auxiliary untouched
//! * D: `Z (x) I`, invisible to both
//!
//! Four calibration targets fix the four class weights through a linear system.

use nalgebra::{Matrix4, Vector4};

use super::ReadoutErrorModel;
use crate::{Error, Result};

/// Measured figures the budget must reproduce.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IswapTargets {
    /// Average gate fidelity of the two-qubit iSWAP.
    pub gate_fidelity: f64,
    /// Average state fidelity of the plain transfer.
    pub transfer_fidelity: f64,
    /// Average state fidelity of the error-detected transfer, given acceptance.
    pub detected_transfer_fidelity: f64,
    /// Average abort probability of the error-detected transfer.
    pub detection_probability: f64,
    /// Auxiliary preparation error during the calibration.
    pub aux_prep_error: f64,
    /// Network-qubit readout.
    pub readout: ReadoutErrorModel,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IswapErrorBudget {
    pub w_a: f64,
    pub w_b: f64,
    pub w_c: f64,
    pub w_d: f64,
}

const I: usize = 0;
const X: usize = 1;
const Y: usize = 2;
const Z: usize = 3;

impl IswapErrorBudget {
    pub fn solve(t: &IswapTargets) -> Result<Self> {
        let eps = t.aux_prep_error;
        let g = t.readout.likelihood(0, 0);
        let b = t.readout.likelihood(0, 1);
        // per class (identity, A, B, C, D): network flipped?, and transfer fidelity
        // with a clean auxiliary / with the auxiliary prepared in |1>. A mis-prepared
        // auxiliary leaves Z|psi> on the auxiliary and |1> on the network qubit.
        let classes = [
            (false, 1.0, 1.0 / 3.0),
            (false, 1.0 / 3.0, 5.0 / 9.0),
            (true, 1.0 / 3.0, 5.0 / 9.0),
            (true, 1.0, 1.0 / 3.0),
            (false, 1.0, 1.0 / 3.0),
        ];
        let report0 = |flipped: bool| if flipped { (b, g) } else { (g, b) };
        let plain: Vec<f64> = classes.iter().map(|&(_, f0, f1)| (1.0 - eps) * f0 + eps * f1).collect();
        let accept: Vec<f64> = classes
            .iter()
            .map(|&(fl, _, _)| {
                let (r0, r1) = report0(fl);
                (1.0 - eps) * r0 + eps * r1
            })
            .collect();
        let good: Vec<f64> = classes
            .iter()
            .map(|&(fl, f0, f1)| {
                let (r0, r1) = report0(fl);
                (1.0 - eps) * r0 * f0 + eps * r1 * f1
            })
            .collect();
        let row = |v: &[f64]| [v[1] - v[0], v[2] - v[0], v[3] - v[0], v[4] - v[0]];
        let (rp, ra, rg) = (row(&plain), row(&accept), row(&good));
        let m = Matrix4::new(
            1.0, 1.0, 1.0, 1.0,
            rp[0], rp[1], rp[2], rp[3],
            ra[0], ra[1], ra[2], ra[3],
            rg[0], rg[1], rg[2], rg[3],
        );
        let accepted = 1.0 - t.detection_probability;
        let rhs = Vector4::new(
            1.25 * (1.0 - t.gate_fidelity),
            t.transfer_fidelity - plain[0],
            accepted - accept[0],
            t.detected_transfer_fidelity * accepted - good[0],
        );
        let w = m
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::InvalidArgument("singular iSWAP calibration system".into()))?;
        if w.iter().any(|&x| x < -1e-12) || w.sum() > 1.0 {
            return Err(Error::InvalidArgument(format!(
                "iSWAP calibration targets are inconsistent with a Pauli error model (weights {:?})",
                w.as_slice()
            )));
        }
        Ok(Self {
            w_a: w[0].max(0.0),
            w_b: w[1].max(0.0),
            w_c: w[2].max(0.0),
            w_d: w[3].max(0.0),
        })
    }

    pub fn total(&self) -> f64 {
        self.w_a + self.w_b + self.w_c + self.w_d
    }

    /// Probabilities of the 16 two-qubit Pauli strings (network digit most significant).
    pub fn pauli_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; 16];
        let idx = |n: usize, x: usize| 4 * n + x;
        w[idx(I, I)] = 1.0 - self.total();
        for x in [X, Y, Z] {
            for n in [I, Z] {
                w[idx(n, x)] += self.w_a / 6.0;
            }
            for n in [X, Y] {
                w[idx(n, x)] += self.w_b / 6.0;
            }
        }
        for n in [X, Y] {
            w[idx(n, I)] += self.w_c / 2.0;
        }
        w[idx(Z, I)] += self.w_d;
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{apply_gate, apply_rotation, prepare_with, GateSpec, ModuleModel, NoiseKind, PrepErrorModel, SimClock};
    use crate::qcore::{c, fidelity_to_pure, gates, CVector, DensityMatrix, Node, PureState, QubitRole};
    use approx::assert_abs_diff_eq;

    fn alice_targets() -> IswapTargets {
        IswapTargets {
            gate_fidelity: 0.959,
            transfer_fidelity: 0.978,
            detected_transfer_fidelity: 0.990,
            detection_probability: 0.028,
            aux_prep_error: 3.1e-3,
            readout: ReadoutErrorModel::new(0.534e-3, 0.534e-3).unwrap(),
        }
    }

    fn octahedron() -> Vec<PureState> {
        let h = 0.5f64.sqrt();
        [
            (c(1., 0.), c(0., 0.)),
            (c(0., 0.), c(1., 0.)),
            (c(h, 0.), c(h, 0.)),
            (c(h, 0.), c(-h, 0.)),
            (c(h, 0.), c(0., h)),
            (c(h, 0.), c(0., -h)),
        ]
        .into_iter()
        .map(|(a, b)| PureState::new(CVector::from_vec(vec![a, b])).unwrap())
        .collect()
    }

    /// Transfer through the register simulator; octahedron states form a
    /// 2-design so plain averages are Haar averages.
    fn simulate(budget: &IswapErrorBudget, t: &IswapTargets) -> (f64, f64, f64, f64) {
        let mut m = ModuleModel::ideal(Node::Alice);
        m.readout.network = t.readout;
        let gate = GateSpec::new("iswap", gates::iswap(), 0.0, t.gate_fidelity, NoiseKind::PauliAfter(budget.pauli_weights())).unwrap();
        m.gates.insert("iswap".into(), gate);
        let mut clock = SimClock::new();
        let (mut plain, mut ed, mut accept_sum) = (0.0, 0.0, 0.0);
        let states = octahedron();
        for psi in &states {
            let n = DensityMatrix::pure(psi, vec![m.label(QubitRole::Network)]).unwrap();
            let aux = prepare_with(&m, QubitRole::Auxiliary, PrepErrorModel { eps: t.aux_prep_error });
            let reg = n.tensor(&aux);
            let reg = apply_gate(&reg, &m, "iswap", &[QubitRole::Network, QubitRole::Auxiliary], &mut clock).unwrap();
            let reg = apply_rotation(&reg, &m, QubitRole::Auxiliary, &crate::device::transfer_phase_correction(), &mut clock).unwrap();
            let out = crate::device::discard(&reg, &m, QubitRole::Network).unwrap();
            plain += fidelity_to_pure(&out, psi).unwrap();
            // condition on reporting 0 with the readout POVM
            let eff = t.readout.effect(0).kronecker(&gates::identity(2));
            let cond = crate::qcore::state::partial_trace_matrix(&(&eff * reg.matrix()), 2, &[1]);
            let tr = cond.trace().re;
            accept_sum += tr;
            ed += (psi.amplitudes().adjoint() * &cond * psi.amplitudes())[(0, 0)].re / tr;
        }
        let k = states.len() as f64;
        let noisy = m.gate("iswap").unwrap().noisy_channel().unwrap();
        let u = gates::iswap();
        let fe: f64 = noisy.kraus().iter().map(|k| (u.adjoint() * k).trace().norm_sqr()).sum::<f64>() / 16.0;
        let gate_f = (4.0 * fe + 1.0) / 5.0;
        (gate_f, plain / k, ed / k, 1.0 - accept_sum / k)
    }

    #[test]
    fn solved_budget_reproduces_alice_targets() {
        let t = alice_targets();
        let b = IswapErrorBudget::solve(&t).unwrap();
        assert!(b.total() > 0.0 && b.total() < 0.06);
        let (g, p, e, d) = simulate(&b, &t);
        assert_abs_diff_eq!(g, 0.959, epsilon = 1e-12);
        assert_abs_diff_eq!(p, 0.978, epsilon = 1e-12);
        assert_abs_diff_eq!(e, 0.990, epsilon = 1e-12);
        assert_abs_diff_eq!(d, 0.028, epsilon = 1e-12);
    }

    #[test]
    fn solved_budget_reproduces_bob_targets() {
        let t = IswapTargets {
            gate_fidelity: 0.960,
            transfer_fidelity: 0.979,
            detected_transfer_fidelity: 0.990,
            detection_probability: 0.022,
            aux_prep_error: 3.8e-3,
            readout: ReadoutErrorModel::new(0.543e-3, 0.543e-3).unwrap(),
        };
        let b = IswapErrorBudget::solve(&t).unwrap();
        let (g, p, e, d) = simulate(&b, &t);
        assert_abs_diff_eq!(g, 0.960, epsilon = 1e-12);
        assert_abs_diff_eq!(p, 0.979, epsilon = 1e-12);
        assert_abs_diff_eq!(e, 0.990, epsilon = 1e-12);
        assert_abs_diff_eq!(d, 0.022, epsilon = 1e-12);
    }

    #[test]
    fn inconsistent_targets_rejected() {
        let mut t = alice_targets();
        t.detected_transfer_fidelity = 0.9999;
        assert!(IswapErrorBudget::solve(&t).is_err());
    }

    #[test]
    fn weights_form_distribution() {
        let b = IswapErrorBudget::solve(&alice_targets()).unwrap();
        let w = b.pauli_weights();
        assert_abs_diff_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
        assert!(w.iter().all(|&x| x >= 0.0));
    }
}
