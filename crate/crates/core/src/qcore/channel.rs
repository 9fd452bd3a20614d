use super::state::{c, gates, hermitian_eigenvalues, n_qubits_of, CMatrix, DensityMatrix, C64};
use crate::{Error, Result};

const TP_TOL: f64 = 1e-9;

/// Completely positive map in operator-sum form.
#[derive(Clone, Debug)]
pub struct QuantumChannel {
    kraus: Vec<CMatrix>,
    trace_preserving: bool,
}

impl QuantumChannel {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidArgument("channel needs at least one Kraus operator".into()))?;
        let (d_out, d_in) = first.shape();
        if kraus.iter().any(|k| k.shape() != (d_out, d_in)) {
            return Err(Error::DimensionMismatch("Kraus operators differ in shape".into()));
        }
        let mut sum = CMatrix::zeros(d_in, d_in);
        for k in &kraus {
            sum += k.adjoint() * k;
        }
        let id = CMatrix::identity(d_in, d_in);
        let trace_preserving = (&sum - &id).camax() < TP_TOL;
        if !trace_preserving {
            // must still be trace non-increasing
            let top = hermitian_eigenvalues(&sum).last().copied().unwrap_or(0.0);
            if top > 1.0 + TP_TOL {
                return Err(Error::NotPhysical(format!(
                    "sum K^dag K has eigenvalue {top} > 1"
                )));
            }
        }
        Ok(Self {
            kraus,
            trace_preserving,
        })
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    pub fn dim_in(&self) -> usize {
        self.kraus[0].ncols()
    }

    pub fn dim_out(&self) -> usize {
        self.kraus[0].nrows()
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            kraus: vec![CMatrix::identity(dim, dim)],
            trace_preserving: true,
        }
    }

    pub fn unitary(u: CMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    /// `rho -> (1-p) rho + p I/d` on `n` qubits.
    pub fn depolarizing(n: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0 + 1.0 / ((1usize << (2 * n)) as f64 - 1.0)).contains(&p) {
            return Err(Error::InvalidArgument(format!("depolarizing probability {p} out of range")));
        }
        let npaulis = 1usize << (2 * n);
        let mut weights = vec![p / npaulis as f64; npaulis];
        weights[0] += 1.0 - p;
        Self::pauli(n, &weights)
    }

    /// Pauli channel; `weights[k]` is the probability of the Pauli string whose
    /// base-4 digits (first qubit most significant) are I=0, X=1, Y=2, Z=3.
    pub fn pauli(n: usize, weights: &[f64]) -> Result<Self> {
        let npaulis = 1usize << (2 * n);
        if weights.len() != npaulis {
            return Err(Error::DimensionMismatch(format!(
                "{} Pauli weights for {n} qubits",
                weights.len()
            )));
        }
        if weights.iter().any(|&w| w < -1e-15) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument("Pauli weights must be a probability vector".into()));
        }
        let kraus = weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(k, &w)| pauli_string(n, k).scale(w.sqrt()))
            .collect();
        Self::new(kraus)
    }

    /// Phase damping that multiplies off-diagonal elements by `coherence`.
    pub fn dephasing(coherence: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&coherence) {
            return Err(Error::InvalidArgument(format!("coherence factor {coherence} out of range")));
        }
        let pz = (1.0 - coherence) / 2.0;
        Self::pauli(1, &[1.0 - pz, 0.0, 0.0, pz])
    }

    /// Decay |1> -> |0> with probability `gamma`.
    pub fn amplitude_damping(gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidArgument(format!("damping {gamma} out of range")));
        }
        let k0 = CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c((1.0 - gamma).sqrt(), 0.)]);
        let k1 = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(gamma.sqrt(), 0.), c(0., 0.), c(0., 0.)]);
        Self::new(vec![k0, k1])
    }

    /// `other` applied after `self`.
    pub fn then(&self, other: &QuantumChannel) -> Result<QuantumChannel> {
        if self.dim_out() != other.dim_in() {
            return Err(Error::DimensionMismatch("channel composition".into()));
        }
        let kraus = other
            .kraus
            .iter()
            .flat_map(|b| self.kraus.iter().map(move |a| b * a))
            .collect();
        QuantumChannel::new(kraus)
    }

    /// Apply to a full matrix on the channel's own space.
    pub fn apply_matrix(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim_out(), self.dim_out());
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        out
    }
}

/// Pauli string number `k` on `n` qubits.
pub fn pauli_string(n: usize, k: usize) -> CMatrix {
    (0..n).fold(CMatrix::identity(1, 1), |acc, q| {
        let digit = (k >> (2 * (n - 1 - q))) & 3;
        acc.kronecker(&gates::pauli(digit))
    })
}

/// Lift an operator on `targets` to the full `n`-qubit register.
pub fn embed(op: &CMatrix, targets: &[usize], n: usize) -> Result<CMatrix> {
    let k = targets.len();
    if op.nrows() != 1 << k || op.ncols() != 1 << k {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator on {k} targets",
            op.nrows(),
            op.ncols()
        )));
    }
    for (i, &t) in targets.iter().enumerate() {
        if t >= n || targets[..i].contains(&t) {
            return Err(Error::InvalidArgument(format!("bad target list {targets:?}")));
        }
    }
    let dim = 1usize << n;
    let mask: usize = targets.iter().map(|&t| 1usize << (n - 1 - t)).sum();
    let sub = |i: usize| -> usize {
        targets
            .iter()
            .fold(0usize, |acc, &t| (acc << 1) | ((i >> (n - 1 - t)) & 1))
    };
    let subs: Vec<usize> = (0..dim).map(sub).collect();
    Ok(CMatrix::from_fn(dim, dim, |r, cc| {
        if (r & !mask) == (cc & !mask) {
            op[(subs[r], subs[cc])]
        } else {
            C64::new(0.0, 0.0)
        }
    }))
}

/// `rho <- sum_k K rho K^dag` on the listed register positions.
pub fn apply_channel(rho: &DensityMatrix, ch: &QuantumChannel, targets: &[usize]) -> Result<DensityMatrix> {
    if ch.dim_in() != ch.dim_out() {
        return Err(Error::DimensionMismatch(
            "register-level application needs a square channel".into(),
        ));
    }
    if n_qubits_of(ch.dim_in())? != targets.len() {
        return Err(Error::DimensionMismatch(format!(
            "channel on {} qubits applied to {} targets",
            n_qubits_of(ch.dim_in())?,
            targets.len()
        )));
    }
    let n = rho.n_qubits();
    let mut out = CMatrix::zeros(rho.dim(), rho.dim());
    for k in ch.kraus() {
        let full = embed(k, targets, n)?;
        out += &full * rho.matrix() * full.adjoint();
    }
    let mut next = rho.clone();
    next.set_matrix(out, !ch.is_trace_preserving());
    Ok(next)
}

/// Unitary on the listed register positions.
pub fn apply_unitary(rho: &DensityMatrix, u: &CMatrix, targets: &[usize]) -> Result<DensityMatrix> {
    let full = embed(u, targets, rho.n_qubits())?;
    let mut next = rho.clone();
    next.set_matrix(&full * rho.matrix() * full.adjoint(), false);
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::state::{partial_trace, tensor, QubitLabel};
    use approx::assert_abs_diff_eq;

    fn labels(n: usize) -> Vec<QubitLabel> {
        (0..n).map(QubitLabel::Index).collect()
    }

    #[test]
    fn identity_channel_is_noop() {
        let rho = DensityMatrix::basis(&[1, 0], labels(2)).unwrap();
        let out = apply_channel(&rho, &QuantumChannel::identity(2), &[1]).unwrap();
        assert_eq!(out.matrix(), rho.matrix());
    }

    #[test]
    fn full_depolarizing_gives_mixed() {
        let rho = DensityMatrix::basis(&[0], labels(1)).unwrap();
        let ch = QuantumChannel::depolarizing(1, 1.0).unwrap();
        let out = apply_channel(&rho, &ch, &[0]).unwrap();
        assert_abs_diff_eq!((out.matrix() - CMatrix::identity(2, 2).scale(0.5)).norm(), 0.0, epsilon = 1e-15);
        assert!(ch.is_trace_preserving());
    }

    #[test]
    fn cnot_truth_table_through_embed() {
        let rho = DensityMatrix::basis(&[1, 0, 0], labels(3)).unwrap();
        // control qubit 0, target qubit 2
        let out = apply_unitary(&rho, &gates::cnot(), &[0, 2]).unwrap();
        assert_eq!(out.matrix(), DensityMatrix::basis(&[1, 0, 1], labels(3)).unwrap().matrix());
        // reversed target order makes qubit 2 the control
        let out = apply_unitary(&rho, &gates::cnot(), &[2, 0]).unwrap();
        assert_eq!(out.matrix(), rho.matrix());
    }

    #[test]
    fn composition_of_dephasing_multiplies_coherence() {
        let a = QuantumChannel::dephasing(0.8).unwrap();
        let b = QuantumChannel::dephasing(0.5).unwrap();
        let ab = a.then(&b).unwrap();
        let plus = CMatrix::from_element(2, 2, c(0.5, 0.0));
        let out = ab.apply_matrix(&plus);
        assert_abs_diff_eq!(out[(0, 1)].re, 0.5 * 0.4, epsilon = 1e-15);
    }

    #[test]
    fn non_tp_channel_flags_output() {
        let proj = CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]);
        let ch = QuantumChannel::new(vec![proj]).unwrap();
        assert!(!ch.is_trace_preserving());
        let rho = DensityMatrix::maximally_mixed(labels(1));
        let out = apply_channel(&rho, &ch, &[0]).unwrap();
        assert!(out.is_subnormalized());
        assert_abs_diff_eq!(out.trace(), 0.5, epsilon = 1e-15);
        let too_big = CMatrix::identity(2, 2).scale(1.1);
        assert!(QuantumChannel::new(vec![too_big]).is_err());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let rho = DensityMatrix::maximally_mixed(labels(2));
        let ch = QuantumChannel::depolarizing(2, 0.1).unwrap();
        assert!(matches!(apply_channel(&rho, &ch, &[0]), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn local_channel_commutes_with_partial_trace() {
        let a = DensityMatrix::basis(&[0], labels(1)).unwrap();
        let b = DensityMatrix::maximally_mixed(labels(1));
        let ab = a.tensor(&b);
        let ch = QuantumChannel::amplitude_damping(0.3).unwrap();
        let out = apply_channel(&ab, &ch, &[1]).unwrap();
        let red = partial_trace(&out, &[0]).unwrap();
        assert_abs_diff_eq!((red.matrix() - a.matrix()).norm(), 0.0, epsilon = 1e-15);
        let _ = tensor(a.matrix(), b.matrix());
    }
}
