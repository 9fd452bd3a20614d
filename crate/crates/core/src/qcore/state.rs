use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::rng::RngStream;
use crate::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const EIGEN_TOL: f64 = -1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Node {
    Alice,
    Bob,
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Alice => f.write_str("alice"),
            Node::Bob => f.write_str("bob"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QubitRole {
    Network,
    Circuit,
    Auxiliary,
}

impl fmt::Display for QubitRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QubitRole::Network => f.write_str("network"),
            QubitRole::Circuit => f.write_str("circuit"),
            QubitRole::Auxiliary => f.write_str("auxiliary"),
        }
    }
}

/// Tag for one qubit of a register.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QubitLabel {
    Site { node: Node, role: QubitRole },
    Index(usize),
}

impl QubitLabel {
    pub fn site(node: Node, role: QubitRole) -> Self {
        QubitLabel::Site { node, role }
    }
}

impl fmt::Display for QubitLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QubitLabel::Site { node, role } => write!(f, "{node}.{role}"),
            QubitLabel::Index(i) => write!(f, "q{i}"),
        }
    }
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Kronecker product; `a`'s qubits come first.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn trace(m: &CMatrix) -> C64 {
    m.trace()
}

pub fn is_unitary(u: &CMatrix, tol: f64) -> bool {
    if !u.is_square() {
        return false;
    }
    let prod = u.adjoint() * u;
    (prod - CMatrix::identity(u.nrows(), u.nrows())).norm() < tol
}

pub fn hermitian_defect(m: &CMatrix) -> f64 {
    (m - m.adjoint()).camax()
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()).scale(0.5);
    let mut ev: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

pub(crate) fn n_qubits_of(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::DimensionMismatch(format!(
            "dimension {dim} is not a power of two"
        )));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Positive-semidefinite, unit-trace operator over an ordered qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    data: CMatrix,
    labels: Vec<QubitLabel>,
    subnormalized: bool,
}

impl DensityMatrix {
    /// Validating constructor.
    pub fn new(data: CMatrix, labels: Vec<QubitLabel>) -> Result<Self> {
        let rho = Self::from_parts(data, labels)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Register of anonymous qubits `q0..qn`.
    pub fn from_matrix(data: CMatrix) -> Result<Self> {
        let n = n_qubits_of(data.nrows())?;
        Self::new(data, (0..n).map(QubitLabel::Index).collect())
    }

    pub(crate) fn from_parts(data: CMatrix, labels: Vec<QubitLabel>) -> Result<Self> {
        if !data.is_square() {
            return Err(Error::DimensionMismatch("density matrix must be square".into()));
        }
        let n = n_qubits_of(data.nrows())?;
        if n != labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for a {}-qubit matrix",
                labels.len(),
                n
            )));
        }
        Ok(Self {
            data,
            labels,
            subnormalized: false,
        })
    }

    pub fn pure(psi: &PureState, labels: Vec<QubitLabel>) -> Result<Self> {
        let v = &psi.amplitudes;
        Self::new(v * v.adjoint(), labels)
    }

    pub fn basis(bits: &[u8], labels: Vec<QubitLabel>) -> Result<Self> {
        let dim = 1usize << bits.len();
        let idx = bits.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b & 1));
        let mut m = CMatrix::zeros(dim, dim);
        m[(idx, idx)] = c(1.0, 0.0);
        Self::new(m, labels)
    }

    pub fn maximally_mixed(labels: Vec<QubitLabel>) -> Self {
        let dim = 1usize << labels.len();
        let m = CMatrix::identity(dim, dim).scale(1.0 / dim as f64);
        Self {
            data: m,
            labels,
            subnormalized: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let h = hermitian_defect(&self.data);
        if h > HERMITIAN_TOL {
            return Err(Error::NotPhysical(format!("non-Hermitian by {h:e}")));
        }
        let tr = self.data.trace();
        if !self.subnormalized && ((tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL) {
            return Err(Error::NotPhysical(format!("trace {tr} != 1")));
        }
        let min_ev = hermitian_eigenvalues(&self.data)[0];
        if min_ev < EIGEN_TOL {
            return Err(Error::NotPhysical(format!("negative eigenvalue {min_ev:e}")));
        }
        Ok(())
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    pub fn labels(&self) -> &[QubitLabel] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn trace(&self) -> f64 {
        self.data.trace().re
    }

    /// True when produced by a non-trace-preserving map.
    pub fn is_subnormalized(&self) -> bool {
        self.subnormalized
    }

    pub(crate) fn set_matrix(&mut self, m: CMatrix, subnormalized: bool) {
        self.data = m;
        self.subnormalized |= subnormalized;
    }

    /// Rescale to unit trace and clear the sub-normalized flag.
    pub fn renormalize(&mut self) -> Result<f64> {
        let tr = self.trace();
        if tr <= 0.0 {
            return Err(Error::NotPhysical("cannot renormalize a zero-trace operator".into()));
        }
        self.data.unscale_mut(tr);
        self.subnormalized = false;
        Ok(tr)
    }

    pub fn position(&self, label: QubitLabel) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| *l == label)
            .ok_or_else(|| Error::MissingQubit(label.to_string()))
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        DensityMatrix {
            data: tensor(&self.data, &other.data),
            labels,
            subnormalized: self.subnormalized || other.subnormalized,
        }
    }

    /// Population of computational basis state `idx`.
    pub fn population(&self, idx: usize) -> f64 {
        self.data[(idx, idx)].re
    }

    pub fn relabel(&mut self, labels: Vec<QubitLabel>) -> Result<()> {
        if labels.len() != self.labels.len() {
            return Err(Error::DimensionMismatch("relabel length".into()));
        }
        self.labels = labels;
        Ok(())
    }

    /// Reorder qubits so that `order[k]` (an old position) becomes position `k`.
    pub fn permute(&self, order: &[usize]) -> Result<DensityMatrix> {
        let n = self.n_qubits();
        let mut seen = vec![false; n];
        if order.len() != n || order.iter().any(|&q| q >= n || std::mem::replace(&mut seen[q], true)) {
            return Err(Error::InvalidArgument("permutation must list every qubit once".into()));
        }
        let dim = self.dim();
        let map = |i: usize| -> usize {
            // new index -> old index
            let mut old = 0usize;
            for (k, &q) in order.iter().enumerate() {
                let bit = (i >> (n - 1 - k)) & 1;
                old |= bit << (n - 1 - q);
            }
            old
        };
        let idx: Vec<usize> = (0..dim).map(map).collect();
        let data = CMatrix::from_fn(dim, dim, |r, c| self.data[(idx[r], idx[c])]);
        Ok(DensityMatrix {
            data,
            labels: order.iter().map(|&q| self.labels[q]).collect(),
            subnormalized: self.subnormalized,
        })
    }
}

/// Reduced state on `keep` (positions, returned in register order).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::InvalidArgument("partial trace must keep at least one qubit".into()));
    }
    let n = rho.n_qubits();
    let mut keep_sorted: Vec<usize> = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.iter().any(|&q| q >= n) {
        return Err(Error::InvalidArgument(format!("keep set {keep:?} outside {n}-qubit register")));
    }
    let m = partial_trace_matrix(rho.matrix(), n, &keep_sorted);
    let labels = keep_sorted.iter().map(|&q| rho.labels[q]).collect();
    Ok(DensityMatrix {
        data: m,
        labels,
        subnormalized: rho.subnormalized,
    })
}

pub(crate) fn partial_trace_matrix(m: &CMatrix, n: usize, keep_sorted: &[usize]) -> CMatrix {
    let k = keep_sorted.len();
    let traced: Vec<usize> = (0..n).filter(|q| !keep_sorted.contains(q)).collect();
    let dk = 1usize << k;
    let dt = 1usize << traced.len();
    let compose = |kept: usize, tr: usize| -> usize {
        let mut idx = 0usize;
        for (p, &q) in keep_sorted.iter().enumerate() {
            idx |= ((kept >> (k - 1 - p)) & 1) << (n - 1 - q);
        }
        for (p, &q) in traced.iter().enumerate() {
            idx |= ((tr >> (traced.len() - 1 - p)) & 1) << (n - 1 - q);
        }
        idx
    };
    let mut out = CMatrix::zeros(dk, dk);
    for r in 0..dk {
        for cc in 0..dk {
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..dt {
                acc += m[(compose(r, t), compose(cc, t))];
            }
            out[(r, cc)] = acc;
        }
    }
    out
}

/// Unit-norm state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotPhysical(format!("state norm {norm} != 1")));
        }
        n_qubits_of(amplitudes.len())?;
        Ok(Self { amplitudes })
    }

    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 {
            return Err(Error::NotPhysical("zero vector".into()));
        }
        Self::new(amplitudes.unscale(norm))
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn projector(&self) -> CMatrix {
        &self.amplitudes * self.amplitudes.adjoint()
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }
}

/// `<psi|rho|psi>`.
pub fn fidelity_to_pure(rho: &DensityMatrix, psi: &PureState) -> Result<f64> {
    if rho.dim() != psi.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dim {} vs target dim {}",
            rho.dim(),
            psi.dim()
        )));
    }
    let v = &psi.amplitudes;
    let f = v.dotc(&(rho.matrix() * v)).re;
    Ok(f.clamp(0.0, 1.0))
}

/// Haar-random pure state: complex Gaussian vector, normalized.
pub fn haar_sample(dim: usize, rng: &mut RngStream) -> Result<PureState> {
    if dim < 2 {
        return Err(Error::InvalidArgument("Haar sampling needs dim >= 2".into()));
    }
    let v = CVector::from_fn(dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    });
    PureState::normalized(v)
}

/// `(|0...0> + e^{i phi}|1...1>)/sqrt(2)` on `n` qubits.
pub fn make_target_state(n: usize, phi: f64) -> Result<PureState> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("target state needs n >= 2, got {n}")));
    }
    if n > 16 {
        return Err(Error::InvalidArgument("register too large".into()));
    }
    let dim = 1usize << n;
    let mut v = CVector::zeros(dim);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    v[0] = c(s, 0.0);
    v[dim - 1] = C64::from_polar(s, phi);
    PureState::new(v)
}

pub mod gates {
    //! Common single- and two-qubit unitaries.
    use super::{c, CMatrix};
    use std::f64::consts::FRAC_1_SQRT_2;

    pub fn identity(dim: usize) -> CMatrix {
        CMatrix::identity(dim, dim)
    }

    pub fn x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
    }

    pub fn y() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
    }

    pub fn z() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
    }

    pub fn h() -> CMatrix {
        CMatrix::from_row_slice(
            2,
            2,
            &[c(FRAC_1_SQRT_2, 0.), c(FRAC_1_SQRT_2, 0.), c(FRAC_1_SQRT_2, 0.), c(-FRAC_1_SQRT_2, 0.)],
        )
    }

    /// diag(1, i).
    pub fn s() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(0., 1.)])
    }

    pub fn pauli(k: usize) -> CMatrix {
        match k & 3 {
            0 => identity(2),
            1 => x(),
            2 => y(),
            _ => z(),
        }
    }

    /// Rotation by `theta` about the equatorial axis at azimuth `axis_phase`:
    /// exp(-i theta/2 (cos a X + sin a Y)).
    pub fn r_phi(axis_phase: f64, theta: f64) -> CMatrix {
        let (s, co) = (theta / 2.0).sin_cos();
        let e_m = c(axis_phase.cos(), -axis_phase.sin());
        let e_p = c(axis_phase.cos(), axis_phase.sin());
        CMatrix::from_row_slice(
            2,
            2,
            &[c(co, 0.), c(0., -s) * e_m, c(0., -s) * e_p, c(co, 0.)],
        )
    }

    pub fn rx(theta: f64) -> CMatrix {
        r_phi(0.0, theta)
    }

    pub fn ry(theta: f64) -> CMatrix {
        r_phi(std::f64::consts::FRAC_PI_2, theta)
    }

    pub fn rz(theta: f64) -> CMatrix {
        let (s, co) = (theta / 2.0).sin_cos();
        CMatrix::from_row_slice(2, 2, &[c(co, -s), c(0., 0.), c(0., 0.), c(co, s)])
    }

    /// Control on the first qubit.
    pub fn cnot() -> CMatrix {
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = c(1., 0.);
        m[(1, 1)] = c(1., 0.);
        m[(2, 3)] = c(1., 0.);
        m[(3, 2)] = c(1., 0.);
        m
    }

    pub fn iswap() -> CMatrix {
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = c(1., 0.);
        m[(1, 2)] = c(0., 1.);
        m[(2, 1)] = c(0., 1.);
        m[(3, 3)] = c(1., 0.);
        m
    }

    /// ZYZ Euler rotation.
    pub fn euler(a: f64, b: f64, g: f64) -> CMatrix {
        rz(a) * ry(b) * rz(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn phi_plus() -> PureState {
        make_target_state(2, 0.0).unwrap()
    }

    fn ket(bits: &[u8]) -> DensityMatrix {
        DensityMatrix::basis(bits, (0..bits.len()).map(QubitLabel::Index).collect()).unwrap()
    }

    #[test]
    fn tensor_identities_and_basis() {
        let i4 = tensor(&gates::identity(2), &gates::identity(2));
        assert_eq!(i4, gates::identity(4));
        let p = tensor(ket(&[0]).matrix(), ket(&[1]).matrix());
        assert_eq!(p, *ket(&[0, 1]).matrix());
    }

    #[test]
    fn xx_leaves_phi_plus_invariant() {
        let xx = tensor(&gates::x(), &gates::x());
        let v = phi_plus().amplitudes().clone();
        let out = &xx * &v;
        // direct component-wise check of the 4x4 product
        for k in 0..4 {
            assert_abs_diff_eq!((out[k] - v[k]).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn partial_trace_bell_is_mixed() {
        let rho = DensityMatrix::pure(&phi_plus(), vec![QubitLabel::Index(0), QubitLabel::Index(1)]).unwrap();
        for q in 0..2 {
            let red = partial_trace(&rho, &[q]).unwrap();
            assert_abs_diff_eq!((red.matrix() - gates::identity(2).scale(0.5)).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn partial_trace_product_state() {
        let red = partial_trace(&ket(&[0, 1]), &[0]).unwrap();
        assert_eq!(red.matrix(), ket(&[0]).matrix());
    }

    #[test]
    fn partial_trace_rejects_empty_keep() {
        assert!(matches!(partial_trace(&ket(&[0, 1]), &[]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn fidelity_examples() {
        let labels = vec![QubitLabel::Index(0), QubitLabel::Index(1)];
        let rho = DensityMatrix::pure(&phi_plus(), labels.clone()).unwrap();
        assert_abs_diff_eq!(fidelity_to_pure(&rho, &phi_plus()).unwrap(), 1.0, epsilon = 1e-14);
        let mixed = DensityMatrix::maximally_mixed(labels);
        assert_abs_diff_eq!(fidelity_to_pure(&mixed, &phi_plus()).unwrap(), 0.25, epsilon = 1e-14);
    }

    #[test]
    fn target_state_examples() {
        let g4 = make_target_state(4, 0.0).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for (k, a) in g4.amplitudes().iter().enumerate() {
            let want = if k == 0 || k == 15 { s } else { 0.0 };
            assert_abs_diff_eq!(a.re, want, epsilon = 1e-15);
            assert_abs_diff_eq!(a.im, 0.0, epsilon = 1e-15);
        }
        let a = make_target_state(3, 0.0).unwrap();
        let b = make_target_state(3, std::f64::consts::PI).unwrap();
        assert_abs_diff_eq!(a.inner(&b).norm(), 0.0, epsilon = 1e-15);
        assert!(make_target_state(1, 0.0).is_err());
    }

    #[test]
    fn haar_norm_and_determinism() {
        let mut r1 = RngStream::new(11);
        let mut r2 = RngStream::new(11);
        for _ in 0..50 {
            let a = haar_sample(4, &mut r1).unwrap();
            let b = haar_sample(4, &mut r2).unwrap();
            assert_abs_diff_eq!(a.amplitudes().norm(), 1.0, epsilon = 1e-12);
            assert_eq!(a, b);
        }
        assert!(haar_sample(1, &mut r1).is_err());
    }

    #[test]
    fn haar_first_moment_is_maximally_mixed() {
        let dim = 2;
        let n = 100_000;
        let mut rng = RngStream::new(2024);
        let mut sum = CMatrix::zeros(dim, dim);
        let mut sum_sq00 = 0.0;
        for _ in 0..n {
            let p = haar_sample(dim, &mut rng).unwrap().projector();
            sum_sq00 += p[(0, 0)].re * p[(0, 0)].re;
            sum += p;
        }
        let mean = sum.unscale(n as f64);
        // |<0|psi>|^2 is uniform on [0,1] for dim 2: variance 1/12
        let sigma = (sum_sq00 / n as f64 - mean[(0, 0)].re.powi(2)).sqrt() / (n as f64).sqrt();
        assert!((sigma - (1.0f64 / 12.0).sqrt() / (n as f64).sqrt()).abs() < 1e-4);
        for r in 0..dim {
            for cc in 0..dim {
                let want = if r == cc { 0.5 } else { 0.0 };
                assert!((mean[(r, cc)] - c(want, 0.0)).norm() < 3.0 * sigma * 1.5, "{r}{cc}");
            }
        }
    }

    #[test]
    fn permute_swaps_qubits() {
        let rho = ket(&[0, 1]);
        let sw = rho.permute(&[1, 0]).unwrap();
        assert_eq!(sw.matrix(), ket(&[1, 0]).matrix());
        assert_eq!(sw.labels(), &[QubitLabel::Index(1), QubitLabel::Index(0)]);
    }

    #[test]
    fn r_phi_matches_rx_ry() {
        let t = 0.7;
        let rx = gates::rx(t);
        let expect = CMatrix::from_row_slice(
            2,
            2,
            &[c((t / 2.).cos(), 0.), c(0., -(t / 2.).sin()), c(0., -(t / 2.).sin()), c((t / 2.).cos(), 0.)],
        );
        assert_abs_diff_eq!((rx - expect).norm(), 0.0, epsilon = 1e-15);
        assert!(is_unitary(&gates::ry(1.1), 1e-12));
        assert!(is_unitary(&gates::iswap(), 1e-12));
    }
}
