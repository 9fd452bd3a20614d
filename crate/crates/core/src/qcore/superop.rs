//! Superoperators under column-stacking vectorization.
//!
//! `vec(A)[i + d*j] = A[i, j]`, so `vec(K rho K^dag) = (conj(K) (x) K) vec(rho)`.
//! The Choi matrix is `J = sum_ab |a><b| (x) E(|a><b|)` with the input factor first.

use super::channel::QuantumChannel;
use super::state::{CMatrix, CVector, C64};
use crate::{Error, Result};

pub fn vectorize(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &CVector, rows: usize) -> Result<CMatrix> {
    if rows == 0 || v.len() % rows != 0 {
        return Err(Error::DimensionMismatch(format!("cannot reshape {} into {rows} rows", v.len())));
    }
    Ok(CMatrix::from_column_slice(rows, v.len() / rows, v.as_slice()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    dim_in: usize,
    dim_out: usize,
    matrix: CMatrix,
}

impl Superoperator {
    pub fn new(matrix: CMatrix, dim_in: usize, dim_out: usize) -> Result<Self> {
        if matrix.shape() != (dim_out * dim_out, dim_in * dim_in) {
            return Err(Error::DimensionMismatch(format!(
                "superoperator shape {:?} for dims {dim_in}->{dim_out}",
                matrix.shape()
            )));
        }
        Ok(Self {
            dim_in,
            dim_out,
            matrix,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim_in: dim,
            dim_out: dim,
            matrix: CMatrix::identity(dim * dim, dim * dim),
        }
    }

    pub fn from_unitary(u: &CMatrix) -> Self {
        Self {
            dim_in: u.ncols(),
            dim_out: u.nrows(),
            matrix: u.conjugate().kronecker(u),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Input Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.dim_in
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        if rho.shape() != (self.dim_in, self.dim_in) {
            return Err(Error::DimensionMismatch("superoperator input".into()));
        }
        unvectorize(&(&self.matrix * vectorize(rho)), self.dim_out)
    }

    /// `after . self`.
    pub fn then(&self, after: &Superoperator) -> Result<Superoperator> {
        if self.dim_out != after.dim_in {
            return Err(Error::DimensionMismatch("superoperator composition".into()));
        }
        Superoperator::new(&after.matrix * &self.matrix, self.dim_in, after.dim_out)
    }

    /// `<<I| S = <<I|` within `tol`.
    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        let id = vectorize(&CMatrix::identity(self.dim_out, self.dim_out));
        let row = id.adjoint() * &self.matrix;
        let want = vectorize(&CMatrix::identity(self.dim_in, self.dim_in)).adjoint();
        (row - want).camax() < tol
    }

    pub fn to_choi(&self) -> CMatrix {
        let (di, dout) = (self.dim_in, self.dim_out);
        CMatrix::from_fn(di * dout, di * dout, |r, cc| {
            let (a, i) = (r / dout, r % dout);
            let (b, j) = (cc / dout, cc % dout);
            self.matrix[(i + dout * j, a + di * b)]
        })
    }

    pub fn from_choi(choi: &CMatrix, dim_in: usize, dim_out: usize) -> Result<Self> {
        if choi.shape() != (dim_in * dim_out, dim_in * dim_out) {
            return Err(Error::DimensionMismatch("Choi matrix shape".into()));
        }
        let m = CMatrix::from_fn(dim_out * dim_out, dim_in * dim_in, |r, cc| {
            let (i, j) = (r % dim_out, r / dim_out);
            let (a, b) = (cc % dim_in, cc / dim_in);
            choi[(a * dim_out + i, b * dim_out + j)]
        });
        Self::new(m, dim_in, dim_out)
    }
}

/// `S = sum_k conj(K) (x) K`.
pub fn kraus_to_superop(ch: &QuantumChannel) -> Superoperator {
    let (di, dout) = (ch.dim_in(), ch.dim_out());
    let mut m = CMatrix::zeros(dout * dout, di * di);
    for k in ch.kraus() {
        m += k.conjugate().kronecker(k);
    }
    Superoperator {
        dim_in: di,
        dim_out: dout,
        matrix: m,
    }
}

/// Permutation taking `vec(A (x) B)` to `vec(A) (x) vec(B)` for factor dims `da`, `db`.
pub fn unravel(da: usize, db: usize) -> CMatrix {
    let d = da * db;
    let mut p = CMatrix::zeros(d * d, d * d);
    for a1 in 0..da {
        for a2 in 0..da {
            for b1 in 0..db {
                for b2 in 0..db {
                    // (A(x)B)[(a1,b1),(a2,b2)] = A[a1,a2] B[b1,b2]
                    let src = (a1 * db + b1) + d * (a2 * db + b2);
                    let dst = (a1 + da * a2) * (db * db) + (b1 + db * b2);
                    p[(dst, src)] = C64::new(1.0, 0.0);
                }
            }
        }
    }
    p
}
