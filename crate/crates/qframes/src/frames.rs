//! Frames in quaternionic space and their operators.
//!
//! A frame is a d x N quaternionic matrix whose columns span the space
//! (equivalently, whose smallest singular value is bounded away from zero).
//! The analysis, synthesis, frame, and Gram operators are all thin wrappers
//! over matrix products; the frame spectrum is the eigenvalue sequence of
//! the frame operator.

use crate::error::{QError, Result};
use crate::qmat::{self, HermitianQ, QMatrix};
use crate::quat::Quaternion;
use crate::spectral::{self, eigh_q};
use serde::{Deserialize, Serialize};

/// A frame of `N` vectors in d-dimensional quaternionic space, stored as the
/// d x N synthesis matrix whose columns are the frame vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    d: usize,
    n: usize,
    mat: QMatrix,
}

/// Frame spectrum: positive reals sorted non-increasing, length d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSpec {
    lambda: Vec<f64>,
}

impl SpectrumSpec {
    pub fn new(mut lambda: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(QError::InvalidInput("spectrum must be non-empty".into()));
        }
        if lambda.iter().any(|&l| !l.is_finite() || l <= 0.0) {
            return Err(QError::InvalidInput(
                "spectrum entries must be finite and strictly positive".into(),
            ));
        }
        lambda.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Ok(SpectrumSpec { lambda })
    }

    pub fn d(&self) -> usize {
        self.lambda.len()
    }

    /// Sorted non-increasing values.
    pub fn values(&self) -> &[f64] {
        &self.lambda
    }

    pub fn sum(&self) -> f64 {
        self.lambda.iter().sum()
    }
}

/// Squared frame-vector norms. The user's original ordering is retained
/// alongside the sorting permutation so reports can use input order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    original: Vec<f64>,
    sorted: Vec<f64>,
    /// `permutation[k]` is the input-order index of the k-th largest norm.
    permutation: Vec<usize>,
}

impl NormSpec {
    pub fn new(original: Vec<f64>) -> Result<Self> {
        if original.is_empty() {
            return Err(QError::InvalidInput("norm list must be non-empty".into()));
        }
        if original.iter().any(|&r| !r.is_finite() || r <= 0.0) {
            return Err(QError::InvalidInput(
                "norm entries must be finite and strictly positive".into(),
            ));
        }
        let mut permutation: Vec<usize> = (0..original.len()).collect();
        permutation.sort_by(|&a, &b| original[b].partial_cmp(&original[a]).unwrap());
        let sorted = permutation.iter().map(|&i| original[i]).collect();
        Ok(NormSpec { original, sorted, permutation })
    }

    pub fn n(&self) -> usize {
        self.original.len()
    }

    /// Values in the user's original order.
    pub fn original(&self) -> &[f64] {
        &self.original
    }

    /// Values sorted non-increasing.
    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn sum(&self) -> f64 {
        self.original.iter().sum()
    }
}

/// JSON form of a frame: columns of 4-element coefficient arrays.
#[derive(Serialize, Deserialize)]
struct FrameJson {
    d: usize,
    #[serde(rename = "N")]
    n: usize,
    columns: Vec<Vec<Quaternion>>,
}

impl Frame {
    /// Validating constructor: checks that the columns span.
    pub fn new(mat: QMatrix) -> Result<Self> {
        let f = Self::new_unchecked(mat)?;
        let svd = spectral::svd_q(&f.mat)?;
        let largest = svd.singular_values.first().copied().unwrap_or(0.0);
        let smallest = svd.singular_values.last().copied().unwrap_or(0.0);
        if smallest <= 1e-9 * (1.0 + largest) {
            return Err(QError::RankError {
                expected: f.d,
                found: svd
                    .singular_values
                    .iter()
                    .filter(|&&s| s > 1e-9 * (1.0 + largest))
                    .count(),
            });
        }
        Ok(f)
    }

    /// Constructor without the spanning check, for homotopy intermediates.
    pub fn new_unchecked(mat: QMatrix) -> Result<Self> {
        if mat.rows() > mat.cols() {
            return Err(QError::DimensionMismatch(format!(
                "a frame needs at least d vectors: got {}x{}",
                mat.rows(),
                mat.cols()
            )));
        }
        Ok(Frame { d: mat.rows(), n: mat.cols(), mat })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &QMatrix {
        &self.mat
    }

    pub fn vector(&self, i: usize) -> Vec<Quaternion> {
        self.mat.column(i)
    }

    /// Analysis operator `v -> F* v`; the j-th entry is `<v, f_j>`.
    pub fn analysis(&self, v: &[Quaternion]) -> Result<Vec<Quaternion>> {
        self.mat.adjoint().apply(v)
    }

    /// Synthesis operator `w -> F w = sum f_i w_i`.
    pub fn synthesis(&self, w: &[Quaternion]) -> Result<Vec<Quaternion>> {
        self.mat.apply(w)
    }

    /// Frame operator `S = F F*`, positive definite for a frame.
    pub fn frame_operator(&self) -> HermitianQ {
        HermitianQ::symmetrize(self.mat.matmul(&self.mat.adjoint()).expect("compatible"))
    }

    /// Gram matrix `F* F`.
    pub fn gram(&self) -> HermitianQ {
        HermitianQ::symmetrize(self.mat.adjoint().matmul(&self.mat).expect("compatible"))
    }

    /// Squared column norms, in column order.
    pub fn squared_norms(&self) -> Vec<f64> {
        (0..self.n).map(|i| qmat::norm_sq(&self.vector(i))).collect()
    }

    /// Eigenvalues of the frame operator, sorted non-increasing.
    ///
    /// Negative dust below the zero threshold is clamped to zero before the
    /// positivity check; an eigenvalue below the threshold means the columns
    /// do not span and is reported as a rank error.
    pub fn frame_spectrum(&self) -> Result<SpectrumSpec> {
        let eig = eigh_q(&self.frame_operator())?;
        let thresh = spectral::zero_threshold(&eig.eigenvalues);
        let mut vals = Vec::with_capacity(self.d);
        let mut rank = 0;
        for &l in &eig.eigenvalues {
            let l = if l.abs() < thresh { 0.0 } else { l };
            if l > 0.0 {
                rank += 1;
            }
            vals.push(l.max(0.0));
        }
        if rank < self.d {
            return Err(QError::RankError { expected: self.d, found: rank });
        }
        SpectrumSpec::new(vals)
    }

    /// Optimal frame bounds `(A, B)`: the extreme eigenvalues of `F F*`.
    pub fn frame_bounds(&self) -> Result<(f64, f64)> {
        let spec = self.frame_spectrum()?;
        let v = spec.values();
        Ok((v[v.len() - 1], v[0]))
    }

    /// True iff `||F F* - A I||_inf <= tol` with `A = tr(F F*) / d`.
    pub fn is_tight(&self, tol: f64) -> bool {
        let s = self.frame_operator();
        let a = s.mat().real_trace() / self.d as f64;
        s.mat()
            .sub(&QMatrix::diag_real(&vec![a; self.d]))
            .expect("same shape")
            .norm_inf()
            <= tol
    }

    /// True iff `||F F* - I||_inf <= tol`.
    pub fn is_parseval(&self, tol: f64) -> bool {
        let s = self.frame_operator();
        s.mat()
            .sub(&QMatrix::identity(self.d))
            .expect("same shape")
            .norm_inf()
            <= tol
    }

    pub fn to_json(&self) -> serde_json::Value {
        let columns: Vec<Vec<Quaternion>> = (0..self.n).map(|i| self.vector(i)).collect();
        serde_json::to_value(FrameJson { d: self.d, n: self.n, columns }).expect("serializable")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let fj: FrameJson = serde_json::from_value(v.clone())
            .map_err(|e| QError::InvalidInput(format!("bad frame JSON: {e}")))?;
        if fj.columns.len() != fj.n || fj.columns.iter().any(|c| c.len() != fj.d) {
            return Err(QError::InvalidInput(
                "frame JSON columns do not match declared dimensions".into(),
            ));
        }
        let mut mat = QMatrix::zeros(fj.d, fj.n);
        for (j, col) in fj.columns.iter().enumerate() {
            mat.set_column(j, col);
        }
        Frame::new_unchecked(mat)
    }
}

/// Recovers a frame from its Gram matrix: for PSD `M` of rank `d`,
/// returns `F` (d x N) with `F* F = M`, unique up to the left symplectic
/// action. Construction: `M = U diag(lambda) U*`, then
/// `F = diag(sqrt(lambda_1..d)) * (first d rows of U*)`.
pub fn gram_to_frame(m: &HermitianQ, d: usize) -> Result<Frame> {
    let n = m.n();
    if d == 0 || d > n {
        return Err(QError::InvalidInput(format!("need 1 <= d <= N, got d={d}, N={n}")));
    }
    let eig = eigh_q(m)?;
    let thresh = spectral::zero_threshold(&eig.eigenvalues);
    if let Some(&worst) = eig
        .eigenvalues
        .iter()
        .filter(|&&l| l < -thresh)
        .min_by(|a, b| a.partial_cmp(b).unwrap())
    {
        return Err(QError::NegativeEigenvalue(worst));
    }
    let rank = eig.eigenvalues.iter().filter(|&&l| l > thresh).count();
    if rank != d {
        return Err(QError::RankError { expected: d, found: rank });
    }
    let ustar = eig.u.adjoint();
    let mat = QMatrix::from_fn(d, n, |i, j| {
        ustar[(i, j)].scale(eig.eigenvalues[i].max(0.0).sqrt())
    });
    Frame::new_unchecked(mat)
}
