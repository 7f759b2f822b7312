//! Hermitian eigendecomposition and SVD of quaternionic matrices.
//!
//! The computation is routed through the complex embedding: a Hermitian
//! quaternionic m x m matrix embeds to a complex Hermitian 2m x 2m matrix
//! whose spectrum consists of the m quaternionic eigenvalues, each with
//! doubled multiplicity. The antilinear symmetry `v -> Omega conj(v)`
//! (with `Omega = [[0, I], [-I, 0]]`) maps each eigenvector to an
//! orthogonal partner with the same eigenvalue, and a quaternionic
//! eigenvector is recovered from one representative per partner pair.

use crate::error::{QError, Result};
use crate::qmat::{self, HermitianQ, QMatrix};
use crate::quat::Quaternion;
use nalgebra::DVector;
use num_complex::Complex64;

/// Tolerance for grouping the doubled eigenvalues of the embedded matrix.
pub const PAIRING_TOL: f64 = 1e-8;

/// Singular values below `1e-9 * (largest + 1)` count as zero.
pub const ZERO_THRESHOLD_REL: f64 = 1e-9;

/// Eigendecomposition `H = U diag(eigenvalues) U*` with symplectic `U`.
///
/// Eigenvalues are real and sorted non-increasing. Each eigenvector column
/// is determined only up to right multiplication by a unit quaternion.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub u: QMatrix,
}

impl EigenDecomposition {
    /// `||H - U diag(lambda) U*||_inf`.
    pub fn reconstruction_residual(&self, h: &HermitianQ) -> f64 {
        let lam = QMatrix::diag_real(&self.eigenvalues);
        let rec = self
            .u
            .matmul(&lam)
            .and_then(|m| m.matmul(&self.u.adjoint()))
            .expect("square shapes");
        rec.sub(h.mat()).expect("same shape").norm_inf()
    }
}

/// Singular value decomposition `F = U Sigma V*` with symplectic `U`, `V`.
#[derive(Debug, Clone)]
pub struct SVDecomposition {
    pub u: QMatrix,
    pub singular_values: Vec<f64>,
    pub v: QMatrix,
}

impl SVDecomposition {
    /// Assembles the rectangular diagonal `Sigma` of shape `u.rows x v.rows`.
    pub fn sigma(&self) -> QMatrix {
        let mut s = QMatrix::zeros(self.u.rows(), self.v.rows());
        for (i, &sv) in self.singular_values.iter().enumerate() {
            s[(i, i)] = Quaternion::real(sv);
        }
        s
    }

    pub fn reconstruct(&self) -> QMatrix {
        self.u
            .matmul(&self.sigma())
            .and_then(|m| m.matmul(&self.v.adjoint()))
            .expect("compatible shapes")
    }
}

/// The antilinear symmetry partner `Omega * conj(v)` of an embedded eigenvector.
fn symmetry_partner(v: &DVector<Complex64>) -> DVector<Complex64> {
    let n = v.len() / 2;
    DVector::from_fn(v.len(), |i, _| {
        if i < n {
            v[i + n].conj()
        } else {
            -v[i - n].conj()
        }
    })
}

/// Extracts the quaternionic vector whose embedded column is `v`.
///
/// A quaternionic column `u = z + w j` embeds to the column pair
/// `(z; -conj(w))` and `(w; conj(z))`; given `v = (x; y)` this inverts the
/// first column: `z = x`, `w = -conj(y)`.
fn unembed_column(v: &DVector<Complex64>) -> Vec<Quaternion> {
    let m = v.len() / 2;
    (0..m)
        .map(|i| Quaternion::from_complex_pair(v[i], -v[i + m].conj()))
        .collect()
}

/// Eigendecomposition of a Hermitian quaternionic matrix via the complex
/// embedding. The 2m complex eigenvalues come in pairs; one representative
/// eigenvector per pair is selected against the antilinear symmetry and
/// unembedded, and degenerate clusters are re-orthonormalized by
/// quaternionic Gram-Schmidt.
pub fn eigh_q(h: &HermitianQ) -> Result<EigenDecomposition> {
    let m = h.n();
    let embedded = qmat::embed_complex(h.mat())?;
    // enforce exact Hermiticity before handing to the complex solver
    let embedded = (embedded.adjoint() + &embedded).scale(0.5);
    let se = nalgebra::SymmetricEigen::new(embedded);

    // sort complex eigenpairs non-increasing
    let mut order: Vec<usize> = (0..2 * m).collect();
    order.sort_by(|&a, &b| se.eigenvalues[b].partial_cmp(&se.eigenvalues[a]).unwrap());
    let evals: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let evecs: Vec<DVector<Complex64>> =
        order.iter().map(|&i| se.eigenvectors.column(i).into_owned()).collect();

    let scale = 1.0 + evals.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let gap_tol = PAIRING_TOL * scale;

    // cluster nearly-equal eigenvalues; each cluster must have even size
    let mut clusters: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=2 * m {
        if i == 2 * m || evals[i - 1] - evals[i] > gap_tol {
            clusters.push((start, i));
            start = i;
        }
    }

    let mut eigenvalues = Vec::with_capacity(m);
    let mut columns: Vec<Vec<Quaternion>> = Vec::with_capacity(m);
    for &(lo, hi) in &clusters {
        let size = hi - lo;
        if size % 2 != 0 {
            return Err(QError::PairingError(format!(
                "eigenvalue cluster [{:.6e}, {:.6e}] has odd multiplicity {}",
                evals[hi - 1],
                evals[lo],
                size
            )));
        }
        let k = size / 2;
        for p in 0..k {
            eigenvalues.push(0.5 * (evals[lo + 2 * p] + evals[lo + 2 * p + 1]));
        }

        // pick k representatives whose pair subspaces span the cluster:
        // greedily project out span{v, partner(v)} of everything chosen so far
        let mut chosen: Vec<DVector<Complex64>> = Vec::with_capacity(2 * k);
        let mut reps = 0usize;
        for idx in lo..hi {
            if reps == k {
                break;
            }
            let mut v = evecs[idx].clone();
            for _ in 0..2 {
                for c in &chosen {
                    let coeff = c.dotc(&v);
                    v -= c * coeff;
                }
            }
            let norm = v.norm();
            if norm < 1e-6 {
                continue;
            }
            v /= Complex64::new(norm, 0.0);
            let partner = {
                let mut p = symmetry_partner(&v);
                // partner is orthogonal to v in exact arithmetic; polish anyway
                let coeff = v.dotc(&p);
                p -= &v * coeff;
                let pn = p.norm();
                p / Complex64::new(pn, 0.0)
            };
            columns.push(unembed_column(&v));
            chosen.push(v);
            chosen.push(partner);
            reps += 1;
        }
        if reps != k {
            return Err(QError::PairingError(format!(
                "could not select {} independent eigenvector pairs in a cluster of size {}",
                k, size
            )));
        }
        // re-orthonormalize the cluster's quaternionic eigenvectors
        let cluster_cols = &mut columns[eigenvalues.len() - k..];
        if qmat::gram_schmidt(cluster_cols, 1e-8).is_some() {
            return Err(QError::PairingError(
                "unembedded eigenvectors within a cluster are quaternionically dependent".into(),
            ));
        }
    }

    // global polish: clusters separated by a gap barely above the pairing
    // tolerance can leak non-orthogonality across cluster boundaries, which
    // would make U non-symplectic; a full pass restores orthonormality
    if qmat::gram_schmidt(&mut columns, 1e-8).is_some() {
        return Err(QError::PairingError(
            "unembedded eigenvectors are quaternionically dependent".into(),
        ));
    }

    let mut u = QMatrix::zeros(m, m);
    for (j, col) in columns.iter().enumerate() {
        u.set_column(j, col);
    }
    Ok(EigenDecomposition { eigenvalues, u })
}

/// Zero threshold for rank decisions given a list of singular values or
/// eigenvalues (uses the largest magnitude).
pub fn zero_threshold(values: &[f64]) -> f64 {
    let largest = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    ZERO_THRESHOLD_REL * (largest + 1.0)
}

/// SVD of a quaternionic matrix via the eigendecomposition of `F F*`.
pub fn svd_q(f: &QMatrix) -> Result<SVDecomposition> {
    if f.rows() > f.cols() {
        let t = svd_q(&f.adjoint())?;
        return Ok(SVDecomposition { u: t.v, singular_values: t.singular_values, v: t.u });
    }
    let d = f.rows();
    let n = f.cols();

    let s = HermitianQ::symmetrize(f.matmul(&f.adjoint())?);
    let eig = eigh_q(&s)?;
    let singular_values: Vec<f64> =
        eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let thresh = zero_threshold(&singular_values);

    // right singular vectors: v_i = F* u_i / sigma_i for significant sigma_i,
    // extended to a symplectic basis of H^N
    let fstar = f.adjoint();
    let mut vcols: Vec<Vec<Quaternion>> = Vec::with_capacity(n);
    let mut rank = 0;
    for i in 0..d {
        if singular_values[i] > thresh {
            let ui = eig.u.column(i);
            let vi = fstar.apply(&ui)?;
            vcols.push(vi.iter().map(|q| q.scale(1.0 / singular_values[i])).collect());
            rank += 1;
        }
    }
    // complete with standard basis vectors
    let mut j = 0;
    while vcols.len() < n {
        let mut e = vec![crate::quat::ZERO; n];
        e[j] = crate::quat::ONE;
        vcols.push(e);
        j += 1;
    }
    let mut attempts = 0;
    loop {
        let mut trial = vcols.clone();
        match qmat::gram_schmidt(&mut trial[..], 1e-10) {
            None => {
                vcols = trial;
                break;
            }
            Some(pivot) => {
                // a basis-completion vector collided with the range; rotate
                // in a different standard basis vector
                if pivot < rank || attempts >= n {
                    return Err(QError::PairingError(
                        "failed to complete right singular basis".into(),
                    ));
                }
                let mut e = vec![crate::quat::ZERO; n];
                e[(j + attempts) % n] = crate::quat::ONE;
                vcols[pivot] = e;
                attempts += 1;
            }
        }
    }
    let mut v = QMatrix::zeros(n, n);
    for (jj, col) in vcols.iter().enumerate() {
        v.set_column(jj, col);
    }
    Ok(SVDecomposition { u: eig.u, singular_values, v })
}
