//! Dense quaternionic matrices.
//!
//! `QMatrix` is a row-major dense matrix over the quaternions, acting on
//! column vectors of a *right* quaternionic module: `A (v alpha) = (A v) alpha`.
//! The module also provides the complex embedding `Psi` sending an m x m
//! quaternionic matrix `Z + W j` to the 2m x 2m complex block matrix
//! `[[Z, W], [-conj(W), conj(Z)]]`, which is how all spectral computations
//! are routed through a complex Hermitian eigensolver.

use crate::error::{QError, Result};
use crate::quat::{self, Quaternion};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Hermiticity tolerance used when constructing [`HermitianQ`].
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Tolerance for the block-structure check in [`unembed_complex`].
pub const EMBED_STRUCTURE_TOL: f64 = 1e-10;

/// Dense row-major quaternionic matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Quaternion>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        QMatrix { rows, cols, entries: vec![quat::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = QMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = quat::ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Quaternion) -> Self {
        let mut m = QMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Quaternion>]) -> Self {
        assert!(!rows.is_empty() && !rows[0].is_empty());
        let cols = rows[0].len();
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        QMatrix { rows: rows.len(), cols, entries: rows.concat() }
    }

    /// Real diagonal matrix with the given entries.
    pub fn diag_real(values: &[f64]) -> Self {
        let mut m = QMatrix::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Quaternion::real(v);
        }
        m
    }

    /// Column vector from a slice of quaternions.
    pub fn col_vec(entries: &[Quaternion]) -> Self {
        QMatrix { rows: entries.len(), cols: 1, entries: entries.to_vec() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn column(&self, j: usize) -> Vec<Quaternion> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, col: &[Quaternion]) {
        assert_eq!(col.len(), self.rows);
        for i in 0..self.rows {
            self[(i, j)] = col[i];
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> QMatrix {
        QMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &QMatrix) -> Result<QMatrix> {
        if self.cols != other.rows {
            return Err(QError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = QMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik == quat::ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += aik * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// Applies the matrix to a column vector.
    pub fn apply(&self, v: &[Quaternion]) -> Result<Vec<Quaternion>> {
        if v.len() != self.cols {
            return Err(QError::DimensionMismatch(format!(
                "matrix is {}x{}, vector has length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let mut out = vec![quat::ZERO; self.rows];
        for i in 0..self.rows {
            for (j, &vj) in v.iter().enumerate() {
                out[i] += self[(i, j)] * vj;
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &QMatrix) -> Result<QMatrix> {
        self.zip_with(other, |p, q| p + q)
    }

    pub fn sub(&self, other: &QMatrix) -> Result<QMatrix> {
        self.zip_with(other, |p, q| p - q)
    }

    fn zip_with(&self, other: &QMatrix, f: impl Fn(Quaternion, Quaternion) -> Quaternion) -> Result<QMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(QError::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(QMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&other.entries).map(|(&p, &q)| f(p, q)).collect(),
        })
    }

    pub fn scale(&self, s: f64) -> QMatrix {
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|q| q.scale(s)).collect(),
        }
    }

    /// Maximum entry modulus.
    pub fn norm_inf(&self) -> f64 {
        self.entries.iter().map(|q| q.modulus()).fold(0.0, f64::max)
    }

    /// Frobenius norm: square root of the sum of squared entry moduli.
    pub fn norm_fro(&self) -> f64 {
        self.entries.iter().map(|q| q.norm_sq()).sum::<f64>().sqrt()
    }

    /// Real part of the trace.
    pub fn real_trace(&self) -> f64 {
        assert!(self.is_square(), "trace requires a square matrix");
        (0..self.rows).map(|i| self[(i, i)].re()).sum()
    }

    /// True iff `||U*U - I||_inf <= tol`.
    pub fn is_symplectic(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let utu = self.adjoint().matmul(self).expect("square product");
        utu.sub(&QMatrix::identity(self.rows)).expect("same shape").norm_inf() <= tol
    }

    /// `||A - A*||_inf`, the deviation from Hermiticity.
    pub fn hermitian_defect(&self) -> f64 {
        assert!(self.is_square());
        self.sub(&self.adjoint()).expect("same shape").norm_inf()
    }
}

impl std::ops::Index<(usize, usize)> for QMatrix {
    type Output = Quaternion;
    fn index(&self, (i, j): (usize, usize)) -> &Quaternion {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Quaternion {
        &mut self.entries[i * self.cols + j]
    }
}

/// Hermitian quaternionic matrix, validated on construction.
///
/// The diagonal imaginary parts are zeroed on construction so that the
/// eigensolver downstream sees exact-real diagonals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermitianQ {
    mat: QMatrix,
}

impl HermitianQ {
    pub fn new(mat: QMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(QError::DimensionMismatch(format!(
                "Hermitian matrix must be square, got {}x{}",
                mat.rows(),
                mat.cols()
            )));
        }
        let defect = mat.hermitian_defect();
        if defect > HERMITIAN_TOL {
            return Err(QError::InvalidInput(format!(
                "matrix is not Hermitian: ||A - A*||_inf = {defect:.3e} > {HERMITIAN_TOL:.0e}"
            )));
        }
        Ok(Self::symmetrize(mat))
    }

    /// Averages `A` with `A*` and zeroes diagonal imaginary parts. Used by
    /// routines that produce Hermitian results up to floating-point drift.
    pub fn symmetrize(mat: QMatrix) -> Self {
        assert!(mat.is_square());
        let n = mat.rows();
        let mut m = mat.adjoint().add(&mat).expect("same shape").scale(0.5);
        for i in 0..n {
            m[(i, i)] = Quaternion::real(m[(i, i)].re());
        }
        HermitianQ { mat: m }
    }

    pub fn n(&self) -> usize {
        self.mat.rows()
    }

    pub fn mat(&self) -> &QMatrix {
        &self.mat
    }

    pub fn into_mat(self) -> QMatrix {
        self.mat
    }

    /// The real diagonal entries.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.mat[(i, i)].re()).collect()
    }
}

/// The embedding `Psi`: each entry `z + w j` contributes to the block matrix
/// `[[Z, W], [-conj(W), conj(Z)]]` of size `2m x 2m`.
pub fn embed_complex(a: &QMatrix) -> Result<DMatrix<Complex64>> {
    if !a.is_square() {
        return Err(QError::DimensionMismatch(format!(
            "embedding requires a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let m = a.rows();
    let mut out = DMatrix::<Complex64>::zeros(2 * m, 2 * m);
    for i in 0..m {
        for j in 0..m {
            let (z, w) = a[(i, j)].complex_pair();
            out[(i, j)] = z;
            out[(i, j + m)] = w;
            out[(i + m, j)] = -w.conj();
            out[(i + m, j + m)] = z.conj();
        }
    }
    Ok(out)
}

/// Inverse of [`embed_complex`] on its image.
///
/// Fails with `StructureError` when the block relation
/// `[[Z, W], [-conj(W), conj(Z)]]` is violated beyond `EMBED_STRUCTURE_TOL`.
pub fn unembed_complex(m: &DMatrix<Complex64>) -> Result<QMatrix> {
    let (r, c) = m.shape();
    if r != c || r % 2 != 0 || r == 0 {
        return Err(QError::StructureError(format!("expected even square shape, got {r}x{c}")));
    }
    let n = r / 2;
    let mut defect: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            defect = defect.max((m[(i + n, j + n)] - m[(i, j)].conj()).norm());
            defect = defect.max((m[(i + n, j)] + m[(i, j + n)].conj()).norm());
        }
    }
    if defect > EMBED_STRUCTURE_TOL {
        return Err(QError::StructureError(format!(
            "block relation violated by {defect:.3e} > {EMBED_STRUCTURE_TOL:.0e}"
        )));
    }
    Ok(QMatrix::from_fn(n, n, |i, j| {
        Quaternion::from_complex_pair(m[(i, j)], m[(i, j + n)])
    }))
}

/// Quaternionic Hermitian inner product of column vectors:
/// `<v, w> = sum_j conj(w_j) v_j`. Right-linear in `v`: `<v a, w> = <v, w> a`.
pub fn inner_product(v: &[Quaternion], w: &[Quaternion]) -> Result<Quaternion> {
    if v.len() != w.len() {
        return Err(QError::DimensionMismatch(format!(
            "vector lengths {} vs {}",
            v.len(),
            w.len()
        )));
    }
    let mut acc = quat::ZERO;
    for (vj, wj) in v.iter().zip(w) {
        acc += wj.conj() * *vj;
    }
    Ok(acc)
}

/// Squared norm `<v, v>`, a nonnegative real.
pub fn norm_sq(v: &[Quaternion]) -> f64 {
    v.iter().map(|q| q.norm_sq()).sum()
}

/// Frobenius inner product `<A, B>_F = tr(B* A)`.
pub fn frobenius(a: &QMatrix, b: &QMatrix) -> Result<Quaternion> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(QError::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let mut acc = quat::ZERO;
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            acc += b[(i, j)].conj() * a[(i, j)];
        }
    }
    Ok(acc)
}

/// Quaternionic Gram-Schmidt with right-scalar convention.
///
/// Orthonormalizes the given vectors in place; returns the index of the
/// first pivot whose residual norm fell below `pivot_tol`, if any.
pub fn gram_schmidt(vectors: &mut [Vec<Quaternion>], pivot_tol: f64) -> Option<usize> {
    for j in 0..vectors.len() {
        // two passes of re-orthogonalization keep the basis tight
        for _ in 0..2 {
            for i in 0..j {
                let coeff = inner_product(&vectors[j], &vectors[i]).expect("equal lengths");
                let (vi, vj) = {
                    let (head, tail) = vectors.split_at_mut(j);
                    (&head[i], &mut tail[0])
                };
                for (t, &u) in vj.iter_mut().zip(vi.iter()) {
                    *t -= u * coeff;
                }
            }
        }
        let norm = norm_sq(&vectors[j]).sqrt();
        if norm < pivot_tol {
            return Some(j);
        }
        for t in vectors[j].iter_mut() {
            *t = t.scale(1.0 / norm);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat::{I, J, K, ONE, ZERO};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    pub fn random_qmatrix(rng: &mut ChaCha20Rng, rows: usize, cols: usize) -> QMatrix {
        QMatrix::from_fn(rows, cols, |_, _| {
            Quaternion::new(
                rng.gen::<f64>() - 0.5,
                rng.gen::<f64>() - 0.5,
                rng.gen::<f64>() - 0.5,
                rng.gen::<f64>() - 0.5,
            )
        })
    }

    #[test]
    fn matmul_identity_and_noncommutativity() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let a = random_qmatrix(&mut rng, 3, 3);
        let id = QMatrix::identity(3);
        assert_eq!(id.matmul(&a).unwrap(), a);
        // 1x1 case: [[j]] * [[i]] = [[-k]]
        let mj = QMatrix::from_rows(&[vec![J]]);
        let mi = QMatrix::from_rows(&[vec![I]]);
        assert_eq!(mj.matmul(&mi).unwrap()[(0, 0)], -K);
        assert_eq!(mi.matmul(&mj).unwrap()[(0, 0)], K);
    }

    #[test]
    fn matmul_dimension_mismatch() {
        let a = QMatrix::zeros(2, 3);
        let b = QMatrix::zeros(2, 3);
        assert!(matches!(a.matmul(&b), Err(QError::DimensionMismatch(_))));
    }

    #[test]
    fn adjoint_properties() {
        let d = QMatrix::diag_real(&[2.0, -1.0]);
        assert_eq!(d.adjoint(), d);
        let a = QMatrix::from_rows(&[vec![ZERO, J], vec![ZERO, ZERO]]);
        let at = a.adjoint();
        assert_eq!(at[(0, 0)], ZERO);
        assert_eq!(at[(1, 0)], -J);
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        for _ in 0..100 {
            let a = random_qmatrix(&mut rng, 3, 2);
            let b = random_qmatrix(&mut rng, 2, 4);
            let ab = a.matmul(&b).unwrap();
            let lhs = ab.adjoint();
            let rhs = b.adjoint().matmul(&a.adjoint()).unwrap();
            assert!(lhs.sub(&rhs).unwrap().norm_inf() < 1e-13);
            assert_eq!(a.adjoint().adjoint(), a);
        }
    }

    #[test]
    fn inner_product_examples() {
        let e1 = [ONE, ZERO];
        assert_eq!(inner_product(&e1, &e1).unwrap(), ONE);
        // <(i,0), (j,0)> = conj(j) i = -ji = k
        let v = [I, ZERO];
        let w = [J, ZERO];
        assert_eq!(inner_product(&v, &w).unwrap(), K);
        assert!(inner_product(&[ONE], &[ONE, ONE]).is_err());
    }

    #[test]
    fn inner_product_properties() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for _ in 0..50 {
            let a = random_qmatrix(&mut rng, 4, 1);
            let b = random_qmatrix(&mut rng, 4, 1);
            let v = a.column(0);
            let w = b.column(0);
            let vw = inner_product(&v, &w).unwrap();
            let wv = inner_product(&w, &v).unwrap();
            assert!((vw - wv.conj()).modulus() < 1e-14);
            // right-linearity: <v a, w> = <v, w> a
            let alpha = Quaternion::new(0.3, -0.7, 0.2, 1.1);
            let va: Vec<_> = v.iter().map(|&q| q * alpha).collect();
            assert!((inner_product(&va, &w).unwrap() - vw * alpha).modulus() < 1e-13);
            let vv = inner_product(&v, &v).unwrap();
            assert!(vv.b.abs() < 1e-14 && vv.c.abs() < 1e-14 && vv.d.abs() < 1e-14);
            assert!(vv.re() >= 0.0);
        }
    }

    #[test]
    fn frobenius_examples() {
        let id = QMatrix::identity(2);
        assert_eq!(frobenius(&id, &id).unwrap(), Quaternion::real(2.0));
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        for _ in 0..50 {
            let a = random_qmatrix(&mut rng, 3, 2);
            let b = random_qmatrix(&mut rng, 3, 2);
            let aa = frobenius(&a, &a).unwrap();
            let sum_sq: f64 = (0..3).flat_map(|i| (0..2).map(move |j| (i, j)))
                .map(|(i, j)| a[(i, j)].norm_sq())
                .sum();
            assert!((aa - Quaternion::real(sum_sq)).modulus() < 1e-13);
            let ab = frobenius(&a, &b).unwrap();
            let ba = frobenius(&b, &a).unwrap();
            assert!((ab.re() - ba.re()).abs() < 1e-13);
        }
    }

    #[test]
    fn embed_examples() {
        // Psi_1(j) = [[0, 1], [-1, 0]]
        let mj = QMatrix::from_rows(&[vec![J]]);
        let e = embed_complex(&mj).unwrap();
        assert_eq!(e[(0, 0)], Complex64::new(0.0, 0.0));
        assert_eq!(e[(0, 1)], Complex64::new(1.0, 0.0));
        assert_eq!(e[(1, 0)], Complex64::new(-1.0, 0.0));
        assert_eq!(e[(1, 1)], Complex64::new(0.0, 0.0));
        // Psi_1(1) = I_2
        let e1 = embed_complex(&QMatrix::identity(1)).unwrap();
        assert_eq!(e1, DMatrix::identity(2, 2));
        assert!(embed_complex(&QMatrix::zeros(1, 2)).is_err());
    }

    #[test]
    fn embed_is_algebra_homomorphism() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for m in 1..=6 {
            let a = random_qmatrix(&mut rng, m, m);
            let b = random_qmatrix(&mut rng, m, m);
            let ea = embed_complex(&a).unwrap();
            let eb = embed_complex(&b).unwrap();
            let prod = embed_complex(&a.matmul(&b).unwrap()).unwrap();
            assert!((&ea * &eb - &prod).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);
            let sum = embed_complex(&a.add(&b).unwrap()).unwrap();
            assert!((&ea + &eb - &sum).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);
            let adj = embed_complex(&a.adjoint()).unwrap();
            assert!((ea.adjoint() - &adj).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);
        }
    }

    #[test]
    fn embed_of_hermitian_is_hermitian() {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        for m in 1..=5 {
            let a = random_qmatrix(&mut rng, m, m);
            let h = HermitianQ::symmetrize(a);
            let e = embed_complex(h.mat()).unwrap();
            assert!((e.adjoint() - &e).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);
        }
    }

    #[test]
    fn unembed_roundtrip_and_structure_error() {
        assert_eq!(
            unembed_complex(&DMatrix::identity(2, 2)).unwrap(),
            QMatrix::identity(1)
        );
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        for m in 1..=5 {
            let a = random_qmatrix(&mut rng, m, m);
            let back = unembed_complex(&embed_complex(&a).unwrap()).unwrap();
            assert!(back.sub(&a).unwrap().norm_inf() < 1e-12);
        }
        // diag(1, 2) violates conj(Z) block relation
        let bad = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
        ]));
        assert!(matches!(unembed_complex(&bad), Err(QError::StructureError(_))));
    }

    #[test]
    fn symplectic_predicate() {
        assert!(QMatrix::identity(4).is_symplectic(1e-12));
        let d = QMatrix::from_rows(&[vec![I, ZERO], vec![ZERO, J]]);
        assert!(d.is_symplectic(1e-12));
        assert!(!QMatrix::diag_real(&[2.0, 1.0]).is_symplectic(1e-10));
    }

    #[test]
    fn real_trace_examples() {
        assert_eq!(QMatrix::identity(3).real_trace(), 3.0);
        assert_eq!(QMatrix::from_rows(&[vec![I]]).real_trace(), 0.0);
        // cyclic identity Re tr(FF*) = Re tr(F*F)
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        for _ in 0..50 {
            let f = random_qmatrix(&mut rng, 2, 5);
            let ffs = f.matmul(&f.adjoint()).unwrap();
            let fsf = f.adjoint().matmul(&f).unwrap();
            let t1 = ffs.real_trace();
            let t2 = fsf.real_trace();
            assert!((t1 - t2).abs() <= 1e-12 * (1.0 + t1.abs()));
        }
    }

    #[test]
    fn hermitian_construction() {
        assert!(HermitianQ::new(QMatrix::from_rows(&[vec![ONE, J], vec![-J, ONE]])).is_ok());
        assert!(HermitianQ::new(QMatrix::from_rows(&[vec![ONE, J], vec![J, ONE]])).is_err());
        assert!(HermitianQ::new(QMatrix::zeros(1, 2)).is_err());
    }

    #[test]
    fn gram_schmidt_orthonormalizes() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let a = random_qmatrix(&mut rng, 4, 4);
        let mut cols: Vec<_> = (0..4).map(|j| a.column(j)).collect();
        assert!(gram_schmidt(&mut cols, 1e-12).is_none());
        let mut u = QMatrix::zeros(4, 4);
        for (j, c) in cols.iter().enumerate() {
            u.set_column(j, c);
        }
        assert!(u.is_symplectic(1e-12));
    }
}
