//! Frame synthesis: a constructive route from an admissible pair
//! `(lambda, r)` to a frame with that spectrum and those norms.
//!
//! The pipeline builds a real symmetric matrix with eigenvalues `lambda~`
//! (the padded spectrum) and diagonal `r` by a chain of planar rotations,
//! conjugates it by a diagonal of random versors to leave the real subfield
//! while preserving both the spectrum and the diagonal, factors it as a
//! Gram matrix, and optionally randomizes the left symplectic gauge.

use crate::admissibility::{self, DEFAULT_TOL};
use crate::error::{QError, Result};
use crate::frames::{self, Frame, NormSpec, SpectrumSpec};
use crate::qmat::{self, HermitianQ, QMatrix};
use crate::quat::Quaternion;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

/// Knobs for [`synthesize_frame`].
#[derive(Debug, Clone, Copy)]
pub struct SynthesisOptions {
    pub seed: u64,
    pub randomize_versors: bool,
    pub randomize_left: bool,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions { seed: 0, randomize_versors: true, randomize_left: true }
    }
}

impl SynthesisOptions {
    pub fn seeded(seed: u64) -> Self {
        SynthesisOptions { seed, ..Default::default() }
    }
}

fn standard_normal_quaternion(rng: &mut ChaCha20Rng) -> Quaternion {
    Quaternion::new(
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    )
}

/// A uniformly random versor (unit quaternion).
pub fn random_versor(rng: &mut ChaCha20Rng) -> Quaternion {
    loop {
        let q = standard_normal_quaternion(rng);
        if let Ok(v) = q.versor() {
            return v;
        }
    }
}

/// Haar-distributed random symplectic matrix: independent normal
/// quaternion entries orthonormalized by quaternionic Gram-Schmidt.
pub fn random_symplectic(m: usize, rng: &mut ChaCha20Rng) -> Result<QMatrix> {
    assert!(m >= 1);
    for _ in 0..=8 {
        let raw = QMatrix::from_fn(m, m, |_, _| standard_normal_quaternion(rng));
        let mut cols: Vec<_> = (0..m).map(|j| raw.column(j)).collect();
        if qmat::gram_schmidt(&mut cols, 1e-12).is_none() {
            let mut u = QMatrix::zeros(m, m);
            for (j, c) in cols.iter().enumerate() {
                u.set_column(j, c);
            }
            return Ok(u);
        }
    }
    Err(QError::DegenerateDraw(8))
}

/// Builds a real symmetric matrix with eigenvalues `lambda_padded` (as a
/// multiset) and diagonal exactly `r`, in the given order.
///
/// The construction runs a chain of two-dimensional rotations: repeatedly
/// pair an index whose diagonal entry overshoots its target with one that
/// undershoots, and rotate in that plane so that one entry lands exactly on
/// target. Each rotation retires one index, so at most `N - 1` rotations
/// are performed. Requires `r` to lie in the permutation polytope of
/// `lambda_padded`.
pub fn schur_horn_matrix(lambda_padded: &[f64], r: &[f64]) -> Result<HermitianQ> {
    let n = lambda_padded.len();
    if r.len() != n {
        return Err(QError::DimensionMismatch(format!(
            "lambda~ has length {}, r has length {}",
            n,
            r.len()
        )));
    }
    check_majorization(lambda_padded, r)?;

    // targets processed in non-increasing order, remembering input positions
    let mut targets: Vec<(f64, usize)> = r.iter().copied().zip(0..n).collect();
    targets.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));

    // dense real symmetric working matrix in "slot" space, starting from
    // diag(sorted lambda~); slots are permuted back to input order at the end
    let mut lam = lambda_padded.to_vec();
    lam.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut a = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        a[i][i] = lam[i];
    }

    // active diagonal values with their slots, kept sorted non-increasing;
    // the active-by-active block stays diagonal because every rotation
    // retires one of its two slots
    let mut active: Vec<(f64, usize)> = lam.iter().copied().zip(0..n).collect();
    let mut slot_owner = vec![usize::MAX; n];

    for &(t, input_idx) in &targets {
        if active.len() == 1 {
            // forced by trace conservation: last value equals last target
            let (_, slot) = active.pop().expect("non-empty");
            slot_owner[slot] = input_idx;
            continue;
        }
        // the largest remaining target is bracketed by an adjacent pair of
        // the sorted active values: it is >= their mean and <= their max
        // (up to tolerance dust, handled by clamping)
        let m = active.iter().position(|&(v, _)| v <= t).unwrap_or(active.len() - 1);
        let (hi_pos, lo_pos) = if m == 0 { (0, 1) } else { (m - 1, m) };
        let (p, slot_i) = active[hi_pos];
        let (q, slot_j) = active[lo_pos];
        let landed = t.clamp(p.min(q), p.max(q));
        rotate_to_target(&mut a, slot_i, slot_j, landed);
        slot_owner[slot_i] = input_idx;
        let leftover = p + q - landed;
        active.remove(hi_pos);
        active.remove(lo_pos - 1);
        let pos = active
            .iter()
            .position(|&(v, _)| v <= leftover)
            .unwrap_or(active.len());
        active.insert(pos, (leftover, slot_j));
    }

    // conjugate by the permutation sending each slot to its input position
    let mut slot_of = vec![0usize; n];
    for (slot, &owner) in slot_owner.iter().enumerate() {
        slot_of[owner] = slot;
    }
    let mat = QMatrix::from_fn(n, n, |i, j| Quaternion::real(a[slot_of[i]][slot_of[j]]));
    Ok(HermitianQ::symmetrize(mat))
}

/// Rotates in the `(i, j)` plane so that the `(i, i)` diagonal entry lands
/// exactly on `target`. Assumes `a[i][j] == 0` (the active block of the
/// construction stays diagonal).
fn rotate_to_target(a: &mut [Vec<f64>], i: usize, j: usize, target: f64) {
    let n = a.len();
    let p = a[i][i];
    let q = a[j][j];
    if (p - q).abs() < 1e-300 {
        a[i][i] = target;
        a[j][j] = p + q - target;
        return;
    }
    let c2 = ((target - q) / (p - q)).clamp(0.0, 1.0);
    let c = c2.sqrt();
    let s = (1.0 - c2).sqrt();
    // rows
    for k in 0..n {
        let ri = a[i][k];
        let rj = a[j][k];
        a[i][k] = c * ri + s * rj;
        a[j][k] = -s * ri + c * rj;
    }
    // columns
    for k in 0..n {
        let ci = a[k][i];
        let cj = a[k][j];
        a[k][i] = c * ci + s * cj;
        a[k][j] = -s * ci + c * cj;
    }
    // the landed entry is exact in exact arithmetic; pin it
    a[i][i] = target;
    a[j][j] = p + q - target;
}

/// Majorization check on the sorted sequences, with the same non-strict
/// tolerance semantics as the admissibility criterion.
fn check_majorization(lambda_padded: &[f64], r: &[f64]) -> Result<()> {
    let mut lam = lambda_padded.to_vec();
    lam.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut rs = r.to_vec();
    rs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let total_l: f64 = lam.iter().sum();
    let total_r: f64 = rs.iter().sum();
    if (total_l - total_r).abs() > DEFAULT_TOL * (1.0 + total_l.abs()) {
        return Err(QError::NotAdmissible(format!(
            "trace mismatch: sum(r) - sum(lambda) = {:.3e}",
            total_r - total_l
        )));
    }
    let mut acc_l = 0.0;
    let mut acc_r = 0.0;
    for k in 0..lam.len() {
        acc_l += lam[k];
        acc_r += rs[k];
        if acc_r > acc_l + DEFAULT_TOL * (1.0 + acc_l.abs()) {
            return Err(QError::NotAdmissible(format!(
                "prefix sum violated at k = {}: {:.12} > {:.12}",
                k + 1,
                acc_r,
                acc_l
            )));
        }
    }
    Ok(())
}

/// Conjugates by a diagonal of random versors: `H -> D H D*`. Preserves the
/// diagonal (each `|d_i| = 1`) and the spectrum, but moves the matrix off
/// the real/complex subfield almost surely.
pub fn versor_conjugate(h: &HermitianQ, rng: &mut ChaCha20Rng) -> HermitianQ {
    let n = h.n();
    let versors: Vec<Quaternion> = (0..n).map(|_| random_versor(rng)).collect();
    let mat = QMatrix::from_fn(n, n, |i, j| versors[i] * h.mat()[(i, j)] * versors[j].conj());
    HermitianQ::symmetrize(mat)
}

/// Constructs a frame with frame spectrum `lambda` and squared norms `r`
/// (in the caller's original ordering). Errors when the pair is not
/// admissible.
pub fn synthesize_frame(
    lambda: &SpectrumSpec,
    r: &NormSpec,
    opts: &SynthesisOptions,
) -> Result<Frame> {
    let cert = admissibility::is_admissible(lambda, r, DEFAULT_TOL);
    if !cert.admissible {
        return Err(QError::NotAdmissible(format!(
            "trace gap {:.3e}, first violated prefix {:?}",
            cert.trace_gap, cert.first_violated_k
        )));
    }
    let n = r.n();
    let padded = admissibility::pad_spectrum(lambda, n)?;
    let mut h = schur_horn_matrix(&padded, r.original())?;

    let mut rng = ChaCha20Rng::seed_from_u64(opts.seed);
    if opts.randomize_versors {
        h = versor_conjugate(&h, &mut rng);
    }
    let f = frames::gram_to_frame(&h, lambda.d())?;
    let f = if opts.randomize_left {
        let u = random_symplectic(lambda.d(), &mut rng)?;
        Frame::new_unchecked(u.matmul(f.matrix())?)?
    } else {
        f
    };
    Ok(f)
}

/// Samples a pseudo-random element of the stratum: full randomization with
/// sub-seeds derived from `seed`. Deterministic per seed.
pub fn random_frame_in_stratum(lambda: &SpectrumSpec, r: &NormSpec, seed: u64) -> Result<Frame> {
    let opts = SynthesisOptions { seed, randomize_versors: true, randomize_left: true };
    synthesize_frame(lambda, r, &opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::eigh_q;

    fn spec(v: &[f64]) -> SpectrumSpec {
        SpectrumSpec::new(v.to_vec()).unwrap()
    }

    fn norms(v: &[f64]) -> NormSpec {
        NormSpec::new(v.to_vec()).unwrap()
    }

    fn assert_spectrum(h: &HermitianQ, want: &[f64], tol: f64) {
        let eig = eigh_q(h).unwrap();
        let mut sorted = want.to_vec();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (got, want) in eig.eigenvalues.iter().zip(&sorted) {
            assert!((got - want).abs() < tol, "eigenvalues {:?} vs {:?}", eig.eigenvalues, sorted);
        }
    }

    #[test]
    fn schur_horn_trivial() {
        // r = sorted lambda~: no rotations needed, diagonal matrix back
        let h = schur_horn_matrix(&[2.0, 1.0, 0.0], &[2.0, 1.0, 0.0]).unwrap();
        assert_eq!(h.diagonal(), vec![2.0, 1.0, 0.0]);
        assert!(h.mat().sub(&QMatrix::diag_real(&[2.0, 1.0, 0.0])).unwrap().norm_inf() < 1e-14);
    }

    #[test]
    fn schur_horn_uniform_diagonal() {
        let h = schur_horn_matrix(&[2.0, 1.0, 0.0], &[1.0, 1.0, 1.0]).unwrap();
        for d in h.diagonal() {
            assert!((d - 1.0).abs() < 1e-12);
        }
        assert_spectrum(&h, &[2.0, 1.0, 0.0], 1e-10);

        let h2 = schur_horn_matrix(&[3.0, 1.0, 0.0, 0.0], &[1.0, 1.0, 1.0, 1.0]).unwrap();
        for d in h2.diagonal() {
            assert!((d - 1.0).abs() < 1e-12);
        }
        assert_spectrum(&h2, &[3.0, 1.0, 0.0, 0.0], 1e-10);
    }

    #[test]
    fn schur_horn_unsorted_targets() {
        let r = [0.5, 2.5, 1.0, 1.0];
        let lam = [3.0, 2.0, 0.0, 0.0];
        let h = schur_horn_matrix(&lam, &r).unwrap();
        for (d, want) in h.diagonal().iter().zip(&r) {
            assert!((d - want).abs() < 1e-12);
        }
        assert_spectrum(&h, &lam, 1e-10);
    }

    #[test]
    fn schur_horn_rejects_non_majorized() {
        assert!(matches!(
            schur_horn_matrix(&[2.0, 1.0, 0.0], &[2.5, 0.4, 0.1]),
            Err(QError::NotAdmissible(_))
        ));
    }

    #[test]
    fn schur_horn_randomized_cases() {
        use rand::Rng;
        let mut rng = ChaCha20Rng::seed_from_u64(41);
        for _ in 0..50 {
            let d = rng.gen_range(1..=4);
            let n = rng.gen_range(d..=6);
            let lam: Vec<f64> = {
                let mut l: Vec<f64> = (0..d).map(|_| rng.gen_range(0.1..5.0)).collect();
                l.sort_by(|a, b| b.partial_cmp(a).unwrap());
                l.extend(std::iter::repeat(0.0).take(n - d));
                l
            };
            // random admissible r: convex combination of a few permutations
            let mut r = vec![0.0; n];
            let mut weight_left = 1.0;
            for t in 0..3 {
                let w = if t == 2 { weight_left } else { rng.gen_range(0.0..weight_left) };
                weight_left -= if t == 2 { 0.0 } else { w };
                let mut perm = lam.clone();
                for k in (1..n).rev() {
                    let swap = rng.gen_range(0..=k);
                    perm.swap(k, swap);
                }
                for (ri, pi) in r.iter_mut().zip(&perm) {
                    *ri += w * pi;
                }
            }
            let h = schur_horn_matrix(&lam, &r).unwrap();
            for (got, want) in h.diagonal().iter().zip(&r) {
                assert!((got - want).abs() < 1e-12);
            }
            assert_spectrum(&h, &lam, 1e-9);
        }
    }

    #[test]
    fn versor_conjugation_preserves_diagonal_and_spectrum() {
        let h = schur_horn_matrix(&[2.0, 1.0, 0.0], &[1.0, 1.0, 1.0]).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let hq = versor_conjugate(&h, &mut rng);
        for (a, b) in h.diagonal().iter().zip(hq.diagonal()) {
            assert!((a - b).abs() < 1e-14);
        }
        assert_spectrum(&hq, &[2.0, 1.0, 0.0], 1e-10);
        // conjugation left the real subfield
        let off_real = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j)
            .map(|(i, j)| {
                let q = hq.mat()[(i, j)];
                q.c.abs().max(q.d.abs())
            })
            .fold(0.0f64, f64::max);
        assert!(off_real > 1e-3);
    }

    #[test]
    fn random_symplectic_properties() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        // Sp(1) draw is a unit quaternion
        let u1 = random_symplectic(1, &mut rng).unwrap();
        assert!((u1[(0, 0)].modulus() - 1.0).abs() < 1e-12);

        for m in 1..=6 {
            for _ in 0..10 {
                let u = random_symplectic(m, &mut rng).unwrap();
                assert!(u.is_symplectic(1e-10));
            }
        }
        // conjugation invariance of the spectrum
        let u = random_symplectic(2, &mut rng).unwrap();
        let h = HermitianQ::symmetrize(
            u.matmul(&QMatrix::diag_real(&[2.0, 1.0])).unwrap().matmul(&u.adjoint()).unwrap(),
        );
        assert_spectrum(&h, &[2.0, 1.0], 1e-9);
    }

    #[test]
    fn synthesize_untf() {
        let f = synthesize_frame(
            &spec(&[1.5, 1.5]),
            &norms(&[1.0, 1.0, 1.0]),
            &SynthesisOptions::seeded(3),
        )
        .unwrap();
        assert_eq!((f.d(), f.n()), (2, 3));
        let s = f.frame_operator();
        assert!(s.mat().sub(&QMatrix::diag_real(&[1.5, 1.5])).unwrap().norm_inf() < 1e-9);
        for r in f.squared_norms() {
            assert!((r - 1.0).abs() < 1e-10);
        }
        assert!(f.is_tight(1e-9));
    }

    #[test]
    fn synthesize_orthonormal_basis() {
        let f = synthesize_frame(
            &spec(&[1.0, 1.0, 1.0]),
            &norms(&[1.0, 1.0, 1.0]),
            &SynthesisOptions::seeded(1),
        )
        .unwrap();
        assert!(f.is_parseval(1e-9));
        assert!(f.gram().mat().sub(&QMatrix::identity(3)).unwrap().norm_inf() < 1e-9);
    }

    #[test]
    fn synthesize_rejects_inadmissible() {
        assert!(matches!(
            synthesize_frame(
                &spec(&[2.0, 1.0]),
                &norms(&[2.5, 0.4, 0.1]),
                &SynthesisOptions::default()
            ),
            Err(QError::NotAdmissible(_))
        ));
    }

    #[test]
    fn norms_follow_input_order() {
        let r = norms(&[0.5, 2.0, 0.5]);
        let f = synthesize_frame(&spec(&[2.0, 1.0]), &r, &SynthesisOptions::seeded(9)).unwrap();
        for (got, want) in f.squared_norms().iter().zip(r.original()) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn seed_determinism_and_variety() {
        let lam = spec(&[2.0, 2.0]);
        let r = norms(&[1.0, 1.0, 1.0, 1.0]);
        let f1 = random_frame_in_stratum(&lam, &r, 11).unwrap();
        let f2 = random_frame_in_stratum(&lam, &r, 11).unwrap();
        assert_eq!(f1.matrix(), f2.matrix());

        let f3 = random_frame_in_stratum(&lam, &r, 12).unwrap();
        let diff = f1
            .gram()
            .mat()
            .sub(f3.gram().mat())
            .unwrap()
            .norm_inf();
        assert!(diff >= 1e-6, "different seeds gave near-identical Gram matrices");

        // genuinely quaternionic off-diagonals
        let g = f1.gram();
        let max_jk = (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j)
            .map(|(i, j)| g.mat()[(i, j)].c.abs().max(g.mat()[(i, j)].d.abs()))
            .fold(0.0f64, f64::max);
        assert!(max_jk > 1e-3);
    }

    #[test]
    fn left_action_invariance() {
        let lam = spec(&[2.0, 1.0]);
        let r = norms(&[1.0, 1.0, 1.0]);
        let f = random_frame_in_stratum(&lam, &r, 2).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let u = random_symplectic(2, &mut rng).unwrap();
        let uf = Frame::new_unchecked(u.matmul(f.matrix()).unwrap()).unwrap();
        let s1 = f.frame_spectrum().unwrap();
        let s2 = uf.frame_spectrum().unwrap();
        for (a, b) in s1.values().iter().zip(s2.values()) {
            assert!((a - b).abs() < 1e-9);
        }
        for (a, b) in f.squared_norms().iter().zip(uf.squared_norms()) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
