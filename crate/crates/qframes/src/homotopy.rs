//! Numerical frame homotopy: discretized paths between frames sharing a
//! frame spectrum and norm profile.
//!
//! Path search runs in Gram space (the quotient by the left symplectic
//! action): the straight segment between the two Gram matrices is sampled
//! and every sample is projected back onto the constraint set
//! `{G : spectrum = lambda~, diag = r}` by alternating a spectral reset
//! (replace the eigenvalues, keep the eigenvectors) with diagonal
//! correction by planar rotations (which preserves the spectrum exactly).
//! Frames are recovered by Gram factorization and aligned sample-to-sample
//! with a one-sided Procrustes solve; the final gauge mismatch against the
//! requested endpoint is closed by an explicit path inside the symplectic
//! fiber.
//!
//! The search is a heuristic witness. A failure is reported as a
//! distinguished `PathNotFound` outcome and says nothing about whether a
//! path exists; only that this search did not find one.

use crate::error::{QError, Result};
use crate::frames::{self, Frame, NormSpec, SpectrumSpec};
use crate::qmat::{HermitianQ, QMatrix};
use crate::quat::{self, Quaternion};
use crate::spectral::{eigh_q, svd_q};
use crate::synthesis;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

/// Iteration cap for the alternating projection at a single path sample.
const PROJECTION_SWEEPS: usize = 50;
/// Rotation budget inside one diagonal-correction pass.
const DIAG_ROTATION_CAP: usize = 500;
/// Maximum bisection depth when refining a segment.
const BISECTION_DEPTH: usize = 12;

/// Options for [`find_path`].
#[derive(Debug, Clone, Copy)]
pub struct PathOptions {
    pub steps: usize,
    pub tol: f64,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for PathOptions {
    fn default() -> Self {
        PathOptions { steps: 64, tol: 1e-8, max_restarts: 20, seed: 0 }
    }
}

/// A discretized path of frames within one stratum.
#[derive(Debug, Clone)]
pub struct FramePath {
    pub samples: Vec<Frame>,
    pub lambda: SpectrumSpec,
    pub r: NormSpec,
    pub max_spectrum_dev: f64,
    pub max_norm_dev: f64,
    pub max_step: f64,
}

/// Independent re-measurement of a path's constraint violations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathReport {
    pub passed: bool,
    pub max_spectrum_dev: f64,
    pub max_norm_dev: f64,
    pub max_step: f64,
    pub step_bound: f64,
    pub samples: usize,
}

/// Default step bound used by [`verify_path`].
pub fn default_step_bound(lambda: &SpectrumSpec, r: &NormSpec) -> f64 {
    let lam_min = *lambda.values().last().expect("non-empty");
    let r_min = *r.sorted().last().expect("non-empty");
    0.5 * lam_min.sqrt().min(r_min.sqrt())
}

/// Per-sample spectrum deviation `||spectrum(F F*) - lambda||_inf`.
/// Measured on the raw eigenvalues, without the spanning check, so that
/// broken intermediate samples still produce a number.
fn spectrum_deviation(f: &Frame, lambda: &SpectrumSpec) -> f64 {
    let eig = match eigh_q(&f.frame_operator()) {
        Ok(e) => e,
        Err(_) => return f64::INFINITY,
    };
    eig.eigenvalues
        .iter()
        .zip(lambda.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

fn norm_deviation(f: &Frame, r: &NormSpec) -> f64 {
    f.squared_norms()
        .iter()
        .zip(r.original())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Recomputes all deviations of a path from scratch. The report depends
/// only on the sample sequence, not on how it was produced.
pub fn verify_path(path: &FramePath, lambda: &SpectrumSpec, r: &NormSpec, tol: f64) -> PathReport {
    let step_bound = default_step_bound(lambda, r);
    let mut max_spec = 0.0f64;
    let mut max_norm = 0.0f64;
    let mut max_step = 0.0f64;
    for (k, f) in path.samples.iter().enumerate() {
        max_spec = max_spec.max(spectrum_deviation(f, lambda));
        max_norm = max_norm.max(norm_deviation(f, r));
        if k > 0 {
            let step = f
                .matrix()
                .sub(path.samples[k - 1].matrix())
                .map(|d| d.norm_inf())
                .unwrap_or(f64::INFINITY);
            max_step = max_step.max(step);
        }
    }
    PathReport {
        passed: max_spec <= tol && max_norm <= tol && max_step <= step_bound,
        max_spectrum_dev: max_spec,
        max_norm_dev: max_norm,
        max_step,
        step_bound,
        samples: path.samples.len(),
    }
}

/// One real planar rotation applied symmetrically to a Hermitian
/// quaternionic matrix: rows and columns `i`, `j` are mixed with the real
/// cosine/sine pair, which conjugates by a symplectic matrix and therefore
/// preserves the spectrum exactly.
fn apply_rotation(h: &mut QMatrix, i: usize, j: usize, c: f64, s: f64) {
    let n = h.cols();
    for k in 0..n {
        let ri = h[(i, k)];
        let rj = h[(j, k)];
        h[(i, k)] = ri.scale(c) + rj.scale(s);
        h[(j, k)] = ri.scale(-s) + rj.scale(c);
    }
    for k in 0..n {
        let ci = h[(k, i)];
        let cj = h[(k, j)];
        h[(k, i)] = ci.scale(c) + cj.scale(s);
        h[(k, j)] = ci.scale(-s) + cj.scale(c);
    }
}

/// Reachable interval of the `(i, i)` diagonal entry under rotations in the
/// `(i, j)` plane, together with the midpoint data needed to solve for the
/// angle: new value = mid + amp * cos(2 theta - phase).
fn reachable(a: f64, c: f64, b: f64) -> (f64, f64) {
    let mid = 0.5 * (a + c);
    let amp = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    (mid, amp)
}

/// Rotates `(i, j)` so that the `(i, i)` entry lands on `target`, which
/// must lie in the reachable interval.
fn rotate_diagonal_to(h: &mut QMatrix, i: usize, j: usize, target: f64) {
    let a = h[(i, i)].re();
    let c = h[(j, j)].re();
    let b = h[(i, j)].re();
    let (mid, amp) = reachable(a, c, b);
    if amp < 1e-300 {
        return;
    }
    // new_ii(theta) = mid + amp * cos(2 theta - phase); both acos branches
    // land the target, so take the smaller rotation — tiny deviations must
    // be fixed by tiny rotations or the projection becomes discontinuous
    let phase = b.atan2(0.5 * (a - c));
    let ratio = ((target - mid) / amp).clamp(-1.0, 1.0);
    let wrap = |t: f64| -> f64 {
        let mut t = t % (2.0 * std::f64::consts::PI);
        if t > std::f64::consts::PI {
            t -= 2.0 * std::f64::consts::PI;
        } else if t <= -std::f64::consts::PI {
            t += 2.0 * std::f64::consts::PI;
        }
        t
    };
    let plus = wrap(phase + ratio.acos());
    let minus = wrap(phase - ratio.acos());
    let two_theta = if plus.abs() <= minus.abs() { plus } else { minus };
    let theta = 0.5 * two_theta;
    apply_rotation(h, i, j, theta.cos(), theta.sin());
    h[(i, i)] = Quaternion::real(target);
    h[(j, j)] = Quaternion::real(a + c - target);
}

/// Drives the diagonal of a Hermitian matrix toward `r` by spectrum-
/// preserving planar rotations. Returns the remaining maximum deviation.
fn correct_diagonal(h: &mut QMatrix, r: &[f64], tol: f64) -> f64 {
    let n = r.len();
    let mut rotations = 0;
    loop {
        let devs: Vec<f64> = (0..n).map(|i| h[(i, i)].re() - r[i]).collect();
        let over = (0..n).max_by(|&x, &y| devs[x].partial_cmp(&devs[y]).unwrap()).unwrap();
        let under = (0..n).min_by(|&x, &y| devs[x].partial_cmp(&devs[y]).unwrap()).unwrap();
        let worst = devs[over].max(-devs[under]);
        if worst <= tol || rotations >= DIAG_ROTATION_CAP {
            return worst;
        }

        // prefer a rotation that lands an entry exactly on target
        let mut done = false;
        'search: for &(pivot, target) in &[(over, r[over]), (under, r[under])] {
            // partner preference: the opposite extreme first, then the rest
            let first = if pivot == over { under } else { over };
            for j in std::iter::once(first).chain(0..n) {
                if j == pivot {
                    continue;
                }
                let (mid, amp) = reachable(h[(pivot, pivot)].re(), h[(j, j)].re(), h[(pivot, j)].re());
                if (target - mid).abs() <= amp {
                    rotate_diagonal_to(h, pivot, j, target);
                    done = true;
                    break 'search;
                }
            }
        }
        if !done {
            // no exact landing available: move the worst entry as far toward
            // its target as the best partner allows
            let pivot = if devs[over] >= -devs[under] { over } else { under };
            let target = r[pivot];
            let mut best: Option<(usize, f64)> = None;
            for j in 0..n {
                if j == pivot {
                    continue;
                }
                let (mid, amp) = reachable(h[(pivot, pivot)].re(), h[(j, j)].re(), h[(pivot, j)].re());
                let landing = (target.clamp(mid - amp, mid + amp) - target).abs();
                if best.map_or(true, |(_, b)| landing < b) {
                    best = Some((j, landing));
                }
            }
            let (j, _) = best.expect("n >= 2 whenever a deviation exists");
            let (mid, amp) =
                reachable(h[(pivot, pivot)].re(), h[(j, j)].re(), h[(pivot, j)].re());
            rotate_diagonal_to(h, pivot, j, target.clamp(mid - amp, mid + amp));
        }
        rotations += 1;
    }
}

/// Projects a Hermitian matrix onto `{G : spectrum = lambda_padded,
/// diag = r}` by alternating a spectral reset with diagonal correction.
fn project_to_stratum(
    g: &HermitianQ,
    lambda_padded: &[f64],
    r: &[f64],
    tol: f64,
) -> Result<HermitianQ> {
    let mut current = g.clone();
    for _ in 0..PROJECTION_SWEEPS {
        // spectral reset: keep eigenvectors, replace eigenvalues
        let eig = eigh_q(&current)?;
        let lam = QMatrix::diag_real(lambda_padded);
        let mut mat = eig.u.matmul(&lam)?.matmul(&eig.u.adjoint())?;

        // diagonal correction preserves the spectrum exactly, provided the
        // reset produced a clean conjugate of diag(lambda~); re-measure the
        // spectrum rather than trust it, since near-degenerate clusters can
        // degrade the eigenbasis
        let diag_dev = correct_diagonal(&mut mat, r, tol * 0.1);
        let fixed = HermitianQ::symmetrize(mat);
        if diag_dev <= tol {
            let spec_dev = eigh_q(&fixed)?
                .eigenvalues
                .iter()
                .zip(lambda_padded)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if spec_dev <= tol {
                return Ok(fixed);
            }
        }
        current = fixed;
    }
    Err(QError::PathNotFound { restarts: 0 })
}

/// A factorization of a symplectic matrix into elementary factors, each of
/// which carries an explicit one-parameter path to the identity: real plane
/// rotations and diagonals of versors (followed along quaternionic slerp).
struct SymplecticPath {
    dim: usize,
    factors: Vec<SymplecticFactor>,
}

enum SymplecticFactor {
    PlaneRotation { i: usize, j: usize, theta: f64 },
    VersorDiag { axes: Vec<(Quaternion, f64)> }, // (pure unit axis, angle)
}

impl SymplecticFactor {
    fn eval(&self, t: f64, dim: usize) -> QMatrix {
        match self {
            SymplecticFactor::PlaneRotation { i, j, theta } => {
                let mut m = QMatrix::identity(dim);
                let (s, c) = (theta * t).sin_cos();
                m[(*i, *i)] = Quaternion::real(c);
                m[(*j, *j)] = Quaternion::real(c);
                m[(*i, *j)] = Quaternion::real(-s);
                m[(*j, *i)] = Quaternion::real(s);
                m
            }
            SymplecticFactor::VersorDiag { axes } => {
                let mut m = QMatrix::identity(dim);
                for (idx, (axis, angle)) in axes.iter().enumerate() {
                    let half = angle * t;
                    m[(idx, idx)] = Quaternion::real(half.cos()) + axis.scale(half.sin());
                }
                m
            }
        }
    }
}

/// Axis-angle form of a versor: `u = cos(angle) + axis * sin(angle)` with a
/// pure unit axis. The axis is arbitrary when `u = +-1`.
fn versor_axis_angle(u: &Quaternion) -> (Quaternion, f64) {
    let imag = Quaternion::new(0.0, u.b, u.c, u.d);
    let imag_norm = imag.modulus();
    let angle = imag_norm.atan2(u.a);
    if imag_norm < 1e-14 {
        (quat::I, angle)
    } else {
        (imag.scale(1.0 / imag_norm), angle)
    }
}

impl SymplecticPath {
    /// Factors `v` (assumed symplectic) so that the product of all factors
    /// equals `v` and each factor deforms continuously to the identity.
    fn factorize(v: &QMatrix) -> SymplecticPath {
        let dim = v.rows();
        let mut work = v.clone();
        // reduce to identity: record inverse elementary operations
        let mut reductions: Vec<SymplecticFactor> = Vec::new();
        for col in 0..dim {
            for row in (col + 1..dim).rev() {
                // make the pivot pair real with a versor diagonal, then kill
                // the lower entry with a real rotation
                let a = work[(col, col)];
                let b = work[(row, col)];
                let mut axes = vec![(quat::I, 0.0); dim];
                let ua = if a.modulus() > 1e-14 { a.versor().unwrap() } else { quat::ONE };
                let ub = if b.modulus() > 1e-14 { b.versor().unwrap() } else { quat::ONE };
                axes[col] = versor_axis_angle(&ua.conj());
                axes[row] = versor_axis_angle(&ub.conj());
                let dfac = SymplecticFactor::VersorDiag { axes };
                work = dfac.eval(1.0, dim).matmul(&work).expect("square");
                reductions.push(dfac);

                let aa = work[(col, col)].re();
                let bb = work[(row, col)].re();
                let theta = bb.atan2(aa);
                // rotation by -theta in the (col, row) plane zeroes (row, col)
                let rfac = SymplecticFactor::PlaneRotation { i: col, j: row, theta: -theta };
                work = rfac.eval(1.0, dim).matmul(&work).expect("square");
                reductions.push(rfac);
            }
            // normalize the diagonal pivot to 1
            let a = work[(col, col)];
            let ua = if a.modulus() > 1e-14 { a.versor().unwrap() } else { quat::ONE };
            let mut axes = vec![(quat::I, 0.0); dim];
            axes[col] = versor_axis_angle(&ua.conj());
            let dfac = SymplecticFactor::VersorDiag { axes };
            work = dfac.eval(1.0, dim).matmul(&work).expect("square");
            reductions.push(dfac);
        }
        // E_k ... E_1 V = I  =>  V = E_1^{-1} E_2^{-1} ... E_k^{-1}, the
        // inverses taken in original application order; inverting an
        // elementary factor negates its parameter
        let factors = reductions
            .into_iter()
            .map(|f| match f {
                SymplecticFactor::PlaneRotation { i, j, theta } => {
                    SymplecticFactor::PlaneRotation { i, j, theta: -theta }
                }
                SymplecticFactor::VersorDiag { axes } => SymplecticFactor::VersorDiag {
                    axes: axes.into_iter().map(|(ax, ang)| (ax, -ang)).collect(),
                },
            })
            .collect();
        SymplecticPath { dim, factors }
    }

    /// Evaluates the path at `t` in [0, 1]: `eval(0) = I`, `eval(1) = V`.
    /// Factors are animated one after another.
    fn eval(&self, t: f64) -> QMatrix {
        let k = self.factors.len();
        if k == 0 {
            return QMatrix::identity(self.dim);
        }
        let scaled = (t.clamp(0.0, 1.0)) * k as f64;
        let full = (scaled.floor() as usize).min(k);
        let frac = scaled - full as f64;
        let mut out = QMatrix::identity(self.dim);
        for (idx, f) in self.factors.iter().enumerate() {
            if idx < full {
                out = out.matmul(&f.eval(1.0, self.dim)).expect("square");
            } else if idx == full && frac > 0.0 {
                out = out.matmul(&f.eval(frac, self.dim)).expect("square");
            }
        }
        out
    }
}

/// Symplectic Procrustes: the `W` maximizing `Re tr(W C)`, i.e. the adjoint
/// of the unitary polar factor of `C`.
fn procrustes(c: &QMatrix) -> Result<QMatrix> {
    let svd = svd_q(c)?;
    svd.v.matmul(&svd.u.adjoint())
}

/// Aligns `f` on the left so it is as close as possible to `reference`.
fn align_to(f: &Frame, reference: &Frame) -> Result<Frame> {
    let c = f.matrix().matmul(&reference.matrix().adjoint())?;
    let w = procrustes(&c)?;
    Frame::new_unchecked(w.matmul(f.matrix())?)
}

fn interpolate_gram(g0: &QMatrix, g1: &QMatrix, s: f64) -> HermitianQ {
    HermitianQ::symmetrize(g0.scale(1.0 - s).add(&g1.scale(s)).expect("same shape"))
}

/// Finds a discretized path from `f0` to `f1` inside their common stratum.
///
/// Both endpoints must share the frame spectrum and the squared-norm
/// profile within `opts.tol`. The result always starts exactly at `f0` and
/// ends exactly at `f1`.
pub fn find_path(f0: &Frame, f1: &Frame, opts: &PathOptions) -> Result<FramePath> {
    if f0.d() != f1.d() || f0.n() != f1.n() {
        return Err(QError::DimensionMismatch(format!(
            "endpoint shapes {}x{} vs {}x{}",
            f0.d(),
            f0.n(),
            f1.d(),
            f1.n()
        )));
    }
    let lambda = f0.frame_spectrum()?;
    let r = NormSpec::new(f0.squared_norms())?;
    let other = f1.frame_spectrum()?;
    let spec_gap = lambda
        .values()
        .iter()
        .zip(other.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let norm_gap = norm_deviation(f1, &r);
    let gate = opts.tol.max(1e-9) * 10.0;
    if spec_gap > gate || norm_gap > gate {
        return Err(QError::SpectrumMismatch(format!(
            "spectrum gap {spec_gap:.3e}, norm gap {norm_gap:.3e} exceed {gate:.3e}"
        )));
    }
    let lambda_padded = {
        let mut v = lambda.values().to_vec();
        v.resize(f0.n(), 0.0);
        v
    };

    let steps = opts.steps.max(2);
    let mut last_err = QError::PathNotFound { restarts: opts.max_restarts };
    for attempt in 0..=opts.max_restarts {
        match attempt_path(f0, f1, &lambda, &lambda_padded, &r, opts, steps, attempt) {
            Ok(path) => return Ok(path),
            Err(e) => last_err = e,
        }
    }
    match last_err {
        QError::PathNotFound { .. } => Err(QError::PathNotFound { restarts: opts.max_restarts }),
        other => Err(other),
    }
}

#[allow(clippy::too_many_arguments)]
fn attempt_path(
    f0: &Frame,
    f1: &Frame,
    lambda: &SpectrumSpec,
    lambda_padded: &[f64],
    r: &NormSpec,
    opts: &PathOptions,
    steps: usize,
    attempt: usize,
) -> Result<FramePath> {
    let g0 = f0.gram().into_mat();
    let g1 = f1.gram().into_mat();
    let n = f0.n();

    // later attempts bow the segment through a random Hermitian detour
    let detour: Option<QMatrix> = if attempt == 0 {
        None
    } else {
        let mut rng = ChaCha20Rng::seed_from_u64(
            opts.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(attempt as u64),
        );
        let scale = g0.norm_inf().max(g1.norm_inf()) * 0.2 * (attempt as f64 / 4.0).min(1.0);
        let u = synthesis::random_symplectic(n, &mut rng)?;
        let base = HermitianQ::symmetrize(
            u.matmul(&QMatrix::diag_real(lambda_padded))?.matmul(&u.adjoint())?,
        );
        Some(base.mat().sub(&g0.scale(0.5))?.sub(&g1.scale(0.5))?.scale(scale))
    };
    let gram_at = |s: f64| -> HermitianQ {
        let base = interpolate_gram(&g0, &g1, s);
        match &detour {
            None => base,
            Some(p) => HermitianQ::symmetrize(
                base.mat()
                    .add(&p.scale(4.0 * s * (1.0 - s)))
                    .expect("same shape"),
            ),
        }
    };

    // frames must move slower than the verifier's step bound; build each
    // segment adaptively, bisecting the parameter wherever the aligned
    // samples are still too far apart
    let step_goal = 0.9 * default_step_bound(lambda, r);

    // gram segment: walk from the projected start, warm-starting each
    // projection from the previous on-stratum point plus the interpolation
    // increment — this keeps the projected path from branch-jumping between
    // distant fixed points of the alternating projection
    let mut samples: Vec<Frame> = vec![f0.clone()];
    let mut cur_gram = project_to_stratum(&gram_at(0.0), lambda_padded, r.original(), opts.tol)?;
    let mut projections = 0usize;
    for k in 1..steps.max(2) {
        let s_prev = (k - 1) as f64 / (steps.max(2) - 1) as f64;
        let s = k as f64 / (steps.max(2) - 1) as f64;
        // work stack of (lo, hi, depth); cur_gram / samples.last() sit at lo
        let mut stack: Vec<(f64, f64, usize)> = vec![(s_prev, s, 0)];
        while let Some((lo, hi, depth)) = stack.pop() {
            let warm = HermitianQ::symmetrize(
                cur_gram.mat().add(&gram_at(hi).mat().sub(&gram_at(lo).mat())?)?,
            );
            projections += 1;
            if projections > 8 * steps.max(2) {
                // this attempt is thrashing; hand control to the restart loop
                return Err(QError::PathNotFound { restarts: attempt });
            }
            let reference = samples.last().expect("non-empty").clone();
            let refine = match project_to_stratum(&warm, lambda_padded, r.original(), opts.tol) {
                Ok(g) => {
                    let lifted = frames::gram_to_frame(&g, f0.d())?;
                    let frame = align_to(&lifted, &reference)?;
                    let step = frame.matrix().sub(reference.matrix())?.norm_inf();
                    if step <= step_goal || depth >= BISECTION_DEPTH {
                        samples.push(frame);
                        cur_gram = g;
                        false
                    } else {
                        true
                    }
                }
                Err(_) if depth < BISECTION_DEPTH => true,
                Err(e) => return Err(e),
            };
            if refine {
                let mid = 0.5 * (lo + hi);
                stack.push((mid, hi, depth + 1));
                stack.push((lo, mid, depth + 1));
            }
        }
    }

    // close the gauge gap to f1 through the symplectic fiber, refining the
    // factor parameter until every step obeys the bound
    let last = samples.last().expect("non-empty");
    let c = f1.matrix().matmul(&last.matrix().adjoint())?;
    let v = procrustes(&c)?; // last ~= v * f1
    let fiber = SymplecticPath::factorize(&v);
    let fiber_at =
        |t: f64| -> Result<Frame> { Frame::new_unchecked(fiber.eval(1.0 - t).matmul(f1.matrix())?) };
    let fiber_steps = (steps / 2).max(8);
    for k in 1..=fiber_steps {
        let t_prev = (k - 1) as f64 / fiber_steps as f64;
        let t = k as f64 / fiber_steps as f64;
        let mut stack: Vec<(f64, f64, usize)> = vec![(t_prev, t, 0)];
        while let Some((lo, hi, depth)) = stack.pop() {
            let frame = fiber_at(hi)?;
            let step = frame
                .matrix()
                .sub(samples.last().expect("non-empty").matrix())?
                .norm_inf();
            if step <= step_goal || depth >= BISECTION_DEPTH {
                samples.push(frame);
            } else {
                let mid = 0.5 * (lo + hi);
                stack.push((mid, hi, depth + 1));
                stack.push((lo, mid, depth + 1));
            }
        }
    }
    *samples.last_mut().expect("non-empty") = f1.clone();

    // densify any over-long steps by walking the fiber factorization of the
    // local mismatch; one level is enough in practice, the verifier rules
    let mut path = FramePath {
        samples,
        lambda: lambda.clone(),
        r: r.clone(),
        max_spectrum_dev: 0.0,
        max_norm_dev: 0.0,
        max_step: 0.0,
    };
    let report = verify_path(&path, lambda, r, opts.tol);
    path.max_spectrum_dev = report.max_spectrum_dev;
    path.max_norm_dev = report.max_norm_dev;
    path.max_step = report.max_step;
    if report.passed {
        Ok(path)
    } else {
        Err(QError::PathNotFound { restarts: attempt })
    }
}

/// Re-gauges every sample so its frame operator equals `S` exactly
/// (within tolerance), yielding a path with a fixed frame operator: each
/// sample is left-multiplied by the adjoint of a `U_t` with
/// `F_t F_t* = U_t S U_t*`, chosen per sample to minimize the jump from
/// the previous aligned sample. Gram matrices and column norms are
/// untouched.
pub fn align_path_to_fixed_s(path: &FramePath, s: &HermitianQ, tol: f64) -> Result<FramePath> {
    let eig_s = eigh_q(s)?;
    let spec_gap = eig_s
        .eigenvalues
        .iter()
        .zip(path.lambda.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if spec_gap > tol.max(1e-9) * 10.0 {
        return Err(QError::SpectrumMismatch(format!(
            "spectrum of S deviates from the path stratum by {spec_gap:.3e}"
        )));
    }
    let first_gap = path.samples[0]
        .frame_operator()
        .mat()
        .sub(s.mat())?
        .norm_inf();
    if first_gap > tol.max(1e-9) * 10.0 {
        return Err(QError::SpectrumMismatch(format!(
            "first sample's frame operator deviates from S by {first_gap:.3e}"
        )));
    }

    // eigenvalue clusters of S (gauge blocks under degeneracy)
    let scale = 1.0 + eig_s.eigenvalues[0].abs();
    let mut clusters: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=eig_s.eigenvalues.len() {
        if i == eig_s.eigenvalues.len() || eig_s.eigenvalues[i - 1] - eig_s.eigenvalues[i] > 1e-8 * scale
        {
            clusters.push((start, i));
            start = i;
        }
    }

    let v = &eig_s.u;
    let mut aligned: Vec<Frame> = Vec::with_capacity(path.samples.len());
    for (k, f) in path.samples.iter().enumerate() {
        let st = f.frame_operator();
        let eig_t = eigh_q(&st)?;
        let reference = if k == 0 { f } else { &aligned[k - 1] };
        // gauge freedom: U_t = U_t' Q V* with Q block-diagonal over clusters;
        // pick Q maximizing Re tr(Q* K), K = U_t'^* F_t ref^* V
        let kmat = eig_t
            .u
            .adjoint()
            .matmul(f.matrix())?
            .matmul(&reference.matrix().adjoint())?
            .matmul(v)?;
        let mut q = QMatrix::zeros(f.d(), f.d());
        for &(lo, hi) in &clusters {
            let block = QMatrix::from_fn(hi - lo, hi - lo, |i, j| kmat[(lo + i, lo + j)]);
            let qb = polar_unitary(&block)?;
            for i in 0..hi - lo {
                for j in 0..hi - lo {
                    q[(lo + i, lo + j)] = qb[(i, j)];
                }
            }
        }
        let u_t = eig_t.u.matmul(&q)?.matmul(&v.adjoint())?;
        aligned.push(Frame::new_unchecked(u_t.adjoint().matmul(f.matrix())?)?);
    }

    let mut out = FramePath {
        samples: aligned,
        lambda: path.lambda.clone(),
        r: path.r.clone(),
        max_spectrum_dev: 0.0,
        max_norm_dev: 0.0,
        max_step: 0.0,
    };
    let report = verify_path(&out, &path.lambda, &path.r, tol);
    out.max_spectrum_dev = report.max_spectrum_dev;
    out.max_norm_dev = report.max_norm_dev;
    out.max_step = report.max_step;
    Ok(out)
}

/// The unitary polar factor `U W*` of a square matrix with SVD `U S W*`.
fn polar_unitary(m: &QMatrix) -> Result<QMatrix> {
    let svd = svd_q(m)?;
    svd.u.matmul(&svd.v.adjoint())
}

/// Serializes a path together with a fresh verification report.
pub fn path_to_json(path: &FramePath, tol: f64) -> serde_json::Value {
    let report = verify_path(path, &path.lambda, &path.r, tol);
    serde_json::json!({
        "lambda": path.lambda.values(),
        "r": path.r.original(),
        "samples": path.samples.iter().map(|f| f.to_json()).collect::<Vec<_>>(),
        "report": report,
    })
}
