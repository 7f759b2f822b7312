//! Admissibility of a (spectrum, norms) pair.
//!
//! A sorted norm vector `r` is lambda-admissible when its total matches the
//! spectrum total and every prefix sum is dominated by the corresponding
//! spectrum prefix. This is equivalent to membership of `r` in the convex
//! hull of the permutations of the zero-padded spectrum, which this module
//! also decides by a deliberately independent route: exhaustive vertex
//! enumeration plus a phase-one simplex feasibility solve. The two code
//! paths share nothing, so agreement between them is a meaningful check.

use crate::error::{QError, Result};
use crate::frames::{NormSpec, SpectrumSpec};
use crate::qmat::HermitianQ;
use crate::quat::Quaternion;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Default relative tolerance for the trace equality.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Largest N accepted by the factorial hull oracle.
pub const HULL_ORACLE_MAX_N: usize = 8;

/// Outcome of an admissibility check, with enough detail to audit it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdmissibilityCertificate {
    pub admissible: bool,
    /// `sum(r) - sum(lambda)`.
    pub trace_gap: f64,
    /// Smallest k in 1..=d whose prefix inequality fails, if any.
    pub first_violated_k: Option<usize>,
    /// Prefix sums of the sorted norms.
    pub partial_sums_r: Vec<f64>,
    /// Prefix sums of the padded sorted spectrum.
    pub partial_sums_lambda: Vec<f64>,
}

/// Pads a spectrum with `N - d` zeros (the Gram-matrix spectrum).
pub fn pad_spectrum(lambda: &SpectrumSpec, n: usize) -> Result<Vec<f64>> {
    if n < lambda.d() {
        return Err(QError::InvalidInput(format!(
            "cannot pad spectrum of length {} to shorter length {}",
            lambda.d(),
            n
        )));
    }
    let mut padded = lambda.values().to_vec();
    padded.resize(n, 0.0);
    Ok(padded)
}

/// Decides admissibility by the prefix-sum criterion. The certificate is
/// always produced; boundary cases (equality within tolerance) count as
/// admissible since the criterion is non-strict.
pub fn is_admissible(lambda: &SpectrumSpec, r: &NormSpec, tol: f64) -> AdmissibilityCertificate {
    let d = lambda.d();
    let lam = lambda.values();
    // conceptually pad r with zeros when N < d; the trace equality then
    // forces inadmissibility through the prefix tests
    let sorted_r: Vec<f64> = {
        let mut v = r.sorted().to_vec();
        if v.len() < d {
            v.resize(d, 0.0);
        }
        v
    };

    let sum_lambda = lambda.sum();
    let sum_r = r.sum();
    let trace_gap = sum_r - sum_lambda;
    let trace_ok = trace_gap.abs() <= tol * (1.0 + sum_lambda.abs());

    let mut partial_r = Vec::with_capacity(d);
    let mut partial_l = Vec::with_capacity(d);
    let mut first_violated_k = None;
    let mut acc_r = 0.0;
    let mut acc_l = 0.0;
    for k in 0..d {
        acc_r += sorted_r[k];
        acc_l += lam[k];
        partial_r.push(acc_r);
        partial_l.push(acc_l);
        if first_violated_k.is_none() && acc_r > acc_l + tol * (1.0 + acc_l.abs()) {
            first_violated_k = Some(k + 1);
        }
    }

    AdmissibilityCertificate {
        admissible: trace_ok && first_violated_k.is_none(),
        trace_gap,
        first_violated_k,
        partial_sums_r: partial_r,
        partial_sums_lambda: partial_l,
    }
}

/// Decides whether `r` lies in the convex hull of the permutations of
/// `lambda_padded` by enumerating all distinct permutations as LP vertices
/// and running a phase-one simplex feasibility solve.
///
/// Independent of [`is_admissible`] by construction; limited to `N <= 8`.
pub fn hull_membership_oracle(lambda_padded: &[f64], r: &[f64]) -> Result<bool> {
    let n = lambda_padded.len();
    if n > HULL_ORACLE_MAX_N {
        return Err(QError::SizeError(n));
    }
    if r.len() != n {
        return Err(QError::DimensionMismatch(format!(
            "lambda has length {}, r has length {}",
            n,
            r.len()
        )));
    }
    let vertices = distinct_permutations(lambda_padded);
    let scale = lambda_padded
        .iter()
        .chain(r.iter())
        .fold(1.0f64, |acc, v| acc.max(v.abs()));
    Ok(in_convex_hull(&vertices, r, 1e-9 * scale))
}

/// All distinct permutations of `values` (duplicates collapse, which matters
/// a lot when the padded spectrum carries repeated zeros).
fn distinct_permutations(values: &[f64]) -> Vec<Vec<f64>> {
    let n = values.len();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut perm = values.to_vec();
    let mut used = vec![false; n];
    let mut current = Vec::with_capacity(n);
    permute_rec(&mut perm, &mut used, &mut current, &mut seen, &mut out);
    debug_assert!(!out.is_empty());
    out
}

fn permute_rec(
    values: &mut Vec<f64>,
    used: &mut Vec<bool>,
    current: &mut Vec<f64>,
    seen: &mut BTreeSet<Vec<u64>>,
    out: &mut Vec<Vec<f64>>,
) {
    let n = values.len();
    if current.len() == n {
        let key: Vec<u64> = current.iter().map(|v| v.to_bits()).collect();
        if seen.insert(key) {
            out.push(current.clone());
        }
        return;
    }
    let mut tried = BTreeSet::new();
    for i in 0..n {
        if used[i] || !tried.insert(values[i].to_bits()) {
            continue;
        }
        used[i] = true;
        current.push(values[i]);
        permute_rec(values, used, current, seen, out);
        current.pop();
        used[i] = false;
    }
}

/// Phase-one simplex: is there `w >= 0` with `V^T w = r` and `sum w = 1`?
///
/// Feasibility is declared when the minimized artificial mass is at most
/// `tol`. Bland's rule guards against cycling.
fn in_convex_hull(vertices: &[Vec<f64>], r: &[f64], tol: f64) -> bool {
    let n = r.len();
    let m = n + 1; // n coordinate constraints plus the affine one
    let p = vertices.len();
    let ncols = p + m;

    // rows: constraint matrix [V^T | I], rhs (r, 1); artificial basis
    let mut t: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut rhs: Vec<f64> = Vec::with_capacity(m);
    for i in 0..n {
        let mut row = vec![0.0; ncols];
        for (j, v) in vertices.iter().enumerate() {
            row[j] = v[i];
        }
        // keep rhs nonnegative for the artificial start
        if r[i] < 0.0 {
            for x in row.iter_mut() {
                *x = -*x;
            }
            rhs.push(-r[i]);
        } else {
            rhs.push(r[i]);
        }
        row[p + i] = 1.0;
        t.push(row);
    }
    let mut row = vec![0.0; ncols];
    for j in 0..p {
        row[j] = 1.0;
    }
    row[p + n] = 1.0;
    t.push(row);
    rhs.push(1.0);

    let mut basis: Vec<usize> = (p..p + m).collect();
    let cost = |j: usize| -> f64 {
        if j >= p {
            1.0
        } else {
            0.0
        }
    };
    let eps = 1e-11;

    loop {
        // reduced costs under the tableau representation
        let mut entering = None;
        for j in 0..ncols {
            if basis.contains(&j) {
                continue;
            }
            let mut zj = 0.0;
            for i in 0..m {
                zj += cost(basis[i]) * t[i][j];
            }
            if cost(j) - zj < -eps {
                entering = Some(j); // Bland: first improving index
                break;
            }
        }
        let Some(j) = entering else { break };

        let mut leaving: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..m {
            if t[i][j] > eps {
                let ratio = rhs[i] / t[i][j];
                if ratio < best_ratio - eps
                    || (ratio < best_ratio + eps
                        && leaving.map_or(true, |l| basis[i] < basis[l]))
                {
                    best_ratio = ratio;
                    leaving = Some(i);
                }
            }
        }
        let Some(i) = leaving else {
            // unbounded phase-one cannot happen; treat as infeasible
            return false;
        };

        let pivot = t[i][j];
        for x in t[i].iter_mut() {
            *x /= pivot;
        }
        rhs[i] /= pivot;
        for k in 0..m {
            if k != i && t[k][j].abs() > 0.0 {
                let f = t[k][j];
                for c in 0..ncols {
                    t[k][c] -= f * t[i][c];
                }
                rhs[k] -= f * rhs[i];
            }
        }
        basis[i] = j;
    }

    let artificial_mass: f64 =
        basis.iter().zip(&rhs).filter(|(b, _)| **b >= p).map(|(_, v)| v).sum();
    artificial_mass <= tol
}

/// The re-centering map `B -> B - (tr(B)/m) I`, landing in the traceless
/// Hermitian matrices.
pub fn recenter(b: &HermitianQ) -> HermitianQ {
    let m = b.n();
    let shift = b.mat().real_trace() / m as f64;
    let mut mat = b.mat().clone();
    for i in 0..m {
        mat[(i, i)] = Quaternion::real(mat[(i, i)].re() - shift);
    }
    HermitianQ::symmetrize(mat)
}

/// Diagonal analog of [`recenter`]: subtracts the mean-preserving shift
/// `sum(x)/m` from every entry.
pub fn recenter_diag(x: &[f64]) -> Vec<f64> {
    let shift = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| v - shift).collect()
}

/// The m real diagonal entries of a Hermitian matrix.
pub fn diag_of(h: &HermitianQ) -> Vec<f64> {
    h.diagonal()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::QMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn spec(v: &[f64]) -> SpectrumSpec {
        SpectrumSpec::new(v.to_vec()).unwrap()
    }

    fn norms(v: &[f64]) -> NormSpec {
        NormSpec::new(v.to_vec()).unwrap()
    }

    #[test]
    fn pad_examples() {
        let l = spec(&[2.0, 1.0]);
        assert_eq!(pad_spectrum(&l, 3).unwrap(), vec![2.0, 1.0, 0.0]);
        assert_eq!(pad_spectrum(&spec(&[1.0]), 1).unwrap(), vec![1.0]);
        assert_eq!(
            pad_spectrum(&spec(&[3.0, 2.0, 1.0]), 5).unwrap(),
            vec![3.0, 2.0, 1.0, 0.0, 0.0]
        );
        assert!(pad_spectrum(&l, 1).is_err());
    }

    #[test]
    fn untf_is_admissible() {
        for (d, n) in [(1usize, 3usize), (2, 4), (3, 7)] {
            let a = n as f64 / d as f64;
            let cert = is_admissible(&spec(&vec![a; d]), &norms(&vec![1.0; n]), DEFAULT_TOL);
            assert!(cert.admissible);
            assert!(cert.first_violated_k.is_none());
        }
    }

    #[test]
    fn prefix_violation_detected() {
        let cert = is_admissible(&spec(&[2.0, 1.0]), &norms(&[2.5, 0.4, 0.1]), DEFAULT_TOL);
        assert!(!cert.admissible);
        assert_eq!(cert.first_violated_k, Some(1));
    }

    #[test]
    fn interior_case_admissible() {
        let cert = is_admissible(&spec(&[2.0, 1.0]), &norms(&[1.0, 1.0, 1.0]), DEFAULT_TOL);
        assert!(cert.admissible);
        assert!(cert.trace_gap.abs() < 1e-12);
    }

    #[test]
    fn trace_mismatch_is_inadmissible() {
        let cert = is_admissible(&spec(&[2.0, 1.0]), &norms(&[1.0, 1.0]), DEFAULT_TOL);
        assert!(!cert.admissible);
        assert!((cert.trace_gap + 1.0).abs() < 1e-12);
    }

    #[test]
    fn fewer_norms_than_dimensions() {
        // N < d can never be admissible: positive spectrum forces a prefix
        // failure once the padded norms run out
        let cert = is_admissible(&spec(&[1.0, 1.0]), &norms(&[2.0]), DEFAULT_TOL);
        assert!(!cert.admissible);
    }

    #[test]
    fn permutation_and_scaling_invariance() {
        let mut rng = ChaCha20Rng::seed_from_u64(31);
        for _ in 0..50 {
            let d = rng.gen_range(1..=4);
            let n = rng.gen_range(d..=7);
            let lam: Vec<f64> = (0..d).map(|_| rng.gen_range(0.1..5.0)).collect();
            let r: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..5.0)).collect();
            let base = is_admissible(&spec(&lam), &norms(&r), DEFAULT_TOL);

            let mut r_shuffled = r.clone();
            r_shuffled.reverse();
            let shuffled = is_admissible(&spec(&lam), &norms(&r_shuffled), DEFAULT_TOL);
            assert_eq!(base.admissible, shuffled.admissible);

            let c = rng.gen_range(0.5..3.0);
            let scaled = is_admissible(
                &spec(&lam.iter().map(|v| v * c).collect::<Vec<_>>()),
                &norms(&r.iter().map(|v| v * c).collect::<Vec<_>>()),
                DEFAULT_TOL,
            );
            assert_eq!(base.admissible, scaled.admissible);
        }
    }

    #[test]
    fn oracle_vertex_and_barycenter() {
        let lam = [2.0, 1.0, 0.0];
        assert!(hull_membership_oracle(&lam, &[2.0, 1.0, 0.0]).unwrap());
        assert!(hull_membership_oracle(&lam, &[0.0, 2.0, 1.0]).unwrap());
        let bary = [1.0, 1.0, 1.0];
        assert!(hull_membership_oracle(&lam, &bary).unwrap());
        assert!(!hull_membership_oracle(&lam, &[2.5, 0.4, 0.1]).unwrap());
        assert!(matches!(
            hull_membership_oracle(&vec![1.0; 9], &vec![1.0; 9]),
            Err(QError::SizeError(9))
        ));
    }

    #[test]
    fn oracle_agrees_with_prefix_criterion() {
        let mut rng = ChaCha20Rng::seed_from_u64(32);
        for case in 0..300 {
            let d = rng.gen_range(1..=4);
            let n = rng.gen_range(d..=7);
            let lam: Vec<f64> = (0..d).map(|_| rng.gen_range(0.1..5.0)).collect();
            let lspec = spec(&lam);
            // half the cases share the spectrum total so both outcomes occur
            let r: Vec<f64> = if case % 2 == 0 {
                let mut r: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..5.0)).collect();
                let s: f64 = r.iter().sum();
                let target = lspec.sum();
                r.iter_mut().for_each(|v| *v *= target / s);
                r
            } else {
                (0..n).map(|_| rng.gen_range(0.1..5.0)).collect()
            };
            let rspec = norms(&r);
            let fast = is_admissible(&lspec, &rspec, DEFAULT_TOL).admissible;
            let padded = pad_spectrum(&lspec, n).unwrap();
            let slow = hull_membership_oracle(&padded, rspec.sorted()).unwrap();
            assert_eq!(fast, slow, "disagree on lambda={lam:?} r={r:?}");
        }
    }

    #[test]
    fn recenter_properties() {
        use crate::qmat::QMatrix;
        let b = HermitianQ::new(QMatrix::identity(2)).unwrap();
        let t = recenter(&b);
        assert!(t.mat().norm_inf() < 1e-15);
        assert_eq!(recenter_diag(&[3.0, 1.0]), vec![1.0, -1.0]);

        let mut rng = ChaCha20Rng::seed_from_u64(33);
        for _ in 0..20 {
            let raw = QMatrix::from_fn(3, 3, |_, _| {
                Quaternion::new(rng.gen(), rng.gen(), rng.gen(), rng.gen())
            });
            let h = HermitianQ::symmetrize(raw);
            // diagram: diag(recenter(B)) = recenter_diag(diag(B))
            let lhs = diag_of(&recenter(&h));
            let rhs = recenter_diag(&diag_of(&h));
            for (a, b) in lhs.iter().zip(&rhs) {
                assert!((a - b).abs() < 1e-13);
            }
            assert!(recenter(&h).mat().real_trace().abs() < 1e-12);
        }
    }

    #[test]
    fn diag_of_examples() {
        let h = HermitianQ::new(QMatrix::identity(3)).unwrap();
        assert_eq!(diag_of(&h), vec![1.0, 1.0, 1.0]);
    }
}
