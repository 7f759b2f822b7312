//! Quaternion scalar arithmetic.
//!
//! A quaternion is `a + b i + c j + d k` with the Hamilton relations
//! `i^2 = j^2 = k^2 = ijk = -1`. Multiplication is not commutative;
//! everything downstream treats quaternionic vector spaces as *right*
//! modules so that left matrix multiplication stays linear.

use crate::error::{QError, Result};
use num_complex::Complex64;
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// A quaternion `a + b i + c j + d k` with `f64` coefficients.
///
/// Serialized in every file format as the 4-element array `[a, b, c, d]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quaternion {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

pub const ZERO: Quaternion = Quaternion { a: 0.0, b: 0.0, c: 0.0, d: 0.0 };
pub const ONE: Quaternion = Quaternion { a: 1.0, b: 0.0, c: 0.0, d: 0.0 };
pub const I: Quaternion = Quaternion { a: 0.0, b: 1.0, c: 0.0, d: 0.0 };
pub const J: Quaternion = Quaternion { a: 0.0, b: 0.0, c: 1.0, d: 0.0 };
pub const K: Quaternion = Quaternion { a: 0.0, b: 0.0, c: 0.0, d: 1.0 };

impl Quaternion {
    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Quaternion { a, b, c, d }
    }

    /// A real quaternion `a + 0i + 0j + 0k`.
    pub const fn real(a: f64) -> Self {
        Quaternion::new(a, 0.0, 0.0, 0.0)
    }

    /// Builds `z + w j` from the complex pair `(z, w)`.
    ///
    /// This is the splitting used by the complex embedding: for
    /// `q = a + bi + cj + dk`, `z = a + bi` and `w = c + di`.
    pub fn from_complex_pair(z: Complex64, w: Complex64) -> Self {
        Quaternion::new(z.re, z.im, w.re, w.im)
    }

    /// Splits `q = z + w j` into `(z, w)`.
    pub fn complex_pair(&self) -> (Complex64, Complex64) {
        (Complex64::new(self.a, self.b), Complex64::new(self.c, self.d))
    }

    /// Conjugate `a - bi - cj - dk`.
    pub fn conj(&self) -> Self {
        Quaternion::new(self.a, -self.b, -self.c, -self.d)
    }

    /// Modulus `sqrt(a^2 + b^2 + c^2 + d^2)`.
    pub fn modulus(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Squared modulus `q * conj(q)`, always a nonnegative real.
    pub fn norm_sq(&self) -> f64 {
        self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d
    }

    /// Real part.
    pub fn re(&self) -> f64 {
        self.a
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }

    /// Multiplicative inverse `conj(q) / |q|^2`.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.norm_sq();
        if n < 1e-300 {
            return Err(QError::DivisionByZero);
        }
        Ok(self.conj().scale(1.0 / n))
    }

    pub fn scale(&self, s: f64) -> Self {
        Quaternion::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    /// Right division `p * q^{-1}`.
    pub fn div_right(&self, q: &Quaternion) -> Result<Self> {
        Ok(*self * q.inverse()?)
    }

    /// `q / |q|`, a versor (unit quaternion).
    pub fn versor(&self) -> Result<Self> {
        let m = self.modulus();
        if m < 1e-300 {
            return Err(QError::DivisionByZero);
        }
        Ok(self.scale(1.0 / m))
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, rhs: Quaternion) -> Quaternion {
        Quaternion::new(self.a + rhs.a, self.b + rhs.b, self.c + rhs.c, self.d + rhs.d)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, rhs: Quaternion) {
        *self = *self + rhs;
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, rhs: Quaternion) -> Quaternion {
        Quaternion::new(self.a - rhs.a, self.b - rhs.b, self.c - rhs.c, self.d - rhs.d)
    }
}

impl SubAssign for Quaternion {
    fn sub_assign(&mut self, rhs: Quaternion) {
        *self = *self - rhs;
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        self.scale(-1.0)
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    /// Hamilton product; `i*j = k`, `j*i = -k`, etc.
    fn mul(self, q: Quaternion) -> Quaternion {
        let p = self;
        Quaternion::new(
            p.a * q.a - p.b * q.b - p.c * q.c - p.d * q.d,
            p.a * q.b + p.b * q.a + p.c * q.d - p.d * q.c,
            p.a * q.c - p.b * q.d + p.c * q.a + p.d * q.b,
            p.a * q.d + p.b * q.c - p.c * q.b + p.d * q.a,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    fn mul(self, s: f64) -> Quaternion {
        self.scale(s)
    }
}

impl Div<f64> for Quaternion {
    type Output = Quaternion;
    fn div(self, s: f64) -> Quaternion {
        self.scale(1.0 / s)
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+.6}{:+.6}i{:+.6}j{:+.6}k", self.a, self.b, self.c, self.d)
    }
}

impl Serialize for Quaternion {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(4))?;
        seq.serialize_element(&self.a)?;
        seq.serialize_element(&self.b)?;
        seq.serialize_element(&self.c)?;
        seq.serialize_element(&self.d)?;
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Quaternion {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct QVisitor;
        impl<'de> Visitor<'de> for QVisitor {
            type Value = Quaternion;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a 4-element array [a, b, c, d]")
            }
            fn visit_seq<A: SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<Quaternion, A::Error> {
                let a = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let b = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(1, &self))?;
                let c = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(2, &self))?;
                let d = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(3, &self))?;
                if seq.next_element::<f64>()?.is_some() {
                    return Err(de::Error::invalid_length(5, &self));
                }
                Ok(Quaternion::new(a, b, c, d))
            }
        }
        d.deserialize_seq(QVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(p: Quaternion, q: Quaternion, tol: f64) -> bool {
        (p - q).modulus() <= tol
    }

    #[test]
    fn hamilton_relations() {
        assert_eq!(I * J, K);
        assert_eq!(J * K, I);
        assert_eq!(K * I, J);
        assert_eq!(J * I, -K);
        assert_eq!(K * J, -I);
        assert_eq!(I * K, -J);
        assert_eq!(I * I, -ONE);
        assert_eq!(J * J, -ONE);
        assert_eq!(K * K, -ONE);
        assert_eq!(I * J * K, -ONE);
    }

    #[test]
    fn identity_and_zero() {
        let q = Quaternion::new(1.5, -2.0, 0.25, 3.0);
        assert_eq!(q * ONE, q);
        assert_eq!(ONE * q, q);
        assert_eq!(ZERO.modulus(), 0.0);
    }

    #[test]
    fn conjugation() {
        let q = ONE + I;
        assert_eq!(q.conj(), ONE - I);
        assert_eq!(Quaternion::real(5.0).conj(), Quaternion::real(5.0));
        // conj(ij) = conj(k) = -k = conj(j)*conj(i)
        assert_eq!((I * J).conj(), -K);
        assert_eq!((I * J).conj(), J.conj() * I.conj());
        assert_eq!(q.conj().conj(), q);
    }

    #[test]
    fn modulus_values() {
        assert_eq!((ONE + I + J + K).modulus(), 2.0);
        assert_eq!(ZERO.modulus(), 0.0);
    }

    #[test]
    fn modulus_multiplicative_on_random_pairs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(17);
        for _ in 0..100 {
            let p = Quaternion::new(rng.gen(), rng.gen(), rng.gen(), rng.gen());
            let q = Quaternion::new(rng.gen(), rng.gen(), rng.gen(), rng.gen());
            assert!(((p * q).modulus() - p.modulus() * q.modulus()).abs() < 1e-12);
        }
    }

    #[test]
    fn associativity_and_antihomomorphism() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(23);
        for _ in 0..100 {
            let p = Quaternion::new(rng.gen(), rng.gen(), rng.gen(), rng.gen());
            let q = Quaternion::new(rng.gen(), rng.gen(), rng.gen(), rng.gen());
            let r = Quaternion::new(rng.gen(), rng.gen(), rng.gen(), rng.gen());
            assert!(close((p * q) * r, p * (q * r), 1e-14));
            assert!(close((p * q).conj(), q.conj() * p.conj(), 1e-14));
            let qq = q * q.conj();
            assert!(qq.b.abs() < 1e-14 && qq.c.abs() < 1e-14 && qq.d.abs() < 1e-14);
            assert!((qq.a - q.norm_sq()).abs() <= 1e-14 * (1.0 + q.norm_sq()));
        }
    }

    #[test]
    fn division() {
        let p = Quaternion::new(1.0, 2.0, 3.0, 4.0);
        let q = Quaternion::new(0.5, -1.0, 0.25, 2.0);
        let r = p.div_right(&q).unwrap();
        assert!(close(r * q, p, 1e-13));
        assert!(matches!(p.div_right(&ZERO), Err(QError::DivisionByZero)));
    }

    #[test]
    fn serde_roundtrip() {
        let q = Quaternion::new(1.0, -2.5, 0.0, 4.0);
        let s = serde_json::to_string(&q).unwrap();
        assert_eq!(s, "[1.0,-2.5,0.0,4.0]");
        let back: Quaternion = serde_json::from_str(&s).unwrap();
        assert_eq!(back, q);
    }
}
