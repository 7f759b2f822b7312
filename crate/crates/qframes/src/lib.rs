//! Quaternionic linear algebra and finite frame theory.
//!
//! The crate provides exact-arithmetic-free but carefully toleranced
//! numerics for frames in quaternionic Hilbert spaces `H^d`:
//!
//! * [`quat`] — scalar quaternion arithmetic;
//! * [`qmat`] — dense quaternionic matrices over the right-module
//!   convention and the complex embedding `Psi`;
//! * [`spectral`] — Hermitian eigendecomposition and SVD through the
//!   embedding, with symmetry-pair selection;
//! * [`frames`] — frames, frame operators, Gram matrices and spectra;
//! * [`admissibility`] — majorization test for which spectra and norm
//!   profiles are jointly realizable;
//! * [`synthesis`] — constructive Schur–Horn synthesis and seeded random
//!   frames in a prescribed stratum;
//! * [`homotopy`] — discretized paths between frames in a common stratum.

pub mod admissibility;
pub mod error;
pub mod frames;
pub mod homotopy;
pub mod qmat;
pub mod quat;
pub mod spectral;
pub mod synthesis;

pub use error::{QError, Result};
pub use frames::{Frame, NormSpec, SpectrumSpec};
pub use qmat::{HermitianQ, QMatrix};
pub use quat::Quaternion;
