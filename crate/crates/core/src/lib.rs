//! Markov semigroups of Schur multipliers built from Hilbert-space point
//! embeddings, together with their Gaussian dilations.
//!
//! Everything lives on a finite weighted point set ([`FiniteSpace`]). An
//! [`Embedding`] `x ↦ α_x ∈ R^d` defines the negative definite kernel
//! `ψ(x,y) = ‖α_x − α_y‖²` and the semigroup `T_t` of Schur multipliers with
//! symbols `e^{−tψ}`. The crate checks, numerically and per sample path, that
//! `T_t = E U_t J` for the group `U_t` of conjugations by the random unitaries
//! `e^{i√2 W_t(α_x)}` driven by a grid-discretized cylindrical Brownian motion,
//! and that the associated embeddings form standard and reversed Markov
//! dilations.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod calculus;
pub mod dilation;
mod error;
pub mod gaussian;
pub mod kernels;
mod linalg;
pub mod markov;
mod math;
pub mod mc;
pub mod operators;
pub mod partition;
pub mod semigroup;
pub mod space;

pub use error::{Error, Result};
pub use kernels::{DefinitenessCertificate, Kernel};
pub use num_complex::Complex64 as C64;
pub use operators::HSOperator;
pub use semigroup::SchurSemigroup;
pub use space::{Embedding, FiniteSpace};

/// Dense complex matrix type used for kernels and operator representations.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense real matrix type used for embeddings and standard errors.
pub type RMatrix = nalgebra::DMatrix<f64>;
