//! Numerical machinery for normalized holomorphic maps on the Euclidean unit
//! ball of `C^n`.
//!
//! The crate is `no_std` (it needs `alloc`) and is organised bottom-up:
//!
//! * [`linalg`]: small dense complex matrices, Hermitian and general eigenvalues,
//!   pivoted solves.
//! * [`operator`] and [`resonance`]: invariants of a linear operator `A`
//!   (numerical range extrema, numerical radius, spectral abscissa, `e^{tA}`)
//!   and resonance detection.
//! * [`polymap`]: sparse polynomial maps `C^n -> C^n` with exact calculus.
//! * [`automorphism`]: shear/overshear/linear words with exact inverses.
//! * [`criteria`]: sampled membership tests (Carathéodory class, spirallike,
//!   g-starlike, convex, `Q`, `Q~`, `K~`).
//! * [`loewner`]: Loewner flows for piecewise-constant Herglotz fields.
//! * [`approximation`]: dilation schedules and candidate selection.
//!
//! Enable the `parallel` feature to evaluate criteria over sample points with
//! rayon. Reductions are ordered, so results do not depend on the thread count.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` is deliberate throughout: it rejects NaN along with the failing case.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod approximation;
pub mod automorphism;
pub mod catalog;
pub mod criteria;
mod error;
mod exec;
pub mod linalg;
pub mod loewner;
pub mod operator;
pub mod polymap;
pub mod resonance;
pub mod sample;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Version string embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
