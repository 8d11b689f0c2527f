//! Numerical q-calculus: Jacobi theta and q-exponential functions, moment
//! derivatives, and contour-integral representations of q-, tilde-q- and
//! (p,q)-derivatives, each checked against an independent quadrature.
//!
//! The crate is organised bottom-up:
//!
//! * [`qcore`]: q-numbers, q- and (p,q)-factorials, moment sequences and
//!   their weight functions `ω_M`.
//! * [`special`]: `Θ_q`, `exp_q`, `E_q` on the Riemann surface of the
//!   logarithm, with argument reduction and certified truncation.
//! * [`series`]: truncated power series, moment derivatives and pointwise
//!   difference operators, plus a corpus of reference functions.
//! * [`quad`]: ray and circle quadrature with envelope-certified truncation.
//! * [`repr`]: the moment integrals, Cauchy-kernel identities and the
//!   integral representations of the derivatives.
//! * [`kernels`]: the (p,q)-factorial convolution kernel and the associated
//!   Laplace-like operator.
//! * [`bounds`]: sampled certificates for the growth estimates.
//! * [`suite`] / [`report`]: batch verification and structured reports.

pub mod bounds;
pub mod error;
pub mod kernels;
pub mod qcore;
pub mod quad;
pub mod report;
pub mod repr;
pub mod sampling;
pub mod series;
pub mod special;
pub mod suite;

pub use error::{Error, Result};
pub use num_complex::Complex64;
