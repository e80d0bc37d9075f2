//! Exact arithmetic on the field of p-adic numbers and its calculus.
//!
//! Everything here is computed over arbitrary-precision rationals: valuations
//! and norms on `Q`, finite-precision p-adic expansions, Haar-measure
//! integrals of radial functions, the Vladimirov derivative `D^alpha` with its
//! p-adic Gamma-function closed forms, and an eigenvalue solver for
//!
//! ```text
//! D^2 psi(x) + B |x|_p^2 psi(x) = E psi(x)
//! ```
//!
//! built on the coefficient recurrences of the piecewise power-series ansatz.
//! No floating point is used anywhere; every closed form is paired with a
//! truncated shell-sum oracle that checks it to a declared tail bound.

pub mod error;
pub mod haar;
pub mod padic;
pub mod rational;
pub mod schrodinger;
pub mod vladimirov;

pub use error::Error;
pub use rational::BigRational;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
