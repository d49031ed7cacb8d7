//! Multiplicities of closed geodesics on the modular surface, computed from
//! class numbers of indefinite binary quadratic forms, together with their
//! empirical pair correlation and its Euler-product prediction.
//!
//! Module map:
//!
//! * [`arith`]: factorization, square divisors, Legendre/Jacobi/Kronecker characters;
//! * [`forms`]: reduced forms, class numbers, Pell units, `L(1, χ_d)`;
//! * [`spectrum`]: trace decompositions `n^2 - 4 = d v^2` and the multiplicity sieve;
//! * [`local`]: local densities `β_(p)`, their Fourier coefficients and the
//!   local factors `A_r(p^b)` of the Euler product;
//! * [`correlation`]: empirical means, Fourier coefficients and pair correlations;
//! * [`verify`]: oracle batteries shared by the CLI and the test suites.

pub mod arith;
pub mod correlation;
pub mod error;
pub mod exec;
pub mod forms;
pub mod local;
pub mod special;
pub mod spectrum;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Execution;
