//! Toolkit for stochastic safety certificates of interconnected
//! discrete-time systems under Markovian switching.
//!
//! The crate is organised around a pipeline:
//!
//! 1. [`model`] — subsystem and network descriptions (mode-indexed polynomial
//!    dynamics, Markov switching, box regions, interconnection matrix).
//! 2. [`synth`] — counterexample-guided search for per-subsystem storage
//!    certificates and affine safety controllers.
//! 3. [`certify`] — sound verification of storage-certificate conditions via
//!    interval branch-and-bound, plus direct barrier checks on small networks.
//! 4. [`compose`] — dissipativity-based composition of subsystem certificates
//!    into a network barrier certificate.
//! 5. [`bound`] — finite-horizon safety probability bounds from the composed
//!    certificate constants.
//! 6. [`sim`] — seeded Monte Carlo validation of the closed loop.
//!
//! [`poly`] provides the shared sparse-polynomial arithmetic (with Gaussian
//! moment expectation and interval bounding) and [`linalg`] the small dense
//! matrix helpers (Jacobi eigenvalues, Gershgorin bounds).

pub mod bound;
pub mod certify;
pub mod compose;
pub mod linalg;
pub mod model;
pub mod poly;
pub mod sim;
pub mod synth;

pub use poly::{NonnegBudget, NonnegOutcome, Polynomial, Region, VarRole, VarSpace};
