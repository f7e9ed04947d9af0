//! Quasi-exact bound states of the O(N)-invariant quartic anharmonic oscillator.
//!
//! The radial problem with potential `V(r) = λ1 r + λ2 r² + λ4 r⁴` admits
//! solutions of the form `r^l Φ(r) exp(-αr - βr³/3)` with polynomial `Φ`
//! whenever `λ1` is quantized against the polynomial degree. This crate
//! builds the finite recurrence matrices for `Φ`, solves them, locates the
//! zeros of `Φ` through the Niven equations and checks every level against a
//! finite-difference radial eigensolver.
//!
//! Module map:
//!
//! * [`model`]: problem/ansatz types, potential and wavefunction evaluation
//! * [`matrices`]: the coefficient recurrence and the `F`, `P`, `Q` matrices
//! * [`spectra`]: eigen-solve for `N = 1`, coupled `(E, β)` Newton for `N > 1`,
//!   closed forms and the physical-subspace projector
//! * [`niven`]: zeros of `Φ` and global consistency checks
//! * [`oracle`]: independent numerical verification
//! * [`cli`]: the `qes` command-line front end

pub mod cli;
pub mod error;
pub mod linalg;
pub mod matrices;
pub mod model;
pub mod niven;
pub mod oracle;
pub mod poly;
pub mod spectra;

pub use error::{QesError, Result};
pub use model::{AnsatzParams, OscillatorSpec, QesSolution, Sector, WavefunctionSample};
