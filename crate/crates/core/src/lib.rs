//! Quasi-exactly solvable spectra of sextic and hyperbolic Schrödinger
//! operators.
//!
//! Four independent routes lead to the same numbers:
//!
//! * [`bethe`]: roots of Gaudin-type Bethe ansatz equations,
//! * [`fock`]: exact diagonalization of conserved boson sectors,
//! * [`bender_dunne`]: zeros of Bender-Dunne polynomials,
//! * [`schrodinger`]: shooting on the real line and on complex contours.
//!
//! [`transforms`] builds the supersymmetric and Darboux-Crum partners, and
//! [`cli`] drives the whole thing from the command line.

pub mod bender_dunne;
pub mod bethe;
pub mod cli;
pub mod error;
pub mod fock;
pub mod model;
pub mod ode;
pub mod poly;
pub mod schrodinger;
pub mod transforms;

pub use error::{QesError, Result};
pub use model::{
    HyperbolicBc, HyperbolicBranch, HyperbolicModelSpec, HyperbolicSpec, Level, Method,
    SexticBc, SexticBranch, SexticModelSpec, SexticSpec, Spectrum,
};
