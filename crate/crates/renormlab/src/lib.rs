//! Numerical laboratory for mass renormalization of a non-relativistic
//! one-electron atom coupled to the radiation field in two and three spatial
//! dimensions.
//!
//! Units are natural, ħ = c = 1, with times measured in Compton times
//! t̃ = 1/m. The crate is organized bottom-up:
//!
//! * [`kernels`]: the Gaussian-regularized auxiliary functions ρ_α, Ξ_α, 𝓕_α
//!   and the finite constant ζ.
//! * [`rrforce`]: the radiation-reaction force on a prescribed trajectory,
//!   exactly at finite α and in its asymptotic form, with divergence fits.
//! * [`renorm`]: the bare mass, the counterterm series and discarded constants.
//! * [`atom`]: bound-state energies and momentum matrix elements.
//! * [`rspt`]: naive and renormalized second-order level shifts.
//! * [`memconv`]: the logarithmic-memory convolution in time and frequency.
//! * [`meanfield`]: the renormalized mean-field propagator.
//!
//! Data-parallel loops go through [`exec::Exec`], which uses rayon when the
//! `parallel` feature is on and plain iterators otherwise.

// NaN must fail the precondition checks, so they are written as negated
// comparisons; reference constants keep their published digits; index loops
// mirror the component sums they implement.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision, clippy::needless_range_loop)]

pub mod atom;
pub mod error;
pub mod exec;
pub mod fit;
pub mod kernels;
pub mod meanfield;
pub mod memconv;
pub mod model;
pub mod motion;
pub mod quad;
pub mod renorm;
pub mod rrforce;
pub mod rspt;
pub mod special;

pub use error::{Error, Result};
pub use exec::Exec;
