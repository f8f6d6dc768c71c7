//! Conditional signal-field statistics of a high-gain optical parametric
//! amplifier whose idler is read out by an inefficient photon counter.
//!
//! The signal enters in a coherent state, the idler in vacuum. Conditioning on
//! the idler detector's count leaves the signal in a mixture of photon-added
//! coherent states whose quadrature and photon-number distributions can sit far
//! outside the range of any single member (weak values). The crate computes
//! these statistics twice: numerically from truncated Fock-space states, and
//! from closed-form Gaussian/Laguerre expressions. The two are cross-checked.
//!
//! All numerics are generic over [`Real`] (`f32`/`f64`); the `*64` aliases
//! below fix the scalar to `f64`, which is what the default tolerances assume.

pub mod analytic;
pub mod error;
pub mod fock;
pub mod measurement;
pub mod observables;
pub mod scalar;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Real;

pub type SchemeParams64 = fock::SchemeParams<f64>;
pub type FockVector64 = fock::FockVector<f64>;
pub type TwoModeState64 = fock::TwoModeState<f64>;
pub type DensityMatrix64 = fock::DensityMatrix<f64>;
pub type SignalEnsemble64 = measurement::SignalEnsemble<f64>;





pub type Distribution1D64 = observables::Distribution1D<f64>;
pub type WignerGrid64 = observables::WignerGrid<f64>;
pub type MomentReport64 = observables::MomentReport<f64>;
pub type ClosedFormContext64 = analytic::ClosedFormContext<f64>;
