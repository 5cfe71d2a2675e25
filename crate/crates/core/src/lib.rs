//! Spin-1 defect in a uniformly rotating frame: Hamiltonians, Floquet
//! quasi-energies, time evolution, nonadiabatic geometric phases and the
//! resonance / metrology formulas built on them.
//!
//! The numerical core is generic over [`Real`] (`f32`, `f64`); the aliases at
//! the crate root fix it to `f64`, which is what every tolerance quoted in the
//! docs assumes.

// `!(a < b)` is used deliberately so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli_io;
pub mod dynamics;
pub mod error;
pub mod floquet;
pub mod geomphase;
pub mod model;
pub mod real;
pub mod selftest;
pub mod sensing;
pub mod spin_algebra;

pub use error::{Error, Result};
pub use real::Real;
pub use spin_algebra::Level;

pub type ComplexMatrix = spin_algebra::CMatrix<f64>;
pub type EigenSystem = spin_algebra::EigenSystem<f64>;
pub type SpinOperatorSet = spin_algebra::SpinOperatorSet<f64>;
pub type RotorParams = model::RotorParams<f64>;
pub type DerivedScales = model::DerivedScales<f64>;
pub type QuasiState = floquet::QuasiState<f64>;
pub type QuasiSpectrum = floquet::QuasiSpectrum<f64>;
pub type CrossingReport = floquet::CrossingReport<f64>;
pub type EvolutionTrace = dynamics::EvolutionTrace<f64>;
pub type Monodromy = dynamics::Monodromy<f64>;
pub type CyclicTrajectory = dynamics::CyclicTrajectory<f64>;
pub type RabiFit = dynamics::RabiFit<f64>;
pub type GeometricPhaseSet = geomphase::GeometricPhaseSet<f64>;
pub type ResonanceSolution = sensing::ResonanceSolution<f64>;
