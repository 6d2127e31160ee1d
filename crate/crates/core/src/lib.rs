//! Statistical-discrimination hiring game: signal models, best-response
//! curves, equilibria under fairness policies, and welfare comparison.
//!
//! The numeric core is generic over [`Real`] (`f64` or `f32`); the aliases
//! below fix the scalar for the common case. Data handling is `f64` only.

pub mod data_pipeline;
pub mod eo_derivation;
pub mod equilibrium;
pub mod error;
pub mod game_core;
pub mod scalar;
pub mod signal_model;
pub mod welfare;

pub use equilibrium::{solve, verify, Policy, Stability};
pub use error::{Error, Result};
pub use scalar::Real;
pub use signal_model::{Effort, Group};
pub use welfare::{AwMode, Selection};

pub type SignalModelF64 = signal_model::SignalModel<f64>;
pub type SignalModelF32 = signal_model::SignalModel<f32>;
pub type GameParamsF64 = game_core::GameParams<f64>;
pub type GameParamsF32 = game_core::GameParams<f32>;
pub type SolverConfigF64 = equilibrium::SolverConfig<f64>;
pub type SolverConfigF32 = equilibrium::SolverConfig<f32>;
pub type EquilibriumF64 = equilibrium::Equilibrium<f64>;
pub type EquilibriumF32 = equilibrium::Equilibrium<f32>;
pub type RocCurveF64 = signal_model::RocCurve<f64>;
pub type RocCurveF32 = signal_model::RocCurve<f32>;
