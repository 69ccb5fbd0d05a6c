//! Local information operators for distributed-parameter inverse problems in
//! structural mechanics.
//!
//! The core object is the local information operator `J^T R^{-1} J` of a
//! linearized parameter-to-observation map. Around it the crate provides
//! spectral diagnostics (raw, mass-weighted, prior-preconditioned and
//! randomized modes, stochastic diagonals), Gaussian prior tools
//! (likelihood-informed subspaces, weak-direction gain), and the mechanics
//! testbeds used to exercise them: closed-form simply supported beam kernels,
//! a Hermite finite-element beam, frequency-response observations, a
//! static/dynamic fusion benchmark and a plane-stress damage benchmark.
//!
//! The algebraic and spectral layers are generic over [`Scalar`] (`f32` or
//! `f64`); the `*F64`/`*F32` aliases below name the common instantiations.

pub mod beam_analytic;
pub mod beam_dynamic;
pub mod beam_fe;
pub mod csvio;
pub mod damage2d;
mod error;
pub mod fusion;
pub mod linalg;
pub mod opcore;
pub mod prior;
mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use opcore::{InfoOperator, JointInfoBlocks, NoiseCov, ObservationBlock};
pub use prior::{LisResult, PriorModel};
pub use spectral::{Metric, ModeSet};

pub type InfoOperatorF64 = InfoOperator<f64>;
pub type InfoOperatorF32 = InfoOperator<f32>;
pub type ObservationBlockF64 = ObservationBlock<f64>;
pub type ObservationBlockF32 = ObservationBlock<f32>;
pub type ModeSetF64 = ModeSet<f64>;
pub type ModeSetF32 = ModeSet<f32>;
pub type PriorModelF64 = PriorModel<f64>;
pub type PriorModelF32 = PriorModel<f32>;
pub type BeamSpecF64 = beam_analytic::BeamSpec<f64>;
pub type BeamMeshF64 = beam_fe::BeamMesh<f64>;
pub type DynamicSpecF64 = beam_dynamic::DynamicSpec<f64>;
