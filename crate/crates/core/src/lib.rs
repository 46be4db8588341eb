//! Assumed-mode modeling, sliding-mode control, functional-observer synthesis
//! and closed-loop simulation for a single-link flexible manipulator.
//!
//! The crate is organized around the design pipeline:
//!
//! 1. [`beam`] / [`modal`]: physical parameters and the spatial
//!    eigenstructure of the link (characteristic roots, natural frequencies,
//!    mode shapes).
//! 2. [`plant`]: finite-dimensional modal dynamics and the state-space model
//!    for any retained mode count.
//! 3. [`smc`]: sliding function, full-state control law and the reaching-time
//!    bound.
//! 4. [`observer`]: reduced-order functional observer synthesis and the
//!    composite closed-loop matrix.
//! 5. [`sim`]: fixed-step closed-loop simulation, including the
//!    model-mismatch experiment where a two-mode design drives a five-mode
//!    plant.
//!
//! All numerics are generic over [`scalar::Real`] (`f32` or `f64`); the
//! `*F64` aliases below are the concrete types used by the CLI.

pub mod beam;
pub mod error;
pub mod fixture;
pub mod modal;
pub mod observer;
pub mod plant;
pub mod scalar;
pub mod sim;
pub mod smc;

pub use beam::BeamParams;
pub use error::{Error, Result};
pub use modal::{ModalData, ModeShape, Normalization};
pub use observer::{CompositeSystem, FunctionalGain, ObserverSpec, SynthesisReport};
pub use plant::{PlantModel, StateVector};
pub use scalar::Real;
pub use sim::{Controller, SimConfig, SimResult, SimSummary, TorqueProfile};
pub use smc::{ReferenceSignal, SlidingSpec};

/// Concrete aliases for the common double-precision instantiation.
pub type BeamParamsF64 = BeamParams<f64>;
pub type ModalDataF64 = ModalData<f64>;
pub type ModeShapeF64 = ModeShape<f64>;
pub type PlantModelF64 = PlantModel<f64>;
pub type SlidingSpecF64 = SlidingSpec<f64>;
pub type ReferenceSignalF64 = ReferenceSignal<f64>;
pub type ObserverSpecF64 = ObserverSpec<f64>;
pub type SimConfigF64 = SimConfig<f64>;
pub type SimResultF64 = SimResult<f64>;
pub type ControllerF64 = Controller<f64>;
