//! Numerical laboratory for training data re-uploading variational circuits on
//! a simulated noisy device while learning and applying a linear noise map in
//! real time.
//!
//! The crate is organized around the pipeline:
//!
//! - [`circuit`] / [`densesim`]: gate-list circuits with exact statevector and
//!   density-matrix execution, Pauli/readout channels and shot sampling;
//! - [`stabsim`]: tableau Clifford simulation and Heisenberg back-propagation;
//! - [`model`]: the re-uploading ansatz and its prediction backends;
//! - [`noise`]: channel parameters, the expectation concentration bound, and
//!   random-walk noise evolution;
//! - [`mitigation`]: Clifford-surrogate learning of the linear noise map,
//!   drift probing, and Bayesian readout unfolding;
//! - [`training`]: parameter-shift gradients, Adam, and the four training
//!   modes (noiseless, noisy, fqem, rtqem);
//! - [`targets`]: regression target generators and CSV ingestion.

pub mod circuit;
pub mod densesim;
pub mod error;
pub mod mitigation;
pub mod model;
pub mod noise;
pub mod rng;
pub mod stabsim;
pub mod targets;
pub mod training;

pub use circuit::{Circuit, Gate, GateKind};
pub use densesim::{DensityMatrix, StateVector};
pub use error::{Error, Result};
pub use mitigation::NoiseMap;
pub use model::{Activation, Backend, ModelSpec, UploadingParams};
pub use noise::{ChannelPlacement, NoiseModel, PauliNoiseParams, RandomWalkConfig, ReadoutParams};
pub use stabsim::{CliffordCircuit, PauliString, StabilizerTableau};
pub use targets::TargetSpec;
pub use training::{Dataset, Mode, RunArtifacts, TrainingConfig};
