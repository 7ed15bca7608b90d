//! Finite-blocklength achievability bounds for noisy permutation channels.
//!
//! A noisy permutation channel passes a codeword through a discrete memoryless
//! channel and then shuffles the output, so only the output's symbol counts
//! carry information. Codes are packings of output distributions; this crate
//! builds those packings, evaluates union bounds on their maximum-likelihood
//! error, searches for the largest code meeting a target error, evaluates the
//! Gaussian approximations of that size, and checks everything by simulation.
//!
//! All numerics are generic over [`Real`] (`f64` or `f32`). Logarithms of
//! divergences and code sizes are in bits. Concrete `f64` aliases live at the
//! crate root.

pub mod approx;
pub mod bounds;
pub mod channel;
pub mod error;
pub mod linalg;
pub mod packing;
pub mod prob;
pub mod scalar;
pub mod sim;

pub use bounds::{BoundPoint, ChannelSpec, Method};
pub use channel::ChannelMatrix;
pub use error::{Error, Result};
pub use packing::{MessageSet, PackingKind};
pub use prob::{Distribution, LlrMoments};
pub use scalar::Real;
pub use sim::{SimConfig, SimReport};

pub type Distribution64 = Distribution<f64>;
pub type ChannelMatrix64 = ChannelMatrix<f64>;
pub type MessageSet64 = MessageSet<f64>;
pub type BoundPoint64 = BoundPoint<f64>;
pub type ChannelSpec64 = ChannelSpec<f64>;
pub type SimConfig64 = SimConfig<f64>;
pub type LlrMoments64 = LlrMoments<f64>;

pub type Distribution32 = Distribution<f32>;
pub type ChannelMatrix32 = ChannelMatrix<f32>;
pub type MessageSet32 = MessageSet<f32>;
