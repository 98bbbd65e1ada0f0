//! Residue hyperdimensional computing.
//!
//! Integers are encoded as products of phasor vectors, one per coprime modulus, so
//! that addition and multiplication become componentwise operations and decoding
//! becomes a factorization solved by a resonator network.
// `!(x > 0.0)` style guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod error;
pub mod experiment;
pub mod hex;
pub mod kernel;
pub mod numeric;
pub mod par;
pub mod phasor;
pub mod residue;
pub mod resonator;
pub mod scene;
pub mod seed;
pub mod subset_sum;

/// Library version.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, Result};
pub use par::Execution;
pub use phasor::{ComplexVector, ExactPhasor, ModulusBase, NoiseModel, PhasorVector};
pub use residue::ResidueSystem;
