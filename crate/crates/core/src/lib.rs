//! Decoders for the rotated planar surface code and a Monte Carlo harness for
//! estimating logical error rates and thresholds.

pub mod bits;
pub mod bposd;
pub mod code;
pub mod decoder;
pub mod error;
pub mod eval;
pub mod gf2;
pub mod lattice;
pub mod mwpm;
pub mod noise;
pub mod pauli;
pub mod tn;
pub mod uf;

pub use bits::BitVec;
pub use code::{build_code, logical_class, syndrome, CheckKind, LogicalClass, RotatedPlanarCode, Side, Syndrome};
pub use decoder::{Decoder, DecoderKind, DecoderParams, RegisteredDecoder};
pub use error::{Error, Result};
pub use eval::{CurvePoint, StopRule};
pub use pauli::{Pauli, PauliOperator};
pub use noise::{NoiseModel, PauliChannelParams, SampledError};
