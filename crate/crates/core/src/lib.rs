//! Order-revealing encryption, encrypted-threshold learning and tracing
//! experiments.

pub mod codec;
pub mod enc_thresh;
pub mod error;
pub mod games;
pub mod harness;
pub mod opf;
pub mod ore;
pub mod reident;
pub mod rng;
pub mod signature;
pub mod sq;
pub mod stats;
pub mod strengthen;
pub mod validsig;

pub use error::{Error, Result};
