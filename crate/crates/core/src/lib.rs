//! Region-level correspondence between non-rigid shapes.

pub mod error;
pub mod geom;
mod linalg;
pub mod matching;
pub mod pipeline;
pub mod segment;
pub mod spectral;
pub mod symmetry;
pub mod synthetic;

pub use error::{Error, Result};
