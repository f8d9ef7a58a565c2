//! Numerical laboratory for spatially localized oscillons in a parametrically
//! forced model PDE and its amplitude equations.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod continuation;
pub mod etd;
pub mod field;
pub mod floquet;
pub mod model;
pub mod reduction;
pub mod spectral;

pub use error::{Error, Result};
pub use field::ComplexField;
pub use model::{FcglParams, FlatRoot, FlatStateSet, ModelParams, ScalingMap};
pub use spectral::{SpectralEngine, SpectralField};
