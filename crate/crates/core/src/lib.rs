//! Series representations and runtime approximation of quantile functions
//! for the hyperbolic, variance gamma, generalized inverse Gaussian and
//! alpha-stable distributions.

pub mod accel;
pub mod builder;
pub mod dist;
pub mod error;
pub mod gig;
pub mod hyperbolic;
pub mod model;
pub mod quad;
pub mod series;
pub mod special;
pub mod stable;
pub mod vg;

pub use error::{Error, Result};
