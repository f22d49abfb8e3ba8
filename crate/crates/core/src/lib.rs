pub mod constants;
pub mod error;
pub mod fields;
pub mod kernels;
pub mod multiscale;
mod quad1d;
pub mod radial;
pub mod synth;

pub use error::{Error, Result};
pub use fields::{lp_norm, make_grid, GridSpec, ScalarField, SpectralField};
pub use multiscale::{ScaleQuadrature, SmoothnessOrder};
