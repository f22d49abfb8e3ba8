//! Fundamental solutions of fractional Laplacians, the scale-indexed
//! kernels built from them, principal-value ball Riesz integrals, and a
//! numerical scanner for strengthened Hörmander conditions.

mod calibrate;
mod hormander;
mod kernel;
mod pv;
mod radial_fn;

pub use calibrate::{fundamental_solution, is_log_case, FundamentalSolution, SolutionForm};
pub use hormander::{
    claimed_gamma, hormander_norm, hormander_scan, HormanderReport, HormanderSample,
};
pub use kernel::kernel_k;
pub use pv::pv_ball_riesz;
pub use radial_fn::RadialPowerLog;
