//! The σ-function of the Painlevé III equation attached to the weight: small-s series,
//! large-s expansion, numerical trajectories and the Lax-system route.

pub mod fit;
pub mod lax;
pub mod params;
pub mod rk;
pub mod series;
pub mod sigma;
mod taylor;

pub use params::{PIIIParams, SmallSKind};
pub use series::SmallSeries;
pub use sigma::{
    boundary_check, integrate_sigma, q_derivs, q_from_sigma, seed_large_s, seed_small_s, sigma_form_residual,
    u_from_q, BoundaryCheck, Engine, QDerivs, Seed, SigmaOptions, SigmaPoint, SigmaState, SigmaTrajectory,
};
pub use lax::{
    integrate_lax, lax_seed_from_series, lax_seed_from_sigma, lax_seed_large_s, transform, transform_at, Crossing,
    LaxState, LaxTrajectory, Transformed,
};
