//! Monte Carlo for the subelliptic heat kernel and semigroup.
//!
//! The diffusion generated by `L = X^2 + Y^2 - beta X` started at the identity
//! has endpoint
//!
//! ```text
//! Z(t) = ( B(t) - beta t,  int_0^t exp((B(s) - beta s) A) ybar dW(s) )
//! ```
//!
//! for independent Brownian motions `B` and `W` run at rate
//! [`DIFFUSION_RATE`], i.e. `Var B(s) = 2 s`. (With standard Brownian motions
//! the generator would be `(X^2 + Y^2)/2 - beta X` instead.) Conditional on the
//! path of `B`, the `(x, y)` part is a centred Gaussian with covariance
//!
//! ```text
//! Sigma = 2 int_0^t exp((B(s) - beta s) A) ybar ybar^T exp((B(s) - beta s) A)^T ds,
//! ```
//!
//! so the density of `Z(t)` at `(theta, x, y)` is the density of the
//! `theta`-marginal times the average over Brownian bridges of the Gaussian
//! density `N(0, Sigma)` at `(x, y)`. [`kernel_point_estimate`] implements that
//! average; [`sample_endpoints`] simulates `Z(t)` directly for semigroup
//! estimates.
//!
//! The Gaussian density is unbounded as `det Sigma -> 0`, so the estimator is
//! heavy-tailed. Paths whose determinant falls below a floor are discarded
//! and counted (see [`KernelEstimate::rejects`]).

/// Quadratic variation per unit time of the driving Brownian motions of the
/// diffusion generated by `L`.
pub const DIFFUSION_RATE: f64 = 2.0;

mod bridge;
mod covariance;
mod kernel;
mod mass;
mod sde;

pub use bridge::{fill_bridge, sample_bridge, PathGrid};
pub use covariance::{
    covariance_along_path, covariance_along_path_generic, covariance_vector, CovarianceAccumulator, Quadrature,
};
pub use kernel::{
    gaussian_prefactor, kernel_estimates, kernel_point_estimate, kernel_slice_estimates, DriftConvention,
    KernelEstimate, McSpec,
};
pub use mass::{kernel_mass_check, Axis, GridSpec, MassReport};
pub use sde::{sample_endpoints, sde_endpoint_sample, semigroup_estimate, SdeSpec, SemigroupEstimate, ENDPOINT_STREAM};
