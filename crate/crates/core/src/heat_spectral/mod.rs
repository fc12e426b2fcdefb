//! Spectral routes to the heat kernel.
//!
//! [`mathieu`] provides periodic Mathieu functions, [`se2`] the Mathieu
//! series for the heat kernel of `SE(2)` and its inverse Fourier transform,
//! and [`oracle`] a regime-independent reference obtained by solving the
//! Fourier-transformed heat equation in `theta` for each frequency.

pub mod mathieu;
pub mod oracle;
pub mod se2;
pub mod tridiag;

pub use mathieu::{
    class_functions, class_functions_from, mathieu_char, mathieu_eval, mathieu_table, truncation_for, MathieuFunction, MathieuKind,
    MathieuTableRow, ParityClass,
};
pub use tridiag::SymTridiagonal;
pub use se2::{se2_hat_kernel, se2_kernel, HatKernelValue, SpectralEstimate, SpectralKernelConfig};
pub use oracle::{
    fourier_ode_oracle, gauss_hermite, mean_covariance_scale, oracle_kernel, FourierSlice, OracleConfig, OracleEstimate,
    ThetaGrid,
};
