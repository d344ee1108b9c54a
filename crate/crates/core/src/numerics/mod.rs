//! Numerical kernel: special functions, quadrature, truncated series, fitting.

pub mod faddeeva;
pub mod fit;
pub mod quadrature;
pub mod real;
pub mod series;

pub use faddeeva::{faddeeva, faddeeva_dd, moshinsky, moshinsky_split, MoshinskySplit, Precision};
pub use fit::{fit_power_law, linear_grid, log_grid, PowerLawFit};
pub use quadrature::{integrate, integrate_vec, integrate_vec_tol, GaussLegendre};
pub use real::{DoubleDouble, Real};
pub use series::{
    series_add, series_det, series_det_expansion, series_mul, series_per, series_per_expansion, taylor_coeffs,
    SeriesExpansion, TruncatedSeries,
};
