//! Stationary quantizers: exact one-dimensional solves by quadrature and
//! Monte-Carlo Lloyd iteration in any dimension.

mod init;
mod kdtree;
mod montecarlo;
mod one_dim;

use serde::Serialize;

pub use init::{init_grid, InitStrategy};
pub use kdtree::KdTree;
pub use montecarlo::{distortion_mc, lloyd_step_mc, solve_mc, McOptions, McStep};
pub use one_dim::{
    distortion_quadrature_1d, lloyd_step_1d, solve_stationary_1d, stationarity_gradient, stationarity_residual,
    voronoi_boundaries_1d, SolveOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DistortionMethod {
    Quadrature,
    MonteCarlo,
}

/// An estimate of the `r`-th power distortion `E min_i |X - x_i|^r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistortionReport<S> {
    pub value: S,
    pub r: S,
    pub method: DistortionMethod,
    /// Zero for quadrature.
    pub std_error: S,
    pub samples: Option<usize>,
    pub workers: usize,
}
