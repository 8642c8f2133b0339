//! Objective functions with known smoothness and strong-convexity constants.

mod dataset;
mod eigen;
mod least_squares;
pub mod libsvm;
mod logistic;

pub use dataset::{synthetic_logistic_dataset, Dataset, Sample};
pub use eigen::{lambda_max, lambda_min_spd};
pub use least_squares::{random_least_squares, LeastSquares};
pub use logistic::Logistic;

use crate::error::Result;
use crate::vec::DenseVec;

/// An `L`-smooth, `mu`-strongly convex objective `f = sum_l f_l`.
///
/// `gradient` must equal the in-order sum of `component_gradient` over all
/// components; the default implementation computes exactly that sum, and
/// oracles that reassemble a gradient from components rely on it being
/// bit-identical.
pub trait Problem: Send + Sync {
    fn dim(&self) -> usize;

    /// Number of components `m` (1 for monolithic objectives).
    fn num_components(&self) -> usize;

    /// Smoothness constant `L` of the full objective.
    fn smoothness(&self) -> f64;

    /// Strong-convexity constant `mu` of the full objective (0 if merely convex).
    fn strong_convexity(&self) -> f64;

    fn value(&self, x: &DenseVec) -> Result<f64>;

    fn component_gradient(&self, component: usize, x: &DenseVec) -> Result<DenseVec>;

    fn gradient(&self, x: &DenseVec) -> Result<DenseVec> {
        let mut acc = DenseVec::zeros(self.dim());
        for l in 0..self.num_components() {
            acc.add_scaled(1.0, &self.component_gradient(l, x)?)?;
        }
        Ok(acc)
    }
}

/// Contiguous, near-equal blocks `[l*n/m, (l+1)*n/m)` for `l = 0..m`.
pub(crate) fn contiguous_shards(count: usize, shards: usize) -> Vec<std::ops::Range<usize>> {
    (0..shards)
        .map(|l| (l * count / shards)..((l + 1) * count / shards))
        .collect()
}
