//! Dense real vectors.
//!
//! Every iterate, gradient and accumulator in the crate is a [`DenseVec`].
//! Binary operations check dimensions and return
//! [`Error::DimensionMismatch`](crate::Error::DimensionMismatch) instead of
//! panicking.

use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DenseVec(Vec<f64>);

impl DenseVec {
    pub fn new(entries: Vec<f64>) -> Self {
        DenseVec(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        DenseVec(vec![0.0; dim])
    }

    /// The `i`-th standard basis vector of `R^dim`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[i] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &DenseVec) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(dot_slices(&self.0, &other.0))
    }

    pub fn norm2_sq(&self) -> f64 {
        dot_slices(&self.0, &self.0)
    }

    pub fn norm2(&self) -> f64 {
        self.norm2_sq().sqrt()
    }

    /// `alpha * x + y` as a new vector.
    pub fn axpy(alpha: f64, x: &DenseVec, y: &DenseVec) -> Result<DenseVec> {
        check_dim(x.dim(), y.dim())?;
        Ok(DenseVec(
            x.0.iter()
                .zip(&y.0)
                .map(|(xi, yi)| alpha * xi + yi)
                .collect(),
        ))
    }

    /// `self += alpha * other`.
    pub fn add_scaled(&mut self, alpha: f64, other: &DenseVec) -> Result<()> {
        check_dim(self.dim(), other.dim())?;
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += alpha * b;
        }
        Ok(())
    }

    /// `a * x + b * y`.
    pub fn combine(a: f64, x: &DenseVec, b: f64, y: &DenseVec) -> Result<DenseVec> {
        check_dim(x.dim(), y.dim())?;
        Ok(DenseVec(
            x.0.iter()
                .zip(&y.0)
                .map(|(xi, yi)| a * xi + b * yi)
                .collect(),
        ))
    }

    pub fn sub(&self, other: &DenseVec) -> Result<DenseVec> {
        DenseVec::axpy(-1.0, other, self)
    }

    pub fn scaled(&self, alpha: f64) -> DenseVec {
        DenseVec(self.0.iter().map(|v| alpha * v).collect())
    }

    pub fn dist_sq(&self, other: &DenseVec) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn max_abs_diff(&self, other: &DenseVec) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }
}

/// Left-to-right inner product of two equal-length slices.
pub(crate) fn dot_slices(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

impl From<Vec<f64>> for DenseVec {
    fn from(v: Vec<f64>) -> Self {
        DenseVec(v)
    }
}

impl From<&[f64]> for DenseVec {
    fn from(v: &[f64]) -> Self {
        DenseVec(v.to_vec())
    }
}

impl Index<usize> for DenseVec {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;
    use proptest::prelude::*;

    fn v(x: &[f64]) -> DenseVec {
        DenseVec::from(x)
    }

    #[test]
    fn dot_examples() {
        assert_eq!(v(&[1.0, 2.0]).dot(&v(&[3.0, 4.0])).unwrap(), 11.0);
        assert_eq!(v(&[0.0, 0.0]).dot(&v(&[5.0, 5.0])).unwrap(), 0.0);
        let e1 = DenseVec::basis(3, 0);
        let e2 = DenseVec::basis(3, 1);
        assert_eq!(e1.dot(&e2).unwrap(), 0.0);
    }

    #[test]
    fn dot_rejects_mismatch() {
        let err = v(&[1.0]).dot(&v(&[1.0, 2.0])).unwrap_err();
        assert!(matches!(
            err,
            Error::DimensionMismatch {
                expected: 1,
                found: 2
            }
        ));
    }

    #[test]
    fn norm_examples() {
        assert_eq!(v(&[3.0, 4.0]).norm2_sq(), 25.0);
        assert_eq!(DenseVec::zeros(4).norm2_sq(), 0.0);
        assert_eq!(v(&[1.0; 4]).norm2_sq(), 4.0);
    }

    #[test]
    fn axpy_examples() {
        let r = DenseVec::axpy(2.0, &v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap();
        assert_eq!(r, v(&[2.0, 1.0]));
        let x = v(&[1.5, -2.0, 3.0]);
        let y = v(&[0.25, 7.0, -1.0]);
        assert_eq!(DenseVec::axpy(0.0, &x, &y).unwrap(), y);
        assert_eq!(DenseVec::axpy(-1.0, &x, &x).unwrap(), DenseVec::zeros(3));
        assert!(DenseVec::axpy(1.0, &x, &v(&[1.0])).is_err());
    }

    fn pair(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
        (
            prop::collection::vec(-1e3..1e3f64, n),
            prop::collection::vec(-1e3..1e3f64, n),
            prop::collection::vec(-1e3..1e3f64, n),
        )
    }

    proptest! {
        #[test]
        fn dot_symmetric_and_bilinear((a, b, c) in (1usize..40).prop_flat_map(pair), s in -10.0..10.0f64) {
            let (a, b, c) = (v(&a), v(&b), v(&c));
            let ab = a.dot(&b).unwrap();
            let ba = b.dot(&a).unwrap();
            let scale = 1.0 + a.norm2() * b.norm2() + a.norm2() * c.norm2() * s.abs();
            prop_assert!((ab - ba).abs() <= 1e-12 * scale);
            let lhs = DenseVec::axpy(s, &b, &c).unwrap().dot(&a).unwrap();
            let rhs = s * a.dot(&b).unwrap() + a.dot(&c).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
        }

        #[test]
        fn norm_matches_self_dot(a in prop::collection::vec(-1e6..1e6f64, 0..50)) {
            let a = v(&a);
            prop_assert_eq!(a.norm2_sq(), a.dot(&a).unwrap());
        }
    }
}
