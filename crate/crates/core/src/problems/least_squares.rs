use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::eigen::{lambda_max, lambda_min_spd};
use super::Problem;
use crate::error::{check_dim, config, Result};
use crate::vec::{dot_slices, DenseVec};

/// `f(x) = 0.5 * ||A x - b||^2` with `L = lambda_max(A^T A)` and
/// `mu = lambda_min(A^T A)`.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    rows: Vec<DenseVec>,
    rhs: DenseVec,
    dim: usize,
    smoothness: f64,
    strong_convexity: f64,
}

impl LeastSquares {
    pub fn new(rows: Vec<DenseVec>, rhs: DenseVec) -> Result<Self> {
        check_dim(rows.len(), rhs.dim())?;
        if rows.is_empty() {
            return config("least squares needs at least one row");
        }
        let dim = rows[0].dim();
        for r in &rows {
            check_dim(dim, r.dim())?;
        }
        let mut gram = vec![vec![0.0; dim]; dim];
        for r in &rows {
            let r = r.as_slice();
            for i in 0..dim {
                for j in 0..dim {
                    gram[i][j] += r[i] * r[j];
                }
            }
        }
        let smoothness = lambda_max(dim, |v, out| {
            for (o, g) in out.iter_mut().zip(&gram) {
                *o = dot_slices(g, v);
            }
        });
        let strong_convexity = lambda_min_spd(&gram).min(smoothness);
        Ok(LeastSquares {
            rows,
            rhs,
            dim,
            smoothness,
            strong_convexity,
        })
    }

    pub fn rows(&self) -> &[DenseVec] {
        &self.rows
    }

    pub fn rhs(&self) -> &DenseVec {
        &self.rhs
    }

    fn residual(&self, x: &DenseVec) -> Result<Vec<f64>> {
        check_dim(self.dim, x.dim())?;
        Ok(self
            .rows
            .iter()
            .zip(self.rhs.iter())
            .map(|(r, b)| dot_slices(r.as_slice(), x.as_slice()) - b)
            .collect())
    }
}

/// Square-or-rectangular least squares with entries of `A` and `b` drawn
/// i.i.d. uniform on `[0, 1)` from a ChaCha20 stream seeded with `seed`.
pub fn random_least_squares(rows: usize, cols: usize, seed: u64) -> Result<LeastSquares> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let a: Vec<DenseVec> = (0..rows)
        .map(|_| DenseVec::new((0..cols).map(|_| rng.random::<f64>()).collect()))
        .collect();
    let b = DenseVec::new((0..rows).map(|_| rng.random::<f64>()).collect());
    LeastSquares::new(a, b)
}

impl Problem for LeastSquares {
    fn dim(&self) -> usize {
        self.dim
    }

    fn num_components(&self) -> usize {
        1
    }

    fn smoothness(&self) -> f64 {
        self.smoothness
    }

    fn strong_convexity(&self) -> f64 {
        self.strong_convexity
    }

    fn value(&self, x: &DenseVec) -> Result<f64> {
        let r = self.residual(x)?;
        Ok(0.5 * dot_slices(&r, &r))
    }

    fn component_gradient(&self, component: usize, x: &DenseVec) -> Result<DenseVec> {
        if component != 0 {
            return config(format!(
                "component {component} out of range for a single-component problem"
            ));
        }
        let r = self.residual(x)?;
        let mut g = DenseVec::zeros(self.dim);
        for (row, ri) in self.rows.iter().zip(r) {
            g.add_scaled(ri, row)?;
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DenseVec {
        DenseVec::from(x)
    }

    #[test]
    fn identity_problem() {
        let p =
            LeastSquares::new(vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])], DenseVec::zeros(2)).unwrap();
        let x = v(&[0.3, -2.0]);
        assert_eq!(p.gradient(&x).unwrap(), x);
        assert!((p.smoothness() - 1.0).abs() < 1e-12);
        assert!((p.strong_convexity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_problem_constants() {
        let p =
            LeastSquares::new(vec![v(&[1.0, 0.0]), v(&[0.0, 3.0])], DenseVec::zeros(2)).unwrap();
        assert!((p.smoothness() - 9.0).abs() < 1e-9);
        assert!((p.strong_convexity() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_row_count_mismatch() {
        assert!(LeastSquares::new(vec![v(&[1.0])], v(&[1.0, 2.0])).is_err());
        assert!(LeastSquares::new(vec![v(&[1.0]), v(&[1.0, 2.0])], v(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn random_fifty_gradient_matches_finite_differences() {
        let p = random_least_squares(50, 50, 2024).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let x = DenseVec::new((0..50).map(|_| rng.random::<f64>() - 0.5).collect());
        let g = p.gradient(&x).unwrap();
        let h = 1e-5;
        for i in 0..50 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp.as_mut_slice()[i] += h;
            xm.as_mut_slice()[i] -= h;
            let fd = (p.value(&xp).unwrap() - p.value(&xm).unwrap()) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-6, "coord {i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn random_generation_is_deterministic() {
        let a = random_least_squares(5, 5, 9).unwrap();
        let b = random_least_squares(5, 5, 9).unwrap();
        assert_eq!(a.rows(), b.rows());
        assert_eq!(a.rhs(), b.rhs());
    }
}
