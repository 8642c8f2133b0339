//! Extreme eigenvalues of symmetric positive semidefinite operators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::vec::dot_slices;

const MAX_ITERS: usize = 10_000;
const REL_TOL: f64 = 1e-13;

fn start_vector(dim: usize) -> Vec<f64> {
    // Fixed pseudo-random start so the result is reproducible and almost
    // surely not orthogonal to the dominant eigenvector.
    let mut rng = ChaCha20Rng::seed_from_u64(0x5eed_e19e);
    let mut v: Vec<f64> = (0..dim).map(|_| 1.0 + 0.1 * rng.random::<f64>()).collect();
    normalize(&mut v);
    v
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot_slices(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Largest eigenvalue of the PSD operator `apply` by power iteration.
///
/// `apply(v, out)` must write `M v` into `out`. Stops when the Rayleigh
/// quotient changes by less than `1e-13` relative, or after 10 000 steps.
pub fn lambda_max(dim: usize, mut apply: impl FnMut(&[f64], &mut [f64])) -> f64 {
    if dim == 0 {
        return 0.0;
    }
    let mut v = start_vector(dim);
    let mut w = vec![0.0; dim];
    let mut estimate = 0.0;
    for _ in 0..MAX_ITERS {
        apply(&v, &mut w);
        let rq = dot_slices(&v, &w) / dot_slices(&v, &v);
        if normalize(&mut w) == 0.0 {
            return 0.0;
        }
        std::mem::swap(&mut v, &mut w);
        let done = (rq - estimate).abs() <= REL_TOL * rq.abs();
        estimate = rq;
        if done {
            break;
        }
    }
    estimate
}

/// Lower-triangular Cholesky factor of a symmetric matrix, or `None` when it
/// is not numerically positive definite.
fn cholesky(gram: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = gram.len();
    let mut l = vec![vec![0.0; n]; n];
    let scale = (0..n).map(|i| gram[i][i].abs()).fold(0.0, f64::max);
    for j in 0..n {
        let mut d = gram[j][j];
        for x in &l[j][..j] {
            d -= x * x;
        }
        if d <= 1e-14 * scale || !d.is_finite() {
            return None;
        }
        let d = d.sqrt();
        l[j][j] = d;
        for i in (j + 1)..n {
            let mut s = gram[i][j];
            for (a, b) in l[i][..j].iter().zip(&l[j][..j]) {
                s -= a * b;
            }
            l[i][j] = s / d;
        }
    }
    Some(l)
}

fn cholesky_solve(l: &[Vec<f64>], b: &[f64], out: &mut [f64]) {
    let n = l.len();
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * out[k];
        }
        out[i] = s / l[i][i];
    }
    for i in (0..n).rev() {
        let mut s = out[i];
        for k in (i + 1)..n {
            s -= l[k][i] * out[k];
        }
        out[i] = s / l[i][i];
    }
}

/// Smallest eigenvalue of a symmetric PSD matrix by inverse power iteration.
///
/// Returns 0 when the matrix is singular to working precision.
pub fn lambda_min_spd(gram: &[Vec<f64>]) -> f64 {
    let n = gram.len();
    let Some(factor) = cholesky(gram) else {
        return 0.0;
    };
    let inv_max = lambda_max(n, |v, out| cholesky_solve(&factor, v, out));
    if inv_max > 0.0 && inv_max.is_finite() {
        1.0 / inv_max
    } else {
        0.0
    }
}
