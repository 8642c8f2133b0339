use std::ops::Range;

use super::dataset::Dataset;
use super::eigen::lambda_max;
use super::{contiguous_shards, Problem};
use crate::error::{check_dim, config, Result};
use crate::vec::{dot_slices, DenseVec};

/// `log(1 + exp(t))` without overflow.
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Regularized logistic loss split into `m` contiguous shards:
///
/// `f(x) = sum_i log(1 + exp(-b_i <a_i, x>)) + reg/2 ||x||^2`,
/// `f_l(x) = sum_{i in shard l} log(1 + exp(-b_i <a_i, x>)) + reg/(2m) ||x||^2`.
///
/// `mu = reg` and `L = reg + lambda_max(X^T X) / 4`.
#[derive(Debug, Clone)]
pub struct Logistic {
    data: Dataset,
    reg: f64,
    shards: Vec<Range<usize>>,
    smoothness: f64,
}

impl Logistic {
    pub fn new(data: Dataset, reg: f64, components: usize) -> Result<Self> {
        if data.is_empty() {
            return config("logistic regression needs a non-empty dataset");
        }
        if !(reg >= 0.0 && reg.is_finite()) {
            return config(format!("regularization must be finite and >= 0, got {reg}"));
        }
        if components == 0 || components > data.len() {
            return config(format!(
                "{components} components requested for {} samples",
                data.len()
            ));
        }
        let dim = data.dim();
        let mut scratch = vec![0.0; data.len()];
        let top = lambda_max(dim, |v, out| {
            for (t, s) in scratch.iter_mut().zip(data.samples()) {
                *t = dot_slices(s.features.as_slice(), v);
            }
            out.iter_mut().for_each(|o| *o = 0.0);
            for (t, s) in scratch.iter().zip(data.samples()) {
                for (o, a) in out.iter_mut().zip(s.features.iter()) {
                    *o += t * a;
                }
            }
        });
        Ok(Logistic {
            shards: contiguous_shards(data.len(), components),
            smoothness: reg + 0.25 * top,
            data,
            reg,
        })
    }

    pub fn dataset(&self) -> &Dataset {
        &self.data
    }

    pub fn regularization(&self) -> f64 {
        self.reg
    }

    pub fn shard(&self, component: usize) -> Range<usize> {
        self.shards[component].clone()
    }
}

impl Problem for Logistic {
    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn num_components(&self) -> usize {
        self.shards.len()
    }

    fn smoothness(&self) -> f64 {
        self.smoothness
    }

    fn strong_convexity(&self) -> f64 {
        self.reg
    }

    fn value(&self, x: &DenseVec) -> Result<f64> {
        check_dim(self.dim(), x.dim())?;
        let loss: f64 = self
            .data
            .samples()
            .iter()
            .map(|s| softplus(-s.label * dot_slices(s.features.as_slice(), x.as_slice())))
            .sum();
        Ok(loss + 0.5 * self.reg * x.norm2_sq())
    }

    fn component_gradient(&self, component: usize, x: &DenseVec) -> Result<DenseVec> {
        check_dim(self.dim(), x.dim())?;
        let Some(range) = self.shards.get(component) else {
            return config(format!("component {component} out of range"));
        };
        let mut g = x.scaled(self.reg / self.shards.len() as f64);
        for s in &self.data.samples()[range.clone()] {
            let t = s.label * dot_slices(s.features.as_slice(), x.as_slice());
            let w = -s.label * sigmoid(-t);
            if w != 0.0 {
                g.add_scaled(w, &s.features)?;
            }
        }
        Ok(g)
    }
}
