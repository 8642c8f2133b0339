use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::vec::DenseVec;

/// One labelled example; `label` is always `-1.0` or `+1.0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: DenseVec,
    pub label: f64,
}

/// Binary-classification data with dense features of a common dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<Sample>,
    dim: usize,
}

impl Dataset {
    /// Builds a dataset, padding every feature vector with zeros up to `dim`.
    ///
    /// Panics if a sample is longer than `dim` or has a label outside `{-1, +1}`.
    pub fn new(samples: Vec<Sample>, dim: usize) -> Self {
        let samples = samples
            .into_iter()
            .map(|mut s| {
                assert!(s.label == 1.0 || s.label == -1.0, "labels must be -1 or +1");
                assert!(
                    s.features.dim() <= dim,
                    "sample longer than dataset dimension"
                );
                if s.features.dim() < dim {
                    let mut v = s.features.into_vec();
                    v.resize(dim, 0.0);
                    s.features = DenseVec::new(v);
                }
                s
            })
            .collect();
        Dataset { samples, dim }
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Scales every non-zero feature row to unit Euclidean norm.
    pub fn normalize_rows(&mut self) {
        for s in &mut self.samples {
            let n = s.features.norm2();
            if n > 0.0 {
                s.features = s.features.scaled(1.0 / n);
            }
        }
    }
}

/// A reproducible stand-in for a categorical LIBSVM benchmark: binary
/// features (each on with probability 0.25), labels drawn from a logistic
/// model with a hidden Gaussian weight vector. ChaCha20 seeded with `seed`.
pub fn synthetic_logistic_dataset(samples: usize, dim: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let truth: Vec<f64> = (0..dim)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            1.5 * z
        })
        .collect::<Vec<f64>>();
    let offset = 0.25 * truth.iter().sum::<f64>();
    let out = (0..samples)
        .map(|_| {
            let features: Vec<f64> = (0..dim)
                .map(|_| if rng.random::<f64>() < 0.25 { 1.0 } else { 0.0 })
                .collect();
            let margin: f64 = features.iter().zip(&truth).map(|(a, w)| a * w).sum::<f64>() - offset;
            let p = 1.0 / (1.0 + (-margin).exp());
            let label = if rng.random::<f64>() < p { 1.0 } else { -1.0 };
            Sample {
                features: DenseVec::new(features),
                label,
            }
        })
        .collect();
    Dataset::new(out, dim)
}
