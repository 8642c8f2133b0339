//! Unbiased gradient compressors.
//!
//! Bit accounting (per compressed `n`-vector):
//!
//! | codec | bits |
//! |---|---|
//! | none | `32 n` |
//! | sparsify(keep) | `keep (32 + ceil(log2 n))` |
//! | dither(s) | `32 + n (1 + ceil(log2(s + 1)))` |
//! | natural | `9 n` |

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{binomial, dense_bits, subsets, Oracle, OracleOutput, Outcomes};
use crate::error::{config, Result};
use crate::problems::Problem;
use crate::rng::{seeded, OracleRng};
use crate::vec::DenseVec;

/// `ceil(log2 x)` for `x >= 1`.
fn ceil_log2(x: u64) -> u64 {
    debug_assert!(x >= 1);
    u64::from(u64::BITS - (x - 1).leading_zeros())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Codec {
    None,
    Sparsify { keep: usize },
    Dither { levels: u32 },
    Natural,
}

impl Codec {
    pub fn validate(&self, dim: usize) -> Result<()> {
        match *self {
            Codec::Sparsify { keep } if keep == 0 || keep > dim => {
                config(format!("sparsify keep = {keep} must lie in 1..={dim}"))
            }
            Codec::Dither { levels: 0 } => config("dither needs at least one level"),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Codec::None => "none".into(),
            Codec::Sparsify { keep } => format!("sparsify(keep={keep})"),
            Codec::Dither { levels } => format!("dither(s={levels})"),
            Codec::Natural => "natural".into(),
        }
    }

    /// Bits to transmit one compressed `dim`-vector.
    pub fn bits(&self, dim: usize) -> u64 {
        let n = dim as u64;
        match *self {
            Codec::None => dense_bits(dim, 1),
            Codec::Sparsify { keep } => keep as u64 * (32 + ceil_log2(n.max(1))),
            Codec::Dither { levels } => 32 + n * (1 + ceil_log2(u64::from(levels) + 1)),
            Codec::Natural => 9 * n,
        }
    }

    pub fn compress(&self, grad: &DenseVec, rng: &mut OracleRng) -> Result<DenseVec> {
        self.validate(grad.dim())?;
        Ok(match *self {
            Codec::None => grad.clone(),
            Codec::Sparsify { keep } => {
                let picked = rand::seq::index::sample(rng, grad.dim(), keep).into_vec();
                sparse_outcome(grad, keep, &picked)
            }
            Codec::Dither { levels } => {
                let norm = grad.norm2();
                map_choices(grad, |g| dither_choices(g, norm, levels), rng)
            }
            Codec::Natural => map_choices(grad, natural_choices, rng),
        })
    }

    /// The full outcome distribution of `compress(grad)` if it has at most
    /// `limit` outcomes.
    pub fn outcomes(&self, grad: &DenseVec, limit: usize) -> Result<Option<Outcomes>> {
        self.validate(grad.dim())?;
        match *self {
            Codec::None => Ok(Some(vec![(1.0, grad.clone())])),
            Codec::Sparsify { keep } => {
                let count = binomial(grad.dim(), keep);
                if count > limit as u64 {
                    return Ok(None);
                }
                let p = 1.0 / count as f64;
                Ok(Some(
                    subsets(grad.dim(), keep)
                        .iter()
                        .map(|s| (p, sparse_outcome(grad, keep, s)))
                        .collect(),
                ))
            }
            Codec::Dither { levels } => {
                let norm = grad.norm2();
                Ok(product_outcomes(
                    grad,
                    |g| dither_choices(g, norm, levels),
                    limit,
                ))
            }
            Codec::Natural => Ok(product_outcomes(grad, natural_choices, limit)),
        }
    }
}

fn sparse_outcome(grad: &DenseVec, keep: usize, picked: &[usize]) -> DenseVec {
    let scale = grad.dim() as f64 / keep as f64;
    let mut out = DenseVec::zeros(grad.dim());
    for &i in picked {
        out.as_mut_slice()[i] = scale * grad[i];
    }
    out
}

/// A coordinate's two candidate values `(low, high)` and the probability of `high`.
type Choice = (f64, f64, f64);

fn dither_choices(g: f64, norm: f64, levels: u32) -> Choice {
    if norm == 0.0 || g == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let s = f64::from(levels);
    let r = s * g.abs() / norm;
    let low = r.floor();
    let unit = norm * g.signum() / s;
    (unit * low, unit * (low + 1.0), r - low)
}

fn natural_choices(g: f64) -> Choice {
    let a = g.abs();
    if a == 0.0 || !a.is_finite() {
        return (g, g, 0.0);
    }
    let mut e = a.log2().floor() as i32;
    let mut low = f64::from(e).exp2();
    if low > a {
        e -= 1;
        low = f64::from(e).exp2();
    } else if 2.0 * low <= a {
        e += 1;
        low = f64::from(e).exp2();
    }
    (g.signum() * low, g.signum() * 2.0 * low, (a - low) / low)
}

fn map_choices(grad: &DenseVec, choose: impl Fn(f64) -> Choice, rng: &mut OracleRng) -> DenseVec {
    DenseVec::new(
        grad.iter()
            .map(|&g| {
                let (low, high, p) = choose(g);
                if p > 0.0 && rng.random::<f64>() < p {
                    high
                } else {
                    low
                }
            })
            .collect(),
    )
}

fn product_outcomes(
    grad: &DenseVec,
    choose: impl Fn(f64) -> Choice,
    limit: usize,
) -> Option<Outcomes> {
    let choices: Vec<Choice> = grad.iter().map(|&g| choose(g)).collect();
    let random = choices.iter().filter(|c| c.2 > 0.0).count();
    if random >= 64 || (1u64 << random) > limit as u64 {
        return None;
    }
    let mut out: Outcomes = vec![(1.0, DenseVec::zeros(grad.dim()))];
    for (i, &(low, high, p)) in choices.iter().enumerate() {
        if p > 0.0 {
            let mut next = Vec::with_capacity(out.len() * 2);
            for (q, v) in out {
                let mut hi = v.clone();
                hi.as_mut_slice()[i] = high;
                let mut lo = v;
                lo.as_mut_slice()[i] = low;
                next.push((q * (1.0 - p), lo));
                next.push((q * p, hi));
            }
            out = next;
        } else {
            for (_, v) in out.iter_mut() {
                v.as_mut_slice()[i] = low;
            }
        }
    }
    Some(out)
}

fn encoded(codec: Codec, grad: &DenseVec, rng: &mut OracleRng) -> Result<OracleOutput> {
    Ok(OracleOutput {
        grad_estimate: codec.compress(grad, rng)?,
        component_evals: 0,
        bits: codec.bits(grad.dim()),
    })
}

/// Random sparsification: `keep` uniform coordinates scaled by `n / keep`.
pub fn sparsify(grad: &DenseVec, keep: usize, rng: &mut OracleRng) -> Result<OracleOutput> {
    encoded(Codec::Sparsify { keep }, grad, rng)
}

/// QSGD-style dithering onto `levels` levels of `||grad||_2`.
pub fn dither(grad: &DenseVec, levels: u32, rng: &mut OracleRng) -> Result<OracleOutput> {
    encoded(Codec::Dither { levels }, grad, rng)
}

/// Stochastic rounding of each coordinate to a neighbouring power of two.
pub fn natural(grad: &DenseVec, rng: &mut OracleRng) -> OracleOutput {
    encoded(Codec::Natural, grad, rng).expect("natural compression has no parameters")
}

/// Full gradient passed through a codec.
#[derive(Debug, Clone)]
pub struct CompressedOracle {
    codec: Codec,
    rng: OracleRng,
}

impl CompressedOracle {
    pub fn new(codec: Codec, seed: u64) -> Self {
        Self::with_rng(codec, seeded(seed))
    }

    pub fn with_rng(codec: Codec, rng: OracleRng) -> Self {
        CompressedOracle { codec, rng }
    }

    pub fn codec(&self) -> Codec {
        self.codec
    }
}

impl Oracle for CompressedOracle {
    fn name(&self) -> String {
        format!("compressed({})", self.codec.name())
    }

    fn query(&mut self, problem: &dyn Problem, x: &DenseVec) -> Result<OracleOutput> {
        let g = problem.gradient(x)?;
        Ok(OracleOutput {
            grad_estimate: self.codec.compress(&g, &mut self.rng)?,
            component_evals: problem.num_components() as u64,
            bits: self.codec.bits(problem.dim()),
        })
    }

    fn probe(&self, problem: &dyn Problem, x: &DenseVec, rng: &mut OracleRng) -> Result<DenseVec> {
        self.codec.compress(&problem.gradient(x)?, rng)
    }

    fn outcomes(
        &self,
        problem: &dyn Problem,
        x: &DenseVec,
        limit: usize,
    ) -> Result<Option<Outcomes>> {
        self.codec.outcomes(&problem.gradient(x)?, limit)
    }

    fn clone_box(&self) -> Box<dyn Oracle> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_support::expectation;
    use super::*;

    fn v(x: &[f64]) -> DenseVec {
        DenseVec::from(x)
    }

    fn mc_within(codec: Codec, grad: &DenseVec, draws: usize, se: f64, seed: u64) {
        let mut rng = seeded(seed);
        let n = grad.dim();
        let mut sum = vec![0.0; n];
        let mut sq = vec![0.0; n];
        for _ in 0..draws {
            let out = codec.compress(grad, &mut rng).unwrap();
            for i in 0..n {
                sum[i] += out[i];
                sq[i] += out[i] * out[i];
            }
        }
        let nn = draws as f64;
        for i in 0..n {
            let mean = sum[i] / nn;
            let var = (sq[i] / nn - mean * mean).max(0.0);
            let err = (var / nn).sqrt();
            assert!(
                (mean - grad[i]).abs() <= se * err + 1e-12,
                "coord {i}: {mean} vs {}",
                grad[i]
            );
        }
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(5), 3);
        assert_eq!(ceil_log2(100), 7);
        assert_eq!(ceil_log2(128), 7);
    }

    #[test]
    fn sparsify_examples() {
        let mut rng = seeded(1);
        let g = v(&[1.0, -2.0, 3.0]);
        assert_eq!(sparsify(&g, 3, &mut rng).unwrap().grad_estimate, g);
        let outs = Codec::Sparsify { keep: 1 }
            .outcomes(&v(&[3.0, 0.0, 6.0]), 100)
            .unwrap()
            .unwrap();
        assert_eq!(outs.len(), 3);
        assert_eq!(expectation(&outs), v(&[3.0, 0.0, 6.0]));
        assert_eq!(Codec::Sparsify { keep: 10 }.bits(100), 390);
        assert!(sparsify(&g, 0, &mut rng).is_err());
        assert!(sparsify(&g, 4, &mut rng).is_err());
    }

    #[test]
    fn sparsify_bits_increase_with_keep() {
        for k in 1..50 {
            assert!(
                Codec::Sparsify { keep: k + 1 }.bits(50) > Codec::Sparsify { keep: k }.bits(50)
            );
        }
    }

    #[test]
    fn dither_examples() {
        let mut rng = seeded(2);
        let out = dither(&DenseVec::zeros(4), 4, &mut rng).unwrap();
        assert_eq!(out.grad_estimate, DenseVec::zeros(4));
        assert_eq!(out.bits, 32 + 4 * (1 + 3));
        for g in [-3.5, 0.25, 7.0] {
            for s in [1, 3] {
                assert_eq!(
                    dither(&v(&[g]), s, &mut rng).unwrap().grad_estimate,
                    v(&[g])
                );
            }
        }
        assert!(dither(&v(&[1.0]), 0, &mut rng).is_err());
        for s in 1..20 {
            assert!(
                Codec::Dither { levels: s + 1 }.bits(10) >= Codec::Dither { levels: s }.bits(10)
            );
        }
    }

    #[test]
    fn dither_monte_carlo_unbiased() {
        let g = v(&[0.3, -1.2, 2.5, 0.0, -0.7]);
        mc_within(Codec::Dither { levels: 4 }, &g, 100_000, 3.0, 17);
    }

    #[test]
    fn dither_enumeration_unbiased() {
        let g = v(&[0.3, -1.2, 2.5, 0.0, -0.7]);
        let outs = Codec::Dither { levels: 4 }
            .outcomes(&g, 10_000)
            .unwrap()
            .unwrap();
        assert!(expectation(&outs).max_abs_diff(&g).unwrap() < 1e-12);
        let total: f64 = outs.iter().map(|o| o.0).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn natural_examples() {
        let mut rng = seeded(3);
        for _ in 0..100 {
            assert_eq!(
                natural(&v(&[2.0, -0.5]), &mut rng).grad_estimate,
                v(&[2.0, -0.5])
            );
        }
        let outs = Codec::Natural.outcomes(&v(&[3.0]), 10).unwrap().unwrap();
        assert_eq!(outs, vec![(0.5, v(&[2.0])), (0.5, v(&[4.0]))]);
        let z = natural(&DenseVec::zeros(7), &mut rng);
        assert_eq!(z.grad_estimate, DenseVec::zeros(7));
        assert_eq!(z.bits, 63);
    }

    #[test]
    fn natural_outputs_are_powers_of_two() {
        let mut rng = seeded(4);
        let g = v(&[3.0, -0.3, 1e-5, 123.456, -7.0]);
        for _ in 0..1000 {
            for (out, g) in natural(&g, &mut rng).grad_estimate.iter().zip(g.iter()) {
                assert_eq!(out.signum(), g.signum());
                let e = out.abs().log2();
                assert_eq!(e, e.round());
                assert!(out.abs() <= 2.0 * g.abs() && out.abs() >= 0.5 * g.abs());
            }
        }
    }

    #[test]
    fn natural_monte_carlo_unbiased() {
        mc_within(
            Codec::Natural,
            &v(&[3.0, -0.3, 1e-5, 123.456, -7.0]),
            100_000,
            4.0,
            5,
        );
    }

    #[test]
    fn codec_serde_shape() {
        let c: Codec = serde_json::from_str(r#"{"kind":"sparsify","keep":3}"#).unwrap();
        assert_eq!(c, Codec::Sparsify { keep: 3 });
        let c: Codec = serde_json::from_str(r#"{"kind":"none"}"#).unwrap();
        assert_eq!(c, Codec::None);
    }
}
