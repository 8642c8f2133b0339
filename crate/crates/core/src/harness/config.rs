use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::federated::FederatedOracle;
use crate::oracles::{
    saga_lambda_bound, Codec, CompressedOracle, ExactOracle, GaussianOracle, MinibatchOracle,
    Oracle, SagaOracle,
};
use crate::problems::{
    libsvm::read_libsvm_file, random_least_squares, synthetic_logistic_dataset, LeastSquares,
    Logistic, Problem,
};
use crate::prox::{FeasibleSet, ProxFunction};
use crate::solver::{AcceleratedMethod, StoppingRule};
use crate::vec::DenseVec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    /// `A` with i.i.d. uniform `[0, 1)` entries and `b` likewise.
    RandomLeastSquares {
        rows: usize,
        cols: usize,
        #[serde(default)]
        seed: u64,
    },
    LeastSquares {
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    /// Logistic regression on a LIBSVM file.
    Logistic {
        path: PathBuf,
        reg: f64,
        components: usize,
        #[serde(default)]
        normalize: bool,
    },
    SyntheticLogistic {
        samples: usize,
        dim: usize,
        #[serde(default)]
        seed: u64,
        reg: f64,
        components: usize,
        #[serde(default)]
        normalize: bool,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    #[default]
    Unconstrained,
    Ball {
        radius: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    /// Bounds broadcast to every coordinate.
    Box { lower: f64, upper: f64 },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OracleSpec {
    #[default]
    Exact,
    /// Variance taken from the sweep's `variances`.
    Gaussian,
    Minibatch {
        batch: usize,
    },
    Saga {
        batch: usize,
    },
    Compressed {
        codec: Codec,
    },
    Federated {
        codec: Codec,
    },
}

impl OracleSpec {
    /// `variance` is used only by the gaussian oracle.
    pub fn build(&self, variance: f64, seed: u64) -> Result<Box<dyn Oracle>> {
        Ok(match self {
            OracleSpec::Exact => Box::new(ExactOracle),
            OracleSpec::Gaussian => Box::new(GaussianOracle::new(variance, seed)?),
            OracleSpec::Minibatch { batch } => Box::new(MinibatchOracle::new(*batch, seed)),
            OracleSpec::Saga { batch } => Box::new(SagaOracle::new(*batch, seed)),
            OracleSpec::Compressed { codec } => Box::new(CompressedOracle::new(*codec, seed)),
            OracleSpec::Federated { codec } => Box::new(FederatedOracle::new(*codec, seed)),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Accel,
    Gd,
    Nesterov83,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaRule {
    /// The SAGA admissible value for the configured batch size.
    Saga,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    Value(f64),
    Rule(LambdaRule),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default = "default_algorithm")]
    pub algorithm: Algorithm,
    #[serde(default = "one")]
    pub sigma: f64,
    /// Prox center; zeros when absent.
    #[serde(default)]
    pub center: Option<Vec<f64>>,
    /// Overrides the problem's strong-convexity constant.
    #[serde(default)]
    pub mu: Option<f64>,
    pub max_iters: usize,
    #[serde(default)]
    pub gap_target: Option<f64>,
    #[serde(default)]
    pub budget: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default = "one_usize")]
    pub seeds: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<LambdaSpec>,
    #[serde(default = "default_variances")]
    pub variances: Vec<f64>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            seeds: 1,
            base_seed: 0,
            lambdas: default_lambdas(),
            variances: default_variances(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSpec {
    #[serde(default = "default_reference_iters")]
    pub max_iters: usize,
}

impl Default for ReferenceSpec {
    fn default() -> Self {
        ReferenceSpec {
            max_iters: default_reference_iters(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    #[serde(default = "default_num_mc")]
    pub num_mc: usize,
    /// Iterations examined by `check`; the solver's `max_iters` when absent.
    #[serde(default)]
    pub max_iters: Option<usize>,
}

impl Default for CheckSpec {
    fn default() -> Self {
        CheckSpec {
            num_mc: default_num_mc(),
            max_iters: None,
        }
    }
}

fn default_algorithm() -> Algorithm {
    Algorithm::Accel
}
fn one() -> f64 {
    1.0
}
fn one_usize() -> usize {
    1
}
fn default_lambdas() -> Vec<LambdaSpec> {
    vec![LambdaSpec::Value(1.0)]
}
fn default_variances() -> Vec<f64> {
    vec![0.0]
}
fn default_reference_iters() -> usize {
    1_000_000
}
fn default_num_mc() -> usize {
    100
}

/// A complete experiment description, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub problem: ProblemSpec,
    #[serde(default)]
    pub set: SetSpec,
    #[serde(default)]
    pub oracle: OracleSpec,
    pub solver: SolverSpec,
    #[serde(default)]
    pub sweep: SweepSpec,
    #[serde(default)]
    pub reference: ReferenceSpec,
    #[serde(default)]
    pub check: CheckSpec,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Directory that relative paths resolve against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Reads a config; relative paths inside it resolve against its directory.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg = Self::from_json(&std::fs::read_to_string(path)?)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        }
    }

    pub fn output_path(&self) -> Option<PathBuf> {
        self.output.as_deref().map(|p| self.resolve(p))
    }

    /// Checks everything that can be checked without running anything.
    pub fn validate(&self) -> Result<()> {
        let s = &self.solver;
        if !(s.sigma > 0.0 && s.sigma.is_finite()) {
            return config(format!("sigma must be positive, got {}", s.sigma));
        }
        if let Some(mu) = s.mu {
            if !(mu >= 0.0 && mu.is_finite()) {
                return config(format!("mu override must be >= 0, got {mu}"));
            }
        }
        if let Some(t) = s.gap_target {
            if t.is_nan() || t < 0.0 {
                return config(format!("gap_target must be >= 0, got {t}"));
            }
        }
        if self.sweep.seeds == 0 {
            return config("sweep.seeds must be at least 1");
        }
        if self.sweep.lambdas.is_empty() || self.sweep.variances.is_empty() {
            return config("sweep.lambdas and sweep.variances must be non-empty");
        }
        for l in &self.sweep.lambdas {
            match l {
                LambdaSpec::Value(v) if !(*v > 0.0 && *v <= 1.0) => {
                    return config(format!("lambda entries must lie in (0, 1], got {v}"));
                }
                LambdaSpec::Rule(LambdaRule::Saga) if self.saga_batch().is_none() => {
                    return config("the \"saga\" lambda rule needs a saga or minibatch oracle");
                }
                _ => {}
            }
        }
        for v in &self.sweep.variances {
            if !(*v >= 0.0 && v.is_finite()) {
                return config(format!("variances must be >= 0, got {v}"));
            }
        }
        if !matches!(self.oracle, OracleSpec::Gaussian) && self.sweep.variances != [0.0] {
            return config("sweep.variances applies only to the gaussian oracle");
        }
        if self.solver.algorithm != Algorithm::Accel && self.oracle != OracleSpec::Exact {
            return config("gd and nesterov83 baselines use the exact oracle");
        }
        if self.solver.algorithm == Algorithm::Nesterov83 && self.set != SetSpec::Unconstrained {
            return config("nesterov83 runs only on unconstrained problems");
        }
        match &self.problem {
            ProblemSpec::RandomLeastSquares { rows, cols, .. } if *rows == 0 || *cols == 0 => {
                return config("least-squares dimensions must be positive");
            }
            ProblemSpec::Logistic { path, .. } => {
                let p = self.resolve(path);
                if !p.is_file() {
                    return config(format!("data file {} does not exist", p.display()));
                }
            }
            _ => {}
        }
        match self.set {
            SetSpec::Ball { radius, .. } if !(radius > 0.0 && radius.is_finite()) => {
                return config(format!("ball radius must be positive, got {radius}"));
            }
            SetSpec::Box { lower, upper } if lower.is_nan() || upper.is_nan() || lower > upper => {
                return config("box requires lower <= upper");
            }
            _ => {}
        }
        match &self.oracle {
            OracleSpec::Minibatch { batch } | OracleSpec::Saga { batch } if *batch == 0 => {
                return config("batch size must be positive");
            }
            OracleSpec::Compressed { codec } | OracleSpec::Federated { codec } => {
                if let Codec::Sparsify { keep: 0 } = codec {
                    return config("sparsify keep must be positive");
                }
                if let Codec::Dither { levels: 0 } = codec {
                    return config("dither needs at least one level");
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn saga_batch(&self) -> Option<usize> {
        match self.oracle {
            OracleSpec::Saga { batch } | OracleSpec::Minibatch { batch } => Some(batch),
            _ => None,
        }
    }

    /// Builds the objective; `normalize` forces L2-normalized logistic rows.
    pub fn build_problem(&self, normalize: bool) -> Result<Box<dyn Problem>> {
        Ok(match &self.problem {
            ProblemSpec::RandomLeastSquares { rows, cols, seed } => {
                Box::new(random_least_squares(*rows, *cols, *seed)?)
            }
            ProblemSpec::LeastSquares { a, b } => Box::new(LeastSquares::new(
                a.iter().map(|r| DenseVec::from(&r[..])).collect(),
                DenseVec::from(&b[..]),
            )?),
            ProblemSpec::Logistic {
                path,
                reg,
                components,
                normalize: n,
            } => {
                let mut data = read_libsvm_file(self.resolve(path))?;
                if *n || normalize {
                    data.normalize_rows();
                }
                Box::new(Logistic::new(data, *reg, *components)?)
            }
            ProblemSpec::SyntheticLogistic {
                samples,
                dim,
                seed,
                reg,
                components,
                normalize: n,
            } => {
                let mut data = synthetic_logistic_dataset(*samples, *dim, *seed);
                if *n || normalize {
                    data.normalize_rows();
                }
                Box::new(Logistic::new(data, *reg, *components)?)
            }
        })
    }

    pub fn build_set(&self, dim: usize) -> Result<FeasibleSet> {
        match &self.set {
            SetSpec::Unconstrained => Ok(FeasibleSet::unconstrained(dim)),
            SetSpec::Ball { radius, center } => {
                let c = match center {
                    Some(c) => DenseVec::from(&c[..]),
                    None => DenseVec::zeros(dim),
                };
                if c.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: c.dim(),
                    });
                }
                FeasibleSet::ball(c, *radius)
            }
            SetSpec::Box { lower, upper } => FeasibleSet::boxed(
                DenseVec::new(vec![*lower; dim]),
                DenseVec::new(vec![*upper; dim]),
            ),
        }
    }

    pub fn build_prox(&self, dim: usize) -> Result<ProxFunction> {
        let center = match &self.solver.center {
            Some(c) if c.len() != dim => {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: c.len(),
                })
            }
            Some(c) => DenseVec::from(&c[..]),
            None => DenseVec::zeros(dim),
        };
        ProxFunction::new(center, self.solver.sigma)
    }

    /// The numeric value of a sweep entry for this problem.
    pub fn lambda_value(&self, spec: LambdaSpec, problem: &dyn Problem) -> Result<f64> {
        match spec {
            LambdaSpec::Value(v) => Ok(v),
            LambdaSpec::Rule(LambdaRule::Saga) => {
                let Some(batch) = self.saga_batch() else {
                    return config("the \"saga\" lambda rule needs a batch size");
                };
                let mu = self.solver.mu.unwrap_or_else(|| problem.strong_convexity());
                Ok(
                    saga_lambda_bound(problem.num_components(), batch, problem.smoothness(), mu)?
                        .lambda,
                )
            }
        }
    }

    pub fn build_method(&self, problem: &dyn Problem, lambda: f64) -> Result<AcceleratedMethod> {
        let dim = problem.dim();
        let method = AcceleratedMethod::new(self.build_set(dim)?, self.build_prox(dim)?, lambda)?;
        Ok(match self.solver.mu {
            Some(mu) => method.with_strong_convexity(mu),
            None => method,
        })
    }

    /// A fresh oracle for one run.
    pub fn build_oracle(&self, variance: f64, seed: u64) -> Result<Box<dyn Oracle>> {
        self.oracle.build(variance, seed)
    }

    pub fn stopping_rule(&self, f_star: f64) -> StoppingRule {
        let mut stop = StoppingRule::iterations(self.solver.max_iters);
        if let Some(t) = self.solver.gap_target {
            stop = stop.with_gap(f_star, t);
        }
        if let Some(b) = self.solver.budget {
            stop = stop.with_budget(b);
        }
        stop
    }
}
