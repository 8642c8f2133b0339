use std::io::Write;

use rayon::prelude::*;

use super::config::{Algorithm, ExperimentConfig};
use super::reference::{compute_reference_optimum_with, ReferenceOptimum, ReferenceOptions};
use crate::baselines::{run_gradient_descent, run_nesterov83};
use crate::error::{config, Result};
use crate::problems::Problem;
use crate::solver::{StoppingRule, Trace};

/// Environment variable that sizes the work pool.
pub const THREADS_ENV: &str = "STOCHASTIC_ACCEL_THREADS";

pub const CSV_HEADER: &str = "run_id,seed,k,f_gap,A_k,alpha_k,grad_evals,bits";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub lambda: f64,
    pub variance: f64,
    pub seed: u64,
}

impl Cell {
    pub fn group_id(&self) -> String {
        format!("lambda={};nu={}", self.lambda, self.variance)
    }

    pub fn run_id(&self) -> String {
        format!("{};seed={}", self.group_id(), self.seed)
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub cell: Cell,
    /// Includes the `k = 0` row.
    pub trace: Trace,
}

impl RunResult {
    pub fn gap_at(&self, k: usize, f_star: f64) -> Option<f64> {
        self.trace
            .iter()
            .find(|r| r.k == k)
            .map(|r| r.value - f_star)
    }

    pub fn final_gap(&self, f_star: f64) -> f64 {
        self.trace.last().map_or(f64::NAN, |r| r.value - f_star)
    }
}

#[derive(Debug, Clone)]
pub struct MeanRow {
    pub k: usize,
    pub f_gap: f64,
    pub a: f64,
    pub alpha: f64,
    pub grad_evals: u64,
    pub bits: u64,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub f_star: f64,
    pub runs: Vec<RunResult>,
}

impl SweepResult {
    /// Runs sharing `lambda` and `variance`, in seed order.
    pub fn group(&self, lambda: f64, variance: f64) -> Vec<&RunResult> {
        self.runs
            .iter()
            .filter(|r| r.cell.lambda == lambda && r.cell.variance == variance)
            .collect()
    }

    /// Per-k mean gap over the runs of one group.
    pub fn mean_series(&self, lambda: f64, variance: f64) -> Vec<MeanRow> {
        mean_series(&self.group(lambda, variance), self.f_star)
    }

    pub fn write_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        let mut groups: Vec<(f64, f64)> = Vec::new();
        for run in &self.runs {
            let id = run.cell.run_id();
            for r in run.trace.iter().filter(|r| r.k > 0) {
                writeln!(
                    out,
                    "{id},{},{},{:.16e},{:.16e},{:.16e},{},{}",
                    run.cell.seed,
                    r.k,
                    r.value - self.f_star,
                    r.a,
                    r.alpha,
                    r.grad_evals,
                    r.bits
                )?;
            }
            let key = (run.cell.lambda, run.cell.variance);
            if !groups.contains(&key) {
                groups.push(key);
            }
        }
        for (lambda, variance) in groups {
            let members = self.group(lambda, variance);
            if members.len() < 2 {
                continue;
            }
            let id = format!("{}_mean", members[0].cell.group_id());
            for r in mean_series(&members, self.f_star)
                .iter()
                .filter(|r| r.k > 0)
            {
                writeln!(
                    out,
                    "{id},,{},{:.16e},{:.16e},{:.16e},{},{}",
                    r.k, r.f_gap, r.a, r.alpha, r.grad_evals, r.bits
                )?;
            }
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is ascii")
    }
}

/// At each k, the mean gap over the runs that reached k; the remaining
/// columns come from the first such run.
pub fn mean_series(runs: &[&RunResult], f_star: f64) -> Vec<MeanRow> {
    let len = runs.iter().map(|r| r.trace.len()).max().unwrap_or(0);
    (0..len)
        .filter_map(|i| {
            let rows: Vec<_> = runs.iter().filter_map(|r| r.trace.get(i)).collect();
            let first = rows.first()?;
            let sum: f64 = rows.iter().map(|r| r.value - f_star).sum();
            Some(MeanRow {
                k: first.k,
                f_gap: sum / rows.len() as f64,
                a: first.a,
                alpha: first.alpha,
                grad_evals: first.grad_evals,
                bits: first.bits,
            })
        })
        .collect()
}

/// Pool size from [`THREADS_ENV`], else the number of logical cores.
pub fn thread_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Forces L2-normalized rows for logistic problems.
    pub normalize_rows: bool,
    /// Skips the reference run and measures gaps against this value.
    pub f_star: Option<f64>,
}

pub fn reference_for(cfg: &ExperimentConfig, problem: &dyn Problem) -> Result<ReferenceOptimum> {
    let dim = problem.dim();
    let opts = ReferenceOptions {
        max_iters: cfg.reference.max_iters,
        prox: Some(cfg.build_prox(dim)?),
        mu: cfg.solver.mu,
    };
    compute_reference_optimum_with(problem, &cfg.build_set(dim)?, &opts)
}

/// Every (lambda, variance, seed) cell in config order.
pub fn cells(cfg: &ExperimentConfig, problem: &dyn Problem) -> Result<Vec<Cell>> {
    let mut out = Vec::new();
    for &spec in &cfg.sweep.lambdas {
        let lambda = cfg.lambda_value(spec, problem)?;
        for &variance in &cfg.sweep.variances {
            for i in 0..cfg.sweep.seeds {
                out.push(Cell {
                    lambda,
                    variance,
                    seed: cfg.sweep.base_seed.wrapping_add(i as u64),
                });
            }
        }
    }
    Ok(out)
}

pub fn run_cell(
    cfg: &ExperimentConfig,
    problem: &dyn Problem,
    cell: Cell,
    stop: &StoppingRule,
) -> Result<RunResult> {
    let dim = problem.dim();
    let trace = match cfg.solver.algorithm {
        Algorithm::Accel => {
            let method = cfg.build_method(problem, cell.lambda)?;
            let mut oracle = cfg.build_oracle(cell.variance, cell.seed)?;
            method.run(problem, oracle.as_mut(), stop)?
        }
        Algorithm::Gd | Algorithm::Nesterov83 => {
            let set = cfg.build_set(dim)?;
            let x0 = cfg.build_prox(dim)?.minimizer(&set)?;
            let mut t = if cfg.solver.algorithm == Algorithm::Gd {
                run_gradient_descent(problem, &set, &x0, stop.max_iters)?
            } else {
                run_nesterov83(problem, &set, &x0, stop.max_iters)?
            };
            if let Some(i) = t.iter().position(|r| stop.should_stop(r)) {
                t.truncate(i + 1);
            }
            t
        }
    };
    Ok(RunResult { cell, trace })
}

/// Validates, computes the reference optimum, then runs all cells in
/// parallel. Results are in config order regardless of scheduling.
pub fn run_experiment(cfg: &ExperimentConfig, opts: RunOptions) -> Result<SweepResult> {
    cfg.validate()?;
    let problem = cfg.build_problem(opts.normalize_rows)?;
    let problem = problem.as_ref();
    let cells = cells(cfg, problem)?;
    // Fail on bad solver settings before the (possibly long) reference run.
    cfg.build_method(problem, cells[0].lambda)?;
    let f_star = match opts.f_star {
        Some(f) => f,
        None => reference_for(cfg, problem)?.f_star,
    };
    let stop = cfg.stopping_rule(f_star);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count())
        .build()
        .or_else(|e| config(format!("cannot start work pool: {e}")))?;
    let runs = pool.install(|| {
        cells
            .par_iter()
            .map(|&cell| run_cell(cfg, problem, cell, &stop))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(SweepResult { f_star, runs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::TraceRecord;

    fn cfg(extra: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(&format!(
            r#"{{"problem": {{"kind": "random_least_squares", "rows": 6, "cols": 4, "seed": 3}},
                "solver": {{"max_iters": 10}} {extra}}}"#
        ))
        .unwrap()
    }

    #[test]
    fn one_seed_ten_iterations_gives_ten_rows() {
        let res = run_experiment(&cfg(""), RunOptions::default()).unwrap();
        let csv = res.to_csv_string();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 11);
        assert!(lines[1].starts_with("lambda=1;nu=0;seed=0,0,1,"));
    }

    #[test]
    fn mean_rows_average_the_seeds() {
        let c =
            cfg(r#", "oracle": {"kind": "gaussian"}, "sweep": {"seeds": 3, "variances": [0.5]}"#);
        let res = run_experiment(&c, RunOptions::default()).unwrap();
        assert_eq!(res.runs.len(), 3);
        let mean = res.mean_series(1.0, 0.5);
        for row in &mean {
            let direct: f64 = res
                .runs
                .iter()
                .map(|r| r.gap_at(row.k, res.f_star).unwrap())
                .sum::<f64>()
                / 3.0;
            assert!((row.f_gap - direct).abs() <= 1e-15 * direct.abs().max(1e-300));
        }
        let csv = res.to_csv_string();
        assert_eq!(csv.lines().filter(|l| l.contains("_mean,,")).count(), 10);
        assert_eq!(csv.lines().count(), 1 + 3 * 10 + 10);
    }

    #[test]
    fn output_is_independent_of_pool_size() {
        let c = cfg(
            r#", "oracle": {"kind": "gaussian"}, "sweep": {"seeds": 4, "variances": [1.0], "lambdas": [1, 0.1]}"#,
        );
        let a = run_experiment(&c, RunOptions::default())
            .unwrap()
            .to_csv_string();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| {
            run_experiment(&c, RunOptions::default())
                .unwrap()
                .to_csv_string()
        });
        assert_eq!(a, b);
    }

    #[test]
    fn floats_have_seventeen_significant_digits() {
        let res = SweepResult {
            f_star: 0.0,
            runs: vec![RunResult {
                cell: Cell {
                    lambda: 1.0,
                    variance: 0.0,
                    seed: 7,
                },
                trace: vec![TraceRecord {
                    k: 1,
                    value: 0.1,
                    a: 1.0 / 3.0,
                    alpha: 2.0,
                    grad_evals: 5,
                    bits: 320,
                }],
            }],
        };
        let csv = res.to_csv_string();
        let row = csv.lines().nth(1).unwrap();
        assert_eq!(
            row,
            "lambda=1;nu=0;seed=7,7,1,1.0000000000000001e-1,3.3333333333333331e-1,2.0000000000000000e0,5,320"
        );
        let parsed: f64 = row.split(',').nth(4).unwrap().parse().unwrap();
        assert_eq!(parsed, 1.0 / 3.0);
    }

    #[test]
    fn baselines_dispatch() {
        for alg in ["gd", "nesterov83"] {
            let mut c = cfg("");
            c.solver.algorithm = serde_json::from_str(&format!("\"{alg}\"")).unwrap();
            let res = run_experiment(&c, RunOptions::default()).unwrap();
            assert_eq!(res.runs[0].trace.len(), 11);
        }
    }

    #[test]
    fn invalid_config_fails_before_running() {
        let mut c = cfg("");
        c.sweep.seeds = 0;
        assert!(run_experiment(&c, RunOptions::default()).is_err());
    }
}
