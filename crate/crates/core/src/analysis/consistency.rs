//! Consistency of a fuzzy logic: the mean truth of a tautology over the unit
//! hypercube of its variables.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::program::{Program, Scratch};
use super::suite::TautologySuite;
use super::AnalysisError;
use crate::dsl::Formula;
use crate::logic::LogicConfig;

pub const MIN_QUADRATURE_POINTS: usize = 200;
pub const MIN_MONTE_CARLO_SAMPLES: usize = 100;
pub const MAX_VARIABLES: usize = 3;

const BATCH: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Tensor-product composite midpoint rule; the budget is points per axis.
    Quadrature,
    /// Uniform sampling; the budget is the total number of samples.
    MonteCarlo { seed: u64 },
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Quadrature => "quadrature",
            Method::MonteCarlo { .. } => "monte-carlo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// For quadrature, the largest deviation from the estimate of the means
    /// over the `2^d` interleaved half-resolution sub-grids (even or odd
    /// index per axis); the standard error for Monte Carlo.
    pub error: f64,
    pub evaluations: u64,
}

/// Mean of the integrand over the midpoint grid with `n` points per axis,
/// axis `k` shifted by `offsets[k]` cells (0.5 gives the midpoint rule).
pub fn grid_mean(p: &Program, n: usize, offsets: &[f64]) -> f64 {
    let f = grid_fold(p, n, offsets);
    f.sums.iter().sum::<f64>() / libm::pow(n as f64, p.dimension() as f64)
}

/// Smallest and largest integrand value on a grid whose axes are shifted by
/// 1/2, 1/4, 1/8, … of a cell, so that no point lies on a diagonal `x = y`
/// or anti-diagonal `x + y = 1`.
pub fn integrand_range(p: &Program, n: usize) -> (f64, f64) {
    let offsets: Vec<f64> = (0..p.dimension()).map(|k| 1.0 / (2u32 << k) as f64).collect();
    let f = grid_fold(p, n, &offsets);
    (f.lo, f.hi)
}

struct Fold {
    /// Integrand sums per parity class; bit `k` of the class is the parity
    /// of the index along axis `k`.
    sums: Vec<f64>,
    counts: Vec<u64>,
    lo: f64,
    hi: f64,
}

fn grid_fold(p: &Program, n: usize, offsets: &[f64]) -> Fold {
    let d = p.dimension();
    assert!(d >= 1 && offsets.len() == d);
    let axes: Vec<Vec<f64>> = offsets.iter().map(|o| (0..n).map(|i| (i as f64 + o) / n as f64).collect()).collect();
    let mut columns: Vec<Vec<f64>> = vec![vec![0.0; n]; d];
    columns[d - 1].copy_from_slice(&axes[d - 1]);
    let mut out = vec![0.0; n];
    let mut scratch = Scratch::default();
    let mut sums = vec![0.0; 1 << d];
    let mut counts = vec![0u64; 1 << d];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let outer = n.pow(d as u32 - 1);
    let mut idx = vec![0usize; d - 1];
    for _ in 0..outer {
        for (k, &i) in idx.iter().enumerate() {
            let v = axes[k][i];
            columns[k].iter_mut().for_each(|c| *c = v);
        }
        let refs: Vec<&[f64]> = columns.iter().map(|c| c.as_slice()).collect();
        p.eval_batch(&refs, &mut out, &mut scratch);
        let outer_class = idx.iter().enumerate().fold(0, |c, (k, &i)| c | ((i & 1) << k));
        let mut row = [0.0; 2];
        for (i, &v) in out.iter().enumerate() {
            row[i & 1] += v;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        for (parity, r) in row.iter().enumerate() {
            let class = outer_class | (parity << (d - 1));
            sums[class] += r;
            counts[class] += ((n + 1 - parity) / 2) as u64;
        }
        for k in (0..d - 1).rev() {
            idx[k] += 1;
            if idx[k] < n {
                break;
            }
            idx[k] = 0;
        }
    }
    Fold { sums, counts, lo, hi }
}

fn midpoint(p: &Program, n: usize) -> f64 {
    grid_mean(p, n, &vec![0.5; p.dimension()])
}

fn points(p: &Program, n: usize) -> u64 {
    (n as u64).pow(p.dimension() as u32)
}

/// Extrapolated midpoint estimate `2·Q(2n) − Q(n)`, exact for integrands
/// whose midpoint error is proportional to `1/n`, such as those with a
/// jump along a diagonal.
pub fn richardson(p: &Program, n: usize) -> Estimate {
    let (coarse, fine) = (midpoint(p, n), midpoint(p, 2 * n));
    let value = 2.0 * fine - coarse;
    Estimate { value, error: (value - fine).abs(), evaluations: points(p, n) + points(p, 2 * n) }
}

/// Midpoint rule on `n^d` points; the error estimate reuses the same
/// evaluations.
pub fn quadrature(p: &Program, n: usize) -> Estimate {
    let f = grid_fold(p, n, &vec![0.5; p.dimension()]);
    let total = points(p, n);
    let value = f.sums.iter().sum::<f64>() / total as f64;
    let error = f
        .sums
        .iter()
        .zip(&f.counts)
        .filter(|(_, c)| **c > 0)
        .map(|(s, c)| (s / *c as f64 - value).abs())
        .fold(0.0, f64::max);
    Estimate { value, error, evaluations: total }
}

pub fn monte_carlo(p: &Program, samples: usize, seed: u64) -> Estimate {
    let d = p.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut columns: Vec<Vec<f64>> = vec![vec![0.0; BATCH]; d];
    let mut out = vec![0.0; BATCH];
    let mut scratch = Scratch::default();
    // Welford accumulation
    let (mut count, mut mean, mut m2) = (0usize, 0.0, 0.0);
    while count < samples {
        let m = BATCH.min(samples - count);
        for i in 0..m {
            for c in columns.iter_mut() {
                c[i] = rng.gen::<f64>();
            }
        }
        let refs: Vec<&[f64]> = columns.iter().map(|c| &c[..m]).collect();
        p.eval_batch(&refs, &mut out[..m], &mut scratch);
        for &v in &out[..m] {
            count += 1;
            let delta = v - mean;
            mean += delta / count as f64;
            m2 += delta * (v - mean);
        }
    }
    let var = if count > 1 { m2 / (count - 1) as f64 } else { 0.0 };
    Estimate { value: mean, error: libm::sqrt(var / count as f64), evaluations: count as u64 }
}

/// Consistency of `tautology` under `logic`.
pub fn consistency(logic: &LogicConfig, tautology: &Formula, method: Method, budget: usize) -> Result<Estimate, AnalysisError> {
    let p = Program::compile(tautology, logic)?;
    consistency_of(&p, method, budget)
}

pub fn consistency_of(p: &Program, method: Method, budget: usize) -> Result<Estimate, AnalysisError> {
    if p.dimension() > MAX_VARIABLES {
        return Err(AnalysisError::TooManyVariables { count: p.dimension(), max: MAX_VARIABLES });
    }
    match method {
        Method::Quadrature => {
            if budget < MIN_QUADRATURE_POINTS {
                return Err(AnalysisError::Budget { min: MIN_QUADRATURE_POINTS, got: budget });
            }
            Ok(quadrature(p, budget))
        }
        Method::MonteCarlo { seed } => {
            if budget < MIN_MONTE_CARLO_SAMPLES {
                return Err(AnalysisError::Budget { min: MIN_MONTE_CARLO_SAMPLES, got: budget });
            }
            Ok(monte_carlo(p, budget, seed))
        }
    }
}

/// Logic × tautology matrix of consistency estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub logics: Vec<LogicConfig>,
    pub tautologies: Vec<String>,
    /// `cells[t][l]` for tautology `t` and logic `l`.
    pub cells: Vec<Vec<Estimate>>,
    pub method: Method,
    pub budget: usize,
}

impl ConsistencyReport {
    pub fn value(&self, tautology: usize, logic: usize) -> f64 {
        self.cells[tautology][logic].value
    }

    /// Arithmetic mean over tautologies, per logic.
    pub fn averages(&self) -> Vec<f64> {
        (0..self.logics.len())
            .map(|l| self.cells.iter().map(|row| row[l].value).sum::<f64>() / self.cells.len() as f64)
            .collect()
    }

    pub fn evaluations(&self) -> u64 {
        self.cells.iter().flatten().map(|e| e.evaluations).sum()
    }
}

/// Work items of a table in row-major order, for callers that schedule
/// cells themselves.
pub fn table_programs(logics: &[LogicConfig], suite: &TautologySuite) -> Result<Vec<Program>, AnalysisError> {
    let mut out = Vec::with_capacity(logics.len() * suite.len());
    for t in &suite.entries {
        for l in logics {
            out.push(Program::compile(&t.formula, l)?);
        }
    }
    Ok(out)
}

/// Assembles a report from row-major cell estimates.
pub fn report_from_cells(
    logics: &[LogicConfig],
    suite: &TautologySuite,
    cells: Vec<Estimate>,
    method: Method,
    budget: usize,
) -> ConsistencyReport {
    assert_eq!(cells.len(), logics.len() * suite.len());
    let rows = cells.chunks(logics.len().max(1)).map(|c| c.to_vec()).collect();
    ConsistencyReport {
        logics: logics.to_vec(),
        tautologies: suite.entries.iter().map(|t| t.source.into()).collect(),
        cells: rows,
        method,
        budget,
    }
}

pub fn consistency_table(
    logics: &[LogicConfig],
    suite: &TautologySuite,
    method: Method,
    budget: usize,
) -> Result<ConsistencyReport, AnalysisError> {
    let programs = table_programs(logics, suite)?;
    let cells = programs.iter().map(|p| consistency_of(p, method, budget)).collect::<Result<Vec<_>, _>>()?;
    Ok(report_from_cells(logics, suite, cells, method, budget))
}
