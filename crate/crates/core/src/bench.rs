//! Multi-instance experiment drivers: noise sweeps, run-time distributions,
//! and size-scaling studies, with quartile statistics and CSV output.
//!
//! Every run's seeds derive from one master seed and the run's grid
//! coordinates, so a config identifies its results exactly; re-running a
//! config reproduces the same output bytes regardless of worker count
//! (results are collected in grid order before aggregation).

use std::io::{self, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::cnf::{self, generate_random_ksat, GenerateError};
use crate::engine::{self, EngineError, Heuristic, RunResult};
use crate::rng::derive_seed;
use crate::trace::{Trace, TraceRecorder, TraceSchedule};

#[derive(Debug, Error, PartialEq)]
pub enum BenchError {
    #[error("eta grid must be nonempty, strictly increasing, and within (0, 1]")]
    InvalidEtaGrid,
    #[error("need at least one instance per grid point")]
    NoInstances,
    #[error("sizes must be nonempty and strictly increasing")]
    InvalidSizes,
    #[error("need at least one run result")]
    NoResults,
    #[error("derived run seeds collide; pick a different master seed")]
    SeedCollision,
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/* ---------------- order statistics ---------------- */

/// First quartile, median, and third quartile by linear interpolation
/// between closest ranks (h = (n-1)p). `+inf` entries (censored runs) sort
/// last, and any quantile touching an infinite rank is `+inf`.
///
/// # Panics
///
/// Panics on an empty sample set.
pub fn median_quartiles(samples: &[f64]) -> (f64, f64, f64) {
    assert!(!samples.is_empty(), "median_quartiles needs at least one sample");
    debug_assert!(samples.iter().all(|x| !x.is_nan()));
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    (
        quantile(&sorted, 0.25),
        quantile(&sorted, 0.5),
        quantile(&sorted, 0.75),
    )
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    // infinite endpoints would make the interpolation arithmetic produce
    // NaN (inf - inf); the quantile is +inf as soon as it touches one
    if frac == 0.0 || sorted[lo].is_infinite() {
        return sorted[lo];
    }
    if sorted[lo + 1].is_infinite() {
        return f64::INFINITY;
    }
    sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
}

/// flips/N with unsolved runs censored to +inf.
fn normalized_flips(result: &RunResult, n_vars: usize) -> f64 {
    if result.solved {
        result.flips as f64 / n_vars as f64
    } else {
        f64::INFINITY
    }
}

/* ---------------- noise sweeps ---------------- */

/// A noise sweep: for each eta in the grid, solve `instances` fresh random
/// instances and aggregate normalized solve times.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub n_vars: usize,
    pub alpha: f64,
    pub k: usize,
    pub heuristic: Heuristic,
    pub eta_grid: Vec<f64>,
    pub instances: usize,
    pub master_seed: u64,
    /// Per-run flip budget; 0 disables the cutoff.
    pub max_flips: u64,
}

/// Aggregated outcome at one noise value. Quartiles are flips/N with
/// unsolved runs counted as +inf.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub eta: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub success_rate: f64,
    pub instances: usize,
}

fn aggregate(eta: f64, results: &[RunResult], n_vars: usize) -> SweepRow {
    let normalized: Vec<f64> = results.iter().map(|r| normalized_flips(r, n_vars)).collect();
    let (q1, median, q3) = median_quartiles(&normalized);
    let solved = results.iter().filter(|r| r.solved).count();
    SweepRow {
        eta,
        q1,
        median,
        q3,
        success_rate: solved as f64 / results.len() as f64,
        instances: results.len(),
    }
}

/// Per-cell seeds: one formula seed and one run seed, both mixed from the
/// master seed and the cell's grid coordinates, all distinct across the
/// experiment (checked).
fn cell_seeds(master: u64, a: usize, b: usize) -> (u64, u64) {
    let cell = derive_seed(master, a as u64, b as u64);
    (derive_seed(cell, 0, 0), derive_seed(cell, 0, 1))
}

fn check_seed_collisions(seeds: impl Iterator<Item = u64>) -> Result<(), BenchError> {
    let mut seen = std::collections::HashSet::new();
    for s in seeds {
        if !seen.insert(s) {
            return Err(BenchError::SeedCollision);
        }
    }
    Ok(())
}

fn validate_eta_grid(grid: &[f64]) -> Result<(), BenchError> {
    let in_range = grid.iter().all(|&e| e > 0.0 && e <= 1.0);
    let increasing = grid.windows(2).all(|w| w[0] < w[1]);
    if grid.is_empty() || !in_range || !increasing {
        return Err(BenchError::InvalidEtaGrid);
    }
    Ok(())
}

/// Runs the full (eta, instance) grid, in parallel over the current rayon
/// pool, and aggregates one row per eta. Identical configs produce
/// identical tables.
pub fn noise_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>, BenchError> {
    validate_eta_grid(&config.eta_grid)?;
    if config.instances == 0 {
        return Err(BenchError::NoInstances);
    }
    let m = cnf::clause_count(config.n_vars, config.alpha);

    let cells: Vec<(usize, u64, u64)> = (0..config.eta_grid.len())
        .flat_map(|ei| {
            (0..config.instances).map(move |i| {
                let (fseed, rseed) = cell_seeds(config.master_seed, ei, i);
                (ei, fseed, rseed)
            })
        })
        .collect();
    check_seed_collisions(cells.iter().flat_map(|&(_, f, r)| [f, r]))?;

    let results: Vec<RunResult> = cells
        .par_iter()
        .map(|&(ei, fseed, rseed)| {
            let formula = generate_random_ksat(config.n_vars, m, config.k, fseed)?;
            engine::run(
                &formula,
                config.heuristic,
                config.eta_grid[ei],
                rseed,
                config.max_flips,
                None,
            )
            .map_err(BenchError::from)
        })
        .collect::<Result<_, _>>()?;

    Ok(results
        .chunks(config.instances)
        .zip(&config.eta_grid)
        .map(|(chunk, &eta)| aggregate(eta, chunk, config.n_vars))
        .collect())
}

/// Relabels the noise axis by a multiplicative factor (for overlaying
/// sweeps of different heuristics); all other fields pass through.
pub fn rescale_eta(rows: &[SweepRow], factor: f64) -> Vec<SweepRow> {
    assert!(factor > 0.0, "rescale factor must be positive");
    rows.iter()
        .map(|r| SweepRow {
            eta: r.eta * factor,
            ..*r
        })
        .collect()
}

/* ---------------- run-time distributions ---------------- */

/// One step of an empirical CDF over normalized solve times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfPoint {
    pub normalized_flips: f64,
    pub cumulative_fraction: f64,
}

/// Empirical cumulative distribution of flips/N over solved runs, with one
/// point per distinct solve time. Unsolved runs count only in the
/// denominator, so the curve tops out at the success rate.
pub fn cumulative_distribution(
    results: &[RunResult],
    n_vars: usize,
) -> Result<Vec<CdfPoint>, BenchError> {
    if results.is_empty() {
        return Err(BenchError::NoResults);
    }
    let total = results.len() as f64;
    let mut solved_times: Vec<f64> = results
        .iter()
        .filter(|r| r.solved)
        .map(|r| r.flips as f64 / n_vars as f64)
        .collect();
    solved_times.sort_by(f64::total_cmp);
    let mut points: Vec<CdfPoint> = Vec::new();
    for (i, &t) in solved_times.iter().enumerate() {
        let fraction = (i + 1) as f64 / total;
        match points.last_mut() {
            Some(last) if last.normalized_flips == t => last.cumulative_fraction = fraction,
            _ => points.push(CdfPoint {
                normalized_flips: t,
                cumulative_fraction: fraction,
            }),
        }
    }
    Ok(points)
}

/// Generates and solves `instances` fresh instances at one (N, alpha, eta)
/// point, in grid order. The building block for CDF and concentration
/// studies; seeds derive from (master_seed, 0, instance index).
// The flat argument list mirrors the CLI surface one-to-one; a config struct
// would just rename the same eight knobs.
#[allow(clippy::too_many_arguments)]
pub fn run_batch(
    n_vars: usize,
    alpha: f64,
    k: usize,
    heuristic: Heuristic,
    eta: f64,
    instances: usize,
    master_seed: u64,
    max_flips: u64,
) -> Result<Vec<RunResult>, BenchError> {
    if instances == 0 {
        return Err(BenchError::NoInstances);
    }
    let m = cnf::clause_count(n_vars, alpha);
    let seeds: Vec<(u64, u64)> = (0..instances)
        .map(|i| cell_seeds(master_seed, 0, i))
        .collect();
    check_seed_collisions(seeds.iter().flat_map(|&(f, r)| [f, r]))?;
    seeds
        .par_iter()
        .map(|&(fseed, rseed)| {
            let formula = generate_random_ksat(n_vars, m, k, fseed)?;
            engine::run(&formula, heuristic, eta, rseed, max_flips, None).map_err(BenchError::from)
        })
        .collect()
}

/// Like [`run_batch`], but records each run's trace on the given schedule.
/// Budget 0 means each run continues until solved.
#[allow(clippy::too_many_arguments)]
pub fn trace_batch(
    n_vars: usize,
    alpha: f64,
    k: usize,
    heuristic: Heuristic,
    eta: f64,
    instances: usize,
    master_seed: u64,
    max_flips: u64,
    schedule: TraceSchedule,
) -> Result<Vec<Trace>, BenchError> {
    if instances == 0 {
        return Err(BenchError::NoInstances);
    }
    let m = cnf::clause_count(n_vars, alpha);
    let seeds: Vec<(u64, u64)> = (0..instances)
        .map(|i| cell_seeds(master_seed, 0, i))
        .collect();
    check_seed_collisions(seeds.iter().flat_map(|&(f, r)| [f, r]))?;
    seeds
        .par_iter()
        .map(|&(fseed, rseed)| {
            let formula = generate_random_ksat(n_vars, m, k, fseed)?;
            let mut recorder = TraceRecorder::new(schedule);
            engine::run(&formula, heuristic, eta, rseed, max_flips, Some(&mut recorder))?;
            Ok(recorder.into_trace())
        })
        .collect()
}

/* ---------------- size scaling ---------------- */

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingConfig {
    /// Strictly increasing instance sizes.
    pub sizes: Vec<usize>,
    pub alpha: f64,
    pub k: usize,
    pub heuristic: Heuristic,
    pub eta: f64,
    pub instances: usize,
    pub master_seed: u64,
    /// Per-run flip budget as a multiple of N (so the cutoff scales with
    /// instance size); 0 disables the cutoff.
    pub max_flips_per_n: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    pub n: usize,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub success_rate: f64,
}

/// Solve-time quartiles (flips/N) as a function of instance size, with the
/// flip budget growing proportionally to N. Seeds derive from
/// (master_seed, size index, instance index).
pub fn scaling_experiment(config: &ScalingConfig) -> Result<Vec<ScalingRow>, BenchError> {
    if config.sizes.is_empty() || config.sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(BenchError::InvalidSizes);
    }
    if config.instances == 0 {
        return Err(BenchError::NoInstances);
    }
    let cells: Vec<(usize, u64, u64)> = (0..config.sizes.len())
        .flat_map(|si| {
            (0..config.instances).map(move |i| {
                let (fseed, rseed) = cell_seeds(config.master_seed, si, i);
                (si, fseed, rseed)
            })
        })
        .collect();
    check_seed_collisions(cells.iter().flat_map(|&(_, f, r)| [f, r]))?;

    let results: Vec<RunResult> = cells
        .par_iter()
        .map(|&(si, fseed, rseed)| {
            let n = config.sizes[si];
            let m = cnf::clause_count(n, config.alpha);
            let formula = generate_random_ksat(n, m, config.k, fseed)?;
            let budget = config.max_flips_per_n.saturating_mul(n as u64);
            engine::run(&formula, config.heuristic, config.eta, rseed, budget, None)
                .map_err(BenchError::from)
        })
        .collect::<Result<_, _>>()?;

    Ok(results
        .chunks(config.instances)
        .zip(&config.sizes)
        .map(|(chunk, &n)| {
            let row = aggregate(f64::NAN, chunk, n);
            ScalingRow {
                n,
                q1: row.q1,
                median: row.median,
                q3: row.q3,
                success_rate: row.success_rate,
            }
        })
        .collect())
}

/* ---------------- CSV output ---------------- */

pub fn write_sweep_csv<W: Write>(
    w: &mut W,
    comments: &[String],
    rows: &[SweepRow],
) -> io::Result<()> {
    for line in comments {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "eta,q1,median,q3,success_rate,instances")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.eta, r.q1, r.median, r.q3, r.success_rate, r.instances
        )?;
    }
    Ok(())
}

pub fn write_cdf_csv<W: Write>(
    w: &mut W,
    comments: &[String],
    points: &[CdfPoint],
) -> io::Result<()> {
    for line in comments {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "normalized_flips,cumulative_fraction")?;
    for p in points {
        writeln!(w, "{},{}", p.normalized_flips, p.cumulative_fraction)?;
    }
    Ok(())
}

pub fn write_scaling_csv<W: Write>(
    w: &mut W,
    comments: &[String],
    rows: &[ScalingRow],
) -> io::Result<()> {
    for line in comments {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "n,q1,median,q3,success_rate")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.n, r.q1, r.median, r.q3, r.success_rate
        )?;
    }
    Ok(())
}
