//! Behavioral acceptance suite: ten full-scale checks of the solver and the
//! experiment harness, printed one line each as `ACCEPTANCE <n> (<name>):
//! PASS|FAIL`. The process exits nonzero if any criterion fails.
//!
//! Every scale, seed, and tolerance is pinned as a named constant next to
//! the criterion that uses it. The heavy criteria (5-9) run multi-minute
//! experiments at realistic instance sizes on purpose: they are the
//! evidence that the implemented heuristics show the expected physics, not
//! smoke tests.

use std::io::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use vfms::bench::{self, median_quartiles, noise_sweep, scaling_experiment, ScalingConfig, SweepConfig, SweepRow};
use vfms::cnf::{clause_count, count_unsatisfied, generate_random_ksat, Formula, Literal};
use vfms::engine::{Heuristic, SolverState};
use vfms::rng::{derive_seed, Rng};
use vfms::trace::{average_traces, TraceSchedule};

fn main() {
    // optional arguments select a subset of criteria by number, e.g.
    // `cargo test --test acceptance -- 1 4 10`; no arguments runs them all
    let selected: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let wanted = |id: u32| selected.is_empty() || selected.contains(&id);

    let suite = Instant::now();
    let mut failures = 0usize;
    let mut ran = 0usize;

    // criterion 5's sweep feeds criterion 6's noise-ordering comparison
    let mut vfms_argmin: Option<f64> = None;

    let run = |id: u32, name: &str, failures: &mut usize, ran: &mut usize,
               criterion: &dyn Fn() -> Result<String, String>| {
        if !wanted(id) {
            return;
        }
        *ran += 1;
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(criterion))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        report(id, name, started, &outcome, failures);
    };

    run(1, "incremental state matches recomputation", &mut failures, &mut ran, &c1_state_oracle);
    run(2, "delta energy matches full recount", &mut failures, &mut ran, &c2_delta_oracle);
    run(3, "initial energy fraction is 2^-K", &mut failures, &mut ran, &c3_initial_energy);
    run(4, "focused sampling distributions", &mut failures, &mut ran, &c4_sampling);
    if wanted(5) {
        ran += 1;
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c5_noise_landscape));
        let flat = match outcome {
            Ok(Ok((detail, argmin))) => {
                vfms_argmin = Some(argmin);
                Ok(detail)
            }
            Ok(Err(detail)) => Err(detail),
            Err(_) => Err("panicked".to_string()),
        };
        report(5, "noise landscape is U-shaped", started, &flat, &mut failures);
    }
    if wanted(6) {
        ran += 1;
        let started = Instant::now();
        let argmin = vfms_argmin;
        let outcome = catch_unwind(AssertUnwindSafe(|| c6_noise_ordering(argmin)));
        let flat = outcome.unwrap_or_else(|_| Err("panicked".to_string()));
        report(6, "clause-guided sampling wants more noise", started, &flat, &mut failures);
    }
    run(7, "support-to-energy ratio saturates", &mut failures, &mut ran, &c7_ratio_saturation);
    run(8, "solve time scales linearly", &mut failures, &mut ran, &c8_linearity);
    run(9, "solve times concentrate with size", &mut failures, &mut ran, &c9_concentration);
    run(10, "byte-identical reruns", &mut failures, &mut ran, &c10_determinism);

    println!(
        "acceptance: {}/{ran} passed in {:.0}s",
        ran - failures,
        suite.elapsed().as_secs_f64()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}

fn report(id: u32, name: &str, started: Instant, outcome: &Result<String, String>, failures: &mut usize) {
    let elapsed = started.elapsed().as_secs_f64();
    match outcome {
        Ok(detail) => println!("ACCEPTANCE {id} ({name}): PASS [{elapsed:.1}s] {detail}"),
        Err(detail) => {
            *failures += 1;
            println!("ACCEPTANCE {id} ({name}): FAIL [{elapsed:.1}s] {detail}");
        }
    }
    let _ = std::io::stdout().flush();
}

/* ---------------------------------------------------------------- */
/* 1: every incremental structure agrees with a from-scratch        */
/*    recomputation throughout long runs                            */
/* ---------------------------------------------------------------- */

const ORACLE_SEED: u64 = 101;
const ORACLE_FORMULAS: usize = 200;
const ORACLE_STEPS: u64 = 10_000;
const ORACLE_CHECK_EVERY: u64 = 100;

fn c1_state_oracle() -> Result<String, String> {
    let mut rng = Rng::new(ORACLE_SEED);
    let etas = [0.2, 0.35, 0.6, 1.0];
    let mut checks = 0u64;
    for i in 0..ORACLE_FORMULAS {
        let n = 10 + rng.below(51) as usize; // 10..=60
        let alpha = 3.0 + 1.3 * rng.next_f64(); // [3.0, 4.3)
        let m = clause_count(n, alpha);
        let formula = generate_random_ksat(n, m, 3, rng.next_u64())
            .map_err(|e| format!("formula {i}: {e}"))?;
        let mut state = SolverState::init(&formula, rng.next_u64());
        let eta = etas[i % etas.len()];
        verify_state(&state, &formula).map_err(|e| format!("formula {i} step 0: {e}"))?;
        for step in 1..=ORACLE_STEPS {
            if state.energy() == 0 {
                break;
            }
            state.step(Heuristic::Vfms, eta);
            if step % ORACLE_CHECK_EVERY == 0 || state.energy() == 0 {
                verify_state(&state, &formula)
                    .map_err(|e| format!("formula {i} (n={n}) step {step}: {e}"))?;
                checks += 1;
            }
        }
    }
    Ok(format!("{ORACLE_FORMULAS} formulas, {checks} full-state comparisons, all exact"))
}

/// Compares every piece of incremental state against values recomputed
/// directly from the formula and current assignment.
fn verify_state(state: &SolverState, formula: &Formula) -> Result<(), String> {
    let assignment = state.assignment();
    let energy = count_unsatisfied(formula, |v| assignment[v - 1]);
    if state.energy() != energy {
        return Err(format!("energy {} != recount {energy}", state.energy()));
    }
    let mut unsat_clauses = Vec::new();
    for c in 0..formula.num_clauses() {
        let clause = formula.clause(c);
        let tc = clause
            .iter()
            .filter(|lit| lit.is_true_under(assignment[lit.var() - 1]))
            .count() as u32;
        if state.true_count(c) != tc {
            return Err(format!("true_count[{c}] {} != recount {tc}", state.true_count(c)));
        }
        if tc == 0 {
            unsat_clauses.push(c as u32);
        }
    }
    let mut got_clauses = state.unsat_clause_ids();
    got_clauses.sort_unstable();
    if got_clauses != unsat_clauses {
        return Err("unsat clause set mismatch".to_string());
    }
    let mut unsat_vars: Vec<u32> = unsat_clauses
        .iter()
        .flat_map(|&c| formula.clause(c as usize).iter().map(|lit| lit.var() as u32))
        .collect();
    unsat_vars.sort_unstable();
    unsat_vars.dedup();
    let mut got_vars = state.unsat_var_ids();
    got_vars.sort_unstable();
    if got_vars != unsat_vars {
        return Err("unsat variable set mismatch".to_string());
    }
    if state.num_unsat_vars() != unsat_vars.len() {
        return Err(format!(
            "num_unsat_vars {} != recount {}",
            state.num_unsat_vars(),
            unsat_vars.len()
        ));
    }
    Ok(())
}

/* ---------------------------------------------------------------- */
/* 2: delta_energy equals the recount difference on random triples  */
/* ---------------------------------------------------------------- */

const DELTA_SEED: u64 = 102;
const DELTA_TRIPLES: usize = 1_000;

fn c2_delta_oracle() -> Result<String, String> {
    let mut rng = Rng::new(DELTA_SEED);
    for i in 0..DELTA_TRIPLES {
        let n = 3 + rng.below(38) as usize; // 3..=40
        // alternate generated distinct-variable formulas with hand-rolled
        // clauses that may repeat a variable (both polarities included)
        let formula = if i % 2 == 0 {
            let m = 1 + rng.below(4 * n as u64) as usize;
            generate_random_ksat(n, m, 3, rng.next_u64()).map_err(|e| format!("triple {i}: {e}"))?
        } else {
            let m = 1 + rng.below(3 * n as u64) as usize;
            let clauses: Vec<Vec<Literal>> = (0..m)
                .map(|_| {
                    let width = 1 + rng.below(4) as usize;
                    (0..width)
                        .map(|_| Literal::new(1 + rng.below(n as u64) as usize, rng.next_bool()))
                        .collect()
                })
                .collect();
            Formula::from_clauses(n, &clauses).map_err(|e| format!("triple {i}: {e}"))?
        };
        let mut assignment: Vec<bool> = (0..n).map(|_| rng.next_bool()).collect();
        let state = SolverState::init_with_assignment(&formula, &assignment, 0);
        let v = 1 + rng.below(n as u64) as usize;

        let before = count_unsatisfied(&formula, |u| assignment[u - 1]) as i64;
        assignment[v - 1] = !assignment[v - 1];
        let after = count_unsatisfied(&formula, |u| assignment[u - 1]) as i64;
        let expected = after - before;
        let got = state.delta_energy(v);
        if got != expected {
            return Err(format!("triple {i}: delta_energy({v}) = {got}, recount gives {expected}"));
        }
    }
    Ok(format!("{DELTA_TRIPLES} (formula, assignment, variable) triples, all exact"))
}

/* ---------------------------------------------------------------- */
/* 3: random assignments violate the expected clause fraction       */
/* ---------------------------------------------------------------- */

const INIT_SEED: u64 = 103;
const INIT_N: usize = 10_000;
const INIT_ALPHA: f64 = 4.2;
const INIT_SEEDS: usize = 20;
/// Analytic expectation of E(0)/M is 2^-K = 0.125 for K=3.
const INIT_EXPECTED: f64 = 0.125;
const INIT_TOLERANCE: f64 = 0.01;

fn c3_initial_energy() -> Result<String, String> {
    let m = clause_count(INIT_N, INIT_ALPHA);
    let mut total = 0.0;
    for i in 0..INIT_SEEDS {
        let formula = generate_random_ksat(INIT_N, m, 3, derive_seed(INIT_SEED, i as u64, 0))
            .map_err(|e| e.to_string())?;
        let state = SolverState::init(&formula, derive_seed(INIT_SEED, i as u64, 1));
        total += state.energy() as f64 / m as f64;
    }
    let mean = total / INIT_SEEDS as f64;
    if (mean - INIT_EXPECTED).abs() <= INIT_TOLERANCE {
        Ok(format!("mean E(0)/M = {mean:.4} over {INIT_SEEDS} seeds (expected {INIT_EXPECTED} +- {INIT_TOLERANCE})"))
    } else {
        Err(format!("mean E(0)/M = {mean:.4}, outside {INIT_EXPECTED} +- {INIT_TOLERANCE}"))
    }
}

/* ---------------------------------------------------------------- */
/* 4: proposal distributions match their definitions                */
/* ---------------------------------------------------------------- */

const SAMPLING_SEED: u64 = 1042;
const SAMPLING_DRAWS: usize = 100_000;
/// Chi-square goodness-of-fit must not reject at this level.
const SAMPLING_MIN_P: f64 = 0.001;

fn c4_sampling() -> Result<String, String> {
    // uniform sampling over the variables of unsatisfied clauses, on a
    // frozen random state with a support set of at least 20 variables
    let n = 300;
    let formula = generate_random_ksat(n, clause_count(n, 4.2), 3, SAMPLING_SEED)
        .map_err(|e| e.to_string())?;
    let mut state = SolverState::init(&formula, derive_seed(SAMPLING_SEED, 0, 1));
    let support = state.unsat_var_ids();
    if support.len() < 20 {
        return Err(format!("support set too small for the test: {}", support.len()));
    }
    let mut counts = vec![0u64; n + 1];
    for _ in 0..SAMPLING_DRAWS {
        counts[state.sample_unsat_variable()] += 1;
    }
    let expected = SAMPLING_DRAWS as f64 / support.len() as f64;
    let stat: f64 = support
        .iter()
        .map(|&v| {
            let diff = counts[v as usize] as f64 - expected;
            diff * diff / expected
        })
        .sum();
    let p_uniform = chi_square_p(stat, support.len() - 1);
    if p_uniform <= SAMPLING_MIN_P {
        return Err(format!(
            "uniform support sampling rejected: chi2 = {stat:.1} over {} cells, p = {p_uniform:.5}",
            support.len()
        ));
    }

    // clause-then-variable sampling on two unsatisfied clauses sharing one
    // variable: the shared variable must be drawn twice as often
    let clauses = vec![
        vec![Literal::new(1, false), Literal::new(2, false), Literal::new(3, false)],
        vec![Literal::new(3, false), Literal::new(4, false), Literal::new(5, false)],
    ];
    let fixture = Formula::from_clauses(5, &clauses).map_err(|e| e.to_string())?;
    let mut state = SolverState::init_with_assignment(&fixture, &[false; 5], derive_seed(SAMPLING_SEED, 1, 1));
    let weights = [1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0];
    let mut counts = [0u64; 6];
    for _ in 0..SAMPLING_DRAWS {
        counts[state.sample_clause_then_variable()] += 1;
    }
    let stat: f64 = weights
        .iter()
        .zip(&counts[1..])
        .map(|(w, &c)| {
            let expected = w * SAMPLING_DRAWS as f64;
            let diff = c as f64 - expected;
            diff * diff / expected
        })
        .sum();
    let p_weighted = chi_square_p(stat, weights.len() - 1);
    if p_weighted <= SAMPLING_MIN_P {
        return Err(format!("weighted clause sampling rejected: chi2 = {stat:.1}, p = {p_weighted:.5}"));
    }
    Ok(format!(
        "uniform p = {p_uniform:.3}, shared-variable fixture p = {p_weighted:.3} ({SAMPLING_DRAWS} draws each)"
    ))
}

fn chi_square_p(stat: f64, df: usize) -> f64 {
    1.0 - ChiSquared::new(df as f64).expect("df >= 1").cdf(stat)
}

/* ---------------------------------------------------------------- */
/* 5: solution time vs noise is U-shaped with an interior optimum   */
/* ---------------------------------------------------------------- */

const LANDSCAPE_SEED: u64 = 105;
const LANDSCAPE_N: usize = 30_000;
const LANDSCAPE_ALPHA: f64 = 4.12;
const LANDSCAPE_INSTANCES: usize = 21;
/// Flip budget per run, in units of N. Must stay >= twice the optimal
/// median so a fully censored endpoint column certifies "median at least
/// 2x the minimum" on its own.
const LANDSCAPE_BUDGET_PER_N: u64 = 1_000;
/// The optimum must fall inside this eta window.
const ARGMIN_LO: f64 = 0.15;
const ARGMIN_HI: f64 = 0.35;

fn landscape_grid() -> Vec<f64> {
    vec![0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6]
}

fn landscape_sweep(heuristic: Heuristic) -> Result<Vec<SweepRow>, String> {
    let config = SweepConfig {
        n_vars: LANDSCAPE_N,
        alpha: LANDSCAPE_ALPHA,
        k: 3,
        heuristic,
        eta_grid: landscape_grid(),
        instances: LANDSCAPE_INSTANCES,
        master_seed: LANDSCAPE_SEED,
        max_flips: LANDSCAPE_BUDGET_PER_N * LANDSCAPE_N as u64,
    };
    noise_sweep(&config).map_err(|e| e.to_string())
}

/// Returns the argmin eta alongside the minimal median, or an error when no
/// column produced a finite median.
fn finite_argmin(rows: &[SweepRow]) -> Result<(f64, f64), String> {
    rows.iter()
        .filter(|row| row.median.is_finite())
        .map(|row| (row.eta, row.median))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| "no eta column solved a median instance within budget".to_string())
}

/// A censored median only proves "at least the budget"; the budget must
/// reach 2x the minimum for the endpoint claim to be certified.
fn endpoint_at_least(row: &SweepRow, threshold: f64) -> Result<(), String> {
    if row.median.is_finite() {
        if row.median >= threshold {
            Ok(())
        } else {
            Err(format!("median {:.1} at eta={} is below {threshold:.1}", row.median, row.eta))
        }
    } else if LANDSCAPE_BUDGET_PER_N as f64 >= threshold {
        Ok(())
    } else {
        Err(format!(
            "eta={} censored at budget {}/N, below the required {threshold:.1}/N",
            row.eta, LANDSCAPE_BUDGET_PER_N
        ))
    }
}

fn describe_landscape(rows: &[SweepRow]) -> String {
    rows.iter()
        .filter(|row| row.median.is_finite())
        .map(|row| format!("{}→{:.0}", row.eta, row.median))
        .collect::<Vec<_>>()
        .join(" ")
}

fn c5_noise_landscape() -> Result<(String, f64), String> {
    let rows = landscape_sweep(Heuristic::Vfms)?;
    let (argmin_eta, min_median) = finite_argmin(&rows)?;
    if !(ARGMIN_LO..=ARGMIN_HI).contains(&argmin_eta) {
        return Err(format!(
            "optimum eta = {argmin_eta} outside [{ARGMIN_LO}, {ARGMIN_HI}]; finite medians: {}",
            describe_landscape(&rows)
        ));
    }
    let threshold = 2.0 * min_median;
    endpoint_at_least(rows.first().expect("grid nonempty"), threshold)?;
    endpoint_at_least(rows.last().expect("grid nonempty"), threshold)?;
    Ok((
        format!(
            "optimum eta = {argmin_eta} with median {min_median:.0} flips/N; finite medians: {}",
            describe_landscape(&rows)
        ),
        argmin_eta,
    ))
}

/* ---------------------------------------------------------------- */
/* 6: clause-guided proposals need a higher optimal noise           */
/* ---------------------------------------------------------------- */

/// Expected window for (variable-uniform optimum) / (clause-guided optimum).
const NOISE_RATIO_LO: f64 = 0.55;
const NOISE_RATIO_HI: f64 = 0.9;

fn c6_noise_ordering(vfms_argmin: Option<f64>) -> Result<String, String> {
    let vfms_eta = vfms_argmin.ok_or("criterion 5 produced no optimum to compare against")?;
    let rows = landscape_sweep(Heuristic::Fms)?;
    let (fms_eta, fms_median) = finite_argmin(&rows)?;
    if fms_eta <= vfms_eta {
        return Err(format!(
            "clause-guided optimum eta = {fms_eta} does not exceed variable-uniform optimum {vfms_eta}; finite medians: {}",
            describe_landscape(&rows)
        ));
    }
    let ratio = vfms_eta / fms_eta;
    if !(NOISE_RATIO_LO..=NOISE_RATIO_HI).contains(&ratio) {
        return Err(format!(
            "optimum ratio {ratio:.3} outside [{NOISE_RATIO_LO}, {NOISE_RATIO_HI}] (vfms {vfms_eta}, fms {fms_eta})"
        ));
    }
    Ok(format!(
        "fms optimum eta = {fms_eta} (median {fms_median:.0} flips/N), vfms/fms ratio = {ratio:.3}"
    ))
}

/* ---------------------------------------------------------------- */
/* 7: the support-to-energy ratio saturates below the clause width  */
/* ---------------------------------------------------------------- */

const RATIO_SEED: u64 = 107;
const RATIO_N: usize = 30_000;
const RATIO_ALPHA: f64 = 4.12;
const RATIO_ETA: f64 = 0.23;
const RATIO_INSTANCES: usize = 20;
/// Saturation window for N_u/E once the transient has passed.
const RATIO_BAND_LO: f64 = 2.5;
const RATIO_BAND_HI: f64 = 3.0;
/// The plateau window starts at this many flips per clause.
const RATIO_WINDOW_START_PER_M: u64 = 10;
/// Tolerances: the flips=0 ratio against its analytic value, and the
/// ratio at one flip per clause against the plateau mean.
const RATIO_INITIAL_TOLERANCE: f64 = 0.10;
const RATIO_TRANSIENT_TOLERANCE: f64 = 0.05;

fn c7_ratio_saturation() -> Result<String, String> {
    let m = clause_count(RATIO_N, RATIO_ALPHA) as u64;
    let schedule = TraceSchedule { points_per_decade: 20, linear_stride: None };
    let traces = bench::trace_batch(
        RATIO_N,
        RATIO_ALPHA,
        3,
        Heuristic::Vfms,
        RATIO_ETA,
        RATIO_INSTANCES,
        RATIO_SEED,
        0, // run every instance to a solution
        schedule,
    )
    .map_err(|e| e.to_string())?;
    let averaged = average_traces(&traces).map_err(|e| e.to_string())?;

    // whole-panel points only: once any instance solves, later averages mix
    // survivors and would bias the ratio
    let full_panel: Vec<_> = averaged.iter().filter(|p| p.count == RATIO_INSTANCES).collect();
    let first = full_panel.first().ok_or("no step had every instance unsolved")?;
    if first.flips != 0 {
        return Err(format!("first full-panel step is {} flips, expected 0", first.flips));
    }

    // under a uniform random assignment, a variable sits in no unsatisfied
    // clause with probability (1 - 2^-K)^(K alpha), which gives
    // N_u/E = (1 - e^(-K alpha / 8)) / (alpha / 8) as N grows (K = 3)
    let a8 = RATIO_ALPHA / 8.0;
    let analytic_start = (1.0 - (-3.0 * a8).exp()) / a8;
    let start_err = (first.mean_ratio - analytic_start).abs() / analytic_start;
    if start_err > RATIO_INITIAL_TOLERANCE {
        return Err(format!(
            "ratio at flips=0 is {:.3}, {:.1}% from the analytic {analytic_start:.3}",
            first.mean_ratio,
            100.0 * start_err
        ));
    }

    let window: Vec<_> = full_panel
        .iter()
        .filter(|p| p.flips >= RATIO_WINDOW_START_PER_M * m)
        .collect();
    if window.is_empty() {
        return Err(format!(
            "no step with all {RATIO_INSTANCES} instances unsolved at or past {} flips",
            RATIO_WINDOW_START_PER_M * m
        ));
    }
    for point in &window {
        if point.mean_ratio < RATIO_BAND_LO || point.mean_ratio >= RATIO_BAND_HI {
            return Err(format!(
                "ratio {:.3} at {} flips leaves [{RATIO_BAND_LO}, {RATIO_BAND_HI})",
                point.mean_ratio, point.flips
            ));
        }
    }
    let plateau: f64 = window.iter().map(|p| p.mean_ratio).sum::<f64>() / window.len() as f64;

    let at_one_per_clause = full_panel
        .iter()
        .find(|p| p.flips >= m)
        .ok_or("no full-panel step at one flip per clause")?;
    let transient_err = (at_one_per_clause.mean_ratio - plateau).abs() / plateau;
    if transient_err > RATIO_TRANSIENT_TOLERANCE {
        return Err(format!(
            "ratio {:.3} at {} flips is {:.1}% from the plateau {plateau:.3}",
            at_one_per_clause.mean_ratio,
            at_one_per_clause.flips,
            100.0 * transient_err
        ));
    }
    Ok(format!(
        "start ratio {:.3} (analytic {analytic_start:.3}), plateau {plateau:.3} over {} points, transient settled by {} flips",
        first.mean_ratio,
        window.len(),
        at_one_per_clause.flips
    ))
}

/* ---------------------------------------------------------------- */
/* 8: medians of flips/N stay flat across a 50x size range          */
/* ---------------------------------------------------------------- */

const SCALING_SEED: u64 = 108;
const SCALING_SIZES: [usize; 3] = [1_000, 10_000, 50_000];
const SCALING_ALPHA: f64 = 4.1;
const SCALING_ETA: f64 = 0.23;
const SCALING_INSTANCES: usize = 21;
const SCALING_BUDGET_PER_N: u64 = 10_000;
const SCALING_MIN_SUCCESS: f64 = 0.9;
/// Largest allowed ratio between the extreme medians of flips/N.
const SCALING_MAX_MEDIAN_RATIO: f64 = 2.0;

fn c8_linearity() -> Result<String, String> {
    let config = ScalingConfig {
        sizes: SCALING_SIZES.to_vec(),
        alpha: SCALING_ALPHA,
        k: 3,
        heuristic: Heuristic::Vfms,
        eta: SCALING_ETA,
        instances: SCALING_INSTANCES,
        master_seed: SCALING_SEED,
        max_flips_per_n: SCALING_BUDGET_PER_N,
    };
    let rows = scaling_experiment(&config).map_err(|e| e.to_string())?;
    for row in &rows {
        if row.success_rate < SCALING_MIN_SUCCESS {
            return Err(format!(
                "success rate {:.2} at n={} is below {SCALING_MIN_SUCCESS}",
                row.success_rate, row.n
            ));
        }
        if !row.median.is_finite() {
            return Err(format!("median at n={} is censored", row.n));
        }
    }
    let lo = rows.iter().map(|r| r.median).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r.median).fold(0.0, f64::max);
    if hi / lo >= SCALING_MAX_MEDIAN_RATIO {
        return Err(format!(
            "medians span {lo:.0}..{hi:.0} flips/N (ratio {:.2} >= {SCALING_MAX_MEDIAN_RATIO})",
            hi / lo
        ));
    }
    let detail: Vec<String> = rows
        .iter()
        .map(|r| format!("n={}: median {:.0}, success {:.0}%", r.n, r.median, 100.0 * r.success_rate))
        .collect();
    Ok(detail.join("; "))
}

/* ---------------------------------------------------------------- */
/* 9: the flips/N distribution tightens as instances grow           */
/* ---------------------------------------------------------------- */

const CONCENTRATION_SEED_SMALL: u64 = 1091;
const CONCENTRATION_SEED_LARGE: u64 = 1092;
const CONCENTRATION_SMALL_N: usize = 1_000;
const CONCENTRATION_LARGE_N: usize = 10_000;
const CONCENTRATION_ALPHA: f64 = 4.2;
const CONCENTRATION_ETA: f64 = 0.25;
const CONCENTRATION_INSTANCES: usize = 100;
// Budgets differ per size: the quartiles are exact whenever at least 76 of
// the 100 runs finish (a budget only truncates, it never changes a run's
// trajectory), so each panel gets the cheapest budget that pilot runs showed
// leaves the third quartile uncensored with margin. At n=1000 this ratio of
// clauses to variables sits inside the finite-size window where a few
// instances can be unsatisfiable; those never finish at any budget, which is
// why the small panel gets the larger per-N allowance instead of a retry.
const CONCENTRATION_BUDGET_PER_N_SMALL: u64 = 200_000;
const CONCENTRATION_BUDGET_PER_N_LARGE: u64 = 100_000;
// Regression baseline for the large panel, pinned from an 11-instance pilot
// at the same parameters (measured median 6.64e3 flips/N): the median over
// the first 21 instances must stay within an order-of-magnitude band. This
// catches engine regressions that change flip efficiency without tripping
// the exact-arithmetic oracles.
const CONCENTRATION_BASELINE_INSTANCES: usize = 21;
const CONCENTRATION_BASELINE_LO: f64 = 2_000.0;
const CONCENTRATION_BASELINE_HI: f64 = 20_000.0;

fn c9_concentration() -> Result<String, String> {
    let panel = |n: usize, master_seed: u64, budget_per_n: u64| -> Result<Vec<f64>, String> {
        let results = bench::run_batch(
            n,
            CONCENTRATION_ALPHA,
            3,
            Heuristic::Vfms,
            CONCENTRATION_ETA,
            CONCENTRATION_INSTANCES,
            master_seed,
            budget_per_n * n as u64,
        )
        .map_err(|e| e.to_string())?;
        Ok(results
            .iter()
            .map(|r| if r.solved { r.flips as f64 / n as f64 } else { f64::INFINITY })
            .collect())
    };
    let iqr = |normalized: &[f64], n: usize, budget_per_n: u64| -> Result<f64, String> {
        let (q1, _, q3) = median_quartiles(normalized);
        if !q3.is_finite() {
            let solved = normalized.iter().filter(|x| x.is_finite()).count();
            return Err(format!(
                "n={n}: only {solved}/{} runs finished within {budget_per_n}*n flips; \
                 third quartile censored, spread incomparable",
                normalized.len()
            ));
        }
        Ok(q3 - q1)
    };

    let small_panel = panel(
        CONCENTRATION_SMALL_N,
        CONCENTRATION_SEED_SMALL,
        CONCENTRATION_BUDGET_PER_N_SMALL,
    )?;
    let large_panel = panel(
        CONCENTRATION_LARGE_N,
        CONCENTRATION_SEED_LARGE,
        CONCENTRATION_BUDGET_PER_N_LARGE,
    )?;
    let small = iqr(&small_panel, CONCENTRATION_SMALL_N, CONCENTRATION_BUDGET_PER_N_SMALL)?;
    let large = iqr(&large_panel, CONCENTRATION_LARGE_N, CONCENTRATION_BUDGET_PER_N_LARGE)?;

    let (_, baseline_median, _) =
        median_quartiles(&large_panel[..CONCENTRATION_BASELINE_INSTANCES]);
    if !(CONCENTRATION_BASELINE_LO..=CONCENTRATION_BASELINE_HI).contains(&baseline_median) {
        return Err(format!(
            "median flips/N over the first {CONCENTRATION_BASELINE_INSTANCES} instances at \
             n={CONCENTRATION_LARGE_N} is {baseline_median:.0}, outside the pinned baseline band \
             [{CONCENTRATION_BASELINE_LO:.0}, {CONCENTRATION_BASELINE_HI:.0}]"
        ));
    }

    if large < small {
        Ok(format!(
            "IQR of flips/N: {small:.0} at n={CONCENTRATION_SMALL_N} vs {large:.0} at \
             n={CONCENTRATION_LARGE_N} ({CONCENTRATION_INSTANCES} instances each); \
             21-instance baseline median {baseline_median:.0} in \
             [{CONCENTRATION_BASELINE_LO:.0}, {CONCENTRATION_BASELINE_HI:.0}]"
        ))
    } else {
        Err(format!(
            "IQR did not shrink: {small:.0} at n={CONCENTRATION_SMALL_N} vs {large:.0} at \
             n={CONCENTRATION_LARGE_N}"
        ))
    }
}

/* ---------------------------------------------------------------- */
/* 10: identical invocations produce identical bytes                */
/* ---------------------------------------------------------------- */

fn c10_determinism() -> Result<String, String> {
    use std::process::Command;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let invoke = |args: &[&str], workers_env: Option<&str>| -> Result<Vec<u8>, String> {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_vfms"));
        cmd.args(args).env_remove("VFMS_WORKERS");
        if let Some(w) = workers_env {
            cmd.env("VFMS_WORKERS", w);
        }
        let out = cmd.output().map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!(
                "command {:?} failed: {}",
                args,
                String::from_utf8_lossy(&out.stderr)
            ));
        }
        Ok(out.stdout)
    };
    let file = |name: &str| std::fs::read(dir.path().join(name)).map_err(|e| e.to_string());

    let cnf = path("inst.cnf");
    invoke(&["generate", "--n", "120", "--alpha", "3.0", "--seed", "13", "--out", &cnf], None)?;

    let mut compared = 0;
    let mut check = |label: &str, template: &[&str], out_flag: bool| -> Result<(), String> {
        let render = |name: &str, extra: &[&str]| -> Vec<String> {
            let mut args: Vec<String> = template.iter().map(|s| s.to_string()).collect();
            if out_flag {
                args.push("--out".into());
                args.push(path(name));
            }
            args.extend(extra.iter().map(|s| s.to_string()));
            args
        };
        let collect = |args: Vec<String>, env: Option<&str>| -> Result<Vec<u8>, String> {
            let strs: Vec<&str> = args.iter().map(String::as_str).collect();
            invoke(&strs, env)
        };
        let base_stdout = collect(render("a.csv", &[]), None)?;
        let repeat_stdout = collect(render("b.csv", &[]), None)?;
        let parallel_stdout = collect(render("c.csv", &["--workers", "4"]), None)?;
        let env_stdout = collect(render("d.csv", &[]), Some("3"))?;
        if out_flag {
            let a = file("a.csv")?;
            if a != file("b.csv")? || a != file("c.csv")? || a != file("d.csv")? {
                return Err(format!("{label}: output files differ across reruns/workers"));
            }
        } else if base_stdout != repeat_stdout
            || base_stdout != parallel_stdout
            || base_stdout != env_stdout
        {
            return Err(format!("{label}: stdout differs across reruns/workers"));
        }
        compared += 1;
        Ok(())
    };

    check(
        "sweep",
        &["sweep", "--n", "120", "--alpha", "3.0", "--heuristic", "vfms", "--eta-grid",
          "0.2,0.3", "--instances", "4", "--seed", "21", "--max-flips", "200000"],
        true,
    )?;
    check(
        "cdf",
        &["cdf", "--n", "120", "--alpha", "3.0", "--heuristic", "fms", "--eta", "0.3",
          "--instances", "5", "--seed", "22", "--max-flips", "200000"],
        true,
    )?;
    check(
        "scaling",
        &["scaling", "--sizes", "100,200", "--alpha", "3.0", "--heuristic", "vfms", "--eta",
          "0.3", "--instances", "4", "--seed", "23", "--max-flips-per-n", "2000"],
        true,
    )?;
    check(
        "trace-avg",
        &["trace-avg", "--n", "120", "--alpha", "3.0", "--heuristic", "focused-walk",
          "--instances", "4", "--seed", "24", "--max-flips", "100000"],
        true,
    )?;
    check(
        "solve",
        &["solve", "--cnf", &cnf, "--heuristic", "vfms", "--eta", "0.3", "--seed", "25"],
        false,
    )?;

    Ok(format!("{compared} commands byte-stable across reruns, --workers 4, and VFMS_WORKERS=3"))
}
