//! Command-line front end: instance generation, single solves, and the
//! multi-instance experiment commands, all seeded and reproducible.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use vfms::bench::{
    self, cumulative_distribution, noise_sweep, rescale_eta, scaling_experiment, ScalingConfig,
    SweepConfig,
};
use vfms::cnf::{self, generate_random_ksat, parse_dimacs, write_dimacs};
use vfms::engine::{self, Heuristic};
use vfms::trace::{average_traces, TraceRecorder, TraceSchedule};

#[derive(Parser)]
#[command(
    name = "vfms",
    version,
    about = "Focused Metropolis local search for random K-SAT",
    after_help = "Exit codes: 0 success/solved, 1 flip budget exhausted, 2 usage or input error."
)]
struct Cli {
    /// Worker threads for multi-run commands (overrides VFMS_WORKERS; default 1).
    /// Results are byte-identical for any worker count.
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a uniform random K-SAT instance in DIMACS format.
    Generate {
        /// Number of variables.
        #[arg(long)]
        n: usize,
        /// Clause density M/N; M = round(alpha*N), ties to even.
        #[arg(long, conflicts_with = "m")]
        alpha: Option<f64>,
        /// Exact clause count (alternative to --alpha).
        #[arg(long)]
        m: Option<usize>,
        /// Literals per clause.
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output DIMACS path.
        #[arg(long)]
        out: PathBuf,
    },

    /// Solve one DIMACS instance with a focused local-search heuristic.
    Solve {
        /// Input DIMACS file.
        #[arg(long)]
        cnf: PathBuf,
        /// vfms, fms, or focused-walk.
        #[arg(long, value_parser = parse_heuristic)]
        heuristic: Heuristic,
        /// Noise parameter in (0, 1]; required for vfms and fms.
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Stop after this many accepted flips (0 = run until solved).
        #[arg(long, default_value_t = 0)]
        max_flips: u64,
        /// Write a per-run trace CSV here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Geometric trace points per decade of flips.
        #[arg(long, default_value_t = 20)]
        points_per_decade: u32,
        /// Also record every multiple of this flip count.
        #[arg(long)]
        linear_stride: Option<u64>,
    },

    /// Solve-time quartiles across a grid of noise values (fresh random
    /// instances per grid cell).
    Sweep {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, value_parser = parse_heuristic)]
        heuristic: Heuristic,
        /// Comma list ("0.1,0.2,0.3") or inclusive range "start:stop:step".
        #[arg(long)]
        eta_grid: String,
        #[arg(long, default_value_t = 21)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Per-run flip budget (0 = unbounded; a budget is strongly advised).
        #[arg(long)]
        max_flips: u64,
        /// Multiply the eta column by this factor in the output (for
        /// overlaying heuristics on one noise axis).
        #[arg(long)]
        rescale_eta: Option<f64>,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },

    /// Empirical cumulative distribution of normalized solve times.
    Cdf {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, value_parser = parse_heuristic)]
        heuristic: Heuristic,
        /// Noise parameter in (0, 1]; required for vfms and fms.
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long, default_value_t = 100)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Per-run flip budget (0 = unbounded).
        #[arg(long)]
        max_flips: u64,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },

    /// Solve-time quartiles as a function of instance size, with the flip
    /// budget scaling proportionally to N.
    Scaling {
        /// Comma-separated increasing sizes, e.g. "1000,10000,50000".
        #[arg(long)]
        sizes: String,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, value_parser = parse_heuristic)]
        heuristic: Heuristic,
        /// Noise parameter in (0, 1]; required for vfms and fms.
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long, default_value_t = 21)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Per-run flip budget as a multiple of N (0 = unbounded).
        #[arg(long)]
        max_flips_per_n: u64,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },

    /// Average energy / support-size traces over fresh random instances.
    TraceAvg {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, value_parser = parse_heuristic)]
        heuristic: Heuristic,
        /// Noise parameter in (0, 1]; required for vfms and fms.
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long, default_value_t = 20)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Per-run flip budget (0 = run each instance until solved).
        #[arg(long, default_value_t = 0)]
        max_flips: u64,
        /// Geometric trace points per decade of flips.
        #[arg(long, default_value_t = 20)]
        points_per_decade: u32,
        /// Also record every multiple of this flip count.
        #[arg(long)]
        linear_stride: Option<u64>,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_heuristic(s: &str) -> Result<Heuristic, String> {
    s.parse()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: Cli) -> Result<ExitCode> {
    configure_workers(cli.workers)?;
    match cli.command {
        Command::Generate {
            n,
            alpha,
            m,
            k,
            seed,
            out,
        } => cmd_generate(n, alpha, m, k, seed, &out),
        Command::Solve {
            cnf,
            heuristic,
            eta,
            seed,
            max_flips,
            trace,
            points_per_decade,
            linear_stride,
        } => cmd_solve(
            &cnf,
            heuristic,
            eta,
            seed,
            max_flips,
            trace.as_deref(),
            points_per_decade,
            linear_stride,
        ),
        Command::Sweep {
            n,
            alpha,
            k,
            heuristic,
            eta_grid,
            instances,
            seed,
            max_flips,
            rescale_eta: factor,
            out,
        } => cmd_sweep(
            n, alpha, k, heuristic, &eta_grid, instances, seed, max_flips, factor, &out,
        ),
        Command::Cdf {
            n,
            alpha,
            k,
            heuristic,
            eta,
            instances,
            seed,
            max_flips,
            out,
        } => cmd_cdf(n, alpha, k, heuristic, eta, instances, seed, max_flips, &out),
        Command::Scaling {
            sizes,
            alpha,
            k,
            heuristic,
            eta,
            instances,
            seed,
            max_flips_per_n,
            out,
        } => cmd_scaling(
            &sizes,
            alpha,
            k,
            heuristic,
            eta,
            instances,
            seed,
            max_flips_per_n,
            &out,
        ),
        Command::TraceAvg {
            n,
            alpha,
            k,
            heuristic,
            eta,
            instances,
            seed,
            max_flips,
            points_per_decade,
            linear_stride,
            out,
        } => cmd_trace_avg(
            n,
            alpha,
            k,
            heuristic,
            eta,
            instances,
            seed,
            max_flips,
            points_per_decade,
            linear_stride,
            &out,
        ),
    }
}

/// Worker count resolution: --workers flag, then VFMS_WORKERS, then 1.
fn configure_workers(flag: Option<usize>) -> Result<()> {
    let workers = match flag {
        Some(w) => w,
        None => match std::env::var("VFMS_WORKERS") {
            Ok(value) => value
                .parse()
                .with_context(|| format!("VFMS_WORKERS must be a positive integer, got '{value}'"))?,
            Err(_) => 1,
        },
    };
    if workers == 0 {
        bail!("worker count must be at least 1");
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .context("failed to initialize the worker pool")?;
    Ok(())
}

fn validate_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha < 0.0 {
        bail!("--alpha must be a finite nonnegative number, got {alpha}");
    }
    Ok(())
}

/// focused-walk ignores the noise parameter; the Metropolis heuristics
/// require it.
fn resolve_eta(heuristic: Heuristic, eta: Option<f64>) -> Result<f64> {
    match heuristic {
        Heuristic::FocusedWalk => {
            if eta.is_some() {
                eprintln!("note: --eta is ignored by focused-walk (it always accepts)");
            }
            Ok(1.0)
        }
        _ => eta.with_context(|| format!("--eta is required for {heuristic}")),
    }
}

fn round9(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

/// "lo:hi:step" (inclusive endpoints, values rounded to 9 decimals) or a
/// comma-separated list.
fn parse_eta_grid(spec: &str) -> Result<Vec<f64>> {
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            bail!("--eta-grid range must be start:stop:step, got '{spec}'");
        }
        let start: f64 = parts[0].parse().context("bad range start")?;
        let stop: f64 = parts[1].parse().context("bad range stop")?;
        let step: f64 = parts[2].parse().context("bad range step")?;
        if !(step > 0.0 && start <= stop) {
            bail!("--eta-grid range needs start <= stop and step > 0");
        }
        let mut grid = Vec::new();
        for i in 0.. {
            let x = round9(start + i as f64 * step);
            if x > stop + 1e-9 {
                break;
            }
            grid.push(x);
        }
        Ok(grid)
    } else {
        spec.split(',')
            .map(|t| t.trim().parse::<f64>().with_context(|| format!("bad eta value '{t}'")))
            .collect()
    }
}

fn parse_sizes(spec: &str) -> Result<Vec<usize>> {
    spec.split(',')
        .map(|t| t.trim().parse::<usize>().with_context(|| format!("bad size '{t}'")))
        .collect()
}

fn join_f64(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn write_output(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>,
) -> Result<()> {
    let file = fs::File::create(path)
        .with_context(|| format!("cannot create output file {}", path.display()))?;
    let mut writer = BufWriter::new(file);
    body(&mut writer)
        .and_then(|()| writer.flush())
        .with_context(|| format!("failed writing {}", path.display()))?;
    Ok(())
}

fn cmd_generate(
    n: usize,
    alpha: Option<f64>,
    m: Option<usize>,
    k: usize,
    seed: u64,
    out: &Path,
) -> Result<ExitCode> {
    let m = match (alpha, m) {
        (Some(a), None) => {
            validate_alpha(a)?;
            cnf::clause_count(n, a)
        }
        (None, Some(m)) => m,
        _ => bail!("exactly one of --alpha or --m is required"),
    };
    let formula = generate_random_ksat(n, m, k, seed)?;
    write_output(out, |w| write_dimacs(&formula, w))?;
    println!("n={n} m={m} k={k} seed={seed}");
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_solve(
    cnf_path: &Path,
    heuristic: Heuristic,
    eta: Option<f64>,
    seed: u64,
    max_flips: u64,
    trace_path: Option<&Path>,
    points_per_decade: u32,
    linear_stride: Option<u64>,
) -> Result<ExitCode> {
    let eta = resolve_eta(heuristic, eta)?;
    let text = fs::read_to_string(cnf_path)
        .with_context(|| format!("cannot read {}", cnf_path.display()))?;
    let formula =
        parse_dimacs(&text).with_context(|| format!("invalid DIMACS in {}", cnf_path.display()))?;

    let started = Instant::now();
    let result = if let Some(path) = trace_path {
        let schedule = TraceSchedule {
            points_per_decade,
            linear_stride,
        };
        let mut recorder = TraceRecorder::new(schedule);
        let result = engine::run(&formula, heuristic, eta, seed, max_flips, Some(&mut recorder))?;
        let comments = vec![
            "command=solve".to_string(),
            format!("cnf={}", cnf_path.display()),
            format!("n={} m={} k={}", formula.num_vars(), formula.num_clauses(), formula.k()),
            format!("heuristic={heuristic} eta={eta} max_flips={max_flips}"),
            format!("points_per_decade={points_per_decade} linear_stride={}",
                linear_stride.map_or("none".to_string(), |s| s.to_string())),
            format!("seed={seed}"),
        ];
        write_output(path, |w| {
            vfms::trace::write_trace_csv(w, &comments, recorder.points())
        })?;
        result
    } else {
        engine::run(&formula, heuristic, eta, seed, max_flips, None)?
    };
    eprintln!(
        "solve finished in {:.2}s ({} flips, {} proposals)",
        started.elapsed().as_secs_f64(),
        result.flips,
        result.proposals
    );

    println!("solved,flips,proposals,seed");
    println!(
        "{},{},{},{}",
        result.solved, result.flips, result.proposals, result.seed
    );
    Ok(if result.solved {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    n: usize,
    alpha: f64,
    k: usize,
    heuristic: Heuristic,
    eta_grid_spec: &str,
    instances: usize,
    seed: u64,
    max_flips: u64,
    factor: Option<f64>,
    out: &Path,
) -> Result<ExitCode> {
    validate_alpha(alpha)?;
    let eta_grid = parse_eta_grid(eta_grid_spec)?;
    if let Some(f) = factor {
        if !(f > 0.0 && f.is_finite()) {
            bail!("--rescale-eta must be positive and finite, got {f}");
        }
    }
    let config = SweepConfig {
        n_vars: n,
        alpha,
        k,
        heuristic,
        eta_grid: eta_grid.clone(),
        instances,
        master_seed: seed,
        max_flips,
    };
    let started = Instant::now();
    let mut rows = noise_sweep(&config)?;
    if let Some(f) = factor {
        rows = rescale_eta(&rows, f);
    }
    let m = cnf::clause_count(n, alpha);
    let mut comments = vec![
        "command=sweep".to_string(),
        format!("n={n} m={m} alpha={alpha} k={k}"),
        format!("heuristic={heuristic} instances={instances} max_flips={max_flips}"),
        format!("eta_grid={}", join_f64(&eta_grid)),
        format!("seed={seed}"),
    ];
    if let Some(f) = factor {
        comments.push(format!("rescale_eta={f}"));
    }
    comments.push("quartiles=flips/n, unsolved runs counted as inf".to_string());
    write_output(out, |w| bench::write_sweep_csv(w, &comments, &rows))?;
    eprintln!(
        "sweep finished in {:.1}s ({} etas x {} instances)",
        started.elapsed().as_secs_f64(),
        eta_grid.len(),
        instances
    );
    println!("wrote {}", out.display());
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_cdf(
    n: usize,
    alpha: f64,
    k: usize,
    heuristic: Heuristic,
    eta: Option<f64>,
    instances: usize,
    seed: u64,
    max_flips: u64,
    out: &Path,
) -> Result<ExitCode> {
    validate_alpha(alpha)?;
    let eta = resolve_eta(heuristic, eta)?;
    let started = Instant::now();
    let results = bench::run_batch(n, alpha, k, heuristic, eta, instances, seed, max_flips)?;
    let points = cumulative_distribution(&results, n)?;
    let solved = results.iter().filter(|r| r.solved).count();
    let m = cnf::clause_count(n, alpha);
    let comments = vec![
        "command=cdf".to_string(),
        format!("n={n} m={m} alpha={alpha} k={k}"),
        format!("heuristic={heuristic} eta={eta} instances={instances} max_flips={max_flips}"),
        format!("seed={seed}"),
        "censoring=unsolved runs included in the denominator only".to_string(),
    ];
    write_output(out, |w| bench::write_cdf_csv(w, &comments, &points))?;
    eprintln!(
        "cdf finished in {:.1}s ({solved}/{instances} solved)",
        started.elapsed().as_secs_f64()
    );
    println!("wrote {}", out.display());
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_scaling(
    sizes_spec: &str,
    alpha: f64,
    k: usize,
    heuristic: Heuristic,
    eta: Option<f64>,
    instances: usize,
    seed: u64,
    max_flips_per_n: u64,
    out: &Path,
) -> Result<ExitCode> {
    validate_alpha(alpha)?;
    let eta = resolve_eta(heuristic, eta)?;
    let sizes = parse_sizes(sizes_spec)?;
    let config = ScalingConfig {
        sizes: sizes.clone(),
        alpha,
        k,
        heuristic,
        eta,
        instances,
        master_seed: seed,
        max_flips_per_n,
    };
    let started = Instant::now();
    let rows = scaling_experiment(&config)?;
    let comments = vec![
        "command=scaling".to_string(),
        format!(
            "sizes={}",
            sizes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
        ),
        format!("alpha={alpha} k={k}"),
        format!("heuristic={heuristic} eta={eta} instances={instances} max_flips_per_n={max_flips_per_n}"),
        format!("seed={seed}"),
        "quartiles=flips/n, unsolved runs counted as inf".to_string(),
    ];
    write_output(out, |w| bench::write_scaling_csv(w, &comments, &rows))?;
    eprintln!(
        "scaling finished in {:.1}s ({} sizes x {instances} instances)",
        started.elapsed().as_secs_f64(),
        sizes.len()
    );
    println!("wrote {}", out.display());
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_trace_avg(
    n: usize,
    alpha: f64,
    k: usize,
    heuristic: Heuristic,
    eta: Option<f64>,
    instances: usize,
    seed: u64,
    max_flips: u64,
    points_per_decade: u32,
    linear_stride: Option<u64>,
    out: &Path,
) -> Result<ExitCode> {
    validate_alpha(alpha)?;
    let eta = resolve_eta(heuristic, eta)?;
    let schedule = TraceSchedule {
        points_per_decade,
        linear_stride,
    };
    let started = Instant::now();
    let traces = bench::trace_batch(
        n, alpha, k, heuristic, eta, instances, seed, max_flips, schedule,
    )?;
    let rows = average_traces(&traces)?;
    let m = cnf::clause_count(n, alpha);
    let comments = vec![
        "command=trace-avg".to_string(),
        format!("n={n} m={m} alpha={alpha} k={k}"),
        format!("heuristic={heuristic} eta={eta} instances={instances} max_flips={max_flips}"),
        format!("points_per_decade={points_per_decade} linear_stride={}",
            linear_stride.map_or("none".to_string(), |s| s.to_string())),
        format!("seed={seed}"),
        "averaging=instances with energy=0 at a step are excluded there; count lists contributors"
            .to_string(),
        "ratio=mean over contributing instances of n_u/energy".to_string(),
    ];
    write_output(out, |w| vfms::trace::write_averaged_csv(w, &comments, &rows))?;
    eprintln!(
        "trace-avg finished in {:.1}s ({instances} instances)",
        started.elapsed().as_secs_f64()
    );
    println!("wrote {}", out.display());
    Ok(ExitCode::SUCCESS)
}
