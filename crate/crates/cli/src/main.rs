use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use awayfw::apps::{self, io};
use awayfw::harness::{self, ExperimentConfig, Instance, OUTPUT_DIR_ENV};
use awayfw::trace::Method;

/// Away-step Frank-Wolfe experiments on D-optimal design and Hawkes MLE.
#[derive(Parser)]
#[command(name = "awayfw", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured method and write traces and metrics.
    Run {
        config: PathBuf,
        /// Overrides the configured output directory.
        #[arg(long, env = OUTPUT_DIR_ENV)]
        output_dir: Option<PathBuf>,
    },
    /// Write random D-optimal design points, one per row.
    GenDopt {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        /// Variance of each coordinate.
        #[arg(long, default_value_t = 10.0)]
        scale: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Simulate Hawkes arrivals and write them as `time,dim`.
    GenMhp {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 0.1)]
        mu: f64,
        #[arg(long, default_value_t = 0.9)]
        sparsity: f64,
        /// Spectral radius of the infectivity matrix.
        #[arg(long, default_value_t = 0.9)]
        radius: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: PathBuf,
        /// Also write the infectivity matrix here.
        #[arg(long)]
        infectivity: Option<PathBuf>,
    },
    /// Compute the reference optimum of a config's instance.
    Fstar {
        config: PathBuf,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Summarize the metric files of a finished run.
    Report { dir: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Run { config, output_dir } => run(&config, output_dir),
        Command::GenDopt { m, n, scale, seed, out } => {
            let pts = apps::dopt_random::<f64>(m, n, scale, seed)?;
            io::write_matrix_csv(&out, &pts).with_context(|| format!("writing {}", out.display()))?;
            println!("wrote {m} points in R^{n} to {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::GenMhp {
            m,
            t,
            mu,
            sparsity,
            radius,
            seed,
            out,
            infectivity,
        } => {
            let (_, a, arrivals) = harness::simulate_mhp(m, t, mu, sparsity, radius, seed)?;
            arrivals
                .write_csv(&out)
                .with_context(|| format!("writing {}", out.display()))?;
            if let Some(path) = infectivity {
                io::write_matrix_csv(&path, &a).with_context(|| format!("writing {}", path.display()))?;
            }
            println!(
                "wrote {} events on {m} dimensions to {}",
                arrivals.events().len(),
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Fstar { config, epsilon } => {
            let cfg = load(&config)?;
            let instance = Instance::build(&cfg.instance).context("building instance")?;
            let r =
                harness::compute_reference_fstar(&instance, epsilon.unwrap_or(cfg.epsilon), cfg.reference_iterations)?;
            println!("{:.17e}", r.fstar);
            if !r.converged {
                eprintln!(
                    "warning: budget exhausted at G = {:e}; value is the best seen",
                    r.final_gap
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { dir } => report(&dir),
    }
}

fn load(path: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::from_file(path).with_context(|| format!("loading {}", path.display()))
}

fn run(config: &Path, output_dir: Option<PathBuf>) -> Result<ExitCode> {
    let mut cfg = load(config)?;
    if let Some(dir) = output_dir {
        cfg.output_dir = dir;
    }
    let rep = harness::run_experiment(&cfg)?;
    println!(
        "F*_ref = {:.12e} ({} iterations{})",
        rep.reference.fstar,
        rep.reference.iterations,
        if rep.reference.converged { "" } else { ", NOT converged" }
    );
    println!(
        "{:<7} {:>8} {:>12} {:>12} {:>9} {:>10}  stop",
        "method", "iters", "delta", "FW gap", "nonzeros", "time_s"
    );
    for m in &rep.meta.methods {
        println!(
            "{:<7} {:>8} {:>12.3e} {:>12.3e} {:>9} {:>10.3}  {}",
            m.method.tag(),
            m.iterations,
            m.final_objective_gap,
            m.final_fw_gap,
            m.final_sparsity,
            m.time_s,
            m.stop
        );
        for v in m.violations.iter().take(5) {
            println!("    violation: {v}");
        }
        if m.violations.len() > 5 {
            println!("    ... {} more", m.violations.len() - 5);
        }
    }
    if let Some(est) = &rep.meta.mhp {
        println!(
            "dimension {}: {} events, mu = {:.6e}, {} nonzero infectivities",
            est.dimension,
            est.events,
            est.mu,
            est.a.iter().filter(|&&v| v > 0.0).count()
        );
    }
    println!("outputs in {}", rep.output_dir.display());
    if rep.violation_count() > 0 || rep.faults() > 0 {
        eprintln!(
            "{} invariant violations, {} faulted runs",
            rep.violation_count(),
            rep.faults()
        );
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn report(dir: &Path) -> Result<ExitCode> {
    let mut found = false;
    println!(
        "{:<7} {:>8} {:>12} {:>12} {:>9} {:>8} {:>6}",
        "method", "iters", "delta", "FW gap", "nonzeros", "ratio", "R2"
    );
    for method in Method::ALL {
        let path = harness::metrics_path(dir, method);
        if !path.exists() {
            continue;
        }
        found = true;
        let file = std::fs::File::open(&path).with_context(|| format!("opening {}", path.display()))?;
        let rows = harness::read_metrics_csv(file).with_context(|| format!("reading {}", path.display()))?;
        let Some(last) = rows.last() else {
            continue;
        };
        let delta: Vec<f64> = rows.iter().map(|r| r.objective_gap).collect();
        let gap: Vec<f64> = rows.iter().map(|r| r.fw_gap).collect();
        let (ratio, r2) = match harness::slope_ratio_report(&delta, &gap) {
            Ok(s) => (format!("{:.3}", s.ratio), format!("{:.3}", s.delta_fit.r_squared)),
            Err(_) => ("-".into(), "-".into()),
        };
        println!(
            "{:<7} {:>8} {:>12.3e} {:>12.3e} {:>9} {:>8} {:>6}",
            method.tag(),
            last.k,
            last.objective_gap,
            last.fw_gap,
            last.sparsity,
            ratio,
            r2
        );
    }
    if !found {
        bail!("no metrics files in {}", dir.display());
    }
    Ok(ExitCode::SUCCESS)
}
