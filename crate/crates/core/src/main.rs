use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use frozen_er::coalescent::ParticleSystem;
use frozen_er::graph::GraphState;
use frozen_er::harness::io::write_table;
use frozen_er::harness::{format_g15, run_experiment, write_results};
use frozen_er::limit::{diagnostics_at, lyapunov_check, parse_grid, simulate_path, LimitConfig};
use frozen_er::rng::replica_seed;
use frozen_er::special::{find_xmax, kernel_integrals, log_p1, oracle_p1, p1, p1_ratio_log};
use frozen_er::{Error, Result};

#[derive(Parser)]
#[command(
    name = "frozen-er",
    version,
    about = "Frozen Erdős–Rényi graph, its scaling limit and the frozen coalescent"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Func {
    P1,
    LogP1,
    Ratio,
    I1,
    I2,
    I3,
    I1trunc,
    Xmax,
    Oracle,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a special function and print `<fn>,<x>,<y>,<value>`.
    Eval {
        #[arg(long = "fn", value_enum)]
        func: Func,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        x: f64,
        #[arg(long, allow_hyphen_values = true)]
        y: Option<f64>,
        #[arg(long, default_value_t = 1e-14)]
        tol: f64,
    },
    /// Simulate the frozen graph in the critical window.
    SimGraph {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        p: f64,
        #[arg(long, allow_hyphen_values = true)]
        t: Option<f64>,
        /// `a:b:step` grid of times, instead of `--t`.
        #[arg(long, allow_hyphen_values = true)]
        t_grid: Option<String>,
        #[arg(long, default_value_t = 1)]
        reps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate the limit process and its martingale diagnostics.
    SimLimit {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        t_end: f64,
        /// Small-jump cutoff (default 1e-4 for p > 0, 1e-8 for p = 0).
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        t0: f64,
        #[arg(long, default_value_t = 0.0)]
        x0: f64,
        /// Disable the drift replacing jumps below the cutoff.
        #[arg(long)]
        no_compensate: bool,
        /// `a:b:step` output times (default: eleven equally spaced).
        #[arg(long, allow_hyphen_values = true)]
        t_grid: Option<String>,
        #[arg(long, default_value_t = 1)]
        reps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate the Foster–Lyapunov drift condition on a grid.
    CheckLyapunov {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        a: f64,
        #[arg(long = "B")]
        b_threshold: f64,
        #[arg(long, allow_hyphen_values = true, default_value = "-40:40:0.25")]
        grid: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate the finite frozen multiplicative coalescent.
    SimCoalescent {
        #[arg(long, value_delimiter = ',')]
        masses: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        frozen: Vec<f64>,
        #[arg(long)]
        p: f64,
        /// End time; `inf` runs to absorption.
        #[arg(long)]
        t_end: f64,
        #[arg(long, default_value_t = 1)]
        reps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a named experiment; exits with 0 only if every verdict passes.
    Experiment {
        #[arg(long)]
        name: String,
        /// JSON configuration (defaults apply to missing fields).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn g(v: f64) -> String {
    format_g15(v)
}

fn eval(func: Func, x: f64, y: Option<f64>, tol: f64) -> Result<String> {
    let (name, value) = match func {
        Func::P1 => ("p1", p1(x)?),
        Func::LogP1 => ("log-p1", log_p1(x)?.log_p1),
        Func::Ratio => {
            let y = y.ok_or_else(|| Error::Config("ratio needs --y".into()))?;
            ("ratio", p1_ratio_log(x, y)?)
        }
        Func::I1 => ("i1", kernel_integrals(x, tol)?.i1),
        Func::I2 => ("i2", kernel_integrals(x, tol)?.i2),
        Func::I3 => ("i3", kernel_integrals(x, tol)?.i3),
        Func::I1trunc => ("i1trunc", kernel_integrals(x, tol)?.i1_trunc),
        Func::Xmax => ("xmax", find_xmax()?.x_max),
        Func::Oracle => ("oracle", oracle_p1(x)?),
    };
    Ok(format!(
        "{name},{},{},{}",
        g(x),
        y.map(g).unwrap_or_default(),
        g(value)
    ))
}

fn times_from(
    grid: Option<&str>,
    single: Option<f64>,
    default: impl FnOnce() -> Vec<f64>,
) -> Result<Vec<f64>> {
    match (grid, single) {
        (Some(s), _) => parse_grid(s),
        (None, Some(t)) => Ok(vec![t]),
        (None, None) => Ok(default()),
    }
}

fn run(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Eval { func, x, y, tol } => {
            println!("{}", eval(func, x, y, tol)?);
        }
        Command::SimGraph {
            n,
            p,
            t,
            t_grid,
            reps,
            seed,
            out,
        } => {
            let times = times_from(t_grid.as_deref(), t, || vec![0.0])?;
            if times.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::Ordering("times must be non-decreasing".into()));
            }
            let records: Vec<Vec<Vec<String>>> = (0..reps)
                .into_par_iter()
                .map(|r| {
                    let mut gs = GraphState::new(n, p, replica_seed(seed, r))?;
                    let mut recs = Vec::new();
                    for &t in &times {
                        gs.run_to_time(t)?;
                        recs.push(vec![
                            seed.to_string(),
                            r.to_string(),
                            g(t),
                            gs.m().to_string(),
                            g(gs.frozen_mass_rescaled()),
                            gs.largest_frozen().to_string(),
                            gs.largest_standard().to_string(),
                            gs.discarded().to_string(),
                            gs.surplus_vertices().to_string(),
                        ]);
                    }
                    Ok(recs)
                })
                .collect::<Result<_>>()?;
            write_table(
                &out,
                &[
                    "seed",
                    "replica",
                    "t",
                    "m",
                    "frozen_mass_rescaled",
                    "largest_frozen",
                    "largest_standard",
                    "discarded",
                    "surplus_vertices",
                ],
                records.into_iter().flatten(),
            )?;
        }
        Command::SimLimit {
            p,
            t_end,
            delta,
            t0,
            x0,
            no_compensate,
            t_grid,
            reps,
            seed,
            out,
        } => {
            let mut cfg = LimitConfig::new(p, t_end, seed).with_start(t0, x0);
            if let Some(d) = delta {
                cfg = cfg.with_delta(d);
            }
            if no_compensate {
                cfg.compensate_small = false;
            }
            cfg.validate()?;
            let times = times_from(t_grid.as_deref(), None, || {
                (0..=10)
                    .map(|i| t0 + (t_end - t0) * i as f64 / 10.0)
                    .collect()
            })?;
            let records: Vec<Vec<Vec<String>>> = (0..reps)
                .into_par_iter()
                .map(|r| {
                    let path = simulate_path(&cfg.with_seed(replica_seed(seed, r)))?;
                    Ok(diagnostics_at(&path, &times)?
                        .into_iter()
                        .map(|d| {
                            vec![
                                seed.to_string(),
                                r.to_string(),
                                g(d.t),
                                g(d.value),
                                g(d.compensator),
                                g(d.martingale),
                                g(d.quadratic_variation),
                            ]
                        })
                        .collect())
                })
                .collect::<Result<_>>()?;
            write_table(
                &out,
                &["seed", "replica", "t", "X", "Xpre", "M", "QV"],
                records.into_iter().flatten(),
            )?;
        }
        Command::CheckLyapunov {
            alpha,
            beta,
            a,
            b_threshold,
            grid,
            out,
        } => {
            let rep = lyapunov_check(alpha, beta, a, b_threshold, &parse_grid(&grid)?)?;
            write_table(
                &out,
                &["x", "log_v", "relative_generator", "AV", "inside", "ok"],
                rep.points.iter().map(|p| {
                    vec![
                        g(p.x),
                        g(p.log_v),
                        g(p.relative),
                        g(p.av),
                        p.inside.to_string(),
                        p.ok.to_string(),
                    ]
                }),
            )?;
            println!(
                "delta={} B={} b={} violations={}",
                g(rep.delta_exp),
                g(rep.b_threshold),
                g(rep.b),
                rep.violations
                    .iter()
                    .map(|&x| g(x))
                    .collect::<Vec<_>>()
                    .join(";")
            );
            return Ok(rep.passed());
        }
        Command::SimCoalescent {
            masses,
            frozen,
            p,
            t_end,
            reps,
            seed,
            out,
        } => {
            let init = ParticleSystem::new(masses, frozen, p)?;
            let records: Vec<Vec<String>> = (0..reps)
                .into_par_iter()
                .map(|r| {
                    let mut rng = ChaCha8Rng::seed_from_u64(replica_seed(seed, r));
                    let mut s = init.clone();
                    s.run_until(t_end, &mut rng)?;
                    Ok(vec![
                        seed.to_string(),
                        r.to_string(),
                        g(s.time),
                        g(s.frozen_mass()),
                        s.standard.len().to_string(),
                        s.frozen.len().to_string(),
                        g(s.largest_standard()),
                    ])
                })
                .collect::<Result<_>>()?;
            write_table(
                &out,
                &[
                    "seed",
                    "replica",
                    "t_end",
                    "frozen_mass",
                    "n_standard",
                    "n_frozen",
                    "largest_standard",
                ],
                records,
            )?;
        }
        Command::Experiment { name, config, out } => {
            let cfg = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| Error::Io {
                        path: path.clone(),
                        source: e,
                    })?;
                    serde_json::from_str(&text)?
                }
                None => serde_json::Value::Null,
            };
            let result = run_experiment(&name, &cfg)?;
            write_results(&result, &out)?;
            for v in &result.verdicts {
                println!(
                    "{} {}: {}",
                    if v.passed { "PASS" } else { "FAIL" },
                    v.name,
                    v.detail
                );
            }
            return Ok(result.passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
