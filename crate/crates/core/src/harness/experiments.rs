//! Named experiments with their acceptance thresholds.
//!
//! Each experiment reads a JSON object whose fields all have defaults;
//! unknown fields are rejected. The echoed configuration in the result is the
//! parsed object with every default filled in.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::stats::{chi_square, ks_statistic, median, tail_cubic_fit, Summary};
use super::{ExperimentResult, Row, Verdict};
use crate::coalescent::{EventKind, ParticleSystem};
use crate::error::{Error, Result};
use crate::graph::GraphState;
use crate::limit::{
    diagnostics_at, lyapunov_check, lyapunov_threshold, parse_grid, simulate_path,
    stationary_samples, LimitConfig,
};
use crate::quad::integrate;
use crate::rng::replica_seed;
use crate::special::{
    airy_scaled, find_xmax, kernel_integrals, log_p1, oracle_log_p1, p1, p1_ratio_log,
};

pub const EXPERIMENTS: [&str; 9] = [
    "special-accuracy",
    "lemma-suite",
    "coupling-p1",
    "theorem1",
    "stationarity-p0",
    "lyapunov",
    "discrete-limit",
    "martingale",
    "coalescent-rates",
];

/// Run the experiment `name` with a JSON `config` (`null` means all defaults).
pub fn run_experiment(name: &str, config: &serde_json::Value) -> Result<ExperimentResult> {
    let ctx = |e: Error| match e {
        Error::Numeric { msg, lo, hi } => Error::Numeric {
            msg: format!("{name}: {msg}"),
            lo,
            hi,
        },
        other => other,
    };
    match name {
        "special-accuracy" => run::<SpecialAccuracy>(name, config),
        "lemma-suite" => run::<LemmaSuite>(name, config),
        "coupling-p1" => run::<CouplingP1>(name, config),
        "theorem1" => run::<Theorem1>(name, config),
        "stationarity-p0" => run::<StationarityP0>(name, config),
        "lyapunov" => run::<LyapunovExperiment>(name, config),
        "discrete-limit" => run::<DiscreteLimit>(name, config),
        "martingale" => run::<Martingale>(name, config),
        "coalescent-rates" => run::<CoalescentRates>(name, config),
        _ => Err(Error::Config(format!(
            "unknown experiment {name:?}; expected one of {EXPERIMENTS:?}"
        ))),
    }
    .map_err(ctx)
}

trait Experiment: Serialize + DeserializeOwned {
    fn seed(&self) -> u64;
    fn execute(&self) -> Result<(Vec<Row>, Vec<Verdict>)>;
}

fn run<E: Experiment>(name: &str, config: &serde_json::Value) -> Result<ExperimentResult> {
    let value = if config.is_null() {
        serde_json::json!({})
    } else {
        config.clone()
    };
    let exp: E =
        serde_json::from_value(value).map_err(|e| Error::Config(format!("{name}: {e}")))?;
    let (rows, verdicts) = exp.execute()?;
    Ok(ExperimentResult {
        name: name.to_string(),
        seed: exp.seed(),
        config: serde_json::to_value(&exp)?,
        rows,
        verdicts,
    })
}

fn config_check(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(msg()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpecialAccuracy {
    pub step: f64,
    pub inner_tol: f64,
    pub outer_tol: f64,
    pub norm_tol: f64,
    pub xmax_target: f64,
    pub xmax_tol: f64,
    pub seed: u64,
}

impl Default for SpecialAccuracy {
    fn default() -> Self {
        SpecialAccuracy {
            step: 0.25,
            inner_tol: 1e-6,
            outer_tol: 1e-3,
            norm_tol: 1e-7,
            xmax_target: -0.886,
            xmax_tol: 0.01,
            seed: 0,
        }
    }
}

/// `∫ p₁` over the whole line; `x = 1/u²` maps `[1, ∞)` onto `(0, 1]`.
pub fn p1_total_mass() -> Result<f64> {
    let left = integrate(|x| p1(x).unwrap_or(f64::NAN), -14.0, 1.0, 1e-15, 1e-13)?.value;
    let right = integrate(
        |u| {
            let x = 1.0 / (u * u);
            2.0 * p1(x).unwrap_or(f64::NAN) / (u * u * u)
        },
        0.0,
        1.0,
        1e-15,
        1e-13,
    )?
    .value;
    Ok(left + right)
}

impl Experiment for SpecialAccuracy {
    fn seed(&self) -> u64 {
        self.seed
    }

    fn execute(&self) -> Result<(Vec<Row>, Vec<Verdict>)> {
        config_check(self.step > 0.0, || "step must be positive".into())?;
        let n = (60.0 / self.step).round() as i64;
        let xs: Vec<f64> = (0..=n).map(|i| -30.0 + i as f64 * self.step).collect();
        let errs: Vec<(f64, f64)> = xs
            .par_iter()
            .map(|&x| Ok((x, (log_p1(x)?.log_p1 - oracle_log_p1(x)?).exp_m1().abs())))
            .collect::<Result<_>>()?;
        let worst = |inner: bool| {
            errs.iter()
                .filter(|(x, _)| (x.abs() <= 10.0) == inner)
                .fold(
                    (0.0, f64::NAN),
                    |acc: (f64, f64), &(x, e)| if e >= acc.0 { (e, x) } else { acc },
                )
        };
        let (inner, inner_at) = worst(true);
        let (outer, outer_at) = worst(false);
        let mass = p1_total_mass()?;
        let xm = find_xmax()?.x_max;
        let mut rows: Vec<Row> = errs
            .iter()
            .map(|&(x, e)| Row::new(0, x, "rel_err", e))
            .collect();
        rows.push(Row::new(0, 0.0, "total_mass", mass));
        rows.push(Row::new(0, 0.0, "x_max", xm));
        let verdicts = vec![
            Verdict::new(
                "relative error on [-10, 10]",
                inner <= self.inner_tol,
                format!(
                    "max {inner:.3e} at x = {inner_at} (limit {:e})",
                    self.inner_tol
                ),
            ),
            Verdict::new(
                "relative error on [-30, -10) and (10, 30]",
                outer <= self.outer_tol,
                format!(
                    "max {outer:.3e} at x = {outer_at} (limit {:e})",
                    self.outer_tol
                ),
            ),
            Verdict::new(
                "total mass",
                (mass - 1.0).abs() <= self.norm_tol,
                format!("integral = {mass:.15} (limit 1 ± {:e})", self.norm_tol),
            ),
            Verdict::new(
                "mode location",
                (xm - self.xmax_target).abs() <= self.xmax_tol,
                format!(
                    "x_max = {xm:.12} (target {} ± {})",
                    self.xmax_target, self.xmax_tol
                ),
            ),
        ];
        Ok((rows, verdicts))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LemmaSuite {
    pub ys: Vec<f64>,
    pub step: f64,
    pub x_left: f64,
    pub fd_tol: f64,
    pub small_jump: f64,
    pub pairs: usize,
    pub kernel_xs: Vec<f64>,
    pub seed: u64,
}

impl Default for LemmaSuite {
    fn default() -> Self {
        LemmaSuite {
            ys: vec![0.1, 0.5, 1.0],
            step: 0.05,
            x_left: -30.0,
            fd_tol: 1e-9,
            small_jump: 0.886,
            pairs: 200,
            kernel_xs: vec![8.0, 10.0, 15.0, 20.0],
            seed: 1,
        }
    }
}

impl Experiment for LemmaSuite {
    fn seed(&self) -> u64 {
        self.seed
    }

    fn execute(&self) -> Result<(Vec<Row>, Vec<Verdict>)> {
        config_check(self.step > 0.0 && self.x_left < 0.0, || {
            "need step > 0 and x_left < 0".into()
        })?;
        let mut rows = Vec::new();
        let mut verdicts = Vec::new();

        // Ratio p₁(x−y)/p₁(x) is non-decreasing in x on (−∞, 0).
        let n = (-self.x_left / self.step).round() as usize;
        let mut worst_fd = f64::INFINITY;
        for &y in &self.ys {
            let r: Vec<f64> = (0..=n)
                .map(|i| Ok(p1_ratio_log(self.x_left + i as f64 * self.step, y)?.exp()))
                .collect::<Result<_>>()?;
            let min_fd = r
                .windows(2)
                .map(|w| w[1] - w[0])
                .fold(f64::INFINITY, f64::min);
            rows.push(Row::new(0, y, "min_ratio_difference", min_fd));
            worst_fd = worst_fd.min(min_fd);
        }
        verdicts.push(Verdict::new(
            "ratio non-decreasing on (-inf, 0)",
            worst_fd >= -self.fd_tol,
            format!(
                "smallest forward difference {worst_fd:.3e} (limit -{:e})",
                self.fd_tol
            ),
        ));

        // Ratio at least one for x ≥ 0 and small jumps.
        let mut worst_log = f64::INFINITY;
        for i in 0..=80 {
            let x = 0.25 * i as f64;
            for j in 0..=20 {
                let y = self.small_jump * j as f64 / 20.0;
                worst_log = worst_log.min(p1_ratio_log(x, y)?);
            }
        }
        rows.push(Row::new(0, 0.0, "min_log_ratio_small_jumps", worst_log));
        verdicts.push(Verdict::new(
            "ratio >= 1 for x in [0, 20], y in [0, 0.886]",
            worst_log >= 0.0,
            format!("smallest log-ratio {worst_log:.3e}"),
        ));

        // Ai(u)Ai'(v) − Ai(v)Ai'(u) > 0 for u > v ≥ 0 (scaling factors are positive).
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut cross_ok = 0;
        for k in 0..self.pairs {
            let v: f64 = rng.random::<f64>() * 30.0;
            let u = v + 1e-3 + rng.random::<f64>() * 30.0;
            let (a, b) = (airy_scaled(u)?, airy_scaled(v)?);
            let c = a.ai_s * b.aip_s - b.ai_s * a.aip_s;
            rows.push(Row::new(k as u64, u, "airy_cross", c));
            cross_ok += usize::from(c > 0.0);
        }
        verdicts.push(Verdict::new(
            "Airy cross inequality",
            cross_ok == self.pairs,
            format!("{cross_ok}/{} sampled pairs", self.pairs),
        ));

        let mut sandwich_ok = true;
        let mut trunc_ok = true;
        let mut detail = Vec::new();
        for &x in &self.kernel_xs {
            let k = kernel_integrals(x, 1e-14)?;
            let dev = (x * k.i1 - 1.0).abs();
            sandwich_ok &= dev <= 5.0 / x.powi(3);
            trunc_ok &= k.i1_trunc >= 1.0 / (2.0 * x);
            rows.push(Row::new(0, x, "x_i1_minus_1", x * k.i1 - 1.0));
            rows.push(Row::new(0, x, "i1_trunc", k.i1_trunc));
            detail.push(format!(
                "x={x}: |xI1-1|={dev:.2e}, I1trunc*2x={:.4}",
                2.0 * x * k.i1_trunc
            ));
        }
        verdicts.push(Verdict::new(
            "|x I1(x) - 1| <= 5/x^3",
            sandwich_ok,
            detail.join("; "),
        ));
        verdicts.push(Verdict::new(
            "I1 truncated at x_max >= 1/(2x)",
            trunc_ok,
            "",
        ));
        Ok((rows, verdicts))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CouplingP1 {
    pub n: u32,
    pub seeds: u64,
    pub steps_per_vertex: u64,
    /// Other values of `p` whose structure is audited.
    pub audit_ps: Vec<f64>,
    pub seed: u64,
}

impl Default for CouplingP1 {
    fn default() -> Self {
        CouplingP1 {
            n: 2000,
            seeds: 50,
            steps_per_vertex: 3,
            audit_ps: vec![0.0, 0.5],
            seed: 1,
        }
    }
}

impl Experiment for CouplingP1 {
    fn seed(&self) -> u64 {
        self.seed
    }

    fn execute(&self) -> Result<(Vec<Row>, Vec<Verdict>)> {
        let steps = self.steps_per_vertex * self.n as u64;
        let audit_every = (self.n as u64 / 4).max(1);
        let per_seed: Vec<(Vec<Row>, u64, u64, Option<String>)> = (0..self.seeds)
            .into_par_iter()
            .map(|r| {
                let seed = replica_seed(self.seed, r);
                let mut g = GraphState::new(self.n, 1.0, seed)?;
                let (mut count_fail, mut forest_fail) = (0u64, 0u64);
                let mut audit = None;
                for s in 1..=steps {
                    g.apply_edge();
                    count_fail += u64::from(g.frozen_vertices() != g.surplus_vertices());
                    forest_fail += u64::from(!g.forests_coincide());
                    if s % audit_every == 0 || s == steps {
                        if let Err(e) = g.check_invariants() {
                            audit.get_or_insert(format!("p=1 seed {seed} m={}: {e}", g.m()));
                        }
                    }
                }
                let mut rows = vec![
                    Row::new(
                        r,
                        g.m() as f64,
                        "frozen_vertices",
                        g.frozen_vertices() as f64,
                    ),
                    Row::new(
                        r,
                        g.m() as f64,
                        "surplus_vertices",
                        g.surplus_vertices() as f64,
                    ),
                ];
                for &p in &self.audit_ps {
                    let mut h = GraphState::new(self.n, p, seed)?;
                    for s in 1..=steps {
                        h.apply_edge();
                        if s % audit_every == 0 || s == steps {
                            if let Err(e) = h.check_invariants() {
                                audit.get_or_insert(format!("p={p} seed {seed} m={}: {e}", h.m()));
                            }
                        }
                    }
                    rows.push(Row::new(
                        r,
                        h.m() as f64,
                        format!("frozen_vertices[p={p}]"),
                        h.frozen_vertices() as f64,
                    ));
                }
                Ok((rows, count_fail, forest_fail, audit))
            })
            .collect::<Result<_>>()?;
        let count_fail: u64 = per_seed.iter().map(|s| s.1).sum();
        let forest_fail: u64 = per_seed.iter().map(|s| s.2).sum();
        let audit = per_seed.iter().find_map(|s| s.3.clone());
        let rows = per_seed.into_iter().flat_map(|s| s.0).collect();
        let checked = self.seeds * steps;
        Ok((
            rows,
            vec![
                Verdict::new(
                    "frozen==surplus vertices at every m",
                    count_fail == 0,
                    format!("{count_fail} mismatches over {checked} edge counts"),
                ),
                Verdict::new(
                    "tree-size multisets coincide",
                    forest_fail == 0,
                    format!("{forest_fail} mismatches over {checked} edge counts"),
                ),
                Verdict::new(
                    "no component with surplus >= 2",
                    audit.is_none(),
                    audit.unwrap_or_else(|| format!("audited p = 1 and p in {:?}", self.audit_ps)),
                ),
            ],
        ))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Theorem1 {
    pub p: f64,
    pub reps: u64,
    pub times: Vec<f64>,
    /// Required ratio of the last to the first median.
    pub ratio: f64,
    pub seed: u64,
}

impl Default for Theorem1 {
    fn default() -> Self {
        Theorem1 {
            p: 0.5,
            reps: 300,
            times: vec![5.0, 10.0, 20.0, 30.0],
            ratio: 0.5,
            seed: 1,
        }
    }
}

impl Experiment for Theorem1 {
    fn seed(&self) -> u64 {
        self.seed
    }

    fn execute(&self) -> Result<(Vec<Row>, Vec<Verdict>)> {
        config_check(
            self.times.len() >= 2
                && self.times.windows(2).all(|w| w[0] < w[1])
                && self.times[0] > 0.0,
            || "times must be positive and increasing (at least two)".into(),
        )?;
        let t_end = *self.times.last().unwrap();
        let slope = 1.0 + self.p;
        let devs: Vec<Vec<f64>> = (0..self.reps)
            .into_par_iter()
            .map(|r| {
                let path =
                    simulate_path(&LimitConfig::new(self.p, t_end, replica_seed(self.seed, r)))?;
                Ok(self
                    .times
                    .iter()
                    .map(|&t| (path.value_at(t) - slope * t).abs())
                    .collect())
            })
            .collect::<Result<_>>()?;
        let mut rows = Vec::new();
        for (r, d) in devs.iter().enumerate() {
            for (&t, &v) in self.times.iter().zip(d) {
                rows.push(Row::new(r as u64, t, "abs_dev", v));
            }
        }
        let medians: Vec<f64> = (0..self.times.len())
            .map(|k| median(&devs.iter().map(|d| d[k]).collect::<Vec<_>>()))
            .collect::<Result<_>>()?;
        let (first, last) = (medians[0], *medians.last().unwrap());
        let detail = self
            .times
            .iter()
            .zip(&medians)
            .map(|(t, m)| format!("t={t}: {m:.4}"))
            .collect::<Vec<_>>()
            .join(", ");
        Ok((
            rows,
            vec![Verdict::new(
                "median_abs_dev decreasing",
                last <= self.ratio * first,
                format!("{detail}; need last <= {} x first", self.ratio),
            )],
        ))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StationarityP0 {
    pub reps: usize,
    pub t1: f64,
    pub t2: f64,
    pub ks_max: f64,
    pub quantiles: (f64, f64),
    pub slope_range: (f64, f64),
    pub tail_level: f64,
    pub tail_max_fraction: f64,
    pub seed: u64,
}

impl Default for StationarityP0 {
    fn default() -> Self {
        StationarityP0 {
            reps: 2000,
            t1: 30.0,
            t2: 60.0,
            ks_max: 0.06,
            quantiles: (0.90, 0.995),
            slope_range: (2.4, 3.6),
            tail_level: 2.0,
            tail_max_fraction: 0.01,
            seed: 1,
        }
    }
}

impl Experiment for StationarityP0 {
    fn seed(&self) -> u64 {
        self.seed
    }

    fn execute(&self) -> Result<(Vec<Row>, Vec<Verdict>)> {
        config_check(self.t2 >= self.t1 && self.t1 > 0.0, || {
            "need 0 < t1 <= t2".into()
        })?;
        let a = stationary_samples(self.t1, self.t1, self.reps, replica_seed(self.seed, 1))?;
        let b = stationary_samples(self.t1, self.t2, self.reps, replica_seed(self.seed, 2))?;
        let mut rows: Vec<Row> = a
            .iter()
            .enumerate()
            .map(|(r, &y)| Row::new(r as u64, self.t1, "Y", y))
            .collect();
        rows.extend(
            b.iter()
                .enumerate()
                .map(|(r, &y)| Row::new(r as u64, self.t2, "Y", y)),
        );
        let ks = ks_statistic(&a, &b)?;
        let slope = tail_cubic_fit(&b, self.quantiles)?;
        let frac = b.iter().filter(|&&y| y > self.tail_level).count() as f64 / b.len() as f64;
        let (lo, hi) = self.slope_range;
        Ok((
            rows,
            vec![
                Verdict::new(
                    "KS between times",
                    ks <= self.ks_max,
                    format!(
                        "KS(t={}, t={}) = {ks:.4} (limit {})",
                        self.t1, self.t2, self.ks_max
                    ),
                ),
                Verdict::new(
                    "cubic tail slope",
                    (lo..=hi).contains(&slope),
                    format!(
                        "slope {slope:.3} on quantiles {:?} at t={} (window [{lo}, {hi}])",
                        self.quantiles, self.t2
                    ),
                ),
                Verdict::new(
                    "right-tail fraction",
                    frac < self.tail_max_fraction,
                    format!(
                        "P(Y > {}) = {frac:.4} (limit {})",
                        self.tail_level, self.tail_max_fraction
                    ),
                ),
            ],
        ))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LyapunovExperiment {
    pub alpha: f64,
    pub beta: f64,
    pub a: f64,
    pub grid: String,
    pub b_max: f64,
    pub seed: u64,
}

impl Default for LyapunovExperiment {
    fn default() -> Self {
        LyapunovExperiment {
            alpha: 0.1,
            beta: 0.02,
            a: 0.5,
            grid: "-40:40:0.25".into(),
            b_max: 10.0,
            seed: 0,
        }
    }
}

impl Experiment for LyapunovExperiment {
    fn seed(&self) -> u64 {
        self.seed
    }

    fn execute(&self) -> Result<(Vec<Row>, Vec<Verdict>)> {
        let grid = parse_grid(&self.grid)?;
        let rep = lyapunov_threshold(self.alpha, self.beta, self.a, &grid)?;
        let rows = rep
            .points
            .iter()
            .flat_map(|p| {
                [
                    Row::new(0, p.x, "relative_generator", p.relative),
                    Row::new(0, p.x, "log_v", p.log_v),
                ]
            })
            .collect();
        let check = lyapunov_check(self.alpha, self.beta, self.a, rep.b_threshold, &grid)?;
        Ok((
            rows,
            vec![
                Verdict::new(
                    "threshold B exists",
                    rep.b_threshold <= self.b_max && check.violations.is_empty(),
                    format!(
                        "smallest B = {:.4} (limit {}), delta = {:.4}",
                        rep.b_threshold, self.b_max, rep.delta_exp
                    ),
                ),
                Verdict::new(
                    "AV bounded inside C",
                    check.b.is_finite(),
                    format!("b = {:.6e}", check.b),
                ),
            ],
        ))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscreteLimit {
    pub p: f64,
    pub n: u32,
    pub t: f64,
    pub reps: u64,
    /// Start of the limit process, with `X(t0) = 0`.
    pub t0: f64,
    pub ks_max: f64,
    pub seed: u64,
}

impl Default for DiscreteLimit {
    fn default() -> Self {
        DiscreteLimit {
            p: 0.5,
            n: 100_000,
            t: 2.0,
            reps: 500,
            t0: -20.0,
            ks_max: 0.15,
            seed: 1,
        }
    }
}

impl Experiment for DiscreteLimit {
    fn seed(&self) -> u64 {
        self.seed
    }

    fn execute(&self) -> Result<(Vec<Row>, Vec<Verdict>)> {
        let scale = (self.n as f64).powf(-2.0 / 3.0);
        let graph: Vec<f64> = (0..self.reps)
            .into_par_iter()
            .map(|r| {
                let mut g = GraphState::new(self.n, self.p, replica_seed(self.seed, 2 * r))?;
                g.run_to_time(self.t)?;
                Ok(g.frozen_vertices() as f64 * scale)
            })
            .collect::<Result<_>>()?;
        let limit: Vec<f64> = (0..self.reps)
            .into_par_iter()
            .map(|r| {
                let cfg = LimitConfig::new(self.p, self.t, replica_seed(self.seed, 2 * r + 1))
                    .with_start(self.t0, 0.0);
                Ok(simulate_path(&cfg)?.value_at(self.t))
            })
            .collect::<Result<_>>()?;
        let mut rows = Vec::with_capacity(2 * graph.len());
        for (r, (g, l)) in graph.iter().zip(&limit).enumerate() {
            rows.push(Row::new(r as u64, self.t, "graph_frozen_rescaled", *g));
            rows.push(Row::new(r as u64, self.t, "limit_X", *l));
        }
        let ks = ks_statistic(&graph, &limit)?;
        let (gs, ls) = (Summary::of(&graph), Summary::of(&limit));
        Ok((
            rows,
            vec![Verdict::new(
                "KS graph vs limit",
                ks <= self.ks_max,
                format!(
                    "KS = {ks:.4} (limit {}); means {:.4} vs {:.4}",
                    self.ks_max, gs.mean, ls.mean
                ),
            )],
        ))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Martingale {
    pub ps: Vec<f64>,
    pub reps: u64,
    pub times: Vec<f64>,
    pub mean_se: f64,
    pub var_se: f64,
    pub seed: u64,
}

impl Default for Martingale {
    fn default() -> Self {
        Martingale {
            ps: vec![0.0, 0.5],
            reps: 500,
            times: vec![2.0, 5.0, 10.0],
            mean_se: 3.0,
            var_se: 4.0,
            seed: 1,
        }
    }
}

impl Experiment for Martingale {
    fn seed(&self) -> u64 {
        self.seed
    }

    fn execute(&self) -> Result<(Vec<Row>, Vec<Verdict>)> {
        config_check(
            !self.times.is_empty()
                && self.times.windows(2).all(|w| w[0] <= w[1])
                && self.times[0] > 0.0,
            || "times must be positive and non-decreasing".into(),
        )?;
        let t_end = *self.times.last().unwrap();
        let mut rows = Vec::new();
        let mut verdicts = Vec::new();
        for (pi, &p) in self.ps.iter().enumerate() {
            let seed = replica_seed(self.seed, pi as u64);
            let diags: Vec<Vec<_>> = (0..self.reps)
                .into_par_iter()
                .map(|r| {
                    diagnostics_at(
                        &simulate_path(&LimitConfig::new(p, t_end, replica_seed(seed, r)))?,
                        &self.times,
                    )
                })
                .collect::<Result<_>>()?;
            for (r, d) in diags.iter().enumerate() {
                for x in d {
                    rows.push(Row::new(r as u64, x.t, format!("M[p={p}]"), x.martingale));
                    rows.push(Row::new(
                        r as u64,
                        x.t,
                        format!("QV[p={p}]"),
                        x.quadratic_variation,
                    ));
                }
            }
            let n = self.reps as f64;
            for (k, &t) in self.times.iter().enumerate() {
                let m: Vec<f64> = diags.iter().map(|d| d[k].martingale).collect();
                let s = Summary::of(&m);
                verdicts.push(Verdict::new(
                    format!("zero mean p={p} t={t}"),
                    s.mean.abs() <= self.mean_se * s.se(),
                    format!(
                        "mean {:.4} SE {:.4} (limit {} SE)",
                        s.mean,
                        s.se(),
                        self.mean_se
                    ),
                ));
                // Per-replica excess of the squared deviation over ⟨M,M⟩ has
                // mean equal to (sample variance − mean QV).
                let excess: Vec<f64> = diags
                    .iter()
                    .map(|d| {
                        (d[k].martingale - s.mean).powi(2) * n / (n - 1.0)
                            - d[k].quadratic_variation
                    })
                    .collect();
                let e = Summary::of(&excess);
                let mean_qv = diags.iter().map(|d| d[k].quadratic_variation).sum::<f64>() / n;
                verdicts.push(Verdict::new(
                    format!("variance p={p} t={t}"),
                    e.mean.abs() <= self.var_se * e.se(),
                    format!(
                        "var(M) {:.4} vs mean QV {mean_qv:.4}, SE {:.4} (limit {} SE)",
                        s.var,
                        e.se(),
                        self.var_se
                    ),
                ));
            }
        }
        Ok((rows, verdicts))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoalescentRates {
    pub standard: Vec<f64>,
    pub frozen: Vec<f64>,
    pub p: f64,
    pub reps: u64,
    pub alpha: f64,
    pub freeze_reps: u64,
    pub freeze_tol: f64,
    pub seed: u64,
}

impl Default for CoalescentRates {
    fn default() -> Self {
        CoalescentRates {
            standard: vec![1.0, 2.0],
            frozen: vec![1.5],
            p: 0.6,
            reps: 100_000,
            alpha: 0.01,
            freeze_reps: 10_000,
            freeze_tol: 0.03,
            seed: 1,
        }
    }
}

/// Category index and analytic probabilities of every possible first event.
pub fn first_event_categories(sys: &ParticleSystem) -> (Vec<String>, Vec<f64>) {
    let (xs, ys) = (&sys.standard, &sys.frozen);
    let mut names = Vec::new();
    let mut rates = Vec::new();
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            names.push(format!("merge_{i}_{j}"));
            rates.push(xs[i] * xs[j]);
        }
    }
    for (i, x) in xs.iter().enumerate() {
        names.push(format!("freeze_{i}"));
        rates.push(x * x / 2.0);
    }
    for (i, x) in xs.iter().enumerate() {
        for (j, y) in ys.iter().enumerate() {
            names.push(format!("absorb_{i}_{j}"));
            rates.push(sys.p * x * y);
        }
    }
    let total: f64 = rates.iter().sum();
    (names, rates.iter().map(|r| r / total).collect())
}

fn category_of(sys: &ParticleSystem, kind: EventKind, i: usize, j: usize) -> usize {
    let k = sys.standard.len();
    let f = sys.frozen.len();
    let pairs = k * (k - 1) / 2;
    match kind {
        EventKind::StdStdMerge => {
            let (a, b) = (i.min(j), i.max(j));
            // Position of (a, b) in row-major upper-triangular order.
            a * (2 * k - a - 1) / 2 + (b - a - 1)
        }
        EventKind::Freeze => pairs + i,
        EventKind::StdFrozenMerge => pairs + k + i * f + j,
    }
}

impl Experiment for CoalescentRates {
    fn seed(&self) -> u64 {
        self.seed
    }

    fn execute(&self) -> Result<(Vec<Row>, Vec<Verdict>)> {
        let sys = ParticleSystem::new(self.standard.clone(), self.frozen.clone(), self.p)?;
        config_check(!sys.is_absorbing(), || {
            "need at least one standard particle".into()
        })?;
        let (names, probs) = first_event_categories(&sys);
        let cats: Vec<usize> = (0..self.reps)
            .into_par_iter()
            .map(|r| {
                let mut rng = ChaCha8Rng::seed_from_u64(replica_seed(self.seed, r));
                let ev = sys.propose(&mut rng).expect("non-absorbing");
                category_of(&sys, ev.kind, ev.i, ev.j)
            })
            .collect();
        let mut counts = vec![0u64; names.len()];
        for c in cats {
            counts[c] += 1;
        }
        let (stat, pval) = chi_square(&counts, &probs)?;
        let freeze_seed = replica_seed(self.seed, u64::MAX);
        let times: Vec<f64> = (0..self.freeze_reps)
            .into_par_iter()
            .map(|r| {
                let mut rng = ChaCha8Rng::seed_from_u64(replica_seed(freeze_seed, r));
                let mut s = ParticleSystem::new(vec![1.0], vec![], self.p)?;
                s.run_until(f64::INFINITY, &mut rng)?;
                Ok(s.time)
            })
            .collect::<Result<_>>()?;
        let mean = Summary::of(&times).mean;
        let mut rows: Vec<Row> = names
            .iter()
            .zip(&counts)
            .zip(&probs)
            .flat_map(|((n, &c), &p)| {
                [
                    Row::new(0, 0.0, format!("count[{n}]"), c as f64),
                    Row::new(0, 0.0, format!("prob[{n}]"), p),
                ]
            })
            .collect();
        rows.push(Row::new(0, 0.0, "mean_freeze_time", mean));
        Ok((
            rows,
            vec![
                Verdict::new(
                    "first-event frequencies",
                    pval >= self.alpha,
                    format!(
                        "chi2 = {stat:.3} on {} categories, p = {pval:.4} (level {})",
                        names.len(),
                        self.alpha
                    ),
                ),
                Verdict::new(
                    "single-particle freeze time",
                    (mean / 2.0 - 1.0).abs() <= self.freeze_tol,
                    format!("mean {mean:.4} (target 2 ± {}%)", self.freeze_tol * 100.0),
                ),
            ],
        ))
    }
}
