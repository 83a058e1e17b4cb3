//! Generator of `Y(t) = X₀(t) − t` and a Foster–Lyapunov checker.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ensure_finite, Error, Result};
use crate::quad::integrate_points;
use crate::special::density::{ln_p1, ratio_log, x_max};

const TAIL_NATS: f64 = 40.0;
/// Beyond `u = √y` this large the integrand is treated as non-decaying.
const U_LIMIT: f64 = 1e3;

/// Scan `u = √y` geometrically until `log_mag` is `TAIL_NATS` below its
/// running maximum past every breakpoint. Returns the cutoff.
fn tail_cutoff(log_mag: &dyn Fn(f64) -> (f64, f64), breaks: &[f64]) -> Result<f64> {
    let last = breaks.iter().copied().fold(0.0, f64::max);
    let mut u = 0.25;
    let mut lmax = f64::NEG_INFINITY;
    for &b in breaks {
        lmax = lmax.max(log_mag(b).0);
    }
    while u < U_LIMIT {
        let (l, lr) = log_mag(u);
        if l.is_nan() || l == f64::INFINITY {
            return Err(Error::Domain(format!(
                "generator integrand is not finite at y = {}",
                u * u
            )));
        }
        lmax = lmax.max(l);
        if u > last && (l < lmax - TAIL_NATS || (l == f64::NEG_INFINITY && lr < -700.0)) {
            return Ok(u);
        }
        u *= 1.5;
    }
    Err(Error::Domain(format!(
        "generator integrand does not decay by y = {}",
        U_LIMIT * U_LIMIT
    )))
}

fn breakpoints(c: f64, extra: Option<f64>) -> Vec<f64> {
    let mut b = Vec::new();
    if c > x_max() {
        b.push((c - x_max()).sqrt());
    }
    if let Some(e) = extra.filter(|e| *e > 0.0) {
        b.push(e);
    }
    b
}

fn integrate_u(f: impl Fn(f64) -> f64, mut breaks: Vec<f64>, cut: f64) -> Result<f64> {
    breaks.retain(|&b| b < cut);
    breaks.sort_by(f64::total_cmp);
    let mut points = vec![0.0];
    points.extend(breaks);
    points.push(cut);
    Ok(integrate_points(f, &points, 1e-14, 1e-11)?.value / (2.0 * PI).sqrt())
}

/// `𝒜f(x) = −f′(x) + ∫ (f(x+y) − f(x)) p₁(−x−y)/p₁(−x) dy/(2√(2πy))`.
///
/// Fails with a domain error when the integrand does not decay.
pub fn generator_apply_p0(
    f: impl Fn(f64) -> f64,
    fprime: impl Fn(f64) -> f64,
    x: f64,
) -> Result<f64> {
    ensure_finite("x", x)?;
    let c = -x;
    let fx = f(x);
    ensure_finite("f(x)", fx)?;
    let breaks = breakpoints(c, None);
    let log_mag = |u: f64| {
        let lr = ratio_log(c, u * u);
        ((f(x + u * u) - fx).abs().ln() + lr, lr)
    };
    let cut = tail_cutoff(&log_mag, &breaks)?;
    let integrand = |u: f64| {
        let y = u * u;
        let d = f(x + y) - fx;
        if d == 0.0 {
            0.0
        } else {
            d * ratio_log(c, y).exp()
        }
    };
    let integral = integrate_u(integrand, breaks, cut)?;
    let v = -fprime(x) + integral;
    ensure_finite("generator value", v)?;
    Ok(v)
}

/// The Lyapunov function `V(x) = e^{α|x|³}` for `x ≥ 0`, `e^{β|x|³}` for `x < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lyapunov {
    pub alpha: f64,
    pub beta: f64,
}

impl Lyapunov {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        ensure_finite("alpha", alpha)?;
        ensure_finite("beta", beta)?;
        if !(alpha > 0.0 && alpha < 1.0 / 6.0) {
            return Err(Error::Domain(format!(
                "alpha must lie in (0, 1/6), got {alpha}"
            )));
        }
        let beta_max = (ln_p1(0.0).exp() / 9.0).min(alpha);
        if !(beta > 0.0 && beta < beta_max) {
            return Err(Error::Domain(format!(
                "beta must lie in (0, {beta_max:.6}), got {beta}"
            )));
        }
        Ok(Lyapunov { alpha, beta })
    }

    pub fn log_v(&self, x: f64) -> f64 {
        let c = if x >= 0.0 { self.alpha } else { self.beta };
        c * x.abs().powi(3)
    }

    /// `V′(x)/V(x)`.
    pub fn log_derivative(&self, x: f64) -> f64 {
        if x >= 0.0 {
            3.0 * self.alpha * x * x
        } else {
            -3.0 * self.beta * x * x
        }
    }

    /// `δ = (β/α)^{1/3}`.
    pub fn delta_exp(&self) -> f64 {
        (self.beta / self.alpha).cbrt()
    }

    /// `𝒜V(x)/V(x)`, finite even where `V(x)` overflows.
    pub fn relative_generator(&self, x: f64) -> Result<f64> {
        ensure_finite("x", x)?;
        let c = -x;
        let lv = self.log_v(x);
        let breaks = breakpoints(c, (x < 0.0).then(|| (-x).sqrt()));
        let log_mag = |u: f64| {
            let lr = ratio_log(c, u * u);
            ((self.log_v(x + u * u) - lv).max(0.0) + lr, lr)
        };
        let cut = tail_cutoff(&log_mag, &breaks)?;
        let integrand = |u: f64| {
            let y = u * u;
            let dv = self.log_v(x + y) - lv;
            let lr = ratio_log(c, y);
            if dv.abs() < 1.0 {
                dv.exp_m1() * lr.exp()
            } else {
                (dv + lr).exp() - lr.exp()
            }
        };
        let integral = integrate_u(integrand, breaks, cut)?;
        Ok(-self.log_derivative(x) + integral)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovPoint {
    pub x: f64,
    pub log_v: f64,
    /// `𝒜V(x)/V(x)`.
    pub relative: f64,
    /// `𝒜V(x)`; may overflow to `±∞` for large `|x|`.
    pub av: f64,
    pub inside: bool,
    /// The inequality that applies at `x` holds.
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovReport {
    pub alpha: f64,
    pub beta: f64,
    pub delta_exp: f64,
    #[serde(rename = "B")]
    pub b_threshold: f64,
    pub a: f64,
    /// Smallest `b` with `𝒜V ≤ b` on the grid inside `C = [−B/δ, B]`.
    pub b: f64,
    pub points: Vec<LyapunovPoint>,
    /// Grid points outside `C` where `𝒜V ≤ −aV` fails.
    pub violations: Vec<f64>,
}

impl LyapunovReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.b.is_finite()
    }
}

fn evaluate_grid(v: &Lyapunov, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    grid.par_iter()
        .map(|&x| Ok((x, v.relative_generator(x)?)))
        .collect()
}

fn assemble(v: &Lyapunov, a: f64, b_threshold: f64, rel: &[(f64, f64)]) -> LyapunovReport {
    let d = v.delta_exp();
    let (lo, hi) = (-b_threshold / d, b_threshold);
    let mut points = Vec::with_capacity(rel.len());
    let mut violations = Vec::new();
    let mut b: f64 = 0.0;
    for &(x, r) in rel {
        let log_v = v.log_v(x);
        let av = r * log_v.exp();
        let inside = (lo..=hi).contains(&x);
        let ok = if inside {
            b = b.max(av);
            av.is_finite()
        } else {
            r <= -a
        };
        if !ok && !inside {
            violations.push(x);
        }
        points.push(LyapunovPoint {
            x,
            log_v,
            relative: r,
            av,
            inside,
            ok,
        });
    }
    LyapunovReport {
        alpha: v.alpha,
        beta: v.beta,
        delta_exp: d,
        b_threshold,
        a,
        b,
        points,
        violations,
    }
}

/// Check `𝒜V ≤ −aV` outside `C = [−B/δ, B]` and report the smallest `b`
/// bounding `𝒜V` inside `C`, over the given grid.
pub fn lyapunov_check(
    alpha: f64,
    beta: f64,
    a: f64,
    b_threshold: f64,
    grid: &[f64],
) -> Result<LyapunovReport> {
    let v = Lyapunov::new(alpha, beta)?;
    check_positive(a, b_threshold)?;
    let rel = evaluate_grid(&v, grid)?;
    Ok(assemble(&v, a, b_threshold, &rel))
}

/// Smallest `B` for which the grid shows no violation outside `[−B/δ, B]`,
/// with the corresponding report.
pub fn lyapunov_threshold(alpha: f64, beta: f64, a: f64, grid: &[f64]) -> Result<LyapunovReport> {
    let v = Lyapunov::new(alpha, beta)?;
    check_positive(a, 1.0)?;
    let rel = evaluate_grid(&v, grid)?;
    let d = v.delta_exp();
    let b_min = rel
        .iter()
        .filter(|(_, r)| !(*r <= -a))
        .map(|&(x, _)| if x >= 0.0 { x } else { -x * d })
        .fold(0.0, f64::max);
    Ok(assemble(&v, a, b_min, &rel))
}

fn check_positive(a: f64, b_threshold: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain(format!("a must be positive, got {a}")));
    }
    if !(b_threshold >= 0.0) || !b_threshold.is_finite() {
        return Err(Error::Domain(format!(
            "B must be non-negative, got {b_threshold}"
        )));
    }
    Ok(())
}

/// `a:b:step` grid, inclusive of `b` up to rounding.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::Config(format!("grid must be a:b:step, got {spec:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let (a, b, h) = (nums[0], nums[1], nums[2]);
    if !(h > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    let n = ((b - a) / h + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| a + i as f64 * h).collect())
}
