//! Moments of the jump kernel
//! `G_k(c; a, b) = ∫_a^b y^k · p₁(c − y)/p₁(c) · dy / (2√(2πy))`.
//!
//! The kernel integrals of the limit process are all of this form:
//! `I₁(x) = 2G₀(−x)`, `I₂(x) = G₁(−x)`, `I₃(x) = G₂(−x)` and
//! `I₁^{(x_max)}(x) = 2G₀(−x; 0, −x_max)`.

use std::f64::consts::PI;

use super::density::{ratio_log, x_max};
use crate::error::{ensure_finite, Error, Result};
use crate::quad::{integrate_points, QuadResult};

/// Nats below the peak at which the integrand is truncated.
pub const TAIL_NATS: f64 = 40.0;

const REL_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelIntegrals {
    pub x: f64,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub i1_trunc: f64,
    /// Largest quadrature error estimate among the four integrals.
    pub abs_tol: f64,
}

pub fn kernel_integrals(x: f64, abs_tol: f64) -> Result<KernelIntegrals> {
    ensure_finite("x", x)?;
    if x < 0.0 {
        return Err(Error::Domain(format!(
            "kernel integrals need x >= 0, got {x}"
        )));
    }
    if !(abs_tol > 0.0) {
        return Err(Error::Domain(format!(
            "abs_tol must be positive, got {abs_tol}"
        )));
    }
    let c = -x;
    let gt = g_moment(0, c, 0.0, -x_max(), abs_tol / 4.0)?;
    let gr = g_moment(0, c, -x_max(), f64::INFINITY, abs_tol / 4.0)?;
    let g0 = QuadResult {
        value: gt.value + gr.value,
        abs_err: gt.abs_err + gr.abs_err,
        evals: gt.evals + gr.evals,
    };
    let g1 = g_moment(1, c, 0.0, f64::INFINITY, abs_tol)?;
    let g2 = g_moment(2, c, 0.0, f64::INFINITY, abs_tol)?;
    Ok(KernelIntegrals {
        x,
        i1: 2.0 * g0.value,
        i2: g1.value,
        i3: g2.value,
        i1_trunc: 2.0 * gt.value,
        abs_tol: (2.0 * g0.abs_err)
            .max(g1.abs_err)
            .max(g2.abs_err)
            .max(2.0 * gt.abs_err),
    })
}

pub fn i1(x: f64, abs_tol: f64) -> Result<f64> {
    Ok(kernel_integrals(x, abs_tol)?.i1)
}

/// `G_k(c)` over `[y_lo, y_hi]` (`y_hi` may be infinite), computed after the
/// substitution `u = √y`, which turns the measure into `u^{2k} du / √(2π)`.
///
/// `k = −1` requires `y_lo > 0`.
pub fn g_moment(k: i32, c: f64, y_lo: f64, y_hi: f64, abs_tol: f64) -> Result<QuadResult> {
    ensure_finite("c", c)?;
    if !(y_lo >= 0.0) || !(y_hi >= y_lo) || !y_lo.is_finite() {
        return Err(Error::Domain(format!(
            "bad integration range [{y_lo}, {y_hi}]"
        )));
    }
    if k < 0 && y_lo == 0.0 {
        return Err(Error::Domain(
            "negative moment needs a positive lower limit".into(),
        ));
    }
    if y_hi == y_lo {
        return Ok(QuadResult {
            value: 0.0,
            abs_err: 0.0,
            evals: 0,
        });
    }
    let two_k = 2 * k;
    let log_f = |u: f64| two_k as f64 * u.ln() + ratio_log(c, u * u);
    let u_lo = y_lo.sqrt();
    let peak = (c > x_max()).then(|| (c - x_max()).sqrt());

    // Locate the maximum roughly and find where the integrand is negligible.
    let start = u_lo.max(1e-4 / (1.0 + c.abs()));
    let mut lmax = log_f(start);
    if let Some(p) = peak.filter(|&p| p > u_lo) {
        lmax = lmax.max(log_f(p));
    }
    let mut u = start;
    let mut u_cut = f64::INFINITY;
    for _ in 0..200 {
        let l = log_f(u);
        lmax = lmax.max(l);
        let past_peak = peak.is_none_or(|p| u > p);
        if past_peak && l < lmax - TAIL_NATS && u > start {
            u_cut = u;
            break;
        }
        u *= 1.5;
    }
    if !u_cut.is_finite() {
        return Err(Error::numeric("kernel integrand does not decay", u_lo, u));
    }
    let u_hi = u_cut.min(y_hi.sqrt());
    let mut points = vec![u_lo];
    if let Some(p) = peak.filter(|&p| p > u_lo && p < u_hi) {
        points.push(p);
    }
    points.push(u_hi);
    let norm = 1.0 / (2.0 * PI).sqrt();
    let f = |u: f64| {
        if u == 0.0 {
            return if k == 0 { norm } else { 0.0 };
        }
        norm * (log_f(u)).exp()
    };
    integrate_points(f, &points, abs_tol, REL_TOL)
}

/// Total jump rate `∫_δ^∞ (y + 2px)·p₁(t−x−y)/p₁(t−x)·dy/(2√(2πy³))`.
pub fn jump_rate(t: f64, x: f64, p: f64, delta: f64) -> Result<f64> {
    ensure_finite("t", t)?;
    ensure_finite("x", x)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("p must lie in [0, 1], got {p}")));
    }
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::Domain(format!("delta must be >= 0, got {delta}")));
    }
    if x < 0.0 {
        return Err(Error::Domain(format!("state x must be >= 0, got {x}")));
    }
    let c = t - x;
    let mut rate = g_moment(0, c, delta, f64::INFINITY, 1e-300)?.value;
    if p > 0.0 && x > 0.0 {
        if delta == 0.0 {
            return Err(Error::Domain(
                "p > 0 requires a positive small-jump cutoff".into(),
            ));
        }
        rate += 2.0 * p * x * g_moment(-1, c, delta, f64::INFINITY, 1e-300)?.value;
    }
    Ok(rate)
}
