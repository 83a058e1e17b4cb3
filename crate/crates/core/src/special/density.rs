//! The spectrally positive 3/2-stable density
//! `p₁(x) = −e^{x³/12}/2 · (x·Ai(x²/4) + 2·Ai′(x²/4))`, kept in log space.

use std::f64::consts::PI;
use std::sync::OnceLock;

use super::airy::airy_scaled_raw;
use crate::error::{ensure_finite, Error, Result};

/// Above this point the Airy form cancels catastrophically and the tail
/// series is used instead.
pub const X_SWITCH_POS: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDensityValue {
    pub x: f64,
    pub log_p1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XMax {
    pub x_max: f64,
    pub p1_at_max: f64,
}

pub fn log_p1(x: f64) -> Result<LogDensityValue> {
    ensure_finite("x", x)?;
    Ok(LogDensityValue {
        x,
        log_p1: ln_p1(x),
    })
}

pub fn p1(x: f64) -> Result<f64> {
    ensure_finite("x", x)?;
    Ok(ln_p1(x).exp())
}

/// Density of the stable law at time `s`: `p_s(x) = s^{-2/3} p₁(x s^{-2/3})`.
pub fn p_s(s: f64, x: f64) -> Result<f64> {
    ensure_finite("x", x)?;
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Domain(format!("time s must be positive, got {s}")));
    }
    let k = s.powf(-2.0 / 3.0);
    Ok(k * ln_p1(x * k).exp())
}

/// `log p₁(x − y) − log p₁(x)`.
pub fn p1_ratio_log(x: f64, y: f64) -> Result<f64> {
    ensure_finite("x", x)?;
    ensure_finite("y", y)?;
    if y < 0.0 {
        return Err(Error::Domain(format!("ratio needs y >= 0, got {y}")));
    }
    Ok(ratio_log(x, y))
}

#[inline]
pub(crate) fn ratio_log(x: f64, y: f64) -> f64 {
    if y == 0.0 {
        0.0
    } else {
        ln_p1(x - y) - ln_p1(x)
    }
}

/// Natural log of `p₁(x)` for finite `x`.
pub(crate) fn ln_p1(x: f64) -> f64 {
    if x > X_SWITCH_POS {
        return ln_p1_tail(x);
    }
    let (ai, aip) = airy_scaled_raw(0.25 * x * x);
    let neg = (-x).max(0.0);
    -neg * neg * neg / 6.0 + (-0.5 * (x * ai + 2.0 * aip)).ln()
}

/// Tail form for large positive `x`: the `k = 0` terms of the two Airy
/// expansions cancel exactly, leaving
/// `p₁(x) = ½√(x/2π) Σ_{k≥1} (−1)^{k+1}(u_k − v_k) ζ^{−k}`, `ζ = x³/12`.
fn ln_p1_tail(x: f64) -> f64 {
    let zeta = x * x * x / 12.0;
    let mut u = 1.0;
    let mut sum = 0.0;
    let mut pow = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        let v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        // Terms are scaled by ζ so the sum starts at w₁ = 1/6.
        let term = sign * (u - v) * pow;
        if term.abs() > last || term.abs() < 1e-18 {
            break;
        }
        last = term.abs();
        sum += term;
        pow /= zeta;
    }
    0.5f64.ln() + 0.5 * (x / (2.0 * PI)).ln() - zeta.ln() + sum.ln()
}

/// `d/dx p₁` divided by `e^{x³/12 − ζ}/2`, i.e. `−((1 + x³/2)ai_s + x²aip_s)`.
fn scaled_derivative(x: f64) -> f64 {
    let (ai, aip) = airy_scaled_raw(0.25 * x * x);
    -((1.0 + 0.5 * x * x * x) * ai + x * x * aip)
}

static XMAX: OnceLock<std::result::Result<XMax, String>> = OnceLock::new();

/// Location and height of the mode of `p₁`.
pub fn find_xmax() -> Result<XMax> {
    XMAX.get_or_init(|| locate_xmax().map_err(|e| e.to_string()))
        .clone()
        .map_err(|m| Error::numeric(m, -1.5, -0.3))
}

/// Cached mode location; panics only if the maximiser itself is broken,
/// which the unit tests rule out.
pub(crate) fn x_max() -> f64 {
    find_xmax().expect("mode of p1").x_max
}

fn locate_xmax() -> Result<XMax> {
    let (mut a, mut b) = (-1.5, -0.3);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = ln_p1(c);
    let mut fd = ln_p1(d);
    let mut iter = 0;
    while (b - a).abs() > 1e-10 {
        iter += 1;
        if iter > 200 {
            return Err(Error::numeric(
                "golden-section search did not converge",
                a,
                b,
            ));
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = ln_p1(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = ln_p1(d);
        }
    }
    // The log-density is flat at the mode, so finish on the derivative sign.
    let (mut lo, mut hi) = (a - 1e-8, b + 1e-8);
    if !(scaled_derivative(lo) > 0.0 && scaled_derivative(hi) < 0.0) {
        return Err(Error::numeric(
            "derivative does not change sign around the mode",
            lo,
            hi,
        ));
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if scaled_derivative(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x_max = 0.5 * (lo + hi);
    Ok(XMax {
        x_max,
        p1_at_max: ln_p1(x_max).exp(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // (x, ln p₁(x)) at 30-digit precision.
    const REFERENCE: &[(f64, f64)] = &[
        (-40.0, -10665.74116286877),
        (-30.0, -4499.2183336702198),
        (-20.0, -1332.7543849042325),
        (-12.0, -287.67638892438377),
        (-8.0, -85.212227453565297),
        (-5.0, -20.946249745815594),
        (-3.0, -4.8640059291033567),
        (-2.0, -1.8893471820554993),
        (-1.0, -1.01310429364768),
        (-0.5, -1.0808394467427469),
        (0.0, -1.3516247431504703),
        (0.5, -1.741561371113244),
        (1.0, -2.1850422853686957),
        (2.0, -3.0690937260240417),
        (3.0, -3.835079576117774),
        (5.0, -4.9862313147179258),
        (7.0, -5.8002954913141444),
        (7.9, -6.0977180651836348),
        (8.0, -6.1287418048162315),
        (8.1, -6.1593950321202461),
        (9.0, -6.4199052857272719),
        (10.0, -6.6811829854778466),
        (12.0, -7.1345635206695108),
        (15.0, -7.6907878454189689),
        (20.0, -8.4089975652119472),
        (30.0, -9.4221479647724085),
        (50.0, -10.699042710082169),
        (100.0, -12.431869831455735),
        (1000.0, -18.188326736493349),
    ];

    #[test]
    fn matches_reference_table() {
        for &(x, lp) in REFERENCE {
            let v = log_p1(x).unwrap().log_p1;
            // Relative error of p₁ itself.
            assert!(
                (v - lp).abs() < 2e-11 * lp.abs().max(1.0),
                "x={x}: {v} vs {lp}"
            );
        }
    }

    #[test]
    fn documented_examples() {
        assert!((log_p1(0.0).unwrap().log_p1 - 0.2588194038f64.ln()).abs() < 1e-9);
        assert!((log_p1(-20.0).unwrap().log_p1 + 1332.754).abs() < 1e-3);
        assert!((log_p1(100.0).unwrap().log_p1 + 12.432).abs() < 1e-2);
        assert!((p1_ratio_log(-30.0, 1.0).unwrap() + 465.15).abs() < 1e-2);
        assert_eq!(p1_ratio_log(3.7, 0.0).unwrap(), 0.0);
        assert!(p1_ratio_log(5.0, 0.5).unwrap() >= 0.0);
    }

    #[test]
    fn tail_switch_is_continuous() {
        let below = ln_p1(X_SWITCH_POS - 1e-12);
        let above = ln_p1(X_SWITCH_POS + 1e-12);
        assert!((below - above).abs() < 1e-10);
    }

    #[test]
    fn left_expansion() {
        for x in [-10.0, -15.0, -25.0, -40.0] {
            let ax: f64 = -x;
            let approx = -ax.powi(3) / 6.0 + 0.5 * ax.ln() - 0.5 * (2.0 * PI).ln()
                + (1.0 + 1.0 / (6.0 * ax.powi(3))).ln();
            assert!((ln_p1(x) - approx).abs() < 1e-3, "x={x}");
        }
    }

    #[test]
    fn mode() {
        let m = find_xmax().unwrap();
        assert!((m.x_max + 0.886456995492).abs() < 1e-9, "{}", m.x_max);
        assert!((m.p1_at_max - 0.36576590552).abs() < 1e-10);
        assert!(scaled_derivative(m.x_max).abs() < 1e-8);
        let pm = m.p1_at_max;
        assert!(pm > p1(m.x_max - 0.1).unwrap() && pm > p1(m.x_max + 0.1).unwrap());
        let grid = |a: f64, b: f64| (0..=100).map(move |i| a + (b - a) * i as f64 / 100.0);
        let left: Vec<f64> = grid(-5.0, m.x_max - 1e-3).map(ln_p1).collect();
        assert!(left.windows(2).all(|w| w[1] > w[0]));
        let right: Vec<f64> = grid(m.x_max + 1e-3, 5.0).map(ln_p1).collect();
        assert!(right.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn scaling_identity() {
        assert!((p_s(1.0, 0.3).unwrap() - p1(0.3).unwrap()).abs() < 1e-15);
        let s: f64 = 8.0;
        assert!((p_s(s, 2.0).unwrap() - 0.25 * p1(0.5).unwrap()).abs() < 1e-15);
        assert!(p_s(0.0, 1.0).is_err());
    }

    #[test]
    fn domain_errors() {
        assert!(log_p1(f64::NAN).is_err());
        assert!(p1_ratio_log(f64::INFINITY, 1.0).is_err());
        assert!(p1_ratio_log(1.0, -1.0).is_err());
    }
}
