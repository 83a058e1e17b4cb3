//! Exponentially scaled Airy functions `Ai(z)·e^ζ`, `Ai′(z)·e^ζ` with
//! `ζ = (2/3)z^{3/2}`, for `z ≥ 0`.
//!
//! Three regimes: the Maclaurin series near the origin, the Steed/Temme
//! continued fraction for the modified Bessel functions `K_{1/3}`, `K_{2/3}`
//! at moderate arguments, and the asymptotic series once `ζ ≥ 20`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// `Ai(0) = 3^{-2/3}/Γ(2/3)`.
pub const AI0: f64 = 0.355_028_053_887_817_24;
/// `-Ai′(0) = 3^{-1/3}/Γ(1/3)`.
pub const AIP0: f64 = 0.258_819_403_792_806_8;

const SERIES_MAX_Z: f64 = 2.5;
const ASYMPTOTIC_MIN_ZETA: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledAiryPair {
    pub z: f64,
    /// `Ai(z)·exp((2/3)z^{3/2})`
    pub ai_s: f64,
    /// `Ai′(z)·exp((2/3)z^{3/2})`
    pub aip_s: f64,
}

pub fn airy_scaled(z: f64) -> Result<ScaledAiryPair> {
    if !z.is_finite() || z < 0.0 {
        return Err(Error::Domain(format!(
            "airy_scaled needs finite z >= 0, got {z}"
        )));
    }
    let (ai_s, aip_s) = airy_scaled_raw(z);
    Ok(ScaledAiryPair { z, ai_s, aip_s })
}

/// Unchecked evaluation; `z` must be finite and non-negative.
#[inline]
pub(crate) fn airy_scaled_raw(z: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * z * z.sqrt();
    if z <= SERIES_MAX_Z {
        let (ai, aip) = maclaurin(z);
        let s = zeta.exp();
        (ai * s, aip * s)
    } else if zeta < ASYMPTOTIC_MIN_ZETA {
        let (k13, k23) = bessel_k_third_scaled(zeta);
        let ai = (z / 3.0).sqrt() / PI * k13;
        let aip = -z / (PI * 3f64.sqrt()) * k23;
        (ai, aip)
    } else {
        asymptotic(z, zeta)
    }
}

/// Unscaled `(Ai(z), Ai′(z))` from the two power series `f`, `g`.
fn maclaurin(z: f64) -> (f64, f64) {
    let z3 = z * z * z;
    let mut f = 1.0;
    let mut g = z;
    let mut fp = 0.0;
    let mut gp = 1.0;
    let mut tf = 1.0;
    let mut tg = z;
    let mut tfp = z * z / 2.0;
    let mut tgp = 1.0;
    fp += tfp;
    for k in 1..60 {
        let k3 = 3.0 * k as f64;
        tf *= z3 / (k3 * (k3 - 1.0));
        tg *= z3 / ((k3 + 1.0) * k3);
        tgp *= z3 / (k3 * (k3 - 2.0));
        f += tf;
        g += tg;
        gp += tgp;
        if k >= 2 {
            tfp *= z3 / ((k3 - 3.0) * (k3 - 1.0));
            fp += tfp;
        }
        if tf.abs() < 1e-18 * f.abs()
            && tg.abs() < 1e-18 * g.abs()
            && tgp.abs() < 1e-18 * gp.abs()
            && tfp.abs() < 1e-18 * fp.abs()
        {
            break;
        }
    }
    (AI0 * f - AIP0 * g, AI0 * fp - AIP0 * gp)
}

/// `(K_{1/3}(x)·e^x, K_{2/3}(x)·e^x)` by Steed's method on Temme's
/// continued fraction (valid for `x ≳ 2`).
fn bessel_k_third_scaled(x: f64) -> (f64, f64) {
    let mu = -1.0 / 3.0;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25 - mu * mu;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..10_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    let h = a1 * h;
    let k_mu = (PI / (2.0 * x)).sqrt() / s;
    let k_mu1 = k_mu * (mu + x + 0.5 - h) / x;
    (k_mu, k_mu1)
}

/// Coefficients `u_k` of the large-argument Airy expansions.
#[cfg(test)]
fn u_coeff(k: usize) -> f64 {
    let mut u = 1.0;
    for j in 1..=k {
        let j = j as f64;
        u *= (6.0 * j - 5.0) * (6.0 * j - 3.0) * (6.0 * j - 1.0) / ((2.0 * j - 1.0) * 216.0 * j);
    }
    u
}

fn asymptotic(z: f64, zeta: f64) -> (f64, f64) {
    let z14 = z.sqrt().sqrt();
    let norm = 0.5 / PI.sqrt();
    let mut su = 1.0;
    let mut sv = 1.0;
    let mut u = 1.0;
    let mut pow = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        let v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
        pow *= -1.0 / zeta;
        let tu = u * pow;
        if tu.abs() > last || tu.abs() < 1e-18 {
            break;
        }
        last = tu.abs();
        su += tu;
        sv += v * pow;
    }
    (norm / z14 * su, -norm * z14 * sv)
}
