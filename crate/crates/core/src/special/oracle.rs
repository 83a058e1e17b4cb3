//! Independent evaluation of `p₁` from the Lévy measure
//! `ν(dy) = (2π)^{-1/2} y^{-5/2} dy` on `(0, ∞)`.
//!
//! The characteristic exponent `ψ(θ) = ∫ (e^{iθy} − 1 − iθy) ν(dy)` is
//! computed by quadrature at `θ = 1`; by self-similarity
//! `ψ(θ) = θ^{3/2} ψ(1)`, and its analytic continuation
//! `E e^{−λL} = exp(ψ(1)(iλ)^{3/2})` is inverted along a Bromwich line through
//! the saddle point (`x ≤ 1`) or along the Hankel contour folded onto the
//! negative axis (`x > 1`).

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{ensure_finite, Error, Result};
use crate::quad::integrate;

const CUT: f64 = 200.0 * PI;

static PSI1: OnceLock<Complex64> = OnceLock::new();

/// `ψ(1)` for the Lévy measure above.
pub fn levy_exponent_at_one() -> Complex64 {
    *PSI1.get_or_init(compute_psi1)
}

/// Constant `κ` in `E e^{−λL} = exp(κ λ^{3/2})`; its imaginary part is a
/// consistency check and should vanish.
pub fn laplace_kappa() -> Complex64 {
    levy_exponent_at_one() * Complex64::from_polar(1.0, 0.75 * PI)
}

fn compute_psi1() -> Complex64 {
    // ∫_0^A with y = u²: 2 ∫ (e^{iu²} − 1 − iu²) u^{-4} du.
    let g = |u: f64| -> Complex64 {
        let s = u * u;
        if s < 0.5 {
            // e^{is} − 1 − is = Σ_{n≥2} (is)^n / n!, divided by s².
            let mut term = Complex64::new(-0.5, 0.0);
            let mut sum = term;
            for n in 3..30 {
                term *= Complex64::new(0.0, s) / n as f64;
                sum += term;
            }
            2.0 * sum
        } else {
            let e = Complex64::from_polar(1.0, s) - 1.0 - Complex64::new(0.0, s);
            2.0 * e / (s * s)
        }
    };
    let ua = CUT.sqrt();
    let pieces = 50;
    let mut head = Complex64::new(0.0, 0.0);
    for j in 0..pieces {
        let a = ua * j as f64 / pieces as f64;
        let b = ua * (j + 1) as f64 / pieces as f64;
        let re = integrate(|u| g(u).re, a, b, 1e-16, 1e-13).expect("psi real part");
        let im = integrate(|u| g(u).im, a, b, 1e-16, 1e-13).expect("psi imaginary part");
        head += Complex64::new(re.value, im.value);
    }

    // Tail on [A, ∞): the −1 and −iy parts in closed form, e^{iy} by parts.
    let minus_one = -(2.0 / 3.0) * CUT.powf(-1.5);
    let minus_iy = Complex64::new(0.0, -2.0 * CUT.powf(-0.5));
    let osc = oscillatory_tail(2.5, 0);
    (head + minus_one + minus_iy + osc) / (2.0 * PI).sqrt()
}

/// `∫_A^∞ e^{iy} y^{-s} dy = i e^{iA} A^{-s} − i s ∫_A^∞ e^{iy} y^{-s-1} dy`.
fn oscillatory_tail(s: f64, depth: usize) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    let lead = i * Complex64::from_polar(1.0, CUT) * CUT.powf(-s);
    if depth == 16 {
        return lead;
    }
    lead - i * s * oscillatory_tail(s + 1.0, depth + 1)
}

/// `p₁(x)` by numerical inversion.
pub fn oracle_p1(x: f64) -> Result<f64> {
    Ok(oracle_log_p1(x)?.exp())
}

/// `log p₁(x)` by numerical inversion; usable where `p₁` underflows.
pub fn oracle_log_p1(x: f64) -> Result<f64> {
    ensure_finite("x", x)?;
    if x <= 1.0 {
        bromwich(x)
    } else {
        let v = hankel(x, 1.0)?;
        if v <= 0.0 {
            return Err(Error::numeric(
                "inversion produced a non-positive density",
                x,
                x,
            ));
        }
        Ok(v.ln())
    }
}

/// `P(L > x)` for `x > 0`.
pub fn oracle_survival(x: f64) -> Result<f64> {
    ensure_finite("x", x)?;
    if x <= 0.0 {
        return Err(Error::Domain(format!(
            "survival oracle needs x > 0, got {x}"
        )));
    }
    hankel(x, 0.0)
}

fn exponent(lambda: Complex64) -> Complex64 {
    let il = Complex64::new(0.0, 1.0) * lambda;
    levy_exponent_at_one() * il.powf(1.5)
}

fn bromwich(x: f64) -> Result<f64> {
    let c = (0.5 * x * x).max(1.0);
    let h = |w: f64| {
        let l = Complex64::new(c, w);
        l * x + exponent(l)
    };
    let h0 = h(0.0);
    let mut omega = 1.0;
    while (h(omega) - h0).re > -60.0 {
        omega *= 2.0;
        if omega > 1e8 {
            return Err(Error::numeric(
                "Bromwich integrand does not decay",
                0.0,
                omega,
            ));
        }
    }
    let f = |w: f64| (h(w) - h0).exp().re;
    let pieces = 32;
    let mut total = 0.0;
    for j in 0..pieces {
        let a = omega * j as f64 / pieces as f64;
        let b = omega * (j + 1) as f64 / pieces as f64;
        total += integrate(f, a, b, 1e-15, 1e-13)?.value;
    }
    let val = total / PI;
    if val <= 0.0 {
        return Err(Error::numeric(
            "inversion produced a non-positive density",
            0.0,
            omega,
        ));
    }
    Ok(h0.re + val.ln())
}

/// `(1/π) ∫_0^∞ e^{−rx} sin(κ r^{3/2}) r^{−m} dr` with `m = 0` (density)
/// or `m = 1` (survival function).
fn hankel(x: f64, power: f64) -> Result<f64> {
    let kappa = laplace_kappa().re;
    let f = |w: f64| {
        if w == 0.0 {
            return 0.0;
        }
        let r = w / x;
        (-w).exp() * (kappa * r * r.sqrt()).sin() / r.powf(1.0 - power)
    };
    // Substituted w = r·x; the Jacobian is 1/x.
    let pieces = 64;
    let top = 80.0;
    let mut total = 0.0;
    for j in 0..pieces {
        let a = top * j as f64 / pieces as f64;
        let b = top * (j + 1) as f64 / pieces as f64;
        total += integrate(f, a, b, 1e-16, 1e-13)?.value;
    }
    Ok(total / (PI * x))
}
