//! Adaptive Gauss–Kronrod (7/15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

pub const MAX_SUBDIVISIONS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    pub evals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    abs: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// One 15-point Kronrod rule on `[a, b]`, returning `(value, error estimate)`.
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let (v, e, _) = gk15_abs(f, a, b);
    (v, e)
}

/// As [`gk15`], also returning `∫|f|` on the interval.
fn gk15_abs<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(centre - dx);
        let f2 = f(centre + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let h = half.abs();
    let value = res_k * half;
    res_abs *= h;
    res_asc *= h;
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err, res_abs)
}

/// Integrate `f` over `[a, b]` to `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<QuadResult> {
    integrate_points(f, &[a, b], abs_tol, rel_tol)
}

/// Like [`integrate`], with the initial partition given by the sorted `points`.
pub fn integrate_points<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<QuadResult> {
    if points.len() < 2 {
        return Err(Error::Domain("quadrature needs at least two points".into()));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::Domain(format!(
            "non-finite integration limits {points:?}"
        )));
    }
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut total_abs = 0.0;
    let mut evals = 0;
    for w in points.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        let (value, err, abs) = gk15_abs(&f, w[0], w[1]);
        evals += 15;
        total += value;
        total_err += err;
        total_abs += abs;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value,
            err,
            abs,
        });
    }
    // Below ~100 ulps of ∫|f| the error estimate is rounding noise.
    let tol = |total: f64, total_abs: f64| {
        abs_tol
            .max(rel_tol * total.abs())
            .max(100.0 * f64::EPSILON * total_abs)
    };
    while total_err > tol(total, total_abs) {
        if heap.len() >= MAX_SUBDIVISIONS {
            let worst = heap.peek().copied().unwrap();
            return Err(Error::numeric(
                format!("quadrature did not converge: estimate {total:e}, error {total_err:e}"),
                worst.a,
                worst.b,
            ));
        }
        let worst = heap.pop().unwrap();
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a.min(worst.b) && mid < worst.a.max(worst.b)) {
            // Interval can no longer be split in double precision.
            if total_err <= 1e3 * tol(total, total_abs)
                || worst.err <= 1e3 * f64::EPSILON * total.abs()
            {
                heap.push(worst);
                break;
            }
            return Err(Error::numeric(
                "quadrature interval underflow",
                worst.a,
                worst.b,
            ));
        }
        let (v1, e1, a1) = gk15_abs(&f, worst.a, mid);
        let (v2, e2, a2) = gk15_abs(&f, mid, worst.b);
        evals += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        total_abs += a1 + a2 - worst.abs;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            err: e1,
            abs: a1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            err: e2,
            abs: a2,
        });
        if !total.is_finite() {
            return Err(Error::numeric("non-finite integrand", worst.a, worst.b));
        }
    }
    // Resum to shed the drift of the running updates.
    let value = heap.iter().map(|s| s.value).sum();
    let abs_err = heap.iter().map(|s| s.err).sum();
    Ok(QuadResult {
        value,
        abs_err,
        evals,
    })
}
