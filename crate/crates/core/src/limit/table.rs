//! Tabulated kernel moments `G₀, G₁, G₂` over `c ∈ [−40, 40]`, interpolated
//! by natural cubic splines in log space.

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::special::kernel::g_moment;

pub const TABLE_MIN: f64 = -40.0;
pub const TABLE_MAX: f64 = 40.0;
pub const TABLE_STEP: f64 = 0.05;
/// Extra nodes beyond each end keep the natural end conditions out of range.
const PAD: usize = 20;

/// Natural cubic spline on a uniform grid.
#[derive(Debug, Clone)]
pub struct UniformSpline {
    x0: f64,
    h: f64,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl UniformSpline {
    pub fn new(x0: f64, h: f64, y: Vec<f64>) -> Self {
        let n = y.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // Tridiagonal system for the second derivatives (Thomas algorithm).
            let k = n - 2;
            let mut diag = vec![4.0; k];
            let mut rhs: Vec<f64> = (1..n - 1)
                .map(|i| 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (h * h))
                .collect();
            for i in 1..k {
                let w = 1.0 / diag[i - 1];
                diag[i] -= w;
                rhs[i] -= w * rhs[i - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for i in (0..k - 1).rev() {
                m[i + 1] = (rhs[i] - m[i + 2]) / diag[i];
            }
        }
        UniformSpline { x0, h, y, m }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.y.len();
        let t = (x - self.x0) / self.h;
        let i = (t.floor() as isize).clamp(0, n as isize - 2) as usize;
        let a = t - i as f64;
        let b = 1.0 - a;
        let h2 = self.h * self.h;
        b * self.y[i]
            + a * self.y[i + 1]
            + ((b * b * b - b) * self.m[i] + (a * a * a - a) * self.m[i + 1]) * h2 / 6.0
    }
}

#[derive(Debug, Clone)]
pub struct KernelTable {
    log_g: [UniformSpline; 3],
}

impl KernelTable {
    pub fn build() -> Result<Self> {
        let n = ((TABLE_MAX - TABLE_MIN) / TABLE_STEP).round() as usize + 1 + 2 * PAD;
        let x0 = TABLE_MIN - PAD as f64 * TABLE_STEP;
        let rows: Vec<Result<[f64; 3]>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let c = x0 + i as f64 * TABLE_STEP;
                let mut out = [0.0; 3];
                for (k, o) in out.iter_mut().enumerate() {
                    *o = g_moment(k as i32, c, 0.0, f64::INFINITY, 1e-300)?
                        .value
                        .ln();
                }
                Ok(out)
            })
            .collect();
        let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
        let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<f64>>();
        Ok(KernelTable {
            log_g: [
                UniformSpline::new(x0, TABLE_STEP, col(0)),
                UniformSpline::new(x0, TABLE_STEP, col(1)),
                UniformSpline::new(x0, TABLE_STEP, col(2)),
            ],
        })
    }

    /// Process-wide table, built on first use.
    pub fn global() -> Result<&'static KernelTable> {
        static TABLE: OnceLock<std::result::Result<KernelTable, String>> = OnceLock::new();
        TABLE
            .get_or_init(|| KernelTable::build().map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|m| Error::numeric(m.clone(), TABLE_MIN, TABLE_MAX))
    }

    /// `G_k(c)` over `(0, ∞)`, `k ∈ {0, 1, 2}`; direct quadrature off-table.
    pub fn g(&self, k: usize, c: f64) -> Result<f64> {
        if (TABLE_MIN..=TABLE_MAX).contains(&c) {
            Ok(self.log_g[k].eval(c).exp())
        } else {
            Ok(g_moment(k as i32, c, 0.0, f64::INFINITY, 1e-300)?.value)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spline_reproduces_smooth_function() {
        let s = UniformSpline::new(
            0.0,
            0.05,
            (0..=200).map(|i| (i as f64 * 0.05).sin()).collect(),
        );
        for x in [0.5, 1.234, 3.3, 7.77] {
            assert!((s.eval(x) - f64::sin(x)).abs() < 1e-6);
        }
    }

    #[test]
    fn table_matches_direct_quadrature() {
        let t = KernelTable::global().unwrap();
        for c in [
            -39.97, -20.013, -5.5, -0.886, 0.0123, 3.21, 17.7, 39.9, 45.0, -50.0,
        ] {
            for k in 0..3 {
                let direct = g_moment(k as i32, c, 0.0, f64::INFINITY, 1e-300)
                    .unwrap()
                    .value;
                let tab = t.g(k, c).unwrap();
                assert!(
                    (tab / direct - 1.0).abs() < 1e-7,
                    "k={k} c={c}: {tab} vs {direct}"
                );
            }
        }
    }
}
