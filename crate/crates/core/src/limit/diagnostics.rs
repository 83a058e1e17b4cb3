//! Predictable compensator and quadratic variation of a simulated path.

use serde::Serialize;

use super::path::LimitPath;
use super::table::KernelTable;
use crate::error::{Error, Result};
use crate::quad::integrate;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathDiagnostics {
    pub t: f64,
    pub value: f64,
    pub compensator: f64,
    pub martingale: f64,
    pub quadratic_variation: f64,
}

/// Diagnostics at a single time.
pub fn compensator_and_qv(path: &LimitPath, t: f64) -> Result<PathDiagnostics> {
    Ok(diagnostics_at(path, &[t])?[0])
}

/// Diagnostics at each of the non-decreasing `times`.
///
/// Between consecutive jumps or drift changes the state moves linearly, and
/// the inner `y`-integrals reduce to `G₁ + 2pX·G₀` (compensator) and
/// `G₂ + 2pX·G₁` (quadratic variation) at `c = s − X(s)`.
pub fn diagnostics_at(path: &LimitPath, times: &[f64]) -> Result<Vec<PathDiagnostics>> {
    let cfg = &path.config;
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Ordering(
            "diagnostic times must be non-decreasing".into(),
        ));
    }
    if let Some(&t) = times.iter().find(|&&t| !(t >= cfg.t0 && t <= cfg.t_end)) {
        return Err(Error::Domain(format!(
            "time {t} outside [{}, {}]",
            cfg.t0, cfg.t_end
        )));
    }
    let table = KernelTable::global()?;
    let p = cfg.p;

    let mut breaks: Vec<f64> = path
        .events
        .iter()
        .map(|e| e.time)
        .chain(path.drift.iter().map(|d| d.time))
        .collect();
    breaks.push(cfg.t_end);
    breaks.retain(|&b| b > cfg.t0);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let mut out = Vec::with_capacity(times.len());
    let (mut comp, mut qv) = (0.0, 0.0);
    let mut a = cfg.t0;
    let mut next_break = 0;
    let piece_integrals = |a: f64, b: f64| -> Result<(f64, f64)> {
        if b <= a {
            return Ok((0.0, 0.0));
        }
        let xa = path.value_at(a);
        let rate = path.drift_rate_at(a);
        let err = std::cell::Cell::new(None);
        let eval = |s: f64, second: bool| -> f64 {
            let x = xa + rate * (s - a);
            let c = s - x;
            let g = |k: usize| match table.g(k, c) {
                Ok(v) => v,
                Err(e) => {
                    err.set(Some(e));
                    0.0
                }
            };
            if second {
                g(2) + 2.0 * p * x * g(1)
            } else {
                g(1) + 2.0 * p * x * g(0)
            }
        };
        let ic = integrate(|s| eval(s, false), a, b, 1e-13, 1e-10)?.value;
        let iq = integrate(|s| eval(s, true), a, b, 1e-13, 1e-10)?.value;
        if let Some(e) = err.take() {
            return Err(e);
        }
        Ok((ic, iq))
    };

    for &t in times {
        while next_break < breaks.len() && breaks[next_break] <= t {
            let b = breaks[next_break];
            let (ic, iq) = piece_integrals(a, b)?;
            comp += ic;
            qv += iq;
            a = b;
            next_break += 1;
        }
        let (ic, iq) = piece_integrals(a, t)?;
        let value = path.value_at(t);
        let compensator = cfg.x0 + comp + ic;
        out.push(PathDiagnostics {
            t,
            value,
            compensator,
            martingale: value - compensator,
            quadratic_variation: qv + iq,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limit::path::{simulate_path, LimitConfig};

    #[test]
    fn starts_at_initial_state_and_increases() {
        let path = simulate_path(&LimitConfig::new(0.5, 4.0, 3).with_start(0.0, 0.5)).unwrap();
        let d = diagnostics_at(&path, &[0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(d[0].compensator, 0.5);
        assert_eq!(d[0].quadratic_variation, 0.0);
        for w in d.windows(2) {
            assert!(w[1].compensator >= w[0].compensator);
            assert!(w[1].quadratic_variation >= w[0].quadratic_variation);
        }
        let single = compensator_and_qv(&path, 3.0).unwrap();
        assert!((single.compensator - d[3].compensator).abs() < 1e-12);
        assert!(diagnostics_at(&path, &[2.0, 1.0]).is_err());
        assert!(compensator_and_qv(&path, 5.0).is_err());
    }
}
