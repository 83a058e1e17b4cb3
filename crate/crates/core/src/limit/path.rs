//! Path simulation of `X_p` by thinning a dominating Poisson process.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::envelope::{cell_bounds, cell_envelope, cell_of, Envelope};
use crate::error::{ensure_finite, Error, Result};
use crate::special::density::ratio_log;

/// Envelope repairs tolerated per path before giving up.
const MAX_REPAIRS: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitConfig {
    pub p: f64,
    pub t0: f64,
    pub x0: f64,
    pub t_end: f64,
    pub delta: f64,
    pub compensate_small: bool,
    pub seed: u64,
    /// Nats added to every envelope bound. Inflating the dominating process
    /// must not change the law of the path.
    pub envelope_slack: f64,
}

impl LimitConfig {
    /// Defaults: start at `t0 = 0` from `x0 = 0`; `δ = 1e−4` with drift
    /// compensation when `p > 0`, otherwise `δ = 1e−8` without.
    pub fn new(p: f64, t_end: f64, seed: u64) -> Self {
        let (delta, compensate_small) = if p > 0.0 { (1e-4, true) } else { (1e-8, false) };
        LimitConfig {
            p,
            t0: 0.0,
            x0: 0.0,
            t_end,
            delta,
            compensate_small,
            seed,
            envelope_slack: 0.0,
        }
    }

    pub fn with_start(mut self, t0: f64, x0: f64) -> Self {
        self.t0 = t0;
        self.x0 = x0;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_slack(mut self, nats: f64) -> Self {
        self.envelope_slack = nats;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("p", self.p),
            ("t0", self.t0),
            ("x0", self.x0),
            ("t_end", self.t_end),
            ("delta", self.delta),
            ("envelope_slack", self.envelope_slack),
        ] {
            ensure_finite(name, v).map_err(|e| Error::Config(e.to_string()))?;
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::Config(format!(
                "p must lie in [0, 1], got {}",
                self.p
            )));
        }
        if self.t_end <= self.t0 {
            return Err(Error::Config(format!(
                "t_end {} must exceed t0 {}",
                self.t_end, self.t0
            )));
        }
        if self.delta <= 0.0 {
            return Err(Error::Config(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if self.envelope_slack < 0.0 {
            return Err(Error::Config(format!(
                "envelope_slack must be non-negative, got {}",
                self.envelope_slack
            )));
        }
        if self.x0 < 0.0 {
            return Err(Error::Config(format!(
                "x0 must be non-negative, got {}",
                self.x0
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JumpEvent {
    pub time: f64,
    pub size: f64,
}

/// Start of a stretch on which the small-jump drift is constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftKnot {
    pub time: f64,
    pub rate: f64,
    /// Drift accumulated before `time`.
    pub cum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitPath {
    pub config: LimitConfig,
    pub events: Vec<JumpEvent>,
    pub drift: Vec<DriftKnot>,
    /// Dominating-process points examined.
    pub candidates: u64,
    /// Envelope repairs performed (zero unless a bound was violated).
    pub repairs: u32,
}

impl LimitPath {
    fn drift_at(&self, t: f64) -> f64 {
        let k = self.drift.partition_point(|d| d.time <= t);
        if k == 0 {
            return 0.0;
        }
        let d = &self.drift[k - 1];
        d.cum + d.rate * (t.min(self.config.t_end) - d.time)
    }

    /// `X(t)`, right-continuous.
    pub fn value_at(&self, t: f64) -> f64 {
        let k = self.events.partition_point(|e| e.time <= t);
        let jumps: f64 = self.events[..k].iter().map(|e| e.size).sum();
        self.config.x0 + jumps + self.drift_at(t)
    }

    /// `X(t−)`.
    pub fn value_before(&self, t: f64) -> f64 {
        let k = self.events.partition_point(|e| e.time < t);
        let jumps: f64 = self.events[..k].iter().map(|e| e.size).sum();
        self.config.x0 + jumps + self.drift_at(t)
    }

    pub fn jumps_up_to(&self, t: f64) -> usize {
        self.events.partition_point(|e| e.time <= t)
    }

    /// Drift rate in force at `t`.
    pub fn drift_rate_at(&self, t: f64) -> f64 {
        let k = self.drift.partition_point(|d| d.time <= t);
        if k == 0 {
            0.0
        } else {
            self.drift[k - 1].rate
        }
    }
}

/// Simulate one path on `[t0, t_end]` with the RNG seeded from `config.seed`.
pub fn simulate_path(config: &LimitConfig) -> Result<LimitPath> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    simulate_path_with(config, &mut rng)
}

pub fn simulate_path_with<R: Rng + ?Sized>(config: &LimitConfig, rng: &mut R) -> Result<LimitPath> {
    config.validate()?;
    let p = config.p;
    let mut s = config.t0;
    let mut x = config.x0;
    let mut k = cell_of(s - x);
    let mut path = LimitPath {
        config: *config,
        events: Vec::new(),
        drift: Vec::new(),
        candidates: 0,
        repairs: 0,
    };
    let mut local: HashMap<i64, Envelope> = HashMap::new();
    let mut drift_cum = 0.0;

    while s < config.t_end {
        let shared;
        let env: &Envelope = match local.get(&k) {
            Some(e) => e,
            None => {
                shared = cell_envelope(k, config.delta)?;
                &shared
            }
        };
        let (c_lo, c_hi) = cell_bounds(k);
        let c = (s - x).clamp(c_lo, c_hi);
        let d = if config.compensate_small {
            let (g0, g1) = env.small_moments(c);
            g1 + 2.0 * p * x * g0
        } else {
            0.0
        };
        if d >= 1.0 {
            return Err(Error::numeric(
                format!("small-jump drift {d} >= 1 at x = {x}; reduce delta"),
                s,
                config.t_end,
            ));
        }
        if config.compensate_small {
            path.drift.push(DriftKnot {
                time: s,
                rate: d,
                cum: drift_cum,
            });
        }
        let h_exit = (c_hi - c) / (1.0 - d);
        let seg_end = (s + h_exit).min(config.t_end);
        let x_hi = x + d * (seg_end - s);
        let lambda = env.rate(p, x_hi) * config.envelope_slack.exp();

        // Thin the dominating process on [s, seg_end).
        let mut jumped = None;
        let mut repair = None;
        let mut u = s;
        loop {
            if lambda <= 0.0 {
                break;
            }
            let e: f64 = Exp1.sample(rng);
            u += e / lambda;
            if u >= seg_end {
                break;
            }
            path.candidates += 1;
            let xu = x + d * (u - s);
            let cu = (u - xu).clamp(c_lo, c_hi);
            let (j, y, from_b) = env.propose(p, x_hi, rng);
            let lr = ratio_log(cu, y);
            if lr > env.log_bound[j] {
                repair = Some((u, j, lr));
                break;
            }
            let mut log_acc = lr - env.log_bound[j] - config.envelope_slack;
            if from_b {
                log_acc += (xu / x_hi).ln();
            }
            if rng.random::<f64>().ln() < log_acc {
                jumped = Some((u, y));
                break;
            }
        }

        if let Some((u, j, lr)) = repair {
            path.repairs += 1;
            if path.repairs > MAX_REPAIRS {
                return Err(Error::numeric(
                    "jump envelope repeatedly violated",
                    c_lo,
                    c_hi,
                ));
            }
            let mut fixed = env.clone();
            fixed.raise(j, lr, 0.5);
            local.insert(k, fixed);
            drift_cum += d * (u - s);
            x += d * (u - s);
            s = u;
            continue;
        }
        match jumped {
            Some((u, y)) => {
                drift_cum += d * (u - s);
                x += d * (u - s) + y;
                s = u;
                path.events.push(JumpEvent { time: u, size: y });
                k = cell_of(s - x);
            }
            None => {
                drift_cum += d * (seg_end - s);
                x += d * (seg_end - s);
                if seg_end < config.t_end {
                    k += 1;
                }
                s = seg_end;
            }
        }
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(LimitConfig::new(0.5, 1.0, 1).validate().is_ok());
        assert!(LimitConfig::new(0.5, 0.0, 1).validate().is_err());
        assert!(LimitConfig::new(1.5, 1.0, 1).validate().is_err());
        assert!(LimitConfig::new(0.5, 1.0, 1)
            .with_delta(0.0)
            .validate()
            .is_err());
        assert!(LimitConfig::new(0.5, 1.0, 1)
            .with_start(0.0, -1.0)
            .validate()
            .is_err());
    }

    #[test]
    fn paths_are_monotone_and_deterministic() {
        let cfg = LimitConfig::new(0.5, 5.0, 17);
        let a = simulate_path(&cfg).unwrap();
        let b = simulate_path(&cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.events.windows(2).all(|w| w[0].time < w[1].time));
        assert!(a.events.iter().all(|e| e.size >= cfg.delta));
        let mut prev = a.value_at(0.0);
        assert_eq!(prev, 0.0);
        for i in 1..=100 {
            let v = a.value_at(0.05 * i as f64);
            assert!(v >= prev);
            prev = v;
        }
        assert_eq!(a.repairs, 0);
    }
}
