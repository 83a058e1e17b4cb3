//! Piecewise-constant dominating envelopes for the jump kernel.
//!
//! For a cell `c = t − x ∈ [c_lo, c_hi]` and a log-spaced bin `y ∈ [a, b]`,
//! the log-ratio `log p₁(c − y) − log p₁(c)` is bounded above using two
//! structural facts: `p₁` is unimodal with mode `x_max`, and for `c ≤ 0`
//! the ratio is non-decreasing in `c`. The kernel
//! `(y + 2px) y^{-3/2} / (2√(2π))` is split into the `y^{-1/2}` part (mass
//! `A_j` per bin) and the `2px·y^{-3/2}` part (mass `B_j`), each sampled
//! exactly within a bin.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use rand::Rng;

use crate::error::Result;
use crate::special::density::{ln_p1, x_max};
use crate::special::kernel::g_moment;

pub const BINS_PER_DECADE: f64 = 64.0;
pub const CELL_WIDTH: f64 = 0.1;
/// Bins whose bound lies this many nats below 1 are dropped past the mode.
const TAIL_NATS: f64 = 45.0;

#[derive(Debug, Clone)]
pub struct Envelope {
    pub c_lo: f64,
    pub c_hi: f64,
    pub delta: f64,
    /// Bin edges `y_0 = δ < y_1 < … < y_J`.
    pub edges: Vec<f64>,
    /// Upper bound of the log-ratio on each bin.
    pub log_bound: Vec<f64>,
    /// Cumulative `Σ e^{R̄_j} A_j`.
    pub cum_a: Vec<f64>,
    /// Cumulative `Σ e^{R̄_j} B_j`.
    pub cum_b: Vec<f64>,
    /// Small-jump moments `G₀, G₁` on `(0, δ)` at `c_lo` and `c_hi`.
    pub small: [[f64; 2]; 2],
}

/// Max of `ln p₁` over `[w1, w2]` by unimodality.
fn ln_p1_max(w1: f64, w2: f64) -> f64 {
    ln_p1(x_max().clamp(w1, w2))
}

fn bin_bound(c_lo: f64, c_hi: f64, a: f64, b: f64) -> f64 {
    let raw = if c_hi <= 0.0 {
        ln_p1_max(c_hi - b, c_hi - a) - ln_p1(c_hi)
    } else {
        ln_p1_max(c_lo - b, c_hi - a) - ln_p1(c_lo).min(ln_p1(c_hi))
    };
    raw + 1e-9 * (1.0 + raw.abs())
}

impl Envelope {
    pub fn build(c_lo: f64, c_hi: f64, delta: f64) -> Result<Self> {
        let step = 10f64.powf(1.0 / BINS_PER_DECADE);
        let mut edges = vec![delta];
        let mut log_bound = Vec::new();
        let xm = x_max();
        loop {
            let a = *edges.last().unwrap();
            let b = a * step;
            let r = bin_bound(c_lo, c_hi, a, b);
            if a > c_hi - xm && r < -TAIL_NATS {
                break;
            }
            log_bound.push(r);
            edges.push(b);
        }
        let norm = 1.0 / (2.0 * PI).sqrt();
        let mut cum_a = Vec::with_capacity(log_bound.len());
        let mut cum_b = Vec::with_capacity(log_bound.len());
        let (mut sa, mut sb) = (0.0, 0.0);
        for (j, r) in log_bound.iter().enumerate() {
            let (a, b) = (edges[j], edges[j + 1]);
            let w = r.exp();
            sa += w * (b.sqrt() - a.sqrt()) * norm;
            sb += w * (1.0 / a.sqrt() - 1.0 / b.sqrt()) * norm;
            cum_a.push(sa);
            cum_b.push(sb);
        }
        let small_at = |c: f64| -> Result<[f64; 2]> {
            Ok([
                g_moment(0, c, 0.0, delta, 1e-300)?.value,
                g_moment(1, c, 0.0, delta, 1e-300)?.value,
            ])
        };
        let small = [small_at(c_lo)?, small_at(c_hi)?];
        Ok(Envelope {
            c_lo,
            c_hi,
            delta,
            edges,
            log_bound,
            cum_a,
            cum_b,
            small,
        })
    }

    pub fn total_a(&self) -> f64 {
        self.cum_a.last().copied().unwrap_or(0.0)
    }

    pub fn total_b(&self) -> f64 {
        self.cum_b.last().copied().unwrap_or(0.0)
    }

    /// Dominating rate for state `x` (at most `x_hi` over the window).
    pub fn rate(&self, p: f64, x_hi: f64) -> f64 {
        self.total_a() + 2.0 * p * x_hi * self.total_b()
    }

    /// `(G₀, G₁)` on `(0, δ)` at `c`, interpolated linearly across the cell.
    pub fn small_moments(&self, c: f64) -> (f64, f64) {
        let w = if self.c_hi > self.c_lo {
            ((c - self.c_lo) / (self.c_hi - self.c_lo)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let g0 = self.small[0][0] + w * (self.small[1][0] - self.small[0][0]);
        let g1 = self.small[0][1] + w * (self.small[1][1] - self.small[0][1]);
        (g0, g1)
    }

    /// Draw a candidate `(bin, y, from_b)` from the envelope measure with the
    /// `B` part weighted by `2p·x_hi`.
    pub fn propose<R: Rng + ?Sized>(&self, p: f64, x_hi: f64, rng: &mut R) -> (usize, f64, bool) {
        let ta = self.total_a();
        let tb = 2.0 * p * x_hi * self.total_b();
        let from_b = rng.random::<f64>() * (ta + tb) >= ta;
        let cum = if from_b { &self.cum_b } else { &self.cum_a };
        let target = rng.random::<f64>() * cum[cum.len() - 1];
        let j = cum.partition_point(|&v| v <= target).min(cum.len() - 1);
        let (a, b) = (self.edges[j], self.edges[j + 1]);
        let u: f64 = rng.random();
        let y = if from_b {
            let (ia, ib) = (1.0 / a.sqrt(), 1.0 / b.sqrt());
            let s = ia - u * (ia - ib);
            1.0 / (s * s)
        } else {
            let (ra, rb) = (a.sqrt(), b.sqrt());
            let s = ra + u * (rb - ra);
            s * s
        };
        (j, y.clamp(a, b), from_b)
    }

    /// Raise the bound of bin `j` to at least `log_value + margin` and
    /// rebuild the cumulative sums.
    pub fn raise(&mut self, j: usize, log_value: f64, margin: f64) {
        self.log_bound[j] = self.log_bound[j].max(log_value + margin);
        let norm = 1.0 / (2.0 * PI).sqrt();
        let (mut sa, mut sb) = (0.0, 0.0);
        for (k, r) in self.log_bound.iter().enumerate() {
            let (a, b) = (self.edges[k], self.edges[k + 1]);
            let w = r.exp();
            sa += w * (b.sqrt() - a.sqrt()) * norm;
            sb += w * (1.0 / a.sqrt() - 1.0 / b.sqrt()) * norm;
            self.cum_a[k] = sa;
            self.cum_b[k] = sb;
        }
    }
}

type CacheKey = (i64, u64);

fn cache() -> &'static RwLock<HashMap<CacheKey, Arc<Envelope>>> {
    static CACHE: OnceLock<RwLock<HashMap<CacheKey, Arc<Envelope>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

pub fn cell_of(c: f64) -> i64 {
    (c / CELL_WIDTH).floor() as i64
}

pub fn cell_bounds(k: i64) -> (f64, f64) {
    (k as f64 * CELL_WIDTH, (k + 1) as f64 * CELL_WIDTH)
}

/// Shared, lazily built envelope of cell `k` for cutoff `delta`.
pub fn cell_envelope(k: i64, delta: f64) -> Result<Arc<Envelope>> {
    let key = (k, delta.to_bits());
    if let Some(e) = cache().read().unwrap().get(&key) {
        return Ok(Arc::clone(e));
    }
    let (lo, hi) = cell_bounds(k);
    let env = Arc::new(Envelope::build(lo, hi, delta)?);
    let mut w = cache().write().unwrap();
    Ok(Arc::clone(w.entry(key).or_insert(env)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::density::ratio_log;

    #[test]
    fn bounds_dominate_on_dense_grid() {
        for k in [-150i64, -40, -11, -1, 0, 3, 25, 120] {
            let (lo, hi) = cell_bounds(k);
            let env = Envelope::build(lo, hi, 1e-4).unwrap();
            assert!(!env.log_bound.is_empty());
            for j in (0..env.log_bound.len()).step_by(7) {
                let (a, b) = (env.edges[j], env.edges[j + 1]);
                for ci in 0..=6 {
                    let c = lo + (hi - lo) * ci as f64 / 6.0;
                    for yi in 0..=6 {
                        let y = a + (b - a) * yi as f64 / 6.0;
                        assert!(
                            ratio_log(c, y) <= env.log_bound[j],
                            "cell {k} bin {j} c={c} y={y}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn tail_is_negligible_beyond_last_edge() {
        for k in [-30i64, 0, 50] {
            let (lo, hi) = cell_bounds(k);
            let env = Envelope::build(lo, hi, 1e-6).unwrap();
            let top = *env.edges.last().unwrap();
            assert!(
                ratio_log(lo, top) < -40.0 && ratio_log(hi, top) < -40.0,
                "cell {k}"
            );
        }
    }

    #[test]
    fn cache_returns_identical_envelopes() {
        let a = cell_envelope(-7, 1e-4).unwrap();
        let b = cell_envelope(-7, 1e-4).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(cell_of(-0.65), -7);
    }
}
