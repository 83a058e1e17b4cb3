//! Finite-particle frozen multiplicative coalescent.
//!
//! Standard particles of masses `x, y` merge at rate `xy`; a standard
//! particle freezes at rate `x²/2`; a standard particle `x` and a frozen
//! particle `y` merge into a frozen particle at rate `pxy`.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EventKind {
    StdStdMerge,
    Freeze,
    StdFrozenMerge,
}

/// A sampled next event, not yet applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proposal {
    pub wait: f64,
    pub kind: EventKind,
    /// Index into `standard`.
    pub i: usize,
    /// Second standard index (merges) or frozen index (absorption).
    pub j: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParticleSystem {
    pub standard: Vec<f64>,
    pub frozen: Vec<f64>,
    pub time: f64,
    pub p: f64,
}

/// Sum in increasing order of magnitude.
pub fn sorted_sum(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v.iter().sum()
}

fn pick<R: Rng + ?Sized>(
    weights: impl Iterator<Item = f64> + Clone,
    total: f64,
    rng: &mut R,
) -> usize {
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (k, w) in weights.enumerate() {
        acc += w;
        if w > 0.0 {
            last = k;
        }
        if target < acc {
            return k;
        }
    }
    last
}

impl ParticleSystem {
    pub fn new(standard: Vec<f64>, frozen: Vec<f64>, p: f64) -> Result<Self> {
        if let Some(m) = standard
            .iter()
            .chain(frozen.iter())
            .find(|m| !(**m > 0.0 && m.is_finite()))
        {
            return Err(Error::Config(format!(
                "masses must be positive and finite, got {m}"
            )));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Config(format!("p must lie in [0, 1], got {p}")));
        }
        Ok(ParticleSystem {
            standard,
            frozen,
            time: 0.0,
            p,
        })
    }

    pub fn is_absorbing(&self) -> bool {
        self.standard.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        let mut all = self.standard.clone();
        all.extend_from_slice(&self.frozen);
        sorted_sum(&all)
    }

    pub fn frozen_mass(&self) -> f64 {
        sorted_sum(&self.frozen)
    }

    pub fn largest_standard(&self) -> f64 {
        self.standard.iter().copied().fold(0.0, f64::max)
    }

    /// `(std–std, freeze, std–frozen)` total rates.
    pub fn rates(&self) -> (f64, f64, f64) {
        let s: f64 = self.standard.iter().sum();
        let q: f64 = self.standard.iter().map(|x| x * x).sum();
        let sy: f64 = self.frozen.iter().sum();
        (((s * s - q) / 2.0).max(0.0), q / 2.0, self.p * s * sy)
    }

    pub fn total_rate(&self) -> f64 {
        let (a, b, c) = self.rates();
        a + b + c
    }

    /// Sample the next event; `None` in the absorbing state.
    pub fn propose<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Proposal> {
        if self.is_absorbing() {
            return None;
        }
        let (r_ss, r_fr, r_sf) = self.rates();
        let total = r_ss + r_fr + r_sf;
        let e: f64 = Exp1.sample(rng);
        let wait = e / total;
        let s: f64 = self.standard.iter().sum();
        let u = rng.random::<f64>() * total;
        let xs = self.standard.iter().copied();
        if u < r_ss && self.standard.len() >= 2 {
            loop {
                let i = pick(xs.clone(), s, rng);
                let j = pick(xs.clone(), s, rng);
                if i != j {
                    return Some(Proposal {
                        wait,
                        kind: EventKind::StdStdMerge,
                        i,
                        j,
                    });
                }
            }
        } else if u < r_ss + r_fr || self.frozen.is_empty() || r_sf == 0.0 {
            let q: f64 = self.standard.iter().map(|x| x * x).sum();
            let i = pick(self.standard.iter().map(|x| x * x), q, rng);
            Some(Proposal {
                wait,
                kind: EventKind::Freeze,
                i,
                j: 0,
            })
        } else {
            let sy: f64 = self.frozen.iter().sum();
            let i = pick(xs, s, rng);
            let j = pick(self.frozen.iter().copied(), sy, rng);
            Some(Proposal {
                wait,
                kind: EventKind::StdFrozenMerge,
                i,
                j,
            })
        }
    }

    pub fn apply(&mut self, ev: &Proposal) {
        self.time += ev.wait;
        match ev.kind {
            EventKind::StdStdMerge => {
                let (i, j) = (ev.i.min(ev.j), ev.i.max(ev.j));
                let y = self.standard.swap_remove(j);
                self.standard[i] += y;
            }
            EventKind::Freeze => {
                let x = self.standard.swap_remove(ev.i);
                self.frozen.push(x);
            }
            EventKind::StdFrozenMerge => {
                let x = self.standard.swap_remove(ev.i);
                self.frozen[ev.j] += x;
            }
        }
    }

    /// One Gillespie step; `None` in the absorbing state.
    pub fn gillespie_step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<EventKind> {
        let ev = self.propose(rng)?;
        self.apply(&ev);
        Some(ev.kind)
    }

    /// Run until the next event would occur after `t_end` (that event is not
    /// applied) or the system is absorbing. The clock ends at `t_end`, or at
    /// the absorption time if `t_end` is infinite.
    pub fn run_until<R: Rng + ?Sized>(&mut self, t_end: f64, rng: &mut R) -> Result<()> {
        if t_end < self.time || t_end.is_nan() {
            return Err(Error::Ordering(format!(
                "t_end {t_end} precedes current time {}",
                self.time
            )));
        }
        while let Some(ev) = self.propose(rng) {
            if self.time + ev.wait > t_end {
                self.time = t_end;
                return Ok(());
            }
            self.apply(&ev);
        }
        if t_end.is_finite() {
            self.time = t_end;
        }
        Ok(())
    }
}
