//! Jump-size sampling from the normalized kernel at a fixed state.

use rand::Rng;

use super::envelope::{cell_envelope, cell_of, Envelope};
use crate::error::{ensure_finite, Error, Result};
use crate::special::density::ratio_log;

const MAX_TRIES: u64 = 1_000_000;

/// Rejection sampler for `𝐧_p(t, x, ·)` restricted to `[δ, ∞)`.
#[derive(Debug, Clone)]
pub struct JumpSizeSampler {
    c: f64,
    x: f64,
    p: f64,
    env: Envelope,
    pub repairs: u32,
}

impl JumpSizeSampler {
    pub fn new(t: f64, x: f64, p: f64, delta: f64) -> Result<Self> {
        ensure_finite("t", t)?;
        ensure_finite("x", x)?;
        if !(x >= 0.0) {
            return Err(Error::Domain(format!("state x must be >= 0, got {x}")));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("p must lie in [0, 1], got {p}")));
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::Domain(format!(
                "delta must be positive, got {delta}"
            )));
        }
        let c = t - x;
        let env = (*cell_envelope(cell_of(c), delta)?).clone();
        Ok(JumpSizeSampler {
            c,
            x,
            p,
            env,
            repairs: 0,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<f64> {
        for _ in 0..MAX_TRIES {
            let (j, y, _) = self.env.propose(self.p, self.x, rng);
            let lr = ratio_log(self.c, y);
            if lr > self.env.log_bound[j] {
                self.repairs += 1;
                if self.repairs > 8 {
                    return Err(Error::numeric(
                        "size envelope repeatedly violated",
                        self.env.edges[j],
                        self.env.edges[j + 1],
                    ));
                }
                self.env.raise(j, lr, 0.5);
                continue;
            }
            if rng.random::<f64>().ln() < lr - self.env.log_bound[j] {
                return Ok(y);
            }
        }
        Err(Error::numeric(
            "jump-size rejection sampler did not accept",
            self.c,
            self.c,
        ))
    }
}

/// One draw from the normalized kernel `𝐧_p(t, x, dy)` on `[δ, ∞)`.
pub fn sample_jump_size<R: Rng + ?Sized>(
    t: f64,
    x: f64,
    p: f64,
    delta: f64,
    rng: &mut R,
) -> Result<f64> {
    JumpSizeSampler::new(t, x, p, delta)?.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn draws_respect_cutoff() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut s = JumpSizeSampler::new(1.0, 2.0, 0.7, 1e-3).unwrap();
        for _ in 0..2000 {
            assert!(s.sample(&mut rng).unwrap() >= 1e-3);
        }
        assert!(sample_jump_size(0.0, -1.0, 0.5, 1e-3, &mut rng).is_err());
    }
}
