//! The scaling-limit jump process `X_p`.
//!
//! Paths are simulated exactly (up to the small-jump cutoff) by thinning a
//! Poisson process that dominates the jump measure cell by cell in
//! `c = t − x`; see [`envelope`].

pub mod diagnostics;
pub mod envelope;
pub mod generator;
pub mod path;
pub mod sampler;
pub mod table;

use rayon::prelude::*;

pub use diagnostics::{compensator_and_qv, diagnostics_at, PathDiagnostics};
pub use generator::{
    generator_apply_p0, lyapunov_check, lyapunov_threshold, parse_grid, Lyapunov, LyapunovReport,
};
pub use path::{simulate_path, DriftKnot, JumpEvent, LimitConfig, LimitPath};
pub use sampler::{sample_jump_size, JumpSizeSampler};
pub use table::KernelTable;

use crate::error::{Error, Result};
use crate::rng::replica_seed;

/// `reps` independent values of `Y(t_sample) = X₀(t_sample) − t_sample`,
/// each path started from `X₀(0) = 0`. `t_burn` is the burn-in the caller
/// treats as sufficient; it must not exceed `t_sample`.
pub fn stationary_samples(t_burn: f64, t_sample: f64, reps: usize, seed: u64) -> Result<Vec<f64>> {
    if !(t_burn >= 0.0 && t_sample >= t_burn && t_sample.is_finite()) {
        return Err(Error::Config(format!(
            "need 0 <= t_burn <= t_sample, got {t_burn}, {t_sample}"
        )));
    }
    if t_sample == 0.0 {
        return Ok(vec![0.0; reps]);
    }
    (0..reps)
        .into_par_iter()
        .map(|i| {
            let cfg = LimitConfig::new(0.0, t_sample, replica_seed(seed, i as u64));
            let path = simulate_path(&cfg)?;
            Ok(path.value_at(t_sample) - t_sample)
        })
        .collect()
}
