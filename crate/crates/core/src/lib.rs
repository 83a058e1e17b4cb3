//! Numerics and simulation for the frozen Erdős–Rényi random graph.
//!
//! The crate is organised in five parts:
//!
//! * [`special`]: Airy functions, the 3/2-stable density `p₁`, its log-ratios,
//!   kernel integrals and an independent Fourier-inversion oracle.
//! * [`graph`]: exact simulation of the frozen graph `F_p(n, m)` coupled with
//!   the classical multigraph `G(n, m)`.
//! * [`limit`]: the scaling-limit jump process `X_p`, its compensator,
//!   quadratic variation, generator and a Foster–Lyapunov checker.
//! * [`coalescent`]: Gillespie simulation of the frozen multiplicative coalescent.
//! * [`harness`]: statistics, named experiments and reproducible CSV/JSON output.

#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod coalescent;
pub mod error;
pub mod graph;
pub mod harness;
pub mod limit;
pub mod quad;
pub mod rng;
pub mod special;

pub use error::{Error, Result};
