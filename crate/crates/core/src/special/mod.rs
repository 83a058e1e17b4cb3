//! Special functions: Airy, the stable density `p₁`, kernel integrals and
//! the inversion oracle.

pub mod airy;
pub mod density;
pub mod kernel;
pub mod oracle;

pub use airy::{airy_scaled, ScaledAiryPair};
pub use density::{find_xmax, log_p1, p1, p1_ratio_log, p_s, LogDensityValue, XMax, X_SWITCH_POS};
pub use kernel::{g_moment, i1, jump_rate, kernel_integrals, KernelIntegrals};
pub use oracle::{laplace_kappa, levy_exponent_at_one, oracle_log_p1, oracle_p1, oracle_survival};
