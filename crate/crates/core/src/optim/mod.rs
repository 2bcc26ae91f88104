//! Derivative-free optimisation: a box-constrained Nelder-Mead simplex
//! minimiser and a multi-start least-squares fitter built on it.

mod nelder_mead;
mod nls;

pub use nelder_mead::{nm_minimize, NmOptions, NmOptionsError, NmResult};
pub use nls::{nls_fit, sse, FitResult, NlsError, NlsOptions};
