//! Joint measurability of finite-outcome quantum observables, white-noise
//! incompatibility robustness, explicit joint-observable constructions, and
//! classification of channels by how much incompatibility they break.
//!
//! The crate is organized as a small stack: [`linalg`] holds the dense complex
//! matrix substrate, [`observables`] and [`channels`] the POVM/channel data
//! model, [`compat`] the feasibility solver with certified verdicts,
//! [`constructions`] explicit joints, Clifford/Specker sets and Monte-Carlo
//! estimators, [`classify`] the EBC / n-IBC / IBC report machinery, and
//! [`cli`] the command-line front end.

pub mod channels;
pub mod classify;
pub mod cli;
pub mod compat;
pub mod constructions;
pub mod error;
pub mod linalg;
pub mod observables;

pub use error::{Error, Result};

use std::sync::Once;

static THREAD_POOL_INIT: Once = Once::new();

/// Configures the global worker pool once, honoring `INCOMPAT_THREADS`.
/// Safe to call repeatedly; later calls are no-ops.
pub fn init_thread_pool() {
    THREAD_POOL_INIT.call_once(|| {
        if let Ok(v) = std::env::var("INCOMPAT_THREADS") {
            if let Ok(n) = v.trim().parse::<usize>() {
                if n >= 1 {
                    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
                }
            }
        }
    });
}
