//! Elephant random walk laboratory.
//!
//! The walk starts at `S_0 = 0`, takes `X_1 = +1` with probability `q`, and
//! afterwards repeats a uniformly chosen past step with probability `p`
//! (flipping it otherwise). This crate provides
//!
//! * the normalizing sequences `a_n`, `v_n` and their limits ([`coeffs`]),
//! * two samplers and the martingale `M_n = a_n S_n` ([`model`]),
//! * the exact law of `S_n` by dynamic programming ([`exact`]),
//! * reproducible parallel Monte Carlo ([`montecarlo`], [`rng`]),
//! * Berry-Esseen, Cramér, local-limit and moderate-deviation diagnostics
//!   ([`diagnostics`]),
//! * confidence limits for `p` and position intervals ([`inference`]).

pub mod coeffs;
pub mod diagnostics;
pub mod error;
pub mod exact;
pub mod inference;
pub mod model;
pub mod montecarlo;
pub mod rng;
pub mod special;

pub use coeffs::{
    asymptotic_constants, build_coeffs, build_coeffs_capped, rate_epsilon, rate_reference,
    AsymptoticConstants, CoeffTable, RateReference, Regime, VnScale,
};
pub use error::{ErwError, Result};
pub use exact::{exact_pmf, exact_pmf_with, ExactDistribution, ExactOptions, Moments};
pub use model::{
    martingale_view, sample_path_markov, sample_path_memory, transition_prob, ErwParams,
    MartingaleView, Path, SamplerKind,
};
pub use montecarlo::{
    empirical_tail, run_ensemble, run_ensemble_threads, Ensemble, SimulationPlan,
};

/// Version stamped into every exported CSV/JSON document.
pub const SCHEMA_VERSION: u32 = 1;

/// Locale-free float formatting that round-trips exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}
