//! Shared fixtures for the criterion benchmarks.

use erw_core::{build_coeffs, CoeffTable, ErwParams};

/// Parameter sets the benchmarks sweep: one per regime of interest.
pub const MEMORY_PARAMETERS: [f64; 3] = [0.25, 0.6, 0.75];

pub fn params(p: f64, n: usize) -> ErwParams {
    ErwParams::new(p, 0.5, n).expect("benchmark parameters are valid")
}

pub fn table(p: f64, n: usize) -> CoeffTable {
    build_coeffs(p, n).expect("benchmark parameters are valid")
}
