//! Brute-force oracles shared by the integration tests. They enumerate all
//! `2^n` step histories and stay independent of the dynamic program.

#![allow(dead_code)]

use erw_core::transition_prob;

/// Terminal pmf (index `j` ↔ `S_n = 2j - n`) by enumerating step histories
/// under the copy/flip rule: given `X_1..X_k`, the next step equals a
/// uniformly chosen past step with probability `p`, its negation otherwise.
pub fn enumerate_memory_rule(p: f64, q: f64, n: usize) -> Vec<f64> {
    let mut pmf = vec![0.0; n + 1];
    for bits in 0u32..(1 << n) {
        let step = |i: usize| if bits >> i & 1 == 1 { 1i64 } else { -1 };
        let mut w = if step(0) == 1 { q } else { 1.0 - q };
        let mut ups = usize::from(step(0) == 1);
        for k in 1..n {
            let x = step(k);
            let same = if x == 1 { ups } else { k - ups };
            let other = k - same;
            w *= (p * same as f64 + (1.0 - p) * other as f64) / k as f64;
            if x == 1 {
                ups += 1;
            }
        }
        let s: i64 = (0..n).map(step).sum();
        pmf[((s + n as i64) / 2) as usize] += w;
    }
    pmf
}

/// Terminal pmf by enumerating histories weighted with the position-chain
/// kernel `transition_prob`.
pub fn enumerate_kernel(p: f64, q: f64, n: usize) -> Vec<f64> {
    let mut pmf = vec![0.0; n + 1];
    for bits in 0u32..(1 << n) {
        let step = |i: usize| if bits >> i & 1 == 1 { 1i64 } else { -1 };
        let mut w = if step(0) == 1 { q } else { 1.0 - q };
        let mut s = step(0);
        for k in 1..n {
            let up = transition_prob(p, k, s).unwrap();
            let x = step(k);
            w *= if x == 1 { up } else { 1.0 - up };
            s += x;
        }
        pmf[((s + n as i64) / 2) as usize] += w;
    }
    pmf
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
