//! The walk itself: parameters, transition kernel, samplers and the
//! martingale decomposition `M_n = a_n S_n`.
//!
//! Both samplers draw exactly one uniform for the first step and one per
//! subsequent step. They share seeding conventions but are only ever
//! compared in distribution.

use std::io::{self, Write};

use rand::Rng;
use serde::Serialize;

use crate::coeffs::CoeffTable;
use crate::error::{ErwError, Result};

/// Memory parameter `p`, first-step parameter `q` and horizon `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErwParams {
    pub p: f64,
    pub q: f64,
    pub n: usize,
}

impl ErwParams {
    pub fn new(p: f64, q: f64, n: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(ErwError::domain(format!("p = {p} must lie in [0, 1]")));
        }
        if !(0.0..=1.0).contains(&q) {
            return Err(ErwError::domain(format!("q = {q} must lie in [0, 1]")));
        }
        if n == 0 {
            return Err(ErwError::domain("horizon n must be at least 1"));
        }
        Ok(ErwParams { p, q, n })
    }

    pub fn with_n(self, n: usize) -> Result<Self> {
        ErwParams::new(self.p, self.q, n)
    }
}

/// `P(X_{k+1} = +1 | S_k = s) = 1/2 + (2p - 1) s / (2k)`.
pub fn transition_prob(p: f64, k: usize, s: i64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ErwError::domain(format!("p = {p} must lie in [0, 1]")));
    }
    if k == 0 {
        return Err(ErwError::domain("k must be at least 1"));
    }
    if s.unsigned_abs() > k as u64 || (s - k as i64).rem_euclid(2) != 0 {
        return Err(ErwError::domain(format!(
            "position s = {s} is not reachable at time k = {k}"
        )));
    }
    Ok(up_prob(p - 0.5, k, s))
}

#[inline]
pub(crate) fn up_prob(half_drift: f64, k: usize, s: i64) -> f64 {
    0.5 + half_drift * s as f64 / k as f64
}

/// A realized trajectory: steps `X_1..X_n` and positions `S_0..S_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    steps: Vec<i8>,
    positions: Vec<i64>,
}

impl Path {
    pub fn from_steps(steps: Vec<i8>) -> Result<Self> {
        if steps.iter().any(|&x| x != 1 && x != -1) {
            return Err(ErwError::domain("steps must be +1 or -1"));
        }
        let mut positions = Vec::with_capacity(steps.len() + 1);
        let mut s = 0i64;
        positions.push(0);
        for &x in &steps {
            s += x as i64;
            positions.push(s);
        }
        Ok(Path { steps, positions })
    }

    pub fn n(&self) -> usize {
        self.steps.len()
    }

    /// `X_1 .. X_n`.
    pub fn steps(&self) -> &[i8] {
        &self.steps
    }

    /// `S_0 .. S_n`.
    pub fn positions(&self) -> &[i64] {
        &self.positions
    }

    pub fn terminal(&self) -> i64 {
        *self.positions.last().expect("S_0 is always present")
    }

    /// Writes `k,X_k,S_k` for `k` in `1..=n`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "k,X_k,S_k")?;
        for (i, x) in self.steps.iter().enumerate() {
            writeln!(w, "{},{},{}", i + 1, x, self.positions[i + 1])?;
        }
        Ok(())
    }
}

#[inline]
fn first_step<R: Rng + ?Sized>(q: f64, rng: &mut R) -> i8 {
    if rng.random::<f64>() < q {
        1
    } else {
        -1
    }
}

/// Runs the position chain, calling `visit(k, X_k, S_k)` for each step.
#[inline]
fn run_markov<R: Rng + ?Sized>(
    params: &ErwParams,
    rng: &mut R,
    mut visit: impl FnMut(usize, i8, i64),
) -> i64 {
    let half_drift = params.p - 0.5;
    let x1 = first_step(params.q, rng);
    let mut s = x1 as i64;
    visit(1, x1, s);
    for k in 1..params.n {
        let x = if rng.random::<f64>() < up_prob(half_drift, k, s) {
            1
        } else {
            -1
        };
        s += x as i64;
        visit(k + 1, x, s);
    }
    s
}

/// Runs the literal memory rule over `history`, which is cleared and refilled.
///
/// A single uniform `u` per step yields both the remembered index
/// `β = ⌊u k⌋ + 1` and, from the fractional part of `u k`, the independent
/// Rademacher(p) sign `α`.
#[inline]
fn run_memory<R: Rng + ?Sized>(
    params: &ErwParams,
    rng: &mut R,
    history: &mut Vec<i8>,
    mut visit: impl FnMut(usize, i8, i64),
) -> i64 {
    history.clear();
    history.reserve(params.n);
    let x1 = first_step(params.q, rng);
    history.push(x1);
    let mut s = x1 as i64;
    visit(1, x1, s);
    for k in 1..params.n {
        let scaled = rng.random::<f64>() * k as f64;
        let idx = (scaled.floor() as usize).min(k - 1);
        let frac = scaled - idx as f64;
        let remembered = history[idx];
        let x = if frac < params.p {
            remembered
        } else {
            -remembered
        };
        history.push(x);
        s += x as i64;
        visit(k + 1, x, s);
    }
    s
}

/// Samples a path by the defining rule: copy a uniformly chosen past step
/// with probability `p`, otherwise flip it. Stores the whole history.
pub fn sample_path_memory<R: Rng + ?Sized>(params: &ErwParams, rng: &mut R) -> Path {
    let mut history = Vec::with_capacity(params.n);
    run_memory(params, rng, &mut history, |_, _, _| {});
    Path::from_steps(history).expect("sampler emits unit steps")
}

/// Samples a path from the position chain with kernel [`transition_prob`].
/// Same law as [`sample_path_memory`], constant working state.
pub fn sample_path_markov<R: Rng + ?Sized>(params: &ErwParams, rng: &mut R) -> Path {
    let mut steps = Vec::with_capacity(params.n);
    run_markov(params, rng, |_, x, _| steps.push(x));
    Path::from_steps(steps).expect("sampler emits unit steps")
}

/// Which sampler drives a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    #[default]
    Markov,
    Memory,
}

impl std::str::FromStr for SamplerKind {
    type Err = ErwError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "markov" => Ok(SamplerKind::Markov),
            "memory" => Ok(SamplerKind::Memory),
            other => Err(ErwError::domain(format!(
                "unknown sampler '{other}' (expected markov or memory)"
            ))),
        }
    }
}

impl SamplerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SamplerKind::Markov => "markov",
            SamplerKind::Memory => "memory",
        }
    }

    pub fn sample_path<R: Rng + ?Sized>(self, params: &ErwParams, rng: &mut R) -> Path {
        match self {
            SamplerKind::Markov => sample_path_markov(params, rng),
            SamplerKind::Memory => sample_path_memory(params, rng),
        }
    }
}

/// Terminal-position sampler with reusable scratch space.
#[derive(Debug, Default)]
pub(crate) struct TerminalSampler {
    history: Vec<i8>,
}

impl TerminalSampler {
    pub(crate) fn sample<R: Rng + ?Sized>(
        &mut self,
        kind: SamplerKind,
        params: &ErwParams,
        rng: &mut R,
    ) -> i64 {
        match kind {
            SamplerKind::Markov => run_markov(params, rng, |_, _, _| {}),
            SamplerKind::Memory => run_memory(params, rng, &mut self.history, |_, _, _| {}),
        }
    }
}

/// `M_k = a_k S_k`, its increments and the predictable quadratic variation.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleView {
    /// `M_1 .. M_n`.
    pub m: Vec<f64>,
    /// `ΔM_1 = M_1`, `ΔM_k = M_k - M_{k-1}`.
    pub dm: Vec<f64>,
    /// `<M>_1 .. <M>_n` accumulated from conditional variances.
    pub qv: Vec<f64>,
    /// `<M>_n` from the closed form `v_n - (2p-1)² Σ (a_{k+1}/a_k)² (M_k/k)²`.
    pub qv_closed_form: f64,
}

impl MartingaleView {
    pub fn qv_n(&self) -> f64 {
        *self.qv.last().expect("view is non-empty")
    }
}

pub fn martingale_view(path: &Path, table: &CoeffTable) -> Result<MartingaleView> {
    let n = path.n();
    if n != table.n() {
        return Err(ErwError::domain(format!(
            "path horizon {n} does not match table horizon {}",
            table.n()
        )));
    }
    let s = path.positions();
    let a = table.a_seq();
    let drift = 2.0 * table.p() - 1.0;
    let drift2 = drift * drift;

    let m: Vec<f64> = (0..n).map(|i| a[i] * s[i + 1] as f64).collect();
    let mut dm = Vec::with_capacity(n);
    dm.push(m[0]);
    dm.extend(m.windows(2).map(|w| w[1] - w[0]));

    let mut qv = Vec::with_capacity(n);
    let mut acc = a[0] * a[0];
    qv.push(acc);
    for k in 2..=n {
        let ratio = s[k - 1] as f64 / (k - 1) as f64;
        acc += a[k - 1] * a[k - 1] * (1.0 - drift2 * ratio * ratio);
        qv.push(acc);
    }

    let mut correction = 0.0;
    for k in 1..n {
        let growth = a[k] / a[k - 1];
        let mk = m[k - 1] / k as f64;
        correction += growth * growth * mk * mk;
    }
    let qv_closed_form = table.v_n() - drift2 * correction;

    Ok(MartingaleView {
        m,
        dm,
        qv,
        qv_closed_form,
    })
}
