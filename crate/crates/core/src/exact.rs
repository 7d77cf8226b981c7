//! Exact law of `S_n` by forward dynamic programming over the position
//! chain.
//!
//! Layer `k` holds the mass of `S_k` on `{-k, -k+2, .., k}` in a dense
//! array of length `k + 1`, index `j` standing for `s = 2j - k`. Building
//! layer `n` costs about `n²/2` multiply-adds and `O(n)` memory.

use std::io::{self, Write};

use serde::Serialize;

use crate::coeffs::CoeffTable;
use crate::error::{ErwError, Result};
use crate::fmt_f64;
use crate::model::ErwParams;

/// Largest horizon [`exact_pmf`] builds without an override.
pub const DEFAULT_EXACT_CAP: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactOptions {
    pub cap: usize,
    /// Build past `cap` anyway.
    pub allow_over_cap: bool,
    /// Rescale every layer to unit mass. Off by default so drift stays visible.
    pub renormalize: bool,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            cap: DEFAULT_EXACT_CAP,
            allow_over_cap: false,
            renormalize: false,
        }
    }
}

/// `a_n` and `v_n` used to put `S_n` on the scale `a_n S_n / √v_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Normalizers {
    pub a_n: f64,
    pub v_n: f64,
}

impl Normalizers {
    pub fn from_table(table: &CoeffTable) -> Self {
        Normalizers {
            a_n: table.a_n(),
            v_n: table.v_n(),
        }
    }

    pub fn factor(&self) -> f64 {
        self.a_n / self.v_n.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

/// The exact pmf of `S_n` with cumulative accessors.
#[derive(Debug, Clone)]
pub struct ExactDistribution {
    params: ErwParams,
    pmf: Vec<f64>,
    /// `cdf[j] = P(S_n <= 2j - n)`, summed from the left.
    cdf: Vec<f64>,
    /// `sf[j] = P(S_n >= 2j - n)`, summed from the right so far tails keep
    /// their relative precision.
    sf: Vec<f64>,
    normalizers: Option<Normalizers>,
    max_mass_drift: f64,
}

/// Exact law of `S_n` with default options. `table` must match `params`.
pub fn exact_pmf(params: &ErwParams, table: &CoeffTable) -> Result<ExactDistribution> {
    exact_pmf_with(params, Some(table), &ExactOptions::default())
}

/// Exact law of `S_n`. Without a table the distribution has no
/// standardized scale (needed for `p = 0`, where `a_n` does not exist).
pub fn exact_pmf_with(
    params: &ErwParams,
    table: Option<&CoeffTable>,
    opts: &ExactOptions,
) -> Result<ExactDistribution> {
    let n = params.n;
    if n > opts.cap && !opts.allow_over_cap {
        return Err(ErwError::ResourceCap {
            what: "n",
            requested: n as u64,
            cap: opts.cap as u64,
        });
    }
    if let Some(t) = table {
        if t.n() != n || t.p() != params.p {
            return Err(ErwError::domain(format!(
                "coefficient table (p = {}, n = {}) does not match parameters (p = {}, n = {n})",
                t.p(),
                t.n(),
                params.p
            )));
        }
    }

    let half_drift = params.p - 0.5;
    let mut cur = Vec::with_capacity(n + 1);
    let mut next = Vec::with_capacity(n + 1);
    cur.extend_from_slice(&[1.0 - params.q, params.q]);
    let mut max_mass_drift = 0.0f64;

    for k in 1..n {
        next.clear();
        next.resize(k + 2, 0.0);
        let kf = k as f64;
        for (j, &m) in cur.iter().enumerate() {
            let s = 2 * j as i64 - k as i64;
            // up = 1/2 + d and down = 1/2 - d keep the q = 1/2 layers
            // exactly mirror-symmetric.
            let d = half_drift * s as f64 / kf;
            next[j + 1] += m * (0.5 + d);
            next[j] += m * (0.5 - d);
        }
        let mass: f64 = next.iter().sum();
        max_mass_drift = max_mass_drift.max((mass - 1.0).abs());
        if opts.renormalize {
            next.iter_mut().for_each(|m| *m /= mass);
        }
        std::mem::swap(&mut cur, &mut next);
    }
    let mass: f64 = cur.iter().sum();
    max_mass_drift = max_mass_drift.max((mass - 1.0).abs());

    Ok(ExactDistribution::from_pmf(
        *params,
        cur,
        table.map(Normalizers::from_table),
        max_mass_drift,
    ))
}

impl ExactDistribution {
    fn from_pmf(
        params: ErwParams,
        pmf: Vec<f64>,
        normalizers: Option<Normalizers>,
        max_mass_drift: f64,
    ) -> Self {
        let mut cdf = Vec::with_capacity(pmf.len());
        let mut acc = 0.0;
        for &m in &pmf {
            acc += m;
            cdf.push(acc);
        }
        let mut sf = vec![0.0; pmf.len()];
        let mut acc = 0.0;
        for (j, &m) in pmf.iter().enumerate().rev() {
            acc += m;
            sf[j] = acc;
        }
        ExactDistribution {
            params,
            pmf,
            cdf,
            sf,
            normalizers,
            max_mass_drift,
        }
    }

    pub fn params(&self) -> &ErwParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn normalizers(&self) -> Option<Normalizers> {
        self.normalizers
    }

    /// Largest `|Σ mass - 1|` seen over all layers.
    pub fn max_mass_drift(&self) -> f64 {
        self.max_mass_drift
    }

    /// Masses on `-n, -n+2, .., n`, in that order.
    pub fn masses(&self) -> &[f64] {
        &self.pmf
    }

    /// Attainable values of `S_n` with their masses.
    pub fn support(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let n = self.n() as i64;
        self.pmf
            .iter()
            .enumerate()
            .map(move |(j, &m)| (2 * j as i64 - n, m))
    }

    fn index_of(&self, k: i64) -> Option<usize> {
        let n = self.n() as i64;
        if k.abs() > n || (k - n).rem_euclid(2) != 0 {
            None
        } else {
            Some(((k + n) / 2) as usize)
        }
    }

    /// `P(S_n = k)`; zero off the parity lattice.
    pub fn prob(&self, k: i64) -> f64 {
        self.index_of(k).map_or(0.0, |j| self.pmf[j])
    }

    /// `P(S_n <= t)`.
    pub fn cdf(&self, t: f64) -> f64 {
        let n = self.n() as f64;
        if t < -n {
            return 0.0;
        }
        if t >= n {
            return 1.0;
        }
        // Largest j with 2j - n <= t.
        let j = ((t + n) / 2.0).floor() as usize;
        self.cdf[j.min(self.pmf.len() - 1)]
    }

    /// `P(S_n >= k)` on the raw integer scale.
    pub fn upper_tail_raw(&self, k: i64) -> f64 {
        let n = self.n() as i64;
        if k > n {
            return 0.0;
        }
        if k <= -n {
            return 1.0;
        }
        // Smallest j with 2j - n >= k.
        let j = (k + n + 1).div_euclid(2) as usize;
        self.sf[j]
    }

    fn require_scale(&self) -> Result<f64> {
        self.normalizers
            .map(|s| s.factor())
            .ok_or_else(|| ErwError::domain("distribution has no a_n/v_n normalization (p = 0)"))
    }

    /// `x_k = a_n k / √v_n`.
    pub fn standardized(&self, k: i64) -> Result<f64> {
        Ok(self.require_scale()? * k as f64)
    }

    /// `P(a_n S_n / √v_n >= x)`, atoms at `x` included.
    pub fn tail(&self, x: f64) -> Result<f64> {
        let c = self.require_scale()?;
        Ok(self.upper_tail_scaled(c, x))
    }

    /// `P(a_n S_n / √v_n <= x)`.
    pub fn lower_tail(&self, x: f64) -> Result<f64> {
        let c = self.require_scale()?;
        Ok(self.lower_tail_scaled(c, x))
    }

    /// `P(c S_n >= x)` for a positive factor `c`.
    pub fn upper_tail_scaled(&self, c: f64, x: f64) -> f64 {
        let n = self.n() as i64;
        let idx = partition(self.pmf.len(), |j| c * (2 * j as i64 - n) as f64 >= x);
        if idx == self.pmf.len() {
            0.0
        } else {
            self.sf[idx]
        }
    }

    /// `P(c S_n <= x)` for a positive factor `c`.
    pub fn lower_tail_scaled(&self, c: f64, x: f64) -> f64 {
        let n = self.n() as i64;
        // First index whose point exceeds x.
        let idx = partition(self.pmf.len(), |j| c * (2 * j as i64 - n) as f64 > x);
        if idx == 0 {
            0.0
        } else {
            self.cdf[idx - 1]
        }
    }

    pub fn moments(&self) -> Moments {
        let mean: f64 = self.support().map(|(k, m)| k as f64 * m).sum();
        let variance = self
            .support()
            .map(|(k, m)| {
                let d = k as f64 - mean;
                d * d * m
            })
            .sum();
        Moments { mean, variance }
    }

    /// Writes `k,pmf,cdf,x_k`; `x_k` is left empty without normalizers.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "k,pmf,cdf,x_k")?;
        let factor = self.normalizers.map(|s| s.factor());
        for (j, (k, m)) in self.support().enumerate() {
            let x = factor.map_or(String::new(), |c| fmt_f64(c * k as f64));
            writeln!(w, "{k},{},{},{x}", fmt_f64(m), fmt_f64(self.cdf[j]))?;
        }
        Ok(())
    }
}

/// First index in `0..len` where the monotone predicate turns true.
fn partition(len: usize, pred: impl Fn(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (0, len);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}
