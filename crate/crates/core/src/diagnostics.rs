//! Normal-approximation diagnostics for exact and simulated laws of `S_n`.
//!
//! Every quantity here is measured, never bounded: the constants in the
//! Berry-Esseen, Cramér and local-limit estimates are unknown, so reports
//! carry the constant-free rate shape from [`rate_reference`] next to each
//! measured value and leave trend judgements to the caller.
//!
//! Quantities with a theory behind them refuse memory parameters outside
//! `(0, 3/4] \ {1/2}` with [`ErwError::UnsupportedRegime`]. The Cramér
//! ratio additionally accepts `p = 1/2` as the classical baseline curve.

use std::collections::BTreeMap;
use std::io::{self, Write};
use std::ops::RangeInclusive;

use serde::Serialize;

use crate::coeffs::{build_coeffs, rate_reference, require_normal_regime, CoeffTable, Regime};
use crate::error::{ErwError, Result};
use crate::exact::{exact_pmf_with, ExactDistribution, ExactOptions};
use crate::fmt_f64;
use crate::model::ErwParams;
use crate::montecarlo::Ensemble;
use crate::special::{normal_cdf, normal_sf};
use crate::SCHEMA_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Exact,
    Montecarlo,
}

/// Scale on which `S_n` is compared with the standard normal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// `a_n S_n / √v_n`.
    #[default]
    Martingale,
    /// `S_n / √(n/(3-4p))` for `p < 3/4`, `S_n / √(n ln n)` at `p = 3/4`.
    Clt,
    /// `S_n / √(n ln n)`.
    Nlogn,
}

impl std::str::FromStr for Normalization {
    type Err = ErwError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "martingale" => Ok(Normalization::Martingale),
            "clt" => Ok(Normalization::Clt),
            "nlogn" => Ok(Normalization::Nlogn),
            other => Err(ErwError::domain(format!(
                "unknown normalization '{other}' (expected martingale, clt or nlogn)"
            ))),
        }
    }
}

impl Normalization {
    /// Positive factor `c` with standardized value `c · S_n`.
    pub fn factor(self, p: f64, n: usize, table: Option<&CoeffTable>) -> Result<f64> {
        let nf = n as f64;
        match self {
            Normalization::Martingale => match table {
                Some(t) => Ok(t.standard_factor()),
                None => Ok(build_coeffs(p, n)?.standard_factor()),
            },
            Normalization::Clt if p < 0.75 => Ok(((3.0 - 4.0 * p) / nf).sqrt()),
            Normalization::Clt if p == 0.75 => nlogn_factor(nf),
            Normalization::Clt => Err(ErwError::unsupported(
                p,
                "no Gaussian scaling exists for p > 3/4",
            )),
            Normalization::Nlogn => nlogn_factor(nf),
        }
    }
}

fn nlogn_factor(n: f64) -> Result<f64> {
    if n < 2.0 {
        return Err(ErwError::domain("S_n/sqrt(n ln n) needs n >= 2"));
    }
    Ok(1.0 / (n * n.ln()).sqrt())
}

/// Where a law came from, echoed into every report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Provenance {
    pub params: Option<ErwParams>,
    pub source: Source,
    pub normalization: Normalization,
    pub seed: Option<u64>,
    pub reps: Option<u64>,
}

/// A discrete law on the real line, atoms sorted by location.
#[derive(Debug, Clone)]
pub struct StandardizedLaw {
    atoms: Vec<(f64, f64)>,
    /// Mass at or below each atom.
    cdf: Vec<f64>,
    /// Mass at or above each atom, summed from the right.
    sf: Vec<f64>,
    provenance: Provenance,
}

impl StandardizedLaw {
    /// Builds a law from `(location, mass)` pairs; masses must be nonnegative.
    pub fn from_atoms(mut atoms: Vec<(f64, f64)>, provenance: Provenance) -> Result<Self> {
        if atoms.is_empty() {
            return Err(ErwError::domain("empty distribution"));
        }
        if atoms
            .iter()
            .any(|&(x, m)| !x.is_finite() || m.is_nan() || m < 0.0)
        {
            return Err(ErwError::domain(
                "atoms need finite locations and nonnegative masses",
            ));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut cdf = Vec::with_capacity(atoms.len());
        let mut acc = 0.0;
        for &(_, m) in &atoms {
            acc += m;
            cdf.push(acc);
        }
        let mut sf = vec![0.0; atoms.len()];
        let mut acc = 0.0;
        for (i, &(_, m)) in atoms.iter().enumerate().rev() {
            acc += m;
            sf[i] = acc;
        }
        Ok(StandardizedLaw {
            atoms,
            cdf,
            sf,
            provenance,
        })
    }

    pub fn from_exact(dist: &ExactDistribution, normalization: Normalization) -> Result<Self> {
        let params = *dist.params();
        let c = match (normalization, dist.normalizers()) {
            (Normalization::Martingale, Some(s)) => s.factor(),
            _ => normalization.factor(params.p, params.n, None)?,
        };
        let atoms = dist.support().map(|(k, m)| (c * k as f64, m)).collect();
        Self::from_atoms(
            atoms,
            Provenance {
                params: Some(params),
                source: Source::Exact,
                normalization,
                seed: None,
                reps: None,
            },
        )
    }

    pub fn from_ensemble(ens: &Ensemble, normalization: Normalization) -> Result<Self> {
        let params = ens.plan.params;
        let c = normalization.factor(params.p, params.n, None)?;
        let r = ens.reps_done as f64;
        let atoms = ens
            .terminal_counts
            .iter()
            .map(|(&k, &cnt)| (c * k as f64, cnt as f64 / r))
            .collect();
        Self::from_atoms(
            atoms,
            Provenance {
                params: Some(params),
                source: Source::Montecarlo,
                normalization,
                seed: Some(ens.plan.seed),
                reps: Some(ens.reps_done),
            },
        )
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// `P(X >= x)`.
    pub fn upper_tail(&self, x: f64) -> f64 {
        let i = self.atoms.partition_point(|a| a.0 < x);
        self.sf.get(i).copied().unwrap_or(0.0)
    }

    /// `P(X <= x)`.
    pub fn lower_tail(&self, x: f64) -> f64 {
        let i = self.atoms.partition_point(|a| a.0 <= x);
        if i == 0 {
            0.0
        } else {
            self.cdf[i - 1]
        }
    }
}

/// `D = sup_t |P(X <= t) - Φ(t)|`, exact for a step distribution function:
/// the supremum sits at an atom, approached from the left or attained.
pub fn besseen_distance(law: &StandardizedLaw) -> Result<f64> {
    let mut below = 0.0;
    let mut worst = 0.0f64;
    for (&(t, _), &after) in law.atoms.iter().zip(&law.cdf) {
        let phi = normal_cdf(t);
        worst = worst.max((after - phi).abs()).max((below - phi).abs());
        below = after;
    }
    if law.cdf.last().is_none_or(|&total| total <= 0.0) {
        return Err(ErwError::domain("distribution carries no mass"));
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportKind {
    Besseen,
    CramerRatio,
    LltRatio,
    LltSup,
    MdpCurve,
}

impl ReportKind {
    fn abscissa(self) -> &'static str {
        match self {
            ReportKind::CramerRatio => "x",
            ReportKind::LltRatio => "k",
            ReportKind::Besseen | ReportKind::LltSup | ReportKind::MdpCurve => "n",
        }
    }
}

/// A measured curve with its provenance.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsReport {
    pub schema: u32,
    pub kind: ReportKind,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Rate shape or reference level for each grid point, when one exists.
    pub rate_reference: Vec<Option<f64>>,
    /// Grid points outside the range where the approximation is expected to hold.
    pub flags: Vec<bool>,
    pub source: Source,
    pub regime: Regime,
    pub provenance: Provenance,
    pub summary: BTreeMap<String, f64>,
}

impl DiagnosticsReport {
    fn new(kind: ReportKind, regime: Regime, provenance: Provenance) -> Self {
        DiagnosticsReport {
            schema: SCHEMA_VERSION,
            kind,
            grid: Vec::new(),
            values: Vec::new(),
            rate_reference: Vec::new(),
            flags: Vec::new(),
            source: provenance.source,
            regime,
            provenance,
            summary: BTreeMap::new(),
        }
    }

    fn push(&mut self, at: f64, value: f64, reference: Option<f64>, flag: bool) {
        self.grid.push(at);
        self.values.push(value);
        self.rate_reference.push(reference);
        self.flags.push(flag);
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Writes `x,value,rate_reference,flag` (first column named `k` or `n`
    /// where appropriate). Missing references are left empty; `flag` is 0/1.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{},value,rate_reference,flag", self.kind.abscissa())?;
        for i in 0..self.len() {
            let at = match self.kind {
                ReportKind::CramerRatio => fmt_f64(self.grid[i]),
                _ => format!("{}", self.grid[i] as i64),
            };
            let reference = self.rate_reference[i].map(fmt_f64).unwrap_or_default();
            writeln!(
                w,
                "{at},{},{reference},{}",
                fmt_f64(self.values[i]),
                u8::from(self.flags[i])
            )?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// Regime check for quantities backed by the normal-approximation theory.
fn gate(params: Option<ErwParams>) -> Result<(ErwParams, Regime)> {
    let params = params.ok_or_else(|| ErwError::domain("law carries no walk parameters"))?;
    let regime = require_normal_regime(params.p)?;
    Ok((params, regime))
}

fn exact_at(p: f64, q: f64, n: usize, opts: &ExactOptions) -> Result<ExactDistribution> {
    let params = ErwParams::new(p, q, n)?;
    let table = build_coeffs(p, n)?;
    exact_pmf_with(&params, Some(&table), opts)
}

/// Exact `D(a_n S_n / √v_n)` along `ngrid`, next to the Berry-Esseen rate shape.
///
/// Summary: `normalized_min`, `normalized_max` and `normalized_spread`
/// (max/min) of `D / rate`, and `monotone` (1 if `D` strictly decreases).
pub fn besseen_trend(
    p: f64,
    q: f64,
    ngrid: &[usize],
    opts: &ExactOptions,
) -> Result<DiagnosticsReport> {
    let regime = require_normal_regime(p)?;
    let mut report = DiagnosticsReport::new(
        ReportKind::Besseen,
        regime,
        Provenance {
            params: Some(ErwParams::new(p, q, *ngrid.last().unwrap_or(&1))?),
            source: Source::Exact,
            normalization: Normalization::Martingale,
            seed: None,
            reps: None,
        },
    );
    for &n in ngrid {
        let dist = exact_at(p, q, n, opts)?;
        let d = besseen_distance(&StandardizedLaw::from_exact(
            &dist,
            Normalization::Martingale,
        )?)?;
        let rate = rate_reference(p, n)?.besseen_rate;
        report.push(n as f64, d, Some(rate), false);
    }
    summarize_normalized(&mut report);
    Ok(report)
}

fn summarize_normalized(report: &mut DiagnosticsReport) {
    let normalized: Vec<f64> = report
        .values
        .iter()
        .zip(&report.rate_reference)
        .filter_map(|(v, r)| r.map(|r| v / r))
        .collect();
    if normalized.is_empty() {
        return;
    }
    let lo = normalized.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = normalized.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    report.summary.insert("normalized_min".into(), lo);
    report.summary.insert("normalized_max".into(), hi);
    report.summary.insert("normalized_spread".into(), hi / lo);
    let monotone = report.values.windows(2).all(|w| w[1] < w[0]);
    report
        .summary
        .insert("monotone".into(), if monotone { 1.0 } else { 0.0 });
}

/// Upper and lower Cramér ratio curves over the same grid.
#[derive(Debug, Clone, Serialize)]
pub struct CramerCurves {
    /// `P(X >= x) / (1 - Φ(x))`.
    pub upper: DiagnosticsReport,
    /// `P(X <= -x) / Φ(-x)`.
    pub lower: DiagnosticsReport,
}

/// Cramér moderate-deviation ratios of a standardized law.
///
/// Points beyond the soft range (`n^{1/6}`, `n^{(3-4p)/6}` or
/// `(ln n)^{1/6}`) are flagged, not rejected. The rate reference column
/// carries the regime's Berry-Esseen shape. An empty tail gives ratio 0.
pub fn cramer_ratio_curve(law: &StandardizedLaw, xgrid: &[f64]) -> Result<CramerCurves> {
    let params = law
        .provenance
        .params
        .ok_or_else(|| ErwError::domain("law carries no walk parameters"))?;
    let (regime, reference) = if params.p == 0.5 {
        // Classical simple walk: the i.i.d. Cramér range applies.
        let n = params.n as f64;
        (Regime::Classical, (n.powf(1.0 / 6.0), None))
    } else {
        let regime = require_normal_regime(params.p)?;
        match rate_reference(params.p, params.n) {
            Ok(r) => (regime, (r.cramer_x_limit, Some(r.besseen_rate))),
            Err(_) => (regime, (f64::INFINITY, None)),
        }
    };
    let (x_limit, rate) = reference;

    let mut upper = DiagnosticsReport::new(ReportKind::CramerRatio, regime, law.provenance);
    let mut lower = DiagnosticsReport::new(ReportKind::CramerRatio, regime, law.provenance);
    for &x in xgrid {
        let gauss = normal_sf(x);
        let flag = x > x_limit;
        upper.push(x, tail_ratio(law.upper_tail(x), gauss), rate, flag);
        lower.push(x, tail_ratio(law.lower_tail(-x), gauss), rate, flag);
    }
    upper.summary.insert("x_limit".into(), x_limit);
    lower.summary.insert("x_limit".into(), x_limit);
    Ok(CramerCurves { upper, lower })
}

fn tail_ratio(tail: f64, gauss: f64) -> f64 {
    // An empty tail is 0 even where the Gaussian tail underflows.
    if tail == 0.0 {
        0.0
    } else {
        tail / gauss
    }
}

/// Gaussian density the local limit theorem compares `P(S_n = k)` with:
/// `a_n / √(2π v_n) · exp(-(a_n k)² / (2 v_n))`.
pub fn llt_density(a_n: f64, v_n: f64, k: i64) -> f64 {
    let x = a_n * k as f64;
    a_n / (2.0 * std::f64::consts::PI * v_n).sqrt() * (-x * x / (2.0 * v_n)).exp()
}

fn llt_inputs(dist: &ExactDistribution) -> Result<(ErwParams, Regime, f64, f64)> {
    let (params, regime) = gate(Some(*dist.params()))?;
    let s = dist
        .normalizers()
        .ok_or_else(|| ErwError::domain("distribution has no a_n/v_n normalization"))?;
    Ok((params, regime, s.a_n, s.v_n))
}

/// Pointwise ratio `r(k) = P(S_n = k) / density(k)` over `krange`.
///
/// Unattainable `k` (wrong parity) give `r(k) = 0`. Points with `|k|` past
/// the regime's soft range are flagged. Summary:
///
/// * `lattice_factor`: median of `r` over attainable `k` with `|x_k| <= 1`,
///   taken over the whole support;
/// * `cv_attainable`: coefficient of variation of `r` over the attainable
///   points of `krange`.
pub fn llt_ratio(
    dist: &ExactDistribution,
    krange: RangeInclusive<i64>,
) -> Result<DiagnosticsReport> {
    let (params, regime, a_n, v_n) = llt_inputs(dist)?;
    let k_limit = rate_reference(params.p, params.n)
        .map(|r| r.llt_k_limit)
        .unwrap_or(f64::INFINITY);
    let mut report = DiagnosticsReport::new(
        ReportKind::LltRatio,
        regime,
        Provenance {
            params: Some(params),
            source: Source::Exact,
            normalization: Normalization::Martingale,
            seed: None,
            reps: None,
        },
    );

    let n = params.n as i64;
    let mut attainable = Vec::new();
    for k in krange {
        let r = dist.prob(k) / llt_density(a_n, v_n, k);
        if k.abs() <= n && (k - n).rem_euclid(2) == 0 {
            attainable.push(r);
        }
        report.push(k as f64, r, None, k.unsigned_abs() as f64 > k_limit);
    }

    let factor = v_n.sqrt() / a_n;
    let mut central: Vec<f64> = dist
        .support()
        .filter(|&(k, _)| (k as f64).abs() <= factor)
        .map(|(k, m)| m / llt_density(a_n, v_n, k))
        .collect();
    if let Some(med) = median(&mut central) {
        report.summary.insert("lattice_factor".into(), med);
    }
    if let Some(cv) = coefficient_of_variation(&attainable) {
        report.summary.insert("cv_attainable".into(), cv);
    }
    report.summary.insert("k_limit".into(), k_limit);
    Ok(report)
}

fn median(xs: &mut [f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    Some(if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    })
}

/// Population coefficient of variation.
pub fn coefficient_of_variation(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    Some(var.sqrt() / mean)
}

/// `L(S_n) = sup_k |P(S_n = k) - density(k)|` over all integers `k`,
/// unattainable ones included (where the probability is zero).
pub fn llt_sup_distance(dist: &ExactDistribution) -> Result<f64> {
    let (params, _, a_n, v_n) = llt_inputs(dist)?;
    let n = params.n as i64;
    // The density is decreasing in |k|; past n only it contributes and its
    // largest value there is at |k| = n + 1.
    let mut worst = llt_density(a_n, v_n, n + 1);
    for k in -n..=n {
        worst = worst.max((dist.prob(k) - llt_density(a_n, v_n, k)).abs());
    }
    Ok(worst)
}

/// Exact `L(S_n)` along `ngrid`, next to the local-limit rate shape (none
/// at `p = 3/4`). Same summary keys as [`besseen_trend`].
pub fn llt_sup_trend(
    p: f64,
    q: f64,
    ngrid: &[usize],
    opts: &ExactOptions,
) -> Result<DiagnosticsReport> {
    let regime = require_normal_regime(p)?;
    let mut report = DiagnosticsReport::new(
        ReportKind::LltSup,
        regime,
        Provenance {
            params: Some(ErwParams::new(p, q, *ngrid.last().unwrap_or(&1))?),
            source: Source::Exact,
            normalization: Normalization::Martingale,
            seed: None,
            reps: None,
        },
    );
    for &n in ngrid {
        let dist = exact_at(p, q, n, opts)?;
        let l = llt_sup_distance(&dist)?;
        let rate = rate_reference(p, n)?.llt_sup_rate;
        report.push(n as f64, l, rate, false);
    }
    summarize_normalized(&mut report);
    Ok(report)
}

/// Speed sequence `b_n` of a moderate deviation curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "beta", rename_all = "snake_case")]
pub enum SpeedSequence {
    /// `b_n = n^β`.
    Power(f64),
    /// `b_n = (ln n)^β`.
    LogPower(f64),
}

impl SpeedSequence {
    pub fn at(self, n: usize) -> f64 {
        let nf = n as f64;
        match self {
            SpeedSequence::Power(b) => nf.powf(b),
            SpeedSequence::LogPower(b) => nf.ln().powf(b),
        }
    }

    /// Checks `b_n → ∞` and `b_n / range_n → 0` for the regime's range
    /// (`√n`, `n^{(3-4p)/2}` or `√(ln n)`).
    pub fn validate(self, p: f64) -> Result<()> {
        require_normal_regime(p)?;
        let ok = match self {
            SpeedSequence::Power(b) if p < 0.5 => b > 0.0 && b < 0.5,
            SpeedSequence::Power(b) if p < 0.75 => b > 0.0 && b < (3.0 - 4.0 * p) / 2.0,
            SpeedSequence::Power(_) => false,
            SpeedSequence::LogPower(b) if p == 0.75 => b > 0.0 && b < 0.5,
            SpeedSequence::LogPower(b) => b > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(ErwError::domain(format!(
                "speed sequence {self:?} does not satisfy b_n -> inf and b_n/range_n -> 0 at p = {p}"
            )))
        }
    }
}

/// Moderate deviation curve `n ↦ b_n⁻² ln P(a_n S_n / (b_n √v_n) >= x)`
/// from exact tails, with reference level `-x²/2`. A zero tail gives `-inf`.
pub fn mdp_curve(
    p: f64,
    q: f64,
    x: f64,
    speed: SpeedSequence,
    ngrid: &[usize],
    opts: &ExactOptions,
) -> Result<DiagnosticsReport> {
    speed.validate(p)?;
    let regime = require_normal_regime(p)?;
    let mut report = DiagnosticsReport::new(
        ReportKind::MdpCurve,
        regime,
        Provenance {
            params: Some(ErwParams::new(p, q, *ngrid.last().unwrap_or(&1))?),
            source: Source::Exact,
            normalization: Normalization::Martingale,
            seed: None,
            reps: None,
        },
    );
    let target = -x * x / 2.0;
    for &n in ngrid {
        let dist = exact_at(p, q, n, opts)?;
        let b = speed.at(n);
        let tail = dist.tail(x * b)?;
        report.push(n as f64, tail.ln() / (b * b), Some(target), false);
    }
    report.summary.insert("x".into(), x);
    report.summary.insert("target".into(), target);
    Ok(report)
}
