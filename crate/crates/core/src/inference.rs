//! Confidence limits for the memory parameter and position intervals.
//!
//! For `p ∈ (0, 3/4)` the event `|S_n| / √(n/(3-4p)) <= z`, with
//! `z = Φ⁻¹(1 - κ/2)`, has probability tending to `1 - κ`; solving it for
//! `p` gives the lower limit `(3 - n (z / S_n)²) / 4`.

use serde::Serialize;

use crate::coeffs::{build_coeffs, require_normal_regime};
use crate::error::{ErwError, Result};
use crate::exact::{exact_pmf_with, ExactOptions};
use crate::model::{ErwParams, SamplerKind};
use crate::montecarlo::{run_ensemble_threads, Ensemble, SimulationPlan};
use crate::special::normal_quantile;
use crate::SCHEMA_VERSION;

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa > 0.0 && kappa < 1.0 {
        Ok(())
    } else {
        Err(ErwError::domain(format!(
            "kappa = {kappa} must lie in (0, 1)"
        )))
    }
}

/// `z = Φ⁻¹(1 - κ/2)`.
pub fn two_sided_quantile(kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    Ok(normal_quantile(1.0 - kappa / 2.0))
}

/// An observed terminal position together with the miscoverage level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfidenceQuery {
    pub n: usize,
    pub s_n: i64,
    pub kappa: f64,
}

impl ConfidenceQuery {
    pub fn new(n: usize, s_n: i64, kappa: f64) -> Result<Self> {
        if n == 0 {
            return Err(ErwError::domain("horizon n must be at least 1"));
        }
        if s_n.unsigned_abs() > n as u64 || (s_n - n as i64).rem_euclid(2) != 0 {
            return Err(ErwError::domain(format!(
                "S_n = {s_n} is not reachable at n = {n}"
            )));
        }
        check_kappa(kappa)?;
        Ok(ConfidenceQuery { n, s_n, kappa })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PLowerEstimate {
    pub schema: u32,
    pub n: usize,
    pub s_n: i64,
    pub kappa: f64,
    pub z: f64,
    /// Raw limit; may fall below 0, in which case it carries no information.
    pub p_lower: f64,
    /// `p_lower` clipped to the diffusive range `[0, 3/4]`.
    pub clamped_hint: f64,
}

fn raw_lower_limit(n: usize, s_n: i64, z: f64) -> f64 {
    let ratio = z / s_n as f64;
    0.25 * (3.0 - n as f64 * ratio * ratio)
}

/// Lower confidence limit `(3 - n (z / S_n)²) / 4` at level `1 - κ`.
pub fn p_lower_limit(query: &ConfidenceQuery) -> Result<PLowerEstimate> {
    let q = ConfidenceQuery::new(query.n, query.s_n, query.kappa)?;
    if q.s_n == 0 {
        return Err(ErwError::UndefinedEstimate(
            "S_n = 0 leaves the lower limit for p undefined".into(),
        ));
    }
    let z = two_sided_quantile(q.kappa)?;
    let p_lower = raw_lower_limit(q.n, q.s_n, z);
    Ok(PLowerEstimate {
        schema: SCHEMA_VERSION,
        n: q.n,
        s_n: q.s_n,
        kappa: q.kappa,
        z,
        p_lower,
        clamped_hint: p_lower.clamp(0.0, 0.75),
    })
}

/// Symmetric interval `±z · scale` for `S_n`, centred at zero (`q = 1/2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositionInterval {
    pub schema: u32,
    pub p: f64,
    pub n: usize,
    pub kappa: f64,
    pub z: f64,
    /// `√(n/(3-4p))`, or `√(n ln n)` at `p = 3/4`.
    pub scale: f64,
    pub lower: f64,
    pub upper: f64,
}

impl PositionInterval {
    pub fn contains(&self, s: i64) -> bool {
        let s = s as f64;
        self.lower <= s && s <= self.upper
    }
}

pub fn position_interval(p: f64, n: usize, kappa: f64) -> Result<PositionInterval> {
    require_normal_regime(p)?;
    if n < 2 {
        return Err(ErwError::domain("position intervals need n >= 2"));
    }
    let z = two_sided_quantile(kappa)?;
    let nf = n as f64;
    let scale = if p == 0.75 {
        (nf * nf.ln()).sqrt()
    } else {
        (nf / (3.0 - 4.0 * p)).sqrt()
    };
    Ok(PositionInterval {
        schema: SCHEMA_VERSION,
        p,
        n,
        kappa,
        z,
        scale,
        lower: -z * scale,
        upper: z * scale,
    })
}

/// Settings of a coverage experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverageSpec {
    pub p_true: f64,
    pub q: f64,
    pub n: usize,
    pub kappa: f64,
    pub reps: u64,
    pub seed: u64,
    pub sampler: SamplerKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverageResult {
    pub schema: u32,
    pub spec: CoverageSpec,
    /// Fraction of replicates with `p_lower <= p_true`; `S_n = 0` counts as a miss.
    pub coverage: f64,
    /// Fraction of replicates with `S_n` inside [`position_interval`];
    /// absent when `p_true = 1/2`.
    pub position_coverage: Option<f64>,
    /// Replicates that ended at `S_n = 0`.
    pub zero_count: u64,
}

/// Exact counterpart of [`CoverageResult`], summed over the exact pmf.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactCoverage {
    pub coverage: f64,
    pub position_coverage: Option<f64>,
    pub zero_mass: f64,
}

fn check_coverage_regime(p_true: f64) -> Result<()> {
    if p_true > 0.0 && p_true < 0.75 {
        Ok(())
    } else {
        Err(ErwError::unsupported(
            p_true,
            "coverage of the lower limit for p needs p in (0, 3/4)",
        ))
    }
}

/// Decision rule shared by the Monte Carlo and exact coverage routes.
struct Rule {
    n: usize,
    z: f64,
    p_true: f64,
    interval: Option<PositionInterval>,
}

impl Rule {
    fn new(p_true: f64, n: usize, kappa: f64) -> Result<Self> {
        check_coverage_regime(p_true)?;
        let z = two_sided_quantile(kappa)?;
        let interval = if p_true == 0.5 {
            None
        } else {
            Some(position_interval(p_true, n, kappa)?)
        };
        Ok(Rule {
            n,
            z,
            p_true,
            interval,
        })
    }

    fn covers(&self, s: i64) -> bool {
        s != 0 && raw_lower_limit(self.n, s, self.z) <= self.p_true
    }
}

/// Simulated coverage of [`p_lower_limit`] (and of [`position_interval`]).
pub fn coverage_experiment(spec: &CoverageSpec, threads: Option<usize>) -> Result<CoverageResult> {
    let rule = Rule::new(spec.p_true, spec.n, spec.kappa)?;
    let params = ErwParams::new(spec.p_true, spec.q, spec.n)?;
    let plan = SimulationPlan::new(params, spec.reps, spec.seed, spec.sampler)?;
    let ens = run_ensemble_threads(&plan, threads)?;
    Ok(coverage_from_ensemble(spec, &rule, &ens))
}

fn coverage_from_ensemble(spec: &CoverageSpec, rule: &Rule, ens: &Ensemble) -> CoverageResult {
    let r = ens.reps_done as f64;
    let mut covered = 0u64;
    let mut inside = 0u64;
    for (&s, &c) in &ens.terminal_counts {
        if rule.covers(s) {
            covered += c;
        }
        if rule.interval.is_some_and(|iv| iv.contains(s)) {
            inside += c;
        }
    }
    CoverageResult {
        schema: SCHEMA_VERSION,
        spec: *spec,
        coverage: covered as f64 / r,
        position_coverage: rule.interval.map(|_| inside as f64 / r),
        zero_count: ens.count(0),
    }
}

/// Coverage computed without simulation from the exact law of `S_n`.
pub fn exact_coverage(
    p_true: f64,
    q: f64,
    n: usize,
    kappa: f64,
    opts: &ExactOptions,
) -> Result<ExactCoverage> {
    let rule = Rule::new(p_true, n, kappa)?;
    let params = ErwParams::new(p_true, q, n)?;
    let table = build_coeffs(p_true, n)?;
    let dist = exact_pmf_with(&params, Some(&table), opts)?;
    let mut coverage = 0.0;
    let mut inside = 0.0;
    for (s, m) in dist.support() {
        if rule.covers(s) {
            coverage += m;
        }
        if rule.interval.is_some_and(|iv| iv.contains(s)) {
            inside += m;
        }
    }
    Ok(ExactCoverage {
        coverage,
        position_coverage: rule.interval.map(|_| inside),
        zero_mass: dist.prob(0),
    })
}
