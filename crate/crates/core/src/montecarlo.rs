//! Reproducible ensemble simulation of terminal positions.
//!
//! Replicates are independent and each owns the stream
//! [`replicate_rng`]`(seed, i)`, so the counts are a pure function of the
//! plan whatever the worker count.

use std::collections::BTreeMap;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::coeffs::CoeffTable;
use crate::error::{ErwError, Result};
use crate::exact::ExactDistribution;
use crate::model::{ErwParams, SamplerKind, TerminalSampler};
use crate::rng::replicate_rng;
use crate::SCHEMA_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationPlan {
    pub params: ErwParams,
    pub reps: u64,
    pub seed: u64,
    pub sampler: SamplerKind,
}

impl SimulationPlan {
    pub fn new(params: ErwParams, reps: u64, seed: u64, sampler: SamplerKind) -> Result<Self> {
        if reps == 0 {
            return Err(ErwError::domain("reps must be at least 1"));
        }
        Ok(SimulationPlan {
            params,
            reps,
            seed,
            sampler,
        })
    }
}

/// Terminal-value counts of a completed run.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub plan: SimulationPlan,
    pub terminal_counts: BTreeMap<i64, u64>,
    pub reps_done: u64,
}

/// Runs on the ambient rayon pool.
pub fn run_ensemble(plan: &SimulationPlan) -> Result<Ensemble> {
    run_ensemble_threads(plan, None)
}

/// Runs on a dedicated pool of `threads` workers (`None` = ambient pool).
pub fn run_ensemble_threads(plan: &SimulationPlan, threads: Option<usize>) -> Result<Ensemble> {
    if plan.reps == 0 {
        return Err(ErwError::domain("reps must be at least 1"));
    }
    let counts = match threads {
        None => simulate_counts(plan),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| ErwError::domain(format!("cannot build worker pool: {e}")))?;
            pool.install(|| simulate_counts(plan))
        }
    };
    Ok(Ensemble {
        plan: *plan,
        terminal_counts: counts,
        reps_done: plan.reps,
    })
}

/// Replicates per scheduling unit.
const BLOCK: u64 = 1024;

fn simulate_counts(plan: &SimulationPlan) -> BTreeMap<i64, u64> {
    let blocks = plan.reps.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .fold(
            || (BTreeMap::new(), TerminalSampler::default()),
            |(mut counts, mut sampler), b| {
                let end = ((b + 1) * BLOCK).min(plan.reps);
                for i in b * BLOCK..end {
                    let mut rng = replicate_rng(plan.seed, i);
                    let s = sampler.sample(plan.sampler, &plan.params, &mut rng);
                    *counts.entry(s).or_insert(0u64) += 1;
                }
                (counts, sampler)
            },
        )
        .map(|(counts, _)| counts)
        .reduce(BTreeMap::new, merge_counts)
}

fn merge_counts(mut a: BTreeMap<i64, u64>, b: BTreeMap<i64, u64>) -> BTreeMap<i64, u64> {
    if a.len() < b.len() {
        return merge_counts(b, a);
    }
    for (k, c) in b {
        *a.entry(k).or_insert(0) += c;
    }
    a
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleSummary {
    pub schema: u32,
    pub p: f64,
    pub q: f64,
    pub n: usize,
    pub reps: u64,
    pub seed: u64,
    pub sampler: SamplerKind,
    pub reps_done: u64,
    pub mean: f64,
    pub variance: f64,
    pub distinct_values: usize,
}

impl Ensemble {
    pub fn n(&self) -> usize {
        self.plan.params.n
    }

    pub fn count(&self, k: i64) -> u64 {
        self.terminal_counts.get(&k).copied().unwrap_or(0)
    }

    /// Empirical `P(S_n <= t)`.
    pub fn cdf(&self, t: f64) -> f64 {
        let below: u64 = self
            .terminal_counts
            .iter()
            .take_while(|(&k, _)| k as f64 <= t)
            .map(|(_, &c)| c)
            .sum();
        below as f64 / self.reps_done as f64
    }

    /// Empirical `P(c S_n >= x)` for a positive factor `c`.
    pub fn upper_tail_scaled(&self, c: f64, x: f64) -> f64 {
        let hits: u64 = self
            .terminal_counts
            .iter()
            .filter(|(&k, _)| c * k as f64 >= x)
            .map(|(_, &c)| c)
            .sum();
        hits as f64 / self.reps_done as f64
    }

    /// Empirical `P(c S_n <= x)` for a positive factor `c`.
    pub fn lower_tail_scaled(&self, c: f64, x: f64) -> f64 {
        let hits: u64 = self
            .terminal_counts
            .iter()
            .filter(|(&k, _)| c * k as f64 <= x)
            .map(|(_, &c)| c)
            .sum();
        hits as f64 / self.reps_done as f64
    }

    /// `sup_t |F_emp(t) - F_exact(t)|`; both are step functions on the lattice.
    pub fn sup_distance_to_exact(&self, exact: &ExactDistribution) -> f64 {
        let mut emp = 0u64;
        let mut f_exact = 0.0;
        let mut worst = 0.0f64;
        for (k, m) in exact.support() {
            emp += self.count(k);
            f_exact += m;
            let f_emp = emp as f64 / self.reps_done as f64;
            worst = worst.max((f_emp - f_exact).abs());
        }
        worst
    }

    pub fn summary(&self) -> EnsembleSummary {
        let r = self.reps_done as f64;
        let mean = self
            .terminal_counts
            .iter()
            .map(|(&k, &c)| k as f64 * c as f64)
            .sum::<f64>()
            / r;
        let variance = self
            .terminal_counts
            .iter()
            .map(|(&k, &c)| (k as f64 - mean).powi(2) * c as f64)
            .sum::<f64>()
            / r;
        EnsembleSummary {
            schema: SCHEMA_VERSION,
            p: self.plan.params.p,
            q: self.plan.params.q,
            n: self.plan.params.n,
            reps: self.plan.reps,
            seed: self.plan.seed,
            sampler: self.plan.sampler,
            reps_done: self.reps_done,
            mean,
            variance,
            distinct_values: self.terminal_counts.len(),
        }
    }

    /// Writes `S_n,count` in increasing `S_n`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "S_n,count")?;
        for (k, c) in &self.terminal_counts {
            writeln!(w, "{k},{c}")?;
        }
        Ok(())
    }
}

/// Two-sample `sup_t |F_a(t) - F_b(t)|`.
pub fn two_sample_sup_distance(a: &Ensemble, b: &Ensemble) -> f64 {
    let keys: std::collections::BTreeSet<i64> = a
        .terminal_counts
        .keys()
        .chain(b.terminal_counts.keys())
        .copied()
        .collect();
    let (mut ca, mut cb) = (0u64, 0u64);
    let mut worst = 0.0f64;
    for k in keys {
        ca += a.count(k);
        cb += b.count(k);
        let d = ca as f64 / a.reps_done as f64 - cb as f64 / b.reps_done as f64;
        worst = worst.max(d.abs());
    }
    worst
}

/// Fraction of replicates with `a_n S_n / √v_n >= x`.
pub fn empirical_tail(ens: &Ensemble, table: &CoeffTable, x: f64) -> Result<f64> {
    if table.n() != ens.n() || table.p() != ens.plan.params.p {
        return Err(ErwError::domain(format!(
            "coefficient table (p = {}, n = {}) does not match ensemble (p = {}, n = {})",
            table.p(),
            table.n(),
            ens.plan.params.p,
            ens.n()
        )));
    }
    Ok(ens.upper_tail_scaled(table.standard_factor(), x))
}
