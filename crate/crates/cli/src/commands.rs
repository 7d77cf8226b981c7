use std::fs::File;
use std::io::BufWriter;

use erw_core::diagnostics::{
    besseen_distance, besseen_trend, cramer_ratio_curve, llt_ratio, llt_sup_trend, mdp_curve,
    DiagnosticsReport, Normalization, SpeedSequence, StandardizedLaw,
};
use erw_core::inference::{
    coverage_experiment, exact_coverage, p_lower_limit, position_interval, ConfidenceQuery,
    CoverageSpec,
};
use erw_core::rng::replicate_rng;
use erw_core::{
    build_coeffs, build_coeffs_capped, exact_pmf_with, fmt_f64, run_ensemble_threads, ErwError,
    ErwParams, ExactDistribution, ExactOptions, Result, SimulationPlan,
};
use serde_json::json;

use crate::args::*;
use crate::config::{parse_int_range, parse_list, parse_real_grid};
use crate::output::Output;

pub struct Env {
    pub threads: Option<usize>,
}

fn io_err(e: std::io::Error) -> ErwError {
    ErwError::domain(format!("i/o error: {e}"))
}

fn csv_of(f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(io_err)?;
    Ok(buf)
}

fn options(c: &ExactControl) -> ExactOptions {
    ExactOptions {
        cap: c.cap,
        allow_over_cap: c.allow_over_cap,
        renormalize: c.renormalize,
    }
}

fn echo_walk(out: &mut Output, w: &WalkArgs) {
    out.set("p", w.p).set("q", w.q).set("n", w.n);
}

fn echo_control(out: &mut Output, c: &ExactControl) {
    out.set("cap", c.cap)
        .set("allow_over_cap", c.allow_over_cap)
        .set("renormalize", c.renormalize);
}

fn exact_dist(p: f64, q: f64, n: usize, c: &ExactControl) -> Result<ExactDistribution> {
    let params = ErwParams::new(p, q, n)?;
    // The table is optional: degenerate p still has an exact law.
    let table = build_coeffs(p, n).ok();
    exact_pmf_with(&params, table.as_ref(), &options(c))
}

pub fn run(cmd: &Command, env: &Env) -> Result<Output> {
    match cmd {
        Command::Coeffs(a) => coeffs(a),
        Command::Exact(a) => exact(a),
        Command::Simulate(a) => simulate(a, env),
        Command::Diag(DiagCommand::Ratio(a)) => ratio(a, env),
        Command::Diag(DiagCommand::Besseen(a)) => besseen(a, env),
        Command::Diag(DiagCommand::Llt(a)) => llt(a),
        Command::Diag(DiagCommand::Mdp(a)) => mdp(a),
        Command::Infer(InferCommand::PLower(a)) => p_lower(a),
        Command::Infer(InferCommand::Position(a)) => position(a),
        Command::Infer(InferCommand::Coverage(a)) => coverage(a, env),
    }
}

fn coeffs(a: &CoeffsArgs) -> Result<Output> {
    let table = build_coeffs_capped(a.p, a.n, a.cap)?;
    let mut out = Output::new("coeffs");
    out.set("p", a.p).set("n", a.n).set("cap", a.cap);
    out.result("regime", table.regime().as_str())
        .result("a_n", table.a_n())
        .result("v_n", table.v_n());
    out.csv = csv_of(|w| table.write_csv(w))?;
    out.data = json!({
        "regime": table.regime(),
        "k": (1..=table.n()).collect::<Vec<_>>(),
        "gamma_k": table.gammas(),
        "a_k": table.a_seq(),
        "v_k": table.v_seq(),
    });
    Ok(out)
}

fn exact(a: &ExactArgs) -> Result<Output> {
    let w = &a.walk;
    let dist = exact_dist(w.p, w.q, w.n, &a.control)?;
    let mut out = Output::new("exact");
    echo_walk(&mut out, w);
    out.set("moments", a.moments);
    echo_control(&mut out, &a.control);
    out.result("max_mass_drift", dist.max_mass_drift());
    let moments = a.moments.then(|| dist.moments());
    if let Some(m) = moments {
        out.result("mean", m.mean).result("variance", m.variance);
    }
    out.csv = csv_of(|buf| dist.write_csv(buf))?;
    let (k, pmf): (Vec<i64>, Vec<f64>) = dist.support().unzip();
    out.data = json!({
        "k": k,
        "pmf": pmf,
        "normalizers": dist.normalizers(),
        "moments": moments,
    });
    Ok(out)
}

fn simulate(a: &SimulateArgs, env: &Env) -> Result<Output> {
    let params = ErwParams::new(a.walk.p, a.walk.q, a.walk.n)?;
    let plan = SimulationPlan::new(params, a.reps, a.seed, a.sampler)?;
    let ens = run_ensemble_threads(&plan, env.threads)?;
    if let Some(path) = &a.emit_path {
        let sample = a
            .sampler
            .sample_path(&params, &mut replicate_rng(a.seed, 0));
        let file = File::create(path).map_err(io_err)?;
        sample.write_csv(BufWriter::new(file)).map_err(io_err)?;
    }
    let mut out = Output::new("simulate");
    echo_walk(&mut out, &a.walk);
    out.set("reps", a.reps)
        .set("seed", a.seed)
        .set("sampler", a.sampler.as_str())
        .set(
            "emit_path",
            a.emit_path.as_ref().map(|p| p.display().to_string()),
        );
    let summary = ens.summary();
    out.result("mean", summary.mean)
        .result("variance", summary.variance)
        .result("distinct_values", summary.distinct_values);
    out.csv = csv_of(|buf| ens.write_csv(buf))?;
    out.data = json!({
        "summary": summary,
        "terminal_counts": ens.terminal_counts.iter().collect::<Vec<_>>(),
    });
    Ok(out)
}

fn mc_plan(p: f64, q: f64, n: usize, mc: &McArgs) -> Result<SimulationPlan> {
    let missing = |flag: &str| ErwError::domain(format!("--source mc requires --{flag}"));
    let reps = mc.reps.ok_or_else(|| missing("reps"))?;
    let seed = mc.seed.ok_or_else(|| missing("seed"))?;
    SimulationPlan::new(ErwParams::new(p, q, n)?, reps, seed, mc.sampler)
}

fn echo_mc(out: &mut Output, source: SourceArg, mc: &McArgs) {
    out.set("source", source.as_str());
    if source == SourceArg::Mc {
        out.set("reps", mc.reps)
            .set("seed", mc.seed)
            .set("sampler", mc.sampler.as_str());
    }
}

fn normalization_name(n: Normalization) -> &'static str {
    match n {
        Normalization::Martingale => "martingale",
        Normalization::Clt => "clt",
        Normalization::Nlogn => "nlogn",
    }
}

fn ratio(a: &RatioArgs, env: &Env) -> Result<Output> {
    let w = &a.walk;
    let grid = parse_real_grid(&a.x_grid)?;
    let law = match a.source {
        SourceArg::Exact => {
            let dist = exact_dist(w.p, w.q, w.n, &a.control)?;
            StandardizedLaw::from_exact(&dist, a.normalization)?
        }
        SourceArg::Mc => {
            let ens = run_ensemble_threads(&mc_plan(w.p, w.q, w.n, &a.mc)?, env.threads)?;
            StandardizedLaw::from_ensemble(&ens, a.normalization)?
        }
    };
    let curves = cramer_ratio_curve(&law, &grid)?;
    let mut out = Output::new("diag ratio");
    echo_walk(&mut out, w);
    out.set("x_grid", a.x_grid.as_str())
        .set("normalization", normalization_name(a.normalization));
    echo_mc(&mut out, a.source, &a.mc);
    if a.source == SourceArg::Exact {
        echo_control(&mut out, &a.control);
    }
    out.result("regime", curves.upper.regime.as_str());
    let (up, lo) = (&curves.upper, &curves.lower);
    out.csv = csv_of(|buf| {
        use std::io::Write;
        writeln!(buf, "x,ratio_upper,ratio_lower,rate_reference,flag")?;
        for i in 0..up.len() {
            let reference = up.rate_reference[i].map(fmt_f64).unwrap_or_default();
            writeln!(
                buf,
                "{},{},{},{reference},{}",
                fmt_f64(up.grid[i]),
                fmt_f64(up.values[i]),
                fmt_f64(lo.values[i]),
                u8::from(up.flags[i])
            )?;
        }
        Ok(())
    })?;
    out.data = json!({ "upper": up.to_json(), "lower": lo.to_json() });
    Ok(out)
}

fn report_output(out: &mut Output, report: &DiagnosticsReport) -> Result<()> {
    out.result("regime", report.regime.as_str());
    for (k, v) in &report.summary {
        out.result(k, *v);
    }
    out.csv = csv_of(|buf| report.write_csv(buf))?;
    out.data = report.to_json();
    Ok(())
}

fn besseen(a: &BesseenArgs, env: &Env) -> Result<Output> {
    let ngrid: Vec<usize> = parse_list(&a.n_grid, "n-grid")?;
    let mut out = Output::new("diag besseen");
    out.set("p", a.p)
        .set("q", a.q)
        .set("n_grid", a.n_grid.as_str());
    echo_mc(&mut out, a.source, &a.mc);
    match a.source {
        SourceArg::Exact => {
            echo_control(&mut out, &a.control);
            let report = besseen_trend(a.p, a.q, &ngrid, &options(&a.control))?;
            report_output(&mut out, &report)?;
        }
        SourceArg::Mc => {
            erw_core::coeffs::require_normal_regime(a.p)?;
            let mut rows = Vec::new();
            for &n in &ngrid {
                let ens = run_ensemble_threads(&mc_plan(a.p, a.q, n, &a.mc)?, env.threads)?;
                let d = besseen_distance(&StandardizedLaw::from_ensemble(
                    &ens,
                    Normalization::Martingale,
                )?)?;
                let rate = erw_core::rate_reference(a.p, n)?.besseen_rate;
                rows.push((n, d, rate));
            }
            out.result("regime", erw_core::Regime::classify(a.p).as_str());
            out.csv = csv_of(|buf| {
                use std::io::Write;
                writeln!(buf, "n,value,rate_reference,flag")?;
                for (n, d, r) in &rows {
                    writeln!(buf, "{n},{},{},0", fmt_f64(*d), fmt_f64(*r))?;
                }
                Ok(())
            })?;
            out.data = json!(rows
                .iter()
                .map(|(n, d, r)| json!({"n": n, "value": d, "rate_reference": r}))
                .collect::<Vec<_>>());
        }
    }
    Ok(out)
}

fn llt(a: &LltArgs) -> Result<Output> {
    erw_core::coeffs::require_normal_regime(a.p)?;
    let mut out = Output::new("diag llt");
    out.set("p", a.p).set("q", a.q);
    if let Some(spec) = &a.n_grid {
        let ngrid: Vec<usize> = parse_list(spec, "n-grid")?;
        out.set("n_grid", spec.as_str());
        echo_control(&mut out, &a.control);
        let report = llt_sup_trend(a.p, a.q, &ngrid, &options(&a.control))?;
        report_output(&mut out, &report)?;
        return Ok(out);
    }
    let n =
        a.n.ok_or_else(|| ErwError::domain("diag llt needs --n (or --n-grid)"))?;
    let (lo, hi) = match &a.k_range {
        Some(spec) => parse_int_range(spec)?,
        None => {
            let r = (n as f64).powf(0.55).floor() as i64;
            (-r, r)
        }
    };
    out.set("n", n).set("k_range", format!("{lo}:{hi}"));
    echo_control(&mut out, &a.control);
    let dist = exact_dist(a.p, a.q, n, &a.control)?;
    let report = llt_ratio(&dist, lo..=hi)?;
    report_output(&mut out, &report)?;
    Ok(out)
}

fn mdp(a: &MdpArgs) -> Result<Output> {
    let ngrid: Vec<usize> = parse_list(&a.n_grid, "n-grid")?;
    let speed = match a.speed {
        SpeedArg::Power => SpeedSequence::Power(a.beta),
        SpeedArg::LogPower => SpeedSequence::LogPower(a.beta),
    };
    let mut out = Output::new("diag mdp");
    out.set("p", a.p)
        .set("q", a.q)
        .set("x", a.x)
        .set("beta", a.beta)
        .set(
            "speed",
            match a.speed {
                SpeedArg::Power => "power",
                SpeedArg::LogPower => "log-power",
            },
        )
        .set("n_grid", a.n_grid.as_str());
    echo_control(&mut out, &a.control);
    let report = mdp_curve(a.p, a.q, a.x, speed, &ngrid, &options(&a.control))?;
    report_output(&mut out, &report)?;
    Ok(out)
}

fn p_lower(a: &PLowerArgs) -> Result<Output> {
    let est = p_lower_limit(&ConfidenceQuery::new(a.n, a.s, a.kappa)?)?;
    let mut out = Output::new("infer p-lower");
    out.set("n", a.n).set("s", a.s).set("kappa", a.kappa);
    out.csv = csv_of(|buf| {
        use std::io::Write;
        writeln!(buf, "n,s_n,kappa,z,p_lower,clamped_hint")?;
        writeln!(
            buf,
            "{},{},{},{},{},{}",
            est.n,
            est.s_n,
            fmt_f64(est.kappa),
            fmt_f64(est.z),
            fmt_f64(est.p_lower),
            fmt_f64(est.clamped_hint)
        )
    })?;
    out.data = json!(est);
    Ok(out)
}

fn position(a: &PositionArgs) -> Result<Output> {
    let iv = position_interval(a.p, a.n, a.kappa)?;
    let mut out = Output::new("infer position");
    out.set("p", a.p).set("n", a.n).set("kappa", a.kappa);
    out.csv = csv_of(|buf| {
        use std::io::Write;
        writeln!(buf, "p,n,kappa,z,scale,lower,upper")?;
        writeln!(
            buf,
            "{},{},{},{},{},{},{}",
            fmt_f64(iv.p),
            iv.n,
            fmt_f64(iv.kappa),
            fmt_f64(iv.z),
            fmt_f64(iv.scale),
            fmt_f64(iv.lower),
            fmt_f64(iv.upper)
        )
    })?;
    out.data = json!(iv);
    Ok(out)
}

fn coverage(a: &CoverageArgs, env: &Env) -> Result<Output> {
    let kappas: Vec<f64> = parse_list(&a.kappa, "kappa")?;
    let w = &a.walk;
    let mut out = Output::new("infer coverage");
    echo_walk(&mut out, w);
    out.set("kappa", a.kappa.as_str())
        .set("reps", a.reps)
        .set("seed", a.seed)
        .set("sampler", a.sampler.as_str())
        .set("exact", a.exact);
    if a.exact {
        echo_control(&mut out, &a.control);
    }
    let mut rows = Vec::new();
    let mut csv = String::from("kappa,n,p_true,coverage,reps,seed,zero_count,position_coverage");
    if a.exact {
        csv.push_str(",exact_coverage,exact_position_coverage,exact_zero_mass");
    }
    csv.push('\n');
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    for &kappa in &kappas {
        let spec = CoverageSpec {
            p_true: w.p,
            q: w.q,
            n: w.n,
            kappa,
            reps: a.reps,
            seed: a.seed,
            sampler: a.sampler,
        };
        let mc = coverage_experiment(&spec, env.threads)?;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}",
            fmt_f64(kappa),
            w.n,
            fmt_f64(w.p),
            fmt_f64(mc.coverage),
            a.reps,
            a.seed,
            mc.zero_count,
            opt(mc.position_coverage)
        ));
        let ex = if a.exact {
            let ex = exact_coverage(w.p, w.q, w.n, kappa, &options(&a.control))?;
            csv.push_str(&format!(
                ",{},{},{}",
                fmt_f64(ex.coverage),
                opt(ex.position_coverage),
                fmt_f64(ex.zero_mass)
            ));
            Some(ex)
        } else {
            None
        };
        csv.push('\n');
        rows.push(json!({ "monte_carlo": mc, "exact": ex }));
    }
    out.csv = csv.into_bytes();
    out.data = json!(rows);
    Ok(out)
}
