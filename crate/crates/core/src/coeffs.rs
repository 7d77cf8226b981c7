//! Deterministic normalizing sequences of the walk.
//!
//! With `γ_k = 1 + (2p - 1)/k`, the sequence `a_1 = 1`, `a_{k+1} = a_k / γ_k`
//! makes `a_n S_n` a martingale, and `v_n = Σ a_i²` is its variance proxy.
//! The product form is used instead of `Γ(n)Γ(2p)/Γ(n+2p-1)`, which
//! overflows past `n ≈ 170`; log-gamma only backs the cross-checks and the
//! limiting constants.

use std::io::{self, Write};

use serde::Serialize;

use crate::error::{ErwError, Result};
use crate::fmt_f64;
use crate::special::{gamma, ln_gamma};

/// Largest horizon accepted by [`build_coeffs`] unless a larger cap is passed.
pub const DEFAULT_COEFF_CAP: usize = 1_000_000;

/// Behavioural regime of the memory parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `p ∈ (0, 3/4)`, `p ≠ 1/2`.
    Diffusive,
    /// `p = 3/4`.
    Critical,
    /// `p ∈ (3/4, 1]`.
    Superdiffusive,
    /// `p ∈ {0, 1/2}`: the walk reduces to a classical symmetric walk.
    Classical,
}

impl Regime {
    pub fn classify(p: f64) -> Regime {
        if p == 0.0 || p == 0.5 {
            Regime::Classical
        } else if p < 0.75 {
            Regime::Diffusive
        } else if p == 0.75 {
            Regime::Critical
        } else {
            Regime::Superdiffusive
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Diffusive => "diffusive",
            Regime::Critical => "critical",
            Regime::Superdiffusive => "superdiffusive",
            Regime::Classical => "classical",
        }
    }
}

/// Rejects memory parameters outside the normal-approximation theory:
/// `p ∈ (0, 3/4]` with `p ≠ 1/2`.
pub fn require_normal_regime(p: f64) -> Result<Regime> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ErwError::domain(format!("p = {p} must lie in [0, 1]")));
    }
    match Regime::classify(p) {
        r @ (Regime::Diffusive | Regime::Critical) => Ok(r),
        Regime::Classical => Err(ErwError::unsupported(
            p,
            "p in {0, 1/2} is the classical symmetric walk; diagnostics need p in (0, 3/4] \\ {1/2}",
        )),
        Regime::Superdiffusive => Err(ErwError::unsupported(
            p,
            "p > 3/4 has a non-normal limit; diagnostics need p in (0, 3/4] \\ {1/2}",
        )),
    }
}

/// The sequences `γ_k`, `a_k`, `v_k` up to a horizon `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTable {
    p: f64,
    gamma: Vec<f64>,
    a: Vec<f64>,
    v: Vec<f64>,
    regime: Regime,
}

impl CoeffTable {
    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// `γ_1 .. γ_{n-1}`.
    pub fn gammas(&self) -> &[f64] {
        &self.gamma
    }

    /// `a_1 .. a_n`.
    pub fn a_seq(&self) -> &[f64] {
        &self.a
    }

    /// `v_1 .. v_n`.
    pub fn v_seq(&self) -> &[f64] {
        &self.v
    }

    /// `a_k` for `1 <= k <= n`.
    pub fn a(&self, k: usize) -> f64 {
        self.a[k - 1]
    }

    /// `v_k` for `1 <= k <= n`.
    pub fn v(&self, k: usize) -> f64 {
        self.v[k - 1]
    }

    pub fn a_n(&self) -> f64 {
        *self.a.last().expect("table is non-empty")
    }

    pub fn v_n(&self) -> f64 {
        *self.v.last().expect("table is non-empty")
    }

    /// Factor `a_n / √v_n` mapping `S_n` onto the martingale-standardized scale.
    pub fn standard_factor(&self) -> f64 {
        self.a_n() / self.v_n().sqrt()
    }

    /// Writes `k,gamma_k,a_k,v_k`, one row per `k` in `1..=n`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "k,gamma_k,a_k,v_k")?;
        for (i, (a, v)) in self.a.iter().zip(&self.v).enumerate() {
            let k = i + 1;
            let g = 1.0 + (2.0 * self.p - 1.0) / k as f64;
            writeln!(w, "{k},{},{},{}", fmt_f64(g), fmt_f64(*a), fmt_f64(*v))?;
        }
        Ok(())
    }
}

/// [`build_coeffs_capped`] with [`DEFAULT_COEFF_CAP`].
pub fn build_coeffs(p: f64, n: usize) -> Result<CoeffTable> {
    build_coeffs_capped(p, n, DEFAULT_COEFF_CAP)
}

pub fn build_coeffs_capped(p: f64, n: usize, cap: usize) -> Result<CoeffTable> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ErwError::domain(format!("p = {p} must lie in [0, 1]")));
    }
    if n == 0 {
        return Err(ErwError::domain("horizon n must be at least 1"));
    }
    if n > cap {
        return Err(ErwError::ResourceCap {
            what: "n",
            requested: n as u64,
            cap: cap as u64,
        });
    }
    // γ_1 = 2p vanishes at p = 0, so a_2 = 1/γ_1 does not exist.
    if p == 0.0 && n >= 2 {
        return Err(ErwError::domain(
            "p = 0 gives gamma_1 = 0, so a_k is undefined for k >= 2",
        ));
    }

    let drift = 2.0 * p - 1.0;
    let mut gamma = Vec::with_capacity(n.saturating_sub(1));
    let mut a = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);

    let mut a_k = 1.0_f64;
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for k in 1..=n {
        if k > 1 {
            let g = 1.0 + drift / (k - 1) as f64;
            gamma.push(g);
            a_k /= g;
        }
        assert!(a_k.is_finite(), "a_{k} overflowed");
        a.push(a_k);

        // Kahan summation of a_k².
        let y = a_k * a_k - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        v.push(sum);
    }

    Ok(CoeffTable {
        p,
        gamma,
        a,
        v,
        regime: Regime::classify(p),
    })
}

/// `a_n` through the gamma-function ratio, evaluated in log space.
///
/// Only defined for `p > 0`; used as an independent cross-check of the
/// product recursion.
pub fn a_via_gamma_ratio(p: f64, n: usize) -> f64 {
    let n = n as f64;
    (ln_gamma(n) + ln_gamma(2.0 * p) - ln_gamma(n + 2.0 * p - 1.0)).exp()
}

/// How `v_n` grows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "exponent", rename_all = "lowercase")]
pub enum VnScale {
    /// `v_n ~ limit · n^e`.
    Power(f64),
    /// `v_n ~ limit · ln n`.
    Logarithmic,
}

impl VnScale {
    pub fn at(self, n: f64) -> f64 {
        match self {
            VnScale::Power(e) => n.powf(e),
            VnScale::Logarithmic => n.ln(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticConstants {
    /// `lim a_n n^{2p-1} = Γ(2p)`.
    pub an_limit: f64,
    /// `lim v_n / scale(n)`.
    pub vn_limit: f64,
    pub vn_scale: VnScale,
}

pub fn asymptotic_constants(p: f64) -> Result<AsymptoticConstants> {
    if !(p > 0.0 && p <= 0.75) {
        return Err(ErwError::unsupported(
            p,
            "asymptotic constants are defined for p in (0, 3/4]",
        ));
    }
    let an_limit = gamma(2.0 * p);
    if p == 0.75 {
        Ok(AsymptoticConstants {
            an_limit,
            vn_limit: std::f64::consts::FRAC_PI_4,
            vn_scale: VnScale::Logarithmic,
        })
    } else {
        let e = 3.0 - 4.0 * p;
        Ok(AsymptoticConstants {
            an_limit,
            vn_limit: an_limit * an_limit / e,
            vn_scale: VnScale::Power(e),
        })
    }
}

/// `ε_n = 2 max_{i<=n} a_i / √v_n`, the uniform bound on the standardized
/// martingale increments.
pub fn rate_epsilon(table: &CoeffTable) -> f64 {
    let max_a = table.a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    2.0 * max_a / table.v_n().sqrt()
}

/// Constant-free rate shapes for the normal approximations at horizon `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateReference {
    /// Shape of the Berry-Esseen bound.
    pub besseen_rate: f64,
    /// Scale of the x-range over which the Cramér expansion holds.
    pub cramer_range: f64,
    /// Soft upper limit of x for the ratio to stay near one (`cramer_range^{1/3}`).
    pub cramer_x_limit: f64,
    /// Soft upper limit of |k| for the local limit expansion.
    pub llt_k_limit: f64,
    /// Shape of the local-limit sup-distance bound; not available at `p = 3/4`.
    pub llt_sup_rate: Option<f64>,
    /// Shape of `|<M>_n / v_n - 1|`: `1/n` for `p < 1/2`, `n^{-(3-4p)}` on
    /// `(1/2, 3/4)`, `1/ln n` at `3/4`.
    pub qv_rate: f64,
}

pub fn rate_reference(p: f64, n: usize) -> Result<RateReference> {
    let regime = require_normal_regime(p)?;
    if n < 3 {
        return Err(ErwError::domain("rate shapes need n >= 3 (log log n > 0)"));
    }
    let nf = n as f64;
    let ln = nf.ln();
    let r = match regime {
        Regime::Critical => RateReference {
            besseen_rate: ln.ln() / ln.sqrt(),
            cramer_range: ln.sqrt(),
            cramer_x_limit: ln.powf(1.0 / 6.0),
            llt_k_limit: (nf * ln).sqrt(),
            llt_sup_rate: None,
            qv_rate: 1.0 / ln,
        },
        _ if p < 0.5 => RateReference {
            besseen_rate: ln / nf.sqrt(),
            cramer_range: nf.sqrt(),
            cramer_x_limit: nf.powf(1.0 / 6.0),
            llt_k_limit: nf.powf(2.0 / 3.0),
            llt_sup_rate: Some(ln / nf),
            qv_rate: 1.0 / nf,
        },
        _ => {
            let e = (3.0 - 4.0 * p) / 2.0;
            RateReference {
                besseen_rate: ln / nf.powf(e),
                cramer_range: nf.powf(e),
                cramer_x_limit: nf.powf(e / 3.0),
                llt_k_limit: nf.powf((3.0 - 2.0 * p) / 3.0),
                llt_sup_rate: Some(ln / nf.powf(2.0 - 2.0 * p)),
                // Σ v_k/k² converges here, so the deviation is O(1/v_n), not O(1/n).
                qv_rate: nf.powf(-2.0 * e),
            }
        }
    };
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn half_is_identity() {
        let t = build_coeffs(0.5, 50).unwrap();
        assert!(t.a_seq().iter().all(|&a| a == 1.0));
        assert_eq!(t.v_n(), 50.0);
        assert_eq!(t.regime(), Regime::Classical);
    }

    #[test]
    fn three_quarter_small_table() {
        let t = build_coeffs(0.75, 3).unwrap();
        assert_eq!(t.gammas(), &[1.5, 1.25]);
        assert!(close(t.a(2), 2.0 / 3.0, 1e-15));
        assert!(close(t.a(3), 8.0 / 15.0, 1e-15));
        assert!(close(t.v_n(), 389.0 / 225.0, 1e-15));
        // Γ(2)Γ(1.5)/Γ(2.5) = 2/3
        assert!(close(a_via_gamma_ratio(0.75, 2), 2.0 / 3.0, 1e-13));
    }

    #[test]
    fn quarter_small_table() {
        let t = build_coeffs(0.25, 3).unwrap();
        assert_eq!(t.gammas(), &[0.5, 0.75]);
        assert_eq!(t.a(2), 2.0);
        assert!(close(t.a(3), 8.0 / 3.0, 1e-15));
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(build_coeffs(1.5, 10), Err(ErwError::Domain(_))));
        assert!(matches!(build_coeffs(-0.1, 10), Err(ErwError::Domain(_))));
        assert!(matches!(build_coeffs(0.3, 0), Err(ErwError::Domain(_))));
        assert!(matches!(build_coeffs(0.0, 2), Err(ErwError::Domain(_))));
        assert!(matches!(
            build_coeffs_capped(0.3, 11, 10),
            Err(ErwError::ResourceCap { .. })
        ));
    }

    #[test]
    fn degenerate_endpoints() {
        let t = build_coeffs(0.0, 1).unwrap();
        assert_eq!(t.a_seq(), &[1.0]);
        // p = 1: a_k = 1/k
        let t = build_coeffs(1.0, 100).unwrap();
        for k in 1..=100 {
            assert!(close(t.a(k), 1.0 / k as f64, 1e-14));
        }
        assert_eq!(t.regime(), Regime::Superdiffusive);
    }

    #[test]
    fn regimes() {
        assert_eq!(Regime::classify(0.25), Regime::Diffusive);
        assert_eq!(Regime::classify(0.6), Regime::Diffusive);
        assert_eq!(Regime::classify(0.75), Regime::Critical);
        assert_eq!(Regime::classify(0.9), Regime::Superdiffusive);
        assert_eq!(Regime::classify(0.0), Regime::Classical);
        assert_eq!(Regime::classify(0.5), Regime::Classical);
        assert!(require_normal_regime(0.5).is_err());
        assert!(matches!(
            require_normal_regime(0.8),
            Err(ErwError::UnsupportedRegime { .. })
        ));
    }

    #[test]
    fn constants() {
        let c = asymptotic_constants(0.5).unwrap();
        assert!(close(c.an_limit, 1.0, 1e-15));
        assert!(close(c.vn_limit, 1.0, 1e-15));
        let c = asymptotic_constants(0.75).unwrap();
        assert_eq!(c.vn_scale, VnScale::Logarithmic);
        assert!(close(c.vn_limit, crate::special::gamma(1.5).powi(2), 1e-15));
        let c = asymptotic_constants(0.25).unwrap();
        assert!(close(c.vn_limit, std::f64::consts::FRAC_PI_2, 1e-13));
        assert_eq!(c.vn_scale, VnScale::Power(2.0));
        assert!(asymptotic_constants(0.0).is_err());
        assert!(asymptotic_constants(0.8).is_err());
    }

    #[test]
    fn epsilon_values() {
        let t = build_coeffs(0.5, 100).unwrap();
        assert!(close(rate_epsilon(&t), 0.2, 1e-15));
        let t = build_coeffs(0.75, 5000).unwrap();
        assert!(close(rate_epsilon(&t), 2.0 / t.v_n().sqrt(), 1e-15));
        let t = build_coeffs(0.25, 5000).unwrap();
        assert!(close(
            rate_epsilon(&t),
            2.0 * t.a_n() / t.v_n().sqrt(),
            1e-15
        ));
    }

    #[test]
    fn rate_shapes() {
        let r = rate_reference(0.25, 10_000).unwrap();
        assert!(close(r.besseen_rate, 10_000f64.ln() / 100.0, 1e-14));
        assert!((r.besseen_rate - 0.0921).abs() < 1e-4);
        let r = rate_reference(0.75, 10_000).unwrap();
        assert!((r.besseen_rate - 0.7317).abs() < 1e-4);
        let r = rate_reference(0.6, 10_000).unwrap();
        assert!((r.besseen_rate - 0.5811).abs() < 1e-4);
        assert!(r.llt_sup_rate.is_some());
        assert!(rate_reference(0.5, 100).is_err());
        assert!(rate_reference(0.25, 2).is_err());
    }

    #[test]
    fn csv_header_and_rows() {
        let t = build_coeffs(0.5, 3).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = s.lines().collect();
        assert_eq!(lines[0], "k,gamma_k,a_k,v_k");
        assert_eq!(lines[3], "3,1.0,1.0,3.0");
    }
}
