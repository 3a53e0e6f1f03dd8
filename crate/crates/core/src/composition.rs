//! End-to-end SNR algebra: multi-user selection, per-hop FSO/RF selection,
//! AF relaying on the first segment and the DF multi-hop outage chain.

use std::fmt;
use std::str::FromStr;

use crate::channel::{ne_pe_snr_ccdf_direct, ne_pe_snr_cdf_direct, ne_pe_snr_pdf_direct, LinkParams};
use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate_split, QuadConfig};

/// First-segment AF gain. `AdaptiveGain` (G² = 1/(h₁² + σ²)) needs channel
/// knowledge and is aliased `known-csi`; `FixedGain` (G² = 1/(Cσ²)) is
/// aliased `unknown-csi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GainMode {
    AdaptiveGain,
    FixedGain,
}

impl GainMode {
    pub const ALL: [GainMode; 2] = [GainMode::AdaptiveGain, GainMode::FixedGain];

    pub fn alias(self) -> &'static str {
        match self {
            GainMode::AdaptiveGain => "known-csi",
            GainMode::FixedGain => "unknown-csi",
        }
    }
}

impl fmt::Display for GainMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GainMode::AdaptiveGain => "adaptive",
            GainMode::FixedGain => "fixed",
        })
    }
}

impl FromStr for GainMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "adaptive" | "adaptive-gain" | "known-csi" => Ok(GainMode::AdaptiveGain),
            "fixed" | "fixed-gain" | "unknown-csi" => Ok(GainMode::FixedGain),
            other => Err(invalid("mode", format!("unknown gain mode '{other}'"))),
        }
    }
}

/// N users on the first segment and M relays; the second part has M-1
/// hybrid FSO/RF hops.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Topology {
    pub n_users: u32,
    pub m_relays: u32,
    pub first_segment_mode: GainMode,
}

impl Topology {
    pub fn new(n_users: u32, m_relays: u32, first_segment_mode: GainMode) -> Result<Self> {
        let t = Self {
            n_users,
            m_relays,
            first_segment_mode,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_users == 0 {
            return Err(invalid("n_users", "must be at least 1"));
        }
        if self.m_relays == 0 {
            return Err(invalid("m_relays", "must be at least 1"));
        }
        Ok(())
    }

    pub fn hybrid_hops(&self) -> u32 {
        self.m_relays - 1
    }
}

fn check_gamma(func: &'static str, gamma: f64) -> Result<()> {
    if gamma >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            func,
            detail: format!("SNR must be non-negative, got {gamma}"),
        })
    }
}

fn check_users(n: u32) -> Result<()> {
    if n == 0 {
        Err(invalid("n_users", "must be at least 1"))
    } else {
        Ok(())
    }
}

/// (1 - e^{-γ/γ̄})^N, the best of N i.i.d. Rayleigh users.
pub fn multiuser_select_cdf(gamma: f64, n: u32, gamma_bar_rf: f64) -> Result<f64> {
    check_gamma("multiuser_select_cdf", gamma)?;
    check_users(n)?;
    Ok((-(-gamma / gamma_bar_rf).exp_m1()).powi(n as i32))
}

/// 1 - (1 - e^{-γ/γ̄})^N, accurate when the CDF is close to 1.
pub(crate) fn multiuser_select_ccdf(gamma: f64, n: u32, gamma_bar_rf: f64) -> f64 {
    let e = (-gamma / gamma_bar_rf).exp();
    -(n as f64 * (-e).ln_1p()).exp_m1()
}

/// Σ_k C(N-1,k)(-1)^k (N/γ̄) e^{-(k+1)γ/γ̄}, evaluated as
/// (N/γ̄) e^{-γ/γ̄}(1 - e^{-γ/γ̄})^{N-1}.
pub fn multiuser_select_pdf(gamma: f64, n: u32, gamma_bar_rf: f64) -> Result<f64> {
    check_gamma("multiuser_select_pdf", gamma)?;
    check_users(n)?;
    let e = (-gamma / gamma_bar_rf).exp();
    Ok(n as f64 / gamma_bar_rf * e * (-(-gamma / gamma_bar_rf).exp_m1()).powi(n as i32 - 1))
}

/// F_FSO(γ)·F_RF(γ): the hop fails only if both branches do.
pub fn hybrid_hop_cdf(gamma: f64, params: &LinkParams) -> Result<f64> {
    check_gamma("hybrid_hop_cdf", gamma)?;
    let rf = -(-gamma / params.gamma_bar_rf).exp_m1();
    Ok(ne_pe_snr_cdf_direct(gamma, params)? * rf)
}

/// γ₁γ₂/(γ₁ + γ₂ + 1).
pub fn af_adaptive_snr(g1: f64, g2: f64) -> f64 {
    let d = g1 + g2 + 1.0;
    if d.is_infinite() {
        return g1.min(g2);
    }
    g1 * g2 / d
}

/// γ₁γ₂/(C + γ₂).
pub fn af_fixed_snr(g1: f64, g2: f64, c: f64) -> f64 {
    if g2.is_infinite() {
        return g1;
    }
    g1 * g2 / (c + g2)
}

/// CDF of min(γ₁, γ₂): 1 - (1 - F_{γ₁})(1 - F_{γ₂}) with γ₁ the selected
/// RF user SNR and γ₂ the FSO SNR. This is the high-SNR form of the
/// adaptive-gain first segment.
pub fn second_relay_cdf_adaptive(gamma: f64, n: u32, params: &LinkParams) -> Result<f64> {
    check_gamma("second_relay_cdf_adaptive", gamma)?;
    check_users(n)?;
    let c1 = multiuser_select_ccdf(gamma, n, params.gamma_bar_rf);
    let c2 = ne_pe_snr_ccdf_direct(gamma, params)?;
    Ok((1.0 - c1 * c2).clamp(0.0, 1.0))
}

fn quad_cfg() -> QuadConfig {
    QuadConfig {
        abs_tol: 1e-14,
        rel_tol: 1e-12,
        max_intervals: 4000,
    }
}

/// CDF of the exact adaptive-gain SNR γ₁γ₂/(γ₁+γ₂+1), by quadrature of
/// 1 - F = ∫₀^∞ f₂(γ+x) [1 - F₁(γ(γ+x+1)/x)] dx.
pub fn second_relay_cdf_adaptive_exact(gamma: f64, n: u32, params: &LinkParams) -> Result<f64> {
    check_gamma("second_relay_cdf_adaptive_exact", gamma)?;
    check_users(n)?;
    params.validate()?;
    if gamma == 0.0 {
        return Ok(0.0);
    }
    let scale = params.fso_scale();
    let integrand = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        let x = scale * u;
        let f2 = ne_pe_snr_pdf_direct(gamma + x, params).unwrap_or(f64::NAN);
        let threshold = gamma * (gamma + x + 1.0) / x;
        scale * f2 * multiuser_select_ccdf(threshold, n, params.gamma_bar_rf)
    };
    let survive = integrate_split(integrand, 0.0, &[1e-4, 1e-2, 0.1, 1.0, 4.0], quad_cfg())
        .require("exact adaptive-gain CDF")?;
    Ok((1.0 - survive).clamp(0.0, 1.0))
}

/// Fixed-gain second-relay CDF in closed form:
/// 1 - Σ_k C(N-1,k)(-1)^k N/(k+1) e^{-(k+1)γ/γ̄_RF}
///     × [1 - ξ²/(2√π) G^{5,2}_{4,7}(Y_k | 1, 1/2, 1+ξ²/2, (1+ξ²)/2;
///                                       1, (1+ξ²)/2, ξ²/2, 1, 1/2, 1/2, 0)]
/// with Y_k = (k+1) q² C γ / (4 ḡ γ̄_RF).
pub fn second_relay_cdf_fixed(gamma: f64, n: u32, params: &LinkParams) -> Result<f64> {
    check_gamma("second_relay_cdf_fixed", gamma)?;
    check_users(n)?;
    params.validate()?;
    if gamma == 0.0 {
        return Ok(0.0);
    }
    let mut survive = 0.0;
    for k in 0..n {
        let w = crate::special::binomial(n - 1, k) * sign(k) * n as f64 / (k + 1) as f64;
        survive += w * fixed_gain_survival_factor(gamma, k + 1, params)?;
    }
    Ok((1.0 - survive).clamp(0.0, 1.0))
}

/// e^{-jγ/γ̄_RF}[1 - ξ²/(2√π) G^{5,2}_{4,7}(Y)] for j = k+1.
pub(crate) fn fixed_gain_survival_factor(gamma: f64, j: u32, params: &LinkParams) -> Result<f64> {
    let s = params.xi_sq();
    let q = params.rate_ratio();
    let y = j as f64 * q * q * params.c_gain * gamma / (4.0 * params.fso_scale() * params.gamma_bar_rf);
    let g = crate::special::meijer_g(&fixed_gain_kernel(s)?, y)?;
    let bracket = 1.0 - s / (2.0 * std::f64::consts::PI.sqrt()) * g;
    Ok((-(j as f64) * gamma / params.gamma_bar_rf).exp() * bracket)
}

pub(crate) fn fixed_gain_lower_params(s: f64) -> Vec<f64> {
    vec![1.0, (1.0 + s) / 2.0, s / 2.0, 1.0, 0.5, 0.5, 0.0]
}

fn fixed_gain_kernel(s: f64) -> Result<crate::special::MeijerParams> {
    crate::special::MeijerParams::new(
        5,
        2,
        vec![1.0, 0.5, 1.0 + s / 2.0, (1.0 + s) / 2.0],
        fixed_gain_lower_params(s),
    )
}

pub(crate) fn sign(k: u32) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Fixed-gain second-relay CDF by quadrature of
/// 1 - F = ∫₀^∞ f₁(x+γ) [1 - F₂(γC/x)] dx.
pub fn second_relay_cdf_fixed_numeric(gamma: f64, n: u32, params: &LinkParams) -> Result<f64> {
    check_gamma("second_relay_cdf_fixed_numeric", gamma)?;
    check_users(n)?;
    params.validate()?;
    if gamma == 0.0 {
        return Ok(0.0);
    }
    let r = params.gamma_bar_rf;
    let c = params.c_gain;
    let integrand = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        let x = r * u;
        let f1 = n as f64 / r * (-(x + gamma) / r).exp() * (-(-(x + gamma) / r).exp_m1()).powi(n as i32 - 1);
        r * f1 * ne_pe_snr_ccdf_direct(gamma * c / x, params).unwrap_or(f64::NAN)
    };
    let survive = integrate_split(integrand, 0.0, &[1e-4, 1e-2, 0.1, 1.0, 4.0], quad_cfg())
        .require("fixed-gain CDF")?;
    Ok((1.0 - survive).clamp(0.0, 1.0))
}

/// Which first-segment law a composition uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FirstSegment {
    /// min(γ₁, γ₂) for adaptive gain, quadrature for fixed gain.
    Analysis,
    /// Exact γ₁γ₂/(γ₁+γ₂+1) for adaptive gain, quadrature for fixed gain.
    Exact,
}

/// CDF of the first segment's output SNR for `topology` at `gamma`.
pub fn second_relay_cdf(gamma: f64, topology: &Topology, params: &LinkParams, law: FirstSegment) -> Result<f64> {
    let n = topology.n_users;
    match (topology.first_segment_mode, law) {
        (GainMode::AdaptiveGain, FirstSegment::Analysis) => second_relay_cdf_adaptive(gamma, n, params),
        (GainMode::AdaptiveGain, FirstSegment::Exact) => second_relay_cdf_adaptive_exact(gamma, n, params),
        (GainMode::FixedGain, _) => second_relay_cdf_fixed_numeric(gamma, n, params),
    }
}

/// 1 - (1 - F_2nd)(1 - F_hop)^{M-1} at threshold `gamma`.
pub fn outage_semianalytic_at(gamma: f64, topology: &Topology, params: &LinkParams, law: FirstSegment) -> Result<f64> {
    topology.validate()?;
    params.validate()?;
    check_gamma("outage", gamma)?;
    if gamma == 0.0 {
        return Ok(0.0);
    }
    let first = second_relay_cdf(gamma, topology, params, law)?;
    let hop = hybrid_hop_cdf(gamma, params)?;
    let pass = (1.0 - first) * (1.0 - hop).powi(topology.hybrid_hops() as i32);
    Ok((1.0 - pass).clamp(0.0, 1.0))
}

/// Outage at the configured threshold γ_th, composed from link CDFs.
pub fn end_to_end_outage_semianalytic(topology: &Topology, params: &LinkParams) -> Result<f64> {
    outage_semianalytic_at(params.gamma_th, topology, params, FirstSegment::Analysis)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn af_arithmetic() {
        assert!((af_adaptive_snr(1.0, 1.0) - 1.0 / 3.0).abs() < 1e-16);
        assert_eq!(af_adaptive_snr(5.0, 0.0), 0.0);
        assert!((af_fixed_snr(2.0, 2.0, 1.0) - 4.0 / 3.0).abs() < 1e-16);
        assert_eq!(af_fixed_snr(5.0, 0.0, 1.0), 0.0);
    }

    #[test]
    fn multiuser_reductions() {
        let a = multiuser_select_cdf(3.0, 1, 10.0).unwrap();
        let b = crate::channel::rayleigh_snr_cdf(3.0, 10.0).unwrap();
        assert_eq!(a, b);
        let two = multiuser_select_cdf(10.0, 2, 10.0).unwrap();
        assert!((two - 0.399_576_400_893_728_4).abs() < 1e-15);
        for &g in &[1e-9, 1e-3, 0.5, 7.0, 60.0] {
            let c = multiuser_select_ccdf(g, 3, 10.0);
            let f = multiuser_select_cdf(g, 3, 10.0).unwrap();
            assert!((c + f - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn modes_parse_aliases() {
        assert_eq!("known-csi".parse::<GainMode>().unwrap(), GainMode::AdaptiveGain);
        assert_eq!("unknown-csi".parse::<GainMode>().unwrap(), GainMode::FixedGain);
        assert!("other".parse::<GainMode>().is_err());
    }

    #[test]
    fn fixed_gain_closed_form_matches_quadrature() {
        let p = LinkParams::with_gamma_avg(100.0);
        for n in [1, 2, 4] {
            for &g in &[0.5, 10.0, 200.0] {
                let a = second_relay_cdf_fixed(g, n, &p).unwrap();
                let b = second_relay_cdf_fixed_numeric(g, n, &p).unwrap();
                assert!((a / b - 1.0).abs() < 1e-9, "N={n} γ={g}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn exact_adaptive_lies_above_min_law() {
        let p = LinkParams::with_gamma_avg(100.0);
        for &g in &[1.0, 10.0, 50.0] {
            let min_law = second_relay_cdf_adaptive(g, 2, &p).unwrap();
            let exact = second_relay_cdf_adaptive_exact(g, 2, &p).unwrap();
            assert!(exact >= min_law, "{g}: {exact} < {min_law}");
        }
    }
}
