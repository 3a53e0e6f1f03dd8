//! Closed-form outage and DBPSK bit-error rate, plus the quadrature BER
//! evaluator P_e = ½∫₀^∞ e^{-γ} P_out(γ) dγ used to check them.
//!
//! The BER closed forms expand F_FSO(γ)^t with the fractional power series
//! F = F₀γ^{ξ²/2} + Σ Eₙγ^{(n+1)/2}, integrate term by term against e^{-βγ},
//! and keep the remaining F_FSO (or fixed-gain) factor as a Meijer-G
//! Laplace transform.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;

use crate::channel::{cdf_series_coefficients, ne_pe_snr_cdf, LinkParams};
use crate::composition::{fixed_gain_lower_params, fixed_gain_survival_factor, sign, GainMode, Topology};
use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate, QuadConfig};
use crate::special::{binomial, gamma_fn, ln_gamma, meijer_g, MeijerParams};

/// Default cap on the number of m-blocks in the BER sums.
pub const DEFAULT_N_MAX: usize = 200;
const BLOCK_TOL: f64 = 1e-12;
const QUIET_BLOCKS: usize = 3;

/// Coefficients F₀ and E₀..E_{n_max} of the FSO CDF series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesCoeffs {
    pub f0: f64,
    pub e: Vec<f64>,
    pub n_max: usize,
    pub xi_sq: f64,
}

impl SeriesCoeffs {
    /// F₀γ^{ξ²/2} + Σ Eₙγ^{(n+1)/2}.
    pub fn eval(&self, gamma: f64) -> f64 {
        let root = gamma.sqrt();
        let mut p = root;
        let mut sum = self.f0 * gamma.powf(self.xi_sq / 2.0);
        for en in &self.e {
            sum += en * p;
            p *= root;
        }
        sum
    }
}

pub fn series_coeffs(params: &LinkParams, n_max: usize) -> Result<SeriesCoeffs> {
    let (f0, e) = cdf_series_coefficients(params, n_max)?;
    Ok(SeriesCoeffs {
        f0,
        e,
        n_max,
        xi_sq: params.xi_sq(),
    })
}

/// Coefficients c_m of (Σₙ Eₙγ^{(n+1)/2})^{k₁} = Σ_m c_m γ^{(m+k₁)/2} for
/// m = 0..=n_max, by repeated Cauchy convolution.
pub fn series_power_coeffs(coeffs: &SeriesCoeffs, k1: u32) -> Vec<f64> {
    let len = coeffs.e.len();
    if k1 == 0 {
        return vec![1.0];
    }
    let mut acc = coeffs.e.clone();
    for _ in 1..k1 {
        let mut next = vec![0.0; len];
        for (i, &a) in acc.iter().enumerate() {
            for (j, &b) in coeffs.e.iter().enumerate().take(len - i) {
                next[i + j] += a * b;
            }
        }
        acc = next;
    }
    acc
}

/// One term c·γ^H of the expansion of F_FSO(γ)^t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTerm {
    pub k1: u32,
    pub m: usize,
    pub coefficient: f64,
    /// H = [(t-k₁)ξ² + m + k₁]/2.
    pub exponent_h: f64,
}

/// F^t = Σ_{k₁} C(t,k₁) (F₀γ^{ξ²/2})^{t-k₁} (Σ Eₙγ^{(n+1)/2})^{k₁}.
pub fn power_expansion(coeffs: &SeriesCoeffs, t: u32) -> Vec<PowerTerm> {
    let s = coeffs.xi_sq;
    let mut out = Vec::new();
    for k1 in 0..=t {
        let outer = binomial(t, k1) * coeffs.f0.powi((t - k1) as i32);
        for (m, c) in series_power_coeffs(coeffs, k1).into_iter().enumerate() {
            out.push(PowerTerm {
                k1,
                m,
                coefficient: outer * c,
                exponent_h: ((t - k1) as f64 * s + m as f64 + k1 as f64) / 2.0,
            });
        }
    }
    out
}

/// One term of the outage/BER multi-sum with its Ω weight folded in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionTerm {
    pub k: u32,
    pub t: u32,
    pub u: u32,
    pub k1: u32,
    pub m: usize,
    pub coefficient: f64,
    pub exponent_h: f64,
}

/// (k, t, u) index range and Ω weight for the topology's gain mode.
/// Adaptive: k = 1..=N, Ω₂ = C(N,k)C(M-1,t)C(t,u)(-1)^{k+t+u}.
/// Fixed: k = 0..N, Ω₄ = C(N-1,k)C(M-1,t)C(t,u)(-1)^{k+t+u} N/(k+1).
fn omega_tuples(topology: &Topology) -> Vec<(u32, u32, u32, f64)> {
    let n = topology.n_users;
    let hops = topology.hybrid_hops();
    let ks: Vec<u32> = match topology.first_segment_mode {
        GainMode::AdaptiveGain => (1..=n).collect(),
        GainMode::FixedGain => (0..n).collect(),
    };
    let mut out = Vec::new();
    for &k in &ks {
        for t in 0..=hops {
            for u in 0..=t {
                let base = binomial(hops, t) * binomial(t, u) * sign(k + t + u);
                let w = match topology.first_segment_mode {
                    GainMode::AdaptiveGain => binomial(n, k) * base,
                    GainMode::FixedGain => binomial(n - 1, k) * base * n as f64 / (k + 1) as f64,
                };
                out.push((k, t, u, w));
            }
        }
    }
    out
}

pub fn expansion_terms(topology: &Topology, params: &LinkParams, n_max: usize) -> Result<Vec<ExpansionTerm>> {
    topology.validate()?;
    let coeffs = series_coeffs(params, n_max)?;
    let expansions: Vec<Vec<PowerTerm>> = (0..=topology.hybrid_hops()).map(|t| power_expansion(&coeffs, t)).collect();
    let mut out = Vec::new();
    for (k, t, u, w) in omega_tuples(topology) {
        for p in &expansions[t as usize] {
            out.push(ExpansionTerm {
                k,
                t,
                u,
                k1: p.k1,
                m: p.m,
                coefficient: w * p.coefficient,
                exponent_h: p.exponent_h,
            });
        }
    }
    Ok(out)
}

/// Adaptive-gain outage at γ_th:
/// 1 + Σ Ω₂ e^{-(k+u)γ/γ̄_RF} F^t (1 - F), F the Meijer-G FSO CDF.
pub fn outage_adaptive(topology: &Topology, params: &LinkParams) -> Result<f64> {
    outage_closed_at(params.gamma_th, &with_mode(topology, GainMode::AdaptiveGain), params)
}

/// Fixed-gain outage at γ_th:
/// 1 - Σ Ω₄ e^{-(k+u+1)γ/γ̄_RF}[1 - ξ²/(2√π) G^{5,2}_{4,7}(·)] F^t.
pub fn outage_fixed(topology: &Topology, params: &LinkParams) -> Result<f64> {
    outage_closed_at(params.gamma_th, &with_mode(topology, GainMode::FixedGain), params)
}

fn with_mode(topology: &Topology, mode: GainMode) -> Topology {
    Topology {
        first_segment_mode: mode,
        ..*topology
    }
}

/// Closed-form outage for the topology's mode at threshold `gamma`.
pub fn outage_closed_at(gamma: f64, topology: &Topology, params: &LinkParams) -> Result<f64> {
    topology.validate()?;
    params.validate()?;
    if !(gamma >= 0.0) {
        return Err(invalid("gamma_th", format!("must be non-negative, got {gamma}")));
    }
    if gamma == 0.0 {
        return Ok(0.0);
    }
    let r = params.gamma_bar_rf;
    let f = ne_pe_snr_cdf(gamma, params)?;
    let mut fixed_cache: HashMap<u32, f64> = HashMap::new();
    let mut sum = 0.0;
    for (k, t, u, w) in omega_tuples(topology) {
        let ft = f.powi(t as i32);
        let term = match topology.first_segment_mode {
            GainMode::AdaptiveGain => (-((k + u) as f64) * gamma / r).exp() * ft * (1.0 - f),
            GainMode::FixedGain => {
                let factor = match fixed_cache.get(&k) {
                    Some(v) => *v,
                    None => {
                        let v = fixed_gain_survival_factor(gamma, k + 1, params)?;
                        fixed_cache.insert(k, v);
                        v
                    }
                };
                // the factor carries e^{-(k+1)γ/γ̄_RF}
                factor * (-(u as f64) * gamma / r).exp() * ft
            }
        };
        sum += w * term;
    }
    let p = match topology.first_segment_mode {
        GainMode::AdaptiveGain => 1.0 + sum,
        GainMode::FixedGain => 1.0 - sum,
    };
    Ok(p.clamp(0.0, 1.0))
}

/// Value of a truncated series with its truncation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesEvaluation {
    pub value: f64,
    /// Sum of the magnitudes of the last blocks that met the stopping rule.
    pub truncation_estimate: f64,
    pub blocks: usize,
}

/// ½∫₀^∞ e^{-γ} F(γ) dγ for an outage curve F, absolute tolerance 1e-10.
pub fn ber_quadrature<F: Fn(f64) -> Result<f64>>(outage_curve: F) -> Result<SeriesEvaluation> {
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let integrand = |g: f64| match outage_curve(g) {
        Ok(v) => 0.5 * (-g).exp() * v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    let cfg = QuadConfig {
        abs_tol: 1e-10 / 16.0,
        rel_tol: 1e-10,
        max_intervals: 2000,
    };
    // e^{-γ} < 1e-26 beyond 60, where the remainder is below any tolerance
    let pts = [0.0, 1e-4, 1e-2, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 40.0, 60.0];
    let mut value = 0.0;
    let mut error = 0.0;
    let mut converged = true;
    for w in pts.windows(2) {
        let r = integrate(integrand, w[0], w[1], cfg);
        value += r.value;
        error += r.error;
        converged &= r.converged;
    }
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    if !converged && error > 1e-10 {
        return Err(Error::NoConvergence {
            what: "BER quadrature",
            estimate: value,
            error,
        });
    }
    Ok(SeriesEvaluation {
        value,
        truncation_estimate: error,
        blocks: 0,
    })
}

/// Kernel of the adaptive-gain BER term:
/// ∫₀^∞ e^{-βγ} γ^H F(γ) dγ = ξ² q^{ξ²} ḡ^{-ξ²/2} β^{-α} 2^{-1-ξ²}/√π
///   × G^{4,3}_{5,6}(q²/(4ḡβ) | 1-α, (1-ξ²)/2, (2-ξ²)/2, 1/2, 1;
///                            0, 1/2, (1-ξ²)/2, (2-ξ²)/2, -ξ²/2, (1-ξ²)/2)
/// with α = H + ξ²/2 + 1.
pub fn laplace_fso_cdf(h: f64, beta: f64, params: &LinkParams) -> Result<f64> {
    let s = params.xi_sq();
    let q = params.rate_ratio();
    let g = params.fso_scale();
    let alpha = h + s / 2.0 + 1.0;
    let kernel = MeijerParams::new(
        4,
        3,
        vec![1.0 - alpha, (1.0 - s) / 2.0, (2.0 - s) / 2.0, 0.5, 1.0],
        vec![0.0, 0.5, (1.0 - s) / 2.0, (2.0 - s) / 2.0, -s / 2.0, (1.0 - s) / 2.0],
    )?;
    let gv = meijer_g(&kernel, q * q / (4.0 * g * beta))?;
    let log_pref = s.ln() + s * q.ln() - s / 2.0 * g.ln() - alpha * beta.ln() - (1.0 + s) * 2f64.ln() - 0.5 * PI.ln();
    Ok(log_pref.exp() * gv)
}

/// Kernel of the fixed-gain BER term:
/// ∫₀^∞ e^{-βγ} γ^H [1 - ξ²/(2√π) G^{5,2}_{4,7}(κγ)] dγ
///   = Γ(1+H)/β^{1+H} - ξ²/(2√π) β^{-(1+H)} G^{5,3}_{5,7}(κ/β | -H, 1, 1/2, 1+ξ²/2, (1+ξ²)/2; b)
pub fn laplace_fixed_gain(h: f64, beta: f64, kappa: f64, params: &LinkParams) -> Result<f64> {
    let s = params.xi_sq();
    let kernel = MeijerParams::new(
        5,
        3,
        vec![-h, 1.0, 0.5, 1.0 + s / 2.0, (1.0 + s) / 2.0],
        fixed_gain_lower_params(s),
    )?;
    let gv = meijer_g(&kernel, kappa / beta)?;
    let scale = (-(1.0 + h) * beta.ln()).exp();
    Ok(scale * (gamma_fn(1.0 + h)? - s / (2.0 * PI.sqrt()) * gv))
}

/// Γ(1+H)/β^{1+H}.
fn laplace_power(h: f64, beta: f64) -> f64 {
    (ln_gamma(1.0 + h) - (1.0 + h) * beta.ln()).exp()
}

/// Adaptive-gain DBPSK BER in closed form, summed over m-blocks until
/// three consecutive blocks fall below 1e-12 of the running sum.
pub fn ber_adaptive_closed(topology: &Topology, params: &LinkParams, n_max: usize) -> Result<SeriesEvaluation> {
    ber_closed(&with_mode(topology, GainMode::AdaptiveGain), params, n_max)
}

/// Fixed-gain DBPSK BER in closed form; same truncation rule.
pub fn ber_fixed_closed(topology: &Topology, params: &LinkParams, n_max: usize) -> Result<SeriesEvaluation> {
    ber_closed(&with_mode(topology, GainMode::FixedGain), params, n_max)
}

/// Closed-form BER for the topology's own gain mode.
pub fn ber_closed(topology: &Topology, params: &LinkParams, n_max: usize) -> Result<SeriesEvaluation> {
    topology.validate()?;
    params.validate()?;
    let n_max = n_max.max(QUIET_BLOCKS);
    let coeffs = series_coeffs(params, n_max)?;
    let hops = topology.hybrid_hops();
    let powers: Vec<Vec<f64>> = (0..=hops).map(|k1| series_power_coeffs(&coeffs, k1)).collect();
    let tuples = omega_tuples(topology);
    let s = params.xi_sq();
    let r = params.gamma_bar_rf;
    let q = params.rate_ratio();
    let mode = topology.first_segment_mode;

    // bracket(H, k, u): the γ-integral that multiplies each coefficient
    let mut cache: HashMap<(u64, u32, u32), f64> = HashMap::new();
    let mut bracket = |h: f64, k: u32, u: u32| -> Result<f64> {
        let key = (h.to_bits(), k, u);
        if let Some(v) = cache.get(&key) {
            return Ok(*v);
        }
        let v = match mode {
            GainMode::AdaptiveGain => {
                let beta = 1.0 + (k + u) as f64 / r;
                laplace_power(h, beta) - laplace_fso_cdf(h, beta, params)?
            }
            GainMode::FixedGain => {
                let beta = 1.0 + (k + u + 1) as f64 / r;
                let kappa = (k + 1) as f64 * q * q * params.c_gain / (4.0 * params.fso_scale() * r);
                laplace_fixed_gain(h, beta, kappa, params)?
            }
        };
        cache.insert(key, v);
        Ok(v)
    };

    let mut total = 0.0;
    let mut quiet = 0;
    let mut tail = 0.0;
    let mut blocks = 0;
    for m in 0..=n_max {
        let mut block = 0.0;
        for &(k, t, u, w) in &tuples {
            for k1 in 0..=t {
                let Some(&c) = powers[k1 as usize].get(m) else {
                    continue;
                };
                if c == 0.0 {
                    continue;
                }
                let coef = w * binomial(t, k1) * coeffs.f0.powi((t - k1) as i32) * c;
                let h = ((t - k1) as f64 * s + m as f64 + k1 as f64) / 2.0;
                block += coef * bracket(h, k, u)?;
            }
        }
        total += block;
        blocks = m + 1;
        if block.abs() <= BLOCK_TOL * total.abs() {
            quiet += 1;
            tail += block.abs();
            if quiet == QUIET_BLOCKS {
                break;
            }
        } else {
            quiet = 0;
            tail = 0.0;
        }
    }
    if quiet < QUIET_BLOCKS {
        return Err(Error::NoConvergence {
            what: "closed-form BER series",
            estimate: total,
            error: f64::NAN,
        });
    }
    let value = match mode {
        GainMode::AdaptiveGain => 0.5 * (1.0 + total),
        GainMode::FixedGain => 0.5 * (1.0 - total),
    };
    Ok(SeriesEvaluation {
        value,
        truncation_estimate: 0.5 * tail,
        blocks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composition::{outage_semianalytic_at, FirstSegment};

    #[test]
    fn power_coeffs_base_cases() {
        let c = series_coeffs(&LinkParams::with_gamma_avg(100.0), 20).unwrap();
        assert_eq!(series_power_coeffs(&c, 0), vec![1.0]);
        assert_eq!(series_power_coeffs(&c, 1), c.e);
    }

    #[test]
    fn ber_quadrature_known_cases() {
        let one = ber_quadrature(|_| Ok(1.0)).unwrap();
        assert!((one.value - 0.5).abs() < 1e-12);
        let gb = 10.0;
        let ray = ber_quadrature(|g| Ok(-(-g / gb).exp_m1())).unwrap();
        assert!((ray.value - 1.0 / 22.0).abs() < 1e-10);
        let two = ber_quadrature(|g| Ok((-(-g / gb).exp_m1()).powi(2))).unwrap();
        let expect = 0.5 * (1.0 - 2.0 * gb / (1.0 + gb) + gb / (2.0 + gb));
        assert!((two.value - expect).abs() < 1e-10);
    }

    #[test]
    fn closed_outage_matches_composition() {
        let p = LinkParams::with_gamma_avg(100.0);
        for mode in GainMode::ALL {
            let t = Topology::new(2, 2, mode).unwrap();
            let closed = outage_closed_at(p.gamma_th, &t, &p).unwrap();
            let semi = outage_semianalytic_at(p.gamma_th, &t, &p, FirstSegment::Analysis).unwrap();
            assert!((closed / semi - 1.0).abs() < 1e-8, "{mode}: {closed} vs {semi}");
        }
    }

    #[test]
    fn closed_ber_matches_quadrature() {
        let p = LinkParams::with_gamma_avg(100.0);
        for mode in GainMode::ALL {
            let t = Topology::new(2, 2, mode).unwrap();
            let closed = ber_closed(&t, &p, DEFAULT_N_MAX).unwrap();
            let quad =
                ber_quadrature(|g| outage_semianalytic_at(g, &t, &p, FirstSegment::Analysis)).unwrap();
            let tol = 1e-6f64.max(closed.truncation_estimate);
            assert!((closed.value - quad.value).abs() <= tol, "{mode}: {closed:?} vs {quad:?}");
        }
    }
}
