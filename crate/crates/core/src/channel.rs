//! Link statistics: Rayleigh-faded RF SNR, and FSO SNR under
//! negative-exponential turbulence with pointing error.
//!
//! FSO notation used throughout: s = ξ², q = λ/A₀, ḡ = η²γ̄_FSO and
//! z = q√(γ/ḡ). The irradiance is I = h_a·h_p with h_a ~ Exp(λ) and
//! f(h_p) = ξ² h_p^{ξ²-1} / A₀^{ξ²} on [0, A₀]; the SNR is γ = ḡ I².

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Error, Result};
use crate::special::{gamma_fn, gamma_upper, meijer_g, MeijerParams, SeriesSum};

/// ξ² closer than this to 1, 2 or 3 is rejected.
pub const XI_SQ_GUARD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    /// Mean RF SNR (linear).
    pub gamma_bar_rf: f64,
    /// Mean electrical FSO SNR (linear).
    pub gamma_bar_fso: f64,
    /// Turbulence rate; the variance is 1/λ².
    pub lambda: f64,
    /// Pointing-error aperture constant, in (0, 1].
    pub a0: f64,
    /// Pointing-error severity (beam radius to jitter ratio).
    pub xi: f64,
    /// Optical-to-electrical conversion efficiency.
    pub eta: f64,
    /// Fixed-gain relay constant C.
    pub c_gain: f64,
    /// Outage threshold (linear).
    pub gamma_th: f64,
}

impl Default for LinkParams {
    fn default() -> Self {
        Self {
            gamma_bar_rf: 100.0,
            gamma_bar_fso: 100.0,
            lambda: 1.0,
            a0: 1.0,
            xi: 1.45,
            eta: 1.0,
            c_gain: 1.0,
            gamma_th: 10.0,
        }
    }
}

impl LinkParams {
    /// Default parameters with both links at mean SNR `gamma_avg`.
    pub fn with_gamma_avg(gamma_avg: f64) -> Self {
        Self {
            gamma_bar_rf: gamma_avg,
            gamma_bar_fso: gamma_avg,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gamma_bar_rf", self.gamma_bar_rf),
            ("gamma_bar_fso", self.gamma_bar_fso),
            ("lambda", self.lambda),
            ("a0", self.a0),
            ("xi", self.xi),
            ("eta", self.eta),
            ("c_gain", self.c_gain),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        if self.a0 > 1.0 {
            return Err(invalid("a0", format!("must not exceed 1, got {}", self.a0)));
        }
        if !(self.gamma_th >= 0.0 && self.gamma_th.is_finite()) {
            return Err(invalid("gamma_th", format!("must be non-negative, got {}", self.gamma_th)));
        }
        check_xi(self.xi)
    }

    pub fn xi_sq(&self) -> f64 {
        self.xi * self.xi
    }

    /// q = λ/A₀.
    pub fn rate_ratio(&self) -> f64 {
        self.lambda / self.a0
    }

    /// ḡ = η²γ̄_FSO, the scale of γ = ḡ I².
    pub fn fso_scale(&self) -> f64 {
        self.eta * self.eta * self.gamma_bar_fso
    }

    pub fn turbulence_variance(&self) -> f64 {
        1.0 / (self.lambda * self.lambda)
    }

    /// Prefactor W of the FSO SNR density W γ^{ξ²/2-1} G^{2,0}_{1,2}(z | 1; 0, 1-ξ²).
    pub fn w_coefficient(&self) -> f64 {
        let s = self.xi_sq();
        s * self.rate_ratio().powf(s) / (2.0 * self.fso_scale().powf(s / 2.0))
    }

    /// z = q√(γ/ḡ).
    fn z_of(&self, gamma: f64) -> f64 {
        self.rate_ratio() * (gamma / self.fso_scale()).sqrt()
    }
}

/// Rejects ξ ≤ 0 and ξ² near the integer singularities 1, 2, 3.
pub fn check_xi(xi: f64) -> Result<()> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(invalid("xi", format!("must be positive and finite, got {xi}")));
    }
    let s = xi * xi;
    for k in [1.0, 2.0, 3.0] {
        if (s - k).abs() <= XI_SQ_GUARD {
            return Err(invalid("xi", format!("xi^2 = {s} is within {XI_SQ_GUARD} of the singular value {k}")));
        }
    }
    Ok(())
}

/// A₀ = erf(v)² with v = √π R / (√2 w_z), from the receiver aperture
/// radius R and beam width w_z at the receiver.
pub fn a0_from_geometry(aperture_radius: f64, beam_width: f64) -> Result<f64> {
    if !(aperture_radius > 0.0 && beam_width > 0.0) {
        return Err(invalid("geometry", "aperture radius and beam width must be positive"));
    }
    let v = std::f64::consts::PI.sqrt() * aperture_radius / (2f64.sqrt() * beam_width);
    // erf(v) = 1 - Γ(1/2, v²)/√π
    let erf = 1.0 - gamma_upper(0.5, v * v)? / std::f64::consts::PI.sqrt();
    Ok(erf * erf)
}

fn check_snr(func: &'static str, gamma: f64) -> Result<()> {
    if gamma >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            func,
            detail: format!("SNR must be non-negative, got {gamma}"),
        })
    }
}

/// 1 - e^{-γ/γ̄}.
pub fn rayleigh_snr_cdf(gamma: f64, gamma_bar: f64) -> Result<f64> {
    check_snr("rayleigh_snr_cdf", gamma)?;
    check_mean("rayleigh_snr_cdf", gamma_bar)?;
    Ok(-(-gamma / gamma_bar).exp_m1())
}

pub fn rayleigh_snr_pdf(gamma: f64, gamma_bar: f64) -> Result<f64> {
    check_snr("rayleigh_snr_pdf", gamma)?;
    check_mean("rayleigh_snr_pdf", gamma_bar)?;
    Ok((-gamma / gamma_bar).exp() / gamma_bar)
}

fn check_mean(func: &'static str, gamma_bar: f64) -> Result<()> {
    if gamma_bar > 0.0 && gamma_bar.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            func,
            detail: format!("mean SNR must be positive, got {gamma_bar}"),
        })
    }
}

/// Density of the combined gain h = h_a·h_p:
/// ξ² q^{ξ²} h^{ξ²-1} Γ(1-ξ², q h).
pub fn ne_pe_joint_pdf(h: f64, params: &LinkParams) -> Result<f64> {
    params.validate()?;
    if !(h >= 0.0) {
        return Err(Error::Domain {
            func: "ne_pe_joint_pdf",
            detail: format!("gain must be non-negative, got {h}"),
        });
    }
    let s = params.xi_sq();
    let q = params.rate_ratio();
    if h == 0.0 {
        return if s > 1.0 {
            Ok(0.0)
        } else {
            Err(Error::Pole {
                func: "ne_pe_joint_pdf",
                at: 0.0,
            })
        };
    }
    Ok(s * q.powf(s) * h.powf(s - 1.0) * gamma_upper(1.0 - s, q * h)?)
}

/// FSO SNR density W γ^{ξ²/2-1} G^{2,0}_{1,2}(z | 1; 0, 1-ξ²).
pub fn ne_pe_snr_pdf(gamma: f64, params: &LinkParams) -> Result<f64> {
    params.validate()?;
    check_snr("ne_pe_snr_pdf", gamma)?;
    if gamma == 0.0 || gamma.is_infinite() {
        return ne_pe_snr_pdf_direct(gamma, params);
    }
    let s = params.xi_sq();
    let g = MeijerParams::new(2, 0, vec![1.0], vec![0.0, 1.0 - s])?;
    Ok(params.w_coefficient() * gamma.powf(s / 2.0 - 1.0) * meijer_g(&g, params.z_of(gamma))?)
}

/// Same density through the incomplete gamma function.
pub fn ne_pe_snr_pdf_direct(gamma: f64, params: &LinkParams) -> Result<f64> {
    check_snr("ne_pe_snr_pdf", gamma)?;
    if gamma.is_infinite() {
        return Ok(0.0);
    }
    let g = params.fso_scale();
    let h = (gamma / g).sqrt();
    if gamma == 0.0 {
        // h^{ξ²-1}/√γ ~ γ^{ξ²/2-1}
        let s = params.xi_sq();
        return if s > 2.0 {
            Ok(0.0)
        } else {
            Err(Error::Pole {
                func: "ne_pe_snr_pdf",
                at: 0.0,
            })
        };
    }
    Ok(ne_pe_joint_pdf(h, params)? / (2.0 * (gamma * g).sqrt()))
}

/// FSO SNR CDF ξ² z^{ξ²} G^{2,1}_{2,3}(z | 1-ξ², 1; 0, 1-ξ², -ξ²).
pub fn ne_pe_snr_cdf(gamma: f64, params: &LinkParams) -> Result<f64> {
    params.validate()?;
    check_snr("ne_pe_snr_cdf", gamma)?;
    if gamma == 0.0 {
        return Ok(0.0);
    }
    if gamma.is_infinite() {
        return Ok(1.0);
    }
    let s = params.xi_sq();
    let z = params.z_of(gamma);
    let g = MeijerParams::new(2, 1, vec![1.0 - s, 1.0], vec![0.0, 1.0 - s, -s])?;
    let v = s * z.powf(s) * meijer_g(&g, z)?;
    Ok(v.clamp(0.0, 1.0))
}

/// Same CDF through incomplete gamma functions:
/// 1 - e^{-z} + z^{ξ²}Γ(1-ξ², z) = 1 - ξ² z^{ξ²}Γ(-ξ², z).
pub fn ne_pe_snr_cdf_direct(gamma: f64, params: &LinkParams) -> Result<f64> {
    check_snr("ne_pe_snr_cdf", gamma)?;
    if gamma == 0.0 {
        return Ok(0.0);
    }
    if gamma.is_infinite() {
        return Ok(1.0);
    }
    let s = params.xi_sq();
    let z = params.z_of(gamma);
    let v = if z <= 1.0 {
        -(-z).exp_m1() + z.powf(s) * gamma_upper(1.0 - s, z)?
    } else {
        1.0 - tail(s, z)?
    };
    Ok(v.clamp(0.0, 1.0))
}

/// 1 - F for the FSO SNR, accurate where F is close to 1.
pub fn ne_pe_snr_ccdf_direct(gamma: f64, params: &LinkParams) -> Result<f64> {
    check_snr("ne_pe_snr_ccdf", gamma)?;
    if gamma == 0.0 {
        return Ok(1.0);
    }
    if gamma.is_infinite() {
        return Ok(0.0);
    }
    let s = params.xi_sq();
    let z = params.z_of(gamma);
    if z <= 1.0 {
        Ok(1.0 - ne_pe_snr_cdf_direct(gamma, params)?)
    } else {
        Ok(tail(s, z)?.clamp(0.0, 1.0))
    }
}

/// ξ² z^{ξ²} Γ(-ξ², z), computed in logs for large z.
fn tail(s: f64, z: f64) -> Result<f64> {
    let g = gamma_upper(-s, z)?;
    if g == 0.0 {
        return Ok(0.0);
    }
    Ok(s * (s * z.ln() + g.ln()).exp())
}

/// Coefficients of F(γ) = F₀γ^{ξ²/2} + Σₙ Eₙ γ^{(n+1)/2}, n = 0..=n_max.
pub fn cdf_series_coefficients(params: &LinkParams, n_max: usize) -> Result<(f64, Vec<f64>)> {
    params.validate()?;
    let s = params.xi_sq();
    let q = params.rate_ratio();
    let g = params.fso_scale();
    let f0 = gamma_fn(1.0 - s)? * q.powf(s) * g.powf(-s / 2.0);
    // Eₙ = -ξ²(-1)ⁿ r^{n+1} / (n! (n+1) (n+1-ξ²)), r = q/√ḡ
    let r = q / g.sqrt();
    let mut e = Vec::with_capacity(n_max + 1);
    let mut pow_over_fact = r; // (-1)ⁿ r^{n+1} / n!
    for n in 0..=n_max {
        let nf = n as f64;
        if n > 0 {
            pow_over_fact *= -r / nf;
        }
        e.push(-s * pow_over_fact / ((nf + 1.0) * (nf + 1.0 - s)));
    }
    Ok((f0, e))
}

/// Partial sum of the fractional power series of the FSO SNR CDF.
///
/// Converged means the last three terms are below 1e-12 of the sum and
/// no more than four digits were lost to cancellation.
pub fn ne_pe_snr_cdf_series(gamma: f64, params: &LinkParams, n_max: usize) -> Result<SeriesSum> {
    check_snr("ne_pe_snr_cdf_series", gamma)?;
    if gamma == 0.0 {
        return Ok(SeriesSum {
            value: 0.0,
            converged: true,
            terms: 0,
            max_term: 0.0,
        });
    }
    let (f0, e) = cdf_series_coefficients(params, n_max)?;
    let s = params.xi_sq();
    let root = gamma.sqrt();
    let lead = f0 * gamma.powf(s / 2.0);
    let mut sum = lead;
    let mut max_term = lead.abs();
    let mut power = root;
    let mut quiet = 0;
    let mut terms = 1;
    for en in &e {
        let term = en * power;
        sum += term;
        max_term = max_term.max(term.abs());
        terms += 1;
        power *= root;
        if term.abs() < 1e-12 * sum.abs() {
            quiet += 1;
            if quiet == 3 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    let converged = quiet == 3 && max_term <= 1e4 * sum.abs() && sum.is_finite();
    Ok(SeriesSum {
        value: sum,
        converged,
        terms,
        max_term,
    })
}

/// γ = -γ̄ ln U for U in (0, 1].
pub fn rf_snr_from_uniform(gamma_bar: f64, u: f64) -> f64 {
    -gamma_bar * u.ln()
}

/// One exponential RF SNR draw with mean `gamma_bar`.
pub fn sample_rf_snr<R: Rng + ?Sized>(gamma_bar: f64, rng: &mut R) -> f64 {
    rf_snr_from_uniform(gamma_bar, open_unit(rng))
}

/// Uniform on (0, 1].
fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.gen::<f64>()
}

/// Pointing loss h_p = A₀ U^{1/ξ²} (inverse CDF).
pub fn sample_pointing<R: Rng + ?Sized>(params: &LinkParams, rng: &mut R) -> f64 {
    params.a0 * open_unit(rng).powf(1.0 / params.xi_sq())
}

/// Combined gain h_a·h_p with h_a ~ Exp(λ).
pub fn sample_fso_gain<R: Rng + ?Sized>(params: &LinkParams, rng: &mut R) -> f64 {
    let ha = -open_unit(rng).ln() / params.lambda;
    ha * sample_pointing(params, rng)
}

/// One FSO SNR draw ḡ(h_a h_p)².
pub fn sample_fso_snr<R: Rng + ?Sized>(params: &LinkParams, rng: &mut R) -> f64 {
    let h = sample_fso_gain(params, rng);
    params.fso_scale() * h * h
}

/// Alternative pointing sampler from a Gaussian radial displacement:
/// σ_s = w/(2ξ), r² = x² + y², h_p = A₀ exp(-2r²/w²). Needs the equivalent
/// beam width `beam_width` (w_Zeq); the law equals the inverse-CDF one.
pub fn sample_pointing_geometric<R: Rng + ?Sized>(params: &LinkParams, beam_width: f64, rng: &mut R) -> f64 {
    let sigma = beam_width / (2.0 * params.xi);
    let normal = Normal::new(0.0, sigma).expect("sigma is positive");
    let x: f64 = normal.sample(rng);
    let y: f64 = normal.sample(rng);
    params.a0 * (-2.0 * (x * x + y * y) / (beam_width * beam_width)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnrKind {
    Rayleigh,
    NegExpPointing,
}

/// One of the two link SNR laws bound to its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrDistribution {
    pub kind: SnrKind,
    pub params: LinkParams,
}

impl SnrDistribution {
    pub fn rf(params: LinkParams) -> Self {
        Self {
            kind: SnrKind::Rayleigh,
            params,
        }
    }

    pub fn fso(params: LinkParams) -> Self {
        Self {
            kind: SnrKind::NegExpPointing,
            params,
        }
    }

    pub fn cdf(&self, gamma: f64) -> Result<f64> {
        match self.kind {
            SnrKind::Rayleigh => rayleigh_snr_cdf(gamma, self.params.gamma_bar_rf),
            SnrKind::NegExpPointing => ne_pe_snr_cdf(gamma, &self.params),
        }
    }

    pub fn pdf(&self, gamma: f64) -> Result<f64> {
        match self.kind {
            SnrKind::Rayleigh => rayleigh_snr_pdf(gamma, self.params.gamma_bar_rf),
            SnrKind::NegExpPointing => ne_pe_snr_pdf(gamma, &self.params),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            SnrKind::Rayleigh => sample_rf_snr(self.params.gamma_bar_rf, rng),
            SnrKind::NegExpPointing => sample_fso_snr(&self.params, rng),
        }
    }
}
