//! Meijer G-function G^{m,n}_{p,q}(z | a; b) for real parameters and z > 0.
//!
//! Two independent paths:
//! - Slater's residue expansion: a sum of m regularized pF(q-1) series,
//!   taken on G(1/z) with swapped parameter lists when p > q (or p = q and
//!   z > 1). Coinciding lower parameters are split by ±ε and the result is
//!   Richardson-extrapolated in ε.
//! - Direct quadrature of the Mellin–Barnes integral along a vertical line
//!   placed at the saddle of |Φ(c) z^c|.
//!
//! [`meijer_g`] uses Slater when its cancellation estimate is small and
//! falls back to the contour integral otherwise.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::complex_gamma::ln_gamma_complex;
use super::gamma::{gamma_fn, is_nonpositive_integer, ln_gamma, rgamma, sin_pi};
use super::hypergeometric::{hyp_pfq_regularized, SeriesConfig};
use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate, QuadConfig};

pub const MAX_ORDER: usize = 8;

/// Lower parameters closer than this to an integer difference are treated
/// as a logarithmic case.
const NEAR_INTEGER: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct MeijerParams {
    m: usize,
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl MeijerParams {
    /// `a` holds the p upper parameters (the first `n` form the numerator
    /// group), `b` the q lower ones (first `m` in the numerator).
    pub fn new(m: usize, n: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let (p, q) = (a.len(), b.len());
        if p > MAX_ORDER || q > MAX_ORDER {
            return Err(invalid("meijer order", format!("p = {p}, q = {q} exceeds {MAX_ORDER}")));
        }
        if m > q || n > p {
            return Err(invalid("meijer order", format!("need m ≤ q and n ≤ p, got m={m} n={n} p={p} q={q}")));
        }
        if m == 0 && n == 0 {
            return Err(invalid("meijer order", "m and n are both zero"));
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(invalid("meijer parameters", "non-finite entry"));
        }
        for (j, &aj) in a.iter().enumerate().take(n) {
            for (k, &bk) in b.iter().enumerate().take(m) {
                let d = aj - bk;
                if d > 0.5 && (d - d.round()).abs() < 1e-12 {
                    return Err(Error::PoleCollision { a_index: j, b_index: k });
                }
            }
        }
        Ok(Self { m, n, a, b })
    }

    pub fn m(&self) -> usize {
        self.m
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn p(&self) -> usize {
        self.a.len()
    }
    pub fn q(&self) -> usize {
        self.b.len()
    }
    pub fn a(&self) -> &[f64] {
        &self.a
    }
    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// Parameters of G^{n,m}_{q,p}(1/z | 1-b; 1-a), equal to G(z).
    fn inverted(&self) -> Self {
        Self {
            m: self.n,
            n: self.m,
            a: self.b.iter().map(|v| 1.0 - v).collect(),
            b: self.a.iter().map(|v| 1.0 - v).collect(),
        }
    }

    /// Mellin–Barnes kernel ln Φ(t).
    fn ln_phi(&self, t: Complex64) -> Complex64 {
        let (m, n) = (self.m, self.n);
        let mut acc = Complex64::new(0.0, 0.0);
        for &bj in &self.b[..m] {
            acc += ln_gamma_complex(bj - t);
        }
        for &aj in &self.a[..n] {
            acc += ln_gamma_complex(1.0 - aj + t);
        }
        for &bj in &self.b[m..] {
            acc -= ln_gamma_complex(1.0 - bj + t);
        }
        for &aj in &self.a[n..] {
            acc -= ln_gamma_complex(aj - t);
        }
        acc
    }

    /// Real-axis version of `ln|Φ(c)|`; +∞ at numerator poles.
    fn ln_abs_phi(&self, c: f64) -> f64 {
        let (m, n) = (self.m, self.n);
        let num: f64 = self.b[..m].iter().map(|&bj| ln_gamma(bj - c)).sum::<f64>()
            + self.a[..n].iter().map(|&aj| ln_gamma(1.0 - aj + c)).sum::<f64>();
        let den: f64 = self.b[m..].iter().map(|&bj| ln_gamma(1.0 - bj + c)).sum::<f64>()
            + self.a[n..].iter().map(|&aj| ln_gamma(aj - c)).sum::<f64>();
        num - den
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeijerConfig {
    pub series: SeriesConfig,
    /// Split used for coinciding lower parameters (and twice it).
    pub log_eps: f64,
    /// Slater results with a larger cancellation estimate go to the
    /// contour integral.
    pub max_rel_error: f64,
    pub quad: QuadConfig,
}

impl Default for MeijerConfig {
    fn default() -> Self {
        Self {
            series: SeriesConfig::default(),
            log_eps: 1e-3,
            max_rel_error: 1e-9,
            quad: QuadConfig {
                abs_tol: 1e-16,
                rel_tol: 1e-13,
                max_intervals: 2000,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeijerMethod {
    Slater,
    SlaterInverted,
    MellinBarnes,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeijerValue {
    pub value: f64,
    pub method: MeijerMethod,
    /// Estimated relative error (rounding and truncation).
    pub rel_error: f64,
}

/// G^{m,n}_{p,q}(z | a; b) with default settings.
pub fn meijer_g(params: &MeijerParams, z: f64) -> Result<f64> {
    meijer_g_with(params, z, &MeijerConfig::default()).map(|v| v.value)
}

pub fn meijer_g_with(params: &MeijerParams, z: f64, cfg: &MeijerConfig) -> Result<MeijerValue> {
    check_argument(z)?;
    let slater = meijer_g_slater(params, z, cfg);
    if let Ok(v) = &slater {
        if v.rel_error <= cfg.max_rel_error {
            return Ok(*v);
        }
    }
    match (meijer_g_mellin_barnes(params, z, cfg), slater) {
        (Ok(mb), Ok(sl)) => Ok(if mb.rel_error <= sl.rel_error { mb } else { sl }),
        (Ok(mb), Err(_)) => Ok(mb),
        (Err(_), Ok(sl)) => Ok(sl),
        (Err(e), Err(Error::PoleCollision { .. })) => Err(e),
        (Err(_), Err(e)) => Err(e),
    }
}

fn check_argument(z: f64) -> Result<()> {
    if z > 0.0 && z.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            func: "meijer_g",
            detail: format!("z = {z} must be positive and finite"),
        })
    }
}

/// Slater expansion only. Inverts to G(1/z) when the direct series would
/// diverge; reports [`Error::NoConvergence`] when a series does not settle.
pub fn meijer_g_slater(params: &MeijerParams, z: f64, cfg: &MeijerConfig) -> Result<MeijerValue> {
    check_argument(z)?;
    let (p, q) = (params.p(), params.q());
    let direct = p < q || (p == q && z < 1.0);
    if p == q && z == 1.0 {
        return Err(Error::Domain {
            func: "meijer_g_slater",
            detail: "series on the unit circle for p = q".into(),
        });
    }
    let (work, x, method) = if direct {
        (params.clone(), z, MeijerMethod::Slater)
    } else {
        (params.inverted(), 1.0 / z, MeijerMethod::SlaterInverted)
    };
    if work.m == 0 {
        // no residues on the right: the loop integral vanishes
        return Ok(MeijerValue {
            value: 0.0,
            method,
            rel_error: 0.0,
        });
    }
    let (value, rel_error) = slater_with_log_split(&work, x, cfg)?;
    Ok(MeijerValue {
        value,
        method,
        rel_error,
    })
}

struct SlaterSum {
    value: f64,
    /// Σ |prefactor| · max term, the scale the rounding error sits on.
    scale: f64,
}

fn slater_sum(g: &MeijerParams, b: &[f64], z: f64, cfg: &SeriesConfig) -> Result<SlaterSum> {
    let (m, n, p) = (g.m, g.n, g.a.len());
    let a = &g.a;
    let sign = if (p + m + n) % 2 == 0 { 1.0 } else { -1.0 };
    let ln_z = z.ln();
    let mut value = 0.0;
    let mut scale = 0.0;
    for h in 0..m {
        let bh = b[h];
        let mut pref = 1.0;
        for (j, &bj) in b.iter().enumerate().take(m) {
            if j == h {
                continue;
            }
            let s = sin_pi(bj - bh);
            if s == 0.0 {
                return Err(Error::Domain {
                    func: "meijer_g_slater",
                    detail: "coinciding lower parameters".into(),
                });
            }
            pref *= PI / s;
        }
        for (j, &aj) in a.iter().enumerate().take(n) {
            pref *= gamma_fn(1.0 + bh - aj).map_err(|_| Error::PoleCollision { a_index: j, b_index: h })?;
        }
        for &aj in &a[n..] {
            pref *= rgamma(aj - bh);
        }
        if pref == 0.0 {
            continue;
        }
        let pref = pref * (bh * ln_z).exp();
        let up: Vec<f64> = a.iter().map(|&aj| 1.0 + bh - aj).collect();
        let low: Vec<f64> = b
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != h)
            .map(|(_, &bj)| 1.0 + bh - bj)
            .collect();
        let s = hyp_pfq_regularized(&up, &low, sign * z, *cfg)?;
        if !s.converged || !s.value.is_finite() {
            return Err(Error::NoConvergence {
                what: "Slater series",
                estimate: s.value,
                error: s.max_term,
            });
        }
        value += pref * s.value;
        scale += pref.abs() * s.max_term;
    }
    Ok(SlaterSum { value, scale })
}

/// Offsets (in units of ε) separating lower parameters of the numerator
/// group that differ by integers. Returns `None` when no split is needed,
/// otherwise the offsets and whether every cluster consists of exactly
/// equal values (which makes the split result even in ε).
fn log_split(b: &[f64], m: usize) -> Option<(Vec<f64>, bool)> {
    let mut group: Vec<usize> = (0..m).collect();
    let mut any = false;
    let mut all_equal = true;
    for i in 0..m {
        for j in (i + 1)..m {
            let d = b[j] - b[i];
            if (d - d.round()).abs() <= NEAR_INTEGER {
                any = true;
                if d.abs() > 1e-12 {
                    all_equal = false;
                }
                let (gi, gj) = (group[i], group[j]);
                for g in group.iter_mut() {
                    if *g == gj {
                        *g = gi;
                    }
                }
            }
        }
    }
    if !any {
        return None;
    }
    let mut offsets = vec![0.0; b.len()];
    for root in 0..m {
        let members: Vec<usize> = (0..m).filter(|&i| group[i] == root).collect();
        let k = members.len();
        if k < 2 {
            continue;
        }
        for (i, &idx) in members.iter().enumerate() {
            offsets[idx] = 2.0 * i as f64 - (k as f64 - 1.0);
        }
    }
    Some((offsets, all_equal))
}

fn slater_with_log_split(g: &MeijerParams, z: f64, cfg: &MeijerConfig) -> Result<(f64, f64)> {
    let rounding = 8.0 * f64::EPSILON;
    let Some((offsets, even)) = log_split(&g.b, g.m) else {
        let s = slater_sum(g, &g.b, z, &cfg.series)?;
        return Ok((s.value, rel_estimate(s.value, s.scale * rounding, cfg)));
    };
    let shifted = |eps: f64| -> Vec<f64> { g.b.iter().zip(&offsets).map(|(v, o)| v + o * eps).collect() };
    let eps = cfg.log_eps;
    let f1 = slater_sum(g, &shifted(eps), z, &cfg.series)?;
    let f2 = slater_sum(g, &shifted(2.0 * eps), z, &cfg.series)?;
    // f(ε) = G + c₁ε + c₂ε² + ...; c₁ = 0 when clusters are exact duplicates
    let (value, amplify) = if even {
        ((4.0 * f1.value - f2.value) / 3.0, 5.0 / 3.0)
    } else {
        (2.0 * f1.value - f2.value, 3.0)
    };
    let noise = amplify * f1.scale.max(f2.scale) * rounding;
    // leftover ε-term, measured from the spread of the two evaluations
    let truncation = if even {
        (f1.value - f2.value).abs() * (eps * eps)
    } else {
        (f1.value - f2.value).abs() * eps
    };
    Ok((value, rel_estimate(value, noise + truncation, cfg)))
}

fn rel_estimate(value: f64, abs_err: f64, cfg: &MeijerConfig) -> f64 {
    let floor = cfg.series.rel_tol;
    if value == 0.0 {
        if abs_err == 0.0 {
            floor
        } else {
            f64::INFINITY
        }
    } else {
        abs_err / value.abs() + floor
    }
}

/// Numerical Mellin–Barnes integral
/// G = (1/π) ∫₀^∞ Re[Φ(c+iy) z^{c+iy}] dy on a line separating the two pole
/// families. Needs m + n > (p+q)/2 so the integrand decays exponentially.
pub fn meijer_g_mellin_barnes(params: &MeijerParams, z: f64, cfg: &MeijerConfig) -> Result<MeijerValue> {
    check_argument(z)?;
    let g = params;
    let delta = (g.m + g.n) as f64 - 0.5 * (g.p() + g.q()) as f64;
    if delta <= 0.0 {
        return Err(Error::Domain {
            func: "meijer_g_mellin_barnes",
            detail: format!("m + n - (p+q)/2 = {delta} gives no exponential decay"),
        });
    }
    let lo = g.a[..g.n].iter().map(|&aj| aj - 1.0).fold(f64::NEG_INFINITY, f64::max);
    let hi = g.b[..g.m].iter().copied().fold(f64::INFINITY, f64::min);
    if !(lo < hi) || !hi.is_finite() {
        return Err(Error::Domain {
            func: "meijer_g_mellin_barnes",
            detail: format!("no straight contour between poles ({lo}, {hi})"),
        });
    }
    let ln_z = z.ln();
    let phi = |c: f64| {
        let v = g.ln_abs_phi(c) + c * ln_z;
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let c = saddle(&phi, lo, hi);
    let ln_scale = {
        let v = g.ln_phi(Complex64::new(c, 0.0)).re + c * ln_z;
        if v.is_finite() {
            v
        } else {
            (g.ln_phi(Complex64::new(c, 0.5)) + Complex64::new(c, 0.5) * ln_z).re
        }
    };
    if !ln_scale.is_finite() {
        return Err(Error::NoConvergence {
            what: "Mellin-Barnes scale",
            estimate: f64::NAN,
            error: f64::INFINITY,
        });
    }
    let log_integrand = |y: f64| {
        let t = Complex64::new(c, y);
        g.ln_phi(t) + t * ln_z - ln_scale
    };
    // walk out until the envelope is below e^{-40} twice in a row
    let mut breaks = vec![0.0];
    let mut y = 0.5;
    let mut quiet = 0;
    while y < 1e5 {
        breaks.push(y);
        if log_integrand(y).re < -40.0 {
            quiet += 1;
            if quiet == 2 {
                break;
            }
        } else {
            quiet = 0;
        }
        y *= 2.0;
    }
    if quiet < 2 {
        return Err(Error::NoConvergence {
            what: "Mellin-Barnes tail",
            estimate: f64::NAN,
            error: f64::INFINITY,
        });
    }
    let integrand = |y: f64| {
        let l = log_integrand(y);
        if l.re < -745.0 {
            0.0
        } else {
            l.exp().re
        }
    };
    let mut sum = 0.0;
    let mut err = 0.0;
    let mut converged = true;
    for w in breaks.windows(2) {
        let r = integrate(integrand, w[0], w[1], cfg.quad);
        sum += r.value;
        err += r.error;
        converged &= r.converged;
    }
    let factor = ln_scale.exp() / PI;
    let value = sum * factor;
    // ln Φ is accurate to about 1e-14 relative in the exponent's magnitude
    let kernel = 1e-14 * ln_scale.abs().max(1.0);
    let rel_error = if value == 0.0 {
        f64::INFINITY
    } else {
        (err + kernel) * factor.abs() / value.abs() + (1e-13 * factor / value).abs()
    };
    if !converged && rel_error > 1e-6 {
        return Err(Error::NoConvergence {
            what: "Mellin-Barnes quadrature",
            estimate: value,
            error: rel_error * value.abs(),
        });
    }
    Ok(MeijerValue {
        value,
        method: MeijerMethod::MellinBarnes,
        rel_error,
    })
}

/// Minimizer of `phi` inside (lo, hi), kept away from the pole edges.
fn saddle<F: Fn(f64) -> f64>(phi: &F, lo: f64, hi: f64) -> f64 {
    let (mut l, mut r) = if lo.is_finite() {
        let w = hi - lo;
        (lo + 0.02 * w, hi - 0.02 * w)
    } else {
        // scan leftwards geometrically, bracket the best sample
        let start = hi - 0.05;
        let pts: Vec<f64> = (0..14).map(|k| start - (2f64.powi(k) - 1.0) * 0.5).collect();
        let best = (0..pts.len())
            .min_by(|&i, &j| phi(pts[i]).total_cmp(&phi(pts[j])))
            .unwrap_or(0);
        let l = pts[(best + 1).min(pts.len() - 1)];
        let r = if best == 0 { start } else { pts[best - 1] };
        (l, r)
    };
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = r - inv_phi * (r - l);
    let mut x2 = l + inv_phi * (r - l);
    let mut f1 = phi(x1);
    let mut f2 = phi(x2);
    for _ in 0..60 {
        if f1 < f2 {
            r = x2;
            x2 = x1;
            f2 = f1;
            x1 = r - inv_phi * (r - l);
            f1 = phi(x1);
        } else {
            l = x1;
            x1 = x2;
            f1 = f2;
            x2 = l + inv_phi * (r - l);
            f2 = phi(x2);
        }
        if (r - l).abs() < 1e-6 {
            break;
        }
    }
    let c = 0.5 * (l + r);
    // a numerator pole exactly on the line would break the kernel
    if is_nonpositive_integer(c) {
        c + 1e-9
    } else {
        c
    }
}
