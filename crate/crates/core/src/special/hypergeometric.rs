//! Generalized hypergeometric series pFq.

use super::gamma::{is_nonpositive_integer, rgamma};
use crate::error::{Error, Result};

/// Truncation rule for power series: stop once `quiet_terms` consecutive
/// terms fall below `rel_tol * |partial sum|`, give up after `max_terms`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesConfig {
    pub rel_tol: f64,
    pub max_terms: usize,
    pub quiet_terms: usize,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-14,
            max_terms: 500,
            quiet_terms: 3,
        }
    }
}

/// A summed series with its convergence diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub value: f64,
    pub converged: bool,
    pub terms: usize,
    /// Largest term magnitude seen; `max_term / |value|` bounds the digits
    /// lost to cancellation.
    pub max_term: f64,
}

impl SeriesSum {
    pub fn condition(&self) -> f64 {
        if self.value == 0.0 {
            if self.max_term == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            self.max_term / self.value.abs()
        }
    }
}

/// Σ_n [Π(a_i)_n / Π(b_j)_n] z^n / n!.
pub fn hyp_pfq(a: &[f64], b: &[f64], z: f64) -> Result<SeriesSum> {
    hyp_pfq_with(a, b, z, SeriesConfig::default())
}

pub fn hyp_pfq_with(a: &[f64], b: &[f64], z: f64, cfg: SeriesConfig) -> Result<SeriesSum> {
    sum_series(a, b, z, cfg, false)
}

/// Regularized series Σ_n [Π(a_i)_n / Π Γ(b_j + n)] z^n / n!, finite for
/// every real `b`.
pub fn hyp_pfq_regularized(a: &[f64], b: &[f64], z: f64, cfg: SeriesConfig) -> Result<SeriesSum> {
    sum_series(a, b, z, cfg, true)
}

fn sum_series(a: &[f64], b: &[f64], z: f64, cfg: SeriesConfig, regularized: bool) -> Result<SeriesSum> {
    if !z.is_finite() {
        return Err(Error::Domain {
            func: "hyp_pfq",
            detail: format!("z = {z}"),
        });
    }
    // Regularized denominators: r_j = 1/Γ(b_j + n), updated by division
    // except where b_j + n sits on a pole.
    let mut rg: Vec<f64> = if regularized {
        b.iter().map(|&bj| rgamma(bj)).collect()
    } else {
        Vec::new()
    };
    // Zero terms can precede nonzero ones while some b_j + n ≤ 0; the
    // quiet-term counter only starts after the last such index.
    let zero_run_end = if regularized {
        b.iter()
            .filter(|&&bj| is_nonpositive_integer(bj))
            .map(|&bj| (-bj) as usize + 1)
            .max()
            .unwrap_or(0)
    } else {
        0
    };

    let mut coef = 1.0; // Π(a_i)_n z^n / n! (/ Π(b_j)_n when not regularized)
    let mut term = if regularized { rg.iter().product::<f64>() } else { 1.0 };
    let mut sum = term;
    let mut max_term = term.abs();
    let mut quiet = 0;

    for n in 0..cfg.max_terms {
        let nf = n as f64;
        // advance coef from n to n+1
        let mut ratio = z / (nf + 1.0);
        let mut terminated = false;
        for &ai in a {
            let v = ai + nf;
            if v == 0.0 {
                terminated = true;
            }
            ratio *= v;
        }
        if terminated {
            return Ok(SeriesSum {
                value: sum,
                converged: true,
                terms: n + 1,
                max_term,
            });
        }
        if regularized {
            for (r, &bj) in rg.iter_mut().zip(b) {
                let v = bj + nf;
                *r = if is_nonpositive_integer(v) { rgamma(v + 1.0) } else { *r / v };
            }
            coef *= ratio;
            term = coef * rg.iter().product::<f64>();
        } else {
            for &bj in b {
                let v = bj + nf;
                if v == 0.0 {
                    return Err(Error::Pole {
                        func: "hyp_pfq",
                        at: bj,
                    });
                }
                ratio /= v;
            }
            coef *= ratio;
            term = coef;
        }
        sum += term;
        max_term = max_term.max(term.abs());
        if !sum.is_finite() {
            break;
        }
        if n + 1 >= zero_run_end {
            if term.abs() <= cfg.rel_tol * sum.abs() {
                quiet += 1;
                if quiet >= cfg.quiet_terms {
                    return Ok(SeriesSum {
                        value: sum,
                        converged: true,
                        terms: n + 2,
                        max_term,
                    });
                }
            } else {
                quiet = 0;
            }
        }
    }
    Ok(SeriesSum {
        value: sum,
        converged: false,
        terms: cfg.max_terms,
        max_term,
    })
}
