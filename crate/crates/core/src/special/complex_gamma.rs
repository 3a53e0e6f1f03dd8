//! ln Γ(z) for complex z.
//!
//! The result is only defined modulo 2πi; callers exponentiate sums of these
//! values, so the branch never matters.

use std::f64::consts::PI;

use num_complex::Complex64;

const G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// ln sin(πz), stable for large |Im z|.
fn ln_sin_pi(z: Complex64) -> Complex64 {
    let w = z * PI;
    let i = Complex64::i();
    if w.im.abs() < 20.0 {
        return w.sin().ln();
    }
    let ln_2i = Complex64::new(2f64.ln(), PI / 2.0);
    if w.im > 0.0 {
        // sin w = e^{-iw} (e^{2iw} - 1) / (2i)
        -i * w + ((2.0 * i * w).exp() - 1.0).ln() - ln_2i
    } else {
        // sin w = e^{iw} (1 - e^{-2iw}) / (2i)
        i * w + (1.0 - (-2.0 * i * w).exp()).ln() - ln_2i
    }
}

pub fn ln_gamma_complex(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        return Complex64::new(PI.ln(), 0.0) - ln_sin_pi(z) - ln_gamma_complex(1.0 - z);
    }
    let zm = z - 1.0;
    let mut acc = Complex64::new(COEF[0], 0.0);
    for (k, c) in COEF.iter().enumerate().skip(1) {
        acc += *c / (zm + k as f64);
    }
    let t = zm + G + 0.5;
    LN_SQRT_2PI + (zm + 0.5) * t.ln() - t + acc.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma::gamma_fn;

    #[test]
    fn real_axis_matches_real_gamma() {
        for &x in &[0.3, 1.0, 2.5, 7.25, -0.7, -3.4] {
            let v = ln_gamma_complex(Complex64::new(x, 0.0)).exp();
            let r = gamma_fn(x).unwrap();
            assert!(((v.re - r) / r).abs() < 1e-13, "{x}: {v} vs {r}");
            assert!(v.im.abs() < 1e-12 * r.abs());
        }
    }

    #[test]
    fn reflection_modulus() {
        // |Γ(iy)|² = π / (y sinh πy)
        for &y in &[0.5, 3.0, 30.0, 120.0] {
            let lg = ln_gamma_complex(Complex64::new(0.0, y));
            let expect = 0.5 * (PI / (y * (PI * y).sinh())).ln();
            let expect = if expect.is_finite() {
                expect
            } else {
                0.5 * (PI.ln() - y.ln() - PI * y + 2f64.ln())
            };
            assert!((lg.re - expect).abs() < 1e-12 * expect.abs().max(1.0), "{y}");
        }
    }

    #[test]
    fn recurrence_holds_off_axis() {
        let z = Complex64::new(-2.3, 4.1);
        let lhs = (ln_gamma_complex(z + 1.0) - ln_gamma_complex(z)).exp();
        assert!((lhs - z).norm() < 1e-12 * z.norm());
    }
}
