use fsorelay_core::quadrature::{integrate_to_infinity, QuadConfig};
use fsorelay_core::special::*;
use proptest::prelude::*;

const XI: f64 = 1.45;

fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// The six parameter classes with their Slater grids.
fn classes() -> Vec<(&'static str, MeijerParams, f64, f64)> {
    let s = XI * XI;
    let h = 1.5;
    let alpha = h + s / 2.0 + 1.0;
    let b_fixed = vec![1.0, (1.0 + s) / 2.0, s / 2.0, 1.0, 0.5, 0.5, 0.0];
    vec![
        ("G2012", MeijerParams::new(2, 0, vec![1.0], vec![0.0, 1.0 - s]).unwrap(), 1e-4, 3.0),
        (
            "G2123",
            MeijerParams::new(2, 1, vec![1.0 - s, 1.0], vec![0.0, 1.0 - s, -s]).unwrap(),
            1e-4,
            10.0,
        ),
        (
            "G1232",
            MeijerParams::new(1, 2, vec![1.0 - s, 0.0, 1.0], vec![0.0, -s]).unwrap(),
            0.1,
            100.0,
        ),
        (
            "G4356",
            MeijerParams::new(
                4,
                3,
                vec![1.0 - alpha, (1.0 - s) / 2.0, (2.0 - s) / 2.0, 0.5, 1.0],
                vec![0.0, 0.5, (1.0 - s) / 2.0, (2.0 - s) / 2.0, -s / 2.0, (1.0 - s) / 2.0],
            )
            .unwrap(),
            1e-4,
            3.0,
        ),
        (
            "G5247",
            MeijerParams::new(5, 2, vec![1.0, 0.5, 1.0 + s / 2.0, (1.0 + s) / 2.0], b_fixed.clone()).unwrap(),
            1e-4,
            10.0,
        ),
        (
            "G5357",
            MeijerParams::new(5, 3, vec![-h, 1.0, 0.5, 1.0 + s / 2.0, (1.0 + s) / 2.0], b_fixed).unwrap(),
            1e-4,
            10.0,
        ),
    ]
}

#[test]
fn slater_matches_contour_on_all_classes() {
    let cfg = MeijerConfig::default();
    for (name, g, lo, hi) in classes() {
        for z in logspace(lo, hi, 50) {
            let sl = meijer_g_slater(&g, z, &cfg).unwrap();
            let mb = meijer_g_mellin_barnes(&g, z, &cfg).unwrap();
            let rel = (sl.value / mb.value - 1.0).abs();
            assert!(rel <= 1e-8, "{name} at z = {z}: slater {} contour {}", sl.value, mb.value);
        }
    }
}

#[test]
fn dispatcher_covers_large_arguments() {
    // CDF form at z = 100 where the direct residue series cannot be used:
    // 1 - F = ξ² z^{ξ²} Γ(-ξ², z), and G = z^{-ξ²}(1 - ξ² z^{ξ²} Γ(-ξ², z))/ξ²
    let s = XI * XI;
    let g = MeijerParams::new(2, 1, vec![1.0 - s, 1.0], vec![0.0, 1.0 - s, -s]).unwrap();
    for z in [30.0f64, 100.0, 400.0] {
        let tail = s * z.powf(s) * gamma_upper(-s, z).unwrap();
        let expect = (1.0 - tail) / (s * z.powf(s));
        let v = meijer_g(&g, z).unwrap();
        assert!((v / expect - 1.0).abs() < 1e-10, "{z}: {v} vs {expect}");
    }
}

#[test]
fn spec_identities() {
    let e = MeijerParams::new(1, 0, vec![], vec![0.0]).unwrap();
    assert!((meijer_g(&e, 2.0).unwrap() - 0.135_335_283_236_612_7).abs() < 1e-15);
    let g = MeijerParams::new(2, 0, vec![1.0], vec![0.5, 0.0]).unwrap();
    assert!((meijer_g(&g, 1.0).unwrap() - 0.278_805_585_280_661_98).abs() < 1e-13);
}

#[test]
fn invalid_arguments_are_reported() {
    let g = MeijerParams::new(1, 0, vec![], vec![0.0]).unwrap();
    assert!(meijer_g(&g, 0.0).is_err());
    assert!(meijer_g(&g, -1.0).is_err());
    assert!(MeijerParams::new(1, 0, vec![0.0; 9], vec![0.0]).is_err());
    assert!(MeijerParams::new(3, 0, vec![], vec![0.0, 1.0]).is_err());
}

/// Γ(a, x) = x^a ∫₀^∞ e^{av - x e^v} dv, smooth for every real a.
fn gamma_upper_oracle(a: f64, x: f64) -> f64 {
    let cfg = QuadConfig::with_tolerances(0.0, 1e-13);
    let r = integrate_to_infinity(|v| (a * v - x * v.exp()).exp(), 0.0, cfg);
    x.powf(a) * r.value
}

#[test]
fn gamma_upper_recurrence_box() {
    let a_grid: Vec<f64> = (0..25).map(|i| -3.0 + 0.25 * i as f64 + 0.0371).collect();
    for &a in &a_grid {
        for x in logspace(0.01, 20.0, 12) {
            let oracle = gamma_upper_oracle(a, x);
            let rec = gamma_upper_recurrence(a, x).unwrap();
            let direct = gamma_upper(a, x).unwrap();
            assert!((rec / oracle - 1.0).abs() < 1e-10, "recurrence a={a} x={x}: {rec} vs {oracle}");
            assert!((direct / oracle - 1.0).abs() < 1e-10, "gamma_upper a={a} x={x}: {direct} vs {oracle}");
        }
    }
}

#[test]
fn poch_spec_examples() {
    assert_eq!(poch(3.0, 0), 1.0);
    assert_eq!(poch(2.0, 3), 24.0);
    let direct = -0.1025 * 0.8975 * 1.8975 * 2.8975;
    assert!((poch(-0.1025, 4) - direct).abs() < 1e-16);
}

proptest! {
    #[test]
    fn poch_is_gamma_ratio(x in 0.05f64..20.0, k in 0u32..12) {
        let ratio = gamma_fn(x + k as f64).unwrap() / gamma_fn(x).unwrap();
        prop_assert!((poch(x, k) / ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_upper_parameter_is_one(z in -80.0f64..80.0, a in -3.0f64..3.0, b in 0.1f64..4.0) {
        let r = hyp_pfq(&[a, 0.0], &[b, b + 1.0], z).unwrap();
        prop_assert_eq!(r.value, 1.0);
    }

    #[test]
    fn gamma_recurrence(x in -9.9f64..30.0) {
        prop_assume!((x - x.round()).abs() > 1e-3);
        let lhs = gamma_fn(x + 1.0).unwrap();
        let rhs = x * gamma_fn(x).unwrap();
        prop_assert!((lhs / rhs - 1.0).abs() < 1e-13);
    }
}
