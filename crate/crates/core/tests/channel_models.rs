use fsorelay_core::channel::*;
use fsorelay_core::quadrature::{integrate, integrate_split, QuadConfig};
use fsorelay_core::stats::{ks_critical_value, ks_statistic};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn paper_point() -> LinkParams {
    LinkParams::with_gamma_avg(100.0)
}

fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// P(h_a h_p ≤ √(γ/ḡ)) from the primitive laws h_a ~ Exp(λ) and
/// P(h_p ≤ x) = min(1, (x/A₀)^{ξ²}), integrated over h_a.
fn chain_cdf(gamma: f64, p: &LinkParams) -> f64 {
    let h = (gamma / p.fso_scale()).sqrt();
    let s = p.xi_sq();
    let knee = h / p.a0;
    let cfg = QuadConfig::with_tolerances(1e-15, 1e-12);
    let below = -(-p.lambda * knee).exp_m1();
    let tail = integrate_split(
        |a| p.lambda * (-p.lambda * a).exp() * (knee / a).powf(s),
        knee,
        &[knee * 2.0, knee * 8.0, knee + 10.0 / p.lambda],
        cfg,
    );
    below + tail.value
}

#[test]
fn cdf_matches_pdf_chain() {
    let p = paper_point();
    for g in logspace(1e-4, 1e5, 1000) {
        let f = ne_pe_snr_cdf(g, &p).unwrap();
        let oracle = chain_cdf(g, &p);
        assert!((f - oracle).abs() <= 1e-6 * oracle.max(1e-300), "γ={g}: {f} vs {oracle}");
    }
}

#[test]
fn cdfs_are_monotone_and_bounded() {
    let p = paper_point();
    let (mut last_fso, mut last_direct, mut last_rf) = (0.0, 0.0, 0.0);
    for g in logspace(1e-6, 1e7, 1000) {
        let f = ne_pe_snr_cdf(g, &p).unwrap();
        let d = ne_pe_snr_cdf_direct(g, &p).unwrap();
        let r = rayleigh_snr_cdf(g, p.gamma_bar_rf).unwrap();
        assert!([f, d, r].iter().all(|v| (0.0..=1.0).contains(v)));
        // the Meijer form carries a few ulp of rounding once F ≈ 1
        assert!(f >= last_fso - 1e-14, "γ={g}");
        assert!(d >= last_direct && r >= last_rf, "γ={g}");
        (last_fso, last_direct, last_rf) = (f, d, r);
    }
    assert!(1.0 - ne_pe_snr_cdf(1e4 * p.gamma_bar_fso, &p).unwrap() < 1e-6);
}

#[test]
fn densities_integrate_to_one() {
    let cfg = QuadConfig::with_tolerances(1e-12, 1e-10);
    for lambda in [1.0, 2f64.sqrt(), 0.5f64.sqrt()] {
        let p = LinkParams { lambda, ..paper_point() };
        let fh = integrate_split(|h| ne_pe_joint_pdf(h, &p).unwrap(), 0.0, &[0.1, 1.0, 5.0], cfg);
        assert!((fh.value - 1.0).abs() < 1e-8, "f_h mass {}", fh.value);
        let fg = integrate_split(
            |g| ne_pe_snr_pdf_direct(g, &p).unwrap(),
            0.0,
            &[1e-3, 1.0, 10.0, 100.0, 1e3, 1e4],
            cfg,
        );
        assert!((fg.value - 1.0).abs() < 1e-6, "pdf mass {}", fg.value);
    }
}

#[test]
fn pdf_is_a_change_of_variables_of_f_h() {
    let p = paper_point();
    let gb = p.fso_scale();
    for g in logspace(1e-2, 1e4, 40) {
        let direct = ne_pe_snr_pdf(g, &p).unwrap();
        let via_h = ne_pe_joint_pdf((g / gb).sqrt(), &p).unwrap() / (2.0 * (g * gb).sqrt());
        assert!((direct / via_h - 1.0).abs() < 1e-10, "γ={g}");
    }
}

#[test]
fn cdf_derivative_matches_pdf() {
    let p = paper_point();
    for g in logspace(1e-2, 1e4, 60) {
        let d = g * 1e-5;
        let slope = (ne_pe_snr_cdf_direct(g + d, &p).unwrap() - ne_pe_snr_cdf_direct(g - d, &p).unwrap()) / (2.0 * d);
        let pdf = ne_pe_snr_pdf(g, &p).unwrap();
        assert!((slope / pdf - 1.0).abs() < 1e-4, "γ={g}: {slope} vs {pdf}");
    }
}

#[test]
fn cdf_at_reference_point_matches_density_integral() {
    let p = paper_point();
    let cfg = QuadConfig::with_tolerances(1e-14, 1e-12);
    let q = integrate(|g| ne_pe_snr_pdf_direct(g, &p).unwrap(), 0.0, 10.0, cfg);
    let f = ne_pe_snr_cdf(10.0, &p).unwrap();
    assert!((q.value - f).abs() < 1e-10);
}

#[test]
fn series_agrees_with_meijer_where_converged() {
    for (lambda, gb) in [(1.0, 100.0), (2f64.sqrt(), 10.0), (0.5f64.sqrt(), 1000.0), (1.0, 1.0)] {
        let p = LinkParams {
            lambda,
            ..LinkParams::with_gamma_avg(gb)
        };
        let mut used = 0;
        for g in logspace(1e-4, 100.0 * gb, 80) {
            let s = ne_pe_snr_cdf_series(g, &p, 80).unwrap();
            if !s.converged {
                continue;
            }
            used += 1;
            let m = ne_pe_snr_cdf(g, &p).unwrap();
            assert!((s.value / m - 1.0).abs() < 1e-8, "γ={g}, γ̄={gb}: {} vs {m}", s.value);
        }
        assert!(used > 20);
    }
    assert_eq!(ne_pe_snr_cdf_series(0.0, &paper_point(), 10).unwrap().value, 0.0);
}

#[test]
fn rf_sampler_mean_and_law() {
    let gb = 10.0;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut xs: Vec<f64> = (0..1_000_000).map(|_| sample_rf_snr(gb, &mut rng)).collect();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    assert!((mean - gb).abs() < 3.0 * gb / n.sqrt());
    let below = xs.iter().filter(|&&x| x <= 10.0).count() as f64 / n;
    let p = 0.632_120_558_8;
    assert!((below - p).abs() < 3.0 * (p * (1.0 - p) / n).sqrt());
    let d = ks_statistic(&mut xs, |x| rayleigh_snr_cdf(x, gb).unwrap());
    assert!(d < ks_critical_value(xs.len(), 0.01), "D = {d}");
}

#[test]
fn fso_sampler_matches_cdf() {
    for lambda in [1.0, 2f64.sqrt()] {
        let p = LinkParams { lambda, ..paper_point() };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut xs: Vec<f64> = (0..1_000_000).map(|_| sample_fso_snr(&p, &mut rng)).collect();
        let d = ks_statistic(&mut xs, |x| ne_pe_snr_cdf_direct(x, &p).unwrap());
        assert!(d < ks_critical_value(xs.len(), 0.01), "λ={lambda}: D = {d}");
    }
}

#[test]
fn pointing_samples_stay_below_a0() {
    let p = LinkParams { a0: 0.7, ..paper_point() };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    assert!((0..100_000).all(|_| sample_pointing(&p, &mut rng) <= p.a0));
}

#[test]
fn wide_beam_reduces_to_negative_exponential() {
    // ξ large: h_p ≡ A₀ and γ = ḡ A₀² h_a², so F = 1 - e^{-λ√(γ/ḡ)/A₀}
    let p = LinkParams { xi: 50.0, ..paper_point() };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut xs: Vec<f64> = (0..200_000).map(|_| sample_fso_snr(&p, &mut rng)).collect();
    let z = |g: f64| p.lambda * (g / p.fso_scale()).sqrt() / p.a0;
    let d = ks_statistic(&mut xs, |g| -(-z(g)).exp_m1());
    assert!(d < ks_critical_value(xs.len(), 0.01), "D = {d}");
}

#[test]
fn geometric_pointing_sampler_has_the_same_law() {
    let p = LinkParams { a0: 0.8, ..paper_point() };
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut xs: Vec<f64> = (0..200_000)
        .map(|_| sample_pointing_geometric(&p, 2.5, &mut rng))
        .collect();
    let s = p.xi_sq();
    let d = ks_statistic(&mut xs, |h| (h / p.a0).min(1.0).powf(s));
    assert!(d < ks_critical_value(xs.len(), 0.01), "D = {d}");
}

#[test]
fn distribution_wrapper_dispatches() {
    let p = paper_point();
    let rf = SnrDistribution::rf(p);
    let fso = SnrDistribution::fso(p);
    assert_eq!(rf.cdf(10.0).unwrap(), rayleigh_snr_cdf(10.0, p.gamma_bar_rf).unwrap());
    assert_eq!(fso.pdf(10.0).unwrap(), ne_pe_snr_pdf(10.0, &p).unwrap());
}
