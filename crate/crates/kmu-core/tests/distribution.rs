//! Density, distribution function and Laplace transform of the N-fold sum.
//!
//! Reference values were computed with mpmath at 50 digits from the
//! single-variate κ-μ density with shape Nμ and mean Nŵ (Bessel form), its
//! Poisson mixture of regularized incomplete gammas, and the closed-form
//! Laplace transform ((K/(K+sŵ))^μ exp(κμ(K/(K+sŵ) − 1)))^N.

use kmu_core::distribution::*;
use kmu_core::monte_carlo::{estimate_cdf, simulate_snr_samples};
use kmu_core::quadrature::{integrate, integrate_to_infinity};
use kmu_core::{FadingParams, RngSpec, SumSpec};
use proptest::prelude::*;

fn spec(kappa: f64, mu: f64, n: u32, w_hat: f64) -> SumSpec {
    SumSpec::from_parts(kappa, mu, n, w_hat).unwrap()
}

fn tight() -> TruncationPolicy {
    TruncationPolicy {
        target_tol: 1e-300,
        rel_tol: 1e-14,
        ..Default::default()
    }
}

/// (κ, μ, N, ŵ, w, f_W(w))
const PDF_ORACLE: &[(f64, f64, u32, f64, f64, f64)] = &[
    (1.5, 0.5, 64, 1.0, 20.0, 6.1349895945173372359e-11),
    (1.5, 0.5, 64, 1.0, 32.0, 9.3612512182305722962e-6),
    (1.5, 0.5, 64, 1.0, 64.0, 0.043986577201232551181),
    (1.5, 0.5, 64, 1.0, 100.0, 0.000070272796173433908242),
    (1.5, 0.5, 64, 1.0, 200.0, 2.5877444696968451487e-26),
    (1.5, 1.0, 4, 2.0, 1.0, 0.0014616507434124720551),
    (1.5, 1.0, 4, 2.0, 8.0, 0.1225899924481102928),
    (1.5, 1.0, 4, 2.0, 30.0, 1.6816418182284362171e-6),
    (0.3, 2.0, 8, 0.5, 0.5, 8.7441998234778530017e-9),
    (0.3, 2.0, 8, 0.5, 4.0, 0.40770587358625657059),
    (0.3, 2.0, 8, 0.5, 12.0, 2.1949029666817757994e-8),
    (3.0, 0.75, 16, 3.0, 10.0, 3.6241074011485692325e-9),
    (3.0, 0.75, 16, 3.0, 48.0, 0.043368126337011939096),
    (3.0, 0.75, 16, 3.0, 150.0, 6.2577664912790551564e-16),
];

/// (κ, μ, N, ŵ, w, F_W(w))
const CDF_ORACLE: &[(f64, f64, u32, f64, f64, f64)] = &[
    (1.5, 0.5, 64, 1.0, 20.0, 4.1544038032645511361e-11),
    (1.5, 0.5, 64, 1.0, 32.0, 0.000012741021099372139587),
    (1.5, 0.5, 64, 1.0, 64.0, 0.51617491302069051672),
    (1.5, 0.5, 64, 1.0, 100.0, 0.99978269705353502767),
    (1.5, 0.5, 64, 1.0, 200.0, 1.0),
    (1.5, 1.0, 4, 2.0, 1.0, 0.00034893032719370749582),
    (1.5, 1.0, 4, 2.0, 8.0, 0.54601840806263303796),
    (1.5, 1.0, 4, 2.0, 30.0, 0.99999765935150398241),
    (0.3, 2.0, 8, 0.5, 0.5, 3.0639915048421277402e-10),
    (0.3, 2.0, 8, 0.5, 4.0, 0.53126561127836521459),
    (0.3, 2.0, 8, 0.5, 12.0, 0.99999999282667933207),
    (3.0, 0.75, 16, 3.0, 10.0, 2.2563671662934316317e-9),
    (3.0, 0.75, 16, 3.0, 48.0, 0.52075650714066034024),
    (3.0, 0.75, 16, 3.0, 150.0, 0.99999999999999868961),
];

/// (κ, μ, N, ŵ, s, E[e^{−sW}])
const MGF_ORACLE: &[(f64, f64, u32, f64, f64, f64)] = &[
    (1.5, 0.5, 4, 1.0, 0.1, 0.68650326038820989802),
    (1.5, 0.5, 4, 1.0, 2.0, 0.02334956939864669737),
    (1.5, 0.5, 4, 1.0, 10.0, 0.00085782038546668561456),
    (1.5, 0.5, 64, 1.0, 0.01, 0.52944086038453360754),
    (1.5, 0.5, 64, 1.0, 0.5, 2.3327287898889233656e-11),
    (0.3, 2.0, 8, 0.5, 1.0, 0.027641300997792352073),
    (0.3, 2.0, 8, 0.5, 3.0, 0.00011813222383035203661),
];

fn close(v: f64, o: f64, abs: f64, rel: f64) -> bool {
    (v - o).abs() <= abs + rel * o.abs()
}

#[test]
fn pdf_matches_reference_values() {
    for &(k, mu, n, wh, w, o) in PDF_ORACLE {
        let s = spec(k, mu, n, wh);
        for repr in [ReprChoice::Auto, ReprChoice::Tilde] {
            let r = pdf(&s, w, &tight(), repr).unwrap();
            assert!(close(r.value, o, 1e-300, 1e-11), "{k} {mu} {n} {wh} {w} {repr:?}: {} vs {o}", r.value);
            assert!((r.value - o).abs() <= r.error_bound + 1e-15 * o, "bound {r:?} vs {o}");
        }
    }
}

#[test]
fn cdf_matches_reference_values() {
    for &(k, mu, n, wh, w, o) in CDF_ORACLE {
        let s = spec(k, mu, n, wh);
        for repr in [ReprChoice::Auto, ReprChoice::Tilde] {
            let r = cdf(&s, w, &tight(), repr).unwrap();
            assert!(close(r.value, o, 1e-15, 1e-11), "{k} {mu} {n} {wh} {w} {repr:?}: {} vs {o}", r.value);
        }
    }
}

#[test]
fn mgf_matches_closed_form() {
    for &(k, mu, n, wh, s_, o) in MGF_ORACLE {
        let s = spec(k, mu, n, wh);
        let r = mgf(&s, s_, &tight(), ReprChoice::Tilde).unwrap();
        assert!(close(r.value, o, 0.0, 1e-12), "{k} {mu} {n} {s_}: {} vs {o}", r.value);
        if s_ > s.k_big() / wh {
            let r = mgf(&s, s_, &tight(), ReprChoice::Standard).unwrap();
            assert!(close(r.value, o, 0.0, 1e-10), "standard {k} {mu} {n} {s_}: {} vs {o}", r.value);
        }
    }
}

#[test]
fn mgf_standard_form_requires_large_s() {
    let s = spec(1.5, 0.5, 4, 1.0);
    assert!(mgf(&s, 0.5 * s.k_big(), &tight(), ReprChoice::Standard).is_err());
    assert!(mgf(&s, 0.0, &tight(), ReprChoice::Tilde).is_err());
}

#[test]
fn mgf_near_zero_and_dual_forms() {
    let p = TruncationPolicy::default();
    let s = spec(1.5, 0.5, 64, 1.0);
    let r = mgf(&s, 1e-12, &p, ReprChoice::Tilde).unwrap();
    assert!((r.value - 1.0).abs() <= 1e-9);
    for s in [spec(1.5, 0.5, 4, 1.0), spec(0.3, 2.0, 8, 0.5), spec(3.0, 1.0, 2, 7.0)] {
        let at = 3.0 * s.k_big() / s.w_hat;
        let a = mgf(&s, at, &tight(), ReprChoice::Standard).unwrap().value;
        let b = mgf(&s, at, &tight(), ReprChoice::Tilde).unwrap().value;
        assert!(((a - b) / b).abs() <= 1e-10, "{a} vs {b}");
    }
}

#[test]
fn mgf_matches_laplace_quadrature() {
    let s = spec(1.5, 0.5, 4, 1.0);
    let p = tight();
    let f = |w: f64| pdf(&s, w, &p, ReprChoice::Auto).unwrap().value * (-2.0 * w).exp();
    let lap = integrate(f, 0.0, 4.0, 0.0, 1e-13).unwrap().value
        + integrate_to_infinity(f, 4.0, 0.0, 1e-13).unwrap().value;
    let m = mgf(&s, 2.0, &p, ReprChoice::Auto).unwrap().value;
    assert!(((m - lap) / m).abs() < 1e-11, "{m} vs {lap}");
}

#[test]
fn aggregation_identity_on_rice_set() {
    let s = spec(1.5, 1.0, 64, 1.0);
    let p = tight();
    let mut worst = 0.0f64;
    for i in 0..=190 {
        let w = 20.0 + 2.0 * i as f64;
        let v = pdf(&s, w, &p, ReprChoice::Auto).unwrap().value;
        let o = oracle_pdf_single(1.5, 64.0, 64.0, w).unwrap();
        worst = worst.max((v - o).abs());
    }
    assert!(worst <= 1e-12, "{worst}");
}

/// Density of W1 + W2 by quadrature of f1(t) f2(w − t). With t = w sin²θ
/// the t^{μ−1} and (w−t)^{μ−1} endpoint singularities (μ ≥ ½) become
/// integrable powers of sinθ and cosθ.
fn convolve(f: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64, w: f64) -> f64 {
    let h = |th: f64| {
        let (sn, cs) = th.sin_cos();
        let t = w * sn * sn;
        f(t) * g(w * cs * cs) * 2.0 * w * sn * cs
    };
    integrate(h, 0.0, std::f64::consts::FRAC_PI_2, 0.0, 1e-13).unwrap().value
}

#[test]
fn aggregation_identity_by_convolution() {
    for &(k, mu, wh) in &[(1.5, 0.5, 1.0), (0.7, 1.5, 2.0), (3.0, 1.0, 0.5)] {
        let single = |t: f64| if t > 0.0 { oracle_pdf_single(k, mu, wh, t).unwrap() } else { 0.0 };
        let two = |t: f64| if t > 0.0 { oracle_pdf_single(k, 2.0 * mu, 2.0 * wh, t).unwrap() } else { 0.0 };
        for &w in &[0.3 * wh, wh, 2.0 * wh, 5.0 * wh] {
            let s2 = spec(k, mu, 2, wh);
            let conv2 = convolve(single, single, w);
            let v2 = pdf(&s2, w, &tight(), ReprChoice::Auto).unwrap().value;
            assert!(close(v2, conv2, 1e-14, 1e-9), "N=2 {k} {mu} {w}: {v2} vs {conv2}");
            let s3 = spec(k, mu, 3, wh);
            let conv3 = convolve(single, two, w);
            let v3 = pdf(&s3, w, &tight(), ReprChoice::Auto).unwrap().value;
            assert!(close(v3, conv3, 1e-14, 1e-9), "N=3 {k} {mu} {w}: {v3} vs {conv3}");
        }
    }
}

#[test]
fn normalization() {
    let s = spec(1.5, 0.5, 64, 1.0);
    let p = TruncationPolicy::default();
    let f = |w: f64| pdf(&s, w, &p, ReprChoice::Auto).unwrap().value;
    let total: f64 = [0.0, 32.0, 64.0, 128.0, 2000.0]
        .windows(2)
        .map(|ab| integrate(f, ab[0], ab[1], 1e-15, 1e-13).unwrap().value)
        .sum();
    assert!((total - 1.0).abs() <= 1e-10, "{total}");
}

#[test]
fn cdf_limits() {
    let p = TruncationPolicy::default();
    for s in [spec(1.5, 0.5, 64, 1.0), spec(0.3, 2.0, 8, 0.5), spec(0.0, 0.5, 4, 1.0)] {
        assert_eq!(cdf(&s, 0.0, &p, ReprChoice::Auto).unwrap().value, 0.0);
        let far = cdf(&s, 1e6 * s.mean(), &p, ReprChoice::Auto).unwrap().value;
        assert!((far - 1.0).abs() <= 1e-12, "{far}");
    }
}

#[test]
fn cdf_matches_monte_carlo() {
    let params = FadingParams::new(1.5, 0.5).unwrap();
    let n = 10_000_000;
    let samples = simulate_snr_samples(&params, 64, 1.0, 0.0, n, &RngSpec::new(20_240_601, 0)).unwrap();
    let est = estimate_cdf(&samples, 64.0).unwrap();
    let p = cdf(&spec(1.5, 0.5, 64, 1.0), 64.0, &TruncationPolicy::default(), ReprChoice::Auto)
        .unwrap()
        .value;
    let tol = 4.0 * (p * (1.0 - p) / n as f64).sqrt();
    assert!((est.estimate - p).abs() <= tol, "{} vs {p} (tol {tol})", est.estimate);
}

#[test]
fn density_at_zero() {
    let p = TruncationPolicy::default();
    let expo = spec(0.0, 1.0, 1, 1.0);
    assert!((pdf(&expo, 1.0, &p, ReprChoice::Auto).unwrap().value - (-1f64).exp()).abs() < 1e-15);
    assert_eq!(pdf(&spec(1.5, 0.5, 4, 1.0), 0.0, &p, ReprChoice::Auto).unwrap().value, 0.0);
    // Nμ = 1: finite edge value e^{−Nκμ} K/ŵ
    let edge = spec(1.5, 0.5, 2, 1.0);
    let v = pdf(&edge, 0.0, &p, ReprChoice::Auto).unwrap().value;
    assert!((v - (-1.5f64).exp() * 1.25).abs() < 1e-15);
    let near = pdf(&edge, 1e-9, &p, ReprChoice::Auto).unwrap().value;
    assert!((near - v).abs() < 1e-8);
    assert!(pdf(&spec(1.5, 0.5, 1, 1.0), 0.0, &p, ReprChoice::Auto).is_err());
    assert!(pdf(&spec(1.5, 0.5, 4, 1.0), -1.0, &p, ReprChoice::Auto).is_err());
}

#[test]
fn gamma_limit_route() {
    let p = TruncationPolicy::default();
    assert!((gamma_limit_pdf(1.0, 1, 1.0, 1.0).unwrap() - (-1f64).exp()).abs() < 1e-15);
    let total = integrate(|w| gamma_limit_pdf(0.5, 4, 1.0, w).unwrap(), 1e-300, 20.0, 0.0, 1e-12)
        .unwrap()
        .value
        + integrate_to_infinity(|w| gamma_limit_pdf(0.5, 4, 1.0, w).unwrap(), 20.0, 0.0, 1e-12)
            .unwrap()
            .value;
    assert!((total - 1.0).abs() < 1e-10, "{total}");
    let near = spec(1e-8, 0.5, 4, 1.0);
    for i in 1..=40 {
        let w = 0.25 * i as f64;
        let g = gamma_limit_pdf(0.5, 4, 1.0, w).unwrap();
        let v = pdf(&near, w, &p, ReprChoice::Auto).unwrap().value;
        assert!((g - v).abs() <= 1e-7, "{w}: {g} vs {v}");
    }
    let zero = spec(0.0, 0.5, 4, 1.0);
    let r = cdf(&zero, 2.0, &p, ReprChoice::Auto).unwrap();
    assert_eq!(r.representation, Representation::GammaLimit);
    assert!((r.value - gamma_limit_cdf(0.5, 4, 1.0, 2.0).unwrap()).abs() < 1e-15);
    assert!(pdf(&zero, 2.0, &p, ReprChoice::Standard).is_err());
}

#[test]
fn oracle_single_checks() {
    let v = oracle_pdf_single(1e-9, 1.0, 1.0, 1.0).unwrap();
    assert!((v - (-1f64).exp()).abs() < 1e-8);
    let f = |w: f64| oracle_pdf_single(1.5, 1.5, 1.0, w).unwrap();
    let total = integrate(f, 1e-300, 1.0, 0.0, 1e-13).unwrap().value
        + integrate_to_infinity(f, 1.0, 0.0, 1e-13).unwrap().value;
    assert!((total - 1.0).abs() <= 1e-10, "{total}");
    let g = |w: f64| w * oracle_pdf_single(1.5, 0.5, 2.0, w).unwrap();
    let mean = integrate(g, 1e-300, 2.0, 0.0, 1e-13).unwrap().value
        + integrate_to_infinity(g, 2.0, 0.0, 1e-13).unwrap().value;
    assert!((mean - 2.0).abs() <= 1e-8, "{mean}");
    assert!(oracle_pdf_single(0.0, 1.0, 1.0, 1.0).is_err());
    assert!(oracle_pdf_single(1.0, 1.0, 1.0, -1.0).is_err());
}

#[test]
fn truncation_bound_anchors() {
    let s = spec(1.5, 0.5, 64, 1.0);
    let b100 = truncation_bound(&s, 64.0, 100, 0).unwrap();
    let b200 = truncation_bound(&s, 64.0, 200, 0).unwrap();
    assert!(b200 < b100, "{b200} vs {b100}");
    assert!(truncation_bound(&s, 64.0, 0, 0).is_err());
    let c = convergence_diag(&s, 64.0, 0).unwrap();
    assert!(c.is_finite() && c > 0.0);
}

/// Terms of the standard density series, t_m = pre · k_m w^{Nμ+m−1}/(ŵ^{Nμ+m} Γ(Nμ+m)).
fn standard_terms(s: &SumSpec, w: f64, zeta: u8, count: usize) -> Vec<f64> {
    use kmu_core::coefficients::{CoefficientCache, CoefficientKind};
    use kmu_core::special_functions::ln_gamma as lgamma;
    let mut cache = CoefficientCache::with_limits(CoefficientKind::Standard, *s, count + 1, f64::INFINITY).unwrap();
    let nmu = s.n_mu();
    let z = f64::from(zeta);
    let pre = nmu * (s.k_big().ln() - s.kappa());
    (0..count)
        .map(|m| {
            let k = cache.get(m).unwrap();
            let mf = m as f64;
            let ln = pre + (nmu + mf - 1.0 + z) * w.ln() - (nmu + mf) * s.w_hat.ln() - lgamma(nmu + mf + z).unwrap();
            k.sign as f64 * (k.log_mag + ln).exp()
        })
        .collect()
}

#[test]
fn convergence_diag_dominates_absolute_sum() {
    let draws = [(1.5, 0.5, 4, 1.0, 2.0), (0.5, 1.0, 2, 1.0, 1.0), (2.0, 0.75, 3, 2.0, 3.0), (1.0, 2.0, 1, 1.0, 0.5)];
    for &(k, mu, n, wh, w) in &draws {
        let s = spec(k, mu, n, wh);
        for zeta in [0u8, 1] {
            let abs: f64 = standard_terms(&s, w, zeta, 4000).iter().map(|t| t.abs()).sum();
            let d = convergence_diag(&s, w, zeta).unwrap();
            assert!(d >= abs, "{k} {mu} {n} {w} ζ={zeta}: {d} < {abs}");
        }
    }
}

#[test]
fn convergence_diag_small_w_slope() {
    let s = spec(1.5, 0.5, 4, 1.0);
    for zeta in [0u8, 1] {
        let (a, b) = (1e-6, 2e-6);
        let slope = (convergence_diag(&s, b, zeta).unwrap() / convergence_diag(&s, a, zeta).unwrap()).ln() / 2f64.ln();
        let expect = s.n_mu() - 1.0 + f64::from(zeta);
        assert!((slope - expect).abs() < 1e-4, "ζ={zeta}: {slope} vs {expect}");
    }
}

#[test]
fn derivative_of_cdf_is_pdf() {
    let p = tight();
    for s in [spec(1.5, 0.5, 64, 1.0), spec(0.3, 2.0, 8, 0.5)] {
        for i in 1..10 {
            let w = s.mean() * (0.6 + 0.1 * i as f64);
            let h = 1e-5 * w;
            let d = (cdf(&s, w + h, &p, ReprChoice::Auto).unwrap().value
                - cdf(&s, w - h, &p, ReprChoice::Auto).unwrap().value)
                / (2.0 * h);
            let f = pdf(&s, w, &p, ReprChoice::Auto).unwrap().value;
            assert!(((d - f) / f).abs() < 1e-6, "{w}: {d} vs {f}");
        }
    }
}

#[test]
fn shared_caches_serve_parallel_readers() {
    use std::thread;
    let s = spec(1.5, 0.5, 64, 1.0);
    let p = TruncationPolicy::default();
    shared_caches(&s).unwrap().warm_up(kmu_core::CoefficientKind::Tilde, 1024).unwrap();
    let serial: Vec<f64> = (1..=16).map(|i| pdf(&s, 8.0 * i as f64, &p, ReprChoice::Auto).unwrap().value).collect();
    let handles: Vec<_> = (1..=16)
        .map(|i| thread::spawn(move || pdf(&s, 8.0 * i as f64, &p, ReprChoice::Auto).unwrap().value))
        .collect();
    let par: Vec<f64> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    assert_eq!(serial, par);
}

#[test]
fn policy_validation() {
    let s = spec(1.5, 0.5, 4, 1.0);
    let bad = [
        TruncationPolicy { target_tol: 0.0, ..Default::default() },
        TruncationPolicy { eps_start: 0, ..Default::default() },
        TruncationPolicy { eps_start: 128, eps_max: 64, ..Default::default() },
        TruncationPolicy { zeta: 2, ..Default::default() },
    ];
    for p in bad {
        assert!(pdf(&s, 1.0, &p, ReprChoice::Auto).is_err(), "{p:?}");
    }
    let short = TruncationPolicy { eps_start: 2, eps_max: 2, ..Default::default() };
    assert!(matches!(
        pdf(&spec(1.5, 0.5, 64, 1.0), 64.0, &short, ReprChoice::Tilde),
        Err(kmu_core::Error::NoConvergence { .. })
    ));
}

#[test]
fn evaluate_dispatches_on_zeta() {
    let s = spec(1.5, 0.5, 4, 1.0);
    let p = TruncationPolicy::default();
    assert_eq!(evaluate(&s, 2.0, &p, ReprChoice::Auto).unwrap(), pdf(&s, 2.0, &p, ReprChoice::Auto).unwrap());
    assert_eq!(
        evaluate(&s, 2.0, &p.with_zeta(1), ReprChoice::Auto).unwrap(),
        cdf(&s, 2.0, &p, ReprChoice::Auto).unwrap()
    );
}

fn arb_spec() -> impl Strategy<Value = SumSpec> {
    (0.05f64..4.0, 0.25f64..3.0, 1u32..=32, 0.1f64..5.0).prop_map(|(k, mu, n, wh)| spec(k, mu, n, wh))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cdf_is_monotone_in_unit_interval(s in arb_spec(), a in 0.05f64..3.0, b in 0.05f64..3.0) {
        let p = TruncationPolicy::default();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let fl = cdf(&s, lo * s.mean(), &p, ReprChoice::Auto).unwrap();
        let fh = cdf(&s, hi * s.mean(), &p, ReprChoice::Auto).unwrap();
        prop_assert!((0.0..=1.0).contains(&fl.value) && (0.0..=1.0).contains(&fh.value));
        prop_assert!(fh.value >= fl.value - fl.error_bound - fh.error_bound);
    }

    #[test]
    fn pdf_is_nonnegative(s in arb_spec(), a in 0.01f64..5.0) {
        let r = pdf(&s, a * s.mean(), &TruncationPolicy::default(), ReprChoice::Auto).unwrap();
        prop_assert!(r.value >= -r.error_bound);
        prop_assert!(r.error_bound >= 0.0 && r.terms_used <= 4096);
    }

    #[test]
    fn representations_agree(s in arb_spec(), a in 0.05f64..0.9) {
        // Kw/ŵ ≤ 0.9 · K · N keeps the standard series well conditioned for small N
        let w = a * s.w_hat / s.k_big();
        let p = TruncationPolicy::default();
        for f in [pdf, cdf] {
            let st = f(&s, w, &p, ReprChoice::Standard).unwrap();
            let ti = f(&s, w, &p, ReprChoice::Tilde).unwrap();
            prop_assert!((st.value - ti.value).abs() <= 1e-10 * ti.value.abs().max(1.0),
                "{} vs {}", st.value, ti.value);
        }
    }

    #[test]
    fn error_bound_covers_doubling(s in arb_spec(), a in 0.05f64..4.0, zeta in 0u8..=1) {
        let w = a * s.mean();
        let p = TruncationPolicy::default().with_zeta(zeta);
        let r = evaluate(&s, w, &p, ReprChoice::Tilde).unwrap();
        let e2 = (2 * r.terms_used).min(kmu_core::distribution::MAX_EPS);
        let fixed = TruncationPolicy { eps_start: e2, eps_max: e2, target_tol: 1.0, ..p };
        let d = evaluate(&s, w, &fixed, ReprChoice::Tilde).unwrap();
        prop_assert!((d.value - r.value).abs() <= r.error_bound + d.error_bound,
            "{:?} vs {:?}", r, d);
    }

    #[test]
    fn mgf_is_a_decreasing_transform(s in arb_spec(), a in 0.01f64..5.0, b in 0.01f64..5.0) {
        let p = TruncationPolicy::default();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let ml = mgf(&s, lo / s.w_hat, &p, ReprChoice::Auto).unwrap().value;
        let mh = mgf(&s, hi / s.w_hat, &p, ReprChoice::Auto).unwrap().value;
        prop_assert!(ml <= 1.0 + 1e-12 && mh > 0.0);
        prop_assert!(mh <= ml + 1e-12);
    }
}
