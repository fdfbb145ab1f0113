//! Acceptance criteria. Runs without the test harness so that every criterion
//! prints one PASS/FAIL line; the process exits nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use kmu_core::coefficients::{naive_k_coeff, CoefficientCache, CoefficientKind, FadingParams};
use kmu_core::distribution::{
    cdf, oracle_pdf_single, pdf, truncation_bound, ReprChoice, TruncationPolicy,
};
use kmu_core::link_budget::{effective_spec, w_hat_from_budget, LinkBudget};
use kmu_core::metrics::*;
use kmu_core::monte_carlo::{
    estimate_bep, estimate_mean_snr, ks_test, simulate_snr_samples, RngSpec, TabulatedCdf,
};
use kmu_core::special_functions::ln_gamma;
use kmu_core::SumSpec;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)*) => {
        if !$cond {
            return Err(format!($($fmt)*));
        }
    };
}

fn ok<T, E: std::fmt::Debug>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| format!("{e:?}"))
}

fn rice() -> FadingParams {
    FadingParams::new(1.5, 0.5).unwrap()
}

/// Relative targets only: absolute ones are meaningless for tiny BEPs.
fn rel(r: f64) -> TruncationPolicy {
    TruncationPolicy {
        target_tol: 1e-300,
        rel_tol: r,
        ..Default::default()
    }
}

/// Exactly `eps` terms; the tolerance is loose enough to stop at once.
fn fixed_terms(eps: usize) -> TruncationPolicy {
    TruncationPolicy {
        target_tol: 1.0,
        rel_tol: 0.0,
        eps_start: eps,
        eps_max: eps,
        zeta: 0,
    }
}

/// The four density-figure sets at N = 64, ŵ = 1; κ → 0 is taken as 1e-9.
const FIG_SETS: [(f64, f64); 4] = [(1e-9, 0.5), (1.5, 0.5), (1.5, 1.0), (1.5, 1.5)];

fn exactness() -> Outcome {
    let policy = TruncationPolicy {
        target_tol: 1e-14,
        eps_start: 64,
        eps_max: 500,
        ..Default::default()
    };
    let mut worst = 0.0f64;
    let mut slowest = 0.0f64;
    for (k, mu) in FIG_SETS {
        let s = ok(SumSpec::from_parts(k, mu, 64, 1.0))?;
        let t = Instant::now();
        let mut diffs = Vec::with_capacity(200);
        for i in 0..200 {
            let w = 64.0 * (0.01 + (5.0 - 0.01) * i as f64 / 199.0);
            let v = ok(pdf(&s, w, &policy, ReprChoice::Auto))?.value;
            diffs.push((w, v));
        }
        let secs = t.elapsed().as_secs_f64();
        slowest = slowest.max(secs);
        for (w, v) in diffs {
            let exact = ok(oracle_pdf_single(k, 64.0 * mu, 64.0, w))?;
            worst = worst.max((v - exact).abs());
        }
        ensure!(secs <= 1.0, "({k}, {mu}) curve took {secs:.3} s");
    }
    ensure!(worst <= 1e-12, "max |diff| = {worst:e}");
    Ok(format!("max |diff| = {worst:.2e}, slowest curve {slowest:.3} s"))
}

fn memoization() -> Outcome {
    let t = Instant::now();
    let s = ok(SumSpec::new(rice(), 64, 1.0))?;
    let mut c = ok(CoefficientCache::new(CoefficientKind::Standard, s))?;
    ok(c.fill_to(250))?;
    let count = c.eval_count();
    ensure!(count <= 62_749, "{count} recursion bodies at eps = 250");
    let (_, naive) = ok(naive_k_coeff(&s, 16))?;
    ensure!(naive == 65_535, "naive count {naive}");
    let secs = t.elapsed().as_secs_f64();
    ensure!(secs < 1.0, "took {secs:.3} s");
    Ok(format!("memoized {count}, naive {naive}, {secs:.3} s"))
}

fn coverage_at(d: f64, th_db: f64, p: &TruncationPolicy) -> Result<f64, String> {
    let b = LinkBudget {
        distance_m: d,
        ..LinkBudget::default()
    };
    let s = ok(effective_spec(&b, rice(), 512))?.spec;
    Ok(ok(coverage(&s, ok(SnrThreshold::from_db(th_db))?, p))?.value)
}

fn coverage_reproduction() -> Outcome {
    let p = TruncationPolicy::default();
    let t = Instant::now();
    let mut notes = Vec::new();
    for (th, d) in [(0.0, 450.0), (5.0, 250.0)] {
        let sweep: Vec<f64> = (1..=60)
            .map(|i| coverage_at(10.0 * i as f64, th, &p))
            .collect::<Result<_, _>>()?;
        ensure!(
            sweep.windows(2).all(|w| w[1] <= w[0]),
            "coverage not monotone in distance at {th} dB"
        );
        let at = coverage_at(d, th, &p)?;
        let beyond = coverage_at(1.25 * d, th, &p)?;
        ensure!(at >= 0.99, "{th} dB: coverage {at} at {d} m");
        ensure!(beyond < 0.99, "{th} dB: coverage {beyond} at {} m", 1.25 * d);
        notes.push(format!("{th} dB: {at:.5} at {d} m, {beyond:.4} at {} m", 1.25 * d));
    }
    let secs = t.elapsed().as_secs_f64();
    ensure!(secs <= 10.0, "sweep took {secs:.2} s");
    Ok(format!("{}; {secs:.2} s", notes.join("; ")))
}

fn reference_bep(n: u32, b: &LinkBudget) -> Result<f64, String> {
    let s = ok(effective_spec(b, rice(), n))?.spec;
    Ok(ok(bep(&s, &Modulation::bpsk(), &rel(1e-10)))?.result.value)
}

fn bep_reproduction() -> Outcome {
    let b = LinkBudget::default();
    let (p256, p512) = (reference_bep(256, &b)?, reference_bep(512, &b)?);
    let ratio = p256 / p512;
    ensure!((4.25e-3..=5.75e-3).contains(&p256), "BEP(256) = {p256:e}");
    ensure!((1.19e-4..=1.61e-4).contains(&p512), "BEP(512) = {p512:e}");
    ensure!((30.0..=42.0).contains(&ratio), "ratio {ratio}");
    Ok(format!("BEP(256) = {p256:.4e}, BEP(512) = {p512:.4e}, ratio {ratio:.2}"))
}

/// Carrier frequency at which the BEP reaches `target`; BEP grows with f_c.
fn crossing_frequency(n: u32, target: f64) -> Result<f64, String> {
    let at = |fc: f64| {
        reference_bep(
            n,
            &LinkBudget {
                fc_hz: fc,
                ..LinkBudget::default()
            },
        )
    };
    let (mut lo, mut hi) = (1e9, 1e13);
    ensure!(at(lo)? < target && at(hi)? > target, "no bracket for N = {n}");
    while hi / lo > 1.0 + 1e-7 {
        let mid = (lo * hi).sqrt();
        if at(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}

fn frequency_headroom() -> Outcome {
    let t = Instant::now();
    let f512 = crossing_frequency(512, 1e-3)?;
    let f128 = crossing_frequency(128, 1e-3)?;
    let ratio = f512 / f128;
    let secs = t.elapsed().as_secs_f64();
    ensure!((1.5..=1.7).contains(&ratio), "ratio {ratio}");
    ensure!(secs <= 30.0, "bisection took {secs:.2} s");
    Ok(format!(
        "f(512) = {:.2} GHz, f(128) = {:.2} GHz, ratio {ratio:.4}, {secs:.2} s",
        f512 / 1e9,
        f128 / 1e9
    ))
}

fn dual_approach() -> Outcome {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
    let m = Modulation::bpsk();
    let (mut d12, mut dq) = (0.0f64, 0.0f64);
    for _ in 0..30 {
        let (n, k, mu, y) = (
            rng.gen_range(1..=16u32),
            rng.gen_range(0.2..4.0),
            rng.gen_range(0.25..3.0),
            rng.gen_range(0.02..0.9),
        );
        let s = ok(SumSpec::from_parts(k, mu, n, (1.0 + k) * mu / y))?;
        let a1 = ok(bep_series_a1(&s, &m, &rel(1e-13)))?.value;
        let a2 = ok(bep_series_a2(&s, &m, &rel(1e-13)))?.value;
        let q = ok(bep_by_quadrature(&s, &m, &rel(1e-13), 1e-12))?;
        d12 = d12.max(((a1 - a2) / a2).abs());
        dq = dq.max(((a1 - q) / q).abs()).max(((a2 - q) / q).abs());
    }
    ensure!(d12 <= 1e-9, "max |a1 - a2|/a2 = {d12:e}");
    ensure!(dq <= 1e-8, "max deviation from quadrature {dq:e}");
    Ok(format!("max a1/a2 {d12:.2e}, max vs quadrature {dq:.2e}"))
}

/// Σ_{m=ε}^{ε+2000} |k_m| (K e^{−κ})^{Nμ} w^{Nμ+m−1+ζ} / (ŵ^{Nμ+m} Γ(Nμ+m+ζ)),
/// together with the signed and absolute sums of the first ε+2000 terms.
fn brute_tail(s: &SumSpec, w: f64, eps: usize, zeta: u8) -> Result<(f64, f64, f64), String> {
    let last = eps + 2000;
    let mut c = ok(CoefficientCache::with_limits(CoefficientKind::Standard, *s, last, f64::INFINITY))?;
    ok(c.fill_to(last))?;
    let (nmu, z) = (s.n_mu(), f64::from(zeta));
    let lead = nmu * (s.k_big().ln() - s.kappa());
    let (mut tail, mut total, mut abs_total) = (0.0, 0.0, 0.0);
    for (m, k) in c.values().iter().enumerate().take(last + 1) {
        let mf = m as f64;
        let ln = k.log_mag + lead + (nmu + mf - 1.0 + z) * w.ln()
            - (nmu + mf) * s.w_hat.ln()
            - ok(ln_gamma(nmu + mf + z))?;
        let t = ln.exp();
        total += f64::from(k.sign) * t;
        abs_total += t;
        if m >= eps {
            tail += t;
        }
    }
    Ok((tail, total, abs_total))
}

fn bound_validity() -> Outcome {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let mut tightest = f64::INFINITY;
    for _ in 0..20 {
        let s = ok(SumSpec::from_parts(
            rng.gen_range(0.3..3.0),
            rng.gen_range(0.25..2.5),
            rng.gen_range(1..=8u32),
            rng.gen_range(0.5..2.0),
        ))?;
        let w = rng.gen_range(0.05..2.0) * s.mean();
        let eps = rng.gen_range(1..=120usize);
        let zeta = rng.gen_range(0..=1u8);
        let bound = ok(truncation_bound(&s, w, eps, zeta))?;
        let (tail, total, abs_total) = brute_tail(&s, w, eps, zeta)?;
        // the brute-force f64 sum reproduces the series value up to its own
        // cancellation
        let series = if zeta == 0 { pdf(&s, w, &rel(1e-14), ReprChoice::Tilde) } else { cdf(&s, w, &rel(1e-14), ReprChoice::Tilde) };
        let series = ok(series)?.value;
        ensure!(
            (total - series).abs() <= 1e-12 * abs_total,
            "brute-force value {total} vs series {series} for {s:?}"
        );
        ensure!(bound >= tail, "density bound {bound:e} < tail {tail:e} ({s:?}, w {w}, eps {eps}, zeta {zeta})");
        tightest = tightest.min(bound / tail);
    }

    let m = Modulation::bpsk();
    let mut drawn = 0;
    let mut tightest_bep = f64::INFINITY;
    while drawn < 20 {
        let (k, mu, n) = (rng.gen_range(0.3..3.0), rng.gen_range(0.25..2.5), rng.gen_range(1..=8u32));
        let kt = (1.0 + k) * mu * (k * mu + 1.0);
        // the bound needs K̃/(g_b ŵ) < 1
        let s = ok(SumSpec::from_parts(k, mu, n, kt / rng.gen_range(0.1..0.95)))?;
        let eps = rng.gen_range(1..=40usize);
        let bound = ok(bep_truncation_bound(&s, &m, eps))?;
        let short = ok(bep_series_a1(&s, &m, &fixed_terms(eps)))?;
        let long = ok(bep_series_a1(&s, &m, &fixed_terms(4096)))?;
        let a2 = ok(bep_series_a2(&s, &m, &rel(1e-14)))?.value;
        ensure!(((long.value - a2) / a2).abs() <= 1e-10, "4096-term reference {} vs {a2}", long.value);
        let gap = (short.value - long.value).abs();
        // the measured gap carries the rounding of both sums
        let noise = short.rounding_error + long.rounding_error;
        ensure!(bound + noise >= gap, "BEP bound {bound:e} < gap {gap:e} ({s:?}, eps {eps})");
        tightest_bep = tightest_bep.min(bound / gap);
        drawn += 1;
    }
    Ok(format!(
        "0 violations; min bound/tail {tightest:.3} (density), {tightest_bep:.3} (BEP)"
    ))
}

fn monte_carlo_consistency() -> Outcome {
    let mut notes = Vec::new();
    let pol = TruncationPolicy::default();
    for (i, (k, mu)) in FIG_SETS.into_iter().enumerate() {
        let p = ok(FadingParams::new(k, mu))?;
        let s = ok(SumSpec::new(p, 64, 1.0))?;
        let xs = ok(simulate_snr_samples(&p, 64, 1.0, 0.0, 1_000_000, &RngSpec::new(800 + i as u64, 0)))?;
        let hi = xs.iter().cloned().fold(0.0, f64::max);
        let table = ok(TabulatedCdf::from_cdf_pdf(0.0, hi, 4000, |w| {
            Ok((cdf(&s, w, &pol, ReprChoice::Auto)?.value, pdf(&s, w, &pol, ReprChoice::Auto)?.value))
        }))?;
        let ks = ok(ks_test(&xs, |x| table.eval(x)))?;
        ensure!(ks.p_value > 0.01, "KS ({k}, {mu}): {ks:?}");
        notes.push(format!("p={:.3}", ks.p_value));
    }

    let b = LinkBudget::default();
    let s = ok(effective_spec(&b, rice(), 64))?.spec;
    let analytic = ok(bep(&s, &Modulation::bpsk(), &rel(1e-12)))?.result.value;
    let est = ok(estimate_bep(&rice(), 64, &b, &Modulation::bpsk(), 1_000_000, &RngSpec::new(808, 0)))?.with_k(4.0);
    ensure!(est.contains(analytic), "BEP {analytic:e} outside {est:?}");

    let w = ok(w_hat_from_budget(&b))?;
    let mean = ok(estimate_mean_snr(&rice(), 512, w, 0.4, 100_000, &RngSpec::new(809, 0)))?;
    let ratio = mean.estimate / (512.0 * w);
    ensure!((ratio / 0.84 - 1.0).abs() <= 0.02, "mean ratio {ratio}");
    Ok(format!(
        "KS {}; BEP {analytic:.4e} in [{:.4e}, {:.4e}]; mean ratio {ratio:.4} vs 0.84",
        notes.join(" "),
        est.lower(),
        est.upper()
    ))
}

fn asymptotics() -> Outcome {
    let m = Modulation::bpsk();
    let th = ok(SnrThreshold::new(1.0))?;
    let base = ok(SumSpec::from_parts(1.5, 0.5, 4, 100.0))?;
    let (mut cov_gaps, mut bep_gaps) = (Vec::new(), Vec::new());
    for i in 0..=8 {
        let s = ok(base.with_w_hat(100.0 * 2f64.powi(i)))?;
        let out = ok(cdf(&s, th.gamma_th, &rel(1e-13), ReprChoice::Auto))?.value;
        cov_gaps.push((outage_asymptotic(&s, th).value() / out - 1.0).abs());
        let exact = ok(bep(&s, &m, &rel(1e-13)))?.result.value;
        bep_gaps.push((bep_asymptotic(&s, &m) / exact - 1.0).abs());
    }
    for (name, g) in [("outage", &cov_gaps), ("BEP", &bep_gaps)] {
        ensure!(g.windows(2).all(|w| w[1] < w[0]), "{name} gap not shrinking: {g:?}");
        ensure!(g[8] < 0.05, "{name} gap at top {}", g[8]);
    }
    let (s1, s2) = (ok(base.with_w_hat(1e7))?, ok(base.with_w_hat(2e7))?);
    let (b1, b2) = (ok(bep(&s1, &m, &rel(1e-13)))?.result.value, ok(bep(&s2, &m, &rel(1e-13)))?.result.value);
    let slope = (b2 / b1).ln() / 2f64.ln();
    ensure!((slope + base.n_mu()).abs() <= 1e-3, "slope {slope}");
    Ok(format!(
        "top gaps outage {:.2e}, BEP {:.2e}; slope {slope:.6} vs {}",
        cov_gaps[8],
        bep_gaps[8],
        -base.n_mu()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("exactness vs aggregation oracle", exactness),
        ("memoization complexity", memoization),
        ("coverage reproduction", coverage_reproduction),
        ("BEP reproduction", bep_reproduction),
        ("frequency headroom", frequency_headroom),
        ("dual-approach BEP agreement", dual_approach),
        ("bound validity", bound_validity),
        ("Monte Carlo consistency", monte_carlo_consistency),
        ("asymptotics", asymptotics),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} ({detail}) [{secs:.1} s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} ({detail}) [{secs:.1} s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
