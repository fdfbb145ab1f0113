//! Workloads shared by the benchmarks: one density curve, one coverage
//! sweep and one BEP pair, each sized like a figure.

use kmu_core::distribution::pdf;
use kmu_core::link_budget::{effective_spec, LinkBudget};
use kmu_core::metrics::{bep, coverage};
use kmu_core::{FadingParams, Modulation, ReprChoice, Result, SnrThreshold, SumSpec, TruncationPolicy};

/// 200-point density curve over [0.01, 5]·N·ŵ.
pub fn density_curve(spec: &SumSpec, policy: &TruncationPolicy) -> Result<f64> {
    let m = spec.mean();
    (0..200)
        .map(|i| pdf(spec, m * (0.01 + 4.99 * i as f64 / 199.0), policy, ReprChoice::Auto).map(|r| r.value))
        .sum()
}

/// Coverage at 200 distances in [10, 600] m.
pub fn coverage_sweep(params: FadingParams, n: u32, th: SnrThreshold) -> Result<f64> {
    let policy = TruncationPolicy::default();
    (0..200)
        .map(|i| {
            let b = LinkBudget {
                distance_m: 10.0 + 590.0 * i as f64 / 199.0,
                ..LinkBudget::default()
            };
            coverage(&effective_spec(&b, params, n)?.spec, th, &policy).map(|r| r.value)
        })
        .sum()
}

/// BEP at the default link budget with a relative target.
pub fn default_bep(params: FadingParams, n: u32) -> Result<f64> {
    let policy = TruncationPolicy {
        target_tol: 1e-300,
        rel_tol: 1e-10,
        ..TruncationPolicy::default()
    };
    let s = effective_spec(&LinkBudget::default(), params, n)?.spec;
    Ok(bep(&s, &Modulation::bpsk(), &policy)?.result.value)
}
