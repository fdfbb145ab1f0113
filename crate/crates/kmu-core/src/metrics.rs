//! Coverage probability and bit error probability of coherent binary
//! modulations over the sum of N squared κ-μ variables.

use crate::coefficients::{CoefficientKind, SumSpec};
use crate::distribution::{
    cdf, log_rel, n_mu_exact, pdf, BasisFn, EvalResult, ReprChoice, Representation, Series, Stop,
    TruncationPolicy,
};
use crate::error::{Error, Result};
use crate::quadrature::integrate_to_infinity_scaled;
use crate::signlog::SignLog;
use crate::special_functions::{
    erfc, hyp_pfq, lgamma, reg_gamma_p, stirling_remainder,
};
use crate::xdd::Xdd;

const LN_2_SQRT_PI: f64 = 1.265_512_123_484_645_4;

/// Largest K/(g_b ŵ) for which the dispatcher uses approach 1.
pub const A1_MARGIN: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModulationKind {
    Bpsk,
    BfskOrthogonal,
    BfskMinCorrelation,
}

/// Coherent binary modulation with conditional error ½ erfc(√(g_b γ)).
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Modulation {
    pub name: ModulationKind,
    pub g_b: f64,
}

impl Modulation {
    pub fn new(name: ModulationKind) -> Self {
        let g_b = match name {
            ModulationKind::Bpsk => 1.0,
            ModulationKind::BfskOrthogonal => 0.5,
            ModulationKind::BfskMinCorrelation => 0.715,
        };
        Modulation { name, g_b }
    }

    pub fn bpsk() -> Self {
        Self::new(ModulationKind::Bpsk)
    }

    /// Bit error probability at a fixed SNR.
    pub fn conditional_bep(&self, snr: f64) -> f64 {
        0.5 * erfc((self.g_b * snr).sqrt())
    }
}

/// SNR threshold in linear units.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SnrThreshold {
    pub gamma_th: f64,
}

impl SnrThreshold {
    pub fn new(gamma_th: f64) -> Result<Self> {
        if !(gamma_th > 0.0) || !gamma_th.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "gamma_th must be positive and finite, got {gamma_th}"
            )));
        }
        Ok(SnrThreshold { gamma_th })
    }

    pub fn from_db(db: f64) -> Result<Self> {
        Self::new(db_to_linear(db))
    }

    pub fn db(&self) -> f64 {
        linear_to_db(self.gamma_th)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// P(SNR > γ_th) = 1 − F(γ_th).
pub fn coverage(spec: &SumSpec, th: SnrThreshold, policy: &TruncationPolicy) -> Result<EvalResult> {
    let mut r = cdf(spec, th.gamma_th, policy, ReprChoice::Auto)?;
    r.value = (1.0 - r.value).clamp(0.0, 1.0);
    Ok(r)
}

/// First-order outage term (Kγ_th/(e^κ ŵ))^{Nμ} / Γ(Nμ+1).
pub fn outage_asymptotic(spec: &SumSpec, th: SnrThreshold) -> SignLog {
    let nmu = spec.n_mu();
    let base = (spec.k_big() * th.gamma_th / spec.w_hat).ln() - spec.kappa();
    SignLog::from_ln(nmu * base - lgamma(nmu + 1.0))
}

/// 1 − outage_asymptotic; may be negative far from the high-SNR regime.
pub fn coverage_asymptotic(spec: &SumSpec, th: SnrThreshold) -> f64 {
    1.0 - outage_asymptotic(spec, th).value()
}

/// y = K/(g_b ŵ), the approach-1 gate ratio.
pub fn gate_ratio(spec: &SumSpec, m: &Modulation) -> f64 {
    spec.k_big() / (m.g_b * spec.w_hat)
}

/// lnΓ(a+½) − lnΓ(a+1) without cancellation for large a.
fn ln_gamma_half_ratio(a: f64) -> f64 {
    if a < 16.0 {
        return lgamma(a + 0.5) - lgamma(a + 1.0);
    }
    // Stirling for Γ((a−½)+1) and Γ(a+1)
    a * (-0.5 / a).ln_1p() + 0.5 - 0.5 * a.ln() + stirling_remainder(a - 0.5)
        - stirling_remainder(a)
}

/// Approach 1: power series in K/(g_b ŵ) over the standard coefficients.
/// Requires K/(g_b ŵ) < 1.
pub fn bep_series_a1(spec: &SumSpec, m: &Modulation, policy: &TruncationPolicy) -> Result<EvalResult> {
    check_modulation(m)?;
    let y = gate_ratio(spec, m);
    if !(y < 1.0) {
        return Err(Error::GateViolation { ratio: y });
    }
    if spec.kappa() == 0.0 {
        return Err(Error::InvalidParameter(
            "approach 1 uses the standard series, which needs kappa > 0".into(),
        ));
    }
    let nmu = spec.n_mu();
    let lam = spec.n_kappa_mu();
    let lr = ln_gamma_half_ratio(nmu);
    let pre = SignLog::from_ln(-lam)
        * SignLog::from_f64(y).powf(nmu)
        * SignLog::from_ln(lr - LN_2_SQRT_PI);
    let yy = Xdd::from_f64(y);
    let nmu_x = n_mu_exact(spec);
    let mut g = Xdd::ONE;
    let basis: BasisFn = Box::new(move |k| {
        let out = g;
        let a = nmu_x + Xdd::from_f64(k as f64);
        g = g * yy * (a + Xdd::from_f64(0.5)) / (a + Xdd::ONE);
        Ok((out, 0.0))
    });
    let yt = spec.k_tilde() / (m.g_b * spec.w_hat);
    let stop = if yt < 1.0 {
        let spec = *spec;
        let m = *m;
        Stop::Tail(Box::new(move |eps, _| bep_truncation_bound(&spec, &m, eps)))
    } else {
        Stop::Doubling
    };
    Series {
        func: "bep_series_a1",
        kind: CoefficientKind::Standard,
        representation: Representation::Standard,
        pre,
        pre_rel: log_rel(&[y.ln() * nmu, lr]),
        basis,
        stop,
    }
    .run(spec, policy)
}

/// Lentz continued fraction of the regularized incomplete beta,
/// I_x(a, b) = x^a (1−x)^b / (a B(a, b)) · cf; converges fast for
/// x < (a+1)/(a+b+2). Returns the value and the iteration count.
fn beta_cf(a: f64, b: f64, x: f64) -> Result<(f64, usize)> {
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let (qap, qam) = (a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..100_000 {
        let mf = m as f64;
        let m2 = 2.0 * mf;
        for aa in [
            mf * (b - mf) * x / ((qam + m2) * (a + m2)),
            -(a + mf) * (qab + mf) * x / ((a + m2) * (qap + m2)),
        ] {
            d = 1.0 + aa * d;
            if d.abs() < TINY {
                d = TINY;
            }
            c = 1.0 + aa / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() <= f64::EPSILON && aa < 0.0 {
                return Ok((h, m));
            }
        }
    }
    Err(Error::NoConvergence {
        func: "incomplete_beta",
        terms: 100_000,
        bound: f64::NAN,
    })
}

/// ½ I_x(a, ½) for x = y/(1+y), in sign-log form, with its relative error.
fn half_beta(a: f64, y: f64) -> Result<(SignLog, f64)> {
    let ln_x = y.ln() - y.ln_1p();
    let ln_1mx = -y.ln_1p();
    let x = y / (1.0 + y);
    let lghr = ln_gamma_half_ratio(a);
    // x^a (1−x)^½ Γ(a+½) / (Γ(a) Γ(½))
    let ln_p = a * ln_x + 0.5 * ln_1mx + lghr + a.ln() - 0.5 * std::f64::consts::PI.ln();
    let base = 4.0 * f64::EPSILON * (2.0 + (a * ln_x).abs() + lghr.abs() + a.ln().abs());
    if x < (a + 1.0) / (a + 2.5) {
        let (cf, iters) = beta_cf(a, 0.5, x)?;
        let v = SignLog::from_ln(ln_p - (2.0 * a).ln()) * SignLog::from_f64(cf);
        Ok((v, base + 2.0 * f64::EPSILON * iters as f64))
    } else {
        let (cf, iters) = beta_cf(0.5, a, 1.0 / (1.0 + y))?;
        let t = (ln_p + cf.ln()).exp();
        let v = 0.5 * (1.0 - 2.0 * t);
        // the complement is at least about ½ on this branch
        let rel = (base + 2.0 * f64::EPSILON * iters as f64) * t / v.max(f64::MIN_POSITIVE) + 2.0 * f64::EPSILON;
        Ok((SignLog::from_f64(v), rel))
    }
}

/// Gamma-law BEPs H(a0+m) = ½ I_x(a0+m, ½), x = y/(1+y), m = 0, 1, ...
/// Evaluated in blocks: one incomplete-beta evaluation at the top of the
/// block, then H(a) = H(a+1) + ½T(a) downwards, a sum of positive terms, with
/// ½T(a) = x^a √(1−x) Γ(a+½)/(2√π Γ(a+1)).
fn gamma_bep_basis<'a>(a0: f64, y: f64) -> BasisFn<'a> {
    let mut block: Vec<Xdd> = Vec::new();
    let mut block_rel = 0.0;
    let mut start = 0usize;
    let ln_x = y.ln() - y.ln_1p();
    let ln_1mx = -y.ln_1p();
    let xx = Xdd::from_f64(y) / (Xdd::from_f64(1.0) + Xdd::from_f64(y));
    Box::new(move |m| {
        if m >= start + block.len() {
            start = m;
            let len = m.max(64);
            let top = a0 + (m + len - 1) as f64;
            let (f, top_rel) = half_beta(top, y)?;
            let lghr = ln_gamma_half_ratio(top);
            let mut h = Xdd::from_signlog(f);
            let mut half_t = Xdd::from_signlog(SignLog::from_ln(
                top * ln_x + 0.5 * ln_1mx + lghr - LN_2_SQRT_PI,
            ));
            block = vec![Xdd::ZERO; len];
            block[len - 1] = h;
            for k in (0..len - 1).rev() {
                let a = a0 + (m + k) as f64;
                half_t = half_t * Xdd::from_f64(a + 1.0) / (xx * Xdd::from_f64(a + 0.5));
                h = h + half_t;
                block[k] = h;
            }
            block_rel = top_rel
                + 4.0 * f64::EPSILON * (2.0 + (top * ln_x).abs() + lghr.abs())
                + 4.0 * f64::EPSILON * len as f64;
        }
        Ok((block[m - start], block_rel))
    })
}

/// Approach 2: Poisson mixture of Gamma-law BEPs over the tilde
/// coefficients; valid for every ŵ.
pub fn bep_series_a2(spec: &SumSpec, m: &Modulation, policy: &TruncationPolicy) -> Result<EvalResult> {
    check_modulation(m)?;
    let y = gate_ratio(spec, m);
    let nmu = spec.n_mu();
    let lam = spec.n_kappa_mu();
    Series {
        func: "bep_series_a2",
        kind: CoefficientKind::Tilde,
        representation: Representation::Tilde,
        pre: SignLog::from_ln(-lam),
        pre_rel: 0.0,
        basis: gamma_bep_basis(nmu, y),
        // the Gamma-law BEP decreases with shape, so the tail is at most
        // H(Nμ+ε) · P(Poisson(Nκμ) ≥ ε)
        stop: Stop::Tail(Box::new(move |eps, t| {
            let p = if lam == 0.0 {
                0.0
            } else {
                reg_gamma_p(eps as f64, lam)?
            };
            Ok(t.basis.value() * p)
        })),
    }
    .run(spec, policy)
}

/// First term of approach 1: Γ(Nμ+½)/(2√π Γ(Nμ+1)) (K/(e^κ g_b ŵ))^{Nμ}.
pub fn bep_asymptotic_signlog(spec: &SumSpec, m: &Modulation) -> SignLog {
    let nmu = spec.n_mu();
    let base = (spec.k_big() / (m.g_b * spec.w_hat)).ln() - spec.kappa();
    SignLog::from_ln(nmu * base + ln_gamma_half_ratio(nmu) - LN_2_SQRT_PI)
}

pub fn bep_asymptotic(spec: &SumSpec, m: &Modulation) -> f64 {
    bep_asymptotic_signlog(spec, m).value()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BepApproach {
    A1,
    A2,
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BepResult {
    pub result: EvalResult,
    pub approach: BepApproach,
}

/// Approach 1 when K/(g_b ŵ) ≤ 0.9, else approach 2; approach 1 failures
/// (ill-conditioned coefficients, no convergence) also fall back to 2.
pub fn bep(spec: &SumSpec, m: &Modulation, policy: &TruncationPolicy) -> Result<BepResult> {
    if gate_ratio(spec, m) <= A1_MARGIN && spec.kappa() > 0.0 {
        match bep_series_a1(spec, m, policy) {
            Ok(result) => {
                return Ok(BepResult {
                    result,
                    approach: BepApproach::A1,
                })
            }
            Err(Error::IllConditioned { .. } | Error::NoConvergence { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(BepResult {
        result: bep_series_a2(spec, m, policy)?,
        approach: BepApproach::A2,
    })
}

/// Truncation-error bound for approach 1 after ε terms, with the tail
/// coefficient growth measured by K̃ = K(κμ+1):
/// 3F2(Nμ+ε+½, μ+ε, 1; Nμ+ε+1, ε; ỹ) · 4NΓ(μ+ε)Γ(Nμ+ε+½) / (7√π Γ(ε) Γ(Nμ+ε+1))
/// · ỹ^ε · (K/(e^κ g_b ŵ))^{Nμ}, ỹ = K̃/(g_b ŵ). Needs ỹ < 1.
pub fn bep_truncation_bound(spec: &SumSpec, m: &Modulation, eps: usize) -> Result<f64> {
    check_modulation(m)?;
    if eps == 0 {
        return Err(Error::InvalidParameter("eps must be >= 1".into()));
    }
    let (mu, n, nmu) = (spec.mu(), spec.n(), spec.n_mu());
    let e = eps as f64;
    let yt = spec.k_tilde() / (m.g_b * spec.w_hat);
    let f = hyp_pfq(&[nmu + e + 0.5, mu + e, 1.0], &[nmu + e + 1.0, e], yt, 1e-17)?;
    let ln = (4.0 * n / 7.0).ln() + lgamma(mu + e) - lgamma(e) + ln_gamma_half_ratio(nmu + e)
        - 0.5 * std::f64::consts::PI.ln()
        + e * yt.ln()
        + nmu * ((spec.k_big() / (m.g_b * spec.w_hat)).ln() - spec.kappa());
    Ok((SignLog::from_ln(ln) * f).value())
}

/// ½ ∫ erfc(√(g_b w)) f_W(w) dw by adaptive quadrature over the density.
pub fn bep_by_quadrature(
    spec: &SumSpec,
    m: &Modulation,
    policy: &TruncationPolicy,
    rel_tol: f64,
) -> Result<f64> {
    check_modulation(m)?;
    let failure = std::cell::Cell::new(None);
    let integrand = |w: f64| {
        if w <= 0.0 {
            return 0.0;
        }
        match pdf(spec, w, policy, ReprChoice::Auto) {
            Ok(r) => m.conditional_bep(w) * r.value,
            Err(e) => {
                failure.set(Some(e));
                0.0
            }
        }
    };
    // split at the mean so the bulk of the mass is resolved
    let mean = spec.mean();
    let lo = crate::quadrature::integrate(integrand, 0.0, mean, 0.0, rel_tol)?;
    let hi = integrate_to_infinity_scaled(integrand, mean, mean, 0.0, rel_tol)?;
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok(lo.value + hi.value)
}

fn check_modulation(m: &Modulation) -> Result<()> {
    if !(m.g_b > 0.0) || !m.g_b.is_finite() {
        return Err(Error::InvalidParameter(format!("g_b must be positive, got {}", m.g_b)));
    }
    Ok(())
}
