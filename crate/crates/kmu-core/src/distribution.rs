//! PDF, CDF and MGF of the sum of N squared i.i.d. κ-μ variables.
//!
//! Two series families are available. The standard one expands in powers of
//! x = Kw/ŵ with alternating coefficients k_m; the tilde one is a Poisson
//! mixture of Gamma laws with nonnegative weights k̃_m e^{−Nκμ}. Terms are
//! formed as (extended-precision coefficient) × (extended-precision basis)
//! and scaled by a single sign-log prefactor at the end.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use crate::coefficients::{CoefficientCache, CoefficientKind, FadingParams, SumSpec};
use crate::error::{domain, Error, Result};
use crate::signlog::SignLog;
use crate::special_functions::{
    bessel_i, hyp_pfq, lgamma, ln_poisson_weight, reg_gamma_p_sequence, reg_gamma_p_signlog,
};
use crate::xdd::{Xdd, XddSum};

/// Largest term budget a policy may request.
pub const MAX_EPS: usize = 1 << 16;

/// Relative numerical error above which a standard-family sum is rejected.
const ILL_REL: f64 = 1e-11;

const EPS: f64 = f64::EPSILON;

/// Adaptive truncation settings.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TruncationPolicy {
    /// Absolute truncation-error target.
    pub target_tol: f64,
    /// Optional relative target; the effective tolerance is
    /// max(target_tol, rel_tol·|value|).
    pub rel_tol: f64,
    pub eps_start: usize,
    pub eps_max: usize,
    /// 0 selects the density, 1 the distribution function in [`evaluate`].
    pub zeta: u8,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            target_tol: 1e-12,
            rel_tol: 0.0,
            eps_start: 64,
            eps_max: 4096,
            zeta: 0,
        }
    }
}

impl TruncationPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_tol > 0.0) {
            return Err(Error::InvalidParameter("target_tol must be positive".into()));
        }
        if !(self.rel_tol >= 0.0) {
            return Err(Error::InvalidParameter("rel_tol must be nonnegative".into()));
        }
        if self.eps_start == 0 || self.eps_start > self.eps_max || self.eps_max > MAX_EPS {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= eps_start <= eps_max <= {MAX_EPS}, got {} and {}",
                self.eps_start, self.eps_max
            )));
        }
        if self.zeta > 1 {
            return Err(Error::InvalidParameter("zeta must be 0 or 1".into()));
        }
        Ok(())
    }

    pub fn with_zeta(mut self, zeta: u8) -> Self {
        self.zeta = zeta;
        self
    }

    fn tolerance(&self, value: f64) -> f64 {
        self.target_tol.max(self.rel_tol * value.abs())
    }

    /// eps_start, doubling, capped at eps_max.
    fn ladder(&self) -> Vec<usize> {
        let mut v = Vec::new();
        let mut e = self.eps_start;
        loop {
            v.push(e);
            if e >= self.eps_max {
                return v;
            }
            e = (2 * e).min(self.eps_max);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Standard,
    Tilde,
    /// κ = 0: a Gamma law with shape Nμ and rate μ/ŵ.
    GammaLimit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReprChoice {
    #[default]
    Auto,
    Standard,
    Tilde,
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EvalResult {
    pub value: f64,
    /// Number of series terms summed (m = 0..terms_used−1).
    pub terms_used: usize,
    /// truncation_bound + rounding_error.
    pub error_bound: f64,
    /// Bound on the omitted tail, or the observed change under doubling when
    /// no analytic bound applies.
    pub truncation_bound: f64,
    /// Estimated floating-point error, including propagated coefficient error.
    pub rounding_error: f64,
    pub representation: Representation,
}

impl EvalResult {
    fn exact(value: f64, representation: Representation) -> Self {
        EvalResult {
            value,
            terms_used: 0,
            error_bound: 0.0,
            truncation_bound: 0.0,
            rounding_error: 0.0,
            representation,
        }
    }
}

// ---------------------------------------------------------------------------
// Shared coefficient caches

/// Both coefficient families for one (κ, μ, N); shareable across ŵ.
#[derive(Debug)]
pub struct SharedCaches {
    standard: Option<RwLock<CoefficientCache>>,
    tilde: RwLock<CoefficientCache>,
}

impl SharedCaches {
    pub fn new(params: FadingParams, n: u32) -> Result<Self> {
        let spec = SumSpec::new(params, n, 1.0)?;
        let make = |kind| CoefficientCache::with_limits(kind, spec, MAX_EPS, f64::INFINITY);
        Ok(SharedCaches {
            standard: if params.kappa > 0.0 {
                Some(RwLock::new(make(CoefficientKind::Standard)?))
            } else {
                None
            },
            tilde: RwLock::new(make(CoefficientKind::Tilde)?),
        })
    }

    fn lock(&self, kind: CoefficientKind) -> Result<&RwLock<CoefficientCache>> {
        match kind {
            CoefficientKind::Standard => self.standard.as_ref().ok_or_else(|| {
                Error::InvalidParameter("standard series needs kappa > 0".into())
            }),
            CoefficientKind::Tilde => Ok(&self.tilde),
        }
    }

    /// Fills indices 0..=m; extension is serialized by the write lock.
    pub fn warm_up(&self, kind: CoefficientKind, m: usize) -> Result<()> {
        let lock = self.lock(kind)?;
        if lock.read().unwrap_or_else(|e| e.into_inner()).len() > m {
            return Ok(());
        }
        lock.write().unwrap_or_else(|e| e.into_inner()).fill_to(m)
    }

    fn read<R>(&self, kind: CoefficientKind, f: impl FnOnce(&CoefficientCache) -> R) -> Result<R> {
        let g = self.lock(kind)?.read().unwrap_or_else(|e| e.into_inner());
        Ok(f(&g))
    }
}

type CacheKey = (u64, u64, u32);

const REGISTRY_CAPACITY: usize = 64;

fn registry() -> &'static Mutex<HashMap<CacheKey, Arc<SharedCaches>>> {
    static REG: OnceLock<Mutex<HashMap<CacheKey, Arc<SharedCaches>>>> = OnceLock::new();
    REG.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Process-wide caches for the shape of `spec` (ŵ does not enter the
/// coefficients). The registry is flushed when it exceeds 64 shapes.
pub fn shared_caches(spec: &SumSpec) -> Result<Arc<SharedCaches>> {
    let key = (
        spec.params.kappa.to_bits(),
        spec.params.mu.to_bits(),
        spec.n_branches,
    );
    let mut reg = registry().lock().unwrap_or_else(|e| e.into_inner());
    if let Some(c) = reg.get(&key) {
        return Ok(Arc::clone(c));
    }
    if reg.len() >= REGISTRY_CAPACITY {
        reg.clear();
    }
    let c = Arc::new(SharedCaches::new(spec.params, spec.n_branches)?);
    reg.insert(key, Arc::clone(&c));
    Ok(c)
}

// ---------------------------------------------------------------------------
// Series engine

/// Quantities available to a tail bound at truncation order ε.
pub(crate) struct TailInput {
    /// The first omitted term, prefactor included.
    pub term: SignLog,
    /// Basis value at ε (prefactor and coefficient excluded).
    pub basis: SignLog,
}

pub(crate) type TailFn<'a> = Box<dyn Fn(usize, &TailInput) -> Result<f64> + 'a>;
pub(crate) type BasisFn<'a> = Box<dyn FnMut(usize) -> Result<(Xdd, f64)> + 'a>;

pub(crate) enum Stop<'a> {
    /// Stop once the bound on the omitted tail meets the tolerance.
    Tail(TailFn<'a>),
    /// Stop once doubling ε changes the value by less than the tolerance.
    Doubling,
}

/// Σ_m coef_m · basis_m scaled by `pre`.
pub(crate) struct Series<'a> {
    pub func: &'static str,
    pub kind: CoefficientKind,
    pub representation: Representation,
    pub pre: SignLog,
    /// Relative error of `pre`.
    pub pre_rel: f64,
    /// Called with m = 0, 1, 2, … in order; returns the basis value and its
    /// relative error.
    pub basis: BasisFn<'a>,
    pub stop: Stop<'a>,
}

impl Series<'_> {
    pub(crate) fn run(mut self, spec: &SumSpec, policy: &TruncationPolicy) -> Result<EvalResult> {
        policy.validate()?;
        let caches = shared_caches(spec)?;
        let pre_x = Xdd::from_signlog(self.pre);
        let mut basis: Vec<(Xdd, f64)> = Vec::new();
        let mut sum = XddSum::default();
        let mut coef_err = Xdd::ZERO;
        let mut next = 0usize;
        let mut prev: Option<f64> = None;
        let mut last_bound = f64::INFINITY;
        let ladder = policy.ladder();

        for &eps in &ladder {
            caches.warm_up(self.kind, eps)?;
            while basis.len() <= eps {
                let m = basis.len();
                basis.push((self.basis)(m)?);
            }
            let coef_eps = caches.read(self.kind, |c| {
                while next < eps {
                    let (b, brel) = basis[next];
                    let t = c.scaled(next) * b;
                    sum.push(t);
                    coef_err += (c.abs_error(next) * b).abs() + t.abs().mul_f64(brel);
                    next += 1;
                }
                c.scaled(eps)
            })?;
            let value = (pre_x * sum.sum).to_f64();
            let tol = policy.tolerance(value);
            let bound = match &self.stop {
                Stop::Tail(f) => {
                    let b = basis[eps].0;
                    let input = TailInput {
                        term: (pre_x * coef_eps * b).to_signlog(),
                        basis: b.to_signlog(),
                    };
                    f(eps, &input)?
                }
                Stop::Doubling => match prev {
                    Some(p) => (value - p).abs(),
                    None => f64::INFINITY,
                },
            };
            prev = Some(value);
            last_bound = bound;
            if bound <= tol {
                return self.finish(value, eps, bound, &sum, coef_err, policy);
            }
        }
        let eps = *ladder.last().expect("ladder is never empty");
        let value = prev.unwrap_or(0.0);
        // an unreliable standard sum is reported as such so callers can switch
        self.finish(value, eps, last_bound, &sum, coef_err, policy)?;
        Err(Error::NoConvergence {
            func: self.func,
            terms: eps,
            bound: last_bound,
        })
    }

    fn finish(
        &self,
        value: f64,
        eps: usize,
        bound: f64,
        sum: &XddSum,
        coef_err: Xdd,
        policy: &TruncationPolicy,
    ) -> Result<EvalResult> {
        let pre = Xdd::from_signlog(self.pre);
        // coefficient propagation plus double-double accumulation
        let numeric = (pre * (coef_err + sum.abs_sum.mul_f64(1e-30))).abs().to_f64();
        if self.kind == CoefficientKind::Standard
            && !(numeric <= policy.target_tol.max(ILL_REL * value.abs()))
        {
            return Err(Error::IllConditioned {
                func: self.func,
                ratio: sum.cancellation(),
            });
        }
        let rounding = numeric + value.abs() * (self.pre_rel + 4.0 * EPS);
        Ok(EvalResult {
            value,
            terms_used: eps,
            error_bound: bound + rounding,
            truncation_bound: bound,
            rounding_error: rounding,
            representation: self.representation,
        })
    }
}

/// Relative error of exp(Σ parts) when each part carries an f64 rounding.
pub(crate) fn log_rel(parts: &[f64]) -> f64 {
    2.0 * EPS * (1.0 + parts.iter().map(|p| p.abs()).sum::<f64>())
}

/// Nμ without the f64 rounding of the product. Bases of the standard series
/// must use the same Nμ as the coefficients: the sums can cancel by 1e10.
pub(crate) fn n_mu_exact(spec: &SumSpec) -> Xdd {
    Xdd::from_f64(spec.n()) * Xdd::from_f64(spec.mu())
}

/// Basis g_0 = 1, g_{m+1} = g_m · x / (a + m).
pub(crate) fn ratio_basis<'a>(x: f64, a: Xdd) -> BasisFn<'a> {
    let xx = Xdd::from_f64(x);
    let mut g = Xdd::ONE;
    let mut at = 0usize;
    Box::new(move |m| {
        debug_assert_eq!(m, at);
        let out = g;
        g = g * xx / (a + Xdd::from_f64(m as f64));
        at += 1;
        Ok((out, 0.0))
    })
}

/// Basis g_m = r^m.
pub(crate) fn power_basis<'a>(r: f64) -> BasisFn<'a> {
    let rr = Xdd::from_f64(r);
    let mut g = Xdd::ONE;
    Box::new(move |_| {
        let out = g;
        g = g * rr;
        Ok((out, 0.0))
    })
}

// ---------------------------------------------------------------------------
// Public operations

fn check_w(func: &'static str, w: f64) -> Result<()> {
    if !(w >= 0.0) || w.is_nan() {
        return Err(domain(func, format!("w = {w} (need w >= 0)")));
    }
    Ok(())
}

fn pick(spec: &SumSpec, repr: ReprChoice, x: f64) -> Representation {
    match repr {
        ReprChoice::Standard => Representation::Standard,
        ReprChoice::Tilde => Representation::Tilde,
        ReprChoice::Auto if spec.kappa() == 0.0 => Representation::GammaLimit,
        ReprChoice::Auto if x < 1.0 => Representation::Standard,
        ReprChoice::Auto => Representation::Tilde,
    }
}

/// Runs the chosen representation; an ill-conditioned standard sum in auto
/// mode is redone with the tilde series.
fn dispatch(
    repr: ReprChoice,
    chosen: Representation,
    mut run: impl FnMut(Representation) -> Result<EvalResult>,
) -> Result<EvalResult> {
    match run(chosen) {
        Err(Error::IllConditioned { .. }) if repr == ReprChoice::Auto => {
            run(Representation::Tilde)
        }
        r => r,
    }
}

/// Density of the sum at w.
pub fn pdf(spec: &SumSpec, w: f64, policy: &TruncationPolicy, repr: ReprChoice) -> Result<EvalResult> {
    check_w("pdf", w)?;
    policy.validate()?;
    let nmu = spec.n_mu();
    if w == 0.0 {
        return pdf_at_zero(spec).map(|v| EvalResult::exact(v, pick(spec, repr, 0.0)));
    }
    let x = spec.k_big() * w / spec.w_hat;
    let chosen = pick(spec, repr, x);
    dispatch(repr, chosen, |r| match r {
        Representation::GammaLimit => Ok(EvalResult::exact(
            gamma_limit_pdf(spec.mu(), spec.n_branches, spec.w_hat, w)?,
            r,
        )),
        Representation::Standard => {
            require_standard(spec, "pdf")?;
            let lam = spec.n_kappa_mu();
            // e^{−λ} x^{Nμ} / (w Γ(Nμ))
            let lg = lgamma(nmu);
            let pre = SignLog::from_ln(-lam)
                * SignLog::from_f64(x).powf(nmu)
                * SignLog::from_f64(w).recip()
                * SignLog::from_ln(-lg);
            Series {
                func: "pdf",
                kind: CoefficientKind::Standard,
                representation: r,
                pre,
                pre_rel: log_rel(&[lg, x.ln() * nmu]),
                basis: ratio_basis(x, n_mu_exact(spec)),
                stop: Stop::Tail(Box::new(move |eps, _| truncation_bound(spec, w, eps, 0))),
            }
            .run(spec, policy)
        }
        Representation::Tilde => {
            let lam = spec.n_kappa_mu();
            // e^{−λ} x^{Nμ} e^{−x} / (w Γ(Nμ)) = e^{−λ} (Nμ/w) · weight(Nμ, x)
            let lpw = ln_poisson_weight(nmu, x);
            let pre = SignLog::from_ln(-lam)
                * SignLog::from_f64(nmu / w)
                * SignLog::from_ln(lpw);
            Series {
                func: "pdf",
                kind: CoefficientKind::Tilde,
                representation: r,
                pre,
                pre_rel: log_rel(&[lpw]) + 2.0 * EPS,
                basis: ratio_basis(x, n_mu_exact(spec)),
                stop: Stop::Tail(Box::new(move |eps, t| {
                    // t_{m+1}/t_m = λx / ((m+1)(Nμ+m))
                    Ok(ratio_tail(t.term, eps, |m| {
                        let m = m as f64;
                        lam * x / ((m + 1.0) * (nmu + m))
                    }))
                })),
            }
            .run(spec, policy)
        }
    })
}

/// Distribution function of the sum at w.
pub fn cdf(spec: &SumSpec, w: f64, policy: &TruncationPolicy, repr: ReprChoice) -> Result<EvalResult> {
    check_w("cdf", w)?;
    policy.validate()?;
    if w == 0.0 {
        return Ok(EvalResult::exact(0.0, pick(spec, repr, 0.0)));
    }
    let nmu = spec.n_mu();
    let x = spec.k_big() * w / spec.w_hat;
    let chosen = pick(spec, repr, x);
    let clamp = |mut r: EvalResult| {
        r.value = r.value.clamp(0.0, 1.0);
        r
    };
    dispatch(repr, chosen, |r| match r {
        Representation::GammaLimit => Ok(EvalResult::exact(
            gamma_limit_cdf(spec.mu(), spec.n_branches, spec.w_hat, w)?,
            r,
        )),
        Representation::Standard => {
            require_standard(spec, "cdf")?;
            let lam = spec.n_kappa_mu();
            let lg = lgamma(nmu + 1.0);
            let pre = SignLog::from_ln(-lam) * SignLog::from_f64(x).powf(nmu) * SignLog::from_ln(-lg);
            Series {
                func: "cdf",
                kind: CoefficientKind::Standard,
                representation: r,
                pre,
                pre_rel: log_rel(&[lg, x.ln() * nmu]),
                basis: ratio_basis(x, n_mu_exact(spec) + Xdd::ONE),
                stop: Stop::Tail(Box::new(move |eps, _| truncation_bound(spec, w, eps, 1))),
            }
            .run(spec, policy)
            .map(clamp)
        }
        Representation::Tilde => {
            let lam = spec.n_kappa_mu();
            Series {
                func: "cdf",
                kind: CoefficientKind::Tilde,
                representation: r,
                pre: SignLog::from_ln(-lam),
                pre_rel: 0.0,
                basis: gamma_p_basis(nmu, x),
                stop: Stop::Tail(Box::new(move |eps, t| {
                    // P(a+1, x) ≤ min(1, x/(a+1)) P(a, x)
                    Ok(ratio_tail(t.term, eps, |m| {
                        let m = m as f64;
                        lam / (m + 1.0) * (x / (nmu + m + 1.0)).min(1.0)
                    }))
                })),
            }
            .run(spec, policy)
            .map(clamp)
        }
    })
}

/// E[e^{−sW}]. The standard form needs s > K/ŵ; auto uses the tilde form.
pub fn mgf(spec: &SumSpec, s: f64, policy: &TruncationPolicy, repr: ReprChoice) -> Result<EvalResult> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(domain("mgf", format!("s = {s} (need s > 0)")));
    }
    policy.validate()?;
    let nmu = spec.n_mu();
    let lam = spec.n_kappa_mu();
    let chosen = match repr {
        ReprChoice::Standard => Representation::Standard,
        ReprChoice::Tilde => Representation::Tilde,
        ReprChoice::Auto if spec.kappa() == 0.0 => Representation::GammaLimit,
        ReprChoice::Auto => Representation::Tilde,
    };
    let sw = s * spec.w_hat;
    let k = spec.k_big();
    match chosen {
        Representation::GammaLimit => {
            let mu = spec.mu();
            let v = SignLog::from_f64(mu / (mu + sw)).powf(nmu).value();
            Ok(EvalResult::exact(v, chosen))
        }
        Representation::Standard => {
            require_standard(spec, "mgf")?;
            let q = k / sw;
            if !(q < 1.0) {
                return Err(domain(
                    "mgf",
                    format!("standard form needs s > K/w_hat = {}, got s = {s}", k / spec.w_hat),
                ));
            }
            Series {
                func: "mgf",
                kind: CoefficientKind::Standard,
                representation: chosen,
                pre: SignLog::from_ln(-lam) * SignLog::from_f64(q).powf(nmu),
                pre_rel: log_rel(&[q.ln() * nmu]),
                basis: power_basis(q),
                stop: Stop::Doubling,
            }
            .run(spec, policy)
        }
        Representation::Tilde => {
            // r = K/(K + sŵ), written to keep digits as s → 0
            let r = 1.0 / (1.0 + sw / k);
            let lr = -(sw / k).ln_1p();
            Series {
                func: "mgf",
                kind: CoefficientKind::Tilde,
                representation: chosen,
                pre: SignLog::from_ln(-lam) * SignLog::from_ln(lr * nmu),
                pre_rel: log_rel(&[lr * nmu]),
                basis: power_basis(r),
                stop: Stop::Tail(Box::new(move |eps, t| {
                    Ok(ratio_tail(t.term, eps, |m| lam * r / (m as f64 + 1.0)))
                })),
            }
            .run(spec, policy)
        }
    }
}

/// pdf (policy.zeta = 0) or cdf (policy.zeta = 1).
pub fn evaluate(spec: &SumSpec, w: f64, policy: &TruncationPolicy, repr: ReprChoice) -> Result<EvalResult> {
    match policy.zeta {
        0 => pdf(spec, w, policy, repr),
        1 => cdf(spec, w, policy, repr),
        z => Err(Error::InvalidParameter(format!("zeta must be 0 or 1, got {z}"))),
    }
}

fn require_standard(spec: &SumSpec, func: &'static str) -> Result<()> {
    if spec.kappa() == 0.0 {
        return Err(domain(func, "standard series needs kappa > 0"));
    }
    Ok(())
}

/// Bound on Σ_{m≥ε} t_m given t_ε and a nonincreasing bound ρ(m) on
/// t_{m+1}/t_m: the ratios are followed past the peak of the terms, then the
/// remainder is closed geometrically. +∞ if that takes over 10^7 steps.
pub(crate) fn ratio_tail(term: SignLog, eps: usize, rho: impl Fn(usize) -> f64) -> f64 {
    if term.is_zero() {
        return 0.0;
    }
    let mut lcur = 0.0f64;
    let mut lsum = f64::NEG_INFINITY;
    let log_add = |a: f64, b: f64| {
        let (hi, lo) = if a > b { (a, b) } else { (b, a) };
        if lo == f64::NEG_INFINITY {
            hi
        } else {
            hi + (lo - hi).exp().ln_1p()
        }
    };
    for m in eps..eps + 10_000_000 {
        let r = rho(m);
        if r < 0.5 {
            lsum = log_add(lsum, lcur - (-r).ln_1p());
            // the bound is computed in f64 logs; pad for their rounding
            let pad = 1.0 + 1e-12 * (1.0 + lsum.abs());
            return (term.abs() * SignLog::from_ln(lsum)).value() * pad;
        }
        lsum = log_add(lsum, lcur);
        lcur += r.ln();
    }
    f64::INFINITY
}

/// Basis P(a + m, x), generated in blocks by downward recurrence.
fn gamma_p_basis<'a>(a: f64, x: f64) -> BasisFn<'a> {
    let mut block: Vec<SignLog> = Vec::new();
    let mut start = 0usize;
    Box::new(move |m| {
        if m >= start + block.len() {
            start = m;
            let len = m.max(64);
            block = reg_gamma_p_sequence(a + m as f64, x, len)?;
        }
        let v = block[m - start];
        let rel = 8.0 * EPS * (1.0 + v.log_mag.abs());
        Ok((Xdd::from_signlog(v), rel))
    })
}

fn pdf_at_zero(spec: &SumSpec) -> Result<f64> {
    let nmu = spec.n_mu();
    if nmu > 1.0 {
        Ok(0.0)
    } else if nmu == 1.0 {
        // leading term e^{−λ} K / ŵ
        Ok((-spec.n_kappa_mu()).exp() * spec.k_big() / spec.w_hat)
    } else {
        Err(domain("pdf", format!("density diverges at w = 0 for N*mu = {nmu} < 1")))
    }
}

/// Right-hand side of the truncation-error bound for the standard series
/// (ζ = 0 density, ζ = 1 distribution function). Overflow maps to +∞.
pub fn truncation_bound(spec: &SumSpec, w: f64, eps: usize, zeta: u8) -> Result<f64> {
    Ok(truncation_bound_signlog(spec, w, eps, zeta)?.value())
}

pub fn truncation_bound_signlog(spec: &SumSpec, w: f64, eps: usize, zeta: u8) -> Result<SignLog> {
    if eps == 0 {
        return Err(Error::InvalidParameter("eps must be >= 1".into()));
    }
    if zeta > 1 {
        return Err(Error::InvalidParameter("zeta must be 0 or 1".into()));
    }
    if !(w > 0.0) {
        return Err(domain("truncation_bound", format!("w = {w} (need w > 0)")));
    }
    let (kappa, mu, n) = (spec.kappa(), spec.mu(), spec.n());
    let nmu = spec.n_mu();
    let (k, kt, wh) = (spec.k_big(), spec.k_tilde(), spec.w_hat);
    let e = eps as f64;
    let z = f64::from(zeta);
    let f = hyp_pfq(&[1.0, mu + e], &[e, nmu + e + z], kt * w / wh, 1e-17)?;
    let ln = nmu * (k.ln() - kappa) + (8.0 * n / 7.0).ln() + lgamma(mu + e)
        - lgamma(e)
        - lgamma(nmu + e + z)
        + (nmu + e - 1.0 + z) * w.ln()
        - (nmu + e) * wh.ln()
        + e * kt.ln();
    Ok(SignLog::from_ln(ln) * f)
}

/// Right-hand side of the absolute-convergence bound on
/// Σ_m w^{Nμ+m−1+ζ} |k_m| / (ŵ^{Nμ+m} Γ(Nμ+m+ζ)).
pub fn convergence_diag(spec: &SumSpec, w: f64, zeta: u8) -> Result<f64> {
    if zeta > 1 {
        return Err(Error::InvalidParameter("zeta must be 0 or 1".into()));
    }
    if !(w > 0.0) {
        return Err(domain("convergence_diag", format!("w = {w} (need w > 0)")));
    }
    let (mu, n) = (spec.mu(), spec.n());
    let nmu = spec.n_mu();
    let (kt, wh) = (spec.k_tilde(), spec.w_hat);
    let z = f64::from(zeta);
    let lead = SignLog::from_ln((nmu - 1.0 + z) * w.ln() - nmu * wh.ln() - lgamma(nmu + z));
    let f = hyp_pfq(&[mu + 1.0], &[nmu + 1.0 + z], kt * w / wh, 1e-17)?;
    let inner = SignLog::from_ln(
        (8.0 * n / 7.0).ln() + lgamma(mu + 1.0) + lgamma(nmu + z) - lgamma(nmu + 1.0 + z)
            + (w / wh).ln()
            + kt.ln(),
    ) * f;
    Ok((lead * SignLog::ONE.add(inner)).value())
}

/// Single κ-μ power density with shape (κ, μ) and mean ŵ.
pub fn oracle_pdf_single(kappa: f64, mu: f64, w_hat: f64, w: f64) -> Result<f64> {
    for (name, v) in [("kappa", kappa), ("mu", mu), ("w_hat", w_hat), ("w", w)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(domain("oracle_pdf_single", format!("{name} = {v} (need > 0)")));
        }
    }
    let k = (1.0 + kappa) * mu;
    let x = k * w / w_hat;
    let arg = 2.0 * (kappa * mu * x).sqrt();
    let i = bessel_i(mu - 1.0, arg)?;
    let ln = mu.ln() + 0.5 * (mu + 1.0) * kappa.ln_1p() + 0.5 * (mu - 1.0) * (w.ln() - kappa.ln())
        - 0.5 * (mu + 1.0) * w_hat.ln();
    Ok((SignLog::from_ln(ln) * SignLog::from_ln(-kappa * mu) * SignLog::from_ln(-x) * i).value())
}

fn check_gamma_limit(func: &'static str, mu: f64, n: u32, w_hat: f64, w: f64) -> Result<f64> {
    if !(mu > 0.0) || n == 0 || !(w_hat > 0.0) {
        return Err(domain(func, format!("mu = {mu}, n = {n}, w_hat = {w_hat}")));
    }
    check_w(func, w)?;
    Ok(f64::from(n) * mu)
}

/// Gamma density with shape Nμ and rate μ/ŵ (the κ = 0 law of the sum).
pub fn gamma_limit_pdf(mu: f64, n: u32, w_hat: f64, w: f64) -> Result<f64> {
    let a = check_gamma_limit("gamma_limit_pdf", mu, n, w_hat, w)?;
    let rate = mu / w_hat;
    if w == 0.0 {
        return if a > 1.0 {
            Ok(0.0)
        } else if a == 1.0 {
            Ok(rate)
        } else {
            Err(domain("gamma_limit_pdf", format!("density diverges at w = 0 for N*mu = {a} < 1")))
        };
    }
    Ok((SignLog::from_f64(a / w) * SignLog::from_ln(ln_poisson_weight(a, rate * w))).value())
}

/// Distribution function of the κ = 0 law.
pub fn gamma_limit_cdf(mu: f64, n: u32, w_hat: f64, w: f64) -> Result<f64> {
    let a = check_gamma_limit("gamma_limit_cdf", mu, n, w_hat, w)?;
    Ok(reg_gamma_p_signlog(a, mu / w_hat * w)?.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_caps_at_eps_max() {
        let p = TruncationPolicy {
            eps_max: 500,
            ..Default::default()
        };
        assert_eq!(p.ladder(), vec![64, 128, 256, 500]);
    }

    #[test]
    fn exponential_special_case() {
        let spec = SumSpec::from_parts(0.0, 1.0, 1, 1.0).unwrap();
        let r = pdf(&spec, 1.0, &TruncationPolicy::default(), ReprChoice::Auto).unwrap();
        assert_eq!(r.representation, Representation::GammaLimit);
        assert!((r.value - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn zero_rules() {
        let p = TruncationPolicy::default();
        let s = SumSpec::from_parts(1.5, 0.5, 4, 1.0).unwrap();
        assert_eq!(pdf(&s, 0.0, &p, ReprChoice::Auto).unwrap().value, 0.0);
        assert_eq!(cdf(&s, 0.0, &p, ReprChoice::Auto).unwrap().value, 0.0);
        let s = SumSpec::from_parts(1.5, 0.5, 1, 1.0).unwrap();
        assert!(pdf(&s, 0.0, &p, ReprChoice::Auto).is_err());
    }
}
