//! Memoized series coefficients k_m and k̃_m of the N-fold κ-μ power sum.
//!
//! Both families are built from single-branch coefficients by the
//! power-of-a-series recursion b_m = (1/m) Σ_i ((N+1)i − m) a_i b_{m−i}.
//! For k_m the single-branch a_i come from an alternating finite sum; for k̃_m
//! they are (κμ)^i / i!. Everything is carried in extended double-double, with
//! the standard family stored divided by K^m so that magnitudes stay moderate.

use crate::error::{Error, Result};
use crate::signlog::SignLog;
use crate::special_functions::lgamma;
use crate::xdd::{Xdd, XddSum};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FadingParams {
    pub kappa: f64,
    pub mu: f64,
}

impl FadingParams {
    pub fn new(kappa: f64, mu: f64) -> Result<Self> {
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(Error::InvalidParameter(format!("kappa = {kappa} (need kappa >= 0)")));
        }
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidParameter(format!("mu = {mu} (need mu > 0)")));
        }
        Ok(FadingParams { kappa, mu })
    }

    /// K = (1+κ)μ.
    pub fn k_big(&self) -> f64 {
        (1.0 + self.kappa) * self.mu
    }
}

/// N i.i.d. κ-μ powers with per-branch mean ŵ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumSpec {
    pub params: FadingParams,
    pub n_branches: u32,
    pub w_hat: f64,
}

impl SumSpec {
    pub fn new(params: FadingParams, n_branches: u32, w_hat: f64) -> Result<Self> {
        FadingParams::new(params.kappa, params.mu)?;
        if n_branches == 0 {
            return Err(Error::InvalidParameter("n_branches must be positive".into()));
        }
        if !(w_hat > 0.0) || !w_hat.is_finite() {
            return Err(Error::InvalidParameter(format!("w_hat = {w_hat} (need w_hat > 0)")));
        }
        Ok(SumSpec {
            params,
            n_branches,
            w_hat,
        })
    }

    /// Shorthand for `SumSpec::new(FadingParams::new(kappa, mu)?, n, w_hat)`.
    pub fn from_parts(kappa: f64, mu: f64, n: u32, w_hat: f64) -> Result<Self> {
        SumSpec::new(FadingParams::new(kappa, mu)?, n, w_hat)
    }

    pub fn kappa(&self) -> f64 {
        self.params.kappa
    }

    pub fn mu(&self) -> f64 {
        self.params.mu
    }

    pub fn n(&self) -> f64 {
        f64::from(self.n_branches)
    }

    /// Nμ.
    pub fn n_mu(&self) -> f64 {
        self.n() * self.params.mu
    }

    /// Nκμ.
    pub fn n_kappa_mu(&self) -> f64 {
        self.n() * self.params.kappa * self.params.mu
    }

    /// K = (1+κ)μ.
    pub fn k_big(&self) -> f64 {
        self.params.k_big()
    }

    /// K̃ = K(κμ+1).
    pub fn k_tilde(&self) -> f64 {
        self.k_big() * (self.params.kappa * self.params.mu + 1.0)
    }

    /// Mean of the sum, Nŵ.
    pub fn mean(&self) -> f64 {
        self.n() * self.w_hat
    }

    /// Same fading and branch count, different ŵ.
    pub fn with_w_hat(&self, w_hat: f64) -> Result<Self> {
        SumSpec::new(self.params, self.n_branches, w_hat)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoefficientKind {
    Standard,
    Tilde,
}

/// Cancellation above which the inner alternating sum is abandoned for the
/// three-term recurrence (the double-double sum still has ~1e-17 left).
const INNER_CANCELLATION_LIMIT: f64 = 1e6;
/// Same threshold for the tilde recursion, which then switches to its
/// one-term form.
const TILDE_CANCELLATION_LIMIT: f64 = 1e15;

/// Rounding unit assumed per double-double operation (2^-104 with margin).
const UNIT: f64 = 1e-31;
/// Shadow perturbations sit this far above the rounding level.
const SHADOW_GAIN: f64 = 1e7;
/// Estimated relative error above which the tilde recursion gives way to
/// its one-term form.
const TILDE_REL_LIMIT: f64 = 1e-20;

pub const DEFAULT_EPS_MAX: usize = 4096;
pub const DEFAULT_LOG_CAP: f64 = 700.0 * std::f64::consts::LN_10;

/// Numerical health of a filled cache.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct CacheDiagnostics {
    /// Largest cancellation ratio met in a summed single-branch coefficient.
    pub max_inner_cancellation: f64,
    /// First index whose single-branch coefficient came from the recurrence.
    pub recurrence_from: Option<usize>,
    /// Largest cancellation ratio met in the outer recursion.
    pub max_outer_cancellation: f64,
    /// Number of tilde indices computed by the one-term form.
    pub tilde_reduced: usize,
}

/// Memoized coefficients of one kind for one (κ, μ, N).
#[derive(Clone, Debug)]
pub struct CoefficientCache {
    kind: CoefficientKind,
    spec: SumSpec,
    values: Vec<SignLog>,
    /// standard: k_m / K^m; tilde: k̃_m
    scaled: Vec<Xdd>,
    /// standard: a_i / K^i; tilde: (κμ)^i / i!
    single: Vec<Xdd>,
    /// perturbed copies used to estimate propagated rounding error
    shadow: Vec<Xdd>,
    single_shadow: Vec<Xdd>,
    single_rel_level: f64,
    eval_count: u64,
    eps_max: usize,
    log_cap: f64,
    diag: CacheDiagnostics,
}

impl CoefficientCache {
    pub fn new(kind: CoefficientKind, spec: SumSpec) -> Result<Self> {
        Self::with_limits(kind, spec, DEFAULT_EPS_MAX, DEFAULT_LOG_CAP)
    }

    pub fn with_limits(
        kind: CoefficientKind,
        spec: SumSpec,
        eps_max: usize,
        log_cap: f64,
    ) -> Result<Self> {
        if kind == CoefficientKind::Standard && spec.params.kappa == 0.0 {
            return Err(Error::InvalidParameter(
                "standard coefficients need kappa > 0; kappa = 0 uses the Gamma limit".into(),
            ));
        }
        if !(log_cap > 0.0) {
            return Err(Error::InvalidParameter("log_cap must be positive".into()));
        }
        Ok(CoefficientCache {
            kind,
            spec,
            values: vec![SignLog::ONE],
            scaled: vec![Xdd::ONE],
            single: vec![Xdd::ONE],
            shadow: vec![Xdd::ONE],
            single_shadow: vec![Xdd::ONE],
            single_rel_level: 0.0,
            eval_count: 0,
            eps_max,
            log_cap,
            diag: CacheDiagnostics {
                max_inner_cancellation: 1.0,
                max_outer_cancellation: 1.0,
                ..Default::default()
            },
        })
    }

    pub fn kind(&self) -> CoefficientKind {
        self.kind
    }

    pub fn spec(&self) -> &SumSpec {
        &self.spec
    }

    /// Memoized values, indices 0..len().
    pub fn values(&self) -> &[SignLog] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn eval_count(&self) -> u64 {
        self.eval_count
    }

    pub fn eps_max(&self) -> usize {
        self.eps_max
    }

    pub fn diagnostics(&self) -> CacheDiagnostics {
        self.diag
    }

    pub fn reset_instrumentation(&mut self) {
        self.eval_count = 0;
    }

    /// Value at m, computing missing indices.
    pub fn get(&mut self, m: usize) -> Result<SignLog> {
        self.fill_to(m)?;
        Ok(self.values[m])
    }

    /// Already-computed value at m.
    pub fn cached(&self, m: usize) -> Option<SignLog> {
        self.values.get(m).copied()
    }

    /// Extended-precision value: k_m / K^m (standard) or k̃_m (tilde).
    pub(crate) fn scaled(&self, m: usize) -> Xdd {
        self.scaled[m]
    }

    /// Ensures indices 0..=m are present.
    pub fn fill_to(&mut self, m: usize) -> Result<()> {
        if m > self.eps_max {
            return Err(Error::InvalidParameter(format!(
                "coefficient index {m} exceeds eps_max = {}",
                self.eps_max
            )));
        }
        if m < self.values.len() {
            return Ok(());
        }
        // amortized doubling of the backing storage
        let want = (m + 1).max(2 * self.values.len()).min(self.eps_max + 1);
        self.values.reserve(want - self.values.len());
        self.scaled.reserve(want - self.scaled.len());
        self.single.reserve(want - self.single.len());
        self.shadow.reserve(want - self.shadow.len());
        self.single_shadow.reserve(want - self.single_shadow.len());
        while self.values.len() <= m {
            self.push_next()?;
        }
        Ok(())
    }

    fn push_next(&mut self) -> Result<()> {
        let j = self.values.len();
        let jf = j as f64;
        let (single, single_rel) = match self.kind {
            CoefficientKind::Standard => self.standard_single(j),
            CoefficientKind::Tilde => {
                let v = (self.single[j - 1] * self.kappa_mu()).div_f64(jf);
                (v, 3.0 * UNIT * jf)
            }
        };
        self.single.push(single);
        self.single_shadow
            .push(single + single.mul_f64(SHADOW_GAIN * single_rel * jitter(j, 0)));

        let np1 = self.spec.n() + 1.0;
        let mut acc = XddSum::default();
        let mut shadow = Xdd::ZERO;
        for i in 1..=j {
            let w = Xdd::from_f64(np1 * i as f64 - jf);
            acc.push(w * self.single[i] * self.scaled[j - i]);
            shadow += w * self.single_shadow[i] * self.shadow[j - i];
        }
        self.eval_count += j as u64;
        let cancel = acc.cancellation();
        let mut c = acc.sum.div_f64(jf);
        let mut sh = shadow.div_f64(jf);
        // rounding of the sum is about UNIT·Σ|terms|, an absolute level that
        // stays meaningful when the sum vanishes (k_m can sit on a Laguerre root)
        sh = sh + acc.abs_sum.div_f64(jf).mul_f64(4.0 * UNIT * SHADOW_GAIN * jitter(j, 1));
        match self.kind {
            CoefficientKind::Standard => {
                self.diag.max_outer_cancellation = self.diag.max_outer_cancellation.max(cancel);
            }
            CoefficientKind::Tilde => {
                let rel = shadow_rel(c, sh);
                if cancel > TILDE_CANCELLATION_LIMIT || rel > TILDE_REL_LIMIT {
                    // k̃_j = Nκμ k̃_{j−1} / j solves the recursion exactly
                    let lam = self.kappa_mu().mul_f64(self.spec.n());
                    c = (self.scaled[j - 1] * lam).div_f64(jf);
                    sh = (self.shadow[j - 1] * lam).div_f64(jf);
                    sh = sh + sh.mul_f64(SHADOW_GAIN * 3.0 * UNIT * jitter(j, 1));
                    self.diag.tilde_reduced += 1;
                } else {
                    self.diag.max_outer_cancellation = self.diag.max_outer_cancellation.max(cancel);
                }
            }
        }
        let value = match self.kind {
            CoefficientKind::Standard => {
                let s = c.to_signlog();
                s * SignLog::from_f64(self.spec.k_big()).powf(jf)
            }
            CoefficientKind::Tilde => c.to_signlog(),
        };
        if !value.is_zero() && value.log_mag > self.log_cap {
            self.single.pop();
            self.single_shadow.pop();
            return Err(Error::Overflow {
                index: j,
                log_mag: value.log_mag,
                cap: self.log_cap,
            });
        }
        self.scaled.push(c);
        self.shadow.push(sh);
        self.values.push(value);
        Ok(())
    }

    /// κμ without the f64 rounding of the product.
    fn kappa_mu(&self) -> Xdd {
        Xdd::from_f64(self.spec.params.kappa) * Xdd::from_f64(self.spec.params.mu)
    }

    /// Estimated relative error of the value at m.
    ///
    /// The recursion amplifies rounding as m grows (for the standard family
    /// roughly like exp(c√m)); the estimate comes from a shadow recursion
    /// whose inputs and outputs are perturbed at 1e7 times their rounding
    /// level, with the observed deviation scaled back down.
    /// Infinite for a coefficient that is exactly zero; see [`Self::abs_error`].
    pub fn rel_error(&self, m: usize) -> f64 {
        shadow_rel(self.scaled[m], self.shadow[m]) + 2.0 * f64::EPSILON * f64::EPSILON
    }

    /// Estimated absolute error of the scaled value at m (k_m/K^m or k̃_m).
    pub(crate) fn abs_error(&self, m: usize) -> Xdd {
        let c = self.scaled[m];
        (self.shadow[m] - c).abs().mul_f64(1.0 / SHADOW_GAIN) + c.abs().mul_f64(2.0 * f64::EPSILON * f64::EPSILON)
    }

    /// Single-branch a_i / K^i and its relative rounding level.
    ///
    /// Summed as (κμ)^i / i! · Σ_l r_l with r_0 = 1,
    /// r_l = −r_{l−1} (i−l+1)(i−l+μ) / (l κμ), until the sum cancels by more
    /// than 1e6; from there the three-term recurrence in i takes over (it is
    /// neutrally stable, so the rounding level carries over unchanged).
    /// Every factor is formed in double-double: an f64 rounding of μ+n or κμ
    /// is amplified by the cancellation.
    fn standard_single(&mut self, i: usize) -> (Xdd, f64) {
        let mu = Xdd::from_f64(self.spec.params.mu);
        let xx = self.kappa_mu();
        if self.diag.recurrence_from.is_none() {
            let mut r = Xdd::ONE;
            let mut acc = XddSum::default();
            acc.push(r);
            for l in 1..=i {
                let a = (i - l + 1) as f64;
                let num = (Xdd::from_f64(a - 1.0) + mu).mul_f64(a);
                r = -(r * num) / (xx.mul_f64(l as f64));
                acc.push(r);
            }
            let cancel = acc.cancellation();
            // i = 1 gives μ(κ−1), exact even when it vanishes
            if i == 1 || cancel <= INNER_CANCELLATION_LIMIT {
                if i > 1 {
                    self.diag.max_inner_cancellation = self.diag.max_inner_cancellation.max(cancel);
                }
                let mut pre = Xdd::ONE;
                for k in 1..=i {
                    pre = pre * xx / Xdd::from_f64(k as f64);
                }
                let rel = 6.0 * UNIT * (i + 1) as f64 * cancel.min(1e30);
                self.single_rel_level = self.single_rel_level.max(rel);
                return (pre * acc.sum, rel);
            }
            self.diag.recurrence_from = Some(i);
        }
        // (n+1) a_{n+1} = −(2n+μ−x) a_n − (n+μ−1) a_{n−1}, n = i−1
        let n = (i - 1) as f64;
        let t1 = self.single[i - 1] * (Xdd::from_f64(2.0 * n) + mu - xx);
        let t2 = self.single[i - 2] * (Xdd::from_f64(n - 1.0) + mu);
        self.single_rel_level += 4.0 * UNIT;
        (-(t1 + t2).div_f64(n + 1.0), self.single_rel_level)
    }
}

/// |shadow − c| / |c| scaled back from the shadow perturbation level.
fn shadow_rel(c: Xdd, shadow: Xdd) -> f64 {
    let d = shadow - c;
    if d.is_zero() {
        0.0
    } else if c.is_zero() {
        f64::INFINITY
    } else {
        d.ratio_abs(c) / SHADOW_GAIN
    }
}

/// Deterministic pseudo-random factor in ±[0.5, 1].
fn jitter(i: usize, salt: u64) -> f64 {
    let mut z = (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ salt.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    let u = (z >> 11) as f64 / (1u64 << 53) as f64;
    let mag = 0.5 + 0.5 * u;
    if z & 1 == 0 {
        mag
    } else {
        -mag
    }
}

fn require_kind(cache: &CoefficientCache, kind: CoefficientKind) -> Result<()> {
    if cache.kind != kind {
        return Err(Error::InvalidParameter(format!(
            "cache holds {:?} coefficients, {kind:?} requested",
            cache.kind
        )));
    }
    Ok(())
}

/// k_m, memoized in a standard cache.
pub fn k_coeff(cache: &mut CoefficientCache, m: usize) -> Result<SignLog> {
    require_kind(cache, CoefficientKind::Standard)?;
    cache.get(m)
}

/// k̃_m, memoized in a tilde cache.
pub fn tilde_k_coeff(cache: &mut CoefficientCache, m: usize) -> Result<SignLog> {
    require_kind(cache, CoefficientKind::Tilde)?;
    cache.get(m)
}

pub fn reset_instrumentation(cache: &mut CoefficientCache) {
    cache.reset_instrumentation();
}

/// Largest m accepted by [`naive_k_coeff`]; its cost is 2^m.
pub const NAIVE_MAX_M: usize = 24;

/// k_m by the recursion without memoization. Returns the value and the number
/// of (m, i) recursion-body executions, which is 2^m − 1.
pub fn naive_k_coeff(spec: &SumSpec, m: usize) -> Result<(SignLog, u64)> {
    if m > NAIVE_MAX_M {
        return Err(Error::InvalidParameter(format!(
            "naive recursion limited to m <= {NAIVE_MAX_M}"
        )));
    }
    let mut single = CoefficientCache::new(CoefficientKind::Standard, *spec)?;
    single.fill_to(m)?;
    let a: Vec<Xdd> = (0..=m).map(|i| single.single[i]).collect();
    let np1 = spec.n() + 1.0;
    fn rec(j: usize, a: &[Xdd], np1: f64, count: &mut u64) -> Xdd {
        if j == 0 {
            return Xdd::ONE;
        }
        let mut acc = Xdd::ZERO;
        for i in 1..=j {
            *count += 1;
            let w = np1 * i as f64 - j as f64;
            acc += Xdd::from_f64(w) * a[i] * rec(j - i, a, np1, count);
        }
        acc.div_f64(j as f64)
    }
    let mut count = 0;
    let c = rec(m, &a, np1, &mut count);
    let value = c.to_signlog() * SignLog::from_f64(spec.k_big()).powf(m as f64);
    Ok((value, count))
}

/// (8/7) N Γ(μ+m) K̃^m / Γ(m), m ≥ 1: the closed-form magnitude bound on k_m.
pub fn k_coeff_bound(spec: &SumSpec, m: usize) -> SignLog {
    assert!(m >= 1, "bound defined for m >= 1");
    let mf = m as f64;
    SignLog::from_ln(
        (8.0 * spec.n() / 7.0).ln() + lgamma(spec.mu() + mf) - lgamma(mf)
            + mf * spec.k_tilde().ln(),
    )
}
