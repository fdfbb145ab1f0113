//! Stochastic reference: κ-μ power draws, the MRC receiver with perfect or
//! imperfect CSI, and estimators with confidence intervals.
//!
//! Randomness is split into chunks of `CHUNK` trials. Chunk c of
//! (seed, stream_id) owns the ChaCha8 key (seed, c) on stream `stream_id`, so
//! chunks never share a keystream and results do not depend on the thread
//! count. Partial results are merged in chunk order.

use crate::coefficients::FadingParams;
use crate::error::{Error, Result};
use crate::link_budget::{w_hat_from_budget, LinkBudget};
use crate::metrics::Modulation;
use crate::quadrature::integrate;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const CHUNK: usize = 4096;

/// Default CI multiplier k in half_width = k·std_error.
pub const DEFAULT_K: f64 = 3.0;

/// Largest integer μ simulated cluster by cluster.
pub const MAX_PHYSICAL_MU: f64 = 64.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSpec {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngSpec {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngSpec { seed, stream_id }
    }

    /// Generator owned by chunk `chunk`.
    pub fn chunk_rng(&self, chunk: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&chunk.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.stream_id);
        rng
    }

    pub fn rng(&self) -> ChaCha8Rng {
        self.chunk_rng(0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateCI {
    pub estimate: f64,
    pub std_error: f64,
    /// k · std_error.
    pub half_width: f64,
    pub k: f64,
    pub n_samples: usize,
}

impl EstimateCI {
    fn new(estimate: f64, std_error: f64, n_samples: usize) -> Self {
        EstimateCI {
            estimate,
            std_error,
            half_width: DEFAULT_K * std_error,
            k: DEFAULT_K,
            n_samples,
        }
    }

    pub fn with_k(mut self, k: f64) -> Self {
        self.k = k;
        self.half_width = k * self.std_error;
        self
    }

    pub fn contains(&self, x: f64) -> bool {
        (x - self.estimate).abs() <= self.half_width
    }

    pub fn lower(&self) -> f64 {
        self.estimate - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.estimate + self.half_width
    }
}

/// Running count, mean and sum of squared deviations; merged exactly in
/// a fixed order.
#[derive(Clone, Copy, Debug, Default)]
struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if self.n == 0 {
            return o;
        }
        if o.n == 0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * o.n as f64 / n as f64,
            m2: self.m2 + o.m2 + d * d * (self.n as f64 * o.n as f64) / n as f64,
        }
    }

    fn estimate(&self) -> EstimateCI {
        let var = if self.n > 1 {
            self.m2 / (self.n - 1) as f64
        } else {
            0.0
        };
        EstimateCI::new(self.mean, (var / self.n as f64).sqrt(), self.n)
    }
}

/// Runs `trial` for `trials` draws and merges per-chunk moments in order.
fn chunked_moments<F>(trials: usize, rng: &RngSpec, trial: F) -> Result<Moments>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
{
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let chunks = trials.div_ceil(CHUNK);
    let parts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng.chunk_rng(c as u64);
            let len = CHUNK.min(trials - c * CHUNK);
            let mut m = Moments::default();
            for _ in 0..len {
                m.push(trial(&mut r)?);
            }
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.into_iter().fold(Moments::default(), Moments::merge))
}

fn check_power_args(params: &FadingParams, w_hat: f64) -> Result<()> {
    FadingParams::new(params.kappa, params.mu)?;
    if !(w_hat > 0.0 && w_hat.is_finite()) {
        return Err(Error::InvalidParameter(format!("w_hat = {w_hat}")));
    }
    Ok(())
}

/// One κ-μ power: P ~ Poisson(κμ), G ~ Gamma(μ+P, 1), W = G·ŵ/K.
/// Inputs are assumed valid (see `check_power_args`).
pub fn sample_kappa_mu_power<R: Rng + ?Sized>(params: &FadingParams, w_hat: f64, rng: &mut R) -> f64 {
    PowerSampler::new(params, w_hat).sample(rng)
}

/// Number of Gamma(μ+P) laws kept ready; P beyond this is rare for the κμ
/// of interest and builds its law on demand.
const GAMMA_TABLE: usize = 48;

/// Poisson-mixture sampler with its distribution objects built once.
struct PowerSampler {
    poisson: Option<Poisson<f64>>,
    gammas: Vec<Gamma<f64>>,
    mu: f64,
    scale: f64,
}

impl PowerSampler {
    fn new(params: &FadingParams, w_hat: f64) -> Self {
        let lam = params.kappa * params.mu;
        let table = if lam > 0.0 { GAMMA_TABLE } else { 1 };
        PowerSampler {
            poisson: (lam > 0.0).then(|| Poisson::new(lam).expect("positive Poisson rate")),
            gammas: (0..table)
                .map(|p| Gamma::new(params.mu + p as f64, 1.0).expect("positive shape"))
                .collect(),
            mu: params.mu,
            scale: w_hat / params.k_big(),
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let p = self.poisson.as_ref().map_or(0, |d| d.sample(rng) as usize);
        let g = match self.gammas.get(p) {
            Some(d) => d.sample(rng),
            None => Gamma::new(self.mu + p as f64, 1.0).expect("positive shape").sample(rng),
        };
        g * self.scale
    }
}

/// One κ-μ power built from μ clusters: Σ_i (x_i+p)² + (y_i+q)² with
/// x_i, y_i ~ N(0, σ²), σ² = ŵ/(2μ(1+κ)), and μ(p²+q²) = ŵκ/(1+κ).
fn sample_physical_power<R: Rng + ?Sized>(params: &FadingParams, w_hat: f64, rng: &mut R) -> f64 {
    let mu = params.mu;
    let sigma = (w_hat / (2.0 * mu * (1.0 + params.kappa))).sqrt();
    // dominant component split evenly over clusters and quadratures
    let dom = (w_hat * params.kappa / (1.0 + params.kappa) / (2.0 * mu)).sqrt();
    let mut w = 0.0;
    for _ in 0..mu as usize {
        let x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        w += (sigma * x + dom).powi(2) + (sigma * y + dom).powi(2);
    }
    w
}

fn uses_physical_clusters(params: &FadingParams) -> bool {
    params.mu.fract() == 0.0 && params.mu <= MAX_PHYSICAL_MU
}

/// Post-combining SNR of N-branch MRC, per-branch mean SNR ŵ, with
/// combiner ĥ = √(1−α²) h + α h̃ and h̃ ~ CN(0, ‖h‖²/N · I) drawn per
/// realization. SNR = |ĥᴴh|²/‖ĥ‖²; at α = 0 this is exactly Σ|h_n|².
pub fn simulate_mrc_snr<R: Rng + ?Sized>(
    params: &FadingParams,
    n: u32,
    w_hat: f64,
    alpha: f64,
    rng: &mut R,
) -> Result<f64> {
    check_mrc_args(params, n, w_hat, alpha)?;
    Ok(MrcSim::new(params, n, w_hat, alpha).snr(rng))
}

fn check_mrc_args(params: &FadingParams, n: u32, w_hat: f64, alpha: f64) -> Result<()> {
    check_power_args(params, w_hat)?;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} (need 0 <= alpha < 1)")));
    }
    Ok(())
}

/// Receiver configuration with its power sampler prepared once.
struct MrcSim<'a> {
    params: &'a FadingParams,
    n: u32,
    w_hat: f64,
    alpha: f64,
    physical: bool,
    sampler: PowerSampler,
}

impl<'a> MrcSim<'a> {
    fn new(params: &'a FadingParams, n: u32, w_hat: f64, alpha: f64) -> Self {
        MrcSim {
            params,
            n,
            w_hat,
            alpha,
            physical: uses_physical_clusters(params),
            sampler: PowerSampler::new(params, w_hat),
        }
    }

    fn power<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.physical {
            sample_physical_power(self.params, self.w_hat, rng)
        } else {
            self.sampler.sample(rng)
        }
    }

    fn snr<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let (n, alpha) = (self.n, self.alpha);
        if alpha == 0.0 {
            return (0..n).map(|_| self.power(rng)).sum();
        }
        // branch phases are uniform; only |h_n| enters at α = 0
        let h: Vec<(f64, f64)> = (0..n)
            .map(|_| {
                let r = self.power(rng).sqrt();
                let th = 2.0 * PI * rng.gen::<f64>();
                (r * th.cos(), r * th.sin())
            })
            .collect();
        let norm2: f64 = h.iter().map(|(a, b)| a * a + b * b).sum();
        let s = (norm2 / f64::from(n) / 2.0).sqrt();
        let a = (1.0 - alpha * alpha).sqrt();
        let (mut ip_re, mut ip_im, mut est2) = (0.0, 0.0, 0.0);
        for &(hr, hi) in &h {
            let er: f64 = rng.sample(StandardNormal);
            let ei: f64 = rng.sample(StandardNormal);
            let gr = a * hr + alpha * s * er;
            let gi = a * hi + alpha * s * ei;
            // conj(ĥ_n)·h_n
            ip_re += gr * hr + gi * hi;
            ip_im += gr * hi - gi * hr;
            est2 += gr * gr + gi * gi;
        }
        (ip_re * ip_re + ip_im * ip_im) / est2
    }
}

/// `count` single-branch powers in chunk order.
pub fn sample_powers(params: &FadingParams, w_hat: f64, count: usize, rng: &RngSpec) -> Result<Vec<f64>> {
    check_power_args(params, w_hat)?;
    let sampler = PowerSampler::new(params, w_hat);
    Ok(chunked_samples(count, rng, |r| sampler.sample(r)))
}

/// `trials` MRC SNR draws in chunk order.
pub fn simulate_snr_samples(
    params: &FadingParams,
    n: u32,
    w_hat: f64,
    alpha: f64,
    trials: usize,
    rng: &RngSpec,
) -> Result<Vec<f64>> {
    check_mrc_args(params, n, w_hat, alpha)?;
    let sim = MrcSim::new(params, n, w_hat, alpha);
    Ok(chunked_samples(trials, rng, |r| sim.snr(r)))
}

fn chunked_samples<F>(count: usize, rng: &RngSpec, draw: F) -> Vec<f64>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let chunks = count.div_ceil(CHUNK);
    let parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng.chunk_rng(c as u64);
            (0..CHUNK.min(count - c * CHUNK)).map(|_| draw(&mut r)).collect()
        })
        .collect();
    parts.concat()
}

/// Empirical P(X ≤ w) with binomial standard error.
pub fn estimate_cdf(samples: &[f64], w: f64) -> Result<EstimateCI> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = samples.len();
    let p = samples.iter().filter(|&&x| x <= w).count() as f64 / n as f64;
    Ok(EstimateCI::new(p, (p * (1.0 - p) / n as f64).sqrt(), n))
}

/// Mean of ½erfc(√(g_b·SNR)) over simulated SNRs; the budget sets ŵ and α.
pub fn estimate_bep(
    params: &FadingParams,
    n: u32,
    budget: &LinkBudget,
    modulation: &Modulation,
    trials: usize,
    rng: &RngSpec,
) -> Result<EstimateCI> {
    let w_hat = w_hat_from_budget(budget)?;
    check_mrc_args(params, n, w_hat, budget.alpha)?;
    let sim = MrcSim::new(params, n, w_hat, budget.alpha);
    let m = chunked_moments(trials, rng, |r| Ok(modulation.conditional_bep(sim.snr(r))))?;
    Ok(m.estimate())
}

/// Fraction of simulated bits in error: antipodal signalling at SNR g_b·γ
/// errs when a unit normal exceeds √(2 g_b γ).
pub fn estimate_bep_bitflip(
    params: &FadingParams,
    n: u32,
    budget: &LinkBudget,
    modulation: &Modulation,
    trials: usize,
    rng: &RngSpec,
) -> Result<EstimateCI> {
    let w_hat = w_hat_from_budget(budget)?;
    check_mrc_args(params, n, w_hat, budget.alpha)?;
    let sim = MrcSim::new(params, n, w_hat, budget.alpha);
    let m = chunked_moments(trials, rng, |r| {
        let snr = sim.snr(r);
        let z: f64 = r.sample(StandardNormal);
        Ok(if z > (2.0 * modulation.g_b * snr).sqrt() { 1.0 } else { 0.0 })
    })?;
    let p = m.mean;
    Ok(EstimateCI::new(p, (p * (1.0 - p) / m.n as f64).sqrt(), m.n))
}

/// Sample mean of the MRC SNR.
pub fn estimate_mean_snr(
    params: &FadingParams,
    n: u32,
    w_hat: f64,
    alpha: f64,
    trials: usize,
    rng: &RngSpec,
) -> Result<EstimateCI> {
    check_mrc_args(params, n, w_hat, alpha)?;
    let sim = MrcSim::new(params, n, w_hat, alpha);
    Ok(chunked_moments(trials, rng, |r| Ok(sim.snr(r)))?.estimate())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// One-sample Kolmogorov–Smirnov test against a continuous CDF.
pub fn ks_test<F: Fn(f64) -> f64 + Sync>(samples: &[f64], cdf: F) -> Result<KsResult> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut xs = samples.to_vec();
    xs.par_sort_unstable_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    let nf = n as f64;
    let d = xs
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / nf).max((i + 1) as f64 / nf - f)
        })
        .reduce(|| 0.0, f64::max);
    let sn = nf.sqrt();
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d),
        n,
    })
}

/// Q(λ) = 2 Σ_{j≥1} (−1)^{j−1} exp(−2j²λ²), the limiting KS tail.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let t = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += sign * t;
        if t < 1e-17 * sum.abs() {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// CDF tabulated on a grid uniform in u = √x and interpolated by cubic
/// Hermite polynomials in u using the density (dF/du = 2u f(u²)).
/// Outside the grid it returns the end values.
#[derive(Clone, Debug)]
pub struct TabulatedCdf {
    u: Vec<f64>,
    f: Vec<f64>,
    dfdu: Vec<f64>,
}

impl TabulatedCdf {
    /// `eval` returns (F(x), f(x)); nodes are evaluated in parallel.
    pub fn from_cdf_pdf<E>(lo: f64, hi: f64, nodes: usize, eval: E) -> Result<Self>
    where
        E: Fn(f64) -> Result<(f64, f64)> + Sync,
    {
        let u = Self::grid(lo, hi, nodes)?;
        let fv = u
            .par_iter()
            .map(|&u| eval(u * u).map(|(cdf, pdf)| (cdf, 2.0 * u * pdf)))
            .collect::<Result<Vec<_>>>()?;
        let (f, dfdu) = fv.into_iter().unzip();
        Ok(TabulatedCdf { u, f, dfdu })
    }

    /// CDF by adaptive quadrature of `pdf` from 0, node to node.
    pub fn from_pdf<P>(hi: f64, nodes: usize, rel_tol: f64, pdf: P) -> Result<Self>
    where
        P: Fn(f64) -> f64 + Sync,
    {
        let u = Self::grid(0.0, hi, nodes)?;
        let pieces = u
            .par_windows(2)
            .map(|w| integrate(&pdf, w[0] * w[0], w[1] * w[1], 0.0, rel_tol).map(|r| r.value))
            .collect::<Result<Vec<_>>>()?;
        let mut f = Vec::with_capacity(u.len());
        f.push(0.0);
        for p in pieces {
            f.push(f.last().copied().unwrap_or(0.0) + p);
        }
        let dfdu = u.iter().map(|&u| if u > 0.0 { 2.0 * u * pdf(u * u) } else { f64::NAN }).collect();
        let mut t = TabulatedCdf { u, f, dfdu };
        // slope at u = 0 from the first interval when the density is singular
        if !t.dfdu[0].is_finite() {
            t.dfdu[0] = (t.f[1] - t.f[0]) / (t.u[1] - t.u[0]);
        }
        Ok(t)
    }

    fn grid(lo: f64, hi: f64, nodes: usize) -> Result<Vec<f64>> {
        if !(lo >= 0.0 && hi > lo && nodes >= 2) {
            return Err(Error::InvalidParameter(format!(
                "tabulation grid [{lo}, {hi}] with {nodes} nodes"
            )));
        }
        let (ul, uh) = (lo.sqrt(), hi.sqrt());
        Ok((0..nodes)
            .map(|i| ul + (uh - ul) * i as f64 / (nodes - 1) as f64)
            .collect())
    }

    pub fn eval(&self, x: f64) -> f64 {
        let u = x.max(0.0).sqrt();
        let last = self.u.len() - 1;
        if u <= self.u[0] {
            return self.f[0];
        }
        if u >= self.u[last] {
            return self.f[last];
        }
        let h = self.u[1] - self.u[0];
        let j = (((u - self.u[0]) / h) as usize).min(last - 1);
        let t = (u - self.u[j]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.f[j] + h10 * h * self.dfdu[j] + h01 * self.f[j + 1] + h11 * h * self.dfdu[j + 1]
    }
}
