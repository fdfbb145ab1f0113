//! Resolution of sweep options into a validated configuration, and the sweep
//! itself: the first grid point runs alone to populate the shared coefficient
//! caches, the rest run on the rayon pool, rows come back in grid order.

use kmu_core::coefficients::FadingParams;
use kmu_core::distribution::{cdf, pdf};
use kmu_core::link_budget::effective_spec;
use kmu_core::metrics::{bep, bep_asymptotic, coverage, coverage_asymptotic};
use kmu_core::{
    BepApproach, Error, EvalResult, LinkBudget, Modulation, ModulationKind, ReprChoice, Representation,
    SnrThreshold, SumSpec, TruncationPolicy,
};
use rayon::prelude::*;

use crate::args::{Axis, ModArg, ReprArg, Spacing, SweepArgs};
use crate::output::{Cell, Table};
use crate::usage;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    Pdf,
    Cdf,
    Coverage,
    Bep,
}

impl Quantity {
    fn is_density(self) -> bool {
        matches!(self, Quantity::Pdf | Quantity::Cdf)
    }
}

/// Where the per-branch mean SNR comes from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MeanSource {
    Direct(f64),
    /// Link budget; the (1−α²) CSI scaling is applied.
    Budget(LinkBudget),
}

/// Everything held constant along the sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fixed {
    pub params: FadingParams,
    pub n: u32,
    pub mean: MeanSource,
    /// pdf/cdf evaluation point when the axis is not `w`; None means N·ŵ.
    pub w: Option<f64>,
    pub modulation: Modulation,
    pub threshold: SnrThreshold,
    pub policy: TruncationPolicy,
    pub repr: ReprChoice,
}

/// Invariants: axis_min < axis_max, points ≥ 2, grid points inside the
/// parameter domain at both ends.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepConfig {
    pub quantity: Quantity,
    pub axis: Axis,
    pub axis_min: f64,
    pub axis_max: f64,
    pub points: usize,
    pub spacing: Spacing,
    pub fixed: Fixed,
    pub asymptote: bool,
}

const DEFAULT_POINTS: usize = 200;
const DEFAULT_N: u32 = 64;
const DEFAULT_KAPPA: f64 = 1.5;
const DEFAULT_MU: f64 = 0.5;

impl SweepConfig {
    pub fn from_args(quantity: Quantity, a: &SweepArgs) -> anyhow::Result<Self> {
        let params = FadingParams::new(a.kappa.unwrap_or(DEFAULT_KAPPA), a.mu.unwrap_or(DEFAULT_MU))
            .map_err(|e| usage(e.to_string()))?;
        let n = a.n.unwrap_or(DEFAULT_N);
        if n == 0 {
            return Err(usage("--n must be at least 1"));
        }
        let d = LinkBudget::default();
        let budget = LinkBudget {
            pt_dbm: a.pt_dbm.unwrap_or(d.pt_dbm),
            fc_hz: a.fc_ghz.map_or(d.fc_hz, |g| g * 1e9),
            distance_m: a.distance_m.unwrap_or(d.distance_m),
            path_loss_exp: a.beta.unwrap_or(d.path_loss_exp),
            noise_figure_db: a.noise_figure_db.unwrap_or(d.noise_figure_db),
            bandwidth_fraction: a.bw_frac.unwrap_or(d.bandwidth_fraction),
            alpha: a.alpha.unwrap_or(d.alpha),
        };
        let budget_given = [a.pt_dbm, a.fc_ghz, a.distance_m, a.beta, a.noise_figure_db, a.bw_frac, a.alpha]
            .iter()
            .any(Option::is_some);
        let mean = match a.w_hat {
            Some(_) if budget_given => return Err(usage("--w-hat excludes the link-budget options")),
            Some(w) => MeanSource::Direct(w),
            None => {
                budget.validate().map_err(|e| usage(e.to_string()))?;
                MeanSource::Budget(budget)
            }
        };
        let axis = a.axis.unwrap_or(match quantity {
            Quantity::Pdf | Quantity::Cdf => Axis::W,
            Quantity::Coverage => Axis::Distance,
            Quantity::Bep => Axis::PtDbm,
        });
        if matches!(axis, Axis::Distance | Axis::PtDbm | Axis::FcHz) && matches!(mean, MeanSource::Direct(_)) {
            return Err(usage("a link-budget axis cannot be swept with --w-hat"));
        }

        let is_bep = quantity == Quantity::Bep;
        let eps_max = a.eps_max.unwrap_or(kmu_core::coefficients::DEFAULT_EPS_MAX);
        let policy = TruncationPolicy {
            target_tol: a.tol.unwrap_or(if is_bep { 1e-300 } else { 1e-12 }),
            rel_tol: a.rel_tol.unwrap_or(if is_bep { 1e-10 } else { 0.0 }),
            eps_start: 64.min(eps_max.max(1)),
            eps_max,
            zeta: 0,
        };
        policy.validate().map_err(|e| usage(e.to_string()))?;
        let threshold = SnrThreshold::from_db(a.gamma_th_db.unwrap_or(0.0)).map_err(|e| usage(e.to_string()))?;
        let modulation = Modulation::new(match a.modulation.unwrap_or(ModArg::Bpsk) {
            ModArg::Bpsk => ModulationKind::Bpsk,
            ModArg::BfskOrth => ModulationKind::BfskOrthogonal,
            ModArg::BfskMincorr => ModulationKind::BfskMinCorrelation,
        });
        let repr = match a.repr.unwrap_or(ReprArg::Auto) {
            ReprArg::Auto => ReprChoice::Auto,
            ReprArg::Standard => ReprChoice::Standard,
            ReprArg::Tilde => ReprChoice::Tilde,
        };
        if let Some(w) = a.w {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(usage("--w must be finite and nonnegative"));
            }
        }
        let fixed = Fixed {
            params,
            n,
            mean,
            w: a.w,
            modulation,
            threshold,
            policy,
            repr,
        };

        let (lo, hi) = match axis {
            Axis::W if quantity.is_density() => {
                let (spec, _) = spec_at(&fixed, axis, quantity, f64::NAN).map_err(|e| usage(e.to_string()))?;
                (0.01 * spec.mean(), 5.0 * spec.mean())
            }
            Axis::W => (1e-3, 1.0),
            Axis::Distance => (10.0, 600.0),
            Axis::PtDbm => (-10.0, 40.0),
            Axis::FcHz => (50e9, 500e9),
            Axis::N => (1.0, 512.0),
        };
        let cfg = SweepConfig {
            quantity,
            axis,
            axis_min: a.min.unwrap_or(lo),
            axis_max: a.max.unwrap_or(hi),
            points: a.points.unwrap_or(DEFAULT_POINTS),
            spacing: a.spacing.unwrap_or(if axis == Axis::W && !quantity.is_density() {
                Spacing::Log
            } else {
                Spacing::Linear
            }),
            fixed,
            asymptote: a.asymptote.unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> anyhow::Result<()> {
        let (lo, hi) = (self.axis_min, self.axis_max);
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(usage(format!("need finite --min < --max, got {lo} and {hi}")));
        }
        if self.points < 2 {
            return Err(usage("--points must be at least 2"));
        }
        if self.spacing == Spacing::Log && lo <= 0.0 {
            return Err(usage("log spacing needs a positive --min"));
        }
        if self.axis == Axis::W && lo < 0.0 {
            return Err(usage("the w axis must be nonnegative"));
        }
        if self.axis == Axis::N && (lo < 0.5 || hi >= f64::from(u32::MAX)) {
            return Err(usage("the n axis must lie in [1, 2^32)"));
        }
        for v in [lo, hi] {
            spec_at(&self.fixed, self.axis, self.quantity, v).map_err(|e| usage(format!("at axis value {v}: {e}")))?;
        }
        Ok(())
    }

    /// Axis values in order; the ends are exact.
    pub fn grid(&self) -> Vec<f64> {
        let (lo, hi, k) = (self.axis_min, self.axis_max, self.points - 1);
        (0..=k)
            .map(|i| {
                if i == 0 {
                    return lo;
                }
                if i == k {
                    return hi;
                }
                let t = i as f64 / k as f64;
                match self.spacing {
                    Spacing::Linear => lo + (hi - lo) * t,
                    Spacing::Log => (lo.ln() + (hi.ln() - lo.ln()) * t).exp(),
                }
            })
            .map(|v| if self.axis == Axis::N { v.round() } else { v })
            .collect()
    }
}

/// Sum specification at axis value `v` and whether its CSI scaling is the
/// large-N approximation.
fn spec_at(f: &Fixed, axis: Axis, q: Quantity, v: f64) -> kmu_core::Result<(SumSpec, bool)> {
    let mut n = f.n;
    let mut mean = f.mean;
    match (axis, &mut mean) {
        (Axis::W, m) if !q.is_density() => *m = MeanSource::Direct(v),
        (Axis::Distance, MeanSource::Budget(b)) => b.distance_m = v,
        (Axis::PtDbm, MeanSource::Budget(b)) => b.pt_dbm = v,
        (Axis::FcHz, MeanSource::Budget(b)) => b.fc_hz = v,
        (Axis::N, _) => n = v.round() as u32,
        _ => {}
    }
    match mean {
        MeanSource::Direct(w) => Ok((SumSpec::new(f.params, n, w)?, false)),
        MeanSource::Budget(b) => {
            let e = effective_spec(&b, f.params, n)?;
            Ok((e.spec, e.approximate))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub axis_value: f64,
    /// Evaluation point (pdf, cdf).
    pub x: f64,
    /// Effective per-branch mean SNR; NaN if the point's parameters failed.
    pub w_hat: f64,
    pub csi_approximate: bool,
    pub outcome: Result<(EvalResult, Option<BepApproach>), Error>,
    pub asymptote: Option<f64>,
}

impl SweepConfig {
    pub fn eval(&self, v: f64) -> Point {
        let f = &self.fixed;
        let (spec, approx) = match spec_at(f, self.axis, self.quantity, v) {
            Ok(s) => s,
            Err(e) => {
                return Point {
                    axis_value: v,
                    x: f64::NAN,
                    w_hat: f64::NAN,
                    csi_approximate: false,
                    outcome: Err(e),
                    asymptote: None,
                }
            }
        };
        let x = if self.axis == Axis::W && self.quantity.is_density() {
            v
        } else {
            f.w.unwrap_or_else(|| spec.mean())
        };
        let outcome = match self.quantity {
            Quantity::Pdf => pdf(&spec, x, &f.policy, f.repr).map(|r| (r, None)),
            Quantity::Cdf => cdf(&spec, x, &f.policy, f.repr).map(|r| (r, None)),
            Quantity::Coverage => coverage(&spec, f.threshold, &f.policy).map(|r| (r, None)),
            Quantity::Bep => bep(&spec, &f.modulation, &f.policy).map(|r| (r.result, Some(r.approach))),
        };
        let asymptote = (self.asymptote && !self.quantity.is_density()).then(|| match self.quantity {
            Quantity::Bep => bep_asymptotic(&spec, &f.modulation),
            _ => coverage_asymptotic(&spec, f.threshold),
        });
        Point {
            axis_value: v,
            x,
            w_hat: spec.w_hat,
            csi_approximate: approx,
            outcome,
            asymptote,
        }
    }
}

pub fn status(e: &Error) -> &'static str {
    match e {
        Error::NoConvergence { .. } => "no_convergence",
        Error::IllConditioned { .. } => "ill_conditioned",
        Error::Overflow { .. } => "overflow",
        Error::Divergence { .. } => "divergence",
        Error::Domain { .. } | Error::Pole { .. } => "domain_error",
        Error::GateViolation { .. } => "gate_violation",
        Error::InvalidParameter(_) => "invalid_parameter",
        Error::EmptyInput => "empty_input",
    }
}

fn representation(r: Representation) -> &'static str {
    match r {
        Representation::Standard => "standard",
        Representation::Tilde => "tilde",
        Representation::GammaLimit => "gamma_limit",
    }
}

fn axis_column(axis: Axis, q: Quantity) -> &'static str {
    match axis {
        Axis::W if q.is_density() => "x",
        Axis::W => "w_hat",
        Axis::Distance => "distance_m",
        Axis::PtDbm => "pt_dbm",
        Axis::FcHz => "fc_hz",
        Axis::N => "n",
    }
}

fn num(v: f64) -> Cell {
    if v.is_nan() {
        Cell::Missing
    } else {
        Cell::F(v)
    }
}

impl SweepConfig {
    fn headers(&self) -> Vec<&'static str> {
        let q = self.quantity;
        let mut h = vec![axis_column(self.axis, q)];
        if q.is_density() {
            if self.axis != Axis::W {
                h.push("x");
            }
            h.extend(["value", "terms_used", "error_bound", "representation"]);
        } else {
            if self.axis != Axis::W {
                h.push("w_hat");
            }
            h.extend([
                if q == Quantity::Bep { "bep" } else { "coverage" },
                "terms_used",
                "error_bound",
                if q == Quantity::Bep { "approach" } else { "representation" },
            ]);
            if self.asymptote {
                h.push("asymptote");
            }
            h.push("csi_approximate");
        }
        h.push("status");
        h
    }

    fn row(&self, p: &Point) -> Vec<Cell> {
        let q = self.quantity;
        let mut r = vec![if self.axis == Axis::N {
            Cell::U(p.axis_value as u64)
        } else {
            Cell::F(p.axis_value)
        }];
        if q.is_density() && self.axis != Axis::W {
            r.push(num(p.x));
        }
        if !q.is_density() && self.axis != Axis::W {
            r.push(num(p.w_hat));
        }
        match &p.outcome {
            Ok((res, approach)) => {
                r.push(Cell::F(res.value));
                r.push(Cell::U(res.terms_used as u64));
                r.push(Cell::F(res.error_bound));
                r.push(Cell::S(match approach {
                    Some(BepApproach::A1) => "a1",
                    Some(BepApproach::A2) => "a2",
                    None => representation(res.representation),
                }));
            }
            Err(_) => r.extend([Cell::Missing, Cell::Missing, Cell::Missing, Cell::Missing]),
        }
        if !q.is_density() {
            if self.asymptote {
                r.push(p.asymptote.map_or(Cell::Missing, num));
            }
            r.push(Cell::B(p.csi_approximate));
        }
        r.push(Cell::S(match &p.outcome {
            Ok(_) => "ok",
            Err(e) => status(e),
        }));
        r
    }
}

pub struct SweepOutput {
    pub table: Table,
    pub points: Vec<Point>,
}

impl SweepOutput {
    pub fn failures(&self) -> impl Iterator<Item = (f64, &Error)> {
        self.points
            .iter()
            .filter_map(|p| p.outcome.as_ref().err().map(|e| (p.axis_value, e)))
    }
}

pub fn run_sweep(cfg: &SweepConfig) -> SweepOutput {
    let grid = cfg.grid();
    let mut points = Vec::with_capacity(grid.len());
    points.push(cfg.eval(grid[0]));
    points.par_extend(grid[1..].par_iter().map(|&v| cfg.eval(v)));
    let table = Table {
        headers: cfg.headers(),
        rows: points.iter().map(|p| cfg.row(p)).collect(),
    };
    SweepOutput { table, points }
}
