//! Sub-THz link budget: transmit power, log-distance path loss and thermal
//! noise mapped to the per-branch mean SNR ŵ.

use crate::coefficients::{FadingParams, SumSpec};
use crate::error::{Error, Result};
use crate::metrics::db_to_linear;
use serde::{Deserialize, Serialize};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Thermal noise density in dBm/Hz.
pub const THERMAL_FLOOR_DBM_HZ: f64 = -174.0;

/// Branch count below which the (1−α²) SNR scaling is flagged as approximate.
pub const CSI_SCALING_MIN_N: u32 = 32;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub pt_dbm: f64,
    pub fc_hz: f64,
    pub distance_m: f64,
    pub path_loss_exp: f64,
    pub noise_figure_db: f64,
    /// Bandwidth as a fraction of the carrier frequency.
    pub bandwidth_fraction: f64,
    /// CSI estimation accuracy; 0 is perfect CSI.
    pub alpha: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        LinkBudget {
            pt_dbm: 23.0,
            fc_hz: 140e9,
            distance_m: 200.0,
            path_loss_exp: 2.0,
            noise_figure_db: 6.0,
            bandwidth_fraction: 0.005,
            alpha: 0.0,
        }
    }
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidParameter(format!("{what} = {v}")));
        if !(self.fc_hz > 0.0 && self.fc_hz.is_finite()) {
            return bad("fc_hz", self.fc_hz);
        }
        if !(self.distance_m > 0.0 && self.distance_m.is_finite()) {
            return bad("distance_m", self.distance_m);
        }
        if !(self.bandwidth_fraction > 0.0 && self.bandwidth_fraction.is_finite()) {
            return bad("bandwidth_fraction", self.bandwidth_fraction);
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad("alpha", self.alpha);
        }
        if !(self.pt_dbm.is_finite() && self.path_loss_exp.is_finite() && self.noise_figure_db.is_finite()) {
            return Err(Error::InvalidParameter("non-finite link budget field".into()));
        }
        Ok(())
    }

    /// Ω = bandwidth_fraction · f_c.
    pub fn bandwidth_hz(&self) -> f64 {
        self.bandwidth_fraction * self.fc_hz
    }

    /// φ = (c/(4π f_c))².
    pub fn phi(&self) -> f64 {
        (SPEED_OF_LIGHT / (4.0 * std::f64::consts::PI * self.fc_hz)).powi(2)
    }
}

/// σ² = −174 + 10 log10 Ω + ν, in dBm.
pub fn noise_power_dbm(b: &LinkBudget) -> f64 {
    THERMAL_FLOOR_DBM_HZ + 10.0 * b.bandwidth_hz().log10() + b.noise_figure_db
}

/// ŵ = (P_t/σ²) φ d^{−β}, linear.
pub fn w_hat_from_budget(b: &LinkBudget) -> Result<f64> {
    b.validate()?;
    // both powers are in dBm, so the 30 dB offsets cancel in the ratio
    let snr_tx = db_to_linear(b.pt_dbm - noise_power_dbm(b));
    Ok(snr_tx * b.phi() * b.distance_m.powf(-b.path_loss_exp))
}

/// SumSpec with the imperfect-CSI mean SNR (1−α²)ŵ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveSpec {
    pub spec: SumSpec,
    /// Set when N < 32 and α > 0: the (1−α²) scaling is a large-N result.
    pub approximate: bool,
}

pub fn effective_spec(b: &LinkBudget, params: FadingParams, n: u32) -> Result<EffectiveSpec> {
    let w = w_hat_from_budget(b)? * (1.0 - b.alpha * b.alpha);
    let spec = SumSpec::new(params, n, w)?;
    Ok(EffectiveSpec {
        spec,
        approximate: b.alpha > 0.0 && n < CSI_SCALING_MIN_N,
    })
}
