//! Sign/log-magnitude representation of reals.
//!
//! Gamma-function magnitudes in the series of this crate routinely leave the
//! `f64` range (Γ(Nμ + m) with N ≥ 512 overflows long before the series
//! converges), so every intermediate magnitude is carried as `(sign, ln|x|)`
//! and only converted to a plain `f64` at the public boundary.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Div, Mul, Neg};

#[derive(Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SignLog {
    /// -1, 0 or +1. Zero means exactly zero.
    pub sign: i8,
    /// Natural log of the magnitude; `-inf` when `sign == 0`.
    pub log_mag: f64,
    /// Low-order correction to `log_mag`, below its last bit.
    #[serde(default)]
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// exp(hi) evaluated the same way everywhere, so `lo` can absorb its rounding.
#[inline]
fn exp_hi(hi: f64) -> f64 {
    hi.exp()
}

impl SignLog {
    pub const ZERO: SignLog = SignLog {
        sign: 0,
        log_mag: f64::NEG_INFINITY,
        lo: 0.0,
    };
    pub const ONE: SignLog = SignLog {
        sign: 1,
        log_mag: 0.0,
        lo: 0.0,
    };

    pub fn new(sign: i8, log_mag: f64) -> Self {
        if sign == 0 || log_mag == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            SignLog {
                sign: sign.signum(),
                log_mag,
                lo: 0.0,
            }
        }
    }

    /// Value with log magnitude hi + lo, renormalized.
    pub(crate) fn with_lo(sign: i8, hi: f64, lo: f64) -> Self {
        if sign == 0 || hi == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        if !hi.is_finite() || !lo.is_finite() {
            return SignLog::new(sign, hi + lo);
        }
        let (h, l) = two_sum(hi, lo);
        SignLog {
            sign: sign.signum(),
            log_mag: h,
            lo: l,
        }
    }

    /// Low-order part of the log magnitude.
    pub(crate) fn log_lo(self) -> f64 {
        self.lo
    }

    /// Positive value `exp(log_mag)`.
    pub fn from_ln(log_mag: f64) -> Self {
        Self::new(1, log_mag)
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            return Self::ZERO;
        }
        let a = x.abs();
        let hi = a.ln();
        let e = exp_hi(hi);
        // a and e agree to within an ulp, so a - e is exact
        let lo = if e.is_finite() && e > 0.0 {
            ((a - e) / e).ln_1p()
        } else {
            0.0
        };
        SignLog {
            sign: if x > 0.0 { 1 } else { -1 },
            log_mag: hi,
            lo,
        }
    }

    /// Converts back to `f64`; saturates to ±inf or 0 outside the double range.
    pub fn value(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => {
                let e = exp_hi(self.log_mag);
                f64::from(s) * (e + e * self.lo.exp_m1())
            }
        }
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn abs(self) -> Self {
        if self.sign == 0 {
            self
        } else {
            SignLog { sign: 1, ..self }
        }
    }

    pub fn recip(self) -> Self {
        assert!(self.sign != 0, "reciprocal of zero SignLog");
        SignLog {
            sign: self.sign,
            log_mag: -self.log_mag,
            lo: -self.lo,
        }
    }

    pub fn powf(self, p: f64) -> Self {
        match self.sign {
            0 if p > 0.0 => Self::ZERO,
            0 => panic!("non-positive power of zero SignLog"),
            1 => {
                let h = self.log_mag * p;
                let err = self.log_mag.mul_add(p, -h);
                Self::with_lo(1, h, err + self.lo * p)
            }
            _ => panic!("real power of a negative SignLog"),
        }
    }

    /// Sum of two values. Magnitudes are combined relative to the larger one,
    /// so neither operand needs to be representable as `f64`.
    pub fn add(self, other: Self) -> Self {
        if self.sign == 0 {
            return other;
        }
        if other.sign == 0 {
            return self;
        }
        let (big, small) = if self.log_mag >= other.log_mag {
            (self, other)
        } else {
            (other, self)
        };
        let d = ((small.log_mag - big.log_mag) + (small.lo - big.lo)).exp();
        let t = if big.sign == small.sign {
            d.ln_1p()
        } else if d >= 1.0 {
            return Self::ZERO;
        } else {
            (-d).ln_1p()
        };
        let (h, e) = two_sum(big.log_mag, t);
        Self::with_lo(big.sign, h, e + big.lo)
    }

    pub fn sub(self, other: Self) -> Self {
        self.add(-other)
    }

    /// Compares magnitudes only.
    pub fn cmp_abs(self, other: Self) -> Ordering {
        match (self.sign, other.sign) {
            (0, 0) => Ordering::Equal,
            (0, _) => Ordering::Less,
            (_, 0) => Ordering::Greater,
            _ => self
                .log_mag
                .partial_cmp(&other.log_mag)
                .unwrap_or(Ordering::Equal),
        }
    }
}

impl Mul for SignLog {
    type Output = SignLog;
    fn mul(self, rhs: SignLog) -> SignLog {
        if self.sign == 0 || rhs.sign == 0 {
            return SignLog::ZERO;
        }
        let (h, e) = two_sum(self.log_mag, rhs.log_mag);
        SignLog::with_lo(self.sign * rhs.sign, h, e + self.lo + rhs.lo)
    }
}

impl Div for SignLog {
    type Output = SignLog;
    fn div(self, rhs: SignLog) -> SignLog {
        self * rhs.recip()
    }
}

impl Neg for SignLog {
    type Output = SignLog;
    fn neg(self) -> SignLog {
        SignLog {
            sign: -self.sign,
            ..self
        }
    }
}

impl fmt::Debug for SignLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "SignLog(0)"),
            s => write!(f, "SignLog({}exp({}))", if s > 0 { "+" } else { "-" }, self.log_mag),
        }
    }
}

impl From<f64> for SignLog {
    fn from(x: f64) -> Self {
        SignLog::from_f64(x)
    }
}
