//! Double-double arithmetic with an unbounded binary exponent.
//!
//! Value = (hi + lo) · 2^exp with 0.5 ≤ |hi| < 1 (or hi = lo = 0). Gives about
//! 106 bits of mantissa and no overflow for the magnitudes met by the series
//! coefficients, which both grow past 1e308 and cancel heavily.

use crate::signlog::SignLog;
use std::cmp::Ordering;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Xdd {
    hi: f64,
    lo: f64,
    exp: i64,
}

const LN2_HI: f64 = 6.931_471_803_691_238_164_90e-1;
const LN2_LO: f64 = 1.908_214_929_270_587_700_02e-10;

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

#[inline]
fn dd_add(ah: f64, al: f64, bh: f64, bl: f64) -> (f64, f64) {
    let (s, e) = two_sum(ah, bh);
    let (t, f) = two_sum(al, bl);
    let (s, e) = quick_two_sum(s, e + t);
    quick_two_sum(s, e + f)
}

#[inline]
fn dd_mul(ah: f64, al: f64, bh: f64, bl: f64) -> (f64, f64) {
    let (p, e) = two_prod(ah, bh);
    quick_two_sum(p, e + (ah * bl + al * bh))
}

fn dd_div(ah: f64, al: f64, bh: f64, bl: f64) -> (f64, f64) {
    let q1 = ah / bh;
    let (ph, pl) = dd_mul(q1, 0.0, bh, bl);
    let (rh, rl) = dd_add(ah, al, -ph, -pl);
    let q2 = rh / bh;
    let (ph, pl) = dd_mul(q2, 0.0, bh, bl);
    let (rh, _) = dd_add(rh, rl, -ph, -pl);
    let q3 = rh / bh;
    let (q, e) = quick_two_sum(q1, q2);
    dd_add(q, e, q3, 0.0)
}

/// Exact 2^k for k in the normal exponent range.
#[inline]
fn pow2(k: i64) -> f64 {
    debug_assert!((-1022..=1023).contains(&k));
    f64::from_bits(((k + 1023) as u64) << 52)
}

/// Splits a finite nonzero x into (m, e) with x = m·2^e, 0.5 ≤ |m| < 1.
fn frexp(x: f64) -> (f64, i64) {
    let bits = x.to_bits();
    let raw = ((bits >> 52) & 0x7ff) as i64;
    if raw == 0 {
        // subnormal
        let (m, e) = frexp(x * pow2(54));
        return (m, e - 54);
    }
    let e = raw - 1022;
    let m = f64::from_bits((bits & !(0x7ff << 52)) | (1022u64 << 52));
    (m, e)
}

impl Xdd {
    pub const ZERO: Xdd = Xdd {
        hi: 0.0,
        lo: 0.0,
        exp: 0,
    };
    pub const ONE: Xdd = Xdd {
        hi: 0.5,
        lo: 0.0,
        exp: 1,
    };

    fn normalized(hi: f64, lo: f64, exp: i64) -> Xdd {
        if hi == 0.0 {
            if lo == 0.0 {
                return Xdd::ZERO;
            }
            return Xdd::normalized(lo, 0.0, exp);
        }
        let (m, e) = frexp(hi);
        if e == 0 {
            return Xdd { hi: m, lo, exp };
        }
        let scale = pow2(-e.clamp(-1022, 1022));
        let mut lo = lo * scale;
        // e outside ±1022 only occurs transiently when hi is huge/tiny
        if e.abs() > 1022 {
            lo = 0.0;
        }
        Xdd {
            hi: m,
            lo,
            exp: exp + e,
        }
    }

    pub fn from_f64(x: f64) -> Xdd {
        assert!(x.is_finite(), "Xdd::from_f64 on non-finite value");
        Xdd::normalized(x, 0.0, 0)
    }

    /// Exact conversion of an integer of magnitude below 2^53.
    pub fn from_int(n: i64) -> Xdd {
        Xdd::from_f64(n as f64)
    }

    pub fn from_signlog(s: SignLog) -> Xdd {
        if s.sign == 0 {
            return Xdd::ZERO;
        }
        let e = (s.log_mag / std::f64::consts::LN_2).floor() as i64;
        let ef = e as f64;
        // Cody-Waite reduction: ef * LN2_HI is exact for |e| < 2^21
        let r = (s.log_mag - ef * LN2_HI) - ef * LN2_LO + s.log_lo();
        let m = r.exp();
        // one correction step recovers bits lost in exp()
        let corr = r - m.ln();
        let (h, l) = two_prod(m, corr);
        let (h, l) = dd_add(m, 0.0, h, l);
        Xdd::normalized(f64::from(s.sign) * h, f64::from(s.sign) * l, e)
    }

    pub fn is_zero(self) -> bool {
        self.hi == 0.0
    }

    pub fn signum(self) -> i8 {
        if self.hi > 0.0 {
            1
        } else if self.hi < 0.0 {
            -1
        } else {
            0
        }
    }

    pub fn abs(self) -> Xdd {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    /// ln|x|; -inf for zero.
    pub fn ln_abs(self) -> f64 {
        if self.hi == 0.0 {
            return f64::NEG_INFINITY;
        }
        self.hi.abs().ln() + (self.lo / self.hi).ln_1p() + self.exp as f64 * std::f64::consts::LN_2
    }

    pub fn to_signlog(self) -> SignLog {
        if self.hi == 0.0 {
            return SignLog::ZERO;
        }
        let ef = self.exp as f64;
        let (s, e) = two_sum(ef * LN2_HI, self.hi.abs().ln());
        let lo = e + ef * LN2_LO + (self.lo / self.hi).ln_1p();
        SignLog::with_lo(self.signum(), s, lo)
    }

    /// Nearest `f64`; saturates to ±inf / 0.
    pub fn to_f64(self) -> f64 {
        if self.hi == 0.0 {
            return 0.0;
        }
        let v = self.hi + self.lo;
        if self.exp > 1023 {
            return v.signum() * f64::INFINITY;
        }
        if self.exp < -1074 - 2 {
            return 0.0;
        }
        if self.exp >= -1022 {
            v * pow2(self.exp)
        } else {
            v * pow2(-1022) * pow2(self.exp + 1022)
        }
    }

    pub fn mul_f64(self, b: f64) -> Xdd {
        self * Xdd::from_f64(b)
    }

    pub fn div_f64(self, b: f64) -> Xdd {
        self / Xdd::from_f64(b)
    }

    /// Magnitude comparison.
    pub fn cmp_abs(self, other: Xdd) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            _ => self.exp.cmp(&other.exp).then(
                (self.hi.abs() + self.lo * self.hi.signum())
                    .partial_cmp(&(other.hi.abs() + other.lo * other.hi.signum()))
                    .unwrap_or(Ordering::Equal),
            ),
        }
    }

    pub fn max_abs(self, other: Xdd) -> Xdd {
        if self.cmp_abs(other) == Ordering::Less {
            other.abs()
        } else {
            self.abs()
        }
    }

    /// |self| / |other| as a plain ratio (may be inf).
    pub fn ratio_abs(self, other: Xdd) -> f64 {
        (self.ln_abs() - other.ln_abs()).exp()
    }
}

impl std::ops::Add for Xdd {
    type Output = Xdd;
    fn add(self, rhs: Xdd) -> Xdd {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (big, small) = if self.exp >= rhs.exp {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let d = big.exp - small.exp;
        if d > 110 {
            return big;
        }
        let s = pow2(-d);
        let (h, l) = dd_add(big.hi, big.lo, small.hi * s, small.lo * s);
        Xdd::normalized(h, l, big.exp)
    }
}

impl std::ops::Sub for Xdd {
    type Output = Xdd;
    fn sub(self, rhs: Xdd) -> Xdd {
        self + (-rhs)
    }
}

impl std::ops::Neg for Xdd {
    type Output = Xdd;
    fn neg(self) -> Xdd {
        Xdd {
            hi: -self.hi,
            lo: -self.lo,
            exp: self.exp,
        }
    }
}

impl std::ops::Mul for Xdd {
    type Output = Xdd;
    fn mul(self, rhs: Xdd) -> Xdd {
        if self.is_zero() || rhs.is_zero() {
            return Xdd::ZERO;
        }
        let (h, l) = dd_mul(self.hi, self.lo, rhs.hi, rhs.lo);
        Xdd::normalized(h, l, self.exp + rhs.exp)
    }
}

impl std::ops::Div for Xdd {
    type Output = Xdd;
    fn div(self, rhs: Xdd) -> Xdd {
        assert!(!rhs.is_zero(), "Xdd division by zero");
        if self.is_zero() {
            return Xdd::ZERO;
        }
        let (h, l) = dd_div(self.hi, self.lo, rhs.hi, rhs.lo);
        Xdd::normalized(h, l, self.exp - rhs.exp)
    }
}

impl std::ops::AddAssign for Xdd {
    fn add_assign(&mut self, rhs: Xdd) {
        *self = *self + rhs;
    }
}

impl std::ops::MulAssign for Xdd {
    fn mul_assign(&mut self, rhs: Xdd) {
        *self = *self * rhs;
    }
}

/// Running sum that also tracks Σ|terms| for cancellation diagnostics.
#[derive(Clone, Copy, Debug)]
pub struct XddSum {
    pub sum: Xdd,
    pub abs_sum: Xdd,
}

impl Default for XddSum {
    fn default() -> Self {
        XddSum {
            sum: Xdd::ZERO,
            abs_sum: Xdd::ZERO,
        }
    }
}

impl XddSum {
    pub fn push(&mut self, t: Xdd) {
        self.sum += t;
        self.abs_sum += t.abs();
    }

    /// Σ|t| / |Σt|; 1 when all terms share a sign, inf when the sum vanished.
    pub fn cancellation(&self) -> f64 {
        if self.abs_sum.is_zero() {
            1.0
        } else if self.sum.is_zero() {
            f64::INFINITY
        } else {
            self.abs_sum.ratio_abs(self.sum).max(1.0)
        }
    }
}
