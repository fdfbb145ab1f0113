//! Modified Bessel function of the first kind.

use super::gamma::{lgamma, log1pmx};
use crate::error::{domain, Result};
use crate::signlog::SignLog;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// ln Γ(y+1) − [(y+½) ln y − y + ½ ln 2π] for y ≥ 10.
fn stirling_tail(y: f64) -> f64 {
    let r = 1.0 / (y * y);
    let c = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
    ];
    let mut acc = 0.0;
    for v in c.iter().rev() {
        acc = acc * r + v;
    }
    acc / y
}

/// ln of the series term (x/2)^{2k+ν} / (k! Γ(k+ν+1)), as (large, small)
/// parts whose sum carries more bits than one f64.
fn ln_term(nu: f64, x: f64, k: f64) -> (f64, f64) {
    let h = 0.5 * x;
    if k < 10.0 || k + nu < 10.0 {
        return (
            (2.0 * k + nu) * h.ln() - lgamma(k + 1.0) - lgamma(k + nu + 1.0),
            0.0,
        );
    }
    // Split the Stirling forms so the O(x) pieces cancel exactly near the peak.
    let j = k + nu;
    let l1 = log1pmx((h - k) / k) + (h - k) / k;
    let l2 = log1pmx((h - j) / j) + (h - j) / j;
    // 2k + ν split exactly
    let big = 2.0 * k + nu;
    let bb = big - 2.0 * k;
    let err = (2.0 * k - (big - bb)) + (nu - bb);
    let small = (k + 0.5) * l1 + (j + 0.5) * l2 - h.ln() - LN_2PI
        - stirling_tail(k)
        - stirling_tail(j);
    (big, small + err)
}

/// I_ν(x) for ν > −1, x ≥ 0, as a sign-log value.
pub fn bessel_i(nu: f64, x: f64) -> Result<SignLog> {
    if !(nu > -1.0) || !nu.is_finite() {
        return Err(domain("bessel_i", format!("nu = {nu} (need nu > -1)")));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(domain("bessel_i", format!("x = {x} (need finite x >= 0)")));
    }
    if x == 0.0 {
        return if nu == 0.0 {
            Ok(SignLog::ONE)
        } else if nu > 0.0 {
            Ok(SignLog::ZERO)
        } else {
            Err(domain("bessel_i", "I_nu(0) is infinite for nu < 0"))
        };
    }
    let q = 0.25 * x * x;
    // term ratio t_{k+1}/t_k = q / ((k+1)(k+1+ν)) crosses 1 at the peak
    let kp = ((-nu + (nu * nu + 4.0 * q).sqrt()) / 2.0 - 1.0).ceil().max(0.0);
    let ratio = |k: f64| q / ((k + 1.0) * (k + 1.0 + nu));
    let mut sum = 1.0;
    let mut comp = 0.0;
    let mut add = |v: f64, sum: &mut f64| {
        let y = v - comp;
        let t = *sum + y;
        comp = (t - *sum) - y;
        *sum = t;
    };
    let mut t = 1.0;
    let mut k = kp;
    loop {
        t *= ratio(k);
        add(t, &mut sum);
        k += 1.0;
        if t < 1e-18 * sum {
            break;
        }
    }
    let mut t = 1.0;
    let mut k = kp;
    while k >= 1.0 {
        t /= ratio(k - 1.0);
        add(t, &mut sum);
        k -= 1.0;
        if t < 1e-18 * sum {
            break;
        }
    }
    let (big, small) = ln_term(nu, x, kp);
    Ok(SignLog::with_lo(1, big, small + sum.ln()))
}
