//! Special functions evaluated in log or extended precision.

mod bessel;
mod gamma;
mod hypergeometric;

pub use bessel::bessel_i;
pub use gamma::{
    ln_gamma, reg_gamma_p, reg_gamma_p_sequence, reg_gamma_p_signlog, reg_gamma_q,
};
pub use hypergeometric::{hyp_2f1, hyp_2f1_shifted, hyp_pfq, ShiftedBatch};

pub(crate) use gamma::{lgamma, ln_poisson_weight, stirling_remainder};

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}
