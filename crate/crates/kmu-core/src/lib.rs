//! Series evaluation of the distribution of a sum of N i.i.d. squared κ-μ
//! variates, with coverage and BEP metrics for maximum ratio combining, a
//! sub-THz link budget and a Monte Carlo reference.

pub mod coefficients;
pub mod distribution;
pub mod error;
pub mod link_budget;
pub mod metrics;
pub mod monte_carlo;
pub mod quadrature;
pub mod signlog;
pub mod special_functions;
pub mod xdd;

pub use coefficients::{CoefficientCache, CoefficientKind, FadingParams, SumSpec};
pub use distribution::{EvalResult, ReprChoice, Representation, TruncationPolicy};
pub use error::{Error, Result};
pub use link_budget::{EffectiveSpec, LinkBudget};
pub use metrics::{BepApproach, BepResult, Modulation, ModulationKind, SnrThreshold};
pub use monte_carlo::{EstimateCI, RngSpec};
pub use signlog::SignLog;
