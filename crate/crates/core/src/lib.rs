//! Adaptive-biasing Monte Carlo over stratified state spaces.
//!
//! The crate implements self-healing umbrella sampling (SHUS) and its
//! relatives: Wang-Landau with deterministic stepsizes (nonlinear and
//! linear weight updates), SHUS^α with polynomially decaying effective
//! stepsizes, and a partially biased variant where only a fraction of the
//! learned bias is applied.
//!
//! All samplers share the same pieces:
//!
//! * [`model`]: the two-well benchmark density, its partition into strata
//!   along `x1`, and quadrature reference weights θ*.
//! * [`kernel`]: a Metropolis-Hastings kernel targeting the biased density,
//!   evaluated in logarithmic scale.
//! * [`adapt`]: log-scale occupation weights with overflow-safe
//!   renormalization and every weight-update scheme.
//! * [`sampler`]: the adaptive chain gluing kernel and update together.
//! * [`diagnostics`]: exit times, scaling-law fits, weight statistics.
//! * [`oracle`]: closed-form mean field, Lyapunov function and biased
//!   stratum masses used to cross-check the samplers.
//! * [`runner`]: configuration, experiment commands and CSV/JSON output.
//!
//! ```
//! use shus::prelude::*;
//!
//! let model = TargetModel::new(1.0, 1.2, 12).unwrap();
//! let scheme = UpdateScheme::Shus { gamma: 1.0 };
//! let mut sampler = AdaptiveSampler::new(model, ProposalConfig::new(0.2).unwrap(), scheme, 7).unwrap();
//! sampler.run(10_000);
//! let theta = sampler.occupation().theta();
//! assert!((theta.iter().sum::<f64>() - 1.0).abs() < 1e-12);
//! ```

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adapt;
pub mod diagnostics;
mod error;
pub mod kernel;
pub mod model;
pub mod oracle;
pub mod rng;
pub mod runner;
pub mod sampler;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::adapt::{LogOccupation, UpdateScheme, DEFAULT_RENORM_THRESHOLD};
    pub use crate::diagnostics::{ExitOutcome, ExitTimeEstimate, FitResult, WeightStatistics};
    pub use crate::kernel::{ChainState, ProposalConfig};
    pub use crate::model::{Point, Potential, ReferenceWeights, TargetModel, TwoWellPotential};
    pub use crate::sampler::AdaptiveSampler;
    pub use crate::{Error, Result};
}
