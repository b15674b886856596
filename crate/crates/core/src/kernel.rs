//! Metropolis-Hastings kernel for the biased densities
//! `π_{θ,a}(x) ∝ π(x) / θ(I(x))^a`, with `a = 1` giving the fully biased
//! `π_θ`.
//!
//! The kernel is handed log-weights `ν` rather than normalized θ: the
//! acceptance ratio only involves differences `ν(I(y)) - ν(I(x))`, in which
//! the normalization cancels.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::model::{Point, Potential, TargetModel};
use crate::rng::ChainRng;
use crate::{Error, Result};

/// Isotropic Gaussian random-walk proposal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProposalConfig {
    sigma: f64,
}

impl ProposalConfig {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid("sigma", format!("must be positive, got {sigma}")));
        }
        Ok(Self { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Position, step counter and random stream of one chain.
///
/// The energy and stratum of the current position are cached; they are
/// refreshed only on accepted moves.
#[derive(Debug, Clone)]
pub struct ChainState {
    position: Point,
    step_count: u64,
    rng: ChainRng,
    energy: f64,
    stratum: usize,
}

/// Result of one kernel transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub accepted: bool,
    /// Stratum of the post-decision position `X_{n+1}`.
    pub stratum: usize,
}

impl ChainState {
    pub fn new<P: Potential>(model: &TargetModel<P>, start: Point, rng: ChainRng) -> Result<Self> {
        let stratum = model.stratum_index(start.x1)?;
        Ok(Self {
            position: start,
            step_count: 0,
            rng,
            energy: model.energy(start),
            stratum,
        })
    }

    pub fn position(&self) -> Point {
        self.position
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn stratum(&self) -> usize {
        self.stratum
    }

    pub fn rng_mut(&mut self) -> &mut ChainRng {
        &mut self.rng
    }

    /// Gaussian increment of variance σ² in each coordinate.
    #[inline]
    pub fn propose(&mut self, cfg: &ProposalConfig) -> Point {
        let dx: f64 = self.rng.sample(StandardNormal);
        let dy: f64 = self.rng.sample(StandardNormal);
        Point::new(self.position.x1 + cfg.sigma * dx, self.position.x2 + cfg.sigma * dy)
    }

    /// One Metropolis-Hastings transition for `π_{θ,a}`.
    ///
    /// A uniform is drawn on every step, including proposals that leave the
    /// domain, so the stream layout does not depend on the weights.
    #[inline]
    pub fn mh_step<P: Potential>(
        &mut self,
        model: &TargetModel<P>,
        log_weights: &[f64],
        bias_exponent: f64,
        cfg: &ProposalConfig,
    ) -> StepOutcome {
        let candidate = self.propose(cfg);
        // (0, 1]: ln u stays finite
        let u = 1.0 - self.rng.random::<f64>();
        self.step_count += 1;

        if !model.contains(candidate.x1) {
            return StepOutcome {
                accepted: false,
                stratum: self.stratum,
            };
        }
        let energy = model.energy(candidate);
        let stratum = model.stratum_of(candidate.x1);
        let mut log_ratio = -model.beta() * (energy - self.energy);
        if stratum != self.stratum {
            log_ratio -= bias_exponent * (log_weights[stratum] - log_weights[self.stratum]);
        }
        if u.ln() <= log_ratio {
            self.position = candidate;
            self.energy = energy;
            self.stratum = stratum;
            StepOutcome {
                accepted: true,
                stratum,
            }
        } else {
            StepOutcome {
                accepted: false,
                stratum: self.stratum,
            }
        }
    }
}

/// Log Metropolis ratio `ln π_{θ,a}(to) - ln π_{θ,a}(from)` for a symmetric
/// proposal; `-∞` when `to` leaves the domain.
///
/// `log_weights` are `ln θ` up to a common additive constant.
pub fn log_acceptance<P: Potential>(
    model: &TargetModel<P>,
    log_weights: &[f64],
    bias_exponent: f64,
    from: Point,
    to: Point,
) -> f64 {
    if !model.contains(to.x1) {
        return f64::NEG_INFINITY;
    }
    let i_from = model.stratum_of(from.x1);
    let i_to = model.stratum_of(to.x1);
    let energy_term = -model.beta() * (model.energy(to) - model.energy(from));
    if i_from == i_to {
        energy_term
    } else {
        energy_term - bias_exponent * (log_weights[i_to] - log_weights[i_from])
    }
}
