//! The adaptive chain: one Metropolis-Hastings move under the current
//! bias, followed by one weight update at the post-decision stratum.

use crate::adapt::{LogOccupation, UpdateScheme, DEFAULT_RENORM_THRESHOLD};
use crate::kernel::{ChainState, ProposalConfig};
use crate::model::{Point, Potential, TargetModel, TwoWellPotential};
use crate::rng::{chain_rng, ChainRng};
use crate::Result;

/// Starting point inside the left well.
pub const DEFAULT_START: Point = Point::new(-1.0, 0.0);

/// What happened during one iteration `n -> n + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    /// Index `n + 1` of the new state.
    pub n: u64,
    pub position: Point,
    pub stratum: usize,
    pub accepted: bool,
    /// Stepsize `γ_{n+1}` used for the weight update.
    pub stepsize: f64,
}

#[derive(Debug, Clone)]
pub struct AdaptiveSampler<P = TwoWellPotential> {
    model: TargetModel<P>,
    proposal: ProposalConfig,
    chain: ChainState,
    occupation: LogOccupation,
    bias_exponent: f64,
}

impl AdaptiveSampler<TwoWellPotential> {
    /// Sampler started at `(-1, 0)` with uniform initial weights and the
    /// default renormalization threshold.
    pub fn new(model: TargetModel, proposal: ProposalConfig, scheme: UpdateScheme, seed: u64) -> Result<Self> {
        Self::builder(model, proposal, scheme).rng(chain_rng(seed)).build()
    }
}

impl<P: Potential + Clone> AdaptiveSampler<P> {
    pub fn builder(model: TargetModel<P>, proposal: ProposalConfig, scheme: UpdateScheme) -> SamplerBuilder<P> {
        SamplerBuilder {
            model,
            proposal,
            scheme,
            start: DEFAULT_START,
            threshold: DEFAULT_RENORM_THRESHOLD,
            initial_weights: None,
            rng: None,
        }
    }

    pub fn model(&self) -> &TargetModel<P> {
        &self.model
    }

    pub fn chain(&self) -> &ChainState {
        &self.chain
    }

    pub fn occupation(&self) -> &LogOccupation {
        &self.occupation
    }

    pub fn position(&self) -> Point {
        self.chain.position()
    }

    /// Iterations performed so far.
    pub fn n(&self) -> u64 {
        self.chain.step_count()
    }

    #[inline]
    pub fn step(&mut self) -> IterationRecord {
        let outcome = self.chain.mh_step(
            &self.model,
            self.occupation.log_weights(),
            self.bias_exponent,
            &self.proposal,
        );
        // parameters were validated at construction, so updates cannot fail
        self.occupation
            .update(outcome.stratum)
            .expect("validated update scheme");
        IterationRecord {
            n: self.chain.step_count(),
            position: self.chain.position(),
            stratum: outcome.stratum,
            accepted: outcome.accepted,
            stepsize: self.occupation.last_stepsize(),
        }
    }

    pub fn run(&mut self, steps: u64) {
        for _ in 0..steps {
            self.step();
        }
    }

    /// Runs until `stop` returns true for a record or `max_steps` more
    /// iterations have been done. Returns the stopping record, if any.
    pub fn run_until(
        &mut self,
        max_steps: u64,
        mut stop: impl FnMut(&IterationRecord) -> bool,
    ) -> Option<IterationRecord> {
        for _ in 0..max_steps {
            let rec = self.step();
            if stop(&rec) {
                return Some(rec);
            }
        }
        None
    }
}

pub struct SamplerBuilder<P> {
    model: TargetModel<P>,
    proposal: ProposalConfig,
    scheme: UpdateScheme,
    start: Point,
    threshold: f64,
    initial_weights: Option<Vec<f64>>,
    rng: Option<ChainRng>,
}

impl<P: Potential + Clone> SamplerBuilder<P> {
    pub fn start(mut self, start: Point) -> Self {
        self.start = start;
        self
    }

    pub fn threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn initial_weights(mut self, tau: Vec<f64>) -> Self {
        self.initial_weights = Some(tau);
        self
    }

    pub fn rng(mut self, rng: ChainRng) -> Self {
        self.rng = Some(rng);
        self
    }

    pub fn build(self) -> Result<AdaptiveSampler<P>> {
        let d = self.model.strata();
        let occupation = match self.initial_weights {
            Some(tau) => {
                if tau.len() != d {
                    return Err(crate::Error::LengthMismatch {
                        what: "initial weights vs strata",
                        left: tau.len(),
                        right: d,
                    });
                }
                LogOccupation::from_weights(&tau, self.scheme, self.threshold)?
            }
            None => LogOccupation::new(d, self.scheme, self.threshold)?,
        };
        let chain = ChainState::new(&self.model, self.start, self.rng.unwrap_or_else(|| chain_rng(0)))?;
        Ok(AdaptiveSampler {
            bias_exponent: self.scheme.bias_exponent(),
            model: self.model,
            proposal: self.proposal,
            chain,
            occupation,
        })
    }
}
