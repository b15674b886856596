//! Weight-update schemes over log-scale occupation factors.
//!
//! Every scheme updates unnormalized occupation factors `τ_n` of the strata
//! multiplicatively, `τ_{n+1}(i) = τ_n(i) (1 + γ_{n+1} 1{i = I(X_{n+1})})`,
//! and differs only in how the stepsize `γ_{n+1}` is produced:
//!
//! | scheme            | stepsize                                           |
//! |-------------------|----------------------------------------------------|
//! | SHUS              | `γ / S_n`                                          |
//! | Wang-Landau       | `γ* / (n+1)^α` (deterministic)                     |
//! | SHUS^α            | `γ(α) / ln(1 + S_n)^{α/(1-α)}`                     |
//! | partial bias      | `γ θ_n(i)^{a-1} / S_n` at the hit stratum          |
//!
//! where `S_n = Σ_i τ_n(i)`. The Wang-Landau linear variant instead acts
//! on the normalized weights directly.
//!
//! Factors are stored as `ν(i) = ln τ(i) - r ln M`. Whenever `Σ exp ν(i)`
//! reaches the threshold `M`, `ln M` is subtracted from every entry and the
//! counter `r` is incremented, so `S_n = M^r Σ exp ν(i)` is never formed
//! explicitly and cannot overflow.

use crate::model::log_sum_exp;
use crate::{Error, Result};

/// Default renormalization threshold `M`.
pub const DEFAULT_RENORM_THRESHOLD: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpdateScheme {
    /// Self-healing umbrella sampling, `τ(i) += γ θ(i)` at the hit stratum.
    Shus { gamma: f64 },
    /// Wang-Landau with deterministic stepsizes `γ* / n^α`.
    WangLandau { gamma_star: f64, alpha: f64, linear: bool },
    /// SHUS^α; `gamma` is the user parameter, the update uses
    /// `γ(α) = (1-α)^{-α/(1-α)} γ`.
    ShusAlpha { gamma: f64, alpha: f64 },
    /// SHUS with only the fraction `a` of the bias applied,
    /// `τ(i) += γ θ(i)^a` at the hit stratum.
    PartialBias { gamma: f64, a: f64 },
}

impl UpdateScheme {
    pub fn validate(&self) -> Result<()> {
        let positive = |name, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be positive, got {v}")))
            }
        };
        match *self {
            UpdateScheme::Shus { gamma } => positive("gamma", gamma),
            UpdateScheme::WangLandau {
                gamma_star,
                alpha,
                linear,
            } => {
                positive("gamma_star", gamma_star)?;
                if !(alpha > 0.5 && alpha <= 1.0) {
                    return Err(Error::invalid("alpha", format!("must lie in (1/2, 1], got {alpha}")));
                }
                // first stepsize is gamma_star / 1^alpha
                if linear && gamma_star >= 1.0 {
                    return Err(Error::invalid(
                        "gamma_star",
                        format!("linear updates need a first stepsize below 1, got {gamma_star}"),
                    ));
                }
                Ok(())
            }
            UpdateScheme::ShusAlpha { gamma, alpha } => {
                positive("gamma", gamma)?;
                if !(alpha > 0.5 && alpha < 1.0) {
                    return Err(Error::invalid("alpha", format!("must lie in (1/2, 1), got {alpha}")));
                }
                Ok(())
            }
            UpdateScheme::PartialBias { gamma, a } => {
                positive("gamma", gamma)?;
                if !(a > 0.0 && a <= 1.0) {
                    return Err(Error::invalid("a", format!("must lie in (0, 1], got {a}")));
                }
                Ok(())
            }
        }
    }

    /// Exponent applied to the bias in the kernel.
    pub fn bias_exponent(&self) -> f64 {
        match *self {
            UpdateScheme::PartialBias { a, .. } => a,
            _ => 1.0,
        }
    }

    /// Stepsize decay exponent: 1 for SHUS and partial bias.
    pub fn decay_exponent(&self) -> f64 {
        match *self {
            UpdateScheme::WangLandau { alpha, .. } | UpdateScheme::ShusAlpha { alpha, .. } => alpha,
            _ => 1.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            UpdateScheme::Shus { .. } => "shus",
            UpdateScheme::WangLandau { .. } => "wl",
            UpdateScheme::ShusAlpha { .. } => "shus-alpha",
            UpdateScheme::PartialBias { .. } => "partial-bias",
        }
    }
}

/// `γ(α) = (1-α)^{-α/(1-α)} γ`.
pub fn shus_alpha_prefactor(gamma: f64, alpha: f64) -> f64 {
    (1.0 - alpha).powf(-alpha / (1.0 - alpha)) * gamma
}

/// Predicted limit of `n^α γ_n` for SHUS^α: `γ(α)^{1-α} d^α (1-α)^α`.
pub fn shus_alpha_stepsize_limit(gamma: f64, alpha: f64, strata: usize) -> f64 {
    shus_alpha_prefactor(gamma, alpha).powf(1.0 - alpha) * (strata as f64).powf(alpha) * (1.0 - alpha).powf(alpha)
}

/// SHUS^α stepsize from the renormalized representation:
/// `γ(α) / [ln(M^{-r} + Σ e^ν) + r ln M]^{α/(1-α)}`.
#[inline]
pub fn shus_alpha_stepsize(gamma_alpha: f64, alpha: f64, sum_exp: f64, renorm_count: u64, ln_threshold: f64) -> f64 {
    let r = renorm_count as f64;
    let ln_one_plus_s = ((-r * ln_threshold).exp() + sum_exp).ln() + r * ln_threshold;
    gamma_alpha * (-(alpha / (1.0 - alpha)) * ln_one_plus_s.ln()).exp()
}

/// Log-scale occupation factors with renormalization bookkeeping.
#[derive(Debug, Clone)]
pub struct LogOccupation {
    scheme: UpdateScheme,
    nu: Vec<f64>,
    // exp(nu), kept in sync with nu
    weights: Vec<f64>,
    sum_exp: f64,
    renorm_count: u64,
    threshold: f64,
    ln_threshold: f64,
    updates: u64,
    last_stepsize: f64,
}

impl LogOccupation {
    /// Uniform start `τ_0 = (1/d, …, 1/d)`.
    pub fn new(strata: usize, scheme: UpdateScheme, threshold: f64) -> Result<Self> {
        if strata == 0 {
            return Err(Error::invalid("strata", "need at least one stratum"));
        }
        Self::from_weights(&vec![1.0 / strata as f64; strata], scheme, threshold)
    }

    /// Start from arbitrary positive factors `τ_0`.
    pub fn from_weights(tau: &[f64], scheme: UpdateScheme, threshold: f64) -> Result<Self> {
        scheme.validate()?;
        if tau.is_empty() {
            return Err(Error::invalid("tau", "empty weight vector"));
        }
        if !(threshold > 1.0 && threshold.is_finite()) {
            return Err(Error::invalid("threshold", format!("must exceed 1, got {threshold}")));
        }
        if let Some((i, &v)) = tau.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::NonPositiveWeight { stratum: i, value: v });
        }
        let mut occ = Self {
            scheme,
            nu: tau.iter().map(|t| t.ln()).collect(),
            weights: tau.to_vec(),
            sum_exp: 0.0,
            renorm_count: 0,
            threshold,
            ln_threshold: threshold.ln(),
            updates: 0,
            last_stepsize: f64::NAN,
        };
        occ.sum_exp = occ.weights.iter().sum();
        occ.renormalize();
        Ok(occ)
    }

    pub fn scheme(&self) -> UpdateScheme {
        self.scheme
    }

    pub fn strata(&self) -> usize {
        self.nu.len()
    }

    /// Renormalized log factors `ν`. Differences equal differences of `ln θ`.
    pub fn log_weights(&self) -> &[f64] {
        &self.nu
    }

    pub fn renorm_count(&self) -> u64 {
        self.renorm_count
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// `Σ exp ν(i)`, the renormalized total.
    pub fn sum_exp(&self) -> f64 {
        self.sum_exp
    }

    /// Number of updates applied so far (`n`).
    pub fn updates(&self) -> u64 {
        self.updates
    }

    /// Stepsize applied by the most recent update (NaN before the first).
    pub fn last_stepsize(&self) -> f64 {
        self.last_stepsize
    }

    /// `ln S_n = ln Σ e^ν + r ln M`.
    pub fn ln_total(&self) -> f64 {
        self.sum_exp.ln() + self.renorm_count as f64 * self.ln_threshold
    }

    pub fn ln_theta_at(&self, i: usize) -> f64 {
        self.nu[i] - self.sum_exp.ln()
    }

    pub fn ln_theta(&self) -> Vec<f64> {
        let ln_sum = self.sum_exp.ln();
        self.nu.iter().map(|v| v - ln_sum).collect()
    }

    pub fn theta(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w / self.sum_exp).collect()
    }

    /// The stepsize `γ_{n+1}` the next update will use.
    ///
    /// For the partial-bias scheme the effective stepsize depends on the
    /// stratum that gets hit; this returns `γ / S_n`, the value it takes
    /// with `a = 1`. See [`LogOccupation::last_stepsize`] for the value
    /// actually applied.
    pub fn current_stepsize(&self) -> f64 {
        match self.scheme {
            UpdateScheme::Shus { gamma } | UpdateScheme::PartialBias { gamma, .. } => self.shus_stepsize(gamma),
            UpdateScheme::WangLandau { gamma_star, alpha, .. } => gamma_star / ((self.updates + 1) as f64).powf(alpha),
            UpdateScheme::ShusAlpha { gamma, alpha } => shus_alpha_stepsize(
                shus_alpha_prefactor(gamma, alpha),
                alpha,
                self.sum_exp,
                self.renorm_count,
                self.ln_threshold,
            ),
        }
    }

    #[inline]
    fn shus_stepsize(&self, gamma: f64) -> f64 {
        gamma * (-self.ln_total()).exp()
    }

    /// Applies the configured scheme for a visit to `hit`.
    pub fn update(&mut self, hit: usize) -> Result<()> {
        match self.scheme {
            UpdateScheme::Shus { gamma } => self.shus_update(gamma, hit),
            UpdateScheme::WangLandau { linear: false, .. } => {
                let step = self.current_stepsize();
                self.wl_nonlinear_update(hit, step)?;
            }
            UpdateScheme::WangLandau { linear: true, .. } => {
                let step = self.current_stepsize();
                self.wl_linear_update(hit, step)?;
            }
            UpdateScheme::ShusAlpha { gamma, alpha } => {
                self.shus_alpha_update(shus_alpha_prefactor(gamma, alpha), alpha, hit)
            }
            UpdateScheme::PartialBias { gamma, a } => self.partial_bias_update(gamma, a, hit),
        }
        Ok(())
    }

    /// `τ(hit) <- τ(hit) (1 + γ / S_n)`, i.e. `τ(hit) += γ θ(hit)`.
    #[inline]
    pub fn shus_update(&mut self, gamma: f64, hit: usize) {
        let step = self.shus_stepsize(gamma);
        self.apply(hit, step);
    }

    /// `τ(hit) <- τ(hit) (1 + stepsize)`.
    pub fn wl_nonlinear_update(&mut self, hit: usize, stepsize: f64) -> Result<()> {
        if !(stepsize >= 0.0 && stepsize.is_finite()) {
            return Err(Error::invalid(
                "stepsize",
                format!("must be non-negative, got {stepsize}"),
            ));
        }
        self.apply(hit, stepsize);
        Ok(())
    }

    /// Linearized update on the normalized weights; afterwards the factors
    /// are the normalized weights themselves.
    pub fn wl_linear_update(&mut self, hit: usize, stepsize: f64) -> Result<()> {
        let next = wl_linear_update(&self.theta(), hit, stepsize)?;
        for (i, t) in next.iter().enumerate() {
            self.nu[i] = t.ln();
            self.weights[i] = *t;
        }
        self.sum_exp = self.weights.iter().sum();
        self.renorm_count = 0;
        self.updates += 1;
        self.last_stepsize = stepsize;
        Ok(())
    }

    /// SHUS^α: `τ(hit) <- τ(hit) (1 + γ(α) / ln(1 + S_n)^{α/(1-α)})`.
    #[inline]
    pub fn shus_alpha_update(&mut self, gamma_alpha: f64, alpha: f64, hit: usize) {
        let step = shus_alpha_stepsize(gamma_alpha, alpha, self.sum_exp, self.renorm_count, self.ln_threshold);
        self.apply(hit, step);
    }

    /// `τ(hit) += γ θ(hit)^a`, as the factor `1 + γ θ(hit)^{a-1} / S_n`.
    /// With `a = 1` this performs exactly the same floating-point
    /// operations as [`LogOccupation::shus_update`].
    #[inline]
    pub fn partial_bias_update(&mut self, gamma: f64, a: f64, hit: usize) {
        let bias_factor = ((a - 1.0) * self.ln_theta_at(hit)).exp();
        let step = self.shus_stepsize(gamma) * bias_factor;
        self.apply(hit, step);
    }

    #[inline]
    fn apply(&mut self, hit: usize, step: f64) {
        self.nu[hit] += step.ln_1p();
        self.weights[hit] = self.nu[hit].exp();
        self.sum_exp = self.weights.iter().sum();
        self.renormalize();
        self.updates += 1;
        self.last_stepsize = step;
    }

    fn renormalize(&mut self) {
        if self.sum_exp < self.threshold {
            return;
        }
        while self.sum_exp >= self.threshold {
            for v in &mut self.nu {
                *v -= self.ln_threshold;
            }
            self.renorm_count += 1;
            self.sum_exp = self.nu.iter().map(|v| v.exp()).sum();
        }
        for (w, v) in self.weights.iter_mut().zip(&self.nu) {
            *w = v.exp();
        }
        self.sum_exp = self.weights.iter().sum();
    }
}

/// Linear Wang-Landau update `θ'(i) = θ(i) + s θ(i) (1{i = hit} - θ(hit))`.
pub fn wl_linear_update(theta: &[f64], hit: usize, stepsize: f64) -> Result<Vec<f64>> {
    let t_hit = theta[hit];
    let next: Vec<f64> = theta
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let indicator = if i == hit { 1.0 } else { 0.0 };
            t + stepsize * t * (indicator - t_hit)
        })
        .collect();
    if let Some((i, &v)) = next.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::NonPositiveWeight { stratum: i, value: v });
    }
    Ok(next)
}

/// Stochastic-approximation split of one multiplicative update:
/// `θ_{n+1} = θ_n + s H + s Λ` with
/// `H_i = θ(i)(1{i = hit} - θ(hit))` and
/// `Λ_i = s θ(i) θ(hit) (θ(hit) - 1{i = hit}) / (1 + s θ(hit))`.
pub fn sa_residual(theta: &[f64], hit: usize, stepsize: f64) -> (Vec<f64>, Vec<f64>) {
    let t_hit = theta[hit];
    let denom = 1.0 + stepsize * t_hit;
    theta
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let indicator = if i == hit { 1.0 } else { 0.0 };
            let h = t * (indicator - t_hit);
            let lambda = stepsize * t * t_hit * (t_hit - indicator) / denom;
            (h, lambda)
        })
        .unzip()
}

/// Normalized weights after the multiplicative update,
/// `θ(i) (1 + s 1{i = hit}) / (1 + s θ(hit))`.
pub fn multiplicative_theta_update(theta: &[f64], hit: usize, stepsize: f64) -> Vec<f64> {
    let denom = 1.0 + stepsize * theta[hit];
    theta
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            if i == hit {
                t * (1.0 + stepsize) / denom
            } else {
                t / denom
            }
        })
        .collect()
}

/// `ln θ` from arbitrary positive factors.
pub fn ln_normalize(tau: &[f64]) -> Vec<f64> {
    let logs: Vec<f64> = tau.iter().map(|t| t.ln()).collect();
    let z = log_sum_exp(&logs);
    logs.iter().map(|l| l - z).collect()
}
