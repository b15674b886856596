//! Closed-form objects of the stochastic-approximation analysis, used as
//! independent checks on the samplers.
//!
//! Nothing here simulates: the mean field, the Lyapunov function and the
//! stratum masses of `π_θ` are evaluated from their closed forms given θ*.

use crate::model::{Point, Potential, TargetModel};
use crate::{Error, Result};

/// `h(θ) = (θ* - θ) / Σ_i θ*(i)/θ(i)`, the stationary mean of the update
/// direction under `π_θ`. Vanishes exactly at θ*.
pub fn mean_field(theta: &[f64], theta_star: &[f64]) -> Vec<f64> {
    let z = ratio_sum(theta, theta_star);
    theta_star.iter().zip(theta).map(|(s, t)| (s - t) / z).collect()
}

fn ratio_sum(theta: &[f64], theta_star: &[f64]) -> f64 {
    theta_star.iter().zip(theta).map(|(s, t)| s / t).sum()
}

/// `V(θ) = -Σ θ*(i) ln(θ(i)/θ*(i))`.
pub fn lyapunov_value(theta: &[f64], theta_star: &[f64]) -> f64 {
    -theta_star.iter().zip(theta).map(|(s, t)| s * (t / s).ln()).sum::<f64>()
}

/// `∂V/∂θ(i) = -θ*(i)/θ(i)`.
pub fn lyapunov_gradient(theta: &[f64], theta_star: &[f64]) -> Vec<f64> {
    theta_star.iter().zip(theta).map(|(s, t)| -s / t).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanFieldEvaluation {
    pub mean_field: Vec<f64>,
    pub value: f64,
    /// `<∇V(θ), h(θ)>`, non-positive and zero only at θ*.
    pub inner_product: f64,
}

pub fn lyapunov(theta: &[f64], theta_star: &[f64]) -> MeanFieldEvaluation {
    let h = mean_field(theta, theta_star);
    let grad = lyapunov_gradient(theta, theta_star);
    MeanFieldEvaluation {
        inner_product: grad.iter().zip(&h).map(|(g, v)| g * v).sum(),
        value: lyapunov_value(theta, theta_star),
        mean_field: h,
    }
}

/// Stratum masses of `π_θ`: `(θ*(i)/θ(i)) / Σ_j θ*(j)/θ(j)`.
pub fn biased_stratum_masses(theta: &[f64], theta_star: &[f64]) -> Vec<f64> {
    let z = ratio_sum(theta, theta_star);
    theta_star.iter().zip(theta).map(|(s, t)| s / t / z).collect()
}

/// Stratum masses of the partially biased `π_{θ,a}`:
/// `(θ*(i)/θ(i)^a) / Σ_j θ*(j)/θ(j)^a`.
pub fn partially_biased_stratum_masses(theta: &[f64], theta_star: &[f64], a: f64) -> Vec<f64> {
    let raw: Vec<f64> = theta_star.iter().zip(theta).map(|(s, t)| s / t.powf(a)).collect();
    let z: f64 = raw.iter().sum();
    raw.iter().map(|r| r / z).collect()
}

/// Streaming form of the reweighted ergodic average
/// `(d/n) Σ_k θ_{k-1}(I(X_k)) f(X_k)`, which converges to `∫ f π`.
#[derive(Debug, Clone, Default)]
pub struct UnbiasedAverage {
    strata: usize,
    total: f64,
    count: u64,
}

impl UnbiasedAverage {
    pub fn new(strata: usize) -> Self {
        Self {
            strata,
            total: 0.0,
            count: 0,
        }
    }

    /// Adds `X_k` with `θ_{k-1}(I(X_k))` and `f(X_k)`.
    #[inline]
    pub fn push(&mut self, theta_prev_at_stratum: f64, value: f64) {
        self.total += theta_prev_at_stratum * value;
        self.count += 1;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn value(&self) -> f64 {
        self.strata as f64 * self.total / self.count as f64
    }
}

/// Reweighted average over a stored trajectory. `trajectory[k]` is
/// `X_{k+1}` and `thetas[k]` is `θ_k`, the weights in force when it was
/// drawn.
pub fn unbiasing_average<P: Potential>(
    model: &TargetModel<P>,
    trajectory: &[Point],
    thetas: &[Vec<f64>],
    f: impl Fn(Point) -> f64,
) -> Result<f64> {
    if trajectory.len() != thetas.len() {
        return Err(Error::LengthMismatch {
            what: "trajectory vs weight sequence",
            left: trajectory.len(),
            right: thetas.len(),
        });
    }
    if trajectory.is_empty() {
        return Err(Error::invalid("trajectory", "empty"));
    }
    let mut avg = UnbiasedAverage::new(model.strata());
    for (x, theta) in trajectory.iter().zip(thetas) {
        let i = model.stratum_index(x.x1)?;
        avg.push(theta[i], f(*x));
    }
    Ok(avg.value())
}
