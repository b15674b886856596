//! Invariant checks run by `shus validate`.
//!
//! The checks that guard a specific piece of arithmetic take that piece as
//! a parameter, so a deliberately broken version (see [`mutants`]) can be
//! fed through the same check to confirm it is caught.

use rand::Rng;
use serde::Serialize;

use crate::adapt::{
    multiplicative_theta_update, sa_residual, shus_alpha_prefactor, shus_alpha_stepsize, LogOccupation, UpdateScheme,
};
use crate::kernel::{ChainState, ProposalConfig};
use crate::model::{reference_weights, TargetModel, DEFAULT_X2_BOUNDS};
use crate::oracle::{biased_stratum_masses, lyapunov, lyapunov_gradient, lyapunov_value, mean_field};
use crate::rng::chain_rng;
use crate::sampler::{AdaptiveSampler, DEFAULT_START};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    fn at_most(name: &str, measured: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name: name.into(),
            passed: measured <= tolerance,
            measured,
            tolerance,
            detail,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn new(checks: Vec<CheckResult>) -> Self {
        Self {
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }
}

/// Sizes of the validation runs.
#[derive(Debug, Clone, Copy)]
pub struct ValidationSizes {
    pub sa_trials: usize,
    pub bound_steps: u64,
    pub invariance_steps: u64,
    pub oracle_trials: usize,
    pub degeneration_steps: u64,
}

impl Default for ValidationSizes {
    fn default() -> Self {
        Self {
            sa_trials: 100_000,
            bound_steps: 1_000_000,
            invariance_steps: 100_000,
            oracle_trials: 10_000,
            degeneration_steps: 100_000,
        }
    }
}

fn random_theta(rng: &mut impl Rng, d: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..d).map(|_| 1e-3 + rng.random::<f64>()).collect();
    let z: f64 = raw.iter().sum();
    raw.iter().map(|r| r / z).collect()
}

/// Compares `update(θ, hit, s)` with `θ + sH + sΛ` on random triples.
pub fn check_sa_identity_with(
    update: impl Fn(&[f64], usize, f64) -> Vec<f64>,
    trials: usize,
    seed: u64,
) -> CheckResult {
    let mut rng = chain_rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let d = rng.random_range(2..=32);
        let theta = random_theta(&mut rng, d);
        let hit = rng.random_range(0..d);
        let s = rng.random::<f64>().max(f64::MIN_POSITIVE);
        let next = update(&theta, hit, s);
        let (h, lambda) = sa_residual(&theta, hit, s);
        for i in 0..d {
            let expected = theta[i] + s * h[i] + s * lambda[i];
            worst = worst.max((next[i] - expected).abs() / expected.abs());
        }
    }
    CheckResult::at_most(
        "sa_identity",
        worst,
        1e-12,
        format!("{trials} random (theta, hit, stepsize) triples, max relative error"),
    )
}

/// SHUS stepsizes stay within `γ₁/(1+nγ₁) ≤ γ_{n+1} ≤ γ₁/√(1+2nγ₁ min θ₀)`
/// along one run at β = 1, d = 12.
pub fn check_stepsize_bounds(steps: u64, seed: u64) -> Result<CheckResult> {
    let d = 12;
    let model = TargetModel::new(1.0, 1.2, d)?;
    let mut s = AdaptiveSampler::new(
        model,
        ProposalConfig::new(0.2)?,
        UpdateScheme::Shus { gamma: 1.0 },
        seed,
    )?;
    let gamma1 = s.occupation().current_stepsize();
    let min_theta0 = 1.0 / d as f64;
    // positive means inside the bounds; relative margin
    let mut worst = f64::INFINITY;
    let mut at = 0;
    for n in 0..steps {
        let g = s.step().stepsize;
        let nf = n as f64;
        let lower = gamma1 / (1.0 + nf * gamma1);
        let upper = gamma1 / (1.0 + 2.0 * nf * gamma1 * min_theta0).sqrt();
        let margin = ((g - lower) / lower).min((upper - g) / upper);
        if margin < worst {
            worst = margin;
            at = n + 1;
        }
    }
    Ok(CheckResult {
        name: "stepsize_bounds".into(),
        passed: worst >= -1e-12,
        measured: worst,
        tolerance: -1e-12,
        detail: format!("{steps} SHUS steps; smallest relative margin to a bound, at step {at}"),
    })
}

/// Runs the same SHUS^α chain (β = 10, α = 0.6, d = 12) with renormalization
/// thresholds 1e6 and 1e10 and compares `ln θ_n` at every step. `stepsize`
/// has the signature of [`shus_alpha_stepsize`].
pub fn check_m_invariance_with(
    stepsize: impl Fn(f64, f64, f64, u64, f64) -> f64,
    steps: u64,
    seed: u64,
) -> Result<CheckResult> {
    let (d, alpha, beta) = (12, 0.6, 10.0);
    let scheme = UpdateScheme::ShusAlpha { gamma: 1.0, alpha };
    let gamma_alpha = shus_alpha_prefactor(1.0, alpha);
    let model = TargetModel::new(beta, 1.2, d)?;
    let cfg = ProposalConfig::new(0.2)?;
    let mut chains = Vec::new();
    for threshold in [1e6, 1e10] {
        chains.push((
            ChainState::new(&model, DEFAULT_START, chain_rng(seed))?,
            LogOccupation::new(d, scheme, threshold)?,
        ));
    }
    let mut worst: f64 = 0.0;
    for _ in 0..steps {
        let mut ln_thetas = Vec::with_capacity(2);
        for (chain, occ) in chains.iter_mut() {
            let g = stepsize(
                gamma_alpha,
                alpha,
                occ.sum_exp(),
                occ.renorm_count(),
                occ.threshold().ln(),
            );
            let out = chain.mh_step(&model, occ.log_weights(), 1.0, &cfg);
            occ.wl_nonlinear_update(out.stratum, g)?;
            ln_thetas.push(occ.ln_theta());
        }
        for (a, b) in ln_thetas[0].iter().zip(&ln_thetas[1]) {
            worst = worst.max((a - b).abs() / b.abs());
        }
    }
    let renorms = chains[0].1.renorm_count();
    Ok(CheckResult::at_most(
        "m_invariance",
        worst,
        1e-9,
        format!("{steps} SHUS^alpha steps at beta = {beta}; M = 1e6 renormalized {renorms} times"),
    ))
}

/// Mean-field and Lyapunov properties at the β = 1, d = 12 reference
/// weights, and on random interior θ.
pub fn check_oracles(trials: usize, seed: u64) -> Result<Vec<CheckResult>> {
    let d = 12;
    let model = TargetModel::new(1.0, 1.2, d)?;
    let star = reference_weights(&model, 1001, DEFAULT_X2_BOUNDS, 1e-6)?.theta_star;
    let mut rng = chain_rng(seed);

    let h_star = mean_field(&star, &star).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let masses = biased_stratum_masses(&star, &star)
        .iter()
        .fold(0.0f64, |m, v| m.max((v - 1.0 / d as f64).abs()));

    let mut max_inner = f64::NEG_INFINITY;
    let mut grad_err: f64 = 0.0;
    for _ in 0..trials {
        let theta = random_theta(&mut rng, d);
        let ev = lyapunov(&theta, &star);
        max_inner = max_inner.max(ev.inner_product);
        let grad = lyapunov_gradient(&theta, &star);
        let i = rng.random_range(0..d);
        let eps = 1e-6 * theta[i];
        let (mut up, mut down) = (theta.clone(), theta.clone());
        up[i] += eps;
        down[i] -= eps;
        let fd = (lyapunov_value(&up, &star) - lyapunov_value(&down, &star)) / (2.0 * eps);
        grad_err = grad_err.max((fd - grad[i]).abs() / grad[i].abs());
    }
    Ok(vec![
        CheckResult::at_most("mean_field_root", h_star, 1e-15, "max |h(theta*)|".into()),
        CheckResult {
            name: "lyapunov_descent".into(),
            passed: max_inner < 0.0,
            measured: max_inner,
            tolerance: 0.0,
            detail: format!("max <grad V, h> over {trials} random interior theta"),
        },
        CheckResult::at_most(
            "lyapunov_gradient",
            grad_err,
            1e-6,
            "relative error of grad V against central differences".into(),
        ),
        CheckResult::at_most(
            "uniform_biased_masses",
            masses,
            1e-15,
            "max |pi_theta*(X_i) - 1/d|".into(),
        ),
    ])
}

/// With `a = 1` the partial-bias update must reproduce SHUS bit for bit.
pub fn check_partial_bias_degeneration(steps: u64, seed: u64) -> Result<CheckResult> {
    let d = 12;
    let mut rng = chain_rng(seed);
    let gamma = 1.0;
    let mut partial = LogOccupation::new(d, UpdateScheme::PartialBias { gamma, a: 1.0 }, 1e6)?;
    let mut plain = LogOccupation::new(d, UpdateScheme::Shus { gamma }, 1e6)?;
    let mut mismatches = 0u64;
    for _ in 0..steps {
        let hit = rng.random_range(0..d);
        partial.partial_bias_update(gamma, 1.0, hit);
        plain.shus_update(gamma, hit);
        let same = partial
            .log_weights()
            .iter()
            .zip(plain.log_weights())
            .all(|(a, b)| a.to_bits() == b.to_bits())
            && partial.renorm_count() == plain.renorm_count();
        if !same {
            mismatches += 1;
        }
    }
    Ok(CheckResult::at_most(
        "partial_bias_degeneration",
        mismatches as f64,
        0.0,
        format!("{steps} random updates, steps with any bit difference"),
    ))
}

/// Every check at the given sizes.
pub fn run_validation(sizes: ValidationSizes, seed: u64) -> Result<ValidationReport> {
    let mut checks = vec![
        check_sa_identity_with(multiplicative_theta_update, sizes.sa_trials, seed),
        check_stepsize_bounds(sizes.bound_steps, seed)?,
        check_m_invariance_with(shus_alpha_stepsize, sizes.invariance_steps, seed)?,
    ];
    checks.extend(check_oracles(sizes.oracle_trials, seed)?);
    checks.push(check_partial_bias_degeneration(sizes.degeneration_steps, seed)?);
    Ok(ValidationReport::new(checks))
}

/// Deliberately broken arithmetic for exercising the checks.
pub mod mutants {
    use crate::adapt::shus_alpha_stepsize;

    /// `τ(hit) += s` instead of `τ(hit) += s θ(hit)`, normalized.
    pub fn theta_factor_dropped(theta: &[f64], hit: usize, s: f64) -> Vec<f64> {
        theta
            .iter()
            .enumerate()
            .map(|(i, &t)| if i == hit { (t + s) / (1.0 + s) } else { t / (1.0 + s) })
            .collect()
    }

    /// SHUS^α stepsize that ignores the renormalization count.
    pub fn renorm_count_forgotten(gamma_alpha: f64, alpha: f64, sum_exp: f64, _count: u64, ln_threshold: f64) -> f64 {
        shus_alpha_stepsize(gamma_alpha, alpha, sum_exp, 0, ln_threshold)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sa_identity_catches_dropped_theta_factor() {
        assert!(check_sa_identity_with(multiplicative_theta_update, 2000, 1).passed);
        assert!(!check_sa_identity_with(mutants::theta_factor_dropped, 2000, 1).passed);
    }

    #[test]
    fn m_invariance_catches_forgotten_count() {
        let good = check_m_invariance_with(shus_alpha_stepsize, 20_000, 2).unwrap();
        assert!(good.passed, "{good:?}");
        let bad = check_m_invariance_with(mutants::renorm_count_forgotten, 20_000, 2).unwrap();
        assert!(!bad.passed, "{bad:?}");
    }

    #[test]
    fn quick_validation_passes() {
        let sizes = ValidationSizes {
            sa_trials: 1000,
            bound_steps: 20_000,
            invariance_steps: 5000,
            oracle_trials: 500,
            degeneration_steps: 5000,
        };
        let report = run_validation(sizes, 3).unwrap();
        assert!(report.passed, "{report:#?}");
    }
}
