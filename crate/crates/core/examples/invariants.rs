//! The invariant suite behind `shus validate`, plus the mutants it is
//! designed to catch and a look at the stochastic-approximation oracle.
//!
//! ```text
//! cargo run --release --example invariants
//! ```

use shus::adapt::{multiplicative_theta_update, shus_alpha_stepsize};
use shus::oracle::{lyapunov, mean_field, unbiasing_average};
use shus::prelude::*;
use shus::runner::validate::{
    check_m_invariance_with, check_sa_identity_with, mutants, run_validation, ValidationSizes,
};

fn main() -> shus::Result<()> {
    let report = run_validation(ValidationSizes::default(), 0)?;
    for c in &report.checks {
        println!(
            "{:<5} {:<26} {:.3e} (tol {:.0e})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.tolerance
        );
    }

    let good = check_sa_identity_with(multiplicative_theta_update, 10_000, 1);
    let bad = check_sa_identity_with(mutants::theta_factor_dropped, 10_000, 1);
    println!(
        "sa identity: correct update {:.1e}, theta factor dropped {:.1e}",
        good.measured, bad.measured
    );
    let good = check_m_invariance_with(shus_alpha_stepsize, 50_000, 1)?;
    let bad = check_m_invariance_with(mutants::renorm_count_forgotten, 50_000, 1)?;
    println!(
        "M invariance: correct stepsize {:.1e}, count forgotten {:.1e}",
        good.measured, bad.measured
    );

    // mean field pulls θ toward θ*
    let star = [0.5, 0.3, 0.2];
    let theta = [0.2, 0.3, 0.5];
    let ev = lyapunov(&theta, &star);
    println!(
        "h(theta) = {:?}, V = {:.4}, <grad V, h> = {:.4}",
        mean_field(&theta, &star),
        ev.value,
        ev.inner_product
    );

    // reweighted averages from a short SHUS run recover the target mass of stratum 1
    let model = TargetModel::new(1.0, 1.2, 4)?;
    let mut s = AdaptiveSampler::new(
        model.clone(),
        ProposalConfig::new(0.6)?,
        UpdateScheme::Shus { gamma: 1.0 },
        9,
    )?;
    let (mut xs, mut thetas) = (Vec::new(), Vec::new());
    for _ in 0..200_000 {
        thetas.push(s.occupation().theta());
        xs.push(s.step().position);
    }
    let mass = unbiasing_average(&model, &xs, &thetas, |p| if p.x1 < -0.6 { 1.0 } else { 0.0 })?;
    println!(
        "reweighted mass of stratum 1: {mass:.4}, learned theta_1: {:.4}",
        s.occupation().theta()[0]
    );
    Ok(())
}
