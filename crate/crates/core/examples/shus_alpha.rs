//! SHUS^α: stepsizes decaying like `n^{-α}` and exit times growing only
//! polynomially in β, `t_β ≈ C β^{1/(1-α)}`.
//!
//! ```text
//! cargo run --release --example shus_alpha [replicas]
//! ```

use shus::adapt::shus_alpha_stepsize_limit;
use shus::diagnostics::{fit_power_law, fit_series, mean_exit_time, RunConfig, DEFAULT_EXIT_CAP};
use shus::prelude::*;

fn main() -> shus::Result<()> {
    let replicas: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("replicas"))
        .unwrap_or(200);
    let (d, alpha) = (12, 0.6);
    let scheme = UpdateScheme::ShusAlpha { gamma: 1.0, alpha };

    let model = TargetModel::new(1.0, 1.2, d)?;
    let mut s = AdaptiveSampler::new(model, ProposalConfig::new(0.2)?, scheme, 3)?;
    let limit = shus_alpha_stepsize_limit(1.0, alpha, d);
    for n in [1_000u64, 10_000, 100_000, 1_000_000] {
        s.run(n - s.n());
        let g = s.occupation().last_stepsize();
        println!(
            "n = {n:>8}: n^alpha gamma_n / limit = {:.4}",
            (n as f64).powf(alpha) * g / limit
        );
    }

    let betas = [5.0, 7.0, 9.0, 11.0];
    let est = mean_exit_time(&RunConfig::new(d, scheme), &betas, replicas, 8, DEFAULT_EXIT_CAP, 1.0)?;
    for e in &est {
        println!("beta {:>4}: t = {:>9.1} ± {:.1}", e.beta, e.mean, e.std_error);
    }
    let fit = fit_power_law(&fit_series(&est)?)?;
    println!(
        "t_beta ≈ {:.2} beta^{:.3}  (1/(1-alpha) = {:.2})",
        fit.prefactor,
        fit.slope,
        1.0 / (1.0 - alpha)
    );
    Ok(())
}
