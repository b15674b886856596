//! Replica variance and bias of `ln θ_n` for SHUS and SHUS^α, with their
//! decay exponents. Both decay like `n^{-α}` (`α = 1` for SHUS).
//!
//! ```text
//! cargo run --release --example weight_statistics [replicas]
//! ```

use shus::diagnostics::{fit_bias_decay, fit_decay, log_checkpoints, weight_statistics_series, RunConfig};
use shus::model::{reference_weights, DEFAULT_X2_BOUNDS};
use shus::prelude::*;

fn main() -> shus::Result<()> {
    let replicas: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("replicas"))
        .unwrap_or(200);
    let d = 12;
    let star = reference_weights(&TargetModel::new(1.0, 1.2, d)?, 2001, DEFAULT_X2_BOUNDS, 1e-6)?;
    let checkpoints = log_checkpoints(1_000, 300_000, 6);
    for scheme in [
        UpdateScheme::Shus { gamma: 1.0 },
        UpdateScheme::ShusAlpha { gamma: 1.0, alpha: 0.6 },
    ] {
        let stats = weight_statistics_series(
            &RunConfig::new(d, scheme),
            1.0,
            replicas,
            4,
            &checkpoints,
            &star.ln_theta_star,
        )?;
        println!("{}", scheme.name());
        for s in &stats {
            println!(
                "  n = {:>7}: var(ln theta_1) = {:.3e}, bias = {:.3e} (noise {:.1e})",
                s.n, s.variance[0], s.bias, s.bias_noise
            );
        }
        let var: Vec<(u64, f64)> = stats.iter().map(|s| (s.n, s.variance[0])).collect();
        let a_var = fit_decay(&var, (10_000, 300_000))?.decay_exponent();
        match fit_bias_decay(&stats, (1_000, 300_000), 3.0) {
            Ok(f) => println!("  decay exponents: variance {a_var:.3}, bias {:.3}", f.decay_exponent()),
            Err(_) => println!("  decay exponents: variance {a_var:.3}, bias below noise (more replicas needed)"),
        }
    }
    Ok(())
}
