//! Mean first exit time out of the left well as a function of β, and
//! the fitted law `t_β ≈ C e^{μβ}`.
//!
//! ```text
//! cargo run --release --example exit_times [replicas]
//! ```

use shus::diagnostics::{fit_exponential_in_beta, fit_series, mean_exit_time, RunConfig, DEFAULT_EXIT_CAP};
use shus::prelude::*;

fn main() -> shus::Result<()> {
    let replicas: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("replicas"))
        .unwrap_or(200);
    let betas = [4.0, 5.0, 6.0, 7.0];
    // σ = 2R/d
    let config = RunConfig::new(12, UpdateScheme::Shus { gamma: 1.0 });
    let estimates = mean_exit_time(&config, &betas, replicas, 1, DEFAULT_EXIT_CAP, 1.0)?;
    for e in &estimates {
        println!(
            "beta {:>4}: t = {:>10.1} ± {:>7.1}  ({} replicas, {} censored)",
            e.beta, e.mean, e.std_error, e.replicas, e.censored
        );
    }
    let fit = fit_exponential_in_beta(&fit_series(&estimates)?)?;
    println!("t_beta ≈ {:.2} exp({:.3} beta)", fit.prefactor, fit.slope);
    Ok(())
}
