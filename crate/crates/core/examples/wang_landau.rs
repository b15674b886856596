//! SHUS against Wang-Landau with deterministic stepsizes `γ*/n`.
//!
//! SHUS behaves like Wang-Landau with `γ*` close to the number of strata
//! visited before the first exit, so its exit times fall between two
//! Wang-Landau curves. The linear Wang-Landau variant is run as well.
//!
//! ```text
//! cargo run --release --example wang_landau [replicas]
//! ```

use shus::diagnostics::{fit_exponential_in_beta, fit_series, mean_exit_time, RunConfig, DEFAULT_EXIT_CAP};
use shus::prelude::*;

fn main() -> shus::Result<()> {
    let replicas: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("replicas"))
        .unwrap_or(200);
    let betas = [4.0, 5.0, 6.0, 7.0];
    let schemes = [
        ("SHUS gamma=1", UpdateScheme::Shus { gamma: 1.0 }),
        (
            "WL gamma*=2",
            UpdateScheme::WangLandau {
                gamma_star: 2.0,
                alpha: 1.0,
                linear: false,
            },
        ),
        (
            "WL gamma*=3",
            UpdateScheme::WangLandau {
                gamma_star: 3.0,
                alpha: 1.0,
                linear: false,
            },
        ),
        (
            "WL linear gamma*=0.9",
            UpdateScheme::WangLandau {
                gamma_star: 0.9,
                alpha: 1.0,
                linear: true,
            },
        ),
    ];
    for (name, scheme) in schemes {
        let est = mean_exit_time(&RunConfig::new(12, scheme), &betas, replicas, 5, DEFAULT_EXIT_CAP, 1.0)?;
        let fit = fit_exponential_in_beta(&fit_series(&est)?)?;
        let means: Vec<String> = est.iter().map(|e| format!("{:.0}", e.mean)).collect();
        println!("{name:<22} t = [{}]  mu = {:.3}", means.join(", "), fit.slope);
    }
    Ok(())
}
