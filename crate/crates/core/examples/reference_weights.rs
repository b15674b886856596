//! Quadrature reference weights θ* and the free-energy profile
//! `-ln θ*(i) / β` along `x1`.
//!
//! ```text
//! cargo run --release --example reference_weights [beta] [strata]
//! ```

use shus::model::{reference_weights, DEFAULT_GRID_RESOLUTION, DEFAULT_X2_BOUNDS};
use shus::prelude::*;

fn main() -> shus::Result<()> {
    let mut args = std::env::args().skip(1);
    let beta: f64 = args.next().map(|s| s.parse().expect("beta")).unwrap_or(10.0);
    let d: usize = args.next().map(|s| s.parse().expect("strata")).unwrap_or(24);
    let model = TargetModel::new(beta, 1.2, d)?;
    let r = reference_weights(&model, DEFAULT_GRID_RESOLUTION, DEFAULT_X2_BOUNDS, 1e-6)?;
    println!(
        "beta = {beta}, d = {d}, relative error estimate {:.1e}",
        r.error_estimate
    );
    let f_min = r.ln_theta_star.iter().map(|l| -l / beta).fold(f64::INFINITY, f64::min);
    for (i, (t, l)) in r.theta_star.iter().zip(&r.ln_theta_star).enumerate() {
        let (lo, hi) = model.stratum_bounds(i);
        let f = -l / beta - f_min;
        println!(
            "[{lo:+.2}, {hi:+.2})  theta* = {t:.4e}  F = {f:.3} {}",
            "#".repeat((f * 20.0) as usize)
        );
    }
    r.write_csv(std::io::stdout().lock())?;
    Ok(())
}
