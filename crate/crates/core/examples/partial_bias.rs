//! Partially biased sampling: only the fraction `a` of the learned bias is
//! applied, `π_{θ,a} ∝ π / θ(I)^a`.
//!
//! The weights still converge to θ*, while the chain occupies the strata
//! in proportion to `θ*(i)^{1-a}` instead of uniformly. With `a = 1` the
//! scheme is plain SHUS.
//!
//! ```text
//! cargo run --release --example partial_bias
//! ```

use shus::model::{reference_weights, DEFAULT_X2_BOUNDS};
use shus::oracle::partially_biased_stratum_masses;
use shus::prelude::*;

fn main() -> shus::Result<()> {
    let (d, beta, steps) = (6, 3.0, 5_000_000u64);
    let model = TargetModel::new(beta, 1.2, d)?;
    let star = reference_weights(&model, 1001, DEFAULT_X2_BOUNDS, 1e-6)?;

    for a in [0.25, 0.5, 1.0] {
        let scheme = UpdateScheme::PartialBias { gamma: 1.0, a };
        let mut s = AdaptiveSampler::new(model.clone(), ProposalConfig::new(0.4)?, scheme, 11)?;
        let mut visits = vec![0u64; d];
        for _ in 0..steps {
            visits[s.step().stratum] += 1;
        }
        let err = s
            .occupation()
            .ln_theta()
            .iter()
            .zip(&star.ln_theta_star)
            .map(|(l, r)| (l - r).abs())
            .fold(0.0, f64::max);
        let expected = partially_biased_stratum_masses(&star.theta_star, &star.theta_star, a);
        println!("a = {a}: max |ln theta - ln theta*| = {err:.3}");
        for i in 0..d {
            println!(
                "   stratum {}: occupation {:.4}, limit {:.4}",
                i + 1,
                visits[i] as f64 / steps as f64,
                expected[i]
            );
        }
    }
    Ok(())
}
