//! A single SHUS chain on the two-well potential with fine strata.
//!
//! Prints a coarse trace of `x1`, the times of well changes and the
//! normalized stepsize `n γ_n`, which plateaus near the number of strata
//! explored so far and tends to `d` once the chain mixes.
//!
//! ```text
//! cargo run --release --example trajectory [steps]
//! ```

use shus::prelude::*;

fn main() -> shus::Result<()> {
    let steps: u64 = std::env::args()
        .nth(1)
        .map(|s| s.parse::<f64>().expect("steps") as u64)
        .unwrap_or(20_000_000);
    let (d, beta) = (48, 10.0);
    let model = TargetModel::new(beta, 1.2, d)?;
    let proposal = ProposalConfig::new(2.4 / d as f64)?;
    let mut sampler = AdaptiveSampler::new(model, proposal, UpdateScheme::Shus { gamma: 1.0 }, 2024)?;

    let mut side = -1.0f64;
    let mut switches = Vec::new();
    let report_every = steps / 20;
    println!("{:>12} {:>9} {:>10}", "n", "x1", "n*gamma_n");
    for _ in 0..steps {
        let rec = sampler.step();
        // a switch needs x1 past ±1, so crossings of the barrier are not double counted
        if rec.position.x1 * side < -1.0 {
            side = -side;
            switches.push(rec.n);
        }
        if rec.n % report_every == 0 {
            println!(
                "{:>12} {:>9.4} {:>10.3}",
                rec.n,
                rec.position.x1,
                rec.n as f64 * rec.stepsize
            );
        }
    }
    println!("well changes at {switches:?}");
    if switches.len() >= 2 {
        println!(
            "residence in the first well {} steps, in the second {} steps",
            switches[0],
            switches[1] - switches[0]
        );
    }
    Ok(())
}
