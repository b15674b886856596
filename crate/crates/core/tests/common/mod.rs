//! Oracles written from the closed forms, independent of the library.

#![allow(dead_code)]

/// Two-well energy.
pub fn energy(x1: f64, x2: f64) -> f64 {
    3.0 * (-x1 * x1 - (x2 - 1.0 / 3.0).powi(2)).exp()
        - 3.0 * (-x1 * x1 - (x2 - 5.0 / 3.0).powi(2)).exp()
        - 5.0 * (-(x1 - 1.0).powi(2) - x2 * x2).exp()
        - 5.0 * (-(x1 + 1.0).powi(2) - x2 * x2).exp()
        + 0.2 * x1.powi(4)
        + 0.2 * (x2 - 1.0 / 3.0).powi(4)
}

/// Unnormalized stratum integrals of `exp(-βU - shift)` by the midpoint
/// rule, `per_stratum` columns per stratum and `nx2` rows over x2 ∈ [-4, 6].
pub fn midpoint_masses(beta: f64, d: usize, per_stratum: usize, nx2: usize, shift: f64) -> Vec<f64> {
    let r = 1.2;
    let (lo, hi) = (-4.0, 6.0);
    let dx1 = 2.0 * r / (d * per_stratum) as f64;
    let dx2 = (hi - lo) / nx2 as f64;
    (0..d)
        .map(|i| {
            let mut m = 0.0;
            for a in 0..per_stratum {
                let x1 = -r + ((i * per_stratum + a) as f64 + 0.5) * dx1;
                for b in 0..nx2 {
                    let x2 = lo + (b as f64 + 0.5) * dx2;
                    m += (-beta * energy(x1, x2) - shift).exp();
                }
            }
            m * dx1 * dx2
        })
        .collect()
}

/// Normalized θ* by the midpoint rule.
pub fn midpoint_theta_star(beta: f64, d: usize) -> Vec<f64> {
    // the wells sit near U = -3.9; shifting keeps β = 10 in range
    let mass = midpoint_masses(beta, d, (4800 / d).max(100), 4000, 4.0 * beta);
    let z: f64 = mass.iter().sum();
    mass.iter().map(|m| m / z).collect()
}

/// Mean and batch-means standard error of a correlated series.
pub fn batch_means(series: &[f64], batches: usize) -> (f64, f64) {
    let len = series.len() / batches;
    let means: Vec<f64> = series
        .chunks_exact(len)
        .map(|c| c.iter().sum::<f64>() / len as f64)
        .collect();
    let m = means.iter().sum::<f64>() / means.len() as f64;
    let var = means.iter().map(|b| (b - m).powi(2)).sum::<f64>() / (means.len() - 1) as f64;
    (m, (var / means.len() as f64).sqrt())
}
