//! Benchmark target density, stratification along `x1`, and quadrature
//! reference weights.
//!
//! The state space is the strip `[-R, R] x ℝ`. The target density is
//! `exp(-β U(x1, x2))` restricted to the strip and is never normalized:
//! every algorithm in this crate only uses density ratios.

use std::io::Write;

use crate::{Error, Result};

/// Default half-width `R` of the domain in `x1`.
pub const DEFAULT_HALF_WIDTH: f64 = 1.2;

/// Default `x2` truncation for quadrature.
pub const DEFAULT_X2_BOUNDS: (f64, f64) = (-3.0, 4.5);

/// Default number of quadrature nodes per axis.
pub const DEFAULT_GRID_RESOLUTION: usize = 2001;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x1: f64,
    pub x2: f64,
}

impl Point {
    pub const fn new(x1: f64, x2: f64) -> Self {
        Self { x1, x2 }
    }
}

impl From<(f64, f64)> for Point {
    fn from((x1, x2): (f64, f64)) -> Self {
        Self { x1, x2 }
    }
}

/// Energy surface `U(x1, x2)`.
pub trait Potential: Send + Sync {
    fn energy(&self, x1: f64, x2: f64) -> f64;
}

/// Two wells at `(±1.05, -0.04)` separated by a saddle at `(0, -0.3)` and
/// an upper channel through `(±0.6, 1.15)`, with quartic confinement.
///
/// The formula is exactly symmetric under `x1 -> -x1`; the two wells are
/// summed before scaling so that the mirror symmetry survives rounding.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TwoWellPotential;

impl Potential for TwoWellPotential {
    #[inline]
    fn energy(&self, x1: f64, x2: f64) -> f64 {
        const THIRD: f64 = 1.0 / 3.0;
        const FIVE_THIRDS: f64 = 5.0 / 3.0;
        let x1s = x1 * x1;
        let dy_low = x2 - THIRD;
        let dy_high = x2 - FIVE_THIRDS;
        let x2s = x2 * x2;
        let right = x1 - 1.0;
        let left = x1 + 1.0;

        let bump = 3.0 * (-x1s - dy_low * dy_low).exp();
        let channel = 3.0 * (-x1s - dy_high * dy_high).exp();
        let wells = (-right * right - x2s).exp() + (-left * left - x2s).exp();
        let dy_low2 = dy_low * dy_low;
        bump - channel - 5.0 * wells + 0.2 * x1s * x1s + 0.2 * dy_low2 * dy_low2
    }
}

/// Benchmark potential, free function form.
#[inline]
pub fn potential_energy(x1: f64, x2: f64) -> f64 {
    TwoWellPotential.energy(x1, x2)
}

/// Stratified target `π(x) ∝ 1_{|x1| ≤ R} exp(-β U(x))`.
#[derive(Debug, Clone)]
pub struct TargetModel<P = TwoWellPotential> {
    potential: P,
    beta: f64,
    half_width: f64,
    strata: usize,
}

impl TargetModel<TwoWellPotential> {
    pub fn new(beta: f64, half_width: f64, strata: usize) -> Result<Self> {
        Self::with_potential(TwoWellPotential, beta, half_width, strata)
    }
}

impl<P: Potential> TargetModel<P> {
    pub fn with_potential(potential: P, beta: f64, half_width: f64, strata: usize) -> Result<Self> {
        // beta == 0 is the flat target, only used by oracles.
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::invalid(
                "beta",
                format!("must be finite and non-negative, got {beta}"),
            ));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::invalid(
                "half_width",
                format!("must be positive, got {half_width}"),
            ));
        }
        if strata < 1 {
            return Err(Error::invalid("strata", "need at least one stratum"));
        }
        Ok(Self {
            potential,
            beta,
            half_width,
            strata,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn strata(&self) -> usize {
        self.strata
    }

    pub fn potential(&self) -> &P {
        &self.potential
    }

    /// Same potential and partition at another inverse temperature.
    pub fn with_beta(&self, beta: f64) -> Result<Self>
    where
        P: Clone,
    {
        Self::with_potential(self.potential.clone(), beta, self.half_width, self.strata)
    }

    #[inline]
    pub fn energy(&self, p: Point) -> f64 {
        self.potential.energy(p.x1, p.x2)
    }

    #[inline]
    pub fn contains(&self, x1: f64) -> bool {
        x1.abs() <= self.half_width
    }

    /// `-β U(x)` inside the strip, `-∞` outside. Defined up to `-ln Z`.
    #[inline]
    pub fn log_density(&self, p: Point) -> f64 {
        if self.contains(p.x1) {
            -self.beta * self.energy(p)
        } else {
            f64::NEG_INFINITY
        }
    }

    /// Zero-based stratum index of `x1`. The right edge `x1 = R` belongs to
    /// the last stratum.
    pub fn stratum_index(&self, x1: f64) -> Result<usize> {
        if !self.contains(x1) {
            return Err(Error::OutOfDomain {
                x1,
                half_width: self.half_width,
            });
        }
        Ok(self.stratum_of(x1))
    }

    /// Stratum lookup without the domain check.
    #[inline]
    pub(crate) fn stratum_of(&self, x1: f64) -> usize {
        let r = self.half_width;
        let raw = ((x1 + r) / (2.0 * r) * self.strata as f64).floor();
        if raw <= 0.0 {
            0
        } else {
            (raw as usize).min(self.strata - 1)
        }
    }

    /// Left and right `x1` boundaries of the zero-based stratum `index`.
    pub fn stratum_bounds(&self, index: usize) -> (f64, f64) {
        let r = self.half_width;
        let width = 2.0 * r / self.strata as f64;
        let lo = -r + index as f64 * width;
        let hi = if index + 1 == self.strata {
            r
        } else {
            -r + (index + 1) as f64 * width
        };
        (lo, hi)
    }

    /// The canonical proposal scale: one stratum width.
    pub fn stratum_width(&self) -> f64 {
        2.0 * self.half_width / self.strata as f64
    }
}

/// Normalized stratum masses θ* of the target, from tensor-product Simpson
/// quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceWeights {
    pub theta_star: Vec<f64>,
    pub ln_theta_star: Vec<f64>,
    pub grid_resolution: usize,
    pub x2_bounds: (f64, f64),
    /// Largest per-stratum relative error estimate (Richardson).
    pub error_estimate: f64,
}

impl ReferenceWeights {
    pub fn len(&self) -> usize {
        self.theta_star.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta_star.is_empty()
    }

    /// Writes `stratum_index, theta_star, ln_theta_star` rows. Strata are
    /// numbered from 1 in files.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "stratum_index,theta_star,ln_theta_star")?;
        for (i, (t, l)) in self.theta_star.iter().zip(&self.ln_theta_star).enumerate() {
            writeln!(out, "{},{:.17e},{:.17e}", i + 1, t, l)?;
        }
        Ok(())
    }
}

/// Simpson weights for `intervals` (even) sub-intervals.
fn simpson_weight(k: usize, intervals: usize) -> f64 {
    if k == 0 || k == intervals {
        1.0
    } else if k % 2 == 1 {
        4.0
    } else {
        2.0
    }
}

fn round_up_even(n: usize) -> usize {
    let n = n.max(2);
    n + n % 2
}

/// Natural log of `∫_{stratum} exp(-βU - shift)` for every stratum.
fn log_stratum_integrals<P: Potential>(
    model: &TargetModel<P>,
    resolution: usize,
    (lo2, hi2): (f64, f64),
    shift: f64,
) -> Vec<f64> {
    let d = model.strata();
    let n1 = round_up_even((resolution - 1).div_ceil(d));
    let n2 = round_up_even(resolution - 1);
    let h2 = (hi2 - lo2) / n2 as f64;
    let beta = model.beta();

    (0..d)
        .map(|s| {
            let (a, b) = model.stratum_bounds(s);
            let h1 = (b - a) / n1 as f64;
            let mut total = 0.0;
            for k in 0..=n1 {
                let x1 = if k == n1 { b } else { a + k as f64 * h1 };
                let mut column = 0.0;
                for j in 0..=n2 {
                    let x2 = if j == n2 { hi2 } else { lo2 + j as f64 * h2 };
                    let u = model.potential().energy(x1, x2);
                    column += simpson_weight(j, n2) * (-beta * u - shift).exp();
                }
                total += simpson_weight(k, n1) * column;
            }
            (total * h1 * h2 / 9.0).ln()
        })
        .collect()
}

/// Per-stratum quadrature of `exp(-βU)`, normalized to sum to one.
///
/// Each stratum is integrated on its own Simpson grid with roughly
/// `grid_resolution / d` nodes in `x1` and `grid_resolution` nodes in `x2`,
/// then again with the step halved. The halved-step values are returned;
/// the relative difference between the two (divided by 15, the Simpson
/// Richardson factor) is the error estimate, which must stay below
/// `tolerance` in every stratum.
pub fn reference_weights<P: Potential>(
    model: &TargetModel<P>,
    grid_resolution: usize,
    x2_bounds: (f64, f64),
    tolerance: f64,
) -> Result<ReferenceWeights> {
    if grid_resolution < 3 {
        return Err(Error::invalid("grid_resolution", "need at least 3 nodes"));
    }
    if !(x2_bounds.0 < x2_bounds.1) {
        return Err(Error::invalid("x2_bounds", "lower bound must be below upper bound"));
    }

    // Coarse scan for the largest log-density, so the exponentials stay in range.
    let coarse = 201;
    let (lo2, hi2) = x2_bounds;
    let r = model.half_width();
    let mut shift = f64::NEG_INFINITY;
    for k in 0..coarse {
        let x1 = -r + 2.0 * r * k as f64 / (coarse - 1) as f64;
        for j in 0..coarse {
            let x2 = lo2 + (hi2 - lo2) * j as f64 / (coarse - 1) as f64;
            shift = shift.max(-model.beta() * model.potential().energy(x1, x2));
        }
    }

    let coarse_logs = log_stratum_integrals(model, grid_resolution, x2_bounds, shift);
    let fine_logs = log_stratum_integrals(model, 2 * grid_resolution - 1, x2_bounds, shift);

    let mut error_estimate: f64 = 0.0;
    for (s, (c, f)) in coarse_logs.iter().zip(&fine_logs).enumerate() {
        let rel = (c - f).exp_m1().abs() / 15.0;
        if !(rel <= tolerance) {
            return Err(Error::QuadratureTolerance {
                stratum: s,
                estimate: rel,
                tolerance,
            });
        }
        error_estimate = error_estimate.max(rel);
    }

    let ln_norm = log_sum_exp(&fine_logs);
    let ln_theta_star: Vec<f64> = fine_logs.iter().map(|l| l - ln_norm).collect();
    let theta_star = ln_theta_star.iter().map(|l| l.exp()).collect();
    Ok(ReferenceWeights {
        theta_star,
        ln_theta_star,
        grid_resolution,
        x2_bounds,
        error_estimate,
    })
}

/// `ln Σ exp(v_i)`, shifted by the maximum.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}
