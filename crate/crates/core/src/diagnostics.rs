//! Estimators over replicated runs: first exit times out of the left well,
//! scaling-law fits, replica statistics of the log-weights, stepsize
//! traces and pre-exit stratum histograms.
//!
//! Replicas are independent and run through rayon; results are always
//! gathered in replica-index order, so every estimate is independent of
//! the number of workers.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adapt::{shus_alpha_stepsize_limit, UpdateScheme, DEFAULT_RENORM_THRESHOLD};
use crate::kernel::ProposalConfig;
use crate::model::{Point, TargetModel, DEFAULT_HALF_WIDTH};
use crate::rng::{replica_rng, ChainRng};
use crate::sampler::{AdaptiveSampler, DEFAULT_START};
use crate::{Error, Result};

/// Default iteration cap for exit-time runs.
pub const DEFAULT_EXIT_CAP: u64 = 1_000_000_000;

/// Default fraction of the peak count for a stratum to count as visited.
pub const DEFAULT_VISIT_FRACTION: f64 = 0.05;

/// Everything needed to build one replica chain except β and its stream.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub strata: usize,
    pub half_width: f64,
    pub sigma: f64,
    pub scheme: UpdateScheme,
    pub renorm_threshold: f64,
    pub start: Point,
}

impl RunConfig {
    /// Defaults: `R = 1.2`, `σ = 2R/d`, start `(-1, 0)`, `M = 10^10`.
    pub fn new(strata: usize, scheme: UpdateScheme) -> Self {
        Self {
            strata,
            half_width: DEFAULT_HALF_WIDTH,
            sigma: 2.0 * DEFAULT_HALF_WIDTH / strata as f64,
            scheme,
            renorm_threshold: DEFAULT_RENORM_THRESHOLD,
            start: DEFAULT_START,
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn sampler(&self, beta: f64, rng: ChainRng) -> Result<AdaptiveSampler> {
        let model = TargetModel::new(beta, self.half_width, self.strata)?;
        AdaptiveSampler::builder(model, ProposalConfig::new(self.sigma)?, self.scheme)
            .start(self.start)
            .threshold(self.renorm_threshold)
            .rng(rng)
            .build()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExitOutcome {
    /// First index `N ≥ 1` with `X_{N,1}` above the exit level.
    Exited(u64),
    /// The cap was reached first.
    Censored,
}

impl ExitOutcome {
    pub fn iterations(&self) -> Option<u64> {
        match self {
            ExitOutcome::Exited(n) => Some(*n),
            ExitOutcome::Censored => None,
        }
    }
}

/// Runs `sampler` until `x1 > exit_level`. The initial state is never
/// inspected: the earliest possible exit is index 1.
pub fn first_exit_time(sampler: &mut AdaptiveSampler, cap: u64, exit_level: f64) -> ExitOutcome {
    match sampler.run_until(cap, |rec| rec.position.x1 > exit_level) {
        Some(rec) => ExitOutcome::Exited(rec.n),
        None => ExitOutcome::Censored,
    }
}

/// Exit time together with per-stratum counts of `X_0, …, X_{N-1}`.
pub fn first_exit_histogram(sampler: &mut AdaptiveSampler, cap: u64, exit_level: f64) -> (ExitOutcome, Vec<u64>) {
    let mut counts = vec![0u64; sampler.model().strata()];
    counts[sampler.chain().stratum()] += 1;
    let outcome = match sampler.run_until(cap, |rec| {
        if rec.position.x1 > exit_level {
            true
        } else {
            counts[rec.stratum] += 1;
            false
        }
    }) {
        Some(rec) => ExitOutcome::Exited(rec.n),
        None => ExitOutcome::Censored,
    };
    (outcome, counts)
}

/// Mean first exit time at one β over `K` replicas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitTimeEstimate {
    pub beta: f64,
    pub outcomes: Vec<ExitOutcome>,
    pub replicas: usize,
    pub censored: usize,
    /// Mean over uncensored replicas; NaN when all were censored.
    pub mean: f64,
    pub std_error: f64,
}

impl ExitTimeEstimate {
    pub fn from_outcomes(beta: f64, outcomes: Vec<ExitOutcome>) -> Self {
        let exits: Vec<f64> = outcomes
            .iter()
            .filter_map(|o| o.iterations())
            .map(|n| n as f64)
            .collect();
        let k = exits.len();
        let mean = if k == 0 {
            f64::NAN
        } else {
            exits.iter().sum::<f64>() / k as f64
        };
        let std_error = if k < 2 {
            f64::NAN
        } else {
            let var = exits.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
            (var / k as f64).sqrt()
        };
        Self {
            beta,
            replicas: outcomes.len(),
            censored: outcomes.len() - k,
            outcomes,
            mean,
            std_error,
        }
    }

    pub fn all_censored(&self) -> bool {
        self.censored == self.replicas
    }

    pub fn relative_error(&self) -> f64 {
        self.std_error / self.mean
    }

    /// Rows `beta, replica, exit_iter, censored`; censored rows leave
    /// `exit_iter` empty.
    pub fn write_csv_rows<W: Write>(&self, out: &mut W) -> Result<()> {
        for (r, o) in self.outcomes.iter().enumerate() {
            match o {
                ExitOutcome::Exited(n) => writeln!(out, "{},{},{},false", self.beta, r, n)?,
                ExitOutcome::Censored => writeln!(out, "{},{},,true", self.beta, r)?,
            }
        }
        Ok(())
    }
}

pub const EXIT_CSV_HEADER: &str = "beta,replica,exit_iter,censored";

/// Runs `replicas` independent chains per β; replica `r` draws from stream
/// `r` of `seed`, the same stream at every β.
pub fn mean_exit_time(
    config: &RunConfig,
    betas: &[f64],
    replicas: usize,
    seed: u64,
    cap: u64,
    exit_level: f64,
) -> Result<Vec<ExitTimeEstimate>> {
    if replicas == 0 {
        return Err(Error::invalid("replicas", "need at least one replica"));
    }
    betas
        .iter()
        .map(|&beta| {
            let outcomes = (0..replicas as u64)
                .into_par_iter()
                .map(|r| {
                    let mut sampler = config.sampler(beta, replica_rng(seed, r))?;
                    Ok(first_exit_time(&mut sampler, cap, exit_level))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ExitTimeEstimate::from_outcomes(beta, outcomes))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Identity,
    Log,
}

impl Transform {
    fn apply(self, v: f64) -> f64 {
        match self {
            Transform::Identity => v,
            Transform::Log => v.ln(),
        }
    }
}

/// Least-squares line through transformed data, `g(y) = slope f(x) + intercept`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    /// `exp(intercept)`: `C` in `C e^{μβ}` or `C β^μ`.
    pub prefactor: f64,
    pub residual_norm: f64,
    pub abscissa: Transform,
    pub ordinate: Transform,
    pub points: usize,
}

impl FitResult {
    /// Decay exponent `a` of a fitted `C n^{-a}`.
    pub fn decay_exponent(&self) -> f64 {
        -self.slope
    }
}

pub const FIT_CSV_HEADER: &str = "param,slope,prefactor,residual";

fn fit_line(points: &[(f64, f64)], abscissa: Transform, ordinate: Transform, min_points: usize) -> Result<FitResult> {
    if points.len() < min_points {
        return Err(Error::DegenerateFit(format!(
            "need at least {min_points} points, got {}",
            points.len()
        )));
    }
    let mut xs = Vec::with_capacity(points.len());
    let mut ys = Vec::with_capacity(points.len());
    for &(x, y) in points {
        if (abscissa == Transform::Log && !(x > 0.0)) || (ordinate == Transform::Log && !(y > 0.0)) {
            return Err(Error::DegenerateFit(format!(
                "non-positive value in log fit: ({x}, {y})"
            )));
        }
        let (tx, ty) = (abscissa.apply(x), ordinate.apply(y));
        if !(tx.is_finite() && ty.is_finite()) {
            return Err(Error::DegenerateFit(format!("non-finite point ({x}, {y})")));
        }
        xs.push(tx);
        ys.push(ty);
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateFit("all abscissae coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual_norm = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(FitResult {
        slope,
        intercept,
        prefactor: intercept.exp(),
        residual_norm,
        abscissa,
        ordinate,
        points: points.len(),
    })
}

/// Fits `t = C exp(μ β)` by least squares on `(β, ln t)`.
pub fn fit_exponential_in_beta(series: &[(f64, f64)]) -> Result<FitResult> {
    fit_line(series, Transform::Identity, Transform::Log, 3)
}

/// Fits `t = C β^μ` by least squares on `(ln β, ln t)`.
pub fn fit_power_law(series: &[(f64, f64)]) -> Result<FitResult> {
    fit_line(series, Transform::Log, Transform::Log, 3)
}

/// Exponential fits of several series constrained to one common rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharedRateFit {
    /// Common `μ`.
    pub slope: f64,
    /// `C_g` per series.
    pub prefactors: Vec<f64>,
    pub residual_norm: f64,
}

/// Least squares for `ln t = μ β + ln C_g` with one `μ` shared by every
/// series `g`. Prefactor ratios are then read at equal rate, which is far
/// less sensitive to noise than ratios of independently fitted intercepts.
pub fn fit_shared_exponential(groups: &[Vec<(f64, f64)>]) -> Result<SharedRateFit> {
    if groups.is_empty() {
        return Err(Error::DegenerateFit("no series".into()));
    }
    let mut centered = Vec::with_capacity(groups.len());
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for g in groups {
        if g.len() < 2 {
            return Err(Error::DegenerateFit(format!("series with {} points", g.len())));
        }
        if let Some(&(b, t)) = g.iter().find(|(b, t)| !(t > &0.0 && t.is_finite() && b.is_finite())) {
            return Err(Error::DegenerateFit(format!("bad point ({b}, {t})")));
        }
        let n = g.len() as f64;
        let mx = g.iter().map(|p| p.0).sum::<f64>() / n;
        let my = g.iter().map(|p| p.1.ln()).sum::<f64>() / n;
        for &(b, t) in g {
            sxx += (b - mx).powi(2);
            sxy += (b - mx) * (t.ln() - my);
        }
        centered.push((mx, my));
    }
    if !(sxx > 0.0) {
        return Err(Error::DegenerateFit("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercepts: Vec<f64> = centered.iter().map(|(mx, my)| my - slope * mx).collect();
    let residual_norm = groups
        .iter()
        .zip(&intercepts)
        .flat_map(|(g, c)| g.iter().map(move |&(b, t)| (t.ln() - slope * b - c).powi(2)))
        .sum::<f64>()
        .sqrt();
    Ok(SharedRateFit {
        slope,
        prefactors: intercepts.iter().map(|c| c.exp()).collect(),
        residual_norm,
    })
}

/// `(β, mean exit time)` pairs usable for a fit. Cells with any censored
/// replica are left out; an all-censored cell is an error.
pub fn fit_series(estimates: &[ExitTimeEstimate]) -> Result<Vec<(f64, f64)>> {
    if let Some(e) = estimates.iter().find(|e| e.all_censored()) {
        return Err(Error::AllCensored { beta: e.beta });
    }
    Ok(estimates
        .iter()
        .filter(|e| e.censored == 0)
        .map(|e| (e.beta, e.mean))
        .collect())
}

/// Replica statistics of `ln θ_n` at one iteration index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightStatistics {
    pub n: u64,
    /// Empirical mean of `ln θ_n(i)` over replicas.
    pub mean: Vec<f64>,
    /// Unbiased empirical variance of `ln θ_n(i)` over replicas.
    pub variance: Vec<f64>,
    /// `sqrt(Σ_i (mean(i)/ln θ*(i) - 1)^2)`.
    pub bias: f64,
    /// `sqrt(Σ_i variance(i) / (K ln θ*(i)^2))`: the size of `bias` that
    /// replica noise alone produces when the estimator is unbiased.
    pub bias_noise: f64,
}

pub const STATS_CSV_HEADER: &str = "n,stratum,mean,variance,bias";

impl WeightStatistics {
    pub fn write_csv_rows<W: Write>(&self, out: &mut W) -> Result<()> {
        for (i, (m, v)) in self.mean.iter().zip(&self.variance).enumerate() {
            writeln!(out, "{},{},{:.12e},{:.12e},{:.12e}", self.n, i + 1, m, v, self.bias)?;
        }
        Ok(())
    }
}

/// Statistics of `K ≥ 2` replica samples `ln θ_n^k` at index `n`.
pub fn weight_statistics(n: u64, samples: &[Vec<f64>], ln_theta_star: &[f64]) -> Result<WeightStatistics> {
    let k = samples.len();
    if k < 2 {
        return Err(Error::invalid(
            "replicas",
            format!("variance needs at least 2 replicas, got {k}"),
        ));
    }
    let d = ln_theta_star.len();
    if let Some(i) = ln_theta_star.iter().position(|l| *l == 0.0 || !l.is_finite()) {
        return Err(Error::invalid(
            "ln_theta_star",
            format!("entry {i} is {} (must be finite and non-zero)", ln_theta_star[i]),
        ));
    }
    if let Some(s) = samples.iter().find(|s| s.len() != d) {
        return Err(Error::LengthMismatch {
            what: "replica sample vs strata",
            left: s.len(),
            right: d,
        });
    }
    let mut mean = vec![0.0; d];
    for s in samples {
        for (m, v) in mean.iter_mut().zip(s) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= k as f64;
    }
    let mut variance = vec![0.0; d];
    for s in samples {
        for ((acc, v), m) in variance.iter_mut().zip(s).zip(&mean) {
            *acc += (v - m).powi(2);
        }
    }
    for v in &mut variance {
        *v /= (k - 1) as f64;
    }
    let bias = mean
        .iter()
        .zip(ln_theta_star)
        .map(|(m, l)| (m / l - 1.0).powi(2))
        .sum::<f64>()
        .sqrt();
    let bias_noise = variance
        .iter()
        .zip(ln_theta_star)
        .map(|(v, l)| v / (k as f64 * l * l))
        .sum::<f64>()
        .sqrt();
    Ok(WeightStatistics {
        n,
        mean,
        variance,
        bias,
        bias_noise,
    })
}

/// Runs `replicas` chains and records `ln θ_n` at each checkpoint `n`
/// (strictly increasing). Returns one statistics entry per checkpoint.
pub fn weight_statistics_series(
    config: &RunConfig,
    beta: f64,
    replicas: usize,
    seed: u64,
    checkpoints: &[u64],
    ln_theta_star: &[f64],
) -> Result<Vec<WeightStatistics>> {
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("checkpoints", "must be strictly increasing"));
    }
    let per_replica: Vec<Vec<Vec<f64>>> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let mut sampler = config.sampler(beta, replica_rng(seed, r))?;
            let mut snapshots = Vec::with_capacity(checkpoints.len());
            for &n in checkpoints {
                sampler.run(n - sampler.n());
                snapshots.push(sampler.occupation().ln_theta());
            }
            Ok(snapshots)
        })
        .collect::<Result<_>>()?;

    checkpoints
        .iter()
        .enumerate()
        .map(|(c, &n)| {
            let samples: Vec<Vec<f64>> = per_replica.iter().map(|rep| rep[c].clone()).collect();
            weight_statistics(n, &samples, ln_theta_star)
        })
        .collect()
}

/// Fits `value ~ C n^{-a}` over checkpoints with `window.0 ≤ n ≤ window.1`.
pub fn fit_decay(series: &[(u64, f64)], window: (u64, u64)) -> Result<FitResult> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(n, _)| *n >= window.0 && *n <= window.1)
        .map(|&(n, v)| (n as f64, v))
        .collect();
    fit_power_law(&pts)
}

/// Fits `bias ~ C n^{-a}` over the checkpoints in `window` where the bias
/// is at least `min_snr` times its replica-noise level.
///
/// Past that point the computed bias measures the Monte Carlo error of the
/// replica mean, which decays like `n^{-α/2}` whatever the true bias does.
pub fn fit_bias_decay(stats: &[WeightStatistics], window: (u64, u64), min_snr: f64) -> Result<FitResult> {
    let pts: Vec<(f64, f64)> = stats
        .iter()
        .filter(|s| s.n >= window.0 && s.n <= window.1 && s.bias >= min_snr * s.bias_noise)
        .map(|s| (s.n as f64, s.bias))
        .collect();
    fit_power_law(&pts)
}

/// Roughly log-spaced checkpoints `first, …, last`, `per_decade` per decade.
pub fn log_checkpoints(first: u64, last: u64, per_decade: usize) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::new();
    let (lo, hi) = ((first.max(1) as f64).log10(), (last as f64).log10());
    let count = ((hi - lo) * per_decade as f64).ceil() as usize;
    for k in 0..=count {
        let n = 10f64.powf(lo + (hi - lo) * k as f64 / count.max(1) as f64).round() as u64;
        if out.last().is_none_or(|&l| n > l) {
            out.push(n);
        }
    }
    out
}

/// Normalization applied to a stepsize trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepsizeNormalization {
    /// `n γ_n`, tends to `d` for SHUS.
    Shus,
    /// `n^α γ_n / (γ(α)^{1-α} d^α (1-α)^α)`, tends to 1 for SHUS^α; equal
    /// to `(n/d)^α γ_n / γ` when `γ = 1`.
    ShusAlpha { gamma: f64, alpha: f64, strata: usize },
}

impl StepsizeNormalization {
    pub fn for_scheme(scheme: UpdateScheme, strata: usize) -> Self {
        match scheme {
            UpdateScheme::ShusAlpha { gamma, alpha } => StepsizeNormalization::ShusAlpha { gamma, alpha, strata },
            _ => StepsizeNormalization::Shus,
        }
    }

    pub fn apply(&self, n: u64, stepsize: f64) -> f64 {
        match *self {
            StepsizeNormalization::Shus => n as f64 * stepsize,
            StepsizeNormalization::ShusAlpha { gamma, alpha, strata } => {
                (n as f64).powf(alpha) * stepsize / shus_alpha_stepsize_limit(gamma, alpha, strata)
            }
        }
    }
}

/// Normalized stepsizes from `(n, γ_n)` pairs.
pub fn stepsize_trace(trace: &[(u64, f64)], normalization: StepsizeNormalization) -> Vec<(u64, f64)> {
    trace.iter().map(|&(n, g)| (n, normalization.apply(n, g))).collect()
}

/// Visit counts per stratum and the number `d_sv` of well-visited strata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumHistogram {
    pub counts: Vec<u64>,
    pub visited_strata: usize,
    pub fraction: f64,
}

/// Counts strata whose visit count is at least `fraction` of the largest.
pub fn stratum_histogram(counts: Vec<u64>, fraction: f64) -> StratumHistogram {
    let peak = counts.iter().copied().max().unwrap_or(0);
    let visited_strata = if peak == 0 {
        0
    } else {
        counts.iter().filter(|&&c| c as f64 >= fraction * peak as f64).count()
    };
    StratumHistogram {
        counts,
        visited_strata,
        fraction,
    }
}
