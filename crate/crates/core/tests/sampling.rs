//! Long-run behavior of the kernel and of the adaptive chains.

mod common;

use shus::diagnostics::{
    first_exit_time, fit_exponential_in_beta, fit_series, mean_exit_time, ExitOutcome, RunConfig, DEFAULT_EXIT_CAP,
};
use shus::kernel::log_acceptance;
use shus::oracle::{biased_stratum_masses, partially_biased_stratum_masses, UnbiasedAverage};
use shus::prelude::*;
use shus::rng::chain_rng;
use shus::sampler::DEFAULT_START;

/// Runs a Metropolis chain with weights held fixed and returns the stratum
/// of every state after the first.
fn frozen_chain(
    beta: f64,
    d: usize,
    sigma: f64,
    ln_theta: &[f64],
    a: f64,
    steps: usize,
    seed: u64,
) -> Vec<(Point, usize)> {
    let model = TargetModel::new(beta, 1.2, d).unwrap();
    let cfg = ProposalConfig::new(sigma).unwrap();
    let mut chain = ChainState::new(&model, DEFAULT_START, chain_rng(seed)).unwrap();
    (0..steps)
        .map(|_| {
            let out = chain.mh_step(&model, ln_theta, a, &cfg);
            (chain.position(), out.stratum)
        })
        .collect()
}

fn ln_star(beta: f64, d: usize) -> Vec<f64> {
    common::midpoint_theta_star(beta, d).iter().map(|t| t.ln()).collect()
}

/// Checks each stratum frequency against `expected` within 3.5 batch-means
/// standard errors.
fn assert_occupation(visits: &[(Point, usize)], expected: &[f64]) {
    for (i, &p) in expected.iter().enumerate() {
        let indicator: Vec<f64> = visits.iter().map(|v| f64::from(u8::from(v.1 == i))).collect();
        let (freq, se) = common::batch_means(&indicator, 50);
        assert!(
            (freq - p).abs() < 3.5 * se,
            "stratum {i}: {freq:.5} vs {p:.5} (se {se:.1e})"
        );
    }
}

#[test]
fn frozen_at_reference_weights_strata_are_equally_occupied() {
    let d = 4;
    let visits = frozen_chain(1.0, d, 0.6, &ln_star(1.0, d), 1.0, 1_000_000, 1);
    assert_occupation(&visits, &[0.25; 4]);
}

#[test]
fn frozen_occupation_matches_biased_masses() {
    let d = 4;
    let star = common::midpoint_theta_star(1.0, d);
    let theta = [0.1, 0.2, 0.3, 0.4];
    let ln_theta: Vec<f64> = theta.iter().map(|t: &f64| t.ln()).collect();
    let visits = frozen_chain(1.0, d, 0.6, &ln_theta, 1.0, 1_000_000, 2);
    assert_occupation(&visits, &biased_stratum_masses(&theta, &star));

    let visits = frozen_chain(1.0, d, 0.6, &ln_theta, 0.5, 1_000_000, 3);
    assert_occupation(&visits, &partially_biased_stratum_masses(&theta, &star, 0.5));
}

#[test]
#[allow(clippy::needless_range_loop)]
fn stratum_fluxes_balance() {
    // a reversible chain crosses every pair of strata equally often both ways
    let d = 6;
    let theta = [0.3, 0.1, 0.1, 0.2, 0.2, 0.1];
    let ln_theta: Vec<f64> = theta.iter().map(|t: &f64| t.ln()).collect();
    let visits = frozen_chain(1.0, d, 0.5, &ln_theta, 1.0, 2_000_000, 4);
    let mut flux = vec![vec![0u64; d]; d];
    let mut prev = TargetModel::new(1.0, 1.2, d)
        .unwrap()
        .stratum_index(DEFAULT_START.x1)
        .unwrap();
    for &(_, s) in &visits {
        flux[prev][s] += 1;
        prev = s;
    }
    for i in 0..d {
        for j in i + 1..d {
            let (a, b) = (flux[i][j] as f64, flux[j][i] as f64);
            if a + b < 100.0 {
                continue;
            }
            assert!(
                (a - b).abs() <= 4.0 * (a + b).sqrt() + 1.0,
                "{i}->{j}: {a}, {j}->{i}: {b}"
            );
        }
    }
}

#[test]
fn chain_stays_in_the_domain() {
    let mut s = AdaptiveSampler::new(
        TargetModel::new(0.1, 1.2, 6).unwrap(),
        ProposalConfig::new(1.0).unwrap(),
        UpdateScheme::Shus { gamma: 1.0 },
        5,
    )
    .unwrap();
    for _ in 0..200_000 {
        assert!(s.step().position.x1.abs() <= 1.2);
    }
}

#[test]
fn proposal_increments_have_variance_sigma_squared() {
    let sigma = 0.05;
    let mut chain = ChainState::new(&TargetModel::new(10.0, 1.2, 48).unwrap(), DEFAULT_START, chain_rng(6)).unwrap();
    let cfg = ProposalConfig::new(sigma).unwrap();
    let n = 100_000;
    let (mut s1, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let p = chain.propose(&cfg);
        let dx = p.x1 - DEFAULT_START.x1;
        s1 += dx;
        s2 += dx * dx;
    }
    let var = s2 / n as f64 - (s1 / n as f64).powi(2);
    assert!((var / (sigma * sigma) - 1.0).abs() < 0.05, "variance {var}");
}

#[test]
fn log_acceptance_special_cases() {
    let m = TargetModel::new(3.0, 1.2, 12).unwrap();
    let ln_theta: Vec<f64> = (0..12).map(|i| -(i as f64) * 0.7).collect();
    let x = Point::new(-0.95, 0.1);
    assert_eq!(log_acceptance(&m, &ln_theta, 1.0, x, x), 0.0);
    // same stratum: only the energy
    let y = Point::new(-0.96, 0.3);
    let du = m.energy(y) - m.energy(x);
    assert_eq!(log_acceptance(&m, &ln_theta, 1.0, x, y), -3.0 * du);
    // uniform weights cancel across strata
    let z = Point::new(0.4, -0.2);
    assert_eq!(
        log_acceptance(&m, &[0.0; 12], 1.0, x, z),
        -3.0 * (m.energy(z) - m.energy(x))
    );
    assert_eq!(
        log_acceptance(&m, &ln_theta, 1.0, x, Point::new(1.25, 0.0)),
        f64::NEG_INFINITY
    );
}

#[test]
fn unbiased_averages_recover_target_expectations() {
    let d = 4;
    let star = common::midpoint_theta_star(1.0, d);
    let ln_theta: Vec<f64> = star.iter().map(|t| t.ln()).collect();
    let visits = frozen_chain(1.0, d, 0.6, &ln_theta, 1.0, 1_000_000, 7);

    // f = 1 reweights to one exactly when θ = θ*
    let mut ones = UnbiasedAverage::new(d);
    let mut right = UnbiasedAverage::new(d);
    for &(p, s) in &visits {
        ones.push(star[s], 1.0);
        right.push(star[s], f64::from(u8::from(p.x1 > 0.0)));
    }
    let per_step: Vec<f64> = visits.iter().map(|&(_, s)| d as f64 * star[s]).collect();
    let (_, se) = common::batch_means(&per_step, 50);
    assert!((ones.value() - 1.0).abs() < 3.5 * se, "f = 1 gives {}", ones.value());

    // mirror symmetry: half the mass on x1 > 0
    let per_step: Vec<f64> = visits
        .iter()
        .map(|&(p, s)| d as f64 * star[s] * f64::from(u8::from(p.x1 > 0.0)))
        .collect();
    let (_, se) = common::batch_means(&per_step, 50);
    assert!(
        (right.value() - 0.5).abs() < 3.5 * se,
        "{} vs 0.5 (se {se:.1e})",
        right.value()
    );

    for i in 0..d {
        let per_step: Vec<f64> = visits
            .iter()
            .map(|&(_, s)| d as f64 * star[s] * f64::from(u8::from(s == i)))
            .collect();
        let (mean, se) = common::batch_means(&per_step, 50);
        assert!((mean - star[i]).abs() < 3.5 * se, "stratum {i}: {mean} vs {}", star[i]);
    }
}

#[test]
fn wang_landau_with_gamma_star_d_converges() {
    let d = 4;
    let mut s = AdaptiveSampler::new(
        TargetModel::new(1.0, 1.2, d).unwrap(),
        ProposalConfig::new(0.6).unwrap(),
        UpdateScheme::WangLandau {
            gamma_star: d as f64,
            alpha: 1.0,
            linear: false,
        },
        8,
    )
    .unwrap();
    s.run(2_000_000);
    let star = ln_star(1.0, d);
    let err = s
        .occupation()
        .ln_theta()
        .iter()
        .zip(&star)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(err < 0.05, "max log error {err}");
}

#[test]
fn partial_bias_weights_approach_reference() {
    let d = 6;
    let star = ln_star(3.0, d);
    let err_after = |steps| {
        let mut s = AdaptiveSampler::new(
            TargetModel::new(3.0, 1.2, d).unwrap(),
            ProposalConfig::new(0.4).unwrap(),
            UpdateScheme::PartialBias { gamma: 1.0, a: 0.5 },
            9,
        )
        .unwrap();
        s.run(steps);
        s.occupation()
            .ln_theta()
            .iter()
            .zip(&star)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    };
    let (early, late) = (err_after(20_000), err_after(4_000_000));
    assert!(late < 0.05 && late < early, "errors {early} then {late}");
}

#[test]
fn shus_stepsize_plateaus_then_reaches_d() {
    let d = 12;
    let mut s = AdaptiveSampler::new(
        TargetModel::new(1.0, 1.2, d).unwrap(),
        ProposalConfig::new(0.2).unwrap(),
        UpdateScheme::Shus { gamma: 1.0 },
        10,
    )
    .unwrap();
    s.run(1_000_000);
    let ratio = s.n() as f64 * s.occupation().last_stepsize() / d as f64;
    assert!((ratio - 1.0).abs() < 0.05, "n gamma_n / d = {ratio}");
}

#[test]
fn exit_index_is_at_least_one() {
    let build = || {
        AdaptiveSampler::builder(
            TargetModel::new(10.0, 1.2, 12).unwrap(),
            ProposalConfig::new(0.05).unwrap(),
            UpdateScheme::Shus { gamma: 1.0 },
        )
        .start(Point::new(1.05, 0.0))
        .rng(chain_rng(11))
        .build()
        .unwrap()
    };
    let outcome = first_exit_time(&mut build(), 1000, 1.0);
    // replay: the exit is the first step whose state has x1 > 1
    let mut s = build();
    let first = s.run_until(1000, |r| r.position.x1 > 1.0).unwrap().n;
    assert_eq!(outcome, ExitOutcome::Exited(first));
    assert!(first >= 1);
}

#[test]
fn flat_target_exits_are_finite() {
    let cfg = RunConfig::new(2, UpdateScheme::Shus { gamma: 1.0 }).with_sigma(0.1);
    let est = mean_exit_time(&cfg, &[1e-9], 50, 12, 10_000_000, 1.0).unwrap();
    assert_eq!(est[0].censored, 0);
    // a σ random walk needs about (2/σ)² steps to move two units
    assert!(est[0].mean > 50.0 && est[0].mean < 5000.0, "{}", est[0].mean);
}

#[test]
fn exit_times_grow_exponentially_at_the_reference_rate() {
    let cfg = RunConfig::new(12, UpdateScheme::Shus { gamma: 1.0 }).with_sigma(0.2);
    let est = mean_exit_time(&cfg, &[5.0, 6.0, 7.0, 8.0], 200, 13, DEFAULT_EXIT_CAP, 1.0).unwrap();
    let fit = fit_exponential_in_beta(&fit_series(&est).unwrap()).unwrap();
    assert!((1.1..=1.45).contains(&fit.slope), "mu = {}", fit.slope);
}

#[test]
fn identical_seeds_give_zero_standard_error() {
    let cfg = RunConfig::new(6, UpdateScheme::Shus { gamma: 1.0 }).with_sigma(0.1);
    let mut outcomes = Vec::new();
    for _ in 0..4 {
        let mut s = cfg.sampler(4.0, chain_rng(21)).unwrap();
        outcomes.push(first_exit_time(&mut s, DEFAULT_EXIT_CAP, 1.0));
    }
    let est = ExitTimeEstimate::from_outcomes(4.0, outcomes);
    assert_eq!(est.std_error, 0.0);
}
