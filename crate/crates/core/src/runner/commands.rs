use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::adapt::UpdateScheme;
use crate::diagnostics::{
    fit_bias_decay, fit_decay, fit_exponential_in_beta, fit_power_law, fit_series, fit_shared_exponential,
    log_checkpoints, mean_exit_time, weight_statistics_series, ExitTimeEstimate, FitResult, SharedRateFit,
    StepsizeNormalization, EXIT_CSV_HEADER, FIT_CSV_HEADER, STATS_CSV_HEADER,
};
use crate::model::{reference_weights, ReferenceWeights, TargetModel, DEFAULT_X2_BOUNDS};
use crate::rng::chain_rng;
use crate::runner::config::ExperimentConfig;
use crate::{Error, Result};

/// Files written by a command and a one-paragraph summary.
#[derive(Debug, Clone, Default)]
pub struct CommandReport {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

/// Output file whose first lines are the resolved config as comments.
struct OutputFile {
    path: PathBuf,
    out: BufWriter<File>,
}

impl OutputFile {
    fn create(cfg: &ExperimentConfig, name: &str) -> Result<Self> {
        std::fs::create_dir_all(&cfg.output_dir)?;
        let path = cfg.output_dir.join(name);
        let mut out = BufWriter::new(File::create(&path)?);
        out.write_all(cfg.header().as_bytes())?;
        Ok(Self { path, out })
    }

    fn finish(mut self, report: &mut CommandReport) -> Result<()> {
        self.out.flush()?;
        report.files.push(self.path);
        Ok(())
    }
}

/// JSON files cannot carry comments; the config goes in a `config` field.
fn write_json<T: Serialize>(cfg: &ExperimentConfig, name: &str, body: &T, report: &mut CommandReport) -> Result<()> {
    #[derive(Serialize)]
    struct Wrapped<'a, T> {
        config: Vec<&'a str>,
        #[serde(flatten)]
        body: &'a T,
    }
    std::fs::create_dir_all(&cfg.output_dir)?;
    let path = cfg.output_dir.join(name);
    let header = cfg.header();
    let wrapped = Wrapped {
        config: header.lines().map(|l| l.trim_start_matches("# ")).collect(),
        body,
    };
    let mut text = serde_json::to_string_pretty(&wrapped)?;
    text.push('\n');
    std::fs::write(&path, text)?;
    report.files.push(path);
    Ok(())
}

/// Runs `f` on a pool with the configured number of workers.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::invalid("threads", e.to_string()))?;
    Ok(pool.install(f))
}

fn single_beta(cfg: &ExperimentConfig) -> Result<f64> {
    match cfg.betas.as_slice() {
        [b] => Ok(*b),
        _ => Err(Error::invalid(
            "beta",
            format!("this command takes one value, got {}", cfg.betas.len()),
        )),
    }
}

/// One long chain: positions every `stride` steps in `trajectory.csv`,
/// and one row per stratum in `weights.csv` with `ln θ`, the stepsize,
/// the renormalization count and the normalized stepsize.
pub fn cmd_trajectory(cfg: &ExperimentConfig) -> Result<CommandReport> {
    cfg.validate()?;
    let beta = single_beta(cfg)?;
    let scheme = cfg.update_scheme();
    let mut sampler = cfg.run_config(scheme).sampler(beta, chain_rng(cfg.seed))?;
    let d = cfg.strata;
    let norm = StepsizeNormalization::for_scheme(scheme, d);

    let mut traj = OutputFile::create(cfg, "trajectory.csv")?;
    writeln!(traj.out, "n,x1,x2,stratum,ln_theta_hit,stepsize")?;
    let mut weights = OutputFile::create(cfg, "weights.csv")?;
    writeln!(weights.out, "n,stratum,ln_theta,stepsize,r_n,normalized_stepsize")?;

    let mut visited = vec![false; d];
    for _ in 0..cfg.steps {
        let rec = sampler.step();
        visited[rec.stratum] = true;
        if rec.n % cfg.stride != 0 {
            continue;
        }
        let occ = sampler.occupation();
        writeln!(
            traj.out,
            "{},{},{},{},{},{}",
            rec.n,
            rec.position.x1,
            rec.position.x2,
            rec.stratum + 1,
            occ.ln_theta_at(rec.stratum),
            rec.stepsize
        )?;
        let normalized = norm.apply(rec.n, rec.stepsize);
        for (i, l) in occ.ln_theta().iter().enumerate() {
            writeln!(
                weights.out,
                "{},{},{l},{},{},{normalized}",
                rec.n,
                i + 1,
                rec.stepsize,
                occ.renorm_count()
            )?;
        }
    }
    let mut report = CommandReport::default();
    traj.finish(&mut report)?;
    weights.finish(&mut report)?;
    report.summary = format!(
        "{} steps of {} at beta = {beta}; {} of {d} strata visited; final x1 = {:.4}",
        cfg.steps,
        scheme.name(),
        visited.iter().filter(|v| **v).count(),
        sampler.position().x1
    );
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct CellSummary {
    pub beta: f64,
    pub mean: f64,
    pub std_error: f64,
    pub replicas: usize,
    pub censored: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExitSeries {
    pub label: String,
    pub cells: Vec<CellSummary>,
    pub exponential: FitResult,
    pub power: FitResult,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepFit {
    pub gammas: Vec<f64>,
    pub fit: SharedRateFit,
    /// `C(γ) / C(γ_first)` at the shared rate.
    pub prefactor_ratios: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExitTimesOutput {
    pub series: Vec<ExitSeries>,
    pub gamma_sweep: Option<SweepFit>,
}

fn scheme_label(scheme: &UpdateScheme) -> String {
    match *scheme {
        UpdateScheme::Shus { gamma } => format!("shus_gamma_{gamma}"),
        UpdateScheme::WangLandau {
            gamma_star,
            alpha,
            linear,
        } => {
            let kind = if linear { "linear" } else { "nonlinear" };
            format!("wl_{kind}_gamma_star_{gamma_star}_alpha_{alpha}")
        }
        UpdateScheme::ShusAlpha { gamma, alpha } => format!("shus_alpha_{alpha}_gamma_{gamma}"),
        UpdateScheme::PartialBias { gamma, a } => format!("partial_bias_a_{a}_gamma_{gamma}"),
    }
}

/// Mean first exit times over the β grid for the configured scheme, each
/// γ of `gamma_sweep` and each Wang-Landau `γ*` of `wl_compare`.
///
/// Writes one exit-time CSV per scheme, `exit_fit.csv` and
/// `exit_fit.json`. Every replica uses the same random stream for every
/// scheme and β.
pub fn cmd_exit_times(cfg: &ExperimentConfig) -> Result<CommandReport> {
    cfg.validate()?;
    let gammas = if cfg.gamma_sweep.is_empty() {
        vec![cfg.gamma]
    } else {
        cfg.gamma_sweep.clone()
    };
    let mut schemes: Vec<UpdateScheme> = gammas.iter().map(|&g| cfg.scheme_with_gamma(g)).collect();
    schemes.extend(cfg.wl_compare.iter().map(|&g| UpdateScheme::WangLandau {
        gamma_star: g,
        alpha: 1.0,
        linear: false,
    }));

    let mut report = CommandReport::default();
    let mut all: Vec<(String, Vec<ExitTimeEstimate>)> = Vec::new();
    for scheme in &schemes {
        let label = scheme_label(scheme);
        let est = with_threads(cfg.threads, || {
            mean_exit_time(
                &cfg.run_config(*scheme),
                &cfg.betas,
                cfg.replicas,
                cfg.seed,
                cfg.max_iters,
                cfg.exit_level,
            )
        })??;
        let name = if schemes.len() == 1 {
            "exit_times.csv".to_string()
        } else {
            format!("exit_times_{label}.csv")
        };
        let mut file = OutputFile::create(cfg, &name)?;
        writeln!(file.out, "{EXIT_CSV_HEADER}")?;
        for e in &est {
            e.write_csv_rows(&mut file.out)?;
        }
        file.finish(&mut report)?;
        all.push((label, est));
    }

    // CSVs are on disk even if a fit below fails on censored cells
    let mut series = Vec::new();
    let mut summary = Vec::new();
    for (label, est) in &all {
        let pts = fit_series(est)?;
        let exponential = fit_exponential_in_beta(&pts)?;
        let power = fit_power_law(&pts)?;
        summary.push(format!(
            "{label}: t ~ {:.4} exp({:.4} beta), t ~ {:.4} beta^{:.4}",
            exponential.prefactor, exponential.slope, power.prefactor, power.slope
        ));
        series.push(ExitSeries {
            label: label.clone(),
            cells: est
                .iter()
                .map(|e| CellSummary {
                    beta: e.beta,
                    mean: e.mean,
                    std_error: e.std_error,
                    replicas: e.replicas,
                    censored: e.censored,
                })
                .collect(),
            exponential,
            power,
        });
    }
    let gamma_sweep = if gammas.len() > 1 {
        let groups: Vec<Vec<(f64, f64)>> = all[..gammas.len()]
            .iter()
            .map(|(_, est)| fit_series(est))
            .collect::<Result<_>>()?;
        let fit = fit_shared_exponential(&groups)?;
        let ratios: Vec<f64> = fit.prefactors.iter().map(|c| c / fit.prefactors[0]).collect();
        summary.push(format!("shared rate {:.4}; prefactor ratios {:?}", fit.slope, ratios));
        Some(SweepFit {
            gammas: gammas.clone(),
            fit,
            prefactor_ratios: ratios,
        })
    } else {
        None
    };

    let mut fits = OutputFile::create(cfg, "exit_fit.csv")?;
    writeln!(fits.out, "{FIT_CSV_HEADER}")?;
    for s in &series {
        for (kind, f) in [("exponential", &s.exponential), ("power", &s.power)] {
            writeln!(
                fits.out,
                "{}:{kind},{},{},{}",
                s.label, f.slope, f.prefactor, f.residual_norm
            )?;
        }
    }
    fits.finish(&mut report)?;
    write_json(
        cfg,
        "exit_fit.json",
        &ExitTimesOutput { series, gamma_sweep },
        &mut report,
    )?;
    report.summary = summary.join("\n");
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightFitOutput {
    pub window: (u64, u64),
    pub bias_window: (u64, u64),
    pub bias_min_snr: f64,
    /// `None` when fewer than three checkpoints carry a bias clearly above
    /// replica noise; raise `replicas` or lower `checkpoint_first`.
    pub bias: Option<FitResult>,
    /// Per-stratum variance fits, stratum 1 first.
    pub variance: Vec<FitResult>,
    pub mean_variance_exponent: f64,
}

/// Replica statistics of `ln θ_n` at log-spaced checkpoints and their
/// decay fits. Writes `weight_stats.csv` and `weight_fit.json`.
pub fn cmd_weight_stats(cfg: &ExperimentConfig) -> Result<CommandReport> {
    cfg.validate()?;
    let beta = single_beta(cfg)?;
    let model = TargetModel::new(beta, cfg.half_width, cfg.strata)?;
    let reference = reference_weights(&model, cfg.grid_resolution, DEFAULT_X2_BOUNDS, cfg.quadrature_tolerance)?;
    let checkpoints = log_checkpoints(cfg.checkpoint_first, cfg.checkpoint_last, cfg.checkpoints_per_decade);
    let stats = with_threads(cfg.threads, || {
        weight_statistics_series(
            &cfg.run_config(cfg.update_scheme()),
            beta,
            cfg.replicas,
            cfg.seed,
            &checkpoints,
            &reference.ln_theta_star,
        )
    })??;

    let mut report = CommandReport::default();
    let mut file = OutputFile::create(cfg, "weight_stats.csv")?;
    writeln!(file.out, "{STATS_CSV_HEADER}")?;
    for s in &stats {
        s.write_csv_rows(&mut file.out)?;
    }
    file.finish(&mut report)?;

    let bias = match fit_bias_decay(&stats, cfg.bias_window, cfg.bias_min_snr) {
        Ok(fit) => Some(fit),
        Err(Error::DegenerateFit(_)) => None,
        Err(e) => return Err(e),
    };
    let variance = (0..cfg.strata)
        .map(|i| {
            let series: Vec<(u64, f64)> = stats.iter().map(|s| (s.n, s.variance[i])).collect();
            fit_decay(&series, cfg.fit_window)
        })
        .collect::<Result<Vec<_>>>()?;
    let mean_variance_exponent = variance.iter().map(|f| f.decay_exponent()).sum::<f64>() / cfg.strata as f64;
    let bias_text = match &bias {
        Some(f) => format!("bias decay exponent {:.3} ({} points)", f.decay_exponent(), f.points),
        None => "bias not resolved above replica noise".to_string(),
    };
    report.summary = format!("{bias_text}; mean variance decay exponent {mean_variance_exponent:.3}");
    write_json(
        cfg,
        "weight_fit.json",
        &WeightFitOutput {
            window: cfg.fit_window,
            bias_window: cfg.bias_window,
            bias_min_snr: cfg.bias_min_snr,
            bias,
            variance,
            mean_variance_exponent,
        },
        &mut report,
    )?;
    Ok(report)
}

/// Quadrature reference weights for each configured β, in
/// `reference.csv` (one β) or `reference_beta_<β>.csv`.
pub fn cmd_reference(cfg: &ExperimentConfig) -> Result<CommandReport> {
    cfg.validate()?;
    let mut report = CommandReport::default();
    let mut lines = Vec::new();
    for &beta in &cfg.betas {
        let model = TargetModel::new(beta, cfg.half_width, cfg.strata)?;
        let r = reference_weights(&model, cfg.grid_resolution, DEFAULT_X2_BOUNDS, cfg.quadrature_tolerance)?;
        let name = if cfg.betas.len() == 1 {
            "reference.csv".to_string()
        } else {
            format!("reference_beta_{beta}.csv")
        };
        let mut file = OutputFile::create(cfg, &name)?;
        r.write_csv(&mut file.out)?;
        file.finish(&mut report)?;
        lines.push(reference_summary(beta, &r));
    }
    report.summary = lines.join("\n");
    Ok(report)
}

fn reference_summary(beta: f64, r: &ReferenceWeights) -> String {
    format!(
        "beta = {beta}: ln theta* from {:.4} to {:.4}, quadrature error estimate {:.2e}",
        r.ln_theta_star.iter().copied().fold(f64::INFINITY, f64::min),
        r.ln_theta_star.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        r.error_estimate
    )
}

/// Strips the `#` header from an output file, leaving plain CSV.
pub fn read_csv_body(path: &Path) -> Result<String> {
    let text = std::fs::read_to_string(path)?;
    Ok(text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect())
}
