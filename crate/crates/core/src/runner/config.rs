//! Experiment configuration: flat `key = value` files plus overrides.
//!
//! ```text
//! # exit-time scan
//! scheme = shus
//! gamma = 1
//! strata = 12
//! beta = 5, 6, 7, 8
//! replicas = 200
//! ```
//!
//! Lists are comma separated; `sigma = auto` selects `2R/d`. Later
//! assignments win, so command-line overrides are simply applied after the
//! file.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::adapt::{UpdateScheme, DEFAULT_RENORM_THRESHOLD};
use crate::diagnostics::{RunConfig, DEFAULT_EXIT_CAP};
use crate::model::{DEFAULT_GRID_RESOLUTION, DEFAULT_HALF_WIDTH};
use crate::sampler::DEFAULT_START;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    Shus,
    WangLandau,
    ShusAlpha,
    PartialBias,
}

impl SchemeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SchemeKind::Shus => "shus",
            SchemeKind::WangLandau => "wl",
            SchemeKind::ShusAlpha => "shus-alpha",
            SchemeKind::PartialBias => "partial-bias",
        }
    }
}

impl FromStr for SchemeKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "shus" => Ok(SchemeKind::Shus),
            "wl" | "wang-landau" => Ok(SchemeKind::WangLandau),
            "shus-alpha" => Ok(SchemeKind::ShusAlpha),
            "partial-bias" => Ok(SchemeKind::PartialBias),
            other => Err(format!("unknown scheme `{other}` (shus, wl, shus-alpha, partial-bias)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WlUpdate {
    Nonlinear,
    Linear,
}

impl FromStr for WlUpdate {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "nonlinear" => Ok(WlUpdate::Nonlinear),
            "linear" => Ok(WlUpdate::Linear),
            other => Err(format!("unknown wl_update `{other}` (nonlinear, linear)")),
        }
    }
}

/// Fully resolved experiment parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scheme: SchemeKind,
    pub gamma: f64,
    pub gamma_star: f64,
    /// `None` resolves to 1 for Wang-Landau and 0.6 for SHUS^α.
    pub alpha: Option<f64>,
    pub bias_exponent: f64,
    pub wl_update: WlUpdate,
    pub threshold: f64,

    pub betas: Vec<f64>,
    pub strata: usize,
    pub half_width: f64,
    /// `None` resolves to `2R/d`.
    pub sigma: Option<f64>,

    pub seed: u64,
    pub replicas: usize,
    pub max_iters: u64,
    pub steps: u64,
    pub stride: u64,
    pub exit_level: f64,

    pub checkpoint_first: u64,
    pub checkpoint_last: u64,
    pub checkpoints_per_decade: usize,
    /// Checkpoint window for the variance decay fits.
    pub fit_window: (u64, u64),
    /// Checkpoint window for the bias decay fit, further restricted to
    /// checkpoints where the bias is `bias_min_snr` times its noise level.
    pub bias_window: (u64, u64),
    pub bias_min_snr: f64,

    pub grid_resolution: usize,
    pub quadrature_tolerance: f64,

    /// Extra γ values for the exit-time prefactor sweep.
    pub gamma_sweep: Vec<f64>,
    /// Wang-Landau `γ*` values run alongside the main scheme.
    pub wl_compare: Vec<f64>,

    pub output_dir: PathBuf,
    /// Worker threads; `None` uses all cores.
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scheme: SchemeKind::Shus,
            gamma: 1.0,
            gamma_star: 1.0,
            alpha: None,
            bias_exponent: 0.5,
            wl_update: WlUpdate::Nonlinear,
            threshold: DEFAULT_RENORM_THRESHOLD,
            betas: vec![10.0],
            strata: 48,
            half_width: DEFAULT_HALF_WIDTH,
            sigma: None,
            seed: 0,
            replicas: 100,
            max_iters: DEFAULT_EXIT_CAP,
            steps: 10_000_000,
            stride: 1000,
            exit_level: 1.0,
            checkpoint_first: 1_000,
            checkpoint_last: 1_000_000,
            checkpoints_per_decade: 8,
            fit_window: (10_000, 1_000_000),
            bias_window: (1_000, 1_000_000),
            bias_min_snr: 3.0,
            grid_resolution: DEFAULT_GRID_RESOLUTION,
            quadrature_tolerance: 1e-6,
            gamma_sweep: Vec::new(),
            wl_compare: Vec::new(),
            output_dir: PathBuf::from("output"),
            threads: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
    value.parse().map_err(|_| format!("cannot parse `{value}` for `{key}`"))
}

fn parse_list(key: &str, value: &str) -> std::result::Result<Vec<f64>, String> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|v| parse(key, v.trim())).collect()
}

fn parse_count(key: &str, value: &str) -> std::result::Result<u64, String> {
    // accepts 1e6 style for iteration counts
    if let Ok(n) = value.parse::<u64>() {
        return Ok(n);
    }
    let f: f64 = parse(key, value)?;
    if f >= 0.0 && f.fract() == 0.0 && f <= u64::MAX as f64 {
        Ok(f as u64)
    } else {
        Err(format!("`{key}` must be a non-negative integer, got `{value}`"))
    }
}

fn parse_window(key: &str, value: &str) -> std::result::Result<(u64, u64), String> {
    let (lo, hi) = value
        .split_once(',')
        .ok_or_else(|| format!("`{key}` expects `lo, hi`, got `{value}`"))?;
    Ok((parse_count(key, lo.trim())?, parse_count(key, hi.trim())?))
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Reads a config file on top of the defaults.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::default();
        cfg.merge_str(&text)?;
        Ok(cfg)
    }

    /// Applies every `key = value` line of `text`; `#` starts a comment.
    pub fn merge_str(&mut self, text: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: idx + 1,
                reason: format!("expected `key = value`, got `{line}`"),
            })?;
            self.set(key.trim(), value.trim())
                .map_err(|reason| Error::Config { line: idx + 1, reason })?;
        }
        Ok(())
    }

    /// Sets one key. Keys use snake_case; dashes are accepted too.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let key = key.replace('-', "_");
        let k = key.as_str();
        match k {
            "scheme" => self.scheme = value.parse()?,
            "gamma" => self.gamma = parse(k, value)?,
            "gamma_star" => self.gamma_star = parse(k, value)?,
            "alpha" => self.alpha = if value == "auto" { None } else { Some(parse(k, value)?) },
            "a" | "bias_exponent" => self.bias_exponent = parse(k, value)?,
            "wl_update" => self.wl_update = value.parse()?,
            "threshold" => self.threshold = parse(k, value)?,
            "beta" | "betas" => self.betas = parse_list(k, value)?,
            "strata" | "d" => self.strata = parse_count(k, value)? as usize,
            "half_width" => self.half_width = parse(k, value)?,
            "sigma" => self.sigma = if value == "auto" { None } else { Some(parse(k, value)?) },
            "seed" => self.seed = parse_count(k, value)?,
            "replicas" | "k" => self.replicas = parse_count(k, value)? as usize,
            "max_iters" => self.max_iters = parse_count(k, value)?,
            "steps" => self.steps = parse_count(k, value)?,
            "stride" => self.stride = parse_count(k, value)?,
            "exit_level" => self.exit_level = parse(k, value)?,
            "checkpoint_first" => self.checkpoint_first = parse_count(k, value)?,
            "checkpoint_last" => self.checkpoint_last = parse_count(k, value)?,
            "checkpoints_per_decade" => self.checkpoints_per_decade = parse_count(k, value)? as usize,
            "fit_window" => self.fit_window = parse_window(k, value)?,
            "bias_window" => self.bias_window = parse_window(k, value)?,
            "bias_min_snr" => self.bias_min_snr = parse(k, value)?,
            "grid_resolution" => self.grid_resolution = parse_count(k, value)? as usize,
            "quadrature_tolerance" => self.quadrature_tolerance = parse(k, value)?,
            "gamma_sweep" => self.gamma_sweep = parse_list(k, value)?,
            "wl_compare" => self.wl_compare = parse_list(k, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "threads" => {
                let n = parse_count(k, value)? as usize;
                self.threads = if n == 0 { None } else { Some(n) };
            }
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    pub fn sigma(&self) -> f64 {
        self.sigma.unwrap_or(2.0 * self.half_width / self.strata as f64)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(match self.scheme {
            SchemeKind::ShusAlpha => 0.6,
            _ => 1.0,
        })
    }

    /// The configured scheme with its `γ` replaced by `gamma`.
    pub fn scheme_with_gamma(&self, gamma: f64) -> UpdateScheme {
        match self.scheme {
            SchemeKind::Shus => UpdateScheme::Shus { gamma },
            SchemeKind::WangLandau => UpdateScheme::WangLandau {
                gamma_star: self.gamma_star,
                alpha: self.alpha(),
                linear: self.wl_update == WlUpdate::Linear,
            },
            SchemeKind::ShusAlpha => UpdateScheme::ShusAlpha {
                gamma,
                alpha: self.alpha(),
            },
            SchemeKind::PartialBias => UpdateScheme::PartialBias {
                gamma,
                a: self.bias_exponent,
            },
        }
    }

    pub fn update_scheme(&self) -> UpdateScheme {
        self.scheme_with_gamma(self.gamma)
    }

    pub fn run_config(&self, scheme: UpdateScheme) -> RunConfig {
        RunConfig {
            strata: self.strata,
            half_width: self.half_width,
            sigma: self.sigma(),
            scheme,
            renorm_threshold: self.threshold,
            start: DEFAULT_START,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.update_scheme().validate()?;
        for &g in &self.gamma_sweep {
            self.scheme_with_gamma(g).validate()?;
        }
        for &g in &self.wl_compare {
            UpdateScheme::WangLandau {
                gamma_star: g,
                alpha: 1.0,
                linear: false,
            }
            .validate()?;
        }
        if self.betas.is_empty() {
            return Err(Error::invalid("beta", "need at least one value"));
        }
        if let Some(b) = self.betas.iter().find(|b| !(**b >= 0.0 && b.is_finite())) {
            return Err(Error::invalid(
                "beta",
                format!("must be finite and non-negative, got {b}"),
            ));
        }
        if self.betas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("beta", "grid must be strictly increasing"));
        }
        if self.strata == 0 {
            return Err(Error::invalid("strata", "need at least one stratum"));
        }
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(Error::invalid(
                "half_width",
                format!("must be positive, got {}", self.half_width),
            ));
        }
        if !(self.sigma() > 0.0 && self.sigma().is_finite()) {
            return Err(Error::invalid(
                "sigma",
                format!("must be positive, got {}", self.sigma()),
            ));
        }
        if !(self.threshold > 1.0 && self.threshold.is_finite()) {
            return Err(Error::invalid(
                "threshold",
                format!("must exceed 1, got {}", self.threshold),
            ));
        }
        if self.replicas == 0 {
            return Err(Error::invalid("replicas", "need at least one replica"));
        }
        if self.stride == 0 {
            return Err(Error::invalid("stride", "must be at least 1"));
        }
        if self.checkpoint_first == 0 || self.checkpoint_first >= self.checkpoint_last {
            return Err(Error::invalid("checkpoint_first", "need 0 < first < last"));
        }
        if self.checkpoints_per_decade == 0 {
            return Err(Error::invalid("checkpoints_per_decade", "must be at least 1"));
        }
        if self.fit_window.0 >= self.fit_window.1 {
            return Err(Error::invalid("fit_window", "need lo < hi"));
        }
        if self.bias_window.0 >= self.bias_window.1 {
            return Err(Error::invalid("bias_window", "need lo < hi"));
        }
        Ok(())
    }

    /// The resolved experiment parameters as `# key = value` lines.
    ///
    /// `output_dir` and `threads` are left out: they never change results,
    /// and leaving them out keeps outputs byte-identical across machines.
    pub fn header(&self) -> String {
        let mut h = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(h, "# {k} = {v}");
        };
        kv("scheme", self.scheme.as_str().into());
        kv("gamma", self.gamma.to_string());
        kv("gamma_star", self.gamma_star.to_string());
        kv("alpha", self.alpha().to_string());
        kv("a", self.bias_exponent.to_string());
        kv(
            "wl_update",
            match self.wl_update {
                WlUpdate::Nonlinear => "nonlinear".into(),
                WlUpdate::Linear => "linear".into(),
            },
        );
        kv("threshold", self.threshold.to_string());
        kv("beta", join(&self.betas));
        kv("strata", self.strata.to_string());
        kv("half_width", self.half_width.to_string());
        kv("sigma", self.sigma().to_string());
        kv("seed", self.seed.to_string());
        kv("replicas", self.replicas.to_string());
        kv("max_iters", self.max_iters.to_string());
        kv("steps", self.steps.to_string());
        kv("stride", self.stride.to_string());
        kv("exit_level", self.exit_level.to_string());
        kv("checkpoint_first", self.checkpoint_first.to_string());
        kv("checkpoint_last", self.checkpoint_last.to_string());
        kv("checkpoints_per_decade", self.checkpoints_per_decade.to_string());
        kv("fit_window", format!("{},{}", self.fit_window.0, self.fit_window.1));
        kv("bias_window", format!("{},{}", self.bias_window.0, self.bias_window.1));
        kv("bias_min_snr", self.bias_min_snr.to_string());
        kv("grid_resolution", self.grid_resolution.to_string());
        kv("quadrature_tolerance", self.quadrature_tolerance.to_string());
        kv("gamma_sweep", join(&self.gamma_sweep));
        kv("wl_compare", join(&self.wl_compare));
        h
    }
}
