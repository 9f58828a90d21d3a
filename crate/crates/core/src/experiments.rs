//! Experiment configuration, the runners behind the `levynet` subcommands, and
//! CSV / JSON / SVG artifact writers.
//!
//! Every artifact is a function of the configuration and seed only.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::barron::{self, BarronFunction, FitConfig, FitMethod};
use crate::chaos::{self, LogPayoff};
use crate::construct::{self, ConstructionConfig, Mode};
use crate::error::{Error, Result};
use crate::levy::{LevyModel1D, LevyModelD, LevyVariant, SymbolSector};
use crate::oracle::{self, OracleResult};
use crate::relu::{payoff_net, PayoffSpec, ReluNetwork};
use crate::rng;
use crate::spectral;
use crate::stats::{linspace, RateFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ModelVariant {
    BlackScholes,
    Merton,
    Kou,
    TemperedStable,
}

/// Model table. `gamma` defaults to the martingale drift; `dim > 1` gives independent copies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ModelConfig {
    pub variant: ModelVariant,
    pub sigma: f64,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub mu_j: Option<f64>,
    #[serde(default)]
    pub sigma_j: Option<f64>,
    #[serde(default)]
    pub p_up: Option<f64>,
    #[serde(default)]
    pub eta_plus: Option<f64>,
    #[serde(default)]
    pub eta_minus: Option<f64>,
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub g: Option<f64>,
    #[serde(default)]
    pub m: Option<f64>,
    #[serde(default)]
    pub y: Option<f64>,
    #[serde(default = "one")]
    pub dim: usize,
}

fn one() -> usize {
    1
}

impl ModelConfig {
    pub fn black_scholes(sigma: f64) -> Self {
        ModelConfig {
            variant: ModelVariant::BlackScholes,
            sigma,
            gamma: None,
            lambda: None,
            mu_j: None,
            sigma_j: None,
            p_up: None,
            eta_plus: None,
            eta_minus: None,
            c: None,
            g: None,
            m: None,
            y: None,
            dim: 1,
        }
    }

    pub fn merton(sigma: f64, lambda: f64, mu_j: f64, sigma_j: f64) -> Self {
        ModelConfig { variant: ModelVariant::Merton, lambda: Some(lambda), mu_j: Some(mu_j), sigma_j: Some(sigma_j), ..Self::black_scholes(sigma) }
    }

    fn need(v: Option<f64>, key: &str) -> Result<f64> {
        v.ok_or_else(|| Error::config(format!("model.{key}"), "required for this variant"))
    }

    pub fn to_1d(&self) -> Result<LevyModel1D> {
        let variant = match self.variant {
            ModelVariant::BlackScholes => LevyVariant::BlackScholes,
            ModelVariant::Merton => LevyVariant::Merton {
                lambda: Self::need(self.lambda, "lambda")?,
                mu_j: Self::need(self.mu_j, "muJ")?,
                sigma_j: Self::need(self.sigma_j, "sigmaJ")?,
            },
            ModelVariant::Kou => LevyVariant::Kou {
                lambda: Self::need(self.lambda, "lambda")?,
                p_up: Self::need(self.p_up, "pUp")?,
                eta_plus: Self::need(self.eta_plus, "etaPlus")?,
                eta_minus: Self::need(self.eta_minus, "etaMinus")?,
            },
            ModelVariant::TemperedStable => LevyVariant::TemperedStable {
                c: Self::need(self.c, "c")?,
                g: Self::need(self.g, "g")?,
                m: Self::need(self.m, "m")?,
                y: Self::need(self.y, "y")?,
            },
        };
        let base = LevyModel1D::new(self.sigma, self.gamma.unwrap_or(0.0), variant)?;
        match self.gamma {
            Some(_) => Ok(base),
            None => base.with_martingale_drift(),
        }
    }

    pub fn to_d(&self) -> Result<LevyModelD> {
        if self.dim == 0 {
            return Err(Error::config("model.dim", "must be at least 1"));
        }
        LevyModelD::independent(&vec![self.to_1d()?; self.dim])
    }

    /// Default sector: `rho = 1`, `C1 = sigma^2 / 2`, with crude upper constants.
    pub fn default_sector(&self) -> Result<SymbolSector> {
        let m = self.to_1d()?;
        let lam = match m.variant {
            LevyVariant::BlackScholes => 0.0,
            LevyVariant::Merton { lambda, .. } | LevyVariant::Kou { lambda, .. } => lambda,
            LevyVariant::TemperedStable { .. } => return Err(Error::config("sector", "tempered stable models need an explicit sector")),
        };
        let c1 = 0.5 * m.sigma * m.sigma;
        SymbolSector::new(1.0, c1, c1 + m.gamma.abs(), m.gamma.abs() + 2.0 * lam)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub a: f64,
    pub b: f64,
}

/// Settings of the `chaos` subcommand; the payoff is a product of butterflies in log coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct ChaosConfig {
    pub d: usize,
    pub butterfly: [f64; 3],
    pub c1: f64,
    pub rho: f64,
    pub q: f64,
    /// `tau` as a multiple of `tau_0(d)`.
    pub tau_factor: f64,
    pub max_degree: u32,
    pub n_max: usize,
    pub grid_per_dim: usize,
    pub delta_net: f64,
    pub relu_n: usize,
}

impl Default for ChaosConfig {
    fn default() -> Self {
        ChaosConfig {
            d: 2,
            butterfly: [0.8, 1.0, 1.25],
            c1: 0.5,
            rho: 1.0,
            q: 1.0,
            tau_factor: 2.0,
            max_degree: 12,
            n_max: 64,
            grid_per_dim: 41,
            delta_net: 1e-6,
            relu_n: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct BarronConfig {
    pub d: usize,
    /// Gaussian target `exp(-lambda^2 |x|^2 / 2)`.
    pub lambda: f64,
    pub method: FitMethod,
    pub fit: FitConfig,
    pub taus: Vec<f64>,
}

impl Default for BarronConfig {
    fn default() -> Self {
        BarronConfig { d: 1, lambda: 1.0, method: FitMethod::Greedy, fit: FitConfig::default(), taus: vec![0.0, 0.5, 1.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct SweepConfig {
    pub d_list: Vec<usize>,
    pub target: f64,
    /// Measured error must be below `target / headroom`.
    pub headroom: f64,
    pub n_min: usize,
    pub n_max: usize,
    pub trials: usize,
    pub separable_d: usize,
    pub separable_points: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { d_list: vec![1, 2, 5, 10, 20], target: 0.02, headroom: 1.2, n_min: 1, n_max: 1 << 14, trials: 32, separable_d: 5, separable_points: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct CalibConfig {
    pub s0: f64,
    pub strikes: usize,
    pub k_min: f64,
    pub k_max: f64,
    /// Target mean squared error.
    pub epsilon: f64,
}

impl Default for CalibConfig {
    fn default() -> Self {
        CalibConfig { s0: 1.0, strikes: 20, k_min: 0.8, k_max: 1.25, epsilon: 1e-3 }
    }
}

/// Configuration file for every subcommand. Absent tables fall back to the
/// built-in fixture of the subcommand; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub mode: Option<Mode>,
    pub model: Option<ModelConfig>,
    pub payoff: Option<PayoffSpec>,
    pub sector: Option<SymbolSector>,
    pub tau: Option<f64>,
    #[serde(rename = "box")]
    pub domain: Option<BoxConfig>,
    pub epsilon: Option<f64>,
    pub n: Option<usize>,
    pub spots: Option<Vec<f64>>,
    pub n_list: Option<Vec<usize>>,
    pub p_list: Option<Vec<usize>>,
    pub m_list: Option<Vec<usize>>,
    pub trials: Option<usize>,
    pub delta_net: Option<f64>,
    pub construction: Option<ConstructionConfig>,
    pub chaos: Option<ChaosConfig>,
    pub barron: Option<BarronConfig>,
    pub sweep: Option<SweepConfig>,
    pub calib: Option<CalibConfig>,
}

impl ExperimentConfig {
    /// Parses TOML, reporting the key path of the first schema violation.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let de = toml::Deserializer::new(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let msg = e.inner().message().to_string();
            let key = match msg.strip_prefix("missing field `").and_then(|r| r.split('`').next()) {
                Some(field) if path == "." => field.to_string(),
                Some(field) => format!("{path}.{field}"),
                None => path,
            };
            Error::ConfigError { key, message: msg.trim().to_string() }
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Price,
    Construct,
    RateStudy,
    DimSweep,
    Spectral,
    Chaos,
    Barron,
    Calib,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Price => "price",
            Command::Construct => "construct",
            Command::RateStudy => "rate-study",
            Command::DimSweep => "dim-sweep",
            Command::Spectral => "spectral",
            Command::Chaos => "chaos",
            Command::Barron => "barron",
            Command::Calib => "calib",
        }
    }
}

/// Command-line overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub threads: usize,
    pub mode: Option<Mode>,
}

/// Artifact directory writer.
pub struct Artifacts {
    dir: PathBuf,
    written: Vec<String>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Artifacts { dir: dir.to_path_buf(), written: vec![] })
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut w = csv::Writer::from_path(self.dir.join(name)).map_err(|e| Error::Io(e.to_string()))?;
        w.write_record(header).map_err(|e| Error::Io(e.to_string()))?;
        for r in rows {
            w.write_record(r).map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
        std::fs::write(self.dir.join(name), text + "\n")?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<()> {
        std::fs::write(self.dir.join(name), body)?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn files(&self) -> &[String] {
        &self.written
    }
}

fn f(x: f64) -> String {
    format!("{x}")
}

/// Line chart with optional logarithmic axes; non-positive values are dropped on log axes.
pub fn line_chart_svg(title: &str, x_label: &str, y_label: &str, series: &[(&str, Vec<(f64, f64)>)], log_x: bool, log_y: bool) -> String {
    let (w, h, pad) = (640.0, 420.0, 60.0);
    let tx = |v: f64| if log_x { v.log10() } else { v };
    let ty = |v: f64| if log_y { v.log10() } else { v };
    let pts: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|(_, s)| s.iter().filter(|(x, y)| (!log_x || *x > 0.0) && (!log_y || *y > 0.0)).map(|(x, y)| (tx(*x), ty(*y))).collect())
        .collect();
    let all: Vec<&(f64, f64)> = pts.iter().flatten().collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in &all {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    if all.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);
    let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{title}</text>"#, w / 2.0);
    let _ = writeln!(s, r#"<line x1="{pad}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#, h - pad, w - pad, h - pad);
    let _ = writeln!(s, r#"<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{}" stroke="black"/>"#, h - pad);
    let lx = if log_x { format!("log10 {x_label}") } else { x_label.to_string() };
    let ly = if log_y { format!("log10 {y_label}") } else { y_label.to_string() };
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{lx}</text>"#, w / 2.0, h - 20.0);
    let _ = writeln!(s, r#"<text x="16" y="{}" font-size="12" transform="rotate(-90 16 {})" text-anchor="middle">{ly}</text>"#, h / 2.0, h / 2.0);
    for (v, anchor, x, y) in [(x0, "start", pad, h - pad + 16.0), (x1, "end", w - pad, h - pad + 16.0)] {
        let _ = writeln!(s, r#"<text x="{x}" y="{y}" text-anchor="{anchor}" font-size="10">{v:.3}</text>"#);
    }
    for (v, y) in [(y0, h - pad), (y1, pad)] {
        let _ = writeln!(s, r#"<text x="{}" y="{y}" text-anchor="end" font-size="10">{v:.3}</text>"#, pad - 4.0);
    }
    for (i, ((name, _), p)) in series.iter().zip(&pts).enumerate() {
        let c = colors[i % colors.len()];
        let path: Vec<String> = p.iter().map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{c}" stroke-width="2" points="{}"/>"#, path.join(" "));
        for (x, y) in p {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{c}"/>"#, sx(*x), sy(*y));
        }
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" fill="{c}">{name}</text>"#, w - pad - 120.0, pad + 16.0 * i as f64);
    }
    s.push_str("</svg>\n");
    s
}

fn default_bs() -> ModelConfig {
    ModelConfig::black_scholes(0.2)
}

fn call_k1() -> PayoffSpec {
    PayoffSpec::Call { k: 1.0 }
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    opts: &'a RunOptions,
    seed: u64,
}

impl<'a> Ctx<'a> {
    fn model(&self, fallback: ModelConfig) -> ModelConfig {
        self.cfg.model.clone().unwrap_or(fallback)
    }

    fn mode(&self) -> Mode {
        self.opts.mode.or(self.cfg.mode).unwrap_or(Mode::Practical)
    }

    fn construction(&self, epsilon: f64, a: f64, b: f64, tau: f64) -> ConstructionConfig {
        let mut c = self.cfg.construction.clone().unwrap_or_default();
        c.epsilon = self.cfg.epsilon.unwrap_or(epsilon);
        let dom = self.cfg.domain.unwrap_or(BoxConfig { a, b });
        c.a = dom.a;
        c.b = dom.b;
        c.maturity = self.cfg.tau.unwrap_or(tau);
        c.mode = self.mode();
        c.seed = self.seed;
        if self.cfg.n.is_some() {
            c.n_override = self.cfg.n;
        }
        c
    }
}

/// Common report envelope.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    seed: u64,
    threads: usize,
    config: &'a ExperimentConfig,
    result: T,
}

/// Runs `command`, writes its artifacts into `opts.out` and returns a short summary.
pub fn run(command: Command, cfg: &ExperimentConfig, opts: &RunOptions) -> Result<String> {
    let seed = opts.seed.or(cfg.seed).unwrap_or(0);
    let ctx = Ctx { cfg, opts, seed };
    let mut out = Artifacts::new(&opts.out)?;
    let summary = match command {
        Command::Price => run_price(&ctx, &mut out)?,
        Command::Construct => run_construct(&ctx, &mut out)?,
        Command::RateStudy => run_rate_study(&ctx, &mut out)?,
        Command::DimSweep => run_dim_sweep(&ctx, &mut out)?,
        Command::Spectral => run_spectral(&ctx, &mut out)?,
        Command::Chaos => run_chaos(&ctx, &mut out)?,
        Command::Barron => run_barron(&ctx, &mut out)?,
        Command::Calib => run_calib(&ctx, &mut out)?,
    };
    Ok(format!("{summary}\nartifacts in {}: {}", opts.out.display(), out.files().join(", ")))
}

fn envelope<T: Serialize>(ctx: &Ctx, command: Command, out: &mut Artifacts, result: T) -> Result<()> {
    out.json("report.json", &Envelope { command: command.name(), seed: ctx.seed, threads: ctx.opts.threads, config: ctx.cfg, result })
}

fn oracle_row(s: f64, r: &OracleResult) -> Vec<String> {
    vec![f(s), f(r.value), f(r.error_bound), r.kind.to_string()]
}

fn run_price(ctx: &Ctx, out: &mut Artifacts) -> Result<String> {
    let mc = ctx.model(default_bs());
    let spec = ctx.cfg.payoff.clone().unwrap_or_else(call_k1);
    let tau = ctx.cfg.tau.unwrap_or(1.0);
    let spots = ctx.cfg.spots.clone().unwrap_or_else(|| vec![0.5, 0.75, 1.0, 1.25, 1.5]);
    let results = if mc.dim == 1 {
        oracle::price_1d(&mc.to_1d()?, &spec, tau, &spots)?
    } else {
        let pts: Vec<Vec<f64>> = spots.iter().map(|s| vec![*s; mc.dim]).collect();
        oracle::price_mc_many(&mc.to_d()?, &spec, tau, &pts, ctx.cfg.n.unwrap_or(1 << 18), ctx.seed)?
    };
    let rows: Vec<Vec<String>> = spots.iter().zip(&results).map(|(s, r)| oracle_row(*s, r)).collect();
    out.csv("prices.csv", &["s", "value", "errorBound", "kind"], &rows)?;
    envelope(ctx, Command::Price, out, &results)?;
    Ok(rows.iter().map(|r| r.join(",")).collect::<Vec<_>>().join("\n"))
}

fn run_construct(ctx: &Ctx, out: &mut Artifacts) -> Result<String> {
    let model = ctx.model(default_bs()).to_d()?;
    let spec = ctx.cfg.payoff.clone().unwrap_or_else(call_k1);
    let cc = ctx.construction(0.05, 0.5, 1.5, 1.0);
    let (net, report) = construct::construct(&model, &spec, &cc)?;
    out.text("network.json", &net.to_json())?;
    envelope(ctx, Command::Construct, out, &report)?;
    Ok(format!(
        "n={} M={} L={} supError={} (target {}) impliedEpsilon={}",
        report.n, report.metrics.m, report.metrics.l, report.error.sup_error, report.target_epsilon, report.implied_epsilon
    ))
}

fn run_rate_study(ctx: &Ctx, out: &mut Artifacts) -> Result<String> {
    let model = ctx.model(default_bs()).to_d()?;
    let spec = ctx.cfg.payoff.clone().unwrap_or_else(call_k1);
    let cc = ctx.construction(0.05, 0.5, 1.5, 1.0);
    let n_list = ctx.cfg.n_list.clone().unwrap_or_else(|| (6..=14).map(|k| 1usize << k).collect());
    let trials = ctx.cfg.trials.unwrap_or(8);
    let study = construct::rate_study(&model, &spec, &cc, &n_list, trials)?;
    let rows: Vec<Vec<String>> = study.rows.iter().map(|r| vec![r.n.to_string(), f(r.mean_error), f(r.std_error), r.m.to_string()]).collect();
    out.csv("rate.csv", &["n", "meanError", "stdError", "M"], &rows)?;
    let pts: Vec<(f64, f64)> = study.rows.iter().map(|r| (r.n as f64, r.mean_error)).collect();
    out.text("rate.svg", &line_chart_svg("sup error vs n", "n", "mean sup error", &[("measured", pts)], true, true))?;
    envelope(ctx, Command::RateStudy, out, &study)?;
    Ok(format!("slope={} r2={}", study.fit.slope, study.fit.r2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepRow {
    pub d: usize,
    pub n: usize,
    pub m: usize,
    /// Mean sup error over the trials.
    pub error: f64,
    pub std_error: f64,
    pub oracle_bound: f64,
    pub met: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SeparableCheck {
    pub d: usize,
    pub max_deviation_in_se: f64,
    pub within_three_se: bool,
    pub points: Vec<(Vec<f64>, f64, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DimensionSweep {
    pub rows: Vec<SweepRow>,
    /// `ln M` against `ln d`; the slope is the fitted exponent.
    pub polynomial_fit: Option<RateFit>,
    /// `ln M` against `d`.
    pub exponential_fit: Option<RateFit>,
    pub polynomial_preferred: bool,
    pub separable: Option<SeparableCheck>,
}

/// Basket call with weights `1/d` on independent margins of `base`, and the
/// smallest sample count (by bisection on the trial-averaged error) whose networks meet
/// `target / headroom` on `[a, b]^d`.
pub fn dimension_sweep(base: &ModelConfig, a: f64, b: f64, tau: f64, sc: &SweepConfig, cc: &ConstructionConfig) -> Result<DimensionSweep> {
    if sc.d_list.is_empty() || !(sc.target > 0.0) || !(sc.headroom >= 1.0) || sc.n_min < 1 || sc.n_min >= sc.n_max || sc.trials == 0 {
        return Err(Error::config("sweep", "need dList, target > 0, headroom >= 1, 1 <= nMin < nMax and trials >= 1"));
    }
    let goal = sc.target / sc.headroom;
    let mut rows = vec![];
    let mut bound: Option<f64> = None;
    for &d in &sc.d_list {
        let model = ModelConfig { dim: d, ..base.clone() }.to_d()?;
        let b_d = model.triplet_bounds(2.0)?;
        match bound {
            Some(b0) if (b_d - b0).abs() > 1e-12 * b0.max(1.0) => {
                return Err(Error::InvalidArgument(format!("triplet bound {b_d} at d={d} differs from {b0}")));
            }
            _ => bound = Some(b_d),
        }
        let spec = PayoffSpec::BasketCall { weights: vec![1.0 / d as f64; d], k: 1.0 };
        let (phi, _) = payoff_net(&spec, d)?;
        let reference = construct::reference_grid(&model, &spec, tau, a, b, cc.grid_density(d), cc.lhs_points, cc.oracle_samples, cc.seed)?;
        let sampler = model.sampler(tau)?;
        let eval = |n: usize| construct::trial_errors(&phi, &sampler, &reference, cc, n, sc.trials);
        let (mut lo, mut hi) = (sc.n_min, sc.n_max);
        let (mut best, mut best_net) = eval(hi)?;
        let met = best.mean_error <= goal;
        if met {
            let (row_lo, net_lo) = eval(lo)?;
            if row_lo.mean_error <= goal {
                hi = lo;
                best = row_lo;
                best_net = net_lo;
            }
            while hi - lo > 1.max(lo / 64) {
                let mid = lo + (hi - lo) / 2;
                let (row, net) = eval(mid)?;
                if row.mean_error <= goal {
                    hi = mid;
                    best = row;
                    best_net = net;
                } else {
                    lo = mid;
                }
            }
        }
        rows.push(SweepRow {
            d,
            n: best.n,
            m: best_net.size(),
            error: best.mean_error,
            std_error: best.std_error,
            oracle_bound: reference.bounds.iter().cloned().fold(0.0, f64::max),
            met,
        });
    }
    let fits = (rows.len() >= 3).then(|| {
        let ld: Vec<f64> = rows.iter().map(|r| (r.d as f64).ln()).collect();
        let dd: Vec<f64> = rows.iter().map(|r| r.d as f64).collect();
        let lm: Vec<f64> = rows.iter().map(|r| (r.m as f64).ln()).collect();
        (RateFit::fit(&ld, &lm), RateFit::fit(&dd, &lm))
    });
    let polynomial_preferred = fits.as_ref().map_or(false, |(p, e)| p.r2 > e.r2);
    let separable = if sc.separable_d >= 1 { Some(separable_check(base, a, b, tau, sc.separable_d, sc.separable_points, cc)?) } else { None };
    let (polynomial_fit, exponential_fit) = match fits {
        Some((p, e)) => (Some(p), Some(e)),
        None => (None, None),
    };
    Ok(DimensionSweep { rows, polynomial_fit, exponential_fit, polynomial_preferred, separable })
}

/// `E[sum_i w_i (s_i e^{X_i} - K)^+]` by Monte Carlo in dimension `d` against the
/// sum of one-dimensional closed-form or Fourier prices.
pub fn separable_check(base: &ModelConfig, a: f64, b: f64, tau: f64, d: usize, points: usize, cc: &ConstructionConfig) -> Result<SeparableCheck> {
    let m1 = base.to_1d()?;
    let model = ModelConfig { dim: d, ..base.clone() }.to_d()?;
    let w = vec![1.0 / d as f64; d];
    let spec = PayoffSpec::SeparableCalls { weights: w.clone(), k: 1.0 };
    let (pts, _) = construct::evaluation_points(d, a, b, 2, points, rng::child_seed(cc.seed, 0x5e9a));
    let pts: Vec<Vec<f64>> = pts.into_iter().take(points).collect();
    let mc = oracle::price_mc_many(&model, &spec, tau, &pts, cc.oracle_samples, rng::child_seed(cc.seed, 0x5e9b))?;
    let mut rows = vec![];
    let mut worst: f64 = 0.0;
    for (p, r) in pts.iter().zip(&mc) {
        let one: Vec<f64> = oracle::price_1d(&m1, &PayoffSpec::Call { k: 1.0 }, tau, p)?.iter().map(|o| o.value).collect();
        let comp: f64 = one.iter().zip(&w).map(|(v, wi)| v * wi).sum();
        let se = r.std_error.unwrap_or(0.0);
        let dev = (r.value - comp).abs() / se.max(1e-300);
        worst = worst.max(dev);
        rows.push((p.clone(), r.value, comp, se));
    }
    Ok(SeparableCheck { d, max_deviation_in_se: worst, within_three_se: worst <= 3.0, points: rows })
}

fn run_dim_sweep(ctx: &Ctx, out: &mut Artifacts) -> Result<String> {
    let base = ctx.model(default_bs());
    let sc = ctx.cfg.sweep.clone().unwrap_or_default();
    let cc = ctx.construction(sc.target, 0.5, 1.5, 1.0);
    let tau = cc.maturity;
    let sweep = dimension_sweep(&base, cc.a, cc.b, tau, &sc, &cc)?;
    let rows: Vec<Vec<String>> = sweep
        .rows
        .iter()
        .map(|r| vec![r.d.to_string(), r.n.to_string(), r.m.to_string(), f(r.error), f(r.std_error), f(r.oracle_bound), r.met.to_string()])
        .collect();
    out.csv("dim_sweep.csv", &["d", "n", "M", "error", "stdError", "oracleBound", "met"], &rows)?;
    let pts: Vec<(f64, f64)> = sweep.rows.iter().map(|r| (r.d as f64, r.m as f64)).collect();
    out.text("dim_sweep.svg", &line_chart_svg("network size at fixed error", "d", "M", &[("M(d)", pts)], true, true))?;
    envelope(ctx, Command::DimSweep, out, &sweep)?;
    Ok(format!(
        "polynomial r2={:?} exponential r2={:?} exponent={:?} separable within 3 SE: {:?}",
        sweep.polynomial_fit.as_ref().map(|p| p.r2),
        sweep.exponential_fit.as_ref().map(|p| p.r2),
        sweep.polynomial_fit.as_ref().map(|p| p.slope),
        sweep.separable.as_ref().map(|s| s.within_three_se)
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
struct SpectralReport {
    delta: f64,
    decay: Option<RateFit>,
    oracle_bound: f64,
    rows: Vec<(usize, f64)>,
    emulations: Vec<spectral::SpectralEmulation>,
    gevrey: Vec<(u32, f64, f64, f64)>,
}

/// BS butterfly fixture of the spectral pipeline.
pub fn spectral_fixture() -> (ModelConfig, PayoffSpec) {
    (ModelConfig::black_scholes(0.3), PayoffSpec::Butterfly { k1: 0.8, k: 1.0, k2: 1.3 })
}

fn run_spectral(ctx: &Ctx, out: &mut Artifacts) -> Result<String> {
    let (fm, fs) = spectral_fixture();
    let mc = ctx.model(fm);
    let model = mc.to_1d()?;
    let spec = ctx.cfg.payoff.clone().unwrap_or(fs);
    let sector = match &ctx.cfg.sector {
        Some(s) => s.clone(),
        None => mc.default_sector()?,
    };
    let tau = ctx.cfg.tau.unwrap_or(0.25);
    let dom = ctx.cfg.domain.unwrap_or(BoxConfig { a: 0.5, b: 1.5 });
    let p_list = ctx.cfg.p_list.clone().unwrap_or_else(|| (1..=16).map(|i| 2 * i).collect());
    let delta_net = ctx.cfg.delta_net.unwrap_or(1e-6);
    let cheb = spectral::cheb_approx(&model, &spec, &sector, tau, dom.a, dom.b, &p_list)?;
    let mut emulations = vec![];
    for p in &p_list {
        emulations.push(spectral::spectral_emulate(&cheb, *p, delta_net)?.1);
    }
    let rows: Vec<Vec<String>> = cheb
        .rows
        .iter()
        .zip(&emulations)
        .map(|(r, e)| vec![r.p.to_string(), f(r.sup_error), e.m.to_string(), e.l.to_string(), f(e.measured_error)])
        .collect();
    out.csv("spectral.csv", &["p", "supError", "M", "L", "emulatedError"], &rows)?;
    let mut gevrey = vec![];
    if matches!(spec, PayoffSpec::Butterfly { .. }) {
        let v0 = spectral::log_payoff_l2(&spec)?;
        for k in 0..=10u32 {
            let bound = spectral::gevrey_bound(k, tau, &sector, v0);
            let (norm, err) = spectral::derivative_l2_norm(&model, &spec, tau, k)?;
            gevrey.push((k, bound, norm, err));
        }
        let g: Vec<Vec<String>> = gevrey.iter().map(|(k, b, n, e)| vec![k.to_string(), f(*b), f(*n), f(*e)]).collect();
        out.csv("gevrey.csv", &["k", "bound", "numericNorm", "numericError"], &g)?;
    }
    let pts: Vec<(f64, f64)> = cheb.rows.iter().map(|r| (r.p as f64, r.sup_error)).collect();
    out.text("spectral.svg", &line_chart_svg("Chebyshev sup error", "p", "error", &[("interpolant", pts)], false, true))?;
    let report = SpectralReport {
        delta: cheb.delta,
        decay: cheb.decay.clone(),
        oracle_bound: cheb.oracle_bound,
        rows: cheb.rows.iter().map(|r| (r.p, r.sup_error)).collect(),
        emulations,
        gevrey,
    };
    envelope(ctx, Command::Spectral, out, &report)?;
    Ok(format!("decay slope={:?} r2={:?}", cheb.decay.as_ref().map(|d| d.slope), cheb.decay.as_ref().map(|d| d.r2)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ChaosRun {
    pub tau: f64,
    pub tau0: f64,
    pub expansion: chaos::ChaosExpansion,
    pub study: chaos::SparseStudy,
    pub certificate: chaos::Certificate,
    pub max_ratio: f64,
    pub relu: Option<ChaosRelu>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ChaosRelu {
    pub n: usize,
    pub m: usize,
    pub l: usize,
    pub grid_error: f64,
    pub allowed: f64,
}

/// Coefficients, sparse errors, certificate and the ReLU emulation for the chaos fixture.
pub fn chaos_experiment(mc: &ModelConfig, cc: &ChaosConfig) -> Result<ChaosRun> {
    let d = cc.d;
    let model = ModelConfig { dim: d, ..mc.clone() }.to_d()?;
    let [k1, k, k2] = cc.butterfly;
    let v0 = LogPayoff::Tensor { factors: vec![PayoffSpec::Butterfly { k1, k, k2 }; d] };
    let sector = SymbolSector::new(cc.rho, cc.c1, cc.c1.max(0.5 * mc.sigma * mc.sigma) + mc.gamma.unwrap_or(0.0).abs(), mc.gamma.unwrap_or(0.0).abs())?;
    let t0 = chaos::tau0(d, cc.rho, cc.q, cc.c1);
    let tau = cc.tau_factor * t0;
    let cands = chaos::candidate_set(d, tau, &sector, cc.max_degree, 10 * cc.n_max)?;
    let expansion = chaos::taylor_coeffs(&model, &v0, tau, &sector, &cands)?;
    let max_ratio = expansion.entries.iter().map(|e| e.t.abs() / e.bound).fold(0.0, f64::max);
    let axis = linspace(-1.0, 1.0, cc.grid_per_dim);
    let mut xs: Vec<Vec<f64>> = vec![vec![]];
    for _ in 0..d {
        xs = xs.into_iter().flat_map(|p| axis.iter().map(move |v| [p.clone(), vec![*v]].concat())).collect();
    }
    let field = chaos::field_values(&model, &v0, tau, &sector, &xs)?;
    let n_list: Vec<usize> = (1..=cc.n_max).collect();
    let study = chaos::sparse_eval_and_error(&expansion, &n_list, &xs, &field);
    let mut certificate = chaos::summability_certificate(d, tau, cc.rho, cc.c1, expansion.v0hat_l1, cc.q);
    certificate.computed_sum = Some(expansion.entries.iter().map(|e| e.t.abs().powf(cc.q)).sum());
    let relu = if cc.relu_n >= 1 && d <= 3 {
        let set = chaos::build_index_set(&expansion, cc.relu_n);
        let net = chaos::sparse_to_relu(&expansion, &set, cc.delta_net)?;
        let grid_error = xs.iter().zip(&field).map(|(x, v)| (net.eval1(x) - v.0).abs()).fold(0.0, f64::max);
        let row = study.rows.iter().find(|r| r.n == set.len());
        let allowed = row.map_or(f64::INFINITY, |r| r.tail_bound + r.oracle_error) + cc.delta_net;
        let met = net.metrics();
        Some(ChaosRelu { n: set.len(), m: met.m, l: met.l, grid_error, allowed })
    } else {
        None
    };
    Ok(ChaosRun { tau, tau0: t0, expansion, study, certificate, max_ratio, relu })
}

/// Model of the chaos fixture: `A = I`, no drift, so `C1 = 1/2`.
pub fn chaos_fixture_model() -> ModelConfig {
    ModelConfig { gamma: Some(0.0), ..ModelConfig::black_scholes(1.0) }
}

fn run_chaos(ctx: &Ctx, out: &mut Artifacts) -> Result<String> {
    let mc = ctx.model(chaos_fixture_model());
    let cc = ctx.cfg.chaos.clone().unwrap_or_default();
    let r = chaos_experiment(&mc, &cc)?;
    let rows: Vec<Vec<String>> = r
        .study
        .rows
        .iter()
        .map(|x| vec![x.n.to_string(), f(x.sup_error), f(x.tail_bound), f(x.oracle_error), x.max_degree.to_string()])
        .collect();
    out.csv("chaos.csv", &["n", "supError", "tailBound", "oracleError", "maxDegree"], &rows)?;
    #[derive(Serialize)]
    struct Dump<'a> {
        nu: &'a [u32],
        t: f64,
        bound: f64,
    }
    let dump: Vec<Dump> = r.expansion.entries.iter().map(|e| Dump { nu: &e.nu, t: e.t, bound: e.bound }).collect();
    out.json("expansion.json", &dump)?;
    let pts: Vec<(f64, f64)> = r.study.rows.iter().map(|x| (x.n as f64, x.sup_error)).collect();
    let tb: Vec<(f64, f64)> = r.study.rows.iter().map(|x| (x.n as f64, x.tail_bound)).collect();
    out.text("chaos.svg", &line_chart_svg("sparse Taylor partial sums", "n", "sup error", &[("measured", pts), ("tail bound", tb)], true, true))?;
    envelope(ctx, Command::Chaos, out, &r)?;
    Ok(format!(
        "tau={} tau0={} max|t|/bound={} certificate finite={} degree constant={}",
        r.tau, r.tau0, r.max_ratio, r.certificate.finite, r.study.degree_constant
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BarronRun {
    pub norm: f64,
    pub evolved: Vec<(f64, f64)>,
    pub fits: Vec<BarronRow>,
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BarronRow {
    pub m: usize,
    pub error: f64,
    pub train_error: f64,
    pub bound: f64,
    pub active_units: usize,
    pub weights: usize,
    pub depth: usize,
    pub regularized: bool,
}

/// Barron norms of the Gaussian target and its evolutions, and two-layer fits for `m_list`.
pub fn barron_experiment(mc: &ModelConfig, bc: &BarronConfig, m_list: &[usize], seed: u64) -> Result<(BarronRun, ReluNetwork)> {
    let f = BarronFunction::gaussian(bc.d, bc.lambda)?;
    let norm = barron::barron_norm(&f)?;
    let model = ModelConfig { dim: bc.d, ..mc.clone() }.to_d()?;
    let evolved = bc.taus.iter().map(|t| barron::evolved_norm(&f, &model, *t).map(|v| (*t, v))).collect::<Result<Vec<_>>>()?;
    let target = |x: &[f64]| f.value(x).expect("Gaussian has values");
    let fits = barron::fit_two_layer(bc.d, &target, m_list, bc.method, &bc.fit, seed)?;
    let mut rows = vec![];
    let mut last = None;
    for fit in fits {
        let net = fit.to_network(bc.d)?;
        rows.push(BarronRow {
            m: fit.m,
            error: fit.l2pi_error,
            train_error: fit.train_error,
            bound: barron::two_layer_bound(bc.fit.radius, fit.m, norm),
            active_units: fit.active_units,
            weights: net.size(),
            depth: net.depth(),
            regularized: fit.regularized,
        });
        last = Some(net);
    }
    let usable: Vec<&BarronRow> = rows.iter().filter(|r| r.error > 0.0).collect();
    let slope = (usable.len() >= 2).then(|| {
        let m: Vec<f64> = usable.iter().map(|r| r.m as f64).collect();
        let e: Vec<f64> = usable.iter().map(|r| r.error).collect();
        RateFit::loglog(&m, &e).slope
    });
    Ok((BarronRun { norm, evolved, fits: rows, slope }, last.expect("nonempty m list")))
}

fn run_barron(ctx: &Ctx, out: &mut Artifacts) -> Result<String> {
    let mc = ctx.model(default_bs());
    let bc = ctx.cfg.barron.clone().unwrap_or_default();
    let m_list = ctx.cfg.m_list.clone().unwrap_or_else(|| (6..=12).map(|k| 1usize << k).collect());
    let (run, net) = barron_experiment(&mc, &bc, &m_list, ctx.seed)?;
    let rows: Vec<Vec<String>> = run.fits.iter().map(|r| vec![r.m.to_string(), f(r.error), f(r.bound)]).collect();
    out.csv("barron.csv", &["m", "error", "bound"], &rows)?;
    out.text("network.json", &net.to_json())?;
    let e: Vec<(f64, f64)> = run.fits.iter().map(|r| (r.m as f64, r.error)).collect();
    let b: Vec<(f64, f64)> = run.fits.iter().map(|r| (r.m as f64, r.bound)).collect();
    out.text("barron.svg", &line_chart_svg("two-layer fit", "m", "L2 error", &[("fit", e), ("bound", b)], true, true))?;
    envelope(ctx, Command::Barron, out, &run)?;
    Ok(format!("norm={} slope={:?}", run.norm, run.slope))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CalibResult {
    pub strikes: usize,
    pub epsilon: f64,
    /// Sup accuracy `sqrt(epsilon)` handed to the construction.
    pub delta: f64,
    pub mse: f64,
    pub weights: usize,
    pub layers: usize,
    pub a: f64,
    pub b: f64,
    pub construction: construct::ConstructionReport,
    pub points: Vec<(f64, f64, f64, f64)>,
}

/// `(1/N) sum_i (C_i / K_i - R(psi)(S0 / K_i))^2`.
pub fn calib_mse(net: &ReluNetwork, s0: f64, strikes: &[f64], prices: &[f64]) -> f64 {
    strikes.iter().zip(prices).map(|(k, c)| (c / k - net.eval1(&[s0 / k])).powi(2)).sum::<f64>() / strikes.len() as f64
}

/// Fits normalized call prices `C(T, K_i) / K_i` from the oracle with the
/// averaging network of the call payoff `(x - 1)^+` on `[min S0/K, max S0/K]`.
pub fn calib_experiment(mc: &ModelConfig, cal: &CalibConfig, tau: f64, base: &ConstructionConfig) -> Result<(ReluNetwork, CalibResult)> {
    if cal.strikes == 0 || !(cal.k_min > 0.0) || !(cal.k_min <= cal.k_max) || !(cal.epsilon > 0.0) {
        return Err(Error::config("calib", "need strikes >= 1, 0 < kMin <= kMax and epsilon > 0"));
    }
    let model = mc.to_1d()?;
    let strikes = if cal.strikes == 1 { vec![cal.k_min] } else { linspace(cal.k_min, cal.k_max, cal.strikes) };
    let prices: Vec<f64> = strikes
        .iter()
        .map(|k| oracle::price_1d(&model, &PayoffSpec::Call { k: *k }, tau, &[cal.s0]).map(|r| r[0].value))
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = strikes.iter().map(|k| cal.s0 / k).collect();
    let (mut a, mut b) = (xs.iter().cloned().fold(f64::INFINITY, f64::min), xs.iter().cloned().fold(0.0, f64::max));
    if b - a < 1e-9 {
        a *= 0.99;
        b *= 1.01;
    }
    let delta = cal.epsilon.sqrt();
    let cc = ConstructionConfig { epsilon: delta, a, b, maturity: tau, ..base.clone() };
    let (net, construction) = construct::construct(&model.to_d()?, &PayoffSpec::Call { k: 1.0 }, &cc)?;
    let mse = calib_mse(&net, cal.s0, &strikes, &prices);
    let points = strikes.iter().zip(&prices).map(|(k, c)| (*k, cal.s0 / k, c / k, net.eval1(&[cal.s0 / k]))).collect();
    let met = net.metrics();
    Ok((net, CalibResult { strikes: cal.strikes, epsilon: cal.epsilon, delta, mse, weights: met.m, layers: met.l, a, b, construction, points }))
}

/// Merton fixture `(sigma, lambda, muJ, sigmaJ) = (0.1, 1, -0.1, 0.15)` with martingale drift.
pub fn merton_fixture() -> ModelConfig {
    ModelConfig::merton(0.1, 1.0, -0.1, 0.15)
}

fn run_calib(ctx: &Ctx, out: &mut Artifacts) -> Result<String> {
    let mc = ctx.model(merton_fixture());
    let cal = ctx.cfg.calib.clone().unwrap_or_default();
    let tau = ctx.cfg.tau.unwrap_or(0.5);
    let cc = ctx.construction(cal.epsilon.sqrt(), 0.8, 1.25, tau);
    let (net, r) = calib_experiment(&mc, &cal, tau, &cc)?;
    let rows: Vec<Vec<String>> = r.points.iter().map(|(k, x, y, z)| vec![f(*k), f(*x), f(*y), f(*z)]).collect();
    out.csv("calib.csv", &["strike", "s0OverK", "target", "fitted"], &rows)?;
    out.text("network.json", &net.to_json())?;
    envelope(ctx, Command::Calib, out, &r)?;
    Ok(format!("N={} mse={} (epsilon {}) M={}", r.strikes, r.mse, r.epsilon, r.weights))
}
