//! Networks for option prices obtained by averaging the payoff network over
//! Monte-Carlo draws of the Levy increment, together with the constants that
//! control the sample count, the capping level and the network size.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::{exp_moment_bound, LevyModelD, Sampler};
use crate::oracle::{price_1d, price_mc_many, OracleKind, MC_BLOCK};
use crate::relu::{diag_rows, payoff_net, NetMetrics, PayoffConstants, PayoffSpec, ReluNetwork};
use crate::rng;
use crate::stats::{latin_hypercube, linspace, RateFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Sample count and capping level from the proof constants.
    Paper,
    /// User-supplied sample count; the implied accuracy is reported.
    Practical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct ConstructionConfig {
    pub epsilon: f64,
    pub a: f64,
    pub b: f64,
    pub maturity: f64,
    pub mode: Mode,
    pub n_override: Option<usize>,
    pub d_override: Option<f64>,
    pub attempts: usize,
    /// Grid density per coordinate; defaults to 1000, 64 and 16 points for
    /// `d = 1, 2, 3`.
    pub grid_points_per_dim: Option<usize>,
    /// Latin-hypercube points used instead of a grid when `d > 3`.
    pub lhs_points: usize,
    /// Monte-Carlo samples of the reference price when `d > 1`.
    pub oracle_samples: usize,
    /// Largest sample count that is actually executed.
    pub max_samples: usize,
    pub seed: u64,
}

impl Default for ConstructionConfig {
    fn default() -> Self {
        ConstructionConfig {
            epsilon: 0.01,
            a: 0.5,
            b: 1.5,
            maturity: 1.0,
            mode: Mode::Practical,
            n_override: None,
            d_override: None,
            attempts: 10,
            grid_points_per_dim: None,
            lhs_points: 256,
            oracle_samples: 1 << 16,
            max_samples: 1 << 22,
            seed: 0,
        }
    }
}

impl ConstructionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a < self.b && self.b.is_finite()) {
            return Err(Error::config("a", format!("need 0 < a < b < inf, got [{}, {}]", self.a, self.b)));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::config("epsilon", format!("{} is outside (0, 1]", self.epsilon)));
        }
        if !(self.maturity > 0.0 && self.maturity.is_finite()) {
            return Err(Error::config("maturity", format!("{} must be positive", self.maturity)));
        }
        if self.attempts == 0 {
            return Err(Error::config("attempts", "must be at least 1"));
        }
        if self.grid_points_per_dim.is_some_and(|g| g < 2) {
            return Err(Error::config("gridPointsPerDim", "need at least 2 points"));
        }
        if self.n_override == Some(0) {
            return Err(Error::config("nOverride", "must be at least 1"));
        }
        Ok(())
    }

    pub fn grid_density(&self, d: usize) -> usize {
        self.grid_points_per_dim.unwrap_or(match d {
            1 => 1000,
            2 => 64,
            _ => 16,
        })
    }
}

/// Proof constants and the hyperparameters they imply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConstantsReport {
    pub d: usize,
    pub payoff: PayoffConstants,
    /// Dimension-uniform triplet bound `B`.
    pub triplet_bound: f64,
    pub c1: f64,
    /// Capping constant; absent in one dimension.
    pub c_tilde1: Option<f64>,
    pub c2: f64,
    pub eps_bar: f64,
    /// Sample count as a float; it can exceed every integer type.
    pub n: f64,
    /// Capping level `D`; absent in one dimension or when capping is free.
    pub cap: Option<f64>,
    pub kappa: f64,
    pub d_exponent: f64,
    pub eps_exponent: f64,
    pub size_bound: f64,
    /// `exp(T (5 p^2 B / 2 + p^2 e^p B))`.
    pub moment_bound: f64,
}

/// Constants of the averaging construction for accuracy `epsilon` on `[a, b]^d`.
///
/// In one dimension `c1 = c (1 + b E[e^{X_T}])`, `c2 = 4 b c E[e^{2 X_T}]^{1/2}`,
/// `eps_bar = eps / (c1 + 1)`, `n = ceil((2 c2 / eps_bar)^2)` and
/// `M <= c (1 + 4 c2^2) (c1 + 1)^{2+q} eps^{-2-q}`. In higher dimension the
/// capped construction is used:
/// `c1 = c max(1, b^p) (1 + sup_i E[e^{p X_{T,i}}])`,
/// `c~1 = 2 b c exp(5 T p B + 2 T e^p p B)`,
/// `c2 = 4 sqrt(pi / 2) c b exp(5 B T p / 2 + B T p e^p)`,
/// `eps_bar = eps / (c1 d^{qt + p/2 + 1/2} + 2)`, `n = ceil((2 c2 d^{qt+1} / eps_bar)^2)`,
/// `D = log(d^{qt+1} c~1 / eps_bar)`.
pub fn constants_report(model: &LevyModelD, pc: &PayoffConstants, t: f64, epsilon: f64, b: f64) -> Result<ConstantsReport> {
    let d = model.dim();
    let df = d as f64;
    let PayoffConstants { c, q, q_tilde: qt, p, .. } = *pc;
    let triplet_bound = model.triplet_bounds(p)?;
    let moment_bound = exp_moment_bound(p, t, triplet_bound);
    let sample_count = |ratio: f64| (ratio * ratio).ceil().max(1.0);
    if d == 1 {
        let m1 = model.exp_moment(0, 1.0, t)?;
        let m2 = model.exp_moment(0, 2.0, t)?;
        let c1 = c * (1.0 + b * m1);
        let c2 = 4.0 * b * c * m2.sqrt();
        let eps_bar = epsilon / (c1 + 1.0);
        let kappa = c * (1.0 + 4.0 * c2 * c2) * (c1 + 1.0).powf(2.0 + q);
        return Ok(ConstantsReport {
            d,
            payoff: *pc,
            triplet_bound,
            c1,
            c_tilde1: None,
            c2,
            eps_bar,
            n: sample_count(2.0 * c2 / eps_bar),
            cap: None,
            kappa,
            d_exponent: 0.0,
            eps_exponent: 2.0 + q,
            size_bound: kappa * epsilon.powf(-2.0 - q),
            moment_bound,
        });
    }
    let sup_moment = model.sup_exp_moment(p, t)?;
    let e_p = p.exp();
    let c1 = c * b.powf(p).max(1.0) * (1.0 + sup_moment);
    let c_tilde1 = 2.0 * b * c * (t * (5.0 * p * triplet_bound + 2.0 * e_p * p * triplet_bound)).exp();
    let c2 = 4.0 * (std::f64::consts::PI / 2.0).sqrt() * c * b
        * (2.5 * triplet_bound * t * p + triplet_bound * t * p * e_p).exp();
    let growth_exp = qt + 0.5 * p + 0.5;
    let eps_bar = epsilon / (c1 * df.powf(growth_exp) + 2.0);
    let n = sample_count(2.0 * c2 * df.powf(qt + 1.0) / eps_bar);
    let cap = (c_tilde1 > 0.0).then(|| (df.powf(qt + 1.0) * c_tilde1 / eps_bar).ln());
    let kappa = (1.0 + 4.0 * c2 * c2) * c * (c1 + 2.0).powf(2.0 + q);
    let d_exponent = growth_exp * (2.0 + q) + 3.0 * qt + 2.0;
    Ok(ConstantsReport {
        d,
        payoff: *pc,
        triplet_bound,
        c1,
        c_tilde1: Some(c_tilde1),
        c2,
        eps_bar,
        n,
        cap,
        kappa,
        d_exponent,
        eps_exponent: 2.0 + q,
        size_bound: kappa * df.powf(d_exponent) * epsilon.powf(-2.0 - q),
        moment_bound,
    })
}

/// `n` draws of `X_T`; block `j` of `MC_BLOCK` draws uses stream `j` of `seed`,
/// so the first `m` draws do not depend on `n >= m` or on the thread count.
pub fn draw_increments(sampler: &Sampler, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let d = sampler.dim();
    let blocks = n.div_ceil(MC_BLOCK);
    (0..blocks)
        .into_par_iter()
        .flat_map_iter(|blk| {
            let mut rng = rng::stream(seed, blk as u64);
            let count = MC_BLOCK.min(n - blk * MC_BLOCK);
            (0..count)
                .map(|_| {
                    let mut x = vec![0.0; d];
                    sampler.sample_into(&mut rng, &mut x);
                    x
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// `s -> (1/n) sum_k R(phi)(s e^{min(x_k, D)})` as a single network.
pub fn average_over_samples(phi: &ReluNetwork, samples: &[Vec<f64>], cap: Option<f64>) -> Result<ReluNetwork> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::InvalidArgument("no samples to average over".into()));
    }
    let d = phi.input_dim();
    let nets = vec![phi.clone(); n];
    let w = vec![1.0 / n as f64; n];
    let diag: Vec<Vec<Vec<f64>>> = samples
        .iter()
        .map(|x| {
            let g: Vec<f64> = x.iter().map(|v| cap.map_or(*v, |c| v.min(c)).exp()).collect();
            diag_rows(&g)
        })
        .collect();
    let shift = vec![vec![0.0; d]; n];
    ReluNetwork::average(&nets, &w, &diag, &shift)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sampling {
    Grid,
    LatinHypercube,
}

/// Reference prices on the evaluation points of the box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReferenceGrid {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub bounds: Vec<f64>,
    pub sampling: Sampling,
    pub kind: OracleKind,
}

/// Evaluation points of `[a, b]^d`: a tensor grid for `d <= 3`, a Latin
/// hypercube otherwise.
pub fn evaluation_points(d: usize, a: f64, b: f64, per_dim: usize, lhs_points: usize, seed: u64) -> (Vec<Vec<f64>>, Sampling) {
    if d <= 3 {
        let axis = linspace(a, b, per_dim);
        let mut pts: Vec<Vec<f64>> = vec![vec![]];
        for _ in 0..d {
            pts = pts
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        (pts, Sampling::Grid)
    } else {
        let mut r = rng::stream(seed, u64::MAX);
        let unit = latin_hypercube(lhs_points, d, &mut r);
        let pts = unit.into_iter().map(|u| u.into_iter().map(|v| a + (b - a) * v).collect()).collect();
        (pts, Sampling::LatinHypercube)
    }
}

/// Reference prices on the evaluation points. One-dimensional models use the
/// closed-form or Fourier oracle, otherwise Monte Carlo with common random numbers.
#[allow(clippy::too_many_arguments)]
pub fn reference_grid(
    model: &LevyModelD,
    spec: &PayoffSpec,
    tau: f64,
    a: f64,
    b: f64,
    per_dim: usize,
    lhs_points: usize,
    oracle_samples: usize,
    seed: u64,
) -> Result<ReferenceGrid> {
    let d = model.dim();
    let (points, sampling) = evaluation_points(d, a, b, per_dim, lhs_points, seed);
    let one_d = matches!(spec, PayoffSpec::Call { .. } | PayoffSpec::Put { .. } | PayoffSpec::Butterfly { .. } | PayoffSpec::Constant { .. });
    let res = match model.marginal_1d(0) {
        Some(m) if d == 1 && one_d => {
            let s: Vec<f64> = points.iter().map(|p| p[0]).collect();
            price_1d(&m, spec, tau, &s)?
        }
        _ => price_mc_many(model, spec, tau, &points, oracle_samples, rng::child_seed(seed, 0x0bac1e))?,
    };
    let kind = res.first().map_or(OracleKind::Analytic, |r| r.kind);
    Ok(ReferenceGrid {
        points,
        values: res.iter().map(|r| r.value).collect(),
        bounds: res.iter().map(|r| r.error_bound).collect(),
        sampling,
        kind,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SupError {
    pub sup_error: f64,
    pub argmax: Vec<f64>,
    /// Largest oracle error bound over the evaluated points.
    pub oracle_bound: f64,
    pub points: usize,
    pub sampling: Sampling,
}

/// Largest deviation of the network from the reference prices.
pub fn sup_error(net: &ReluNetwork, reference: &ReferenceGrid) -> SupError {
    let errs: Vec<f64> = reference
        .points
        .par_iter()
        .zip(reference.values.par_iter())
        .map(|(p, v)| (net.eval1(p) - v).abs())
        .collect();
    let (imax, &emax) = errs
        .iter()
        .enumerate()
        .fold((0, &0.0), |acc, (i, e)| if *e > *acc.1 { (i, e) } else { acc });
    SupError {
        sup_error: emax,
        argmax: reference.points.get(imax).cloned().unwrap_or_default(),
        oracle_bound: reference.bounds.iter().cloned().fold(0.0, f64::max),
        points: reference.points.len(),
        sampling: reference.sampling,
    }
}

/// Grid sup error of `net` against the pricing oracle on `[a, b]^d`.
#[allow(clippy::too_many_arguments)]
pub fn measure_sup_error(
    net: &ReluNetwork,
    model: &LevyModelD,
    spec: &PayoffSpec,
    tau: f64,
    a: f64,
    b: f64,
    per_dim: usize,
    lhs_points: usize,
    oracle_samples: usize,
    seed: u64,
) -> Result<SupError> {
    let reference = reference_grid(model, spec, tau, a, b, per_dim, lhs_points, oracle_samples, seed)?;
    Ok(sup_error(net, &reference))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConstructionReport {
    pub mode: Mode,
    pub target_epsilon: f64,
    pub constants: ConstantsReport,
    pub n: usize,
    pub cap: Option<f64>,
    /// `eps_bar` for which `n` is the proof's sample count.
    pub implied_eps_bar: f64,
    /// Accuracy guaranteed by the proof at the executed `n` and `D`.
    pub implied_epsilon: f64,
    pub metrics: NetMetrics,
    pub payoff_size: usize,
    pub error: SupError,
    pub attempts_used: usize,
    pub best_attempt: usize,
    pub seed: u64,
    pub predicted_size_bound: f64,
}

/// Accuracy implied by running the construction with `n` samples and cap `D`.
fn implied_accuracy(k: &ConstantsReport, n: usize, cap: Option<f64>) -> (f64, f64) {
    let df = k.d as f64;
    let PayoffConstants { q_tilde: qt, p, .. } = k.payoff;
    let nf = n as f64;
    if k.d == 1 {
        let eps_bar = 2.0 * k.c2 / nf.sqrt();
        return (eps_bar, eps_bar * (k.c1 + 1.0));
    }
    let stat = 2.0 * k.c2 * df.powf(qt + 1.0) / nf.sqrt();
    let capping = match (k.c_tilde1, cap) {
        (Some(ct), Some(dc)) => ct * (-dc).exp() * df.powf(qt + 1.0),
        (Some(ct), None) => if ct > 0.0 { f64::INFINITY } else { 0.0 },
        _ => 0.0,
    };
    let eps_bar = stat.max(capping);
    (eps_bar, eps_bar * (k.c1 * df.powf(qt + 0.5 * p + 0.5) + 2.0))
}

/// Averaging construction of a network approximating `s -> E[phi(s e^{X_T})]`
/// on `[a, b]^d`. Draws are resampled until the measured sup error meets
/// `epsilon`, up to `attempts` times; the best attempt is kept.
pub fn construct(model: &LevyModelD, spec: &PayoffSpec, cfg: &ConstructionConfig) -> Result<(ReluNetwork, ConstructionReport)> {
    cfg.validate()?;
    let d = model.dim();
    let (phi, pc) = payoff_net(spec, d)?;
    let constants = constants_report(model, &pc, cfg.maturity, cfg.epsilon, cfg.b)?;
    let (n, cap) = match cfg.mode {
        Mode::Paper => {
            if constants.n > cfg.max_samples as f64 {
                return Err(Error::InvalidArgument(format!(
                    "proof sample count n = {:.3e} exceeds maxSamples = {}",
                    constants.n, cfg.max_samples
                )));
            }
            (constants.n as usize, if d >= 2 { constants.cap } else { None })
        }
        Mode::Practical => {
            let n = cfg.n_override.unwrap_or(4096);
            if n > cfg.max_samples {
                return Err(Error::config("nOverride", format!("{n} exceeds maxSamples = {}", cfg.max_samples)));
            }
            (n, if d >= 2 { Some(cfg.d_override.unwrap_or((n as f64).ln())) } else { None })
        }
    };
    let reference = reference_grid(
        model,
        spec,
        cfg.maturity,
        cfg.a,
        cfg.b,
        cfg.grid_density(d),
        cfg.lhs_points,
        cfg.oracle_samples,
        cfg.seed,
    )?;
    let sampler = model.sampler(cfg.maturity)?;
    let mut best: Option<(ReluNetwork, SupError, usize)> = None;
    let mut used = 0;
    for attempt in 0..cfg.attempts {
        used = attempt + 1;
        let samples = draw_increments(&sampler, n, rng::child_seed(cfg.seed, attempt as u64));
        let net = average_over_samples(&phi, &samples, cap)?;
        let err = sup_error(&net, &reference);
        let hit = err.sup_error <= cfg.epsilon;
        if best.as_ref().map_or(true, |b| err.sup_error < b.1.sup_error) {
            best = Some((net, err, attempt));
        }
        if hit {
            break;
        }
    }
    let (net, error, best_attempt) = best.expect("at least one attempt");
    if error.sup_error > cfg.epsilon {
        return Err(Error::AttemptsExhausted { attempts: cfg.attempts, best: error.sup_error });
    }
    let (implied_eps_bar, implied_epsilon) = implied_accuracy(&constants, n, cap);
    let report = ConstructionReport {
        mode: cfg.mode,
        target_epsilon: cfg.epsilon,
        predicted_size_bound: constants.size_bound,
        constants,
        n,
        cap,
        implied_eps_bar,
        implied_epsilon,
        metrics: net.metrics(),
        payoff_size: phi.size(),
        error,
        attempts_used: used,
        best_attempt,
        seed: cfg.seed,
    };
    Ok((net, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RateRow {
    pub n: usize,
    pub mean_error: f64,
    /// Standard error of `mean_error` across trials.
    pub std_error: f64,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RateStudy {
    pub rows: Vec<RateRow>,
    pub fit: RateFit,
    pub trials: usize,
    pub seed: u64,
}

/// Mean grid sup error of independent constructions for each sample count,
/// and the log-log slope of error against `n`.
/// Mean and standard error of the sup error over `trials` independent draws of
/// `n` increments; trial `t` uses seed `child(child(seed, t), n)`. Also returns
/// the last network.
pub fn trial_errors(
    phi: &ReluNetwork,
    sampler: &Sampler,
    reference: &ReferenceGrid,
    cfg: &ConstructionConfig,
    n: usize,
    trials: usize,
) -> Result<(RateRow, ReluNetwork)> {
    if trials == 0 {
        return Err(Error::config("trials", "must be at least 1"));
    }
    let d = phi.input_dim();
    let cap = if d >= 2 { Some(cfg.d_override.unwrap_or((n as f64).ln())) } else { None };
    let mut errs = Vec::with_capacity(trials);
    let mut last = None;
    for t in 0..trials {
        let seed = rng::child_seed(rng::child_seed(cfg.seed, t as u64), n as u64);
        let samples = draw_increments(sampler, n, seed);
        let net = average_over_samples(phi, &samples, cap)?;
        errs.push(sup_error(&net, reference).sup_error);
        last = Some(net);
    }
    let net = last.expect("trials >= 1");
    let tf = trials as f64;
    let mean = errs.iter().sum::<f64>() / tf;
    let var = if trials > 1 { errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (tf - 1.0) } else { 0.0 };
    Ok((RateRow { n, mean_error: mean, std_error: (var / tf).sqrt(), m: net.size() }, net))
}

pub fn rate_study(
    model: &LevyModelD,
    spec: &PayoffSpec,
    cfg: &ConstructionConfig,
    n_list: &[usize],
    trials: usize,
) -> Result<RateStudy> {
    cfg.validate()?;
    if n_list.len() < 2 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config("nList", "need at least two increasing sample counts"));
    }
    if trials == 0 {
        return Err(Error::config("trials", "must be at least 1"));
    }
    let d = model.dim();
    let (phi, _) = payoff_net(spec, d)?;
    let reference = reference_grid(
        model,
        spec,
        cfg.maturity,
        cfg.a,
        cfg.b,
        cfg.grid_density(d),
        cfg.lhs_points,
        cfg.oracle_samples,
        cfg.seed,
    )?;
    let sampler = model.sampler(cfg.maturity)?;
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        rows.push(trial_errors(&phi, &sampler, &reference, cfg, n, trials)?.0);
    }
    let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let es: Vec<f64> = rows.iter().map(|r| r.mean_error).collect();
    Ok(RateStudy { fit: RateFit::loglog(&ns, &es), rows, trials, seed: cfg.seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::{CommonJump, JumpLaw, LevyModel1D};
    use crate::oracle::bs_call;
    use crate::rng::stream;
    use rand::Rng;

    fn bs1() -> LevyModelD {
        LevyModel1D::black_scholes(0.2, -0.02).unwrap().to_d().unwrap()
    }

    #[test]
    fn one_dimensional_constants() {
        let (_, pc) = payoff_net(&PayoffSpec::Call { k: 1.0 }, 1).unwrap();
        let k = constants_report(&bs1(), &pc, 1.0, 0.1, 1.5).unwrap();
        assert!((k.c1 - 7.5).abs() < 1e-12);
        let c2 = 4.0 * 1.5 * 3.0 * 0.04f64.exp().sqrt();
        assert!((k.c2 - c2).abs() < 1e-12);
        assert_eq!(k.eps_exponent, 2.0);
        assert_eq!(k.n, ((2.0 * c2 / (0.1 / 8.5)) as f64).powi(2).ceil());
    }

    #[test]
    fn zero_payoff_degenerates() {
        let (_, pc) = payoff_net(&PayoffSpec::Constant { c: 0.0 }, 1).unwrap();
        let k = constants_report(&bs1(), &pc, 1.0, 0.1, 1.5).unwrap();
        assert_eq!((k.c1, k.c2, k.n), (0.0, 0.0, 1.0));
        let m2 = LevyModelD::independent(&[LevyModel1D::black_scholes(0.2, -0.02).unwrap(); 2]).unwrap();
        let (_, pc2) = payoff_net(&PayoffSpec::Constant { c: 0.0 }, 2).unwrap();
        let k2 = constants_report(&m2, &pc2, 1.0, 0.1, 1.5).unwrap();
        assert_eq!((k2.n, k2.cap), (1.0, None));
    }

    #[test]
    fn constant_payoff_is_exact() {
        let cfg = ConstructionConfig { n_override: Some(37), grid_points_per_dim: Some(50), ..Default::default() };
        let (net, rep) = construct(&bs1(), &PayoffSpec::Constant { c: 0.3 }, &cfg).unwrap();
        assert!(rep.error.sup_error < 1e-15);
        assert!((net.eval1(&[0.77]) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn realization_identity_and_size_law() {
        let model = LevyModelD::new(
            vec![vec![0.04, 0.01], vec![0.01, 0.09]],
            vec![-0.02, -0.05],
            vec![Some(JumpLaw::Merton { lambda: 0.5, mu_j: -0.1, sigma_j: 0.1 }), None],
            Some(CommonJump { lambda: 0.3, beta: vec![1.0, 0.5], mu: 0.0, sigma: 0.2 }),
        )
        .unwrap();
        let spec = PayoffSpec::BasketCall { weights: vec![0.5, 0.5], k: 1.0 };
        let (phi, _) = payoff_net(&spec, 2).unwrap();
        let samples = draw_increments(&model.sampler(0.5).unwrap(), 300, 11);
        let cap = Some(0.2);
        let net = average_over_samples(&phi, &samples, cap).unwrap();
        assert!(net.size() <= 300 * phi.size());
        let mut r = stream(5, 0);
        for _ in 0..100 {
            let s = vec![r.gen_range(0.5..1.5), r.gen_range(0.5..1.5)];
            let direct: f64 = samples
                .iter()
                .map(|x| spec.eval(&[s[0] * x[0].min(0.2).exp(), s[1] * x[1].min(0.2).exp()]))
                .sum::<f64>()
                / 300.0;
            assert!((net.eval1(&s) - direct).abs() <= 1e-10 * (1.0 + direct.abs()));
        }
    }

    #[test]
    fn draws_are_prefix_stable() {
        let s = bs1().sampler(1.0).unwrap();
        let a = draw_increments(&s, 5000, 3);
        let b = draw_increments(&s, 9000, 3);
        assert_eq!(a[..], b[..5000]);
    }

    #[test]
    fn bs_call_construction_meets_target() {
        let cfg = ConstructionConfig { n_override: Some(4096), attempts: 3, ..Default::default() };
        let (net, rep) = construct(&bs1(), &PayoffSpec::Call { k: 1.0 }, &cfg).unwrap();
        assert!(rep.error.sup_error <= 0.01, "{}", rep.error.sup_error);
        assert_eq!(net.size(), 3 * 4096);
        let s = rep.error.argmax[0];
        assert!(((net.eval1(&[s]) - bs_call(s, 1.0, 0.2, -0.02, 1.0)).abs() - rep.error.sup_error).abs() < 1e-12);
        let (net2, _) = construct(&bs1(), &PayoffSpec::Call { k: 1.0 }, &cfg).unwrap();
        assert_eq!(net.to_json(), net2.to_json());
    }

    #[test]
    fn paper_mode_refuses_huge_n() {
        let cfg = ConstructionConfig { mode: Mode::Paper, ..Default::default() };
        assert!(matches!(construct(&bs1(), &PayoffSpec::Call { k: 1.0 }, &cfg), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn exhausted_attempts_report_best() {
        let cfg = ConstructionConfig { n_override: Some(4), attempts: 2, epsilon: 1e-6, grid_points_per_dim: Some(20), ..Default::default() };
        match construct(&bs1(), &PayoffSpec::Call { k: 1.0 }, &cfg) {
            Err(Error::AttemptsExhausted { attempts: 2, best }) => assert!(best > 1e-6),
            other => panic!("unexpected {other:?}"),
        }
    }
}
