//! Reference prices `u(tau, s) = E[phi(s exp(X_tau))]` (zero interest rate)
//! and spatial derivatives of the log-price field.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::{LevyModel1D, LevyModelD, LevyVariant};
use crate::quad::GaussLegendre;
use crate::relu::PayoffSpec;
use crate::rng;
use crate::stats::norm_cdf;

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;
/// Damping exponent of the Carr-Madan call representation.
pub const CARR_MADAN_ALPHA: f64 = 0.75;
/// Samples per Monte-Carlo block; block `b` uses stream `b` of the seed.
pub const MC_BLOCK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleKind {
    Analytic,
    Fourier,
    MonteCarlo,
}

impl std::fmt::Display for OracleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            OracleKind::Analytic => "Analytic",
            OracleKind::Fourier => "Fourier",
            OracleKind::MonteCarlo => "MonteCarlo",
        };
        f.write_str(s)
    }
}

/// Price with an error bound; for Monte Carlo the bound is three standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OracleResult {
    pub value: f64,
    pub error_bound: f64,
    pub kind: OracleKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocks: Option<usize>,
}

impl OracleResult {
    fn exact(value: f64, error_bound: f64, kind: OracleKind) -> Self {
        OracleResult { value, error_bound, kind, std_error: None, samples: None, seed: None, blocks: None }
    }
}

/// `E[(F e^{Z v - v^2/2} - K)^+]` for standard normal `Z`: Black's formula on a forward.
pub fn black_forward_call(forward: f64, k: f64, v: f64) -> f64 {
    if v <= 0.0 {
        return (forward - k).max(0.0);
    }
    if k <= 0.0 {
        return forward - k;
    }
    let d1 = ((forward / k).ln() + 0.5 * v * v) / v;
    forward * norm_cdf(d1) - k * norm_cdf(d1 - v)
}

/// Black-Scholes call under `X_tau ~ N(gamma tau, sigma^2 tau)`.
pub fn bs_call(s: f64, k: f64, sigma: f64, gamma: f64, tau: f64) -> f64 {
    let forward = s * (gamma * tau + 0.5 * sigma * sigma * tau).exp();
    black_forward_call(forward, k, sigma * tau.sqrt())
}

/// Merton call as a Poisson mixture of Black prices, truncated at `terms` jumps.
/// `gamma` is the drift without jump compensation, see
/// [`LevyModel1D::uncompensated_drift`].
#[allow(clippy::too_many_arguments)]
pub fn merton_call(s: f64, k: f64, sigma: f64, gamma: f64, lambda: f64, mu_j: f64, sigma_j: f64, tau: f64, terms: usize) -> f64 {
    let lt = lambda * tau;
    let mut total = 0.0;
    let mut log_w = -lt;
    for n in 0..terms {
        if n > 0 {
            log_w += lt.ln() - (n as f64).ln();
        }
        if lt == 0.0 && n > 0 {
            break;
        }
        let nf = n as f64;
        let var = sigma * sigma * tau + nf * sigma_j * sigma_j;
        let forward = s * (gamma * tau + nf * mu_j + 0.5 * var).exp();
        total += log_w.exp() * black_forward_call(forward, k, var.sqrt());
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ClosedFormParams {
    BlackScholesCall { s: f64, k: f64, sigma: f64, gamma: f64, tau: f64 },
    #[serde(rename_all = "camelCase")]
    MertonCall { s: f64, k: f64, sigma: f64, gamma: f64, lambda: f64, mu_j: f64, sigma_j: f64, tau: f64 },
}

/// Standard analytic reference prices.
pub fn closed_form_reference(p: &ClosedFormParams) -> f64 {
    match *p {
        ClosedFormParams::BlackScholesCall { s, k, sigma, gamma, tau } => bs_call(s, k, sigma, gamma, tau),
        ClosedFormParams::MertonCall { s, k, sigma, gamma, lambda, mu_j, sigma_j, tau } => {
            merton_call(s, k, sigma, gamma, lambda, mu_j, sigma_j, tau, 50)
        }
    }
}

/// Truncated half-line integral of an oscillatory integrand with envelope control.
struct HalfLine {
    upper: f64,
    tail: f64,
}

/// Chooses the truncation point by doubling until the tail proxy
/// `int_U^{2U} env + 2U env(2U)` falls below `tol`.
fn choose_upper<E: Fn(f64) -> f64>(env: E, start: f64, tol: f64, max: f64) -> HalfLine {
    let rule = GaussLegendre::new(16);
    let mut u = start;
    loop {
        let tail = rule.composite(u, 2.0 * u, 8, &env) + 2.0 * u * env(2.0 * u);
        if tail <= tol || u >= max {
            return HalfLine { upper: u, tail };
        }
        u = (2.0 * u).min(max);
    }
}

/// Integrates `f` over [0, upper] with panels of width at most `width`; returns
/// the value with a 32-point rule and the discrepancy against a 24-point rule.
fn integrate_half<F: Fn(f64) -> f64 + Sync>(f: F, upper: f64, width: f64) -> (f64, f64) {
    let panels = ((upper / width).ceil() as usize).max(1);
    let hi = GaussLegendre::new(32);
    let lo = GaussLegendre::new(24);
    let h = upper / panels as f64;
    let parts: Vec<(f64, f64)> = (0..panels)
        .into_par_iter()
        .map(|p| {
            let a = p as f64 * h;
            (hi.integrate(a, a + h, &f), lo.integrate(a, a + h, &f))
        })
        .collect();
    let v1 = parts.iter().map(|p| p.0).sum::<f64>();
    let v2 = parts.iter().map(|p| p.1).sum::<f64>();
    (v1, (v1 - v2).abs())
}

/// Call price `E[(s e^{X_tau} - K)^+]` by the damped Fourier representation.
pub fn call_fourier(model: &LevyModel1D, k: f64, tau: f64, s: f64) -> Result<OracleResult> {
    let alpha = CARR_MADAN_ALPHA;
    model.log_mgf(alpha + 1.0).map_err(|e| {
        Error::DampingFailure(format!("E[S^(1+{alpha})] is not finite: {e}"))
    })?;
    // K * E[(e^{x + X} - 1)^+] with x = ln(s / K)
    let x = (s / k).ln();
    let integrand = |u: f64| -> Complex64 {
        let v = Complex64::new(u, -(alpha + 1.0));
        let phi = (Complex64::new(0.0, 1.0) * v * x - tau * model.symbol_complex(v)).exp();
        phi / Complex64::new(alpha * alpha + alpha - u * u, (2.0 * alpha + 1.0) * u)
    };
    let hl = choose_upper(|u| integrand(u).norm(), 16.0, 1e-14, 2e4);
    let (v, disc) = integrate_half(|u| integrand(u).re, hl.upper, 2.0);
    let scale = k / std::f64::consts::PI;
    let value = scale * v;
    Ok(OracleResult::exact(value, scale * (disc + hl.tail) + 1e-15 * value.abs(), OracleKind::Fourier))
}

/// Bound `TV` with `|v0_hat(xi)| <= TV / xi^2` for a continuous piecewise-linear-in-x
/// or smooth compactly supported log payoff (unitary transform).
fn butterfly_decay_constant(k1: f64, k: f64, k2: f64) -> f64 {
    let slope = (k - k1) / (k2 - k);
    let jumps = k1 + (1.0 + slope) * k + slope * k2;
    let smooth = (k - k1) + slope * (k2 - k);
    (jumps + smooth) / SQRT_2PI
}

/// Options for the Fourier inversion of the log-price field.
#[derive(Debug, Clone, Copy)]
struct FieldOptions {
    tail_tol: f64,
    max_freq: f64,
    fail_above: f64,
}

/// `D^k_x v(tau, x) = (2 pi)^{-1/2} int (i xi)^k e^{i x xi - tau psi(xi)} v0_hat(xi) dxi`
/// at each `x`, given `v0_hat` on the quadrature nodes via `vhat`.
fn fourier_field<V>(
    model: &LevyModel1D,
    vhat: V,
    decay: f64,
    tau: f64,
    k: u32,
    xs: &[f64],
    opts: FieldOptions,
) -> Result<Vec<(f64, f64)>>
where
    V: Fn(&[f64]) -> Vec<Complex64>,
{
    let env = |xi: f64| {
        let damp = (-tau * model.symbol(xi).re).exp();
        2.0 * decay * damp * xi.powi(k as i32) / (xi * xi).max(1.0) / SQRT_2PI
    };
    let hl = choose_upper(env, 8.0, opts.tail_tol, opts.max_freq);
    if hl.tail > opts.fail_above {
        return Err(Error::SectorViolation(format!(
            "exp(-tau Re psi) does not decay enough: tail {:.3e} at |xi| = {}",
            hl.tail, hl.upper
        )));
    }
    let panels = ((hl.upper / 2.0).ceil() as usize).max(1);
    let rule_hi = GaussLegendre::new(32);
    let rule_lo = GaussLegendre::new(24);
    let (n_hi, w_hi) = rule_hi.composite_points(0.0, hl.upper, panels);
    let (n_lo, w_lo) = rule_lo.composite_points(0.0, hl.upper, panels);
    let ik = Complex64::new(0.0, 1.0).powu(k);
    let weights = |nodes: &[f64]| -> Vec<Complex64> {
        let vh = vhat(nodes);
        nodes
            .par_iter()
            .zip(vh.par_iter())
            .map(|(&xi, v)| ik * xi.powi(k as i32) * (-tau * model.symbol(xi)).exp() * v)
            .collect()
    };
    let g_hi = weights(&n_hi);
    let g_lo = weights(&n_lo);
    let eval = |nodes: &[f64], w: &[f64], g: &[Complex64], x: f64| -> f64 {
        let mut acc = 0.0;
        for ((xi, wi), gi) in nodes.iter().zip(w).zip(g) {
            acc += wi * (Complex64::new(0.0, x * xi).exp() * gi).re;
        }
        2.0 * acc / SQRT_2PI
    };
    Ok(xs
        .par_iter()
        .map(|&x| {
            let a = eval(&n_hi, &w_hi, &g_hi, x);
            let b = eval(&n_lo, &w_lo, &g_lo, x);
            (a, (a - b).abs() + hl.tail)
        })
        .collect())
}

/// One-dimensional reference prices on a spot grid.
///
/// Calls and puts use the damped representation (puts via parity), butterflies
/// direct inversion of the transform of the compactly supported log payoff.
pub fn price_fourier_1d(model: &LevyModel1D, spec: &PayoffSpec, tau: f64, s_grid: &[f64]) -> Result<Vec<OracleResult>> {
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!("tau = {tau} must be positive")));
    }
    match spec {
        PayoffSpec::Call { k } => s_grid.iter().map(|&s| call_fourier(model, *k, tau, s)).collect(),
        PayoffSpec::Put { k } => {
            let growth = model.exp_moment(1.0, tau)?;
            s_grid
                .iter()
                .map(|&s| {
                    let mut r = call_fourier(model, *k, tau, s)?;
                    r.value = r.value - s * growth + k;
                    Ok(r)
                })
                .collect()
        }
        PayoffSpec::Butterfly { k1, k, k2 } => {
            let xs: Vec<f64> = s_grid.iter().map(|s| s.ln()).collect();
            let opts = FieldOptions { tail_tol: 1e-13, max_freq: 2e4, fail_above: 1e-2 };
            let field = fourier_field(
                model,
                |nodes| nodes.iter().map(|&xi| spec.log_payoff_fourier(xi).expect("butterfly")).collect(),
                butterfly_decay_constant(*k1, *k, *k2),
                tau,
                0,
                &xs,
                opts,
            )?;
            Ok(field.into_iter().map(|(v, e)| OracleResult::exact(v, e, OracleKind::Fourier)).collect())
        }
        PayoffSpec::Constant { c } => Ok(s_grid.iter().map(|_| OracleResult::exact(*c, 0.0, OracleKind::Analytic)).collect()),
        other => Err(Error::InvalidArgument(format!("{other:?} is not a one-dimensional payoff"))),
    }
}

/// Best available one-dimensional reference: closed forms where they exist,
/// otherwise the Fourier oracle.
pub fn price_1d(model: &LevyModel1D, spec: &PayoffSpec, tau: f64, s_grid: &[f64]) -> Result<Vec<OracleResult>> {
    let analytic = |f: &dyn Fn(f64) -> f64| -> Vec<OracleResult> {
        s_grid.iter().map(|&s| OracleResult::exact(f(s), 1e-12 * (1.0 + s), OracleKind::Analytic)).collect()
    };
    match (model.variant, spec) {
        (LevyVariant::BlackScholes, PayoffSpec::Call { k }) => {
            Ok(analytic(&|s| bs_call(s, *k, model.sigma, model.gamma, tau)))
        }
        (LevyVariant::Merton { lambda, mu_j, sigma_j }, PayoffSpec::Call { k }) if lambda * tau < 5.0 => {
            let b = model.uncompensated_drift().expect("finite activity");
            Ok(analytic(&|s| merton_call(s, *k, model.sigma, b, lambda, mu_j, sigma_j, tau, 50)))
        }
        _ => price_fourier_1d(model, spec, tau, s_grid),
    }
}

/// `D^k_x v(tau, x)` for a compactly supported log payoff given by samples on a
/// uniform grid; the transform of the piecewise-linear interpolant is exact.
pub fn derivative_fourier(
    model: &LevyModel1D,
    x_samples: &[f64],
    v0_samples: &[f64],
    tau: f64,
    k: u32,
    x_grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let pl = PiecewiseLinear::new(x_samples, v0_samples)?;
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!("tau = {tau} must be positive")));
    }
    if k > 12 {
        return Err(Error::InvalidArgument(format!("derivative order {k} exceeds 12")));
    }
    let opts = FieldOptions { tail_tol: 1e-13, max_freq: 2e4, fail_above: 1e-6 };
    let mut out = fourier_field(model, |nodes| pl.fourier_many(nodes), pl.decay_constant(), tau, k, x_grid, opts)?;
    if k == 0 {
        let interp = pl.interpolation_error();
        for o in out.iter_mut() {
            o.1 += interp;
        }
    }
    Ok(out)
}

/// Continuous piecewise-linear function vanishing outside its nodes.
#[derive(Debug, Clone)]
pub struct PiecewiseLinear {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Slope changes at each node.
    kinks: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() != y.len() || x.len() < 3 {
            return Err(Error::InvalidArgument("need at least three samples of equal length".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("sample abscissae must increase".into()));
        }
        let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        if y[0].abs() > 1e-12 * scale || y[y.len() - 1].abs() > 1e-12 * scale {
            return Err(Error::InvalidArgument("samples must vanish at both ends (compact support)".into()));
        }
        let n = x.len();
        let slope = |i: usize| -> f64 {
            // slope of the segment starting at node i; zero outside
            if i + 1 >= n {
                0.0
            } else {
                (y[i + 1] - y[i]) / (x[i + 1] - x[i])
            }
        };
        let kinks = (0..n)
            .map(|i| {
                let left = if i == 0 { 0.0 } else { slope(i - 1) };
                slope(i) - left
            })
            .collect();
        Ok(PiecewiseLinear { x: x.to_vec(), y: y.to_vec(), kinks })
    }

    /// `sum |kinks| / sqrt(2 pi)`, so `|f_hat(xi)| <= decay / xi^2`.
    pub fn decay_constant(&self) -> f64 {
        self.kinks.iter().map(|k| k.abs()).sum::<f64>() / SQRT_2PI
    }

    /// `max |second difference| / 8`, the interpolation error of a smooth sampled function.
    pub fn interpolation_error(&self) -> f64 {
        self.y
            .windows(3)
            .map(|w| (w[0] - 2.0 * w[1] + w[2]).abs())
            .fold(0.0, f64::max)
            / 8.0
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= self.x[0] || t >= self.x[self.x.len() - 1] {
            return 0.0;
        }
        let i = self.x.partition_point(|v| *v <= t) - 1;
        let w = (t - self.x[i]) / (self.x[i + 1] - self.x[i]);
        self.y[i] * (1.0 - w) + self.y[i + 1] * w
    }

    /// Unitary Fourier transform at `xi`.
    pub fn fourier(&self, xi: f64) -> Complex64 {
        if xi.abs() < 1e-3 {
            // segment-wise Gauss-Legendre; exact to rounding for small xi h
            let rule = GaussLegendre::new(8);
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..self.x.len() - 1 {
                let (a, b) = (self.x[i], self.x[i + 1]);
                let (ya, yb) = (self.y[i], self.y[i + 1]);
                acc += rule.integrate(a, b, |t| {
                    let v = ya + (yb - ya) * (t - a) / (b - a);
                    Complex64::new(0.0, -t * xi).exp() * v
                });
            }
            return acc / SQRT_2PI;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, k) in self.x.iter().zip(&self.kinks) {
            if *k != 0.0 {
                acc += k * Complex64::new(0.0, -x * xi).exp();
            }
        }
        -acc / (xi * xi * SQRT_2PI)
    }

    pub fn fourier_many(&self, xis: &[f64]) -> Vec<Complex64> {
        xis.par_iter().map(|&xi| self.fourier(xi)).collect()
    }
}

/// Running count, mean and centered second moment.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.n += 1.0;
        let delta = v - self.mean;
        self.mean += delta / self.n;
        self.m2 += delta * (v - self.mean);
    }

    fn merge(a: Moments, b: Moments) -> Moments {
        if a.n == 0.0 {
            return b;
        }
        if b.n == 0.0 {
            return a;
        }
        let n = a.n + b.n;
        let delta = b.mean - a.mean;
        Moments { n, mean: a.mean + delta * b.n / n, m2: a.m2 + b.m2 + delta * delta * a.n * b.n / n }
    }

    /// Pairwise merge in a fixed tree order.
    fn merge_all(parts: &[Moments]) -> Moments {
        match parts.len() {
            0 => Moments::default(),
            1 => parts[0],
            n => Moments::merge(Moments::merge_all(&parts[..n / 2]), Moments::merge_all(&parts[n / 2..])),
        }
    }
}

/// Monte-Carlo price `E[phi(s e^{X_tau})]` with a three-standard-error half-width.
/// Block `b` of `MC_BLOCK` samples uses stream `b` of `seed`; block results are
/// merged pairwise in block order, so the value does not depend on the thread count.
pub fn price_mc(model: &LevyModelD, spec: &PayoffSpec, tau: f64, s: &[f64], n: usize, seed: u64) -> Result<OracleResult> {
    Ok(price_mc_many(model, spec, tau, &[s.to_vec()], n, seed)?.remove(0))
}

/// Monte-Carlo prices at several spots with common random numbers.
pub fn price_mc_many(
    model: &LevyModelD,
    spec: &PayoffSpec,
    tau: f64,
    spots: &[Vec<f64>],
    n: usize,
    seed: u64,
) -> Result<Vec<OracleResult>> {
    let d = model.dim();
    if n < 100 {
        return Err(Error::InvalidArgument(format!("n = {n} below the minimum of 100 samples")));
    }
    spec.validate(d)?;
    if let Some(s) = spots.iter().find(|s| s.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: s.len() });
    }
    let sampler = model.sampler(tau)?;
    let blocks = n.div_ceil(MC_BLOCK);
    let per_block: Vec<Vec<Moments>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng::stream(seed, b as u64);
            let count = MC_BLOCK.min(n - b * MC_BLOCK);
            let mut acc = vec![Moments::default(); spots.len()];
            let mut x = vec![0.0; d];
            let mut pt = vec![0.0; d];
            for _ in 0..count {
                sampler.sample_into(&mut rng, &mut x);
                let growth: Vec<f64> = x.iter().map(|v| v.exp()).collect();
                for (j, s) in spots.iter().enumerate() {
                    for i in 0..d {
                        pt[i] = s[i] * growth[i];
                    }
                    acc[j].push(spec.eval(&pt));
                }
            }
            acc
        })
        .collect();
    let nf = n as f64;
    Ok((0..spots.len())
        .map(|j| {
            let parts: Vec<Moments> = per_block.iter().map(|b| b[j]).collect();
            let total = Moments::merge_all(&parts);
            let var = (total.m2 / (nf - 1.0)).max(0.0);
            let se = (var / nf).sqrt();
            OracleResult {
                value: total.mean,
                error_bound: 3.0 * se,
                kind: OracleKind::MonteCarlo,
                std_error: Some(se),
                samples: Some(n),
                seed: Some(seed),
                blocks: Some(blocks),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bs_at_the_money_value() {
        let v = bs_call(1.0, 1.0, 0.2, -0.02, 1.0);
        // 2 Phi(sigma sqrt(tau) / 2) - 1
        assert!((v - (2.0 * norm_cdf(0.1) - 1.0)).abs() < 1e-15);
        assert!((v - 0.0796557).abs() < 1e-7);
    }

    #[test]
    fn deep_in_the_money() {
        let v = bs_call(10.0, 1.0, 0.2, -0.02, 1.0);
        assert!((v - 9.0).abs() < 1e-10);
    }

    #[test]
    fn merton_series_matches_fourier() {
        let m = LevyModel1D::merton(0.1, 0.0, 1.0, -0.1, 0.15).unwrap().with_martingale_drift().unwrap();
        let call = PayoffSpec::Call { k: 1.0 };
        let spots = [0.6, 1.0, 1.4];
        let series = price_1d(&m, &call, 0.5, &spots).unwrap();
        let fourier = price_fourier_1d(&m, &call, 0.5, &spots).unwrap();
        for (a, b) in series.iter().zip(&fourier) {
            assert!((a.value - b.value).abs() < 1e-9, "{} {}", a.value, b.value);
        }
        assert!(series[2].value > 0.4);
    }

    #[test]
    fn merton_zero_intensity_reduces() {
        let a = merton_call(1.1, 1.0, 0.2, -0.02, 0.0, -0.1, 0.2, 0.7, 50);
        let b = bs_call(1.1, 1.0, 0.2, -0.02, 0.7);
        assert_eq!(a, b);
    }

    #[test]
    fn fourier_call_matches_bs() {
        let m = LevyModel1D::black_scholes(0.2, -0.02).unwrap();
        for tau in [0.25, 1.0] {
            for s in [0.5, 0.8, 1.0, 1.3, 1.5] {
                let r = call_fourier(&m, 1.0, tau, s).unwrap();
                assert!((r.value - bs_call(s, 1.0, 0.2, -0.02, tau)).abs() < 1e-9, "tau={tau} s={s}");
                assert!(r.error_bound < 1e-9);
            }
        }
    }

    #[test]
    fn damping_failure_for_light_upper_tail() {
        let m = LevyModel1D::kou(0.1, 0.0, 1.0, 0.5, 1.5, 3.0).unwrap();
        assert!(matches!(call_fourier(&m, 1.0, 1.0, 1.0), Err(Error::DampingFailure(_))));
    }

    #[test]
    fn piecewise_linear_transform() {
        // tent on [-1, 1]: transform sqrt(2/pi) 2 sin^2(xi/2) / xi^2
        let x: Vec<f64> = (0..=200).map(|i| -1.0 + i as f64 * 0.01).collect();
        let y: Vec<f64> = x.iter().map(|t: &f64| 1.0 - t.abs()).collect();
        let pl = PiecewiseLinear::new(&x, &y).unwrap();
        for xi in [0.0f64, 1e-4, 0.5, 3.0, 40.0] {
            let want = if xi == 0.0 { 1.0 / SQRT_2PI } else { (2.0 / std::f64::consts::PI).sqrt() * 2.0 * (xi / 2.0).sin().powi(2) / (xi * xi) };
            let got = pl.fourier(xi);
            assert!((got.re - want).abs() < 1e-12 && got.im.abs() < 1e-12, "xi={xi}: {got} vs {want}");
        }
        assert!(PiecewiseLinear::new(&[0.0, 1.0, 2.0], &[1.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn deterministic_mc_is_exact() {
        let m = LevyModelD::new(vec![vec![0.0]], vec![0.1], vec![None], None).unwrap();
        let r = price_mc(&m, &PayoffSpec::Call { k: 1.0 }, 1.0, &[1.0], 1000, 3).unwrap();
        assert!((r.value - (0.1f64.exp() - 1.0)).abs() < 1e-14);
        assert!(r.error_bound < 1e-9);
    }
}
