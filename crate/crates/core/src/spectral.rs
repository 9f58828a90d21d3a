//! Parabolic smoothing of the log-price field: Gevrey derivative bounds,
//! smoothing constants, Chebyshev interpolation of the price and its ReLU
//! emulation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};
use crate::levy::{LevyModel1D, SymbolSector};
use crate::oracle::price_1d;
use crate::quad::{integrate_adaptive, GaussLegendre};
use crate::relu::emulate::chebyshev_eval;
use crate::relu::{polynomial_emulator, PayoffSpec, ReluNetwork};
use crate::stats::{linspace, RateFit};

/// `sup_{eta > 0} eta^m exp(-kappa eta^mu) = (m / (kappa mu e))^{m / mu}`, with value 1 at `m = 0`.
pub fn max_exp_opt(m: f64, kappa: f64, mu: f64) -> f64 {
    if m == 0.0 {
        return 1.0;
    }
    (m / (kappa * mu * std::f64::consts::E)).powf(m / mu)
}

/// `A(tau, rho) = (2 tau C1 rho)^{-1/(2 rho)}`.
pub fn gevrey_rate(tau: f64, sector: &SymbolSector) -> f64 {
    (2.0 * tau * sector.c1 * sector.rho).powf(-1.0 / (2.0 * sector.rho))
}

/// `A(tau, rho)^k (k!)^{1/(2 rho)} ||v0||_{L^2}`, a bound on `||D^k v(tau, .)||_{L^2}`.
pub fn gevrey_bound(k: u32, tau: f64, sector: &SymbolSector, v0_l2: f64) -> f64 {
    if k == 0 {
        return v0_l2;
    }
    let rho = sector.rho;
    let log_fact = ln_gamma(k as f64 + 1.0);
    (k as f64 * gevrey_rate(tau, sector).ln() + log_fact / (2.0 * rho)).exp() * v0_l2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GevreyProfile {
    /// Gevrey index `1 / min(1, 2 rho)`.
    pub delta: f64,
    pub a_tau_rho: f64,
    pub v0_l2: f64,
    pub bounds: Vec<f64>,
}

pub fn gevrey_profile(k_max: u32, tau: f64, sector: &SymbolSector, v0_l2: f64) -> GevreyProfile {
    GevreyProfile {
        delta: 1.0 / (2.0 * sector.rho).min(1.0),
        a_tau_rho: gevrey_rate(tau, sector),
        v0_l2,
        bounds: (0..=k_max).map(|k| gevrey_bound(k, tau, sector, v0_l2)).collect(),
    }
}

/// `||phi o exp||_{L^2}` for a payoff with compact support in log coordinates.
pub fn log_payoff_l2(spec: &PayoffSpec) -> Result<f64> {
    let PayoffSpec::Butterfly { k1, k, k2 } = spec else {
        return Err(Error::InvalidArgument(format!("{spec:?} is not square integrable in log coordinates")));
    };
    let rule = GaussLegendre::new(40);
    let sq = |lo: f64, hi: f64| rule.composite(lo, hi, 8, |x: f64| spec.eval(&[x.exp()]).powi(2));
    Ok((sq(k1.ln(), k.ln()) + sq(k.ln(), k2.ln())).sqrt())
}

/// `||D^k_x v(tau, .)||_{L^2}` by Parseval: `int xi^{2k} e^{-2 tau Re psi} |v0_hat|^2`.
pub fn derivative_l2_norm(model: &LevyModel1D, spec: &PayoffSpec, tau: f64, k: u32) -> Result<(f64, f64)> {
    if spec.log_payoff_fourier(0.0).is_none() {
        return Err(Error::InvalidArgument(format!("{spec:?} has no transform in log coordinates")));
    }
    let f = |xi: f64| -> f64 {
        let damp = (-2.0 * tau * model.symbol(xi).re).exp();
        let v = spec.log_payoff_fourier(xi).expect("checked").norm_sqr();
        xi.powi(2 * k as i32) * damp * v
    };
    // |v0_hat|^2 decays like xi^{-4}; extend until the integrand is negligible
    let mut upper: f64 = 50.0;
    while upper < 1e5 && f(upper) * upper > 1e-20 {
        upper *= 2.0;
    }
    let (val, err) = integrate_adaptive(0.0, upper, 1e-13, f);
    let tail = f(upper) * upper;
    let norm2 = 2.0 * val;
    let norm = norm2.sqrt();
    Ok((norm, (2.0 * (err + tail)) / (2.0 * norm.max(1e-300))))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SmoothingConstants {
    /// `(2 pi)^{-d/2} (int exp(-2 tau C1 |xi|^{2 rho}) dxi)^{1/2}`.
    pub cdtau: f64,
    /// `d^{2 rho} / (2 rho C1)`.
    pub tau_threshold: f64,
    /// `d A(tau, rho)`.
    pub d_a_product: f64,
}

/// Closed Gamma-function form of the smoothing constants. The radial integral
/// `|S^{d-1}| int_0^inf r^{d-1} e^{-a r^{2 rho}} dr` equals
/// `pi^{d/2} Gamma(d / (2 rho)) / (rho Gamma(d/2) a^{d/(2 rho)})`.
pub fn smoothing_constants(d: usize, tau: f64, sector: &SymbolSector) -> SmoothingConstants {
    let df = d as f64;
    let rho = sector.rho;
    let a = 2.0 * tau * sector.c1;
    let integral = std::f64::consts::PI.powf(df / 2.0) * gamma(df / (2.0 * rho))
        / (rho * gamma(df / 2.0) * a.powf(df / (2.0 * rho)));
    SmoothingConstants {
        cdtau: (2.0 * std::f64::consts::PI).powf(-df / 2.0) * integral.sqrt(),
        tau_threshold: df.powf(2.0 * rho) / (2.0 * rho * sector.c1),
        d_a_product: df * gevrey_rate(tau, sector),
    }
}

/// `C(d, tau)` from quadrature of the radial form of its defining integral.
pub fn cdtau_quadrature(d: usize, tau: f64, sector: &SymbolSector) -> f64 {
    let df = d as f64;
    let a = 2.0 * tau * sector.c1;
    let rho = sector.rho;
    let sphere = 2.0 * std::f64::consts::PI.powf(df / 2.0) / gamma(df / 2.0);
    // substitute t = a r^{2 rho}: r^{d-1} dr = t^{d/(2 rho) - 1} dt / (2 rho a^{d/(2 rho)})
    let s = df / (2.0 * rho);
    // t = u^8 makes the integrand smooth at the origin for every s > 0
    let (val, _) = integrate_adaptive(0.0, (80.0 + 8.0 * s).powf(0.125), 1e-15, |u: f64| {
        8.0 * u.powf(8.0 * s - 1.0) * (-u.powi(8)).exp()
    });
    let integral = sphere * val / (2.0 * rho * a.powf(s));
    (2.0 * std::f64::consts::PI).powf(-df / 2.0) * integral.sqrt()
}

/// Coefficients of the interpolant `sum_k c_k T_k` through `f` at the
/// Chebyshev extrema `cos(j pi / p)`.
pub fn chebyshev_interpolate(values_at_extrema: &[f64]) -> Vec<f64> {
    let p = values_at_extrema.len() - 1;
    if p == 0 {
        return vec![values_at_extrema[0]];
    }
    let pf = p as f64;
    (0..=p)
        .map(|k| {
            let mut s = 0.0;
            for (j, f) in values_at_extrema.iter().enumerate() {
                let w = if j == 0 || j == p { 0.5 } else { 1.0 };
                s += w * f * (std::f64::consts::PI * (k * j) as f64 / pf).cos();
            }
            let c = 2.0 * s / pf;
            if k == 0 || k == p { c / 2.0 } else { c }
        })
        .collect()
}

pub fn chebyshev_extrema(p: usize) -> Vec<f64> {
    if p == 0 {
        return vec![0.0];
    }
    (0..=p).map(|j| (std::f64::consts::PI * j as f64 / p as f64).cos()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ChebRow {
    pub p: usize,
    pub sup_error: f64,
    pub coeffs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ChebResult {
    pub a: f64,
    pub b: f64,
    pub tau: f64,
    pub delta: f64,
    pub rows: Vec<ChebRow>,
    /// Fit of `ln(error)` against `p^{1/delta}` over errors above the oracle floor.
    pub decay: Option<RateFit>,
    pub oracle_bound: f64,
    pub grid: Vec<f64>,
    pub reference: Vec<f64>,
}

/// Errors above this multiple of the oracle bound enter the decay fit.
const FLOOR_FACTOR: f64 = 100.0;

/// Checks `Re psi(xi) >= C1 |xi|^{2 rho}` on a symmetric grid reaching `|xi| = 200`.
pub fn require_lower_sector(model: &LevyModel1D, sector: &SymbolSector) -> Result<()> {
    if !(sector.c1 > 0.0) {
        return Err(Error::SectorViolation("C1 must be positive".into()));
    }
    for i in 1..=4000 {
        let xi = i as f64 * 0.05;
        for x in [xi, -xi] {
            let re = model.symbol(x).re;
            let lo = sector.lower(&[x]);
            if re < lo * (1.0 - 1e-12) {
                return Err(Error::SectorViolation(format!("Re psi({x}) = {re:.6e} below C1 |xi|^(2 rho) = {lo:.6e}")));
            }
        }
    }
    Ok(())
}

/// Chebyshev interpolants of `s -> u(tau, s)` on `[a, b]` for every degree in
/// `p_list`, with sup errors against the oracle on a 2000-point grid.
pub fn cheb_approx(
    model: &LevyModel1D,
    spec: &PayoffSpec,
    sector: &SymbolSector,
    tau: f64,
    a: f64,
    b: f64,
    p_list: &[usize],
) -> Result<ChebResult> {
    if !(0.0 < a && a < b) {
        return Err(Error::InvalidArgument(format!("need 0 < a < b, got [{a}, {b}]")));
    }
    if !matches!(spec, PayoffSpec::Constant { .. }) {
        require_lower_sector(model, sector)?;
    }
    let grid = linspace(a, b, 2000);
    let reference_res = price_1d(model, spec, tau, &grid)?;
    let reference: Vec<f64> = reference_res.iter().map(|r| r.value).collect();
    let oracle_bound = reference_res.iter().map(|r| r.error_bound).fold(0.0, f64::max);
    let to_unit = |s: f64| (2.0 * s - (a + b)) / (b - a);
    let rows: Vec<ChebRow> = p_list
        .par_iter()
        .map(|&p| -> Result<ChebRow> {
            let nodes: Vec<f64> = chebyshev_extrema(p).iter().map(|x| 0.5 * (a + b) + 0.5 * (b - a) * x).collect();
            let vals: Vec<f64> = price_1d(model, spec, tau, &nodes)?.iter().map(|r| r.value).collect();
            let coeffs = chebyshev_interpolate(&vals);
            let sup_error = grid
                .iter()
                .zip(&reference)
                .map(|(s, u)| (chebyshev_eval(&coeffs, to_unit(*s)) - u).abs())
                .fold(0.0, f64::max);
            Ok(ChebRow { p, sup_error, coeffs })
        })
        .collect::<Result<_>>()?;
    let delta = 1.0 / (2.0 * sector.rho).min(1.0);
    let usable: Vec<&ChebRow> = rows.iter().filter(|r| r.sup_error > FLOOR_FACTOR * oracle_bound.max(1e-15)).collect();
    let decay = (usable.len() >= 2).then(|| {
        let x: Vec<f64> = usable.iter().map(|r| (r.p as f64).powf(1.0 / delta)).collect();
        let y: Vec<f64> = usable.iter().map(|r| r.sup_error.ln()).collect();
        RateFit::fit(&x, &y)
    });
    Ok(ChebResult { a, b, tau, delta, rows, decay, oracle_bound, grid, reference })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SpectralEmulation {
    pub p: usize,
    pub delta_net: f64,
    pub cheb_error: f64,
    pub measured_error: f64,
    pub m: usize,
    pub l: usize,
}

/// ReLU emulation of the degree-`p` row of `cheb` composed with the affine map
/// `[a, b] -> [-1, 1]`, measured against the oracle grid.
pub fn spectral_emulate(cheb: &ChebResult, p: usize, delta_net: f64) -> Result<(ReluNetwork, SpectralEmulation)> {
    let row = cheb
        .rows
        .iter()
        .find(|r| r.p == p)
        .ok_or_else(|| Error::InvalidArgument(format!("degree {p} not in the Chebyshev table")))?;
    let poly = polynomial_emulator(&row.coeffs, delta_net)?;
    let (a, b) = (cheb.a, cheb.b);
    let affine = ReluNetwork::affine(&[vec![2.0 / (b - a)]], vec![-(a + b) / (b - a)])?;
    let net = ReluNetwork::compose(&poly, &affine)?;
    let measured_error = cheb
        .grid
        .par_iter()
        .zip(cheb.reference.par_iter())
        .map(|(s, u)| (net.eval1(&[*s]) - u).abs())
        .reduce(|| 0.0, f64::max);
    let metrics = net.metrics();
    Ok((
        net,
        SpectralEmulation { p, delta_net, cheb_error: row.sup_error, measured_error, m: metrics.m, l: metrics.l },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::derivative_fourier;

    #[test]
    fn max_exp_values() {
        assert!((max_exp_opt(2.0, 1.0, 2.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(max_exp_opt(0.0, 3.0, 1.5), 1.0);
    }

    #[test]
    fn gevrey_bound_examples() {
        let s = SymbolSector::new(1.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(gevrey_bound(0, 0.5, &s, 2.5), 2.5);
        assert!((gevrey_bound(1, 0.5, &s, 1.0) - 1.0).abs() < 1e-15);
        let prof = gevrey_profile(12, 0.3, &SymbolSector::new(0.7, 0.1, 1.0, 0.0).unwrap(), 1.0);
        for w in prof.bounds.windows(3) {
            assert!(w[0].ln() + w[2].ln() - 2.0 * w[1].ln() >= -1e-9);
        }
    }

    #[test]
    fn smoothing_constants_match_quadrature() {
        let s = SymbolSector::new(1.0, 0.5, 1.0, 0.0).unwrap();
        let k = smoothing_constants(1, 0.5, &s);
        assert!((k.cdtau - (2.0 * std::f64::consts::PI).powf(-0.25)).abs() < 1e-14);
        assert!((k.tau_threshold - 1.0).abs() < 1e-15);
        for rho in [0.6, 0.8, 1.0] {
            let s = SymbolSector::new(rho, 0.3, 1.0, 0.0).unwrap();
            for d in 1..=10 {
                let a = smoothing_constants(d, 0.7, &s).cdtau;
                let b = cdtau_quadrature(d, 0.7, &s);
                assert!(((a - b) / a).abs() < 1e-8, "d={d} rho={rho}: {a} vs {b}");
            }
        }
        let c: Vec<f64> = [0.5, 1.0, 2.0].iter().map(|t| smoothing_constants(3, *t, &s).cdtau).collect();
        assert!(c[0] > c[1] && c[1] > c[2]);
    }

    #[test]
    fn interpolation_reproduces_polynomials() {
        let f = |x: f64| 3.0 * x.powi(3) - x + 0.5;
        let p = 5;
        let vals: Vec<f64> = chebyshev_extrema(p).iter().map(|x| f(*x)).collect();
        let c = chebyshev_interpolate(&vals);
        for x in linspace(-1.0, 1.0, 101) {
            assert!((chebyshev_eval(&c, x) - f(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn parseval_norm_matches_field_norm() {
        // ||D^1 v|| from the spatial derivative field integrated over x
        let m = LevyModel1D::black_scholes(0.3, 0.0).unwrap();
        let spec = PayoffSpec::Butterfly { k1: 0.8, k: 1.0, k2: 1.25 };
        let (norm, _) = derivative_l2_norm(&m, &spec, 0.5, 1).unwrap();
        let x0: Vec<f64> = linspace(0.8f64.ln(), 1.25f64.ln(), 4001);
        let v0: Vec<f64> = x0.iter().map(|x| spec.eval(&[x.exp()])).collect();
        let xs = linspace(-3.0, 3.0, 3001);
        let field = derivative_fourier(&m, &x0, &v0, 0.5, 1, &xs).unwrap();
        let h = xs[1] - xs[0];
        let num: f64 = field.iter().map(|(v, _)| v * v).sum::<f64>() * h;
        assert!((num.sqrt() - norm).abs() < 1e-5 * norm, "{} vs {norm}", num.sqrt());
    }
}
