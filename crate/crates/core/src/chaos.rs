//! Taylor coefficients of the smoothed log-price field at the origin, their
//! anisotropic bounds, summability, downward closed index sets and sparse
//! partial sums on `[-1, 1]^d`.

use std::collections::BTreeSet;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::levy::{LevyModelD, SymbolSector};
use crate::quad::{integrate_adaptive, GaussLegendre};
use crate::relu::{sparse_monomial_net, PayoffSpec, ReluNetwork};
use crate::stats::RateFit;

pub type MultiIndex = Vec<u32>;

/// Initial condition `v0(x)` in log coordinates with a known transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum LogPayoff {
    /// `prod_j phi_j(e^{x_j})` with compactly supported factors.
    Tensor { factors: Vec<PayoffSpec> },
    /// `exp(-|x|^2 / (2 w^2))` in dimension `d`.
    Gaussian { width: f64, d: usize },
}

impl LogPayoff {
    pub fn dim(&self) -> usize {
        match self {
            LogPayoff::Tensor { factors } => factors.len(),
            LogPayoff::Gaussian { d, .. } => *d,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LogPayoff::Tensor { factors } => {
                if factors.is_empty() {
                    return Err(Error::InvalidArgument("tensor payoff without factors".into()));
                }
                for f in factors {
                    f.validate(1)?;
                    if !f.has_compact_log_support() {
                        return Err(Error::InvalidArgument(format!("{f:?} lacks compact support in log coordinates")));
                    }
                }
                Ok(())
            }
            LogPayoff::Gaussian { width, d } => {
                if !(*width > 0.0) || *d == 0 {
                    return Err(Error::InvalidArgument("Gaussian needs width > 0 and d >= 1".into()));
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            LogPayoff::Tensor { factors } => factors.iter().zip(x).map(|(f, xi)| f.eval(&[xi.exp()])).product(),
            LogPayoff::Gaussian { width, .. } => (-x.iter().map(|v| v * v).sum::<f64>() / (2.0 * width * width)).exp(),
        }
    }

    /// Unitary transform `(2 pi)^{-d/2} int v0(x) e^{-i x xi} dx`.
    pub fn fourier(&self, xi: &[f64]) -> Complex64 {
        match self {
            LogPayoff::Tensor { factors } => factors
                .iter()
                .zip(xi)
                .map(|(f, x)| f.log_payoff_fourier(*x).expect("validated"))
                .product(),
            LogPayoff::Gaussian { width, d } => {
                let r2: f64 = xi.iter().map(|v| v * v).sum();
                Complex64::new(width.powi(*d as i32) * (-0.5 * width * width * r2).exp(), 0.0)
            }
        }
    }

    /// `sup |v0_hat| <= (2 pi)^{-d/2} ||v0||_{L^1}`.
    pub fn fourier_sup(&self) -> f64 {
        match self {
            LogPayoff::Tensor { factors } => factors.iter().map(|f| f.log_payoff_fourier(0.0).expect("validated").norm()).product(),
            LogPayoff::Gaussian { width, d } => width.powi(*d as i32),
        }
    }

    /// `||v0_hat||_{L^1}`.
    pub fn fourier_l1(&self) -> f64 {
        match self {
            LogPayoff::Tensor { factors } => factors.iter().map(factor_fourier_l1).product(),
            LogPayoff::Gaussian { d, .. } => (2.0 * std::f64::consts::PI).powf(*d as f64 / 2.0),
        }
    }
}

/// `int |f_hat|` for a compactly supported continuous factor: adaptive
/// quadrature on `[0, U]` plus the `TV / xi^2` tail.
fn factor_fourier_l1(f: &PayoffSpec) -> f64 {
    let g = |xi: f64| f.log_payoff_fourier(xi).expect("validated").norm();
    let upper = 2000.0;
    let rule = GaussLegendre::new(20);
    // oscillation period is set by the support width, below 1 for the fixtures
    let body: f64 = rule.composite(0.0, upper, 8000, g);
    // |f_hat(xi)| <= sup(|xi|^2 |f_hat|) / xi^2 beyond U
    let tail_coef = (0..200).map(|i| {
        let x = upper * (1.0 + i as f64 / 200.0);
        g(x) * x * x
    }).fold(0.0, f64::max);
    2.0 * (body + tail_coef / upper)
}

/// `b_j = (2 rho_j tau C1)^{-1/(2 rho_j rho')}` with `rho' = 1 - 1/(2 rho)`.
pub fn b_sequence(d: usize, tau: f64, sector: &SymbolSector) -> Result<(f64, Vec<f64>)> {
    let rhos = sector_rhos(d, sector)?;
    let rho = rhos.iter().cloned().fold(f64::INFINITY, f64::min);
    let rho_prime = 1.0 - 1.0 / (2.0 * rho);
    let b = rhos.iter().map(|r| (2.0 * r * tau * sector.c1).powf(-1.0 / (2.0 * r * rho_prime))).collect();
    Ok((rho_prime, b))
}

fn sector_rhos(d: usize, sector: &SymbolSector) -> Result<Vec<f64>> {
    let rhos = match &sector.rho_vec {
        Some(v) if v.len() == d => v.clone(),
        Some(v) => return Err(Error::DimensionMismatch { expected: d, got: v.len() }),
        None => vec![sector.rho; d],
    };
    if let Some(r) = rhos.iter().find(|r| !(**r > 0.5)) {
        return Err(Error::RhoTooSmall(*r));
    }
    Ok(rhos)
}

fn ln_factorial(n: u32) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// `(2 pi)^{-d/2} ||v0_hat||_{L^1} ((nu!)^{-1} b^nu)^{rho'}`.
pub fn coeff_bound(nu: &[u32], tau: f64, sector: &SymbolSector, v0hat_l1: f64) -> Result<f64> {
    let d = nu.len();
    let (rho_prime, b) = b_sequence(d, tau, sector)?;
    let log_term: f64 = nu.iter().zip(&b).map(|(n, bj)| *n as f64 * bj.ln() - ln_factorial(*n)).sum();
    Ok((2.0 * std::f64::consts::PI).powf(-(d as f64) / 2.0) * v0hat_l1 * (rho_prime * log_term).exp())
}

/// Sum of `coeff_bound` over all of `N_0^d`, a product of one-dimensional series.
pub fn total_bound(d: usize, tau: f64, sector: &SymbolSector, v0hat_l1: f64) -> Result<f64> {
    let (rho_prime, b) = b_sequence(d, tau, sector)?;
    let mut prod = 1.0;
    for bj in b {
        let mut s = 0.0;
        for k in 0..2000u32 {
            let t = (rho_prime * (k as f64 * bj.ln() - ln_factorial(k))).exp();
            s += t;
            if k > 10 && t < 1e-18 * s {
                break;
            }
        }
        prod *= s;
    }
    Ok((2.0 * std::f64::consts::PI).powf(-(d as f64) / 2.0) * v0hat_l1 * prod)
}

/// `tau_0(d) = d^{2 rho / q} / (2 rho C1)`.
pub fn tau0(d: usize, rho: f64, q: f64, c1: f64) -> f64 {
    (d as f64).powf(2.0 * rho / q) / (2.0 * rho * c1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Certificate {
    pub q: f64,
    pub finite: bool,
    /// Right side of the `l^q` summability bound (raised to the power `q`).
    pub lq_norm_bound: Option<f64>,
    /// `sum |t_nu|^q` over the computed coefficients.
    pub computed_sum: Option<f64>,
}

/// `||v0_hat||_{L^1}^q (2 pi)^{-dq/2} / (1 - d (2 rho tau C1)^{-q/(2 rho)})`
/// when the denominator is positive.
pub fn summability_certificate(d: usize, tau: f64, rho: f64, c1: f64, v0hat_l1: f64, q: f64) -> Certificate {
    let ratio = d as f64 * (2.0 * rho * tau * c1).powf(-q / (2.0 * rho));
    let finite = ratio < 1.0;
    let lq_norm_bound = finite.then(|| v0hat_l1.powf(q) * (2.0 * std::f64::consts::PI).powf(-(d as f64) * q / 2.0) / (1.0 - ratio));
    Certificate { q, finite, lq_norm_bound, computed_sum: None }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaosEntry {
    pub nu: MultiIndex,
    pub t: f64,
    pub bound: f64,
    #[serde(rename = "quadError")]
    pub quad_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ChaosExpansion {
    pub d: usize,
    pub tau: f64,
    pub rho_prime: f64,
    pub b_sequence: Vec<f64>,
    pub v0hat_l1: f64,
    /// Sum of the coefficient bounds over all multi-indices.
    pub total_bound: f64,
    /// Half-width of the frequency box.
    pub radius: f64,
    pub entries: Vec<ChaosEntry>,
    /// `tau > tau_0(d)` at `q = 1`.
    pub above_threshold: bool,
}

/// All multi-indices of total degree at most `max_degree`, ordered by degree then lexicographically.
pub fn all_indices(d: usize, max_degree: u32) -> Vec<MultiIndex> {
    let mut out = vec![];
    for k in 0..=max_degree {
        let mut level = vec![];
        compositions(d, k, &mut vec![], &mut level);
        level.sort();
        level.reverse();
        out.extend(level);
    }
    out
}

fn compositions(d: usize, k: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if prefix.len() + 1 == d {
        let mut v = prefix.clone();
        v.push(k);
        out.push(v);
        return;
    }
    for i in 0..=k {
        prefix.push(i);
        compositions(d, k - i, prefix, out);
        prefix.pop();
    }
}

/// Top `k` multi-indices of degree at most `max_degree` by bound value, closed downward.
pub fn candidate_set(d: usize, tau: f64, sector: &SymbolSector, max_degree: u32, k: usize) -> Result<Vec<MultiIndex>> {
    let mut all: Vec<(f64, MultiIndex)> = all_indices(d, max_degree)
        .into_iter()
        .map(|nu| coeff_bound(&nu, tau, sector, 1.0).map(|b| (b, nu)))
        .collect::<Result<_>>()?;
    all.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    let mut set: BTreeSet<MultiIndex> = BTreeSet::new();
    for (_, nu) in all.into_iter().take(k) {
        insert_closed(&mut set, nu);
    }
    let mut v: Vec<MultiIndex> = set.into_iter().collect();
    v.sort_by_key(|nu| (nu.iter().sum::<u32>(), std::cmp::Reverse(nu.clone())));
    Ok(v)
}

fn insert_closed(set: &mut BTreeSet<MultiIndex>, nu: MultiIndex) {
    if !set.insert(nu.clone()) {
        return;
    }
    for j in 0..nu.len() {
        if nu[j] > 0 {
            let mut p = nu.clone();
            p[j] -= 1;
            insert_closed(set, p);
        }
    }
}

/// Tensor Gauss-Legendre rule on `[-r, r]^d` with `panels` panels of `order` nodes per axis.
struct TensorRule {
    nodes: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl TensorRule {
    fn new(d: usize, r: f64, panels: usize, order: usize) -> Self {
        let (x, w) = GaussLegendre::new(order).composite_points(-r, r, panels);
        let mut nodes: Vec<Vec<f64>> = vec![vec![]];
        let mut weights = vec![1.0];
        for _ in 0..d {
            let mut nn = Vec::with_capacity(nodes.len() * x.len());
            let mut nw = Vec::with_capacity(nodes.len() * x.len());
            for (p, pw) in nodes.iter().zip(&weights) {
                for (xi, wi) in x.iter().zip(&w) {
                    let mut q = p.clone();
                    q.push(*xi);
                    nn.push(q);
                    nw.push(pw * wi);
                }
            }
            nodes = nn;
            weights = nw;
        }
        TensorRule { nodes, weights }
    }
}

/// Frequency field `w_k e^{-tau psi(xi_k)} v0_hat(xi_k)` on a tensor rule.
struct SpectralField {
    rule: TensorRule,
    g: Vec<Complex64>,
}

impl SpectralField {
    fn new(model: &LevyModelD, v0: &LogPayoff, tau: f64, r: f64, panels: usize, order: usize) -> Self {
        let rule = TensorRule::new(model.dim(), r, panels, order);
        let g = rule
            .nodes
            .par_iter()
            .zip(rule.weights.par_iter())
            .map(|(xi, w)| *w * (-tau * model.symbol(xi)).exp() * v0.fourier(xi))
            .collect();
        SpectralField { rule, g }
    }

    /// `(2 pi)^{-d/2} int (i xi)^nu e^{-tau psi} v0_hat / nu!`.
    fn taylor(&self, nu: &[u32]) -> f64 {
        let d = nu.len();
        let k: u32 = nu.iter().sum();
        let mut acc = Complex64::new(0.0, 0.0);
        for (xi, g) in self.rule.nodes.iter().zip(&self.g) {
            let mono: f64 = xi.iter().zip(nu).map(|(x, n)| x.powi(*n as i32)).product();
            acc += g * mono;
        }
        let ik = Complex64::new(0.0, 1.0).powu(k);
        let fact: f64 = nu.iter().map(|n| ln_factorial(*n)).sum::<f64>().exp();
        (ik * acc).re * (2.0 * std::f64::consts::PI).powf(-(d as f64) / 2.0) / fact
    }

    /// `v(tau, x) = (2 pi)^{-d/2} int e^{i x xi} e^{-tau psi} v0_hat`.
    fn value(&self, x: &[f64]) -> f64 {
        let d = x.len();
        let mut acc = 0.0;
        for (xi, g) in self.rule.nodes.iter().zip(&self.g) {
            let phase: f64 = xi.iter().zip(x).map(|(a, b)| a * b).sum();
            acc += (Complex64::new(0.0, phase).exp() * g).re;
        }
        acc * (2.0 * std::f64::consts::PI).powf(-(d as f64) / 2.0)
    }
}

/// Half-width `R` with `R^{k+d} exp(-tau C1 R^{2 rho}) < 1e-16` for every coordinate exponent.
fn frequency_radius(tau: f64, sector: &SymbolSector, rhos: &[f64], k: u32) -> f64 {
    let rho = rhos.iter().cloned().fold(f64::INFINITY, f64::min);
    let d = rhos.len() as f64;
    let mut r: f64 = 1.0;
    while (k as f64 + d) * r.ln() - tau * sector.c1 * r.powf(2.0 * rho) > (1e-16f64).ln() {
        r *= 1.05;
    }
    r
}

/// `int_{|t| > R} |t|^m exp(-tau C1 |t|^{2 rho}) dt` and the same integral over all of R.
fn axis_integrals(m: u32, tau_c1: f64, rho: f64, r: f64) -> (f64, f64) {
    let f = |t: f64| t.powi(m as i32) * (-tau_c1 * t.powf(2.0 * rho)).exp();
    let mut top = r.max(1.0);
    while f(top) > 1e-300 && top < 1e6 {
        top *= 2.0;
    }
    let (outside, _) = integrate_adaptive(r, top, 1e-14, f);
    let (inside, _) = integrate_adaptive(0.0, r, 1e-14, f);
    (2.0 * outside, 2.0 * (inside + outside))
}

/// Truncation bound of the coefficient integral outside `[-R, R]^d`.
fn truncation_bound(nu: &[u32], tau: f64, sector: &SymbolSector, rhos: &[f64], r: f64, vhat_sup: f64) -> f64 {
    let parts: Vec<(f64, f64)> = nu.iter().zip(rhos).map(|(n, rho)| axis_integrals(*n, tau * sector.c1, *rho, r)).collect();
    let mut total = 0.0;
    for j in 0..nu.len() {
        let mut term = parts[j].0;
        for (i, p) in parts.iter().enumerate() {
            if i != j {
                term *= p.1;
            }
        }
        total += term;
    }
    let fact: f64 = nu.iter().map(|n| ln_factorial(*n)).sum::<f64>().exp();
    vhat_sup * total * (2.0 * std::f64::consts::PI).powf(-(nu.len() as f64) / 2.0) / fact
}

/// Verifies the lower sector inequality on a tensor grid of `[-2R, 2R]^d`.
fn require_sector(model: &LevyModelD, sector: &SymbolSector, r: f64) -> Result<()> {
    let d = model.dim();
    let axis: Vec<f64> = (0..=20).map(|i| -2.0 * r + 0.2 * r * i as f64).collect();
    let rule = TensorRule { nodes: vec![vec![]], weights: vec![1.0] };
    let mut pts = rule.nodes;
    for _ in 0..d {
        pts = pts.into_iter().flat_map(|p| axis.iter().map(move |v| {
            let mut q = p.clone();
            q.push(*v);
            q
        })).collect();
    }
    for xi in pts {
        let re = model.symbol(&xi).re;
        let lo = sector.lower(&xi);
        if re < lo * (1.0 - 1e-10) - 1e-14 {
            return Err(Error::SectorViolation(format!("Re psi({xi:?}) = {re:.6e} below the sector bound {lo:.6e}")));
        }
    }
    Ok(())
}

const QUAD_PANELS_PER_UNIT: f64 = 1.0;
const MAX_DEGREE: u32 = 12;

/// Taylor coefficients of `v(tau, .)` at the origin over `candidates`, computed
/// by tensor Gauss-Legendre quadrature of the Fourier representation.
pub fn taylor_coeffs(
    model: &LevyModelD,
    v0: &LogPayoff,
    tau: f64,
    sector: &SymbolSector,
    candidates: &[MultiIndex],
) -> Result<ChaosExpansion> {
    let d = model.dim();
    if d > 3 {
        return Err(Error::DimensionTooLarge(d));
    }
    if v0.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: v0.dim() });
    }
    v0.validate()?;
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!("tau = {tau} must be positive")));
    }
    if let Some(nu) = candidates.iter().find(|nu| nu.len() != d || nu.iter().sum::<u32>() > MAX_DEGREE) {
        return Err(Error::InvalidArgument(format!("multi-index {nu:?} is not of length {d} and degree <= {MAX_DEGREE}")));
    }
    let rhos = sector_rhos(d, sector)?;
    let (rho_prime, b) = b_sequence(d, tau, sector)?;
    let r = frequency_radius(tau, sector, &rhos, MAX_DEGREE);
    require_sector(model, sector, r)?;
    let panels = ((QUAD_PANELS_PER_UNIT * r).ceil() as usize).max(2);
    let hi = SpectralField::new(model, v0, tau, r, panels, 24);
    let lo = SpectralField::new(model, v0, tau, r, panels, 18);
    let v0hat_l1 = v0.fourier_l1();
    let vhat_sup = v0.fourier_sup();
    let entries = candidates
        .par_iter()
        .map(|nu| -> Result<ChaosEntry> {
            let t = hi.taylor(nu);
            let err = (t - lo.taylor(nu)).abs() + truncation_bound(nu, tau, sector, &rhos, r, vhat_sup);
            Ok(ChaosEntry { nu: nu.clone(), t, bound: coeff_bound(nu, tau, sector, v0hat_l1)?, quad_error: err })
        })
        .collect::<Result<Vec<_>>>()?;
    let rho = rhos.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(ChaosExpansion {
        d,
        tau,
        rho_prime,
        b_sequence: b,
        v0hat_l1,
        total_bound: total_bound(d, tau, sector, v0hat_l1)?,
        radius: r,
        entries,
        above_threshold: tau > tau0(d, rho, 1.0, sector.c1),
    })
}

/// Field values `v(tau, x)` with error estimates from the same quadrature.
pub fn field_values(
    model: &LevyModelD,
    v0: &LogPayoff,
    tau: f64,
    sector: &SymbolSector,
    xs: &[Vec<f64>],
) -> Result<Vec<(f64, f64)>> {
    let d = model.dim();
    let rhos = sector_rhos(d, sector)?;
    let r = frequency_radius(tau, sector, &rhos, 0);
    let panels = ((QUAD_PANELS_PER_UNIT * r).ceil() as usize).max(2);
    let hi = SpectralField::new(model, v0, tau, r, panels, 24);
    let lo = SpectralField::new(model, v0, tau, r, panels, 18);
    let trunc = truncation_bound(&vec![0; d], tau, sector, &rhos, r, v0.fourier_sup());
    Ok(xs
        .par_iter()
        .map(|x| {
            let a = hi.value(x);
            (a, (a - lo.value(x)).abs() + trunc)
        })
        .collect())
}

/// `Lambda_1 subset Lambda_2 subset ...`: each step adds the admissible candidate
/// (all its parents present) of largest bound, so every prefix is downward closed.
pub fn index_sequence(expansion: &ChaosExpansion) -> Vec<MultiIndex> {
    let d = expansion.d;
    let bound_of: std::collections::BTreeMap<&MultiIndex, f64> = expansion.entries.iter().map(|e| (&e.nu, e.bound)).collect();
    let mut chosen: BTreeSet<MultiIndex> = BTreeSet::new();
    let mut order = vec![];
    let zero = vec![0; d];
    if !bound_of.contains_key(&zero) {
        return order;
    }
    loop {
        let next = expansion
            .entries
            .iter()
            .filter(|e| !chosen.contains(&e.nu))
            .filter(|e| {
                (0..d).all(|j| {
                    e.nu[j] == 0 || {
                        let mut p = e.nu.clone();
                        p[j] -= 1;
                        chosen.contains(&p)
                    }
                })
            })
            .max_by(|a, b| a.bound.total_cmp(&b.bound).then_with(|| b.nu.cmp(&a.nu)));
        match next {
            Some(e) => {
                chosen.insert(e.nu.clone());
                order.push(e.nu.clone());
            }
            None => break,
        }
    }
    order
}

/// `Lambda_n`: the first `n` elements of the index sequence.
pub fn build_index_set(expansion: &ChaosExpansion, n: usize) -> Vec<MultiIndex> {
    index_sequence(expansion).into_iter().take(n).collect()
}

pub fn is_downward_closed(set: &[MultiIndex]) -> bool {
    let s: BTreeSet<&MultiIndex> = set.iter().collect();
    set.iter().all(|nu| {
        (0..nu.len()).all(|j| {
            nu[j] == 0 || {
                let mut p = nu.clone();
                p[j] -= 1;
                s.contains(&p)
            }
        })
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SparseRow {
    pub n: usize,
    pub sup_error: f64,
    /// `sum_{nu not in Lambda_n} bound(nu)` over all of `N_0^d`.
    pub tail_bound: f64,
    /// Quadrature error of the field plus that of the retained coefficients.
    pub oracle_error: f64,
    pub max_degree: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SparseStudy {
    pub rows: Vec<SparseRow>,
    pub fit: Option<RateFit>,
    /// `max_n sup_{Lambda_n} |nu|_1 / (1 + ln n)`.
    pub degree_constant: f64,
}

pub fn partial_sum(expansion: &ChaosExpansion, set: &[MultiIndex], x: &[f64]) -> f64 {
    let t: std::collections::BTreeMap<&MultiIndex, f64> = expansion.entries.iter().map(|e| (&e.nu, e.t)).collect();
    set.iter().map(|nu| t[nu] * nu.iter().zip(x).map(|(n, xi)| xi.powi(*n as i32)).product::<f64>()).sum()
}

/// Sup error of the partial sums over `Lambda_n` against the field on `xs`.
pub fn sparse_eval_and_error(
    expansion: &ChaosExpansion,
    n_list: &[usize],
    xs: &[Vec<f64>],
    field: &[(f64, f64)],
) -> SparseStudy {
    let seq = index_sequence(expansion);
    let field_err = field.iter().map(|f| f.1).fold(0.0, f64::max);
    let entry: std::collections::BTreeMap<&MultiIndex, &ChaosEntry> = expansion.entries.iter().map(|e| (&e.nu, e)).collect();
    let rows: Vec<SparseRow> = n_list
        .iter()
        .map(|&n| {
            let set = &seq[..n.min(seq.len())];
            let sup_error = xs
                .par_iter()
                .zip(field.par_iter())
                .map(|(x, f)| (partial_sum(expansion, set, x) - f.0).abs())
                .reduce(|| 0.0, f64::max);
            let kept_bound: f64 = set.iter().map(|nu| entry[nu].bound).sum();
            let coef_err: f64 = set.iter().map(|nu| entry[nu].quad_error).sum();
            SparseRow {
                n: set.len(),
                sup_error,
                tail_bound: (expansion.total_bound - kept_bound).max(0.0),
                oracle_error: field_err + coef_err,
                max_degree: set.iter().map(|nu| nu.iter().sum::<u32>()).max().unwrap_or(0),
            }
        })
        .collect();
    let usable: Vec<&SparseRow> = rows.iter().filter(|r| r.sup_error > 10.0 * r.oracle_error && r.n > 0).collect();
    let fit = (usable.len() >= 2).then(|| {
        let n: Vec<f64> = usable.iter().map(|r| r.n as f64).collect();
        let e: Vec<f64> = usable.iter().map(|r| r.sup_error).collect();
        RateFit::loglog(&n, &e)
    });
    let degree_constant = rows
        .iter()
        .filter(|r| r.n > 0)
        .map(|r| r.max_degree as f64 / (1.0 + (r.n as f64).ln()))
        .fold(0.0, f64::max);
    SparseStudy { rows, fit, degree_constant }
}

/// Network realizing the partial sum over `set` on `[-1, 1]^d` within `delta_net`.
pub fn sparse_to_relu(expansion: &ChaosExpansion, set: &[MultiIndex], delta_net: f64) -> Result<ReluNetwork> {
    let t: std::collections::BTreeMap<&MultiIndex, f64> = expansion.entries.iter().map(|e| (&e.nu, e.t)).collect();
    let terms: Vec<(MultiIndex, f64)> = set
        .iter()
        .map(|nu| t.get(nu).map(|v| (nu.clone(), *v)).ok_or_else(|| Error::InvalidArgument(format!("{nu:?} not in the expansion"))))
        .collect::<Result<_>>()?;
    sparse_monomial_net(expansion.d, &terms, delta_net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::LevyModel1D;

    fn sector(c1: f64) -> SymbolSector {
        SymbolSector::new(1.0, c1, c1 + 1.0, 1.0).unwrap()
    }

    #[test]
    fn b_sequence_example() {
        let (rp, b) = b_sequence(1, 1.0, &sector(0.5)).unwrap();
        assert_eq!(rp, 0.5);
        assert!((b[0] - 1.0).abs() < 1e-15);
        let z = coeff_bound(&[0, 0], 1.0, &sector(0.5), 3.0).unwrap();
        assert!((z - 3.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-15);
        assert!(coeff_bound(&[2], 2.0, &sector(0.5), 1.0).unwrap() < coeff_bound(&[2], 1.0, &sector(0.5), 1.0).unwrap());
        let low = SymbolSector { rho: 0.5, rho_vec: None, c1: 0.5, c2: 1.0, c3: 0.0 };
        assert!(matches!(coeff_bound(&[1], 1.0, &low, 1.0), Err(Error::RhoTooSmall(_))));
    }

    #[test]
    fn tau0_and_certificate() {
        assert!((tau0(1, 1.0, 1.0, 0.5) - 1.0).abs() < 1e-15);
        assert!(tau0(3, 1.0, 1.0, 0.5) > tau0(2, 1.0, 1.0, 0.5));
        assert!(tau0(2, 1.0, 0.5, 0.5) > tau0(2, 1.0, 1.0, 0.5));
        let t0 = tau0(2, 1.0, 1.0, 0.5);
        let c = summability_certificate(2, 2.0 * t0, 1.0, 0.5, 2.0, 1.0);
        let want = 2.0 / (2.0 * std::f64::consts::PI) / (1.0 - 2.0 * (2.0 * 2.0 * t0 * 0.5f64).powf(-0.5));
        assert!(c.finite && (c.lq_norm_bound.unwrap() - want).abs() < 1e-14);
        assert!(!summability_certificate(2, t0, 1.0, 0.5, 2.0, 1.0).finite);
        assert!(!summability_certificate(2, 0.9 * t0, 1.0, 0.5, 2.0, 1.0).finite);
    }

    #[test]
    fn gaussian_heat_kernel_coefficients() {
        // v(tau, x) = (w^2 / s^2)^{1/2} exp(-x^2 / (2 s^2)), s^2 = w^2 + sigma^2 tau
        let (w, sigma, tau) = (0.7, 1.0, 1.0);
        let model = LevyModel1D::black_scholes(sigma, 0.0).unwrap().to_d().unwrap();
        let v0 = LogPayoff::Gaussian { width: w, d: 1 };
        let cands: Vec<MultiIndex> = (0..=6).map(|k| vec![k]).collect();
        let exp = taylor_coeffs(&model, &v0, tau, &sector(0.5), &cands).unwrap();
        let s2 = w * w + sigma * sigma * tau;
        let amp = (w * w / s2).sqrt();
        for e in &exp.entries {
            let k = e.nu[0];
            let want = if k % 2 == 1 {
                0.0
            } else {
                let m = (k / 2) as i32;
                amp * (-1.0f64).powi(m) / (2.0 * s2).powi(m) / ln_factorial(m as u32).exp()
            };
            assert!((e.t - want).abs() < 1e-8, "k={k}: {} vs {want}", e.t);
            assert!(e.t.abs() <= e.bound * (1.0 + 1e-6));
        }
    }

    #[test]
    fn downward_closed_and_nested() {
        let model = LevyModelD::independent(&[LevyModel1D::black_scholes(1.0, -0.5).unwrap(); 2]).unwrap();
        let v0 = LogPayoff::Tensor { factors: vec![PayoffSpec::Butterfly { k1: 0.8, k: 1.0, k2: 1.25 }; 2] };
        let sec = sector(0.5);
        let cands = candidate_set(2, 8.0, &sec, 8, 640).unwrap();
        let exp = taylor_coeffs(&model, &v0, 8.0, &sec, &cands).unwrap();
        let seq = index_sequence(&exp);
        assert_eq!(seq[0], vec![0, 0]);
        for n in 1..=seq.len() {
            assert!(is_downward_closed(&seq[..n]));
        }
        assert_eq!(build_index_set(&exp, 1), vec![vec![0, 0]]);
        assert!(is_downward_closed(&cands));
    }

    #[test]
    fn all_indices_counts() {
        assert_eq!(all_indices(2, 3).len(), 10);
        assert_eq!(all_indices(3, 2).len(), 10);
        assert_eq!(all_indices(1, 4), vec![vec![0], vec![1], vec![2], vec![3], vec![4]]);
    }
}
