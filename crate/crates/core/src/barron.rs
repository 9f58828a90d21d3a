//! Barron norms, their monotonicity under the pricing semigroup, and greedy or
//! random-feature fits of shallow ReLU networks.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::levy::LevyModelD;
use crate::quad::{integrate_adaptive, GaussLegendre};
use crate::relu::{Layer, ReluNetwork};
use crate::rng::stream;
use crate::stats::halton;

type Field = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Function known through `|f_hat|` (unitary transform).
#[derive(Clone)]
pub struct BarronFunction {
    pub d: usize,
    fhat: Field,
    value: Option<Field>,
    /// `f_hat` depends on `|xi|` only.
    pub radial: bool,
    pub analytic_norm: Option<f64>,
}

impl std::fmt::Debug for BarronFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BarronFunction")
            .field("d", &self.d)
            .field("radial", &self.radial)
            .field("analytic_norm", &self.analytic_norm)
            .finish()
    }
}

fn sphere_area(d: usize) -> f64 {
    2.0 * std::f64::consts::PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0)
}

impl BarronFunction {
    /// `f(x) = exp(-lambda^2 |x|^2 / 2)`, `|f_hat(xi)| = lambda^{-d} exp(-|xi|^2 / (2 lambda^2))`.
    pub fn gaussian(d: usize, lambda: f64) -> Result<Self> {
        if d == 0 || !(lambda > 0.0) {
            return Err(Error::InvalidArgument("Gaussian needs d >= 1 and lambda > 0".into()));
        }
        let df = d as f64;
        let norm = lambda * sphere_area(d) * 2f64.powf((df - 1.0) / 2.0) * gamma((df + 1.0) / 2.0);
        Ok(BarronFunction {
            d,
            fhat: Arc::new(move |xi: &[f64]| {
                let r2: f64 = xi.iter().map(|v| v * v).sum();
                lambda.powi(-(d as i32)) * (-r2 / (2.0 * lambda * lambda)).exp()
            }),
            value: Some(Arc::new(move |x: &[f64]| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                (-lambda * lambda * r2 / 2.0).exp()
            })),
            radial: true,
            analytic_norm: Some(norm),
        })
    }

    /// Arbitrary modulus `|f_hat|`; for radial functions it is only called on `(r, 0, .., 0)`.
    pub fn from_fhat(d: usize, radial: bool, fhat: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        BarronFunction { d, fhat: Arc::new(fhat), value: None, radial, analytic_norm: None }
    }

    pub fn fhat(&self, xi: &[f64]) -> f64 {
        (self.fhat)(xi)
    }

    pub fn value(&self, x: &[f64]) -> Option<f64> {
        self.value.as_ref().map(|v| v(x))
    }
}

const NORM_TOL: f64 = 1e-10;

/// `int_0^inf g` by doubling the range until a new piece is negligible.
fn integrate_half_line(mut g: impl FnMut(f64) -> f64) -> Result<(f64, f64)> {
    let (mut total, mut err) = integrate_adaptive(0.0, 1.0, NORM_TOL, &mut g);
    let mut lo = 1.0;
    while lo < 1e12 {
        let (piece, e) = integrate_adaptive(lo, 2.0 * lo, NORM_TOL, &mut g);
        total += piece;
        err += e;
        if piece.abs() <= 1e-15 * total.abs() || (piece == 0.0 && lo > 64.0) {
            return Ok((total, err));
        }
        lo *= 2.0;
    }
    Err(Error::Diverges(format!("integral still growing beyond |xi| = {lo:e}")))
}

/// Angular nodes and weights on the unit sphere in dimension 2 or 3.
fn sphere_rule(d: usize) -> Vec<(Vec<f64>, f64)> {
    let two_pi = 2.0 * std::f64::consts::PI;
    let nt = 64;
    let thetas: Vec<f64> = (0..nt).map(|i| two_pi * i as f64 / nt as f64).collect();
    let wt = two_pi / nt as f64;
    if d == 2 {
        return thetas.iter().map(|t| (vec![t.cos(), t.sin()], wt)).collect();
    }
    let gl = GaussLegendre::new(32);
    let (us, uw) = gl.composite_points(-1.0, 1.0, 1);
    let mut out = vec![];
    for (u, w) in us.iter().zip(&uw) {
        let s = (1.0 - u * u).sqrt();
        for t in &thetas {
            out.push((vec![s * t.cos(), s * t.sin(), *u], w * wt));
        }
    }
    out
}

/// `int |xi| w(xi) |f_hat(xi)| d xi` and its error estimate.
fn weighted_norm(f: &BarronFunction, weight: impl Fn(&[f64]) -> f64) -> Result<(f64, f64)> {
    let d = f.d;
    if d == 1 {
        let (p, ep) = integrate_half_line(|r| r * weight(&[r]) * f.fhat(&[r]))?;
        let (m, em) = integrate_half_line(|r| r * weight(&[-r]) * f.fhat(&[-r]))?;
        return Ok((p + m, ep + em));
    }
    if d <= 3 {
        let rule = sphere_rule(d);
        let mut xi = vec![0.0; d];
        return integrate_half_line(|r| {
            let mut s = 0.0;
            for (dir, w) in &rule {
                for j in 0..d {
                    xi[j] = r * dir[j];
                }
                s += w * weight(&xi) * f.fhat(&xi);
            }
            s * r.powi(d as i32)
        });
    }
    Err(Error::DimensionTooLarge(d))
}

/// `||f||_B = int |xi| |f_hat(xi)| d xi`.
pub fn barron_norm(f: &BarronFunction) -> Result<f64> {
    if f.radial && f.d > 1 {
        let area = sphere_area(f.d);
        let mut e1 = vec![0.0; f.d];
        let (v, _) = integrate_half_line(|r| {
            e1[0] = r;
            area * r.powi(f.d as i32) * f.fhat(&e1)
        })?;
        return Ok(v);
    }
    Ok(weighted_norm(f, |_| 1.0)?.0)
}

/// Barron norm of `xi -> exp(-tau Re psi(xi)) |f_hat(xi)|`, which dominates `|v_hat(tau, .)|`.
pub fn evolved_norm(f: &BarronFunction, model: &LevyModelD, tau: f64) -> Result<f64> {
    if model.dim() != f.d {
        return Err(Error::DimensionMismatch { expected: f.d, got: model.dim() });
    }
    if !(tau >= 0.0) {
        return Err(Error::InvalidArgument(format!("tau = {tau} must be nonnegative")));
    }
    let (v, _) = weighted_norm(f, |xi| (-tau * model.symbol(xi).re).exp())?;
    let base = barron_norm(f)?;
    if v > base * (1.0 + 1e-8) + 1e-12 {
        return Err(Error::InvalidArgument(format!("evolved norm {v} exceeds the initial norm {base}")));
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMethod {
    RandomFeatures,
    Greedy,
}

/// Uniform sampling measure on `[-R, R]^d` with training and evaluation sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct FitConfig {
    pub radius: f64,
    pub train_points: usize,
    pub eval_points: usize,
    /// Random directions examined per greedy step when `d > 1`.
    pub directions: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { radius: 2.0, train_points: 8192, eval_points: 100_000, directions: 32 }
    }
}

/// Unit `relu(w . x + b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Unit {
    pub w: Vec<f64>,
    pub b: f64,
}

impl Unit {
    fn eval(&self, x: &[f64]) -> f64 {
        (self.w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + self.b).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TwoLayerFit {
    pub m: usize,
    pub method: FitMethod,
    pub units: Vec<Unit>,
    /// Outer weights `a_i` of `(1/m) sum_i a_i relu(w_i . x + b_i)`.
    pub a: Vec<f64>,
    /// Root mean square error on the training sample.
    pub train_error: f64,
    /// `L^2(pi)` error on the quasi-random evaluation set.
    pub l2pi_error: f64,
    /// Units with a fitted weight; greedy fits stop once the next unit is numerically dependent.
    pub active_units: usize,
    /// A ridge term was added because the Gram matrix was numerically singular.
    pub regularized: bool,
}

impl TwoLayerFit {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.units.iter().zip(&self.a).map(|(u, a)| a * u.eval(x)).sum::<f64>() / self.m as f64
    }

    /// Depth-2 network with at most `m (d + 2)` nonzero weights.
    pub fn to_network(&self, d: usize) -> Result<ReluNetwork> {
        let m = self.m;
        let mut hidden = Layer::zeros(m, d);
        let mut out = Layer::zeros(1, m);
        for (i, u) in self.units.iter().enumerate() {
            for (j, w) in u.w.iter().enumerate() {
                hidden.set_weight(i, j, *w);
            }
            hidden.bias_mut()[i] = u.b;
            out.set_weight(0, i, self.a[i] / m as f64);
        }
        ReluNetwork::new(d, vec![hidden, out])
    }
}

struct Problem<'a> {
    d: usize,
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    cfg: &'a FitConfig,
    /// One-dimensional fast path: sorted training inputs and prefix sums.
    line: Option<Line>,
}

struct Line {
    xs: Vec<f64>,
    p0: Vec<f64>,
    p1: Vec<f64>,
    p2: Vec<f64>,
    py0: Vec<f64>,
    py1: Vec<f64>,
}

impl Line {
    fn new(xs: Vec<f64>, ys: &[f64]) -> Self {
        let n = xs.len();
        let mut l = Line { xs, p0: vec![0.0; n + 1], p1: vec![0.0; n + 1], p2: vec![0.0; n + 1], py0: vec![0.0; n + 1], py1: vec![0.0; n + 1] };
        for i in 0..n {
            let x = l.xs[i];
            l.p0[i + 1] = l.p0[i] + 1.0;
            l.p1[i + 1] = l.p1[i] + x;
            l.p2[i + 1] = l.p2[i] + x * x;
            l.py0[i + 1] = l.py0[i] + ys[i];
            l.py1[i + 1] = l.py1[i] + ys[i] * x;
        }
        l
    }

    /// Index range where `w x + b > 0` for `w in {-1, 0, 1}`.
    fn active(&self, u: &Unit) -> (usize, usize) {
        let n = self.xs.len();
        let w = u.w[0];
        if w == 0.0 {
            return if u.b > 0.0 { (0, n) } else { (0, 0) };
        }
        if w > 0.0 {
            (self.xs.partition_point(|x| *x <= -u.b), n)
        } else {
            (0, self.xs.partition_point(|x| *x < u.b))
        }
    }

    fn inner(&self, u: &Unit, v: &Unit) -> f64 {
        let (a0, a1) = self.active(u);
        let (b0, b1) = self.active(v);
        let (lo, hi) = (a0.max(b0), a1.min(b1));
        if lo >= hi {
            return 0.0;
        }
        let (w1, c1, w2, c2) = (u.w[0], u.b, v.w[0], v.b);
        let s0 = self.p0[hi] - self.p0[lo];
        let s1 = self.p1[hi] - self.p1[lo];
        let s2 = self.p2[hi] - self.p2[lo];
        w1 * w2 * s2 + (w1 * c2 + w2 * c1) * s1 + c1 * c2 * s0
    }

    fn target_inner(&self, u: &Unit) -> f64 {
        let (lo, hi) = self.active(u);
        if lo >= hi {
            return 0.0;
        }
        u.w[0] * (self.py1[hi] - self.py1[lo]) + u.b * (self.py0[hi] - self.py0[lo])
    }

    /// `sum_k c_k relu(w_k x + b_k)` at every sorted training point.
    fn sweep(&self, units: &[Unit], c: &[f64]) -> Vec<f64> {
        let n = self.xs.len();
        let mut out = vec![0.0; n];
        let mut constant = 0.0;
        let mut up: Vec<(f64, f64, f64)> = vec![];
        let mut down: Vec<(f64, f64, f64)> = vec![];
        for (u, ck) in units.iter().zip(c) {
            let w = u.w[0];
            if w == 0.0 {
                constant += ck * u.b.max(0.0);
            } else if w > 0.0 {
                up.push((-u.b, ck * w, ck * u.b));
            } else {
                down.push((u.b, ck * w, ck * u.b));
            }
        }
        up.sort_by(|a, b| a.0.total_cmp(&b.0));
        down.sort_by(|a, b| b.0.total_cmp(&a.0));
        let (mut slope, mut icpt, mut k) = (0.0, 0.0, 0);
        for i in 0..n {
            while k < up.len() && up[k].0 < self.xs[i] {
                slope += up[k].1;
                icpt += up[k].2;
                k += 1;
            }
            out[i] = constant + slope * self.xs[i] + icpt;
        }
        let (mut slope, mut icpt, mut k) = (0.0, 0.0, 0);
        for i in (0..n).rev() {
            while k < down.len() && down[k].0 > self.xs[i] {
                slope += down[k].1;
                icpt += down[k].2;
                k += 1;
            }
            out[i] += slope * self.xs[i] + icpt;
        }
        out
    }
}

impl<'a> Problem<'a> {
    fn new(d: usize, target: &(dyn Fn(&[f64]) -> f64 + Sync), cfg: &'a FitConfig, seed: u64) -> Self {
        let mut rng = stream(seed, 0);
        let r = cfg.radius;
        let mut x: Vec<Vec<f64>> = (0..cfg.train_points).map(|_| (0..d).map(|_| rng.gen_range(-r..r)).collect()).collect();
        if d == 1 {
            x.sort_by(|a, b| a[0].total_cmp(&b[0]));
        }
        let y: Vec<f64> = x.iter().map(|p| target(p)).collect();
        let line = (d == 1).then(|| Line::new(x.iter().map(|p| p[0]).collect(), &y));
        Problem { d, x, y, cfg, line }
    }

    fn inner(&self, u: &Unit, v: &Unit) -> f64 {
        match &self.line {
            Some(l) => l.inner(u, v),
            None => self.x.iter().map(|p| u.eval(p) * v.eval(p)).sum(),
        }
    }

    fn target_inner(&self, u: &Unit) -> f64 {
        match &self.line {
            Some(l) => l.target_inner(u),
            None => self.x.iter().zip(&self.y).map(|(p, y)| u.eval(p) * y).sum(),
        }
    }

    fn residual(&self, units: &[Unit], c: &[f64]) -> Vec<f64> {
        match &self.line {
            Some(l) => l.sweep(units, c).iter().zip(&self.y).map(|(v, y)| y - v).collect(),
            None => self
                .x
                .iter()
                .zip(&self.y)
                .map(|(p, y)| y - units.iter().zip(c).map(|(u, ck)| ck * u.eval(p)).sum::<f64>())
                .collect(),
        }
    }

    /// Unit of largest normalized correlation `|<r, g>| / ||g||` along `dir` and `-dir`.
    fn scan_direction(&self, dir: &[f64], r: &[f64], best: &mut (f64, Unit)) {
        let n = self.x.len();
        let mut z: Vec<(f64, f64)> = self.x.iter().zip(r).map(|(p, ri)| (dir.iter().zip(p).map(|(a, b)| a * b).sum(), *ri)).collect();
        if self.line.is_none() {
            z.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
        for orient in [1.0, -1.0] {
            let zs: Vec<(f64, f64)> = if orient > 0.0 { z.clone() } else { z.iter().rev().map(|(a, b)| (-a, *b)).collect() };
            let span = zs[n - 1].0 - zs[0].0;
            // suffix sums over the active set {i > j}
            let (mut sr0, mut sr1, mut q0, mut q1, mut q2) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for j in (0..n).rev() {
                let (zj, rj) = zs[j];
                sr0 += rj;
                sr1 += rj * zj;
                q0 += 1.0;
                q1 += zj;
                q2 += zj * zj;
                let hi = zj;
                let lo = if j == 0 { zj - span } else { zs[j - 1].0 };
                if !(hi > lo) {
                    continue;
                }
                let score = |t: f64| {
                    let nn = q2 - 2.0 * t * q1 + t * t * q0;
                    if nn <= 0.0 {
                        0.0
                    } else {
                        (sr1 - t * sr0).abs() / nn.sqrt()
                    }
                };
                let mut cands = [lo, 0.5 * (lo + hi), f64::NAN];
                let den = sr0 * q1 - sr1 * q0;
                if den != 0.0 {
                    let t = (sr0 * q2 - sr1 * q1) / den;
                    if t > lo && t < hi {
                        cands[2] = t;
                    }
                }
                for t in cands.into_iter().filter(|t| t.is_finite()) {
                    let s = score(t);
                    if s > best.0 {
                        let w: Vec<f64> = dir.iter().map(|v| orient * v).collect();
                        *best = (s, Unit { w, b: -t });
                    }
                }
            }
        }
    }

    fn select(&self, r: &[f64], step: u64, seed: u64) -> (f64, Unit) {
        let n = r.len() as f64;
        let sr: f64 = r.iter().sum();
        let mut best = (sr.abs() / n.sqrt(), Unit { w: vec![0.0; self.d], b: 1.0 });
        if self.d == 1 {
            self.scan_direction(&[1.0], r, &mut best);
            return best;
        }
        let mut rng = stream(seed, step + 1);
        let mut dirs: Vec<Vec<f64>> = (0..self.d).map(|j| (0..self.d).map(|i| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        for _ in 0..self.cfg.directions {
            let g: Vec<f64> = (0..self.d).map(|_| StandardNormal.sample(&mut rng)).collect();
            let nrm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            dirs.push(g.iter().map(|v| v / nrm).collect());
        }
        for dir in &dirs {
            self.scan_direction(dir, r, &mut best);
        }
        best
    }

    fn eval_error(&self, units: &[Unit], c: &[f64], target: &(dyn Fn(&[f64]) -> f64 + Sync)) -> f64 {
        let r = self.cfg.radius;
        let pts = halton(self.cfg.eval_points, self.d);
        let se: f64 = pts
            .iter()
            .map(|h| {
                let x: Vec<f64> = h.iter().map(|u| r * (2.0 * u - 1.0)).collect();
                let v: f64 = units.iter().zip(c).map(|(u, ck)| ck * u.eval(&x)).sum();
                (target(&x) - v).powi(2)
            })
            .sum();
        (se / pts.len() as f64).sqrt()
    }
}

/// Incremental Cholesky factor of a Gram matrix with ridge fallback.
struct Chol {
    rows: Vec<Vec<f64>>,
    y: Vec<f64>,
    regularized: bool,
}

impl Chol {
    fn new() -> Self {
        Chol { rows: vec![], y: vec![], regularized: false }
    }

    /// Appends a column with Gram entries `col` (previous units), diagonal `diag` and target inner product `rhs`.
    /// A numerically dependent column is regularized when `ridge` is set and rejected otherwise.
    fn push(&mut self, col: &[f64], diag: f64, rhs: f64, ridge: bool) -> bool {
        let k = self.rows.len();
        let mut l = vec![0.0; k + 1];
        for i in 0..k {
            let row = &self.rows[i];
            let s: f64 = row[..i].iter().zip(&l[..i]).map(|(a, b)| a * b).sum();
            l[i] = (col[i] - s) / row[i];
        }
        let mut piv2 = diag - l[..k].iter().map(|v| v * v).sum::<f64>();
        if piv2 <= 1e-12 * diag {
            if !ridge {
                return false;
            }
            self.regularized = true;
            piv2 = piv2.max(0.0) + 1e-10 * diag;
        }
        l[k] = piv2.sqrt();
        let s: f64 = l[..k].iter().zip(&self.y).map(|(a, b)| a * b).sum();
        self.y.push((rhs - s) / l[k]);
        self.rows.push(l);
        true
    }

    fn coefficients(&self) -> Vec<f64> {
        let mut y = self.y.clone();
        let k = y.len();
        let mut a = vec![0.0; k];
        for i in (0..k).rev() {
            a[i] = y[i] / self.rows[i][i];
            let ai = a[i];
            for (yj, lij) in y[..i].iter_mut().zip(&self.rows[i][..i]) {
                *yj -= lij * ai;
            }
        }
        a
    }
}

fn finish(p: &Problem, m: usize, method: FitMethod, units: &[Unit], c: &[f64], regularized: bool, target: &(dyn Fn(&[f64]) -> f64 + Sync)) -> TwoLayerFit {
    let r = p.residual(units, c);
    let train_error = (r.iter().map(|v| v * v).sum::<f64>() / r.len() as f64).sqrt();
    let l2pi_error = p.eval_error(units, c, target);
    let active_units = units.len();
    let mut all_units = units.to_vec();
    let mut a: Vec<f64> = c.iter().map(|v| v * m as f64).collect();
    while all_units.len() < m {
        all_units.push(Unit { w: vec![0.0; p.d], b: 0.0 });
        a.push(0.0);
    }
    TwoLayerFit { m, method, units: all_units, a, train_error, l2pi_error, active_units, regularized }
}

/// Fits `(1/m) sum a_i relu(w_i . x + b_i)` to `target` under the uniform measure on
/// `[-R, R]^d`, returning one fit per entry of `m_list`. Greedy fits are nested.
pub fn fit_two_layer(
    d: usize,
    target: &(dyn Fn(&[f64]) -> f64 + Sync),
    m_list: &[usize],
    method: FitMethod,
    cfg: &FitConfig,
    seed: u64,
) -> Result<Vec<TwoLayerFit>> {
    if d == 0 || m_list.is_empty() || m_list.iter().any(|m| *m == 0) {
        return Err(Error::InvalidArgument("fit needs d >= 1 and m >= 1".into()));
    }
    if !(cfg.radius > 0.0) || cfg.train_points < 2 || cfg.eval_points == 0 {
        return Err(Error::config("fit", "radius must be positive and point counts nonzero"));
    }
    let p = Problem::new(d, target, cfg, seed);
    let yy: f64 = p.y.iter().map(|v| v * v).sum();
    match method {
        FitMethod::Greedy => {
            let mut sorted = m_list.to_vec();
            sorted.sort_unstable();
            let m_max = *sorted.last().unwrap();
            let mut units: Vec<Unit> = vec![];
            let mut chol = Chol::new();
            let mut c: Vec<f64> = vec![];
            let mut fits = vec![];
            let mut next = 0;
            for step in 0..m_max {
                while next < sorted.len() && sorted[next] == step {
                    fits.push(finish(&p, sorted[next], method, &units, &c, chol.regularized, target));
                    next += 1;
                }
                let r = p.residual(&units, &c);
                let rr: f64 = r.iter().map(|v| v * v).sum();
                let (score, unit) = p.select(&r, step as u64, seed);
                if rr <= 1e-28 * yy.max(1e-300) || score <= 1e-13 * yy.sqrt() {
                    break;
                }
                let col: Vec<f64> = units.iter().map(|u| p.inner(u, &unit)).collect();
                if !chol.push(&col, p.inner(&unit, &unit), p.target_inner(&unit), false) {
                    break;
                }
                units.push(unit);
                c = chol.coefficients();
            }
            while next < sorted.len() {
                fits.push(finish(&p, sorted[next], method, &units, &c, chol.regularized, target));
                next += 1;
            }
            let order: Vec<usize> = m_list.iter().map(|m| sorted.iter().position(|s| s == m).unwrap()).collect();
            Ok(order.into_iter().map(|i| fits[i].clone()).collect())
        }
        FitMethod::RandomFeatures => m_list
            .iter()
            .map(|&m| {
                let mut rng = stream(seed, 1 << 32 | m as u64);
                let units: Vec<Unit> = (0..m)
                    .map(|_| {
                        let g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
                        let nrm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                        let w: Vec<f64> = if d == 1 { vec![g[0].signum()] } else { g.iter().map(|v| v / nrm).collect() };
                        let b = rng.gen_range(-cfg.radius * (d as f64).sqrt()..cfg.radius * (d as f64).sqrt());
                        Unit { w, b }
                    })
                    .collect();
                let mut chol = Chol::new();
                for (k, u) in units.iter().enumerate() {
                    let col: Vec<f64> = units[..k].iter().map(|v| p.inner(v, u)).collect();
                    let diag = p.inner(u, u);
                    if diag == 0.0 {
                        chol.push(&col, 1.0, 0.0, true);
                        chol.regularized = true;
                    } else {
                        chol.push(&col, diag, p.target_inner(u), true);
                    }
                }
                let c = chol.coefficients();
                Ok(finish(&p, m, method, &units, &c, chol.regularized, target))
            })
            .collect(),
    }
}

/// `max(1, R) m^{-1/2} ||f||_B`.
pub fn two_layer_bound(radius: f64, m: usize, norm: f64) -> f64 {
    radius.max(1.0) * norm / (m as f64).sqrt()
}
