//! Parametric exponential Levy models: symbols, martingale drifts,
//! exponential moments, triplet bounds and exact increment sampling.
//!
//! Conventions: the symbol satisfies `E[exp(i xi X_t)] = exp(-t psi(xi))`
//! and jumps are compensated on the unit ball, so `gamma` is the drift of
//! the triplet with truncation `1_{|y| <= 1}` (`||y|| <= 1` in d dimensions).

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_ur};

use crate::error::{Error, Result};
use crate::stats::{norm_cdf, norm_pdf};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Compound-Poisson jump law with intensity `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "camelCase")]
pub enum JumpLaw {
    /// Normal jump sizes `N(mu_j, sigma_j^2)`.
    #[serde(rename_all = "camelCase")]
    Merton { lambda: f64, mu_j: f64, sigma_j: f64 },
    /// Double-exponential jump sizes.
    #[serde(rename_all = "camelCase")]
    Kou { lambda: f64, p_up: f64, eta_plus: f64, eta_minus: f64 },
}

impl JumpLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            JumpLaw::Merton { lambda, mu_j, sigma_j } => {
                if !(lambda >= 0.0 && sigma_j >= 0.0 && mu_j.is_finite() && lambda.is_finite() && sigma_j.is_finite()) {
                    return Err(Error::InvalidModel(format!("bad Merton parameters {self:?}")));
                }
            }
            JumpLaw::Kou { lambda, p_up, eta_plus, eta_minus } => {
                if !(lambda >= 0.0 && (0.0..=1.0).contains(&p_up) && eta_minus > 0.0 && lambda.is_finite()) {
                    return Err(Error::InvalidModel(format!("bad Kou parameters {self:?}")));
                }
                if !(eta_plus > 1.0) {
                    return Err(Error::MomentDiverges {
                        order: 1.0,
                        reason: format!("Kou etaPlus = {eta_plus} must exceed 1"),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn lambda(&self) -> f64 {
        match *self {
            JumpLaw::Merton { lambda, .. } | JumpLaw::Kou { lambda, .. } => lambda,
        }
    }

    /// `E[exp(i z J)]` for complex `z` (analytic continuation where finite).
    pub fn char_fn(&self, z: Complex64) -> Complex64 {
        match *self {
            JumpLaw::Merton { mu_j, sigma_j, .. } => (I * z * mu_j - 0.5 * sigma_j * sigma_j * z * z).exp(),
            JumpLaw::Kou { p_up, eta_plus, eta_minus, .. } => {
                p_up * eta_plus / (eta_plus - I * z) + (1.0 - p_up) * eta_minus / (eta_minus + I * z)
            }
        }
    }

    /// `E[exp(a J)]`.
    pub fn mgf(&self, a: f64) -> Result<f64> {
        match *self {
            JumpLaw::Merton { mu_j, sigma_j, .. } => Ok((a * mu_j + 0.5 * a * a * sigma_j * sigma_j).exp()),
            JumpLaw::Kou { p_up, eta_plus, eta_minus, .. } => {
                self.kou_domain(a, p_up)?;
                Ok(up_part(p_up, eta_plus, a) + up_part(1.0 - p_up, eta_minus, -a))
            }
        }
    }

    fn kou_domain(&self, a: f64, p_up: f64) -> Result<()> {
        if let JumpLaw::Kou { eta_plus, eta_minus, .. } = *self {
            if (a >= eta_plus && p_up > 0.0) || (a <= -eta_minus && p_up < 1.0) {
                return Err(Error::MomentDiverges {
                    order: a,
                    reason: format!("Kou tails (etaPlus={eta_plus}, etaMinus={eta_minus})"),
                });
            }
        }
        Ok(())
    }

    /// `E[J^k; |J| <= c]` for `k` in 0..=2.
    pub fn truncated_moment(&self, k: u32, c: f64) -> f64 {
        match *self {
            JumpLaw::Merton { mu_j, sigma_j, .. } => normal_moment(mu_j, sigma_j, k, -c, c),
            JumpLaw::Kou { p_up, eta_plus, eta_minus, .. } => {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                p_up * exp_moment_upto(eta_plus, k, c) + sign * (1.0 - p_up) * exp_moment_upto(eta_minus, k, c)
            }
        }
    }

    /// `E[exp(a J); |J| > c]`.
    pub fn tail_mgf(&self, a: f64, c: f64) -> Result<f64> {
        match *self {
            JumpLaw::Merton { mu_j, sigma_j, .. } => {
                Ok(normal_exp_partial(mu_j, sigma_j, a, c, f64::INFINITY)
                    + normal_exp_partial(mu_j, sigma_j, a, f64::NEG_INFINITY, -c))
            }
            JumpLaw::Kou { p_up, eta_plus, eta_minus, .. } => {
                self.kou_domain(a, p_up)?;
                Ok(up_tail(p_up, eta_plus, a, c) + up_tail(1.0 - p_up, eta_minus, -a, c))
            }
        }
    }

    /// `int (exp(i z y) - 1 - i z y 1_{|y|<=c}) nu(dy)` for this law.
    fn exponent(&self, z: Complex64, c: f64) -> Complex64 {
        let lam = self.lambda();
        if lam == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        lam * (self.char_fn(z) - 1.0 - I * z * self.truncated_moment(1, c))
    }

    /// Real log-mgf contribution `int (exp(a y) - 1 - a y 1_{|y|<=c}) nu(dy)`.
    fn log_mgf(&self, a: f64, c: f64) -> Result<f64> {
        let lam = self.lambda();
        if lam == 0.0 {
            return Ok(0.0);
        }
        Ok(lam * (self.mgf(a)? - 1.0 - a * self.truncated_moment(1, c)))
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            JumpLaw::Merton { mu_j, sigma_j, .. } => {
                let z: f64 = rng.sample(StandardNormal);
                mu_j + sigma_j * z
            }
            JumpLaw::Kou { p_up, eta_plus, eta_minus, .. } => {
                let u: f64 = rng.gen();
                let e: f64 = -(1.0 - rng.gen::<f64>()).ln();
                if u < p_up {
                    e / eta_plus
                } else {
                    -e / eta_minus
                }
            }
        }
    }

    /// Sum of `n` independent jump sizes.
    fn sample_sum<R: Rng>(&self, n: u64, rng: &mut R) -> f64 {
        match *self {
            JumpLaw::Merton { mu_j, sigma_j, .. } => {
                if n == 0 {
                    return 0.0;
                }
                let z: f64 = rng.sample(StandardNormal);
                n as f64 * mu_j + sigma_j * (n as f64).sqrt() * z
            }
            JumpLaw::Kou { .. } => (0..n).map(|_| self.sample(rng)).sum(),
        }
    }
}

fn up_part(p: f64, eta: f64, a: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        p * eta / (eta - a)
    }
}

fn up_tail(p: f64, eta: f64, a: f64, c: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        p * eta * (-(eta - a) * c).exp() / (eta - a)
    }
}

/// `eta * int_0^c y^k exp(-eta y) dy`.
fn exp_moment_upto(eta: f64, k: u32, c: f64) -> f64 {
    let x = eta * c;
    let e = (-x).exp();
    match k {
        0 => -(-x).exp_m1(),
        1 => (1.0 - e * (1.0 + x)) / eta,
        2 => (2.0 - e * (2.0 + 2.0 * x + x * x)) / (eta * eta),
        _ => unreachable!("moments up to order 2"),
    }
}

/// Standard normal mass of (lo, hi), computed on the accurate side.
fn std_normal_mass(lo: f64, hi: f64) -> f64 {
    if lo > 0.0 {
        norm_cdf(-lo) - norm_cdf(-hi)
    } else {
        norm_cdf(hi) - norm_cdf(lo)
    }
}

fn phi_times(x: f64, k: u32) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        x.powi(k as i32) * norm_pdf(x)
    }
}

/// `E[J^k; lo < J < hi]` for `J ~ N(mu, s^2)`, `k` in 0..=2.
fn normal_moment(mu: f64, s: f64, k: u32, lo: f64, hi: f64) -> f64 {
    if s == 0.0 {
        return if lo <= mu && mu <= hi { mu.powi(k as i32) } else { 0.0 };
    }
    let a = (lo - mu) / s;
    let b = (hi - mu) / s;
    let p = std_normal_mass(a, b);
    let e1 = phi_times(a, 0) - phi_times(b, 0);
    let e2 = p + phi_times(a, 1) - phi_times(b, 1);
    match k {
        0 => p,
        1 => mu * p + s * e1,
        2 => mu * mu * p + 2.0 * mu * s * e1 + s * s * e2,
        _ => unreachable!("moments up to order 2"),
    }
}

/// `E[exp(a J); lo < J < hi]` for `J ~ N(mu, s^2)`.
fn normal_exp_partial(mu: f64, s: f64, a: f64, lo: f64, hi: f64) -> f64 {
    if s == 0.0 {
        return if lo < mu && mu < hi { (a * mu).exp() } else { 0.0 };
    }
    let shift = mu + a * s * s;
    (a * mu + 0.5 * a * a * s * s).exp() * std_normal_mass((lo - shift) / s, (hi - shift) / s)
}

/// Variant of a one-dimensional model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum LevyVariant {
    BlackScholes,
    #[serde(rename_all = "camelCase")]
    Merton { lambda: f64, mu_j: f64, sigma_j: f64 },
    #[serde(rename_all = "camelCase")]
    Kou { lambda: f64, p_up: f64, eta_plus: f64, eta_minus: f64 },
    /// CGMY tempered stable jumps; symbol only.
    #[serde(rename = "TemperedStable")]
    TemperedStable { c: f64, g: f64, m: f64, y: f64 },
}

/// One-dimensional Levy model `(sigma^2, gamma, nu)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevyModel1D {
    pub sigma: f64,
    pub gamma: f64,
    #[serde(flatten)]
    pub variant: LevyVariant,
}

impl LevyModel1D {
    pub fn new(sigma: f64, gamma: f64, variant: LevyVariant) -> Result<Self> {
        let m = LevyModel1D { sigma, gamma, variant };
        m.validate()?;
        Ok(m)
    }

    pub fn black_scholes(sigma: f64, gamma: f64) -> Result<Self> {
        Self::new(sigma, gamma, LevyVariant::BlackScholes)
    }

    pub fn merton(sigma: f64, gamma: f64, lambda: f64, mu_j: f64, sigma_j: f64) -> Result<Self> {
        Self::new(sigma, gamma, LevyVariant::Merton { lambda, mu_j, sigma_j })
    }

    pub fn kou(sigma: f64, gamma: f64, lambda: f64, p_up: f64, eta_plus: f64, eta_minus: f64) -> Result<Self> {
        Self::new(sigma, gamma, LevyVariant::Kou { lambda, p_up, eta_plus, eta_minus })
    }

    pub fn tempered_stable(sigma: f64, gamma: f64, c: f64, g: f64, m: f64, y: f64) -> Result<Self> {
        Self::new(sigma, gamma, LevyVariant::TemperedStable { c, g, m, y })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite() && self.gamma.is_finite()) {
            return Err(Error::InvalidModel(format!("sigma={} gamma={}", self.sigma, self.gamma)));
        }
        if let Some(law) = self.jump_law() {
            law.validate()?;
        }
        if let LevyVariant::TemperedStable { c, g, m, y } = self.variant {
            if !(c > 0.0 && g > 0.0 && y > 0.0 && y < 2.0) {
                return Err(Error::InvalidModel(format!("bad CGMY parameters C={c} G={g} Y={y}")));
            }
            if y == 1.0 {
                return Err(Error::InvalidModel("CGMY with Y = 1 is not supported".into()));
            }
            if !(m > 1.0) {
                return Err(Error::MomentDiverges { order: 1.0, reason: format!("CGMY M = {m} must exceed 1") });
            }
        }
        Ok(())
    }

    /// Finite-activity jump law, if any.
    pub fn jump_law(&self) -> Option<JumpLaw> {
        match self.variant {
            LevyVariant::Merton { lambda, mu_j, sigma_j } => Some(JumpLaw::Merton { lambda, mu_j, sigma_j }),
            LevyVariant::Kou { lambda, p_up, eta_plus, eta_minus } => {
                Some(JumpLaw::Kou { lambda, p_up, eta_plus, eta_minus })
            }
            _ => None,
        }
    }

    /// Drift `b` in `X_t = b t + sigma W_t + (sum of jumps up to t)`; finite-activity models only.
    pub fn uncompensated_drift(&self) -> Option<f64> {
        match self.variant {
            LevyVariant::BlackScholes => Some(self.gamma),
            _ => self.jump_law().map(|j| self.gamma - j.lambda() * j.truncated_moment(1, 1.0)),
        }
    }

    pub fn is_simulable(&self) -> bool {
        !matches!(self.variant, LevyVariant::TemperedStable { .. })
    }

    /// Symbol at a complex argument.
    pub fn symbol_complex(&self, z: Complex64) -> Complex64 {
        let mut psi = 0.5 * self.sigma * self.sigma * z * z - I * z * self.gamma;
        if let Some(law) = self.jump_law() {
            psi -= law.exponent(z, 1.0);
        }
        if let LevyVariant::TemperedStable { c, g, m, y } = self.variant {
            psi -= cgmy_exponent(c, g, m, y, z);
        }
        psi
    }

    pub fn symbol(&self, xi: f64) -> Complex64 {
        self.symbol_complex(Complex64::new(xi, 0.0))
    }

    /// `log E[exp(p X_1)] = -psi(-i p)`, from the real closed forms.
    pub fn log_mgf(&self, p: f64) -> Result<f64> {
        let mut k = 0.5 * self.sigma * self.sigma * p * p + self.gamma * p;
        if let Some(law) = self.jump_law() {
            k += law.log_mgf(p, 1.0)?;
        }
        if let LevyVariant::TemperedStable { c, g, m, y } = self.variant {
            if p >= m || p <= -g {
                return Err(Error::MomentDiverges { order: p, reason: format!("CGMY with G={g}, M={m}") });
            }
            k += c * gamma(-y) * ((m - p).powf(y) - m.powf(y) + (g + p).powf(y) - g.powf(y))
                - p * cgmy_small_mean(c, g, m, y);
        }
        Ok(k)
    }

    /// Drift making `exp(X_t)` a martingale.
    pub fn martingale_drift(&self) -> Result<f64> {
        let without_drift = LevyModel1D { gamma: 0.0, ..*self };
        Ok(-without_drift.log_mgf(1.0)?)
    }

    pub fn with_martingale_drift(&self) -> Result<Self> {
        Ok(LevyModel1D { gamma: self.martingale_drift()?, ..*self })
    }

    /// `E[exp(p X_T)]` from the closed-form log-mgf.
    pub fn exp_moment(&self, p: f64, t: f64) -> Result<f64> {
        Ok((t * self.log_mgf(p)?).exp())
    }

    /// `E[exp(p X_T)] = exp(-T psi(-i p))` by continuation of the complex symbol.
    pub fn exp_moment_via_symbol(&self, p: f64, t: f64) -> Result<f64> {
        self.log_mgf(p)?;
        Ok((-t * self.symbol_complex(Complex64::new(0.0, -p)).re).exp())
    }

    pub fn to_d(&self) -> Result<LevyModelD> {
        LevyModelD::independent(&[*self])
    }
}

/// `int (exp(i z y) - 1 - i z y 1_{|y|<=1}) nu(dy)` for CGMY.
fn cgmy_exponent(c: f64, g: f64, m: f64, y: f64, z: Complex64) -> Complex64 {
    let mz = Complex64::new(m, 0.0) - I * z;
    let gz = Complex64::new(g, 0.0) + I * z;
    c * gamma(-y) * (mz.powf(y) - m.powf(y) + gz.powf(y) - g.powf(y)) - I * z * cgmy_small_mean(c, g, m, y)
}

/// Principal-value `int_{|y|<=1} y nu(dy)` for CGMY: the full (principal-value)
/// mean `C Gamma(1-Y) (M^{Y-1} - G^{Y-1})` minus the mean over `|y| > 1`.
fn cgmy_small_mean(c: f64, g: f64, m: f64, y: f64) -> f64 {
    let a = 1.0 - y;
    let full = c * gamma(a) * (m.powf(-a) - g.powf(-a));
    let tail = c * (m.powf(-a) * upper_gamma(a, m) - g.powf(-a) * upper_gamma(a, g));
    full - tail
}

/// Upper incomplete gamma `Gamma(a, x)` for `a` in (-1, 1), `a != 0`, `x > 0`.
fn upper_gamma(a: f64, x: f64) -> f64 {
    if a > 0.0 {
        gamma(a) * gamma_ur(a, x)
    } else {
        (gamma(a + 1.0) * gamma_ur(a + 1.0, x) - x.powf(a) * (-x).exp()) / a
    }
}

/// Common-factor jumps `y = beta * J` with `J ~ N(mu, sigma^2)` at rate `lambda`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CommonJump {
    pub lambda: f64,
    pub beta: Vec<f64>,
    pub mu: f64,
    pub sigma: f64,
}

impl CommonJump {
    fn law(&self) -> JumpLaw {
        JumpLaw::Merton { lambda: self.lambda, mu_j: self.mu, sigma_j: self.sigma }
    }

    fn beta_norm(&self) -> f64 {
        self.beta.iter().map(|b| b * b).sum::<f64>().sqrt()
    }

    /// Truncation level on `J` matching `||beta J|| <= 1`.
    fn cutoff(&self) -> f64 {
        let n = self.beta_norm();
        if n == 0.0 {
            f64::INFINITY
        } else {
            1.0 / n
        }
    }

    fn active(&self) -> bool {
        self.lambda > 0.0 && self.beta_norm() > 0.0
    }
}

/// d-dimensional model with diffusion matrix `A`, drift `gamma`,
/// independent marginal jumps and an optional common jump factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", try_from = "LevyModelDRaw", into = "LevyModelDRaw")]
pub struct LevyModelD {
    a: Vec<Vec<f64>>,
    gamma: Vec<f64>,
    idio_jumps: Vec<Option<JumpLaw>>,
    common_jump: Option<CommonJump>,
    sqrt_a: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct LevyModelDRaw {
    a: Vec<Vec<f64>>,
    gamma: Vec<f64>,
    #[serde(default)]
    idio_jumps: Vec<Option<JumpLaw>>,
    #[serde(default)]
    common_jump: Option<CommonJump>,
}

impl TryFrom<LevyModelDRaw> for LevyModelD {
    type Error = Error;
    fn try_from(r: LevyModelDRaw) -> Result<Self> {
        let idio = if r.idio_jumps.is_empty() { vec![None; r.gamma.len()] } else { r.idio_jumps };
        LevyModelD::new(r.a, r.gamma, idio, r.common_jump)
    }
}

impl From<LevyModelD> for LevyModelDRaw {
    fn from(m: LevyModelD) -> Self {
        LevyModelDRaw { a: m.a, gamma: m.gamma, idio_jumps: m.idio_jumps, common_jump: m.common_jump }
    }
}

impl LevyModelD {
    pub fn new(
        a: Vec<Vec<f64>>,
        gamma: Vec<f64>,
        idio_jumps: Vec<Option<JumpLaw>>,
        common_jump: Option<CommonJump>,
    ) -> Result<Self> {
        let d = gamma.len();
        if d == 0 {
            return Err(Error::InvalidModel("dimension must be at least 1".into()));
        }
        if a.len() != d || a.iter().any(|r| r.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: a.len() });
        }
        if idio_jumps.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: idio_jumps.len() });
        }
        let scale = a.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
        for i in 0..d {
            for j in 0..d {
                if !a[i][j].is_finite() || (a[i][j] - a[j][i]).abs() > 1e-10 * scale {
                    return Err(Error::InvalidModel(format!("A is not symmetric at ({i},{j})")));
                }
            }
        }
        let mat = DMatrix::from_fn(d, d, |i, j| a[i][j]);
        let eig = mat.clone().symmetric_eigen();
        if let Some(min) = eig.eigenvalues.iter().cloned().reduce(f64::min) {
            if min < -1e-10 * scale {
                return Err(Error::InvalidModel(format!("A has negative eigenvalue {min}")));
            }
        }
        for law in idio_jumps.iter().flatten() {
            law.validate()?;
        }
        if let Some(cj) = &common_jump {
            if cj.beta.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: cj.beta.len() });
            }
            cj.law().validate()?;
        }
        let sqrt_a = matrix_sqrt(&mat);
        Ok(LevyModelD { a, gamma, idio_jumps, common_jump, sqrt_a })
    }

    /// Independent coordinates, each following a one-dimensional model.
    pub fn independent(models: &[LevyModel1D]) -> Result<Self> {
        let d = models.len();
        let mut a = vec![vec![0.0; d]; d];
        let mut idio = Vec::with_capacity(d);
        for (i, m) in models.iter().enumerate() {
            if !m.is_simulable() {
                return Err(Error::NotSimulable("TemperedStable has no multivariate form here".into()));
            }
            a[i][i] = m.sigma * m.sigma;
            idio.push(m.jump_law());
        }
        let gamma = models.iter().map(|m| m.gamma).collect();
        LevyModelD::new(a, gamma, idio, None)
    }

    pub fn dim(&self) -> usize {
        self.gamma.len()
    }

    pub fn a(&self) -> &[Vec<f64>] {
        &self.a
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn idio_jumps(&self) -> &[Option<JumpLaw>] {
        &self.idio_jumps
    }

    pub fn common_jump(&self) -> Option<&CommonJump> {
        self.common_jump.as_ref()
    }

    pub fn with_gamma(&self, gamma: Vec<f64>) -> Result<Self> {
        LevyModelD::new(self.a.clone(), gamma, self.idio_jumps.clone(), self.common_jump.clone())
    }

    /// Marginal one-dimensional model of coordinate `i` when it has no common factor.
    pub fn marginal_1d(&self, i: usize) -> Option<LevyModel1D> {
        if self.common_jump.as_ref().is_some_and(|c| c.active() && c.beta[i] != 0.0) {
            return None;
        }
        let variant = match self.idio_jumps[i] {
            None => LevyVariant::BlackScholes,
            Some(JumpLaw::Merton { lambda, mu_j, sigma_j }) => LevyVariant::Merton { lambda, mu_j, sigma_j },
            Some(JumpLaw::Kou { lambda, p_up, eta_plus, eta_minus }) => {
                LevyVariant::Kou { lambda, p_up, eta_plus, eta_minus }
            }
        };
        Some(LevyModel1D { sigma: self.a[i][i].sqrt(), gamma: self.gamma[i], variant })
    }

    /// Symbol at a complex vector argument.
    pub fn symbol_complex(&self, z: &[Complex64]) -> Complex64 {
        let d = self.dim();
        assert_eq!(z.len(), d, "argument length must equal the dimension");
        let mut psi = Complex64::new(0.0, 0.0);
        for i in 0..d {
            let mut az = Complex64::new(0.0, 0.0);
            for j in 0..d {
                az += self.a[i][j] * z[j];
            }
            psi += 0.5 * z[i] * az - I * z[i] * self.gamma[i];
            if let Some(law) = &self.idio_jumps[i] {
                psi -= law.exponent(z[i], 1.0);
            }
        }
        if let Some(cj) = &self.common_jump {
            if cj.active() {
                let zb: Complex64 = z.iter().zip(&cj.beta).map(|(a, b)| a * b).sum();
                psi -= cj.law().exponent(zb, cj.cutoff());
            }
        }
        psi
    }

    pub fn symbol(&self, xi: &[f64]) -> Complex64 {
        let z: Vec<Complex64> = xi.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.symbol_complex(&z)
    }

    /// `log E[exp(p X_{1,i})]` from the real closed forms.
    pub fn marginal_log_mgf(&self, i: usize, p: f64) -> Result<f64> {
        let mut k = 0.5 * p * p * self.a[i][i] + p * self.gamma[i];
        if let Some(law) = &self.idio_jumps[i] {
            k += law.log_mgf(p, 1.0)?;
        }
        if let Some(cj) = &self.common_jump {
            if cj.active() {
                let law = cj.law();
                let b = cj.beta[i];
                k += cj.lambda * (law.mgf(p * b)? - 1.0 - p * b * law.truncated_moment(1, cj.cutoff()));
            }
        }
        Ok(k)
    }

    /// Martingale drift vector.
    pub fn martingale_drift(&self) -> Result<Vec<f64>> {
        (0..self.dim())
            .map(|i| Ok(self.gamma[i] - self.marginal_log_mgf(i, 1.0)?))
            .collect()
    }

    pub fn with_martingale_drift(&self) -> Result<Self> {
        self.with_gamma(self.martingale_drift()?)
    }

    /// `E[exp(p X_{T,i})]` from the closed-form log-mgf.
    pub fn exp_moment(&self, i: usize, p: f64, t: f64) -> Result<f64> {
        Ok((t * self.marginal_log_mgf(i, p)?).exp())
    }

    /// `E[exp(p X_{T,i})]` via `exp(-T psi(-i p e_i))`.
    pub fn exp_moment_via_symbol(&self, i: usize, p: f64, t: f64) -> Result<f64> {
        self.marginal_log_mgf(i, p)?;
        let mut z = vec![Complex64::new(0.0, 0.0); self.dim()];
        z[i] = Complex64::new(0.0, -p);
        Ok((-t * self.symbol_complex(&z).re).exp())
    }

    /// `sup_i E[exp(p X_{T,i})]`.
    pub fn sup_exp_moment(&self, p: f64, t: f64) -> Result<f64> {
        let mut m: f64 = 0.0;
        for i in 0..self.dim() {
            m = m.max(self.exp_moment(i, p, t)?);
        }
        Ok(m)
    }

    /// Maximum of `|A_ij|`, `|gamma_i|`, `int_{||y||>1} e^{p y_i} nu(dy)` and
    /// `int_{||y||<=1} y_i^2 nu(dy)` over all coordinates.
    pub fn triplet_bounds(&self, p: f64) -> Result<f64> {
        let d = self.dim();
        let mut b: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                b = b.max(self.a[i][j].abs());
            }
            b = b.max(self.gamma[i].abs());
            let (tail, small) = self.jump_integrals(i, p)?;
            b = b.max(tail).max(small);
        }
        Ok(b)
    }

    /// `(int_{||y||>1} e^{p y_i} nu, int_{||y||<=1} y_i^2 nu)` for coordinate `i`.
    pub fn jump_integrals(&self, i: usize, p: f64) -> Result<(f64, f64)> {
        let mut tail = 0.0;
        let mut small = 0.0;
        for (j, law) in self.idio_jumps.iter().enumerate() {
            let Some(law) = law else { continue };
            let lam = law.lambda();
            if lam == 0.0 {
                continue;
            }
            if j == i {
                tail += lam * law.tail_mgf(p, 1.0)?;
                small += lam * law.truncated_moment(2, 1.0);
            } else {
                tail += lam * (1.0 - law.truncated_moment(0, 1.0));
            }
        }
        if let Some(cj) = &self.common_jump {
            if cj.active() {
                let law = cj.law();
                let c = cj.cutoff();
                let bi = cj.beta[i];
                tail += cj.lambda * law.tail_mgf(p * bi, c)?;
                small += cj.lambda * bi * bi * law.truncated_moment(2, c);
            }
        }
        Ok((tail, small))
    }

    pub fn is_deterministic(&self) -> bool {
        self.a.iter().flatten().all(|v| *v == 0.0)
            && self.idio_jumps.iter().flatten().all(|l| l.lambda() == 0.0)
            && self.common_jump.as_ref().map_or(true, |c| !c.active())
    }

    /// Exact sampler of `X_T`.
    pub fn sampler(&self, t: f64) -> Result<Sampler> {
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!("maturity {t} must be nonnegative")));
        }
        let d = self.dim();
        let rt = t.sqrt();
        let chol = self.sqrt_a.iter().map(|r| r.iter().map(|v| v * rt).collect()).collect();
        let poisson = |lam: f64| if lam * t > 0.0 { Poisson::new(lam * t).ok() } else { None };
        let idio = self
            .idio_jumps
            .iter()
            .map(|l| l.and_then(|law| poisson(law.lambda()).map(|p| (law, p))))
            .collect();
        let common = self
            .common_jump
            .as_ref()
            .filter(|c| c.active())
            .and_then(|c| poisson(c.lambda).map(|p| (c.law(), c.beta.clone(), p)));
        // the symbol compensates small jumps; a compound Poisson draw does not
        let mut drift: Vec<f64> = self.gamma.clone();
        for (g, law) in drift.iter_mut().zip(&self.idio_jumps) {
            if let Some(law) = law {
                *g -= law.lambda() * law.truncated_moment(1, 1.0);
            }
        }
        if let Some(cj) = self.common_jump.as_ref().filter(|c| c.active()) {
            let m = cj.lambda * cj.law().truncated_moment(1, cj.cutoff());
            for (g, b) in drift.iter_mut().zip(&cj.beta) {
                *g -= b * m;
            }
        }
        Ok(Sampler { d, drift: drift.iter().map(|g| g * t).collect(), chol, idio, common })
    }

    /// One exact draw of `X_T`.
    pub fn sample_increment<R: Rng>(&self, t: f64, rng: &mut R) -> Result<Vec<f64>> {
        let s = self.sampler(t)?;
        let mut out = vec![0.0; self.dim()];
        s.sample_into(rng, &mut out);
        Ok(out)
    }
}

/// Square root `L` with `L L^T = A`: Cholesky, then jittered Cholesky,
/// then a clamped eigen-decomposition.
fn matrix_sqrt(a: &DMatrix<f64>) -> Vec<Vec<f64>> {
    let d = a.nrows();
    let to_rows = |m: &DMatrix<f64>| (0..d).map(|i| (0..d).map(|j| m[(i, j)]).collect()).collect();
    if a.iter().all(|v| *v == 0.0) {
        return vec![vec![0.0; d]; d];
    }
    if let Some(c) = a.clone().cholesky() {
        return to_rows(&c.l());
    }
    let jittered = a + DMatrix::identity(d, d) * 1e-12;
    if let Some(c) = jittered.cholesky() {
        return to_rows(&c.l());
    }
    let eig = a.clone().symmetric_eigen();
    let mut l = eig.eigenvectors.clone();
    for j in 0..d {
        let s = eig.eigenvalues[j].max(0.0).sqrt();
        for i in 0..d {
            l[(i, j)] *= s;
        }
    }
    to_rows(&l)
}

/// Precomputed exact sampler of `X_T` for a fixed maturity.
#[derive(Debug, Clone)]
pub struct Sampler {
    d: usize,
    drift: Vec<f64>,
    chol: Vec<Vec<f64>>,
    idio: Vec<Option<(JumpLaw, Poisson<f64>)>>,
    common: Option<(JumpLaw, Vec<f64>, Poisson<f64>)>,
}

/// Jump counts of a single draw.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JumpCounts {
    pub idio: Vec<u64>,
    pub common: u64,
}

impl Sampler {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn sample_into<R: Rng>(&self, rng: &mut R, out: &mut [f64]) {
        self.sample_with_counts(rng, out);
    }

    pub fn sample_with_counts<R: Rng>(&self, rng: &mut R, out: &mut [f64]) -> JumpCounts {
        let d = self.d;
        out[..d].copy_from_slice(&self.drift);
        let mut z = [0.0f64; 64];
        let mut zv;
        let zs: &mut [f64] = if d <= 64 {
            &mut z[..d]
        } else {
            zv = vec![0.0; d];
            &mut zv
        };
        for v in zs.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        for (i, row) in self.chol.iter().enumerate() {
            let mut acc = 0.0;
            for (l, zj) in row.iter().zip(zs.iter()) {
                if *l != 0.0 {
                    acc += l * zj;
                }
            }
            out[i] += acc;
        }
        let mut counts = JumpCounts { idio: vec![0; d], common: 0 };
        for (i, entry) in self.idio.iter().enumerate() {
            if let Some((law, pois)) = entry {
                let n = pois.sample(rng) as u64;
                counts.idio[i] = n;
                out[i] += law.sample_sum(n, rng);
            }
        }
        if let Some((law, beta, pois)) = &self.common {
            let n = pois.sample(rng) as u64;
            counts.common = n;
            let s = law.sample_sum(n, rng);
            for (o, b) in out.iter_mut().zip(beta) {
                *o += b * s;
            }
        }
        counts
    }
}

/// `exp(T (5 p^2 B / 2 + p^2 e^p B))`, the dimension-free moment bound.
pub fn exp_moment_bound(p: f64, t: f64, b: f64) -> f64 {
    (t * (2.5 * p * p * b + p * p * p.exp() * b)).exp()
}

/// Sector condition `C1 |xi|^{2 rho} <= Re psi`, `|psi| <= C2 |xi|^{2 rho} + C3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SymbolSector {
    pub rho: f64,
    #[serde(default)]
    pub rho_vec: Option<Vec<f64>>,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl SymbolSector {
    pub fn new(rho: f64, c1: f64, c2: f64, c3: f64) -> Result<Self> {
        let s = SymbolSector { rho, rho_vec: None, c1, c2, c3 };
        s.validate()?;
        Ok(s)
    }

    pub fn anisotropic(rho_vec: Vec<f64>, c1: f64, c2: f64, c3: f64) -> Result<Self> {
        let rho = rho_vec.iter().cloned().fold(1.0, f64::min);
        let s = SymbolSector { rho, rho_vec: Some(rho_vec), c1, c2, c3 };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(Error::InvalidArgument(format!("rho = {} outside (0, 1]", self.rho)));
        }
        if !(self.c1 >= 0.0 && self.c1 <= self.c2 && self.c3 >= 0.0) {
            return Err(Error::InvalidArgument("sector needs 0 <= C1 <= C2 and C3 >= 0".into()));
        }
        if let Some(v) = &self.rho_vec {
            if let Some(r) = v.iter().find(|r| !(**r > 0.5 && **r <= 1.0)) {
                return Err(Error::RhoTooSmall(*r));
            }
        }
        Ok(())
    }

    /// Lower envelope `C1 |xi|^{2 rho}` or `C1 sum_j |xi_j|^{2 rho_j}`.
    pub fn lower(&self, xi: &[f64]) -> f64 {
        match &self.rho_vec {
            Some(rv) => self.c1 * xi.iter().zip(rv).map(|(x, r)| x.abs().powf(2.0 * r)).sum::<f64>(),
            None => self.c1 * norm2(xi).powf(2.0 * self.rho),
        }
    }

    pub fn upper(&self, xi: &[f64]) -> f64 {
        self.c2 * norm2(xi).powf(2.0 * self.rho) + self.c3
    }
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SectorReport {
    pub holds: bool,
    /// Smallest of `Re psi / lower` and `upper / |psi|` over the grid (1 means tight).
    pub worst_ratio: f64,
    /// `min (Re psi - lower)`.
    pub lower_margin: f64,
    /// `min (upper - |psi|)`.
    pub upper_margin: f64,
}

/// Checks both sector inequalities on a grid of frequency vectors.
pub fn check_sector<F>(symbol: F, sector: &SymbolSector, grid: &[Vec<f64>]) -> SectorReport
where
    F: Fn(&[f64]) -> Complex64,
{
    let tol = 1e-12;
    let mut worst = f64::INFINITY;
    let mut lower_margin = f64::INFINITY;
    let mut upper_margin = f64::INFINITY;
    let mut holds = true;
    for xi in grid {
        let psi = symbol(xi);
        let lo = sector.lower(xi);
        let hi = sector.upper(xi);
        if norm2(xi) > 0.0 {
            lower_margin = lower_margin.min(psi.re - lo);
            if lo > 0.0 {
                worst = worst.min(psi.re / lo);
            }
            if psi.re < lo - tol * lo.abs().max(psi.re.abs()) {
                holds = false;
            }
        }
        let m = psi.norm();
        upper_margin = upper_margin.min(hi - m);
        if m > 0.0 {
            worst = worst.min(hi / m);
        }
        if m > hi + tol * hi.abs().max(m) {
            holds = false;
        }
    }
    SectorReport { holds, worst_ratio: worst, lower_margin, upper_margin }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate_adaptive, GaussLegendre};
    use crate::rng::stream;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    fn fixtures_1d() -> Vec<LevyModel1D> {
        vec![
            LevyModel1D::black_scholes(0.2, 0.0).unwrap(),
            LevyModel1D::merton(0.1, 0.0, 1.0, -0.1, 0.15).unwrap(),
            LevyModel1D::kou(0.15, 0.0, 2.0, 0.4, 10.0, 5.0).unwrap(),
            LevyModel1D::tempered_stable(0.0, 0.0, 1.0, 5.0, 10.0, 0.5).unwrap(),
            LevyModel1D::tempered_stable(0.1, 0.0, 0.5, 4.0, 6.0, 1.5).unwrap(),
        ]
    }

    #[test]
    fn bs_symbol_value() {
        let m = LevyModel1D::black_scholes(0.2, -0.02).unwrap();
        let psi = m.symbol(1.0);
        assert!((psi.re - 0.02).abs() < 1e-15);
        assert!((psi.im - 0.02).abs() < 1e-15);
    }

    #[test]
    fn bs_symbol_matches_characteristic_quadrature() {
        // E[exp(i xi X_1)] for X_1 ~ N(gamma, sigma^2) by direct quadrature
        let (s, g, xi) = (0.2, -0.02, 1.0);
        let rule = GaussLegendre::new(32);
        let dens = |x: f64| (-(x - g) * (x - g) / (2.0 * s * s)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt());
        let cf: Complex64 = rule.composite(g - 3.0, g + 3.0, 64, |x| Complex64::new(0.0, xi * x).exp() * dens(x));
        let psi = -cf.ln();
        let m = LevyModel1D::black_scholes(s, g).unwrap();
        assert!((psi - m.symbol(xi)).norm() < 1e-12);
    }

    #[test]
    fn symbol_vanishes_at_zero() {
        for m in fixtures_1d() {
            assert_eq!(m.symbol(0.0), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn merton_zero_intensity_is_bs() {
        let m = LevyModel1D::merton(0.3, 0.05, 0.0, -0.2, 0.1).unwrap();
        let b = LevyModel1D::black_scholes(0.3, 0.05).unwrap();
        for xi in [-3.0, -0.5, 0.7, 12.0] {
            assert_eq!(m.symbol(xi), b.symbol(xi));
        }
    }

    #[test]
    fn martingale_drift_values() {
        let bs = LevyModel1D::black_scholes(0.2, 0.0).unwrap();
        assert!((bs.martingale_drift().unwrap() + 0.02).abs() < 1e-15);
        let deg = LevyModel1D::merton(0.0, 0.3, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(deg.martingale_drift().unwrap(), 0.0);
    }

    #[test]
    fn martingale_identities() {
        for m in fixtures_1d() {
            let mm = m.with_martingale_drift().unwrap();
            assert!(mm.symbol_complex(Complex64::new(0.0, -1.0)).norm() < 1e-12, "{mm:?}");
            for t in [0.25, 1.0, 3.0] {
                assert!((mm.exp_moment(1.0, t).unwrap() - 1.0).abs() < 1e-12);
                assert!((mm.exp_moment_via_symbol(1.0, t).unwrap() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn exp_moment_bs_value() {
        let m = LevyModel1D::black_scholes(0.2, -0.02).unwrap();
        let v = m.exp_moment(2.0, 1.0).unwrap();
        assert!((v - 0.04f64.exp()).abs() < 1e-14);
        assert!((v - 1.040811).abs() < 1e-6);
    }

    #[test]
    fn exp_moment_bound_value() {
        let direct = (1.0 * (2.5 * 4.0 * 0.04 + 4.0 * 2f64.exp() * 0.04)).exp();
        assert_eq!(exp_moment_bound(2.0, 1.0, 0.04), direct);
        assert!((direct - (0.4 + 0.16 * 2f64.exp()).exp()).abs() < 1e-14);
    }

    #[test]
    fn exp_moment_routes_agree() {
        for m in fixtures_1d() {
            for p in [0.5, 1.0, 2.0, 3.0] {
                let a = m.exp_moment(p, 1.3).unwrap();
                let b = m.exp_moment_via_symbol(p, 1.3).unwrap();
                assert!(close(a, b, 1e-10), "{m:?} p={p}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn kou_moment_diverges() {
        let m = LevyModel1D::kou(0.1, 0.0, 1.0, 0.5, 3.0, 2.0).unwrap();
        assert!(matches!(m.exp_moment(3.0, 1.0), Err(Error::MomentDiverges { .. })));
        assert!(matches!(m.exp_moment(2.9, 1.0), Ok(_)));
        assert!(matches!(
            LevyModel1D::kou(0.1, 0.0, 1.0, 0.5, 1.0, 2.0),
            Err(Error::MomentDiverges { .. })
        ));
        assert!(matches!(
            LevyModel1D::tempered_stable(0.0, 0.0, 1.0, 2.0, 0.9, 0.5),
            Err(Error::MomentDiverges { .. })
        ));
    }

    /// Levy density of the CGMY fixture, integrated numerically.
    #[test]
    fn cgmy_log_mgf_matches_levy_measure_quadrature() {
        let (c, g, mm, y) = (1.0, 5.0, 10.0, 0.5);
        let m = LevyModel1D::tempered_stable(0.0, 0.0, c, g, mm, y).unwrap();
        let p = 2.0;
        let f_pos = |x: f64| c * (-mm * x).exp() / x.powf(1.0 + y);
        let f_neg = |x: f64| c * (-g * x).exp() / x.powf(1.0 + y);
        // substitute x = u^2 near zero to remove the singularity
        let small = |f: &dyn Fn(f64) -> f64, s: f64| {
            integrate_adaptive(0.0, 1.0, 1e-13, |u| {
                let x = u * u;
                if x == 0.0 {
                    0.0
                } else {
                    ((s * p * x).exp_m1() - s * p * x) * f(x) * 2.0 * u
                }
            })
            .0
        };
        let big = |f: &dyn Fn(f64) -> f64, s: f64| {
            integrate_adaptive(1.0, 40.0, 1e-13, |x| ((s * p * x).exp() - 1.0) * f(x)).0
        };
        let total = small(&f_pos, 1.0) + small(&f_neg, -1.0) + big(&f_pos, 1.0) + big(&f_neg, -1.0);
        assert!(close(m.log_mgf(p).unwrap(), total, 1e-9), "{} vs {}", m.log_mgf(p).unwrap(), total);
    }

    #[test]
    fn gamma_at_negative_half() {
        assert!((gamma(-0.5) + 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn conjugate_symmetry_and_nonnegative_real_part() {
        let mut rng = stream(11, 0);
        for m in fixtures_1d() {
            for _ in 0..200 {
                let xi: f64 = rng.gen_range(-50.0..50.0);
                let a = m.symbol(xi);
                let b = m.symbol(-xi);
                assert!((a - b.conj()).norm() <= 1e-12 * a.norm().max(1.0));
                assert!(a.re >= -1e-12);
            }
        }
    }

    fn common_fixture() -> LevyModelD {
        let a = vec![vec![0.04, 0.01], vec![0.01, 0.09]];
        let idio = vec![
            Some(JumpLaw::Merton { lambda: 0.5, mu_j: -0.2, sigma_j: 0.3 }),
            Some(JumpLaw::Kou { lambda: 1.0, p_up: 0.3, eta_plus: 4.0, eta_minus: 3.0 }),
        ];
        let cj = CommonJump { lambda: 0.8, beta: vec![1.5, -0.7], mu: 0.1, sigma: 0.6 };
        LevyModelD::new(a, vec![0.01, -0.03], idio, Some(cj)).unwrap()
    }

    #[test]
    fn sampled_moments_match_symbol() {
        // large jumps make a missing small-jump compensator visible
        let kou = LevyModel1D::kou(0.1, 0.0, 3.0, 0.4, 4.0, 3.0).unwrap().with_martingale_drift().unwrap();
        let merton = LevyModel1D::merton(0.1, 0.0, 2.0, -0.3, 0.4).unwrap().with_martingale_drift().unwrap();
        let models = [kou.to_d().unwrap(), merton.to_d().unwrap(), common_fixture().with_martingale_drift().unwrap()];
        for m in &models {
            let s = m.sampler(0.5).unwrap();
            let mut rng = stream(17, 0);
            let n = 200_000;
            let mut out = vec![0.0; m.dim()];
            for i in 0..m.dim() {
                let (mut sum, mut sq) = (0.0, 0.0);
                for _ in 0..n {
                    s.sample_into(&mut rng, &mut out);
                    let v = out[i].exp();
                    sum += v;
                    sq += v * v;
                }
                let mean = sum / n as f64;
                let se = ((sq / n as f64 - mean * mean) / n as f64).sqrt();
                assert!((mean - 1.0).abs() < 4.0 * se, "{mean} +- {se}");
            }
        }
    }

    #[test]
    fn multivariate_martingale_and_routes() {
        let m = common_fixture().with_martingale_drift().unwrap();
        for i in 0..2 {
            let mut z = vec![Complex64::new(0.0, 0.0); 2];
            z[i] = Complex64::new(0.0, -1.0);
            assert!(m.symbol_complex(&z).norm() < 1e-12);
            assert!((m.exp_moment(i, 1.0, 2.0).unwrap() - 1.0).abs() < 1e-12);
            for p in [0.5, 2.0] {
                let a = m.exp_moment(i, p, 1.0).unwrap();
                let b = m.exp_moment_via_symbol(i, p, 1.0).unwrap();
                assert!(close(a, b, 1e-10));
            }
        }
    }

    #[test]
    fn triplet_bounds_bs() {
        let bs = LevyModel1D::black_scholes(0.2, -0.02).unwrap();
        let m = LevyModelD::independent(&[bs, bs, bs]).unwrap();
        assert!((m.triplet_bounds(2.0).unwrap() - 0.04).abs() < 1e-15);
        let zero = LevyModelD::new(vec![vec![0.0]], vec![0.0], vec![None], None).unwrap();
        assert_eq!(zero.triplet_bounds(2.0).unwrap(), 0.0);
    }

    /// Jump integrals of the common-factor fixture against quadrature of the
    /// one-dimensional normal jump density.
    #[test]
    fn triplet_jump_integrals_match_quadrature() {
        let m = common_fixture();
        let p = 2.0;
        let cj = m.common_jump().unwrap().clone();
        let bn = (cj.beta[0].powi(2) + cj.beta[1].powi(2)).sqrt();
        let cut = 1.0 / bn;
        let dens = |x: f64, mu: f64, s: f64| (-(x - mu).powi(2) / (2.0 * s * s)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt());
        let q = |lo: f64, hi: f64, f: &dyn Fn(f64) -> f64| integrate_adaptive(lo, hi, 1e-14, f).0;
        for i in 0..2 {
            let b = cj.beta[i];
            let mut tail = cj.lambda
                * (q(cut, 12.0, &|x| (p * b * x).exp() * dens(x, cj.mu, cj.sigma))
                    + q(-12.0, -cut, &|x| (p * b * x).exp() * dens(x, cj.mu, cj.sigma)));
            let mut small = cj.lambda * b * b * q(-cut, cut, &|x| x * x * dens(x, cj.mu, cj.sigma));
            // Merton idiosyncratic jumps of coordinate 0
            let mer = |x: f64| dens(x, -0.2, 0.3);
            let kou = |x: f64| {
                if x >= 0.0 {
                    0.3 * 4.0 * (-4.0 * x).exp()
                } else {
                    0.7 * 3.0 * (3.0 * x).exp()
                }
            };
            if i == 0 {
                tail += 0.5 * (q(1.0, 10.0, &|x| (p * x).exp() * mer(x)) + q(-10.0, -1.0, &|x| (p * x).exp() * mer(x)));
                small += 0.5 * q(-1.0, 1.0, &|x| x * x * mer(x));
                tail += 1.0 * (q(1.0, 30.0, &kou) + q(-30.0, -1.0, &kou));
            } else {
                tail += 1.0 * (q(1.0, 30.0, &|x| (p * x).exp() * kou(x)) + q(-30.0, -1.0, &|x| (p * x).exp() * kou(x)));
                small += 1.0 * (q(-1.0, 0.0, &|x| x * x * kou(x)) + q(0.0, 1.0, &|x| x * x * kou(x)));
                tail += 0.5 * (q(1.0, 10.0, &mer) + q(-10.0, -1.0, &mer));
            }
            let (t, s) = m.jump_integrals(i, p).unwrap();
            assert!(close(t, tail, 1e-10), "tail {i}: {t} vs {tail}");
            assert!(close(s, small, 1e-10), "small {i}: {s} vs {small}");
        }
    }

    #[test]
    fn deterministic_sampling() {
        let m = LevyModelD::new(vec![vec![0.0; 2]; 2], vec![0.1, -0.1], vec![None, None], None).unwrap();
        let mut rng = stream(3, 0);
        for _ in 0..10 {
            let x = m.sample_increment(2.0, &mut rng).unwrap();
            assert_eq!(x, vec![0.2, -0.2]);
        }
    }

    #[test]
    fn tempered_stable_not_simulable() {
        let ts = LevyModel1D::tempered_stable(0.0, 0.0, 1.0, 5.0, 10.0, 0.5).unwrap();
        assert!(matches!(ts.to_d(), Err(Error::NotSimulable(_))));
    }

    #[test]
    fn semidefinite_sqrt() {
        let a = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        let m = LevyModelD::new(a.clone(), vec![0.0, 0.0], vec![None, None], None).unwrap();
        let l = &m.sqrt_a;
        for i in 0..2 {
            for j in 0..2 {
                let v: f64 = (0..2).map(|k| l[i][k] * l[j][k]).sum();
                assert!((v - a[i][j]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn sector_checks() {
        let bs = LevyModel1D::black_scholes(0.2, -0.02).unwrap();
        let grid: Vec<Vec<f64>> = (1..=200).map(|k| vec![k as f64 * 0.5 - 50.25]).collect();
        let s = SymbolSector::new(1.0, 0.02, 0.03, 1.0).unwrap();
        let r = check_sector(|x| bs.symbol(x[0]), &s, &grid);
        assert!(r.holds);
        assert!(r.lower_margin.abs() < 1e-12);
        let s0 = SymbolSector::new(1.0, 0.0, 1.0, 1.0).unwrap();
        let mer = LevyModel1D::merton(0.0, 0.0, 1.0, -0.1, 0.15).unwrap();
        assert!(check_sector(|x| mer.symbol(x[0]), &s0, &grid).holds);
        let grid100: Vec<Vec<f64>> = (1..=100).map(|k| vec![k as f64]).collect();
        let s1 = SymbolSector::new(1.0, 0.01, 1.0, 10.0).unwrap();
        assert!(!check_sector(|x| mer.symbol(x[0]), &s1, &grid100).holds);
    }

    #[test]
    fn serde_roundtrip() {
        let m = LevyModel1D::kou(0.1, 0.0, 1.0, 0.5, 3.0, 2.0).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<LevyModel1D>(&s).unwrap(), m);
        let d = common_fixture();
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(serde_json::from_str::<LevyModelD>(&s).unwrap(), d);
    }
}
