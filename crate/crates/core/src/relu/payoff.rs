//! Payoff functions and their exact ReLU representations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relu::emulate::{Circuit, Lin};
use crate::relu::net::{Layer, ReluNetwork};

/// European payoff `phi(s)` on spot vectors `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum PayoffSpec {
    /// `(s - K)^+`
    Call { k: f64 },
    /// `(K - s)^+`
    Put { k: f64 },
    /// Tent with support `[k1, k2]` and peak `k - k1` at `k`.
    Butterfly { k1: f64, k: f64, k2: f64 },
    /// `(sum_i w_i s_i - K)^+`
    BasketCall { weights: Vec<f64>, k: f64 },
    /// `(max_i s_i - K)^+`
    CallOnMax { k: f64 },
    /// `sum_i w_i (s_i - K)^+`
    SeparableCalls { weights: Vec<f64>, k: f64 },
    Constant { c: f64 },
}

/// Growth and Lipschitz constants of an exact payoff network:
/// `|phi(s)| <= c d^qt (1 + |s|^p)`, `M(phi) <= c d^qt`, `Lip <= c d^qt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PayoffConstants {
    pub c: f64,
    pub q: f64,
    pub q_tilde: f64,
    pub p: f64,
    pub lipschitz: f64,
}

impl PayoffSpec {
    pub fn validate(&self, d: usize) -> Result<()> {
        match self {
            PayoffSpec::Butterfly { k1, k, k2 } if !(k1 < k && k < k2) => {
                Err(Error::InvalidArgument(format!("butterfly needs k1 < k < k2, got {k1}, {k}, {k2}")))
            }
            PayoffSpec::BasketCall { weights, .. } | PayoffSpec::SeparableCalls { weights, .. } if weights.len() != d => {
                Err(Error::DimensionMismatch { expected: d, got: weights.len() })
            }
            PayoffSpec::Call { .. } | PayoffSpec::Put { .. } | PayoffSpec::Butterfly { .. } if d != 1 => {
                Err(Error::DimensionMismatch { expected: 1, got: d })
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, s: &[f64]) -> f64 {
        match self {
            PayoffSpec::Call { k } => (s[0] - k).max(0.0),
            PayoffSpec::Put { k } => (k - s[0]).max(0.0),
            PayoffSpec::Butterfly { k1, k, k2 } => butterfly(*k1, *k, *k2, s[0]),
            PayoffSpec::BasketCall { weights, k } => {
                (weights.iter().zip(s).map(|(w, x)| w * x).sum::<f64>() - k).max(0.0)
            }
            PayoffSpec::CallOnMax { k } => (s.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - k).max(0.0),
            PayoffSpec::SeparableCalls { weights, k } => {
                weights.iter().zip(s).map(|(w, x)| w * (x - k).max(0.0)).sum()
            }
            PayoffSpec::Constant { c } => *c,
        }
    }

    /// Lipschitz constant in the Euclidean norm.
    pub fn lipschitz(&self, d: usize) -> f64 {
        match self {
            PayoffSpec::Call { .. } | PayoffSpec::Put { .. } | PayoffSpec::CallOnMax { .. } => 1.0,
            PayoffSpec::Butterfly { k1, k, k2 } => 1f64.max((k - k1) / (k2 - k)),
            PayoffSpec::BasketCall { weights, .. } | PayoffSpec::SeparableCalls { weights, .. } => {
                weights.iter().map(|w| w * w).sum::<f64>().sqrt()
            }
            PayoffSpec::Constant { .. } => {
                let _ = d;
                0.0
            }
        }
    }

    /// Whether `v_0 = phi o exp` has compact support in log-price.
    pub fn has_compact_log_support(&self) -> bool {
        matches!(self, PayoffSpec::Butterfly { .. })
    }

    /// Unitary Fourier transform of `x -> phi(exp(x))` for compactly supported payoffs.
    pub fn log_payoff_fourier(&self, xi: f64) -> Option<num_complex::Complex64> {
        match self {
            PayoffSpec::Butterfly { k1, k, k2 } => Some(butterfly_log_fourier(*k1, *k, *k2, xi)),
            _ => None,
        }
    }
}

fn butterfly(k1: f64, k: f64, k2: f64, s: f64) -> f64 {
    let slope = (k - k1) / (k2 - k);
    (s - k1).max(0.0) - (1.0 + slope) * (s - k).max(0.0) + slope * (s - k2).max(0.0)
}

/// `int_l^u (a e^x + c) e^{-i x xi} dx` for complex arithmetic.
fn affine_exp_segment(a: f64, c: f64, l: f64, u: f64, xi: f64) -> num_complex::Complex64 {
    use num_complex::Complex64;
    let z = Complex64::new(1.0, -xi);
    let exp_part = if a == 0.0 { Complex64::new(0.0, 0.0) } else { a * ((z * u).exp() - (z * l).exp()) / z };
    let const_part = if c == 0.0 {
        Complex64::new(0.0, 0.0)
    } else if xi == 0.0 {
        Complex64::new(c * (u - l), 0.0)
    } else {
        let w = Complex64::new(0.0, -xi);
        c * ((w * u).exp() - (w * l).exp()) / w
    };
    exp_part + const_part
}

fn butterfly_log_fourier(k1: f64, k: f64, k2: f64, xi: f64) -> num_complex::Complex64 {
    let slope = (k - k1) / (k2 - k);
    let (l1, l, l2) = (k1.ln(), k.ln(), k2.ln());
    // rising part e^x - k1 on [ln k1, ln k], falling part slope (k2 - e^x) on [ln k, ln k2]
    let rise = affine_exp_segment(1.0, -k1, l1, l, xi);
    let fall = affine_exp_segment(-slope, slope * k2, l, l2, xi);
    (rise + fall) / (2.0 * std::f64::consts::PI).sqrt()
}

/// Exact ReLU network of the payoff together with its growth constants.
pub fn payoff_net(spec: &PayoffSpec, d: usize) -> Result<(ReluNetwork, PayoffConstants)> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    spec.validate(d)?;
    let net = match spec {
        PayoffSpec::Call { k } => two_layer(&[vec![1.0]], &[-k], &[1.0], 0.0)?,
        PayoffSpec::Put { k } => two_layer(&[vec![-1.0]], &[*k], &[1.0], 0.0)?,
        PayoffSpec::Butterfly { k1, k, k2 } => {
            let slope = (k - k1) / (k2 - k);
            two_layer(&[vec![1.0], vec![1.0], vec![1.0]], &[-k1, -k, -k2], &[1.0, -(1.0 + slope), slope], 0.0)?
        }
        PayoffSpec::BasketCall { weights, k } => two_layer(&[weights.clone()], &[-k], &[1.0], 0.0)?,
        PayoffSpec::SeparableCalls { weights, k } => {
            let rows: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
            two_layer(&rows, &vec![-k; d], weights, 0.0)?
        }
        PayoffSpec::CallOnMax { k } => call_on_max(d, *k),
        PayoffSpec::Constant { c } => ReluNetwork::constant(d, &[*c]),
    };
    let lip = spec.lipschitz(d);
    let (q_tilde, p) = if d == 1 && matches!(spec, PayoffSpec::Call { .. } | PayoffSpec::Put { .. } | PayoffSpec::Butterfly { .. } | PayoffSpec::Constant { .. }) {
        (0.0, 2.0)
    } else {
        (1.0, 2.0)
    };
    let scale = (d as f64).powf(q_tilde);
    let growth = growth_coefficient(spec);
    let c = match spec {
        PayoffSpec::Constant { c } if *c == 0.0 => 0.0,
        _ => (net.size() as f64).max(lip).max(growth) / scale,
    };
    Ok((net, PayoffConstants { c, q: 0.0, q_tilde, p, lipschitz: lip }))
}

/// `G` with `|phi(s)| <= G (1 + |s|^2)` on the positive orthant.
fn growth_coefficient(spec: &PayoffSpec) -> f64 {
    match spec {
        // |s| <= (1 + s^2) / 2 + 1/2 <= 1 + s^2
        PayoffSpec::Call { .. } | PayoffSpec::CallOnMax { .. } => 1.0,
        PayoffSpec::Put { k } => k.abs(),
        PayoffSpec::Butterfly { k1, k, .. } => k - k1,
        PayoffSpec::BasketCall { weights, k } => weights.iter().map(|w| w * w).sum::<f64>().sqrt() + k.min(0.0).abs(),
        PayoffSpec::SeparableCalls { weights, k } => {
            weights.iter().map(|w| w.abs()).sum::<f64>() * (1.0 + k.min(0.0).abs())
        }
        PayoffSpec::Constant { c } => c.abs(),
    }
}

fn two_layer(a: &[Vec<f64>], b: &[f64], out: &[f64], out_b: f64) -> Result<ReluNetwork> {
    let first = Layer::from_rows(a, b.to_vec())?;
    let last = Layer::from_rows(&[out.to_vec()], vec![out_b])?;
    ReluNetwork::new(first.cols(), vec![first, last])
}

/// `(max_i s_i - K)^+` by a binary tree of `max(a, b) = relu(a - b) + relu(b) - relu(-b)`.
fn call_on_max(d: usize, k: f64) -> ReluNetwork {
    let mut circ = Circuit::new(d);
    let mut vals: Vec<Lin> = (0..d).map(Lin::var).collect();
    while vals.len() > 1 {
        let mut next = Vec::with_capacity(vals.len().div_ceil(2));
        for pair in vals.chunks(2) {
            if let [a, b] = pair {
                let diff = circ.unit(&a.sub(b));
                let carried = circ.carry(b);
                next.push(carried.add(&Lin::var(diff)));
            } else {
                next.push(circ.carry(&pair[0]));
            }
        }
        circ.advance();
        vals = next;
    }
    let top = circ.unit(&vals[0].shift(-k));
    circ.advance();
    circ.finish(&[Lin::var(top)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;

    #[test]
    fn call_values_and_constants() {
        let (net, c) = payoff_net(&PayoffSpec::Call { k: 1.0 }, 1).unwrap();
        assert_eq!(net.eval1(&[1.0]), 0.0);
        assert_eq!(net.eval1(&[2.0]), 1.0);
        assert_eq!(net.size(), 3);
        assert_eq!((c.c, c.q, c.q_tilde), (3.0, 0.0, 0.0));
    }

    #[test]
    fn basket_values() {
        let spec = PayoffSpec::BasketCall { weights: vec![0.5, 0.5], k: 1.0 };
        let (net, _) = payoff_net(&spec, 2).unwrap();
        assert_eq!(net.eval1(&[1.0, 1.0]), 0.0);
        assert_eq!(net.eval1(&[2.0, 2.0]), 1.0);
    }

    #[test]
    fn call_on_max_values() {
        let (net, _) = payoff_net(&PayoffSpec::CallOnMax { k: 0.0 }, 4).unwrap();
        assert_eq!(net.eval1(&[1.0, 3.0, 2.0, 0.0]), 3.0);
        let mut rng = stream(2, 0);
        for d in 1..9 {
            let spec = PayoffSpec::CallOnMax { k: 0.7 };
            let (net, _) = payoff_net(&spec, d).unwrap();
            assert!(net.depth() <= (d as f64).log2().ceil() as usize + 2);
            for _ in 0..200 {
                let s: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..3.0)).collect();
                assert!((net.eval1(&s) - spec.eval(&s)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn butterfly_shape() {
        let spec = PayoffSpec::Butterfly { k1: 0.8, k: 1.0, k2: 1.3 };
        let (net, c) = payoff_net(&spec, 1).unwrap();
        assert!((spec.eval(&[1.0]) - 0.2).abs() < 1e-15);
        assert_eq!(spec.eval(&[0.5]), 0.0);
        assert!(spec.eval(&[1.4]).abs() < 1e-15);
        for i in 0..=200 {
            let s = 0.5 + i as f64 * 0.005;
            assert!((net.eval1(&[s]) - spec.eval(&[s])).abs() < 1e-14);
        }
        assert_eq!(c.lipschitz, 1.0);
    }

    #[test]
    fn butterfly_fourier_matches_quadrature() {
        use crate::quad::GaussLegendre;
        let spec = PayoffSpec::Butterfly { k1: 0.8, k: 1.0, k2: 1.3 };
        let rule = GaussLegendre::new(40);
        for xi in [0.0, 0.7, -3.0, 25.0] {
            let mut num = num_complex::Complex64::new(0.0, 0.0);
            for (l, u) in [(0.8f64.ln(), 0.0), (0.0, 1.3f64.ln())] {
                num += rule.composite(l, u, 16, |x| {
                    num_complex::Complex64::new(0.0, -x * xi).exp() * spec.eval(&[x.exp()])
                });
            }
            num /= (2.0 * std::f64::consts::PI).sqrt();
            assert!((num - spec.log_payoff_fourier(xi).unwrap()).norm() < 1e-13);
        }
    }

    #[test]
    fn lipschitz_bounds_hold_on_random_pairs() {
        let mut rng = stream(9, 0);
        let specs = [
            (PayoffSpec::Call { k: 1.0 }, 1),
            (PayoffSpec::Butterfly { k1: 0.5, k: 1.2, k2: 1.4 }, 1),
            (PayoffSpec::BasketCall { weights: vec![0.2, 0.3, 0.5], k: 1.0 }, 3),
            (PayoffSpec::CallOnMax { k: 1.0 }, 3),
            (PayoffSpec::SeparableCalls { weights: vec![0.5, 0.5], k: 1.0 }, 2),
        ];
        for (spec, d) in specs {
            let (net, c) = payoff_net(&spec, d).unwrap();
            for _ in 0..2000 {
                let s: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..3.0)).collect();
                let t: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..3.0)).collect();
                let dist = s.iter().zip(&t).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                assert!((net.eval1(&s) - net.eval1(&t)).abs() <= c.lipschitz * dist * (1.0 + 1e-12) + 1e-15);
                assert!((net.eval1(&s) - spec.eval(&s)).abs() <= 1e-12);
            }
        }
    }
}
