//! ReLU emulation of products and polynomials.
//!
//! Networks are assembled layer by layer with [`Circuit`]: each tracked value
//! is a linear form in the units of the current layer, and values that must
//! survive into the next layer are passed through `x = relu(x) - relu(-x)`.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::relu::net::{Layer, ReluNetwork};

/// Linear form `c + sum_k w_k h_k` in the units `h` of the current layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Lin {
    pub terms: Vec<(usize, f64)>,
    pub c: f64,
}

impl Lin {
    pub fn constant(c: f64) -> Self {
        Lin { terms: Vec::new(), c }
    }

    pub fn var(i: usize) -> Self {
        Lin { terms: vec![(i, 1.0)], c: 0.0 }
    }

    pub fn scale(&self, s: f64) -> Self {
        Lin { terms: self.terms.iter().map(|(i, w)| (*i, w * s)).collect(), c: self.c * s }
    }

    pub fn add(&self, other: &Lin) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Lin { terms, c: self.c + other.c }
    }

    pub fn sub(&self, other: &Lin) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn shift(&self, c: f64) -> Self {
        Lin { terms: self.terms.clone(), c: self.c + c }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(_, w)| *w == 0.0)
    }
}

/// Layer-by-layer network builder.
#[derive(Debug, Clone)]
pub struct Circuit {
    input_dim: usize,
    width: usize,
    layers: Vec<Layer>,
    pending: Vec<Lin>,
}

impl Circuit {
    pub fn new(input_dim: usize) -> Self {
        Circuit { input_dim, width: input_dim, layers: Vec::new(), pending: Vec::new() }
    }

    /// Adds the unit `relu(lin)` to the next layer and returns its index.
    pub fn unit(&mut self, lin: &Lin) -> usize {
        self.pending.push(lin.clone());
        self.pending.len() - 1
    }

    /// Passes a signed value to the next layer.
    pub fn carry(&mut self, lin: &Lin) -> Lin {
        if lin.is_constant() {
            return Lin::constant(lin.c);
        }
        let p = self.unit(lin);
        let n = self.unit(&lin.scale(-1.0));
        Lin { terms: vec![(p, 1.0), (n, -1.0)], c: 0.0 }
    }

    /// Passes a value known to be nonnegative to the next layer.
    pub fn carry_nonneg(&mut self, lin: &Lin) -> Lin {
        if lin.is_constant() {
            return Lin::constant(lin.c);
        }
        Lin::var(self.unit(lin))
    }

    fn build(&self, rows: &[Lin]) -> Layer {
        let mut layer = Layer::zeros(rows.len(), self.width);
        for (i, lin) in rows.iter().enumerate() {
            for (j, w) in &lin.terms {
                let v = layer.weight(i, *j) + w;
                layer.set_weight(i, *j, v);
            }
            layer.bias_mut()[i] = lin.c;
        }
        layer
    }

    /// Closes the pending layer; subsequent forms refer to its units.
    pub fn advance(&mut self) {
        let rows = std::mem::take(&mut self.pending);
        let layer = self.build(&rows);
        self.width = rows.len();
        self.layers.push(layer);
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Final affine layer producing `outputs`.
    pub fn finish(mut self, outputs: &[Lin]) -> ReluNetwork {
        assert!(self.pending.is_empty(), "unfinished layer");
        let last = self.build(outputs);
        self.layers.push(last);
        ReluNetwork::new(self.input_dim, self.layers).expect("circuit layers chain")
    }
}

/// Number of sawtooth stages so that the product of values bounded by `y`
/// is accurate to `eps`: the error is at most `y^2 2^{-2m-1}`.
pub fn product_depth(y: f64, eps: f64) -> usize {
    let r = (y * y / eps).log2();
    (((r - 1.0) / 2.0).ceil()).max(0.0) as usize
}

pub fn product_error_bound(y: f64, m: usize) -> f64 {
    y * y * 2f64.powi(-(2 * m as i32) - 1)
}

/// Approximate products `u v` of each pair (|u|, |v| <= y), using
/// `u v = y^2 (((u+v)/2y)^2 - ((u-v)/2y)^2)` and the sawtooth square.
/// Uses `m + 1` layers; `carries` are passed through unchanged.
pub fn products(c: &mut Circuit, pairs: &[(Lin, Lin)], y: f64, m: usize, carries: &[Lin]) -> (Vec<Lin>, Vec<Lin>) {
    // (g, acc) per pair and channel
    let mut state: Vec<[(Lin, Lin); 2]> = Vec::with_capacity(pairs.len());
    for (u, v) in pairs {
        let sum = u.add(v).scale(0.5 / y);
        let diff = u.sub(v).scale(0.5 / y);
        let a = Lin { terms: vec![(c.unit(&sum), 1.0), (c.unit(&sum.scale(-1.0)), 1.0)], c: 0.0 };
        let b = Lin { terms: vec![(c.unit(&diff), 1.0), (c.unit(&diff.scale(-1.0)), 1.0)], c: 0.0 };
        state.push([(a.clone(), a), (b.clone(), b)]);
    }
    let mut carried: Vec<Lin> = carries.iter().map(|l| c.carry(l)).collect();
    c.advance();
    for s in 1..=m {
        let inv = 4f64.powi(-(s as i32));
        for st in state.iter_mut() {
            for (g, acc) in st.iter_mut() {
                let h0 = c.unit(g);
                let h1 = c.unit(&g.shift(-0.5));
                let h2 = c.unit(&g.shift(-1.0));
                let h3 = c.unit(acc);
                let g_new = Lin { terms: vec![(h0, 2.0), (h1, -4.0), (h2, 2.0)], c: 0.0 };
                *acc = Lin::var(h3).sub(&g_new.scale(inv));
                *g = g_new;
            }
        }
        carried = carried.iter().map(|l| c.carry(l)).collect();
        c.advance();
    }
    let out = state.iter().map(|st| st[0].1.sub(&st[1].1).scale(y * y)).collect();
    (out, carried)
}

/// Stand-alone product network `(u, v) -> approx u v` on `[-y, y]^2`.
pub fn product_net(y: f64, eps: f64) -> ReluNetwork {
    let m = product_depth(y, eps);
    let mut c = Circuit::new(2);
    let (p, _) = products(&mut c, &[(Lin::var(0), Lin::var(1))], y, m, &[]);
    c.finish(&p)
}

/// Emulates `sum_k coeffs[k] T_k(x)` on [-1, 1] to sup accuracy `delta`
/// through the Clenshaw recurrence with approximate products.
pub fn polynomial_emulator(coeffs: &[f64], delta: f64) -> Result<ReluNetwork> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta = {delta} outside (0, 1)")));
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidArgument("non-finite coefficient".into()));
    }
    let mut p = coeffs.len().saturating_sub(1);
    while p > 0 && coeffs[p] == 0.0 {
        p -= 1;
    }
    let c0 = coeffs.first().copied().unwrap_or(0.0);
    if p == 0 {
        return Ok(ReluNetwork::constant(1, &[c0]));
    }
    if p == 1 {
        let c1 = coeffs[1];
        let first = Layer::from_rows(&[vec![1.0], vec![-1.0]], vec![0.0, 0.0])?;
        let last = Layer::from_rows(&[vec![c1, -c1]], vec![c0])?;
        return ReluNetwork::new(1, vec![first, last]);
    }
    // |b_j| <= sum_{i >= j} |c_i| (i - j + 1) on [-1, 1]
    let bbound = |j: usize| -> f64 { (j..=p).map(|i| coeffs[i].abs() * (i - j + 1) as f64).sum() };
    let eta = delta / (2.0 * p as f64);
    let slack = p as f64 * delta;
    let mut circ = Circuit::new(1);
    let mut x = Lin::var(0);
    // b_{k+2}, b_{k+1}
    let mut b2 = Lin::constant(coeffs[p]);
    let mut b1 = x.scale(2.0 * coeffs[p]).shift(coeffs[p - 1]);
    for k in (0..=p - 2).rev() {
        let y = (bbound(k + 1) + slack).max(1.0);
        let m = product_depth(y, eta);
        let (prod, carried) = products(&mut circ, &[(x.clone(), b1.clone())], y, m, &[x.clone(), b1.clone(), b2.clone()]);
        x = carried[0].clone();
        let b1c = carried[1].clone();
        let b2c = carried[2].clone();
        if k == 0 {
            let result = prod[0].shift(c0).sub(&b2c);
            return Ok(circ.finish(&[result]));
        }
        let bk = prod[0].scale(2.0).shift(coeffs[k]).sub(&b2c);
        b2 = b1c;
        b1 = bk;
    }
    unreachable!("loop returns at k = 0")
}

/// Exact Chebyshev sum `sum_k c_k T_k(x)` by Clenshaw.
pub fn chebyshev_eval(coeffs: &[f64], x: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for k in (1..coeffs.len()).rev() {
        let b = coeffs[k] + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b;
    }
    coeffs.first().copied().unwrap_or(0.0) + x * b1 - b2
}

/// Network for the sparse polynomial `sum_nu t_nu x^nu` on `[-1, 1]^d`, `d <= 3`,
/// accurate to `delta`. Each monomial is the product of a coordinate with a
/// lower-degree parent monomial.
pub fn sparse_monomial_net(d: usize, terms: &[(Vec<u32>, f64)], delta: f64) -> Result<ReluNetwork> {
    if d > 3 {
        return Err(Error::DimensionTooLarge(d));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("delta = {delta} must be positive")));
    }
    let mut coef: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
    for (nu, t) in terms {
        if nu.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: nu.len() });
        }
        *coef.entry(nu.clone()).or_insert(0.0) += t;
    }
    let degree = |nu: &[u32]| nu.iter().sum::<u32>();
    let parent = |nu: &[u32]| -> (usize, Vec<u32>) {
        let j = nu.iter().rposition(|v| *v > 0).expect("nonzero index");
        let mut p = nu.to_vec();
        p[j] -= 1;
        (j, p)
    };
    // all monomials of degree >= 2 needed, including chain ancestors
    let mut needed: BTreeSet<Vec<u32>> = BTreeSet::new();
    for nu in coef.keys() {
        let mut cur = nu.clone();
        while degree(&cur) >= 2 && needed.insert(cur.clone()) {
            cur = parent(&cur).1;
        }
    }
    let weight: f64 = coef.iter().map(|(nu, t)| t.abs() * degree(nu).saturating_sub(1) as f64).sum();
    let max_deg = needed.iter().map(|n| degree(n)).max().unwrap_or(1);
    let eps = if weight > 0.0 { (delta / weight).min(0.05 / max_deg as f64) } else { 0.05 };
    let y = 1.1;
    let m = product_depth(y, eps);

    let mut circ = Circuit::new(d);
    let mut xs: Vec<Lin> = (0..d).map(Lin::var).collect();
    let mut sum = Lin::constant(coef.get(&vec![0; d]).copied().unwrap_or(0.0));
    let mut mono: BTreeMap<Vec<u32>, Lin> = BTreeMap::new();
    for j in 0..d {
        let mut e = vec![0; d];
        e[j] = 1;
        if let Some(t) = coef.get(&e) {
            sum = sum.add(&xs[j].scale(*t));
        }
        mono.insert(e, xs[j].clone());
    }
    for k in 2..=max_deg {
        let level: Vec<&Vec<u32>> = needed.iter().filter(|n| degree(n) == k).collect();
        let pairs: Vec<(Lin, Lin)> = level
            .iter()
            .map(|nu| {
                let (j, p) = parent(nu);
                (xs[j].clone(), mono[&p].clone())
            })
            .collect();
        let mut carries = xs.clone();
        carries.push(sum.clone());
        let (prods, carried) = products(&mut circ, &pairs, y, m, &carries);
        xs = carried[..d].to_vec();
        sum = carried[d].clone();
        mono.retain(|_, _| false);
        for (nu, p) in level.iter().zip(prods) {
            if let Some(t) = coef.get(*nu) {
                sum = sum.add(&p.scale(*t));
            }
            mono.insert((*nu).clone(), p);
        }
    }
    Ok(circ.finish(&[sum]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::linspace;

    #[test]
    fn product_accuracy() {
        for (y, eps) in [(1.0, 1e-3), (2.5, 1e-6), (1.0, 1e-9)] {
            let net = product_net(y, eps);
            let grid = linspace(-y, y, 41);
            for u in &grid {
                for v in &grid {
                    let e = (net.eval1(&[*u, *v]) - u * v).abs();
                    assert!(e <= eps * (1.0 + 1e-9), "y={y} eps={eps} u={u} v={v} err={e}");
                }
            }
        }
    }

    #[test]
    fn constant_and_linear_polynomials_exact() {
        let c = polynomial_emulator(&[0.7], 1e-3).unwrap();
        assert_eq!(c.eval1(&[0.3]), 0.7);
        let l = polynomial_emulator(&[0.0, 1.0], 1e-3).unwrap();
        for x in linspace(-1.0, 1.0, 101) {
            assert_eq!(l.eval1(&[x]), x);
        }
        assert_eq!(l.depth(), 2);
    }

    #[test]
    fn t4_within_delta() {
        let coeffs = [0.0, 0.0, 0.0, 0.0, 1.0];
        let net = polynomial_emulator(&coeffs, 1e-3).unwrap();
        let err = linspace(-1.0, 1.0, 10_000)
            .iter()
            .map(|x| (net.eval1(&[*x]) - (8.0 * x.powi(4) - 8.0 * x * x + 1.0)).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-3, "err={err}");
    }

    #[test]
    fn clenshaw_matches_cosine_form() {
        let c = [0.3, -0.2, 0.5, 0.1, -0.05];
        for x in linspace(-1.0, 1.0, 17) {
            let t = x.acos();
            let direct: f64 = c.iter().enumerate().map(|(k, ck)| ck * (k as f64 * t).cos()).sum();
            assert!((chebyshev_eval(&c, x) - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn sparse_monomials() {
        let terms = vec![
            (vec![0, 0], 0.5),
            (vec![1, 0], -0.25),
            (vec![1, 1], 0.75),
            (vec![2, 1], -0.3),
            (vec![0, 3], 0.2),
        ];
        let delta = 1e-5;
        let net = sparse_monomial_net(2, &terms, delta).unwrap();
        for x in linspace(-1.0, 1.0, 21) {
            for y in linspace(-1.0, 1.0, 21) {
                let want: f64 = terms
                    .iter()
                    .map(|(nu, t)| t * x.powi(nu[0] as i32) * y.powi(nu[1] as i32))
                    .sum();
                assert!((net.eval1(&[x, y]) - want).abs() <= delta);
            }
        }
        let c = sparse_monomial_net(2, &[(vec![0, 0], 1.5)], delta).unwrap();
        assert_eq!(c.eval1(&[0.2, -0.4]), 1.5);
        let a = sparse_monomial_net(2, &[(vec![0, 0], 1.5), (vec![1, 0], 2.0)], delta).unwrap();
        assert_eq!(a.eval1(&[0.25, -0.4]), 2.0);
        assert!(matches!(sparse_monomial_net(4, &terms, delta), Err(Error::DimensionTooLarge(4))));
    }
}
