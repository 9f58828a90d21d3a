//! Feed-forward ReLU networks stored as dense layers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Affine layer `x -> A x + b` with `A` stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    rows: usize,
    cols: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Layer {
    pub fn new(rows: usize, cols: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, got: a.len() });
        }
        if b.len() != rows {
            return Err(Error::DimensionMismatch { expected: rows, got: b.len() });
        }
        Ok(Layer { rows, cols, a, b })
    }

    pub fn from_rows(a: &[Vec<f64>], b: Vec<f64>) -> Result<Self> {
        let rows = a.len();
        let cols = a.first().map_or(0, |r| r.len());
        if a.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidArgument("ragged weight matrix".into()));
        }
        Layer::new(rows, cols, a.iter().flatten().cloned().collect(), b)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Layer { rows, cols, a: vec![0.0; rows * cols], b: vec![0.0; rows] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.cols + j]
    }

    pub fn set_weight(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.cols..(i + 1) * self.cols]
    }

    pub fn bias(&self) -> &[f64] {
        &self.b
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.b
    }

    pub fn nonzeros(&self) -> usize {
        self.a.iter().chain(&self.b).filter(|v| **v != 0.0).count()
    }

    fn apply(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for i in 0..self.rows {
            let row = self.row(i);
            let mut acc = self.b[i];
            for (w, xi) in row.iter().zip(x) {
                acc += w * xi;
            }
            out.push(acc);
        }
    }

    /// `self * other`, the matrix product of weight blocks (bias of `other` folded in).
    fn after(&self, other: &Layer) -> Layer {
        let mut out = Layer::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let mut bias = self.b[i];
            for k in 0..self.cols {
                let w = self.weight(i, k);
                if w == 0.0 {
                    continue;
                }
                bias += w * other.b[k];
                for j in 0..other.cols {
                    out.a[i * other.cols + j] += w * other.weight(k, j);
                }
            }
            out.b[i] = bias;
        }
        out
    }

    fn operator_norm_bound(&self) -> f64 {
        // Frobenius norm bounds the spectral norm.
        self.a.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Network `((A_1, b_1), ..., (A_L, b_L))` with ReLU on all but the last layer.
#[derive(Debug, Clone, PartialEq)]
pub struct ReluNetwork {
    input_dim: usize,
    layers: Vec<Layer>,
}

/// Size and depth of a network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NetMetrics {
    /// Total number of nonzero weights and biases.
    pub m: usize,
    /// Number of affine layers.
    pub l: usize,
    pub per_layer_m: Vec<usize>,
    pub input_dim: usize,
    pub output_dim: usize,
    pub widths: Vec<usize>,
}

impl ReluNetwork {
    pub fn new(input_dim: usize, layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidArgument("a network needs at least one layer".into()));
        }
        let mut prev = input_dim;
        for l in &layers {
            if l.cols != prev {
                return Err(Error::DimensionMismatch { expected: prev, got: l.cols });
            }
            prev = l.rows;
        }
        Ok(ReluNetwork { input_dim, layers })
    }

    /// Single affine layer.
    pub fn affine(a: &[Vec<f64>], b: Vec<f64>) -> Result<Self> {
        let layer = Layer::from_rows(a, b)?;
        ReluNetwork::new(layer.cols, vec![layer])
    }

    /// Constant map `R^input_dim -> {value}`.
    pub fn constant(input_dim: usize, value: &[f64]) -> Self {
        let layer = Layer { rows: value.len(), cols: input_dim, a: vec![0.0; value.len() * input_dim], b: value.to_vec() };
        ReluNetwork { input_dim, layers: vec![layer] }
    }

    /// Exact identity of depth `depth`, using `x = relu(x) - relu(-x)` when `depth >= 2`.
    pub fn identity(dim: usize, depth: usize) -> Self {
        assert!(depth >= 1);
        let eye = |n: usize| {
            let mut l = Layer::zeros(n, n);
            for i in 0..n {
                l.set_weight(i, i, 1.0);
            }
            l
        };
        if depth == 1 {
            return ReluNetwork { input_dim: dim, layers: vec![eye(dim)] };
        }
        let mut first = Layer::zeros(2 * dim, dim);
        let mut last = Layer::zeros(dim, 2 * dim);
        for i in 0..dim {
            first.set_weight(i, i, 1.0);
            first.set_weight(dim + i, i, -1.0);
            last.set_weight(i, i, 1.0);
            last.set_weight(i, dim + i, -1.0);
        }
        let mut layers = vec![first];
        for _ in 0..depth - 2 {
            layers.push(eye(2 * dim));
        }
        layers.push(last);
        ReluNetwork { input_dim: dim, layers }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("nonempty").rows
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn into_layers(self) -> Vec<Layer> {
        self.layers
    }

    pub fn size(&self) -> usize {
        self.layers.iter().map(Layer::nonzeros).sum()
    }

    pub fn metrics(&self) -> NetMetrics {
        let per: Vec<usize> = self.layers.iter().map(Layer::nonzeros).collect();
        let mut widths = vec![self.input_dim];
        widths.extend(self.layers.iter().map(|l| l.rows));
        NetMetrics {
            m: per.iter().sum(),
            l: self.depth(),
            per_layer_m: per,
            input_dim: self.input_dim,
            output_dim: self.output_dim(),
            widths,
        }
    }

    pub fn realize(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch { expected: self.input_dim, got: x.len() });
        }
        Ok(self.eval(x))
    }

    /// Realization without the dimension check; panics on mismatch.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.input_dim, "input dimension");
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            layer.apply(&cur, &mut next);
            if k < last {
                for v in next.iter_mut() {
                    *v = v.max(0.0);
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }

    /// First output at `x`.
    pub fn eval1(&self, x: &[f64]) -> f64 {
        self.eval(x)[0]
    }

    /// Product of Frobenius norms of the weight matrices, a Lipschitz bound.
    pub fn lipschitz_bound(&self) -> f64 {
        self.layers.iter().map(Layer::operator_norm_bound).product()
    }

    /// `outer . inner`, merging the last affine map of `inner` into the first of `outer`.
    pub fn compose(outer: &ReluNetwork, inner: &ReluNetwork) -> Result<Self> {
        if outer.input_dim != inner.output_dim() {
            return Err(Error::DimensionMismatch { expected: outer.input_dim, got: inner.output_dim() });
        }
        let mut layers: Vec<Layer> = inner.layers[..inner.depth() - 1].to_vec();
        layers.push(outer.layers[0].after(inner.layers.last().expect("nonempty")));
        layers.extend(outer.layers[1..].iter().cloned());
        ReluNetwork::new(inner.input_dim, layers)
    }

    /// Networks on a common input evaluated side by side; outputs are concatenated.
    pub fn parallel(nets: &[ReluNetwork]) -> Result<Self> {
        let first = nets.first().ok_or_else(|| Error::InvalidArgument("no networks".into()))?;
        let d = first.input_dim;
        if let Some(n) = nets.iter().find(|n| n.input_dim != d) {
            return Err(Error::DimensionMismatch { expected: d, got: n.input_dim });
        }
        let depth = nets.iter().map(|n| n.depth()).max().unwrap_or(1);
        let padded: Vec<ReluNetwork> = nets.iter().map(|n| n.pad_depth(depth)).collect();
        let mut layers = Vec::with_capacity(depth);
        for l in 0..depth {
            let blocks: Vec<&Layer> = padded.iter().map(|n| &n.layers[l]).collect();
            layers.push(if l == 0 { vstack(&blocks) } else { block_diag(&blocks) });
        }
        ReluNetwork::new(d, layers)
    }

    /// Realization-preserving extension to depth `target`.
    ///
    /// For depth at least two, identity layers are inserted before the last affine
    /// map (hidden activations are already nonnegative). A single affine layer is
    /// split into `relu(y) - relu(-y)`.
    pub fn pad_depth(&self, target: usize) -> Self {
        let l = self.depth();
        assert!(target >= l, "target depth {target} below current depth {l}");
        if target == l {
            return self.clone();
        }
        let k = target - l;
        if l >= 2 {
            let w = self.layers[l - 2].rows;
            let mut layers = self.layers[..l - 1].to_vec();
            for _ in 0..k {
                let mut eye = Layer::zeros(w, w);
                for i in 0..w {
                    eye.set_weight(i, i, 1.0);
                }
                layers.push(eye);
            }
            layers.push(self.layers[l - 1].clone());
            return ReluNetwork { input_dim: self.input_dim, layers };
        }
        let id = ReluNetwork::identity(self.output_dim(), k + 1);
        ReluNetwork::compose(&id, self).expect("dimensions agree")
    }

    /// `x -> sum_i w_i R(nets[i])(D_i x + c_i)` by the block-matrix construction.
    ///
    /// Every net must have the same depth and output dimension; `D_i` maps the
    /// common input space into the input space of `nets[i]`.
    pub fn average(nets: &[ReluNetwork], w: &[f64], d: &[Vec<Vec<f64>>], c: &[Vec<f64>]) -> Result<Self> {
        let n = nets.len();
        if n == 0 {
            return Err(Error::InvalidArgument("average of zero networks".into()));
        }
        if w.len() != n || d.len() != n || c.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: w.len().min(d.len()).min(c.len()) });
        }
        let l = nets[0].depth();
        let out = nets[0].output_dim();
        for net in nets {
            if net.depth() != l {
                return Err(Error::LayerMismatch(l, net.depth()));
            }
            if net.output_dim() != out {
                return Err(Error::OutputDimMismatch(out, net.output_dim()));
            }
        }
        let in_dim = d[0].first().map_or(0, |r| r.len());
        let mut firsts = Vec::with_capacity(n);
        for (i, net) in nets.iter().enumerate() {
            let di = &d[i];
            if di.len() != net.input_dim || di.iter().any(|r| r.len() != in_dim) {
                return Err(Error::DimensionMismatch { expected: net.input_dim, got: di.len() });
            }
            if c[i].len() != net.input_dim {
                return Err(Error::DimensionMismatch { expected: net.input_dim, got: c[i].len() });
            }
            let shift = Layer::new(net.input_dim, in_dim, di.iter().flatten().cloned().collect(), c[i].clone())?;
            firsts.push(net.layers[0].after(&shift));
        }
        if l == 1 {
            let mut layer = Layer::zeros(out, in_dim);
            for (i, f) in firsts.iter().enumerate() {
                for (acc, v) in layer.a.iter_mut().zip(&f.a) {
                    *acc += w[i] * v;
                }
                for (acc, v) in layer.b.iter_mut().zip(&f.b) {
                    *acc += w[i] * v;
                }
            }
            return ReluNetwork::new(in_dim, vec![layer]);
        }
        let mut layers = Vec::with_capacity(l);
        layers.push(vstack(&firsts.iter().collect::<Vec<_>>()));
        for j in 1..l - 1 {
            let blocks: Vec<&Layer> = nets.iter().map(|net| &net.layers[j]).collect();
            layers.push(block_diag(&blocks));
        }
        let lasts: Vec<&Layer> = nets.iter().map(|net| &net.layers[l - 1]).collect();
        let cols: usize = lasts.iter().map(|b| b.cols).sum();
        let mut last = Layer::zeros(out, cols);
        let mut off = 0;
        for (i, blk) in lasts.iter().enumerate() {
            for r in 0..out {
                for k in 0..blk.cols {
                    last.a[r * cols + off + k] = w[i] * blk.weight(r, k);
                }
                last.b[r] += w[i] * blk.b[r];
            }
            off += blk.cols;
        }
        layers.push(last);
        ReluNetwork::new(in_dim, layers)
    }

    /// Weighted sum `sum_i w_i R(nets[i])(x)` of networks on the same input.
    pub fn linear_combination(nets: &[ReluNetwork], w: &[f64]) -> Result<Self> {
        let depth = nets.iter().map(|n| n.depth()).max().unwrap_or(1);
        let padded: Vec<ReluNetwork> = nets.iter().map(|n| n.pad_depth(depth)).collect();
        let eye: Vec<Vec<Vec<f64>>> = padded.iter().map(|n| identity_rows(n.input_dim)).collect();
        let zero: Vec<Vec<f64>> = padded.iter().map(|n| vec![0.0; n.input_dim]).collect();
        ReluNetwork::average(&padded, w, &eye, &zero)
    }

    pub fn to_document(&self) -> NetworkDocument {
        NetworkDocument {
            input_dim: self.input_dim,
            layers: self
                .layers
                .iter()
                .map(|l| LayerDocument {
                    a: (0..l.rows).map(|i| l.row(i).to_vec()).collect(),
                    b: l.b.clone(),
                })
                .collect(),
        }
    }

    pub fn from_document(doc: &NetworkDocument) -> Result<Self> {
        let mut prev = doc.input_dim;
        let mut layers = Vec::with_capacity(doc.layers.len());
        if doc.layers.is_empty() {
            return Err(Error::ParseError { location: "layers".into(), message: "empty layer list".into() });
        }
        for (k, l) in doc.layers.iter().enumerate() {
            for (i, row) in l.a.iter().enumerate() {
                if row.len() != prev {
                    return Err(Error::ParseError {
                        location: format!("layers[{k}].A[{i}]"),
                        message: format!("expected {prev} columns, found {}", row.len()),
                    });
                }
            }
            if l.b.len() != l.a.len() {
                return Err(Error::ParseError {
                    location: format!("layers[{k}].b"),
                    message: format!("expected {} entries, found {}", l.a.len(), l.b.len()),
                });
            }
            layers.push(Layer::new(l.a.len(), prev, l.a.iter().flatten().cloned().collect(), l.b.clone())?);
            prev = l.a.len();
        }
        ReluNetwork::new(doc.input_dim, layers)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_document()).expect("finite floats serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: NetworkDocument = serde_json::from_str(s).map_err(|e| Error::ParseError {
            location: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        ReluNetwork::from_document(&doc)
    }
}

/// Serialized form `{ "inputDim": .., "layers": [ { "A": [[..]], "b": [..] } ] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDocument {
    #[serde(rename = "inputDim")]
    pub input_dim: usize,
    pub layers: Vec<LayerDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerDocument {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

pub fn identity_rows(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

pub fn diag_rows(v: &[f64]) -> Vec<Vec<f64>> {
    (0..v.len()).map(|i| (0..v.len()).map(|j| if i == j { v[i] } else { 0.0 }).collect()).collect()
}

fn vstack(blocks: &[&Layer]) -> Layer {
    let cols = blocks[0].cols;
    let rows: usize = blocks.iter().map(|b| b.rows).sum();
    let mut a = Vec::with_capacity(rows * cols);
    let mut b = Vec::with_capacity(rows);
    for blk in blocks {
        debug_assert_eq!(blk.cols, cols);
        a.extend_from_slice(&blk.a);
        b.extend_from_slice(&blk.b);
    }
    Layer { rows, cols, a, b }
}

fn block_diag(blocks: &[&Layer]) -> Layer {
    let rows: usize = blocks.iter().map(|b| b.rows).sum();
    let cols: usize = blocks.iter().map(|b| b.cols).sum();
    let mut out = Layer::zeros(rows, cols);
    let (mut r0, mut c0) = (0, 0);
    for blk in blocks {
        for i in 0..blk.rows {
            for j in 0..blk.cols {
                out.a[(r0 + i) * cols + c0 + j] = blk.weight(i, j);
            }
            out.b[r0 + i] = blk.b[i];
        }
        r0 += blk.rows;
        c0 += blk.cols;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;

    fn call(k: f64) -> ReluNetwork {
        ReluNetwork::new(
            1,
            vec![Layer::from_rows(&[vec![1.0]], vec![-k]).unwrap(), Layer::from_rows(&[vec![1.0]], vec![0.0]).unwrap()],
        )
        .unwrap()
    }

    #[test]
    fn realize_call() {
        let n = call(1.0);
        assert_eq!(n.realize(&[2.0]).unwrap(), vec![1.0]);
        assert_eq!(n.realize(&[0.5]).unwrap(), vec![0.0]);
        assert!(matches!(n.realize(&[1.0, 2.0]), Err(Error::DimensionMismatch { .. })));
        let m = n.metrics();
        assert_eq!((m.m, m.l), (3, 2));
        assert_eq!(m.per_layer_m, vec![2, 1]);
    }

    #[test]
    fn affine_single_layer() {
        let n = ReluNetwork::affine(&[vec![1.0, -2.0], vec![0.5, 0.0]], vec![0.25, -1.0]).unwrap();
        assert_eq!(n.eval(&[-3.0, 1.0]), vec![-3.0 - 2.0 + 0.25, -1.5 - 1.0]);
    }

    #[test]
    fn zero_weights_count_zero() {
        let n = ReluNetwork::new(2, vec![Layer::zeros(3, 2), Layer::zeros(1, 3)]).unwrap();
        assert_eq!(n.metrics().m, 0);
    }

    #[test]
    fn pad_preserves_realization() {
        let n = call(1.0);
        assert_eq!(n.pad_depth(2), n);
        let p = n.pad_depth(4);
        assert_eq!(p.depth(), 4);
        for i in 0..1000 {
            let s = -1.0 + 4.0 * i as f64 / 999.0;
            assert!((p.eval1(&[s]) - n.eval1(&[s])).abs() <= 1e-12);
        }
        assert!(p.size() <= n.size() + 4 * 1 * 2);
        let a = ReluNetwork::affine(&[vec![1.0, -2.0]], vec![0.5]).unwrap().pad_depth(3);
        assert_eq!(a.depth(), 3);
        assert!((a.eval1(&[0.3, 0.9]) - (0.3 - 1.8 + 0.5)).abs() < 1e-15);
    }

    #[test]
    fn identity_nets() {
        for depth in 1..5 {
            let id = ReluNetwork::identity(3, depth);
            assert_eq!(id.eval(&[-1.5, 0.0, 2.25]), vec![-1.5, 0.0, 2.25]);
        }
    }

    #[test]
    fn compose_and_parallel() {
        let inner = ReluNetwork::affine(&[vec![2.0]], vec![-1.0]).unwrap();
        let c = ReluNetwork::compose(&call(0.0), &inner).unwrap();
        assert_eq!(c.eval1(&[1.0]), 1.0);
        assert_eq!(c.eval1(&[0.25]), 0.0);
        let par = ReluNetwork::parallel(&[call(1.0), ReluNetwork::affine(&[vec![3.0]], vec![0.0]).unwrap()]).unwrap();
        assert_eq!(par.eval(&[2.0]), vec![1.0, 6.0]);
        assert_eq!(par.eval(&[-2.0]), vec![0.0, -6.0]);
    }

    #[test]
    fn average_identity_case() {
        let mut rng = stream(5, 0);
        let net = ReluNetwork::new(
            2,
            vec![
                Layer::from_rows(&[vec![1.0, -1.0], vec![0.5, 2.0], vec![0.0, 1.0]], vec![0.1, -0.2, 0.3]).unwrap(),
                Layer::from_rows(&[vec![1.0, -1.0, 2.0]], vec![0.7]).unwrap(),
            ],
        )
        .unwrap();
        let avg = ReluNetwork::average(&[net.clone()], &[1.0], &[identity_rows(2)], &[vec![0.0, 0.0]]).unwrap();
        for _ in 0..100 {
            let x = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            assert!((avg.eval1(&x) - net.eval1(&x)).abs() <= 1e-12);
        }
    }

    #[test]
    fn average_of_shifted_calls() {
        let mut rng = stream(6, 0);
        let xs = [0.1f64, -0.3];
        let d: Vec<_> = xs.iter().map(|x| vec![vec![x.exp()]]).collect();
        let avg = ReluNetwork::average(&[call(1.0), call(1.0)], &[0.5, 0.5], &d, &[vec![0.0], vec![0.0]]).unwrap();
        assert_eq!(avg.size(), 6);
        for _ in 0..100 {
            let s: f64 = rng.gen_range(0.0..3.0);
            let want = 0.5 * (s * xs[0].exp() - 1.0).max(0.0) + 0.5 * (s * xs[1].exp() - 1.0).max(0.0);
            assert!((avg.eval1(&[s]) - want).abs() <= 1e-12);
        }
    }

    #[test]
    fn zero_weight_drops_last_block() {
        let avg = ReluNetwork::average(&[call(1.0), call(2.0)], &[0.0, 1.0], &[vec![vec![1.0]], vec![vec![1.0]]], &[vec![0.0], vec![0.0]])
            .unwrap();
        assert_eq!(avg.metrics().per_layer_m, vec![4, 1]);
    }

    #[test]
    fn average_rejects_mismatch() {
        let deep = call(1.0).pad_depth(3);
        assert!(matches!(
            ReluNetwork::average(&[call(1.0), deep], &[0.5, 0.5], &[vec![vec![1.0]], vec![vec![1.0]]], &[vec![0.0], vec![0.0]]),
            Err(Error::LayerMismatch(2, 3))
        ));
        let two = ReluNetwork::parallel(&[call(1.0), call(2.0)]).unwrap();
        assert!(matches!(
            ReluNetwork::average(&[call(1.0), two], &[0.5, 0.5], &[vec![vec![1.0]], vec![vec![1.0]]], &[vec![0.0], vec![0.0]]),
            Err(Error::OutputDimMismatch(1, 2))
        ));
    }

    #[test]
    fn json_roundtrip_and_errors() {
        let n = ReluNetwork::parallel(&[call(1.0), call(0.1 + 0.2)]).unwrap();
        let back = ReluNetwork::from_json(&n.to_json()).unwrap();
        assert_eq!(back, n);
        let bad = r#"{"inputDim":2,"layers":[{"A":[[1.0]],"b":[0.0]}]}"#;
        match ReluNetwork::from_json(bad) {
            Err(Error::ParseError { location, .. }) => assert_eq!(location, "layers[0].A[0]"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(ReluNetwork::from_json("{"), Err(Error::ParseError { .. })));
    }
}
