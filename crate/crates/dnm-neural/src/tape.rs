//! Define-by-run computation tape with reverse-mode gradients.
//!
//! A `Tape` borrows a `ParamStore`, records operations as nodes, and
//! `backward` walks the record in reverse, accumulating parameter gradients.
//! Losses are 1x1 nodes. Guarded logs keep every op finite on finite input.

use std::collections::BTreeMap;

use ndarray::{concatenate, s, Array2, Axis};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::params::{ParamId, ParamStore};
use crate::{shape_err, NeuralError, Result};

pub type NodeId = usize;

const LOG_FLOOR: f64 = 1e-12;

enum Op {
    Leaf,
    Param {
        id: ParamId,
    },
    ParamRows {
        id: ParamId,
        rows: Vec<usize>,
    },
    /// Weighted row combinations of one parameter table: row t of the output
    /// is sum(w * table[r]) over that token's (r, w) list.
    ParamRowsWeighted {
        id: ParamId,
        rows: Vec<Vec<(usize, f64)>>,
    },
    MatMul(NodeId, NodeId),
    Add(NodeId, NodeId),
    AddRow(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Scale(NodeId, f64),
    Sigmoid(NodeId),
    Tanh(NodeId),
    Relu(NodeId),
    SoftmaxRows(NodeId),
    ConcatCols(NodeId, NodeId),
    ConcatRows(Vec<NodeId>),
    SliceCols(NodeId, usize, usize),
    GatherRows(NodeId, Vec<usize>),
    WeightedMeanRows(NodeId, Vec<f64>),
    SumAll(NodeId),
    Transpose(NodeId),
    Dropout(NodeId, Array2<f64>),
    /// Fused LSTM step over a pre-projected input (xp = x . W_x already
    /// added outside). Value is [h | c] (B x 2H); post-activation gates and
    /// tanh(c) are cached for the backward pass.
    LstmStep {
        xp: NodeId,
        h_prev: NodeId,
        c_prev: NodeId,
        w_h: ParamId,
        b: ParamId,
        hidden: usize,
        gates: Array2<f64>,
        tanh_c: Array2<f64>,
    },
    BceLoss {
        p: NodeId,
        targets: Array2<f64>,
    },
    BceWithLogits {
        z: NodeId,
        targets: Array2<f64>,
        weights: Option<Array2<f64>>,
    },
    CeFromLogits {
        z: NodeId,
        targets: Vec<usize>,
    },
}

struct Node {
    value: Array2<f64>,
    op: Op,
}

/// Parameter gradients accumulated by one backward pass.
#[derive(Debug, Default)]
pub struct Grads {
    by_param: BTreeMap<ParamId, Array2<f64>>,
}

impl Grads {
    pub fn get(&self, id: ParamId) -> Option<&Array2<f64>> {
        self.by_param.get(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &Array2<f64>)> {
        self.by_param.iter().map(|(k, v)| (*k, v))
    }

    fn accumulate(&mut self, id: ParamId, grad: Array2<f64>) {
        match self.by_param.get_mut(&id) {
            Some(g) => *g += &grad,
            None => {
                self.by_param.insert(id, grad);
            }
        }
    }
}

pub struct Tape<'s> {
    store: &'s ParamStore,
    nodes: Vec<Node>,
    /// Train mode enables dropout masking.
    pub train: bool,
}

impl<'s> Tape<'s> {
    pub fn new(store: &'s ParamStore) -> Self {
        Tape {
            store,
            nodes: Vec::new(),
            train: false,
        }
    }

    pub fn value(&self, id: NodeId) -> &Array2<f64> {
        &self.nodes[id].value
    }

    pub fn scalar(&self, id: NodeId) -> f64 {
        self.nodes[id].value[[0, 0]]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Array2<f64>, op: Op) -> NodeId {
        self.nodes.push(Node { value, op });
        self.nodes.len() - 1
    }

    fn dims(&self, id: NodeId) -> (usize, usize) {
        self.nodes[id].value.dim()
    }

    pub fn leaf(&mut self, value: Array2<f64>) -> NodeId {
        self.push(value, Op::Leaf)
    }

    pub fn param(&mut self, id: ParamId) -> NodeId {
        self.push(self.store.value(id).clone(), Op::Param { id })
    }

    pub fn param_rows(&mut self, id: ParamId, rows: Vec<usize>) -> NodeId {
        let table = self.store.value(id);
        let mut out = Array2::zeros((rows.len(), table.ncols()));
        for (i, &r) in rows.iter().enumerate() {
            out.row_mut(i).assign(&table.row(r));
        }
        self.push(out, Op::ParamRows { id, rows })
    }

    pub fn param_rows_weighted(&mut self, id: ParamId, rows: Vec<Vec<(usize, f64)>>) -> NodeId {
        let table = self.store.value(id);
        let mut out = Array2::zeros((rows.len(), table.ncols()));
        for (i, combo) in rows.iter().enumerate() {
            for &(r, w) in combo {
                out.row_mut(i).scaled_add(w, &table.row(r));
            }
        }
        self.push(out, Op::ParamRowsWeighted { id, rows })
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (ar, ac) = self.dims(a);
        let (br, bc) = self.dims(b);
        if ac != br {
            return Err(shape_err("matmul", format!("({ar}x{ac}) . ({br}x{bc})")));
        }
        let value = self.nodes[a].value.dot(&self.nodes[b].value);
        Ok(self.push(value, Op::MatMul(a, b)))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        if self.dims(a) != self.dims(b) {
            return Err(shape_err(
                "add",
                format!("{:?} + {:?}", self.dims(a), self.dims(b)),
            ));
        }
        let value = &self.nodes[a].value + &self.nodes[b].value;
        Ok(self.push(value, Op::Add(a, b)))
    }

    /// Matrix plus a broadcast 1-row bias.
    pub fn add_row(&mut self, a: NodeId, row: NodeId) -> Result<NodeId> {
        let (_, ac) = self.dims(a);
        let (rr, rc) = self.dims(row);
        if rr != 1 || rc != ac {
            return Err(shape_err(
                "add_row",
                format!("{:?} + {:?}", self.dims(a), self.dims(row)),
            ));
        }
        let value = &self.nodes[a].value + &self.nodes[row].value.row(0);
        Ok(self.push(value, Op::AddRow(a, row)))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        if self.dims(a) != self.dims(b) {
            return Err(shape_err(
                "sub",
                format!("{:?} - {:?}", self.dims(a), self.dims(b)),
            ));
        }
        let value = &self.nodes[a].value - &self.nodes[b].value;
        Ok(self.push(value, Op::Sub(a, b)))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        if self.dims(a) != self.dims(b) {
            return Err(shape_err(
                "mul",
                format!("{:?} * {:?}", self.dims(a), self.dims(b)),
            ));
        }
        let value = &self.nodes[a].value * &self.nodes[b].value;
        Ok(self.push(value, Op::Mul(a, b)))
    }

    pub fn scale(&mut self, a: NodeId, k: f64) -> NodeId {
        let value = &self.nodes[a].value * k;
        self.push(value, Op::Scale(a, k))
    }

    pub fn sigmoid(&mut self, a: NodeId) -> NodeId {
        let value = self.nodes[a].value.mapv(sigmoid);
        self.push(value, Op::Sigmoid(a))
    }

    pub fn tanh(&mut self, a: NodeId) -> NodeId {
        let value = self.nodes[a].value.mapv(f64::tanh);
        self.push(value, Op::Tanh(a))
    }

    pub fn relu(&mut self, a: NodeId) -> NodeId {
        let value = self.nodes[a].value.mapv(|x| x.max(0.0));
        self.push(value, Op::Relu(a))
    }

    /// Row-wise softmax (stable); rows sum to one.
    pub fn softmax_rows(&mut self, a: NodeId) -> NodeId {
        let mut value = self.nodes[a].value.clone();
        for mut row in value.rows_mut() {
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            row.mapv_inplace(|x| (x - max).exp());
            let sum: f64 = row.sum();
            row.mapv_inplace(|x| x / sum);
        }
        self.push(value, Op::SoftmaxRows(a))
    }

    pub fn concat_cols(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        if self.dims(a).0 != self.dims(b).0 {
            return Err(shape_err(
                "concat_cols",
                format!("{:?} | {:?}", self.dims(a), self.dims(b)),
            ));
        }
        let value = concatenate![Axis(1), self.nodes[a].value, self.nodes[b].value];
        Ok(self.push(value, Op::ConcatCols(a, b)))
    }

    pub fn concat_rows(&mut self, parts: &[NodeId]) -> Result<NodeId> {
        if parts.is_empty() {
            return Err(shape_err("concat_rows", "no parts".into()));
        }
        let cols = self.dims(parts[0]).1;
        if parts.iter().any(|&p| self.dims(p).1 != cols) {
            return Err(shape_err("concat_rows", "column mismatch".into()));
        }
        let views: Vec<_> = parts.iter().map(|&p| self.nodes[p].value.view()).collect();
        let value = concatenate(Axis(0), &views).expect("checked shapes");
        Ok(self.push(value, Op::ConcatRows(parts.to_vec())))
    }

    pub fn slice_cols(&mut self, a: NodeId, start: usize, end: usize) -> Result<NodeId> {
        let (_, ac) = self.dims(a);
        if start >= end || end > ac {
            return Err(shape_err("slice_cols", format!("{start}..{end} of {ac}")));
        }
        let value = self.nodes[a].value.slice(s![.., start..end]).to_owned();
        Ok(self.push(value, Op::SliceCols(a, start, end)))
    }

    pub fn gather_rows(&mut self, a: NodeId, rows: Vec<usize>) -> Result<NodeId> {
        let (ar, ac) = self.dims(a);
        if rows.iter().any(|&r| r >= ar) {
            return Err(shape_err("gather_rows", format!("row out of 0..{ar}")));
        }
        let mut out = Array2::zeros((rows.len(), ac));
        for (i, &r) in rows.iter().enumerate() {
            out.row_mut(i).assign(&self.nodes[a].value.row(r));
        }
        Ok(self.push(out, Op::GatherRows(a, rows)))
    }

    /// Weighted mean over rows -> (1 x C). Masked average pooling with
    /// weights mask/sum(mask).
    pub fn weighted_mean_rows(&mut self, a: NodeId, weights: Vec<f64>) -> Result<NodeId> {
        let (ar, ac) = self.dims(a);
        if weights.len() != ar {
            return Err(shape_err(
                "weighted_mean_rows",
                format!("{} weights for {ar} rows", weights.len()),
            ));
        }
        let mut out = Array2::zeros((1, ac));
        for (i, &w) in weights.iter().enumerate() {
            if w != 0.0 {
                out.row_mut(0).scaled_add(w, &self.nodes[a].value.row(i));
            }
        }
        Ok(self.push(out, Op::WeightedMeanRows(a, weights)))
    }

    pub fn sum_all(&mut self, a: NodeId) -> NodeId {
        let value = Array2::from_elem((1, 1), self.nodes[a].value.sum());
        self.push(value, Op::SumAll(a))
    }

    pub fn transpose(&mut self, a: NodeId) -> NodeId {
        let value = self.nodes[a].value.t().to_owned();
        self.push(value, Op::Transpose(a))
    }

    /// Inverted dropout: identity in eval mode or at rate zero.
    pub fn dropout(&mut self, a: NodeId, rate: f64, rng: &mut ChaCha8Rng) -> NodeId {
        if !self.train || rate <= 0.0 {
            return a;
        }
        let keep = 1.0 - rate;
        let mask = Array2::from_shape_fn(self.dims(a), |_| {
            if rng.random_bool(keep) {
                1.0 / keep
            } else {
                0.0
            }
        });
        let value = &self.nodes[a].value * &mask;
        self.push(value, Op::Dropout(a, mask))
    }

    /// One LSTM step. `xp` is the input already projected by W_x (B x 4H);
    /// gate layout is [input, forget, candidate, output]. Returns (h, c).
    pub fn lstm_step(
        &mut self,
        xp: NodeId,
        h_prev: NodeId,
        c_prev: NodeId,
        w_h: ParamId,
        b: ParamId,
    ) -> Result<(NodeId, NodeId)> {
        let (batch, four_h) = self.dims(xp);
        let hidden = four_h / 4;
        if four_h % 4 != 0
            || self.dims(h_prev) != (batch, hidden)
            || self.dims(c_prev) != (batch, hidden)
            || self.store.value(w_h).dim() != (hidden, four_h)
            || self.store.value(b).dim() != (1, four_h)
        {
            return Err(shape_err(
                "lstm_step",
                format!(
                    "xp {:?} h {:?} c {:?} w_h {:?}",
                    self.dims(xp),
                    self.dims(h_prev),
                    self.dims(c_prev),
                    self.store.value(w_h).dim()
                ),
            ));
        }

        let mut pre = self.nodes[xp].value.clone();
        pre += &self.nodes[h_prev].value.dot(self.store.value(w_h));
        pre += &self.store.value(b).row(0);

        let mut gates = pre;
        for (j, mut col) in gates.columns_mut().into_iter().enumerate() {
            if j < 2 * hidden || j >= 3 * hidden {
                col.mapv_inplace(sigmoid); // i, f, o
            } else {
                col.mapv_inplace(f64::tanh); // g
            }
        }

        let i = gates.slice(s![.., 0..hidden]);
        let f = gates.slice(s![.., hidden..2 * hidden]);
        let g = gates.slice(s![.., 2 * hidden..3 * hidden]);
        let o = gates.slice(s![.., 3 * hidden..4 * hidden]);

        let c = &f * &self.nodes[c_prev].value + &i * &g;
        let tanh_c = c.mapv(f64::tanh);
        let h = &o * &tanh_c;

        let mut hc = Array2::zeros((batch, 2 * hidden));
        hc.slice_mut(s![.., 0..hidden]).assign(&h);
        hc.slice_mut(s![.., hidden..2 * hidden]).assign(&c);

        let step = self.push(
            hc,
            Op::LstmStep {
                xp,
                h_prev,
                c_prev,
                w_h,
                b,
                hidden,
                gates,
                tanh_c,
            },
        );
        let h_id = self.slice_cols(step, 0, hidden)?;
        let c_id = self.slice_cols(step, hidden, 2 * hidden)?;
        Ok((h_id, c_id))
    }

    /// Binary cross-entropy over probabilities with guarded logs; targets
    /// are 0/1 weights of the same shape. Sum, not mean.
    pub fn bce_loss(&mut self, p: NodeId, targets: Array2<f64>) -> Result<NodeId> {
        if self.dims(p) != targets.dim() {
            return Err(shape_err(
                "bce_loss",
                format!("{:?} vs {:?}", self.dims(p), targets.dim()),
            ));
        }
        let mut total = 0.0;
        for (&pi, &ti) in self.nodes[p].value.iter().zip(targets.iter()) {
            total -= ti * pi.max(LOG_FLOOR).ln() + (1.0 - ti) * (1.0 - pi).max(LOG_FLOOR).ln();
        }
        let value = Array2::from_elem((1, 1), total);
        Ok(self.push(value, Op::BceLoss { p, targets }))
    }

    /// Numerically stable BCE over logits; same loss as sigmoid + bce_loss.
    pub fn bce_with_logits(&mut self, z: NodeId, targets: Array2<f64>) -> Result<NodeId> {
        self.bce_with_logits_weighted(z, targets, None)
    }

    /// Weighted BCE over logits: per-element weights select (or scale) which
    /// pairs contribute, which is how negative-pair subsampling is applied.
    pub fn bce_with_logits_weighted(
        &mut self,
        z: NodeId,
        targets: Array2<f64>,
        weights: Option<Array2<f64>>,
    ) -> Result<NodeId> {
        if self.dims(z) != targets.dim()
            || weights.as_ref().is_some_and(|w| w.dim() != targets.dim())
        {
            return Err(shape_err(
                "bce_with_logits",
                format!("{:?} vs {:?}", self.dims(z), targets.dim()),
            ));
        }
        let mut total = 0.0;
        for (k, (&zi, &ti)) in self.nodes[z].value.iter().zip(targets.iter()).enumerate() {
            let w = weights.as_ref().map_or(1.0, |w| w.as_slice().unwrap()[k]);
            if w != 0.0 {
                total += w * (zi.max(0.0) - zi * ti + (1.0 + (-zi.abs()).exp()).ln());
            }
        }
        let value = Array2::from_elem((1, 1), total);
        Ok(self.push(value, Op::BceWithLogits { z, targets, weights }))
    }

    /// Summed cross-entropy of row-wise softmax distributions against
    /// integer targets (one per row).
    pub fn ce_from_logits(&mut self, z: NodeId, targets: Vec<usize>) -> Result<NodeId> {
        let (rows, cols) = self.dims(z);
        if targets.len() != rows || targets.iter().any(|&t| t >= cols) {
            return Err(shape_err(
                "ce_from_logits",
                format!("{} targets for {rows}x{cols}", targets.len()),
            ));
        }
        let mut total = 0.0;
        for (row, &t) in self.nodes[z].value.rows().into_iter().zip(&targets) {
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + row.iter().map(|&x| (x - max).exp()).sum::<f64>().ln();
            total += lse - row[t];
        }
        let value = Array2::from_elem((1, 1), total);
        Ok(self.push(value, Op::CeFromLogits { z, targets }))
    }

    /// Reverse pass from a scalar root; returns parameter gradients.
    pub fn backward(&mut self, root: NodeId) -> Result<Grads> {
        if self.dims(root) != (1, 1) {
            return Err(shape_err("backward", format!("root {:?}", self.dims(root))));
        }
        if !self.scalar(root).is_finite() {
            return Err(NeuralError::NonFinite { op: "backward" });
        }
        let mut grads: Vec<Option<Array2<f64>>> = vec![None; self.nodes.len()];
        grads[root] = Some(Array2::from_elem((1, 1), 1.0));
        let mut out = Grads::default();

        for idx in (0..=root).rev() {
            let Some(grad) = grads[idx].take() else {
                continue;
            };
            match &self.nodes[idx].op {
                Op::Leaf => {}
                Op::Param { id } => out.accumulate(*id, grad),
                Op::ParamRows { id, rows } => {
                    let table_dim = self.store.value(*id).dim();
                    let mut g = Array2::zeros(table_dim);
                    for (i, &r) in rows.iter().enumerate() {
                        g.row_mut(r).scaled_add(1.0, &grad.row(i));
                    }
                    out.accumulate(*id, g);
                }
                Op::ParamRowsWeighted { id, rows } => {
                    let table_dim = self.store.value(*id).dim();
                    let mut g = Array2::zeros(table_dim);
                    for (i, combo) in rows.iter().enumerate() {
                        for &(r, w) in combo {
                            g.row_mut(r).scaled_add(w, &grad.row(i));
                        }
                    }
                    out.accumulate(*id, g);
                }
                Op::MatMul(a, b) => {
                    let (a, b) = (*a, *b);
                    let da = grad.dot(&self.nodes[b].value.t());
                    let db = self.nodes[a].value.t().dot(&grad);
                    accumulate(&mut grads, a, da);
                    accumulate(&mut grads, b, db);
                }
                Op::Add(a, b) => {
                    let (a, b) = (*a, *b);
                    accumulate(&mut grads, a, grad.clone());
                    accumulate(&mut grads, b, grad);
                }
                Op::AddRow(a, row) => {
                    let (a, row) = (*a, *row);
                    let drow = grad
                        .sum_axis(Axis(0))
                        .insert_axis(Axis(0));
                    accumulate(&mut grads, a, grad);
                    accumulate(&mut grads, row, drow);
                }
                Op::Sub(a, b) => {
                    let (a, b) = (*a, *b);
                    accumulate(&mut grads, a, grad.clone());
                    accumulate(&mut grads, b, -grad);
                }
                Op::Mul(a, b) => {
                    let (a, b) = (*a, *b);
                    let da = &grad * &self.nodes[b].value;
                    let db = &grad * &self.nodes[a].value;
                    accumulate(&mut grads, a, da);
                    accumulate(&mut grads, b, db);
                }
                Op::Scale(a, k) => {
                    let (a, k) = (*a, *k);
                    accumulate(&mut grads, a, grad * k);
                }
                Op::Sigmoid(a) => {
                    let a = *a;
                    let da = &grad * &self.nodes[idx].value.mapv(|y| y * (1.0 - y));
                    accumulate(&mut grads, a, da);
                }
                Op::Tanh(a) => {
                    let a = *a;
                    let da = &grad * &self.nodes[idx].value.mapv(|y| 1.0 - y * y);
                    accumulate(&mut grads, a, da);
                }
                Op::Relu(a) => {
                    let a = *a;
                    let da = &grad * &self.nodes[idx].value.mapv(|y| (y > 0.0) as u8 as f64);
                    accumulate(&mut grads, a, da);
                }
                Op::SoftmaxRows(a) => {
                    let a = *a;
                    let y = &self.nodes[idx].value;
                    let mut da = Array2::zeros(grad.dim());
                    for (r, (yrow, grow)) in
                        y.rows().into_iter().zip(grad.rows()).enumerate()
                    {
                        let dot: f64 = yrow.iter().zip(grow.iter()).map(|(yi, gi)| yi * gi).sum();
                        for (c, (&yi, &gi)) in yrow.iter().zip(grow.iter()).enumerate() {
                            da[[r, c]] = yi * (gi - dot);
                        }
                    }
                    accumulate(&mut grads, a, da);
                }
                Op::ConcatCols(a, b) => {
                    let (a, b) = (*a, *b);
                    let ac = self.dims(a).1;
                    let da = grad.slice(s![.., 0..ac]).to_owned();
                    let db = grad.slice(s![.., ac..]).to_owned();
                    accumulate(&mut grads, a, da);
                    accumulate(&mut grads, b, db);
                }
                Op::ConcatRows(parts) => {
                    let parts = parts.clone();
                    let mut offset = 0;
                    for p in parts {
                        let rows = self.dims(p).0;
                        let dp = grad.slice(s![offset..offset + rows, ..]).to_owned();
                        accumulate(&mut grads, p, dp);
                        offset += rows;
                    }
                }
                Op::SliceCols(a, start, end) => {
                    let (a, start, end) = (*a, *start, *end);
                    let mut da = Array2::zeros(self.dims(a));
                    da.slice_mut(s![.., start..end]).assign(&grad);
                    accumulate(&mut grads, a, da);
                }
                Op::GatherRows(a, rows) => {
                    let a = *a;
                    let rows = rows.clone();
                    let mut da = Array2::zeros(self.dims(a));
                    for (i, &r) in rows.iter().enumerate() {
                        da.row_mut(r).scaled_add(1.0, &grad.row(i));
                    }
                    accumulate(&mut grads, a, da);
                }
                Op::WeightedMeanRows(a, weights) => {
                    let a = *a;
                    let weights = weights.clone();
                    let mut da = Array2::zeros(self.dims(a));
                    for (i, &w) in weights.iter().enumerate() {
                        if w != 0.0 {
                            da.row_mut(i).scaled_add(w, &grad.row(0));
                        }
                    }
                    accumulate(&mut grads, a, da);
                }
                Op::SumAll(a) => {
                    let a = *a;
                    let da = Array2::from_elem(self.dims(a), grad[[0, 0]]);
                    accumulate(&mut grads, a, da);
                }
                Op::Transpose(a) => {
                    let a = *a;
                    accumulate(&mut grads, a, grad.t().to_owned());
                }
                Op::Dropout(a, mask) => {
                    let a = *a;
                    let da = &grad * mask;
                    accumulate(&mut grads, a, da);
                }
                Op::LstmStep {
                    xp,
                    h_prev,
                    c_prev,
                    w_h,
                    b,
                    hidden,
                    gates,
                    tanh_c,
                } => {
                    let (xp, h_prev, c_prev, w_h, b, hidden) =
                        (*xp, *h_prev, *c_prev, *w_h, *b, *hidden);
                    let i = gates.slice(s![.., 0..hidden]).to_owned();
                    let f = gates.slice(s![.., hidden..2 * hidden]).to_owned();
                    let g = gates.slice(s![.., 2 * hidden..3 * hidden]).to_owned();
                    let o = gates.slice(s![.., 3 * hidden..4 * hidden]).to_owned();
                    let dh = grad.slice(s![.., 0..hidden]).to_owned();
                    let dc_out = grad.slice(s![.., hidden..2 * hidden]).to_owned();

                    // dc: through h = o * tanh(c) plus the direct path.
                    let dc = &dh * &o * &tanh_c.mapv(|v| 1.0 - v * v) + &dc_out;
                    let do_pre = &dh * tanh_c * &o.mapv(|v| v * (1.0 - v));
                    let di_pre = &dc * &g * &i.mapv(|v| v * (1.0 - v));
                    let df_pre =
                        &dc * &self.nodes[c_prev].value * &f.mapv(|v| v * (1.0 - v));
                    let dg_pre = &dc * &i * &g.mapv(|v| 1.0 - v * v);
                    let dc_prev = &dc * &f;

                    let batch = dh.nrows();
                    let mut dpre = Array2::zeros((batch, 4 * hidden));
                    dpre.slice_mut(s![.., 0..hidden]).assign(&di_pre);
                    dpre.slice_mut(s![.., hidden..2 * hidden]).assign(&df_pre);
                    dpre.slice_mut(s![.., 2 * hidden..3 * hidden]).assign(&dg_pre);
                    dpre.slice_mut(s![.., 3 * hidden..4 * hidden]).assign(&do_pre);

                    let dh_prev = dpre.dot(&self.store.value(w_h).t());
                    let dw_h = self.nodes[h_prev].value.t().dot(&dpre);
                    let db = dpre.sum_axis(Axis(0)).insert_axis(Axis(0));

                    accumulate(&mut grads, xp, dpre);
                    accumulate(&mut grads, h_prev, dh_prev);
                    accumulate(&mut grads, c_prev, dc_prev);
                    out.accumulate(w_h, dw_h);
                    out.accumulate(b, db);
                }
                Op::BceLoss { p, targets } => {
                    let p = *p;
                    let scale = grad[[0, 0]];
                    let mut da = Array2::zeros(self.dims(p));
                    for ((dai, &pi), &ti) in da
                        .iter_mut()
                        .zip(self.nodes[p].value.iter())
                        .zip(targets.iter())
                    {
                        *dai = scale * (-ti / pi.max(LOG_FLOOR) + (1.0 - ti) / (1.0 - pi).max(LOG_FLOOR));
                    }
                    accumulate(&mut grads, p, da);
                }
                Op::BceWithLogits { z, targets, weights } => {
                    let z = *z;
                    let scale = grad[[0, 0]];
                    let mut dz = Array2::zeros(self.dims(z));
                    for (k, ((dzi, &zi), &ti)) in dz
                        .iter_mut()
                        .zip(self.nodes[z].value.iter())
                        .zip(targets.iter())
                        .enumerate()
                    {
                        let w = weights.as_ref().map_or(1.0, |w| w.as_slice().unwrap()[k]);
                        *dzi = scale * w * (sigmoid(zi) - ti);
                    }
                    accumulate(&mut grads, z, dz);
                }
                Op::CeFromLogits { z, targets } => {
                    let z = *z;
                    let scale = grad[[0, 0]];
                    let mut dz = Array2::zeros(self.dims(z));
                    for (r, (zrow, &t)) in self.nodes[z]
                        .value
                        .rows()
                        .into_iter()
                        .zip(targets.iter())
                        .enumerate()
                    {
                        let max = zrow.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                        let denom: f64 = zrow.iter().map(|&x| (x - max).exp()).sum();
                        for (c, &zc) in zrow.iter().enumerate() {
                            let soft = (zc - max).exp() / denom;
                            dz[[r, c]] = scale * (soft - ((c == t) as u8 as f64));
                        }
                    }
                    accumulate(&mut grads, z, dz);
                }
            }
        }
        Ok(out)
    }
}

fn accumulate(grads: &mut [Option<Array2<f64>>], id: NodeId, grad: Array2<f64>) {
    match &mut grads[id] {
        Some(g) => *g += &grad,
        slot @ None => *slot = Some(grad),
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn sigmoid_at_zero_is_half() {
        let store = ParamStore::new();
        let mut tape = Tape::new(&store);
        let x = tape.leaf(array![[0.0]]);
        let y = tape.sigmoid(x);
        assert_eq!(tape.scalar(y), 0.5);
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let store = ParamStore::new();
        let mut tape = Tape::new(&store);
        let x = tape.leaf(array![[1.0, 2.0, -3.0], [0.1, 0.1, 900.0]]);
        let y = tape.softmax_rows(x);
        for row in tape.value(y).rows() {
            assert!((row.sum() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bce_on_half_prediction_is_ln2() {
        let store = ParamStore::new();
        let mut tape = Tape::new(&store);
        let p = tape.leaf(array![[0.5]]);
        let loss = tape.bce_loss(p, array![[1.0]]).unwrap();
        assert!((tape.scalar(loss) - 2f64.ln()).abs() < 1e-12);
        // logits version agrees at z = 0
        let z = tape.leaf(array![[0.0]]);
        let loss2 = tape.bce_with_logits(z, array![[1.0]]).unwrap();
        assert!((tape.scalar(loss2) - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn matmul_gradients_match_hand_result() {
        let mut store = ParamStore::new();
        let w = store.add("w", array![[1.0, 2.0], [3.0, 4.0]]);
        let mut tape = Tape::new(&store);
        let x = tape.leaf(array![[1.0, 1.0]]);
        let wn = tape.param(w);
        let y = tape.matmul(x, wn).unwrap();
        let loss = tape.sum_all(y);
        let grads = tape.backward(loss).unwrap();
        // d(sum(x.W))/dW = x^T . ones = [[1,1],[1,1]]
        assert_eq!(grads.get(w).unwrap(), &array![[1.0, 1.0], [1.0, 1.0]]);
    }

    #[test]
    fn shape_mismatch_names_the_op() {
        let store = ParamStore::new();
        let mut tape = Tape::new(&store);
        let a = tape.leaf(Array2::zeros((2, 3)));
        let b = tape.leaf(Array2::zeros((2, 3)));
        let err = tape.matmul(a, b).unwrap_err();
        assert!(err.to_string().contains("matmul"));
    }

    #[test]
    fn lstm_step_with_zero_weights_outputs_zeros() {
        let mut store = ParamStore::new();
        let w_h = store.add("w_h", Array2::zeros((3, 12)));
        let b = store.add("b", Array2::zeros((1, 12)));
        let mut tape = Tape::new(&store);
        let xp = tape.leaf(Array2::zeros((1, 12)));
        let h0 = tape.leaf(Array2::zeros((1, 3)));
        let c0 = tape.leaf(Array2::zeros((1, 3)));
        let (h, c) = tape.lstm_step(xp, h0, c0, w_h, b).unwrap();
        assert!(tape.value(h).iter().all(|&v| v == 0.0));
        assert!(tape.value(c).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn forget_gate_is_sigmoid_of_bias() {
        // zero weights, c_prev = 1: c' = sigma(b_f) * 1 + sigma(b_i)*tanh(b_g)
        // with b_i = b_g = 0 -> c' = sigma(b_f).
        let mut store = ParamStore::new();
        let hidden = 2;
        let w_h = store.add("w_h", Array2::zeros((hidden, 4 * hidden)));
        let mut bias = Array2::zeros((1, 4 * hidden));
        bias[[0, hidden]] = 0.7; // forget-gate bias, first unit
        let b = store.add("b", bias);
        let mut tape = Tape::new(&store);
        let xp = tape.leaf(Array2::zeros((1, 4 * hidden)));
        let h0 = tape.leaf(Array2::zeros((1, hidden)));
        let c0 = tape.leaf(Array2::from_elem((1, hidden), 1.0));
        let (_, c) = tape.lstm_step(xp, h0, c0, w_h, b).unwrap();
        assert!((tape.value(c)[[0, 0]] - sigmoid(0.7)).abs() < 1e-12);
        assert!((tape.value(c)[[0, 1]] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn dropout_eval_mode_is_identity() {
        let store = ParamStore::new();
        let mut tape = Tape::new(&store);
        let mut rng = rand::SeedableRng::seed_from_u64(1);
        let x = tape.leaf(array![[1.0, 2.0]]);
        let y = tape.dropout(x, 0.5, &mut rng);
        assert_eq!(x, y);
    }
}
