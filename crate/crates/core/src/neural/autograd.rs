//! Tape-based reverse-mode differentiation over 2-D arrays.
//!
//! A [`Graph`] records every operation as a node. Parameter leaves borrow their
//! values; [`Graph::backward`] walks the tape in reverse and leaves gradients
//! on every node that depends on a leaf created with gradients enabled.

use alloc::borrow::Cow;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{AutogradError, Tensor};
use crate::linalg::dot;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul(usize, usize),
    Add(usize, usize),
    AddBias(usize, usize),
    Mul(usize, usize),
    Sigmoid(usize),
    Tanh(usize),
    Relu(usize),
    Conv1d { input: usize, weight: usize, kernel: usize },
    MaxPoolTime { input: usize, argmax: Vec<usize> },
    Embedding { table: usize, ids: Vec<usize> },
    ConcatRows(Vec<usize>),
    SliceRow { input: usize, row: usize },
    SliceCols { input: usize, start: usize },
    SoftmaxCrossEntropy { logits: usize, targets: Vec<usize>, probs: Vec<f64> },
}

struct Node<'a> {
    rows: usize,
    cols: usize,
    value: Cow<'a, [f64]>,
    op: Op,
    tracked: bool,
}

fn shape_err(op: &'static str, detail: alloc::string::String) -> AutogradError {
    AutogradError::Shape { op, detail }
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

/// `out (m x n) += a (m x k) * b (k x n)`.
fn matmul_into(a: &[f64], b: &[f64], out: &mut [f64], m: usize, k: usize, n: usize) {
    for i in 0..m {
        let out_row = &mut out[i * n..(i + 1) * n];
        for (p, &av) in a[i * k..(i + 1) * k].iter().enumerate() {
            if av == 0.0 {
                continue;
            }
            for (o, &bv) in out_row.iter_mut().zip(&b[p * n..(p + 1) * n]) {
                *o += av * bv;
            }
        }
    }
}

#[derive(Default)]
pub struct Graph<'a> {
    nodes: Vec<Node<'a>>,
    grads: Vec<Option<Vec<f64>>>,
}

impl<'a> Graph<'a> {
    pub fn new() -> Self {
        Self { nodes: Vec::new(), grads: Vec::new() }
    }

    fn push(&mut self, rows: usize, cols: usize, value: Vec<f64>, op: Op, tracked: bool) -> Var {
        debug_assert_eq!(value.len(), rows * cols);
        self.nodes.push(Node { rows, cols, value: Cow::Owned(value), op, tracked });
        Var(self.nodes.len() - 1)
    }

    /// Leaf that borrows `tensor`; gradients flow to it when the tensor requires them.
    pub fn tensor(&mut self, tensor: &'a Tensor) -> Var {
        let (rows, cols) = tensor.dims2();
        self.nodes.push(Node {
            rows,
            cols,
            value: Cow::Borrowed(tensor.values()),
            op: Op::Leaf,
            tracked: tensor.requires_grad(),
        });
        Var(self.nodes.len() - 1)
    }

    /// Owned leaf. `tracked` leaves receive gradients.
    pub fn leaf(&mut self, rows: usize, cols: usize, values: Vec<f64>, tracked: bool) -> Result<Var, AutogradError> {
        if values.len() != rows * cols {
            return Err(shape_err("leaf", format!("{rows}x{cols} needs {} values, got {}", rows * cols, values.len())));
        }
        Ok(self.push(rows, cols, values, Op::Leaf, tracked))
    }

    pub fn constant(&mut self, rows: usize, cols: usize, values: Vec<f64>) -> Result<Var, AutogradError> {
        self.leaf(rows, cols, values, false)
    }

    pub fn value(&self, v: Var) -> &[f64] {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> (usize, usize) {
        (self.nodes[v.0].rows, self.nodes[v.0].cols)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Gradient of the last `backward` target with respect to `v`.
    pub fn grad(&self, v: Var) -> Option<&[f64]> {
        self.grads.get(v.0).and_then(|g| g.as_deref())
    }

    fn tracked(&self, vars: &[usize]) -> bool {
        vars.iter().any(|&i| self.nodes[i].tracked)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, AutogradError> {
        let (m, k) = self.shape(a);
        let (k2, n) = self.shape(b);
        if k != k2 {
            return Err(shape_err("matmul", format!("{m}x{k} * {k2}x{n}")));
        }
        let mut out = vec![0.0; m * n];
        matmul_into(self.value(a), self.value(b), &mut out, m, k, n);
        let tracked = self.tracked(&[a.0, b.0]);
        Ok(self.push(m, n, out, Op::MatMul(a.0, b.0), tracked))
    }

    fn same_shape(&self, op: &'static str, a: Var, b: Var) -> Result<(usize, usize), AutogradError> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa != sb {
            return Err(shape_err(op, format!("{}x{} vs {}x{}", sa.0, sa.1, sb.0, sb.1)));
        }
        Ok(sa)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, AutogradError> {
        let (r, c) = self.same_shape("add", a, b)?;
        let out = self.value(a).iter().zip(self.value(b)).map(|(x, y)| x + y).collect();
        let tracked = self.tracked(&[a.0, b.0]);
        Ok(self.push(r, c, out, Op::Add(a.0, b.0), tracked))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, AutogradError> {
        let (r, c) = self.same_shape("mul", a, b)?;
        let out = self.value(a).iter().zip(self.value(b)).map(|(x, y)| x * y).collect();
        let tracked = self.tracked(&[a.0, b.0]);
        Ok(self.push(r, c, out, Op::Mul(a.0, b.0), tracked))
    }

    /// Adds a `1 x n` bias to every row of an `m x n` input.
    pub fn add_bias(&mut self, a: Var, bias: Var) -> Result<Var, AutogradError> {
        let (m, n) = self.shape(a);
        if self.shape(bias) != (1, n) {
            let (br, bc) = self.shape(bias);
            return Err(shape_err("add_bias", format!("{m}x{n} + {br}x{bc}")));
        }
        let b = self.value(bias);
        let out = self.value(a).iter().enumerate().map(|(i, x)| x + b[i % n]).collect();
        let tracked = self.tracked(&[a.0, bias.0]);
        Ok(self.push(m, n, out, Op::AddBias(a.0, bias.0), tracked))
    }

    fn unary(&mut self, a: Var, f: impl Fn(f64) -> f64, op: Op) -> Var {
        let (r, c) = self.shape(a);
        let out = self.value(a).iter().map(|&x| f(x)).collect();
        let tracked = self.nodes[a.0].tracked;
        self.push(r, c, out, op, tracked)
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        self.unary(a, sigmoid, Op::Sigmoid(a.0))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        self.unary(a, libm::tanh, Op::Tanh(a.0))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        self.unary(a, |x| x.max(0.0), Op::Relu(a.0))
    }

    /// Valid 1-D convolution over rows. `input` is `L x d`, `weight` is
    /// `(kernel * d) x F`; the result is `(L - kernel + 1) x F`.
    pub fn conv1d(&mut self, input: Var, weight: Var, kernel: usize) -> Result<Var, AutogradError> {
        let (len, d) = self.shape(input);
        let (wr, f) = self.shape(weight);
        if kernel == 0 || wr != kernel * d {
            return Err(shape_err("conv1d", format!("weight {wr}x{f} for kernel {kernel} over width {d}")));
        }
        if len < kernel {
            return Err(shape_err("conv1d", format!("sequence length {len} shorter than kernel {kernel}")));
        }
        let t_out = len - kernel + 1;
        let mut out = vec![0.0; t_out * f];
        let x = self.value(input);
        let w = self.value(weight);
        for t in 0..t_out {
            matmul_into(&x[t * d..(t + kernel) * d], w, &mut out[t * f..(t + 1) * f], 1, kernel * d, f);
        }
        let tracked = self.tracked(&[input.0, weight.0]);
        Ok(self.push(t_out, f, out, Op::Conv1d { input: input.0, weight: weight.0, kernel }, tracked))
    }

    /// Column-wise maximum over all rows: `T x F` to `1 x F`.
    pub fn max_pool_time(&mut self, input: Var) -> Result<Var, AutogradError> {
        let (t, f) = self.shape(input);
        if t == 0 {
            return Err(shape_err("max_pool_time", "empty sequence".into()));
        }
        let x = self.value(input);
        let mut argmax = vec![0usize; f];
        let mut out = vec![0.0; f];
        for col in 0..f {
            let mut best = 0;
            for row in 1..t {
                if x[row * f + col] > x[best * f + col] {
                    best = row;
                }
            }
            argmax[col] = best;
            out[col] = x[best * f + col];
        }
        let tracked = self.nodes[input.0].tracked;
        Ok(self.push(1, f, out, Op::MaxPoolTime { input: input.0, argmax }, tracked))
    }

    /// Rows of `table` selected by `ids`.
    pub fn embedding(&mut self, table: Var, ids: &[usize]) -> Result<Var, AutogradError> {
        let (v, d) = self.shape(table);
        if let Some(&bad) = ids.iter().find(|&&i| i >= v) {
            return Err(shape_err("embedding", format!("id {bad} outside table of {v} rows")));
        }
        let t = self.value(table);
        let mut out = Vec::with_capacity(ids.len() * d);
        for &i in ids {
            out.extend_from_slice(&t[i * d..(i + 1) * d]);
        }
        let tracked = self.nodes[table.0].tracked;
        Ok(self.push(ids.len(), d, out, Op::Embedding { table: table.0, ids: ids.to_vec() }, tracked))
    }

    /// Stacks inputs with equal column counts.
    pub fn concat_rows(&mut self, parts: &[Var]) -> Result<Var, AutogradError> {
        let Some(&first) = parts.first() else {
            return Err(shape_err("concat_rows", "no inputs".into()));
        };
        let cols = self.shape(first).1;
        let mut rows = 0;
        let mut out = Vec::new();
        for &p in parts {
            let (r, c) = self.shape(p);
            if c != cols {
                return Err(shape_err("concat_rows", format!("{c} columns, expected {cols}")));
            }
            rows += r;
            out.extend_from_slice(self.value(p));
        }
        let ids: Vec<usize> = parts.iter().map(|v| v.0).collect();
        let tracked = self.tracked(&ids);
        Ok(self.push(rows, cols, out, Op::ConcatRows(ids), tracked))
    }

    pub fn slice_row(&mut self, input: Var, row: usize) -> Result<Var, AutogradError> {
        let (r, c) = self.shape(input);
        if row >= r {
            return Err(shape_err("slice_row", format!("row {row} of {r}")));
        }
        let out = self.value(input)[row * c..(row + 1) * c].to_vec();
        let tracked = self.nodes[input.0].tracked;
        Ok(self.push(1, c, out, Op::SliceRow { input: input.0, row }, tracked))
    }

    pub fn slice_cols(&mut self, input: Var, start: usize, len: usize) -> Result<Var, AutogradError> {
        let (r, c) = self.shape(input);
        if start + len > c {
            return Err(shape_err("slice_cols", format!("columns {start}..{} of {c}", start + len)));
        }
        let x = self.value(input);
        let mut out = Vec::with_capacity(r * len);
        for i in 0..r {
            out.extend_from_slice(&x[i * c + start..i * c + start + len]);
        }
        let tracked = self.nodes[input.0].tracked;
        Ok(self.push(r, len, out, Op::SliceCols { input: input.0, start }, tracked))
    }

    /// Mean softmax cross-entropy of `B x K` logits against `B` class targets.
    pub fn softmax_cross_entropy(&mut self, logits: Var, targets: &[usize]) -> Result<Var, AutogradError> {
        let (b, k) = self.shape(logits);
        if targets.len() != b || b == 0 {
            return Err(shape_err("softmax_cross_entropy", format!("{b} rows, {} targets", targets.len())));
        }
        if let Some(&bad) = targets.iter().find(|&&t| t >= k) {
            return Err(shape_err("softmax_cross_entropy", format!("target {bad} with {k} classes")));
        }
        let z = self.value(logits);
        let mut probs = Vec::with_capacity(b * k);
        let mut loss = 0.0;
        for (row, &target) in targets.iter().enumerate() {
            let p = crate::linalg::softmax(&z[row * k..(row + 1) * k]);
            loss -= libm::log(p[target].max(f64::MIN_POSITIVE));
            probs.extend(p);
        }
        let tracked = self.nodes[logits.0].tracked;
        let op = Op::SoftmaxCrossEntropy { logits: logits.0, targets: targets.to_vec(), probs };
        Ok(self.push(1, 1, vec![loss / b as f64], op, tracked))
    }

    /// Probabilities computed by a softmax-cross-entropy node.
    pub fn softmax_probabilities(&self, loss: Var) -> Option<&[f64]> {
        match &self.nodes[loss.0].op {
            Op::SoftmaxCrossEntropy { probs, .. } => Some(probs),
            _ => None,
        }
    }

    /// Back-propagates from a `1 x 1` node.
    pub fn backward(&mut self, loss: Var) -> Result<(), AutogradError> {
        if self.shape(loss) != (1, 1) {
            let (r, c) = self.shape(loss);
            return Err(shape_err("backward", format!("target is {r}x{c}, expected a scalar")));
        }
        if !self.value(loss)[0].is_finite() {
            return Err(AutogradError::NonFinite);
        }
        self.grads = (0..self.nodes.len()).map(|_| None).collect();
        self.grads[loss.0] = Some(vec![1.0]);
        for i in (0..=loss.0).rev() {
            if !self.nodes[i].tracked {
                continue;
            }
            let Some(g) = self.grads[i].take() else { continue };
            propagate(&self.nodes, &mut self.grads, i, &g);
            self.grads[i] = Some(g);
        }
        Ok(())
    }
}

fn slot<'g>(nodes: &[Node<'_>], grads: &'g mut [Option<Vec<f64>>], i: usize) -> &'g mut Vec<f64> {
    let n = nodes[i].value.len();
    grads[i].get_or_insert_with(|| vec![0.0; n])
}

fn add_into(target: &mut [f64], g: &[f64]) {
    target.iter_mut().zip(g).for_each(|(o, x)| *o += x);
}

/// Pushes the gradient `g` of node `i` to its inputs.
fn propagate(nodes: &[Node<'_>], grads: &mut [Option<Vec<f64>>], i: usize, g: &[f64]) {
    let node = &nodes[i];
    let (rows, cols) = (node.rows, node.cols);
    match &node.op {
        Op::Leaf => {}
        Op::MatMul(a, b) => {
            let (m, k, n) = (nodes[*a].rows, nodes[*a].cols, cols);
            if nodes[*a].tracked {
                // dA = G * B^T
                let bv = &nodes[*b].value;
                let ga = slot(nodes, grads, *a);
                for r in 0..m {
                    let grow = &g[r * n..(r + 1) * n];
                    for p in 0..k {
                        ga[r * k + p] += dot(grow, &bv[p * n..(p + 1) * n]);
                    }
                }
            }
            if nodes[*b].tracked {
                // dB = A^T * G
                let av = &nodes[*a].value;
                let gb = slot(nodes, grads, *b);
                for r in 0..m {
                    let grow = &g[r * n..(r + 1) * n];
                    for p in 0..k {
                        let x = av[r * k + p];
                        if x != 0.0 {
                            gb[p * n..(p + 1) * n].iter_mut().zip(grow).for_each(|(o, &gv)| *o += x * gv);
                        }
                    }
                }
            }
        }
        Op::Add(a, b) => {
            for &t in &[*a, *b] {
                if nodes[t].tracked {
                    add_into(slot(nodes, grads, t), g);
                }
            }
        }
        Op::AddBias(a, b) => {
            if nodes[*a].tracked {
                add_into(slot(nodes, grads, *a), g);
            }
            if nodes[*b].tracked {
                let gb = slot(nodes, grads, *b);
                for r in 0..rows {
                    add_into(gb, &g[r * cols..(r + 1) * cols]);
                }
            }
        }
        Op::Mul(a, b) => {
            for (t, other) in [(*a, *b), (*b, *a)] {
                if nodes[t].tracked {
                    let ov = &nodes[other].value;
                    slot(nodes, grads, t).iter_mut().zip(g.iter().zip(ov.iter())).for_each(|(o, (x, y))| *o += x * y);
                }
            }
        }
        Op::Sigmoid(a) => {
            let out = &node.value;
            let ga = slot(nodes, grads, *a);
            for j in 0..g.len() {
                ga[j] += g[j] * out[j] * (1.0 - out[j]);
            }
        }
        Op::Tanh(a) => {
            let out = &node.value;
            let ga = slot(nodes, grads, *a);
            for j in 0..g.len() {
                ga[j] += g[j] * (1.0 - out[j] * out[j]);
            }
        }
        Op::Relu(a) => {
            let input = &nodes[*a].value;
            let ga = slot(nodes, grads, *a);
            for j in 0..g.len() {
                if input[j] > 0.0 {
                    ga[j] += g[j];
                }
            }
        }
        Op::Conv1d { input, weight, kernel } => {
            let d = nodes[*input].cols;
            let f = cols;
            let kd = kernel * d;
            if nodes[*input].tracked {
                let w = &nodes[*weight].value;
                let gi = slot(nodes, grads, *input);
                for t in 0..rows {
                    let gt = &g[t * f..(t + 1) * f];
                    for q in 0..kd {
                        gi[t * d + q] += dot(&w[q * f..(q + 1) * f], gt);
                    }
                }
            }
            if nodes[*weight].tracked {
                let x = &nodes[*input].value;
                let gw = slot(nodes, grads, *weight);
                for t in 0..rows {
                    let gt = &g[t * f..(t + 1) * f];
                    for q in 0..kd {
                        let xv = x[t * d + q];
                        if xv != 0.0 {
                            gw[q * f..(q + 1) * f].iter_mut().zip(gt).for_each(|(o, &gv)| *o += xv * gv);
                        }
                    }
                }
            }
        }
        Op::MaxPoolTime { input, argmax } => {
            let gi = slot(nodes, grads, *input);
            for (col, &row) in argmax.iter().enumerate() {
                gi[row * cols + col] += g[col];
            }
        }
        Op::Embedding { table, ids } => {
            let d = cols;
            let gt = slot(nodes, grads, *table);
            for (r, &id) in ids.iter().enumerate() {
                add_into(&mut gt[id * d..(id + 1) * d], &g[r * d..(r + 1) * d]);
            }
        }
        Op::ConcatRows(parts) => {
            let mut offset = 0;
            for &p in parts {
                let n = nodes[p].value.len();
                if nodes[p].tracked {
                    add_into(slot(nodes, grads, p), &g[offset..offset + n]);
                }
                offset += n;
            }
        }
        Op::SliceRow { input, row } => {
            add_into(&mut slot(nodes, grads, *input)[row * cols..(row + 1) * cols], g);
        }
        Op::SliceCols { input, start } => {
            let c = nodes[*input].cols;
            let gi = slot(nodes, grads, *input);
            for r in 0..rows {
                add_into(&mut gi[r * c + start..r * c + start + cols], &g[r * cols..(r + 1) * cols]);
            }
        }
        Op::SoftmaxCrossEntropy { logits, targets, probs } => {
            let k = nodes[*logits].cols;
            let scale = g[0] / targets.len() as f64;
            let gl = slot(nodes, grads, *logits);
            for (r, &t) in targets.iter().enumerate() {
                for c in 0..k {
                    let onehot = if c == t { 1.0 } else { 0.0 };
                    gl[r * k + c] += scale * (probs[r * k + c] - onehot);
                }
            }
        }
    }
}
