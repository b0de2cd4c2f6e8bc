use std::borrow::Cow;

use super::{shape_err, NdError, Tensor};

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    MatVec(Var, Var),
    MatMul(Var, Var),
    MatMulNT(Var, Var),
    Add(Var, Var),
    AddN(Vec<Var>),
    Mul(Var, Var),
    Scale(Var, f64),
    MulConst(Var, Vec<f64>),
    Sigmoid(Var),
    Tanh(Var),
    Relu(Var),
    Concat(Vec<Var>),
    Slice(Var, usize),
    StackRows(Vec<Var>),
    SoftmaxRows(Var),
    MeanRows(Var),
    Sum(Var),
    Bce { p: Var, y: f64, weight: f64, eps: f64 },
}

struct Node<'a> {
    value: Cow<'a, Tensor>,
    op: Op,
    requires_grad: bool,
}

/// Records operations in execution order; [`Tape::backward`] walks them in
/// reverse. Leaves added with [`Tape::param`] borrow their tensor.
#[derive(Default)]
pub struct Tape<'a> {
    nodes: Vec<Node<'a>>,
}

/// Gradients of leaf variables after a backward pass.
#[derive(Debug, Clone)]
pub struct Gradients {
    grads: Vec<Option<Vec<f64>>>,
}

impl Gradients {
    /// Gradient of a leaf; `None` if the output does not depend on it.
    pub fn get(&self, var: Var) -> Option<&[f64]> {
        self.grads.get(var.0).and_then(|g| g.as_deref())
    }

    /// Gradient of a leaf, zeros when it is unused.
    pub fn get_or_zeros(&self, var: Var, len: usize) -> Vec<f64> {
        self.get(var).map_or_else(|| vec![0.0; len], <[f64]>::to_vec)
    }
}

fn dims2(t: &Tensor, op: &'static str) -> Result<(usize, usize), NdError> {
    t.dims2()
        .ok_or_else(|| shape_err(op, &[0, 0], t.shape()))
}

impl<'a> Tape<'a> {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor, op: Op, inputs: &[Var]) -> Var {
        let requires_grad = inputs.iter().any(|v| self.nodes[v.0].requires_grad);
        self.nodes.push(Node {
            value: Cow::Owned(value),
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    /// Trainable leaf borrowing `tensor`.
    pub fn param(&mut self, tensor: &'a Tensor) -> Var {
        self.nodes.push(Node {
            value: Cow::Borrowed(tensor),
            op: Op::Leaf,
            requires_grad: true,
        });
        Var(self.nodes.len() - 1)
    }

    /// Trainable leaf owning `tensor`.
    pub fn leaf(&mut self, tensor: Tensor) -> Var {
        self.nodes.push(Node {
            value: Cow::Owned(tensor),
            op: Op::Leaf,
            requires_grad: true,
        });
        Var(self.nodes.len() - 1)
    }

    /// Leaf that receives no gradient.
    pub fn constant(&mut self, tensor: Tensor) -> Var {
        self.nodes.push(Node {
            value: Cow::Owned(tensor),
            op: Op::Leaf,
            requires_grad: false,
        });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, var: Var) -> &Tensor {
        &self.nodes[var.0].value
    }

    fn data(&self, var: Var) -> &[f64] {
        self.nodes[var.0].value.data()
    }

    /// `W x` for `W: m x n`, `x: n`.
    pub fn matvec(&mut self, w: Var, x: Var) -> Result<Var, NdError> {
        let (m, n) = dims2(self.value(w), "matvec")?;
        if self.value(x).len() != n {
            return Err(shape_err("matvec", &[n], self.value(x).shape()));
        }
        let (wd, xd) = (self.data(w), self.data(x));
        let out: Vec<f64> = (0..m)
            .map(|i| dot(&wd[i * n..(i + 1) * n], xd))
            .collect();
        Ok(self.push(Tensor::vector(out), Op::MatVec(w, x), &[w, x]))
    }

    /// `A B` for `A: m x k`, `B: k x n`.
    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, NdError> {
        let (m, k) = dims2(self.value(a), "matmul")?;
        let (k2, n) = dims2(self.value(b), "matmul")?;
        if k != k2 {
            return Err(shape_err("matmul", &[k, n], self.value(b).shape()));
        }
        let out = matmul_raw(self.data(a), self.data(b), m, k, n);
        let t = Tensor::matrix(m, n, out)?;
        Ok(self.push(t, Op::MatMul(a, b), &[a, b]))
    }

    /// `A Bᵀ` for `A: m x k`, `B: n x k`.
    pub fn matmul_nt(&mut self, a: Var, b: Var) -> Result<Var, NdError> {
        let (m, k) = dims2(self.value(a), "matmul_nt")?;
        let (n, k2) = dims2(self.value(b), "matmul_nt")?;
        if k != k2 {
            return Err(shape_err("matmul_nt", &[n, k], self.value(b).shape()));
        }
        let (ad, bd) = (self.data(a), self.data(b));
        let mut out = Vec::with_capacity(m * n);
        for i in 0..m {
            for j in 0..n {
                out.push(dot(&ad[i * k..(i + 1) * k], &bd[j * k..(j + 1) * k]));
            }
        }
        let t = Tensor::matrix(m, n, out)?;
        Ok(self.push(t, Op::MatMulNT(a, b), &[a, b]))
    }

    fn same_shape(&self, op: &'static str, a: Var, b: Var) -> Result<(), NdError> {
        if self.value(a).shape() != self.value(b).shape() {
            return Err(shape_err(op, self.value(a).shape(), self.value(b).shape()));
        }
        Ok(())
    }

    fn map(&self, a: Var, f: impl Fn(f64) -> f64) -> Tensor {
        let t = self.value(a);
        Tensor {
            shape: t.shape().to_vec(),
            data: t.data().iter().map(|&v| f(v)).collect(),
        }
    }

    fn zip(&self, a: Var, b: Var, f: impl Fn(f64, f64) -> f64) -> Tensor {
        let (ta, tb) = (self.value(a), self.value(b));
        Tensor {
            shape: ta.shape().to_vec(),
            data: ta.data().iter().zip(tb.data()).map(|(&x, &y)| f(x, y)).collect(),
        }
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, NdError> {
        self.same_shape("add", a, b)?;
        let t = self.zip(a, b, |x, y| x + y);
        Ok(self.push(t, Op::Add(a, b), &[a, b]))
    }

    /// Sum of several same-shaped values.
    pub fn add_n(&mut self, vars: &[Var]) -> Result<Var, NdError> {
        let first = *vars.first().ok_or_else(|| NdError::Invalid("add_n of nothing".into()))?;
        let mut data = self.data(first).to_vec();
        for &v in &vars[1..] {
            self.same_shape("add_n", first, v)?;
            for (d, x) in data.iter_mut().zip(self.data(v)) {
                *d += x;
            }
        }
        let t = Tensor::new(self.value(first).shape().to_vec(), data)?;
        Ok(self.push(t, Op::AddN(vars.to_vec()), vars))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, NdError> {
        self.same_shape("mul", a, b)?;
        let t = self.zip(a, b, |x, y| x * y);
        Ok(self.push(t, Op::Mul(a, b), &[a, b]))
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        let t = self.map(a, |x| c * x);
        self.push(t, Op::Scale(a, c), &[a])
    }

    /// Elementwise product with a fixed mask (dropout).
    pub fn mul_const(&mut self, a: Var, mask: Vec<f64>) -> Result<Var, NdError> {
        if mask.len() != self.value(a).len() {
            return Err(shape_err("mul_const", self.value(a).shape(), &[mask.len()]));
        }
        let t = Tensor {
            shape: self.value(a).shape().to_vec(),
            data: self.data(a).iter().zip(&mask).map(|(x, m)| x * m).collect(),
        };
        Ok(self.push(t, Op::MulConst(a, mask), &[a]))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let t = self.map(a, sigmoid);
        self.push(t, Op::Sigmoid(a), &[a])
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let t = self.map(a, f64::tanh);
        self.push(t, Op::Tanh(a), &[a])
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let t = self.map(a, |x| x.max(0.0));
        self.push(t, Op::Relu(a), &[a])
    }

    /// Concatenates the flattened values into one vector.
    pub fn concat(&mut self, vars: &[Var]) -> Var {
        let data: Vec<f64> = vars.iter().flat_map(|&v| self.data(v).iter().copied()).collect();
        self.push(Tensor::vector(data), Op::Concat(vars.to_vec()), vars)
    }

    /// `len` consecutive flattened entries starting at `start`, as a vector.
    pub fn slice(&mut self, a: Var, start: usize, len: usize) -> Result<Var, NdError> {
        if len == 0 || start + len > self.value(a).len() {
            return Err(NdError::Invalid(format!(
                "slice {start}..{} out of range for length {}",
                start + len,
                self.value(a).len()
            )));
        }
        let t = Tensor::vector(self.data(a)[start..start + len].to_vec());
        Ok(self.push(t, Op::Slice(a, start), &[a]))
    }

    /// Stacks equal-length vectors as the rows of a matrix.
    pub fn stack_rows(&mut self, rows: &[Var]) -> Result<Var, NdError> {
        let first = *rows.first().ok_or_else(|| NdError::Invalid("stack of nothing".into()))?;
        let d = self.value(first).len();
        let mut data = Vec::with_capacity(rows.len() * d);
        for &r in rows {
            if self.value(r).len() != d {
                return Err(shape_err("stack_rows", &[d], self.value(r).shape()));
            }
            data.extend_from_slice(self.data(r));
        }
        let t = Tensor::matrix(rows.len(), d, data)?;
        Ok(self.push(t, Op::StackRows(rows.to_vec()), rows))
    }

    /// Row-wise softmax of a matrix, max-shifted.
    pub fn softmax_rows(&mut self, a: Var) -> Result<Var, NdError> {
        let (m, n) = dims2(self.value(a), "softmax_rows")?;
        let src = self.data(a);
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            let row = &src[i * n..(i + 1) * n];
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let dst = &mut out[i * n..(i + 1) * n];
            let mut total = 0.0;
            for (o, &z) in dst.iter_mut().zip(row) {
                *o = (z - max).exp();
                total += *o;
            }
            dst.iter_mut().for_each(|o| *o /= total);
        }
        let t = Tensor::matrix(m, n, out)?;
        Ok(self.push(t, Op::SoftmaxRows(a), &[a]))
    }

    /// Column means of a matrix (mean over rows).
    pub fn mean_rows(&mut self, a: Var) -> Result<Var, NdError> {
        let (m, n) = dims2(self.value(a), "mean_rows")?;
        let src = self.data(a);
        let mut out = vec![0.0; n];
        for i in 0..m {
            for (o, x) in out.iter_mut().zip(&src[i * n..(i + 1) * n]) {
                *o += x;
            }
        }
        out.iter_mut().for_each(|o| *o /= m as f64);
        Ok(self.push(Tensor::vector(out), Op::MeanRows(a), &[a]))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let total = self.data(a).iter().sum();
        self.push(Tensor::scalar(total), Op::Sum(a), &[a])
    }

    /// Binary cross-entropy of a probability `p` (one element) against
    /// `y`, with `p` clamped to `[eps, 1 - eps]` and the positive term
    /// multiplied by `weight`.
    pub fn bce(&mut self, p: Var, y: f64, weight: f64, eps: f64) -> Result<Var, NdError> {
        if self.value(p).len() != 1 {
            return Err(shape_err("bce", &[1], self.value(p).shape()));
        }
        let pc = self.data(p)[0].clamp(eps, 1.0 - eps);
        let loss = -(weight * y * pc.ln() + (1.0 - y) * (1.0 - pc).ln());
        Ok(self.push(Tensor::scalar(loss), Op::Bce { p, y, weight, eps }, &[p]))
    }

    /// Reverse pass from a one-element output.
    pub fn backward(&self, output: Var) -> Result<Gradients, NdError> {
        if self.value(output).len() != 1 {
            return Err(shape_err("backward", &[1], self.value(output).shape()));
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; self.nodes.len()];
        grads[output.0] = Some(vec![1.0]);
        for i in (0..=output.0).rev() {
            let node = &self.nodes[i];
            if matches!(node.op, Op::Leaf) || !node.requires_grad {
                continue;
            }
            let Some(g) = grads[i].take() else { continue };
            self.backward_node(node, &g, &mut grads);
        }
        Ok(Gradients { grads })
    }

    fn backward_node(&self, node: &Node<'a>, g: &[f64], grads: &mut [Option<Vec<f64>>]) {
        let nodes = &self.nodes;
        let needs = |v: Var| nodes[v.0].requires_grad;
        match &node.op {
            Op::Leaf => {}
            Op::MatVec(w, x) => {
                let (m, n) = self.value(*w).dims2().expect("matrix");
                let (wd, xd) = (self.data(*w), self.data(*x));
                if needs(*w) {
                    let dw = slot(grads, nodes, *w);
                    for i in 0..m {
                        let gi = g[i];
                        if gi != 0.0 {
                            axpy(gi, xd, &mut dw[i * n..(i + 1) * n]);
                        }
                    }
                }
                if needs(*x) {
                    let dx = slot(grads, nodes, *x);
                    for i in 0..m {
                        axpy(g[i], &wd[i * n..(i + 1) * n], dx);
                    }
                }
            }
            Op::MatMul(a, b) => {
                let (m, k) = self.value(*a).dims2().expect("matrix");
                let n = self.value(*b).dims2().expect("matrix").1;
                let (ad, bd) = (self.data(*a), self.data(*b));
                if needs(*a) {
                    // dA = G Bᵀ
                    let da = slot(grads, nodes, *a);
                    for i in 0..m {
                        for p in 0..k {
                            da[i * k + p] += dot(&g[i * n..(i + 1) * n], &bd[p * n..(p + 1) * n]);
                        }
                    }
                }
                if needs(*b) {
                    // dB = Aᵀ G
                    let db = slot(grads, nodes, *b);
                    for i in 0..m {
                        for p in 0..k {
                            axpy(ad[i * k + p], &g[i * n..(i + 1) * n], &mut db[p * n..(p + 1) * n]);
                        }
                    }
                }
            }
            Op::MatMulNT(a, b) => {
                let (m, k) = self.value(*a).dims2().expect("matrix");
                let n = self.value(*b).dims2().expect("matrix").0;
                let (ad, bd) = (self.data(*a), self.data(*b));
                if needs(*a) {
                    // dA = G B
                    let da = slot(grads, nodes, *a);
                    for i in 0..m {
                        for j in 0..n {
                            axpy(g[i * n + j], &bd[j * k..(j + 1) * k], &mut da[i * k..(i + 1) * k]);
                        }
                    }
                }
                if needs(*b) {
                    // dB = Gᵀ A
                    let db = slot(grads, nodes, *b);
                    for i in 0..m {
                        for j in 0..n {
                            axpy(g[i * n + j], &ad[i * k..(i + 1) * k], &mut db[j * k..(j + 1) * k]);
                        }
                    }
                }
            }
            Op::Add(a, b) => {
                for v in [*a, *b] {
                    if needs(v) {
                        axpy(1.0, g, slot(grads, nodes, v));
                    }
                }
            }
            Op::AddN(vars) => {
                for &v in vars {
                    if needs(v) {
                        axpy(1.0, g, slot(grads, nodes, v));
                    }
                }
            }
            Op::Mul(a, b) => {
                let (ad, bd) = (self.data(*a), self.data(*b));
                if needs(*a) {
                    for ((d, gi), y) in slot(grads, nodes, *a).iter_mut().zip(g).zip(bd) {
                        *d += gi * y;
                    }
                }
                if needs(*b) {
                    for ((d, gi), x) in slot(grads, nodes, *b).iter_mut().zip(g).zip(ad) {
                        *d += gi * x;
                    }
                }
            }
            Op::Scale(a, c) => axpy(*c, g, slot(grads, nodes, *a)),
            Op::MulConst(a, mask) => {
                for ((d, gi), m) in slot(grads, nodes, *a).iter_mut().zip(g).zip(mask) {
                    *d += gi * m;
                }
            }
            Op::Sigmoid(a) => {
                for ((d, gi), y) in slot(grads, nodes, *a).iter_mut().zip(g).zip(node.value.data()) {
                    *d += gi * y * (1.0 - y);
                }
            }
            Op::Tanh(a) => {
                for ((d, gi), y) in slot(grads, nodes, *a).iter_mut().zip(g).zip(node.value.data()) {
                    *d += gi * (1.0 - y * y);
                }
            }
            Op::Relu(a) => {
                let x = self.data(*a);
                for ((d, gi), xi) in slot(grads, nodes, *a).iter_mut().zip(g).zip(x) {
                    if *xi > 0.0 {
                        *d += gi;
                    }
                }
            }
            Op::Concat(vars) => {
                let mut offset = 0;
                for &v in vars {
                    let len = nodes[v.0].value.len();
                    if needs(v) {
                        axpy(1.0, &g[offset..offset + len], slot(grads, nodes, v));
                    }
                    offset += len;
                }
            }
            Op::Slice(a, start) => {
                let da = slot(grads, nodes, *a);
                axpy(1.0, g, &mut da[*start..*start + g.len()]);
            }
            Op::StackRows(rows) => {
                let d = node.value.dims2().expect("matrix").1;
                for (r, &v) in rows.iter().enumerate() {
                    if needs(v) {
                        axpy(1.0, &g[r * d..(r + 1) * d], slot(grads, nodes, v));
                    }
                }
            }
            Op::SoftmaxRows(a) => {
                let (m, n) = node.value.dims2().expect("matrix");
                let y = node.value.data();
                let da = slot(grads, nodes, *a);
                for i in 0..m {
                    let (yr, gr) = (&y[i * n..(i + 1) * n], &g[i * n..(i + 1) * n]);
                    let inner = dot(yr, gr);
                    for j in 0..n {
                        da[i * n + j] += yr[j] * (gr[j] - inner);
                    }
                }
            }
            Op::MeanRows(a) => {
                let (m, n) = self.value(*a).dims2().expect("matrix");
                let da = slot(grads, nodes, *a);
                for i in 0..m {
                    axpy(1.0 / m as f64, g, &mut da[i * n..(i + 1) * n]);
                }
            }
            Op::Sum(a) => {
                for d in slot(grads, nodes, *a).iter_mut() {
                    *d += g[0];
                }
            }
            Op::Bce { p, y, weight, eps } => {
                let pv = self.data(*p)[0];
                if pv > *eps && pv < 1.0 - eps {
                    let dp = -weight * y / pv + (1.0 - y) / (1.0 - pv);
                    slot(grads, nodes, *p)[0] += g[0] * dp;
                }
            }
        }
    }
}

fn slot<'g>(grads: &'g mut [Option<Vec<f64>>], nodes: &[Node<'_>], v: Var) -> &'g mut Vec<f64> {
    let len = nodes[v.0].value.len();
    grads[v.0].get_or_insert_with(|| vec![0.0; len])
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn matmul_raw(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        let row = &mut out[i * n..(i + 1) * n];
        for p in 0..k {
            axpy(a[i * k + p], &b[p * n..(p + 1) * n], row);
        }
    }
    out
}
