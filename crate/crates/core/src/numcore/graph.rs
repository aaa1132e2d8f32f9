//! Define-by-run reverse-mode differentiation.
//!
//! Every builder method evaluates its node eagerly, so node creation order is
//! a topological order and the backward pass is a single reverse sweep.

use super::error::{NumError, NumResult};
use super::ops::{matvec_into, matvec_t_acc, outer_acc, sigmoid, softmax_slice};
use super::real::Real;
use super::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone)]
enum Op<T> {
    Input,
    Param(usize),
    MatVec(NodeId, NodeId),
    MatMulT(NodeId, NodeId),
    MatTVec(NodeId, NodeId),
    AddRow(NodeId, NodeId),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Affine(NodeId, T),
    ScaleBy(NodeId, NodeId),
    Sigmoid(NodeId),
    Tanh(NodeId),
    Relu(NodeId),
    Concat(Vec<NodeId>),
    Stack(Vec<NodeId>),
    Slice(NodeId, usize),
    Row(NodeId, usize),
    Softmax(NodeId),
    ScatterAdd(NodeId, Vec<usize>),
    PadTo(NodeId),
    Pick(NodeId, usize),
    Log(NodeId, T),
    Clamp(NodeId, T, T),
    Sum(NodeId),
    Mean(NodeId),
    Dot(NodeId, NodeId),
}

#[derive(Debug)]
struct Node<T> {
    op: Op<T>,
    value: Option<Tensor<T>>,
    requires_grad: bool,
}

/// Computation graph over a borrowed parameter list.
#[derive(Debug)]
pub struct Graph<'p, T> {
    params: &'p [Tensor<T>],
    nodes: Vec<Node<T>>,
    param_nodes: Vec<Option<NodeId>>,
}

impl<'p, T: Real> Graph<'p, T> {
    pub fn new(params: &'p [Tensor<T>]) -> Self {
        Graph { params, nodes: Vec::new(), param_nodes: vec![None; params.len()] }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: NodeId) -> &Tensor<T> {
        let node = &self.nodes[id.0];
        match node.op {
            Op::Param(p) => &self.params[p],
            _ => node.value.as_ref().expect("evaluated node"),
        }
    }

    pub fn shape(&self, id: NodeId) -> &[usize] {
        self.value(id).shape()
    }

    fn push(&mut self, op: Op<T>, value: Tensor<T>, inputs: &[NodeId]) -> NodeId {
        let requires_grad = inputs.iter().any(|i| self.nodes[i.0].requires_grad);
        self.nodes.push(Node { op, value: Some(value), requires_grad });
        NodeId(self.nodes.len() - 1)
    }

    pub fn input(&mut self, t: Tensor<T>) -> NodeId {
        self.nodes.push(Node { op: Op::Input, value: Some(t), requires_grad: false });
        NodeId(self.nodes.len() - 1)
    }

    pub fn param(&mut self, index: usize) -> NodeId {
        if let Some(id) = self.param_nodes[index] {
            return id;
        }
        self.nodes.push(Node { op: Op::Param(index), value: None, requires_grad: true });
        let id = NodeId(self.nodes.len() - 1);
        self.param_nodes[index] = Some(id);
        id
    }

    /// `W x` with `W: [m, n]`, `x: [n]`.
    pub fn matvec(&mut self, w: NodeId, x: NodeId) -> NumResult<NodeId> {
        let (ws, xs) = (self.shape(w), self.shape(x));
        if ws.len() != 2 || xs.len() != 1 || ws[1] != xs[0] {
            return Err(NumError::dim("matvec", "W", ws, "x", xs));
        }
        let (m, n) = (ws[0], ws[1]);
        let mut out = vec![T::zero(); m];
        matvec_into(self.value(w).data(), m, n, self.value(x).data(), &mut out);
        Ok(self.push(Op::MatVec(w, x), Tensor::vector(out), &[w, x]))
    }

    /// `A Wᵀ` with `A: [n, k]`, `W: [m, k]`.
    pub fn matmul_t(&mut self, a: NodeId, w: NodeId) -> NumResult<NodeId> {
        let (as_, ws) = (self.shape(a), self.shape(w));
        if as_.len() != 2 || ws.len() != 2 || as_[1] != ws[1] {
            return Err(NumError::dim("matmul_t", "A", as_, "W", ws));
        }
        let (n, k, m) = (as_[0], as_[1], ws[0]);
        let mut out = vec![T::zero(); n * m];
        let (av, wv) = (self.value(a).data(), self.value(w).data());
        for i in 0..n {
            matvec_into(wv, m, k, &av[i * k..(i + 1) * k], &mut out[i * m..(i + 1) * m]);
        }
        let t = Tensor::matrix(n, m, out)?;
        Ok(self.push(Op::MatMulT(a, w), t, &[a, w]))
    }

    /// `Mᵀ a` with `M: [n, d]`, `a: [n]`.
    pub fn matvec_t(&mut self, m: NodeId, a: NodeId) -> NumResult<NodeId> {
        let (ms, as_) = (self.shape(m), self.shape(a));
        if ms.len() != 2 || as_.len() != 1 || ms[0] != as_[0] {
            return Err(NumError::dim("matvec_t", "M", ms, "a", as_));
        }
        let (n, d) = (ms[0], ms[1]);
        let mut out = vec![T::zero(); d];
        matvec_t_acc(self.value(m).data(), n, d, self.value(a).data(), &mut out);
        Ok(self.push(Op::MatTVec(m, a), Tensor::vector(out), &[m, a]))
    }

    /// Adds vector `r: [k]` to every row of `M: [n, k]`.
    pub fn add_row(&mut self, m: NodeId, r: NodeId) -> NumResult<NodeId> {
        let (ms, rs) = (self.shape(m), self.shape(r));
        if ms.len() != 2 || rs.len() != 1 || ms[1] != rs[0] {
            return Err(NumError::dim("add_row", "M", ms, "r", rs));
        }
        let k = ms[1];
        let mut out = self.value(m).clone();
        let rv = self.value(r).data();
        for (i, x) in out.data_mut().iter_mut().enumerate() {
            *x += rv[i % k];
        }
        Ok(self.push(Op::AddRow(m, r), out, &[m, r]))
    }

    fn zip_with(
        &mut self,
        name: &'static str,
        a: NodeId,
        b: NodeId,
        op: Op<T>,
        f: impl Fn(T, T) -> T,
    ) -> NumResult<NodeId> {
        let (av, bv) = (self.value(a), self.value(b));
        if av.shape() != bv.shape() {
            return Err(NumError::dim(name, "a", av.shape(), "b", bv.shape()));
        }
        let data = av.data().iter().zip(bv.data()).map(|(&x, &y)| f(x, y)).collect();
        let t = Tensor::new(av.shape().to_vec(), data)?;
        Ok(self.push(op, t, &[a, b]))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NumResult<NodeId> {
        self.zip_with("add", a, b, Op::Add(a, b), |x, y| x + y)
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NumResult<NodeId> {
        self.zip_with("sub", a, b, Op::Sub(a, b), |x, y| x - y)
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NumResult<NodeId> {
        self.zip_with("mul", a, b, Op::Mul(a, b), |x, y| x * y)
    }

    fn map(&mut self, a: NodeId, op: Op<T>, f: impl Fn(T) -> T) -> NodeId {
        let av = self.value(a);
        let data = av.data().iter().map(|&x| f(x)).collect();
        let t = Tensor::new(av.shape().to_vec(), data).expect("same shape");
        self.push(op, t, &[a])
    }

    /// `scale · a + shift`, elementwise.
    pub fn affine(&mut self, a: NodeId, scale: T, shift: T) -> NodeId {
        self.map(a, Op::Affine(a, scale), |x| scale * x + shift)
    }

    /// Vector `a` times scalar node `s`.
    pub fn scale_by(&mut self, a: NodeId, s: NodeId) -> NumResult<NodeId> {
        let sv = self.value(s);
        if sv.len() != 1 {
            return Err(NumError::dim("scale_by", "a", self.shape(a), "s", sv.shape()));
        }
        let k = sv.data()[0];
        let av = self.value(a);
        let data = av.data().iter().map(|&x| x * k).collect();
        let t = Tensor::new(av.shape().to_vec(), data)?;
        Ok(self.push(Op::ScaleBy(a, s), t, &[a, s]))
    }

    pub fn sigmoid(&mut self, a: NodeId) -> NodeId {
        self.map(a, Op::Sigmoid(a), sigmoid)
    }

    pub fn tanh(&mut self, a: NodeId) -> NodeId {
        self.map(a, Op::Tanh(a), T::tanh)
    }

    pub fn relu(&mut self, a: NodeId) -> NodeId {
        self.map(a, Op::Relu(a), |x| x.max(T::zero()))
    }

    /// Elementwise `ln(max(a, floor))`.
    pub fn log(&mut self, a: NodeId, floor: T) -> NodeId {
        self.map(a, Op::Log(a, floor), |x| x.max(floor).ln())
    }

    pub fn clamp(&mut self, a: NodeId, lo: T, hi: T) -> NodeId {
        self.map(a, Op::Clamp(a, lo, hi), |x| x.max(lo).min(hi))
    }

    /// Concatenates vectors.
    pub fn concat(&mut self, parts: &[NodeId]) -> NumResult<NodeId> {
        let mut data = Vec::new();
        for &p in parts {
            let v = self.value(p);
            if v.shape().len() != 1 {
                return Err(NumError::dim("concat", "part", v.shape(), "vector", &[v.len()]));
            }
            data.extend_from_slice(v.data());
        }
        if data.is_empty() {
            return Err(NumError::contract("concat", "no parts"));
        }
        Ok(self.push(Op::Concat(parts.to_vec()), Tensor::vector(data), parts))
    }

    /// Stacks equal-length vectors into an `[n, d]` matrix.
    pub fn stack(&mut self, rows: &[NodeId]) -> NumResult<NodeId> {
        let Some(&first) = rows.first() else {
            return Err(NumError::contract("stack", "no rows"));
        };
        let d = self.value(first).len();
        let mut data = Vec::with_capacity(rows.len() * d);
        for &r in rows {
            let v = self.value(r);
            if v.shape() != [d] {
                return Err(NumError::dim("stack", "row", v.shape(), "first", &[d]));
            }
            data.extend_from_slice(v.data());
        }
        let t = Tensor::matrix(rows.len(), d, data)?;
        Ok(self.push(Op::Stack(rows.to_vec()), t, rows))
    }

    pub fn slice(&mut self, a: NodeId, start: usize, len: usize) -> NumResult<NodeId> {
        let av = self.value(a);
        if av.shape().len() != 1 || start + len > av.len() || len == 0 {
            return Err(NumError::dim("slice", "a", av.shape(), "range", &[start, start + len]));
        }
        let t = Tensor::vector(av.data()[start..start + len].to_vec());
        Ok(self.push(Op::Slice(a, start), t, &[a]))
    }

    /// Row `index` of a matrix (embedding lookup).
    pub fn row(&mut self, table: NodeId, index: usize) -> NumResult<NodeId> {
        let tv = self.value(table);
        if tv.shape().len() != 2 || index >= tv.rows() {
            return Err(NumError::contract(
                "row",
                format!("index {index} out of range for table {:?}", tv.shape()),
            ));
        }
        let t = Tensor::vector(tv.row(index).to_vec());
        Ok(self.push(Op::Row(table, index), t, &[table]))
    }

    pub fn softmax(&mut self, a: NodeId) -> NumResult<NodeId> {
        self.masked_softmax(a, None)
    }

    /// Softmax over unmasked positions; masked positions get exactly zero.
    pub fn masked_softmax(&mut self, a: NodeId, mask: Option<&[bool]>) -> NumResult<NodeId> {
        let av = self.value(a);
        if av.shape().len() != 1 {
            return Err(NumError::Domain { op: "softmax", msg: format!("expected vector, got {:?}", av.shape()) });
        }
        if !av.is_finite() {
            return Err(NumError::NonFinite { op: "softmax" });
        }
        let n = av.len();
        let mut out = vec![T::zero(); n];
        match mask {
            None => softmax_slice(av.data(), &mut out),
            Some(mask) => {
                if mask.len() != n {
                    return Err(NumError::dim("softmax", "energies", av.shape(), "mask", &[mask.len()]));
                }
                let live: Vec<usize> = (0..n).filter(|&i| mask[i]).collect();
                if live.is_empty() {
                    return Err(NumError::contract("softmax", "all positions masked"));
                }
                let e: Vec<T> = live.iter().map(|&i| av.data()[i]).collect();
                let mut s = vec![T::zero(); e.len()];
                softmax_slice(&e, &mut s);
                for (&i, v) in live.iter().zip(s) {
                    out[i] = v;
                }
            }
        }
        Ok(self.push(Op::Softmax(a), Tensor::vector(out), &[a]))
    }

    /// `out[index[i]] += a[i]` into a zero vector of length `size`.
    pub fn scatter_add(&mut self, a: NodeId, index: &[usize], size: usize) -> NumResult<NodeId> {
        let av = self.value(a);
        if av.shape() != [index.len()] {
            return Err(NumError::dim("scatter_add", "a", av.shape(), "index", &[index.len()]));
        }
        if let Some(&bad) = index.iter().find(|&&i| i >= size) {
            return Err(NumError::contract("scatter_add", format!("index {bad} >= size {size}")));
        }
        let mut out = vec![T::zero(); size];
        for (&i, &x) in index.iter().zip(av.data()) {
            out[i] += x;
        }
        Ok(self.push(Op::ScatterAdd(a, index.to_vec()), Tensor::vector(out), &[a]))
    }

    /// Zero-extends a vector to length `size`.
    pub fn pad_to(&mut self, a: NodeId, size: usize) -> NumResult<NodeId> {
        let av = self.value(a);
        if av.shape().len() != 1 || av.len() > size {
            return Err(NumError::dim("pad_to", "a", av.shape(), "size", &[size]));
        }
        let mut data = av.data().to_vec();
        data.resize(size, T::zero());
        Ok(self.push(Op::PadTo(a), Tensor::vector(data), &[a]))
    }

    pub fn pick(&mut self, a: NodeId, index: usize) -> NumResult<NodeId> {
        let av = self.value(a);
        if index >= av.len() {
            return Err(NumError::contract("pick", format!("index {index} >= {}", av.len())));
        }
        let t = Tensor::scalar(av.data()[index]);
        Ok(self.push(Op::Pick(a, index), t, &[a]))
    }

    pub fn sum(&mut self, a: NodeId) -> NodeId {
        let s = self.value(a).data().iter().copied().sum();
        self.push(Op::Sum(a), Tensor::scalar(s), &[a])
    }

    pub fn mean(&mut self, a: NodeId) -> NodeId {
        let v = self.value(a);
        let s: T = v.data().iter().copied().sum();
        let m = s / T::from_f64(v.len() as f64);
        self.push(Op::Mean(a), Tensor::scalar(m), &[a])
    }

    pub fn dot(&mut self, a: NodeId, b: NodeId) -> NumResult<NodeId> {
        let (av, bv) = (self.value(a), self.value(b));
        if av.shape() != bv.shape() {
            return Err(NumError::dim("dot", "a", av.shape(), "b", bv.shape()));
        }
        let s = av.data().iter().zip(bv.data()).map(|(&x, &y)| x * y).sum();
        Ok(self.push(Op::Dot(a, b), Tensor::scalar(s), &[a, b]))
    }

    /// Reverse sweep from a scalar node. Returns one gradient per parameter,
    /// zero for parameters the loss does not reach.
    pub fn backward(&self, loss: NodeId) -> NumResult<Vec<Tensor<T>>> {
        let lv = self.value(loss);
        if lv.len() != 1 {
            return Err(NumError::contract("backward", format!("loss must be scalar, got shape {:?}", lv.shape())));
        }
        let mut grads: Vec<Option<Vec<T>>> = vec![None; loss.0 + 1];
        grads[loss.0] = Some(vec![T::one()]);
        let mut out: Vec<Tensor<T>> = self.params.iter().map(|p| Tensor::zeros(p.shape())).collect();

        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            let node = &self.nodes[i];
            if !node.requires_grad {
                continue;
            }
            let y = self.value(NodeId(i)).data();
            match &node.op {
                Op::Input => {}
                Op::Param(p) => {
                    for (o, gv) in out[*p].data_mut().iter_mut().zip(&g) {
                        *o += *gv;
                    }
                }
                Op::MatVec(w, x) => {
                    let wv = self.value(*w);
                    let (m, n) = (wv.shape()[0], wv.shape()[1]);
                    if self.needs(*w) {
                        outer_acc(&g, self.value(*x).data(), self.grad_buf(&mut grads, *w));
                    }
                    if self.needs(*x) {
                        matvec_t_acc(wv.data(), m, n, &g, self.grad_buf(&mut grads, *x));
                    }
                }
                Op::MatMulT(a, w) => {
                    let (av, wv) = (self.value(*a), self.value(*w));
                    let (n, k, m) = (av.shape()[0], av.shape()[1], wv.shape()[0]);
                    if self.needs(*a) {
                        let ga = self.grad_buf(&mut grads, *a);
                        for r in 0..n {
                            matvec_t_acc(wv.data(), m, k, &g[r * m..(r + 1) * m], &mut ga[r * k..(r + 1) * k]);
                        }
                    }
                    if self.needs(*w) {
                        let gw = self.grad_buf(&mut grads, *w);
                        for r in 0..n {
                            outer_acc(&g[r * m..(r + 1) * m], &av.data()[r * k..(r + 1) * k], gw);
                        }
                    }
                }
                Op::MatTVec(mn, a) => {
                    let mv = self.value(*mn);
                    let (n, d) = (mv.shape()[0], mv.shape()[1]);
                    if self.needs(*mn) {
                        outer_acc(self.value(*a).data(), &g, self.grad_buf(&mut grads, *mn));
                    }
                    if self.needs(*a) {
                        let mut tmp = vec![T::zero(); n];
                        matvec_into(mv.data(), n, d, &g, &mut tmp);
                        add_into(self.grad_buf(&mut grads, *a), &tmp);
                    }
                }
                Op::AddRow(mn, r) => {
                    if self.needs(*mn) {
                        add_into(self.grad_buf(&mut grads, *mn), &g);
                    }
                    if self.needs(*r) {
                        let gr = self.grad_buf(&mut grads, *r);
                        let k = gr.len();
                        for (idx, &gv) in g.iter().enumerate() {
                            gr[idx % k] += gv;
                        }
                    }
                }
                Op::Add(a, b) => {
                    if self.needs(*a) {
                        add_into(self.grad_buf(&mut grads, *a), &g);
                    }
                    if self.needs(*b) {
                        add_into(self.grad_buf(&mut grads, *b), &g);
                    }
                }
                Op::Sub(a, b) => {
                    if self.needs(*a) {
                        add_into(self.grad_buf(&mut grads, *a), &g);
                    }
                    if self.needs(*b) {
                        for (o, &gv) in self.grad_buf(&mut grads, *b).iter_mut().zip(&g) {
                            *o -= gv;
                        }
                    }
                }
                Op::Mul(a, b) => {
                    let (av, bv) = (self.value(*a).data(), self.value(*b).data());
                    if self.needs(*a) {
                        for ((o, &gv), &bx) in self.grad_buf(&mut grads, *a).iter_mut().zip(&g).zip(bv) {
                            *o += gv * bx;
                        }
                    }
                    if self.needs(*b) {
                        for ((o, &gv), &ax) in self.grad_buf(&mut grads, *b).iter_mut().zip(&g).zip(av) {
                            *o += gv * ax;
                        }
                    }
                }
                Op::Affine(a, scale) => {
                    for (o, &gv) in self.grad_buf(&mut grads, *a).iter_mut().zip(&g) {
                        *o += *scale * gv;
                    }
                }
                Op::ScaleBy(a, s) => {
                    let (av, k) = (self.value(*a).data(), self.value(*s).data()[0]);
                    if self.needs(*a) {
                        for (o, &gv) in self.grad_buf(&mut grads, *a).iter_mut().zip(&g) {
                            *o += gv * k;
                        }
                    }
                    if self.needs(*s) {
                        let d: T = g.iter().zip(av).map(|(&gv, &x)| gv * x).sum();
                        self.grad_buf(&mut grads, *s)[0] += d;
                    }
                }
                Op::Sigmoid(a) => {
                    for ((o, &gv), &yv) in self.grad_buf(&mut grads, *a).iter_mut().zip(&g).zip(y) {
                        *o += gv * yv * (T::one() - yv);
                    }
                }
                Op::Tanh(a) => {
                    for ((o, &gv), &yv) in self.grad_buf(&mut grads, *a).iter_mut().zip(&g).zip(y) {
                        *o += gv * (T::one() - yv * yv);
                    }
                }
                Op::Relu(a) => {
                    let xv = self.value(*a).data();
                    for ((o, &gv), &xx) in self.grad_buf(&mut grads, *a).iter_mut().zip(&g).zip(xv) {
                        if xx > T::zero() {
                            *o += gv;
                        }
                    }
                }
                Op::Log(a, floor) => {
                    let xv = self.value(*a).data();
                    for ((o, &gv), &xx) in self.grad_buf(&mut grads, *a).iter_mut().zip(&g).zip(xv) {
                        if xx > *floor {
                            *o += gv / xx;
                        }
                    }
                }
                Op::Clamp(a, lo, hi) => {
                    let xv = self.value(*a).data();
                    for ((o, &gv), &xx) in self.grad_buf(&mut grads, *a).iter_mut().zip(&g).zip(xv) {
                        if xx >= *lo && xx <= *hi {
                            *o += gv;
                        }
                    }
                }
                Op::Concat(parts) | Op::Stack(parts) => {
                    let mut offset = 0;
                    for &p in parts {
                        let n = self.value(p).len();
                        if self.needs(p) {
                            add_into(self.grad_buf(&mut grads, p), &g[offset..offset + n]);
                        }
                        offset += n;
                    }
                }
                Op::Slice(a, start) => {
                    let ga = self.grad_buf(&mut grads, *a);
                    add_into(&mut ga[*start..*start + g.len()], &g);
                }
                Op::Row(table, index) => {
                    let ga = self.grad_buf(&mut grads, *table);
                    let d = g.len();
                    add_into(&mut ga[index * d..(index + 1) * d], &g);
                }
                Op::Softmax(a) => {
                    let dotp: T = y.iter().zip(&g).map(|(&yv, &gv)| yv * gv).sum();
                    for ((o, &gv), &yv) in self.grad_buf(&mut grads, *a).iter_mut().zip(&g).zip(y) {
                        *o += yv * (gv - dotp);
                    }
                }
                Op::ScatterAdd(a, index) => {
                    for (o, &ix) in self.grad_buf(&mut grads, *a).iter_mut().zip(index) {
                        *o += g[ix];
                    }
                }
                Op::PadTo(a) => {
                    let ga = self.grad_buf(&mut grads, *a);
                    let n = ga.len();
                    add_into(ga, &g[..n]);
                }
                Op::Pick(a, index) => {
                    self.grad_buf(&mut grads, *a)[*index] += g[0];
                }
                Op::Sum(a) => {
                    self.grad_buf(&mut grads, *a).iter_mut().for_each(|o| *o += g[0]);
                }
                Op::Mean(a) => {
                    let ga = self.grad_buf(&mut grads, *a);
                    let k = g[0] / T::from_f64(ga.len() as f64);
                    ga.iter_mut().for_each(|o| *o += k);
                }
                Op::Dot(a, b) => {
                    let (av, bv) = (self.value(*a).data(), self.value(*b).data());
                    if self.needs(*a) {
                        for (o, &bx) in self.grad_buf(&mut grads, *a).iter_mut().zip(bv) {
                            *o += g[0] * bx;
                        }
                    }
                    if self.needs(*b) {
                        for (o, &ax) in self.grad_buf(&mut grads, *b).iter_mut().zip(av) {
                            *o += g[0] * ax;
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    fn needs(&self, id: NodeId) -> bool {
        self.nodes[id.0].requires_grad
    }

    fn grad_buf<'g>(&self, grads: &'g mut [Option<Vec<T>>], id: NodeId) -> &'g mut Vec<T> {
        let n = self.value(id).len();
        grads[id.0].get_or_insert_with(|| vec![T::zero(); n])
    }
}

fn add_into<T: Real>(dst: &mut [T], src: &[T]) {
    for (d, &s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}
