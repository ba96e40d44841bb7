//! Define-then-run reverse-mode gradient graph over whole tensors.
//!
//! Nodes are appended by the builder methods, so every node's inputs precede
//! it and the node vector is already in topological order. [`Graph::forward`]
//! binds the named inputs and records every intermediate value;
//! [`Graph::backward`] walks the nodes once in reverse.
//!
//! ```
//! use std::collections::HashMap;
//! use inc_core::numcore::{Graph, Tensor};
//!
//! // f(w) = sin(w * x) with x = 2, w = 3
//! let mut g = Graph::<f64>::new();
//! let x = g.input("x");
//! let w = g.param("w");
//! let b = g.constant(Tensor::vector(vec![0.0]));
//! let y = g.affine(x, w, b);
//! let out = g.sin(y);
//! g.set_output(out);
//!
//! let xv = Tensor::matrix(1, 1, vec![2.0]).unwrap();
//! let wv = Tensor::matrix(1, 1, vec![3.0]).unwrap();
//! let inputs = HashMap::from([("x", &xv), ("w", &wv)]);
//! let value = g.forward(&inputs).unwrap();
//! assert!((value.data()[0] - 6f64.sin()).abs() < 1e-15);
//!
//! let grads = g.backward(&Tensor::matrix(1, 1, vec![1.0]).unwrap()).unwrap();
//! assert!((grads["w"].data()[0] - 2.0 * 6f64.cos()).abs() < 1e-15);
//! ```

use std::collections::HashMap;
use std::sync::Arc;

use super::tensor::gemm_into;
use super::{NumError, Real, Tensor};

/// Handle to a node inside one [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeId(usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// A fixed linear operator usable as a graph node (e.g. a sketch).
///
/// Backward applies the transpose, so `apply_transpose` must be the exact
/// adjoint of `apply` for gradients to be correct.
pub trait LinearMap<T: Real>: Send + Sync {
    fn apply(&self, x: &Tensor<T>) -> Result<Tensor<T>, NumError>;

    fn apply_transpose(&self, y: &Tensor<T>) -> Result<Tensor<T>, NumError>;
}

#[derive(Clone)]
enum Op<T: Real> {
    Input { name: String, requires_grad: bool },
    Constant(Tensor<T>),
    /// `x * w^T + b` with `x: n x in`, `w: out x in`, `b` holding `out` values.
    Affine { x: NodeId, weight: NodeId, bias: NodeId },
    Sin(NodeId),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Scale(NodeId, T),
    Square(NodeId),
    Sqrt(NodeId),
    Div(NodeId, NodeId),
    /// Column-wise concatenation of two matrices with equal row counts.
    Concat(NodeId, NodeId),
    /// Contiguous window of the flattened input, reshaped.
    Slice { x: NodeId, offset: usize, shape: Vec<usize> },
    Reshape { x: NodeId, shape: Vec<usize> },
    /// `n x c -> 1 x c`
    SumRows(NodeId),
    Sum(NodeId),
    Mean(NodeId),
    Linear(NodeId, Arc<dyn LinearMap<T>>),
}

impl<T: Real> Op<T> {
    fn label(&self) -> &'static str {
        match self {
            Op::Input { .. } => "input",
            Op::Constant(_) => "constant",
            Op::Affine { .. } => "affine",
            Op::Sin(_) => "sin",
            Op::Add(..) => "add",
            Op::Sub(..) => "sub",
            Op::Scale(..) => "scale",
            Op::Square(_) => "square",
            Op::Sqrt(_) => "sqrt",
            Op::Div(..) => "div",
            Op::Concat(..) => "concat",
            Op::Slice { .. } => "slice",
            Op::Reshape { .. } => "reshape",
            Op::SumRows(_) => "sum_rows",
            Op::Sum(_) => "sum",
            Op::Mean(_) => "mean",
            Op::Linear(..) => "linear",
        }
    }

    fn operands(&self) -> Vec<NodeId> {
        match self {
            Op::Input { .. } | Op::Constant(_) => vec![],
            Op::Affine { x, weight, bias } => vec![*x, *weight, *bias],
            Op::Add(a, b) | Op::Sub(a, b) | Op::Div(a, b) | Op::Concat(a, b) => vec![*a, *b],
            Op::Sin(x)
            | Op::Scale(x, _)
            | Op::Square(x)
            | Op::Sqrt(x)
            | Op::SumRows(x)
            | Op::Sum(x)
            | Op::Mean(x)
            | Op::Linear(x, _) => vec![*x],
            Op::Slice { x, .. } | Op::Reshape { x, .. } => vec![*x],
        }
    }
}

struct Node<T: Real> {
    op: Op<T>,
    needs_grad: bool,
}

/// Gradients keyed by input name, for every input built with [`Graph::param`].
#[derive(Debug, Clone)]
pub struct Gradients<T> {
    grads: HashMap<String, Tensor<T>>,
    visited: usize,
}

impl<T> Gradients<T> {
    pub fn get(&self, name: &str) -> Option<&Tensor<T>> {
        self.grads.get(name)
    }

    pub fn remove(&mut self, name: &str) -> Option<Tensor<T>> {
        self.grads.remove(name)
    }

    /// Number of nodes the backward pass processed.
    pub fn visited(&self) -> usize {
        self.visited
    }
}

impl<T> std::ops::Index<&str> for Gradients<T> {
    type Output = Tensor<T>;

    fn index(&self, name: &str) -> &Tensor<T> {
        &self.grads[name]
    }
}

pub struct Graph<T: Real> {
    nodes: Vec<Node<T>>,
    values: Vec<Option<Tensor<T>>>,
    output: Option<NodeId>,
    evaluated: bool,
}

impl<T: Real> Default for Graph<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> Graph<T> {
    pub fn new() -> Self {
        Self {
            nodes: Vec::new(),
            values: Vec::new(),
            output: None,
            evaluated: false,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, op: Op<T>) -> NodeId {
        let needs_grad = match &op {
            Op::Input { requires_grad, .. } => *requires_grad,
            Op::Constant(_) => false,
            other => other.operands().iter().any(|id| self.nodes[id.0].needs_grad),
        };
        self.nodes.push(Node { op, needs_grad });
        self.evaluated = false;
        NodeId(self.nodes.len() - 1)
    }

    fn leaf(&mut self, name: &str, requires_grad: bool) -> NodeId {
        let existing = self.nodes.iter().position(|n| {
            matches!(&n.op, Op::Input { name: other, .. } if other == name)
        });
        if let Some(i) = existing {
            if let Op::Input { requires_grad: rg, .. } = &mut self.nodes[i].op {
                *rg |= requires_grad;
                self.nodes[i].needs_grad |= requires_grad;
            }
            return NodeId(i);
        }
        self.push(Op::Input {
            name: name.to_string(),
            requires_grad,
        })
    }

    /// Named input that receives no gradient.
    pub fn input(&mut self, name: &str) -> NodeId {
        self.leaf(name, false)
    }

    /// Named input that receives a gradient in [`Graph::backward`].
    pub fn param(&mut self, name: &str) -> NodeId {
        self.leaf(name, true)
    }

    pub fn constant(&mut self, value: Tensor<T>) -> NodeId {
        self.push(Op::Constant(value))
    }

    pub fn affine(&mut self, x: NodeId, weight: NodeId, bias: NodeId) -> NodeId {
        self.push(Op::Affine { x, weight, bias })
    }

    pub fn sin(&mut self, x: NodeId) -> NodeId {
        self.push(Op::Sin(x))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.push(Op::Add(a, b))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.push(Op::Sub(a, b))
    }

    pub fn scale(&mut self, x: NodeId, alpha: T) -> NodeId {
        self.push(Op::Scale(x, alpha))
    }

    pub fn square(&mut self, x: NodeId) -> NodeId {
        self.push(Op::Square(x))
    }

    pub fn sqrt(&mut self, x: NodeId) -> NodeId {
        self.push(Op::Sqrt(x))
    }

    pub fn div(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.push(Op::Div(a, b))
    }

    pub fn concat(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.push(Op::Concat(a, b))
    }

    pub fn slice(&mut self, x: NodeId, offset: usize, shape: &[usize]) -> NodeId {
        self.push(Op::Slice {
            x,
            offset,
            shape: shape.to_vec(),
        })
    }

    pub fn reshape(&mut self, x: NodeId, shape: &[usize]) -> NodeId {
        self.push(Op::Reshape {
            x,
            shape: shape.to_vec(),
        })
    }

    pub fn sum_rows(&mut self, x: NodeId) -> NodeId {
        self.push(Op::SumRows(x))
    }

    pub fn sum(&mut self, x: NodeId) -> NodeId {
        self.push(Op::Sum(x))
    }

    pub fn mean(&mut self, x: NodeId) -> NodeId {
        self.push(Op::Mean(x))
    }

    pub fn linear(&mut self, x: NodeId, map: Arc<dyn LinearMap<T>>) -> NodeId {
        self.push(Op::Linear(x, map))
    }

    /// Marks the node returned by forward; defaults to the last node.
    pub fn set_output(&mut self, id: NodeId) {
        self.output = Some(id);
    }

    fn output_id(&self) -> Result<NodeId, NumError> {
        match self.output {
            Some(id) => Ok(id),
            None if !self.nodes.is_empty() => Ok(NodeId(self.nodes.len() - 1)),
            None => Err(NumError::EmptyGraph),
        }
    }

    /// Value recorded for `id` by the last forward pass.
    pub fn value(&self, id: NodeId) -> Option<&Tensor<T>> {
        self.values.get(id.0).and_then(|v| v.as_ref())
    }

    /// Evaluates every node and returns the output value.
    pub fn forward(&mut self, inputs: &HashMap<&str, &Tensor<T>>) -> Result<Tensor<T>, NumError> {
        let out = self.output_id()?;
        self.evaluated = false;
        self.values.clear();
        self.values.reserve(self.nodes.len());
        for i in 0..self.nodes.len() {
            let value = self.eval_node(i, inputs)?;
            if !value.is_finite() {
                return Err(NumError::NonFinite {
                    node: i,
                    op: self.nodes[i].op.label(),
                    pass: "forward",
                });
            }
            self.values.push(Some(value));
        }
        self.evaluated = true;
        Ok(self.values[out.0].clone().expect("evaluated"))
    }

    fn val(&self, id: NodeId) -> &Tensor<T> {
        self.values[id.0].as_ref().expect("operand evaluated before use")
    }

    fn eval_node(&self, i: usize, inputs: &HashMap<&str, &Tensor<T>>) -> Result<Tensor<T>, NumError> {
        let mismatch = |msg: String| NumError::ShapeMismatch(format!("node {i}: {msg}"));
        let value = match &self.nodes[i].op {
            Op::Input { name, .. } => match inputs.get(name.as_str()) {
                Some(t) => (*t).clone(),
                None => return Err(NumError::UnboundInput(name.clone())),
            },
            Op::Constant(t) => t.clone(),
            Op::Affine { x, weight, bias } => {
                let (x, w, b) = (self.val(*x), self.val(*weight), self.val(*bias));
                if x.cols() != w.cols() || b.len() != w.rows() || w.shape().len() != 2 {
                    return Err(mismatch(format!(
                        "affine x {:?}, w {:?}, b {:?}",
                        x.shape(),
                        w.shape(),
                        b.shape()
                    )));
                }
                let mut y = gemm_into(x, false, w, true)?;
                let out = w.rows();
                let bd = b.data();
                for row in y.data_mut().chunks_mut(out) {
                    for (v, &bb) in row.iter_mut().zip(bd) {
                        *v = *v + bb;
                    }
                }
                y
            }
            Op::Sin(x) => self.val(*x).map(T::sin),
            Op::Add(a, b) => self.val(*a).zip_map(self.val(*b), |p, q| p + q).map_err(|e| mismatch(e.to_string()))?,
            Op::Sub(a, b) => self.val(*a).zip_map(self.val(*b), |p, q| p - q).map_err(|e| mismatch(e.to_string()))?,
            Op::Scale(x, alpha) => self.val(*x).scale(*alpha),
            Op::Square(x) => self.val(*x).map(|v| v * v),
            Op::Sqrt(x) => self.val(*x).map(T::sqrt),
            Op::Div(a, b) => self.val(*a).zip_map(self.val(*b), |p, q| p / q).map_err(|e| mismatch(e.to_string()))?,
            Op::Concat(a, b) => {
                let (a, b) = (self.val(*a), self.val(*b));
                if a.rows() != b.rows() {
                    return Err(mismatch(format!("concat rows {} vs {}", a.rows(), b.rows())));
                }
                let (ca, cb) = (a.cols(), b.cols());
                let mut data = Vec::with_capacity(a.len() + b.len());
                for r in 0..a.rows() {
                    data.extend_from_slice(a.row(r));
                    data.extend_from_slice(b.row(r));
                }
                Tensor::matrix(a.rows(), ca + cb, data)?
            }
            Op::Slice { x, offset, shape } => {
                let x = self.val(*x);
                let len: usize = shape.iter().product();
                if offset + len > x.len() {
                    return Err(mismatch(format!(
                        "slice [{offset}, {}) of {} values",
                        offset + len,
                        x.len()
                    )));
                }
                Tensor::new(shape.clone(), x.data()[*offset..offset + len].to_vec())?
            }
            Op::Reshape { x, shape } => self.val(*x).clone().reshape(shape).map_err(|e| mismatch(e.to_string()))?,
            Op::SumRows(x) => {
                let x = self.val(*x);
                let c = x.cols();
                let mut acc = vec![T::zero(); c];
                for r in 0..x.rows() {
                    for (a, &v) in acc.iter_mut().zip(x.row(r)) {
                        *a = *a + v;
                    }
                }
                Tensor::matrix(1, c, acc)?
            }
            Op::Sum(x) => Tensor::scalar(self.val(*x).sum()),
            Op::Mean(x) => {
                let x = self.val(*x);
                if x.is_empty() {
                    return Err(mismatch("mean of empty tensor".into()));
                }
                Tensor::scalar(x.sum() / T::from_f64(x.len() as f64))
            }
            Op::Linear(x, map) => map.apply(self.val(*x))?,
        };
        Ok(value)
    }

    /// Propagates `seed` (same shape as the output) back to every parameter.
    pub fn backward(&mut self, seed: &Tensor<T>) -> Result<Gradients<T>, NumError> {
        if !self.evaluated {
            return Err(NumError::BackwardBeforeForward);
        }
        let out = self.output_id()?;
        if seed.shape() != self.val(out).shape() {
            return Err(NumError::ShapeMismatch(format!(
                "seed {:?} vs output {:?}",
                seed.shape(),
                self.val(out).shape()
            )));
        }
        let mut grads: Vec<Option<Tensor<T>>> = vec![None; self.nodes.len()];
        grads[out.0] = Some(seed.clone());
        let mut result = HashMap::new();
        let mut visited = 0;

        for i in (0..=out.0).rev() {
            if !self.nodes[i].needs_grad {
                continue;
            }
            let Some(g) = grads[i].take() else { continue };
            visited += 1;
            if !g.is_finite() {
                return Err(NumError::NonFinite {
                    node: i,
                    op: self.nodes[i].op.label(),
                    pass: "backward",
                });
            }
            let op = self.nodes[i].op.clone();
            match op {
                Op::Input { name, requires_grad } => {
                    if requires_grad {
                        result.insert(name, g);
                    }
                }
                Op::Constant(_) => {}
                Op::Affine { x, weight, bias } => {
                    let (xv, wv) = (self.val(x), self.val(weight));
                    if self.nodes[x.0].needs_grad {
                        let dx = gemm_into(&g, false, wv, false)?;
                        accumulate(&mut grads, x, dx)?;
                    }
                    if self.nodes[weight.0].needs_grad {
                        let dw = gemm_into(&g, true, xv, false)?.reshape(wv.shape())?;
                        accumulate(&mut grads, weight, dw)?;
                    }
                    if self.nodes[bias.0].needs_grad {
                        let db = column_sums(&g).reshape(self.val(bias).shape())?;
                        accumulate(&mut grads, bias, db)?;
                    }
                }
                Op::Sin(x) => {
                    let dx = g.zip_map(self.val(x), |gi, xi| gi * xi.cos())?;
                    accumulate(&mut grads, x, dx)?;
                }
                Op::Add(a, b) => {
                    if self.nodes[a.0].needs_grad {
                        accumulate(&mut grads, a, g.clone())?;
                    }
                    if self.nodes[b.0].needs_grad {
                        accumulate(&mut grads, b, g)?;
                    }
                }
                Op::Sub(a, b) => {
                    if self.nodes[a.0].needs_grad {
                        accumulate(&mut grads, a, g.clone())?;
                    }
                    if self.nodes[b.0].needs_grad {
                        accumulate(&mut grads, b, g.scale(-T::one()))?;
                    }
                }
                Op::Scale(x, alpha) => accumulate(&mut grads, x, g.scale(alpha))?,
                Op::Square(x) => {
                    let two = T::from_f64(2.0);
                    let dx = g.zip_map(self.val(x), |gi, xi| two * xi * gi)?;
                    accumulate(&mut grads, x, dx)?;
                }
                Op::Sqrt(x) => {
                    // zero subgradient at the kink
                    let two = T::from_f64(2.0);
                    let dx = g.zip_map(self.val(NodeId(i)), |gi, yi| {
                        if yi > T::zero() {
                            gi / (two * yi)
                        } else {
                            T::zero()
                        }
                    })?;
                    accumulate(&mut grads, x, dx)?;
                }
                Op::Div(a, b) => {
                    let bv = self.val(b);
                    if self.nodes[a.0].needs_grad {
                        accumulate(&mut grads, a, g.zip_map(bv, |gi, bi| gi / bi)?)?;
                    }
                    if self.nodes[b.0].needs_grad {
                        let y = self.val(NodeId(i));
                        let tmp = g.zip_map(y, |gi, yi| gi * yi)?;
                        accumulate(&mut grads, b, tmp.zip_map(bv, |p, bi| -p / bi)?)?;
                    }
                }
                Op::Concat(a, b) => {
                    let ca = self.val(a).cols();
                    let cb = self.val(b).cols();
                    let rows = g.rows();
                    let mut da = Vec::with_capacity(rows * ca);
                    let mut db = Vec::with_capacity(rows * cb);
                    for r in 0..rows {
                        let row = g.row(r);
                        da.extend_from_slice(&row[..ca]);
                        db.extend_from_slice(&row[ca..]);
                    }
                    if self.nodes[a.0].needs_grad {
                        let t = Tensor::new(self.val(a).shape().to_vec(), da)?;
                        accumulate(&mut grads, a, t)?;
                    }
                    if self.nodes[b.0].needs_grad {
                        let t = Tensor::new(self.val(b).shape().to_vec(), db)?;
                        accumulate(&mut grads, b, t)?;
                    }
                }
                Op::Slice { x, offset, .. } => {
                    let parent_shape = self.val(x).shape().to_vec();
                    match grads[x.0].as_mut() {
                        Some(acc) => {
                            let dst = &mut acc.data_mut()[offset..offset + g.len()];
                            for (d, &s) in dst.iter_mut().zip(g.data()) {
                                *d = *d + s;
                            }
                        }
                        None => {
                            let mut full = Tensor::zeros(&parent_shape);
                            full.data_mut()[offset..offset + g.len()].copy_from_slice(g.data());
                            grads[x.0] = Some(full);
                        }
                    }
                }
                Op::Reshape { x, .. } => {
                    let shape = self.val(x).shape().to_vec();
                    accumulate(&mut grads, x, g.reshape(&shape)?)?;
                }
                Op::SumRows(x) => {
                    let xv = self.val(x);
                    let mut data = Vec::with_capacity(xv.len());
                    for _ in 0..xv.rows() {
                        data.extend_from_slice(g.data());
                    }
                    accumulate(&mut grads, x, Tensor::new(xv.shape().to_vec(), data)?)?;
                }
                Op::Sum(x) => {
                    let shape = self.val(x).shape().to_vec();
                    accumulate(&mut grads, x, Tensor::filled(&shape, g.data()[0]))?;
                }
                Op::Mean(x) => {
                    let xv = self.val(x);
                    let v = g.data()[0] / T::from_f64(xv.len() as f64);
                    let shape = xv.shape().to_vec();
                    accumulate(&mut grads, x, Tensor::filled(&shape, v))?;
                }
                Op::Linear(x, map) => {
                    let dx = map.apply_transpose(&g)?;
                    let dx = dx.reshape(self.val(x).shape())?;
                    accumulate(&mut grads, x, dx)?;
                }
            }
        }

        for (name, g) in &result {
            if !g.is_finite() {
                return Err(NumError::NonFinite {
                    node: self
                        .nodes
                        .iter()
                        .position(|n| matches!(&n.op, Op::Input { name: other, .. } if other == name))
                        .unwrap_or(0),
                    op: "input",
                    pass: "backward",
                });
            }
        }
        // Parameters the output does not depend on get zero gradients.
        for (i, node) in self.nodes.iter().enumerate() {
            if let Op::Input {
                name,
                requires_grad: true,
            } = &node.op
            {
                if !result.contains_key(name) {
                    if let Some(Some(v)) = self.values.get(i) {
                        result.insert(name.clone(), Tensor::zeros(v.shape()));
                    }
                }
            }
        }
        Ok(Gradients {
            grads: result,
            visited,
        })
    }
}

fn accumulate<T: Real>(
    grads: &mut [Option<Tensor<T>>],
    id: NodeId,
    g: Tensor<T>,
) -> Result<(), NumError> {
    match grads[id.0].as_mut() {
        Some(acc) => acc.add_assign(&g),
        None => {
            grads[id.0] = Some(g);
            Ok(())
        }
    }
}

fn column_sums<T: Real>(g: &Tensor<T>) -> Tensor<T> {
    let c = g.cols();
    let mut acc = vec![T::zero(); c];
    for r in 0..g.rows() {
        for (a, &v) in acc.iter_mut().zip(g.row(r)) {
            *a = *a + v;
        }
    }
    Tensor::vector(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn m(rows: usize, cols: usize, data: &[f64]) -> Tensor<f64> {
        Tensor::matrix(rows, cols, data.to_vec()).unwrap()
    }

    #[test]
    fn identity_affine() {
        let mut g = Graph::new();
        let x = g.input("x");
        let w = g.param("w");
        let b = g.param("b");
        g.affine(x, w, b);
        let (xv, wv, bv) = (m(1, 2, &[1., 2.]), m(2, 2, &[1., 0., 0., 1.]), Tensor::vector(vec![0., 0.]));
        let inputs = HashMap::from([("x", &xv), ("w", &wv), ("b", &bv)]);
        assert_eq!(g.forward(&inputs).unwrap().data(), &[1., 2.]);
    }

    #[test]
    fn sine_values() {
        let mut g = Graph::new();
        let x = g.input("x");
        g.sin(x);
        let xv = m(1, 2, &[0., FRAC_PI_2]);
        let y = g.forward(&HashMap::from([("x", &xv)])).unwrap();
        assert_eq!(y.data()[0], 0.0);
        assert!((y.data()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn affine_then_sine() {
        let mut g = Graph::new();
        let x = g.input("x");
        let w = g.constant(m(1, 1, &[2.]));
        let b = g.constant(Tensor::vector(vec![1.]));
        let a = g.affine(x, w, b);
        g.sin(a);
        let xv = m(1, 1, &[0.]);
        let y = g.forward(&HashMap::from([("x", &xv)])).unwrap();
        assert!((y.data()[0] - 0.84147).abs() < 1e-5);
    }

    #[test]
    fn sine_derivative_at_zero() {
        let mut g = Graph::new();
        let x = g.param("x");
        g.sin(x);
        let xv = m(1, 1, &[0.]);
        g.forward(&HashMap::from([("x", &xv)])).unwrap();
        let grads = g.backward(&m(1, 1, &[1.])).unwrap();
        assert_eq!(grads["x"].data(), &[1.0]);
    }

    #[test]
    fn bilinear_gradients() {
        let mut g = Graph::new();
        let x = g.param("x");
        let w = g.param("w");
        let b = g.constant(Tensor::vector(vec![0.]));
        g.affine(x, w, b);
        let (xv, wv) = (m(1, 1, &[2.]), m(1, 1, &[3.]));
        g.forward(&HashMap::from([("x", &xv), ("w", &wv)])).unwrap();
        let grads = g.backward(&m(1, 1, &[1.])).unwrap();
        assert_eq!(grads["w"].data(), &[2.0]);
        assert_eq!(grads["x"].data(), &[3.0]);
    }

    #[test]
    fn backward_before_forward_is_error() {
        let mut g = Graph::<f64>::new();
        let x = g.param("x");
        g.sin(x);
        assert!(matches!(
            g.backward(&m(1, 1, &[1.])),
            Err(NumError::BackwardBeforeForward)
        ));
    }

    #[test]
    fn unbound_input_and_shape_errors() {
        let mut g = Graph::<f64>::new();
        let x = g.input("x");
        let y = g.input("y");
        g.add(x, y);
        let xv = m(1, 2, &[1., 2.]);
        assert!(matches!(
            g.forward(&HashMap::from([("x", &xv)])),
            Err(NumError::UnboundInput(_))
        ));
        let yv = m(1, 3, &[1., 2., 3.]);
        assert!(matches!(
            g.forward(&HashMap::from([("x", &xv), ("y", &yv)])),
            Err(NumError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn non_finite_forward_aborts() {
        let mut g = Graph::<f64>::new();
        let x = g.input("x");
        let y = g.input("y");
        g.div(x, y);
        let (xv, yv) = (m(1, 1, &[1.]), m(1, 1, &[0.]));
        let err = g.forward(&HashMap::from([("x", &xv), ("y", &yv)])).unwrap_err();
        assert!(matches!(err, NumError::NonFinite { op: "div", .. }));
    }

    #[test]
    fn each_node_visited_once() {
        // diamond: y = sin(x) + sin(x)^2
        let mut g = Graph::<f64>::new();
        let x = g.param("x");
        let s = g.sin(x);
        let sq = g.square(s);
        let y = g.add(s, sq);
        g.sum(y);
        let xv = m(1, 1, &[0.3]);
        g.forward(&HashMap::from([("x", &xv)])).unwrap();
        let grads = g.backward(&Tensor::scalar(1.0)).unwrap();
        assert_eq!(grads.visited(), g.len());
        let expected = 0.3f64.cos() * (1.0 + 2.0 * 0.3f64.sin());
        assert!((grads["x"].data()[0] - expected).abs() < 1e-14);
    }

    #[test]
    fn unused_param_gets_zero_gradient() {
        let mut g = Graph::<f64>::new();
        let x = g.param("x");
        let _unused = g.param("u");
        g.sum(x);
        let (xv, uv) = (m(1, 2, &[1., 2.]), m(1, 1, &[5.]));
        g.forward(&HashMap::from([("x", &xv), ("u", &uv)])).unwrap();
        let grads = g.backward(&Tensor::scalar(1.0)).unwrap();
        assert_eq!(grads["u"].data(), &[0.0]);
        assert_eq!(grads["x"].data(), &[1.0, 1.0]);
    }
}
