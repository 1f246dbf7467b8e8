//! The operation tape.
//!
//! Every operation validates shapes, computes its value eagerly, and
//! pushes a record. `backward` zeroes all gradient buffers, seeds the
//! loss with 1, and walks the records in exact reverse execution order
//! accumulating vector-Jacobian products. Re-running `backward` from
//! the same loss therefore yields identical gradients.

use crate::error::{DafError, Result};
use crate::tensor::Tensor;

/// Handle to a tensor registered on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var {
    pub(crate) index: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReduceKind {
    Sum,
    Mean,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Broadcast {
    Same,
    LeftScalar,
    RightScalar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum BinKind {
    Add,
    Sub,
    Mul,
}

#[derive(Debug)]
enum Op {
    Matmul {
        a: usize,
        b: usize,
        out: usize,
    },
    /// out = a · bᵀ, with b stored row-major as [n × k].
    MatmulTB {
        a: usize,
        b: usize,
        out: usize,
    },
    Binary {
        kind: BinKind,
        bc: Broadcast,
        a: usize,
        b: usize,
        out: usize,
    },
    Scale {
        a: usize,
        c: f64,
        out: usize,
    },
    Relu {
        a: usize,
        out: usize,
    },
    Tanh {
        a: usize,
        out: usize,
    },
    Sigmoid {
        a: usize,
        out: usize,
    },
    /// Row-wise softmax over the last axis. Masked positions are exactly 0
    /// in the output and receive zero gradient.
    Softmax {
        a: usize,
        mask: Option<Vec<bool>>,
        out: usize,
    },
    Concat {
        parts: Vec<usize>,
        axis: usize,
        out: usize,
    },
    Reduce {
        kind: ReduceKind,
        a: usize,
        axis: usize,
        out: usize,
    },
    Reshape {
        a: usize,
        out: usize,
    },
}

/// Record of executed operations, sufficient to run reverse accumulation.
pub struct Tape {
    values: Vec<Tensor>,
    requires_grad: Vec<bool>,
    grads: Vec<Vec<f64>>,
    ops: Vec<Op>,
    backward_run: bool,
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape {
            values: Vec::new(),
            requires_grad: Vec::new(),
            grads: Vec::new(),
            ops: Vec::new(),
            backward_run: false,
        }
    }

    /// Register a differentiable leaf.
    pub fn var(&mut self, t: Tensor) -> Var {
        self.push(t, true)
    }

    /// Register a non-differentiable input.
    pub fn constant(&mut self, t: Tensor) -> Var {
        self.push(t, false)
    }

    fn push(&mut self, t: Tensor, requires_grad: bool) -> Var {
        let index = self.values.len();
        self.grads.push(vec![0.0; t.len()]);
        self.values.push(t);
        self.requires_grad.push(requires_grad);
        Var { index }
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.values[v.index]
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.requires_grad[v.index]
    }

    /// Gradient of the last `backward` loss w.r.t. `v`. `None` until
    /// `backward` has run.
    pub fn grad(&self, v: Var) -> Option<Tensor> {
        if !self.backward_run {
            return None;
        }
        Some(
            Tensor::new(
                self.values[v.index].shape().to_vec(),
                self.grads[v.index].clone(),
            )
            .expect("grad buffer matches value shape"),
        )
    }

    pub fn num_nodes(&self) -> usize {
        self.values.len()
    }

    pub fn num_ops(&self) -> usize {
        self.ops.len()
    }

    // ── Operations ──────────────────────────────────────────────────

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (self.shape2(a, "matmul")?, self.shape2(b, "matmul")?);
        if sa.1 != sb.0 {
            return Err(self.shape_err("matmul", a, b));
        }
        let (m, k, n) = (sa.0, sa.1, sb.1);
        let mut out = vec![0.0; m * n];
        mm(
            self.values[a.index].data(),
            self.values[b.index].data(),
            &mut out,
            m,
            k,
            n,
        );
        let out = self.push(Tensor::new(vec![m, n], out)?, false);
        self.ops.push(Op::Matmul {
            a: a.index,
            b: b.index,
            out: out.index,
        });
        Ok(out)
    }

    /// a · bᵀ for `a: [m×k]`, `b: [n×k]`.
    pub fn matmul_tb(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (self.shape2(a, "matmul_tb")?, self.shape2(b, "matmul_tb")?);
        if sa.1 != sb.1 {
            return Err(self.shape_err("matmul_tb", a, b));
        }
        let (m, k, n) = (sa.0, sa.1, sb.0);
        let mut out = vec![0.0; m * n];
        mm_tb(
            self.values[a.index].data(),
            self.values[b.index].data(),
            &mut out,
            m,
            k,
            n,
        );
        let out = self.push(Tensor::new(vec![m, n], out)?, false);
        self.ops.push(Op::MatmulTB {
            a: a.index,
            b: b.index,
            out: out.index,
        });
        Ok(out)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(BinKind::Add, a, b)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(BinKind::Sub, a, b)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(BinKind::Mul, a, b)
    }

    fn binary(&mut self, kind: BinKind, a: Var, b: Var) -> Result<Var> {
        let (va, vb) = (&self.values[a.index], &self.values[b.index]);
        let bc = if va.shape() == vb.shape() {
            Broadcast::Same
        } else if vb.len() == 1 {
            Broadcast::RightScalar
        } else if va.len() == 1 {
            Broadcast::LeftScalar
        } else {
            return Err(self.shape_err("elementwise", a, b));
        };
        let (xs, ys) = (va.data(), vb.data());
        let f = |x: f64, y: f64| match kind {
            BinKind::Add => x + y,
            BinKind::Sub => x - y,
            BinKind::Mul => x * y,
        };
        let (shape, data) = match bc {
            Broadcast::Same => (
                va.shape().to_vec(),
                xs.iter().zip(ys).map(|(&x, &y)| f(x, y)).collect(),
            ),
            Broadcast::RightScalar => (
                va.shape().to_vec(),
                xs.iter().map(|&x| f(x, ys[0])).collect(),
            ),
            Broadcast::LeftScalar => (
                vb.shape().to_vec(),
                ys.iter().map(|&y| f(xs[0], y)).collect(),
            ),
        };
        let out = self.push(Tensor::new(shape, data)?, false);
        self.ops.push(Op::Binary {
            kind,
            bc,
            a: a.index,
            b: b.index,
            out: out.index,
        });
        Ok(out)
    }

    /// Multiply by a compile-time-known scalar constant.
    pub fn scale(&mut self, a: Var, c: f64) -> Result<Var> {
        let va = &self.values[a.index];
        let data = va.data().iter().map(|&x| c * x).collect();
        let out = self.push(Tensor::new(va.shape().to_vec(), data)?, false);
        self.ops.push(Op::Scale {
            a: a.index,
            c,
            out: out.index,
        });
        Ok(out)
    }

    pub fn relu(&mut self, a: Var) -> Result<Var> {
        let va = &self.values[a.index];
        let data = va.data().iter().map(|&x| x.max(0.0)).collect();
        let out = self.push(Tensor::new(va.shape().to_vec(), data)?, false);
        self.ops.push(Op::Relu {
            a: a.index,
            out: out.index,
        });
        Ok(out)
    }

    pub fn tanh(&mut self, a: Var) -> Result<Var> {
        let va = &self.values[a.index];
        let data = va.data().iter().map(|&x| x.tanh()).collect();
        let out = self.push(Tensor::new(va.shape().to_vec(), data)?, false);
        self.ops.push(Op::Tanh {
            a: a.index,
            out: out.index,
        });
        Ok(out)
    }

    pub fn sigmoid(&mut self, a: Var) -> Result<Var> {
        let va = &self.values[a.index];
        let data = va.data().iter().map(|&x| stable_sigmoid(x)).collect();
        let out = self.push(Tensor::new(va.shape().to_vec(), data)?, false);
        self.ops.push(Op::Sigmoid {
            a: a.index,
            out: out.index,
        });
        Ok(out)
    }

    /// Softmax over the last axis, one distribution per row.
    ///
    /// Masked positions (mask `false`) get exactly 0; the remaining
    /// entries are renormalized after max-subtracted exponentiation, so
    /// each row of survivors sums to 1. A fully masked row is an error.
    pub fn softmax(&mut self, a: Var, mask: Option<&[bool]>) -> Result<Var> {
        let va = &self.values[a.index];
        if va.rank() == 0 || va.is_empty() {
            return Err(DafError::InvalidArgument {
                op: "softmax",
                detail: format!("needs rank >= 1 and a nonempty last axis, got {:?}", va.shape()),
            });
        }
        if let Some(m) = mask {
            if m.len() != va.len() {
                return Err(DafError::InvalidArgument {
                    op: "softmax",
                    detail: format!("mask length {} vs tensor length {}", m.len(), va.len()),
                });
            }
        }
        let cols = *va.shape().last().unwrap();
        let rows = va.len() / cols;
        let xs = va.data();
        let mut data = vec![0.0; va.len()];
        for r in 0..rows {
            let base = r * cols;
            let keep = |j: usize| mask.map_or(true, |m| m[base + j]);
            let mut max = f64::NEG_INFINITY;
            for j in 0..cols {
                if keep(j) {
                    max = max.max(xs[base + j]);
                }
            }
            if max == f64::NEG_INFINITY {
                return Err(DafError::AllMasked { row: r });
            }
            let mut sum = 0.0;
            for j in 0..cols {
                if keep(j) {
                    let e = (xs[base + j] - max).exp();
                    data[base + j] = e;
                    sum += e;
                }
            }
            for j in 0..cols {
                if keep(j) {
                    data[base + j] /= sum;
                }
            }
        }
        let out = self.push(Tensor::new(va.shape().to_vec(), data)?, false);
        self.ops.push(Op::Softmax {
            a: a.index,
            mask: mask.map(|m| m.to_vec()),
            out: out.index,
        });
        Ok(out)
    }

    pub fn concat(&mut self, parts: &[Var], axis: usize) -> Result<Var> {
        if parts.is_empty() {
            return Err(DafError::EmptyInput("concat"));
        }
        let first = self.values[parts[0].index].shape().to_vec();
        if axis >= first.len() {
            return Err(DafError::InvalidArgument {
                op: "concat",
                detail: format!("axis {} out of range for rank {}", axis, first.len()),
            });
        }
        let mut axis_total = 0;
        for p in parts {
            let s = self.values[p.index].shape();
            let compatible = s.len() == first.len()
                && s.iter()
                    .zip(first.iter())
                    .enumerate()
                    .all(|(i, (x, y))| i == axis || x == y);
            if !compatible {
                return Err(DafError::ShapeMismatch {
                    op: "concat",
                    lhs: first.clone(),
                    rhs: s.to_vec(),
                });
            }
            axis_total += s[axis];
        }
        let mut out_shape = first.clone();
        out_shape[axis] = axis_total;
        let outer: usize = first[..axis].iter().product();
        let inner: usize = first[axis + 1..].iter().product();
        let mut data = vec![0.0; out_shape.iter().product()];
        let row = axis_total * inner;
        let mut off = 0;
        for p in parts {
            let v = &self.values[p.index];
            let pa = v.shape()[axis];
            let block = pa * inner;
            for o in 0..outer {
                let dst = o * row + off;
                let src = o * block;
                data[dst..dst + block].copy_from_slice(&v.data()[src..src + block]);
            }
            off += block;
        }
        let out = self.push(Tensor::new(out_shape, data)?, false);
        self.ops.push(Op::Concat {
            parts: parts.iter().map(|p| p.index).collect(),
            axis,
            out: out.index,
        });
        Ok(out)
    }

    pub fn reduce_sum(&mut self, a: Var, axis: usize) -> Result<Var> {
        self.reduce(ReduceKind::Sum, a, axis)
    }

    pub fn reduce_mean(&mut self, a: Var, axis: usize) -> Result<Var> {
        self.reduce(ReduceKind::Mean, a, axis)
    }

    fn reduce(&mut self, kind: ReduceKind, a: Var, axis: usize) -> Result<Var> {
        let va = &self.values[a.index];
        if axis >= va.rank() {
            return Err(DafError::InvalidArgument {
                op: "reduce",
                detail: format!("axis {} out of range for shape {:?}", axis, va.shape()),
            });
        }
        let extent = va.shape()[axis];
        if extent == 0 {
            return Err(DafError::EmptyInput("reduce"));
        }
        let outer: usize = va.shape()[..axis].iter().product();
        let inner: usize = va.shape()[axis + 1..].iter().product();
        let mut out_shape = va.shape().to_vec();
        out_shape.remove(axis);
        let mut data = vec![0.0; outer * inner];
        let xs = va.data();
        for o in 0..outer {
            for e in 0..extent {
                let src = (o * extent + e) * inner;
                let dst = o * inner;
                for i in 0..inner {
                    data[dst + i] += xs[src + i];
                }
            }
        }
        if kind == ReduceKind::Mean {
            let inv = 1.0 / extent as f64;
            for v in &mut data {
                *v *= inv;
            }
        }
        let out = self.push(Tensor::new(out_shape, data)?, false);
        self.ops.push(Op::Reduce {
            kind,
            a: a.index,
            axis,
            out: out.index,
        });
        Ok(out)
    }

    pub fn reshape(&mut self, a: Var, shape: Vec<usize>) -> Result<Var> {
        let va = &self.values[a.index];
        let reshaped = va.clone().reshape(shape)?;
        let out = self.push(reshaped, false);
        self.ops.push(Op::Reshape {
            a: a.index,
            out: out.index,
        });
        Ok(out)
    }

    // ── Backward ────────────────────────────────────────────────────

    /// Reverse accumulation from a scalar loss. Populates the gradient
    /// of every node reachable from `loss`; unreachable nodes hold zero.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        if self.values[loss.index].len() != 1 {
            return Err(DafError::InvalidArgument {
                op: "backward",
                detail: format!(
                    "loss must be scalar, got shape {:?}",
                    self.values[loss.index].shape()
                ),
            });
        }
        for g in &mut self.grads {
            g.iter_mut().for_each(|v| *v = 0.0);
        }
        self.grads[loss.index][0] = 1.0;

        // Detach the op list so grads and values can be borrowed freely.
        let ops = std::mem::take(&mut self.ops);
        for op in ops.iter().rev() {
            match op {
                Op::Matmul { a, b, out } => {
                    let (m, k) = dims2(self.values[*a].shape());
                    let n = self.values[*b].shape()[1];
                    let g = std::mem::take(&mut self.grads[*out]);
                    {
                        let mut da = vec![0.0; m * k];
                        mm_tb(&g, self.values[*b].data(), &mut da, m, n, k);
                        accumulate(&mut self.grads[*a], &da);
                        let mut db = vec![0.0; k * n];
                        mm_ta(self.values[*a].data(), &g, &mut db, m, k, n);
                        accumulate(&mut self.grads[*b], &db);
                    }
                    self.grads[*out] = g;
                }
                Op::MatmulTB { a, b, out } => {
                    let (m, k) = dims2(self.values[*a].shape());
                    let n = self.values[*b].shape()[0];
                    let g = std::mem::take(&mut self.grads[*out]);
                    {
                        // out = A·Bᵀ: dA = g·B, dB = gᵀ·A
                        let mut da = vec![0.0; m * k];
                        mm(&g, self.values[*b].data(), &mut da, m, n, k);
                        accumulate(&mut self.grads[*a], &da);
                        let mut db = vec![0.0; n * k];
                        mm_ta(&g, self.values[*a].data(), &mut db, m, n, k);
                        accumulate(&mut self.grads[*b], &db);
                    }
                    self.grads[*out] = g;
                }
                Op::Binary { kind, bc, a, b, out } => {
                    let g = std::mem::take(&mut self.grads[*out]);
                    match kind {
                        BinKind::Add => {
                            self.acc_bc(*a, &g, *bc != Broadcast::LeftScalar, 1.0);
                            self.acc_bc(*b, &g, *bc != Broadcast::RightScalar, 1.0);
                        }
                        BinKind::Sub => {
                            self.acc_bc(*a, &g, *bc != Broadcast::LeftScalar, 1.0);
                            self.acc_bc(*b, &g, *bc != Broadcast::RightScalar, -1.0);
                        }
                        BinKind::Mul => {
                            let (av, bv) = (*a, *b);
                            match bc {
                                Broadcast::Same => {
                                    let prod_b: Vec<f64> = g
                                        .iter()
                                        .zip(self.values[bv].data())
                                        .map(|(&gi, &bi)| gi * bi)
                                        .collect();
                                    accumulate(&mut self.grads[av], &prod_b);
                                    let prod_a: Vec<f64> = g
                                        .iter()
                                        .zip(self.values[av].data())
                                        .map(|(&gi, &ai)| gi * ai)
                                        .collect();
                                    accumulate(&mut self.grads[bv], &prod_a);
                                }
                                Broadcast::RightScalar => {
                                    let s = self.values[bv].data()[0];
                                    let scaled: Vec<f64> = g.iter().map(|&gi| gi * s).collect();
                                    accumulate(&mut self.grads[av], &scaled);
                                    let dot: f64 = g
                                        .iter()
                                        .zip(self.values[av].data())
                                        .map(|(&gi, &ai)| gi * ai)
                                        .sum();
                                    self.grads[bv][0] += dot;
                                }
                                Broadcast::LeftScalar => {
                                    let s = self.values[av].data()[0];
                                    let scaled: Vec<f64> = g.iter().map(|&gi| gi * s).collect();
                                    accumulate(&mut self.grads[bv], &scaled);
                                    let dot: f64 = g
                                        .iter()
                                        .zip(self.values[bv].data())
                                        .map(|(&gi, &bi)| gi * bi)
                                        .sum();
                                    self.grads[av][0] += dot;
                                }
                            }
                        }
                    }
                    self.grads[*out] = g;
                }
                Op::Scale { a, c, out } => {
                    let (a, c) = (*a, *c);
                    let g = std::mem::take(&mut self.grads[*out]);
                    let scaled: Vec<f64> = g.iter().map(|&gi| gi * c).collect();
                    accumulate(&mut self.grads[a], &scaled);
                    self.grads[*out] = g;
                }
                Op::Relu { a, out } => {
                    let a = *a;
                    let g = std::mem::take(&mut self.grads[*out]);
                    // Subgradient 0 at the kink.
                    let dx: Vec<f64> = g
                        .iter()
                        .zip(self.values[a].data())
                        .map(|(&gi, &xi)| if xi > 0.0 { gi } else { 0.0 })
                        .collect();
                    accumulate(&mut self.grads[a], &dx);
                    self.grads[*out] = g;
                }
                Op::Tanh { a, out } => {
                    let (a, o) = (*a, *out);
                    let g = std::mem::take(&mut self.grads[o]);
                    let dx: Vec<f64> = g
                        .iter()
                        .zip(self.values[o].data())
                        .map(|(&gi, &yi)| gi * (1.0 - yi * yi))
                        .collect();
                    accumulate(&mut self.grads[a], &dx);
                    self.grads[o] = g;
                }
                Op::Sigmoid { a, out } => {
                    let (a, o) = (*a, *out);
                    let g = std::mem::take(&mut self.grads[o]);
                    let dx: Vec<f64> = g
                        .iter()
                        .zip(self.values[o].data())
                        .map(|(&gi, &yi)| gi * yi * (1.0 - yi))
                        .collect();
                    accumulate(&mut self.grads[a], &dx);
                    self.grads[o] = g;
                }
                Op::Softmax { a, mask, out } => {
                    let (a, o) = (*a, *out);
                    let ys = self.values[o].data();
                    let cols = *self.values[o].shape().last().unwrap();
                    let rows = ys.len() / cols;
                    let g = std::mem::take(&mut self.grads[o]);
                    let mut dx = vec![0.0; ys.len()];
                    for r in 0..rows {
                        let base = r * cols;
                        let keep =
                            |j: usize| mask.as_ref().map_or(true, |m| m[base + j]);
                        let mut dot = 0.0;
                        for j in 0..cols {
                            if keep(j) {
                                dot += g[base + j] * ys[base + j];
                            }
                        }
                        for j in 0..cols {
                            if keep(j) {
                                dx[base + j] = ys[base + j] * (g[base + j] - dot);
                            }
                        }
                    }
                    accumulate(&mut self.grads[a], &dx);
                    self.grads[o] = g;
                }
                Op::Concat { parts, axis, out } => {
                    let parts = parts.clone();
                    let axis = *axis;
                    let out_shape = self.values[*out].shape().to_vec();
                    let outer: usize = out_shape[..axis].iter().product();
                    let inner: usize = out_shape[axis + 1..].iter().product();
                    let row = out_shape[axis] * inner;
                    let g = std::mem::take(&mut self.grads[*out]);
                    let mut off = 0;
                    for p in parts {
                        let pa = self.values[p].shape()[axis];
                        let block = pa * inner;
                        let mut dp = vec![0.0; self.values[p].len()];
                        for o in 0..outer {
                            let src = o * row + off;
                            dp[o * block..(o + 1) * block]
                                .copy_from_slice(&g[src..src + block]);
                        }
                        accumulate(&mut self.grads[p], &dp);
                        off += block;
                    }
                    self.grads[*out] = g;
                }
                Op::Reduce { kind, a, axis, out } => {
                    let (a, axis) = (*a, *axis);
                    let in_shape = self.values[a].shape().to_vec();
                    let extent = in_shape[axis];
                    let outer: usize = in_shape[..axis].iter().product();
                    let inner: usize = in_shape[axis + 1..].iter().product();
                    let w = match kind {
                        ReduceKind::Sum => 1.0,
                        ReduceKind::Mean => 1.0 / extent as f64,
                    };
                    let g = std::mem::take(&mut self.grads[*out]);
                    let mut dx = vec![0.0; self.values[a].len()];
                    for o in 0..outer {
                        for e in 0..extent {
                            let dst = (o * extent + e) * inner;
                            let src = o * inner;
                            for i in 0..inner {
                                dx[dst + i] = g[src + i] * w;
                            }
                        }
                    }
                    accumulate(&mut self.grads[a], &dx);
                    self.grads[*out] = g;
                }
                Op::Reshape { a, out } => {
                    let a = *a;
                    let g = std::mem::take(&mut self.grads[*out]);
                    accumulate(&mut self.grads[a], &g);
                    self.grads[*out] = g;
                }
            }
        }
        self.ops = ops;
        self.backward_run = true;
        Ok(())
    }

    fn acc_bc(&mut self, node: usize, g: &[f64], full: bool, sign: f64) {
        if full {
            if sign == 1.0 {
                accumulate(&mut self.grads[node], g);
            } else {
                let neg: Vec<f64> = g.iter().map(|&x| -x).collect();
                accumulate(&mut self.grads[node], &neg);
            }
        } else {
            self.grads[node][0] += sign * g.iter().sum::<f64>();
        }
    }

    fn shape2(&self, v: Var, op: &'static str) -> Result<(usize, usize)> {
        let s = self.values[v.index].shape();
        if s.len() != 2 {
            return Err(DafError::InvalidArgument {
                op: "matmul",
                detail: format!("{op} needs rank-2 operands, got {s:?}"),
            });
        }
        Ok((s[0], s[1]))
    }

    fn shape_err(&self, op: &'static str, a: Var, b: Var) -> DafError {
        DafError::ShapeMismatch {
            op,
            lhs: self.values[a.index].shape().to_vec(),
            rhs: self.values[b.index].shape().to_vec(),
        }
    }
}

fn dims2(s: &[usize]) -> (usize, usize) {
    (s[0], s[1])
}

fn accumulate(dst: &mut [f64], src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

fn stable_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// out[m×n] = a[m×k] · b[k×n]
fn mm(a: &[f64], b: &[f64], out: &mut [f64], m: usize, k: usize, n: usize) {
    for i in 0..m {
        for p in 0..k {
            let aip = a[i * k + p];
            if aip == 0.0 {
                continue;
            }
            let brow = &b[p * n..(p + 1) * n];
            let orow = &mut out[i * n..(i + 1) * n];
            for j in 0..n {
                orow[j] += aip * brow[j];
            }
        }
    }
}

/// out[m×n] = a[m×k] · b[n×k]ᵀ
fn mm_tb(a: &[f64], b: &[f64], out: &mut [f64], m: usize, k: usize, n: usize) {
    for i in 0..m {
        let arow = &a[i * k..(i + 1) * k];
        for j in 0..n {
            let brow = &b[j * k..(j + 1) * k];
            let mut acc = 0.0;
            for p in 0..k {
                acc += arow[p] * brow[p];
            }
            out[i * n + j] += acc;
        }
    }
}

/// out[k×n] = a[m×k]ᵀ · b[m×n]
fn mm_ta(a: &[f64], b: &[f64], out: &mut [f64], m: usize, k: usize, n: usize) {
    for p in 0..m {
        let arow = &a[p * k..(p + 1) * k];
        let brow = &b[p * n..(p + 1) * n];
        for i in 0..k {
            let api = arow[i];
            if api == 0.0 {
                continue;
            }
            let orow = &mut out[i * n..(i + 1) * n];
            for j in 0..n {
                orow[j] += api * brow[j];
            }
        }
    }
}
