//! Reverse-mode differentiation over dense `f64` matrices.
//!
//! Every operation evaluates eagerly and records itself on the [`Tape`], so
//! intermediate values can be inspected mid-forward (the trainer reads them to
//! make discrete sampling decisions). [`Tape::backward`] walks the record in
//! reverse and accumulates gradients; parameter leaves can then be flushed into
//! their [`ParamSet`] with [`Gradients::accumulate_into`].
//!
//! Scalars are `1 × 1` matrices.

use std::sync::Arc;

use ndarray::{s, Array2, Axis};

use super::params::{ParamId, ParamSet};
use super::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

/// A cross-entropy target: `(row, class, weight)`.
pub type XentTarget = (usize, usize, f64);

/// An `(anchor, positive, negative)` row triple.
pub type RowTriple = (usize, usize, usize);

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    SpMM(Arc<SparseMatrix>, Var),
    AddRowBias(Var, Var),
    Add(Var, Var),
    Scale(Var, f64),
    Relu(Var),
    Sigmoid(Var),
    ConcatCols(Var, Var),
    ConcatRows(Var, Var),
    Interpolate {
        src: Var,
        parents: Vec<usize>,
        partners: Vec<usize>,
        r: Vec<f64>,
    },
    PairScores {
        left: Var,
        right: Var,
        pairs: Vec<(usize, usize)>,
    },
    FrobeniusDistance {
        x: Var,
        target: Array2<f64>,
    },
    SoftmaxCrossEntropy {
        logits: Var,
        targets: Vec<XentTarget>,
    },
    CosineTriplet {
        h: Var,
        triples: Vec<RowTriple>,
        margin: f64,
    },
}

#[derive(Debug)]
struct Node {
    value: Array2<f64>,
    op: Op,
    needs_grad: bool,
    param: Option<ParamId>,
}

#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Norms below this are treated as zero by the cosine operations.
pub(crate) const NORM_FLOOR: f64 = 1e-12;

fn scalar(x: f64) -> Array2<f64> {
    Array2::from_elem((1, 1), x)
}

fn dot(a: ndarray::ArrayView1<f64>, b: ndarray::ArrayView1<f64>) -> f64 {
    a.dot(&b)
}

/// Distance and its gradients w.r.t. both inputs, or `None` for a degenerate pair.
pub(crate) fn cosine_distance_with_grad(
    a: ndarray::ArrayView1<f64>,
    b: ndarray::ArrayView1<f64>,
) -> Option<(f64, ndarray::Array1<f64>, ndarray::Array1<f64>)> {
    let na = dot(a, a).sqrt();
    let nb = dot(b, b).sqrt();
    if na <= NORM_FLOOR || nb <= NORM_FLOOR {
        return None;
    }
    let ab = dot(a, b);
    let cos = ab / (na * nb);
    // d = 1 - cos;  dcos/da = b/(|a||b|) - cos a/|a|^2
    let ga = (&a * (cos / (na * na)) - &b / (na * nb)).to_owned();
    let gb = (&b * (cos / (nb * nb)) - &a / (na * nb)).to_owned();
    Some((1.0 - cos, ga, gb))
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Array2<f64>, op: Op, needs_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            needs_grad,
            param: None,
        });
        Var(self.nodes.len() - 1)
    }

    fn needs(&self, v: Var) -> bool {
        self.nodes[v.0].needs_grad
    }

    pub fn value(&self, v: Var) -> &Array2<f64> {
        &self.nodes[v.0].value
    }

    pub fn scalar(&self, v: Var) -> f64 {
        let x = self.value(v);
        debug_assert_eq!(x.dim(), (1, 1));
        x[[0, 0]]
    }

    /// A value that receives no gradient.
    pub fn constant(&mut self, value: Array2<f64>) -> Var {
        self.push(value, Op::Leaf, false)
    }

    /// A leaf bound to a parameter; its gradient flows back to the set.
    pub fn param(&mut self, params: &ParamSet, id: ParamId) -> Var {
        let v = self.push(params.get(id).value.clone(), Op::Leaf, true);
        self.nodes[v.0].param = Some(id);
        v
    }

    /// A constant copy of `v`: gradient stops here.
    pub fn detach(&mut self, v: Var) -> Var {
        let value = self.value(v).clone();
        self.constant(value)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let value = self.value(a).dot(self.value(b));
        let ng = self.needs(a) || self.needs(b);
        self.push(value, Op::MatMul(a, b), ng)
    }

    pub fn spmm(&mut self, m: Arc<SparseMatrix>, x: Var) -> Var {
        let value = m.matmul(self.value(x));
        let ng = self.needs(x);
        self.push(value, Op::SpMM(m, x), ng)
    }

    /// `a + b` with `b` a `1 × cols` row broadcast over rows of `a`.
    pub fn add_row_bias(&mut self, a: Var, b: Var) -> Var {
        let value = self.value(a) + self.value(b);
        let ng = self.needs(a) || self.needs(b);
        self.push(value, Op::AddRowBias(a, b), ng)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        assert_eq!(
            self.value(a).dim(),
            self.value(b).dim(),
            "add shape mismatch"
        );
        let value = self.value(a) + self.value(b);
        let ng = self.needs(a) || self.needs(b);
        self.push(value, Op::Add(a, b), ng)
    }

    pub fn scale(&mut self, a: Var, k: f64) -> Var {
        let value = self.value(a) * k;
        let ng = self.needs(a);
        self.push(value, Op::Scale(a, k), ng)
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let value = self.value(a).mapv(|x| x.max(0.0));
        let ng = self.needs(a);
        self.push(value, Op::Relu(a), ng)
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let value = self.value(a).mapv(logistic);
        let ng = self.needs(a);
        self.push(value, Op::Sigmoid(a), ng)
    }

    pub fn concat_cols(&mut self, a: Var, b: Var) -> Var {
        let value = ndarray::concatenate(Axis(1), &[self.value(a).view(), self.value(b).view()])
            .expect("concat_cols row mismatch");
        let ng = self.needs(a) || self.needs(b);
        self.push(value, Op::ConcatCols(a, b), ng)
    }

    pub fn concat_rows(&mut self, a: Var, b: Var) -> Var {
        let value = ndarray::concatenate(Axis(0), &[self.value(a).view(), self.value(b).view()])
            .expect("concat_rows column mismatch");
        let ng = self.needs(a) || self.needs(b);
        self.push(value, Op::ConcatRows(a, b), ng)
    }

    /// Row `k` of the output is `src[p_k] + r_k (src[q_k] - src[p_k])`.
    pub fn interpolate(
        &mut self,
        src: Var,
        parents: Vec<usize>,
        partners: Vec<usize>,
        r: Vec<f64>,
    ) -> Var {
        assert!(parents.len() == partners.len() && parents.len() == r.len());
        let x = self.value(src);
        let mut value = Array2::zeros((parents.len(), x.ncols()));
        for (k, ((&p, &q), &rk)) in parents.iter().zip(&partners).zip(&r).enumerate() {
            let hp = x.row(p);
            let hq = x.row(q);
            value
                .row_mut(k)
                .iter_mut()
                .zip(hp.iter().zip(hq.iter()))
                .for_each(|(o, (&a, &b))| *o = a + rk * (b - a));
        }
        let ng = self.needs(src);
        self.push(
            value,
            Op::Interpolate {
                src,
                parents,
                partners,
                r,
            },
            ng,
        )
    }

    /// Column vector of `l_i · (l_i − r_j)` for each pair `(i, j)`.
    pub fn pair_scores(&mut self, left: Var, right: Var, pairs: Vec<(usize, usize)>) -> Var {
        let l = self.value(left);
        let r = self.value(right);
        let mut value = Array2::zeros((pairs.len(), 1));
        for (k, &(i, j)) in pairs.iter().enumerate() {
            let li = l.row(i);
            value[[k, 0]] = dot(li, li) - dot(li, r.row(j));
        }
        let ng = self.needs(left) || self.needs(right);
        self.push(value, Op::PairScores { left, right, pairs }, ng)
    }

    /// `‖x − target‖_F` as a scalar.
    pub fn frobenius_distance(&mut self, x: Var, target: Array2<f64>) -> Var {
        assert_eq!(
            self.value(x).dim(),
            target.dim(),
            "frobenius shape mismatch"
        );
        let d = (self.value(x) - &target).mapv(|e| e * e).sum().sqrt();
        let ng = self.needs(x);
        self.push(scalar(d), Op::FrobeniusDistance { x, target }, ng)
    }

    /// `Σ w · (−log softmax(logits[row])[class])` over the targets.
    pub fn softmax_cross_entropy(&mut self, logits: Var, targets: Vec<XentTarget>) -> Var {
        let z = self.value(logits);
        let mut total = 0.0;
        for &(row, class, w) in &targets {
            let zr = z.row(row);
            let max = zr.fold(f64::NEG_INFINITY, |m, &x| m.max(x));
            let lse = max + zr.iter().map(|&x| (x - max).exp()).sum::<f64>().ln();
            total += w * (lse - zr[class]);
        }
        let ng = self.needs(logits);
        self.push(
            scalar(total),
            Op::SoftmaxCrossEntropy { logits, targets },
            ng,
        )
    }

    /// Mean over triples of `max(0, margin + d(a, p) − d(a, n))` with cosine
    /// distance `d`. Triples touching a zero-norm row contribute nothing.
    pub fn cosine_triplet(&mut self, h: Var, triples: Vec<RowTriple>, margin: f64) -> Var {
        let x = self.value(h);
        let mut total = 0.0;
        for &(a, p, n) in &triples {
            if let (Some((dp, _, _)), Some((dn, _, _))) = (
                cosine_distance_with_grad(x.row(a), x.row(p)),
                cosine_distance_with_grad(x.row(a), x.row(n)),
            ) {
                total += (margin + dp - dn).max(0.0);
            }
        }
        let value = if triples.is_empty() {
            0.0
        } else {
            total / triples.len() as f64
        };
        let ng = self.needs(h);
        self.push(scalar(value), Op::CosineTriplet { h, triples, margin }, ng)
    }

    /// Gradients of scalar `loss` with respect to every recorded value.
    pub fn backward(&self, loss: Var) -> Gradients {
        assert_eq!(self.value(loss).dim(), (1, 1), "backward needs a scalar");
        let mut grads: Vec<Option<Array2<f64>>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(scalar(1.0));

        for idx in (0..=loss.0).rev() {
            let node = &self.nodes[idx];
            if !node.needs_grad {
                continue;
            }
            let Some(g) = grads[idx].take() else { continue };
            if matches!(node.op, Op::Leaf) {
                grads[idx] = Some(g);
                continue;
            }
            let mut send = |v: Var, contrib: Array2<f64>| {
                if !self.nodes[v.0].needs_grad {
                    return;
                }
                match &mut grads[v.0] {
                    Some(acc) => *acc += &contrib,
                    slot @ None => *slot = Some(contrib),
                }
            };
            match &node.op {
                Op::Leaf => unreachable!(),
                Op::MatMul(a, b) => {
                    if self.needs(*a) {
                        send(*a, g.dot(&self.value(*b).t()));
                    }
                    if self.needs(*b) {
                        send(*b, self.value(*a).t().dot(&g));
                    }
                }
                Op::SpMM(m, x) => send(*x, m.transpose_matmul(&g)),
                Op::AddRowBias(a, b) => {
                    if self.needs(*b) {
                        send(*b, g.sum_axis(Axis(0)).insert_axis(Axis(0)));
                    }
                    send(*a, g);
                }
                Op::Add(a, b) => {
                    if self.needs(*b) {
                        send(*b, g.clone());
                    }
                    send(*a, g);
                }
                Op::Scale(a, k) => send(*a, g * *k),
                Op::Relu(a) => {
                    let mut d = g;
                    d.zip_mut_with(self.value(*a), |gi, &x| {
                        if x <= 0.0 {
                            *gi = 0.0;
                        }
                    });
                    send(*a, d);
                }
                Op::Sigmoid(a) => {
                    let mut d = g;
                    d.zip_mut_with(&node.value, |gi, &y| *gi *= y * (1.0 - y));
                    send(*a, d);
                }
                Op::ConcatCols(a, b) => {
                    let split = self.value(*a).ncols();
                    if self.needs(*b) {
                        send(*b, g.slice(s![.., split..]).to_owned());
                    }
                    send(*a, g.slice(s![.., ..split]).to_owned());
                }
                Op::ConcatRows(a, b) => {
                    let split = self.value(*a).nrows();
                    if self.needs(*b) {
                        send(*b, g.slice(s![split.., ..]).to_owned());
                    }
                    send(*a, g.slice(s![..split, ..]).to_owned());
                }
                Op::Interpolate {
                    src,
                    parents,
                    partners,
                    r,
                } => {
                    let mut d = Array2::zeros(self.value(*src).raw_dim());
                    for (k, ((&p, &q), &rk)) in parents.iter().zip(partners).zip(r).enumerate() {
                        d.row_mut(p).scaled_add(1.0 - rk, &g.row(k));
                        d.row_mut(q).scaled_add(rk, &g.row(k));
                    }
                    send(*src, d);
                }
                Op::PairScores { left, right, pairs } => {
                    let l = self.value(*left);
                    let r = self.value(*right);
                    let mut dl = Array2::zeros(l.raw_dim());
                    let mut dr = Array2::zeros(r.raw_dim());
                    for (k, &(i, j)) in pairs.iter().enumerate() {
                        let gk = g[[k, 0]];
                        if gk == 0.0 {
                            continue;
                        }
                        let li = l.row(i);
                        let rj = r.row(j);
                        // d/dl_i = 2 l_i − r_j ; d/dr_j = −l_i
                        dl.row_mut(i).scaled_add(2.0 * gk, &li);
                        dl.row_mut(i).scaled_add(-gk, &rj);
                        dr.row_mut(j).scaled_add(-gk, &li);
                    }
                    if self.needs(*right) {
                        send(*right, dr);
                    }
                    send(*left, dl);
                }
                Op::FrobeniusDistance { x, target } => {
                    let f = node.value[[0, 0]];
                    let gs = g[[0, 0]];
                    let d = if f > 0.0 {
                        (self.value(*x) - target) * (gs / f)
                    } else {
                        Array2::zeros(target.raw_dim())
                    };
                    send(*x, d);
                }
                Op::SoftmaxCrossEntropy { logits, targets } => {
                    let z = self.value(*logits);
                    let gs = g[[0, 0]];
                    let mut d = Array2::zeros(z.raw_dim());
                    for &(row, class, w) in targets {
                        let zr = z.row(row);
                        let max = zr.fold(f64::NEG_INFINITY, |m, &x| m.max(x));
                        let exps: Vec<f64> = zr.iter().map(|&x| (x - max).exp()).collect();
                        let sum: f64 = exps.iter().sum();
                        let mut dr = d.row_mut(row);
                        for (c, e) in exps.iter().enumerate() {
                            dr[c] += gs * w * (e / sum);
                        }
                        dr[class] -= gs * w;
                    }
                    send(*logits, d);
                }
                Op::CosineTriplet { h, triples, margin } => {
                    let x = self.value(*h);
                    let mut d = Array2::zeros(x.raw_dim());
                    let k = g[[0, 0]] / triples.len().max(1) as f64;
                    for &(a, p, n) in triples {
                        let (Some((dp, gap, gp)), Some((dn, gan, gn))) = (
                            cosine_distance_with_grad(x.row(a), x.row(p)),
                            cosine_distance_with_grad(x.row(a), x.row(n)),
                        ) else {
                            continue;
                        };
                        if margin + dp - dn <= 0.0 {
                            continue;
                        }
                        d.row_mut(a).scaled_add(k, &gap);
                        d.row_mut(a).scaled_add(-k, &gan);
                        d.row_mut(p).scaled_add(k, &gp);
                        d.row_mut(n).scaled_add(-k, &gn);
                    }
                    send(*h, d);
                }
            }
        }
        Gradients { grads }
    }
}

pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Result of [`Tape::backward`].
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Array2<f64>>>,
}

impl Gradients {
    /// Gradient of a leaf, or `None` if nothing flowed into it.
    pub fn get(&self, v: Var) -> Option<&Array2<f64>> {
        self.grads[v.0].as_ref()
    }

    /// Adds every parameter leaf's gradient into the matching `Parameter::grad`.
    pub fn accumulate_into(&self, tape: &Tape, params: &mut ParamSet) {
        for (node, g) in tape.nodes.iter().zip(&self.grads) {
            if let (Some(id), Some(g)) = (node.param, g) {
                params.get_mut(id).grad += g;
            }
        }
    }
}
