//! Loss tasks: a dataset plus one of three loss families, with exact and
//! minibatch gradients.
//!
//! Every family sums per-point losses over the dataset. An optional
//! `(ρ/2)‖w‖²` term covers all parameters; minibatch gradients carry the
//! share `|B|/N` of it so that gradients over a partition of the data add up
//! to the full gradient.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::weights::{Layer, WeightVector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossFamily {
    /// `½ Σ (xᵀw + b − y)²`
    LeastSquares,
    /// Binary cross-entropy on the logit `xᵀw + b`, targets in `[0, 1]`.
    Logistic,
    /// One tanh hidden layer followed by a softmax cross-entropy output.
    MlpXent,
}

impl LossFamily {
    pub fn name(self) -> &'static str {
        match self {
            LossFamily::LeastSquares => "least-squares",
            LossFamily::Logistic => "logistic",
            LossFamily::MlpXent => "mlp-xent",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "least-squares" => Ok(LossFamily::LeastSquares),
            "logistic" => Ok(LossFamily::Logistic),
            "mlp-xent" => Ok(LossFamily::MlpXent),
            other => Err(Error::invalid("family", format!("unknown loss family `{other}`"))),
        }
    }

    pub fn is_convex(self) -> bool {
        !matches!(self, LossFamily::MlpXent)
    }
}

impl std::fmt::Display for LossFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    Real(Vec<f64>),
    Class { labels: Vec<usize>, classes: usize },
}

impl Targets {
    pub fn len(&self) -> usize {
        match self {
            Targets::Real(v) => v.len(),
            Targets::Class { labels, .. } => labels.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Dataset plus loss family.
#[derive(Debug, Clone)]
pub struct LossTask {
    family: LossFamily,
    /// Row-major `n × d`.
    inputs: Vec<f64>,
    n: usize,
    d: usize,
    targets: Targets,
    mlp_hidden: usize,
    l2_reg: f64,
    /// Matrix shape given to the `d` linear weights; `(d, 1)` unless set.
    weight_shape: (usize, usize),
}

pub const LINEAR_WEIGHTS: &str = "weights";
pub const LINEAR_BIAS: &str = "bias";

impl LossTask {
    pub fn new(
        family: LossFamily,
        inputs: Vec<f64>,
        d: usize,
        targets: Targets,
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("inputs", "need at least one feature"));
        }
        if inputs.is_empty() || !inputs.len().is_multiple_of(d) {
            return Err(Error::invalid(
                "inputs",
                format!("{} values do not form rows of width {d}", inputs.len()),
            ));
        }
        let n = inputs.len() / d;
        if targets.len() != n {
            return Err(Error::invalid(
                "targets",
                format!("{} targets for {n} rows", targets.len()),
            ));
        }
        if let Some(i) = inputs.iter().position(|v| !v.is_finite()) {
            return Err(Error::numeric(
                format!("non-finite input in row {}", i / d),
                Some(i / d),
            ));
        }
        match (&targets, family) {
            (Targets::Real(y), LossFamily::LeastSquares) => {
                if let Some(i) = y.iter().position(|v| !v.is_finite()) {
                    return Err(Error::numeric(format!("non-finite target {i}"), Some(i)));
                }
            }
            (Targets::Real(y), LossFamily::Logistic) => {
                if let Some(i) = y.iter().position(|v| !(0.0..=1.0).contains(v)) {
                    return Err(Error::invalid(
                        "targets",
                        format!("logistic target {i} = {} outside [0, 1]", y[i]),
                    ));
                }
            }
            (Targets::Class { labels, classes }, LossFamily::MlpXent) => {
                if *classes < 2 {
                    return Err(Error::invalid("targets", "need at least two classes"));
                }
                if let Some(i) = labels.iter().position(|&c| c >= *classes) {
                    return Err(Error::invalid(
                        "targets",
                        format!("class index {} of row {i} out of range", labels[i]),
                    ));
                }
            }
            _ => {
                return Err(Error::invalid(
                    "targets",
                    format!("target kind does not match family {family}"),
                ))
            }
        }
        Ok(LossTask {
            family,
            inputs,
            n,
            d,
            targets,
            mlp_hidden: 0,
            l2_reg: 0.0,
            weight_shape: (d, 1),
        })
    }

    pub fn with_hidden(mut self, hidden: usize) -> Result<Self> {
        if hidden == 0 {
            return Err(Error::invalid("mlp_hidden", "must be positive"));
        }
        self.mlp_hidden = hidden;
        Ok(self)
    }

    pub fn with_l2(mut self, l2_reg: f64) -> Result<Self> {
        if !(l2_reg >= 0.0 && l2_reg.is_finite()) {
            return Err(Error::invalid("l2_reg", "must be a nonnegative number"));
        }
        self.l2_reg = l2_reg;
        Ok(self)
    }

    /// Declares the linear weights as a `rows × cols` matrix (row-major over
    /// the feature index), so that low-rank compression applies to them.
    pub fn with_weight_shape(mut self, rows: usize, cols: usize) -> Result<Self> {
        if rows * cols != self.d {
            return Err(Error::invalid(
                "weight_shape",
                format!("{rows}×{cols} does not hold {} features", self.d),
            ));
        }
        self.weight_shape = (rows, cols);
        Ok(self)
    }

    pub fn family(&self) -> LossFamily {
        self.family
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn inputs(&self) -> &[f64] {
        &self.inputs
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.d..(i + 1) * self.d]
    }

    pub fn targets(&self) -> &Targets {
        &self.targets
    }

    pub fn l2_reg(&self) -> f64 {
        self.l2_reg
    }

    pub fn mlp_hidden(&self) -> usize {
        self.mlp_hidden
    }

    fn classes(&self) -> usize {
        match &self.targets {
            Targets::Class { classes, .. } => *classes,
            Targets::Real(_) => 0,
        }
    }

    fn real_targets(&self) -> &[f64] {
        match &self.targets {
            Targets::Real(y) => y,
            Targets::Class { .. } => &[],
        }
    }

    fn labels(&self) -> &[usize] {
        match &self.targets {
            Targets::Class { labels, .. } => labels,
            Targets::Real(_) => &[],
        }
    }

    /// Parameter layout expected by this task.
    pub fn layout(&self) -> Vec<Layer> {
        match self.family {
            LossFamily::LeastSquares | LossFamily::Logistic => vec![
                Layer::matrix(LINEAR_WEIGHTS, self.weight_shape.0, self.weight_shape.1),
                Layer::bias(LINEAR_BIAS, 1),
            ],
            LossFamily::MlpXent => {
                let (h, c) = (self.mlp_hidden, self.classes());
                vec![
                    Layer::matrix("hidden.weight", h, self.d),
                    Layer::bias("hidden.bias", h),
                    Layer::matrix("output.weight", c, h),
                    Layer::bias("output.bias", c),
                ]
            }
        }
    }

    pub fn param_count(&self) -> usize {
        self.layout().iter().map(Layer::len).sum()
    }

    /// Seeded random initialization with the default mask.
    pub fn init_weights(&self, seed: u64) -> WeightVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layout = self.layout();
        let mut values = Vec::with_capacity(self.param_count());
        for layer in &layout {
            let scale = match layer.kind {
                super::LayerKind::Matrix { cols, .. } if self.family == LossFamily::MlpXent => {
                    1.0 / (cols as f64).sqrt()
                }
                super::LayerKind::Matrix { .. } => 0.1,
                super::LayerKind::Bias { .. } => 0.0,
            };
            let normal = Normal::new(0.0, 1.0).expect("unit normal");
            values.extend((0..layer.len()).map(|_| scale * normal.sample(&mut rng)));
        }
        WeightVector::with_default_mask(values, layout).expect("layout-consistent init")
    }

    pub fn check_weights(&self, w: &WeightVector) -> Result<()> {
        if self.family == LossFamily::MlpXent && self.mlp_hidden == 0 {
            return Err(Error::invalid("mlp_hidden", "mlp-xent needs a hidden width"));
        }
        let expected = self.layout();
        if w.layout() != expected.as_slice() {
            return Err(Error::config(format!(
                "weight layout {:?} does not match {} task layout {:?}",
                w.layout(),
                self.family,
                expected
            )));
        }
        Ok(())
    }

    /// Total loss `Σ_n L_n(w)` plus the regularizer.
    pub fn loss(&self, w: &WeightVector) -> Result<f64> {
        self.check_weights(w)?;
        let v = w.values();
        let mut total = 0.0;
        for i in 0..self.n {
            let li = self.point_loss(v, i, None);
            if !li.is_finite() {
                return Err(Error::numeric(
                    format!("non-finite loss at data point {i}"),
                    Some(i),
                ));
            }
            total += li;
        }
        if self.l2_reg > 0.0 {
            total += 0.5 * self.l2_reg * v.iter().map(|x| x * x).sum::<f64>();
        }
        Ok(total)
    }

    /// Exact gradient of [`LossTask::loss`].
    pub fn grad(&self, w: &WeightVector) -> Result<Vec<f64>> {
        self.check_weights(w)?;
        self.accumulate_grad(w.values(), 0..self.n, self.n)
    }

    /// Gradient of the partial sum over `batch` (plus the `|B|/N` share of
    /// the regularizer).
    pub fn minibatch_grad(&self, w: &WeightVector, batch: &[usize]) -> Result<Vec<f64>> {
        self.check_weights(w)?;
        if batch.is_empty() {
            return Err(Error::config("empty minibatch"));
        }
        if let Some(&bad) = batch.iter().find(|&&i| i >= self.n) {
            return Err(Error::config(format!(
                "minibatch index {bad} out of range for {} points",
                self.n
            )));
        }
        self.accumulate_grad(w.values(), batch.iter().copied(), batch.len())
    }

    fn accumulate_grad(
        &self,
        v: &[f64],
        points: impl Iterator<Item = usize>,
        batch_len: usize,
    ) -> Result<Vec<f64>> {
        let mut g = vec![0.0; v.len()];
        for i in points {
            let li = self.point_loss(v, i, Some(&mut g));
            if !li.is_finite() {
                return Err(Error::numeric(
                    format!("non-finite loss at data point {i}"),
                    Some(i),
                ));
            }
        }
        if self.l2_reg > 0.0 {
            let share = self.l2_reg * batch_len as f64 / self.n as f64;
            for (gi, wi) in g.iter_mut().zip(v) {
                *gi += share * wi;
            }
        }
        if let Some(j) = g.iter().position(|x| !x.is_finite()) {
            return Err(Error::numeric(format!("non-finite gradient entry {j}"), Some(j)));
        }
        Ok(g)
    }

    /// Loss of data point `i`; adds its gradient into `grad` when given.
    fn point_loss(&self, v: &[f64], i: usize, grad: Option<&mut Vec<f64>>) -> f64 {
        let x = self.row(i);
        match self.family {
            LossFamily::LeastSquares => {
                let d = self.d;
                let z = dot(&v[..d], x) + v[d];
                let r = z - self.real_targets()[i];
                if let Some(g) = grad {
                    for (gj, xj) in g[..d].iter_mut().zip(x) {
                        *gj += r * xj;
                    }
                    g[d] += r;
                }
                0.5 * r * r
            }
            LossFamily::Logistic => {
                let d = self.d;
                let z = dot(&v[..d], x) + v[d];
                let y = self.real_targets()[i];
                if let Some(g) = grad {
                    let s = sigmoid(z) - y;
                    for (gj, xj) in g[..d].iter_mut().zip(x) {
                        *gj += s * xj;
                    }
                    g[d] += s;
                }
                softplus(z) - y * z
            }
            LossFamily::MlpXent => self.mlp_point(v, i, grad),
        }
    }

    fn mlp_point(&self, v: &[f64], i: usize, grad: Option<&mut Vec<f64>>) -> f64 {
        let (d, h, c) = (self.d, self.mlp_hidden, self.classes());
        let x = self.row(i);
        let (w1, rest) = v.split_at(h * d);
        let (b1, rest) = rest.split_at(h);
        let (w2, b2) = rest.split_at(c * h);

        let hidden: Vec<f64> = (0..h)
            .map(|j| (dot(&w1[j * d..(j + 1) * d], x) + b1[j]).tanh())
            .collect();
        let logits: Vec<f64> = (0..c)
            .map(|k| dot(&w2[k * h..(k + 1) * h], &hidden) + b2[k])
            .collect();
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum_exp: f64 = logits.iter().map(|o| (o - max).exp()).sum();
        let lse = max + sum_exp.ln();
        let label = self.labels()[i];
        let loss = lse - logits[label];

        if let Some(g) = grad {
            let (gw1, rest) = g.split_at_mut(h * d);
            let (gb1, rest) = rest.split_at_mut(h);
            let (gw2, gb2) = rest.split_at_mut(c * h);
            let mut dhidden = vec![0.0; h];
            for k in 0..c {
                let dk = (logits[k] - lse).exp() - if k == label { 1.0 } else { 0.0 };
                gb2[k] += dk;
                for j in 0..h {
                    gw2[k * h + j] += dk * hidden[j];
                    dhidden[j] += w2[k * h + j] * dk;
                }
            }
            for j in 0..h {
                let da = dhidden[j] * (1.0 - hidden[j] * hidden[j]);
                gb1[j] += da;
                for (gjd, xd) in gw1[j * d..(j + 1) * d].iter_mut().zip(x) {
                    *gjd += da * xd;
                }
            }
        }
        loss
    }

    /// Design row of the linear families with the trailing bias column.
    pub(crate) fn design(&self) -> DMatrix<f64> {
        let (n, d) = (self.n, self.d);
        DMatrix::from_fn(n, d + 1, |i, j| if j < d { self.inputs[i * d + j] } else { 1.0 })
    }

    /// Upper bound `M` on the Lipschitz constant of the gradient: the top
    /// eigenvalue of the bias-augmented Gram matrix (times ¼ for logistic),
    /// plus the regularizer weight.
    pub fn lipschitz_bound(&self) -> Result<f64> {
        let scale = match self.family {
            LossFamily::LeastSquares => 1.0,
            LossFamily::Logistic => 0.25,
            LossFamily::MlpXent => {
                return Err(Error::UnsupportedFamily {
                    operation: "lipschitz_bound",
                    family: self.family.to_string(),
                })
            }
        };
        let a = self.design();
        let gram = a.transpose() * &a;
        let eig = SymmetricEigen::new(gram);
        let top = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
        Ok(scale * top + self.l2_reg)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}
