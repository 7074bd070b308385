//! Compression schemes: the decompression mapping `Δ(Θ)`, the compression
//! mapping `Π(w)` (orthogonal projection onto the feasible set) and storage
//! accounting.
//!
//! A scheme constrains a subset of the weights, the *constrained indices*:
//! every masked weight for quantization, binarization, ternarization and
//! pruning, or the entries of one designated matrix layer for low-rank.
//! Unconstrained weights pass through `Δ` untouched.

pub mod kmeans;
pub mod lowrank;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LayerKind, WeightVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SchemeKind {
    /// Learned codebook of `k` values (k-means).
    AdaptiveQuant { k: usize },
    /// Nearest value of a fixed, strictly increasing codebook.
    FixedCodebook { codebook: Vec<f64> },
    /// `{−1, +1}` with `sign(0) = +1`.
    Binarize,
    /// `{−1, 0, +1}`, boundaries at `±0.5`.
    Ternary,
    /// Rank-`rank` factorization of the named matrix layer.
    LowRank { rank: usize, layer: String },
    /// Keep the `kappa` largest-magnitude weights.
    PruneL0 { kappa: usize },
}

impl SchemeKind {
    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::AdaptiveQuant { .. } => "adaptive-quant",
            SchemeKind::FixedCodebook { .. } => "fixed-codebook",
            SchemeKind::Binarize => "binarize",
            SchemeKind::Ternary => "ternary",
            SchemeKind::LowRank { .. } => "low-rank",
            SchemeKind::PruneL0 { .. } => "prune-l0",
        }
    }

    /// Compression level (K, r or κ) where the scheme has one.
    pub fn level(&self) -> Option<usize> {
        match self {
            SchemeKind::AdaptiveQuant { k } => Some(*k),
            SchemeKind::LowRank { rank, .. } => Some(*rank),
            SchemeKind::PruneL0 { kappa } => Some(*kappa),
            SchemeKind::FixedCodebook { codebook } => Some(codebook.len()),
            SchemeKind::Binarize => Some(2),
            SchemeKind::Ternary => Some(3),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressionScheme {
    #[serde(flatten)]
    pub kind: SchemeKind,
    /// k-means restarts (adaptive quantization only).
    pub restarts: usize,
    pub seed: u64,
}

pub const DEFAULT_RESTARTS: usize = 10;

impl CompressionScheme {
    pub fn new(kind: SchemeKind) -> Self {
        CompressionScheme { kind, restarts: DEFAULT_RESTARTS, seed: 0 }
    }

    pub fn adaptive_quant(k: usize) -> Self {
        Self::new(SchemeKind::AdaptiveQuant { k })
    }

    pub fn binarize() -> Self {
        Self::new(SchemeKind::Binarize)
    }

    pub fn ternary() -> Self {
        Self::new(SchemeKind::Ternary)
    }

    pub fn fixed_codebook(codebook: Vec<f64>) -> Self {
        Self::new(SchemeKind::FixedCodebook { codebook })
    }

    pub fn low_rank(rank: usize, layer: impl Into<String>) -> Self {
        Self::new(SchemeKind::LowRank { rank, layer: layer.into() })
    }

    pub fn prune(kappa: usize) -> Self {
        Self::new(SchemeKind::PruneL0 { kappa })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    /// Binds the scheme to a weight layout, validating its parameters.
    pub fn resolve(&self, w: &WeightVector) -> Result<Compressor> {
        let (indices, shape) = match &self.kind {
            SchemeKind::LowRank { rank, layer } => {
                let (range, l) = w
                    .layer_range(layer)
                    .ok_or_else(|| Error::invalid("scheme.layer", format!("no layer named `{layer}`")))?;
                let (m, n) = match l.kind {
                    LayerKind::Matrix { rows, cols } => (rows, cols),
                    LayerKind::Bias { .. } => {
                        return Err(Error::invalid("scheme.layer", format!("`{layer}` is not a matrix")))
                    }
                };
                if *rank < 1 || *rank > m.min(n) {
                    return Err(Error::invalid(
                        "scheme.rank",
                        format!("rank {rank} outside 1..={} for a {m}×{n} layer", m.min(n)),
                    ));
                }
                if range.clone().any(|i| !w.mask()[i]) {
                    return Err(Error::invalid("scheme.layer", format!("layer `{layer}` is not fully masked")));
                }
                (range.collect::<Vec<_>>(), Some((m, n)))
            }
            _ => (w.masked_indices(), None),
        };
        let pm = indices.len();
        if pm == 0 {
            return Err(Error::config("compression needs at least one masked weight"));
        }
        match &self.kind {
            SchemeKind::AdaptiveQuant { k } => {
                if *k < 1 || *k > pm {
                    return Err(Error::invalid("scheme.k", format!("K = {k} outside 1..={pm}")));
                }
                if self.restarts < 1 {
                    return Err(Error::invalid("scheme.restarts", "must be positive"));
                }
            }
            SchemeKind::PruneL0 { kappa } => {
                if *kappa < 1 || *kappa > pm {
                    return Err(Error::invalid("scheme.kappa", format!("κ = {kappa} outside 1..={pm}")));
                }
            }
            SchemeKind::FixedCodebook { codebook } => {
                if codebook.is_empty() {
                    return Err(Error::invalid("scheme.codebook", "codebook is empty"));
                }
                if codebook.iter().any(|c| !c.is_finite()) || codebook.windows(2).any(|p| p[0] >= p[1]) {
                    return Err(Error::invalid("scheme.codebook", "codebook must be finite and strictly increasing"));
                }
            }
            _ => {}
        }
        Ok(Compressor { scheme: self.clone(), indices, shape })
    }
}

/// Scheme-tagged low-dimensional parameters `Θ`.
#[derive(Debug, Clone, PartialEq)]
pub enum CompressedParams {
    /// `w_i = codebook[assign[i]]` (assignments are 0-based).
    Quant { codebook: Vec<f64>, assign: Vec<usize> },
    Sign { signs: Vec<i8> },
    Ternary { levels: Vec<i8> },
    /// Row-major factors, `u` is `rows × rank`, `v` is `cols × rank`.
    LowRank { rows: usize, cols: usize, rank: usize, u: Vec<f64>, v: Vec<f64> },
    /// Strictly increasing support into the constrained weights.
    Sparse { len: usize, support: Vec<usize>, vals: Vec<f64> },
}

impl CompressedParams {
    pub fn variant_name(&self) -> &'static str {
        match self {
            CompressedParams::Quant { .. } => "quant",
            CompressedParams::Sign { .. } => "sign",
            CompressedParams::Ternary { .. } => "ternary",
            CompressedParams::LowRank { .. } => "low-rank",
            CompressedParams::Sparse { .. } => "sparse",
        }
    }

    /// Decompressed constrained weights `Δ(Θ)`.
    pub fn decompressed(&self) -> Vec<f64> {
        match self {
            CompressedParams::Quant { codebook, assign } => assign.iter().map(|&a| codebook[a]).collect(),
            CompressedParams::Sign { signs } => signs.iter().map(|&s| f64::from(s)).collect(),
            CompressedParams::Ternary { levels } => levels.iter().map(|&s| f64::from(s)).collect(),
            CompressedParams::LowRank { rows, cols, rank, u, v } => lowrank::outer(u, v, *rows, *cols, *rank),
            CompressedParams::Sparse { len, support, vals } => {
                let mut out = vec![0.0; *len];
                for (&i, &v) in support.iter().zip(vals) {
                    out[i] = v;
                }
                out
            }
        }
    }

    /// Number of constrained weights this `Θ` decompresses into.
    pub fn len(&self) -> usize {
        match self {
            CompressedParams::Quant { assign, .. } => assign.len(),
            CompressedParams::Sign { signs } => signs.len(),
            CompressedParams::Ternary { levels } => levels.len(),
            CompressedParams::LowRank { rows, cols, .. } => rows * cols,
            CompressedParams::Sparse { len, .. } => *len,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Checks the structural invariants of each variant.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::invalid("theta", m));
        match self {
            CompressedParams::Quant { codebook, assign } => {
                if codebook.iter().any(|c| !c.is_finite()) {
                    return bad("non-finite codebook entry".into());
                }
                if let Some(a) = assign.iter().find(|&&a| a >= codebook.len()) {
                    return bad(format!("assignment {a} outside codebook of size {}", codebook.len()));
                }
            }
            CompressedParams::Sign { signs } => {
                if signs.iter().any(|&s| s != 1 && s != -1) {
                    return bad("sign entries must be ±1".into());
                }
            }
            CompressedParams::Ternary { levels } => {
                if levels.iter().any(|&s| !(-1..=1).contains(&s)) {
                    return bad("ternary entries must be in {-1, 0, 1}".into());
                }
            }
            CompressedParams::LowRank { rows, cols, rank, u, v } => {
                if u.len() != rows * rank || v.len() != cols * rank {
                    return bad("factor shapes inconsistent with layer shape".into());
                }
                if u.iter().chain(v).any(|x| !x.is_finite()) {
                    return bad("non-finite factor entry".into());
                }
            }
            CompressedParams::Sparse { len, support, vals } => {
                if support.len() != vals.len() {
                    return bad("support and values differ in length".into());
                }
                if support.windows(2).any(|p| p[0] >= p[1]) || support.last().is_some_and(|&i| i >= *len) {
                    return bad("support must be strictly increasing and in range".into());
                }
                if vals.iter().any(|x| !x.is_finite()) {
                    return bad("non-finite sparse value".into());
                }
            }
        }
        Ok(())
    }
}

/// A scheme bound to a concrete layout.
#[derive(Debug, Clone)]
pub struct Compressor {
    scheme: CompressionScheme,
    indices: Vec<usize>,
    shape: Option<(usize, usize)>,
}

impl Compressor {
    pub fn scheme(&self) -> &CompressionScheme {
        &self.scheme
    }

    /// Constrained indices into the flat weight vector, ascending.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn constrained_len(&self) -> usize {
        self.indices.len()
    }

    pub fn gather(&self, w: &WeightVector) -> Vec<f64> {
        w.gather(&self.indices)
    }

    /// `Π` applied to a vector of constrained weights.
    pub fn project_values(&self, x: &[f64]) -> Result<CompressedParams> {
        if x.len() != self.indices.len() {
            return Err(Error::config(format!(
                "projection input has {} entries, scheme constrains {}",
                x.len(),
                self.indices.len()
            )));
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::numeric(format!("non-finite weight {i} in projection"), Some(i)));
        }
        Ok(match &self.scheme.kind {
            SchemeKind::AdaptiveQuant { k } => {
                let r = kmeans::kmeans_1d(x, *k, self.scheme.restarts, self.scheme.seed);
                CompressedParams::Quant { codebook: r.codebook, assign: r.assign }
            }
            SchemeKind::FixedCodebook { codebook } => CompressedParams::Quant {
                codebook: codebook.clone(),
                assign: x.iter().map(|&xi| nearest_code(codebook, xi)).collect(),
            },
            SchemeKind::Binarize => CompressedParams::Sign {
                signs: x.iter().map(|&xi| if xi >= 0.0 { 1 } else { -1 }).collect(),
            },
            SchemeKind::Ternary => CompressedParams::Ternary {
                levels: x
                    .iter()
                    .map(|&xi| if xi > 0.5 { 1 } else if xi < -0.5 { -1 } else { 0 })
                    .collect(),
            },
            SchemeKind::LowRank { rank, .. } => {
                let (m, n) = self.shape.expect("low-rank compressor has a shape");
                let (u, v) = lowrank::truncated_factors(x, m, n, *rank)?;
                CompressedParams::LowRank { rows: m, cols: n, rank: *rank, u, v }
            }
            SchemeKind::PruneL0 { kappa } => {
                let mut order: Vec<usize> = (0..x.len()).collect();
                order.sort_by(|&a, &b| x[b].abs().total_cmp(&x[a].abs()).then(a.cmp(&b)));
                let mut support: Vec<usize> = order[..*kappa].to_vec();
                support.sort_unstable();
                let vals = support.iter().map(|&i| x[i]).collect();
                CompressedParams::Sparse { len: x.len(), support, vals }
            }
        })
    }

    /// `Π(w)`, the projection of the constrained weights of `w`.
    pub fn project(&self, w: &WeightVector) -> Result<CompressedParams> {
        self.project_values(&self.gather(w))
    }

    /// Checks that `theta` is the variant (and size) this scheme produces.
    pub fn check_params(&self, theta: &CompressedParams) -> Result<()> {
        let ok = matches!(
            (&self.scheme.kind, theta),
            (SchemeKind::AdaptiveQuant { .. } | SchemeKind::FixedCodebook { .. }, CompressedParams::Quant { .. })
                | (SchemeKind::Binarize, CompressedParams::Sign { .. })
                | (SchemeKind::Ternary, CompressedParams::Ternary { .. })
                | (SchemeKind::LowRank { .. }, CompressedParams::LowRank { .. })
                | (SchemeKind::PruneL0 { .. }, CompressedParams::Sparse { .. })
        );
        if !ok {
            return Err(Error::config(format!(
                "{} parameters do not match scheme {}",
                theta.variant_name(),
                self.scheme.kind.name()
            )));
        }
        if theta.len() != self.indices.len() {
            return Err(Error::config(format!(
                "parameters decompress to {} weights, scheme constrains {}",
                theta.len(),
                self.indices.len()
            )));
        }
        if let (CompressedParams::LowRank { rows, cols, .. }, Some((m, n))) = (theta, self.shape) {
            if (*rows, *cols) != (m, n) {
                return Err(Error::config("low-rank factors do not match the layer shape"));
            }
        }
        theta.validate()
    }

    /// `Δ(Θ)` written into the constrained entries of `template`; all other
    /// entries are copied from it.
    pub fn decompress(&self, theta: &CompressedParams, template: &WeightVector) -> Result<WeightVector> {
        self.check_params(theta)?;
        template.scatter(&self.indices, &theta.decompressed())
    }
}

/// Nearest codebook index; ties go to the lower index.
fn nearest_code(codebook: &[f64], x: f64) -> usize {
    let mut best = 0;
    for (c, &v) in codebook.iter().enumerate().skip(1) {
        if (x - v).abs() < (x - codebook[best]).abs() {
            best = c;
        }
    }
    best
}

/// Free-function form of [`Compressor::decompress`].
pub fn decompress(scheme: &CompressionScheme, theta: &CompressedParams, template: &WeightVector) -> Result<WeightVector> {
    scheme.resolve(template)?.decompress(theta, template)
}

/// Free-function form of [`Compressor::project`].
pub fn project(scheme: &CompressionScheme, w: &WeightVector) -> Result<CompressedParams> {
    scheme.resolve(w)?.project(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StorageCost {
    pub theta_bits: u64,
    pub overhead_bits: u64,
    pub total_bits: u64,
}

fn ceil_log2(x: usize) -> u64 {
    if x <= 1 {
        0
    } else {
        u64::from(usize::BITS - (x - 1).leading_zeros())
    }
}

/// Bits to store `Θ` plus the decompressor's side data (codebook, support
/// positions).
pub fn storage_cost(theta: &CompressedParams, float_bits: u32) -> Result<StorageCost> {
    if float_bits != 32 && float_bits != 64 {
        return Err(Error::invalid("float_bits", "must be 32 or 64"));
    }
    let fb = u64::from(float_bits);
    let (theta_bits, overhead_bits) = match theta {
        CompressedParams::Quant { codebook, assign } => {
            (assign.len() as u64 * ceil_log2(codebook.len()), codebook.len() as u64 * fb)
        }
        CompressedParams::Sign { signs } => (signs.len() as u64, 0),
        CompressedParams::Ternary { levels } => (levels.len() as u64 * ceil_log2(3), 0),
        CompressedParams::LowRank { rows, cols, rank, .. } => (((rows + cols) * rank) as u64 * fb, 0),
        CompressedParams::Sparse { len, support, .. } => {
            (support.len() as u64 * fb, support.len() as u64 * ceil_log2(*len))
        }
    };
    Ok(StorageCost { theta_bits, overhead_bits, total_bits: theta_bits + overhead_bits })
}
