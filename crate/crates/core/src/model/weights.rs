use std::ops::Range;

use crate::error::{Error, Result};

/// Shape of one named block of parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LayerKind {
    /// Row-major `rows × cols` weight matrix.
    Matrix { rows: usize, cols: usize },
    /// Bias vector.
    Bias { len: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layer {
    pub name: String,
    pub kind: LayerKind,
}

impl Layer {
    pub fn matrix(name: impl Into<String>, rows: usize, cols: usize) -> Self {
        Layer {
            name: name.into(),
            kind: LayerKind::Matrix { rows, cols },
        }
    }

    pub fn bias(name: impl Into<String>, len: usize) -> Self {
        Layer {
            name: name.into(),
            kind: LayerKind::Bias { len },
        }
    }

    pub fn len(&self) -> usize {
        match self.kind {
            LayerKind::Matrix { rows, cols } => rows * cols,
            LayerKind::Bias { len } => len,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_bias(&self) -> bool {
        matches!(self.kind, LayerKind::Bias { .. })
    }
}

/// Flat parameter vector with a layer layout and a mask of the entries that
/// take part in the compression constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    values: Vec<f64>,
    layout: Vec<Layer>,
    mask: Vec<bool>,
}

impl WeightVector {
    /// Builds a weight vector, checking that the layout covers `values` and
    /// that every value is finite.
    pub fn new(values: Vec<f64>, layout: Vec<Layer>, mask: Vec<bool>) -> Result<Self> {
        let total: usize = layout.iter().map(Layer::len).sum();
        if total != values.len() {
            return Err(Error::config(format!(
                "layout describes {total} parameters but {} values were given",
                values.len()
            )));
        }
        if mask.len() != values.len() {
            return Err(Error::config(format!(
                "mask has {} entries, expected {}",
                mask.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::numeric(
                format!("non-finite weight at index {i}"),
                Some(i),
            ));
        }
        Ok(WeightVector {
            values,
            layout,
            mask,
        })
    }

    /// Weight vector whose mask covers matrix layers and leaves biases out.
    pub fn with_default_mask(values: Vec<f64>, layout: Vec<Layer>) -> Result<Self> {
        let mask = default_mask(&layout);
        Self::new(values, layout, mask)
    }

    pub fn zeros(layout: Vec<Layer>) -> Self {
        let p = layout.iter().map(Layer::len).sum();
        let mask = default_mask(&layout);
        WeightVector {
            values: vec![0.0; p],
            layout,
            mask,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn layout(&self) -> &[Layer] {
        &self.layout
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Indices of the masked entries, ascending.
    pub fn masked_indices(&self) -> Vec<usize> {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
            .collect()
    }

    pub fn set_mask(&mut self, mask: Vec<bool>) -> Result<()> {
        if mask.len() != self.values.len() {
            return Err(Error::config("mask length does not match weight count"));
        }
        self.mask = mask;
        Ok(())
    }

    /// Replaces the values, keeping layout and mask.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(values, self.layout.clone(), self.mask.clone())
    }

    /// Mutable access for optimizers; callers are responsible for finiteness
    /// (see [`WeightVector::check_finite`]).
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(Error::numeric(
                format!("non-finite weight at index {i}"),
                Some(i),
            )),
            None => Ok(()),
        }
    }

    /// Index range of the named layer in the flat vector.
    pub fn layer_range(&self, name: &str) -> Option<(Range<usize>, &Layer)> {
        let mut offset = 0;
        for layer in &self.layout {
            let end = offset + layer.len();
            if layer.name == name {
                return Some((offset..end, layer));
            }
            offset = end;
        }
        None
    }

    pub fn gather(&self, indices: &[usize]) -> Vec<f64> {
        indices.iter().map(|&i| self.values[i]).collect()
    }

    /// Copy of `self` with `values[indices[j]] = sub[j]`.
    pub fn scatter(&self, indices: &[usize], sub: &[f64]) -> Result<Self> {
        debug_assert_eq!(indices.len(), sub.len());
        let mut values = self.values.clone();
        for (&i, &v) in indices.iter().zip(sub) {
            values[i] = v;
        }
        self.with_values(values)
    }

    pub fn same_shape(&self, other: &WeightVector) -> bool {
        self.layout == other.layout && self.values.len() == other.values.len()
    }
}

pub fn default_mask(layout: &[Layer]) -> Vec<bool> {
    layout
        .iter()
        .flat_map(|l| std::iter::repeat_n(!l.is_bias(), l.len()))
        .collect()
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
