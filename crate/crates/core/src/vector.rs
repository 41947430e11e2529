use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real coordinate vector used for iterates, gradients and momenta.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    pub fn new(coords: Vec<f64>) -> Self {
        DenseVector(coords)
    }

    pub fn zeros(n: usize) -> Self {
        DenseVector(vec![0.0; n])
    }

    pub fn ones(n: usize) -> Self {
        DenseVector(vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.len() == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected,
                got: self.len(),
            })
        }
    }

    pub fn dot(&self, other: &DenseVector) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    /// Euclidean norm, scaled by the largest magnitude so that tiny or huge
    /// entries neither underflow nor overflow when squared.
    pub fn norm(&self) -> f64 {
        let scale = self.0.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        if scale == 0.0 || !scale.is_finite() {
            return scale;
        }
        let sum: f64 = self.0.iter().map(|v| (v / scale) * (v / scale)).sum();
        scale * sum.sqrt()
    }

    /// `‖self‖^alpha`, evaluated as `exp(alpha * ln ‖self‖)` with `0` for the
    /// zero vector.
    pub fn norm_pow(&self, alpha: f64) -> f64 {
        let n = self.norm();
        if n == 0.0 {
            0.0
        } else {
            (alpha * n.ln()).exp()
        }
    }

    pub fn distance(&self, other: &DenseVector) -> f64 {
        self.sub(other).norm()
    }

    pub fn sub(&self, other: &DenseVector) -> DenseVector {
        debug_assert_eq!(self.len(), other.len());
        DenseVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &DenseVector) -> DenseVector {
        debug_assert_eq!(self.len(), other.len());
        DenseVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scaled(&self, c: f64) -> DenseVector {
        DenseVector(self.0.iter().map(|v| c * v).collect())
    }

    pub fn scale_mut(&mut self, c: f64) {
        self.0.iter_mut().for_each(|v| *v *= c);
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &DenseVector) {
        debug_assert_eq!(self.len(), x.len());
        self.0.iter_mut().zip(&x.0).for_each(|(s, v)| *s += a * v);
    }

    /// Adds `c` to every coordinate.
    pub fn shift_mut(&mut self, c: f64) {
        self.0.iter_mut().for_each(|v| *v += c);
    }
}

impl From<Vec<f64>> for DenseVector {
    fn from(v: Vec<f64>) -> Self {
        DenseVector(v)
    }
}

impl Index<usize> for DenseVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}
