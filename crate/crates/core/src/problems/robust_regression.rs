//! Robust regression `f(x) = sum_i phi(a_i^T x - b_i)` with
//! `phi(t) = t^2 / (1 + t^2)`, sampled by mini-batches.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::oracle::{GradientOracle, NoiseDraw, NoiseSource};
use crate::rng::RngStream;
use crate::vector::DenseVector;

pub const DEFAULT_BATCH_SIZE: usize = 100;

pub fn phi(t: f64) -> f64 {
    let t2 = t * t;
    t2 / (1.0 + t2)
}

pub fn phi_prime(t: f64) -> f64 {
    let d = 1.0 + t * t;
    2.0 * t / (d * d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustRegression {
    n: usize,
    features: Vec<f64>,
    targets: Vec<f64>,
    batch_size: usize,
}

impl RobustRegression {
    /// `batch_size` is clamped to the number of rows.
    pub fn new(rows: Vec<Vec<f64>>, targets: Vec<f64>, batch_size: usize) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::precondition("robust regression needs at least one row"));
        }
        if targets.len() != rows.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                got: targets.len(),
            });
        }
        if batch_size == 0 {
            return Err(Error::precondition("batch size must be at least 1"));
        }
        let n = rows[0].len();
        let mut features = Vec::with_capacity(rows.len() * n);
        for row in &rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            features.extend_from_slice(row);
        }
        if features.iter().chain(&targets).any(|v| !v.is_finite()) {
            return Err(Error::precondition("robust regression entries must be finite"));
        }
        Ok(RobustRegression {
            n,
            features,
            targets,
            batch_size: batch_size.min(rows.len()),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> usize {
        self.targets.len()
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n..(i + 1) * self.n]
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// Batches per epoch; a trailing partial batch is dropped.
    pub fn batches_per_epoch(&self) -> usize {
        self.rows() / self.batch_size
    }

    fn residual(&self, i: usize, x: &DenseVector) -> f64 {
        self.row(i).iter().zip(x.iter()).map(|(a, xi)| a * xi).sum::<f64>() - self.targets[i]
    }

    fn accumulate(&self, x: &DenseVector, rows: impl Iterator<Item = usize>) -> Vec<f64> {
        let mut g = vec![0.0; self.n];
        for i in rows {
            let c = phi_prime(self.residual(i, x));
            for (gj, aj) in g.iter_mut().zip(self.row(i)) {
                *gj += c * aj;
            }
        }
        g
    }

    /// Sum over the batch rows, scaled by `N_total / |batch|`.
    pub fn batch_gradient(&self, x: &DenseVector, batch: &[usize]) -> Result<DenseVector> {
        if batch.is_empty() {
            return Err(Error::precondition("empty mini-batch"));
        }
        if let Some(&bad) = batch.iter().find(|&&i| i >= self.rows()) {
            return Err(Error::precondition(format!("row index {bad} out of range")));
        }
        let mut g = DenseVector::new(self.accumulate(x, batch.iter().copied()));
        g.scale_mut(self.rows() as f64 / batch.len() as f64);
        Ok(g)
    }
}

impl GradientOracle for RobustRegression {
    fn dim(&self) -> usize {
        self.n
    }

    fn objective(&self, x: &DenseVector) -> f64 {
        (0..self.rows()).map(|i| phi(self.residual(i, x))).sum()
    }

    fn exact_gradient(&self, x: &DenseVector) -> DenseVector {
        self.accumulate(x, 0..self.rows()).into()
    }

    fn noise_source(&self) -> Box<dyn NoiseSource> {
        Box::new(EpochSampler::new(self.rows(), self.batch_size))
    }

    fn gradient_under(&self, x: &DenseVector, draw: &NoiseDraw) -> DenseVector {
        match draw {
            NoiseDraw::Batch(rows) if !rows.is_empty() => {
                let mut g = DenseVector::new(self.accumulate(x, rows.iter().copied()));
                g.scale_mut(self.rows() as f64 / rows.len() as f64);
                g
            }
            _ => self.exact_gradient(x),
        }
    }
}

/// Uniform sampling without replacement within an epoch; the permutation is
/// reshuffled whenever fewer than `batch_size` unused rows remain.
#[derive(Debug, Clone)]
pub struct EpochSampler {
    order: Vec<usize>,
    batch_size: usize,
    cursor: usize,
}

impl EpochSampler {
    pub fn new(rows: usize, batch_size: usize) -> Self {
        let batch_size = batch_size.clamp(1, rows.max(1));
        EpochSampler {
            order: (0..rows).collect(),
            batch_size,
            cursor: rows,
        }
    }
}

impl NoiseSource for EpochSampler {
    fn draw(&mut self, rng: &mut RngStream) -> NoiseDraw {
        if self.cursor + self.batch_size > self.order.len() {
            self.order.shuffle(rng);
            self.cursor = 0;
        }
        let batch = self.order[self.cursor..self.cursor + self.batch_size].to_vec();
        self.cursor += self.batch_size;
        NoiseDraw::Batch(batch)
    }
}
