//! `f(x) = (1/2) sum_i d_i x_i^2` with positive curvatures `d_i`.

use crate::error::{Error, Result};
use crate::oracle::{GradientOracle, NoNoise, NoiseDraw, NoiseSource};
use crate::vector::DenseVector;

#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    curvature: Vec<f64>,
}

impl Quadratic {
    pub fn new(curvature: Vec<f64>) -> Result<Self> {
        if curvature.is_empty() {
            return Err(Error::precondition("quadratic needs at least one coordinate"));
        }
        if curvature.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::precondition("curvatures must be positive and finite"));
        }
        Ok(Quadratic { curvature })
    }

    /// `‖x‖² / 2` in `n` dimensions.
    pub fn isotropic(n: usize) -> Self {
        Quadratic {
            curvature: vec![1.0; n.max(1)],
        }
    }

    pub fn curvature(&self) -> &[f64] {
        &self.curvature
    }

    /// Gradient Lipschitz constant `max_i d_i`.
    pub fn lipschitz(&self) -> f64 {
        self.curvature.iter().copied().fold(0.0, f64::max)
    }
}

impl GradientOracle for Quadratic {
    fn dim(&self) -> usize {
        self.curvature.len()
    }

    fn objective(&self, x: &DenseVector) -> f64 {
        0.5 * self.curvature.iter().zip(x.iter()).map(|(d, xi)| d * xi * xi).sum::<f64>()
    }

    fn exact_gradient(&self, x: &DenseVector) -> DenseVector {
        self.curvature.iter().zip(x.iter()).map(|(d, xi)| d * xi).collect::<Vec<_>>().into()
    }

    fn noise_source(&self) -> Box<dyn NoiseSource> {
        Box::new(NoNoise)
    }

    fn gradient_under(&self, x: &DenseVector, _draw: &NoiseDraw) -> DenseVector {
        self.exact_gradient(x)
    }
}
