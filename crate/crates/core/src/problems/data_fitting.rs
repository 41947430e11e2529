//! Sigmoid least squares `f(x) = sum_i (s(a_i^T x) - b_i)^2`.

use crate::error::{Error, Result};
use crate::oracle::{GradientOracle, NoNoise, NoiseDraw, NoiseSource};
use crate::rng::RngStream;
use crate::vector::DenseVector;

/// Logistic sigmoid, evaluated without overflow for large `|t|`.
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Row-major `m x n` design matrix and targets.
#[derive(Debug, Clone, PartialEq)]
pub struct DataFitting {
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl DataFitting {
    pub fn new(rows: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        let n = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || n == 0 {
            return Err(Error::precondition("data fitting needs m, n >= 1"));
        }
        if b.len() != rows.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                got: b.len(),
            });
        }
        let mut a = Vec::with_capacity(rows.len() * n);
        for row in &rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            a.extend_from_slice(row);
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::precondition("data fitting entries must be finite"));
        }
        Ok(DataFitting { n, a, b })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.b.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.n..(i + 1) * self.n]
    }

    pub fn targets(&self) -> &[f64] {
        &self.b
    }

    fn margin(&self, i: usize, x: &DenseVector) -> f64 {
        self.row(i).iter().zip(x.iter()).map(|(a, xi)| a * xi).sum()
    }
}

/// Draws `A` and a ground truth `x*` with iid standard normal entries and sets
/// `b_i = s(a_i^T x*) + 1e-4 e_i`. Returns the problem and `x*`.
pub fn generate_synthetic(n: usize, m: usize, rng: &mut RngStream) -> Result<(DataFitting, DenseVector)> {
    if n == 0 || m == 0 {
        return Err(Error::precondition("synthetic data needs n, m >= 1"));
    }
    let a: Vec<f64> = (0..n * m).map(|_| rng.standard_normal()).collect();
    let x_star: DenseVector = (0..n).map(|_| rng.standard_normal()).collect::<Vec<_>>().into();
    let mut problem = DataFitting { n, a, b: vec![0.0; m] };
    let b = (0..m)
        .map(|i| sigmoid(problem.margin(i, &x_star)) + 1e-4 * rng.standard_normal())
        .collect();
    problem.b = b;
    Ok((problem, x_star))
}

impl GradientOracle for DataFitting {
    fn dim(&self) -> usize {
        self.n
    }

    fn objective(&self, x: &DenseVector) -> f64 {
        (0..self.m())
            .map(|i| {
                let r = sigmoid(self.margin(i, x)) - self.b[i];
                r * r
            })
            .sum()
    }

    fn exact_gradient(&self, x: &DenseVector) -> DenseVector {
        let mut g = vec![0.0; self.n];
        for i in 0..self.m() {
            let s = sigmoid(self.margin(i, x));
            let c = 2.0 * (s - self.b[i]) * s * (1.0 - s);
            for (gj, aj) in g.iter_mut().zip(self.row(i)) {
                *gj += c * aj;
            }
        }
        g.into()
    }

    fn noise_source(&self) -> Box<dyn NoiseSource> {
        Box::new(NoNoise)
    }

    fn gradient_under(&self, x: &DenseVector, _draw: &NoiseDraw) -> DenseVector {
        self.exact_gradient(x)
    }
}
