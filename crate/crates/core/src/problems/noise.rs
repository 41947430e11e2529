//! Symmetric heavy-tailed noise with density `3 / (4 (1 + |t|)^{5/2})`.
//!
//! The tail law is `P(|xi| > t) = (1 + t)^{-3/2}`, so moments of order
//! below 3/2 exist and those of order 3/2 and above do not.

use crate::oracle::{GradientOracle, NoNoise, NoiseDraw, NoiseSource};
use crate::rng::RngStream;
use crate::vector::DenseVector;

/// Inverse-CDF map from `u in (0, 1)`.
pub fn heavy_tail_from_uniform(u: f64) -> f64 {
    let w = 2.0 * u.min(1.0 - u);
    let mag = w.powf(-2.0 / 3.0) - 1.0;
    if u > 0.5 {
        mag
    } else {
        -mag
    }
}

pub fn sample_heavy_tail(rng: &mut RngStream) -> f64 {
    heavy_tail_from_uniform(rng.uniform_open01())
}

/// `P(|xi| > t)` for `t >= 0`.
pub fn heavy_tail_survival(t: f64) -> f64 {
    (1.0 + t.abs()).powf(-1.5)
}

pub fn heavy_tail_cdf(t: f64) -> f64 {
    let half_tail = 0.5 * heavy_tail_survival(t);
    if t >= 0.0 {
        1.0 - half_tail
    } else {
        half_tail
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct HeavyTailSource;

impl NoiseSource for HeavyTailSource {
    fn draw(&mut self, rng: &mut RngStream) -> NoiseDraw {
        NoiseDraw::Additive(sample_heavy_tail(rng))
    }
}

/// `G(x; xi) = grad f(x) + xi * 1` on top of an inner oracle's exact gradient.
#[derive(Debug, Clone)]
pub struct AdditiveNoise<P> {
    inner: P,
}

impl<P: GradientOracle> AdditiveNoise<P> {
    pub fn new(inner: P) -> Self {
        AdditiveNoise { inner }
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }
}

impl<P: GradientOracle> GradientOracle for AdditiveNoise<P> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn objective(&self, x: &DenseVector) -> f64 {
        self.inner.objective(x)
    }

    fn exact_gradient(&self, x: &DenseVector) -> DenseVector {
        self.inner.exact_gradient(x)
    }

    fn noise_source(&self) -> Box<dyn NoiseSource> {
        Box::new(HeavyTailSource)
    }

    fn gradient_under(&self, x: &DenseVector, draw: &NoiseDraw) -> DenseVector {
        let mut g = self.inner.exact_gradient(x);
        if let NoiseDraw::Additive(xi) = draw {
            g.shift_mut(*xi);
        }
        g
    }
}

/// Exact-gradient view of any oracle.
#[derive(Debug, Clone)]
pub struct Noiseless<P> {
    inner: P,
}

impl<P: GradientOracle> Noiseless<P> {
    pub fn new(inner: P) -> Self {
        Noiseless { inner }
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }
}

impl<P: GradientOracle> GradientOracle for Noiseless<P> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn objective(&self, x: &DenseVector) -> f64 {
        self.inner.objective(x)
    }

    fn exact_gradient(&self, x: &DenseVector) -> DenseVector {
        self.inner.exact_gradient(x)
    }

    fn noise_source(&self) -> Box<dyn NoiseSource> {
        Box::new(NoNoise)
    }

    fn gradient_under(&self, x: &DenseVector, _draw: &NoiseDraw) -> DenseVector {
        self.inner.exact_gradient(x)
    }
}
