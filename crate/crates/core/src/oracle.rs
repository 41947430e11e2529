//! The gradient-oracle contract.
//!
//! A stochastic gradient `G(x; ξ)` is split into two halves: a [`NoiseSource`]
//! that draws the realization `ξ` and [`GradientOracle::gradient_under`] that
//! evaluates the estimator at a point for a given realization. Recursive
//! momentum needs the same `ξ` at two points, and extrapolated momentum may
//! reuse one `ξ` across several points, so the draw has to be a value.

use crate::rng::RngStream;
use crate::vector::DenseVector;

/// One noise realization.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseDraw {
    /// Noiseless evaluation.
    Exact,
    /// Scalar `ξ` added to every gradient coordinate.
    Additive(f64),
    /// Row indices of a mini-batch.
    Batch(Vec<usize>),
}

/// Per-run sampler state. Stateless models ignore `&mut self`; epoch-based
/// batch sampling keeps its permutation here.
pub trait NoiseSource: Send {
    fn draw(&mut self, rng: &mut RngStream) -> NoiseDraw;
}

/// Always yields [`NoiseDraw::Exact`].
#[derive(Debug, Clone, Copy, Default)]
pub struct NoNoise;

impl NoiseSource for NoNoise {
    fn draw(&mut self, _rng: &mut RngStream) -> NoiseDraw {
        NoiseDraw::Exact
    }
}

pub trait GradientOracle: Send + Sync {
    fn dim(&self) -> usize;

    fn objective(&self, x: &DenseVector) -> f64;

    fn exact_gradient(&self, x: &DenseVector) -> DenseVector;

    /// Fresh sampler state for one run.
    fn noise_source(&self) -> Box<dyn NoiseSource>;

    /// `G(x; ξ)` for the given realization.
    fn gradient_under(&self, x: &DenseVector, draw: &NoiseDraw) -> DenseVector;

    /// One-off sample with a freshly drawn realization.
    fn sample_gradient(&self, x: &DenseVector, rng: &mut RngStream) -> DenseVector {
        let mut source = self.noise_source();
        let draw = source.draw(rng);
        self.gradient_under(x, &draw)
    }
}

/// Sampler state plus the random stream that feeds it; owned by one run.
pub struct SampleStream {
    source: Box<dyn NoiseSource>,
    rng: RngStream,
}

impl SampleStream {
    pub fn new(oracle: &dyn GradientOracle, rng: RngStream) -> Self {
        SampleStream {
            source: oracle.noise_source(),
            rng,
        }
    }

    pub fn with_source(source: Box<dyn NoiseSource>, rng: RngStream) -> Self {
        SampleStream { source, rng }
    }

    pub fn draw(&mut self) -> NoiseDraw {
        self.source.draw(&mut self.rng)
    }
}

impl std::fmt::Debug for SampleStream {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SampleStream").field("rng", &self.rng).finish()
    }
}
