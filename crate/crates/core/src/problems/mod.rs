//! Test objectives and noise models.
//!
//! The problem types are noiseless oracles on their own except
//! [`RobustRegression`], whose native noise is mini-batch subsampling.
//! [`AdditiveNoise`] injects heavy-tailed noise into any oracle and
//! [`Noiseless`] strips sampling noise.

pub mod csv_loader;
pub mod data_fitting;
pub mod noise;
pub mod quadratic;
pub mod robust_regression;

pub use csv_loader::{load_csv_dataset, DatasetManifest, LoadedDataset, TargetColumn};
pub use data_fitting::{generate_synthetic, sigmoid, DataFitting};
pub use noise::{
    heavy_tail_cdf, heavy_tail_from_uniform, heavy_tail_survival, sample_heavy_tail, AdditiveNoise,
    HeavyTailSource, Noiseless,
};
pub use quadratic::Quadratic;
pub use robust_regression::{phi, phi_prime, EpochSampler, RobustRegression, DEFAULT_BATCH_SIZE};

use crate::vector::DenseVector;

/// Central finite-difference gradient with step `h`.
pub fn finite_difference_gradient(f: impl Fn(&DenseVector) -> f64, x: &DenseVector, h: f64) -> DenseVector {
    let mut probe = x.clone();
    let mut out = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let xi = x[i];
        probe.as_mut_slice()[i] = xi + h;
        let up = f(&probe);
        probe.as_mut_slice()[i] = xi - h;
        let down = f(&probe);
        probe.as_mut_slice()[i] = xi;
        out.push((up - down) / (2.0 * h));
    }
    DenseVector::new(out)
}

/// `‖a - b‖ / max(‖b‖, floor)`.
pub fn relative_error(a: &DenseVector, b: &DenseVector, floor: f64) -> f64 {
    a.distance(b) / b.norm().max(floor)
}
