//! Extrapolation points and momentum weights for multi-extrapolated momentum.
//!
//! With `gamma_t = gamma_k / t^2` for `t = 1..=q`, the weights `theta_t` are
//! the unique solution of the Vandermonde system
//!
//! ```text
//! sum_t theta_t / gamma_t^r = 1,    r = 1..=q,
//! ```
//!
//! given in closed form by
//! `theta_t = prod_{s != t}(1 - s^2/gamma_k) / ((t^2/gamma_k) prod_{s != t}((t^2 - s^2)/gamma_k))`.
//! Their sum equals `1 - prod_t (1 - gamma_k / t^2)`.

use crate::error::{Error, Result};
use crate::vector::DenseVector;

/// Largest supported extrapolation count. Beyond this the weight products
/// span too many orders of magnitude for double precision.
pub const MAX_EXTRAPOLATIONS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct ExtrapolationWeights {
    gamma_k: f64,
    gammas: Vec<f64>,
    thetas: Vec<f64>,
}

impl ExtrapolationWeights {
    /// Initial weights used before the first iteration: `gamma_t = 1` and
    /// `theta_t = 1/q`, so every extrapolated point coincides with `x^0`.
    pub fn initial(q: usize) -> Result<Self> {
        check_q(q)?;
        Ok(ExtrapolationWeights {
            gamma_k: 1.0,
            gammas: vec![1.0; q],
            thetas: vec![1.0 / q as f64; q],
        })
    }

    /// Arbitrary weights, e.g. for comparing against Polyak momentum. Each
    /// `gamma_t` must lie in `(0, 1]`.
    pub fn from_parts(gammas: Vec<f64>, thetas: Vec<f64>) -> Result<Self> {
        check_q(gammas.len())?;
        if gammas.len() != thetas.len() {
            return Err(Error::DimensionMismatch {
                expected: gammas.len(),
                got: thetas.len(),
            });
        }
        if let Some(g) = gammas.iter().find(|g| !(**g > 0.0 && **g <= 1.0)) {
            return Err(Error::precondition(format!("extrapolation parameter {g} outside (0, 1]")));
        }
        if thetas.iter().any(|t| !t.is_finite()) {
            return Err(Error::precondition("momentum weights must be finite"));
        }
        Ok(ExtrapolationWeights {
            gamma_k: gammas[0],
            gammas,
            thetas,
        })
    }

    pub fn q(&self) -> usize {
        self.thetas.len()
    }

    pub fn gamma_k(&self) -> f64 {
        self.gamma_k
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn theta_sum(&self) -> f64 {
        self.thetas.iter().sum()
    }
}

fn check_q(q: usize) -> Result<()> {
    if (1..=MAX_EXTRAPOLATIONS).contains(&q) {
        Ok(())
    } else {
        Err(Error::precondition(format!(
            "extrapolation count must lie in 1..={MAX_EXTRAPOLATIONS}, got {q}"
        )))
    }
}

/// Weights for `gamma_k` in `(0, 1/2]` and `q` extrapolation points.
///
/// The closed form is evaluated factor by factor as
/// `(gamma_k / t^2) * prod_{s != t} (gamma_k - s^2) / (t^2 - s^2)`,
/// which is algebraically identical and keeps every factor of order one.
pub fn compute_weights(gamma_k: f64, q: usize) -> Result<ExtrapolationWeights> {
    check_q(q)?;
    if !(gamma_k > 0.0 && gamma_k <= 0.5) {
        return Err(Error::precondition(format!("gamma_k must lie in (0, 1/2], got {gamma_k}")));
    }
    let mut gammas = Vec::with_capacity(q);
    let mut thetas = Vec::with_capacity(q);
    for t in 1..=q {
        let t2 = (t * t) as f64;
        let mut theta = gamma_k / t2;
        for s in (1..=q).filter(|&s| s != t) {
            let s2 = (s * s) as f64;
            theta *= (gamma_k - s2) / (t2 - s2);
        }
        gammas.push(gamma_k / t2);
        thetas.push(theta);
    }
    Ok(ExtrapolationWeights {
        gamma_k,
        gammas,
        thetas,
    })
}

/// `1 - prod_{t=1..=q} (1 - gamma_k / t^2)`, the closed-form weight sum.
pub fn weight_sum_identity(gamma_k: f64, q: usize) -> f64 {
    1.0 - (1..=q)
        .map(|t| 1.0 - gamma_k / (t * t) as f64)
        .product::<f64>()
}

/// `z = x_k + ((1 - gamma) / gamma) (x_k - x_km1)`.
pub fn extrapolate(x_k: &DenseVector, x_km1: &DenseVector, gamma: f64) -> Result<DenseVector> {
    x_km1.check_dim(x_k.len())?;
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::precondition(format!("extrapolation parameter must lie in (0, 1], got {gamma}")));
    }
    let coef = (1.0 - gamma) / gamma;
    let mut z = x_k.clone();
    if coef != 0.0 {
        z.axpy(coef, &x_k.sub(x_km1));
    }
    Ok(z)
}

/// `|sum_t theta_t / gamma_t^r - 1|` for `r = 1..=q`.
pub fn vandermonde_row_residuals(w: &ExtrapolationWeights) -> Vec<f64> {
    (1..=w.q() as i32)
        .map(|r| {
            let row: f64 = w
                .gammas
                .iter()
                .zip(&w.thetas)
                .map(|(g, th)| th * (1.0 / g).powi(r))
                .sum();
            (row - 1.0).abs()
        })
        .collect()
}

/// Largest of [`vandermonde_row_residuals`].
pub fn vandermonde_residual(w: &ExtrapolationWeights) -> f64 {
    vandermonde_row_residuals(w).into_iter().fold(0.0, f64::max)
}

/// Floor on the residual achievable with double-precision weights: the
/// largest term of the last row times the unit roundoff. At small `gamma_k`
/// and `q >= 3` this exceeds `1e-8`.
pub fn residual_floor(w: &ExtrapolationWeights) -> f64 {
    let q = w.q() as i32;
    w.gammas
        .iter()
        .zip(&w.thetas)
        .map(|(g, th)| (th * (1.0 / g).powi(q)).abs())
        .fold(0.0, f64::max)
        * f64::EPSILON
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;

    /// Independent oracle: dense LU solve of the Vandermonde system.
    fn solve_dense(gamma_k: f64, q: usize) -> Vec<f64> {
        let a = DMatrix::from_fn(q, q, |r, c| {
            let inv = ((c + 1) * (c + 1)) as f64 / gamma_k;
            inv.powi(r as i32 + 1)
        });
        let b = DVector::from_element(q, 1.0);
        a.lu().solve(&b).expect("nonsingular").iter().copied().collect()
    }

    #[test]
    fn q1_is_gamma() {
        let w = compute_weights(0.3, 1).unwrap();
        assert_eq!(w.thetas(), &[0.3]);
        assert_eq!(w.gammas(), &[0.3]);
        assert!(vandermonde_residual(&w) <= f64::EPSILON);
    }

    #[test]
    fn q2_example() {
        // 10 th1 + 40 th2 = 1 and 100 th1 + 1600 th2 = 1
        let w = compute_weights(0.1, 2).unwrap();
        assert_relative_eq!(w.thetas()[0], 0.13, max_relative = 1e-14);
        assert_relative_eq!(w.thetas()[1], -0.0075, max_relative = 1e-13);
        assert_relative_eq!(w.theta_sum(), 0.1225, max_relative = 1e-14);
        assert_relative_eq!(weight_sum_identity(0.1, 2), 1.0 - 0.9 * 0.975, max_relative = 1e-15);
        assert!(vandermonde_residual(&w) <= 1e-12);
    }

    #[test]
    fn perturbed_residual() {
        let w = ExtrapolationWeights::from_parts(vec![0.1, 0.025], vec![0.14, -0.0075]).unwrap();
        let rows = vandermonde_row_residuals(&w);
        assert_relative_eq!(rows[0], 0.1, max_relative = 1e-12);
        assert_relative_eq!(rows[1], 1.0, max_relative = 1e-12);
        assert_relative_eq!(vandermonde_residual(&w), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn weight_errors() {
        assert!(matches!(compute_weights(0.6, 2), Err(Error::PreconditionViolated(_))));
        assert!(matches!(compute_weights(0.0, 2), Err(Error::PreconditionViolated(_))));
        assert!(matches!(compute_weights(0.2, 0), Err(Error::PreconditionViolated(_))));
        assert!(matches!(compute_weights(0.2, 9), Err(Error::PreconditionViolated(_))));
        assert!(compute_weights(0.5, 8).is_ok());
    }

    #[test]
    fn initial_sentinel() {
        let w = ExtrapolationWeights::initial(3).unwrap();
        assert_eq!(w.gammas(), &[1.0, 1.0, 1.0]);
        assert_relative_eq!(w.theta_sum(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn extrapolate_examples() {
        let a = DenseVector::new(vec![1.0, 0.0]);
        let b = DenseVector::new(vec![0.0, 0.0]);
        assert_eq!(extrapolate(&a, &b, 1.0).unwrap(), a);
        assert_eq!(extrapolate(&a, &b, 0.5).unwrap().as_slice(), &[2.0, 0.0]);
        let c = DenseVector::new(vec![1.0, 1.0]);
        assert_eq!(extrapolate(&c, &c, 0.01).unwrap(), c);
        assert!(matches!(extrapolate(&a, &b, 0.0), Err(Error::PreconditionViolated(_))));
        assert!(matches!(extrapolate(&a, &b, -0.5), Err(Error::PreconditionViolated(_))));
    }

    #[test]
    fn residual_floor_explains_small_gamma() {
        // q = 4 at gamma = 1e-3: the last row has terms near 1e12, so even
        // correctly rounded weights cannot reach 1e-8.
        let w = compute_weights(1e-3, 4).unwrap();
        assert!(residual_floor(&w) > 1e-8);
        assert!(vandermonde_residual(&w) <= 64.0 * residual_floor(&w));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn weight_invariants(gamma in 1e-3..=0.5f64, q in 1usize..=4) {
            let w = compute_weights(gamma, q).unwrap();
            let sum = w.theta_sum();
            prop_assert!(sum > gamma / (1.0 + std::f64::consts::PI.powi(2) / 6.0));
            prop_assert!(sum < 2.0 * gamma);
            prop_assert!(sum > 0.0 && sum < 1.0);
            for (t, th) in w.thetas().iter().enumerate() {
                let t2 = ((t + 1) * (t + 1)) as f64;
                prop_assert!(th.abs() <= 4.0 * gamma / t2);
            }
            let ident = weight_sum_identity(gamma, q);
            prop_assert!((sum - ident).abs() <= 1e-12 * ident.abs(), "sum {sum} ident {ident}");
            // residual is limited by double precision; see residual_floor
            let tol = 1e-8_f64.max(64.0 * residual_floor(&w));
            prop_assert!(vandermonde_residual(&w) <= tol);
        }

        #[test]
        fn residual_tight_where_representable(gamma in 0.02..=0.5f64, q in 1usize..=4) {
            let w = compute_weights(gamma, q).unwrap();
            prop_assert!(vandermonde_residual(&w) <= 1e-8);
        }

        #[test]
        fn agrees_with_dense_solve(gamma in 1e-3..=0.5f64, q in 1usize..=4) {
            let w = compute_weights(gamma, q).unwrap();
            let dense = solve_dense(gamma, q);
            let scale = w.thetas().iter().fold(0.0_f64, |a, t| a.max(t.abs()));
            for (a, b) in w.thetas().iter().zip(&dense) {
                prop_assert!((a - b).abs() <= 1e-8 * scale, "{a} vs {b}");
            }
        }

        #[test]
        fn extrapolation_distance(
            x in prop::collection::vec(-10.0..10.0f64, 3),
            y in prop::collection::vec(-10.0..10.0f64, 3),
            gamma in 1e-3..=0.5f64, q in 1usize..=4,
        ) {
            let xk = DenseVector::new(x);
            let xkm1 = DenseVector::new(y);
            let w = compute_weights(gamma, q).unwrap();
            for g in w.gammas() {
                let z = extrapolate(&xk, &xkm1, *g).unwrap();
                let want = (1.0 / g - 1.0) * xk.distance(&xkm1);
                prop_assert!((z.distance(&xk) - want).abs() <= 1e-10 * (1.0 + want) * (1.0 + xk.norm()));
            }
        }
    }
}
