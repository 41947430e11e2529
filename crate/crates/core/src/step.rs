//! Iterate updates and the potential diagnostic.

use crate::error::{Error, Result};
use crate::vector::DenseVector;

/// Directions with norm below this are treated as degenerate.
pub const DEGENERATE_NORM: f64 = 1e-300;

/// `x - eta * m / ‖m‖`.
///
/// Fails with [`Error::DegenerateDirection`] when `‖m‖ < 1e-300`; the caller
/// decides what to do (the optimizers hold the iterate in place).
pub fn normalized_step(x: &DenseVector, m: &DenseVector, eta: f64) -> Result<DenseVector> {
    check_step_args(x, m, eta)?;
    let norm = m.norm();
    if norm < DEGENERATE_NORM {
        return Err(Error::DegenerateDirection);
    }
    let mut out = x.clone();
    out.axpy(-eta / norm, m);
    Ok(out)
}

/// `x - eta * m`, used by the unnormalized baselines.
pub fn unnormalized_step(x: &DenseVector, m: &DenseVector, eta: f64) -> Result<DenseVector> {
    check_step_args(x, m, eta)?;
    let mut out = x.clone();
    out.axpy(-eta, m);
    Ok(out)
}

fn check_step_args(x: &DenseVector, m: &DenseVector, eta: f64) -> Result<()> {
    m.check_dim(x.len())?;
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::precondition(format!("step size must be positive, got {eta}")));
    }
    Ok(())
}

/// `f + p_k ‖m - grad‖^alpha`, the Lyapunov quantity monitored during runs.
pub fn potential_value(
    f_val: f64,
    m: &DenseVector,
    grad: &DenseVector,
    p_k: f64,
    alpha: f64,
) -> Result<f64> {
    m.check_dim(grad.len())?;
    Ok(f_val + p_k * m.sub(grad).norm_pow(alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn v(c: &[f64]) -> DenseVector {
        DenseVector::new(c.to_vec())
    }

    #[test]
    fn normalized_examples() {
        let out = normalized_step(&v(&[0.0, 0.0]), &v(&[3.0, 4.0]), 1.0).unwrap();
        assert_abs_diff_eq!(out[0], -0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(out[1], -0.8, epsilon = 1e-15);

        let out = normalized_step(&v(&[1.0, 1.0]), &v(&[0.0, 2.0]), 0.5).unwrap();
        assert_eq!(out.as_slice(), &[1.0, 0.5]);
    }

    #[test]
    fn degenerate_direction() {
        let err = normalized_step(&v(&[1.0]), &v(&[0.0]), 1.0).unwrap_err();
        assert!(matches!(err, Error::DegenerateDirection));
        // 1e-200 is still a usable direction
        assert!(normalized_step(&v(&[1.0]), &v(&[1e-200]), 1.0).is_ok());
    }

    #[test]
    fn step_argument_errors() {
        assert!(matches!(
            normalized_step(&v(&[1.0]), &v(&[1.0, 2.0]), 1.0),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            unnormalized_step(&v(&[1.0]), &v(&[1.0]), 0.0),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn unnormalized_examples() {
        assert_eq!(unnormalized_step(&v(&[1.0, 0.0]), &v(&[1.0, 0.0]), 1.0).unwrap().as_slice(), &[0.0, 0.0]);
        assert_eq!(unnormalized_step(&v(&[0.0, 0.0]), &v(&[0.0, 0.0]), 1.0).unwrap().as_slice(), &[0.0, 0.0]);
        assert_eq!(unnormalized_step(&v(&[2.0, 2.0]), &v(&[1.0, -1.0]), 0.5).unwrap().as_slice(), &[1.5, 2.5]);
    }

    #[test]
    fn potential_examples() {
        let g = v(&[0.3, -0.2]);
        assert_eq!(potential_value(1.0, &g, &g, 5.0, 1.5).unwrap(), 1.0);
        assert_abs_diff_eq!(
            potential_value(0.0, &v(&[2.0, 0.0]), &v(&[0.0, 0.0]), 1.0, 2.0).unwrap(),
            4.0,
            epsilon = 1e-14
        );
        let expected = 3.0 + 2.0 * (0.75 * 2.0_f64.ln()).exp();
        let got = potential_value(3.0, &v(&[1.0, 1.0]), &v(&[0.0, 0.0]), 2.0, 1.5).unwrap();
        assert_abs_diff_eq!(got, expected, epsilon = 1e-14);
        assert_abs_diff_eq!(got, 6.3636, epsilon = 1e-4);
    }

    proptest! {
        #[test]
        fn step_length_is_eta(
            x in prop::collection::vec(-1e3..1e3f64, 1..12),
            seed in prop::collection::vec(-1e3..1e3f64, 12),
            eta in 1e-6..1e2f64,
        ) {
            let n = x.len();
            let m = DenseVector::new(seed[..n].to_vec());
            prop_assume!(m.norm() > 1e-6);
            let x = DenseVector::new(x);
            let out = normalized_step(&x, &m, eta).unwrap();
            let d = out.distance(&x);
            // rounding of x + c*m is relative to |x|, so compare in that scale
            let scale = eta + x.norm();
            prop_assert!((d - eta).abs() <= 8.0 * f64::EPSILON * scale, "d = {d}, eta = {eta}");
        }

        #[test]
        fn potential_monotone(
            p1 in 0.01..10.0f64, dp in 0.0..10.0f64,
            e1 in 0.0..10.0f64, de in 0.0..10.0f64,
            alpha in 1.01..2.0f64,
        ) {
            let g = v(&[0.0, 0.0]);
            let small = potential_value(0.5, &v(&[e1, 0.0]), &g, p1, alpha).unwrap();
            let bigger_p = potential_value(0.5, &v(&[e1, 0.0]), &g, p1 + dp, alpha).unwrap();
            let bigger_e = potential_value(0.5, &v(&[e1 + de, 0.0]), &g, p1, alpha).unwrap();
            prop_assert!(bigger_p >= small);
            prop_assert!(bigger_e >= small);
        }
    }
}
