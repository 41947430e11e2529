use serde::{Deserialize, Serialize};
use statrs::statistics::{Data, OrderStatistics};

/// `(f - f*) / (f0 - f*)`, clipped at 0. Returns 1 when `f0 <= f*`.
pub fn rel_obj_gap(f: f64, f0: f64, fstar: f64) -> f64 {
    let denom = f0 - fstar;
    if denom > 0.0 {
        ((f - fstar) / denom).max(0.0)
    } else {
        1.0
    }
}

/// `‖∇f(x)‖ / ‖∇f(x0)‖`; 0 when the initial gradient vanishes.
pub fn rel_grad_norm(grad_norm: f64, grad_norm0: f64) -> f64 {
    if grad_norm0 > 0.0 {
        grad_norm / grad_norm0
    } else {
        0.0
    }
}

/// Sample quantile at `tau` in `[0, 1]`; NaN for empty input.
pub fn quantile(values: &[f64], tau: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    Data::new(values.to_vec()).quantile(tau)
}

/// Median with lower and upper quartiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        Summary {
            median: quantile(values, 0.5),
            q1: quantile(values, 0.25),
            q3: quantile(values, 0.75),
        }
    }

    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaps() {
        assert_eq!(rel_obj_gap(3.0, 3.0, 1.0), 1.0);
        assert_eq!(rel_obj_gap(2.0, 3.0, 1.0), 0.5);
        assert_eq!(rel_obj_gap(0.5, 3.0, 1.0), 0.0);
        assert_eq!(rel_obj_gap(1.0, 1.0, 1.0), 1.0);
        assert_eq!(rel_grad_norm(2.0, 4.0), 0.5);
        assert_eq!(rel_grad_norm(2.0, 0.0), 0.0);
    }

    #[test]
    fn summaries() {
        let s = Summary::of(&[5.0, 1.0, 3.0]);
        assert_eq!(s.median, 3.0);
        assert!(s.q1 <= s.median && s.median <= s.q3);
        let s = Summary::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.median, 2.5);
        assert!(quantile(&[], 0.5).is_nan());
    }
}
