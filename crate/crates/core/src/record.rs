use serde::{Deserialize, Serialize};

/// Per-iterate telemetry.
///
/// `grad_norm` is the exact gradient norm at `x^k`, even though the optimizer
/// only saw stochastic samples. `mom_norm` is the norm of the momentum that
/// produced `x^k` (zero at `k = 0`), and `oracle_calls` counts the stochastic
/// gradient evaluations spent to reach `x^k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub k: usize,
    pub f_val: f64,
    pub grad_norm: f64,
    pub mom_norm: f64,
    pub oracle_calls: usize,
}
