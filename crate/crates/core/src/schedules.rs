//! Closed-form parameter schedules.
//!
//! Every schedule is a negative power of `(k + 1)` (Polyak and recursive
//! momentum) or `(k + 4)` (extrapolated momentum). Exponents are evaluated
//! from their rational expressions at call time.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Working tail exponent for potential weights when the true one is unknown.
pub const DEFAULT_WORKING_ALPHA: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Polyak momentum.
    Pm,
    /// Multi-extrapolated momentum.
    Mem,
    /// Recursive momentum.
    Rm,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::Pm => "pm",
            Method::Mem => "em",
            Method::Rm => "rm",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pm" => Ok(Method::Pm),
            "em" | "mem" => Ok(Method::Mem),
            "rm" => Ok(Method::Rm),
            other => Err(Error::precondition(format!("unknown method '{other}'"))),
        }
    }
}

/// Whether the tail exponent of the noise is known to the schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AlphaMode {
    Known(f64),
    Unknown,
}

impl AlphaMode {
    pub fn known(self) -> Option<f64> {
        match self {
            AlphaMode::Known(a) => Some(a),
            AlphaMode::Unknown => None,
        }
    }
}

pub fn validate_alpha(alpha: f64) -> Result<f64> {
    if alpha > 1.0 && alpha <= 2.0 {
        Ok(alpha)
    } else {
        Err(Error::precondition(format!("alpha must lie in (1, 2], got {alpha}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSpec {
    pub method: Method,
    pub alpha_mode: AlphaMode,
    /// Smoothness order; only read by extrapolated momentum, which uses
    /// `p - 1` extrapolation points.
    pub p: u32,
    /// Multiplier on the step size. Momentum and extrapolation weights are
    /// never scaled.
    pub eta_scale: f64,
}

impl ScheduleSpec {
    pub fn new(method: Method, alpha_mode: AlphaMode, p: u32, eta_scale: f64) -> Result<Self> {
        if let AlphaMode::Known(a) = alpha_mode {
            validate_alpha(a)?;
        }
        if method == Method::Mem && p < 2 {
            return Err(Error::precondition(format!("smoothness order p must be at least 2, got {p}")));
        }
        if !(eta_scale > 0.0 && eta_scale.is_finite()) {
            return Err(Error::precondition(format!("eta_scale must be positive, got {eta_scale}")));
        }
        Ok(ScheduleSpec {
            method,
            alpha_mode,
            p,
            eta_scale,
        })
    }

    /// Number of extrapolation points for extrapolated momentum.
    pub fn q(&self) -> usize {
        self.p.saturating_sub(1) as usize
    }

    /// Step size and momentum-type weight at iteration `k`: `theta_k` for
    /// Polyak and recursive momentum, `gamma_k` for extrapolated momentum.
    pub fn at(&self, k: usize) -> (f64, f64) {
        match self.method {
            Method::Pm => pm_schedule(self, k),
            Method::Mem => mem_schedule(self, k),
            Method::Rm => rm_schedule(self, k),
        }
    }
}

fn decay(base: f64, exponent: f64) -> f64 {
    base.powf(-exponent)
}

/// `(eta_k, theta_k)` for Polyak momentum.
pub fn pm_schedule(spec: &ScheduleSpec, k: usize) -> (f64, f64) {
    let (a, b) = match spec.alpha_mode {
        AlphaMode::Known(alpha) => {
            let d = 3.0 * alpha - 2.0;
            ((2.0 * alpha - 1.0) / d, alpha / d)
        }
        AlphaMode::Unknown => (0.75, 0.5),
    };
    let base = k as f64 + 1.0;
    (spec.eta_scale * decay(base, a), decay(base, b))
}

/// `(eta_k, gamma_k)` for extrapolated momentum.
pub fn mem_schedule(spec: &ScheduleSpec, k: usize) -> (f64, f64) {
    let p = spec.p as f64;
    let (a, b) = match spec.alpha_mode {
        AlphaMode::Known(alpha) => {
            let d = p * (2.0 * alpha - 1.0) + alpha - 1.0;
            ((p * alpha + alpha - 1.0) / d, p * alpha / d)
        }
        AlphaMode::Unknown => {
            let d = 3.0 * p + 1.0;
            ((2.0 * p + 1.0) / d, 2.0 * p / d)
        }
    };
    let base = k as f64 + 4.0;
    (spec.eta_scale * decay(base, a), decay(base, b))
}

/// `(eta_k, theta_k)` for recursive momentum; both share one exponent.
pub fn rm_schedule(spec: &ScheduleSpec, k: usize) -> (f64, f64) {
    let c = match spec.alpha_mode {
        AlphaMode::Known(alpha) => alpha / (2.0 * alpha - 1.0),
        AlphaMode::Unknown => 2.0 / 3.0,
    };
    let theta = decay(k as f64 + 1.0, c);
    (spec.eta_scale * theta, theta)
}

/// Potential weight `p_k`.
///
/// In [`AlphaMode::Unknown`] the exponent still depends on the true tail
/// exponent, so the caller supplies a working value (default 1.5).
pub fn pk_schedule(spec: &ScheduleSpec, k: usize, working_alpha: Option<f64>) -> f64 {
    let alpha = spec
        .alpha_mode
        .known()
        .or(working_alpha)
        .unwrap_or(DEFAULT_WORKING_ALPHA);
    let known = matches!(spec.alpha_mode, AlphaMode::Known(_));
    let p = spec.p as f64;
    let am1sq = (alpha - 1.0) * (alpha - 1.0);
    let (base, exponent) = match (spec.method, known) {
        (Method::Pm, true) => (k as f64 + 1.0, (alpha * alpha - 3.0 * alpha + 2.0) / (3.0 * alpha - 2.0)),
        (Method::Pm, false) => (
            k as f64 + 1.0,
            (2.0 * alpha * alpha - 5.0 * alpha + 2.0) / (4.0 * alpha),
        ),
        (Method::Mem, true) => (
            k as f64 + 4.0,
            (p * am1sq - alpha + 1.0) / (p * (2.0 * alpha - 1.0) + alpha - 1.0),
        ),
        (Method::Mem, false) => (
            k as f64 + 4.0,
            (2.0 * p * am1sq - alpha) / (3.0 * p * alpha + alpha),
        ),
        (Method::Rm, true) => (k as f64 + 1.0, am1sq / (2.0 * alpha - 1.0)),
        (Method::Rm, false) => (k as f64 + 1.0, 2.0 * am1sq / (3.0 * alpha)),
    };
    base.powf(exponent)
}
