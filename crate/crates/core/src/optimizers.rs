//! Normalized stochastic first-order methods with Polyak, multi-extrapolated
//! and recursive momentum, plus their unnormalized counterparts.
//!
//! Each method keeps a small state struct; one `step` consumes the schedule
//! values for the current iteration and a [`SampleStream`]. When the search
//! direction is degenerate the iterate is held in place while `k` and the
//! schedule bookkeeping still advance.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extrapolation::{compute_weights, extrapolate, ExtrapolationWeights};
use crate::oracle::{GradientOracle, SampleStream};
use crate::record::TrialRecord;
use crate::rng::RngStream;
use crate::step::{normalized_step, unnormalized_step};
use crate::vector::DenseVector;

pub use crate::schedules::{Method, ScheduleSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StepRule {
    /// `x - eta m / ‖m‖`
    Normalized,
    /// `x - eta m`
    Unnormalized,
}

impl StepRule {
    fn apply(self, x: &DenseVector, m: &DenseVector, eta: f64) -> Result<DenseVector> {
        match self {
            StepRule::Normalized => normalized_step(x, m, eta),
            StepRule::Unnormalized => unnormalized_step(x, m, eta),
        }
    }
}

/// How extrapolated momentum samples noise across its `q` points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum SampleMode {
    /// One realization shared by all extrapolated points.
    #[default]
    Shared,
    /// A fresh realization per point.
    Independent,
}

impl FromStr for SampleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shared" => Ok(SampleMode::Shared),
            "independent" => Ok(SampleMode::Independent),
            other => Err(Error::precondition(format!("unknown sample mode '{other}'"))),
        }
    }
}

impl fmt::Display for SampleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SampleMode::Shared => "shared",
            SampleMode::Independent => "independent",
        })
    }
}

/// What one step did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOutcome {
    pub oracle_calls: usize,
    /// The direction was too small to normalize and `x` was held.
    pub degenerate: bool,
}

fn advance(rule: StepRule, x: &DenseVector, m: &DenseVector, eta: f64) -> Result<(DenseVector, bool)> {
    match rule.apply(x, m, eta) {
        Ok(next) => Ok((next, false)),
        Err(Error::DegenerateDirection) => Ok((x.clone(), true)),
        Err(e) => Err(e),
    }
}

/// Polyak momentum state `(k, x^k, m^{k-1}, theta_{k-1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct PmState {
    pub k: usize,
    pub x: DenseVector,
    pub m: DenseVector,
    pub theta_prev: f64,
}

impl PmState {
    pub fn new(x0: DenseVector) -> Self {
        let n = x0.len();
        PmState {
            k: 0,
            x: x0,
            m: DenseVector::zeros(n),
            theta_prev: 1.0,
        }
    }

    /// `m^k = (1 - theta_{k-1}) m^{k-1} + theta_{k-1} G(x^k; xi^k)`, then the step.
    pub fn step(
        &mut self,
        oracle: &dyn GradientOracle,
        samples: &mut SampleStream,
        rule: StepRule,
        eta_k: f64,
        theta_k: f64,
    ) -> Result<StepOutcome> {
        let draw = samples.draw();
        let g = oracle.gradient_under(&self.x, &draw);
        let th = self.theta_prev;
        self.m.scale_mut(1.0 - th);
        self.m.axpy(th, &g);
        let (next, degenerate) = advance(rule, &self.x, &self.m, eta_k)?;
        self.x = next;
        self.theta_prev = theta_k;
        self.k += 1;
        Ok(StepOutcome {
            oracle_calls: 1,
            degenerate,
        })
    }
}

/// Extrapolated momentum state. `weights_prev` holds the weights of the
/// previous iteration (the initial sentinel at `k = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct MemState {
    pub k: usize,
    pub x: DenseVector,
    pub x_prev: DenseVector,
    pub m: DenseVector,
    pub weights_prev: ExtrapolationWeights,
}

impl MemState {
    pub fn new(x0: DenseVector, q: usize) -> Result<Self> {
        let n = x0.len();
        Ok(MemState {
            k: 0,
            x_prev: x0.clone(),
            x: x0,
            m: DenseVector::zeros(n),
            weights_prev: ExtrapolationWeights::initial(q)?,
        })
    }

    pub fn q(&self) -> usize {
        self.weights_prev.q()
    }

    /// Extrapolates with the previous gammas, mixes the momentum with the
    /// previous thetas, steps, then stores `weights_k` for the next call.
    pub fn step(
        &mut self,
        oracle: &dyn GradientOracle,
        samples: &mut SampleStream,
        rule: StepRule,
        mode: SampleMode,
        eta_k: f64,
        weights_k: ExtrapolationWeights,
    ) -> Result<StepOutcome> {
        if weights_k.q() != self.q() {
            return Err(Error::DimensionMismatch {
                expected: self.q(),
                got: weights_k.q(),
            });
        }
        let prev = &self.weights_prev;
        let shared = match mode {
            SampleMode::Shared => Some(samples.draw()),
            SampleMode::Independent => None,
        };
        let mut next_m = self.m.scaled(1.0 - prev.theta_sum());
        for (gamma, theta) in prev.gammas().iter().zip(prev.thetas()) {
            let z = extrapolate(&self.x, &self.x_prev, *gamma)?;
            let g = match &shared {
                Some(draw) => oracle.gradient_under(&z, draw),
                None => oracle.gradient_under(&z, &samples.draw()),
            };
            next_m.axpy(*theta, &g);
        }
        self.m = next_m;
        let (next, degenerate) = advance(rule, &self.x, &self.m, eta_k)?;
        self.x_prev = std::mem::replace(&mut self.x, next);
        self.weights_prev = weights_k;
        self.k += 1;
        Ok(StepOutcome {
            oracle_calls: self.q(),
            degenerate,
        })
    }
}

/// Recursive momentum state `(k, x^k, x^{k-1}, m^{k-1}, theta_{k-1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct RmState {
    pub k: usize,
    pub x: DenseVector,
    pub x_prev: DenseVector,
    pub m: DenseVector,
    pub theta_prev: f64,
}

impl RmState {
    pub fn new(x0: DenseVector) -> Self {
        let n = x0.len();
        RmState {
            k: 0,
            x_prev: x0.clone(),
            x: x0,
            m: DenseVector::zeros(n),
            theta_prev: 1.0,
        }
    }

    fn next_calls(&self) -> usize {
        if self.theta_prev < 1.0 {
            2
        } else {
            1
        }
    }

    /// `m^k = (1 - theta_{k-1}) m^{k-1} + G(x^k; xi^k) - (1 - theta_{k-1}) G(x^{k-1}; xi^k)`
    /// with one realization `xi^k` used at both points.
    pub fn step(
        &mut self,
        oracle: &dyn GradientOracle,
        samples: &mut SampleStream,
        rule: StepRule,
        eta_k: f64,
        theta_k: f64,
    ) -> Result<StepOutcome> {
        let draw = samples.draw();
        let calls = self.next_calls();
        let g_new = oracle.gradient_under(&self.x, &draw);
        let keep = 1.0 - self.theta_prev;
        self.m = if calls == 2 {
            let g_old = oracle.gradient_under(&self.x_prev, &draw);
            let mut m = self.m.sub(&g_old);
            m.scale_mut(keep);
            m.axpy(1.0, &g_new);
            m
        } else {
            g_new
        };
        let (next, degenerate) = advance(rule, &self.x, &self.m, eta_k)?;
        self.x_prev = std::mem::replace(&mut self.x, next);
        self.theta_prev = theta_k;
        self.k += 1;
        Ok(StepOutcome {
            oracle_calls: calls,
            degenerate,
        })
    }
}

/// Any of the three method states.
#[derive(Debug, Clone, PartialEq)]
pub enum MethodState {
    Pm(PmState),
    Mem(MemState),
    Rm(RmState),
}

impl MethodState {
    pub fn new(method: Method, x0: DenseVector, q: usize) -> Result<Self> {
        Ok(match method {
            Method::Pm => MethodState::Pm(PmState::new(x0)),
            Method::Mem => MethodState::Mem(MemState::new(x0, q)?),
            Method::Rm => MethodState::Rm(RmState::new(x0)),
        })
    }

    pub fn k(&self) -> usize {
        match self {
            MethodState::Pm(s) => s.k,
            MethodState::Mem(s) => s.k,
            MethodState::Rm(s) => s.k,
        }
    }

    pub fn x(&self) -> &DenseVector {
        match self {
            MethodState::Pm(s) => &s.x,
            MethodState::Mem(s) => &s.x,
            MethodState::Rm(s) => &s.x,
        }
    }

    pub fn momentum(&self) -> &DenseVector {
        match self {
            MethodState::Pm(s) => &s.m,
            MethodState::Mem(s) => &s.m,
            MethodState::Rm(s) => &s.m,
        }
    }

    /// Oracle calls the next step will consume.
    pub fn next_step_calls(&self) -> usize {
        match self {
            MethodState::Pm(_) => 1,
            MethodState::Mem(s) => s.q(),
            MethodState::Rm(s) => s.next_calls(),
        }
    }

    /// One step at the state's current `k` with schedule values from `spec`.
    pub fn step(
        &mut self,
        oracle: &dyn GradientOracle,
        samples: &mut SampleStream,
        rule: StepRule,
        spec: &ScheduleSpec,
        mode: SampleMode,
    ) -> Result<StepOutcome> {
        let (eta, weight) = spec.at(self.k());
        match self {
            MethodState::Pm(s) => s.step(oracle, samples, rule, eta, weight),
            MethodState::Rm(s) => s.step(oracle, samples, rule, eta, weight),
            MethodState::Mem(s) => {
                let w = compute_weights(weight, s.q())?;
                s.step(oracle, samples, rule, mode, eta, w)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub rule: StepRule,
    pub spec: ScheduleSpec,
    pub sample_mode: SampleMode,
    /// Maximum number of steps `K`.
    pub iterations: usize,
    /// Stop before a step that would push the oracle-call count past this.
    pub max_oracle_calls: Option<usize>,
    /// Emit a record every this many iterations (plus the first and last).
    pub telemetry_every: usize,
}

impl RunConfig {
    pub fn new(rule: StepRule, spec: ScheduleSpec, iterations: usize) -> Self {
        RunConfig {
            rule,
            spec,
            sample_mode: SampleMode::Shared,
            iterations,
            max_oracle_calls: None,
            telemetry_every: 1,
        }
    }

    pub fn method(&self) -> Method {
        self.spec.method
    }
}

/// View of one iterate handed to observers.
#[derive(Debug, Clone, Copy)]
pub struct Iterate<'a> {
    pub k: usize,
    pub x: &'a DenseVector,
    /// Momentum that produced `x` (zero at `k = 0`).
    pub momentum: &'a DenseVector,
    pub oracle_calls: usize,
    pub degenerate: bool,
}

/// Drives a method and calls `observer` on every iterate `x^0, x^1, ...`.
/// Returns the final state and total oracle calls.
pub fn run_observed(
    oracle: &dyn GradientOracle,
    cfg: &RunConfig,
    x0: DenseVector,
    rng: RngStream,
    observer: &mut dyn FnMut(&Iterate<'_>) -> Result<()>,
) -> Result<(MethodState, usize)> {
    if cfg.iterations == 0 {
        return Err(Error::precondition("iteration count K must be at least 1"));
    }
    x0.check_dim(oracle.dim())?;
    let mut samples = SampleStream::new(oracle, rng);
    let mut state = MethodState::new(cfg.method(), x0, cfg.spec.q())?;
    let mut calls = 0;
    observer(&Iterate {
        k: 0,
        x: state.x(),
        momentum: state.momentum(),
        oracle_calls: 0,
        degenerate: false,
    })?;
    for _ in 0..cfg.iterations {
        if let Some(budget) = cfg.max_oracle_calls {
            if calls + state.next_step_calls() > budget {
                break;
            }
        }
        let out = state.step(oracle, &mut samples, cfg.rule, &cfg.spec, cfg.sample_mode)?;
        calls += out.oracle_calls;
        observer(&Iterate {
            k: state.k(),
            x: state.x(),
            momentum: state.momentum(),
            oracle_calls: calls,
            degenerate: out.degenerate,
        })?;
    }
    Ok((state, calls))
}

/// Runs `cfg.iterations` steps and returns telemetry at `k = 0`, every
/// `telemetry_every` iterations, and the final iterate.
pub fn run(
    oracle: &dyn GradientOracle,
    cfg: &RunConfig,
    x0: DenseVector,
    rng: RngStream,
) -> Result<Vec<TrialRecord>> {
    let every = cfg.telemetry_every.max(1);
    let mut records = Vec::new();
    let mut last: Option<TrialRecord> = None;
    let mut observe = |it: &Iterate<'_>| -> Result<()> {
        let rec = TrialRecord {
            k: it.k,
            f_val: oracle.objective(it.x),
            grad_norm: oracle.exact_gradient(it.x).norm(),
            mom_norm: it.momentum.norm(),
            oracle_calls: it.oracle_calls,
        };
        if !(rec.f_val.is_finite() && rec.grad_norm.is_finite() && rec.mom_norm.is_finite()) {
            return Err(Error::NumericalFailure {
                method: cfg.method().to_string(),
                replication: 0,
                k: it.k,
            });
        }
        if it.k.is_multiple_of(every) {
            records.push(rec);
            last = None;
        } else {
            last = Some(rec);
        }
        Ok(())
    };
    run_observed(oracle, cfg, x0, rng, &mut observe)?;
    records.extend(last);
    Ok(records)
}
