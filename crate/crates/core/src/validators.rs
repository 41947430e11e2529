//! Executable checks of the scalar inequalities behind the convergence
//! analysis, plus randomized sweeps over their domains.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extrapolation::compute_weights;
use crate::rng::RngStream;
use crate::schedules::{pk_schedule, validate_alpha, Method, ScheduleSpec};
use crate::vector::DenseVector;

/// Outcome of one inequality `lhs <= rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`.
    pub slack: f64,
    pub tolerance: f64,
    /// `slack >= -tolerance`.
    pub holds: bool,
}

impl InequalityReport {
    pub fn new(lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let slack = rhs - lhs;
        InequalityReport {
            lhs,
            rhs,
            slack,
            tolerance,
            holds: slack >= -tolerance,
        }
    }

    fn relative(lhs: f64, rhs: f64) -> Self {
        Self::new(lhs, rhs, 1e-12 * (1.0 + rhs.abs()))
    }
}

/// `‖u+v‖^α <= ‖u‖^α + α‖u‖^{α-2} u^T v + 2‖v‖^α`. The middle term is 0 when `u = 0`.
pub fn check_power_expansion(u: &DenseVector, v: &DenseVector, alpha: f64) -> Result<InequalityReport> {
    validate_alpha(alpha)?;
    v.check_dim(u.len())?;
    let nu = u.norm();
    let middle = if nu > 0.0 {
        alpha * nu.powf(alpha - 2.0) * u.dot(v)
    } else {
        0.0
    };
    let lhs = u.add(v).norm_pow(alpha);
    let rhs = u.norm_pow(alpha) + middle + 2.0 * v.norm_pow(alpha);
    Ok(InequalityReport::relative(lhs, rhs))
}

/// `‖u+v‖^α <= (1+c)‖u‖^α + (2 + (α-1)^{α-1} c^{1-α})‖v‖^α`.
pub fn check_power_expansion_c(u: &DenseVector, v: &DenseVector, alpha: f64, c: f64) -> Result<InequalityReport> {
    validate_alpha(alpha)?;
    v.check_dim(u.len())?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::precondition(format!("c must be positive, got {c}")));
    }
    let coef_v = 2.0 + (alpha - 1.0).powf(alpha - 1.0) * c.powf(1.0 - alpha);
    let lhs = u.add(v).norm_pow(alpha);
    let rhs = (1.0 + c) * u.norm_pow(alpha) + coef_v * v.norm_pow(alpha);
    Ok(InequalityReport::relative(lhs, rhs))
}

/// `sum_{r=a}^{b} r^{-β}` against the integral of `t^{-β}` over `[a - 1/2, b + 1/2]`.
pub fn check_series_bound(a: u64, b: u64, beta: f64) -> Result<InequalityReport> {
    if a < 1 || b < a {
        return Err(Error::precondition(format!("need 1 <= a <= b, got a = {a}, b = {b}")));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::precondition(format!("beta must be positive, got {beta}")));
    }
    let lhs: f64 = (a..=b).rev().map(|r| (r as f64).powf(-beta)).sum();
    let lo = a as f64 - 0.5;
    let hi = b as f64 + 0.5;
    let rhs = if beta == 1.0 {
        hi.ln() - lo.ln()
    } else {
        (hi.powf(1.0 - beta) - lo.powf(1.0 - beta)) / (1.0 - beta)
    };
    Ok(InequalityReport::relative(lhs, rhs))
}

/// Smallest admissible `v` for [`check_rate_lemma`]: `(ln(1/u) / u)^{1/β}`.
pub fn rate_lemma_threshold(beta: f64, u: f64) -> f64 {
    ((1.0 / u).ln() / u).powf(1.0 / beta)
}

/// `v^{-β} ln v <= 2u/β` for `v` at or above [`rate_lemma_threshold`].
pub fn check_rate_lemma(beta: f64, u: f64, v: f64) -> Result<InequalityReport> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::precondition(format!("beta must lie in (0, 1), got {beta}")));
    }
    if !(u > 0.0 && u < (-1.0f64).exp()) {
        return Err(Error::precondition(format!("u must lie in (0, 1/e), got {u}")));
    }
    let threshold = rate_lemma_threshold(beta, u);
    if v.is_nan() || v < threshold {
        return Err(Error::precondition(format!("v = {v} is below the threshold {threshold}")));
    }
    let lhs = v.powf(-beta) * v.ln();
    Ok(InequalityReport::new(lhs, 2.0 * u / beta, 0.0))
}

/// `1 - sum a <= prod (1 - a) <= 1 / (1 + sum a)`, returned as `(lower, upper)`.
pub fn check_weierstrass(a: &[f64]) -> Result<(InequalityReport, InequalityReport)> {
    if a.is_empty() || a.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
        return Err(Error::precondition("weights must be a nonempty list in (0, 1)"));
    }
    let sum: f64 = a.iter().sum();
    let prod: f64 = a.iter().map(|x| 1.0 - x).product();
    let tol = |r: f64| 1e-14 * r.abs().max(1.0);
    let lower = InequalityReport::new(1.0 - sum, prod, tol(prod));
    let upper_rhs = 1.0 / (1.0 + sum);
    let upper = InequalityReport::new(prod, upper_rhs, tol(upper_rhs));
    Ok((lower, upper))
}

/// Truncated product `prod_{1 <= s <= S, s != t} (1 - t^2 / s^2)`; tends to `(-1)^{t-1} / 2`.
pub fn sinc_product(t: u64, truncation: u64) -> Result<f64> {
    if t == 0 {
        return Err(Error::precondition("t must be a positive integer"));
    }
    let t2 = (t * t) as f64;
    if truncation < 1000 || (truncation as f64) < 10.0 * t2 {
        return Err(Error::precondition(format!(
            "truncation {truncation} must be at least max(1000, 10 t^2)"
        )));
    }
    let mut prod = 1.0;
    for s in (1..=truncation).filter(|&s| s != t) {
        let s = s as f64;
        prod *= (s - t as f64) * (s + t as f64) / (s * s);
    }
    Ok(prod)
}

/// `f(x+) <= f(x) - η‖∇f(x)‖ + 2η‖∇f(x) - m‖ + L₁η²/2` with absolute slack 1e-9.
pub fn check_descent_step(
    f_x: f64,
    f_next: f64,
    grad_norm: f64,
    grad_error: f64,
    eta: f64,
    l1: f64,
) -> InequalityReport {
    let rhs = f_x - eta * grad_norm + 2.0 * eta * grad_error + 0.5 * l1 * eta * eta;
    InequalityReport::new(f_next, rhs, 1e-9)
}

/// `(1 - Σθ_k) p_{k+1} <= (1 - Σθ_k / 10) p_k` for extrapolated momentum.
pub fn check_mem_potential_contraction(spec: &ScheduleSpec, k: usize, working_alpha: Option<f64>) -> Result<InequalityReport> {
    if spec.method != Method::Mem {
        return Err(Error::precondition("contraction check applies to extrapolated momentum"));
    }
    let (_, gamma) = spec.at(k);
    let sum = compute_weights(gamma, spec.q())?.theta_sum();
    let lhs = (1.0 - sum) * pk_schedule(spec, k + 1, working_alpha);
    let rhs = (1.0 - sum / 10.0) * pk_schedule(spec, k, working_alpha);
    Ok(InequalityReport::relative(lhs, rhs))
}

/// `p_{k+1} / p_k <= 1 + 1 / (3 (k + 1))` for recursive momentum.
pub fn check_rm_potential_ratio(spec: &ScheduleSpec, k: usize, working_alpha: Option<f64>) -> Result<InequalityReport> {
    if spec.method != Method::Rm {
        return Err(Error::precondition("ratio check applies to recursive momentum"));
    }
    let lhs = pk_schedule(spec, k + 1, working_alpha) / pk_schedule(spec, k, working_alpha);
    Ok(InequalityReport::relative(lhs, 1.0 + 1.0 / (3.0 * (k as f64 + 1.0))))
}

/// Tally of a randomized sweep. `counterexample` holds the first failing
/// input and report as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub name: String,
    pub trials: usize,
    pub failures: usize,
    pub counterexample: Option<String>,
}

impl SweepOutcome {
    fn new(name: &str) -> Self {
        SweepOutcome {
            name: name.to_string(),
            trials: 0,
            failures: 0,
            counterexample: None,
        }
    }

    fn record<T: Serialize>(&mut self, input: &T, report: &InequalityReport) {
        self.trials += 1;
        if !report.holds {
            self.failures += 1;
            if self.counterexample.is_none() {
                self.counterexample = serde_json::to_string(&(input, report)).ok();
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.trials > 0
    }
}

fn random_vector(rng: &mut RngStream, n: usize) -> DenseVector {
    let scale = 10f64.powf(6.0 * rng.uniform_open01() - 3.0);
    (0..n).map(|_| scale * rng.standard_normal()).collect::<Vec<_>>().into()
}

/// `trials` random pairs in R^5 for each `alpha`.
pub fn sweep_power_expansion(trials: usize, alphas: &[f64], seed: u64) -> Result<SweepOutcome> {
    let mut out = SweepOutcome::new("power_expansion");
    let mut rng = RngStream::new(seed, 0);
    for &alpha in alphas {
        for _ in 0..trials {
            let (u, v) = (random_vector(&mut rng, 5), random_vector(&mut rng, 5));
            let r = check_power_expansion(&u, &v, alpha)?;
            out.record(&(u, v, alpha), &r);
        }
    }
    Ok(out)
}

pub fn sweep_power_expansion_c(trials: usize, alphas: &[f64], cs: &[f64], seed: u64) -> Result<SweepOutcome> {
    let mut out = SweepOutcome::new("power_expansion_c");
    let mut rng = RngStream::new(seed, 1);
    for &alpha in alphas {
        for &c in cs {
            for _ in 0..trials {
                let (u, v) = (random_vector(&mut rng, 5), random_vector(&mut rng, 5));
                let r = check_power_expansion_c(&u, &v, alpha, c)?;
                out.record(&(u, v, alpha, c), &r);
            }
        }
    }
    Ok(out)
}

pub fn sweep_series_bound(trials: usize, seed: u64) -> Result<SweepOutcome> {
    let mut out = SweepOutcome::new("series_bound");
    let mut rng = RngStream::new(seed, 2);
    for _ in 0..trials {
        let a = 1 + rng.index(1000) as u64;
        let b = a + rng.index(2000) as u64;
        let beta = if rng.index(8) == 0 { 1.0 } else { 3.0 * rng.uniform_open01() };
        let r = check_series_bound(a, b, beta)?;
        out.record(&(a, b, beta), &r);
    }
    Ok(out)
}

pub fn sweep_rate_lemma(trials: usize, seed: u64) -> Result<SweepOutcome> {
    let mut out = SweepOutcome::new("rate_lemma");
    let mut rng = RngStream::new(seed, 3);
    let inv_e = (-1.0f64).exp();
    for _ in 0..trials {
        let beta = 0.05 + 0.9 * rng.uniform_open01();
        let u = 1e-4f64.powf(rng.uniform_open01()) * inv_e * 0.999;
        let v = rate_lemma_threshold(beta, u) * (1.0 + 100.0 * rng.uniform_open01().powi(3));
        if !v.is_finite() {
            continue;
        }
        let r = check_rate_lemma(beta, u, v)?;
        out.record(&(beta, u, v), &r);
    }
    Ok(out)
}

pub fn sweep_weierstrass(trials: usize, seed: u64) -> Result<SweepOutcome> {
    let mut out = SweepOutcome::new("weierstrass");
    let mut rng = RngStream::new(seed, 4);
    for _ in 0..trials {
        let len = 1 + rng.index(10);
        let a: Vec<f64> = (0..len).map(|_| rng.uniform_open01()).collect();
        let (lo, hi) = check_weierstrass(&a)?;
        out.record(&a, &lo);
        out.record(&a, &hi);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedules::AlphaMode;
    use approx::assert_abs_diff_eq;

    fn v(c: &[f64]) -> DenseVector {
        DenseVector::new(c.to_vec())
    }

    #[test]
    fn power_expansion_alpha_two() {
        let (u, w) = (v(&[1.0, 2.0]), v(&[-0.5, 3.0]));
        let r = check_power_expansion(&u, &w, 2.0).unwrap();
        assert!(r.holds);
        assert_abs_diff_eq!(r.slack, w.norm_pow(2.0), epsilon = 1e-12);
    }

    #[test]
    fn power_expansion_zero_v() {
        let r = check_power_expansion(&v(&[1.0, 2.0]), &v(&[0.0, 0.0]), 1.5).unwrap();
        assert!(r.holds);
        assert_abs_diff_eq!(r.slack, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn power_expansion_zero_u_uses_limit() {
        let r = check_power_expansion(&v(&[0.0, 0.0]), &v(&[1.0, 1.0]), 1.3).unwrap();
        assert!(r.holds);
    }

    #[test]
    fn power_expansion_c_edges() {
        let w = v(&[0.3, -0.4]);
        let r = check_power_expansion_c(&v(&[0.0, 0.0]), &w, 1.5, 1.0).unwrap();
        assert!(r.holds && r.lhs == w.norm_pow(1.5));
        let u = v(&[2.0, 1.0]);
        let r = check_power_expansion_c(&u, &v(&[0.0, 0.0]), 1.5, 0.01).unwrap();
        assert!(r.holds);
        assert_abs_diff_eq!(r.rhs, 1.01 * r.lhs, epsilon = 1e-12);
        assert!(check_power_expansion_c(&u, &w, 1.5, 0.0).is_err());
    }

    #[test]
    fn series_examples() {
        let r = check_series_bound(1, 1, 1.0).unwrap();
        assert_eq!(r.lhs, 1.0);
        assert_abs_diff_eq!(r.rhs, 3f64.ln(), epsilon = 1e-15);
        let r = check_series_bound(1, 10_000, 2.0).unwrap();
        assert!(r.holds);
        assert_abs_diff_eq!(r.rhs, 2.0 - 1.0 / 10_000.5, epsilon = 1e-12);
        let r = check_series_bound(2, 2, 0.5).unwrap();
        assert_abs_diff_eq!(r.lhs, 0.5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(r.rhs, 0.7127, epsilon = 1e-4);
        assert!(r.holds);
        assert!(check_series_bound(0, 3, 1.0).is_err());
        assert!(check_series_bound(4, 3, 1.0).is_err());
    }

    #[test]
    fn series_slack_nonnegative_for_flat_summands() {
        for beta in [0.01, 0.05, 0.1] {
            assert!(check_series_bound(3, 500, beta).unwrap().slack >= 0.0);
        }
    }

    #[test]
    fn rate_lemma_examples() {
        let t = rate_lemma_threshold(0.25, 0.01);
        assert!(check_rate_lemma(0.25, 0.01, t).unwrap().holds);
        let t = rate_lemma_threshold(0.5, 0.1);
        let r = check_rate_lemma(0.5, 0.1, 10.0 * t).unwrap();
        assert!(r.holds && r.slack > 0.1 * r.rhs);
        assert!(check_rate_lemma(0.5, 0.5, 1e6).is_err());
        assert!(check_rate_lemma(0.5, 0.1, 0.5 * t).is_err());
    }

    #[test]
    fn weierstrass_examples() {
        let (lo, hi) = check_weierstrass(&[0.3]).unwrap();
        assert_abs_diff_eq!(lo.slack, 0.0, epsilon = 1e-15);
        assert!(lo.holds && hi.holds);
        let (lo, hi) = check_weierstrass(&[0.1, 0.1]).unwrap();
        assert_abs_diff_eq!(lo.lhs, 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(lo.rhs, 0.81, epsilon = 1e-15);
        assert_abs_diff_eq!(hi.rhs, 1.0 / 1.2, epsilon = 1e-15);
        assert!(lo.holds && hi.holds);
        assert!(check_weierstrass(&[1.0]).is_err());
    }

    #[test]
    fn sinc_examples() {
        assert_abs_diff_eq!(sinc_product(1, 100_000).unwrap(), 0.5, epsilon = 1e-4);
        assert_abs_diff_eq!(sinc_product(2, 100_000).unwrap(), -0.5, epsilon = 5e-4);
        assert_abs_diff_eq!(sinc_product(3, 1_000_000).unwrap(), 0.5, epsilon = 1e-4);
        assert!(sinc_product(2, 999).is_err());
        assert!(sinc_product(20, 3000).is_err());
    }

    #[test]
    fn sinc_error_halves_with_doubling() {
        for t in 1..=3u64 {
            let limit = if t % 2 == 1 { 0.5 } else { -0.5 };
            let e1 = (sinc_product(t, 50_000).unwrap() - limit).abs();
            let e2 = (sinc_product(t, 100_000).unwrap() - limit).abs();
            assert!((e1 / e2 - 2.0).abs() < 0.05, "t = {t}: {e1} / {e2}");
            assert!(e2 <= (t * t) as f64 / 100_000.0);
        }
    }

    #[test]
    fn descent_step_on_quadratic() {
        let r = check_descent_step(0.5, 0.0, 1.0, 0.0, 1.0, 1.0);
        assert!(r.holds);
        assert_abs_diff_eq!(r.slack, 0.0, epsilon = 1e-15);
        assert!(!check_descent_step(0.5, 0.6, 1.0, 0.0, 1.0, 1.0).holds);
    }

    #[test]
    fn sweeps_pass() {
        for s in [
            sweep_power_expansion(2_000, &[1.1, 1.5, 1.9, 2.0], 1).unwrap(),
            sweep_power_expansion_c(500, &[1.1, 1.5, 1.9], &[0.01, 1.0, 100.0], 2).unwrap(),
            sweep_series_bound(500, 3).unwrap(),
            sweep_rate_lemma(2_000, 4).unwrap(),
            sweep_weierstrass(2_000, 5).unwrap(),
        ] {
            assert!(s.passed(), "{s:?}");
        }
    }

    #[test]
    fn potential_weight_conditions() {
        for alpha in [1.1, 1.5, 1.9, 2.0] {
            for p in 2..=5 {
                let known = ScheduleSpec::new(Method::Mem, AlphaMode::Known(alpha), p, 1.0).unwrap();
                let unknown = ScheduleSpec::new(Method::Mem, AlphaMode::Unknown, p, 1.0).unwrap();
                for k in (0..2000).chain([10_000, 100_000]) {
                    assert!(check_mem_potential_contraction(&known, k, None).unwrap().holds, "{alpha} {p} {k}");
                    assert!(check_mem_potential_contraction(&unknown, k, Some(alpha)).unwrap().holds, "{alpha} {p} {k}");
                }
            }
            let rm = ScheduleSpec::new(Method::Rm, AlphaMode::Known(alpha), 2, 1.0).unwrap();
            let rmu = ScheduleSpec::new(Method::Rm, AlphaMode::Unknown, 2, 1.0).unwrap();
            for k in 0..2000 {
                assert!(check_rm_potential_ratio(&rm, k, None).unwrap().holds);
                assert!(check_rm_potential_ratio(&rmu, k, Some(alpha)).unwrap().holds);
            }
        }
    }
}
