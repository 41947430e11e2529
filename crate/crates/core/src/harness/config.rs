use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizers::{SampleMode, StepRule};
use crate::problems::{DEFAULT_BATCH_SIZE, TargetColumn};
use crate::schedules::{AlphaMode, Method, ScheduleSpec};

/// Tail exponent assumed by the default schedules.
pub const DEFAULT_ALPHA: f64 = 2.0;

/// Default step-size multiplier for normalized methods.
pub const NORMALIZED_ETA_SCALE: f64 = 0.7;
/// Default step-size multiplier for the unnormalized baselines.
pub const UNNORMALIZED_ETA_SCALE: f64 = 0.07;

/// Default step-size multiplier for a step rule. Selected by median final
/// objective on synthetic data fitting (n = 50, m = 200, 500 oracle calls,
/// seed 1000).
pub fn default_eta_scale(_method: Method, rule: StepRule) -> f64 {
    match rule {
        StepRule::Normalized => NORMALIZED_ETA_SCALE,
        StepRule::Unnormalized => UNNORMALIZED_ETA_SCALE,
    }
}

/// One optimizer in an experiment, labelled `nsfom-pm`, `sfom-rm` and so on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodSpec {
    pub rule: StepRule,
    pub spec: ScheduleSpec,
}

impl MethodSpec {
    pub fn new(method: Method, rule: StepRule, alpha_mode: AlphaMode, p: u32, eta_scale: Option<f64>) -> Result<Self> {
        let scale = eta_scale.unwrap_or_else(|| default_eta_scale(method, rule));
        Ok(MethodSpec {
            rule,
            spec: ScheduleSpec::new(method, alpha_mode, p, scale)?,
        })
    }

    pub fn method(&self) -> Method {
        self.spec.method
    }

    pub fn label(&self) -> String {
        let prefix = match self.rule {
            StepRule::Normalized => "nsfom",
            StepRule::Unnormalized => "sfom",
        };
        format!("{prefix}-{}", self.spec.method.tag())
    }
}

/// Parses `nsfom-pm`-style labels into `(method, rule)`.
pub fn parse_method_label(label: &str) -> Result<(Method, StepRule)> {
    let label = label.trim().to_ascii_lowercase();
    let (rule, tag) = if let Some(t) = label.strip_prefix("nsfom-") {
        (StepRule::Normalized, t)
    } else if let Some(t) = label.strip_prefix("sfom-") {
        (StepRule::Unnormalized, t)
    } else {
        return Err(Error::precondition(format!("unknown method label '{label}'")));
    };
    Ok((tag.parse()?, rule))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProblemSpec {
    /// Sigmoid data fitting on synthetic Gaussian data with additive heavy-tailed noise.
    SyntheticDf { n: usize, m: usize },
    /// Robust regression on a CSV file with mini-batch sampling.
    CsvRr {
        path: PathBuf,
        #[serde(with = "target_serde")]
        target: TargetColumn,
        batch_size: usize,
    },
    /// `‖x‖² / 2` with additive heavy-tailed noise.
    Quadratic { n: usize },
}

mod target_serde {
    use super::TargetColumn;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &TargetColumn, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&t.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<TargetColumn, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl ProblemSpec {
    pub fn csv(path: impl Into<PathBuf>, target: TargetColumn) -> Self {
        ProblemSpec::CsvRr {
            path: path.into(),
            target,
            batch_size: DEFAULT_BATCH_SIZE,
        }
    }
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemSpec::SyntheticDf { .. } => "synthetic-df",
            ProblemSpec::CsvRr { .. } => "csv-rr",
            ProblemSpec::Quadratic { .. } => "quadratic",
        })
    }
}

/// Problem family names accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    SyntheticDf,
    CsvRr,
    Quadratic,
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "synthetic-df" => Ok(ProblemKind::SyntheticDf),
            "csv-rr" => Ok(ProblemKind::CsvRr),
            "quadratic" => Ok(ProblemKind::Quadratic),
            other => Err(Error::precondition(format!("unknown problem '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub methods: Vec<MethodSpec>,
    pub problem: ProblemSpec,
    /// Metric horizon in oracle calls.
    pub k: usize,
    pub replications: usize,
    pub base_seed: u64,
    /// Oracle calls per run used for the shared `f*` search; defaults to `ceil(1.2 k)`.
    pub fstar_budget: Option<usize>,
    pub sample_mode: SampleMode,
    /// Worker threads; `0` lets the pool decide. Does not affect output.
    #[serde(skip)]
    pub workers: usize,
    #[serde(skip)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(methods: Vec<MethodSpec>, problem: ProblemSpec, k: usize, replications: usize, base_seed: u64) -> Self {
        ExperimentConfig {
            methods,
            problem,
            k,
            replications,
            base_seed,
            fstar_budget: None,
            sample_mode: SampleMode::Shared,
            workers: 0,
            output_dir: None,
        }
    }

    pub fn fstar_budget(&self) -> usize {
        self.fstar_budget
            .unwrap_or_else(|| (1.2 * self.k as f64).ceil() as usize)
            .max(self.k)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::precondition("K must be at least 1"));
        }
        if self.replications == 0 {
            return Err(Error::precondition("replications must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(Error::precondition("at least one method is required"));
        }
        let mut labels: Vec<String> = self.methods.iter().map(MethodSpec::label).collect();
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::precondition("methods list contains duplicates"));
        }
        match &self.problem {
            ProblemSpec::SyntheticDf { n, m } if *n == 0 || *m == 0 => {
                Err(Error::precondition("synthetic problem needs n, m >= 1"))
            }
            ProblemSpec::Quadratic { n } if *n == 0 => Err(Error::precondition("quadratic needs n >= 1")),
            ProblemSpec::CsvRr { batch_size, .. } if *batch_size == 0 => {
                Err(Error::precondition("batch size must be at least 1"))
            }
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_round_trip() {
        for label in ["nsfom-pm", "nsfom-em", "nsfom-rm", "sfom-pm", "sfom-em", "sfom-rm"] {
            let (method, rule) = parse_method_label(label).unwrap();
            let spec = MethodSpec::new(method, rule, AlphaMode::Known(2.0), 2, None).unwrap();
            assert_eq!(spec.label(), label);
        }
        assert!(parse_method_label("adam").is_err());
        assert!(parse_method_label("nsfom-xx").is_err());
    }

    #[test]
    fn fstar_budget_default() {
        let m = MethodSpec::new(Method::Pm, StepRule::Normalized, AlphaMode::Unknown, 2, None).unwrap();
        let cfg = ExperimentConfig::new(vec![m], ProblemSpec::Quadratic { n: 2 }, 500, 1, 0);
        assert_eq!(cfg.fstar_budget(), 600);
    }

    #[test]
    fn validation() {
        let m = MethodSpec::new(Method::Pm, StepRule::Normalized, AlphaMode::Unknown, 2, None).unwrap();
        let ok = ExperimentConfig::new(vec![m], ProblemSpec::Quadratic { n: 2 }, 5, 1, 0);
        assert!(ok.validate().is_ok());
        let mut bad = ok.clone();
        bad.k = 0;
        assert!(bad.validate().is_err());
        let mut bad = ok.clone();
        bad.methods.push(m);
        assert!(bad.validate().is_err());
        let mut bad = ok;
        bad.replications = 0;
        assert!(bad.validate().is_err());
    }
}
