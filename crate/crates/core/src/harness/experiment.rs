//! Methods x replications on one problem, shared-`f*` metrics and file output.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::checkpoints::checkpoint_grid;
use crate::harness::config::{ExperimentConfig, MethodSpec, ProblemSpec};
use crate::harness::metrics::{quantile, rel_grad_norm, rel_obj_gap, Summary};
use crate::harness::output::{blob_hash, write_csv_atomic, write_json_atomic};
use crate::harness::qq::export_qq_data;
use crate::optimizers::{run_observed, Iterate, RunConfig, SampleMode};
use crate::oracle::GradientOracle;
use crate::problems::{
    generate_synthetic, load_csv_dataset, AdditiveNoise, DataFitting, DatasetManifest, Quadratic,
    RobustRegression,
};
use crate::rng::RngStream;
use crate::vector::DenseVector;

/// Stream that generates synthetic problem data.
pub const PROBLEM_STREAM: u64 = u64::MAX;
/// Streams `ITERATE_STREAM_BASE + r` pick the uniformly drawn iterate of replication `r`.
pub const ITERATE_STREAM_BASE: u64 = 1 << 32;
/// Stream for the QQ sampling pass.
pub const QQ_STREAM: u64 = 1 << 33;

enum Instance {
    DataFitting(AdditiveNoise<DataFitting>),
    Quadratic(AdditiveNoise<Quadratic>),
    Robust(RobustRegression),
}

struct Prepared {
    instance: Instance,
    x0: DenseVector,
    dataset: Option<DatasetManifest>,
    dataset_hash: Option<String>,
}

impl Prepared {
    fn oracle(&self) -> &dyn GradientOracle {
        match &self.instance {
            Instance::DataFitting(p) => p,
            Instance::Quadratic(p) => p,
            Instance::Robust(p) => p,
        }
    }

    fn load(cfg: &ExperimentConfig) -> Result<Self> {
        Ok(match &cfg.problem {
            ProblemSpec::SyntheticDf { n, m } => {
                let mut rng = RngStream::new(cfg.base_seed, PROBLEM_STREAM);
                let (problem, _) = generate_synthetic(*n, *m, &mut rng)?;
                Prepared {
                    instance: Instance::DataFitting(AdditiveNoise::new(problem)),
                    x0: DenseVector::zeros(*n),
                    dataset: None,
                    dataset_hash: None,
                }
            }
            ProblemSpec::Quadratic { n } => Prepared {
                instance: Instance::Quadratic(AdditiveNoise::new(Quadratic::isotropic(*n))),
                x0: DenseVector::ones(*n),
                dataset: None,
                dataset_hash: None,
            },
            ProblemSpec::CsvRr {
                path,
                target,
                batch_size,
            } => {
                let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
                let loaded = load_csv_dataset(path, target, *batch_size)?;
                let n = loaded.problem.n();
                Prepared {
                    instance: Instance::Robust(loaded.problem),
                    x0: DenseVector::zeros(n),
                    dataset: Some(loaded.manifest),
                    dataset_hash: Some(blob_hash(&bytes)),
                }
            }
        })
    }
}

/// Per-iterate telemetry kept for one run.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Sample {
    k: usize,
    calls: usize,
    f: f64,
    grad_norm: f64,
    mom_norm: f64,
}

struct Trace {
    samples: Vec<Sample>,
    /// Leading iterates, kept only for the QQ pass.
    iterates: Vec<DenseVector>,
}

fn run_one(
    prepared: &Prepared,
    ms: &MethodSpec,
    mode: SampleMode,
    budget: usize,
    seed: u64,
    replication: usize,
    keep_iterates: usize,
) -> Result<Trace> {
    let oracle = prepared.oracle();
    let mut rc = RunConfig::new(ms.rule, ms.spec, budget);
    rc.sample_mode = mode;
    rc.max_oracle_calls = Some(budget);
    let mut samples = Vec::new();
    let mut iterates = Vec::new();
    let mut observe = |it: &Iterate<'_>| -> Result<()> {
        let s = Sample {
            k: it.k,
            calls: it.oracle_calls,
            f: oracle.objective(it.x),
            grad_norm: oracle.exact_gradient(it.x).norm(),
            mom_norm: it.momentum.norm(),
        };
        if !(s.f.is_finite() && s.grad_norm.is_finite() && s.mom_norm.is_finite()) {
            return Err(Error::NumericalFailure {
                method: ms.label(),
                replication,
                k: it.k,
            });
        }
        if iterates.len() < keep_iterates {
            iterates.push(it.x.clone());
        }
        samples.push(s);
        Ok(())
    };
    let rng = RngStream::new(seed, replication as u64);
    run_observed(oracle, &rc, prepared.x0.clone(), rng, &mut observe).map_err(|e| match e {
        Error::NumericalFailure { k, .. } => Error::NumericalFailure {
            method: ms.label(),
            replication,
            k,
        },
        other => other,
    })?;
    Ok(Trace { samples, iterates })
}

/// One row of `<method>.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordRow {
    pub method: String,
    pub replication: usize,
    pub oracle_calls: usize,
    pub k: usize,
    pub f: f64,
    pub rel_obj_gap: f64,
    pub grad_norm: f64,
    pub rel_grad_norm: f64,
    pub mom_norm: f64,
}

/// One row of `<method>.expect.csv`: the two estimators of the expected
/// gradient norm at a uniformly drawn iterate among `x^0..x^{k-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectationRow {
    pub method: String,
    pub replication: usize,
    pub oracle_calls: usize,
    pub k: usize,
    pub avg_grad_norm: f64,
    pub avg_rel_grad_norm: f64,
    pub sampled_grad_norm: f64,
    pub sampled_rel_grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SummaryRow {
    method: String,
    oracle_calls: usize,
    k: usize,
    rel_obj_gap_median: f64,
    rel_obj_gap_iqr: f64,
    rel_grad_norm_median: f64,
    rel_grad_norm_iqr: f64,
    avg_rel_grad_norm_median: f64,
    avg_rel_grad_norm_iqr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub oracle_calls: usize,
    pub k: usize,
    pub rel_obj_gap: Summary,
    pub rel_grad_norm: Summary,
    pub avg_rel_grad_norm: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSeries {
    pub label: String,
    pub points: Vec<SeriesPoint>,
}

impl MethodSeries {
    pub fn last(&self) -> &SeriesPoint {
        self.points.last().expect("series has at least the initial point")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub fstar: f64,
    pub series: Vec<MethodSeries>,
    pub files: Vec<PathBuf>,
}

impl ExperimentOutput {
    pub fn series_for(&self, label: &str) -> Option<&MethodSeries> {
        self.series.iter().find(|s| s.label == label)
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    config: &'a ExperimentConfig,
    methods: Vec<String>,
    horizon_oracle_calls: usize,
    fstar_budget: usize,
    fstar: f64,
    input_hash: String,
    dataset: Option<&'a DatasetManifest>,
    dataset_hash: Option<&'a str>,
}

/// Indices of the last iterate at or below each checkpoint, deduplicated.
fn checkpoint_indices(samples: &[Sample], horizon: usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    let mut i = 0;
    for c in checkpoint_grid(horizon) {
        while i + 1 < samples.len() && samples[i + 1].calls <= c {
            i += 1;
        }
        if out.last() != Some(&i) {
            out.push(i);
        }
    }
    out
}

fn rows_for(
    label: &str,
    replication: usize,
    trace: &Trace,
    horizon: usize,
    fstar: f64,
    iterate_rng: &mut RngStream,
) -> (Vec<RecordRow>, Vec<ExpectationRow>) {
    let s = &trace.samples;
    let (f0, g0) = (s[0].f, s[0].grad_norm);
    let mut prefix = Vec::with_capacity(s.len() + 1);
    prefix.push(0.0);
    for x in s {
        prefix.push(prefix.last().unwrap() + x.grad_norm);
    }
    let mut records = Vec::new();
    let mut expect = Vec::new();
    for idx in checkpoint_indices(s, horizon) {
        let x = &s[idx];
        records.push(RecordRow {
            method: label.to_string(),
            replication,
            oracle_calls: x.calls,
            k: x.k,
            f: x.f,
            rel_obj_gap: rel_obj_gap(x.f, f0, fstar),
            grad_norm: x.grad_norm,
            rel_grad_norm: rel_grad_norm(x.grad_norm, g0),
            mom_norm: x.mom_norm,
        });
        let span = idx.max(1);
        let avg = prefix[span] / span as f64;
        let sampled = s[iterate_rng.index(span)].grad_norm;
        expect.push(ExpectationRow {
            method: label.to_string(),
            replication,
            oracle_calls: x.calls,
            k: x.k,
            avg_grad_norm: avg,
            avg_rel_grad_norm: rel_grad_norm(avg, g0),
            sampled_grad_norm: sampled,
            sampled_rel_grad_norm: rel_grad_norm(sampled, g0),
        });
    }
    (records, expect)
}

type RepRows = (Vec<RecordRow>, Vec<ExpectationRow>);

fn summarize(label: &str, per_rep: &[RepRows]) -> Result<MethodSeries> {
    let len = per_rep[0].0.len();
    if per_rep.iter().any(|(r, _)| r.len() != len) {
        return Err(Error::precondition(format!(
            "{label}: replications produced different checkpoint grids"
        )));
    }
    let points = (0..len)
        .map(|i| {
            let col = |f: &dyn Fn(&RepRows) -> f64| -> Vec<f64> {
                per_rep.iter().map(f).collect()
            };
            SeriesPoint {
                oracle_calls: per_rep[0].0[i].oracle_calls,
                k: per_rep[0].0[i].k,
                rel_obj_gap: Summary::of(&col(&|r| r.0[i].rel_obj_gap)),
                rel_grad_norm: Summary::of(&col(&|r| r.0[i].rel_grad_norm)),
                avg_rel_grad_norm: Summary::of(&col(&|r| r.1[i].avg_rel_grad_norm)),
            }
        })
        .collect();
    Ok(MethodSeries {
        label: label.to_string(),
        points,
    })
}

fn build_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::precondition(format!("cannot start worker pool: {e}")))
}

fn qq_samples(problem: &RobustRegression, iterates: &[DenseVector], seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut source = problem.noise_source();
    let mut rng = RngStream::new(seed, QQ_STREAM);
    let mut errors = Vec::new();
    let mut lipschitz = Vec::new();
    for pair in iterates.windows(2) {
        let draw = source.draw(&mut rng);
        let g0 = problem.gradient_under(&pair[0], &draw);
        errors.push(g0.distance(&problem.exact_gradient(&pair[0])));
        let dist = pair[1].distance(&pair[0]);
        if dist > 0.0 {
            let g1 = problem.gradient_under(&pair[1], &draw);
            lipschitz.push(g1.distance(&g0) / dist);
        }
    }
    (errors, lipschitz)
}

/// Runs every method for every replication, computes metrics against a
/// shared `f*`, and writes outputs when `cfg.output_dir` is set.
///
/// Each run proceeds until its next step would exceed the `f*` budget;
/// metrics are reported on checkpoints up to `cfg.k` oracle calls.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let prepared = Prepared::load(cfg)?;
    let budget = cfg.fstar_budget();
    let keep = match &prepared.instance {
        Instance::Robust(p) => p.batches_per_epoch().max(10) + 1,
        _ => 0,
    };
    let jobs: Vec<(usize, usize)> = (0..cfg.methods.len())
        .flat_map(|m| (0..cfg.replications).map(move |r| (m, r)))
        .collect();
    let pool = build_pool(cfg.workers)?;
    let traces: Vec<Trace> = pool.install(|| {
        jobs.par_iter()
            .map(|&(m, r)| {
                let keep = if r == 0 { keep } else { 0 };
                run_one(&prepared, &cfg.methods[m], cfg.sample_mode, budget, cfg.base_seed, r, keep)
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let fstar = traces
        .iter()
        .flat_map(|t| t.samples.iter().map(|s| s.f))
        .fold(f64::INFINITY, f64::min);

    let mut series = Vec::new();
    let mut files = Vec::new();
    for (m, ms) in cfg.methods.iter().enumerate() {
        let label = ms.label();
        let per_rep: Vec<(Vec<RecordRow>, Vec<ExpectationRow>)> = (0..cfg.replications)
            .map(|r| {
                let mut irng = RngStream::new(cfg.base_seed, ITERATE_STREAM_BASE + r as u64);
                rows_for(&label, r, &traces[m * cfg.replications + r], cfg.k, fstar, &mut irng)
            })
            .collect();
        series.push(summarize(&label, &per_rep)?);

        if let Some(dir) = &cfg.output_dir {
            let records: Vec<RecordRow> = per_rep.iter().flat_map(|p| p.0.iter().cloned()).collect();
            let expect: Vec<ExpectationRow> = per_rep.iter().flat_map(|p| p.1.iter().cloned()).collect();
            files.push(write_in(dir, &format!("{label}.csv"), &records)?);
            files.push(write_in(dir, &format!("{label}.expect.csv"), &expect)?);
            if let Instance::Robust(problem) = &prepared.instance {
                let (errors, lipschitz) = qq_samples(problem, &traces[m * cfg.replications].iterates, cfg.base_seed);
                for (name, samples) in [("qq_grad_error", errors), ("qq_lipschitz", lipschitz)] {
                    if samples.len() >= 10 {
                        let path = dir.join(format!("{label}.{name}.csv"));
                        export_qq_data(&samples, &path)?;
                        files.push(path);
                    }
                }
            }
        }
    }

    if let Some(dir) = &cfg.output_dir {
        let rows: Vec<SummaryRow> = series
            .iter()
            .flat_map(|s| {
                s.points.iter().map(|p| SummaryRow {
                    method: s.label.clone(),
                    oracle_calls: p.oracle_calls,
                    k: p.k,
                    rel_obj_gap_median: p.rel_obj_gap.median,
                    rel_obj_gap_iqr: p.rel_obj_gap.iqr(),
                    rel_grad_norm_median: p.rel_grad_norm.median,
                    rel_grad_norm_iqr: p.rel_grad_norm.iqr(),
                    avg_rel_grad_norm_median: p.avg_rel_grad_norm.median,
                    avg_rel_grad_norm_iqr: p.avg_rel_grad_norm.iqr(),
                })
            })
            .collect();
        files.push(write_in(dir, "summary.csv", &rows)?);
        let config_json = serde_json::to_vec(cfg)
            .map_err(|e| Error::precondition(format!("json serialization failed: {e}")))?;
        let mut hashed = config_json;
        if let Some(h) = &prepared.dataset_hash {
            hashed.extend_from_slice(h.as_bytes());
        }
        let manifest = Manifest {
            config: cfg,
            methods: cfg.methods.iter().map(MethodSpec::label).collect(),
            horizon_oracle_calls: cfg.k,
            fstar_budget: budget,
            fstar,
            input_hash: blob_hash(&hashed),
            dataset: prepared.dataset.as_ref(),
            dataset_hash: prepared.dataset_hash.as_deref(),
        };
        let path = dir.join("manifest.json");
        write_json_atomic(&path, &manifest)?;
        files.push(path);
    }

    Ok(ExperimentOutput { fstar, series, files })
}

fn write_in<T: Serialize>(dir: &Path, name: &str, rows: &[T]) -> Result<PathBuf> {
    let path = dir.join(name);
    write_csv_atomic(&path, rows)?;
    Ok(path)
}

/// Median over replications of the running-average exact gradient norm
/// after each horizon in `horizons` (in steps), from one long run per
/// replication with stream `r` of `seed`.
pub fn average_grad_norm_curve(
    oracle: &dyn GradientOracle,
    ms: &MethodSpec,
    x0: &DenseVector,
    horizons: &[usize],
    replications: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<(usize, f64)>> {
    let steps = horizons.iter().copied().max().unwrap_or(0);
    if steps == 0 || replications == 0 {
        return Err(Error::precondition("need a positive horizon and at least one replication"));
    }
    let pool = build_pool(workers)?;
    let per_rep: Vec<Vec<f64>> = pool.install(|| {
        (0..replications)
            .into_par_iter()
            .map(|r| {
                let rc = RunConfig::new(ms.rule, ms.spec, steps);
                let mut sums = Vec::with_capacity(horizons.len());
                let mut total = 0.0;
                let mut observe = |it: &Iterate<'_>| -> Result<()> {
                    if it.k < steps {
                        total += oracle.exact_gradient(it.x).norm();
                    }
                    if horizons.contains(&(it.k + 1)) {
                        sums.push(total / (it.k + 1) as f64);
                    }
                    Ok(())
                };
                run_observed(oracle, &rc, x0.clone(), RngStream::new(seed, r as u64), &mut observe)?;
                Ok(sums)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut sorted: Vec<usize> = horizons.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    Ok(sorted
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let vals: Vec<f64> = per_rep.iter().map(|v| v[i]).collect();
            (k, quantile(&vals, 0.5))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizers::StepRule;
    use crate::schedules::{AlphaMode, Method};

    fn method(m: Method, rule: StepRule) -> MethodSpec {
        MethodSpec::new(m, rule, AlphaMode::Known(2.0), 2, None).unwrap()
    }

    #[test]
    fn single_step_quadratic() {
        let cfg = ExperimentConfig::new(
            vec![method(Method::Pm, StepRule::Normalized)],
            ProblemSpec::Quadratic { n: 3 },
            1,
            1,
            0,
        );
        let out = run_experiment(&cfg).unwrap();
        let s = &out.series[0];
        assert_eq!(s.points.len(), 2);
        assert_eq!(s.points[0].rel_obj_gap.median, 1.0);
        assert_eq!(s.points[0].rel_grad_norm.median, 1.0);
    }

    #[test]
    fn checkpoint_indices_follow_calls() {
        let mk = |k, calls| Sample {
            k,
            calls,
            f: 0.0,
            grad_norm: 0.0,
            mom_norm: 0.0,
        };
        let s = vec![mk(0, 0), mk(1, 1), mk(2, 3), mk(3, 5)];
        assert_eq!(checkpoint_indices(&s, 5), vec![0, 1, 2, 3]);
        assert_eq!(checkpoint_indices(&s, 4), vec![0, 1, 2]);
    }

    #[test]
    fn shared_fstar_and_order_invariance() {
        let a = method(Method::Pm, StepRule::Normalized);
        let b = method(Method::Rm, StepRule::Normalized);
        let problem = ProblemSpec::SyntheticDf { n: 5, m: 20 };
        let one = run_experiment(&ExperimentConfig::new(vec![a, b], problem.clone(), 40, 3, 9)).unwrap();
        let two = run_experiment(&ExperimentConfig::new(vec![b, a], problem, 40, 3, 9)).unwrap();
        assert_eq!(one.fstar, two.fstar);
        for label in ["nsfom-pm", "nsfom-rm"] {
            assert_eq!(one.series_for(label), two.series_for(label));
        }
        for s in &one.series {
            assert!(s.points.iter().all(|p| p.rel_obj_gap.median >= 0.0));
        }
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mut cfg = ExperimentConfig::new(
            vec![method(Method::Mem, StepRule::Normalized), method(Method::Pm, StepRule::Unnormalized)],
            ProblemSpec::Quadratic { n: 4 },
            50,
            4,
            3,
        );
        cfg.workers = 1;
        let a = run_experiment(&cfg).unwrap();
        cfg.workers = 3;
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a, b);
    }
}
