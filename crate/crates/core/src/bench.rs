//! Experiment harness: repetition sweeps over shared splits, accuracy
//! aggregation, and report emission.
//!
//! Within one repetition every criterion (and the supervised baseline)
//! consumes the identical split, so paired accuracy differences are well
//! defined. Repetition `r` uses split seed `base_seed + r`. Repetitions run
//! on a small worker pool; each writes into its own result slot, so the
//! assembled report is byte-identical regardless of worker count (the
//! `RPLS_THREADS` environment variable caps the pool in the CLI).

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::dataset::{self, Dataset, LabeledView, SplitState};
use crate::error::{Error, Result};
use crate::glm::{self, ModelSpec};
use crate::selftrain::{self, CriterionSpec, FamilySpec, LoopConfig, Mode, OccamRefit, Stopping};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSource {
    Csv {
        path: String,
        label_column: String,
        #[serde(default)]
        class_levels: Option<Vec<String>>,
    },
    Synthetic {
        n_rows: usize,
        coefficients: Vec<f64>,
        intercept: f64,
        seed: u64,
    },
    /// The pinned banknote-style measurement surrogate shipped with the crate.
    BanknoteSurrogate,
}

impl DataSource {
    pub fn load(&self) -> Result<Dataset> {
        match self {
            DataSource::Csv {
                path,
                label_column,
                class_levels,
            } => dataset::load_csv(
                std::path::Path::new(path),
                label_column,
                class_levels.as_deref(),
            ),
            DataSource::Synthetic {
                n_rows,
                coefficients,
                intercept,
                seed,
            } => dataset::generate_binomial(*n_rows, coefficients, *intercept, *seed),
            DataSource::BanknoteSurrogate => Ok(dataset::banknote_surrogate()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub version: u32,
    pub dataset: DataSource,
    pub unlabeled_fraction: f64,
    pub test_fraction: f64,
    pub repetitions: usize,
    pub base_seed: u64,
    pub criteria: Vec<CriterionSpec>,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default = "default_stopping")]
    pub stopping: Stopping,
    #[serde(default)]
    pub occam_refit: Option<OccamRefit>,
    #[serde(default = "default_ridge")]
    pub ridge: f64,
    #[serde(default = "default_family")]
    pub family: FamilySpec,
    /// Worker pool size; `None` defers to `RPLS_THREADS` or the machine.
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_mode() -> Mode {
    Mode::Incremental
}

fn default_stopping() -> Stopping {
    Stopping::ExhaustPool
}

fn default_ridge() -> f64 {
    0.03
}

fn default_family() -> FamilySpec {
    FamilySpec::AllSubsets { cap: 1 << 10 }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "config version {} unsupported (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be >= 1".into()));
        }
        if self.criteria.is_empty() {
            return Err(Error::Config("criteria must be non-empty".into()));
        }
        self.loop_config(&self.criteria[0], 0).validate()
    }

    fn loop_config(&self, criterion: &CriterionSpec, seed: u64) -> LoopConfig {
        LoopConfig {
            criterion: criterion.clone(),
            mode: self.mode,
            stopping: self.stopping,
            occam_refit: self.occam_refit,
            seed,
            ridge: self.ridge,
            family: self.family,
        }
    }
}

/// Config for one `selftrain` CLI run: one dataset, one split, one loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfTrainConfig {
    pub version: u32,
    pub dataset: DataSource,
    pub unlabeled_fraction: f64,
    pub test_fraction: f64,
    pub split_seed: u64,
    #[serde(rename = "loop")]
    pub loop_config: LoopConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub criterion: String,
    pub repetition: usize,
    pub final_accuracy: Option<f64>,
    pub rounds: usize,
    pub pseudo_label_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failed: Option<String>,
    /// Test accuracy snapshot at the start of each round.
    pub curve: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionSummary {
    pub criterion: String,
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
}

pub const BASELINE_NAME: &str = "supervised";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub criteria: Vec<String>,
    pub repetitions: usize,
    /// Ordered by (criterion position, repetition).
    pub cells: Vec<CellResult>,
    /// Supervised baseline accuracy per repetition (shared by all criteria
    /// of that repetition).
    pub baseline: Vec<f64>,
    /// Per-criterion summaries plus a final `supervised` row.
    pub summaries: Vec<CriterionSummary>,
}

impl BenchReport {
    pub fn summary_for(&self, criterion: &str) -> Option<&CriterionSummary> {
        self.summaries.iter().find(|s| s.criterion == criterion)
    }
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

struct RepResult {
    baseline: f64,
    cells: Vec<CellResult>,
}

fn run_repetition(data: &Dataset, config: &ExperimentConfig, rep: usize) -> Result<RepResult> {
    let seed = config.base_seed + rep as u64;
    let split = dataset::make_split(data, config.unlabeled_fraction, config.test_fraction, seed)?;
    let baseline = supervised_accuracy(data, &split, config.ridge)?;
    let mut cells = Vec::with_capacity(config.criteria.len());
    for criterion in &config.criteria {
        let loop_config = config.loop_config(criterion, seed);
        let cell = match selftrain::run(data, &split, &loop_config) {
            Ok(trace) => {
                let curve: Vec<f64> = trace.rounds.iter().map(|r| r.test_accuracy).collect();
                match (trace.failure.clone(), selftrain::evaluate(&trace, data, &split)) {
                    (None, Ok(m)) => CellResult {
                        criterion: criterion.name().into(),
                        repetition: rep,
                        final_accuracy: Some(m.test_accuracy),
                        rounds: m.rounds,
                        pseudo_label_error: Some(m.pseudo_label_error),
                        failed: None,
                        curve,
                    },
                    (failure, eval) => CellResult {
                        criterion: criterion.name().into(),
                        repetition: rep,
                        final_accuracy: eval.as_ref().ok().map(|m| m.test_accuracy),
                        rounds: trace.rounds.len(),
                        pseudo_label_error: eval.ok().map(|m| m.pseudo_label_error),
                        failed: Some(failure.unwrap_or_else(|| "evaluation failed".into())),
                        curve,
                    },
                }
            }
            Err(e) => CellResult {
                criterion: criterion.name().into(),
                repetition: rep,
                final_accuracy: None,
                rounds: 0,
                pseudo_label_error: None,
                failed: Some(e.to_string()),
                curve: Vec::new(),
            },
        };
        cells.push(cell);
    }
    Ok(RepResult { baseline, cells })
}

/// Supervised baseline: fit on the labeled part only, evaluate on test.
pub fn supervised_accuracy(data: &Dataset, split: &SplitState, ridge: f64) -> Result<f64> {
    let view = LabeledView::from_split(data, split);
    let fit = glm::fit(&view, &ModelSpec::full(data.n_features(), 0), ridge)?;
    selftrain::accuracy_of(&fit, data, &split.test_idx)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<BenchReport> {
    run_experiment_with_threads(config, None)
}

/// `threads` overrides the config/environment pool size (used by tests to
/// verify thread-count independence).
pub fn run_experiment_with_threads(
    config: &ExperimentConfig,
    threads: Option<usize>,
) -> Result<BenchReport> {
    config.validate()?;
    let data = config.dataset.load()?;
    let reps = config.repetitions;
    let pool = threads
        .or(config.threads)
        .or_else(|| {
            std::env::var("RPLS_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
        .clamp(1, reps.max(1));

    let slots: Mutex<Vec<Option<Result<RepResult>>>> = Mutex::new((0..reps).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..pool {
            scope.spawn(|| loop {
                let rep = next.fetch_add(1, Ordering::Relaxed);
                if rep >= reps {
                    break;
                }
                let result = run_repetition(&data, config, rep);
                slots.lock().expect("result sink poisoned")[rep] = Some(result);
            });
        }
    });

    let mut baseline = Vec::with_capacity(reps);
    let mut per_rep_cells: Vec<Vec<CellResult>> = Vec::with_capacity(reps);
    for slot in slots.into_inner().expect("result sink poisoned") {
        let rep = slot.expect("worker filled every slot")?;
        baseline.push(rep.baseline);
        per_rep_cells.push(rep.cells);
    }

    // cells ordered by (criterion, repetition)
    let mut cells = Vec::with_capacity(reps * config.criteria.len());
    for (c, _) in config.criteria.iter().enumerate() {
        for rep_cells in &per_rep_cells {
            cells.push(rep_cells[c].clone());
        }
    }

    let mut summaries = Vec::new();
    for criterion in &config.criteria {
        let values: Vec<f64> = cells
            .iter()
            .filter(|cell| cell.criterion == criterion.name() && cell.failed.is_none())
            .filter_map(|cell| cell.final_accuracy)
            .collect();
        let (mean, sd) = mean_sd(&values);
        summaries.push(CriterionSummary {
            criterion: criterion.name().into(),
            mean,
            sd,
            n: values.len(),
        });
    }
    let (mean, sd) = mean_sd(&baseline);
    summaries.push(CriterionSummary {
        criterion: BASELINE_NAME.into(),
        mean,
        sd,
        n: baseline.len(),
    });

    Ok(BenchReport {
        criteria: config.criteria.iter().map(|c| c.name().into()).collect(),
        repetitions: reps,
        cells,
        baseline,
        summaries,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// Long-format final accuracies: one row per cell plus one baseline row
    /// per repetition.
    Csv,
    /// Mean/sd summary table.
    Markdown,
    /// Full audit, JSON round-trippable back into a [`BenchReport`].
    Json,
}

pub fn render_report(report: &BenchReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Csv => {
            let mut out = String::from("criterion,repetition,round,accuracy\n");
            for cell in &report.cells {
                if let Some(acc) = cell.final_accuracy {
                    out.push_str(&format!(
                        "{},{},{},{acc}\n",
                        cell.criterion, cell.repetition, cell.rounds
                    ));
                }
            }
            for (rep, acc) in report.baseline.iter().enumerate() {
                out.push_str(&format!("{BASELINE_NAME},{rep},0,{acc}\n"));
            }
            Ok(out)
        }
        ReportFormat::Markdown => {
            let mut out = String::from("| criterion | mean | sd | n |\n|---|---|---|---|\n");
            for s in &report.summaries {
                out.push_str(&format!(
                    "| {} | {:.4} | {:.4} | {} |\n",
                    s.criterion, s.mean, s.sd, s.n
                ));
            }
            Ok(out)
        }
        ReportFormat::Json => serde_json::to_string_pretty(report)
            .map_err(|e| Error::InvalidInput(format!("serialize report: {e}"))),
    }
}

/// Per-round accuracy curves in long format (one row per recorded round).
pub fn render_curves_csv(report: &BenchReport) -> String {
    let mut out = String::from("criterion,repetition,round,accuracy\n");
    for cell in &report.cells {
        for (round, acc) in cell.curve.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{round},{acc}\n",
                cell.criterion, cell.repetition
            ));
        }
    }
    out
}

pub fn emit_report(
    report: &BenchReport,
    format: ReportFormat,
    path: &std::path::Path,
) -> Result<()> {
    let text = render_report(report, format)?;
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> ExperimentConfig {
        ExperimentConfig {
            version: 1,
            dataset: DataSource::Synthetic {
                n_rows: 120,
                coefficients: vec![1.6, -1.1],
                intercept: 0.1,
                seed: 77,
            },
            unlabeled_fraction: 0.5,
            test_fraction: 0.25,
            repetitions: 2,
            base_seed: 100,
            criteria: vec![CriterionSpec::ProbScore],
            mode: Mode::Incremental,
            stopping: Stopping::MaxRounds { rounds: 4 },
            occam_refit: None,
            ridge: 1e-6,
            family: FamilySpec::FullOnly,
            threads: None,
        }
    }

    #[test]
    fn report_shape_and_paired_baseline() {
        let report = run_experiment(&tiny_config()).unwrap();
        // 1 criterion x 2 reps cells, plus one baseline value per repetition
        assert_eq!(report.cells.len(), 2);
        assert_eq!(report.baseline.len(), 2);
        assert_eq!(report.summaries.len(), 2);
        assert!(report.summary_for(BASELINE_NAME).is_some());
        // csv: 2 cell rows + 2 baseline rows + header
        let csv = render_report(&report, ReportFormat::Csv).unwrap();
        assert_eq!(csv.lines().count(), 1 + 2 + 2);
        assert!(csv.starts_with("criterion,repetition,round,accuracy"));
    }

    #[test]
    fn reported_means_match_cells() {
        let report = run_experiment(&tiny_config()).unwrap();
        for summary in &report.summaries {
            let values: Vec<f64> = if summary.criterion == BASELINE_NAME {
                report.baseline.clone()
            } else {
                report
                    .cells
                    .iter()
                    .filter(|c| c.criterion == summary.criterion && c.failed.is_none())
                    .filter_map(|c| c.final_accuracy)
                    .collect()
            };
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            assert!((summary.mean - mean).abs() < 1e-12);
            assert_eq!(summary.n, values.len());
        }
    }

    #[test]
    fn reports_are_identical_across_thread_counts() {
        let config = tiny_config();
        let a = run_experiment_with_threads(&config, Some(1)).unwrap();
        let b = run_experiment_with_threads(&config, Some(4)).unwrap();
        let a_json = render_report(&a, ReportFormat::Json).unwrap();
        let b_json = render_report(&b, ReportFormat::Json).unwrap();
        assert_eq!(a_json, b_json);
        assert_eq!(
            render_report(&a, ReportFormat::Csv).unwrap(),
            render_report(&b, ReportFormat::Csv).unwrap()
        );
    }

    #[test]
    fn json_report_round_trips() {
        let report = run_experiment(&tiny_config()).unwrap();
        let text = render_report(&report, ReportFormat::Json).unwrap();
        let back: BenchReport = serde_json::from_str(&text).unwrap();
        assert_eq!(report, back);
    }

    #[test]
    fn markdown_summary_schema() {
        let report = run_experiment(&tiny_config()).unwrap();
        let md = render_report(&report, ReportFormat::Markdown).unwrap();
        assert!(md.starts_with("| criterion | mean | sd | n |"));
        assert!(md.contains("supervised"));
    }

    #[test]
    fn config_validation() {
        let mut bad = tiny_config();
        bad.version = 2;
        assert!(matches!(run_experiment(&bad), Err(Error::Config(_))));
        let mut bad = tiny_config();
        bad.criteria.clear();
        assert!(run_experiment(&bad).is_err());
        let mut bad = tiny_config();
        bad.repetitions = 0;
        assert!(run_experiment(&bad).is_err());
    }
}
