//! Prefix sweep over an aggregate feature order, scored by cross-validated,
//! bootstrapped logistic regression.

use crate::error::{Error, Result};
use crate::fairness::{aggregate_reports, combined_metric, AggregatedReport, FairnessReport, MeanStd, PredictionBatch};
use crate::learners::{lr_fit, LrParams};
use crate::rankers::{AggregateRanking, MethodRanking};
use crate::scalar::Real;
use crate::tabular_data::{bootstrap_sample, BootstrapStream, EncodedDataset, FoldPlan};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Redraws allowed when a bootstrap sample loses a class.
pub const MAX_REDRAWS: u32 = 10;

/// How the sweep turns K·B reports into one combined score.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombineMode {
    /// Combine the mean Bacc with the mean DI.
    #[default]
    AggregateFirst,
    /// Average the per-report combined scores.
    PerReport,
}

/// Evaluation settings shared by every prefix and by both arms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalSettings<T> {
    /// Bootstrap draws per fold.
    pub bootstrap: usize,
    /// Master seed of the bootstrap substreams.
    pub seed: u64,
    pub lr: LrParams<T>,
    pub threshold: T,
    pub focal: usize,
    pub reference: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    /// Every redraw of the training sample held a single class.
    SingleClassTraining,
    /// The fold's test rows miss the focal or reference group.
    EmptyTestGroup,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedTask {
    pub fold: usize,
    pub iteration: usize,
    pub reason: SkipReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefixEvaluation<T> {
    pub features: Vec<usize>,
    pub aggregated: AggregatedReport<T>,
    pub skipped: Vec<SkippedTask>,
    /// Draws that needed at least one redraw.
    pub redrawn: usize,
    #[serde(skip)]
    pub reports: Vec<FairnessReport<T>>,
}

impl<T: Real> PrefixEvaluation<T> {
    pub fn combined(&self, w_acc: T, w_fair: T, mode: CombineMode) -> T {
        match mode {
            CombineMode::AggregateFirst => combined_metric(
                self.aggregated.bacc.mean,
                self.aggregated.di.map(|d| d.mean),
                w_acc,
                w_fair,
            ),
            CombineMode::PerReport => {
                let scores: Vec<T> = self
                    .reports
                    .iter()
                    .map(|r| combined_metric(r.bacc, r.di.value(), w_acc, w_fair))
                    .collect();
                MeanStd::of(&scores).expect("at least one report").mean
            }
        }
    }
}

enum TaskOutcome<T> {
    Report(FairnessReport<T>, bool),
    Skipped(SkipReason),
}

fn run_task<T: Real>(
    ds: &EncodedDataset<T>,
    features: &[usize],
    train: &[usize],
    test: &[usize],
    fold: usize,
    iteration: usize,
    settings: &EvalSettings<T>,
) -> Result<TaskOutcome<T>> {
    let mut stream = BootstrapStream::new(settings.seed, fold, iteration);
    let draw = loop {
        let draw = bootstrap_sample(train, train.len(), stream)?;
        let positives = draw.indices.iter().filter(|&&r| ds.y()[r] == 1).count();
        if positives > 0 && positives < draw.indices.len() {
            break draw;
        }
        if stream.attempt >= MAX_REDRAWS {
            return Ok(TaskOutcome::Skipped(SkipReason::SingleClassTraining));
        }
        stream = stream.retry();
    };
    let x_train = ds.x().select(&draw.indices, features);
    let y_train: Vec<u8> = draw.indices.iter().map(|&r| ds.y()[r]).collect();
    let model = lr_fit(&x_train, &y_train, settings.lr)?;
    let y_pred = model.predict(&ds.x().select(test, features), settings.threshold)?;
    let batch = PredictionBatch::new(
        test.iter().map(|&r| ds.y()[r]).collect(),
        y_pred,
        test.iter().map(|&r| ds.g()[r]).collect(),
    )?;
    match FairnessReport::evaluate(&batch, settings.focal, settings.reference) {
        Ok(report) => Ok(TaskOutcome::Report(report, stream.attempt > 0)),
        Err(Error::EmptyGroup(_)) => Ok(TaskOutcome::Skipped(SkipReason::EmptyTestGroup)),
        Err(e) => Err(e),
    }
}

/// Trains on every bootstrap draw of every fold's training rows, restricted
/// to `features`, and scores predictions on the untouched test rows.
///
/// The draw for `(fold, iteration)` depends only on `settings.seed` and
/// those coordinates, so any two feature sets evaluated with the same plan
/// and settings see identical training samples.
pub fn evaluate_prefix<T: Real>(
    ds: &EncodedDataset<T>,
    features: &[usize],
    plan: &FoldPlan,
    settings: &EvalSettings<T>,
) -> Result<PrefixEvaluation<T>> {
    if features.is_empty() {
        return Err(Error::EmptyList);
    }
    if let Some(&bad) = features.iter().find(|&&f| f >= ds.n_features()) {
        return Err(Error::OutOfRange {
            value: bad,
            max: ds.n_features(),
        });
    }
    if plan.assignment().len() != ds.n_rows() {
        return Err(Error::LengthMismatch(format!(
            "fold plan covers {} rows, dataset has {}",
            plan.assignment().len(),
            ds.n_rows()
        )));
    }
    if settings.bootstrap == 0 {
        return Err(Error::InvalidConfig("bootstrap count must be at least 1".into()));
    }
    let splits: Vec<(Vec<usize>, Vec<usize>)> = (0..plan.k())
        .map(|k| (plan.train_indices(k), plan.test_indices(k)))
        .collect();
    let tasks: Vec<(usize, usize)> = (0..plan.k())
        .flat_map(|fold| (0..settings.bootstrap).map(move |it| (fold, it)))
        .collect();
    let outcomes = tasks
        .par_iter()
        .map(|&(fold, it)| {
            let (train, test) = &splits[fold];
            run_task(ds, features, train, test, fold, it, settings)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut reports = Vec::with_capacity(outcomes.len());
    let mut skipped = Vec::new();
    let mut redrawn = 0;
    for (&(fold, iteration), outcome) in tasks.iter().zip(outcomes) {
        match outcome {
            TaskOutcome::Report(r, retried) => {
                redrawn += usize::from(retried);
                reports.push(r);
            }
            TaskOutcome::Skipped(reason) => skipped.push(SkippedTask {
                fold,
                iteration,
                reason,
            }),
        }
    }
    Ok(PrefixEvaluation {
        features: features.to_vec(),
        aggregated: aggregate_reports(&reports)?,
        skipped,
        redrawn,
        reports,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig<T> {
    pub eval: EvalSettings<T>,
    pub w_acc: T,
    pub w_fair: T,
    pub mode: CombineMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint<T> {
    pub k: usize,
    pub features: Vec<usize>,
    /// `None` when every fold/draw task was skipped.
    pub metrics: Option<AggregatedReport<T>>,
    pub combined: Option<T>,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult<T> {
    pub trace: Vec<SweepPoint<T>>,
    pub k_star: usize,
    pub selected_features: Vec<usize>,
    pub selected_names: Vec<String>,
    pub w_acc: T,
    pub w_fair: T,
    pub mode: CombineMode,
}

/// Index into `trace` of the best combined score; ties keep the earliest.
pub fn best_prefix<T: Real>(trace: &[SweepPoint<T>]) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for (i, p) in trace.iter().enumerate() {
        if let Some(c) = p.combined {
            if best.is_none_or(|(_, b)| c > b) {
                best = Some((i, c));
            }
        }
    }
    best.map(|(i, _)| i)
}

/// Evaluates every prefix `k = 1..=F` of `ranking.order` and keeps the one
/// with the highest combined score, preferring fewer features on ties.
pub fn sweep<T: Real, R>(
    ds: &EncodedDataset<T>,
    ranking: &AggregateRanking<R>,
    plan: &FoldPlan,
    config: &SweepConfig<T>,
) -> Result<SelectionResult<T>> {
    let order = &ranking.order;
    if order.is_empty() {
        return Err(Error::EmptyList);
    }
    if order.len() != ds.n_features() {
        return Err(Error::MismatchedFeatures {
            expected: ds.n_features(),
            found: order.len(),
        });
    }
    let trace = (1..=order.len())
        .into_par_iter()
        .map(|k| {
            let features = order[..k].to_vec();
            let point = match evaluate_prefix(ds, &features, plan, &config.eval) {
                Ok(ev) => SweepPoint {
                    k,
                    combined: Some(ev.combined(config.w_acc, config.w_fair, config.mode)),
                    skipped: ev.skipped.len(),
                    metrics: Some(ev.aggregated),
                    features,
                },
                Err(Error::EmptyList) => SweepPoint {
                    k,
                    features,
                    metrics: None,
                    combined: None,
                    skipped: plan.k() * config.eval.bootstrap,
                },
                Err(e) => return Err(e),
            };
            Ok(point)
        })
        .collect::<Result<Vec<_>>>()?;
    let best = best_prefix(&trace).ok_or(Error::AllPrefixesDegenerate)?;
    let selected_features = trace[best].features.clone();
    Ok(SelectionResult {
        k_star: trace[best].k,
        selected_names: selected_features
            .iter()
            .map(|&f| ds.feature_names()[f].clone())
            .collect(),
        selected_features,
        trace,
        w_acc: config.w_acc,
        w_fair: config.w_fair,
        mode: config.mode,
    })
}

/// Evaluates the top `k` features of the baseline ranking under the same
/// plan and settings as the fair arm.
pub fn baseline_select<T: Real>(
    ds: &EncodedDataset<T>,
    baseline: &MethodRanking<T>,
    k: usize,
    plan: &FoldPlan,
    settings: &EvalSettings<T>,
) -> Result<PrefixEvaluation<T>> {
    let n = baseline.rank.len();
    if k == 0 || k > n {
        return Err(Error::OutOfRange { value: k, max: n });
    }
    evaluate_prefix(ds, &baseline.order()[..k], plan, settings)
}
