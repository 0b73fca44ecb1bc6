use super::config::ExperimentConfig;
use crate::error::Error;
use crate::rankers::{
    aggregate, rank_correlation_baseline, rank_dt_depth, rank_ffs, rank_lr_weights, rank_mi, rank_rfe,
    rank_spearman, AggregateRanking, MethodId, MethodRanking, RankingFlag,
};
use crate::selection::{baseline_select, evaluate_prefix, sweep, EvalSettings, PrefixEvaluation, SelectionResult, SweepConfig};
use crate::seed::{derive_seed, tags};
use crate::tabular_data::{encode, load_csv, split_by_group, ColumnRoles, EncodedDataset, FeatureKind, FoldPlan, GroupSubset};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Config,
    Load,
    Encode,
    Split,
    Rank,
    Aggregate,
    Sweep,
    Evaluate,
    Baseline,
    Emit,
    Synth,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Config => "config",
            Stage::Load => "load",
            Stage::Encode => "encode",
            Stage::Split => "split",
            Stage::Rank => "rank",
            Stage::Aggregate => "aggregate",
            Stage::Sweep => "sweep",
            Stage::Evaluate => "evaluate",
            Stage::Baseline => "baseline",
            Stage::Emit => "emit",
            Stage::Synth => "synth",
        };
        f.write_str(name)
    }
}

/// A library error tagged with the pipeline stage it came from.
#[derive(Debug, thiserror::Error)]
#[error("[{stage}] {source}")]
pub struct StageError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

pub trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T, StageError>;
}

impl<T, E: Into<Error>> AtStage<T> for Result<T, E> {
    fn at(self, stage: Stage) -> Result<T, StageError> {
        self.map_err(|e| StageError {
            stage,
            source: e.into(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRole {
    pub id: usize,
    pub label: String,
}

/// A loaded, encoded dataset with its resolved roles and outer fold plan.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: ExperimentConfig,
    pub data: EncodedDataset<f64>,
    pub subsets: Vec<GroupSubset<f64>>,
    pub focal: GroupRole,
    pub reference: GroupRole,
    pub plan: FoldPlan,
}

pub fn prepare(config: &ExperimentConfig) -> Result<Prepared, StageError> {
    config.validate().at(Stage::Config)?;
    let roles = ColumnRoles::new(&config.target, &config.protected).with_drop(config.drop.clone());
    let table = load_csv(&config.dataset, &roles).at(Stage::Load)?;
    let data = encode(&table, &config.target, &config.protected).at(Stage::Encode)?;
    prepare_dataset(config, data)
}

fn resolve_role(data: &EncodedDataset<f64>, label: Option<&str>, skip: Option<usize>) -> Result<GroupRole, StageError> {
    let id = match label {
        Some(l) => data
            .group_id(l)
            .ok_or_else(|| Error::UnknownGroup(l.to_owned()))
            .at(Stage::Config)?,
        None => (0..data.n_groups())
            .find(|&g| Some(g) != skip)
            .expect("at least two groups"),
    };
    Ok(GroupRole {
        id,
        label: data.group_labels()[id].clone(),
    })
}

/// Continues from an already encoded dataset; `config.dataset` is only echoed.
pub fn prepare_dataset(config: &ExperimentConfig, data: EncodedDataset<f64>) -> Result<Prepared, StageError> {
    config.validate().at(Stage::Config)?;
    let focal = resolve_role(&data, config.focal.as_deref(), None)?;
    let reference = resolve_role(&data, config.reference.as_deref(), Some(focal.id))?;
    if focal.id == reference.id {
        return Err(Error::InvalidConfig(format!(
            "focal and reference group are both `{}`",
            focal.label
        )))
        .at(Stage::Config);
    }
    let subsets = split_by_group(&data).at(Stage::Split)?;
    if let Some(bad) = subsets.iter().find(|s| s.degenerate) {
        let [n0, n1] = bad.data.class_counts();
        return Err(Error::DegenerateGroup {
            group: bad.label.clone(),
            n0,
            n1,
        })
        .at(Stage::Split);
    }
    let k = config.resolved_folds(data.n_rows());
    let plan = FoldPlan::stratified(data.y(), k, config.seed).at(Stage::Split)?;
    Ok(Prepared {
        config: config.clone(),
        data,
        subsets,
        focal,
        reference,
        plan,
    })
}

/// Seed handed to a supervised ranker on one group.
pub fn ranker_seed(master: u64, method: MethodId, group: Option<usize>) -> u64 {
    let group = group.map_or(u64::from(u32::MAX), |g| g as u64);
    derive_seed(master, tags::RANKERS, ((method as u64) << 32) | group)
}

/// Bootstrap master seed for the sweep (`final_report = false`) or for the
/// final paired evaluation of both arms.
pub fn evaluation_seed(master: u64, final_report: bool) -> u64 {
    derive_seed(master, tags::EVALUATION, u64::from(final_report))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankingStage {
    /// Four supervised rankings per group, in group order, then MI and Spearman.
    pub rankings: Vec<MethodRanking<f64>>,
    pub baseline: MethodRanking<f64>,
    pub aggregate: AggregateRanking<f64>,
}

pub fn rank_stage(p: &Prepared) -> Result<RankingStage, StageError> {
    let params = p.config.ranker_params();
    let master = p.config.seed;
    let tasks: Vec<(usize, MethodId)> = p
        .subsets
        .iter()
        .flat_map(|s| MethodId::PER_GROUP.map(|m| (s.group, m)))
        .collect();
    let mut rankings = tasks
        .par_iter()
        .map(|&(g, method)| {
            let data = &p.subsets[g].data;
            let seed = ranker_seed(master, method, Some(g));
            let ranking = match method {
                MethodId::Ffs => rank_ffs(data, &params, seed),
                MethodId::Rfe => rank_rfe(data, &params, seed),
                MethodId::DtDepth => rank_dt_depth(data, &params, seed),
                _ => rank_lr_weights(data, &params, seed),
            };
            ranking.map(|r| r.for_group(g))
        })
        .collect::<Result<Vec<_>, _>>()
        .at(Stage::Rank)?;
    rankings.push(rank_mi(&p.data, params.mi_bins).at(Stage::Rank)?);
    rankings.push(rank_spearman(&p.data).at(Stage::Rank)?);
    let baseline = rank_correlation_baseline(&p.data).at(Stage::Rank)?;
    let aggregate = aggregate(&rankings, p.data.n_groups(), &MethodId::FAIR_METHODS).at(Stage::Aggregate)?;
    Ok(RankingStage {
        rankings,
        baseline,
        aggregate,
    })
}

fn eval_settings(p: &Prepared, bootstrap: usize, final_report: bool) -> EvalSettings<f64> {
    EvalSettings {
        bootstrap,
        seed: evaluation_seed(p.config.seed, final_report),
        lr: p.config.lr.params(),
        threshold: p.config.lr.threshold,
        focal: p.focal.id,
        reference: p.reference.id,
    }
}

pub fn sweep_stage(p: &Prepared, ranking: &AggregateRanking<f64>) -> Result<SelectionResult<f64>, StageError> {
    let cfg = SweepConfig {
        eval: eval_settings(p, p.config.bootstrap_sweep, false),
        w_acc: p.config.w_acc,
        w_fair: p.config.w_fair,
        mode: p.config.combine,
    };
    sweep(&p.data, ranking, &p.plan, &cfg).at(Stage::Sweep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmReport {
    /// `Fair` or `Regular`.
    pub label: String,
    pub k: usize,
    pub feature_names: Vec<String>,
    pub evaluation: PrefixEvaluation<f64>,
    pub combined: f64,
}

/// Re-evaluates the selected prefix and the equal-size baseline prefix
/// with the reporting bootstrap count, on shared folds and draws.
pub fn final_stage(
    p: &Prepared,
    selection: &SelectionResult<f64>,
    baseline: &MethodRanking<f64>,
) -> Result<(ArmReport, ArmReport), StageError> {
    let settings = eval_settings(p, p.config.bootstrap_report, true);
    let arm = |label: &str, evaluation: PrefixEvaluation<f64>| ArmReport {
        label: label.to_owned(),
        k: evaluation.features.len(),
        feature_names: evaluation
            .features
            .iter()
            .map(|&f| p.data.feature_names()[f].clone())
            .collect(),
        combined: evaluation.combined(p.config.w_acc, p.config.w_fair, p.config.combine),
        evaluation,
    };
    let fair = evaluate_prefix(&p.data, &selection.selected_features, &p.plan, &settings).at(Stage::Evaluate)?;
    let regular = baseline_select(&p.data, baseline, selection.k_star, &p.plan, &settings).at(Stage::Baseline)?;
    Ok((arm("Fair", fair), arm("Regular", regular)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSummary {
    pub n_rows: usize,
    pub n_features: usize,
    pub dropped_rows: usize,
    pub feature_names: Vec<String>,
    pub feature_kinds: Vec<FeatureKind>,
    /// Label coded 0, then label coded 1.
    pub target_labels: [String; 2],
    pub group_labels: Vec<String>,
    pub group_sizes: Vec<usize>,
    pub class_counts: [usize; 2],
    /// Imputed cells per feature.
    pub imputed: Vec<usize>,
    /// Category labels per categorical feature, in code order.
    pub encodings: BTreeMap<String, Vec<String>>,
}

impl DataSummary {
    pub fn of(ds: &EncodedDataset<f64>) -> Self {
        Self {
            n_rows: ds.n_rows(),
            n_features: ds.n_features(),
            dropped_rows: ds.dropped_rows(),
            feature_names: ds.feature_names().to_vec(),
            feature_kinds: ds.feature_kinds().to_vec(),
            target_labels: ds.target_labels().clone(),
            group_labels: ds.group_labels().to_vec(),
            group_sizes: ds.group_sizes(),
            class_counts: ds.class_counts(),
            imputed: ds.imputed().to_vec(),
            encodings: ds
                .encodings()
                .iter()
                .map(|(k, v)| (k.clone(), v.labels().to_vec()))
                .collect(),
        }
    }
}

/// One ranking as exported: features best-first plus raw scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingEntry {
    pub method: MethodId,
    /// Group label, `None` for full-data rankings.
    pub group: Option<String>,
    pub rank: Vec<usize>,
    pub order: Vec<String>,
    /// `None` for an infinite score (a feature the depth tree never used).
    pub scores: Vec<Option<f64>>,
    pub flags: Vec<RankingFlag>,
}

impl RankingEntry {
    pub fn of(r: &MethodRanking<f64>, ds: &EncodedDataset<f64>) -> Self {
        Self {
            method: r.method,
            group: r.group.map(|g| ds.group_labels()[g].clone()),
            rank: r.rank.clone(),
            order: r.order().iter().map(|&f| ds.feature_names()[f].clone()).collect(),
            scores: r.scores.iter().map(|&s| s.is_finite().then_some(s)).collect(),
            flags: r.flags.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateEntry {
    #[serde(flatten)]
    pub ranking: AggregateRanking<f64>,
    pub order_names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankerSeed {
    pub method: MethodId,
    pub group: Option<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedProvenance {
    pub master: u64,
    pub fold_plan: u64,
    pub rankers: Vec<RankerSeed>,
    pub sweep_bootstrap: u64,
    pub report_bootstrap: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub version: String,
    pub config: ExperimentConfig,
    pub data: DataSummary,
    pub folds: usize,
    pub fold_assignment: Vec<usize>,
    pub focal: GroupRole,
    pub reference: GroupRole,
    pub seeds: SeedProvenance,
    pub rankings: Vec<RankingEntry>,
    pub baseline_ranking: RankingEntry,
    pub aggregate: AggregateEntry,
    pub selection: SelectionResult<f64>,
    pub fair: ArmReport,
    pub baseline: ArmReport,
}

/// Wall-clock seconds per stage, kept apart from the report so that the
/// report stays byte-identical between runs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub stages: Vec<(Stage, f64)>,
    pub total: f64,
}

pub fn seed_provenance(p: &Prepared) -> SeedProvenance {
    let master = p.config.seed;
    let rankers = p
        .subsets
        .iter()
        .flat_map(|s| {
            MethodId::PER_GROUP.map(|m| RankerSeed {
                method: m,
                group: Some(s.group),
                seed: ranker_seed(master, m, Some(s.group)),
            })
        })
        .collect();
    SeedProvenance {
        master,
        fold_plan: p.plan.seed(),
        rankers,
        sweep_bootstrap: evaluation_seed(master, false),
        report_bootstrap: evaluation_seed(master, true),
    }
}

pub fn run_prepared(p: &Prepared) -> Result<(ExperimentReport, Timings), StageError> {
    let start = Instant::now();
    let mut timings = Timings::default();
    let mut lap = |stage: Stage, since: &mut Instant| {
        timings.stages.push((stage, since.elapsed().as_secs_f64()));
        *since = Instant::now();
    };
    let mut t = Instant::now();
    let ranks = rank_stage(p)?;
    lap(Stage::Rank, &mut t);
    let selection = sweep_stage(p, &ranks.aggregate)?;
    lap(Stage::Sweep, &mut t);
    let (fair, baseline) = final_stage(p, &selection, &ranks.baseline)?;
    lap(Stage::Evaluate, &mut t);
    let ds = &p.data;
    let report = ExperimentReport {
        version: env!("CARGO_PKG_VERSION").to_owned(),
        config: p.config.clone(),
        data: DataSummary::of(ds),
        folds: p.plan.k(),
        fold_assignment: p.plan.assignment().to_vec(),
        focal: p.focal.clone(),
        reference: p.reference.clone(),
        seeds: seed_provenance(p),
        rankings: ranks.rankings.iter().map(|r| RankingEntry::of(r, ds)).collect(),
        baseline_ranking: RankingEntry::of(&ranks.baseline, ds),
        aggregate: AggregateEntry {
            order_names: ranks
                .aggregate
                .order
                .iter()
                .map(|&f| ds.feature_names()[f].clone())
                .collect(),
            ranking: ranks.aggregate,
        },
        selection,
        fair,
        baseline,
    };
    timings.total = start.elapsed().as_secs_f64();
    Ok((report, timings))
}

/// Runs ingest, group split, the six rankers, aggregation, the prefix
/// sweep and the paired final evaluation of both arms.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, StageError> {
    run_prepared(&prepare(config)?).map(|(r, _)| r)
}

pub fn run_experiment_timed(config: &ExperimentConfig) -> Result<(ExperimentReport, Timings), StageError> {
    run_prepared(&prepare(config)?)
}
