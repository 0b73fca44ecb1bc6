//! End-to-end experiment: config, orchestration, report files and the
//! synthetic planted-bias generator.

mod config;
mod pipeline;
mod report;
mod synth;

pub use config::{ExperimentConfig, ForestSettings, LrSettings, TreeSettings};
pub use pipeline::{
    evaluation_seed, final_stage, prepare, prepare_dataset, rank_stage, ranker_seed, run_experiment,
    run_experiment_timed, run_prepared, seed_provenance, sweep_stage, AggregateEntry, ArmReport, AtStage,
    DataSummary, ExperimentReport, GroupRole, Prepared, RankerSeed, RankingEntry, RankingStage, SeedProvenance,
    Stage, StageError, Timings,
};
pub use report::{
    emit_report, emit_timings, mean_std_cell, ranking_csv, read_report, report_json, summary_csv, summary_table,
    trace_csv, RANKING_FILE, REPORT_FILE, SUMMARY_FILE, TIMING_FILE, TRACE_FILE,
};
pub use synth::{generate_synthetic, roles_path, synthesize, SynthData, SynthRoles, SynthSpec};
