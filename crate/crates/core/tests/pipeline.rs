use fairsel::experiment::{
    emit_report, generate_synthetic, read_report, report_json, run_experiment, ExperimentConfig, SynthSpec, Stage,
    RANKING_FILE, SUMMARY_FILE, TRACE_FILE,
};
use fairsel::rankers::MethodId;
use std::path::Path;

fn synthetic_config(dir: &Path, rows: usize, seed: u64) -> ExperimentConfig {
    let csv = dir.join(format!("data_{seed}.csv"));
    generate_synthetic(&SynthSpec::new(rows, 3, 2, 2, 0.9, seed), &csv).unwrap();
    let mut cfg = ExperimentConfig::new(&csv, "y", "group");
    cfg.seed = seed;
    cfg.forest.n_trees = 15;
    cfg.bootstrap_sweep = 4;
    cfg.bootstrap_report = 8;
    cfg.output_dir = dir.join("out");
    cfg
}

#[test]
fn end_to_end_outputs_are_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = synthetic_config(dir.path(), 240, 3);
    let report = run_experiment(&cfg).unwrap();
    let n_features = report.data.n_features;
    assert_eq!(n_features, 7);

    let per_group = report.rankings.iter().filter(|r| r.group.is_some()).count();
    assert_eq!(per_group, 2 * MethodId::PER_GROUP.len());
    assert_eq!(report.rankings.len(), per_group + 2);
    assert_eq!(report.aggregate.ranking.n_methods, 6);

    let sel = &report.selection;
    assert_eq!(sel.trace.len(), n_features);
    assert_eq!(sel.selected_features, report.aggregate.ranking.order[..sel.k_star].to_vec());
    assert_eq!(report.fair.k, sel.k_star);
    assert_eq!(report.baseline.k, sel.k_star);
    assert_eq!(report.fair.label, "Fair");
    assert_eq!(report.baseline.label, "Regular");
    let fair = &report.fair.evaluation;
    assert_eq!(fair.aggregated.n_reports + fair.skipped.len(), cfg.resolved_folds(240) * 8);

    let files = emit_report(&report, &cfg.output_dir).unwrap();
    assert_eq!(files.len(), 4);
    let summary = std::fs::read_to_string(cfg.output_dir.join(SUMMARY_FILE)).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines[0], "Feature Selection,#Features,SP,DI,EqO,Bacc");
    assert!(lines[1].starts_with("Regular,") && lines[2].starts_with("Fair,"));
    let trace = std::fs::read_to_string(cfg.output_dir.join(TRACE_FILE)).unwrap();
    assert_eq!(trace.lines().count(), n_features + 1);
    let ranking = std::fs::read_to_string(cfg.output_dir.join(RANKING_FILE)).unwrap();
    // 10 per-method rankings, MI, Spearman, baseline, aggregate per group and overall
    assert_eq!(ranking.lines().count(), 1 + n_features * (per_group + 3 + 3));

    let back = read_report(&files[0]).unwrap();
    assert_eq!(report_json(&back).unwrap(), report_json(&report).unwrap());
}

#[test]
fn repeated_runs_are_identical_and_seeds_matter() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = synthetic_config(dir.path(), 160, 4);
    let a = report_json(&run_experiment(&cfg).unwrap()).unwrap();
    let b = report_json(&run_experiment(&cfg).unwrap()).unwrap();
    assert_eq!(a, b);

    let mut other = cfg.clone();
    other.seed = 5;
    let c = run_experiment(&other).unwrap();
    let first = run_experiment(&cfg).unwrap();
    assert_ne!(c.fold_assignment, first.fold_assignment);
}

#[test]
fn planted_proxy_is_avoided() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = synthetic_config(dir.path(), 800, 11);
    cfg.forest.n_trees = 30;
    let report = run_experiment(&cfg).unwrap();
    let names = &report.fair.feature_names;
    assert!(names.iter().all(|n| !n.starts_with("proxy")), "{names:?}");
    let proxy_rank = report.baseline_ranking.rank[3];
    assert!(proxy_rank <= 3, "baseline proxy rank {proxy_rank}");
}

#[test]
fn failures_carry_their_stage() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("tiny.csv");
    std::fs::write(&csv, "a,b,sex,y\n1,2,F,1\n2,3,F,0\n3,1,M,1\n4,0,M,1\n5,5,F,1\n6,2,M,0\n").unwrap();

    let missing = ExperimentConfig::new(dir.path().join("nope.csv"), "y", "sex");
    assert_eq!(run_experiment(&missing).unwrap_err().stage, Stage::Load);

    let unknown = ExperimentConfig::new(&csv, "label", "sex");
    let err = run_experiment(&unknown).unwrap_err();
    assert!(matches!(err.stage, Stage::Load | Stage::Encode), "{err}");

    let degenerate = ExperimentConfig::new(&csv, "y", "sex");
    let err = run_experiment(&degenerate).unwrap_err();
    assert_eq!(err.stage, Stage::Split);
    assert!(err.to_string().starts_with("[split]"), "{err}");

    let mut bad = ExperimentConfig::new(&csv, "y", "sex");
    bad.w_acc = -1.0;
    assert_eq!(run_experiment(&bad).unwrap_err().stage, Stage::Config);
}
