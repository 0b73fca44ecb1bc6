use super::pipeline::{ArmReport, ExperimentReport, RankingEntry, Timings};
use crate::error::{Error, Result};
use crate::fairness::{AggregatedReport, MeanStd};
use crate::rankers::AggregateRanking;
use crate::selection::SweepPoint;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const REPORT_FILE: &str = "report.json";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const TRACE_FILE: &str = "trace.csv";
pub const RANKING_FILE: &str = "ranking.csv";
pub const TIMING_FILE: &str = "timing.json";

const NA: &str = "NA";

/// `mean ± std` with four decimals.
pub fn mean_std_cell(m: &MeanStd<f64>) -> String {
    format!("{:.4} ± {:.4}", m.mean, m.std)
}

fn optional(v: Option<f64>) -> String {
    v.map_or_else(|| NA.to_owned(), |v| v.to_string())
}

fn arm_row(arm: &ArmReport) -> [String; 6] {
    arm_row_from(&arm.label, arm.k, &arm.evaluation.aggregated)
}

fn arm_row_from(label: &str, k: usize, a: &AggregatedReport<f64>) -> [String; 6] {
    [
        label.to_owned(),
        k.to_string(),
        mean_std_cell(&a.sp),
        a.di.as_ref().map_or_else(|| NA.to_owned(), mean_std_cell),
        mean_std_cell(&a.eqo),
        mean_std_cell(&a.bacc),
    ]
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// One row per arm, baseline first.
pub fn summary_csv(report: &ExperimentReport) -> Result<Vec<u8>> {
    csv_bytes(
        &["Feature Selection", "#Features", "SP", "DI", "EqO", "Bacc"],
        [&report.baseline, &report.fair].map(|a| arm_row(a).to_vec()),
    )
}

pub fn trace_csv(trace: &[SweepPoint<f64>]) -> Result<Vec<u8>> {
    let rows = trace.iter().map(|p| {
        let m = p.metrics.as_ref();
        vec![
            p.k.to_string(),
            optional(m.map(|m| m.bacc.mean)),
            optional(m.map(|m| m.bacc.std)),
            optional(m.map(|m| m.sp.mean)),
            optional(m.and_then(|m| m.di.map(|d| d.mean))),
            optional(m.map(|m| m.eqo.mean)),
            optional(p.combined),
        ]
    });
    csv_bytes(&["k", "bacc_mean", "bacc_std", "sp", "di", "eqo", "combined"], rows)
}

/// Long format: one row per (ranking, feature), features best-first.
/// Aggregate rows carry the mean rank as their score.
pub fn ranking_csv(
    rankings: &[RankingEntry],
    baseline: &RankingEntry,
    aggregate: &AggregateRanking<f64>,
    feature_names: &[String],
    group_labels: &[String],
) -> Result<Vec<u8>> {
    let mut rows = Vec::new();
    for r in rankings.iter().chain([baseline]) {
        let group = r.group.clone().unwrap_or_else(|| "all".into());
        let mut by_rank: Vec<usize> = (0..r.rank.len()).collect();
        by_rank.sort_by_key(|&f| r.rank[f]);
        for f in by_rank {
            rows.push(vec![
                r.method.to_string(),
                group.clone(),
                feature_names[f].clone(),
                r.rank[f].to_string(),
                r.scores[f].map_or_else(|| "inf".to_owned(), |s| s.to_string()),
            ]);
        }
    }
    let mut push_mean = |group: &str, values: &[f64]| {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        for (pos, f) in order.into_iter().enumerate() {
            rows.push(vec![
                "AGGREGATE".to_owned(),
                group.to_owned(),
                feature_names[f].clone(),
                (pos + 1).to_string(),
                values[f].to_string(),
            ]);
        }
    };
    for (g, values) in aggregate.per_group.iter().enumerate() {
        push_mean(&group_labels[g], values);
    }
    push_mean("all", &aggregate.combined);
    csv_bytes(&["method", "group", "feature", "rank", "score"], rows)
}

pub fn report_json(report: &ExperimentReport) -> Result<Vec<u8>> {
    let mut text = serde_json::to_vec_pretty(report)?;
    text.push(b'\n');
    Ok(text)
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    let path = dir.join(name);
    let mut file = fs::File::create(&path)?;
    file.write_all(bytes)?;
    Ok(path)
}

/// Writes report.json, summary.csv, trace.csv and ranking.csv into `dir`.
pub fn emit_report(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    Ok(vec![
        write(dir, REPORT_FILE, &report_json(report)?)?,
        write(dir, SUMMARY_FILE, &summary_csv(report)?)?,
        write(dir, TRACE_FILE, &trace_csv(&report.selection.trace)?)?,
        write(
            dir,
            RANKING_FILE,
            &ranking_csv(
                &report.rankings,
                &report.baseline_ranking,
                &report.aggregate.ranking,
                &report.data.feature_names,
                &report.data.group_labels,
            )?,
        )?,
    ])
}

pub fn emit_timings(timings: &Timings, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    write(dir, TIMING_FILE, &serde_json::to_vec_pretty(timings)?)
}

pub fn read_report(path: &Path) -> Result<ExperimentReport> {
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    Ok(serde_json::from_slice(&fs::read(path)?)?)
}

/// Plain-text rendering of the two-arm summary.
pub fn summary_table(report: &ExperimentReport) -> String {
    let header = ["Feature Selection", "#Features", "SP", "DI", "EqO", "Bacc"].map(str::to_owned);
    let rows = [header, arm_row(&report.baseline), arm_row(&report.fair)];
    let widths: Vec<usize> = (0..6)
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &rows {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, &w)| format!("{cell:<w$}"))
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out.push_str(&format!(
        "k* = {} of {} features: {}\n",
        report.selection.k_star,
        report.data.n_features,
        report.fair.feature_names.join(", ")
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_layout() {
        let m = MeanStd {
            mean: 0.98224,
            std: 0.21266,
        };
        assert_eq!(mean_std_cell(&m), "0.9822 ± 0.2127");
        let m = MeanStd {
            mean: -0.0003,
            std: 0.0764,
        };
        assert_eq!(mean_std_cell(&m), "-0.0003 ± 0.0764");
    }

    #[test]
    fn missing_values_print_na() {
        let p = SweepPoint::<f64> {
            k: 1,
            features: vec![0],
            metrics: None,
            combined: None,
            skipped: 4,
        };
        let text = String::from_utf8(trace_csv(&[p]).unwrap()).unwrap();
        assert_eq!(text, "k,bacc_mean,bacc_std,sp,di,eqo,combined\n1,NA,NA,NA,NA,NA,NA\n");
    }

    #[test]
    fn summary_row_layout() {
        let cell = |mean, std| MeanStd { mean, std };
        let a = crate::fairness::AggregatedReport {
            bacc: cell(0.76371, 0.02684),
            sp: cell(-0.00031, 0.07642),
            di: Some(cell(0.98224, 0.21266)),
            eqo: cell(0.05419, 0.06381),
            n_reports: 100,
            di_excluded: 0,
        };
        let row = arm_row_from("Fair", 19, &a).join(",");
        assert_eq!(row, "Fair,19,-0.0003 ± 0.0764,0.9822 ± 0.2127,0.0542 ± 0.0638,0.7637 ± 0.0268");
    }
}
