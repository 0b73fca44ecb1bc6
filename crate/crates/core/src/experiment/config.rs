use crate::error::{Error, Result};
use crate::learners::{ForestParams, LrParams, TreeParams};
use crate::rankers::RankerParams;
use crate::selection::CombineMode;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestSettings {
    pub n_trees: usize,
    pub features_per_split: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
}

impl Default for ForestSettings {
    fn default() -> Self {
        let p = ForestParams::default();
        Self {
            n_trees: p.n_trees,
            features_per_split: p.features_per_split,
            max_depth: p.max_depth,
            min_samples_split: p.min_samples_split,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeSettings {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub max_features: Option<usize>,
}

impl Default for TreeSettings {
    fn default() -> Self {
        let p = TreeParams::default();
        Self {
            max_depth: p.max_depth,
            min_samples_split: p.min_samples_split,
            max_features: p.max_features,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LrSettings {
    pub l2_lambda: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Probability at or above which class 1 is predicted.
    pub threshold: f64,
}

impl Default for LrSettings {
    fn default() -> Self {
        let p = LrParams::<f64>::default();
        Self {
            l2_lambda: p.l2_lambda,
            tol: p.tol,
            max_iter: p.max_iter,
            threshold: 0.5,
        }
    }
}

impl LrSettings {
    pub fn params(&self) -> LrParams<f64> {
        LrParams {
            l2_lambda: self.l2_lambda,
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }
}

fn default_bootstrap_sweep() -> usize {
    10
}

fn default_bootstrap_report() -> usize {
    100
}

fn default_weight() -> f64 {
    0.5
}

fn default_internal_folds() -> usize {
    3
}

fn default_mi_bins() -> usize {
    10
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("fairsel-out")
}

/// One experiment, read from JSON. Only `dataset`, `target` and
/// `protected` are required.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: PathBuf,
    pub target: String,
    pub protected: String,
    #[serde(default)]
    pub drop: Vec<String>,
    /// Outer folds; `None` picks 4 below 200 rows and 5 otherwise.
    #[serde(default)]
    pub folds: Option<usize>,
    #[serde(default = "default_bootstrap_sweep")]
    pub bootstrap_sweep: usize,
    #[serde(default = "default_bootstrap_report")]
    pub bootstrap_report: usize,
    #[serde(default = "default_weight")]
    pub w_acc: f64,
    #[serde(default = "default_weight")]
    pub w_fair: f64,
    #[serde(default)]
    pub combine: CombineMode,
    #[serde(default)]
    pub seed: u64,
    /// Group label in the numerator of DI and the minuend of SP and EqO;
    /// defaults to the first group label in sorted order.
    #[serde(default)]
    pub focal: Option<String>,
    /// Defaults to the first label other than the focal one.
    #[serde(default)]
    pub reference: Option<String>,
    #[serde(default)]
    pub lr: LrSettings,
    #[serde(default)]
    pub forest: ForestSettings,
    #[serde(default)]
    pub tree: TreeSettings,
    /// Stratified folds scoring forward selection.
    #[serde(default = "default_internal_folds")]
    pub internal_folds: usize,
    #[serde(default = "default_mi_bins")]
    pub mi_bins: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn new(dataset: impl Into<PathBuf>, target: &str, protected: &str) -> Self {
        Self {
            dataset: dataset.into(),
            target: target.to_owned(),
            protected: protected.to_owned(),
            drop: vec![],
            folds: None,
            bootstrap_sweep: default_bootstrap_sweep(),
            bootstrap_report: default_bootstrap_report(),
            w_acc: default_weight(),
            w_fair: default_weight(),
            combine: CombineMode::default(),
            seed: 0,
            focal: None,
            reference: None,
            lr: LrSettings::default(),
            forest: ForestSettings::default(),
            tree: TreeSettings::default(),
            internal_folds: default_internal_folds(),
            mi_bins: default_mi_bins(),
            output_dir: default_output_dir(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative dataset and output paths are taken
    /// relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        if !path.is_file() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let mut cfg = Self::from_json(&std::fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new(""));
        if cfg.dataset.is_relative() {
            cfg.dataset = base.join(&cfg.dataset);
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if let Some(k) = self.folds {
            if k < 2 {
                return fail(format!("folds must be at least 2, got {k}"));
            }
        }
        if self.bootstrap_sweep == 0 || self.bootstrap_report == 0 {
            return fail("bootstrap counts must be at least 1".into());
        }
        for (name, w) in [("w_acc", self.w_acc), ("w_fair", self.w_fair)] {
            if !w.is_finite() || w < 0.0 {
                return fail(format!("{name} must be a finite non-negative number, got {w}"));
            }
        }
        if self.w_acc + self.w_fair <= 0.0 {
            return fail("w_acc and w_fair cannot both be zero".into());
        }
        if self.lr.l2_lambda.is_nan() || self.lr.l2_lambda < 0.0 || self.lr.tol.is_nan() || self.lr.tol <= 0.0 || self.lr.max_iter == 0 {
            return fail("lr needs l2_lambda >= 0, tol > 0 and max_iter >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.lr.threshold) {
            return fail(format!("lr.threshold must lie in [0, 1], got {}", self.lr.threshold));
        }
        if self.forest.n_trees == 0 {
            return fail("forest.n_trees must be at least 1".into());
        }
        if self.internal_folds < 2 {
            return fail("internal_folds must be at least 2".into());
        }
        if self.mi_bins == 0 {
            return fail("mi_bins must be at least 1".into());
        }
        if let (Some(f), Some(r)) = (&self.focal, &self.reference) {
            if f == r {
                return fail(format!("focal and reference group are both `{f}`"));
            }
        }
        Ok(())
    }

    pub fn resolved_folds(&self, n_rows: usize) -> usize {
        self.folds.unwrap_or(if n_rows < 200 { 4 } else { 5 })
    }

    pub fn ranker_params(&self) -> RankerParams<f64> {
        RankerParams {
            forest: ForestParams {
                n_trees: self.forest.n_trees,
                features_per_split: self.forest.features_per_split,
                max_depth: self.forest.max_depth,
                min_samples_split: self.forest.min_samples_split,
                seed: 0,
            },
            tree: TreeParams {
                max_depth: self.tree.max_depth,
                min_samples_split: self.tree.min_samples_split,
                max_features: self.tree.max_features,
                seed: 0,
            },
            lr: self.lr.params(),
            internal_folds: self.internal_folds,
            mi_bins: self.mi_bins,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg = ExperimentConfig::from_json(r#"{"dataset":"d.csv","target":"y","protected":"sex"}"#).unwrap();
        assert_eq!(cfg, ExperimentConfig::new("d.csv", "y", "sex"));
        assert_eq!((cfg.bootstrap_sweep, cfg.bootstrap_report), (10, 100));
        assert_eq!((cfg.w_acc, cfg.w_fair), (0.5, 0.5));
        assert_eq!(cfg.resolved_folds(83), 4);
        assert_eq!(cfg.resolved_folds(839), 5);
        assert_eq!(cfg.lr.l2_lambda, 1.0);
    }

    #[test]
    fn echo_round_trips() {
        let mut cfg = ExperimentConfig::new("d.csv", "y", "sex");
        cfg.folds = Some(3);
        cfg.focal = Some("F".into());
        cfg.forest.n_trees = 7;
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_values() {
        let bad = [
            r#"{"dataset":"d","target":"y","protected":"g","folds":1}"#,
            r#"{"dataset":"d","target":"y","protected":"g","bootstrap_report":0}"#,
            r#"{"dataset":"d","target":"y","protected":"g","w_acc":-1}"#,
            r#"{"dataset":"d","target":"y","protected":"g","w_acc":0,"w_fair":0}"#,
            r#"{"dataset":"d","target":"y","protected":"g","focal":"a","reference":"a"}"#,
            r#"{"dataset":"d","target":"y","protected":"g","unknown":1}"#,
            r#"{"target":"y","protected":"g"}"#,
        ];
        for text in bad {
            assert!(ExperimentConfig::from_json(text).is_err(), "{text}");
        }
    }
}
