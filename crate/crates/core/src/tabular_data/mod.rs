//! Tabular ingestion: CSV parsing, label encoding, group splitting, stratified
//! folds, bootstrap draws and z-score standardization.

mod encode;
mod folds;
mod standardize;
mod table;

pub use encode::{encode, split_by_group, CategoryCodec, EncodedDataset, FeatureKind, GroupSubset};
pub use folds::{bootstrap_sample, stratified_kfold, BootstrapDraw, BootstrapStream, FoldPlan};
pub use standardize::{standardize_fit_apply, Standardizer};
pub use table::{is_missing, load_csv, read_csv, Column, ColumnRoles, Table};
