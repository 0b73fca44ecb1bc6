//! Fairness-aware feature selection.
//!
//! Rank features separately within each protected group, average the ranks,
//! then sweep prefixes of the averaged order and keep the one that best
//! trades balanced accuracy against disparate impact.

pub mod error;
pub mod experiment;
pub mod fairness;
pub mod learners;
pub mod matrix;
pub mod rankers;
pub mod scalar;
pub mod seed;
pub mod selection;
pub mod tabular_data;

pub use error::{Error, Result};

pub type Dataset = tabular_data::EncodedDataset<f64>;
pub type Dataset32 = tabular_data::EncodedDataset<f32>;
pub type Ranking = rankers::MethodRanking<f64>;
pub type Aggregate = rankers::AggregateRanking<f64>;
pub type ExactAggregate = rankers::AggregateRanking<num_rational::Ratio<i64>>;
pub type Report = fairness::FairnessReport<f64>;
pub type Report32 = fairness::FairnessReport<f32>;
pub type Logistic = learners::LogisticModel<f64>;
pub type Logistic32 = learners::LogisticModel<f32>;
pub type Selection = selection::SelectionResult<f64>;
