//! Feature rankers and rank aggregation.
//!
//! Supervised rankers (forward selection, recursive elimination, tree depth,
//! logistic weights) score features by how well they predict the task label
//! inside one demographic subset. The association rankers (mutual
//! information, Spearman) score features by their dependence on the
//! protected attribute over the whole dataset, with low dependence ranked
//! best. Every ranking is a permutation of `1..=F`; ties fall to the lower
//! feature index unless a method states otherwise.

mod aggregate;
mod association;
pub mod stats;
mod supervised;

pub use aggregate::{aggregate, AggregateRanking};
pub use association::{rank_correlation_baseline, rank_mi, rank_spearman};
pub use supervised::{rank_dt_depth, rank_ffs, rank_lr_weights, rank_rfe};

use crate::learners::{ForestParams, LrParams, TreeParams};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MethodId {
    #[serde(rename = "FFS")]
    Ffs,
    #[serde(rename = "RFE")]
    Rfe,
    #[serde(rename = "DT_DEPTH")]
    DtDepth,
    #[serde(rename = "LR_WEIGHTS")]
    LrWeights,
    #[serde(rename = "MI")]
    Mi,
    #[serde(rename = "SPEARMAN")]
    Spearman,
    #[serde(rename = "CORR_BASELINE")]
    CorrBaseline,
}

impl MethodId {
    /// The six methods entering the fair aggregate.
    pub const FAIR_METHODS: [MethodId; 6] = [
        MethodId::Ffs,
        MethodId::Rfe,
        MethodId::DtDepth,
        MethodId::LrWeights,
        MethodId::Mi,
        MethodId::Spearman,
    ];

    pub const PER_GROUP: [MethodId; 4] = [
        MethodId::Ffs,
        MethodId::Rfe,
        MethodId::DtDepth,
        MethodId::LrWeights,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MethodId::Ffs => "FFS",
            MethodId::Rfe => "RFE",
            MethodId::DtDepth => "DT_DEPTH",
            MethodId::LrWeights => "LR_WEIGHTS",
            MethodId::Mi => "MI",
            MethodId::Spearman => "SPEARMAN",
            MethodId::CorrBaseline => "CORR_BASELINE",
        }
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankingFlag {
    /// The fitted tree never split; ranks fall back to feature order.
    LeafOnlyTree,
    /// More than two groups; the group id was used as an ordinal.
    OrdinalGroups,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRanking<T> {
    pub method: MethodId,
    /// `None` for rankings computed on the full dataset.
    pub group: Option<usize>,
    /// `rank[f]` is feature `f`'s rank, 1 = best.
    pub rank: Vec<usize>,
    /// Raw per-feature score the rank was derived from.
    pub scores: Vec<T>,
    pub flags: Vec<RankingFlag>,
}

impl<T> MethodRanking<T> {
    pub fn for_group(mut self, group: usize) -> Self {
        self.group = Some(group);
        self
    }

    /// Features from best to worst.
    pub fn order(&self) -> Vec<usize> {
        let mut order = vec![0; self.rank.len()];
        for (f, &r) in self.rank.iter().enumerate() {
            order[r - 1] = f;
        }
        order
    }
}

/// Ranks from a strict order on features: `rank[f] = 1 + position of f`.
pub(crate) fn ranks_from_order(order: &[usize]) -> Vec<usize> {
    let mut rank = vec![0; order.len()];
    for (pos, &f) in order.iter().enumerate() {
        rank[f] = pos + 1;
    }
    rank
}

/// Sorts features with `better` (Less = first) and breaks ties by index.
pub(crate) fn ranks_by(n: usize, better: impl Fn(usize, usize) -> Ordering) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| better(a, b).then(a.cmp(&b)));
    ranks_from_order(&order)
}

pub(crate) fn cmp_real<T: Real>(a: T, b: T) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}

/// Hyperparameters shared by the rankers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankerParams<T> {
    pub forest: ForestParams,
    pub tree: TreeParams,
    pub lr: LrParams<T>,
    /// Internal stratified folds scoring forward selection.
    pub internal_folds: usize,
    pub mi_bins: usize,
}

impl<T: Real> Default for RankerParams<T> {
    fn default() -> Self {
        Self {
            forest: ForestParams::default(),
            tree: TreeParams::default(),
            lr: LrParams::default(),
            internal_folds: 3,
            mi_bins: 10,
        }
    }
}
