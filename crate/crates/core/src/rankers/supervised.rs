use super::{cmp_real, ranks_by, ranks_from_order, MethodId, MethodRanking, RankerParams, RankingFlag};
use crate::error::{Error, Result};
use crate::fairness::{balanced_accuracy, PredictionBatch};
use crate::learners::{forest_fit, lr_fit, tree_fit, Node, TreeParams};
use crate::scalar::Real;
use crate::seed::derive_seed;
use crate::tabular_data::{EncodedDataset, FoldPlan};

fn require_both_classes<T: Copy>(data: &EncodedDataset<T>) -> Result<[usize; 2]> {
    let [n0, n1] = data.class_counts();
    if n0 < 2 || n1 < 2 {
        return Err(Error::DegenerateSubset { n0, n1 });
    }
    Ok([n0, n1])
}

/// Greedy forward selection scored by internal cross-validated forest
/// balanced accuracy. Rank = order of addition. Score = CV balanced
/// accuracy at the moment the feature was added.
pub fn rank_ffs<T: Real>(
    data: &EncodedDataset<T>,
    params: &RankerParams<T>,
    seed: u64,
) -> Result<MethodRanking<T>> {
    let [n0, n1] = require_both_classes(data)?;
    let n_features = data.n_features();
    let folds = params.internal_folds.min(n0).min(n1).max(2);
    let plan = FoldPlan::stratified(data.y(), folds, derive_seed(seed, 0, 0))?;
    let splits: Vec<(Vec<usize>, Vec<usize>)> = (0..folds)
        .map(|k| (plan.train_indices(k), plan.test_indices(k)))
        .collect();
    let y = data.y();

    let cv_score = |features: &[usize]| -> Result<T> {
        let mut total = T::zero();
        for (k, (train, test)) in splits.iter().enumerate() {
            let x_train = data.x().select(train, features);
            let y_train: Vec<u8> = train.iter().map(|&r| y[r]).collect();
            let forest = forest_fit(
                &x_train,
                &y_train,
                params.forest.with_seed(derive_seed(seed, k as u64, 1)),
            )?;
            let pred = forest.predict(&data.x().select(test, features));
            let truth: Vec<u8> = test.iter().map(|&r| y[r]).collect();
            let batch = PredictionBatch::new(truth, pred, vec![0; test.len()])?;
            total = total + balanced_accuracy::<T>(&batch)?;
        }
        Ok(total / T::count(splits.len()))
    };

    let mut selected: Vec<usize> = Vec::with_capacity(n_features);
    let mut remaining: Vec<usize> = (0..n_features).collect();
    let mut scores = vec![T::zero(); n_features];
    while !remaining.is_empty() {
        let mut best: Option<(usize, T)> = None;
        for (pos, &f) in remaining.iter().enumerate() {
            let mut candidate = selected.clone();
            candidate.push(f);
            let s = cv_score(&candidate)?;
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((pos, s));
            }
        }
        let (pos, s) = best.expect("remaining is non-empty");
        let f = remaining.remove(pos);
        scores[f] = s;
        selected.push(f);
    }
    Ok(MethodRanking {
        method: MethodId::Ffs,
        group: None,
        rank: ranks_from_order(&selected),
        scores,
        flags: vec![],
    })
}

/// Recursive elimination: repeatedly drop the least important feature of a
/// forest fitted on the survivors (ties drop the higher index). The last
/// survivor ranks 1. Score = importance when removed.
pub fn rank_rfe<T: Real>(
    data: &EncodedDataset<T>,
    params: &RankerParams<T>,
    seed: u64,
) -> Result<MethodRanking<T>> {
    require_both_classes(data)?;
    let n_features = data.n_features();
    let rows: Vec<usize> = (0..data.n_rows()).collect();
    let mut remaining: Vec<usize> = (0..n_features).collect();
    let mut removed = Vec::with_capacity(n_features);
    let mut scores = vec![T::zero(); n_features];
    let mut step = 0u64;
    while !remaining.is_empty() {
        let x = data.x().select(&rows, &remaining);
        let forest = forest_fit(&x, data.y(), params.forest.with_seed(derive_seed(seed, step, 2)))?;
        let imp = forest.importances();
        let mut worst = 0;
        for i in 1..remaining.len() {
            if imp[i] <= imp[worst] {
                worst = i;
            }
        }
        scores[remaining[worst]] = imp[worst];
        removed.push(remaining.remove(worst));
        step += 1;
    }
    removed.reverse();
    Ok(MethodRanking {
        method: MethodId::Rfe,
        group: None,
        rank: ranks_from_order(&removed),
        scores,
        flags: vec![],
    })
}

/// Shallowest split depth of each feature in one CART tree (root = 0;
/// unused features score +inf). Ties go to the larger total impurity
/// decrease, then the lower index. Accepts single-class subsets, which yield
/// a leaf-only tree and a flagged index-order ranking.
pub fn rank_dt_depth<T: Real>(
    data: &EncodedDataset<T>,
    params: &RankerParams<T>,
    seed: u64,
) -> Result<MethodRanking<T>> {
    let tree = tree_fit(
        data.x(),
        data.y(),
        TreeParams {
            seed,
            ..params.tree
        },
    )?;
    let depth = tree.feature_min_depth();
    let mut decrease = vec![T::zero(); data.n_features()];
    for node in tree.nodes() {
        if let Node::Split {
            feature,
            impurity_decrease,
            ..
        } = node
        {
            decrease[*feature] = decrease[*feature] + *impurity_decrease;
        }
    }
    let scores: Vec<T> = depth
        .iter()
        .map(|d| d.map_or(T::infinity(), T::count))
        .collect();
    let rank = ranks_by(data.n_features(), |a, b| {
        cmp_real(scores[a], scores[b]).then_with(|| cmp_real(decrease[b], decrease[a]))
    });
    Ok(MethodRanking {
        method: MethodId::DtDepth,
        group: None,
        rank,
        scores,
        flags: if tree.is_leaf_only() {
            vec![RankingFlag::LeafOnlyTree]
        } else {
            vec![]
        },
    })
}

/// Absolute standardized logistic-regression weight, largest first.
pub fn rank_lr_weights<T: Real>(
    data: &EncodedDataset<T>,
    params: &RankerParams<T>,
    _seed: u64,
) -> Result<MethodRanking<T>> {
    require_both_classes(data)?;
    let model = lr_fit(data.x(), data.y(), params.lr)?;
    let scores: Vec<T> = model.weights.iter().map(|w| w.abs()).collect();
    let rank = ranks_by(scores.len(), |a, b| cmp_real(scores[b], scores[a]));
    Ok(MethodRanking {
        method: MethodId::LrWeights,
        group: None,
        rank,
        scores,
        flags: vec![],
    })
}
