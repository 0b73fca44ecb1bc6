//! Bagged random forest with per-split feature subsampling and mean
//! impurity-decrease importances.

use super::check_training_data;
use super::tree::{TreeModel, TreeParams};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;
use crate::seed::stream_rng;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// `None` means `ceil(sqrt(F))`.
    pub features_per_split: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            features_per_split: None,
            max_depth: None,
            min_samples_split: 2,
            seed: 0,
        }
    }
}

impl ForestParams {
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn resolved_features_per_split(&self, n_features: usize) -> usize {
        self.features_per_split
            .unwrap_or_else(|| (n_features as f64).sqrt().ceil() as usize)
            .clamp(1, n_features.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel<T> {
    trees: Vec<TreeModel<T>>,
    features_per_split: usize,
    importances: Vec<T>,
}

/// Fits `n_trees` trees, each on a bootstrap draw of the rows. Tree `i`
/// draws from its own stream `(seed, i)`, so the fit is deterministic under
/// any thread count.
pub fn forest_fit<T: Real>(x: &Matrix<T>, y: &[u8], params: ForestParams) -> Result<ForestModel<T>> {
    let [n0, n1] = check_training_data(x, y)?;
    if n0 == 0 || n1 == 0 {
        return Err(Error::SingleClass);
    }
    if params.n_trees == 0 {
        return Err(Error::InvalidConfig("forest needs at least one tree".into()));
    }
    let n = y.len();
    let features_per_split = params.resolved_features_per_split(x.ncols());
    let tree_params = TreeParams {
        max_depth: params.max_depth,
        min_samples_split: params.min_samples_split,
        max_features: Some(features_per_split),
        seed: params.seed,
    };
    let trees: Vec<TreeModel<T>> = (0..params.n_trees)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(params.seed, i as u64, 0);
            let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            TreeModel::grow(x, y, rows, tree_params, &mut rng)
        })
        .collect();

    let mut importances = vec![T::zero(); x.ncols()];
    for tree in &trees {
        for (acc, v) in importances.iter_mut().zip(tree.impurity_importance()) {
            *acc = *acc + v;
        }
    }
    let total: T = importances.iter().copied().sum();
    if total > T::zero() {
        importances.iter_mut().for_each(|v| *v = *v / total);
    }
    Ok(ForestModel {
        trees,
        features_per_split,
        importances,
    })
}

impl<T: Real> ForestModel<T> {
    pub fn trees(&self) -> &[TreeModel<T>] {
        &self.trees
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn features_per_split(&self) -> usize {
        self.features_per_split
    }

    /// Normalized to sum 1, or all zero when no tree split.
    pub fn importances(&self) -> &[T] {
        &self.importances
    }

    /// Majority vote; ties go to class 0.
    pub fn predict_row(&self, row: &[T]) -> u8 {
        let ones = self.trees.iter().filter(|t| t.predict_row(row) == 1).count();
        u8::from(2 * ones > self.trees.len())
    }

    pub fn predict(&self, x: &Matrix<T>) -> Vec<u8> {
        (0..x.nrows()).map(|r| self.predict_row(x.row(r))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::stream_rng;

    fn informative_data(seed: u64, n: usize, noise: usize) -> (Matrix<f64>, Vec<u8>) {
        let mut rng = stream_rng(seed, 99, 0);
        let mut data = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let s: f64 = rng.random::<f64>() * 2.0 - 1.0;
            let flip = rng.random::<f64>() < 0.1;
            y.push(u8::from((s > 0.0) != flip));
            data.push(s);
            for _ in 0..noise {
                data.push(rng.random::<f64>() * 2.0 - 1.0);
            }
        }
        (Matrix::from_vec(n, noise + 1, data).unwrap(), y)
    }

    #[test]
    fn informative_feature_dominates() {
        let mut wins = 0;
        for seed in 0..20 {
            let (x, y) = informative_data(seed, 500, 9);
            let params = ForestParams::default().with_seed(seed);
            let f = forest_fit(&x, &y, params).unwrap();
            let imp = f.importances();
            if (1..10).all(|j| imp[0] > imp[j]) {
                wins += 1;
            }
            assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(imp.iter().all(|&v| v >= 0.0));
        }
        assert!(wins >= 19, "{wins}/20");
    }

    #[test]
    fn constant_features_give_leaf_only_trees() {
        let x = Matrix::from_rows(&[vec![1.0, 2.0], vec![1.0, 2.0]]).unwrap();
        let params = ForestParams {
            n_trees: 1,
            features_per_split: Some(2),
            ..ForestParams::default()
        };
        let f = forest_fit(&x, &[0, 1], params).unwrap();
        assert!(f.trees()[0].is_leaf_only());
        assert_eq!(f.importances(), &[0.0, 0.0]);
    }

    #[test]
    fn vote_is_tree_mode_with_ties_to_zero() {
        let (x, y) = informative_data(3, 120, 3);
        for n_trees in [1, 4, 7] {
            let f = forest_fit(&x, &y, ForestParams { n_trees, ..ForestParams::default() }).unwrap();
            for r in 0..x.nrows() {
                let votes: Vec<u8> = f.trees().iter().map(|t| t.predict_row(x.row(r))).collect();
                let ones = votes.iter().filter(|&&v| v == 1).count();
                let zeros = votes.len() - ones;
                let mode = if ones > zeros { 1 } else { 0 };
                assert_eq!(f.predict_row(x.row(r)), mode);
            }
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let (x, y) = informative_data(5, 200, 4);
        let params = ForestParams { n_trees: 16, ..ForestParams::default().with_seed(77) };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| forest_fit(&x, &y, params).unwrap());
        let b = four.install(|| forest_fit(&x, &y, params).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn refuses_single_class() {
        let x = Matrix::from_rows(&[vec![1.0], vec![2.0]]).unwrap();
        assert!(matches!(forest_fit(&x, &[0, 0], ForestParams::default()), Err(Error::SingleClass)));
    }
}
