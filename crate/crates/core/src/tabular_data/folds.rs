use super::encode::EncodedDataset;
use crate::error::{Error, Result};
use crate::seed::{stream_rng, tags};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Assignment of every row to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    k: usize,
    assignment: Vec<usize>,
    seed: u64,
}

impl FoldPlan {
    /// Stratified assignment: each class is shuffled and dealt round-robin,
    /// the second class continuing where the first stopped so fold sizes
    /// stay balanced too.
    pub fn stratified(y: &[u8], k: usize, seed: u64) -> Result<Self> {
        if k < 2 {
            return Err(Error::TooFewFolds(k));
        }
        let mut assignment = vec![usize::MAX; y.len()];
        let mut rng = stream_rng(seed, tags::FOLDS, 0);
        let mut next = 0;
        for class in [0u8, 1] {
            let mut members: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
            if members.len() < k {
                return Err(Error::InsufficientClass {
                    class,
                    count: members.len(),
                    folds: k,
                });
            }
            members.shuffle(&mut rng);
            for row in members {
                assignment[row] = next;
                next = (next + 1) % k;
            }
        }
        if assignment.contains(&usize::MAX) {
            return Err(Error::TargetNotBinary {
                column: "y".into(),
                distinct: 3,
            });
        }
        Ok(Self {
            k,
            assignment,
            seed,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] != fold)
            .collect()
    }
}

pub fn stratified_kfold<T: Copy>(ds: &EncodedDataset<T>, k: usize, seed: u64) -> Result<FoldPlan> {
    FoldPlan::stratified(ds.y(), k, seed)
}

/// Coordinates of one bootstrap draw; the draw is a pure function of these.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BootstrapStream {
    pub master_seed: u64,
    pub fold: usize,
    pub iteration: usize,
    /// Redraw counter, 0 for the first attempt.
    pub attempt: u32,
}

impl BootstrapStream {
    pub fn new(master_seed: u64, fold: usize, iteration: usize) -> Self {
        Self {
            master_seed,
            fold,
            iteration,
            attempt: 0,
        }
    }

    pub fn retry(self) -> Self {
        Self {
            attempt: self.attempt + 1,
            ..self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapDraw {
    pub indices: Vec<usize>,
    pub iteration: usize,
    pub source_fold: usize,
}

/// Draws `size` entries of `train_indices` uniformly with replacement.
pub fn bootstrap_sample(
    train_indices: &[usize],
    size: usize,
    stream: BootstrapStream,
) -> Result<BootstrapDraw> {
    if train_indices.is_empty() {
        return Err(Error::EmptyIndexList);
    }
    let mut rng = stream_rng(
        stream.master_seed,
        stream.fold as u64,
        (stream.iteration as u64) | (u64::from(stream.attempt) << 40),
    );
    let n = train_indices.len();
    let indices = (0..size)
        .map(|_| train_indices[rng.random_range(0..n)])
        .collect();
    Ok(BootstrapDraw {
        indices,
        iteration: stream.iteration,
        source_fold: stream.fold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fold_counts(plan: &FoldPlan, y: &[u8], class: u8) -> Vec<usize> {
        let mut c = vec![0; plan.k()];
        for (i, &f) in plan.assignment().iter().enumerate() {
            if y[i] == class {
                c[f] += 1;
            }
        }
        c
    }

    #[test]
    fn eight_rows_four_folds() {
        let y = [1, 1, 1, 1, 0, 0, 0, 0];
        for seed in [1, 2] {
            let plan = FoldPlan::stratified(&y, 4, seed).unwrap();
            assert_eq!(fold_counts(&plan, &y, 1), vec![1; 4]);
            assert_eq!(fold_counts(&plan, &y, 0), vec![1; 4]);
        }
    }

    #[test]
    fn three_positives() {
        let y = [1, 1, 1, 0, 0, 0, 0, 0, 0, 0];
        assert!(matches!(
            FoldPlan::stratified(&y, 5, 0),
            Err(Error::InsufficientClass { class: 1, count: 3, folds: 5 })
        ));
        let plan = FoldPlan::stratified(&y, 3, 0).unwrap();
        assert_eq!(fold_counts(&plan, &y, 1), vec![1, 1, 1]);
        assert!(matches!(FoldPlan::stratified(&y, 1, 0), Err(Error::TooFewFolds(1))));
    }

    #[test]
    fn train_and_test_partition() {
        let y = [0, 1, 0, 1, 0, 1, 1, 0, 0];
        let plan = FoldPlan::stratified(&y, 3, 9).unwrap();
        for f in 0..3 {
            let mut all = plan.train_indices(f);
            all.extend(plan.test_indices(f));
            all.sort_unstable();
            assert_eq!(all, (0..9).collect::<Vec<_>>());
        }
    }

    #[test]
    fn bootstrap_basics() {
        let idx: Vec<usize> = (0..10).collect();
        let d = bootstrap_sample(&idx, 10, BootstrapStream::new(3, 1, 2)).unwrap();
        assert_eq!(d.indices.len(), 10);
        assert!(d.indices.iter().all(|&i| i < 10));
        assert_eq!((d.source_fold, d.iteration), (1, 2));
        assert_eq!(d, bootstrap_sample(&idx, 10, BootstrapStream::new(3, 1, 2)).unwrap());
        assert_ne!(d, bootstrap_sample(&idx, 10, BootstrapStream::new(3, 1, 2).retry()).unwrap());

        let single = bootstrap_sample(&[5], 3, BootstrapStream::new(0, 0, 0)).unwrap();
        assert_eq!(single.indices, vec![5, 5, 5]);
        assert!(matches!(
            bootstrap_sample(&[], 3, BootstrapStream::new(0, 0, 0)),
            Err(Error::EmptyIndexList)
        ));
    }

    proptest! {
        #[test]
        fn stratification_within_one(n in 4usize..120, k in 2usize..8, seed: u64, ybits: Vec<bool>) {
            let y: Vec<u8> = (0..n).map(|i| u8::from(*ybits.get(i).unwrap_or(&(i % 3 == 0)))).collect();
            let n1 = y.iter().filter(|&&v| v == 1).count();
            let n0 = n - n1;
            match FoldPlan::stratified(&y, k, seed) {
                Ok(plan) => {
                    prop_assert_eq!(plan.assignment().len(), n);
                    for (class, total) in [(0u8, n0), (1u8, n1)] {
                        for c in fold_counts(&plan, &y, class) {
                            prop_assert!(c.abs_diff(total / k) <= 1);
                        }
                    }
                    prop_assert_eq!(&plan, &FoldPlan::stratified(&y, k, seed).unwrap());
                }
                Err(_) => prop_assert!(n0 < k || n1 < k),
            }
        }
    }
}
