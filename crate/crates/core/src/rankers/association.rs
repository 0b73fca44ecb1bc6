use super::stats::{discrete_codes, equal_frequency_bins, mutual_information, pearson, spearman};
use super::{cmp_real, ranks_by, MethodId, MethodRanking, RankingFlag};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::tabular_data::{EncodedDataset, FeatureKind};

fn require_groups<T: Copy>(ds: &EncodedDataset<T>) -> Result<usize> {
    let present = ds.group_sizes().iter().filter(|&&s| s > 0).count();
    if present < 2 {
        return Err(Error::ProtectedConstant(
            ds.group_labels().first().cloned().unwrap_or_default(),
        ));
    }
    Ok(present)
}

/// Plug-in mutual information (nats) between each feature and the group.
/// Numeric features are cut into `n_bins` equal-frequency bins, categorical
/// codes are used directly. Lowest information ranks first.
pub fn rank_mi<T: Real>(ds: &EncodedDataset<T>, n_bins: usize) -> Result<MethodRanking<T>> {
    require_groups(ds)?;
    let scores: Vec<T> = (0..ds.n_features())
        .map(|f| {
            let column = ds.x().column(f);
            let codes = match ds.feature_kinds()[f] {
                FeatureKind::Numeric => equal_frequency_bins(&column, n_bins.max(1)),
                FeatureKind::Categorical => discrete_codes(&column),
            };
            mutual_information(&codes, ds.g())
        })
        .collect();
    Ok(MethodRanking {
        method: MethodId::Mi,
        group: None,
        rank: ranks_by(scores.len(), |a, b| cmp_real(scores[a], scores[b])),
        scores,
        flags: vec![],
    })
}

/// Absolute Spearman correlation between each feature and the group id.
/// Lowest `|rho|` ranks first; zero-variance features score 0.
pub fn rank_spearman<T: Real>(ds: &EncodedDataset<T>) -> Result<MethodRanking<T>> {
    let present = require_groups(ds)?;
    let group: Vec<T> = ds.g().iter().map(|&g| T::count(g)).collect();
    let scores: Vec<T> = (0..ds.n_features())
        .map(|f| spearman(&ds.x().column(f), &group).abs())
        .collect();
    Ok(MethodRanking {
        method: MethodId::Spearman,
        group: None,
        rank: ranks_by(scores.len(), |a, b| cmp_real(scores[a], scores[b])),
        scores,
        flags: if present > 2 {
            vec![RankingFlag::OrdinalGroups]
        } else {
            vec![]
        },
    })
}

/// Absolute Pearson correlation with the target, largest first.
pub fn rank_correlation_baseline<T: Real>(ds: &EncodedDataset<T>) -> Result<MethodRanking<T>> {
    let [n0, n1] = ds.class_counts();
    if n0 == 0 || n1 == 0 {
        return Err(Error::SingleClass);
    }
    let y: Vec<T> = ds.y().iter().map(|&v| T::count(v as usize)).collect();
    let scores: Vec<T> = (0..ds.n_features())
        .map(|f| pearson(&ds.x().column(f), &y).abs())
        .collect();
    Ok(MethodRanking {
        method: MethodId::CorrBaseline,
        group: None,
        rank: ranks_by(scores.len(), |a, b| cmp_real(scores[b], scores[a])),
        scores,
        flags: vec![],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    fn ds(columns: &[Vec<f64>], y: Vec<u8>, g: Vec<usize>) -> EncodedDataset<f64> {
        let names = (0..columns.len()).map(|i| format!("f{i}")).collect();
        EncodedDataset::new(Matrix::from_columns(columns).unwrap(), y, g, names).unwrap()
    }

    #[test]
    fn mi_group_copy_is_worst() {
        let g = vec![0, 1, 0, 1, 0, 1, 0, 1];
        let gf: Vec<f64> = g.iter().map(|&v| v as f64).collect();
        let d = ds(
            &[gf, vec![1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 4.0, 4.0], vec![7.0; 8]],
            vec![0, 0, 1, 1, 0, 1, 0, 1],
            g,
        );
        let r = rank_mi(&d, 10).unwrap();
        assert!((r.scores[0] - std::f64::consts::LN_2).abs() < 1e-12);
        assert_eq!(r.scores[2], 0.0);
        assert_eq!(r.rank[0], 3);
    }

    #[test]
    fn spearman_example_and_extremes() {
        let d = ds(
            &[vec![1.0, 2.0, 3.0, 4.0], vec![5.0; 4], vec![0.0, 0.0, 1.0, 1.0]],
            vec![0, 1, 0, 1],
            vec![0, 0, 1, 1],
        );
        let r = rank_spearman(&d).unwrap();
        assert!((r.scores[0] - 0.894427190999916).abs() < 1e-12);
        assert_eq!(r.scores[1], 0.0);
        assert_eq!(r.scores[2], 1.0);
        assert_eq!(r.rank, vec![2, 1, 3]);
    }

    #[test]
    fn correlation_baseline_orders_by_strength() {
        // f1 == y; f0 orthogonal to y in sample
        let y = vec![0, 1, 0, 1];
        let d = ds(
            &[vec![1.0, 1.0, -1.0, -1.0], vec![0.0, 1.0, 0.0, 1.0]],
            y,
            vec![0, 0, 1, 1],
        );
        let r = rank_correlation_baseline(&d).unwrap();
        assert_eq!(r.scores, vec![0.0, 1.0]);
        assert_eq!(r.rank, vec![2, 1]);
    }
}
