use super::{MethodId, MethodRanking};
use crate::error::{Error, Result};
use crate::scalar::RankValue;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// Averaged ranks. `per_group[g][f]` is the mean rank of feature `f` over
/// the methods applied for group `g`; `combined[f]` the mean of those over
/// groups; `order` sorts features by `combined`, ties by index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRanking<R> {
    pub per_group: Vec<Vec<R>>,
    pub combined: Vec<R>,
    pub order: Vec<usize>,
    /// Methods averaged per group.
    pub n_methods: usize,
    pub n_groups: usize,
}

/// Averages rankings within each group, then across groups.
///
/// A group's methods are the rankings tagged with that group plus every
/// full-data ranking (`group == None`); the correlation baseline never
/// participates. Each method in `required` must appear exactly once per
/// group, and all groups must see the same number of methods.
pub fn aggregate<R: RankValue, T>(
    rankings: &[MethodRanking<T>],
    n_groups: usize,
    required: &[MethodId],
) -> Result<AggregateRanking<R>> {
    let relevant: Vec<&MethodRanking<T>> = rankings
        .iter()
        .filter(|r| r.method != MethodId::CorrBaseline)
        .collect();
    let n_features = relevant.first().map(|r| r.rank.len()).ok_or(Error::EmptyList)?;
    if n_groups == 0 {
        return Err(Error::EmptyList);
    }
    for r in &relevant {
        if r.rank.len() != n_features {
            return Err(Error::MismatchedFeatures {
                expected: n_features,
                found: r.rank.len(),
            });
        }
        if let Some(&bad) = r.rank.iter().find(|&&v| v == 0 || v > n_features) {
            return Err(Error::OutOfRange {
                value: bad,
                max: n_features,
            });
        }
    }

    let mut per_group = Vec::with_capacity(n_groups);
    let mut n_methods = None;
    for g in 0..n_groups {
        let members: Vec<&&MethodRanking<T>> = relevant
            .iter()
            .filter(|r| r.group.is_none_or(|rg| rg == g))
            .collect();
        for (i, a) in members.iter().enumerate() {
            if members[..i].iter().any(|b| b.method == a.method) {
                return Err(Error::DuplicateMethod {
                    method: a.method.to_string(),
                    group: g,
                });
            }
        }
        if let Some(missing) = required.iter().find(|m| !members.iter().any(|r| r.method == **m)) {
            return Err(Error::MissingMethod {
                method: missing.to_string(),
                group: g,
            });
        }
        match n_methods {
            None if members.is_empty() => {
                return Err(Error::MissingMethod {
                    method: "any".into(),
                    group: g,
                })
            }
            None => n_methods = Some(members.len()),
            Some(n) if n != members.len() => {
                return Err(Error::MissingMethod {
                    method: format!("{} of {n} methods present", members.len()),
                    group: g,
                })
            }
            Some(_) => {}
        }
        let n = R::from_usize(members.len()).expect("method count representable");
        let avg: Vec<R> = (0..n_features)
            .map(|f| {
                let sum = members.iter().fold(R::zero(), |acc, r| {
                    acc + R::from_usize(r.rank[f]).expect("rank representable")
                });
                sum / n
            })
            .collect();
        per_group.push(avg);
    }

    let m = R::from_usize(n_groups).expect("group count representable");
    let combined: Vec<R> = (0..n_features)
        .map(|f| per_group.iter().fold(R::zero(), |acc, g| acc + g[f]) / m)
        .collect();
    let mut order: Vec<usize> = (0..n_features).collect();
    order.sort_by(|&a, &b| {
        combined[a]
            .partial_cmp(&combined[b])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    Ok(AggregateRanking {
        per_group,
        combined,
        order,
        n_methods: n_methods.unwrap_or(0),
        n_groups,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    fn ranking(method: MethodId, group: Option<usize>, rank: Vec<usize>) -> MethodRanking<f64> {
        MethodRanking {
            method,
            group,
            scores: vec![0.0; rank.len()],
            rank,
            flags: vec![],
        }
    }

    #[test]
    fn identical_ranks() {
        let rs = [
            ranking(MethodId::Ffs, Some(0), vec![1, 2]),
            ranking(MethodId::Rfe, Some(0), vec![1, 2]),
        ];
        let a: AggregateRanking<f64> = aggregate(&rs, 1, &[]).unwrap();
        assert_eq!(a.per_group, vec![vec![1.0, 2.0]]);
        assert_eq!(a.combined, vec![1.0, 2.0]);
        assert_eq!(a.order, vec![0, 1]);
    }

    #[test]
    fn symmetric_tie_resolves_by_index() {
        let rs = [
            ranking(MethodId::Ffs, Some(0), vec![1, 2]),
            ranking(MethodId::Ffs, Some(1), vec![2, 1]),
        ];
        let a: AggregateRanking<f64> = aggregate(&rs, 2, &[MethodId::Ffs]).unwrap();
        assert_eq!(a.combined, vec![1.5, 1.5]);
        assert_eq!(a.order, vec![0, 1]);
    }

    #[test]
    fn exact_mean_of_three() {
        let rs = [
            ranking(MethodId::Ffs, Some(0), vec![1, 2, 3, 4]),
            ranking(MethodId::Rfe, Some(0), vec![4, 1, 2, 3]),
            ranking(MethodId::Mi, None, vec![4, 3, 2, 1]),
        ];
        let a: AggregateRanking<Ratio<i64>> = aggregate(&rs, 1, &[]).unwrap();
        assert_eq!(a.per_group[0][0], Ratio::from_integer(3));
        assert_eq!(a.per_group[0][1], Ratio::new(2, 1));
        let f: AggregateRanking<f64> = aggregate(&rs, 1, &[]).unwrap();
        assert_eq!(f.per_group[0][0], 3.0);
    }

    #[test]
    fn shared_rankings_enter_every_group() {
        let mut rs = Vec::new();
        for g in 0..2 {
            for m in MethodId::PER_GROUP {
                rs.push(ranking(m, Some(g), vec![1, 2, 3]));
            }
        }
        rs.push(ranking(MethodId::Mi, None, vec![3, 2, 1]));
        rs.push(ranking(MethodId::Spearman, None, vec![3, 2, 1]));
        rs.push(ranking(MethodId::CorrBaseline, None, vec![3, 1, 2]));
        let a: AggregateRanking<f64> = aggregate(&rs, 2, &MethodId::FAIR_METHODS).unwrap();
        assert_eq!(a.n_methods, 6);
        assert_eq!(a.per_group[0], vec![10.0 / 6.0, 2.0, 14.0 / 6.0]);
    }

    #[test]
    fn errors() {
        let rs = [ranking(MethodId::Ffs, Some(0), vec![1, 2])];
        assert!(matches!(
            aggregate::<f64, _>(&rs, 2, &[MethodId::Ffs]),
            Err(Error::MissingMethod { group: 1, .. })
        ));
        assert!(matches!(
            aggregate::<f64, _>(&rs, 1, &[MethodId::Mi]),
            Err(Error::MissingMethod { group: 0, .. })
        ));
        let rs = [
            ranking(MethodId::Ffs, Some(0), vec![1, 2]),
            ranking(MethodId::Rfe, Some(0), vec![1, 2, 3]),
        ];
        assert!(matches!(
            aggregate::<f64, _>(&rs, 1, &[]),
            Err(Error::MismatchedFeatures { .. })
        ));
        let rs = [
            ranking(MethodId::Ffs, Some(0), vec![1, 2]),
            ranking(MethodId::Ffs, None, vec![1, 2]),
        ];
        assert!(matches!(
            aggregate::<f64, _>(&rs, 1, &[]),
            Err(Error::DuplicateMethod { .. })
        ));
    }

    fn shuffled(seed: u64, n: usize) -> Vec<usize> {
        use rand::seq::SliceRandom;
        let mut v: Vec<usize> = (1..=n).collect();
        v.shuffle(&mut crate::seed::stream_rng(seed, 0, 0));
        v
    }

    fn six_method_set(n_features: usize, n_groups: usize, seed: u64) -> Vec<MethodRanking<f64>> {
        let mut rs = Vec::new();
        let mut next = seed;
        let mut draw = || {
            next += 1;
            shuffled(next, n_features)
        };
        for g in 0..n_groups {
            for m in MethodId::PER_GROUP {
                rs.push(ranking(m, Some(g), draw()));
            }
        }
        rs.push(ranking(MethodId::Mi, None, draw()));
        rs.push(ranking(MethodId::Spearman, None, draw()));
        rs
    }

    proptest::proptest! {
        #[test]
        fn exact_mean_matches_integer_oracle(f in 1usize..12, m in 1usize..5, seed in 0u64..1000) {
            let rs = six_method_set(f, m, seed);
            let a: AggregateRanking<Ratio<i64>> = aggregate(&rs, m, &MethodId::FAIR_METHODS).unwrap();
            let total: Ratio<i64> = a.combined.iter().sum();
            proptest::prop_assert_eq!(total, Ratio::from_integer((f * (f + 1) / 2) as i64));
            for feature in 0..f {
                let mut sum = 0i64;
                for g in 0..m {
                    sum += rs
                        .iter()
                        .filter(|r| r.group.is_none() || r.group == Some(g))
                        .map(|r| r.rank[feature] as i64)
                        .sum::<i64>();
                }
                proptest::prop_assert_eq!(a.combined[feature], Ratio::new(sum, (6 * m) as i64));
            }
        }

        #[test]
        fn group_labels_do_not_matter(f in 1usize..12, seed in 0u64..1000) {
            let rs = six_method_set(f, 2, seed);
            let swapped: Vec<_> = rs
                .iter()
                .cloned()
                .map(|mut r| {
                    r.group = r.group.map(|g| 1 - g);
                    r
                })
                .collect();
            let a: AggregateRanking<Ratio<i64>> = aggregate(&rs, 2, &MethodId::FAIR_METHODS).unwrap();
            let b: AggregateRanking<Ratio<i64>> = aggregate(&swapped, 2, &MethodId::FAIR_METHODS).unwrap();
            proptest::prop_assert_eq!(&a.combined, &b.combined);
            proptest::prop_assert_eq!(&a.order, &b.order);
            proptest::prop_assert_eq!(&a.per_group[0], &b.per_group[1]);
        }
    }
}
