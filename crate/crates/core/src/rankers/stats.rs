//! Rank and association statistics used by the unsupervised rankers.

use crate::scalar::Real;
use std::cmp::Ordering;

fn cmp<T: Real>(a: &T, b: &T) -> Ordering {
    a.partial_cmp(b).expect("finite values")
}

/// 1-based ranks; tied values share the average of their positions.
pub fn mid_ranks<T: Real>(values: &[T]) -> Vec<T> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| cmp(&values[i], &values[j]));
    let mut ranks = vec![T::zero(); values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let avg = T::count(start + 1 + end) / T::lit(2.0);
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

/// Pearson correlation; 0 when either side has zero variance.
pub fn pearson<T: Real>(a: &[T], b: &[T]) -> T {
    assert_eq!(a.len(), b.len());
    if a.is_empty() {
        return T::zero();
    }
    let n = T::count(a.len());
    let ma = a.iter().copied().sum::<T>() / n;
    let mb = b.iter().copied().sum::<T>() / n;
    let (mut sab, mut saa, mut sbb) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab = sab + dx * dy;
        saa = saa + dx * dx;
        sbb = sbb + dy * dy;
    }
    if saa == T::zero() || sbb == T::zero() {
        return T::zero();
    }
    // rounding can push a perfect correlation a hair past 1
    (sab / (saa.sqrt() * sbb.sqrt())).max(-T::one()).min(T::one())
}

pub fn spearman<T: Real>(a: &[T], b: &[T]) -> T {
    pearson(&mid_ranks(a), &mid_ranks(b))
}

/// Equal-frequency binning by rank: a value's bin is
/// `floor(n_bins * #{values < v} / n)`. Ties share a bin and any strictly
/// increasing transform of the input yields the same bins.
pub fn equal_frequency_bins<T: Real>(values: &[T], n_bins: usize) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(cmp);
    let n = values.len();
    values
        .iter()
        .map(|v| {
            let below = sorted.partition_point(|s| s < v);
            below * n_bins / n
        })
        .collect()
}

/// Dense codes `0..d` for the distinct values, in ascending value order.
pub fn discrete_codes<T: Real>(values: &[T]) -> Vec<usize> {
    let mut distinct = values.to_vec();
    distinct.sort_by(cmp);
    distinct.dedup();
    values
        .iter()
        .map(|v| distinct.partition_point(|d| d < v))
        .collect()
}

/// Plug-in mutual information of two discrete sequences, in nats.
pub fn mutual_information<T: Real>(a: &[usize], b: &[usize]) -> T {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    if n == 0 {
        return T::zero();
    }
    let na = a.iter().max().map_or(0, |m| m + 1);
    let nb = b.iter().max().map_or(0, |m| m + 1);
    let mut joint = vec![0usize; na * nb];
    let mut ca = vec![0usize; na];
    let mut cb = vec![0usize; nb];
    for (&i, &j) in a.iter().zip(b) {
        joint[i * nb + j] += 1;
        ca[i] += 1;
        cb[j] += 1;
    }
    let nf = T::count(n);
    let mut mi = T::zero();
    for i in 0..na {
        for j in 0..nb {
            let c = joint[i * nb + j];
            if c == 0 {
                continue;
            }
            // ln(p_ij / (p_i p_j)) = ln(c n / (c_i c_j)), integer products keep
            // independent cells at exactly ln(1) = 0
            let num = T::lit((c as f64) * (n as f64));
            let den = T::lit((ca[i] as f64) * (cb[j] as f64));
            mi = mi + T::count(c) / nf * (num / den).ln();
        }
    }
    mi.max(T::zero())
}
