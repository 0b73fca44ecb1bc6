//! Greedy CART classification tree on Gini impurity.
//!
//! Candidate thresholds are midpoints between consecutive distinct values.
//! A row goes left when `value <= threshold`. Among equal impurity decreases
//! the lowest feature index wins, then the lowest threshold.

use super::check_training_data;
use crate::error::Result;
use crate::matrix::Matrix;
use crate::scalar::{ratio, Real};
use crate::seed::{stream_rng, StreamRng};
use rand::seq::index;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// Features examined per split; `None` examines all.
    pub max_features: Option<usize>,
    pub seed: u64,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_samples_split: 2,
            max_features: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node<T> {
    Split {
        feature: usize,
        threshold: T,
        depth: usize,
        /// Gini of the node minus the size-weighted Gini of its children.
        impurity_decrease: T,
        n_samples: usize,
        left: usize,
        right: usize,
    },
    Leaf {
        class: u8,
        proba: [T; 2],
        depth: usize,
        n_samples: usize,
    },
}

impl<T> Node<T> {
    pub fn depth(&self) -> usize {
        match self {
            Node::Split { depth, .. } | Node::Leaf { depth, .. } => *depth,
        }
    }

    pub fn n_samples(&self) -> usize {
        match self {
            Node::Split { n_samples, .. } | Node::Leaf { n_samples, .. } => *n_samples,
        }
    }
}

/// Tree stored as a node arena; index 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel<T> {
    nodes: Vec<Node<T>>,
    n_features: usize,
    params: TreeParams,
}

#[inline]
fn gini<T: Real>(n0: usize, n1: usize) -> T {
    let n = n0 + n1;
    if n == 0 {
        return T::zero();
    }
    let p0: T = ratio(n0, n);
    let p1: T = ratio(n1, n);
    T::one() - p0 * p0 - p1 * p1
}

/// Node awaiting growth: row range start and end, depth, slot in parent to patch.
type Pending = (usize, usize, usize, Option<(usize, bool)>);

struct SplitCandidate<T> {
    feature: usize,
    threshold: T,
    decrease: T,
}

/// Best split of a node on `feature`, given the node's rows in ascending
/// order of that feature, if the feature is not constant there.
fn best_split_on<T: Real>(
    x: &Matrix<T>,
    y: &[u8],
    sorted: &[usize],
    feature: usize,
    parent_gini: T,
    total1: usize,
) -> Option<SplitCandidate<T>> {
    let n = sorted.len();
    // maximizing the Gini decrease is maximizing (l0^2 + l1^2)/nl + (r0^2 + r1^2)/nr,
    // compared exactly as num/den with den = nl * nr
    let mut left1 = 0;
    let mut best: Option<(usize, usize, u128, u128)> = None;
    let mut next = x.get(sorted[0], feature);
    for i in 0..n - 1 {
        left1 += usize::from(y[sorted[i]]);
        let current = next;
        next = x.get(sorted[i + 1], feature);
        if current == next {
            continue;
        }
        let nl = i + 1;
        let nr = n - nl;
        let (l1, r1) = (left1, total1 - left1);
        let sq = |a: usize, b: usize| (a * a + b * b) as u128;
        let num = sq(nl - l1, l1) * nr as u128 + sq(nr - r1, r1) * nl as u128;
        let den = (nl * nr) as u128;
        if best.is_none_or(|(_, _, bn, bd)| num * bd > bn * den) {
            best = Some((i, left1, num, den));
        }
    }
    best.map(|(i, l1, _, _)| {
        let (lo, hi) = (x.get(sorted[i], feature), x.get(sorted[i + 1], feature));
        let nl = i + 1;
        let nr = n - nl;
        let r1 = total1 - l1;
        let decrease = parent_gini
            - ratio::<T>(nl, n) * gini::<T>(nl - l1, l1)
            - ratio::<T>(nr, n) * gini::<T>(nr - r1, r1);
        let mid = (lo + hi) / T::lit(2.0);
        SplitCandidate {
            feature,
            threshold: if mid < hi { mid } else { lo },
            decrease,
        }
    })
}

impl<T: Real> TreeModel<T> {
    /// Grows a tree on `rows` of `(x, y)` (repeats allowed).
    pub(crate) fn grow(
        x: &Matrix<T>,
        y: &[u8],
        rows: Vec<usize>,
        params: TreeParams,
        rng: &mut StreamRng,
    ) -> Self {
        let n_features = x.ncols();
        // every feature keeps the rows sorted by its value; a node owns the same
        // range in each of them
        let mut orders: Vec<Vec<usize>> = (0..n_features)
            .map(|f| {
                let mut o = rows.clone();
                o.sort_unstable_by(|&a, &b| x.get(a, f).partial_cmp(&x.get(b, f)).expect("finite features"));
                o
            })
            .collect();
        let mut nodes: Vec<Node<T>> = Vec::new();
        let mut goes_left: Vec<bool> = Vec::new();
        let mut buffer: Vec<usize> = Vec::with_capacity(rows.len());
        let mut stack: Vec<Pending> = vec![(0, rows.len(), 0, None)];

        while let Some((start, end, depth, parent)) = stack.pop() {
            let idx = nodes.len();
            if let Some((p, is_left)) = parent {
                if let Node::Split { left, right, .. } = &mut nodes[p] {
                    if is_left {
                        *left = idx;
                    } else {
                        *right = idx;
                    }
                }
            }
            let n = end - start;
            let n1 = match orders.first() {
                Some(o) => o[start..end].iter().filter(|&&r| y[r] == 1).count(),
                None => rows.iter().filter(|&&r| y[r] == 1).count(),
            };
            let n0 = n - n1;
            let node_gini: T = gini(n0, n1);

            let can_split = n0 > 0
                && n1 > 0
                && n >= params.min_samples_split.max(2)
                && params.max_depth.is_none_or(|d| depth < d);
            let split = if can_split {
                let segments: Vec<&[usize]> = orders.iter().map(|o| &o[start..end]).collect();
                find_split(x, y, &segments, node_gini, n1, params.max_features, rng)
            } else {
                None
            };

            match split {
                Some(s) => {
                    let mut n_left = 0;
                    for order in orders.iter_mut() {
                        let segment = &mut order[start..end];
                        goes_left.clear();
                        goes_left.extend(segment.iter().map(|&r| x.get(r, s.feature) <= s.threshold));
                        buffer.clear();
                        buffer.extend(segment.iter().zip(&goes_left).filter(|p| *p.1).map(|p| *p.0));
                        n_left = buffer.len();
                        buffer.extend(segment.iter().zip(&goes_left).filter(|p| !*p.1).map(|p| *p.0));
                        segment.copy_from_slice(&buffer);
                    }
                    nodes.push(Node::Split {
                        feature: s.feature,
                        threshold: s.threshold,
                        depth,
                        impurity_decrease: s.decrease,
                        n_samples: n,
                        left: usize::MAX,
                        right: usize::MAX,
                    });
                    // right pushed first so the left subtree is numbered first
                    stack.push((start + n_left, end, depth + 1, Some((idx, false))));
                    stack.push((start, start + n_left, depth + 1, Some((idx, true))));
                }
                None => {
                    let proba = if n == 0 {
                        [T::one(), T::zero()]
                    } else {
                        [ratio(n0, n), ratio(n1, n)]
                    };
                    nodes.push(Node::Leaf {
                        class: u8::from(n1 > n0),
                        proba,
                        depth,
                        n_samples: n,
                    });
                }
            }
        }
        Self {
            nodes,
            n_features,
            params,
        }
    }

    pub fn nodes(&self) -> &[Node<T>] {
        &self.nodes
    }

    pub fn root(&self) -> &Node<T> {
        &self.nodes[0]
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn params(&self) -> &TreeParams {
        &self.params
    }

    pub fn is_leaf_only(&self) -> bool {
        matches!(self.root(), Node::Leaf { .. })
    }

    fn leaf_for(&self, row: &[T]) -> &Node<T> {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => i = if row[*feature] <= *threshold { *left } else { *right },
                leaf => return leaf,
            }
        }
    }

    pub fn predict_row(&self, row: &[T]) -> u8 {
        match self.leaf_for(row) {
            Node::Leaf { class, .. } => *class,
            Node::Split { .. } => unreachable!(),
        }
    }

    pub fn predict(&self, x: &Matrix<T>) -> Vec<u8> {
        (0..x.nrows()).map(|r| self.predict_row(x.row(r))).collect()
    }

    /// Shallowest depth at which each feature is used to split.
    pub fn feature_min_depth(&self) -> Vec<Option<usize>> {
        let mut depth = vec![None; self.n_features];
        for node in &self.nodes {
            if let Node::Split {
                feature, depth: d, ..
            } = node
            {
                let slot: &mut Option<usize> = &mut depth[*feature];
                *slot = Some(slot.map_or(*d, |cur: usize| cur.min(*d)));
            }
        }
        depth
    }

    /// Per-feature sum of `n_samples * impurity_decrease` over split nodes.
    pub fn impurity_importance(&self) -> Vec<T> {
        let mut imp = vec![T::zero(); self.n_features];
        for node in &self.nodes {
            if let Node::Split {
                feature,
                impurity_decrease,
                n_samples,
                ..
            } = node
            {
                imp[*feature] = imp[*feature] + T::count(*n_samples) * *impurity_decrease;
            }
        }
        imp
    }
}

fn find_split<T: Real>(
    x: &Matrix<T>,
    y: &[u8],
    segments: &[&[usize]],
    node_gini: T,
    n1: usize,
    max_features: Option<usize>,
    rng: &mut StreamRng,
) -> Option<SplitCandidate<T>> {
    let n_features = segments.len();
    let search = |features: &[usize]| {
        let mut best: Option<SplitCandidate<T>> = None;
        for &f in features {
            if let Some(c) = best_split_on(x, y, segments[f], f, node_gini, n1) {
                if best.as_ref().is_none_or(|b| c.decrease > b.decrease) {
                    best = Some(c);
                }
            }
        }
        best
    };
    match max_features {
        Some(m) if m < n_features => {
            let mut drawn: Vec<usize> = index::sample(rng, n_features, m.max(1)).into_vec();
            drawn.sort_unstable();
            search(&drawn).or_else(|| {
                // every drawn feature was constant here; fall back to the rest
                let rest: Vec<usize> = (0..n_features).filter(|f| !drawn.contains(f)).collect();
                search(&rest)
            })
        }
        _ => {
            let all: Vec<usize> = (0..n_features).collect();
            search(&all)
        }
    }
}

/// Fits a tree on every row of `(x, y)`.
pub fn tree_fit<T: Real>(x: &Matrix<T>, y: &[u8], params: TreeParams) -> Result<TreeModel<T>> {
    check_training_data(x, y)?;
    let mut rng = stream_rng(params.seed, 0, 0);
    Ok(TreeModel::grow(x, y, (0..y.len()).collect(), params, &mut rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn fit(rows: &[Vec<f64>], y: &[u8]) -> TreeModel<f64> {
        tree_fit(&Matrix::from_rows(rows).unwrap(), y, TreeParams::default()).unwrap()
    }

    #[test]
    fn single_exact_split() {
        let t = fit(&[vec![-2.0], vec![-1.0], vec![1.0], vec![2.0]], &[0, 0, 1, 1]);
        match t.root() {
            Node::Split {
                feature, threshold, ..
            } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 0.0);
            }
            _ => panic!("expected split"),
        }
        assert_eq!(t.nodes().len(), 3);
        for n in &t.nodes()[1..] {
            assert!(matches!(n, Node::Leaf { proba, depth: 1, .. } if proba[0] == 1.0 || proba[1] == 1.0));
        }
    }

    #[test]
    fn constant_target_is_leaf() {
        let t = fit(&[vec![1.0], vec![2.0], vec![3.0]], &[1, 1, 1]);
        assert!(t.is_leaf_only());
        assert_eq!(t.predict_row(&[0.0]), 1);
    }

    #[test]
    fn xor_is_learned_with_zero_gain_root() {
        let rows = [vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]];
        let y = [0, 1, 1, 0];
        let t = fit(&rows, &y);
        let x = Matrix::from_rows(&rows).unwrap();
        assert_eq!(t.predict(&x), y);
    }

    #[test]
    fn tie_prefers_lowest_feature() {
        // features 0 and 1 are identical
        let t = fit(
            &[vec![0.0, 0.0], vec![0.0, 0.0], vec![1.0, 1.0], vec![1.0, 1.0]],
            &[0, 0, 1, 1],
        );
        assert!(matches!(t.root(), Node::Split { feature: 0, .. }));
    }

    #[test]
    fn depth_limit_and_min_split() {
        let rows: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64]).collect();
        let y = [0, 1, 0, 1, 0, 1, 0, 1];
        let x = Matrix::from_rows(&rows).unwrap();
        let t = tree_fit(&x, &y, TreeParams { max_depth: Some(1), ..TreeParams::default() }).unwrap();
        assert!(t.nodes().iter().all(|n| n.depth() <= 1));
        let t = tree_fit(&x, &y, TreeParams { min_samples_split: 100, ..TreeParams::default() }).unwrap();
        assert!(t.is_leaf_only());
    }

    #[test]
    fn one_row_gives_leaf() {
        let x = Matrix::from_rows(&[vec![3.0, 4.0]]).unwrap();
        assert!(tree_fit(&x, &[1], TreeParams::default()).unwrap().is_leaf_only());
        let empty = Matrix::<f64>::from_vec(0, 1, vec![]).unwrap();
        assert!(matches!(tree_fit(&empty, &[], TreeParams::default()), Err(Error::EmptyData)));
    }
}
