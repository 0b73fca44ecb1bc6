//! Classifiers used by the rankers and by the prefix evaluator.

mod forest;
mod logistic;
mod tree;

pub use forest::{forest_fit, ForestModel, ForestParams};
pub use logistic::{
    lr_fit, lr_fit_traced, lr_predict, sigmoid, FitTrace, LogisticModel, LogisticObjective, LrParams,
};
pub use tree::{tree_fit, Node, TreeModel, TreeParams};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

fn check_training_data<T: Copy>(x: &Matrix<T>, y: &[u8]) -> Result<[usize; 2]> {
    if x.nrows() != y.len() {
        return Err(Error::LengthMismatch(format!(
            "x has {} rows, y has {}",
            x.nrows(),
            y.len()
        )));
    }
    if y.is_empty() {
        return Err(Error::EmptyData);
    }
    let n1 = y.iter().filter(|&&v| v == 1).count();
    Ok([y.len() - n1, n1])
}
