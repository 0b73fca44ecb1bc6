use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

/// Per-feature z-scoring with population standard deviation. Zero-variance
/// features map to zero and are flagged in `constant`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer<T> {
    pub mean: Vec<T>,
    pub std: Vec<T>,
    pub constant: Vec<bool>,
}

impl<T: Real> Standardizer<T> {
    pub fn fit(x: &Matrix<T>) -> Result<Self> {
        let n = x.nrows();
        if n == 0 {
            return Err(Error::EmptyData);
        }
        let nf = T::count(n);
        let mut mean = vec![T::zero(); x.ncols()];
        for r in 0..n {
            for (m, &v) in mean.iter_mut().zip(x.row(r)) {
                *m = *m + v;
            }
        }
        mean.iter_mut().for_each(|m| *m = *m / nf);
        let mut var = vec![T::zero(); x.ncols()];
        for r in 0..n {
            for ((s, &v), &m) in var.iter_mut().zip(x.row(r)).zip(&mean) {
                *s = *s + (v - m) * (v - m);
            }
        }
        let std: Vec<T> = var.into_iter().map(|s| (s / nf).sqrt()).collect();
        let constant = (0..x.ncols())
            .map(|c| (0..n).all(|r| x.get(r, c) == x.get(0, c)))
            .collect();
        Ok(Self {
            mean,
            std,
            constant,
        })
    }

    pub fn width(&self) -> usize {
        self.mean.len()
    }

    #[inline]
    pub fn apply_value(&self, feature: usize, v: T) -> T {
        if self.constant[feature] || self.std[feature] == T::zero() {
            T::zero()
        } else {
            (v - self.mean[feature]) / self.std[feature]
        }
    }

    pub fn apply(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        if x.ncols() != self.width() {
            return Err(Error::WidthMismatch {
                expected: self.width(),
                found: x.ncols(),
            });
        }
        let mut data = Vec::with_capacity(x.nrows() * x.ncols());
        for r in 0..x.nrows() {
            data.extend(x.row(r).iter().enumerate().map(|(c, &v)| self.apply_value(c, v)));
        }
        Matrix::from_vec(x.nrows(), x.ncols(), data)
    }
}

/// Fits on `train_x` and standardizes both matrices with the training statistics.
pub fn standardize_fit_apply<T: Real>(
    train_x: &Matrix<T>,
    other_x: &Matrix<T>,
) -> Result<(Matrix<T>, Matrix<T>, Standardizer<T>)> {
    let s = Standardizer::fit(train_x)?;
    Ok((s.apply(train_x)?, s.apply(other_x)?, s))
}
