//! L2-regularized logistic regression fitted by gradient descent with
//! backtracking (Armijo) line search on standardized inputs.

use super::check_training_data;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;
use crate::tabular_data::Standardizer;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrParams<T> {
    pub l2_lambda: T,
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Real> Default for LrParams<T> {
    fn default() -> Self {
        Self {
            l2_lambda: T::one(),
            tol: T::lit(1e-6),
            max_iter: 1000,
        }
    }
}

/// Numerically stable logistic function.
#[inline]
pub fn sigmoid<T: Real>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// `ln(1 + e^z)` without overflow.
#[inline]
fn softplus<T: Real>(z: T) -> T {
    z.max(T::zero()) + (-z.abs()).exp().ln_1p()
}

/// Mean negative log-likelihood plus `(l2_lambda / 2) * |w|^2`, bias unpenalized.
pub struct LogisticObjective<'a, T> {
    x: &'a Matrix<T>,
    y: &'a [u8],
    l2_lambda: T,
}

impl<'a, T: Real> LogisticObjective<'a, T> {
    pub fn new(x: &'a Matrix<T>, y: &'a [u8], l2_lambda: T) -> Self {
        Self { x, y, l2_lambda }
    }

    #[inline]
    fn margin(&self, row: usize, w: &[T], b: T) -> T {
        self.x.row(row).iter().zip(w).fold(b, |acc, (&v, &wi)| acc + v * wi)
    }

    fn penalty(&self, w: &[T]) -> T {
        let sq: T = w.iter().map(|&v| v * v).sum();
        self.l2_lambda * sq / T::lit(2.0)
    }

    pub fn value(&self, w: &[T], b: T) -> T {
        let n = self.x.nrows();
        let nll: T = (0..n)
            .map(|i| {
                let z = self.margin(i, w, b);
                softplus(z) - if self.y[i] == 1 { z } else { T::zero() }
            })
            .sum();
        nll / T::count(n) + self.penalty(w)
    }

    /// Returns `(value, d/dw, d/db)`.
    pub fn value_and_gradient(&self, w: &[T], b: T) -> (T, Vec<T>, T) {
        let n = self.x.nrows();
        let nf = T::count(n);
        let mut gw = vec![T::zero(); w.len()];
        let mut gb = T::zero();
        let mut nll = T::zero();
        for i in 0..n {
            let z = self.margin(i, w, b);
            let yi = if self.y[i] == 1 { T::one() } else { T::zero() };
            nll = nll + softplus(z) - yi * z;
            let r = sigmoid(z) - yi;
            gb = gb + r;
            for (g, &v) in gw.iter_mut().zip(self.x.row(i)) {
                *g = *g + r * v;
            }
        }
        for (g, &wi) in gw.iter_mut().zip(w) {
            *g = *g / nf + self.l2_lambda * wi;
        }
        (nll / nf + self.penalty(w), gw, gb / nf)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel<T> {
    pub weights: Vec<T>,
    pub bias: T,
    pub standardization: Standardizer<T>,
    pub params: LrParams<T>,
}

/// Objective values at the start and after every accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct FitTrace<T> {
    pub losses: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
}

pub fn lr_fit<T: Real>(x: &Matrix<T>, y: &[u8], params: LrParams<T>) -> Result<LogisticModel<T>> {
    lr_fit_traced(x, y, params).map(|(m, _)| m)
}

pub fn lr_fit_traced<T: Real>(
    x: &Matrix<T>,
    y: &[u8],
    params: LrParams<T>,
) -> Result<(LogisticModel<T>, FitTrace<T>)> {
    let [n0, n1] = check_training_data(x, y)?;
    if n0 == 0 || n1 == 0 {
        return Err(Error::SingleClass);
    }
    let standardization = Standardizer::fit(x)?;
    let xs = standardization.apply(x)?;
    let objective = LogisticObjective::new(&xs, y, params.l2_lambda);

    let armijo = T::lit(1e-4);
    let half = T::lit(0.5);
    let max_step = T::lit(1e6);
    let min_step = T::lit(1e-20);
    // the trace of the Hessian bounds its largest eigenvalue, so 1/L always descends
    let quarter = T::lit(0.25);
    let mean_sq: T = (0..xs.ncols())
        .map(|c| (0..xs.nrows()).map(|r| xs.get(r, c) * xs.get(r, c)).sum::<T>() / T::count(xs.nrows()))
        .sum();
    let safe_step = T::one() / (quarter * (mean_sq + T::one()) + params.l2_lambda);

    let mut w = vec![T::zero(); x.ncols()];
    // start at the intercept-only optimum
    let mut b = (T::count(n1) / T::count(n0)).ln();
    let (mut f, mut gw, mut gb) = objective.value_and_gradient(&w, b);
    let mut losses = vec![f];
    let mut step = T::one();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < params.max_iter {
        let gmax = gw.iter().fold(gb.abs(), |m, g| m.max(g.abs()));
        if gmax < params.tol {
            converged = true;
            break;
        }
        let gsq = gw.iter().map(|&g| g * g).sum::<T>() + gb * gb;
        let mut t = (step + step).min(max_step);
        let accepted = loop {
            let w_new: Vec<T> = w.iter().zip(&gw).map(|(&wi, &g)| wi - t * g).collect();
            let b_new = b - t * gb;
            let target = f - armijo * t * gsq;
            if target == f {
                break None;
            }
            if objective.value(&w_new, b_new) <= target {
                break Some((w_new, b_new));
            }
            t = t * half;
            if t < min_step {
                break None;
            }
        };
        // near the optimum the loss decrease drops below rounding and the
        // sufficient-decrease test can no longer see progress
        let (w_new, b_new) = accepted.unwrap_or_else(|| {
            t = safe_step;
            (w.iter().zip(&gw).map(|(&wi, &g)| wi - t * g).collect(), b - t * gb)
        });
        if w_new.iter().any(|v| !v.is_finite()) || !b_new.is_finite() {
            break;
        }
        w = w_new;
        b = b_new;
        step = t;
        iterations += 1;
        let (f_new, gw_new, gb_new) = objective.value_and_gradient(&w, b);
        f = f_new;
        gw = gw_new;
        gb = gb_new;
        losses.push(f);
    }

    let model = LogisticModel {
        weights: w,
        bias: b,
        standardization,
        params,
    };
    Ok((
        model,
        FitTrace {
            losses,
            iterations,
            converged,
        },
    ))
}

impl<T: Real> LogisticModel<T> {
    fn check_width(&self, x: &Matrix<T>) -> Result<()> {
        if x.ncols() != self.weights.len() {
            return Err(Error::WidthMismatch {
                expected: self.weights.len(),
                found: x.ncols(),
            });
        }
        Ok(())
    }

    pub fn predict_proba(&self, x: &Matrix<T>) -> Result<Vec<T>> {
        self.check_width(x)?;
        Ok((0..x.nrows())
            .map(|r| {
                let z = x.row(r).iter().enumerate().fold(self.bias, |acc, (c, &v)| {
                    acc + self.standardization.apply_value(c, v) * self.weights[c]
                });
                sigmoid(z)
            })
            .collect())
    }

    /// Class 1 iff the probability is at least `threshold`.
    pub fn predict(&self, x: &Matrix<T>, threshold: T) -> Result<Vec<u8>> {
        Ok(self
            .predict_proba(x)?
            .into_iter()
            .map(|p| u8::from(p >= threshold))
            .collect())
    }
}

pub fn lr_predict<T: Real>(m: &LogisticModel<T>, x: &Matrix<T>, threshold: T) -> Result<Vec<u8>> {
    m.predict(x, threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::stream_rng;
    use rand::Rng;

    fn column(v: &[f64]) -> Matrix<f64> {
        Matrix::from_vec(v.len(), 1, v.to_vec()).unwrap()
    }

    #[test]
    fn separable_one_dimensional() {
        let x = column(&[-1.0, -1.0, 1.0, 1.0]);
        let y = [0, 0, 1, 1];
        let m = lr_fit(&x, &y, LrParams::default()).unwrap();
        assert!(m.weights[0] > 0.0);
        assert_eq!(m.predict(&x, 0.5).unwrap(), y);
    }

    #[test]
    fn heavy_penalty_recovers_prior() {
        let mut rng = stream_rng(11, 0, 0);
        let n = 400;
        let x = Matrix::from_vec(n, 3, (0..n * 3).map(|_| rng.random::<f64>()).collect()).unwrap();
        let y: Vec<u8> = (0..n).map(|_| u8::from(rng.random::<f64>() < 0.3)).collect();
        let prior = y.iter().filter(|&&v| v == 1).count() as f64 / n as f64;
        let params = LrParams {
            l2_lambda: 1e4,
            ..LrParams::default()
        };
        let m = lr_fit(&x, &y, params).unwrap();
        assert!(m.weights.iter().all(|w| w.abs() < 1e-4), "{:?}", m.weights);
        for p in m.predict_proba(&x).unwrap() {
            assert!((p - prior).abs() < 1e-3);
        }
    }

    #[test]
    fn zero_model_predicts_one() {
        let x = column(&[-3.0, 0.0, 2.0]);
        let m = LogisticModel {
            weights: vec![0.0],
            bias: 0.0,
            standardization: Standardizer::fit(&x).unwrap(),
            params: LrParams::default(),
        };
        assert_eq!(lr_predict(&m, &x, 0.5).unwrap(), vec![1, 1, 1]);
    }

    #[test]
    fn strong_weight_sign() {
        let x = column(&[1.0, -1.0]);
        let m = LogisticModel {
            weights: vec![10.0],
            bias: 0.0,
            standardization: Standardizer::fit(&x).unwrap(),
            params: LrParams::default(),
        };
        assert_eq!(lr_predict(&m, &x, 0.5).unwrap(), vec![1, 0]);
        let wide = Matrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        assert!(matches!(m.predict(&wide, 0.5), Err(Error::WidthMismatch { .. })));
    }

    #[test]
    fn refuses_single_class() {
        let x = column(&[1.0, 2.0]);
        assert!(matches!(lr_fit(&x, &[1, 1], LrParams::default()), Err(Error::SingleClass)));
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(1000.0f64), 1.0);
        assert_eq!(sigmoid(-1000.0f64), 0.0);
        assert!((softplus(-800.0f64)).abs() < 1e-300);
        assert_eq!(softplus(800.0f64), 800.0);
    }

    #[test]
    fn fits_in_single_precision() {
        let x = Matrix::from_vec(4, 1, vec![-2.0f32, -1.0, 1.0, 2.0]).unwrap();
        let m = lr_fit(&x, &[0, 0, 1, 1], LrParams::default()).unwrap();
        assert_eq!(m.predict(&x, 0.5).unwrap(), vec![0, 0, 1, 1]);
    }
}
