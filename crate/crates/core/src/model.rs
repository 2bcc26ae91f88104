//! The parametric mean function abstraction.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::EvalError;

/// A nonlinear regression mean `f(x, θ)` with `p` parameters and `v`
/// factors, together with its parameter gradient `∂f/∂θ`.
///
/// Implementations must be pure: the same inputs always give the same
/// outputs, and evaluation may happen from many threads at once.
pub trait Model: Send + Sync {
    fn n_params(&self) -> usize;

    fn n_factors(&self) -> usize;

    fn param_names(&self) -> Vec<String>;

    fn factor_names(&self) -> Vec<String>;

    fn mean(&self, point: &[f64], theta: &[f64]) -> Result<f64, EvalError>;

    /// Writes `∂f/∂θ_j` into `out[j]`. `out.len()` equals [`Model::n_params`].
    fn gradient_into(&self, point: &[f64], theta: &[f64], out: &mut [f64])
        -> Result<(), EvalError>;

    fn gradient(&self, point: &[f64], theta: &[f64]) -> Result<Vec<f64>, EvalError> {
        let mut g = vec![0.0; self.n_params()];
        self.gradient_into(point, theta, &mut g)?;
        Ok(g)
    }
}

impl<M: Model + ?Sized> Model for &M {
    fn n_params(&self) -> usize {
        (**self).n_params()
    }
    fn n_factors(&self) -> usize {
        (**self).n_factors()
    }
    fn param_names(&self) -> Vec<String> {
        (**self).param_names()
    }
    fn factor_names(&self) -> Vec<String> {
        (**self).factor_names()
    }
    fn mean(&self, point: &[f64], theta: &[f64]) -> Result<f64, EvalError> {
        (**self).mean(point, theta)
    }
    fn gradient_into(&self, point: &[f64], theta: &[f64], out: &mut [f64]) -> Result<(), EvalError> {
        (**self).gradient_into(point, theta, out)
    }
}

impl<M: Model + ?Sized> Model for alloc::boxed::Box<M> {
    fn n_params(&self) -> usize {
        (**self).n_params()
    }
    fn n_factors(&self) -> usize {
        (**self).n_factors()
    }
    fn param_names(&self) -> Vec<String> {
        (**self).param_names()
    }
    fn factor_names(&self) -> Vec<String> {
        (**self).factor_names()
    }
    fn mean(&self, point: &[f64], theta: &[f64]) -> Result<f64, EvalError> {
        (**self).mean(point, theta)
    }
    fn gradient_into(&self, point: &[f64], theta: &[f64], out: &mut [f64]) -> Result<(), EvalError> {
        (**self).gradient_into(point, theta, out)
    }
}

/// Relative step used by the central-difference gradient: `h_j = 1e-6·(1+|θ_j|)`.
pub const FD_REL_STEP: f64 = 1e-6;

/// Central finite-difference gradient of `model.mean` with respect to θ.
pub fn finite_difference_gradient<M: Model + ?Sized>(
    model: &M,
    point: &[f64],
    theta: &[f64],
) -> Result<Vec<f64>, EvalError> {
    let mut t = theta.to_vec();
    let mut g = vec![0.0; theta.len()];
    for j in 0..theta.len() {
        let h = FD_REL_STEP * (1.0 + libm::fabs(theta[j]));
        t[j] = theta[j] + h;
        let up = model.mean(point, &t)?;
        t[j] = theta[j] - h;
        let down = model.mean(point, &t)?;
        t[j] = theta[j];
        g[j] = (up - down) / (2.0 * h);
    }
    Ok(g)
}

/// Wraps a model and replaces its gradient with central finite
/// differences of the mean. Used for models without analytic derivatives
/// and for cross-checking analytic ones.
#[derive(Debug, Clone)]
pub struct FiniteDiff<M>(pub M);

impl<M: Model> Model for FiniteDiff<M> {
    fn n_params(&self) -> usize {
        self.0.n_params()
    }
    fn n_factors(&self) -> usize {
        self.0.n_factors()
    }
    fn param_names(&self) -> Vec<String> {
        self.0.param_names()
    }
    fn factor_names(&self) -> Vec<String> {
        self.0.factor_names()
    }
    fn mean(&self, point: &[f64], theta: &[f64]) -> Result<f64, EvalError> {
        self.0.mean(point, theta)
    }
    fn gradient_into(&self, point: &[f64], theta: &[f64], out: &mut [f64]) -> Result<(), EvalError> {
        let g = finite_difference_gradient(&self.0, point, theta)?;
        out.copy_from_slice(&g);
        Ok(())
    }
}

/// Largest relative discrepancy between the analytic gradient and central
/// differences, with each component scaled by `max(|g_j|, 1e-3·max_k |g_k|)`
/// so that components near zero are judged against the gradient's size.
pub fn gradient_check<M: Model + ?Sized>(
    model: &M,
    point: &[f64],
    theta: &[f64],
) -> Result<f64, EvalError> {
    let analytic = model.gradient(point, theta)?;
    let numeric = finite_difference_gradient(model, point, theta)?;
    let scale = analytic.iter().map(|g| libm::fabs(*g)).fold(0.0, f64::max);
    let floor = 1e-3 * scale.max(f64::MIN_POSITIVE);
    Ok(analytic
        .iter()
        .zip(&numeric)
        .map(|(a, n)| libm::fabs(a - n) / libm::fabs(*a).max(floor))
        .fold(0.0, f64::max))
}
