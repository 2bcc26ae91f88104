use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::nelder_mead::{nm_minimize, NmOptions};
use crate::model::Model;
use crate::EvalError;

/// Multi-start settings for [`nls_fit`].
#[derive(Debug, Clone, PartialEq)]
pub struct NlsOptions {
    /// Random starts in addition to the initial guess.
    pub restarts: usize,
    /// Half-width of the restart box, relative to `max(|θ_j|, 1)`.
    pub restart_box: f64,
    /// Half-width of the search box, relative to `max(|θ_j|, 1)`.
    pub search_box: f64,
    /// Maximum Nelder-Mead restarts from the incumbent per start.
    pub polish_rounds: usize,
    pub seed: u64,
    pub nm: NmOptions,
}

impl Default for NlsOptions {
    fn default() -> Self {
        Self {
            restarts: 8,
            restart_box: 0.5,
            search_box: 10.0,
            polish_rounds: 30,
            seed: 0,
            nm: NmOptions { initial_step: 0.01, x_tol: 1e-12, f_tol: 1e-14, max_evals: 20_000, ..NmOptions::default() },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub theta_hat: Vec<f64>,
    pub sse: f64,
    pub evals: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NlsError {
    #[error("{rows} data rows cannot identify {params} parameters")]
    InsufficientData { rows: usize, params: usize },
    #[error("initial guess has {got} values, model has {expected} parameters")]
    InitLength { got: usize, expected: usize },
    #[error("response {0} is not finite after transformation")]
    BadResponse(usize),
    #[error("the model could not be evaluated from any start")]
    AllStartsFailed,
}

/// Sum of squared residuals `Σ (y_i − f(x_i, θ))²` over (transformed)
/// responses.
pub fn sse<M: Model + ?Sized>(model: &M, points: &[Vec<f64>], ys: &[f64], theta: &[f64]) -> Result<f64, EvalError> {
    let mut s = 0.0;
    for (x, y) in points.iter().zip(ys) {
        let r = y - model.mean(x, theta)?;
        s += r * r;
    }
    if s.is_finite() {
        Ok(s)
    } else {
        Err(EvalError::NonFinite("sum of squares"))
    }
}

/// Nonlinear least squares by multi-start Nelder-Mead.
///
/// `transform` is applied to every response before residuals are formed.
pub fn nls_fit<M: Model + ?Sized>(
    model: &M,
    data: &[(Vec<f64>, f64)],
    theta_init: &[f64],
    transform: Option<&dyn Fn(f64) -> f64>,
    opts: &NlsOptions,
) -> Result<FitResult, NlsError> {
    let p = model.n_params();
    if theta_init.len() != p {
        return Err(NlsError::InitLength { got: theta_init.len(), expected: p });
    }
    if data.len() < p {
        return Err(NlsError::InsufficientData { rows: data.len(), params: p });
    }
    let points: Vec<Vec<f64>> = data.iter().map(|(x, _)| x.clone()).collect();
    let mut ys = Vec::with_capacity(data.len());
    for (i, (_, y)) in data.iter().enumerate() {
        let z = transform.map_or(*y, |t| t(*y));
        if !z.is_finite() {
            return Err(NlsError::BadResponse(i));
        }
        ys.push(z);
    }

    let scale: Vec<f64> = theta_init.iter().map(|t| libm::fabs(*t).max(1.0)).collect();
    let bounds: Vec<(f64, f64)> = theta_init
        .iter()
        .zip(&scale)
        .map(|(t, s)| (t - opts.search_box * s, t + opts.search_box * s))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts = alloc::vec![theta_init.to_vec()];
    for _ in 0..opts.restarts {
        starts.push(
            theta_init
                .iter()
                .zip(&scale)
                .map(|(t, s)| {
                    let h = opts.restart_box * s;
                    rng.gen_range(t - h..=t + h)
                })
                .collect(),
        );
    }

    let objective = |th: &[f64]| sse(model, &points, &ys, th);
    let mut best: Option<FitResult> = None;
    let mut evals = 0;
    for start in starts {
        let Ok(mut r) = nm_minimize(objective, &start, &bounds, &opts.nm, &[]) else {
            evals += 1;
            continue;
        };
        evals += r.evals;
        let mut converged = false;
        for _ in 0..opts.polish_rounds {
            let next = nm_minimize(objective, &r.x, &bounds, &opts.nm, &[]).expect("incumbent evaluates");
            evals += next.evals;
            let gain = r.f - next.f;
            if next.f < r.f {
                r = next;
            }
            if gain <= 1e-13 * (1.0 + r.f) {
                converged = r.converged;
                break;
            }
        }
        if best.as_ref().is_none_or(|b| r.f < b.sse) {
            best = Some(FitResult { theta_hat: r.x, sse: r.f, evals: 0, converged });
        }
    }
    let mut best = best.ok_or(NlsError::AllStartsFailed)?;
    best.evals = evals;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ExprModel;
    use alloc::vec;

    #[test]
    fn exact_line() {
        let m = ExprModel::parse("th0 + th1*x", &["th0", "th1"], &["x"]).unwrap();
        let data = vec![(vec![0.0], 1.0), (vec![1.0], 3.0)];
        let fit = nls_fit(&m, &data, &[0.0, 0.0], None, &NlsOptions::default()).unwrap();
        assert!((fit.theta_hat[0] - 1.0).abs() < 1e-6 && (fit.theta_hat[1] - 2.0).abs() < 1e-6, "{fit:?}");
        assert!(fit.sse < 1e-12);
    }

    #[test]
    fn too_few_rows() {
        let m = ExprModel::parse("a + b*x + c*x^2", &["a", "b", "c"], &["x"]).unwrap();
        let data = vec![(vec![0.0], 1.0), (vec![1.0], 3.0)];
        assert_eq!(
            nls_fit(&m, &data, &[0.0; 3], None, &NlsOptions::default()),
            Err(NlsError::InsufficientData { rows: 2, params: 3 })
        );
    }

    #[test]
    fn transform_applies_before_residuals() {
        let m = ExprModel::parse("a", &["a"], &["x"]).unwrap();
        let data = vec![(vec![0.0], 50.0), (vec![1.0], 50.0)];
        let t = |xi: f64| xi / (100.0 - xi);
        let fit = nls_fit(&m, &data, &[0.0], Some(&t), &NlsOptions::default()).unwrap();
        assert!((fit.theta_hat[0] - 1.0).abs() < 1e-6);
    }
}
