use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::{Exchange, Problem, SearchConfig, TryOutcome, TryTrace};
use crate::criterion::{model_matrix_rows, InfoMatrix};
use crate::design::{CandidateSet, Design};
use crate::optim::nm_minimize;
use crate::{Error, EvalError};

/// Random designs drawn before giving up on a nonsingular start.
pub const MAX_START_ATTEMPTS: usize = 1000;

/// Candidates whose ratio is within this of the best are ties.
const TIE_TOL: f64 = 1e-12;

/// Where random starting designs are drawn from.
#[derive(Debug, Clone, Copy)]
pub enum DrawFrom<'a> {
    /// Uniformly from candidate points, or level-by-level from per-factor
    /// candidate lists.
    Candidates(&'a CandidateSet),
    /// Uniformly from the continuous region.
    Region,
}

/// Draws `n` runs independently (with replacement) and redraws the whole
/// design until its information matrix is nonsingular.
pub fn random_initial_design<R: Rng + ?Sized>(
    problem: &Problem<'_>,
    draw: DrawFrom<'_>,
    rng: &mut R,
) -> Result<Design, Error> {
    for _ in 0..MAX_START_ATTEMPTS {
        let rows: Vec<Vec<f64>> = (0..problem.n)
            .map(|_| match draw {
                DrawFrom::Candidates(CandidateSet::Points(p)) => p[rng.gen_range(0..p.len())].clone(),
                DrawFrom::Candidates(CandidateSet::PerFactor(ls)) => {
                    ls.iter().map(|l| l[rng.gen_range(0..l.len())]).collect()
                }
                DrawFrom::Region => problem.region.sample_point(rng),
            })
            .collect();
        let Ok(f) = model_matrix_rows(problem.model, &rows, problem.theta.values()) else {
            continue;
        };
        if rows.len() >= f.n_params() && InfoMatrix::from_model_matrix(&f).is_ok() {
            return Ok(Design::new(rows, problem.region.clone())?);
        }
    }
    Err(Error::NoNonsingularStart(MAX_START_ATTEMPTS))
}

struct TryState<'p, 'a> {
    problem: &'p Problem<'a>,
    rows: Vec<Vec<f64>>,
    grads: Vec<Vec<f64>>,
    info: InfoMatrix,
    trajectory: Vec<f64>,
}

impl TryState<'_, '_> {
    fn gradient(&self, point: &[f64], out: &mut [f64]) -> Result<(), EvalError> {
        self.problem.model.gradient_into(point, self.problem.theta.values(), out)
    }

    fn accept(&mut self, i: usize, point: Vec<f64>, grad: Vec<f64>) -> Result<(), Error> {
        self.info.apply_exchange_in_place(&self.grads[i], &grad)?;
        self.rows[i] = point;
        self.grads[i] = grad;
        self.trajectory.push(self.info.log_det());
        Ok(())
    }

    /// Best replacement for run `i` among fixed candidates.
    fn best_discrete_point(&self, i: usize, cands: &[Vec<f64>], cand_grads: &[Option<Vec<f64>>]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (c, g) in cand_grads.iter().enumerate() {
            let Some(g) = g else { continue };
            if cands[c] == self.rows[i] {
                continue;
            }
            let d = self.info.exchange_ratio(&self.grads[i], g);
            if best.is_none_or(|(_, bd)| d > bd + TIE_TOL) {
                best = Some((c, d));
            }
        }
        best
    }

    fn best_discrete_level(&self, i: usize, k: usize, levels: &[f64]) -> Option<(Vec<f64>, Vec<f64>, f64)> {
        let p = self.info.dim();
        let mut g = vec![0.0; p];
        let mut best: Option<(Vec<f64>, Vec<f64>, f64)> = None;
        for &level in levels {
            if level == self.rows[i][k] {
                continue;
            }
            let mut pt = self.rows[i].clone();
            pt[k] = level;
            if self.gradient(&pt, &mut g).is_err() {
                continue;
            }
            let d = self.info.exchange_ratio(&self.grads[i], &g);
            if best.as_ref().is_none_or(|(_, _, bd)| d > bd + TIE_TOL) {
                best = Some((pt, g.clone(), d));
            }
        }
        best
    }

    fn best_continuous_point(&self, i: usize, config: &SearchConfig) -> Option<(Vec<f64>, f64)> {
        let bounds = self.problem.region.bounds();
        let p = self.info.dim();
        let mut g = vec![0.0; p];
        let f_old = &self.grads[i];
        let objective = |x: &[f64]| -> Result<f64, EvalError> {
            self.gradient(x, &mut g)?;
            Ok(-self.info.exchange_ratio(f_old, &g))
        };
        let r = nm_minimize(objective, &self.rows[i], &bounds, &config.nm, &config.extra_starts).ok()?;
        Some((r.x, -r.f))
    }

    fn best_continuous_level(&self, i: usize, k: usize, config: &SearchConfig) -> Option<(Vec<f64>, f64)> {
        let f = &self.problem.region.factors()[k];
        let p = self.info.dim();
        let mut g = vec![0.0; p];
        let mut pt = self.rows[i].clone();
        let f_old = &self.grads[i];
        let mut starts: Vec<Vec<f64>> = Vec::new();
        for s in &config.extra_starts {
            let x = vec![s[k]];
            if x[0] != pt[k] && !starts.contains(&x) {
                starts.push(x);
            }
        }
        let x0 = [pt[k]];
        let mut objective = |x: &[f64]| -> Result<f64, EvalError> {
            pt[k] = x[0];
            self.gradient(&pt, &mut g)?;
            Ok(-self.info.exchange_ratio(f_old, &g))
        };
        let r = nm_minimize(&mut objective, &x0, &[(f.lo, f.hi)], &config.nm, &starts).ok()?;
        let mut best = self.rows[i].clone();
        best[k] = r.x[0];
        Some((best, -r.f))
    }
}

/// Runs the exchange loop from `start` until a pass makes no exchange or
/// `config.max_iterations` passes are done.
pub(super) fn improve(
    problem: &Problem<'_>,
    exchange: Exchange<'_>,
    start: Design,
    config: &SearchConfig,
    try_index: usize,
) -> Result<TryOutcome, Error> {
    let theta = problem.theta.values();
    let rows = start.into_rows();
    let f = model_matrix_rows(problem.model, &rows, theta)?;
    let info = InfoMatrix::from_model_matrix(&f)?;
    let grads: Vec<Vec<f64>> = (0..rows.len()).map(|i| f.row(i).to_vec()).collect();
    let mut st = TryState { problem, trajectory: vec![info.log_det()], rows, grads, info };

    // Candidate gradients are fixed for discrete point exchange.
    let cand_grads: Vec<Option<Vec<f64>>> = match exchange {
        Exchange::DiscretePoint(cands) => cands.iter().map(|c| problem.model.gradient(c, theta).ok()).collect(),
        _ => Vec::new(),
    };

    let crit = config.critical_value;
    let n = st.rows.len();
    let v = problem.region.dim();
    let mut iterations = 0;
    while iterations < config.max_iterations {
        iterations += 1;
        let mut improved = false;
        for i in 0..n {
            match exchange {
                Exchange::DiscretePoint(cands) => {
                    if let Some((c, d)) = st.best_discrete_point(i, cands, &cand_grads) {
                        if d > crit {
                            let g = cand_grads[c].clone().expect("evaluated candidate");
                            st.accept(i, cands[c].clone(), g)?;
                            improved = true;
                        }
                    }
                }
                Exchange::ContinuousPoint => {
                    if let Some((x, d)) = st.best_continuous_point(i, config) {
                        if d > crit {
                            let g = problem.model.gradient(&x, theta).map_err(|source| Error::Eval { run: i, source })?;
                            st.accept(i, x, g)?;
                            improved = true;
                        }
                    }
                }
                Exchange::DiscreteCoordinate(levels) => {
                    for (k, ls) in levels.iter().enumerate().take(v) {
                        if let Some((x, g, d)) = st.best_discrete_level(i, k, ls) {
                            if d > crit {
                                st.accept(i, x, g)?;
                                improved = true;
                            }
                        }
                    }
                }
                Exchange::ContinuousCoordinate => {
                    for k in 0..v {
                        if let Some((x, d)) = st.best_continuous_level(i, k, config) {
                            if d > crit {
                                let g =
                                    problem.model.gradient(&x, theta).map_err(|source| Error::Eval { run: i, source })?;
                                st.accept(i, x, g)?;
                                improved = true;
                            }
                        }
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }

    // Report φ from a fresh factorization rather than the running update.
    st.info.refresh()?;
    let final_phi = st.info.log_det();
    let design = Design::new(st.rows, problem.region.clone())?;
    Ok(TryOutcome {
        design,
        trace: TryTrace { try_index, iterations, phi_trajectory: st.trajectory, final_phi },
    })
}
