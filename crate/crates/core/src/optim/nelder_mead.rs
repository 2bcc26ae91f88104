use alloc::vec;
use alloc::vec::Vec;

/// Nelder-Mead settings. Step and `x_tol` are fractions of each
/// coordinate's box width.
#[derive(Debug, Clone, PartialEq)]
pub struct NmOptions {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    pub initial_step: f64,
    pub x_tol: f64,
    pub f_tol: f64,
    pub max_evals: usize,
}

impl Default for NmOptions {
    fn default() -> Self {
        Self {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            initial_step: 0.05,
            x_tol: 1e-8,
            f_tol: 1e-10,
            max_evals: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum NmOptionsError {
    #[error("reflection coefficient must be positive")]
    Reflection,
    #[error("expansion coefficient must exceed 1")]
    Expansion,
    #[error("contraction coefficient must lie in (0, 1)")]
    Contraction,
    #[error("shrink coefficient must lie in (0, 1)")]
    Shrink,
    #[error("step and tolerances must be positive")]
    Tolerance,
}

impl NmOptions {
    pub fn validate(&self) -> Result<(), NmOptionsError> {
        if !(self.reflection > 0.0) {
            return Err(NmOptionsError::Reflection);
        }
        if !(self.expansion > 1.0) {
            return Err(NmOptionsError::Expansion);
        }
        if !(self.contraction > 0.0 && self.contraction < 1.0) {
            return Err(NmOptionsError::Contraction);
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(NmOptionsError::Shrink);
        }
        if !(self.initial_step > 0.0 && self.x_tol > 0.0 && self.f_tol > 0.0) || self.max_evals == 0 {
            return Err(NmOptionsError::Tolerance);
        }
        Ok(())
    }
}

/// Best point over all descents.
#[derive(Debug, Clone, PartialEq)]
pub struct NmResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    /// Whether the descent that produced `x` stopped on a tolerance rather
    /// than the evaluation budget.
    pub converged: bool,
}

/// Clamps `x` into the box and reports whether any coordinate moved.
fn clamp_into(x: &mut [f64], bounds: &[(f64, f64)]) -> bool {
    let mut moved = false;
    for (xi, &(lo, hi)) in x.iter_mut().zip(bounds) {
        let c = xi.clamp(lo, hi);
        moved |= c != *xi;
        *xi = c;
    }
    moved
}

/// Minimizes `objective` over the box `bounds` with one Nelder-Mead descent
/// from `x0` and one from each of `extra_starts`, returning the best point.
///
/// Every trial point is clamped into the box before evaluation. An error
/// at the (clamped) `x0` is returned; errors anywhere else count as `+∞`.
pub fn nm_minimize<E, F>(
    mut objective: F,
    x0: &[f64],
    bounds: &[(f64, f64)],
    opts: &NmOptions,
    extra_starts: &[Vec<f64>],
) -> Result<NmResult, E>
where
    F: FnMut(&[f64]) -> Result<f64, E>,
{
    assert_eq!(x0.len(), bounds.len(), "start and bounds differ in dimension");
    assert!(!x0.is_empty(), "cannot minimize over zero dimensions");

    let mut start = x0.to_vec();
    clamp_into(&mut start, bounds);
    let f0 = objective(&start)?;
    let mut best = descend_restarting(&mut objective, start, f0, bounds, opts);
    best.evals += 1;
    let mut evals = best.evals;

    for s in extra_starts {
        let mut start = s.clone();
        clamp_into(&mut start, bounds);
        let f = objective(&start).unwrap_or(f64::INFINITY);
        let r = descend_restarting(&mut objective, start, f, bounds, opts);
        evals += r.evals + 1;
        if r.f < best.f {
            best = r;
        }
    }
    best.evals = evals;
    Ok(best)
}

/// Fresh simplices started from a converged point, at most this many.
const MAX_RESTARTS: usize = 10;

/// Repeats the descent from its own result, with a smaller initial simplex
/// each time, until a restart gains no more than `f_tol`. Clamping can
/// flatten a simplex against a face of the box, and a fresh simplex
/// recovers the lost dimensions.
fn descend_restarting<E, F>(objective: &mut F, x0: Vec<f64>, f0: f64, bounds: &[(f64, f64)], opts: &NmOptions) -> NmResult
where
    F: FnMut(&[f64]) -> Result<f64, E>,
{
    let mut best = descend(objective, x0, f0, bounds, opts);
    let mut restart = opts.clone();
    for _ in 0..MAX_RESTARTS {
        if !best.converged {
            break;
        }
        restart.initial_step = (restart.initial_step * 0.2).max(opts.x_tol);
        let next = descend(objective, best.x.clone(), best.f, bounds, &restart);
        let evals = best.evals + next.evals;
        let gained = best.f - next.f > opts.f_tol;
        if next.f < best.f {
            best = NmResult { evals, ..next };
        } else {
            best.evals = evals;
        }
        if !gained {
            break;
        }
    }
    best
}

fn descend<E, F>(objective: &mut F, x0: Vec<f64>, f0: f64, bounds: &[(f64, f64)], opts: &NmOptions) -> NmResult
where
    F: FnMut(&[f64]) -> Result<f64, E>,
{
    let d = x0.len();
    let width: Vec<f64> = bounds.iter().map(|(lo, hi)| hi - lo).collect();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        match objective(x) {
            Ok(v) if !v.is_nan() => v,
            _ => f64::INFINITY,
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
    let mut fvals: Vec<f64> = Vec::with_capacity(d + 1);
    simplex.push(x0.clone());
    fvals.push(f0);
    for k in 0..d {
        let mut v = x0.clone();
        let step = opts.initial_step * width[k];
        v[k] = if v[k] + step <= bounds[k].1 { v[k] + step } else { v[k] - step };
        clamp_into(&mut v, bounds);
        fvals.push(eval(&v, &mut evals));
        simplex.push(v);
    }

    let mut order: Vec<usize> = (0..=d).collect();
    let mut centroid = vec![0.0; d];
    let mut trial = vec![0.0; d];
    let mut converged = false;

    let point = |c: &[f64], toward: &[f64], t: f64, out: &mut Vec<f64>| -> bool {
        for k in 0..d {
            out[k] = c[k] + t * (toward[k] - c[k]);
        }
        clamp_into(out, bounds)
    };

    loop {
        // Stable sort keeps the earlier vertex first among ties.
        order.sort_by(|&a, &b| fvals[a].total_cmp(&fvals[b]));
        let (ib, iw, isw) = (order[0], order[d], order[d - 1]);

        let size = simplex
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[ib]).zip(&width).map(|((a, b), w)| libm::fabs(a - b) / w))
            .fold(0.0, f64::max);
        let spread = fvals[iw] - fvals[ib];
        if size < opts.x_tol || (fvals[ib].is_finite() && spread <= opts.f_tol) {
            converged = true;
            break;
        }
        if evals >= opts.max_evals {
            break;
        }

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &i in &order[..d] {
            for (c, x) in centroid.iter_mut().zip(&simplex[i]) {
                *c += x / d as f64;
            }
        }

        let worst = simplex[iw].clone();
        // x_r = c + α (c − x_w)
        let clamped = point(&centroid, &worst, -opts.reflection, &mut trial);
        let xr = trial.clone();
        let fr = eval(&xr, &mut evals);

        if fr < fvals[ib] {
            point(&centroid, &worst, -opts.reflection * opts.expansion, &mut trial);
            let fe = eval(&trial, &mut evals);
            if fe < fr {
                simplex[iw].copy_from_slice(&trial);
                fvals[iw] = fe;
            } else {
                simplex[iw] = xr;
                fvals[iw] = fr;
            }
            continue;
        }
        if fr < fvals[isw] {
            simplex[iw] = xr;
            fvals[iw] = fr;
            continue;
        }

        // A clamped reflection can land on the centroid's face, where an
        // outside contraction would collapse the simplex; contract inside.
        let (fc, accept) = if fr < fvals[iw] && !clamped {
            point(&centroid, &xr, opts.contraction, &mut trial);
            let fc = eval(&trial, &mut evals);
            (fc, fc <= fr)
        } else {
            point(&centroid, &worst, opts.contraction, &mut trial);
            let fc = eval(&trial, &mut evals);
            (fc, fc < fvals[iw])
        };
        if accept {
            simplex[iw].copy_from_slice(&trial);
            fvals[iw] = fc;
            continue;
        }

        let best = simplex[ib].clone();
        for &i in &order[1..] {
            for k in 0..d {
                simplex[i][k] = best[k] + opts.shrink * (simplex[i][k] - best[k]);
            }
            clamp_into(&mut simplex[i], bounds);
            fvals[i] = eval(&simplex[i], &mut evals);
        }
    }

    let ib = (0..=d).min_by(|&a, &b| fvals[a].total_cmp(&fvals[b])).unwrap();
    NmResult { x: simplex.swap_remove(ib), f: fvals[ib], evals, converged }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::convert::Infallible;

    fn ok(v: f64) -> Result<f64, Infallible> {
        Ok(v)
    }

    #[test]
    fn defaults_validate() {
        assert!(NmOptions::default().validate().is_ok());
        let bad = NmOptions { expansion: 1.0, ..NmOptions::default() };
        assert_eq!(bad.validate(), Err(NmOptionsError::Expansion));
    }

    #[test]
    fn parabola() {
        let r = nm_minimize(|x| ok((x[0] - 2.0).powi(2)), &[0.0], &[(-10.0, 10.0)], &NmOptions::default(), &[])
            .unwrap();
        assert!((r.x[0] - 2.0).abs() < 1e-6, "{r:?}");
        assert!(r.converged);
    }

    #[test]
    fn boundary_optimum() {
        for x0 in [-10.0, -3.0, 0.0, 9.99, 10.0] {
            let r = nm_minimize(|x| ok((x[0] - 20.0).powi(2)), &[x0], &[(-10.0, 10.0)], &NmOptions::default(), &[])
                .unwrap();
            assert!((r.x[0] - 10.0).abs() < 1e-6, "{x0}: {r:?}");
        }
    }

    #[test]
    fn error_at_start_is_reported() {
        let r: Result<NmResult, &str> =
            nm_minimize(|_| Err("bad"), &[0.0], &[(-1.0, 1.0)], &NmOptions::default(), &[]);
        assert_eq!(r.unwrap_err(), "bad");
        // Failures away from the start are treated as +∞.
        let r = nm_minimize(
            |x: &[f64]| if x[0] > 0.5 { Err("bad") } else { Ok((x[0] - 1.0).powi(2)) },
            &[0.0],
            &[(-1.0, 1.0)],
            &NmOptions::default(),
            &[],
        )
        .unwrap();
        assert!(r.x[0] <= 0.5 && r.x[0] > 0.49, "{r:?}");
    }

    #[test]
    fn extra_starts_escape_local_minimum() {
        // Double well with the deeper basin at x = 3.
        let f = |x: &[f64]| ok((x[0] * x[0] - 9.0).powi(2) / 10.0 - x[0]);
        let single = nm_minimize(f, &[-2.0], &[(-5.0, 5.0)], &NmOptions::default(), &[]).unwrap();
        assert!(single.x[0] < 0.0);
        let multi = nm_minimize(f, &[-2.0], &[(-5.0, 5.0)], &NmOptions::default(), &[vec![2.0]]).unwrap();
        assert!(multi.x[0] > 0.0 && multi.f < single.f);
    }
}
