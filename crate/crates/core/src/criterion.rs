//! The local D-criterion.
//!
//! A nonlinear model is linearized about a prior θ⁰; row `i` of the model
//! matrix `F` is the parameter gradient at run `i`, and the criterion is
//! `φ = log |FᵀF|` (error variance fixed at 1). Exchanging one run for
//! another changes `FᵀF` by a rank-two term, so the determinant ratio and
//! the updated inverse follow from the cached inverse alone.

use alloc::vec;
use alloc::vec::Vec;

use crate::design::Design;
use crate::linalg::{dot, SymMatrix, SINGULAR_DET};
use crate::model::Model;
use crate::{Error, PriorTheta};

/// Updates between full refactorizations of the information matrix.
pub const REFRESH_INTERVAL: usize = 50;

/// Row-major `n × p` matrix of parameter gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelMatrix {
    n: usize,
    p: usize,
    data: Vec<f64>,
}

impl ModelMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let p = rows.first().map_or(0, Vec::len);
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self { n: rows.len(), p, data }
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_params(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// `FᵀF`
    pub fn information(&self) -> SymMatrix {
        SymMatrix::gram(&self.data, self.n, self.p)
    }
}

/// Gradient of `model` at every run of `design`, evaluated at `theta`.
pub fn model_matrix<M: Model + ?Sized>(
    model: &M,
    design: &Design,
    theta: &PriorTheta,
) -> Result<ModelMatrix, Error> {
    model_matrix_rows(model, design.rows(), theta.values())
}

pub(crate) fn model_matrix_rows<M: Model + ?Sized>(
    model: &M,
    rows: &[Vec<f64>],
    theta: &[f64],
) -> Result<ModelMatrix, Error> {
    let p = model.n_params();
    let v = model.n_factors();
    if theta.len() != p {
        return Err(Error::Dimension(alloc::format!("prior has {} values, model has {p} parameters", theta.len())));
    }
    let mut data = vec![0.0; rows.len() * p];
    for (i, (row, out)) in rows.iter().zip(data.chunks_exact_mut(p.max(1))).enumerate() {
        if row.len() != v {
            return Err(Error::Dimension(alloc::format!("run {i} has {} factors, model has {v}", row.len())));
        }
        model.gradient_into(row, theta, out).map_err(|source| Error::Eval { run: i, source })?;
    }
    Ok(ModelMatrix { n: rows.len(), p, data })
}

/// `φ = log |M|` for a symmetric information matrix, or `-∞` when it is
/// singular (pivot failure or `|M| ≤ 1e-300`).
pub fn log_det_info(m: &SymMatrix) -> f64 {
    match m.cholesky() {
        Some(c) => {
            let ld = c.log_det();
            if ld <= libm::log(SINGULAR_DET) {
                f64::NEG_INFINITY
            } else {
                ld
            }
        }
        None => f64::NEG_INFINITY,
    }
}

/// `φ = log |FᵀF|`; `-∞` signals a singular design.
pub fn log_det(f: &ModelMatrix) -> f64 {
    if f.n < f.p {
        return f64::NEG_INFINITY;
    }
    log_det_info(&f.information())
}

/// Local D-criterion of a design.
pub fn phi<M: Model + ?Sized>(model: &M, design: &Design, theta: &PriorTheta) -> Result<f64, Error> {
    Ok(log_det(&model_matrix(model, design, theta)?))
}

/// Relative efficiency of design A with respect to design B, in percent:
/// `exp(φ_A/p) / exp(φ_B/p) · 100`.
pub fn relative_efficiency(phi_a: f64, phi_b: f64, p: usize) -> f64 {
    assert!(p >= 1, "parameter count must be positive");
    100.0 * libm::exp((phi_a - phi_b) / p as f64)
}

/// Information matrix `M = FᵀF` with its cached inverse and log-determinant.
/// Determinant ratios at or below this are treated as singular.
const RATIO_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct InfoMatrix {
    m: SymMatrix,
    inv: SymMatrix,
    log_det: f64,
    updates: usize,
}

impl InfoMatrix {
    pub fn new(m: SymMatrix) -> Result<Self, Error> {
        let (inv, log_det) = factor(&m)?;
        Ok(Self { m, inv, log_det, updates: 0 })
    }

    pub fn from_model_matrix(f: &ModelMatrix) -> Result<Self, Error> {
        Self::new(f.information())
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.m
    }

    pub fn inverse(&self) -> &SymMatrix {
        &self.inv
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    /// Standardized variance `fᵀ M⁻¹ f` of a gradient row.
    pub fn variance(&self, f: &[f64]) -> f64 {
        self.inv.quad(f, f)
    }

    /// `|M − f_old f_oldᵀ + f_new f_newᵀ| / |M|`, from
    /// `(1 + v_nn)(1 − v_oo) + v_no²` with `v_ab = f_aᵀ M⁻¹ f_b`.
    pub fn exchange_ratio(&self, f_old: &[f64], f_new: &[f64]) -> f64 {
        let p = self.dim();
        let mut buf = [0.0f64; 16];
        let mut heap;
        let w: &mut [f64] = if p <= buf.len() {
            &mut buf[..p]
        } else {
            heap = vec![0.0; p];
            &mut heap
        };
        self.inv.mul_vec_into(f_old, w);
        let v_oo = dot(f_old, w);
        let v_no = dot(f_new, w);
        let v_nn = self.variance(f_new);
        (1.0 + v_nn) * (1.0 - v_oo) + v_no * v_no
    }

    /// Returns the information matrix after replacing the run with gradient
    /// `f_old` by one with gradient `f_new`.
    pub fn apply_exchange(&self, f_old: &[f64], f_new: &[f64]) -> Result<Self, Error> {
        let mut next = self.clone();
        next.apply_exchange_in_place(f_old, f_new)?;
        Ok(next)
    }

    /// In-place form of [`InfoMatrix::apply_exchange`]. On error `self` is
    /// left unchanged.
    pub fn apply_exchange_in_place(&mut self, f_old: &[f64], f_new: &[f64]) -> Result<(), Error> {
        let d = self.exchange_ratio(f_old, f_new);
        // A ratio at rounding level means the new matrix is rank deficient.
        if !(d > RATIO_TOL) || !d.is_finite() {
            return Err(Error::Singular);
        }
        let mut m = self.m.clone();
        m.add_outer(f_new, 1.0);
        m.add_outer(f_old, -1.0);

        if self.updates + 1 >= REFRESH_INTERVAL {
            let (inv, log_det) = factor(&m)?;
            *self = Self { m, inv, log_det, updates: 0 };
            return Ok(());
        }

        // Sherman-Morrison twice: add f_new, then remove f_old.
        let mut inv = self.inv.clone();
        let u = inv.mul_vec(f_new);
        let denom = 1.0 + dot(f_new, &u);
        inv.add_outer(&u, -1.0 / denom);
        let w = inv.mul_vec(f_old);
        let denom = 1.0 - dot(f_old, &w);
        if !(denom > 0.0) {
            return Err(Error::Singular);
        }
        inv.add_outer(&w, 1.0 / denom);
        inv.symmetrize();

        let log_det = self.log_det + libm::log(d);
        if log_det <= libm::log(SINGULAR_DET) {
            return Err(Error::Singular);
        }
        *self = Self { m, inv, log_det, updates: self.updates + 1 };
        Ok(())
    }

    /// Refactorizes from the stored matrix.
    pub fn refresh(&mut self) -> Result<(), Error> {
        let (inv, log_det) = factor(&self.m)?;
        self.inv = inv;
        self.log_det = log_det;
        self.updates = 0;
        Ok(())
    }
}

fn factor(m: &SymMatrix) -> Result<(SymMatrix, f64), Error> {
    let chol = m.cholesky().ok_or(Error::Singular)?;
    let ld = chol.log_det();
    if ld <= libm::log(SINGULAR_DET) {
        return Err(Error::Singular);
    }
    Ok((chol.inverse(), ld))
}

/// Determinant ratio of an exchange computed by refactorizing both
/// matrices. Used to check the update formula.
pub fn exchange_ratio_direct(m: &SymMatrix, f_old: &[f64], f_new: &[f64]) -> f64 {
    let mut next = m.clone();
    next.add_outer(f_new, 1.0);
    next.add_outer(f_old, -1.0);
    libm::exp(log_det_info(&next) - log_det_info(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{DesignRegion, Factor};
    use crate::expr::ExprModel;

    #[test]
    fn straight_line_model_matrix() {
        let model = ExprModel::parse("th0 + th1*x", &["th0", "th1"], &["x"]).unwrap();
        let region = DesignRegion::new(vec![Factor::new("x", 0.0, 1.0)]).unwrap();
        let d = Design::new(vec![vec![0.0], vec![1.0]], region).unwrap();
        let theta = PriorTheta::new(vec![3.0, -2.0], 2).unwrap();
        let f = model_matrix(&model, &d, &theta).unwrap();
        assert_eq!(f.as_slice(), &[1.0, 0.0, 1.0, 1.0]);
        assert!(log_det(&f).abs() < 1e-15);
    }

    #[test]
    fn identity_log_det_is_zero() {
        let f = ModelMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(log_det(&f), 0.0);
    }

    #[test]
    fn too_few_runs_is_singular() {
        let f = ModelMatrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![0.0, 1.0, 1.0]]);
        assert_eq!(log_det(&f), f64::NEG_INFINITY);
        let dup = ModelMatrix::from_rows(&[vec![1.0, 2.0], vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert_eq!(log_det(&dup), f64::NEG_INFINITY);
    }

    #[test]
    fn identity_exchange() {
        let f = ModelMatrix::from_rows(&[vec![1.0, 0.5], vec![0.2, 1.0], vec![1.0, 1.0]]);
        let info = InfoMatrix::from_model_matrix(&f).unwrap();
        let r = f.row(1);
        assert!((info.exchange_ratio(r, r) - 1.0).abs() < 1e-14);
        let next = info.apply_exchange(r, r).unwrap();
        assert!(next.matrix().max_abs_diff(info.matrix()) < 1e-14);
    }

    #[test]
    fn removing_an_essential_row_of_a_saturated_design() {
        // Saturated: 2 runs, 2 parameters. Replacing run 0 with a copy of
        // run 1 destroys the information.
        let f = ModelMatrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 1.0]]);
        let info = InfoMatrix::from_model_matrix(&f).unwrap();
        let d = info.exchange_ratio(f.row(0), f.row(1));
        assert!(d.is_finite());
        assert!(d.abs() < 1e-12, "{d}");
        assert!(info.apply_exchange(f.row(0), f.row(1)).is_err());
        let direct = exchange_ratio_direct(info.matrix(), f.row(0), f.row(1));
        assert_eq!(direct, 0.0);
    }

    #[test]
    fn efficiency() {
        assert_eq!(relative_efficiency(-3.2, -3.2, 6), 100.0);
        let e = relative_efficiency(-52.7712, -49.5528, 6);
        assert!((e - 58.48).abs() < 0.005, "{e}");
        let e = relative_efficiency(38.8433, 41.2246, 6);
        assert!((e - 67.24).abs() < 0.005, "{e}");
    }
}
