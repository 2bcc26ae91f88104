//! Built-in models with analytic parameter gradients.
//!
//! All factor levels are passed in natural units; any coding of the
//! variables happens inside the model.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use libm::{exp, log};

use crate::model::Model;
use crate::EvalError;

fn names(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn finite(v: f64, op: &'static str) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite(op))
    }
}

/// Reference reciprocal temperature of the Arrhenius term.
pub const ARRHENIUS_REF: f64 = 0.0028344;
/// Offset from degrees Celsius to kelvin used by the temperature transform.
pub const CELSIUS_OFFSET: f64 = 273.0;

/// Two-step consecutive reaction yield in flow rate `R`, catalyst
/// concentration `C` and temperature `T` (°C):
///
/// ```text
/// η = A·R / ((R + B)(R + A)),  A = θ0·C^θ1·e^(θ2·X),  B = θ0'·C^θ1'·e^(θ2'·X)
/// X = 0.0028344 − 1/(T + 273)
/// ```
///
/// Parameters are ordered `(θ0, θ0', θ1, θ1', θ2, θ2')`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Mechanistic;

struct MechTerms {
    r: f64,
    ln_c: f64,
    x: f64,
    a: f64,
    b: f64,
    ea: f64,
    eb: f64,
}

impl Mechanistic {
    /// Arrhenius transform of the temperature.
    pub fn arrhenius(t: f64) -> Result<f64, EvalError> {
        let k = t + CELSIUS_OFFSET;
        if k <= 0.0 {
            return Err(EvalError::Domain { op: "1/(T+273)", value: t });
        }
        Ok(ARRHENIUS_REF - 1.0 / k)
    }

    fn terms(point: &[f64], theta: &[f64]) -> Result<MechTerms, EvalError> {
        let (r, c, t) = (point[0], point[1], point[2]);
        if c <= 0.0 {
            return Err(EvalError::Domain { op: "C^θ", value: c });
        }
        let x = Self::arrhenius(t)?;
        let ln_c = log(c);
        // A = θ0·ea, B = θ0'·eb
        let ea = exp(theta[2] * ln_c + theta[4] * x);
        let eb = exp(theta[3] * ln_c + theta[5] * x);
        let a = theta[0] * ea;
        let b = theta[1] * eb;
        if r + a == 0.0 {
            return Err(EvalError::Domain { op: "R + A", value: r + a });
        }
        if r + b == 0.0 {
            return Err(EvalError::Domain { op: "R + B", value: r + b });
        }
        Ok(MechTerms { r, ln_c, x, a, b, ea, eb })
    }
}

impl Model for Mechanistic {
    fn n_params(&self) -> usize {
        6
    }
    fn n_factors(&self) -> usize {
        3
    }
    fn param_names(&self) -> Vec<String> {
        names(&["theta0", "theta0p", "theta1", "theta1p", "theta2", "theta2p"])
    }
    fn factor_names(&self) -> Vec<String> {
        names(&["R", "C", "T"])
    }

    fn mean(&self, point: &[f64], theta: &[f64]) -> Result<f64, EvalError> {
        let m = Self::terms(point, theta)?;
        finite(m.a * m.r / ((m.r + m.b) * (m.r + m.a)), "mechanistic mean")
    }

    fn gradient_into(&self, point: &[f64], theta: &[f64], out: &mut [f64]) -> Result<(), EvalError> {
        let MechTerms { r, ln_c, x, a, b, ea, eb } = Self::terms(point, theta)?;
        let ra = r + a;
        let rb = r + b;
        // ∂η/∂A and ∂η/∂B
        let d_a = r * r / (rb * ra * ra);
        let d_b = -a * r / (rb * rb * ra);
        out[0] = d_a * ea;
        out[1] = d_b * eb;
        out[2] = d_a * a * ln_c;
        out[3] = d_b * b * ln_c;
        out[4] = d_a * a * x;
        out[5] = d_b * b * x;
        for g in out.iter() {
            finite(*g, "mechanistic gradient")?;
        }
        Ok(())
    }
}

/// Enzyme-concentration coding `x_E = log10(E / 6.25)`.
pub fn code_enzyme(e: f64) -> Result<f64, EvalError> {
    if e <= 0.0 {
        return Err(EvalError::Domain { op: "log10(E/6.25)", value: e });
    }
    Ok(libm::log10(e / 6.25))
}

/// Pressure coding `x_P = (P − 300)/100`.
pub fn code_pressure(p: f64) -> f64 {
    (p - 300.0) / 100.0
}

/// Hybrid saturation/exponential-quadratic model for the transformed
/// conversion rate in substrate `S`, enzyme `E` and pressure `P`:
///
/// ```text
/// ξ/(100−ξ) = exp(a0 + a1·xE + a2·xP + a3·xE² + a4·xP²)·S / (a5 + S)
/// ```
#[derive(Debug, Clone, Copy, Default)]
pub struct Hybrid;

impl Hybrid {
    fn parts(point: &[f64], theta: &[f64]) -> Result<([f64; 5], f64, f64), EvalError> {
        let (s, e, p) = (point[0], point[1], point[2]);
        let xe = code_enzyme(e)?;
        let xp = code_pressure(p);
        let denom = theta[5] + s;
        if denom == 0.0 {
            return Err(EvalError::Domain { op: "a5 + S", value: denom });
        }
        let reg = [1.0, xe, xp, xe * xe, xp * xp];
        let q: f64 = reg.iter().zip(theta).map(|(r, a)| r * a).sum();
        let g = exp(q) * s / denom;
        Ok((reg, g, denom))
    }
}

impl Model for Hybrid {
    fn n_params(&self) -> usize {
        6
    }
    fn n_factors(&self) -> usize {
        3
    }
    fn param_names(&self) -> Vec<String> {
        names(&["a0", "a1", "a2", "a3", "a4", "a5"])
    }
    fn factor_names(&self) -> Vec<String> {
        names(&["S", "E", "P"])
    }

    fn mean(&self, point: &[f64], theta: &[f64]) -> Result<f64, EvalError> {
        let (_, g, _) = Self::parts(point, theta)?;
        finite(g, "hybrid mean")
    }

    fn gradient_into(&self, point: &[f64], theta: &[f64], out: &mut [f64]) -> Result<(), EvalError> {
        let (reg, g, denom) = Self::parts(point, theta)?;
        finite(g, "hybrid gradient")?;
        for (o, r) in out.iter_mut().zip(reg) {
            *o = g * r;
        }
        out[5] = -g / denom;
        Ok(())
    }
}

/// Coding of one factor for the polynomial model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scaling {
    /// `(x − center) / half_width`
    Affine { center: f64, half_width: f64 },
    /// `(ln x − ln center) / ln_unit`
    Log { center: f64, ln_unit: f64 },
}

impl Scaling {
    pub fn apply(&self, x: f64) -> Result<f64, EvalError> {
        match *self {
            Scaling::Affine { center, half_width } => Ok((x - center) / half_width),
            Scaling::Log { center, ln_unit } => {
                if x <= 0.0 {
                    return Err(EvalError::Domain { op: "log scaling", value: x });
                }
                Ok((log(x) - log(center)) / ln_unit)
            }
        }
    }
}

/// Full second-order polynomial in coded variables: intercept, linear
/// terms, two-factor interactions (in `(1,2), (1,3), …, (2,3), …` order)
/// and pure quadratics.
#[derive(Debug, Clone)]
pub struct Quadratic {
    factors: Vec<String>,
    scaling: Vec<Scaling>,
}

impl Quadratic {
    pub fn new(factors: Vec<String>, scaling: Vec<Scaling>) -> Self {
        assert!(!factors.is_empty(), "polynomial needs at least one factor");
        assert_eq!(factors.len(), scaling.len());
        Self { factors, scaling }
    }

    /// Regressor vector at a point.
    pub fn regressors(&self, point: &[f64], out: &mut [f64]) -> Result<(), EvalError> {
        let v = self.factors.len();
        let mut x = [0.0f64; 16];
        let mut xs = Vec::new();
        let coded: &mut [f64] = if v <= x.len() {
            &mut x[..v]
        } else {
            xs.resize(v, 0.0);
            &mut xs
        };
        for (c, (s, &p)) in coded.iter_mut().zip(self.scaling.iter().zip(point)) {
            *c = s.apply(p)?;
        }
        let mut k = 0;
        out[k] = 1.0;
        k += 1;
        for &c in coded.iter() {
            out[k] = c;
            k += 1;
        }
        for i in 0..v {
            for j in i + 1..v {
                out[k] = coded[i] * coded[j];
                k += 1;
            }
        }
        for &c in coded.iter() {
            out[k] = c * c;
            k += 1;
        }
        Ok(())
    }
}

impl Model for Quadratic {
    fn n_params(&self) -> usize {
        let v = self.factors.len();
        1 + v + v * (v - 1) / 2 + v
    }
    fn n_factors(&self) -> usize {
        self.factors.len()
    }
    fn param_names(&self) -> Vec<String> {
        (0..self.n_params()).map(|j| alloc::format!("b{j}")).collect()
    }
    fn factor_names(&self) -> Vec<String> {
        self.factors.clone()
    }

    fn mean(&self, point: &[f64], theta: &[f64]) -> Result<f64, EvalError> {
        let mut reg = alloc::vec![0.0; self.n_params()];
        self.regressors(point, &mut reg)?;
        Ok(reg.iter().zip(theta).map(|(r, b)| r * b).sum())
    }

    fn gradient_into(&self, point: &[f64], _theta: &[f64], out: &mut [f64]) -> Result<(), EvalError> {
        self.regressors(point, out)
    }
}

/// Second-order polynomial over the three reactor factors, coded as
/// `x1 = log2(R/3)`, `x2 = log2(C/2)`, `x3 = (T − 80)/10`.
pub fn reactor_quadratic() -> Quadratic {
    let ln2 = core::f64::consts::LN_2;
    Quadratic::new(
        names(&["R", "C", "T"]),
        alloc::vec![
            Scaling::Log { center: 3.0, ln_unit: ln2 },
            Scaling::Log { center: 2.0, ln_unit: ln2 },
            Scaling::Affine { center: 80.0, half_width: 10.0 },
        ],
    )
}

/// Second-order polynomial over the enzyme factors, coded as
/// `xS = (S − 5)/2.5`, `xE = log10(E/6.25)`, `xP = (P − 300)/100`.
pub fn enzyme_quadratic() -> Quadratic {
    Quadratic::new(
        names(&["S", "E", "P"]),
        alloc::vec![
            Scaling::Affine { center: 5.0, half_width: 2.5 },
            Scaling::Log { center: 6.25, ln_unit: core::f64::consts::LN_10 },
            Scaling::Affine { center: 300.0, half_width: 100.0 },
        ],
    )
}

/// Single-factor saturation curve `g1·S / (g2 + S)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Saturation;

impl Model for Saturation {
    fn n_params(&self) -> usize {
        2
    }
    fn n_factors(&self) -> usize {
        1
    }
    fn param_names(&self) -> Vec<String> {
        names(&["g1", "g2"])
    }
    fn factor_names(&self) -> Vec<String> {
        names(&["S"])
    }

    fn mean(&self, point: &[f64], theta: &[f64]) -> Result<f64, EvalError> {
        let s = point[0];
        let d = theta[1] + s;
        if d == 0.0 {
            return Err(EvalError::Domain { op: "g2 + S", value: d });
        }
        Ok(theta[0] * s / d)
    }

    fn gradient_into(&self, point: &[f64], theta: &[f64], out: &mut [f64]) -> Result<(), EvalError> {
        let s = point[0];
        let d = theta[1] + s;
        if d == 0.0 {
            return Err(EvalError::Domain { op: "g2 + S", value: d });
        }
        out[0] = s / d;
        out[1] = -theta[0] * s / (d * d);
        Ok(())
    }
}

/// Exponential quadratic in coded enzyme and pressure, without
/// interaction: `exp(a0 + a1·xE + a2·xP + a3·xE² + a4·xP²)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExpQuadratic;

impl ExpQuadratic {
    fn parts(point: &[f64], theta: &[f64]) -> Result<([f64; 5], f64), EvalError> {
        let xe = code_enzyme(point[0])?;
        let xp = code_pressure(point[1]);
        let reg = [1.0, xe, xp, xe * xe, xp * xp];
        let q: f64 = reg.iter().zip(theta).map(|(r, a)| r * a).sum();
        Ok((reg, exp(q)))
    }
}

impl Model for ExpQuadratic {
    fn n_params(&self) -> usize {
        5
    }
    fn n_factors(&self) -> usize {
        2
    }
    fn param_names(&self) -> Vec<String> {
        names(&["a0", "a1", "a2", "a3", "a4"])
    }
    fn factor_names(&self) -> Vec<String> {
        names(&["E", "P"])
    }

    fn mean(&self, point: &[f64], theta: &[f64]) -> Result<f64, EvalError> {
        Ok(Self::parts(point, theta)?.1)
    }

    fn gradient_into(&self, point: &[f64], theta: &[f64], out: &mut [f64]) -> Result<(), EvalError> {
        let (reg, g) = Self::parts(point, theta)?;
        for (o, r) in out.iter_mut().zip(reg) {
            *o = g * r;
        }
        Ok(())
    }
}

/// The two single-purpose models behind the hybrid model: the saturation
/// curve in `S` and the exponential quadratic in `(E, P)`.
pub fn hybrid_components() -> (Saturation, ExpQuadratic) {
    (Saturation, ExpQuadratic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::gradient_check;

    #[test]
    fn mechanistic_reduces_at_reference_temperature() {
        let t = 1.0 / ARRHENIUS_REF - CELSIUS_OFFSET;
        let th = [1.0, 1.0, 0.0, 0.0, 123.0, -45.0];
        let eta = Mechanistic.mean(&[1.0, 2.0, t], &th).unwrap();
        assert!((eta - 0.25).abs() < 1e-9, "{eta}");
    }

    #[test]
    fn mechanistic_domain_errors() {
        let th = [5.9, 1.15, 0.53, -0.01, 15475.0, 7489.0];
        assert!(matches!(
            Mechanistic.mean(&[3.0, 2.0, -273.0], &th),
            Err(EvalError::Domain { .. })
        ));
        // R + B = 0
        let th = [1.0, -1.0, 0.0, 0.0, 0.0, 0.0];
        let t = 1.0 / ARRHENIUS_REF - CELSIUS_OFFSET;
        assert!(Mechanistic.gradient(&[1.0, 2.0, t], &th).is_err());
    }

    #[test]
    fn hybrid_zero_parameters_give_one() {
        let v = Hybrid.mean(&[5.0, 6.25, 300.0], &[0.0; 6]).unwrap();
        assert_eq!(v, 1.0);
        assert!(Hybrid.mean(&[5.0, 0.0, 300.0], &[0.0; 6]).is_err());
        assert!(Hybrid.mean(&[5.0, 1.0, 300.0], &[0.0, 0.0, 0.0, 0.0, 0.0, -5.0]).is_err());
    }

    #[test]
    fn quadratic_dimensions_and_coding() {
        let q = reactor_quadratic();
        assert_eq!(q.n_params(), 10);
        let mut r = [0.0; 10];
        q.regressors(&[3.0, 2.0, 80.0], &mut r).unwrap();
        assert_eq!(&r[1..4], &[0.0, 0.0, 0.0]);
        q.regressors(&[6.0, 4.0, 90.0], &mut r).unwrap();
        assert!((r[1] - 1.0).abs() < 1e-15 && (r[2] - 1.0).abs() < 1e-15);
        assert_eq!(r[3], 1.0);
        let e = enzyme_quadratic();
        e.regressors(&[5.0, 6.25, 300.0], &mut r).unwrap();
        assert_eq!(r[1], 0.0);
        assert!(q.regressors(&[0.0, 2.0, 80.0], &mut r).is_err());
        let one = Quadratic::new(names(&["x"]), alloc::vec![Scaling::Affine { center: 0.0, half_width: 1.0 }]);
        assert_eq!(one.n_params(), 3);
    }

    #[test]
    fn saturation_gradient_by_hand() {
        let g = Saturation.gradient(&[5.0], &[1.0, -1.0]).unwrap();
        assert!((g[0] - 1.25).abs() < 1e-15);
        assert!((g[1] + 5.0 / 16.0).abs() < 1e-15);
        assert!(gradient_check(&Saturation, &[5.0], &[1.0, -1.0]).unwrap() < 1e-6);
        assert_eq!(Saturation.mean(&[2.5], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(ExpQuadratic.mean(&[0.7, 250.0], &[0.0; 5]).unwrap(), 1.0);
    }
}
