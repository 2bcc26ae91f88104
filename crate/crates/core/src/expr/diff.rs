//! Symbolic differentiation with light constant folding.

use alloc::boxed::Box;

use super::{BinOp, Expr, Func};

fn as_num(e: &Expr) -> Option<f64> {
    match e {
        Expr::Num(v) => Some(*v),
        Expr::Neg(a) => match **a {
            Expr::Num(v) => Some(-v),
            _ => None,
        },
        _ => None,
    }
}

fn is(e: &Expr, v: f64) -> bool {
    as_num(e) == Some(v)
}

pub(super) fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(v) => Expr::Num(-v),
        Expr::Neg(inner) => *inner,
        a => Expr::Neg(Box::new(a)),
    }
}

pub(super) fn add(a: Expr, b: Expr) -> Expr {
    match (as_num(&a), as_num(&b)) {
        (Some(x), Some(y)) => Expr::Num(x + y),
        (Some(0.0), _) => b,
        (_, Some(0.0)) => a,
        _ => Expr::bin(BinOp::Add, a, b),
    }
}

pub(super) fn sub(a: Expr, b: Expr) -> Expr {
    match (as_num(&a), as_num(&b)) {
        (Some(x), Some(y)) => Expr::Num(x - y),
        (_, Some(0.0)) => a,
        (Some(0.0), _) => neg(b),
        _ => Expr::bin(BinOp::Sub, a, b),
    }
}

pub(super) fn mul(a: Expr, b: Expr) -> Expr {
    match (as_num(&a), as_num(&b)) {
        (Some(x), Some(y)) => Expr::Num(x * y),
        (Some(0.0), _) | (_, Some(0.0)) => Expr::Num(0.0),
        (Some(1.0), _) => b,
        (_, Some(1.0)) => a,
        _ => Expr::bin(BinOp::Mul, a, b),
    }
}

pub(super) fn div(a: Expr, b: Expr) -> Expr {
    match (as_num(&a), as_num(&b)) {
        (Some(x), Some(y)) if y != 0.0 => Expr::Num(x / y),
        (Some(0.0), _) => Expr::Num(0.0),
        (_, Some(1.0)) => a,
        _ => Expr::bin(BinOp::Div, a, b),
    }
}

pub(super) fn pow(a: Expr, b: Expr) -> Expr {
    match as_num(&b) {
        Some(1.0) => a,
        Some(0.0) => Expr::Num(1.0),
        _ => Expr::bin(BinOp::Pow, a, b),
    }
}

fn call(f: Func, a: Expr) -> Expr {
    Expr::Call(f, Box::new(a))
}

/// `∂e/∂θ_j`
pub(super) fn derivative(e: &Expr, j: usize) -> Expr {
    if !e.depends_on_param(j) {
        return Expr::Num(0.0);
    }
    match e {
        Expr::Num(_) | Expr::Factor(_) => Expr::Num(0.0),
        Expr::Param(k) => Expr::Num(if *k == j { 1.0 } else { 0.0 }),
        Expr::Neg(a) => neg(derivative(a, j)),
        Expr::Bin(op, a, b) => {
            let (a, b) = (&**a, &**b);
            let da = derivative(a, j);
            let db = derivative(b, j);
            match op {
                BinOp::Add => add(da, db),
                BinOp::Sub => sub(da, db),
                BinOp::Mul => add(mul(da, b.clone()), mul(a.clone(), db)),
                BinOp::Div => {
                    if is(&db, 0.0) {
                        div(da, b.clone())
                    } else {
                        sub(div(da, b.clone()), div(mul(a.clone(), db), mul(b.clone(), b.clone())))
                    }
                }
                BinOp::Pow => {
                    if is(&db, 0.0) {
                        // d(a^c) = da · c · a^(c−1)
                        mul(da, mul(b.clone(), pow(a.clone(), sub(b.clone(), Expr::Num(1.0)))))
                    } else {
                        // a^b = exp(b·log a): d = a^b · (db·log a + b·da/a)
                        let this = Expr::bin(BinOp::Pow, a.clone(), b.clone());
                        let inner = add(
                            mul(db, call(Func::Log, a.clone())),
                            div(mul(b.clone(), da), a.clone()),
                        );
                        mul(this, inner)
                    }
                }
            }
        }
        Expr::Call(f, a) => {
            let da = derivative(a, j);
            let a = (**a).clone();
            match f {
                Func::Exp => mul(da, call(Func::Exp, a)),
                Func::Log => div(da, a),
                Func::Log10 => div(da, mul(a, Expr::Num(core::f64::consts::LN_10))),
                Func::Sqrt => div(da, mul(Expr::Num(2.0), call(Func::Sqrt, a))),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::ModelAst;
    use super::*;

    #[test]
    fn simple_rules() {
        let a = ModelAst::parse("th0*R", &["th0"], &["R"]).unwrap();
        assert_eq!(a.differentiate("th0").unwrap().root(), &Expr::Factor(0));

        let a = ModelAst::parse("exp(a0 + a1*x)", &["a0", "a1"], &["x"]).unwrap();
        let d = a.differentiate("a1").unwrap();
        let expected = ModelAst::parse("x*exp(a0 + a1*x)", &["a0", "a1"], &["x"]).unwrap();
        assert_eq!(d.root(), expected.root());
        assert_eq!(d.eval_slices(&[2.0], &[0.0, 0.0]).unwrap(), 2.0);
    }

    #[test]
    fn saturation_derivative() {
        let a = ModelAst::parse("g1*S/(g2+S)", &["g1", "g2"], &["S"]).unwrap();
        let d = a.differentiate("g2").unwrap();
        let v = d.eval_slices(&[5.0], &[1.0, -1.0]).unwrap();
        assert!((v + 5.0 / 16.0).abs() < 1e-15);
        let h = 1e-6;
        let fd = (a.eval_slices(&[5.0], &[1.0, -1.0 + h]).unwrap()
            - a.eval_slices(&[5.0], &[1.0, -1.0 - h]).unwrap())
            / (2.0 * h);
        assert!((v - fd).abs() < 1e-8);
    }

    #[test]
    fn folding() {
        assert_eq!(mul(Expr::Num(0.0), Expr::Factor(0)), Expr::Num(0.0));
        assert_eq!(add(Expr::Factor(0), Expr::Num(0.0)), Expr::Factor(0));
        assert_eq!(pow(Expr::Factor(0), Expr::Num(1.0)), Expr::Factor(0));
        assert_eq!(mul(Expr::Num(1.0), Expr::Factor(0)), Expr::Factor(0));
        // x^-1 differentiates to a literal exponent, so negative bases stay legal.
        let a = ModelAst::parse("th*x^-1", &["th"], &["x"]).unwrap();
        let d = a.differentiate("th").unwrap();
        assert_eq!(d.eval_slices(&[-2.0], &[1.0]).unwrap(), -0.5);
        let a = ModelAst::parse("x^-1*th^2", &["th"], &["x"]).unwrap();
        let d = a.differentiate("th").unwrap();
        assert_eq!(d.eval_slices(&[-2.0], &[3.0]).unwrap(), -3.0);
    }
}
