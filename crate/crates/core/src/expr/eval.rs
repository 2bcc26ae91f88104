use alloc::collections::BTreeMap;

use super::{BinOp, Expr, Func};
use crate::EvalError;

/// Named bindings for [`super::ModelAst::eval`].
pub type Env<'a> = BTreeMap<&'a str, f64>;

fn domain(op: &'static str, value: f64) -> EvalError {
    EvalError::Domain { op, value }
}

pub(super) fn eval(e: &Expr, factors: &[f64], params: &[f64]) -> Result<f64, EvalError> {
    Ok(match e {
        Expr::Num(v) => *v,
        Expr::Param(j) => params[*j],
        Expr::Factor(k) => factors[*k],
        Expr::Neg(a) => -eval(a, factors, params)?,
        Expr::Call(f, a) => {
            let x = eval(a, factors, params)?;
            match f {
                Func::Exp => libm::exp(x),
                Func::Log if x <= 0.0 => return Err(domain("log", x)),
                Func::Log => libm::log(x),
                Func::Log10 if x <= 0.0 => return Err(domain("log10", x)),
                Func::Log10 => libm::log10(x),
                Func::Sqrt if x < 0.0 => return Err(domain("sqrt", x)),
                Func::Sqrt => libm::sqrt(x),
            }
        }
        Expr::Bin(op, a, b) => {
            let x = eval(a, factors, params)?;
            let y = eval(b, factors, params)?;
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div if y == 0.0 => return Err(domain("division", y)),
                BinOp::Div => x / y,
                BinOp::Pow => pow(x, y, b)?,
            }
        }
    })
}

/// `x^y`. A non-positive base needs an exponent that is a literal integer
/// (zero base: a non-negative one).
fn pow(x: f64, y: f64, exponent: &Expr) -> Result<f64, EvalError> {
    if x > 0.0 {
        return Ok(libm::pow(x, y));
    }
    let literal = match exponent {
        Expr::Num(v) => Some(*v),
        Expr::Neg(inner) => match **inner {
            Expr::Num(v) => Some(-v),
            _ => None,
        },
        _ => None,
    };
    match literal {
        Some(n) if x == 0.0 && n < 0.0 => Err(domain("0^negative", n)),
        Some(n) if libm::trunc(n) == n => Ok(libm::pow(x, n)),
        _ => Err(domain("power of non-positive base", x)),
    }
}
