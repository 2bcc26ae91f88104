use core::fmt;

use super::{BinOp, Expr, ModelAst};

const ADD: u8 = 1;
const MUL: u8 = 2;
const NEG: u8 = 3;
const POW: u8 = 4;
const ATOM: u8 = 5;

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => ADD,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => MUL,
        Expr::Neg(_) => NEG,
        Expr::Bin(BinOp::Pow, ..) => POW,
        // Negative literals only arise from folding and print with a sign.
        Expr::Num(v) if v.is_sign_negative() => NEG,
        _ => ATOM,
    }
}

struct Printer<'a> {
    ast: &'a ModelAst,
}

impl Printer<'_> {
    fn wrap(&self, e: &Expr, parens: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if parens {
            f.write_str("(")?;
            self.write(e, f)?;
            f.write_str(")")
        } else {
            self.write(e, f)
        }
    }

    fn write(&self, e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match e {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Param(j) => f.write_str(&self.ast.params[*j]),
            Expr::Factor(k) => f.write_str(&self.ast.factors[*k]),
            Expr::Neg(a) => {
                f.write_str("-")?;
                self.wrap(a, prec(a) < NEG, f)
            }
            Expr::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                self.write(a, f)?;
                f.write_str(")")
            }
            Expr::Bin(op, a, b) => {
                let (level, sym) = match op {
                    BinOp::Add => (ADD, " + "),
                    BinOp::Sub => (ADD, " - "),
                    BinOp::Mul => (MUL, "*"),
                    BinOp::Div => (MUL, "/"),
                    BinOp::Pow => (POW, "^"),
                };
                self.wrap(a, prec(a) < level, f)?;
                f.write_str(sym)?;
                // Exponents must be atoms (or signed atoms) to re-parse.
                let right_parens = if *op == BinOp::Pow { prec(b) < ATOM } else { prec(b) <= level };
                self.wrap(b, right_parens, f)
            }
        }
    }
}

impl fmt::Display for ModelAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Printer { ast: self }.write(self.root(), f)
    }
}

#[cfg(test)]
mod tests {
    use super::super::ModelAst;
    use alloc::string::ToString;

    #[test]
    fn prints_minimal_parentheses() {
        let cases = [
            ("a - (b - c)", "a - (b - c)"),
            ("(a - b) - c", "a - b - c"),
            ("a/(b*c)", "a/(b*c)"),
            ("-(a*b)", "-(a*b)"),
            ("(-a)^2", "(-a)^2"),
            ("a^(b^c)", "a^(b^c)"),
            ("a^-b", "a^(-b)"),
            ("exp(a + 1.5)", "exp(a + 1.5)"),
        ];
        for (src, want) in cases {
            let ast = ModelAst::parse(src, &["a", "b", "c"], &[]).unwrap();
            let printed = ast.to_string();
            assert_eq!(printed, want);
            let again = ModelAst::parse(&printed, &["a", "b", "c"], &[]).unwrap();
            assert_eq!(again, ast);
        }
    }
}
