//! A small expression language for user-defined mean functions.
//!
//! Sources use `+ - * / ^`, unary minus, parentheses, decimal or scientific
//! literals and the functions `exp`, `log`, `log10` and `sqrt`. Every
//! identifier must be declared as either a parameter or a factor; symbolic
//! derivatives with respect to the parameters supply the model gradient.

mod diff;
mod eval;
mod parse;
mod print;

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

pub use eval::Env;
pub use parse::ParseError;

use crate::model::Model;
use crate::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Log10,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Log10 => "log10",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "log10" => Func::Log10,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

/// Expression tree. Symbols refer to positions in the owning
/// [`ModelAst`]'s parameter and factor lists.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Param(usize),
    Factor(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn depends_on_param(&self, j: usize) -> bool {
        match self {
            Expr::Num(_) | Expr::Factor(_) => false,
            Expr::Param(k) => *k == j,
            Expr::Neg(a) | Expr::Call(_, a) => a.depends_on_param(j),
            Expr::Bin(_, a, b) => a.depends_on_param(j) || b.depends_on_param(j),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Factor(_) | Expr::Param(_) => 1,
            Expr::Neg(a) | Expr::Call(_, a) => 1 + a.node_count(),
            Expr::Bin(_, a, b) => 1 + a.node_count() + b.node_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DeclError {
    #[error("`{0}` is declared more than once")]
    Duplicate(String),
    #[error("`{0}` is not a valid identifier")]
    BadName(String),
    #[error("`{0}` is a reserved function name")]
    Reserved(String),
    #[error("`{0}` is not a declared parameter")]
    UnknownParam(String),
}

/// A parsed expression together with its symbol declarations.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelAst {
    root: Expr,
    params: Vec<String>,
    factors: Vec<String>,
}

impl ModelAst {
    /// Parses `source`, resolving identifiers against the declared names.
    pub fn parse(source: &str, params: &[&str], factors: &[&str]) -> Result<Self, ParseError> {
        let params: Vec<String> = params.iter().map(|s| String::from(*s)).collect();
        let factors: Vec<String> = factors.iter().map(|s| String::from(*s)).collect();
        check_decls(&params, &factors).map_err(ParseError::Declaration)?;
        let root = parse::parse(source, &params, &factors)?;
        Ok(Self { root, params, factors })
    }

    pub fn from_parts(root: Expr, params: Vec<String>, factors: Vec<String>) -> Self {
        Self { root, params, factors }
    }

    pub fn root(&self) -> &Expr {
        &self.root
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn factors(&self) -> &[String] {
        &self.factors
    }

    /// Symbolic partial derivative with respect to a declared parameter.
    pub fn differentiate(&self, param: &str) -> Result<ModelAst, DeclError> {
        let j = self
            .params
            .iter()
            .position(|p| p == param)
            .ok_or_else(|| DeclError::UnknownParam(param.into()))?;
        Ok(self.differentiate_index(j))
    }

    pub fn differentiate_index(&self, j: usize) -> ModelAst {
        Self { root: diff::derivative(&self.root, j), params: self.params.clone(), factors: self.factors.clone() }
    }

    /// Evaluates with positional bindings.
    pub fn eval_slices(&self, factors: &[f64], params: &[f64]) -> Result<f64, EvalError> {
        eval::eval(&self.root, factors, params)
    }

    /// Evaluates with named bindings.
    pub fn eval(&self, env: &Env) -> Result<f64, EvalError> {
        // Only symbols that occur must be bound.
        let mut used_p = alloc::vec![false; self.params.len()];
        let mut used_f = alloc::vec![false; self.factors.len()];
        mark_used(&self.root, &mut used_p, &mut used_f);
        let bind = |names: &[String], used: &[bool]| -> Result<Vec<f64>, EvalError> {
            names
                .iter()
                .zip(used)
                .map(|(n, &u)| match env.get(n.as_str()) {
                    Some(v) => Ok(*v),
                    None if u => Err(EvalError::Unbound(n.clone())),
                    None => Ok(f64::NAN),
                })
                .collect()
        };
        let p = bind(&self.params, &used_p)?;
        let f = bind(&self.factors, &used_f)?;
        eval::eval(&self.root, &f, &p)
    }
}

fn mark_used(e: &Expr, p: &mut [bool], f: &mut [bool]) {
    match e {
        Expr::Num(_) => {}
        Expr::Param(j) => p[*j] = true,
        Expr::Factor(k) => f[*k] = true,
        Expr::Neg(a) | Expr::Call(_, a) => mark_used(a, p, f),
        Expr::Bin(_, a, b) => {
            mark_used(a, p, f);
            mark_used(b, p, f);
        }
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn check_decls(params: &[String], factors: &[String]) -> Result<(), DeclError> {
    let all: Vec<&String> = params.iter().chain(factors).collect();
    for (i, name) in all.iter().enumerate() {
        if !is_identifier(name) {
            return Err(DeclError::BadName((*name).clone()));
        }
        if Func::from_name(name).is_some() {
            return Err(DeclError::Reserved((*name).clone()));
        }
        if all[..i].contains(name) {
            return Err(DeclError::Duplicate((*name).clone()));
        }
    }
    Ok(())
}

/// A [`Model`] defined by expression source, with one symbolic derivative
/// per parameter.
#[derive(Debug, Clone)]
pub struct ExprModel {
    ast: ModelAst,
    derivatives: Vec<Expr>,
}

impl ExprModel {
    pub fn new(ast: ModelAst) -> Self {
        let derivatives = (0..ast.params.len()).map(|j| diff::derivative(&ast.root, j)).collect();
        Self { ast, derivatives }
    }

    pub fn parse(source: &str, params: &[&str], factors: &[&str]) -> Result<Self, ParseError> {
        Ok(Self::new(ModelAst::parse(source, params, factors)?))
    }

    pub fn ast(&self) -> &ModelAst {
        &self.ast
    }

    pub fn derivative(&self, j: usize) -> &Expr {
        &self.derivatives[j]
    }
}

impl Model for ExprModel {
    fn n_params(&self) -> usize {
        self.ast.params.len()
    }
    fn n_factors(&self) -> usize {
        self.ast.factors.len()
    }
    fn param_names(&self) -> Vec<String> {
        self.ast.params.clone()
    }
    fn factor_names(&self) -> Vec<String> {
        self.ast.factors.clone()
    }
    fn mean(&self, point: &[f64], theta: &[f64]) -> Result<f64, EvalError> {
        eval::eval(&self.ast.root, point, theta)
    }
    fn gradient_into(&self, point: &[f64], theta: &[f64], out: &mut [f64]) -> Result<(), EvalError> {
        for (o, d) in out.iter_mut().zip(&self.derivatives) {
            *o = eval::eval(d, point, theta)?;
        }
        Ok(())
    }
}

/// Source text of the reaction-yield model over factors `R, C, T`.
pub const MECHANISTIC_SOURCE: &str = "C^theta1*theta0*R*exp(theta2*(0.0028344 - 1/(T + 273))) \
    / ((R + C^theta1p*theta0p*exp(theta2p*(0.0028344 - 1/(T + 273)))) \
    * (R + C^theta1*theta0*exp(theta2*(0.0028344 - 1/(T + 273)))))";

/// Source text of the hybrid model over factors `S, E, P`.
pub const HYBRID_SOURCE: &str = "exp(a0 + a1*log10(E/6.25) + a2*(P - 300)/100 \
    + a3*log10(E/6.25)^2 + a4*((P - 300)/100)^2)*S/(a5 + S)";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn declarations_are_checked() {
        assert!(matches!(
            ModelAst::parse("a", &["a"], &["a"]),
            Err(ParseError::Declaration(DeclError::Duplicate(_)))
        ));
        assert!(matches!(
            ModelAst::parse("exp", &["exp"], &[]),
            Err(ParseError::Declaration(DeclError::Reserved(_)))
        ));
        assert!(matches!(
            ModelAst::parse("x", &["1x"], &[]),
            Err(ParseError::Declaration(DeclError::BadName(_)))
        ));
    }

    #[test]
    fn named_eval() {
        let ast = ModelAst::parse("th0*R", &["th0"], &["R", "unused"]).unwrap();
        let env: Env = [("th0", 2.0), ("R", 3.0)].into_iter().collect();
        assert_eq!(ast.eval(&env).unwrap(), 6.0);
        let env: Env = [("th0", 2.0)].into_iter().collect();
        assert_eq!(ast.eval(&env), Err(EvalError::Unbound("R".into())));
    }

    #[test]
    fn unknown_derivative_parameter() {
        let ast = ModelAst::parse("a*x", &["a"], &["x"]).unwrap();
        assert!(ast.differentiate("b").is_err());
        assert_eq!(ast.differentiate("a").unwrap().root(), &Expr::Factor(0));
    }
}
