//! Expression trees for ODE right-hand sides and nonlinear terms.
//!
//! The grammar is deliberately small: numeric constants, named variables,
//! unary negation, the four arithmetic operators, `^` with a constant
//! exponent, and a fixed set of analytic functions. Everything downstream
//! (symbolic differentiation, compilation to a stack program, modulation
//! classification) relies on this closed set.

mod classify;
mod compile;
mod deriv;
mod parser;

pub use classify::{
    classify_term, classify_term_with, ClassifyError, CollapseAxis, ModulationClass, SamplingBox,
    TermClassification,
};
pub use compile::{CompiledExpr, UnknownSymbol};
pub use deriv::{differentiate, simplify};
pub use parser::{parse, ParseError};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

/// Maximum tree depth accepted by the parser and constructors.
pub const MAX_DEPTH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// The built-in analytic functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Tanh,
    Sech,
    Sinh,
    Cosh,
    Exp,
    Ln,
    Sin,
    Cos,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Tanh => "tanh",
            Func::Sech => "sech",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "tanh" => Func::Tanh,
            "sech" => Func::Sech,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            _ => return None,
        })
    }

    /// IEEE-754 double evaluation; sech is computed as 1/cosh.
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Func::Tanh => x.tanh(),
            Func::Sech => 1.0 / x.cosh(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Exp => x.exp(),
            Func::Ln => x.ln(),
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
        }
    }
}

/// An expression tree.
///
/// `Pow` exponents are restricted to constants; the parser folds literal
/// exponents (including negated ones) into a single `Constant` node.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Constant(f64),
    Variable(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Errors raised while evaluating an [`Expr`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("non-finite result while evaluating `{context}`")]
    NonFiniteResult { context: String },
}

impl Expr {
    pub fn constant(v: f64) -> Expr {
        Expr::Constant(v)
    }

    pub fn variable(name: impl Into<String>) -> Expr {
        Expr::Variable(name.into())
    }

    /// The constant value of this node, if it is a literal constant.
    pub fn as_constant(&self) -> Option<f64> {
        match self {
            Expr::Constant(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Constant(v) if *v == 0.0)
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Constant(_) | Expr::Variable(_) => 1,
            Expr::Unary(_, a) | Expr::Call(_, a) => 1 + a.depth(),
            Expr::Binary(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Free variable names, sorted.
    pub fn free_vars(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Expr::Constant(_) => {}
            Expr::Variable(name) => {
                out.insert(name.as_str());
            }
            Expr::Unary(_, a) | Expr::Call(_, a) => a.collect_vars(out),
            Expr::Binary(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Evaluate with the given variable bindings.
    ///
    /// Intermediate and final values are checked for finiteness, so overflow
    /// and `ln` of a non-positive argument surface as
    /// [`EvalError::NonFiniteResult`].
    pub fn eval(&self, bindings: &[(&str, f64)]) -> Result<f64, EvalError> {
        let v = self.eval_inner(bindings)?;
        Ok(v)
    }

    fn eval_inner(&self, bindings: &[(&str, f64)]) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Constant(c) => *c,
            Expr::Variable(name) => bindings
                .iter()
                .rev()
                .find(|(n, _)| n == name)
                .map(|(_, v)| *v)
                .ok_or_else(|| EvalError::UnboundVariable(name.clone()))?,
            Expr::Unary(UnaryOp::Neg, a) => -a.eval_inner(bindings)?,
            Expr::Binary(op, a, b) => {
                let x = a.eval_inner(bindings)?;
                let y = b.eval_inner(bindings)?;
                match op {
                    BinaryOp::Add => x + y,
                    BinaryOp::Sub => x - y,
                    BinaryOp::Mul => x * y,
                    BinaryOp::Div => x / y,
                    BinaryOp::Pow => x.powf(y),
                }
            }
            Expr::Call(f, a) => f.apply(a.eval_inner(bindings)?),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFiniteResult {
                context: self.to_string(),
            })
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => 1,
            Expr::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => 2,
            Expr::Unary(UnaryOp::Neg, _) => 3,
            Expr::Binary(BinaryOp::Pow, ..) => 4,
            Expr::Constant(_) | Expr::Variable(_) | Expr::Call(..) => 5,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        let prec = self.precedence();
        let parens = prec < min_prec;
        if parens {
            write!(f, "(")?;
        }
        match self {
            Expr::Constant(v) => write!(f, "{v}")?,
            Expr::Variable(name) => write!(f, "{name}")?,
            Expr::Unary(UnaryOp::Neg, a) => {
                write!(f, "-")?;
                a.fmt_prec(f, prec)?;
            }
            Expr::Binary(op, a, b) => {
                // Left operand at this level, right operand one tighter so
                // `a - (b - c)` and `a / (b / c)` keep their parentheses.
                // Pow is right-associative and its exponent is a constant.
                let (sym, spaced) = match op {
                    BinaryOp::Add => ("+", true),
                    BinaryOp::Sub => ("-", true),
                    BinaryOp::Mul => ("*", false),
                    BinaryOp::Div => ("/", false),
                    BinaryOp::Pow => ("^", false),
                };
                match op {
                    BinaryOp::Pow => {
                        a.fmt_prec(f, prec + 1)?;
                        write!(f, "^")?;
                        b.fmt_prec(f, prec)?;
                    }
                    _ => {
                        a.fmt_prec(f, prec)?;
                        if spaced {
                            write!(f, " {sym} ")?;
                        } else {
                            write!(f, "{sym}")?;
                        }
                        b.fmt_prec(f, prec + 1)?;
                    }
                }
            }
            Expr::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.fmt_prec(f, 0)?;
                write!(f, ")")?;
            }
        }
        if parens {
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// Prints the expression in the same grammar [`parse`] accepts;
/// `parse(e.to_string())` reproduces the tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Expr, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_basic_identities() {
        let e = parse("tanh(x+z)").unwrap();
        assert_eq!(e.eval(&[("x", 0.0), ("z", 0.0)]).unwrap(), 0.0);

        let e = parse("sech(0)^2").unwrap();
        assert_eq!(e.eval(&[]).unwrap(), 1.0);

        let e = parse("tanh(x*z)").unwrap();
        let v = e.eval(&[("x", 2.0), ("z", 0.5)]).unwrap();
        assert!((v - 1.0_f64.tanh()).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn eval_cubic_term() {
        let e = parse("-z^3/3 - x").unwrap();
        let v = e.eval(&[("z", 2.0), ("x", 1.0)]).unwrap();
        assert!((v - (-8.0 / 3.0 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn eval_unbound_variable() {
        let e = parse("x + y").unwrap();
        assert_eq!(
            e.eval(&[("x", 1.0)]),
            Err(EvalError::UnboundVariable("y".into()))
        );
    }

    #[test]
    fn eval_non_finite() {
        let e = parse("ln(x)").unwrap();
        assert!(matches!(
            e.eval(&[("x", -1.0)]),
            Err(EvalError::NonFiniteResult { .. })
        ));
        let e = parse("exp(x)").unwrap();
        assert!(matches!(
            e.eval(&[("x", 1e9)]),
            Err(EvalError::NonFiniteResult { .. })
        ));
    }

    #[test]
    fn display_minimal_parens() {
        for src in [
            "x*z",
            "tanh(x + z)",
            "-z^3/3 - x",
            "a - (b - c)",
            "(x + y)*z",
            "(-x)^2",
            "x^-2",
            "2*-3",
        ] {
            let e = parse(src).unwrap();
            let printed = e.to_string();
            let reparsed = parse(&printed).unwrap();
            assert_eq!(e, reparsed, "{src} printed as {printed}");
        }
    }
}
