//! Symbolic differentiation with lightweight algebraic simplification.
//!
//! The simplification is constant folding plus 0/1 identities and constant
//! hoisting through products and quotients — enough to reduce derivatives of
//! the supported grammar to readable normal forms (`sech(x + z)^2`, `-z^2`,
//! `x`), not a general computer-algebra rewrite system.

use super::{BinaryOp, Expr, Func, UnaryOp};

pub(crate) fn add(a: Expr, b: Expr) -> Expr {
    if let (Some(x), Some(y)) = (a.as_constant(), b.as_constant()) {
        return Expr::Constant(x + y);
    }
    if a.is_zero() {
        return b;
    }
    if b.is_zero() {
        return a;
    }
    Expr::Binary(BinaryOp::Add, Box::new(a), Box::new(b))
}

pub(crate) fn sub(a: Expr, b: Expr) -> Expr {
    if let (Some(x), Some(y)) = (a.as_constant(), b.as_constant()) {
        return Expr::Constant(x - y);
    }
    if b.is_zero() {
        return a;
    }
    if a.is_zero() {
        return neg(b);
    }
    if a == b {
        return Expr::Constant(0.0);
    }
    Expr::Binary(BinaryOp::Sub, Box::new(a), Box::new(b))
}

pub(crate) fn neg(a: Expr) -> Expr {
    match a {
        Expr::Constant(v) => Expr::Constant(-v),
        Expr::Unary(UnaryOp::Neg, inner) => *inner,
        other => Expr::Unary(UnaryOp::Neg, Box::new(other)),
    }
}

pub(crate) fn mul(a: Expr, b: Expr) -> Expr {
    if let (Some(x), Some(y)) = (a.as_constant(), b.as_constant()) {
        return Expr::Constant(x * y);
    }
    if a.is_zero() || b.is_zero() {
        return Expr::Constant(0.0);
    }
    if a.as_constant() == Some(1.0) {
        return b;
    }
    if b.as_constant() == Some(1.0) {
        return a;
    }
    // Keep constants on the left and merge nested constant factors.
    let (a, b) = if b.as_constant().is_some() && a.as_constant().is_none() {
        (b, a)
    } else {
        (a, b)
    };
    if let Some(c) = a.as_constant() {
        if let Expr::Binary(BinaryOp::Mul, x, y) = &b {
            if let Some(inner) = x.as_constant() {
                return mul(Expr::Constant(c * inner), (**y).clone());
            }
        }
        if c == -1.0 {
            return neg(b);
        }
    }
    Expr::Binary(BinaryOp::Mul, Box::new(a), Box::new(b))
}

pub(crate) fn div(a: Expr, b: Expr) -> Expr {
    if b.as_constant() == Some(1.0) {
        return a;
    }
    if a.is_zero() {
        return Expr::Constant(0.0);
    }
    if let (Some(x), Some(y)) = (a.as_constant(), b.as_constant()) {
        if y != 0.0 {
            return Expr::Constant(x / y);
        }
    }
    // Hoist negation and constant factors out of the numerator so forms
    // like -(3*z^2)/3 reduce to -z^2.
    if let Expr::Unary(UnaryOp::Neg, inner) = a {
        return neg(div(*inner, b));
    }
    if let Some(k) = b.as_constant() {
        if let Expr::Binary(BinaryOp::Mul, x, y) = &a {
            if let Some(c) = x.as_constant() {
                return mul(Expr::Constant(c / k), (**y).clone());
            }
        }
    }
    Expr::Binary(BinaryOp::Div, Box::new(a), Box::new(b))
}

pub(crate) fn pow(base: Expr, exponent: f64) -> Expr {
    if exponent == 0.0 {
        return Expr::Constant(1.0);
    }
    if exponent == 1.0 {
        return base;
    }
    if let Some(v) = base.as_constant() {
        return Expr::Constant(v.powf(exponent));
    }
    Expr::Binary(BinaryOp::Pow, Box::new(base), Box::new(Expr::Constant(exponent)))
}

pub(crate) fn call(func: Func, arg: Expr) -> Expr {
    if let Some(v) = arg.as_constant() {
        return Expr::Constant(func.apply(v));
    }
    Expr::Call(func, Box::new(arg))
}

/// Rebuild an expression through the simplifying constructors.
pub fn simplify(e: &Expr) -> Expr {
    match e {
        Expr::Constant(_) | Expr::Variable(_) => e.clone(),
        Expr::Unary(UnaryOp::Neg, a) => neg(simplify(a)),
        Expr::Binary(op, a, b) => {
            let (a, b) = (simplify(a), simplify(b));
            match op {
                BinaryOp::Add => add(a, b),
                BinaryOp::Sub => sub(a, b),
                BinaryOp::Mul => mul(a, b),
                BinaryOp::Div => div(a, b),
                BinaryOp::Pow => match b.as_constant() {
                    Some(c) => pow(a, c),
                    None => Expr::Binary(BinaryOp::Pow, Box::new(a), Box::new(b)),
                },
            }
        }
        Expr::Call(f, a) => call(*f, simplify(a)),
    }
}

/// Symbolic partial derivative of `e` with respect to `var`.
///
/// Total on the supported grammar: variables absent from `e` give zero, and
/// `^` exponents are constants so no logarithmic terms arise.
pub fn differentiate(e: &Expr, var: &str) -> Expr {
    match e {
        Expr::Constant(_) => Expr::Constant(0.0),
        Expr::Variable(name) => {
            if name == var {
                Expr::Constant(1.0)
            } else {
                Expr::Constant(0.0)
            }
        }
        Expr::Unary(UnaryOp::Neg, a) => neg(differentiate(a, var)),
        Expr::Binary(op, a, b) => {
            let da = || differentiate(a, var);
            let db = || differentiate(b, var);
            match op {
                BinaryOp::Add => add(da(), db()),
                BinaryOp::Sub => sub(da(), db()),
                BinaryOp::Mul => add(mul(da(), (**b).clone()), mul((**a).clone(), db())),
                BinaryOp::Div => {
                    if let Some(_k) = b.as_constant() {
                        div(da(), (**b).clone())
                    } else {
                        // (u'v - uv') / v^2
                        div(
                            sub(mul(da(), (**b).clone()), mul((**a).clone(), db())),
                            pow((**b).clone(), 2.0),
                        )
                    }
                }
                BinaryOp::Pow => {
                    let c = b
                        .as_constant()
                        .expect("pow exponents are constant by construction");
                    mul(mul(Expr::Constant(c), pow((**a).clone(), c - 1.0)), da())
                }
            }
        }
        Expr::Call(func, a) => {
            let u = (**a).clone();
            let du = differentiate(a, var);
            if du.is_zero() {
                return Expr::Constant(0.0);
            }
            let outer = match func {
                Func::Tanh => pow(call(Func::Sech, u), 2.0),
                Func::Sech => neg(mul(call(Func::Sech, u.clone()), call(Func::Tanh, u))),
                Func::Sinh => call(Func::Cosh, u),
                Func::Cosh => call(Func::Sinh, u),
                Func::Exp => call(Func::Exp, u),
                Func::Ln => return div(du, u),
                Func::Sin => call(Func::Cos, u),
                Func::Cos => neg(call(Func::Sin, u)),
            };
            mul(outer, du)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn d(src: &str, var: &str) -> String {
        differentiate(&parse(src).unwrap(), var).to_string()
    }

    #[test]
    fn gain_of_shifted_sigmoid() {
        assert_eq!(d("tanh(x+z)", "z"), "sech(x + z)^2");
    }

    #[test]
    fn gain_of_product() {
        assert_eq!(d("x*z", "z"), "x");
        assert_eq!(d("x*z", "x"), "z");
    }

    #[test]
    fn gain_of_cubic() {
        assert_eq!(d("-z^3/3 - x", "z"), "-z^2");
    }

    #[test]
    fn gain_of_scaled_sigmoid() {
        let g = differentiate(&parse("tanh(x*z)").unwrap(), "z");
        assert_eq!(g.to_string(), "sech(x*z)^2*x");
    }

    #[test]
    fn derivative_of_absent_variable_is_zero() {
        assert_eq!(d("tanh(x+z)", "w"), "0");
    }

    #[test]
    fn quotient_rule() {
        let g = differentiate(&parse("x/z").unwrap(), "z");
        let v = g.eval(&[("x", 3.0), ("z", 2.0)]).unwrap();
        assert!((v - (-0.75)).abs() < 1e-12);
    }

    #[test]
    fn simplify_folds_constants() {
        let e = parse("0*x + 1*z + sech(0)^2 - 1").unwrap();
        assert_eq!(simplify(&e).to_string(), "z + 1 - 1");
    }
}
