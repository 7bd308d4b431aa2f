//! Compilation of expressions to a flat stack program.
//!
//! Integration evaluates each right-hand side four times per step; walking
//! the tree and resolving names through a map at that rate is wasteful.
//! `CompiledExpr` resolves each variable to a slot index once and evaluates
//! with a value stack, no allocation after warm-up.

use super::{BinaryOp, Expr, Func, UnaryOp};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Instr {
    Const(f64),
    Load(usize),
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Pow(f64),
    Call(Func),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("unknown symbol `{name}`; expected one of: {known}")]
pub struct UnknownSymbol {
    pub name: String,
    pub known: String,
}

/// An expression compiled against a fixed slot layout.
#[derive(Debug, Clone)]
pub struct CompiledExpr {
    code: Vec<Instr>,
    max_stack: usize,
}

impl CompiledExpr {
    /// Compile `expr` so that `Variable(slots[i])` reads slot `i` at
    /// evaluation time. Unknown symbols are rejected here — this is where
    /// "unbound at binding time" surfaces for parsed definitions.
    pub fn compile(expr: &Expr, slots: &[&str]) -> Result<CompiledExpr, UnknownSymbol> {
        let mut code = Vec::new();
        emit(expr, slots, &mut code)?;
        let mut depth = 0usize;
        let mut max_stack = 0usize;
        for instr in &code {
            match instr {
                Instr::Const(_) | Instr::Load(_) => depth += 1,
                Instr::Add | Instr::Sub | Instr::Mul | Instr::Div => depth -= 1,
                Instr::Neg | Instr::Pow(_) | Instr::Call(_) => {}
            }
            max_stack = max_stack.max(depth);
        }
        Ok(CompiledExpr { code, max_stack })
    }

    /// Evaluate against the slot values, reusing `stack` as scratch space.
    pub fn eval(&self, slots: &[f64], stack: &mut Vec<f64>) -> f64 {
        stack.clear();
        stack.reserve(self.max_stack);
        for instr in &self.code {
            match *instr {
                Instr::Const(v) => stack.push(v),
                Instr::Load(i) => stack.push(slots[i]),
                Instr::Add => {
                    let b = stack.pop().unwrap();
                    let a = stack.last_mut().unwrap();
                    *a += b;
                }
                Instr::Sub => {
                    let b = stack.pop().unwrap();
                    let a = stack.last_mut().unwrap();
                    *a -= b;
                }
                Instr::Mul => {
                    let b = stack.pop().unwrap();
                    let a = stack.last_mut().unwrap();
                    *a *= b;
                }
                Instr::Div => {
                    let b = stack.pop().unwrap();
                    let a = stack.last_mut().unwrap();
                    *a /= b;
                }
                Instr::Neg => {
                    let a = stack.last_mut().unwrap();
                    *a = -*a;
                }
                Instr::Pow(e) => {
                    let a = stack.last_mut().unwrap();
                    *a = a.powf(e);
                }
                Instr::Call(f) => {
                    let a = stack.last_mut().unwrap();
                    *a = f.apply(*a);
                }
            }
        }
        debug_assert_eq!(stack.len(), 1);
        stack[0]
    }

    /// Convenience wrapper that allocates its own scratch stack.
    pub fn eval_alloc(&self, slots: &[f64]) -> f64 {
        let mut stack = Vec::with_capacity(self.max_stack);
        self.eval(slots, &mut stack)
    }
}

fn emit(expr: &Expr, slots: &[&str], code: &mut Vec<Instr>) -> Result<(), UnknownSymbol> {
    match expr {
        Expr::Constant(v) => code.push(Instr::Const(*v)),
        Expr::Variable(name) => {
            let idx = slots.iter().position(|s| s == name).ok_or_else(|| UnknownSymbol {
                name: name.clone(),
                known: slots.join(", "),
            })?;
            code.push(Instr::Load(idx));
        }
        Expr::Unary(UnaryOp::Neg, a) => {
            emit(a, slots, code)?;
            code.push(Instr::Neg);
        }
        Expr::Binary(BinaryOp::Pow, a, b) => {
            emit(a, slots, code)?;
            let e = b.as_constant().expect("pow exponents are constant by construction");
            code.push(Instr::Pow(e));
        }
        Expr::Binary(op, a, b) => {
            emit(a, slots, code)?;
            emit(b, slots, code)?;
            code.push(match op {
                BinaryOp::Add => Instr::Add,
                BinaryOp::Sub => Instr::Sub,
                BinaryOp::Mul => Instr::Mul,
                BinaryOp::Div => Instr::Div,
                BinaryOp::Pow => unreachable!(),
            });
        }
        Expr::Call(f, a) => {
            emit(a, slots, code)?;
            code.push(Instr::Call(*f));
        }
    }
    Ok(())
}
