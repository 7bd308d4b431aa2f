//! System catalog: the plain-text definition format, the built-in systems,
//! and parameter perturbation.
//!
//! Built-ins are data, not hard-coded derivative functions — they are parsed
//! from the embedded `defs/*.def` texts through the same path user files
//! take, so those files double as format documentation.

use crate::expr::{parse, CompiledExpr, Expr, ParseError};
use crate::ode::{OdeSystem, StateVector};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use std::cell::RefCell;
use std::fmt;
use thiserror::Error;

pub const BUILTIN_NAMES: [&str; 4] = [
    "rossler_original",
    "rossler_v1",
    "rossler_v2",
    "fitzhugh_nagumo",
];

const DEF_ROSSLER_ORIGINAL: &str = include_str!("../defs/rossler_original.def");
const DEF_ROSSLER_V1: &str = include_str!("../defs/rossler_v1.def");
const DEF_ROSSLER_V2: &str = include_str!("../defs/rossler_v2.def");
const DEF_FITZHUGH_NAGUMO: &str = include_str!("../defs/fitzhugh_nagumo.def");

/// Named parameter values, kept in definition order so serialized output is
/// stable.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SystemParams(Vec<(String, f64)>);

impl SystemParams {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn set(&mut self, name: &str, value: f64) -> bool {
        for (n, v) in &mut self.0 {
            if n == name {
                *v = value;
                return true;
            }
        }
        false
    }

    pub fn push(&mut self, name: String, value: f64) {
        self.0.push((name, value));
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(n, v)| (n.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Serialize for SystemParams {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (name, value) in &self.0 {
            map.serialize_entry(name, value)?;
        }
        map.end()
    }
}

/// The designated multivariate nonlinear term of a system: an expression of
/// two distinct state variables, one treated as the input of an
/// input-output function and the other as its modulator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonlinearTermDef {
    pub expr: Expr,
    pub input_var: String,
    pub modulator_var: String,
}

/// A parsed, fully parameterized ODE system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemDef {
    pub name: String,
    pub state_vars: Vec<String>,
    pub params: SystemParams,
    pub rhs: Vec<Expr>,
    pub term: Option<NonlinearTermDef>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SystemError {
    #[error("unknown system `{name}`; built-ins are: {}", BUILTIN_NAMES.join(", "))]
    UnknownSystem { name: String },
    #[error("unknown parameter `{param}` in system `{system}`")]
    UnknownParameter { system: String, param: String },
    #[error("{0}")]
    Def(#[from] DefError),
}

/// A definition-file error with its 1-based source position.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct DefError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl DefError {
    fn new(line: usize, column: usize, message: impl Into<String>) -> DefError {
        DefError {
            line,
            column,
            message: message.into(),
        }
    }

    /// Lift an expression-parse error into file coordinates. `expr_col` is
    /// the 1-based column where the expression text starts on the line.
    fn from_parse(line: usize, expr_col: usize, err: &ParseError) -> DefError {
        DefError::new(line, expr_col + err.offset(), err.to_string())
    }
}

/// One line of a rendered caret diagnostic for a [`DefError`].
pub fn caret_diagnostic(source: &str, err: &DefError) -> String {
    match source.lines().nth(err.line.saturating_sub(1)) {
        Some(text) => format!(
            "{err}\n  |\n  | {text}\n  | {}^",
            " ".repeat(err.column.saturating_sub(1))
        ),
        None => err.to_string(),
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Replace parameter symbols with their values.
fn substitute_params(e: &Expr, params: &SystemParams) -> Expr {
    match e {
        Expr::Constant(_) => e.clone(),
        Expr::Variable(name) => match params.get(name) {
            Some(v) => Expr::Constant(v),
            None => e.clone(),
        },
        Expr::Unary(op, a) => Expr::Unary(*op, Box::new(substitute_params(a, params))),
        Expr::Binary(op, a, b) => Expr::Binary(
            *op,
            Box::new(substitute_params(a, params)),
            Box::new(substitute_params(b, params)),
        ),
        Expr::Call(f, a) => Expr::Call(*f, Box::new(substitute_params(a, params))),
    }
}

/// Column (1-based) of the first occurrence of `symbol` as a whole token.
fn symbol_column(line_text: &str, expr_col: usize, symbol: &str) -> usize {
    let expr_text = &line_text[(expr_col - 1).min(line_text.len())..];
    let bytes = expr_text.as_bytes();
    let mut search_from = 0;
    while let Some(pos) = expr_text[search_from..].find(symbol) {
        let start = search_from + pos;
        let end = start + symbol.len();
        let before_ok = start == 0
            || !(bytes[start - 1].is_ascii_alphanumeric() || bytes[start - 1] == b'_');
        let after_ok = end >= bytes.len()
            || !(bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_');
        if before_ok && after_ok {
            return expr_col + start;
        }
        search_from = end;
    }
    expr_col
}

/// Parse a system-definition text.
///
/// Format, one directive per line (`;` starts a comment):
///
/// ```text
/// system <name>
/// param <name> = <constant expression>
/// var <name> : <expression>
/// term <expression> input <var> modulator <var>
/// ```
pub fn parse_system_def(source: &str) -> Result<SystemDef, DefError> {
    let mut name: Option<String> = None;
    let mut params = SystemParams::default();
    let mut state_vars: Vec<String> = Vec::new();
    let mut rhs_sources: Vec<(usize, usize, String, Expr)> = Vec::new();
    let mut term: Option<(usize, usize, NonlinearTermDef)> = None;

    for (idx, raw_line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let text = match raw_line.find(';') {
            Some(p) => &raw_line[..p],
            None => raw_line,
        };
        if text.trim().is_empty() {
            continue;
        }
        let indent = text.len() - text.trim_start().len();
        let body = text.trim();
        let col_of = |offset_in_body: usize| indent + offset_in_body + 1;

        let (keyword, rest) = match body.split_once(char::is_whitespace) {
            Some((k, r)) => (k, r.trim_start()),
            None => (body, ""),
        };
        let rest_col = col_of(body.len() - rest.len());

        match keyword {
            "system" => {
                if name.is_some() {
                    return Err(DefError::new(line_no, 1, "duplicate `system` directive"));
                }
                if !is_identifier(rest) {
                    return Err(DefError::new(
                        line_no,
                        rest_col,
                        format!("`{rest}` is not a valid system name"),
                    ));
                }
                name = Some(rest.to_string());
            }
            "param" => {
                let (pname, value_src) = rest.split_once('=').ok_or_else(|| {
                    DefError::new(line_no, rest_col, "expected `param <name> = <value>`")
                })?;
                let pname = pname.trim();
                if !is_identifier(pname) {
                    return Err(DefError::new(
                        line_no,
                        rest_col,
                        format!("`{pname}` is not a valid parameter name"),
                    ));
                }
                if params.get(pname).is_some() {
                    return Err(DefError::new(
                        line_no,
                        rest_col,
                        format!("duplicate parameter `{pname}`"),
                    ));
                }
                let value_col = col_of(body.len() - value_src.trim_start().len());
                let value_src = value_src.trim();
                let value_expr = parse(value_src)
                    .map_err(|e| DefError::from_parse(line_no, value_col, &e))?;
                let value = value_expr.eval(&[]).map_err(|_| {
                    DefError::new(line_no, value_col, "parameter value must be a constant")
                })?;
                params.push(pname.to_string(), value);
            }
            "var" => {
                let (vname, expr_src) = rest.split_once(':').ok_or_else(|| {
                    DefError::new(line_no, rest_col, "expected `var <name> : <expression>`")
                })?;
                let vname = vname.trim();
                if !is_identifier(vname) {
                    return Err(DefError::new(
                        line_no,
                        rest_col,
                        format!("`{vname}` is not a valid variable name"),
                    ));
                }
                if state_vars.iter().any(|v| v == vname) {
                    return Err(DefError::new(
                        line_no,
                        rest_col,
                        format!("duplicate variable `{vname}`"),
                    ));
                }
                let expr_col = col_of(body.len() - expr_src.trim_start().len());
                let expr_src = expr_src.trim();
                let expr =
                    parse(expr_src).map_err(|e| DefError::from_parse(line_no, expr_col, &e))?;
                state_vars.push(vname.to_string());
                rhs_sources.push((line_no, expr_col, raw_line.to_string(), expr));
            }
            "term" => {
                if term.is_some() {
                    return Err(DefError::new(line_no, 1, "duplicate `term` directive"));
                }
                let (before_mod, modulator) = rest.rsplit_once(" modulator ").ok_or_else(|| {
                    DefError::new(
                        line_no,
                        rest_col,
                        "expected `term <expression> input <var> modulator <var>`",
                    )
                })?;
                let (expr_src, input) = before_mod.rsplit_once(" input ").ok_or_else(|| {
                    DefError::new(
                        line_no,
                        rest_col,
                        "expected `term <expression> input <var> modulator <var>`",
                    )
                })?;
                let (input, modulator) = (input.trim(), modulator.trim());
                for v in [input, modulator] {
                    if !is_identifier(v) {
                        return Err(DefError::new(
                            line_no,
                            rest_col,
                            format!("`{v}` is not a valid variable name"),
                        ));
                    }
                }
                if input == modulator {
                    return Err(DefError::new(
                        line_no,
                        rest_col,
                        "term input and modulator must be distinct variables",
                    ));
                }
                let expr_col = col_of(body.len() - rest.len());
                let expr_src = expr_src.trim_end();
                let expr =
                    parse(expr_src).map_err(|e| DefError::from_parse(line_no, expr_col, &e))?;
                term = Some((
                    line_no,
                    expr_col,
                    NonlinearTermDef {
                        expr,
                        input_var: input.to_string(),
                        modulator_var: modulator.to_string(),
                    },
                ));
            }
            other => {
                return Err(DefError::new(
                    line_no,
                    col_of(0),
                    format!("unknown directive `{other}`; expected system, param, var, or term"),
                ));
            }
        }
    }

    let name = name.ok_or_else(|| DefError::new(1, 1, "missing `system <name>` directive"))?;
    if state_vars.is_empty() {
        return Err(DefError::new(1, 1, "system defines no state variables"));
    }

    // Every symbol in every right-hand side must be a state variable or a
    // parameter.
    let mut rhs = Vec::with_capacity(rhs_sources.len());
    for (line_no, expr_col, raw_line, expr) in rhs_sources {
        for sym in expr.free_vars() {
            let known =
                state_vars.iter().any(|v| v == sym) || params.get(sym).is_some();
            if !known {
                return Err(DefError::new(
                    line_no,
                    symbol_column(&raw_line, expr_col, sym),
                    format!("unknown symbol `{sym}`"),
                ));
            }
        }
        rhs.push(expr);
    }

    let term = match term {
        None => None,
        Some((line_no, expr_col, mut def)) => {
            for v in [&def.input_var, &def.modulator_var] {
                if !state_vars.iter().any(|s| s == v) {
                    return Err(DefError::new(
                        line_no,
                        expr_col,
                        format!("term variable `{v}` is not a state variable"),
                    ));
                }
            }
            def.expr = substitute_params(&def.expr, &params);
            for sym in def.expr.free_vars() {
                if sym != def.input_var && sym != def.modulator_var {
                    return Err(DefError::new(
                        line_no,
                        expr_col,
                        format!(
                            "term may only reference `{}`, `{}`, and parameters; found `{sym}`",
                            def.input_var, def.modulator_var
                        ),
                    ));
                }
            }
            Some(def)
        }
    };

    Ok(SystemDef {
        name,
        state_vars,
        params,
        rhs,
        term,
    })
}

impl SystemDef {
    pub fn dim(&self) -> usize {
        self.state_vars.len()
    }

    /// The conventional starting point used for all built-ins: 0.1 in every
    /// component. Post-transient results on an attracting limit cycle do not
    /// depend on it.
    pub fn default_initial(&self) -> StateVector {
        StateVector(vec![0.1; self.dim()])
    }

    /// Copy of the system with `param` scaled by `1 + relative_change`.
    pub fn perturb(&self, param: &str, relative_change: f64) -> Result<SystemDef, SystemError> {
        let mut out = self.clone();
        let old = out
            .params
            .get(param)
            .ok_or_else(|| SystemError::UnknownParameter {
                system: self.name.clone(),
                param: param.to_string(),
            })?;
        out.params.set(param, old * (1.0 + relative_change));
        Ok(out)
    }

    /// Resolve names to slots and bake parameter values in, ready for
    /// integration.
    pub fn compile(&self) -> Result<CompiledSystem, SystemError> {
        let mut slot_names: Vec<&str> = self.state_vars.iter().map(|s| s.as_str()).collect();
        for (p, _) in self.params.iter() {
            slot_names.push(p);
        }
        let mut rhs = Vec::with_capacity(self.rhs.len());
        for (expr, var) in self.rhs.iter().zip(&self.state_vars) {
            let compiled = CompiledExpr::compile(expr, &slot_names).map_err(|e| {
                SystemError::Def(DefError::new(
                    1,
                    1,
                    format!("in d{var}/dt: {e}"),
                ))
            })?;
            rhs.push(compiled);
        }
        let mut slots = vec![0.0; slot_names.len()];
        for (i, (_, v)) in self.params.iter().enumerate() {
            slots[self.state_vars.len() + i] = v;
        }
        Ok(CompiledSystem {
            dim: self.dim(),
            rhs,
            scratch: RefCell::new(Scratch {
                slots,
                stack: Vec::new(),
            }),
        })
    }
}

/// Re-emits the definition format; `parse_system_def` reads it back
/// unchanged.
impl fmt::Display for SystemDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "system {}", self.name)?;
        for (name, value) in self.params.iter() {
            writeln!(f, "param {name} = {value}")?;
        }
        for (var, expr) in self.state_vars.iter().zip(&self.rhs) {
            writeln!(f, "var {var} : {expr}")?;
        }
        if let Some(term) = &self.term {
            writeln!(
                f,
                "term {} input {} modulator {}",
                term.expr, term.input_var, term.modulator_var
            )?;
        }
        Ok(())
    }
}

/// One of the four built-in systems, fully parameterized.
pub fn builtin(name: &str) -> Result<SystemDef, SystemError> {
    let source = match name {
        "rossler_original" => DEF_ROSSLER_ORIGINAL,
        "rossler_v1" => DEF_ROSSLER_V1,
        "rossler_v2" => DEF_ROSSLER_V2,
        "fitzhugh_nagumo" => DEF_FITZHUGH_NAGUMO,
        _ => {
            return Err(SystemError::UnknownSystem {
                name: name.to_string(),
            })
        }
    };
    Ok(parse_system_def(source).expect("embedded definitions parse"))
}

struct Scratch {
    slots: Vec<f64>,
    stack: Vec<f64>,
}

/// A system compiled for integration. Parameter values live in fixed slots;
/// each right-hand-side evaluation writes the state into the scratch slots
/// and runs the stack programs. Cheap to build — create one per worker
/// rather than sharing across threads.
pub struct CompiledSystem {
    dim: usize,
    rhs: Vec<CompiledExpr>,
    scratch: RefCell<Scratch>,
}

impl OdeSystem for CompiledSystem {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval_rhs(&self, state: &[f64], out: &mut [f64]) {
        let mut scratch = self.scratch.borrow_mut();
        let scratch = &mut *scratch;
        scratch.slots[..self.dim].copy_from_slice(state);
        for (i, expr) in self.rhs.iter().enumerate() {
            out[i] = expr.eval(&scratch.slots, &mut scratch.stack);
        }
    }
}
