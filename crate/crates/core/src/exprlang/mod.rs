//! Closed-form expressions in the two independent variables `x` and `t`.
//!
//! Coefficients `a_k(x, t)`, `b_k(x, t)` and background terms `u_j(x, t)` are
//! all written in this small language. Expressions can be parsed from text,
//! printed back, evaluated, and differentiated exactly.
//!
//! Grammar (EBNF):
//!
//! ```text
//! expr    = term , { ("+" | "-") , term } ;
//! term    = unary , { ("*" | "/") , unary } ;
//! unary   = "-" , unary | power ;
//! power   = primary , [ "^" , unary ] ;
//! primary = number | "x" | "t" | "pi" | "e"
//!         | func , "(" , expr , ")" | "(" , expr , ")" ;
//! func    = "sin" | "cos" | "exp" | "ln" | "sqrt" | "tanh" | "sinh" | "cosh" | "atan" ;
//! number  = digits , [ "." , digits ] , [ ("e" | "E") , [ "+" | "-" ] , digits ] ;
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-x^2`
//! is `-(x^2)` and `2^3^2` is `2^(3^2)`.

mod deriv;
mod field;
mod parser;

use std::fmt;

pub use field::Field;
pub use parser::{parse, ParseError};

/// Independent variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    T,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::T => "t",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Tanh,
    Sinh,
    Cosh,
    Atan,
}

impl Func {
    pub const ALL: [Func; 9] = [
        Func::Sin,
        Func::Cos,
        Func::Exp,
        Func::Ln,
        Func::Sqrt,
        Func::Tanh,
        Func::Sinh,
        Func::Cosh,
        Func::Atan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Tanh => "tanh",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Atan => "atan",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    LogOfNonPositive,
    SqrtOfNegative,
    DivisionByZero,
    FractionalPowerOfNegative,
    NonFinite,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainKind::LogOfNonPositive => "logarithm of a non-positive value",
            DomainKind::SqrtOfNegative => "square root of a negative value",
            DomainKind::DivisionByZero => "division by zero",
            DomainKind::FractionalPowerOfNegative => "fractional power of a negative base",
            DomainKind::NonFinite => "non-finite result",
        })
    }
}

/// Evaluation left the real domain of the expression.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{kind} in `{node}` at x = {x}, t = {t}")]
pub struct EvalError {
    pub kind: DomainKind,
    /// The offending sub-expression, printed.
    pub node: String,
    pub x: f64,
    pub t: f64,
}

impl Expr {
    pub fn constant(value: f64) -> Expr {
        Expr::Const(value)
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 1.0)
    }

    /// True if the variable occurs anywhere in the tree.
    pub fn depends_on(&self, v: Var) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(w) => *w == v,
            Expr::Neg(e) | Expr::Call(_, e) => e.depends_on(v),
            Expr::Binary(_, l, r) => l.depends_on(v) || r.depends_on(v),
        }
    }

    pub fn is_constant(&self) -> bool {
        !self.depends_on(Var::X) && !self.depends_on(Var::T)
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<f64, EvalError> {
        let fail = |kind| EvalError {
            kind,
            node: self.to_string(),
            x,
            t,
        };
        let value = match self {
            Expr::Const(c) => *c,
            Expr::Var(Var::X) => x,
            Expr::Var(Var::T) => t,
            Expr::Neg(e) => -e.eval(x, t)?,
            Expr::Binary(op, l, r) => {
                let a = l.eval(x, t)?;
                let b = r.eval(x, t)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(fail(DomainKind::DivisionByZero));
                        }
                        a / b
                    }
                    BinOp::Pow => power(a, b).map_err(fail)?,
                }
            }
            Expr::Call(func, e) => {
                let a = e.eval(x, t)?;
                match func {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Ln => {
                        if a <= 0.0 {
                            return Err(fail(DomainKind::LogOfNonPositive));
                        }
                        a.ln()
                    }
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err(fail(DomainKind::SqrtOfNegative));
                        }
                        a.sqrt()
                    }
                    Func::Tanh => a.tanh(),
                    Func::Sinh => a.sinh(),
                    Func::Cosh => a.cosh(),
                    Func::Atan => a.atan(),
                }
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(fail(DomainKind::NonFinite))
        }
    }

    /// Exact partial derivative with respect to `v`.
    pub fn diff(&self, v: Var) -> Expr {
        deriv::differentiate(self, v)
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Binary(BinOp::Pow, ..) => 4,
            Expr::Const(c) if c.is_sign_negative() => 0,
            Expr::Const(_) | Expr::Var(_) | Expr::Call(..) => 5,
        }
    }
}

/// `base^exponent`; integer exponents accept any base.
fn power(base: f64, exponent: f64) -> Result<f64, DomainKind> {
    if exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64 {
        if base == 0.0 && exponent < 0.0 {
            return Err(DomainKind::DivisionByZero);
        }
        return Ok(base.powi(exponent as i32));
    }
    if base > 0.0 {
        Ok(base.powf(exponent))
    } else if base == 0.0 && exponent > 0.0 {
        Ok(0.0)
    } else if base == 0.0 {
        Err(DomainKind::DivisionByZero)
    } else {
        Err(DomainKind::FractionalPowerOfNegative)
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    if e.precedence() >= min_prec {
        write!(f, "{e}")
    } else {
        write!(f, "({e})")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if c.is_sign_negative() {
                    write!(f, "-{}", -c)
                } else {
                    write!(f, "{c}")
                }
            }
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Neg(e) => {
                f.write_str("-")?;
                write_operand(f, e, 3)
            }
            Expr::Binary(op, l, r) => {
                let (symbol, left_prec, right_prec) = match op {
                    BinOp::Add => ("+", 1, 2),
                    BinOp::Sub => ("-", 1, 2),
                    BinOp::Mul => ("*", 2, 3),
                    BinOp::Div => ("/", 2, 3),
                    BinOp::Pow => ("^", 5, 3),
                };
                write_operand(f, l, left_prec)?;
                f.write_str(symbol)?;
                write_operand(f, r, right_prec)
            }
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}
