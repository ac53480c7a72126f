use std::fmt;
use std::sync::{Arc, OnceLock};

use super::{parse, EvalError, Expr, ParseError, Var};

struct Inner {
    expr: Expr,
    dx: OnceLock<Field>,
    dt: OnceLock<Field>,
}

/// A scalar field `g(x, t)` backed by an expression, with lazily derived
/// and cached partial derivatives of any order.
///
/// Clones share the cache.
#[derive(Clone)]
pub struct Field(Arc<Inner>);

impl Field {
    pub fn new(expr: Expr) -> Self {
        Field(Arc::new(Inner {
            expr,
            dx: OnceLock::new(),
            dt: OnceLock::new(),
        }))
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        parse(text).map(Field::new)
    }

    pub fn zero() -> Self {
        Field::new(Expr::Const(0.0))
    }

    pub fn constant(value: f64) -> Self {
        Field::new(Expr::Const(value))
    }

    pub fn expr(&self) -> &Expr {
        &self.0.expr
    }

    pub fn is_zero(&self) -> bool {
        self.0.expr.is_zero()
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<f64, EvalError> {
        self.0.expr.eval(x, t)
    }

    /// Partial derivative, derived on first use.
    pub fn d(&self, v: Var) -> &Field {
        let cell = match v {
            Var::X => &self.0.dx,
            Var::T => &self.0.dt,
        };
        cell.get_or_init(|| Field::new(self.0.expr.diff(v)))
    }

    pub fn dx(&self) -> &Field {
        self.d(Var::X)
    }

    pub fn dt(&self) -> &Field {
        self.d(Var::T)
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field({})", self.0.expr)
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.expr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cached_derivative_matches_rederivation() {
        let f = Field::parse("(x^2+1)^2/(t^2+1) + tanh(x*t)").unwrap();
        let first = f.dx() as *const Field;
        let second = f.dx() as *const Field;
        assert_eq!(first, second);
        let fresh = f.expr().diff(Var::X);
        assert_eq!(f.dx().expr(), &fresh);
        for &(x, t) in &[(0.3, 0.1), (-1.2, 2.5), (4.0, 0.0)] {
            assert_eq!(
                f.dx().dt().eval(x, t).unwrap().to_bits(),
                fresh.diff(Var::T).eval(x, t).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn clones_share_cache() {
        let f = Field::parse("sin(x)").unwrap();
        let g = f.clone();
        assert!(std::ptr::eq(f.dx(), g.dx()));
    }
}
