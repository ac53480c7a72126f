//! Symbolic differentiation with constant folding and 0/1 identities only.

use super::{BinOp, Expr, Func, Var};

fn folded(value: f64) -> Option<Expr> {
    value.is_finite().then_some(Expr::Const(value))
}

pub(crate) fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(c) => Expr::Const(-c),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

pub(crate) fn add(a: Expr, b: Expr) -> Expr {
    if let (Expr::Const(p), Expr::Const(q)) = (&a, &b) {
        if let Some(c) = folded(p + q) {
            return c;
        }
    }
    if a.is_zero() {
        return b;
    }
    if b.is_zero() {
        return a;
    }
    Expr::Binary(BinOp::Add, Box::new(a), Box::new(b))
}

pub(crate) fn sub(a: Expr, b: Expr) -> Expr {
    if let (Expr::Const(p), Expr::Const(q)) = (&a, &b) {
        if let Some(c) = folded(p - q) {
            return c;
        }
    }
    if b.is_zero() {
        return a;
    }
    if a.is_zero() {
        return neg(b);
    }
    Expr::Binary(BinOp::Sub, Box::new(a), Box::new(b))
}

pub(crate) fn mul(a: Expr, b: Expr) -> Expr {
    if let (Expr::Const(p), Expr::Const(q)) = (&a, &b) {
        if let Some(c) = folded(p * q) {
            return c;
        }
    }
    if a.is_zero() || b.is_zero() {
        return Expr::Const(0.0);
    }
    if a.is_one() {
        return b;
    }
    if b.is_one() {
        return a;
    }
    Expr::Binary(BinOp::Mul, Box::new(a), Box::new(b))
}

pub(crate) fn div(a: Expr, b: Expr) -> Expr {
    if let (Expr::Const(p), Expr::Const(q)) = (&a, &b) {
        if *q != 0.0 {
            if let Some(c) = folded(p / q) {
                return c;
            }
        }
    }
    if a.is_zero() && !b.is_zero() {
        return Expr::Const(0.0);
    }
    if b.is_one() {
        return a;
    }
    Expr::Binary(BinOp::Div, Box::new(a), Box::new(b))
}

pub(crate) fn pow(a: Expr, b: Expr) -> Expr {
    if b.is_zero() {
        return Expr::Const(1.0);
    }
    if b.is_one() {
        return a;
    }
    if let (Expr::Const(p), Expr::Const(q)) = (&a, &b) {
        if let Ok(v) = Expr::Binary(BinOp::Pow, Box::new(Expr::Const(*p)), Box::new(Expr::Const(*q)))
            .eval(0.0, 0.0)
        {
            return Expr::Const(v);
        }
    }
    Expr::Binary(BinOp::Pow, Box::new(a), Box::new(b))
}

fn call(f: Func, a: Expr) -> Expr {
    Expr::Call(f, Box::new(a))
}

pub(crate) fn differentiate(e: &Expr, v: Var) -> Expr {
    if !e.depends_on(v) {
        return Expr::Const(0.0);
    }
    match e {
        Expr::Const(_) => Expr::Const(0.0),
        Expr::Var(w) => Expr::Const(if *w == v { 1.0 } else { 0.0 }),
        Expr::Neg(a) => neg(differentiate(a, v)),
        Expr::Binary(op, l, r) => {
            let (l, r) = (l.as_ref(), r.as_ref());
            match op {
                BinOp::Add => add(differentiate(l, v), differentiate(r, v)),
                BinOp::Sub => sub(differentiate(l, v), differentiate(r, v)),
                BinOp::Mul => add(
                    mul(differentiate(l, v), r.clone()),
                    mul(l.clone(), differentiate(r, v)),
                ),
                BinOp::Div => {
                    // u'/w - u w'/w^2
                    let first = div(differentiate(l, v), r.clone());
                    let second = div(
                        mul(l.clone(), differentiate(r, v)),
                        pow(r.clone(), Expr::Const(2.0)),
                    );
                    sub(first, second)
                }
                BinOp::Pow => {
                    if !r.depends_on(v) {
                        // w u^(w-1) u'
                        let lowered = pow(l.clone(), sub(r.clone(), Expr::Const(1.0)));
                        mul(mul(r.clone(), lowered), differentiate(l, v))
                    } else {
                        // u^w (w' ln u + w u'/u)
                        let log_part = mul(differentiate(r, v), call(Func::Ln, l.clone()));
                        let base_part = div(mul(r.clone(), differentiate(l, v)), l.clone());
                        mul(e.clone(), add(log_part, base_part))
                    }
                }
            }
        }
        Expr::Call(f, a) => {
            let inner = differentiate(a, v);
            let a = a.as_ref().clone();
            let outer = match f {
                Func::Sin => call(Func::Cos, a),
                Func::Cos => neg(call(Func::Sin, a)),
                Func::Exp => call(Func::Exp, a),
                Func::Ln => return div(inner, a),
                Func::Sqrt => {
                    return div(inner, mul(Expr::Const(2.0), call(Func::Sqrt, a)));
                }
                Func::Tanh => sub(
                    Expr::Const(1.0),
                    pow(call(Func::Tanh, a), Expr::Const(2.0)),
                ),
                Func::Sinh => call(Func::Cosh, a),
                Func::Cosh => call(Func::Sinh, a),
                Func::Atan => {
                    return div(inner, add(Expr::Const(1.0), pow(a, Expr::Const(2.0))));
                }
            };
            mul(outer, inner)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn d(src: &str, v: Var, x: f64, t: f64) -> f64 {
        parse(src).unwrap().diff(v).eval(x, t).unwrap()
    }

    #[test]
    fn worked_examples() {
        assert_eq!(d("t^2+1", Var::T, 0.0, 3.0), 6.0);
        assert_eq!(d("tanh(x)", Var::X, 0.0, 0.0), 1.0);
        assert_eq!(d("atan(t)", Var::T, 0.0, 1.0), 0.5);
    }

    #[test]
    fn independent_variable_gives_zero_tree() {
        assert_eq!(parse("sin(t)*t^3").unwrap().diff(Var::X), Expr::Const(0.0));
        assert_eq!(parse("x").unwrap().diff(Var::X), Expr::Const(1.0));
    }

    #[test]
    fn simplification_is_light() {
        assert_eq!(parse("3*x+2").unwrap().diff(Var::X).to_string(), "3");
        assert_eq!(parse("x^2").unwrap().diff(Var::X).to_string(), "2*x");
        assert_eq!(parse("x^3").unwrap().diff(Var::X).to_string(), "3*x^2");
    }

    #[test]
    fn variable_exponent_uses_log_rule() {
        // d/dx x^x = x^x (ln x + 1)
        let at = 1.7_f64;
        let expected = at.powf(at) * (at.ln() + 1.0);
        assert!((d("x^x", Var::X, at, 0.0) - expected).abs() < 1e-12);
        // d/dt 2^t = 2^t ln 2
        assert!((d("2^t", Var::T, 0.0, 1.0) - 2.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn quotient_and_chain_rule() {
        // (x^2+1)^2/(t^2+1), d/dt at (1, 1) = -4 * 2t/(t^2+1)^2 = -2
        assert!((d("(x^2+1)^2/(t^2+1)", Var::T, 1.0, 1.0) + 2.0).abs() < 1e-14);
        // d/dx at (1, 1) = 2(x^2+1)2x/(t^2+1) = 4
        assert!((d("(x^2+1)^2/(t^2+1)", Var::X, 1.0, 1.0) - 4.0).abs() < 1e-14);
        assert!((d("ln(x^2)", Var::X, 2.0, 0.0) - 1.0).abs() < 1e-14);
        assert!((d("sqrt(x)", Var::X, 4.0, 0.0) - 0.25).abs() < 1e-14);
    }
}
