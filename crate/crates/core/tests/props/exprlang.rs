use burgers_step::exprlang::{parse, BinOp, Expr, Func, Var};
use proptest::prelude::*;

use super::run;

const H: f64 = 1e-5;

fn central_difference(e: &Expr, v: Var, x: f64, t: f64) -> Option<f64> {
    let (xp, tp, xm, tm) = match v {
        Var::X => (x + H, t, x - H, t),
        Var::T => (x, t + H, x, t - H),
    };
    let up = e.eval(xp, tp).ok()?;
    let down = e.eval(xm, tm).ok()?;
    Some((up - down) / (2.0 * H))
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        Just(Expr::Var(Var::X)),
        Just(Expr::Var(Var::T)),
        (-3.0..3.0f64).prop_map(|c| Expr::Const((c * 4.0).round() / 4.0)),
    ]
}

/// Random trees. `ln`/`sqrt` arguments are shifted to stay positive so most
/// samples are evaluable; the rest are discarded by `prop_assume!`.
pub fn tree() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (inner.clone(), inner.clone(), 0..4usize).prop_map(|(l, r, k)| {
                let op = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div][k];
                let r = if op == BinOp::Div {
                    Expr::Binary(
                        BinOp::Add,
                        Box::new(Expr::Const(2.0)),
                        Box::new(Expr::Binary(BinOp::Pow, Box::new(r), Box::new(Expr::Const(2.0)))),
                    )
                } else {
                    r
                };
                Expr::Binary(op, Box::new(l), Box::new(r))
            }),
            (inner.clone(), 1..4i32).prop_map(|(b, n)| Expr::Binary(
                BinOp::Pow,
                Box::new(b),
                Box::new(Expr::Const(n as f64))
            )),
            (inner, 0..Func::ALL.len()).prop_map(|(a, k)| {
                let f = Func::ALL[k];
                let a = match f {
                    Func::Ln | Func::Sqrt => Expr::Binary(
                        BinOp::Add,
                        Box::new(Expr::Const(1.0)),
                        Box::new(Expr::Binary(BinOp::Pow, Box::new(a), Box::new(Expr::Const(2.0)))),
                    ),
                    _ => a,
                };
                Expr::Call(f, Box::new(a))
            }),
        ]
    })
}

pub fn check_derivative(e: &Expr, x: f64, t: f64) -> Result<(), TestCaseError> {
    for v in [Var::X, Var::T] {
        let value = e.eval(x, t);
        prop_assume!(matches!(value, Ok(y) if y.abs() < 1e3));
        let Some(fd) = central_difference(e, v, x, t) else {
            return Err(TestCaseError::reject("finite difference left the domain"));
        };
        let exact = e
            .diff(v)
            .eval(x, t)
            .map_err(|err| TestCaseError::fail(format!("{e}: {err}")))?;
        prop_assert!(
            (exact - fd).abs() <= 1e-6 * (1.0 + exact.abs()),
            "{} d/d{}: exact {} vs fd {} at ({}, {})",
            e,
            v.name(),
            exact,
            fd,
            x,
            t
        );
    }
    Ok(())
}


pub fn every_function(k: usize, x: f64, t: f64) -> Result<(), TestCaseError> {
    let f = Func::ALL[k];
    // inner argument exercises both variables and the chain rule
    let arg = match f {
        Func::Ln | Func::Sqrt => "1 + x^2 + t*x/2 + t^2",
        _ => "x*t - x/2 + 0.3*t^2",
    };
    let e = parse(&format!("{}({arg})", f.name())).unwrap();
    check_derivative(&e, x, t)
}

pub fn print_parse_fixed_point(e: Expr) -> Result<(), TestCaseError> {
    let once = parse(&e.to_string()).unwrap();
    let twice = parse(&once.to_string()).unwrap();
    prop_assert_eq!(&once, &twice);
    prop_assert_eq!(once.to_string(), twice.to_string());
    Ok(())
}

pub fn derivative_reparses(e: Expr) -> Result<(), TestCaseError> {
    let d = e.diff(Var::X);
    let reparsed = parse(&d.to_string()).unwrap();
    prop_assert_eq!(parse(&reparsed.to_string()).unwrap(), reparsed);
    Ok(())
}

pub fn suite(cases: u32) -> Vec<(&'static str, Result<(), String>)> {
    vec![
        (
            "exprlang: every function matches finite differences",
            run(cases, (0..Func::ALL.len(), -1.5..1.5f64, 0.0..2.0f64), |(k, x, t)| every_function(k, x, t)),
        ),
        (
            "exprlang: random trees match finite differences",
            run(cases, (tree(), -1.5..1.5f64, 0.0..2.0f64), |(e, x, t)| check_derivative(&e, x, t)),
        ),
        ("exprlang: print/parse fixed point", run(cases, tree(), print_parse_fixed_point)),
        ("exprlang: printed derivatives reparse", run(cases, tree(), derivative_reparses)),
    ]
}
