use std::sync::{Arc, OnceLock};

use burgers_step::front::solve_front;
use burgers_step::layer::{
    build_frame, phi1_at, v0_at, v1_at, AlphaSet, FrameSample, LayerValue, WaveFrame,
};
use burgers_step::problem::{Background, BurgersProblem, CoefficientSeries, Window};
use proptest::prelude::*;

use super::run;

struct Setup {
    frame: WaveFrame,
    alphas: AlphaSet,
}

fn setup(a: &[&str], b: &[&str], rho: f64) -> Setup {
    let p = BurgersProblem::new(
        CoefficientSeries::parse(a, b).unwrap(),
        Background::Zero,
        vec![0.1],
        Window::new(-10.0, 10.0, 0.0, 3.0).unwrap(),
    )
    .unwrap();
    let curve = Arc::new(solve_front(&p, rho, 0.0).unwrap());
    let frame = build_frame(&p, curve).unwrap();
    Setup {
        alphas: AlphaSet::new(&p, frame.clone()),
        frame,
    }
}

/// The worked example with constant frame.
fn example() -> &'static Setup {
    static S: OnceLock<Setup> = OnceLock::new();
    S.get_or_init(|| setup(&["t^2+1", "(x^2+1)^2"], &["1", "(x^2+1)^2/(t^2+1)"], 1.0))
}

/// A problem whose `beta` depends on `t`.
fn moving() -> &'static Setup {
    static S: OnceLock<Setup> = OnceLock::new();
    S.get_or_init(|| setup(&["1+t^2", "x"], &["1+t^2", "t"], 1.0))
}

fn close(fd: f64, exact: f64, tol: f64) -> bool {
    (fd - exact).abs() <= tol * (1.0 + exact.abs())
}

fn v0_residual(fs: &FrameSample, v: &LayerValue) -> f64 {
    let a0phi = fs.a0.v * fs.point.dphi;
    v.v_tautau + a0phi * v.v_tau - fs.b0.v * (fs.u0.v + v.v) * v.v_tau
}

pub fn v0_equation(t: f64, tau: f64, moving_frame: bool) -> Result<(), TestCaseError> {
    let s = if moving_frame { moving() } else { example() };
    let fs = s.frame.at(t).unwrap();
    let v = v0_at(&fs, tau);
    prop_assert!(v0_residual(&fs, &v).abs() <= 1e-9);
    Ok(())
}

pub fn v1_equation(t: f64, tau: f64, c1: f64) -> Result<(), TestCaseError> {
    let s = example().alphas.at(t).unwrap();
    let fs = &s.frame;
    let v0 = v0_at(fs, tau);
    let v1 = v1_at(&s, c1, tau);
    let coeff = -fs.a0.v * fs.point.dphi + fs.b0.v * (fs.u0.v + v0.v);
    let r = v1.v_tau - coeff * v1.v - phi1_at(&s, tau);
    prop_assert!(r.abs() <= 1e-8, "residual {r}");
    Ok(())
}

fn check_partials(eval: impl Fn(f64, f64) -> LayerValue, t: f64, tau: f64) -> Result<(), TestCaseError> {
    let h = 1e-5;
    let v = eval(t, tau);
    let d_tau = (eval(t, tau + h).v - eval(t, tau - h).v) / (2.0 * h);
    let d_tautau = (eval(t, tau + h).v_tau - eval(t, tau - h).v_tau) / (2.0 * h);
    let d_t = (eval(t + h, tau).v - eval(t - h, tau).v) / (2.0 * h);
    prop_assert!(close(d_tau, v.v_tau, 1e-6));
    prop_assert!(close(d_tautau, v.v_tautau, 1e-6));
    prop_assert!(close(d_t, v.v_t, 1e-6), "{d_t} vs {}", v.v_t);
    Ok(())
}

pub fn v0_partials(t: f64, tau: f64, moving_frame: bool) -> Result<(), TestCaseError> {
    let s = if moving_frame { moving() } else { example() };
    check_partials(|t, tau| v0_at(&s.frame.at(t).unwrap(), tau), t, tau)
}

pub fn v1_partials(t: f64, tau: f64, c1: f64) -> Result<(), TestCaseError> {
    let s = example();
    check_partials(|t, tau| v1_at(&s.alphas.at(t).unwrap(), c1, tau), t, tau)
}

pub fn suite(cases: u32) -> Vec<(&'static str, Result<(), String>)> {
    vec![
        (
            "layer: v0 solves its equation",
            run(cases, (0.0..3.0f64, -40.0..40.0f64, any::<bool>()), |(t, tau, m)| v0_equation(t, tau, m)),
        ),
        (
            "layer: v1 solves its equation",
            run(cases, (0.0..3.0f64, -40.0..40.0f64, -2.0..2.0f64), |(t, tau, c1)| v1_equation(t, tau, c1)),
        ),
        (
            "layer: v0 partials match differences",
            run(cases, (0.01..2.99f64, -20.0..20.0f64, any::<bool>()), |(t, tau, m)| v0_partials(t, tau, m)),
        ),
        (
            "layer: v1 partials match differences",
            run(cases, (0.01..2.99f64, -20.0..20.0f64, -1.0..1.0f64), |(t, tau, c1)| v1_partials(t, tau, c1)),
        ),
    ]
}
