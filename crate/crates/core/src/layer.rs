//! Singular part of the asymptotics on the discontinuity curve.
//!
//! In the stretched variable `tau = (x - phi(t)) / eps` the leading layer is
//! `v0 = A (1 - tanh(beta tau))` with
//!
//! ```text
//! A    = (a0 phi' - b0 u0) / b0
//! beta = A b0 / 2
//! ```
//!
//! all evaluated at `x = phi(t)`. The first correction `v1` is available in
//! closed form once the solvability conditions `alpha_1 = .. = alpha_4 = 0`
//! hold; for arbitrary right-hand sides `Phi_j` the quadrature form
//!
//! ```text
//! v_j = (C0 cosh^2(beta tau0) + int_{tau0}^{tau} cosh^2(beta s) Phi_j(t, s) ds) / cosh^2(beta tau)
//! ```
//!
//! is evaluated numerically.
//!
//! Every time derivative along the curve is exact: partials of the
//! coefficients come from [`Field`], `phi'` from the front equation and
//! `phi''` from differentiating its right-hand side.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exprlang::Field;
use crate::front::{CurvePoint, FrontCurve};
use crate::jet::Jet;
use crate::problem::{BurgersProblem, CoefficientSeries};
use crate::quadrature;

/// `|A|` below this collapses the layer.
pub const AMPLITUDE_FLOOR: f64 = 1e-10;
/// Default tolerance for `max |alpha_1..alpha_4|`.
pub const SOLVABILITY_TOLERANCE: f64 = 1e-9;
/// Tail bound for the decay checks.
pub const DECAY_TOLERANCE: f64 = 1e-6;
/// Decay checks are made at `tau = +-DECAY_SPAN / beta`.
pub const DECAY_SPAN: f64 = 40.0;
/// Relative tolerance of the `v_j` quadrature.
pub const QUADRATURE_RTOL: f64 = 1e-9;

/// Value and partial derivatives of a layer function `v(t, tau)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LayerValue {
    pub v: f64,
    pub v_tau: f64,
    pub v_tautau: f64,
    /// `d/dt` at fixed `tau`.
    pub v_t: f64,
}

/// `tanh(y)`, `sech^2(y)` and `1 - tanh(y)`, each accurate in the tails.
#[derive(Debug, Clone, Copy)]
struct Hyperbolic {
    tanh: f64,
    sech2: f64,
    one_minus_tanh: f64,
}

impl Hyperbolic {
    fn new(y: f64) -> Self {
        let e = (-2.0 * y.abs()).exp();
        let sech2 = 4.0 * e / ((1.0 + e) * (1.0 + e));
        let one_minus_tanh = if y >= 0.0 { 2.0 * e / (1.0 + e) } else { 2.0 / (1.0 + e) };
        Hyperbolic {
            tanh: y.tanh(),
            sech2,
            one_minus_tanh,
        }
    }
}

/// `ln cosh(y)` without overflow.
fn ln_cosh(y: f64) -> f64 {
    let a = y.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// `cosh^2(beta s) / cosh^2(beta tau)` in overflow-free form.
pub fn cosh2_ratio(beta: f64, s: f64, tau: f64) -> f64 {
    // cosh is even, so work with |s| and |tau|; then both exponentials are <= 1
    let (s, tau) = ((beta * s).abs(), (beta * tau).abs());
    let ratio = (1.0 + (-2.0 * s).exp()) / (1.0 + (-2.0 * tau).exp());
    (2.0 * (s - tau)).exp() * ratio * ratio
}

/// Sample times on `[0, t_end]`: the curve knots plus `t_end` itself.
pub fn sample_times(curve: &FrontCurve, t_end: f64) -> Vec<f64> {
    let mut ts: Vec<f64> = curve.knots().iter().map(|k| k.t).filter(|&t| t <= t_end).collect();
    if ts.last().is_none_or(|&last| last < t_end) {
        ts.push(t_end);
    }
    ts
}

/// `A`, `beta` and the coefficient values they are built from, at one `t`.
#[derive(Debug, Clone, Copy)]
pub struct FrameSample {
    pub point: CurvePoint,
    pub a0: Jet,
    pub b0: Jet,
    pub u0: Jet,
    pub amplitude: Jet,
    pub beta: Jet,
}

/// `A(t)` and `beta(t)` along the curve.
#[derive(Debug, Clone)]
pub struct WaveFrame {
    curve: Arc<FrontCurve>,
    a0: Field,
    b0: Field,
    u0: Field,
}

impl WaveFrame {
    pub fn curve(&self) -> &Arc<FrontCurve> {
        &self.curve
    }

    /// Unvalidated sample at `t`.
    pub fn at(&self, t: f64) -> Result<FrameSample> {
        let point = self.curve.point(t)?;
        let a0 = point.jet(&self.a0)?;
        let b0 = point.jet(&self.b0)?;
        let u0 = point.jet(&self.u0)?;
        let amplitude = (a0 * point.dphi_jet() - b0 * u0) / b0;
        let beta = (amplitude * b0).scale(0.5);
        Ok(FrameSample {
            point,
            a0,
            b0,
            u0,
            amplitude,
            beta,
        })
    }

    fn validate(&self, t: f64) -> Result<FrameSample> {
        let s = self.at(t)?;
        if !(s.amplitude.v.abs() >= AMPLITUDE_FLOOR) {
            return Err(Error::FrameDegenerate {
                t,
                amplitude: s.amplitude.v,
            });
        }
        if !(s.beta.v > 0.0) {
            return Err(Error::Orientation { t, beta: s.beta.v });
        }
        Ok(s)
    }
}

/// Builds the frame from `u0` of the background and validates `A` and
/// `beta > 0` at every knot of the curve.
pub fn build_frame(p: &BurgersProblem, curve: Arc<FrontCurve>) -> Result<WaveFrame> {
    let frame = WaveFrame {
        a0: p.coefficients.a(0).clone(),
        b0: p.coefficients.b(0).clone(),
        u0: p.background.term(0)?,
        curve,
    };
    for knot in frame.curve.knots() {
        frame.validate(knot.t)?;
    }
    Ok(frame)
}

/// `v0` and its partials.
pub fn v0_at(s: &FrameSample, tau: f64) -> LayerValue {
    let (a, b) = (s.amplitude, s.beta);
    let h = Hyperbolic::new(b.v * tau);
    LayerValue {
        v: a.v * h.one_minus_tanh,
        v_tau: -a.v * b.v * h.sech2,
        v_tautau: 2.0 * a.v * b.v * b.v * h.sech2 * h.tanh,
        v_t: a.d * h.one_minus_tanh - a.v * h.sech2 * b.d * tau,
    }
}

/// The seven `alpha` coefficients at one `t`, with time derivatives of the
/// three that enter `v1`.
#[derive(Debug, Clone, Copy)]
pub struct AlphaSample {
    pub frame: FrameSample,
    pub alpha: [f64; 7],
    pub alpha0: Jet,
    pub alpha5: Jet,
    pub alpha6: Jet,
}

/// Evaluators for `alpha_0 .. alpha_6` along the curve.
#[derive(Debug, Clone)]
pub struct AlphaSet {
    frame: WaveFrame,
    a1: Field,
    b1: Field,
}

impl AlphaSet {
    pub fn new(p: &BurgersProblem, frame: WaveFrame) -> Self {
        AlphaSet {
            a1: p.coefficients.a(1).clone(),
            b1: p.coefficients.b(1).clone(),
            frame,
        }
    }

    pub fn frame(&self) -> &WaveFrame {
        &self.frame
    }

    pub fn at(&self, t: f64) -> Result<AlphaSample> {
        let fs = self.frame.at(t)?;
        let pt = &fs.point;
        let a = fs.amplitude;
        let beta = fs.beta;
        let a0 = fs.a0;
        let dphi = pt.dphi_jet();
        let a1 = pt.jet(&self.a1)?;
        let b1 = pt.jet(&self.b1)?;
        let a0x = pt.jet(self.frame.a0.dx())?;
        let b0x = pt.jet(self.frame.b0.dx())?;

        let a2 = a * a;
        let half_a2 = a2.scale(0.5);
        let a_over_beta = a / beta;
        let alpha0 = -(a * a1 * dphi) + half_a2 * b1;
        let alpha5 = a * a1 * dphi - a2 * b1 + (a2 / beta.scale(2.0)) * b0x;
        let alpha6 = half_a2 * b1;

        let (av, bv, phv) = (a.v, beta.v, dphi.v);
        let alpha1 = a0.v * a.d - half_a2.v * b0x.v;
        let alpha2 = -(av / bv) * a0.v * beta.d + av * a0x.v * phv - a2.v * b0x.v;
        let alpha3 = half_a2.v * b0x.v;
        let alpha4 = -a0.v * a_over_beta.d - a_over_beta.v * a0x.v * phv + a2.v / bv * b0x.v;
        Ok(AlphaSample {
            frame: fs,
            alpha: [alpha0.v, alpha1, alpha2, alpha3, alpha4, alpha5.v, alpha6.v],
            alpha0,
            alpha5,
            alpha6,
        })
    }
}

/// `max |alpha_k|` for `k = 1..=4` over `[0, t_end]`.
pub fn check_solvability(alphas: &AlphaSet, t_end: f64) -> Result<[f64; 4]> {
    let mut out = [0.0f64; 4];
    for t in sample_times(alphas.frame.curve(), t_end) {
        let s = alphas.at(t)?;
        for (slot, value) in out.iter_mut().zip(&s.alpha[1..5]) {
            *slot = slot.max(value.abs());
        }
    }
    Ok(out)
}

/// Fails with `SolvabilityViolated` for the first `alpha_k` above `tolerance`.
pub fn require_solvable(alphas: &AlphaSet, t_end: f64, tolerance: f64) -> Result<()> {
    let maxima = check_solvability(alphas, t_end)?;
    for (i, &value) in maxima.iter().enumerate() {
        if !(value <= tolerance) {
            return Err(Error::SolvabilityViolated {
                index: i + 1,
                value,
                tolerance,
            });
        }
    }
    Ok(())
}

/// Zero-background `Phi_1(t, tau)`.
pub fn phi1_at(s: &AlphaSample, tau: f64) -> f64 {
    let [a0, a1, a2, a3, a4, a5, a6] = s.alpha;
    let y = s.frame.beta.v * tau;
    let th = y.tanh();
    a0 + a1 * tau + a2 * tau * th + a3 * tau * th * th + a4 * ln_cosh(y) + a5 * th + a6 * th * th
}

/// Closed-form `v1` and its partials, valid when `alpha_1..alpha_4` vanish.
pub fn v1_at(s: &AlphaSample, c1: f64, tau: f64) -> LayerValue {
    let beta = s.frame.beta;
    let two_beta = beta.scale(2.0);
    let p = s.alpha5 / two_beta;
    let q = Jet::constant(c1) - p + (s.alpha0 - s.alpha6).scale(0.5 * tau);
    let sh = (s.alpha0 + s.alpha6) / two_beta;
    let y = beta.v * tau;
    let h = Hyperbolic::new(y);
    let (th, s2) = (h.tanh, h.sech2);
    // t-derivatives of tanh and sech^2 at fixed tau
    let th_t = s2 * beta.d * tau;
    let s2_t = -2.0 * s2 * th * beta.d * tau;
    let (bv, dif) = (beta.v, s.alpha0.v - s.alpha6.v);
    LayerValue {
        v: p.v + q.v * s2 + sh.v * th,
        v_tau: 0.5 * dif * s2 - 2.0 * bv * q.v * s2 * th + sh.v * bv * s2,
        v_tautau: -2.0 * bv * dif * s2 * th + 2.0 * bv * bv * q.v * s2 * (2.0 * th * th - s2)
            - 2.0 * sh.v * bv * bv * s2 * th,
        v_t: p.d + q.d * s2 + q.v * s2_t + sh.d * th + sh.v * th_t,
    }
}

/// Far-field limits `(v1(t, -inf), v1(t, +inf))`.
pub fn v1_limits(s: &AlphaSample) -> (f64, f64) {
    let [a0, _, _, _, _, a5, a6] = s.alpha;
    let two_beta = 2.0 * s.frame.beta.v;
    ((a5 - a0 - a6) / two_beta, (a5 + a0 + a6) / two_beta)
}

/// Coefficient values on the curve entering the first-order right-hand side.
#[derive(Debug, Clone, Copy)]
pub struct FirstOrderCoefficients {
    pub frame: FrameSample,
    pub a1: f64,
    pub b1: f64,
    pub a0x: f64,
    pub b0x: f64,
    pub u0x: f64,
    pub u1: f64,
}

impl FirstOrderCoefficients {
    pub fn at(p: &BurgersProblem, frame: &WaveFrame, t: f64) -> Result<Self> {
        let fs = frame.at(t)?;
        let pt = fs.point;
        let c = &p.coefficients;
        let u0 = p.background.term(0)?;
        let u1 = if p.background.is_zero() {
            Field::zero()
        } else {
            p.background.term(1)?
        };
        Ok(FirstOrderCoefficients {
            frame: fs,
            a1: pt.value(c.a(1))?,
            b1: pt.value(c.b(1))?,
            a0x: pt.value(c.a(0).dx())?,
            b0x: pt.value(c.b(0).dx())?,
            u0x: pt.value(u0.dx())?,
            u1: pt.value(&u1)?,
        })
    }

    /// The first-order right-hand side `F_1(t, tau)`.
    pub fn calf1(&self, tau: f64) -> f64 {
        let fs = &self.frame;
        let (a0, b0, u0, dphi) = (fs.a0.v, fs.b0.v, fs.u0.v, fs.point.dphi);
        let v0 = v0_at(fs, tau);
        a0 * v0.v_t
            + b0 * self.u0x * v0.v
            + (-self.a1 * dphi + self.b1 * u0 + b0 * self.u1) * v0.v_tau
            + tau * (-self.a0x * dphi + self.b0x * u0 + b0 * self.u0x) * v0.v_tau
            + (self.b1 + tau * self.b0x) * v0.v * v0.v_tau
    }
}

/// `F_1(t, tau)` for the problem's background.
pub fn calf1(p: &BurgersProblem, frame: &WaveFrame, t: f64, tau: f64) -> Result<f64> {
    Ok(FirstOrderCoefficients::at(p, frame, t)?.calf1(tau))
}

/// `max |d/dt [(a1 phi' - b1 A) / b0]|` along the curve on `[0, t_end]`.
pub fn check_cond_v1(p: &BurgersProblem, frame: &WaveFrame, t_end: f64) -> Result<f64> {
    let (a1, b1) = (p.coefficients.a(1), p.coefficients.b(1));
    let mut sup: f64 = 0.0;
    for t in sample_times(frame.curve(), t_end) {
        let fs = frame.at(t)?;
        let pt = &fs.point;
        let bracket = (pt.jet(a1)? * pt.dphi_jet() - pt.jet(b1)? * fs.amplitude) / fs.b0;
        sup = sup.max(bracket.d.abs());
    }
    Ok(sup)
}

/// `v_j(t, tau)` from the quadrature form with constants `C0`, `tau0`.
pub fn vj_quadrature(
    frame: &WaveFrame,
    phi: impl Fn(f64, f64) -> f64,
    c0: f64,
    tau0: f64,
    t: f64,
    tau: f64,
) -> Result<f64> {
    let beta = frame.at(t)?.beta.v;
    vj_quadrature_with_beta(beta, |s| phi(t, s), c0, tau0, tau)
}

/// [`vj_quadrature`] at a fixed `t`, given `beta(t)`.
pub fn vj_quadrature_with_beta(beta: f64, phi: impl Fn(f64) -> f64, c0: f64, tau0: f64, tau: f64) -> Result<f64> {
    let integral = quadrature::integrate(
        |s| cosh2_ratio(beta, s, tau) * phi(s),
        tau0,
        tau,
        QUADRATURE_RTOL,
        1e-15,
    )?;
    let value = c0 * cosh2_ratio(beta, tau0, tau) + integral;
    if !value.is_finite() {
        return Err(Error::QuadratureFail { from: tau0, to: tau });
    }
    Ok(value)
}

/// `tau`-derivative of a quadrature solution, from its equation.
pub fn vj_quadrature_tau_derivative(beta: f64, v: f64, phi: f64, tau: f64) -> f64 {
    -2.0 * beta * (beta * tau).tanh() * v + phi
}

/// Constants of the boundedness estimate
/// `|v_j| <= c1 (|sinh(2 beta tau)| / (4 beta) + |tau| / 2 + c2) / cosh^2(beta tau)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundednessFit {
    pub c1: f64,
    pub c2: f64,
}

impl BoundednessFit {
    /// `c1 = sup |Phi|` over `taus`; `c2` absorbs `C0` and the lower limit.
    pub fn fit(beta: f64, phi: impl Fn(f64) -> f64, c0: f64, tau0: f64, taus: &[f64]) -> Self {
        let c1 = taus
            .iter()
            .chain(std::iter::once(&tau0))
            .map(|&s| phi(s).abs())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let y0 = beta * tau0;
        let antiderivative = (2.0 * y0).sinh().abs() / (4.0 * beta) + tau0.abs() / 2.0;
        let c2 = c0.abs() * y0.cosh().powi(2) / c1 + antiderivative;
        BoundednessFit { c1, c2 }
    }

    pub fn bound(&self, beta: f64, tau: f64) -> f64 {
        // sinh(2y) / cosh^2(y) = 2 tanh(y)
        let h = Hyperbolic::new(beta * tau);
        self.c1 * (h.tanh.abs() / (2.0 * beta) + (tau.abs() / 2.0 + self.c2) * h.sech2)
    }
}

/// A layer function with closed-form partials and known far-field limits.
pub trait LayerTerm {
    fn eval(&self, t: f64, tau: f64) -> Result<LayerValue>;
    /// `(v(t, -inf), v(t, +inf))`.
    fn limits(&self, t: f64) -> Result<(f64, f64)>;
    fn beta(&self, t: f64) -> Result<f64>;
}

/// `v0` as a [`LayerTerm`].
#[derive(Debug, Clone)]
pub struct LeadingLayer(pub WaveFrame);

impl LayerTerm for LeadingLayer {
    fn eval(&self, t: f64, tau: f64) -> Result<LayerValue> {
        Ok(v0_at(&self.0.at(t)?, tau))
    }

    fn limits(&self, t: f64) -> Result<(f64, f64)> {
        Ok((2.0 * self.0.at(t)?.amplitude.v, 0.0))
    }

    fn beta(&self, t: f64) -> Result<f64> {
        Ok(self.0.at(t)?.beta.v)
    }
}

/// Closed-form `v1` as a [`LayerTerm`].
#[derive(Debug, Clone)]
pub struct FirstLayer {
    pub alphas: AlphaSet,
    pub c1: f64,
}

impl LayerTerm for FirstLayer {
    fn eval(&self, t: f64, tau: f64) -> Result<LayerValue> {
        Ok(v1_at(&self.alphas.at(t)?, self.c1, tau))
    }

    fn limits(&self, t: f64) -> Result<(f64, f64)> {
        Ok(v1_limits(&self.alphas.at(t)?))
    }

    fn beta(&self, t: f64) -> Result<f64> {
        Ok(self.alphas.frame.at(t)?.beta.v)
    }
}

/// Worst tail quantities of a layer term at one `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayReport {
    /// max over `n = 0, 1, 2` of `|tau^n q|` at `tau = +span/beta`, where `q`
    /// runs over `v - v(+inf)` and the three partials.
    pub right: f64,
    /// `|v - v(-inf)|` at `tau = -span/beta`.
    pub left: f64,
}

impl DecayReport {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.right <= tolerance && self.left <= tolerance
    }
}

pub fn check_decay(term: &dyn LayerTerm, t: f64) -> Result<DecayReport> {
    let beta = term.beta(t)?;
    let (lim_left, lim_right) = term.limits(t)?;
    let tau = DECAY_SPAN / beta;
    let r = term.eval(t, tau)?;
    let mut right: f64 = 0.0;
    for q in [r.v - lim_right, r.v_tau, r.v_tautau, r.v_t] {
        for n in 0..=2 {
            right = right.max((tau.powi(n) * q).abs());
        }
    }
    let l = term.eval(t, -tau)?;
    Ok(DecayReport {
        right,
        left: (l.v - lim_left).abs(),
    })
}

/// `u` and the derivatives entering the equation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Derivatives {
    pub u: f64,
    pub u_x: f64,
    pub u_xx: f64,
    pub u_t: f64,
}

/// `Y0 = U + V0` or `Y1 = U + V0 + eps V1` with `U = u0 (+ eps u1)`.
#[derive(Debug, Clone)]
pub struct AsymptoticSolution {
    order: usize,
    c1: f64,
    coefficients: CoefficientSeries,
    curve: Arc<FrontCurve>,
    frame: WaveFrame,
    alphas: Option<AlphaSet>,
    u0: Field,
    u1: Field,
}

impl AsymptoticSolution {
    /// Checks the conditions for `order` (0 or 1) and assembles the solution.
    pub fn assemble(
        p: &BurgersProblem,
        curve: Arc<FrontCurve>,
        frame: WaveFrame,
        order: usize,
        c1: f64,
    ) -> Result<Self> {
        Self::assemble_with(p, curve, frame, order, c1, SOLVABILITY_TOLERANCE)
    }

    pub fn assemble_with(
        p: &BurgersProblem,
        curve: Arc<FrontCurve>,
        frame: WaveFrame,
        order: usize,
        c1: f64,
        solvability_tolerance: f64,
    ) -> Result<Self> {
        if order > 1 {
            return Err(Error::Unsupported(format!(
                "asymptotic order {order}; only 0 and 1 are available"
            )));
        }
        let t_end = p.window.t_max;
        curve.ensure_covers(t_end)?;
        let u0 = p.background.term(0)?;
        let (alphas, u1) = if order == 1 {
            if !p.background.is_zero() {
                return Err(Error::Unsupported(
                    "the closed-form first correction needs a zero background".into(),
                ));
            }
            let alphas = AlphaSet::new(p, frame.clone());
            require_solvable(&alphas, t_end, solvability_tolerance)?;
            (Some(alphas), Field::zero())
        } else {
            (None, Field::zero())
        };
        Ok(Self::from_parts(p, curve, frame, alphas, u0, u1, c1))
    }

    /// Unchecked assembly. The order is 1 iff `alphas` is given. `curve`
    /// defines `tau`; `frame` may come from a different curve.
    pub fn from_parts(
        p: &BurgersProblem,
        curve: Arc<FrontCurve>,
        frame: WaveFrame,
        alphas: Option<AlphaSet>,
        u0: Field,
        u1: Field,
        c1: f64,
    ) -> Self {
        AsymptoticSolution {
            order: usize::from(alphas.is_some()),
            c1,
            coefficients: p.coefficients.clone(),
            curve,
            frame,
            alphas,
            u0,
            u1,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn curve(&self) -> &Arc<FrontCurve> {
        &self.curve
    }

    pub fn frame(&self) -> &WaveFrame {
        &self.frame
    }

    pub fn alphas(&self) -> Option<&AlphaSet> {
        self.alphas.as_ref()
    }

    pub fn coefficients(&self) -> &CoefficientSeries {
        &self.coefficients
    }

    /// Everything that depends on `t` only.
    pub fn slice(&self, t: f64) -> Result<SolutionSlice<'_>> {
        let point = self.curve.point(t)?;
        let frame = self.frame.at(t)?;
        let alpha = match &self.alphas {
            Some(a) => Some(a.at(t)?),
            None => None,
        };
        Ok(SolutionSlice {
            sol: self,
            t,
            phi: point.phi,
            dphi: point.dphi,
            frame,
            alpha,
        })
    }

    pub fn eval(&self, x: f64, t: f64, eps: f64) -> Result<Derivatives> {
        self.slice(t)?.at_x(x, eps)
    }
}

/// [`AsymptoticSolution`] at a fixed `t`.
#[derive(Debug, Clone)]
pub struct SolutionSlice<'a> {
    sol: &'a AsymptoticSolution,
    pub t: f64,
    pub phi: f64,
    pub dphi: f64,
    pub frame: FrameSample,
    pub alpha: Option<AlphaSample>,
}

impl SolutionSlice<'_> {
    pub fn x_of(&self, tau: f64, eps: f64) -> f64 {
        self.phi + eps * tau
    }

    pub fn tau_of(&self, x: f64, eps: f64) -> f64 {
        (x - self.phi) / eps
    }

    /// `(v0, v1)` at `tau`; `v1` is zero at order 0.
    pub fn layers(&self, tau: f64) -> (LayerValue, LayerValue) {
        let v0 = v0_at(&self.frame, tau);
        let v1 = self
            .alpha
            .as_ref()
            .map_or_else(LayerValue::default, |a| v1_at(a, self.sol.c1, tau));
        (v0, v1)
    }

    fn regular(&self, x: f64, eps: f64) -> Result<Derivatives> {
        let t = self.t;
        let mut out = Derivatives::default();
        for (field, weight) in [(&self.sol.u0, 1.0), (&self.sol.u1, eps)] {
            if field.is_zero() || (weight == eps && self.sol.order == 0) {
                continue;
            }
            out.u += weight * field.eval(x, t)?;
            out.u_x += weight * field.dx().eval(x, t)?;
            out.u_xx += weight * field.dx().dx().eval(x, t)?;
            out.u_t += weight * field.dt().eval(x, t)?;
        }
        Ok(out)
    }

    /// `u` and partials at `x = phi(t) + eps tau`, computed from `tau` so
    /// that the layer is not perturbed by rounding in `x`.
    pub fn at_tau(&self, tau: f64, eps: f64) -> Result<Derivatives> {
        let x = self.x_of(tau, eps);
        let reg = self.regular(x, eps)?;
        let (v0, v1) = self.layers(tau);
        let w = if self.sol.order == 1 { eps } else { 0.0 };
        let v_tau = v0.v_tau + w * v1.v_tau;
        Ok(Derivatives {
            u: reg.u + v0.v + w * v1.v,
            u_x: reg.u_x + v_tau / eps,
            u_xx: reg.u_xx + (v0.v_tautau + w * v1.v_tautau) / (eps * eps),
            u_t: reg.u_t + v0.v_t + w * v1.v_t - self.dphi / eps * v_tau,
        })
    }

    pub fn at_x(&self, x: f64, eps: f64) -> Result<Derivatives> {
        self.at_tau(self.tau_of(x, eps), eps)
    }

    /// Far-field values of `u` at `x` on the left and right of the layer.
    pub fn far_field(&self, x: f64, eps: f64) -> Result<(f64, f64)> {
        let reg = self.regular(x, eps)?.u;
        let (l1, r1) = match (&self.alpha, self.sol.order) {
            (Some(a), 1) => v1_limits(a),
            _ => (0.0, 0.0),
        };
        Ok((reg + 2.0 * self.frame.amplitude.v + eps * l1, reg + eps * r1))
    }
}
