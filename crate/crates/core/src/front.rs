//! The discontinuity curve `x = phi(t)`.
//!
//! `phi` solves `phi' = rho b0(t) / a0(phi, t)`, `phi(0) = phi0`. The solution
//! is stored as knots `(t, phi, phi')` of an adaptive Dormand-Prince 5(4)
//! integration and evaluated by cubic Hermite interpolation. Derivatives of
//! `phi` are always taken from the right-hand side, never differenced.

use crate::error::{Error, Result};
use crate::exprlang::Field;
use crate::jet::Jet;
use crate::problem::{BurgersProblem, Grid, NONZERO_SAMPLES};

/// Largest admissible `|b0_x|` on the window.
pub const B0X_TOLERANCE: f64 = 1e-10;
/// The right-hand side is treated as singular once `|a0(phi, t)|` drops below this.
pub const A0_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy)]
pub struct FrontOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Step cap; bounds the Hermite interpolation error between knots.
    pub h_max: f64,
}

impl Default for FrontOptions {
    fn default() -> Self {
        FrontOptions {
            rtol: 1e-12,
            atol: 1e-12,
            h_max: 5e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Knot {
    pub t: f64,
    pub phi: f64,
    pub dphi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    ReachedEnd,
    A0Vanishes,
    LeftWindow,
}

/// A point of the curve with `phi`, `phi'` and `phi''`.
#[derive(Debug, Clone, Copy)]
pub struct CurvePoint {
    pub t: f64,
    pub phi: f64,
    pub dphi: f64,
    pub ddphi: f64,
}

impl CurvePoint {
    /// `g(phi(t), t)` with its total time derivative `g_x phi' + g_t`.
    pub fn jet(&self, g: &Field) -> Result<Jet> {
        if g.is_zero() {
            return Ok(Jet::constant(0.0));
        }
        let v = g.eval(self.phi, self.t)?;
        let d = g.dx().eval(self.phi, self.t)? * self.dphi + g.dt().eval(self.phi, self.t)?;
        Ok(Jet::new(v, d))
    }

    /// `g(phi(t), t)`.
    pub fn value(&self, g: &Field) -> Result<f64> {
        Ok(g.eval(self.phi, self.t)?)
    }

    /// `(phi, phi')` as a jet.
    pub fn phi_jet(&self) -> Jet {
        Jet::new(self.phi, self.dphi)
    }

    /// `(phi', phi'')` as a jet.
    pub fn dphi_jet(&self) -> Jet {
        Jet::new(self.dphi, self.ddphi)
    }
}

#[derive(Debug, Clone)]
pub struct FrontCurve {
    pub rho: f64,
    pub phi0: f64,
    knots: Vec<Knot>,
    valid_until: f64,
    t_end: f64,
    stop: StopReason,
    a0: Field,
    b0: Field,
}

impl FrontCurve {
    pub fn knots(&self) -> &[Knot] {
        &self.knots
    }

    /// Right end of the validity interval, `min(omega_+, T)`.
    pub fn valid_until(&self) -> f64 {
        self.valid_until
    }

    /// End of the requested integration interval.
    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn stop_reason(&self) -> StopReason {
        self.stop
    }

    pub fn ensure_covers(&self, t: f64) -> Result<()> {
        if self.valid_until + 1e-12 < t {
            return Err(Error::BlowupBeforeT {
                omega_plus: self.valid_until,
                t_end: t,
            });
        }
        Ok(())
    }

    fn rhs_at(a0: &Field, b0: &Field, rho: f64, phi: f64, t: f64) -> Result<f64> {
        let a = a0.eval(phi, t)?;
        let b = b0.eval(phi, t)?;
        Ok(rho * b / a)
    }

    /// Right-hand side `rho b0 / a0` at `(t, phi)`.
    pub fn rhs(&self, t: f64, phi: f64) -> Result<f64> {
        Self::rhs_at(&self.a0, &self.b0, self.rho, phi, t)
    }

    /// Interpolated `phi(t)`; outside the knot range the end segment is extrapolated.
    pub fn phi(&self, t: f64) -> f64 {
        let k = &self.knots;
        if k.len() == 1 {
            return k[0].phi + (t - k[0].t) * k[0].dphi;
        }
        let i = k.partition_point(|kn| kn.t <= t).clamp(1, k.len() - 1);
        hermite(&k[i - 1], &k[i], t)
    }

    pub fn dphi(&self, t: f64) -> Result<f64> {
        self.rhs(t, self.phi(t))
    }

    /// `phi`, `phi'` and `phi''` at `t`, the last by differentiating the
    /// right-hand side along the curve.
    pub fn point(&self, t: f64) -> Result<CurvePoint> {
        let phi = self.phi(t);
        let dphi = self.rhs(t, phi)?;
        let partial = CurvePoint {
            t,
            phi,
            dphi,
            ddphi: 0.0,
        };
        let ratio = partial.jet(&self.b0)? / partial.jet(&self.a0)?;
        Ok(CurvePoint {
            ddphi: self.rho * ratio.d,
            ..partial
        })
    }
}

fn hermite(k0: &Knot, k1: &Knot, t: f64) -> f64 {
    let h = k1.t - k0.t;
    let s = (t - k0.t) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * k0.phi + h10 * h * k0.dphi + h01 * k1.phi + h11 * h * k1.dphi
}

/// Max `|b0_x|` over the sampling grid of the window.
pub fn max_b0x(p: &BurgersProblem) -> Result<f64> {
    let b0x = p.coefficients.b(0).dx();
    if b0x.is_zero() {
        return Ok(0.0);
    }
    let grid = Grid::uniform(&p.window, NONZERO_SAMPLES, NONZERO_SAMPLES);
    let mut sup: f64 = 0.0;
    for &t in &grid.ts {
        for &x in &grid.xs {
            sup = sup.max(b0x.eval(x, t)?.abs());
        }
    }
    Ok(sup)
}

pub fn solve_front(p: &BurgersProblem, rho: f64, phi0: f64) -> Result<FrontCurve> {
    solve_front_with(p, rho, phi0, FrontOptions::default())
}

// Dormand-Prince 5(4) tableau
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

pub fn solve_front_with(p: &BurgersProblem, rho: f64, phi0: f64, opts: FrontOptions) -> Result<FrontCurve> {
    if rho == 0.0 || !rho.is_finite() {
        return Err(Error::RhoZero);
    }
    let b0x = max_b0x(p)?;
    if b0x > B0X_TOLERANCE {
        return Err(Error::B0DependsOnX { max: b0x });
    }
    if !p.window.contains_x(phi0) {
        return Err(Error::Config(format!("phi0 = {phi0} lies outside the x window")));
    }
    let a0 = p.coefficients.a(0).clone();
    let b0 = p.coefficients.b(0).clone();
    let t_end = p.window.t_max;
    let (x_min, x_max) = (p.window.x_min, p.window.x_max);
    let f = |t: f64, y: f64| -> Result<f64> {
        let v = FrontCurve::rhs_at(&a0, &b0, rho, y, t)?;
        Ok(v)
    };
    // event functions, all positive while the curve is admissible
    let events = |t: f64, y: f64| -> Result<[f64; 3]> {
        Ok([a0.eval(y, t)?.abs() - A0_FLOOR, y - x_min, x_max - y])
    };

    let mut t = 0.0;
    let mut y = phi0;
    let mut fy = f(t, y)?;
    let mut knots = vec![Knot { t, phi: y, dphi: fy }];
    let mut h = opts.h_max.min(t_end).min(1e-3);
    let mut stop = StopReason::ReachedEnd;

    while t < t_end {
        if t + h > t_end {
            h = t_end - t;
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::BlowupBeforeT { omega_plus: t, t_end });
        }
        let mut k = [0.0; 7];
        k[0] = fy;
        let mut stage_ok = true;
        for s in 1..7 {
            let yi = y + h * (0..s).map(|j| A[s][j] * k[j]).sum::<f64>();
            match f(t + C[s] * h, yi) {
                Ok(v) if v.is_finite() => k[s] = v,
                _ => {
                    stage_ok = false;
                    break;
                }
            }
        }
        if !stage_ok {
            h *= 0.25;
            continue;
        }
        let y_new = y + h * (0..6).map(|j| A[6][j] * k[j]).sum::<f64>();
        let err = h * (0..7).map(|j| E[j] * k[j]).sum::<f64>();
        let scale = opts.atol + opts.rtol * y.abs().max(y_new.abs());
        let ratio = err.abs() / scale;
        if !ratio.is_finite() || ratio > 1.0 {
            let shrink = if ratio.is_finite() { (0.9 * ratio.powf(-0.2)).max(0.2) } else { 0.2 };
            h *= shrink;
            continue;
        }
        let t_new = t + h;
        let f_new = k[6];
        let here = Knot { t, phi: y, dphi: fy };
        let there = Knot {
            t: t_new,
            phi: y_new,
            dphi: f_new,
        };
        let g_new = events(t_new, y_new)?;
        if let Some(which) = g_new.iter().position(|&g| g <= 0.0) {
            // locate the event on the Hermite segment
            let (mut lo, mut hi) = (t, t_new);
            while hi - lo > 1e-13 * hi.abs().max(1.0) {
                let mid = 0.5 * (lo + hi);
                let g = events(mid, hermite(&here, &there, mid))?;
                if g[which] <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let phi = hermite(&here, &there, lo);
            if lo > t {
                knots.push(Knot {
                    t: lo,
                    phi,
                    dphi: f(lo, phi)?,
                });
            }
            stop = if which == 0 { StopReason::A0Vanishes } else { StopReason::LeftWindow };
            t = lo;
            break;
        }
        knots.push(there);
        t = t_new;
        y = y_new;
        fy = f_new;
        let grow = if ratio > 0.0 { (0.9 * ratio.powf(-0.2)).min(5.0) } else { 5.0 };
        h = (h * grow).min(opts.h_max);
    }

    Ok(FrontCurve {
        rho,
        phi0,
        valid_until: t.min(t_end),
        t_end,
        stop,
        knots,
        a0: p.coefficients.a(0).clone(),
        b0: p.coefficients.b(0).clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Compatibility {
    /// max over knots of `|a0(phi,t) b0'(t) - rho b0(t)^2 a0_x(phi,t)|`
    pub max_dev_con: f64,
    /// max over knots of `|b0_x(phi,t)|`
    pub max_dev_b0x: f64,
}

pub fn check_compatibility(p: &BurgersProblem, curve: &FrontCurve) -> Result<Compatibility> {
    let (a0, b0) = (p.coefficients.a(0), p.coefficients.b(0));
    let mut out = Compatibility {
        max_dev_con: 0.0,
        max_dev_b0x: 0.0,
    };
    for k in curve.knots() {
        let (x, t) = (k.phi, k.t);
        let b = b0.eval(x, t)?;
        let con = a0.eval(x, t)? * b0.dt().eval(x, t)? - curve.rho * b * b * a0.dx().eval(x, t)?;
        out.max_dev_con = out.max_dev_con.max(con.abs());
        out.max_dev_b0x = out.max_dev_b0x.max(b0.dx().eval(x, t)?.abs());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{Background, CoefficientSeries, Window};

    fn problem(a0: &str, b0: &str, x: (f64, f64), t_max: f64) -> BurgersProblem {
        BurgersProblem::new(
            CoefficientSeries::parse(&[a0], &[b0]).unwrap(),
            Background::Zero,
            vec![0.1],
            Window::new(x.0, x.1, 0.0, t_max).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn arctan_front() {
        let p = problem("t^2+1", "1", (-4.0, 4.0), 10.0);
        let c = solve_front(&p, 1.0, 0.0).unwrap();
        assert_eq!(c.phi(0.0), 0.0);
        assert!((c.phi(1.0) - std::f64::consts::FRAC_PI_4).abs() <= 1e-8);
        let worst = (0..=1000)
            .map(|i| {
                let t = i as f64 * 0.01;
                (c.phi(t) - t.atan()).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst <= 1e-8, "{worst}");
        assert_eq!(c.stop_reason(), StopReason::ReachedEnd);
    }

    #[test]
    fn constant_speed_front() {
        let p = problem("1", "1", (-10.0, 10.0), 2.0);
        let c = solve_front(&p, 2.0, 0.0).unwrap();
        for t in [0.0, 0.3, 1.1, 2.0] {
            assert!((c.phi(t) - 2.0 * t).abs() < 1e-12);
        }
    }

    #[test]
    fn polynomial_front_against_antiderivative() {
        let p = problem("1", "1+t^2", (-10.0, 10.0), 1.0);
        let c = solve_front(&p, 1.0, 0.0).unwrap();
        assert!((c.phi(1.0) - 4.0 / 3.0).abs() < 1e-10);
        for t in [0.25, 0.5, 0.75] {
            let exact: f64 = t + t * t * t / 3.0;
            assert!((c.phi(t) - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn knots_satisfy_the_ode() {
        let p = problem("1+x^2+t", "2+sin(t)", (-10.0, 10.0), 3.0);
        let c = solve_front(&p, 0.7, 0.2).unwrap();
        assert_eq!(c.knots()[0].phi, 0.2);
        for k in c.knots() {
            assert!((k.dphi - c.rhs(k.t, k.phi).unwrap()).abs() <= 1e-10);
            assert!(k.dphi > 0.0);
        }
    }

    #[test]
    fn second_derivative_matches_differenced_rhs() {
        let p = problem("1+x^2+t", "2+sin(t)", (-10.0, 10.0), 3.0);
        let c = solve_front(&p, 0.7, 0.2).unwrap();
        for t in [0.3, 1.4, 2.6] {
            let h = 1e-5;
            let fd = (c.dphi(t + h).unwrap() - c.dphi(t - h).unwrap()) / (2.0 * h);
            assert!((c.point(t).unwrap().ddphi - fd).abs() < 1e-6);
        }
    }

    #[test]
    fn halving_tolerance_is_self_consistent() {
        let p = problem("1+x^2+t", "2+sin(t)", (-10.0, 10.0), 3.0);
        let loose = FrontOptions {
            rtol: 1e-8,
            atol: 1e-8,
            h_max: 0.5,
        };
        let tight = FrontOptions {
            rtol: 5e-9,
            atol: 5e-9,
            ..loose
        };
        let a = solve_front_with(&p, 0.7, 0.2, loose).unwrap();
        let b = solve_front_with(&p, 0.7, 0.2, tight).unwrap();
        assert!((a.phi(3.0) - b.phi(3.0)).abs() <= 10.0 * 1e-8);
    }

    #[test]
    fn precondition_errors() {
        let p = problem("1", "1", (-1.0, 1.0), 1.0);
        assert_eq!(solve_front(&p, 0.0, 0.0).unwrap_err(), Error::RhoZero);
        let p = problem("1", "1+x^2", (-1.0, 1.0), 1.0);
        assert!(matches!(solve_front(&p, 1.0, 0.0).unwrap_err(), Error::B0DependsOnX { .. }));
    }

    #[test]
    fn escaping_the_window_truncates_validity() {
        let p = problem("1", "1", (-1.0, 1.0), 5.0);
        let c = solve_front(&p, 1.0, 0.0).unwrap();
        assert_eq!(c.stop_reason(), StopReason::LeftWindow);
        assert!((c.valid_until() - 1.0).abs() < 1e-9);
        assert!(matches!(c.ensure_covers(5.0), Err(Error::BlowupBeforeT { .. })));
    }

    #[test]
    fn vanishing_a0_truncates_validity() {
        // the zero at t = 1.51 falls between the window samples (step 0.02)
        let p = problem("1.51 - t", "1", (-10.0, 10.0), 2.0);
        let c = solve_front(&p, 0.1, 0.0).unwrap();
        assert_eq!(c.stop_reason(), StopReason::A0Vanishes);
        assert!((c.valid_until() - 1.51).abs() < 1e-6, "{}", c.valid_until());
        assert!(c.ensure_covers(1.5).is_ok());
        assert!(c.ensure_covers(2.0).is_err());
    }

    #[test]
    fn compatibility_examples() {
        let p = problem("t^2+1", "1", (-4.0, 4.0), 3.0);
        let c = solve_front(&p, 1.0, 0.0).unwrap();
        let dev = check_compatibility(&p, &c).unwrap();
        assert_eq!(dev.max_dev_con, 0.0);
        assert_eq!(dev.max_dev_b0x, 0.0);

        let p = problem("1+x^2", "1", (-4.0, 4.0), 3.0);
        let c = solve_front(&p, 1.0, 0.0).unwrap();
        let dev = check_compatibility(&p, &c).unwrap();
        let oracle = c.knots().iter().map(|k| (2.0 * k.phi).abs()).fold(0.0, f64::max);
        assert!(dev.max_dev_con > 0.0);
        assert!((dev.max_dev_con - oracle).abs() < 1e-12);
    }
}
