//! PDE residual of an asymptotic solution and order studies over an
//! `eps` ladder.
//!
//! Residuals are sampled on a grid in `(t, tau)` and mapped to
//! `x = phi(t) + eps tau`, so a tail region keeps its meaning as `eps`
//! shrinks.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::layer::{sample_times, AsymptoticSolution, SolutionSlice, DECAY_SPAN};
use crate::problem::linspace;

/// Default tail threshold `tau*`.
pub const TAU_STAR: f64 = 10.0;
/// Sup-norms at or below this are treated as zero.
pub const RESIDUAL_FLOOR: f64 = 1e-9;
/// Largest admissible max/min ratio of sup-norms for "bounded in eps".
pub const BOUNDED_RATIO: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    Global,
    RightTail,
    LeftTail,
}

impl RegionKind {
    pub fn name(self) -> &'static str {
        match self {
            RegionKind::Global => "global",
            RegionKind::RightTail => "right_tail",
            RegionKind::LeftTail => "left_tail",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub kind: RegionKind,
    pub tau_star: f64,
    /// `None` selects `DECAY_SPAN / min beta` over the time range.
    pub tau_max: Option<f64>,
    pub t_range: (f64, f64),
}

impl Region {
    pub fn new(kind: RegionKind, t_range: (f64, f64)) -> Self {
        Region {
            kind,
            tau_star: TAU_STAR,
            tau_max: None,
            t_range,
        }
    }

    /// The `tau` interval for a given `tau_max`.
    pub fn tau_interval(&self, tau_max: f64) -> (f64, f64) {
        match self.kind {
            RegionKind::Global => (-tau_max, tau_max),
            RegionKind::RightTail => (self.tau_star, tau_max),
            RegionKind::LeftTail => (-tau_max, -self.tau_star),
        }
    }

    fn resolve_tau_max(&self, sol: &AsymptoticSolution) -> Result<f64> {
        if let Some(m) = self.tau_max {
            return Ok(m);
        }
        let mut beta_min = f64::INFINITY;
        for t in sample_times(sol.curve(), self.t_range.1) {
            if t >= self.t_range.0 {
                beta_min = beta_min.min(sol.frame().at(t)?.beta.v);
            }
        }
        Ok(DECAY_SPAN / beta_min)
    }
}

/// Sample counts of the `(t, tau)` grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SampleGrid {
    pub nt: usize,
    pub ntau: usize,
}

impl Default for SampleGrid {
    fn default() -> Self {
        SampleGrid { nt: 61, ntau: 1601 }
    }
}

impl SampleGrid {
    pub fn refined(self) -> Self {
        SampleGrid {
            nt: 2 * self.nt - 1,
            ntau: 2 * self.ntau - 1,
        }
    }
}

/// `R = eps u_xx - a u_t - b u u_x` with the truncated series `a`, `b`.
pub fn pde_residual(sol: &AsymptoticSolution, x: f64, t: f64, eps: f64) -> Result<f64> {
    residual_on_slice(&sol.slice(t)?, sol, x, None, eps)
}

/// Residual at `x = phi(t) + eps tau` on a precomputed slice.
pub fn residual_at_tau(slice: &SolutionSlice<'_>, sol: &AsymptoticSolution, tau: f64, eps: f64) -> Result<f64> {
    residual_on_slice(slice, sol, slice.x_of(tau, eps), Some(tau), eps)
}

fn residual_on_slice(
    slice: &SolutionSlice<'_>,
    sol: &AsymptoticSolution,
    x: f64,
    tau: Option<f64>,
    eps: f64,
) -> Result<f64> {
    let d = match tau {
        Some(tau) => slice.at_tau(tau, eps)?,
        None => slice.at_x(x, eps)?,
    };
    let c = sol.coefficients();
    let a = c.a_sum(x, slice.t, eps)?;
    let b = c.b_sum(x, slice.t, eps)?;
    Ok(eps * d.u_xx - a * d.u_t - b * d.u * d.u_x)
}

/// The `1/eps` part of the leading residual at `tau`:
/// `v0_tautau + a0 phi' v0_tau - b0 (u0 + v0) v0_tau`, on the curve.
pub fn leading_bracket(slice: &SolutionSlice<'_>, tau: f64) -> f64 {
    let (v0, _) = slice.layers(tau);
    let f = &slice.frame;
    v0.v_tautau + f.a0.v * f.point.dphi * v0.v_tau - f.b0.v * (f.u0.v + v0.v) * v0.v_tau
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub region: RegionKind,
    pub tau_range: (f64, f64),
    pub t_range: (f64, f64),
    pub grid: SampleGrid,
    pub epsilons: Vec<f64>,
    pub sup_residuals: Vec<f64>,
    /// Least-squares slope of `log sup` against `log eps`; absent when
    /// fewer than three values are available or all sups are below the floor.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
}

/// Sup of `|R|` over the mapped grid for one `eps`.
pub fn sup_residual(
    sol: &AsymptoticSolution,
    region: &Region,
    tau_max: f64,
    eps: f64,
    grid: SampleGrid,
) -> Result<f64> {
    let (lo, hi) = region.tau_interval(tau_max);
    let taus = linspace(lo, hi, grid.ntau);
    let mut sup: f64 = 0.0;
    for t in linspace(region.t_range.0, region.t_range.1, grid.nt) {
        let slice = sol.slice(t)?;
        for &tau in &taus {
            let r = residual_at_tau(&slice, sol, tau, eps)?;
            if !r.is_finite() {
                return Err(Error::Config(format!("non-finite residual at t = {t}, tau = {tau}")));
            }
            sup = sup.max(r.abs());
        }
    }
    Ok(sup)
}

/// Least-squares line through `(log x, log y)`: `(slope, intercept)`.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

pub fn order_study(
    sol: &AsymptoticSolution,
    region: &Region,
    epsilons: &[f64],
    grid: SampleGrid,
) -> Result<ResidualReport> {
    let tau_max = region.resolve_tau_max(sol)?;
    let sups = std::thread::scope(|scope| {
        let handles: Vec<_> = epsilons
            .iter()
            .map(|&eps| scope.spawn(move || sup_residual(sol, region, tau_max, eps, grid)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("residual worker panicked"))
            .collect::<Result<Vec<f64>>>()
    })?;
    let fit = if epsilons.len() >= 3 && sups.iter().any(|&s| s > RESIDUAL_FLOOR) {
        Some(fit_loglog(epsilons, &sups))
    } else {
        None
    };
    Ok(ResidualReport {
        region: region.kind,
        tau_range: region.tau_interval(tau_max),
        t_range: region.t_range,
        grid,
        epsilons: epsilons.to_vec(),
        sup_residuals: sups,
        slope: fit.map(|f| f.0),
        intercept: fit.map(|f| f.1),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Boundedness {
    pub max_sup: f64,
    /// `max / min` of the sups; absent when all are below the floor.
    pub ratio: Option<f64>,
    pub bounded: bool,
}

impl Boundedness {
    pub fn from_sups(sups: &[f64]) -> Self {
        let max_sup = sups.iter().cloned().fold(0.0, f64::max);
        if max_sup <= RESIDUAL_FLOOR {
            return Boundedness {
                max_sup,
                ratio: None,
                bounded: true,
            };
        }
        let min_sup = sups.iter().cloned().fold(f64::INFINITY, f64::min).max(RESIDUAL_FLOOR);
        let ratio = max_sup / min_sup;
        Boundedness {
            max_sup,
            ratio: Some(ratio),
            bounded: ratio <= BOUNDED_RATIO,
        }
    }
}

pub fn boundedness_check(
    sol: &AsymptoticSolution,
    region: &Region,
    epsilons: &[f64],
    grid: SampleGrid,
) -> Result<(Boundedness, ResidualReport)> {
    let report = order_study(sol, region, epsilons, grid)?;
    Ok((Boundedness::from_sups(&report.sup_residuals), report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::front::solve_front;
    use crate::exprlang::Field;
    use crate::layer::build_frame;
    use crate::problem::{Background, BurgersProblem, CoefficientSeries, Window};
    use std::sync::Arc;

    const LADDER: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];

    fn problem(a: &[&str], b: &[&str]) -> BurgersProblem {
        BurgersProblem::new(
            CoefficientSeries::parse(a, b).unwrap(),
            Background::Zero,
            LADDER.to_vec(),
            Window::new(-6.0, 6.0, 0.0, 3.0).unwrap(),
        )
        .unwrap()
    }

    fn example() -> BurgersProblem {
        problem(&["t^2+1", "(x^2+1)^2"], &["1", "(x^2+1)^2/(t^2+1)"])
    }

    fn solution(p: &BurgersProblem, rho: f64, order: usize) -> AsymptoticSolution {
        let curve = Arc::new(solve_front(p, rho, 0.0).unwrap());
        let frame = build_frame(p, curve.clone()).unwrap();
        AsymptoticSolution::assemble(p, curve, frame, order, 0.0).unwrap()
    }

    #[test]
    fn travelling_wave_is_exact() {
        let p = problem(&["1"], &["1"]);
        let sol = solution(&p, 1.0, 0);
        let region = Region::new(RegionKind::Global, (0.0, 3.0));
        let report = order_study(&sol, &region, &LADDER, SampleGrid { nt: 13, ntau: 401 }).unwrap();
        assert!(report.sup_residuals.iter().all(|&s| s <= 1e-10), "{:?}", report.sup_residuals);
        assert_eq!(report.slope, None);
        let (b, _) = boundedness_check(&sol, &region, &LADDER, SampleGrid { nt: 5, ntau: 101 }).unwrap();
        assert!(b.bounded && b.ratio.is_none());
    }

    #[test]
    fn constant_has_zero_residual() {
        // A constant state u = 2A on the far left: every derivative vanishes
        let p = problem(&["1"], &["1"]);
        let sol = solution(&p, 1.0, 0);
        assert!(pde_residual(&sol, -5.0, 0.5, 0.01).unwrap().abs() < 1e-300);
    }

    #[test]
    fn leading_bracket_vanishes_on_curve() {
        let p = example();
        let sol = solution(&p, 1.0, 0);
        for t in [0.0, 1.0, 2.5] {
            let s = sol.slice(t).unwrap();
            for tau in [0.0, -3.0, 4.0] {
                assert!(leading_bracket(&s, tau).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn mapped_and_direct_evaluation_agree() {
        let p = example();
        let sol = solution(&p, 1.0, 1);
        let eps = 0.05;
        for t in [0.3, 1.9] {
            let s = sol.slice(t).unwrap();
            for tau in [-12.0, -0.5, 0.0, 3.0, 17.0] {
                let mapped = residual_at_tau(&s, &sol, tau, eps).unwrap();
                let direct = pde_residual(&sol, s.x_of(tau, eps), t, eps).unwrap();
                assert!((mapped - direct).abs() <= 1e-9 * (1.0 + mapped.abs()), "{mapped} {direct}");
            }
        }
    }

    #[test]
    fn residual_on_curve_golden() {
        let p = example();
        let sol = solution(&p, 1.0, 1);
        let on_curve = pde_residual(&sol, 1.0f64.atan(), 1.0, 0.1).unwrap();
        assert!(on_curve.abs() <= 1e-12, "{on_curve:e}");
        let r = pde_residual(&sol, 1.0f64.atan() + 0.1, 1.0, 0.1).unwrap();
        assert!((r - GOLDEN_OFF_CURVE).abs() <= 1e-9 * GOLDEN_OFF_CURVE.abs(), "{r:.16e}");
    }

    // Y1 of the worked example at tau = 1, t = 1, eps = 0.1
    const GOLDEN_OFF_CURVE: f64 = -1.2397910048198968e-1;

    #[test]
    fn grid_refinement_is_stable() {
        let p = example();
        for (order, kind) in [(0, RegionKind::Global), (1, RegionKind::Global), (1, RegionKind::RightTail)] {
            let sol = solution(&p, 1.0, order);
            let region = Region::new(kind, (0.0, 3.0));
            let grid = SampleGrid::default();
            let coarse = order_study(&sol, &region, &[0.1, 0.025], grid).unwrap();
            let fine = order_study(&sol, &region, &[0.1, 0.025], grid.refined()).unwrap();
            for (c, f) in coarse.sup_residuals.iter().zip(&fine.sup_residuals) {
                assert!((c - f).abs() <= 0.05 * f, "{kind:?} order {order}: {c} vs {f}");
            }
        }
    }

    #[test]
    fn mismatched_frame_grows_like_inverse_eps() {
        let p = example();
        let curve = Arc::new(solve_front(&p, 1.0, 0.0).unwrap());
        let wrong = Arc::new(solve_front(&p, 1.5, 0.0).unwrap());
        let frame = build_frame(&p, wrong).unwrap();
        let sol = AsymptoticSolution::from_parts(&p, curve, frame, None, Field::zero(), Field::zero(), 0.0);
        let region = Region::new(RegionKind::Global, (0.0, 3.0));
        let (b, report) = boundedness_check(&sol, &region, &LADDER, SampleGrid { nt: 31, ntau: 801 }).unwrap();
        assert!(!b.bounded, "{b:?}");
        let slope = report.slope.unwrap();
        assert!((slope + 1.0).abs() < 0.25, "{slope}");
    }

    #[test]
    fn loglog_fit_recovers_power_law() {
        let xs = [0.1, 0.05, 0.025];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(1.5)).collect();
        let (s, c) = fit_loglog(&xs, &ys);
        assert!((s - 1.5).abs() < 1e-12 && (c - 3.0f64.ln()).abs() < 1e-12);
    }
}
