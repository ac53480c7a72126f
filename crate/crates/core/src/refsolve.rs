//! Explicit finite-difference solver for the full equation, written as
//! `u_t = (eps u_xx - b u u_x) / a`, used to corroborate the asymptotics.
//!
//! Method of lines: central second differences for `u_xx` and a hybrid
//! treatment of `u u_x = (u^2/2)_x`: central where the cell Peclet number
//! `|b u| dx / eps` is at most 2, first-order upwind by the sign of `b u / a`
//! elsewhere. Classical RK4 in time.
//! Both ends carry Dirichlet data taken from the far-field limits of the
//! asymptotic solution.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::layer::{sample_times, AsymptoticSolution};
use crate::problem::{linspace, CoefficientSeries, NONZERO_FLOOR};

pub const MIN_NODES: usize = 201;
/// Required distance of the domain ends from the curve, in units of `eps / beta`.
pub const MIN_MARGIN: f64 = 20.0;
/// Margin used by [`RefSolverConfig::around_front`].
pub const DEFAULT_MARGIN: f64 = 30.0;
/// Smallest admissible time step.
pub const DT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// Dirichlet values from the far-field limits of the asymptotic solution.
    FarField,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefSolverConfig {
    pub x_left: f64,
    pub x_right: f64,
    pub nx: usize,
    pub t_end: f64,
    /// Safety factor applied to the explicit stability limits.
    pub cfl: f64,
    pub boundary: BoundaryMode,
}

/// Front-independent solver settings; the domain is derived per `eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverSettings {
    pub nx: usize,
    pub t_end: f64,
    pub cfl: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            nx: 2001,
            t_end: 2.0,
            cfl: 0.8,
        }
    }
}

/// `(min phi, max phi, min beta)` over `[0, t_end]`.
fn front_extent(sol: &AsymptoticSolution, t_end: f64) -> Result<(f64, f64, f64)> {
    let mut out = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY);
    for t in sample_times(sol.curve(), t_end) {
        let phi = sol.curve().phi(t);
        out.0 = out.0.min(phi);
        out.1 = out.1.max(phi);
        out.2 = out.2.min(sol.frame().at(t)?.beta.v);
    }
    Ok(out)
}

impl RefSolverConfig {
    /// Domain spanning the curve on `[0, t_end]` with a margin of
    /// `DEFAULT_MARGIN eps / beta` on both sides.
    pub fn around_front(sol: &AsymptoticSolution, eps: f64, settings: SolverSettings) -> Result<Self> {
        let (lo, hi, beta) = front_extent(sol, settings.t_end)?;
        let margin = DEFAULT_MARGIN * eps / beta;
        Ok(RefSolverConfig {
            x_left: lo - margin,
            x_right: hi + margin,
            nx: settings.nx,
            t_end: settings.t_end,
            cfl: settings.cfl,
            boundary: BoundaryMode::FarField,
        })
    }

    pub fn validate(&self, sol: &AsymptoticSolution, eps: f64) -> Result<()> {
        if self.nx < MIN_NODES {
            return Err(Error::Config(format!("reference solver needs nx >= {MIN_NODES}, got {}", self.nx)));
        }
        if !(self.t_end > 0.0) || !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Config("reference solver needs t_end > 0 and 0 < cfl <= 1".into()));
        }
        let (lo, hi, beta) = front_extent(sol, self.t_end)?;
        let need = MIN_MARGIN * eps / beta;
        if self.x_left > lo - need || self.x_right < hi + need {
            return Err(Error::Config(format!(
                "domain [{}, {}] must cover the front range [{lo}, {hi}] with margin {need}",
                self.x_left, self.x_right
            )));
        }
        Ok(())
    }

    pub fn nodes(&self) -> Vec<f64> {
        linspace(self.x_left, self.x_right, self.nx)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    pub xs: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub steps: usize,
}

/// `a` and `b` at the nodes for one time level.
struct Coefficients {
    t: f64,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Coefficients {
    fn at(series: &CoefficientSeries, xs: &[f64], t: f64, eps: f64) -> Result<Self> {
        let mut a = Vec::with_capacity(xs.len());
        let mut b = Vec::with_capacity(xs.len());
        for &x in xs {
            let av = series.a_sum(x, t, eps)?;
            if !(av.abs() >= NONZERO_FLOOR) {
                return Err(Error::DegenerateCoefficients { x, t, value: av.abs() });
            }
            a.push(av);
            b.push(series.b_sum(x, t, eps)?);
        }
        Ok(Coefficients { t, a, b })
    }
}

struct Stepper {
    eps: f64,
    xs: Vec<f64>,
    dx: f64,
}

impl Stepper {
    fn rhs(&self, u: &[f64], c: &Coefficients, out: &mut [f64]) {
        let n = u.len();
        let inv_dx = 1.0 / self.dx;
        let inv_dx2 = inv_dx * inv_dx;
        out[0] = 0.0;
        out[n - 1] = 0.0;
        for i in 1..n - 1 {
            let uxx = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * inv_dx2;
            let ratio = c.b[i] / c.a[i];
            // u u_x = (u^2 / 2)_x; central where the cell Peclet number
            // allows it, upwind otherwise
            let peclet = (c.b[i] * u[i]).abs() * self.dx / self.eps;
            let flux_x = if peclet <= 2.0 {
                (u[i + 1] * u[i + 1] - u[i - 1] * u[i - 1]) * 0.25 * inv_dx
            } else if ratio * u[i] > 0.0 {
                (u[i] * u[i] - u[i - 1] * u[i - 1]) * 0.5 * inv_dx
            } else {
                (u[i + 1] * u[i + 1] - u[i] * u[i]) * 0.5 * inv_dx
            };
            out[i] = self.eps / c.a[i] * uxx - ratio * flux_x;
        }
    }

    /// Local explicit stability limit, scaled by `cfl`.
    fn step_size(&self, u: &[f64], c: &Coefficients, cfl: f64) -> f64 {
        let mut dt = f64::INFINITY;
        for ((&ui, a), b) in u.iter().zip(&c.a).zip(&c.b) {
            let a = a.abs();
            dt = dt.min(self.dx * self.dx * a / (2.0 * self.eps));
            let speed = (b * ui).abs();
            if speed > 0.0 {
                dt = dt.min(self.dx * a / speed);
            }
        }
        cfl * dt
    }
}

fn set_boundary(u: &mut [f64], values: (f64, f64)) {
    let n = u.len();
    u[0] = values.0;
    u[n - 1] = values.1;
}

/// Evolves `init` at `t = 0` and records the field at each checkpoint.
pub fn evolve(
    series: &CoefficientSeries,
    eps: f64,
    init: &AsymptoticSolution,
    cfg: &RefSolverConfig,
    checkpoints: &[f64],
) -> Result<Evolution> {
    cfg.validate(init, eps)?;
    let xs = cfg.nodes();
    let slice = init.slice(0.0)?;
    let u = xs
        .iter()
        .map(|&x| slice.at_x(x, eps).map(|d| d.u))
        .collect::<Result<Vec<f64>>>()?;
    let (x_left, x_right) = (cfg.x_left, cfg.x_right);
    let boundary = |t: f64| -> Result<(f64, f64)> {
        let slice = init.slice(t)?;
        Ok((slice.far_field(x_left, eps)?.0, slice.far_field(x_right, eps)?.1))
    };
    evolve_from(series, eps, cfg, u, boundary, checkpoints)
}

/// Evolves the nodal values `u` with Dirichlet data `boundary(t)`.
pub fn evolve_from(
    series: &CoefficientSeries,
    eps: f64,
    cfg: &RefSolverConfig,
    mut u: Vec<f64>,
    boundary: impl Fn(f64) -> Result<(f64, f64)>,
    checkpoints: &[f64],
) -> Result<Evolution> {
    let xs = cfg.nodes();
    let n = xs.len();
    if u.len() != n || n < 3 {
        return Err(Error::Config(format!("initial data has {} values for {n} nodes", u.len())));
    }
    let stepper = Stepper {
        eps,
        dx: (cfg.x_right - cfg.x_left) / (n - 1) as f64,
        xs,
    };
    set_boundary(&mut u, boundary(0.0)?);

    let mut marks: Vec<f64> = checkpoints.iter().copied().filter(|&t| t >= 0.0 && t <= cfg.t_end).collect();
    marks.sort_by(f64::total_cmp);
    marks.dedup();
    let mut snapshots = Vec::with_capacity(marks.len());
    let mut next_mark = 0;
    while next_mark < marks.len() && marks[next_mark] <= 0.0 {
        snapshots.push(Snapshot { t: 0.0, u: u.clone() });
        next_mark += 1;
    }

    let mut t = 0.0;
    let mut steps = 0usize;
    let mut c0 = Coefficients::at(series, &stepper.xs, t, eps)?;
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut stage = vec![0.0; n];
    while next_mark < marks.len() {
        let target = marks[next_mark];
        let mut dt = stepper.step_size(&u, &c0, cfg.cfl);
        if !(dt >= DT_FLOOR) {
            return Err(Error::CflCollapse { dt, t });
        }
        let last = t + dt >= target - 1e-12 * target.max(1.0);
        if last {
            dt = target - t;
        }
        let t_half = t + 0.5 * dt;
        let t_next = if last { target } else { t + dt };
        let c_half = Coefficients::at(series, &stepper.xs, t_half, eps)?;
        let c1 = Coefficients::at(series, &stepper.xs, t_next, eps)?;
        let b_half = boundary(t_half)?;
        let b_next = boundary(t_next)?;

        stepper.rhs(&u, &c0, &mut k1);
        for i in 0..n {
            stage[i] = u[i] + 0.5 * dt * k1[i];
        }
        set_boundary(&mut stage, b_half);
        stepper.rhs(&stage, &c_half, &mut k2);
        for i in 0..n {
            stage[i] = u[i] + 0.5 * dt * k2[i];
        }
        set_boundary(&mut stage, b_half);
        stepper.rhs(&stage, &c_half, &mut k3);
        for i in 0..n {
            stage[i] = u[i] + dt * k3[i];
        }
        set_boundary(&mut stage, b_next);
        stepper.rhs(&stage, &c1, &mut k4);
        for i in 0..n {
            u[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        set_boundary(&mut u, b_next);
        steps += 1;
        t = t_next;
        debug_assert_eq!(c1.t, t);
        c0 = c1;
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::NanDetected { step: steps, t });
        }
        if last {
            snapshots.push(Snapshot { t, u: u.clone() });
            next_mark += 1;
        }
    }
    Ok(Evolution {
        xs: stepper.xs,
        snapshots,
        steps,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckpointDeviation {
    pub t: f64,
    pub sup: f64,
    pub l2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub epsilon: f64,
    pub config: RefSolverConfig,
    pub steps: usize,
    pub checkpoints: Vec<CheckpointDeviation>,
    #[serde(skip)]
    pub xs: Vec<f64>,
    /// `(t, numeric, asymptotic)` per checkpoint.
    #[serde(skip)]
    pub fields: Vec<(f64, Vec<f64>, Vec<f64>)>,
}

impl RunReport {
    pub fn end_sup(&self) -> f64 {
        self.checkpoints.last().map_or(f64::NAN, |c| c.sup)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub order: usize,
    pub runs: Vec<RunReport>,
}

impl ComparisonReport {
    /// Whether the end-time sup deviation strictly decreases along the ladder.
    pub fn strictly_improving(&self) -> bool {
        self.runs.windows(2).all(|w| w[1].end_sup() < w[0].end_sup())
    }
}

/// Deviation of `evolution` from `sol` at each snapshot.
pub fn measure(sol: &AsymptoticSolution, eps: f64, evolution: &Evolution) -> Result<Vec<(CheckpointDeviation, Vec<f64>)>> {
    let dx = evolution.xs[1] - evolution.xs[0];
    let mut out = Vec::with_capacity(evolution.snapshots.len());
    for snap in &evolution.snapshots {
        let slice = sol.slice(snap.t)?;
        let exact = evolution
            .xs
            .iter()
            .map(|&x| slice.at_x(x, eps).map(|d| d.u))
            .collect::<Result<Vec<f64>>>()?;
        let mut sup: f64 = 0.0;
        let mut sq = 0.0;
        for (a, b) in snap.u.iter().zip(&exact) {
            let d = (a - b).abs();
            sup = sup.max(d);
            sq += d * d;
        }
        out.push((
            CheckpointDeviation {
                t: snap.t,
                sup,
                l2: (sq * dx).sqrt(),
            },
            exact,
        ));
    }
    Ok(out)
}

/// Runs one `eps` from `Y(., 0, eps)` and compares against `reference`
/// at `t_end / 4, t_end / 2, 3 t_end / 4, t_end`.
pub fn run_one(init: &AsymptoticSolution, reference: &AsymptoticSolution, eps: f64, settings: SolverSettings) -> Result<RunReport> {
    let cfg = RefSolverConfig::around_front(init, eps, settings)?;
    let t = settings.t_end;
    let marks = [0.25 * t, 0.5 * t, 0.75 * t, t];
    let evolution = evolve(init.coefficients(), eps, init, &cfg, &marks)?;
    let measured = measure(reference, eps, &evolution)?;
    let mut checkpoints = Vec::new();
    let mut fields = Vec::new();
    for ((dev, exact), snap) in measured.into_iter().zip(evolution.snapshots) {
        checkpoints.push(dev);
        fields.push((snap.t, snap.u, exact));
    }
    Ok(RunReport {
        epsilon: eps,
        config: cfg,
        steps: evolution.steps,
        checkpoints,
        xs: evolution.xs,
        fields,
    })
}

/// [`run_one`] for every `eps` of the ladder, concurrently.
pub fn compare(sol: &AsymptoticSolution, epsilons: &[f64], settings: SolverSettings) -> Result<ComparisonReport> {
    let runs = std::thread::scope(|scope| {
        let handles: Vec<_> = epsilons
            .iter()
            .map(|&eps| scope.spawn(move || run_one(sol, sol, eps, settings)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("solver worker panicked"))
            .collect::<Result<Vec<RunReport>>>()
    })?;
    Ok(ComparisonReport {
        order: sol.order(),
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprlang::Field;
    use crate::front::solve_front;
    use crate::layer::build_frame;
    use crate::problem::{Background, BurgersProblem, Window};
    use std::sync::Arc;

    fn problem(a: &[&str], b: &[&str], t_max: f64) -> BurgersProblem {
        BurgersProblem::new(
            CoefficientSeries::parse(a, b).unwrap(),
            Background::Zero,
            vec![0.1],
            Window::new(-10.0, 10.0, 0.0, t_max).unwrap(),
        )
        .unwrap()
    }

    fn solution(p: &BurgersProblem, rho: f64, order: usize) -> AsymptoticSolution {
        let curve = Arc::new(solve_front(p, rho, 0.0).unwrap());
        let frame = build_frame(p, curve.clone()).unwrap();
        AsymptoticSolution::assemble(p, curve, frame, order, 0.0).unwrap()
    }

    fn wave_deviation(nx: usize) -> f64 {
        let p = problem(&["1"], &["1"], 1.0);
        let sol = solution(&p, 1.0, 0);
        let settings = SolverSettings { nx, t_end: 1.0, cfl: 0.8 };
        run_one(&sol, &sol, 0.1, settings).unwrap().end_sup()
    }

    #[test]
    fn travelling_wave_is_reproduced() {
        let coarse = wave_deviation(1001);
        let fine = wave_deviation(2001);
        eprintln!("travelling wave deviation: nx=1001 {coarse:e}, nx=2001 {fine:e}");
        assert!(fine <= 5e-3, "{fine}");
        assert!(coarse / fine >= 1.7, "{}", coarse / fine);
    }

    #[test]
    fn zero_state_is_a_fixed_point() {
        let p = problem(&["1"], &["1"], 1.0);
        let sol = solution(&p, 1.0, 0);
        let cfg = RefSolverConfig::around_front(&sol, 0.1, SolverSettings { nx: 401, t_end: 1.0, cfl: 0.8 }).unwrap();
        let ev = evolve_from(&p.coefficients, 0.1, &cfg, vec![0.0; 401], |_| Ok((0.0, 0.0)), &[0.5, 1.0]).unwrap();
        assert_eq!(ev.snapshots.len(), 2);
        assert!(ev.snapshots.iter().all(|s| s.u.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn rejects_bad_configs() {
        let p = problem(&["1"], &["1"], 1.0);
        let sol = solution(&p, 1.0, 0);
        let mut cfg = RefSolverConfig::around_front(&sol, 0.1, SolverSettings::default()).unwrap();
        cfg.nx = 100;
        assert!(matches!(cfg.validate(&sol, 0.1), Err(Error::Config(_))));
        cfg.nx = 401;
        cfg.x_right = 1.5;
        assert!(matches!(cfg.validate(&sol, 0.1), Err(Error::Config(_))));
    }

    #[test]
    fn maximum_principle_on_example() {
        let p = BurgersProblem::new(
            CoefficientSeries::parse(&["t^2+1", "(x^2+1)^2"], &["1", "(x^2+1)^2/(t^2+1)"]).unwrap(),
            Background::Zero,
            vec![0.2],
            Window::new(-6.0, 6.0, 0.0, 2.0).unwrap(),
        )
        .unwrap();
        let sol = solution(&p, 1.0, 1);
        let cfg = RefSolverConfig::around_front(&sol, 0.2, SolverSettings { nx: 801, t_end: 2.0, cfl: 0.8 }).unwrap();
        let ev = evolve(sol.coefficients(), 0.2, &sol, &cfg, &[0.0, 0.5, 1.0, 2.0]).unwrap();
        let init = &ev.snapshots[0].u;
        let lo = init.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = init.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for s in &ev.snapshots {
            assert!(s.u.iter().all(|&v| v >= lo - 1e-6 && v <= hi + 1e-6), "t = {}", s.t);
        }
    }

    #[test]
    fn wrong_front_deviation_grows() {
        let p = problem(&["1"], &["1"], 1.0);
        let sol = solution(&p, 1.0, 0);
        let wrong_curve = Arc::new(solve_front(&p, 1.3, 0.0).unwrap());
        let wrong = AsymptoticSolution::from_parts(
            &p,
            wrong_curve,
            sol.frame().clone(),
            None,
            Field::zero(),
            Field::zero(),
            0.0,
        );
        let report = run_one(&sol, &wrong, 0.1, SolverSettings { nx: 801, t_end: 1.0, cfl: 0.8 }).unwrap();
        let sups: Vec<f64> = report.checkpoints.iter().map(|c| c.sup).collect();
        assert!(sups.windows(2).all(|w| w[1] > w[0]), "{sups:?}");
        assert!(sups[3] > 0.5);
    }
}
