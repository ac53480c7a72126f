//! Problem definition: truncated coefficient series, background (regular
//! part) and the leading-order regular equation.
//!
//! The equation is `eps u_xx = a(x,t,eps) u_t + b(x,t,eps) u u_x` with
//! `a = sum eps^k a_k(x,t)` and `b = sum eps^k b_k(x,t)`, truncated at `N`.

use crate::error::{Error, Result};
use crate::exprlang::Field;

/// Samples per axis for the `a0*b0 != 0` check.
pub const NONZERO_SAMPLES: usize = 101;
/// Smallest admissible `|a0*b0|` on the sampling grid.
pub const NONZERO_FLOOR: f64 = 1e-12;

/// Coefficients `a_k`, `b_k` for `k = 0..=N`, `N >= 1`.
#[derive(Debug, Clone)]
pub struct CoefficientSeries {
    a: Vec<Field>,
    b: Vec<Field>,
    zero: Field,
}

impl CoefficientSeries {
    /// The shorter list is padded with zeros; both are padded to at least `N = 1`.
    pub fn new(mut a: Vec<Field>, mut b: Vec<Field>) -> Result<Self> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::Config("coefficient lists a and b need at least a_0 and b_0".into()));
        }
        let len = a.len().max(b.len()).max(2);
        a.resize(len, Field::zero());
        b.resize(len, Field::zero());
        Ok(CoefficientSeries {
            a,
            b,
            zero: Field::zero(),
        })
    }

    /// Parses expression strings.
    pub fn parse(a: &[&str], b: &[&str]) -> Result<Self> {
        let conv = |srcs: &[&str]| -> Result<Vec<Field>> {
            srcs.iter()
                .map(|s| Field::parse(s).map_err(|e| Error::parse(s, e)))
                .collect()
        };
        CoefficientSeries::new(conv(a)?, conv(b)?)
    }

    /// Truncation order `N`.
    pub fn order(&self) -> usize {
        self.a.len() - 1
    }

    /// `a_k`; zero beyond the truncation order.
    pub fn a(&self, k: usize) -> &Field {
        self.a.get(k).unwrap_or(&self.zero)
    }

    pub fn b(&self, k: usize) -> &Field {
        self.b.get(k).unwrap_or(&self.zero)
    }

    fn sum(terms: &[Field], x: f64, t: f64, eps: f64) -> Result<f64> {
        let mut acc = 0.0;
        let mut power = 1.0;
        for term in terms {
            if !term.is_zero() {
                acc += power * term.eval(x, t)?;
            }
            power *= eps;
        }
        Ok(acc)
    }

    /// Truncated `a(x, t, eps)`.
    pub fn a_sum(&self, x: f64, t: f64, eps: f64) -> Result<f64> {
        Self::sum(&self.a, x, t, eps)
    }

    /// Truncated `b(x, t, eps)`.
    pub fn b_sum(&self, x: f64, t: f64, eps: f64) -> Result<f64> {
        Self::sum(&self.b, x, t, eps)
    }
}

/// Regular part `U = sum eps^j u_j(x, t)`.
#[derive(Debug, Clone)]
pub enum Background {
    Zero,
    Expressions(Vec<Field>),
}

impl Background {
    pub fn is_zero(&self) -> bool {
        match self {
            Background::Zero => true,
            Background::Expressions(u) => u.iter().all(Field::is_zero),
        }
    }

    /// `u_j`; the zero field for a zero background.
    pub fn term(&self, j: usize) -> Result<Field> {
        match self {
            Background::Zero => Ok(Field::zero()),
            Background::Expressions(u) => u.get(j).cloned().ok_or(Error::MissingBackgroundTerm(j)),
        }
    }
}

/// Working window `[x_min, x_max] x [t_min, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub x_min: f64,
    pub x_max: f64,
    pub t_min: f64,
    pub t_max: f64,
}

impl Window {
    pub fn new(x_min: f64, x_max: f64, t_min: f64, t_max: f64) -> Result<Self> {
        let finite = [x_min, x_max, t_min, t_max].iter().all(|v| v.is_finite());
        if !finite || x_min >= x_max {
            return Err(Error::Config(format!("bad x range [{x_min}, {x_max}]")));
        }
        if t_min < 0.0 || t_max <= t_min {
            return Err(Error::Config(format!("bad time range [{t_min}, {t_max}]")));
        }
        Ok(Window {
            x_min,
            x_max,
            t_min,
            t_max,
        })
    }

    pub fn contains_x(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }
}

/// Tensor grid of sample points; `xs` and `ts` ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

impl Grid {
    pub fn uniform(window: &Window, nx: usize, nt: usize) -> Self {
        Grid {
            xs: linspace(window.x_min, window.x_max, nx),
            ts: linspace(window.t_min, window.t_max, nt),
        }
    }
}

/// Values on a [`Grid`], stored t-major: `values[it * nx + ix]`.
#[derive(Debug, Clone)]
pub struct SampledField {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl SampledField {
    pub fn at(&self, ix: usize, it: usize) -> f64 {
        self.values[it * self.grid.xs.len() + ix]
    }
}

#[derive(Debug, Clone)]
pub struct BurgersProblem {
    pub coefficients: CoefficientSeries,
    pub background: Background,
    pub epsilons: Vec<f64>,
    pub window: Window,
}

impl BurgersProblem {
    /// Validates `eps > 0` and samples `a0*b0 != 0` over the window.
    pub fn new(
        coefficients: CoefficientSeries,
        background: Background,
        epsilons: Vec<f64>,
        window: Window,
    ) -> Result<Self> {
        if let Some(bad) = epsilons.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return Err(Error::Config(format!("epsilon values must be positive, got {bad}")));
        }
        let problem = BurgersProblem {
            coefficients,
            background,
            epsilons,
            window,
        };
        problem.check_nonzero_leading()?;
        Ok(problem)
    }

    /// Smallest `|a0 b0|` on the sampling grid, with its location.
    pub fn min_leading_product(&self) -> Result<(f64, f64, f64)> {
        let grid = Grid::uniform(&self.window, NONZERO_SAMPLES, NONZERO_SAMPLES);
        let (a0, b0) = (self.coefficients.a(0), self.coefficients.b(0));
        let mut worst = (f64::INFINITY, 0.0, 0.0);
        for &t in &grid.ts {
            for &x in &grid.xs {
                let v = (a0.eval(x, t)? * b0.eval(x, t)?).abs();
                if v < worst.0 {
                    worst = (v, x, t);
                }
            }
        }
        Ok(worst)
    }

    fn check_nonzero_leading(&self) -> Result<()> {
        let (value, x, t) = self.min_leading_product()?;
        if value < NONZERO_FLOOR {
            return Err(Error::DegenerateCoefficients { x, t, value });
        }
        Ok(())
    }

    /// Whether the ladder is strictly decreasing, as order fits require.
    pub fn ladder_is_decreasing(&self) -> bool {
        self.epsilons.windows(2).all(|w| w[1] < w[0])
    }
}

/// Right-hand side of the first-order regular equation:
/// `f1 = u0_xx - a1 u0_t - b1 u0 u0_x`.
pub fn compute_f1(p: &BurgersProblem, x: f64, t: f64) -> Result<f64> {
    if p.background.is_zero() {
        return Ok(0.0);
    }
    let u0 = p.background.term(0)?;
    let (a1, b1) = (p.coefficients.a(1), p.coefficients.b(1));
    let u = u0.eval(x, t)?;
    Ok(u0.dx().dx().eval(x, t)? - a1.eval(x, t)? * u0.dt().eval(x, t)? - b1.eval(x, t)? * u * u0.dx().eval(x, t)?)
}

/// Sup-norm of the regular residual at `order` 0 (`a0 u0_t + b0 u0 u0_x`)
/// or 1 (`a0 u1_t + b0 (u0 u1)_x - f1`) over the grid.
pub fn check_regular_residual(p: &BurgersProblem, order: usize, grid: &Grid) -> Result<f64> {
    if order > 1 {
        return Err(Error::Unsupported(format!("regular residual of order {order}")));
    }
    if matches!(p.background, Background::Zero) {
        return Ok(0.0);
    }
    let (a0, b0) = (p.coefficients.a(0), p.coefficients.b(0));
    let u0 = p.background.term(0)?;
    let u1 = if order == 1 { Some(p.background.term(1)?) } else { None };
    let mut sup: f64 = 0.0;
    for &t in &grid.ts {
        for &x in &grid.xs {
            let (a, b) = (a0.eval(x, t)?, b0.eval(x, t)?);
            let (u, ux) = (u0.eval(x, t)?, u0.dx().eval(x, t)?);
            let r = match &u1 {
                None => a * u0.dt().eval(x, t)? + b * u * ux,
                Some(u1) => {
                    let (v, vx) = (u1.eval(x, t)?, u1.dx().eval(x, t)?);
                    a * u1.dt().eval(x, t)? + b * (ux * v + u * vx) - compute_f1(p, x, t)?
                }
            };
            sup = sup.max(r.abs());
        }
    }
    Ok(sup)
}

/// Bisection resolution for the first crossing time of characteristics.
pub const CROSSING_RESOLUTION: f64 = 1e-6;
/// Minimum number of fixed RK4 steps over `[0, T]`.
pub const CHARACTERISTIC_STEPS: usize = 2000;

struct Characteristics<'a> {
    a0: &'a Field,
    b0: &'a Field,
    values: Vec<f64>,
}

impl Characteristics<'_> {
    fn speed(&self, x: f64, t: f64, u: f64) -> Result<f64> {
        Ok(self.b0.eval(x, t)? / self.a0.eval(x, t)? * u)
    }

    /// One RK4 step of every trace from `t` to `t + h`.
    fn step(&self, xs: &[f64], t: f64, h: f64) -> Result<Vec<f64>> {
        xs.iter()
            .zip(&self.values)
            .map(|(&x, &u)| {
                let k1 = self.speed(x, t, u)?;
                let k2 = self.speed(x + 0.5 * h * k1, t + 0.5 * h, u)?;
                let k3 = self.speed(x + 0.5 * h * k2, t + 0.5 * h, u)?;
                let k4 = self.speed(x + h * k3, t + h, u)?;
                Ok(x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
            })
            .collect()
    }
}

fn is_ordered(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] > w[0])
}

fn interpolate(xs: &[f64], us: &[f64], x: f64) -> f64 {
    let i = xs.partition_point(|&p| p <= x);
    if i == 0 {
        return us[0];
    }
    if i >= xs.len() {
        return us[us.len() - 1];
    }
    let (x0, x1) = (xs[i - 1], xs[i]);
    let w = (x - x0) / (x1 - x0);
    us[i - 1] + w * (us[i] - us[i - 1])
}

/// Leading regular term `u0` from its initial profile `f(x) = u0(x, 0)`.
///
/// Traces `dx/dt = (b0/a0) u0` with `u0` constant along each trace and
/// interpolates linearly (hence monotonically) onto the target grid. The
/// background stored in the problem is not consulted.
pub fn solve_u0_characteristics(p: &BurgersProblem, initial: &Field, targets: &Grid) -> Result<SampledField> {
    if targets.xs.is_empty() || targets.ts.is_empty() {
        return Err(Error::Config("empty target grid".into()));
    }
    if targets.ts[0] < 0.0 || targets.ts.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Config("target times must be ascending and non-negative".into()));
    }
    let x_lo = targets.xs[0];
    let x_hi = targets.xs[targets.xs.len() - 1];
    let t_end = targets.ts[targets.ts.len() - 1];
    let h_max = if t_end > 0.0 {
        t_end / CHARACTERISTIC_STEPS as f64
    } else {
        1.0
    };
    let base_feet = (4 * targets.xs.len()).max(2001);

    let (mut lo, mut hi) = (x_lo, x_hi);
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    for widening in 0..8 {
        let n_feet = base_feet << widening;
        let feet = linspace(lo, hi, n_feet);
        let values = feet
            .iter()
            .map(|&x| initial.eval(x, 0.0))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let traces = Characteristics {
            a0: p.coefficients.a(0),
            b0: p.coefficients.b(0),
            values,
        };
        match trace_to_targets(&traces, feet, targets, h_max)? {
            Some(values) => {
                return Ok(SampledField {
                    grid: targets.clone(),
                    values,
                })
            }
            None => {
                let width = hi - lo;
                lo -= width;
                hi += width;
            }
        }
    }
    Err(Error::CharacteristicsDoNotCover)
}

/// `Ok(None)` when the traced arrivals do not cover the targets.
fn trace_to_targets(
    traces: &Characteristics<'_>,
    mut xs: Vec<f64>,
    targets: &Grid,
    h_max: f64,
) -> Result<Option<Vec<f64>>> {
    let x_lo = targets.xs[0];
    let x_hi = targets.xs[targets.xs.len() - 1];
    let mut t = 0.0;
    let mut out = Vec::with_capacity(targets.xs.len() * targets.ts.len());
    for &t_out in &targets.ts {
        let span = t_out - t;
        let n = (span / h_max).ceil() as usize;
        for k in 0..n {
            let t_next = if k + 1 == n { t_out } else { t + span / n as f64 };
            let next = traces.step(&xs, t, t_next - t)?;
            if !is_ordered(&next) {
                return Err(Error::GradientCatastrophe {
                    time: first_crossing(traces, &xs, t, t_next)?,
                });
            }
            xs = next;
            t = t_next;
        }
        if xs[0] > x_lo || xs[xs.len() - 1] < x_hi {
            return Ok(None);
        }
        out.extend(targets.xs.iter().map(|&x| interpolate(&xs, &traces.values, x)));
    }
    Ok(Some(out))
}

fn first_crossing(traces: &Characteristics<'_>, xs: &[f64], t0: f64, t1: f64) -> Result<f64> {
    let (mut ordered, mut crossed) = (t0, t1);
    while crossed - ordered > CROSSING_RESOLUTION {
        let mid = 0.5 * (ordered + crossed);
        if is_ordered(&traces.step(xs, t0, mid - t0)?) {
            ordered = mid;
        } else {
            crossed = mid;
        }
    }
    Ok(0.5 * (ordered + crossed))
}
