//! Subcommand implementations. Each writes its artifacts under an output
//! directory and returns the report it serialized.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use burgers_step::front::{check_compatibility, max_b0x, solve_front, FrontCurve, B0X_TOLERANCE};
use burgers_step::layer::{
    build_frame, check_cond_v1, check_decay, check_solvability, sample_times, AlphaSet, AsymptoticSolution,
    FirstLayer, LayerTerm, LeadingLayer, WaveFrame,
};
use burgers_step::problem::{linspace, BurgersProblem, NONZERO_FLOOR};
use burgers_step::refsolve::{compare, ComparisonReport, SolverSettings};
use burgers_step::residual::{order_study, Boundedness, Region, RegionKind, ResidualReport, SampleGrid};
use burgers_step::Error;
use serde::Serialize;

use crate::config::ProblemConfig;
use crate::error::{CliError, CliResult};
use crate::output::{write_json, Csv};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_RESIDUAL_LADDER: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];
pub const DEFAULT_SIMULATION_LADDER: [f64; 3] = [0.2, 0.1, 0.05];
pub const EXAMPLE_SIMULATION_END: f64 = 2.0;
/// Build epsilons of the worked example.
pub const EXAMPLE_EPSILONS: [f64; 2] = [0.9, 0.25];

/// Problem, front and frame built from a configuration.
pub struct Model {
    pub config: ProblemConfig,
    pub problem: BurgersProblem,
    pub curve: Arc<FrontCurve>,
    pub frame: WaveFrame,
}

impl Model {
    pub fn new(config: &ProblemConfig) -> CliResult<Self> {
        let problem = config.problem()?;
        let curve = Arc::new(solve_front(&problem, config.front.rho, config.front.phi0)?);
        curve.ensure_covers(config.time.t1)?;
        let frame = build_frame(&problem, curve.clone())?;
        Ok(Model {
            config: config.clone(),
            problem,
            curve,
            frame,
        })
    }

    pub fn solution(&self, order: usize) -> CliResult<AsymptoticSolution> {
        Ok(AsymptoticSolution::assemble_with(
            &self.problem,
            self.curve.clone(),
            self.frame.clone(),
            order,
            self.config.c1,
            self.config.tolerances.solvability,
        )?)
    }

    fn t_range(&self) -> (f64, f64) {
        (self.config.time.t0, self.config.time.t1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
        }
    }

    fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckItem {
    pub name: String,
    pub value: Option<f64>,
    pub tolerance: Option<f64>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub schema_version: u32,
    pub status: Status,
    pub items: Vec<CheckItem>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn item(&self, name: &str) -> Option<&CheckItem> {
        self.items.iter().find(|i| i.name == name)
    }
}

struct Items(Vec<CheckItem>);

impl Items {
    /// Passes iff `value <= tolerance`.
    fn at_most(&mut self, name: &str, value: f64, tolerance: f64) {
        self.0.push(CheckItem {
            name: name.into(),
            value: Some(value),
            tolerance: Some(tolerance),
            status: Status::from_bool(value <= tolerance),
            detail: None,
        });
    }

    fn fail(&mut self, name: &str, detail: String) {
        self.0.push(CheckItem {
            name: name.into(),
            value: None,
            tolerance: None,
            status: Status::Fail,
            detail: Some(detail),
        });
    }

    fn not_evaluated(&mut self, names: &[&str], reason: &str) {
        for name in names {
            self.fail(name, format!("not evaluated: {reason}"));
        }
    }
}

const FRONT_ITEMS: [&str; 3] = ["b0_independent_of_x", "front_reaches_t1", "frame_beta_positive"];
const ALPHA_ITEMS: [&str; 4] = ["alpha_1", "alpha_2", "alpha_3", "alpha_4"];
const CURVE_ITEMS: [&str; 4] = ["compatibility_con", "compatibility_b0x", "cond_v1", "decay_v0"];

/// Evaluates every condition of the construction. Configuration errors
/// are returned as errors; failed conditions are reported as items.
pub fn check(config: &ProblemConfig) -> CliResult<CheckReport> {
    let mut items = Items(Vec::new());
    let problem = match config.problem() {
        Ok(p) => Some(p),
        Err(CliError::Core(Error::DegenerateCoefficients { x, t, value })) => {
            items.0.push(CheckItem {
                name: "a0_b0_nonzero".into(),
                value: Some(value),
                tolerance: Some(NONZERO_FLOOR),
                status: Status::Fail,
                detail: Some(format!("|a0 b0| = {value:e} at x = {x}, t = {t}")),
            });
            None
        }
        Err(e) => return Err(e),
    };
    if let Some(p) = problem {
        check_problem(config, &p, &mut items)?;
    } else {
        let rest: Vec<&str> = FRONT_ITEMS.iter().chain(&ALPHA_ITEMS).chain(&CURVE_ITEMS).copied().collect();
        items.not_evaluated(&rest, "a0 b0 vanishes on the window");
    }
    let status = Status::from_bool(items.0.iter().all(|i| i.status == Status::Pass));
    Ok(CheckReport {
        schema_version: SCHEMA_VERSION,
        status,
        items: items.0,
    })
}

fn check_problem(config: &ProblemConfig, p: &BurgersProblem, items: &mut Items) -> CliResult<()> {
    let tol = config.tolerances;
    let t1 = config.time.t1;
    let (min_product, _, _) = p.min_leading_product()?;
    items.0.push(CheckItem {
        name: "a0_b0_nonzero".into(),
        value: Some(min_product),
        tolerance: Some(NONZERO_FLOOR),
        status: Status::Pass,
        detail: None,
    });
    items.at_most("b0_independent_of_x", max_b0x(p)?, B0X_TOLERANCE);

    let curve = match solve_front(p, config.front.rho, config.front.phi0) {
        Ok(c) => Arc::new(c),
        Err(e @ (Error::RhoZero | Error::B0DependsOnX { .. } | Error::BlowupBeforeT { .. })) => {
            items.fail("front_reaches_t1", e.to_string());
            items.not_evaluated(&FRONT_ITEMS[2..], "no front curve");
            items.not_evaluated(&ALPHA_ITEMS, "no front curve");
            items.not_evaluated(&CURVE_ITEMS, "no front curve");
            return Ok(());
        }
        Err(e) => return Err(e.into()),
    };
    let reaches = curve.ensure_covers(t1);
    items.0.push(CheckItem {
        name: "front_reaches_t1".into(),
        value: Some(curve.valid_until()),
        tolerance: Some(t1),
        status: Status::from_bool(reaches.is_ok()),
        detail: reaches.err().map(|e| e.to_string()),
    });
    let t_end = curve.valid_until().min(t1);

    let frame = match build_frame(p, curve.clone()) {
        Ok(f) => f,
        Err(e @ (Error::FrameDegenerate { .. } | Error::Orientation { .. })) => {
            items.fail("frame_beta_positive", e.to_string());
            items.not_evaluated(&ALPHA_ITEMS, "degenerate frame");
            items.not_evaluated(&CURVE_ITEMS, "degenerate frame");
            return Ok(());
        }
        Err(e) => return Err(e.into()),
    };
    let times = sample_times(&curve, t_end);
    let mut beta_min = f64::INFINITY;
    for &t in &times {
        beta_min = beta_min.min(frame.at(t)?.beta.v);
    }
    items.0.push(CheckItem {
        name: "frame_beta_positive".into(),
        value: Some(beta_min),
        tolerance: Some(0.0),
        status: Status::from_bool(beta_min > 0.0),
        detail: None,
    });

    let alphas = AlphaSet::new(p, frame.clone());
    let maxima = check_solvability(&alphas, t_end)?;
    for (name, value) in ALPHA_ITEMS.iter().zip(maxima) {
        items.at_most(name, value, tol.solvability);
    }
    let compat = check_compatibility(p, &curve)?;
    items.at_most("compatibility_con", compat.max_dev_con, tol.compatibility);
    items.at_most("compatibility_b0x", compat.max_dev_b0x, tol.compatibility);
    items.at_most("cond_v1", check_cond_v1(p, &frame, t_end)?, tol.cond_v1);

    let decay_times = linspace(0.0, t_end, 31);
    items.at_most("decay_v0", worst_decay(&LeadingLayer(frame.clone()), &decay_times)?, tol.decay);
    if p.background.is_zero() {
        if maxima.iter().all(|&m| m <= tol.solvability) {
            let first = FirstLayer {
                alphas,
                c1: config.c1,
            };
            items.at_most("decay_v1", worst_decay(&first, &decay_times)?, tol.decay);
        } else {
            items.not_evaluated(&["decay_v1"], "solvability conditions fail");
        }
    }
    Ok(())
}

fn worst_decay(term: &dyn LayerTerm, times: &[f64]) -> CliResult<f64> {
    let mut worst: f64 = 0.0;
    for &t in times {
        let r = check_decay(term, t)?;
        worst = worst.max(r.right).max(r.left);
    }
    Ok(worst)
}

pub fn cmd_check(config: &ProblemConfig, out: &Path) -> CliResult<CheckReport> {
    let report = check(config)?;
    write_json(&out.join("check.json"), &report)?;
    Ok(report)
}

/// Name of a figure file.
pub fn figure_name(field: &str, eps: f64) -> String {
    format!("{field}_eps{eps}.csv")
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildOutput {
    pub figures: Vec<PathBuf>,
    pub front: PathBuf,
}

/// Writes `Y<order>`, `V0` and (order 1) `V1` on the configured grid for
/// every configured `eps`, plus the front knots.
pub fn cmd_build(config: &ProblemConfig, order: usize, out: &Path) -> CliResult<BuildOutput> {
    let model = Model::new(config)?;
    let sol = model.solution(order)?;
    let g = config.grid;
    let xs = linspace(g.x_min, g.x_max, g.nx);
    let ts = linspace(config.time.t0, config.time.t1, g.nt);
    let header = ["x", "t", "value"];
    let mut written = Vec::new();
    for &eps in &config.epsilon {
        let mut y = Csv::new(&header);
        let mut v0 = Csv::new(&header);
        let mut v1 = Csv::new(&header);
        for &t in &ts {
            let slice = sol.slice(t)?;
            for &x in &xs {
                let tau = slice.tau_of(x, eps);
                let (l0, l1) = slice.layers(tau);
                y.row(&[x, t, slice.at_tau(tau, eps)?.u]);
                v0.row(&[x, t, l0.v]);
                v1.row(&[x, t, l1.v]);
            }
        }
        let mut files = vec![(format!("Y{order}"), y), ("V0".to_string(), v0)];
        if order == 1 {
            files.push(("V1".to_string(), v1));
        }
        for (name, csv) in files {
            let path = out.join(figure_name(&name, eps));
            csv.write(&path)?;
            written.push(path);
        }
    }
    let mut front = Csv::new(&["t", "phi", "dphi"]);
    for k in model.curve.knots() {
        front.row(&[k.t, k.phi, k.dphi]);
    }
    let path = out.join("front.csv");
    front.write(&path)?;
    Ok(BuildOutput {
        figures: written,
        front: path,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualOutput {
    pub schema_version: u32,
    pub order: usize,
    pub report: ResidualReport,
    pub boundedness: Boundedness,
}

pub fn parse_region(name: &str) -> CliResult<RegionKind> {
    match name {
        "global" => Ok(RegionKind::Global),
        "right" => Ok(RegionKind::RightTail),
        "left" => Ok(RegionKind::LeftTail),
        other => Err(CliError::Config(format!("unknown region `{other}`; use global, right or left"))),
    }
}

fn check_ladder(ladder: &[f64], min_len: usize) -> CliResult<()> {
    if ladder.len() < min_len {
        return Err(CliError::Config(format!("the epsilon ladder needs at least {min_len} values")));
    }
    if ladder.iter().any(|e| !(e.is_finite() && *e > 0.0)) || ladder.windows(2).any(|w| w[1] >= w[0]) {
        return Err(CliError::Config("the epsilon ladder must be positive and strictly decreasing".into()));
    }
    Ok(())
}

/// Order study for each requested region; writes `residual_order<m>_<region>.{json,csv}`.
pub fn cmd_residual(
    config: &ProblemConfig,
    order: usize,
    regions: &[RegionKind],
    ladder: &[f64],
    out: &Path,
) -> CliResult<Vec<ResidualOutput>> {
    check_ladder(ladder, 3)?;
    let model = Model::new(config)?;
    let sol = model.solution(order)?;
    let mut outputs = Vec::new();
    for &kind in regions {
        let region = Region::new(kind, model.t_range());
        let report = order_study(&sol, &region, ladder, SampleGrid::default())?;
        let boundedness = Boundedness::from_sups(&report.sup_residuals);
        let stem = format!("residual_order{order}_{}", kind.name());
        let mut csv = Csv::new(&["epsilon", "sup_residual", "region"]);
        for (eps, sup) in report.epsilons.iter().zip(&report.sup_residuals) {
            csv.row_with_label(&[*eps, *sup], kind.name());
        }
        csv.write(&out.join(format!("{stem}.csv")))?;
        let output = ResidualOutput {
            schema_version: SCHEMA_VERSION,
            order,
            report,
            boundedness,
        };
        write_json(&out.join(format!("{stem}.json")), &output)?;
        outputs.push(output);
    }
    Ok(outputs)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationOutput {
    pub schema_version: u32,
    pub strictly_improving: bool,
    pub comparison: ComparisonReport,
}

/// Evolves `Y<order>(., 0, eps)` for every `eps` of the ladder and compares
/// against `Y<order>`; writes `simulate_order<m>.json` and one snapshot CSV
/// per `eps` and checkpoint.
pub fn cmd_simulate(
    config: &ProblemConfig,
    order: usize,
    ladder: &[f64],
    settings: SolverSettings,
    out: &Path,
) -> CliResult<SimulationOutput> {
    check_ladder(ladder, 1)?;
    if !(settings.t_end > 0.0 && settings.t_end <= config.time.t1) {
        return Err(CliError::Config(format!(
            "simulation end time must lie in (0, {}]",
            config.time.t1
        )));
    }
    let model = Model::new(config)?;
    let sol = model.solution(order)?;
    let comparison = compare(&sol, ladder, settings)?;
    for run in &comparison.runs {
        for (t, numeric, asymptotic) in &run.fields {
            let mut csv = Csv::new(&["x", "t", "u_numeric", "u_asymptotic", "diff"]);
            for ((x, un), ua) in run.xs.iter().zip(numeric).zip(asymptotic) {
                csv.row(&[*x, *t, *un, *ua, un - ua]);
            }
            csv.write(&out.join(format!("snapshot_order{order}_eps{}_t{t}.csv", run.epsilon)))?;
        }
    }
    let output = SimulationOutput {
        schema_version: SCHEMA_VERSION,
        strictly_improving: comparison.strictly_improving(),
        comparison,
    };
    write_json(&out.join(format!("simulate_order{order}.json")), &output)?;
    Ok(output)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeEntry {
    pub order: usize,
    pub region: RegionKind,
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExampleSummary {
    pub schema_version: u32,
    pub check: Status,
    pub figures: Vec<String>,
    pub residual_slopes: Vec<SlopeEntry>,
    pub simulation_strictly_improving: bool,
}

/// The worked example end to end: check, figures at `eps = 0.9, 0.25`,
/// residual studies for `Y0` and `Y1`, and the reference-solver comparison.
pub fn cmd_example(out: &Path, solver_nx: usize) -> CliResult<ExampleSummary> {
    let config = ProblemConfig::example();
    write_json(&out.join("config.json"), &config)?;
    let report = cmd_check(&config, out)?;
    if !report.passed() {
        return Err(CliError::ConditionsFailed("the embedded example fails its condition check".into()));
    }
    let figures_dir = out.join("figures");
    let figures = cmd_build(&config, 1, &figures_dir)?
        .figures
        .iter()
        .filter_map(|p| p.strip_prefix(out).ok().map(|r| r.to_string_lossy().into_owned()))
        .collect();
    let residual_dir = out.join("residual");
    let mut residual_slopes = Vec::new();
    for order in [0, 1] {
        let regions = [RegionKind::Global, RegionKind::RightTail, RegionKind::LeftTail];
        for r in cmd_residual(&config, order, &regions, &DEFAULT_RESIDUAL_LADDER, &residual_dir)? {
            residual_slopes.push(SlopeEntry {
                order,
                region: r.report.region,
                slope: r.report.slope,
            });
        }
    }
    let settings = SolverSettings {
        nx: solver_nx,
        t_end: EXAMPLE_SIMULATION_END,
        ..SolverSettings::default()
    };
    let sim = cmd_simulate(&config, 1, &DEFAULT_SIMULATION_LADDER, settings, &out.join("simulate"))?;
    let summary = ExampleSummary {
        schema_version: SCHEMA_VERSION,
        check: report.status,
        figures,
        residual_slopes,
        simulation_strictly_improving: sim.strictly_improving,
    };
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}
