//! The JSON problem description.

use burgers_step::problem::{Background, BurgersProblem, CoefficientSeries, Window};
use burgers_step::exprlang::Field;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub coefficients: CoefficientsConfig,
    pub background: BackgroundConfig,
    pub front: FrontConfig,
    pub epsilon: Vec<f64>,
    #[serde(default)]
    pub c1: f64,
    pub time: TimeConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsConfig {
    pub a: Vec<String>,
    pub b: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum BackgroundConfig {
    Zero {},
    Expressions { u: Vec<String> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrontConfig {
    pub rho: f64,
    pub phi0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t0: f64,
    pub t1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub nt: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub solvability: f64,
    pub compatibility: f64,
    pub cond_v1: f64,
    pub decay: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            solvability: 1e-9,
            compatibility: 1e-9,
            cond_v1: 1e-9,
            decay: 1e-6,
        }
    }
}

/// Parameters of the worked example: `a = (t^2+1) + eps (x^2+1)^2`,
/// `b = 1 + eps (x^2+1)^2/(t^2+1)`, zero background, `rho = 1`, `c = 0`.
pub const EXAMPLE_JSON: &str = r#"{
  "coefficients": {
    "a": ["t^2+1", "(x^2+1)^2"],
    "b": ["1", "(x^2+1)^2/(t^2+1)"]
  },
  "background": { "type": "zero" },
  "front": { "rho": 1.0, "phi0": 0.0 },
  "epsilon": [0.9, 0.25],
  "c1": 0.0,
  "time": { "t0": 0.0, "t1": 3.0 },
  "grid": { "x_min": -6.0, "x_max": 6.0, "nx": 601, "nt": 61 }
}
"#;

fn parse_fields(kind: &str, sources: &[String]) -> CliResult<Vec<Field>> {
    sources
        .iter()
        .enumerate()
        .map(|(i, s)| {
            Field::parse(s).map_err(|e| CliError::Config(format!("{kind}[{i}] = `{s}`: {e}")))
        })
        .collect()
}

fn finite(name: &str, v: f64) -> CliResult<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be finite")))
    }
}

impl ProblemConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: ProblemConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn example() -> Self {
        Self::from_json(EXAMPLE_JSON).expect("embedded example config is valid")
    }

    /// Checks everything that does not need expression evaluation.
    pub fn validate(&self) -> CliResult<()> {
        if self.coefficients.a.is_empty() || self.coefficients.b.is_empty() {
            return Err(CliError::Config("coefficients.a and coefficients.b need at least one entry".into()));
        }
        if let BackgroundConfig::Expressions { u } = &self.background {
            if u.is_empty() {
                return Err(CliError::Config("background.u needs at least u0".into()));
            }
        }
        finite("front.rho", self.front.rho)?;
        finite("front.phi0", self.front.phi0)?;
        finite("c1", self.c1)?;
        if self.epsilon.is_empty() {
            return Err(CliError::Config("epsilon needs at least one value".into()));
        }
        if self.epsilon.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(CliError::Config("epsilon values must be positive".into()));
        }
        let TimeConfig { t0, t1 } = self.time;
        if !(t0.is_finite() && t1.is_finite() && 0.0 <= t0 && t0 < t1) {
            return Err(CliError::Config(format!("time must satisfy 0 <= t0 < t1, got [{t0}, {t1}]")));
        }
        let g = self.grid;
        if !(g.x_min.is_finite() && g.x_max.is_finite() && g.x_min < g.x_max) {
            return Err(CliError::Config("grid needs finite x_min < x_max".into()));
        }
        if g.nx < 2 || g.nt < 2 {
            return Err(CliError::Config(format!("grid needs nx >= 2 and nt >= 2, got {} x {}", g.nx, g.nt)));
        }
        let tol = self.tolerances;
        for (name, v) in [
            ("solvability", tol.solvability),
            ("compatibility", tol.compatibility),
            ("cond_v1", tol.cond_v1),
            ("decay", tol.decay),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Config(format!("tolerances.{name} must be positive")));
            }
        }
        Ok(())
    }

    pub fn window(&self) -> CliResult<Window> {
        Ok(Window::new(self.grid.x_min, self.grid.x_max, self.time.t0, self.time.t1)?)
    }

    pub fn background(&self) -> CliResult<Background> {
        Ok(match &self.background {
            BackgroundConfig::Zero {} => Background::Zero,
            BackgroundConfig::Expressions { u } => Background::Expressions(parse_fields("background.u", u)?),
        })
    }

    pub fn coefficients(&self) -> CliResult<CoefficientSeries> {
        Ok(CoefficientSeries::new(
            parse_fields("coefficients.a", &self.coefficients.a)?,
            parse_fields("coefficients.b", &self.coefficients.b)?,
        )?)
    }

    /// The validated problem; fails if `a0 b0` vanishes on the window.
    pub fn problem(&self) -> CliResult<BurgersProblem> {
        Ok(BurgersProblem::new(
            self.coefficients()?,
            self.background()?,
            self.epsilon.clone(),
            self.window()?,
        )?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_round_trips() {
        let cfg = ProblemConfig::example();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ProblemConfig::from_json(&text).unwrap(), cfg);
        assert_eq!(cfg.front.rho, 1.0);
        assert_eq!(cfg.c1, 0.0);
        assert_eq!(cfg.epsilon, vec![0.9, 0.25]);
        assert!(cfg.problem().is_ok());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = EXAMPLE_JSON.replace("\"c1\": 0.0,", "\"c1\": 0.0, \"c2\": 1.0,");
        assert!(matches!(ProblemConfig::from_json(&text), Err(CliError::Config(_))));
        let text = EXAMPLE_JSON.replace("{ \"type\": \"zero\" }", "{ \"type\": \"zero\", \"u\": [] }");
        assert!(matches!(ProblemConfig::from_json(&text), Err(CliError::Config(_))));
    }

    #[test]
    fn expressions_background() {
        let text = EXAMPLE_JSON.replace("{ \"type\": \"zero\" }", "{ \"type\": \"expressions\", \"u\": [\"x/(1+t)\"] }");
        let cfg = ProblemConfig::from_json(&text).unwrap();
        assert!(matches!(cfg.background().unwrap(), Background::Expressions(ref u) if u.len() == 1));
    }

    #[test]
    fn invalid_values_are_config_errors() {
        for (from, to) in [
            ("\"nx\": 601", "\"nx\": 0"),
            ("\"epsilon\": [0.9, 0.25]", "\"epsilon\": []"),
            ("\"epsilon\": [0.9, 0.25]", "\"epsilon\": [0.9, -1]"),
            ("\"t1\": 3.0", "\"t1\": 0.0"),
            ("\"t^2+1\", \"(x^2+1)^2\"", "\"t^2+\", \"(x^2+1)^2\""),
        ] {
            let text = EXAMPLE_JSON.replace(from, to);
            let result = ProblemConfig::from_json(&text).and_then(|c| c.problem().map(|_| ()));
            assert!(matches!(result, Err(CliError::Config(_))), "{to}: {result:?}");
        }
    }

    #[test]
    fn tolerances_default_and_override() {
        assert_eq!(ProblemConfig::example().tolerances, Tolerances::default());
        let text = EXAMPLE_JSON.replace("\"c1\": 0.0,", "\"c1\": 0.0, \"tolerances\": { \"decay\": 1e-5 },");
        let cfg = ProblemConfig::from_json(&text).unwrap();
        assert_eq!(cfg.tolerances.decay, 1e-5);
        assert_eq!(cfg.tolerances.solvability, 1e-9);
    }
}
