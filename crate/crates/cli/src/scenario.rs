//! Scenario files: flat `key = value` lines, `#` comments, and repeated
//! `[cargo]` / `[agent]` sections. See the README for the grammar.

use std::path::Path;

use swarmcage_core::{validate_setup, CargoSpec, PeakAnchor, Point2, Rect, ValidationError, WorldConfig};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: WorldConfig,
    pub cargos: Vec<CargoSpec>,
    /// Explicit start positions; `None` uses the seeded start block.
    pub starts: Option<Vec<Point2>>,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("line {line}: `{field}`: {message}")]
    Parse { line: usize, field: String, message: String },
    #[error("invalid scenario: {0}")]
    Validation(#[from] ValidationError),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl ScenarioError {
    /// Name of the violated constraint, for validation failures.
    pub fn constraint(&self) -> Option<&'static str> {
        match self {
            ScenarioError::Validation(v) => Some(v.name),
            _ => None,
        }
    }
}

enum Section {
    Global,
    Cargo(usize),
    Agent(usize),
}

#[derive(Default)]
struct PartialCargo {
    line: usize,
    center: Option<Point2>,
    radius: Option<f64>,
    goal: Option<Point2>,
}

fn parse_err(line: usize, field: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Parse { line, field: field.to_string(), message: message.into() }
}

fn numbers(line: usize, field: &str, value: &str, count: usize) -> Result<Vec<f64>, ScenarioError> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    if parts.len() != count {
        return Err(parse_err(line, field, format!("expected {count} comma-separated numbers")));
    }
    parts
        .iter()
        .map(|p| p.parse::<f64>().map_err(|_| parse_err(line, field, format!("`{p}` is not a number"))))
        .collect()
}

fn number(line: usize, field: &str, value: &str) -> Result<f64, ScenarioError> {
    Ok(numbers(line, field, value, 1)?[0])
}

fn point(line: usize, field: &str, value: &str) -> Result<Point2, ScenarioError> {
    let v = numbers(line, field, value, 2)?;
    Ok(Point2::new(v[0], v[1]))
}

fn integer<T: std::str::FromStr>(line: usize, field: &str, value: &str) -> Result<T, ScenarioError> {
    value.parse::<T>().map_err(|_| parse_err(line, field, format!("`{value}` is not a non-negative integer")))
}

fn flag(line: usize, field: &str, value: &str) -> Result<bool, ScenarioError> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(parse_err(line, field, "expected `true` or `false`")),
    }
}

fn set_global(cfg: &mut WorldConfig, line: usize, key: &str, value: &str) -> Result<(), ScenarioError> {
    match key {
        "domain" => {
            let v = numbers(line, key, value, 4)?;
            cfg.domain = Rect { min: Point2::new(v[0], v[1]), max: Point2::new(v[2], v[3]) };
        }
        "n_agents" => cfg.n_agents = integer(line, key, value)?,
        "k" => cfg.k = number(line, key, value)?,
        "gamma" => cfg.gamma = number(line, key, value)?,
        "d_min" => cfg.d_min = number(line, key, value)?,
        "r_sense" => cfg.r_sense = number(line, key, value)?,
        "u_max" => cfg.u_max = number(line, key, value)?,
        "dt" => cfg.dt = number(line, key, value)?,
        "phi0" => cfg.phi0 = number(line, key, value)?,
        "kappa_omega" => cfg.kappa_omega = number(line, key, value)?,
        "kappa_sigma" => cfg.kappa_sigma = number(line, key, value)?,
        "peak_anchor" => {
            cfg.peak_anchor = match value {
                "contact" => PeakAnchor::Contact,
                "agent" => PeakAnchor::Agent,
                _ => return Err(parse_err(line, key, "expected `contact` or `agent`")),
            }
        }
        "contact_band" => cfg.contact_band = number(line, key, value)?,
        "max_gap" => cfg.max_gap = number(line, key, value)?,
        "min_team" => cfg.min_team = integer(line, key, value)?,
        "v_cargo" => cfg.v_cargo = number(line, key, value)?,
        "delivery_margin" => cfg.delivery_margin = number(line, key, value)?,
        "taper_dist" => cfg.taper_dist = number(line, key, value)?,
        "r_active" => cfg.r_active = if value == "auto" { None } else { Some(number(line, key, value)?) },
        "discrete_barrier" => cfg.discrete_barrier = flag(line, key, value)?,
        "decentralized_qp" => cfg.decentralized_qp = flag(line, key, value)?,
        "release_after_delivery" => cfg.release_after_delivery = flag(line, key, value)?,
        "cargo_exclusion" => cfg.cargo_exclusion = flag(line, key, value)?,
        "quadrature_depth" => cfg.quadrature_depth = integer(line, key, value)?,
        "seed" => cfg.seed = integer(line, key, value)?,
        "max_steps" => cfg.max_steps = integer(line, key, value)?,
        "start_spacing" => cfg.start_spacing = number(line, key, value)?,
        _ => return Err(parse_err(line, key, "unknown key")),
    }
    Ok(())
}

/// Parses scenario text without validating it.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let mut config = WorldConfig::default();
    let mut cargos: Vec<PartialCargo> = Vec::new();
    let mut agents: Vec<(usize, Option<Point2>)> = Vec::new();
    let mut section = Section::Global;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = match name.trim() {
                "cargo" => {
                    cargos.push(PartialCargo { line, ..Default::default() });
                    Section::Cargo(cargos.len() - 1)
                }
                "agent" => {
                    agents.push((line, None));
                    Section::Agent(agents.len() - 1)
                }
                other => return Err(parse_err(line, other, "unknown section")),
            };
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(parse_err(line, content, "expected `key = value`"));
        };
        let (key, value) = (key.trim(), value.trim());
        match section {
            Section::Global => set_global(&mut config, line, key, value)?,
            Section::Cargo(i) => {
                let c = &mut cargos[i];
                match key {
                    "center" => c.center = Some(point(line, key, value)?),
                    "radius" => c.radius = Some(number(line, key, value)?),
                    "goal" => c.goal = Some(point(line, key, value)?),
                    _ => return Err(parse_err(line, key, "unknown cargo key")),
                }
            }
            Section::Agent(i) => match key {
                "position" => agents[i].1 = Some(point(line, key, value)?),
                _ => return Err(parse_err(line, key, "unknown agent key")),
            },
        }
    }

    let cargos = cargos
        .into_iter()
        .map(|c| {
            let center = c.center.ok_or_else(|| parse_err(c.line, "center", "cargo section needs a center"))?;
            let radius = c.radius.ok_or_else(|| parse_err(c.line, "radius", "cargo section needs a radius"))?;
            Ok(CargoSpec { center, radius, goal: c.goal })
        })
        .collect::<Result<Vec<_>, ScenarioError>>()?;
    let starts = if agents.is_empty() {
        None
    } else {
        Some(
            agents
                .into_iter()
                .map(|(line, p)| p.ok_or_else(|| parse_err(line, "position", "agent section needs a position")))
                .collect::<Result<Vec<_>, _>>()?,
        )
    };
    Ok(Scenario { config, cargos, starts })
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ValidationError> {
        validate_setup(&self.config, &self.cargos, self.starts.as_deref()).map(|_| ())
    }
}

/// Reads, parses and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ScenarioError::Io { path: path.display().to_string(), source })?;
    let scenario = parse_scenario(&text)?;
    scenario.validate()?;
    Ok(scenario)
}
