//! Scenario files: everything needed to reproduce one drop experiment.

use std::path::{Path, PathBuf};

use brakefall_core::central::find_collinear_cc;
use brakefall_core::{Configuration, EventSpec, ForceModel, IntegratorSettings, MassSystem};
use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    pub masses: Vec<f64>,
    #[serde(default)]
    pub force: ForceSpec,
    pub triangle: TriangleSpec,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    #[serde(default)]
    pub events: EventThresholds,
    #[serde(default)]
    pub analyses: Analyses,
    #[serde(default)]
    pub output: OutputSpec,
    /// Period claimed by whoever supplied the initial condition.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_period: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ForceSpec {
    Newtonian {
        #[serde(default = "one")]
        g: f64,
    },
    /// Springs `k_ab r_ab²` between every pair. `springs` (a full symmetric
    /// matrix, diagonal ignored) overrides the uniform constant `k`.
    Hooke {
        #[serde(default = "one")]
        k: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        springs: Option<Vec<Vec<f64>>>,
    },
}

impl Default for ForceSpec {
    fn default() -> Self {
        ForceSpec::Newtonian { g: 1.0 }
    }
}

fn one() -> f64 {
    1.0
}

/// Initial (brake) configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TriangleSpec {
    Explicit {
        positions: Vec<[f64; 2]>,
    },
    /// Centered equilateral, body 1 on the positive y axis, counter-clockwise.
    Equilateral {
        side: f64,
    },
    /// Bodies on the x axis in label order, `ratios` giving the gaps 1-2 and 2-3.
    Collinear {
        ratios: [f64; 2],
    },
    /// Masses 3, 4, 5 each at the vertex opposite the side of that length of
    /// the 3-4-5 right triangle, center of mass at the origin.
    Pythagorean345,
    /// Euler's collinear central configuration; `ordering` lists one-based
    /// labels along the line, middle body second.
    EulerCentral {
        ordering: [usize; 3],
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSpec {
    pub order: usize,
    pub tol: f64,
    pub t_max: f64,
    pub max_steps: usize,
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        let d = IntegratorSettings::default();
        IntegratorSpec { order: d.order, tol: d.tol, t_max: 10.0, max_steps: d.max_steps }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EventThresholds {
    pub brake: bool,
    pub syzygy: bool,
    pub total_collision: bool,
    /// Fraction of the initial size; absent disables close-approach events.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub close_approach: Option<f64>,
    /// Time units an escape must persist; absent disables escape stops.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub escape_horizon: Option<f64>,
    pub brake_threshold: f64,
    pub collision_threshold: f64,
    pub total_collision_threshold: f64,
}

impl Default for EventThresholds {
    fn default() -> Self {
        let e = EventSpec::all();
        EventThresholds {
            brake: e.brake,
            syzygy: e.syzygy,
            total_collision: e.total_collision,
            close_approach: e.close_approach,
            escape_horizon: e.escape_horizon,
            brake_threshold: e.brake_threshold,
            collision_threshold: e.collision_threshold,
            total_collision_threshold: e.total_collision_threshold,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Analyses {
    /// Brake-pair extraction, periodicity check and symmetry fit.
    pub symmetry: bool,
    pub shape: bool,
    /// Central-configuration check of the initial triangle.
    pub central: bool,
    /// Periodicity residual tolerance, relative to the initial state's size.
    pub periodicity_tol: f64,
}

impl Default for Analyses {
    fn default() -> Self {
        Analyses { symmetry: true, shape: true, central: true, periodicity_tol: 1e-8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Uniform sample count for the trajectory and shape tables.
    pub samples: usize,
    pub svg: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: None, samples: 1000, svg: true }
    }
}

impl ScenarioSpec {
    /// A gravitational drop with default settings.
    pub fn new(name: impl Into<String>, masses: Vec<f64>, triangle: TriangleSpec, t_max: f64) -> Self {
        ScenarioSpec {
            name: name.into(),
            masses,
            force: ForceSpec::default(),
            triangle,
            integrator: IntegratorSpec { t_max, ..Default::default() },
            events: EventThresholds::default(),
            analyses: Analyses::default(),
            output: OutputSpec::default(),
            expected_period: None,
        }
    }

    fn invalid(&self, message: impl Into<String>) -> Error {
        Error::Invalid { name: self.name.clone(), message: message.into() }
    }

    pub fn system(&self) -> Result<MassSystem> {
        let n = self.masses.len();
        let force = match &self.force {
            ForceSpec::Newtonian { g } => ForceModel::Newtonian { g: *g },
            ForceSpec::Hooke { k, springs: None } => ForceModel::Hooke { springs: vec![*k; n * n] },
            ForceSpec::Hooke { springs: Some(rows), .. } => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(self.invalid(format!("springs must be a {n}x{n} matrix")));
                }
                ForceModel::Hooke { springs: rows.iter().flatten().copied().collect() }
            }
        };
        Ok(MassSystem::new(self.masses.clone(), force)?)
    }

    pub fn configuration(&self) -> Result<Configuration> {
        let n = self.masses.len();
        let cfg = match &self.triangle {
            TriangleSpec::Explicit { positions } => {
                let pts: Vec<(f64, f64)> = positions.iter().map(|p| (p[0], p[1])).collect();
                Configuration::from_xy(&pts)?
            }
            TriangleSpec::Equilateral { side } => {
                if !(*side > 0.0) {
                    return Err(self.invalid("equilateral side must be positive"));
                }
                Configuration::equilateral(*side)
            }
            TriangleSpec::Collinear { ratios } => {
                if ratios.iter().any(|r| !(*r > 0.0)) {
                    return Err(self.invalid("collinear gaps must be positive"));
                }
                Configuration::from_xy(&[(0.0, 0.0), (ratios[0], 0.0), (ratios[0] + ratios[1], 0.0)])?
            }
            TriangleSpec::Pythagorean345 => {
                if self.masses != [3.0, 4.0, 5.0] {
                    log::warn!("{}: pythagorean345 placement used with masses {:?}", self.name, self.masses);
                }
                Configuration::from_xy(&[(1.0, 3.0), (-2.0, -1.0), (1.0, -1.0)])?
            }
            TriangleSpec::EulerCentral { ordering } => {
                if ordering.iter().any(|&i| i == 0 || i > 3) {
                    return Err(self.invalid("euler ordering uses one-based labels 1..3"));
                }
                find_collinear_cc(&self.masses, ordering.map(|i| i - 1))?
            }
        };
        if cfg.n() != n {
            return Err(self.invalid(format!("{} masses but {} positions", n, cfg.n())));
        }
        Ok(cfg)
    }

    pub fn settings(&self) -> IntegratorSettings {
        IntegratorSettings {
            order: self.integrator.order,
            tol: self.integrator.tol,
            max_steps: self.integrator.max_steps,
            ..IntegratorSettings::default()
        }
    }

    pub fn event_spec(&self) -> EventSpec {
        let e = &self.events;
        EventSpec {
            brake: e.brake,
            syzygy: e.syzygy,
            total_collision: e.total_collision,
            close_approach: e.close_approach,
            escape_horizon: e.escape_horizon,
            brake_threshold: e.brake_threshold,
            collision_threshold: e.collision_threshold,
            total_collision_threshold: e.total_collision_threshold,
            ..EventSpec::all()
        }
    }

    /// Apply `BRAKEFALL_TOL` if set.
    pub fn apply_env_overrides(&mut self) -> Result<()> {
        if let Ok(raw) = std::env::var(TOL_ENV) {
            let tol: f64 = raw.trim().parse().map_err(|_| self.invalid(format!("{TOL_ENV}={raw} is not a number")))?;
            if !(tol > 0.0) {
                return Err(self.invalid(format!("{TOL_ENV} must be positive")));
            }
            self.integrator.tol = tol;
        }
        Ok(())
    }
}

pub const TOL_ENV: &str = "BRAKEFALL_TOL";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Toml,
}

impl Format {
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("toml") => Format::Toml,
            _ => Format::Json,
        }
    }
}

/// Parse a scenario, reporting schema errors with the path of the failing
/// field.
pub fn parse_spec(text: &str, format: Format, origin: &str) -> Result<ScenarioSpec> {
    let spec_err = |field: String, message: String| Error::Spec { origin: origin.to_string(), field, message };
    match format {
        Format::Json => {
            let mut de = serde_json::Deserializer::from_str(text);
            serde_path_to_error::deserialize(&mut de)
                .map_err(|e| spec_err(e.path().to_string(), e.into_inner().to_string()))
        }
        Format::Toml => {
            let de = toml::Deserializer::parse(text).map_err(|e| spec_err(".".into(), e.to_string()))?;
            serde_path_to_error::deserialize(de)
                .map_err(|e| spec_err(e.path().to_string(), e.into_inner().message().to_string()))
        }
    }
}

pub fn load_spec(path: &Path) -> Result<ScenarioSpec> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_spec(&text, Format::from_path(path), &path.display().to_string())
}

pub fn to_json(spec: &ScenarioSpec) -> String {
    serde_json::to_string_pretty(spec).expect("scenario specs always serialize")
}

pub fn to_toml(spec: &ScenarioSpec) -> String {
    toml::to_string_pretty(spec).expect("scenario specs always serialize")
}

/// Names of the built-in scenarios, in listing order.
pub const BUILTIN: [&str; 6] = ["lagrange", "lagrange-123", "euler", "euler-345", "pythagorean", "hooke-mode"];

/// Scalene triangle used for the spring eigenmode. With equal masses and
/// springs every centered triangle is a mode.
const HOOKE_MODE_TRIANGLE: [[f64; 2]; 3] = [[0.9, 0.1], [-0.4, 0.7], [-0.5, -0.8]];

pub fn builtin(name: &str) -> Result<ScenarioSpec> {
    let spec = match name {
        "lagrange" => ScenarioSpec::new(name, vec![1.0; 3], TriangleSpec::Equilateral { side: 1.0 }, 2.0),
        "lagrange-123" => ScenarioSpec::new(name, vec![1.0, 2.0, 3.0], TriangleSpec::Equilateral { side: 1.0 }, 2.0),
        "euler" => ScenarioSpec::new(name, vec![1.0; 3], TriangleSpec::Collinear { ratios: [1.0, 1.0] }, 2.0),
        "euler-345" => {
            ScenarioSpec::new(name, vec![3.0, 4.0, 5.0], TriangleSpec::EulerCentral { ordering: [1, 2, 3] }, 2.0)
        }
        "pythagorean" => ScenarioSpec::new(name, vec![3.0, 4.0, 5.0], TriangleSpec::Pythagorean345, 100.0),
        "hooke-mode" => {
            let mut s = ScenarioSpec::new(
                name,
                vec![1.0; 3],
                TriangleSpec::Explicit { positions: HOOKE_MODE_TRIANGLE.to_vec() },
                // two periods of ω = √6
                5.2,
            );
            s.force = ForceSpec::Hooke { k: 1.0, springs: None };
            s
        }
        _ => return Err(Error::UnknownScenario(name.to_string())),
    };
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_build() {
        for name in BUILTIN {
            let s = builtin(name).unwrap();
            s.system().unwrap();
            s.configuration().unwrap();
        }
        assert!(matches!(builtin("nope"), Err(Error::UnknownScenario(_))));
    }

    #[test]
    fn minimal_json_fills_defaults() {
        let s = parse_spec(
            r#"{"name":"x","masses":[1,1,1],"triangle":{"kind":"equilateral","side":2}}"#,
            Format::Json,
            "inline",
        )
        .unwrap();
        assert_eq!(s.integrator, IntegratorSpec::default());
        assert_eq!(s.force, ForceSpec::Newtonian { g: 1.0 });
        assert_eq!(s.output.samples, 1000);
    }

    #[test]
    fn unknown_fields_name_their_path() {
        let err = parse_spec(
            r#"{"name":"x","masses":[1,1,1],"triangle":{"kind":"equilateral","side":2},"integrator":{"tol":1e-10,"bogus":1}}"#,
            Format::Json,
            "inline",
        )
        .unwrap_err();
        let Error::Spec { field, message, .. } = err else { panic!("{err}") };
        assert_eq!(field, "integrator.bogus");
        assert!(message.contains("bogus"));
    }

    #[test]
    fn hooke_springs_matrix() {
        let mut s = builtin("hooke-mode").unwrap();
        s.force = ForceSpec::Hooke {
            k: 1.0,
            springs: Some(vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 3.0], vec![2.0, 3.0, 0.0]]),
        };
        let sys = s.system().unwrap();
        assert_eq!(sys.spring(1, 2), Some(3.0));
        s.force = ForceSpec::Hooke { k: 1.0, springs: Some(vec![vec![0.0, 1.0]]) };
        assert!(s.system().is_err());
    }
}
