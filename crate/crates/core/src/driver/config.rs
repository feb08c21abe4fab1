//! Scenario configuration: presets, the TOML file format and validation.

use std::path::PathBuf;
use std::str::FromStr;

use serde::Deserialize;

use crate::assembly::BoundaryData;
use crate::cutting::DEFAULT_EPS_CUT;
use crate::geometry::Point;
use crate::level_set::LevelSet;
use crate::solvers::{AmgParams, Method, SolverOptions};
use crate::{Error, Result};

/// Default radial speed of the growing sphere.
pub const DEFAULT_GROWTH_SPEED: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scenario {
    MovingSphere { velocity: Point },
    GrowingSphere { speed: f64 },
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::MovingSphere { .. } => "moving_sphere",
            Scenario::GrowingSphere { .. } => "growing_sphere",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Paper1,
    Paper2,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper1" => Ok(Preset::Paper1),
            "paper2" => Ok(Preset::Paper2),
            other => Err(Error::Config(format!(
                "unknown preset '{other}' (expected paper1 or paper2)"
            ))),
        }
    }
}

pub fn parse_method(s: &str) -> Result<Method> {
    match s {
        "cg" => Ok(Method::Cg),
        "gmres" => Ok(Method::Gmres),
        "segregated" => Ok(Method::SchurCg),
        other => Err(Error::Config(format!(
            "unknown solver '{other}' (expected cg, gmres or segregated)"
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceFormat {
    Vtk,
    Obj,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputOptions {
    /// Nothing is written when `None`.
    pub dir: Option<PathBuf>,
    pub vtk: bool,
    pub surface: Option<SurfaceFormat>,
    pub matrix_market: bool,
    pub sparsity_image: bool,
    pub macro_mesh: bool,
}

impl Default for OutputOptions {
    fn default() -> Self {
        OutputOptions {
            dir: None,
            vtk: true,
            surface: Some(SurfaceFormat::Vtk),
            matrix_market: false,
            sparsity_image: false,
            macro_mesh: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub n: usize,
    pub dt: f64,
    pub steps: usize,
    /// Coefficient inside the sphere.
    pub a1: f64,
    /// Coefficient outside the sphere.
    pub a2: f64,
    pub center: Point,
    pub radius: f64,
    pub eps_cut: f64,
    pub boundary: BoundaryData,
    pub solver: SolverOptions,
    pub output: OutputOptions,
}

impl ScenarioConfig {
    pub fn preset(preset: Preset) -> Self {
        let base = ScenarioConfig {
            scenario: Scenario::MovingSphere {
                velocity: Point::new(1.0, 1.0, 1.0),
            },
            n: 32,
            dt: 0.0625,
            steps: 9,
            a1: 1e6,
            a2: 1.0,
            center: Point::new(0.125, 0.125, 0.125),
            radius: 0.12,
            eps_cut: DEFAULT_EPS_CUT,
            boundary: BoundaryData::default(),
            solver: SolverOptions::default(),
            output: OutputOptions::default(),
        };
        match preset {
            Preset::Paper1 => base,
            Preset::Paper2 => ScenarioConfig {
                scenario: Scenario::GrowingSphere {
                    speed: DEFAULT_GROWTH_SPEED,
                },
                dt: 0.05,
                center: Point::new(0.5, 0.5, 0.5),
                radius: 0.08,
                ..base
            },
        }
    }

    pub fn end_time(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    pub fn level_set(&self) -> Result<LevelSet> {
        match self.scenario {
            Scenario::MovingSphere { velocity } => {
                LevelSet::moving_sphere(self.center, self.radius, velocity)
            }
            Scenario::GrowingSphere { speed } => {
                LevelSet::growing_sphere(self.center, self.radius, speed)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let finite3 = |p: &Point| p.iter().all(|v| v.is_finite());
        if self.n == 0 {
            return bad("mesh.n must be at least 1".into());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("time.dt must be positive, got {}", self.dt));
        }
        if self.steps == 0 {
            return bad("time.steps must be at least 1".into());
        }
        if !self.end_time().is_finite() {
            return bad("time.dt times time.steps overflows".into());
        }
        for (name, a) in [("material.a1", self.a1), ("material.a2", self.a2)] {
            if !(a > 0.0 && a.is_finite()) {
                return bad(format!("{name} must be positive, got {a}"));
            }
        }
        if !finite3(&self.center) {
            return bad("sphere.center must be finite".into());
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return bad(format!("sphere.radius must be positive, got {}", self.radius));
        }
        match self.scenario {
            Scenario::MovingSphere { velocity } if !finite3(&velocity) => {
                return bad("sphere.velocity must be finite".into())
            }
            Scenario::GrowingSphere { speed } if !speed.is_finite() => {
                return bad("sphere.speed must be finite".into())
            }
            Scenario::GrowingSphere { speed } if self.radius + speed * self.end_time() <= 0.0 => {
                return bad("sphere.speed shrinks the sphere to nothing before the end time".into())
            }
            _ => {}
        }
        if !(self.eps_cut > 0.0 && self.eps_cut < 0.5) {
            return bad(format!("mesh.eps_cut must lie in (0, 0.5), got {}", self.eps_cut));
        }
        let b = &self.boundary;
        if ![b.bottom, b.top, b.neumann].iter().flatten().all(|v| v.is_finite()) {
            return bad("boundary values must be finite".into());
        }
        let s = &self.solver;
        if !(s.tol > 0.0 && s.tol < 1.0) {
            return bad(format!("solver.tol must lie in (0, 1), got {}", s.tol));
        }
        if s.maxit == 0 {
            return bad("solver.maxit must be at least 1".into());
        }
        if s.restart == 0 {
            return bad("solver.restart must be at least 1".into());
        }
        if s.amg.max_coarse == 0 || s.amg.max_levels == 0 {
            return bad("solver.amg.max_coarse and max_levels must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    preset: Option<String>,
    scenario: Option<String>,
    mesh: Option<RawMesh>,
    time: Option<RawTime>,
    material: Option<RawMaterial>,
    sphere: Option<RawSphere>,
    boundary: Option<RawBoundary>,
    solver: Option<RawSolver>,
    output: Option<RawOutput>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMesh {
    n: Option<usize>,
    eps_cut: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    dt: Option<f64>,
    steps: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMaterial {
    a1: Option<f64>,
    a2: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSphere {
    center: Option<[f64; 3]>,
    radius: Option<f64>,
    velocity: Option<[f64; 3]>,
    speed: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBoundary {
    bottom: Option<[f64; 3]>,
    top: Option<[f64; 3]>,
    neumann: Option<[f64; 3]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    method: Option<String>,
    tol: Option<f64>,
    maxit: Option<usize>,
    restart: Option<usize>,
    amg: Option<RawAmg>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAmg {
    max_coarse: Option<usize>,
    pre_sweeps: Option<usize>,
    post_sweeps: Option<usize>,
    max_levels: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
    vtk: Option<bool>,
    surface: Option<bool>,
    surface_format: Option<String>,
    matrix_market: Option<bool>,
    sparsity_image: Option<bool>,
    macro_mesh: Option<bool>,
}

fn required<T>(value: Option<T>, base: Option<T>, name: &str) -> Result<T> {
    value
        .or(base)
        .ok_or_else(|| Error::Config(format!("missing required field '{name}'")))
}

/// Parses a TOML scenario file. Fields that are absent are taken from
/// `preset` (or from a `preset = "..."` key in the file, which the argument
/// overrides). Without any preset, the scenario, mesh resolution, time step,
/// step count, coefficients and sphere geometry must all be given.
pub fn parse_config(text: &str, preset: Option<Preset>) -> Result<ScenarioConfig> {
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| Error::Config(e.message().trim().to_string()))?;
    let preset = match (preset, raw.preset.as_deref()) {
        (Some(p), _) => Some(p),
        (None, Some(name)) => Some(name.parse()?),
        (None, None) => None,
    };
    let base = preset.map(ScenarioConfig::preset);
    let b = base.as_ref();

    let scenario_name = match raw.scenario.as_deref() {
        Some(s) => s.to_string(),
        None => b
            .map(|c| c.scenario.name().to_string())
            .ok_or_else(|| Error::Config("missing required field 'scenario'".into()))?,
    };
    let mesh = raw.mesh.unwrap_or_default();
    let time = raw.time.unwrap_or_default();
    let material = raw.material.unwrap_or_default();
    let sphere = raw.sphere.unwrap_or_default();
    let boundary = raw.boundary.unwrap_or_default();
    let solver = raw.solver.unwrap_or_default();
    let amg = solver.amg.unwrap_or_default();
    let output = raw.output.unwrap_or_default();

    let base_velocity = b.and_then(|c| match c.scenario {
        Scenario::MovingSphere { velocity } => Some(velocity),
        Scenario::GrowingSphere { .. } => None,
    });
    let base_speed = b.and_then(|c| match c.scenario {
        Scenario::GrowingSphere { speed } => Some(speed),
        Scenario::MovingSphere { .. } => None,
    });
    let scenario = match scenario_name.as_str() {
        "moving_sphere" => {
            if sphere.speed.is_some() {
                return Err(Error::Config(
                    "sphere.speed applies to the growing_sphere scenario".into(),
                ));
            }
            Scenario::MovingSphere {
                velocity: required(sphere.velocity.map(Point::from), base_velocity, "sphere.velocity")?,
            }
        }
        "growing_sphere" => {
            if sphere.velocity.is_some() {
                return Err(Error::Config(
                    "sphere.velocity applies to the moving_sphere scenario".into(),
                ));
            }
            Scenario::GrowingSphere {
                speed: sphere.speed.or(base_speed).unwrap_or(DEFAULT_GROWTH_SPEED),
            }
        }
        other => {
            return Err(Error::Config(format!(
                "unknown scenario '{other}' (expected moving_sphere or growing_sphere)"
            )))
        }
    };

    let defaults = SolverOptions::default();
    let base_solver = b.map_or(defaults, |c| c.solver);
    let base_boundary = b.map_or_else(BoundaryData::default, |c| c.boundary);
    let base_output = b.map_or_else(OutputOptions::default, |c| c.output.clone());
    let surface = match (output.surface, output.surface_format.as_deref()) {
        (Some(false), _) => None,
        (_, None) => base_output.surface.or(output.surface.map(|_| SurfaceFormat::Vtk)),
        (_, Some("vtk")) => Some(SurfaceFormat::Vtk),
        (_, Some("obj")) => Some(SurfaceFormat::Obj),
        (_, Some(other)) => {
            return Err(Error::Config(format!(
                "unknown output.surface_format '{other}' (expected vtk or obj)"
            )))
        }
    };

    let cfg = ScenarioConfig {
        scenario,
        n: required(mesh.n, b.map(|c| c.n), "mesh.n")?,
        dt: required(time.dt, b.map(|c| c.dt), "time.dt")?,
        steps: required(time.steps, b.map(|c| c.steps), "time.steps")?,
        a1: required(material.a1, b.map(|c| c.a1), "material.a1")?,
        a2: required(material.a2, b.map(|c| c.a2), "material.a2")?,
        center: required(sphere.center.map(Point::from), b.map(|c| c.center), "sphere.center")?,
        radius: required(sphere.radius, b.map(|c| c.radius), "sphere.radius")?,
        eps_cut: mesh.eps_cut.unwrap_or(b.map_or(DEFAULT_EPS_CUT, |c| c.eps_cut)),
        boundary: BoundaryData {
            bottom: boundary.bottom.unwrap_or(base_boundary.bottom),
            top: boundary.top.unwrap_or(base_boundary.top),
            neumann: boundary.neumann.unwrap_or(base_boundary.neumann),
        },
        solver: SolverOptions {
            method: match solver.method.as_deref() {
                Some(m) => parse_method(m)?,
                None => base_solver.method,
            },
            tol: solver.tol.unwrap_or(base_solver.tol),
            maxit: solver.maxit.unwrap_or(base_solver.maxit),
            restart: solver.restart.unwrap_or(base_solver.restart),
            amg: AmgParams {
                max_coarse: amg.max_coarse.unwrap_or(base_solver.amg.max_coarse),
                pre_sweeps: amg.pre_sweeps.unwrap_or(base_solver.amg.pre_sweeps),
                post_sweeps: amg.post_sweeps.unwrap_or(base_solver.amg.post_sweeps),
                max_levels: amg.max_levels.unwrap_or(base_solver.amg.max_levels),
            },
        },
        output: OutputOptions {
            dir: output.dir.or(base_output.dir),
            vtk: output.vtk.unwrap_or(base_output.vtk),
            surface,
            matrix_market: output.matrix_market.unwrap_or(base_output.matrix_market),
            sparsity_image: output.sparsity_image.unwrap_or(base_output.sparsity_image),
            macro_mesh: output.macro_mesh.unwrap_or(base_output.macro_mesh),
        },
    };
    cfg.validate()?;
    Ok(cfg)
}
