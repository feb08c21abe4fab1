//! Time loop: cut, subdivide, move the mesh, assemble, solve, write output.

mod config;

pub use config::{
    parse_config, parse_method, OutputOptions, Preset, Scenario, ScenarioConfig, SurfaceFormat,
    DEFAULT_GROWTH_SPEED,
};

use std::fs;
use std::io::Write;
use std::path::Path;

use log::{info, warn};

use crate::ale::{advance_ale, transfer_previous_solution, AleState};
use crate::assembly::{assemble_system, neumann_faces, BlockSystem, Materials, StepInputs};
use crate::cutting::{
    compute_cut, reconstruct_surface, subdivide, CutOptions, CutState, HybridMesh, TriangleSurface,
    UnresolvedPolicy,
};
use crate::io::{self, write_file};
use crate::level_set::LevelSet;
use crate::mesh::{BoundaryTags, MacroMesh};
use crate::solvers::{solve_system, SolveReport};
use crate::{Error, Result};

pub const CSV_HEADER: &str = "step,time,method,iterations,rel_residual,seconds";

/// Everything assembled for one step before the linear solve.
#[derive(Debug, Clone)]
pub struct PreparedStep {
    pub step: usize,
    pub time: f64,
    pub cut: CutState,
    pub hm: HybridMesh,
    pub ale: AleState,
    pub system: BlockSystem,
}

#[derive(Debug, Clone)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    pub cut_edges: usize,
    pub unresolved_edges: usize,
    pub max_speed: f64,
    pub report: SolveReport,
}

#[derive(Debug, Clone)]
pub struct Summary {
    pub steps: Vec<StepRecord>,
    pub reports: Vec<SolveReport>,
    pub solution: Vec<f64>,
    pub end_time: f64,
}

/// Stepping state of a scenario. `prepare_step`, a solve and `commit`
/// together make one implicit Euler step; [`Simulation::step`] does all three.
pub struct Simulation {
    cfg: ScenarioConfig,
    mesh: MacroMesh,
    level_set: LevelSet,
    tags: BoundaryTags,
    neumann_faces: Vec<[usize; 3]>,
    materials: Materials,
    cut_options: CutOptions,
    prev_cut: CutState,
    u: Vec<f64>,
    step: usize,
}

impl Simulation {
    pub fn new(cfg: &ScenarioConfig) -> Result<Self> {
        Self::with_policy(cfg, UnresolvedPolicy::Midpoint)
    }

    /// Like [`Simulation::new`] but with an explicit policy for edges that
    /// cross the interface twice.
    pub fn with_policy(cfg: &ScenarioConfig, policy: UnresolvedPolicy) -> Result<Self> {
        cfg.validate()?;
        let mesh = MacroMesh::build(cfg.n)?;
        let level_set = cfg.level_set()?;
        let cut_options = CutOptions {
            eps_cut: cfg.eps_cut,
            on_unresolved: policy,
        };
        let prev_cut = cut_at(&mesh, &level_set, 0.0, cut_options)?;
        let tags = mesh.boundary_tags();
        let neumann_faces = if cfg.boundary.neumann == [0.0; 3] {
            Vec::new()
        } else {
            neumann_faces(&mesh)
        };
        let ndof = mesh.dof_layout().num_dofs();
        Ok(Simulation {
            cfg: cfg.clone(),
            tags,
            neumann_faces,
            materials: Materials {
                inside: cfg.a1,
                outside: cfg.a2,
            },
            cut_options,
            prev_cut,
            u: vec![0.0; ndof],
            step: 0,
            level_set,
            mesh,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn mesh(&self) -> &MacroMesh {
        &self.mesh
    }

    pub fn level_set(&self) -> &LevelSet {
        &self.level_set
    }

    /// Number of completed steps.
    pub fn steps_done(&self) -> usize {
        self.step
    }

    pub fn is_finished(&self) -> bool {
        self.step >= self.cfg.steps
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.cfg.dt
    }

    pub fn solution(&self) -> &[f64] {
        &self.u
    }

    pub fn current_cut(&self) -> &CutState {
        &self.prev_cut
    }

    pub fn prepare_step(&self) -> Result<PreparedStep> {
        let step = self.step + 1;
        self.prepare(step).map_err(|e| Error::Step {
            step,
            source: Box::new(e),
        })
    }

    fn prepare(&self, step: usize) -> Result<PreparedStep> {
        let time = step as f64 * self.cfg.dt;
        let cut = cut_at(&self.mesh, &self.level_set, time, self.cut_options)?;
        let hm = subdivide(&self.mesh, &cut, &self.level_set)?;
        let ale = advance_ale(&self.prev_cut, &cut, &self.mesh, self.cfg.dt)?;
        let u_prev = transfer_previous_solution(&self.u, self.u.len())?;
        let system = assemble_system(&StepInputs {
            hm: &hm,
            ale: &ale,
            u_prev: &u_prev,
            dt: self.cfg.dt,
            tags: &self.tags,
            boundary: &self.cfg.boundary,
            materials: &self.materials,
            neumann_faces: &self.neumann_faces,
        })?;
        Ok(PreparedStep {
            step,
            time,
            cut,
            hm,
            ale,
            system,
        })
    }

    /// Accepts `u` as the solution of `prepared` and advances the clock.
    pub fn commit(&mut self, prepared: PreparedStep, u: Vec<f64>) -> Result<()> {
        if prepared.step != self.step + 1 {
            return Err(Error::Config(format!(
                "step {} committed after step {}",
                prepared.step, self.step
            )));
        }
        if u.len() != self.u.len() {
            return Err(Error::SizeMismatch {
                expected: self.u.len(),
                actual: u.len(),
            });
        }
        self.u = u;
        self.prev_cut = prepared.cut;
        self.step = prepared.step;
        Ok(())
    }

    /// Runs one full step and returns what was assembled with its solution
    /// and solver report.
    pub fn step(&mut self) -> Result<(PreparedStep, Vec<f64>, SolveReport)> {
        let prepared = self.prepare_step()?;
        let (u, report) = solve_system(&prepared.system, &self.cfg.solver).map_err(|e| {
            Error::Step {
                step: prepared.step,
                source: Box::new(e),
            }
        })?;
        self.commit(prepared.clone(), u.clone())?;
        Ok((prepared, u, report))
    }
}

fn cut_at(mesh: &MacroMesh, ls: &LevelSet, t: f64, opts: CutOptions) -> Result<CutState> {
    let cut = compute_cut(mesh, ls, t, opts)?;
    if !cut.unresolved_edges.is_empty() {
        warn!(
            "t = {t}: {} edges cross the interface twice and stay uncut (first: edge {})",
            cut.unresolved_edges.len(),
            cut.unresolved_edges[0]
        );
    }
    Ok(cut)
}

/// One CSV row. The time column is formatted from `step·dt` so that replays
/// produce identical text.
pub fn csv_row(step: usize, time: f64, report: &SolveReport) -> String {
    format!(
        "{},{},{},{},{:e},{:.6}",
        step, time, report.method, report.iterations, report.rel_residual, report.seconds
    )
}

/// Runs every step of `cfg`, writing artifacts when an output directory is
/// configured.
pub fn run_simulation(cfg: &ScenarioConfig) -> Result<Summary> {
    let mut sim = Simulation::new(cfg)?;
    let out = cfg.output.dir.as_deref();
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        if cfg.output.macro_mesh {
            write_file(&dir.join("macro_mesh.vtk"), |w| {
                io::vtk::write_macro_mesh(w, sim.mesh())
            })?;
        }
        write_csv(dir, &csv)?;
    }
    info!(
        "{} at n = {}: {} steps of dt = {}, solver {}",
        cfg.scenario.name(),
        cfg.n,
        cfg.steps,
        cfg.dt,
        cfg.solver.method
    );

    let mut records = Vec::with_capacity(cfg.steps);
    while !sim.is_finished() {
        let (prepared, u, report) = sim.step()?;
        let record = StepRecord {
            step: prepared.step,
            time: prepared.time,
            cut_edges: prepared.cut.num_cut_edges(),
            unresolved_edges: prepared.cut.unresolved_edges.len(),
            max_speed: prepared.ale.max_speed(),
            report,
        };
        info!(
            "step {} t = {}: {} iterations, residual {:e}, {:.3} s",
            record.step, record.time, report.iterations, report.rel_residual, report.seconds
        );
        csv.push_str(&csv_row(record.step, record.time, &report));
        csv.push('\n');
        if let Some(dir) = out {
            write_step_files(cfg, &sim, dir, &prepared, &u).map_err(|e| Error::Step {
                step: prepared.step,
                source: Box::new(e),
            })?;
            write_csv(dir, &csv)?;
        }
        records.push(record);
    }
    Ok(Summary {
        reports: records.iter().map(|r| r.report).collect(),
        steps: records,
        solution: sim.solution().to_vec(),
        end_time: cfg.end_time(),
    })
}

fn write_csv(dir: &Path, csv: &str) -> Result<()> {
    write_file(&dir.join("solver.csv"), |w| w.write_all(csv.as_bytes()))
}

fn write_step_files(
    cfg: &ScenarioConfig,
    sim: &Simulation,
    dir: &Path,
    prepared: &PreparedStep,
    u: &[f64],
) -> Result<()> {
    let k = prepared.step;
    let title = format!("{} step {} t={}", cfg.scenario.name(), k, prepared.time);
    if cfg.output.vtk {
        write_file(&dir.join(format!("solution_{k:04}.vtk")), |w| {
            io::vtk::write_hybrid_mesh(w, &prepared.hm, Some(u), &title)
        })?;
    }
    if let Some(format) = cfg.output.surface {
        let surface: TriangleSurface = reconstruct_surface(sim.mesh(), &prepared.cut)?;
        match format {
            SurfaceFormat::Vtk => write_file(&dir.join(format!("surface_{k:04}.vtk")), |w| {
                io::surface::write_vtk(w, &surface, &title)
            })?,
            SurfaceFormat::Obj => write_file(&dir.join(format!("surface_{k:04}.obj")), |w| {
                io::surface::write_obj(w, &surface)
            })?,
        }
    }
    if cfg.output.matrix_market {
        write_file(&dir.join(format!("matrix_{k:04}.mtx")), |w| {
            io::matrix_market::write(w, &prepared.system.k, &title)
        })?;
    }
    if cfg.output.sparsity_image {
        write_file(&dir.join(format!("sparsity_{k:04}.pgm")), |w| {
            io::pgm::write_pattern(w, &prepared.system.k, 1024)
        })?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    fn small() -> ScenarioConfig {
        let mut cfg = ScenarioConfig::preset(Preset::Paper1);
        cfg.n = 2;
        cfg.steps = 2;
        cfg
    }

    #[test]
    fn steps_cover_the_time_grid() {
        let summary = run_simulation(&small()).unwrap();
        let times: Vec<f64> = summary.steps.iter().map(|s| s.time).collect();
        assert_eq!(times, vec![0.0625, 0.125]);
        assert!(summary.reports.iter().all(|r| r.rel_residual <= 1e-9));
    }

    #[test]
    fn zero_data_stays_zero() {
        let mut cfg = small();
        cfg.steps = 1;
        cfg.a1 = 1.0;
        cfg.scenario = Scenario::MovingSphere { velocity: Point::zeros() };
        cfg.boundary.top = [0.0; 3];
        let summary = run_simulation(&cfg).unwrap();
        assert!(summary.solution.iter().all(|&v| v == 0.0));
        assert_eq!(summary.reports[0].iterations, 0);
    }

    #[test]
    fn commit_rejects_out_of_order_steps() {
        let mut sim = Simulation::new(&small()).unwrap();
        let prepared = sim.prepare_step().unwrap();
        let mut wrong = prepared.clone();
        wrong.step = 2;
        let u = sim.solution().to_vec();
        assert!(sim.commit(wrong, u.clone()).is_err());
        assert!(sim.commit(prepared, u[1..].to_vec()).is_err());
    }

    #[test]
    fn csv_row_format() {
        let report = SolveReport {
            method: crate::solvers::Method::Gmres,
            iterations: 7,
            rel_residual: 2.5e-10,
            tol: 1e-9,
            seconds: 0.25,
        };
        assert_eq!(csv_row(3, 0.1875, &report), "3,0.1875,GMRES,7,2.5e-10,0.250000");
    }
}
