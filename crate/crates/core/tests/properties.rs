mod common;

use std::fs;

use macro_ale::ale::{advance_ale, transfer_previous_solution};
use macro_ale::assembly::{assemble_system, BoundaryData, Materials, StepInputs};
use macro_ale::cutting::{
    compute_cut, reconstruct_surface, subdivide, CutOptions, UnresolvedPolicy,
};
use macro_ale::driver::{run_simulation, Preset, Simulation, CSV_HEADER};
use macro_ale::geometry::signed_volume;
use macro_ale::io::{matrix_market, vtk};
use macro_ale::mesh::MacroMesh;
use macro_ale::solvers::{solve_system, Method, SolverOptions};
use macro_ale::Error;

use common::{dense_solve_by_component, scenario};

fn csv_without_timings(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string())
        .collect()
}

#[test]
fn replay_is_bit_identical() {
    let mut runs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = scenario(Preset::Paper1, 4);
        cfg.solver.method = Method::Gmres;
        cfg.output.dir = Some(dir.path().to_path_buf());
        let summary = run_simulation(&cfg).unwrap();
        let csv = fs::read_to_string(dir.path().join("solver.csv")).unwrap();
        let vtk = fs::read(dir.path().join("solution_0009.vtk")).unwrap();
        runs.push((summary.solution, csv_without_timings(&csv), vtk));
    }
    assert_eq!(runs[0].1[0], CSV_HEADER.rsplit_once(',').unwrap().0);
    assert_eq!(runs[0].1.len(), 10);
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn worker_count_does_not_change_results() {
    let mut cfg = scenario(Preset::Paper2, 10);
    cfg.steps = 2;
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_simulation(&cfg).unwrap())
    };
    let one = run(1);
    let four = run(4);
    assert_eq!(one.solution, four.solution);
    let its = |s: &macro_ale::driver::Summary| s.reports.iter().map(|r| r.iterations).collect::<Vec<_>>();
    assert_eq!(its(&one), its(&four));
}

#[test]
fn exported_cells_tile_the_cube_every_step() {
    for preset in [Preset::Paper1, Preset::Paper2] {
        let mut sim = Simulation::new(&scenario(preset, 4)).unwrap();
        while !sim.is_finished() {
            let prepared = sim.prepare_step().unwrap();
            let (pts, cells) = vtk::export_geometry(&prepared.hm);
            assert_eq!(pts.len(), prepared.hm.num_nodes() + prepared.hm.octas.len());
            let mut total = 0.0;
            for c in &cells {
                let v = signed_volume(&pts[c[0]], &pts[c[1]], &pts[c[2]], &pts[c[3]]);
                assert!(v > 0.0);
                total += v;
            }
            assert!((total - 1.0).abs() <= 1e-10, "{preset:?} step {}: {total}", prepared.step);
            let zeros = vec![0.0; sim.solution().len()];
            sim.commit(prepared, zeros).unwrap();
        }
    }
}

#[test]
fn output_files_cover_every_step() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = scenario(Preset::Paper2, 2);
    cfg.steps = 3;
    cfg.output.dir = Some(dir.path().to_path_buf());
    run_simulation(&cfg).unwrap();
    let mut names: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "solution_0001.vtk",
            "solution_0002.vtk",
            "solution_0003.vtk",
            "solver.csv",
            "surface_0001.vtk",
            "surface_0002.vtk",
            "surface_0003.vtk",
        ]
    );
    let text = fs::read_to_string(dir.path().join("solution_0002.vtk")).unwrap();
    let nodes = 5usize.pow(3);
    let cells = 6 * 8;
    assert!(text.contains(&format!("POINTS {} double", nodes + cells)));
    assert!(text.contains(&format!("CELLS {} {}", 12 * cells, 60 * cells)));
    assert!(text.contains(&format!("POINT_DATA {}", nodes + cells)));
}

#[test]
fn constant_field_survives_a_moving_step() {
    let cfg = scenario(Preset::Paper1, 4);
    let mesh = MacroMesh::build(4).unwrap();
    let ls = cfg.level_set().unwrap();
    let prev = compute_cut(&mesh, &ls, 0.125, CutOptions::default()).unwrap();
    let curr = compute_cut(&mesh, &ls, 0.1875, CutOptions::default()).unwrap();
    let hm = subdivide(&mesh, &curr, &ls).unwrap();
    let ale = advance_ale(&prev, &curr, &mesh, cfg.dt).unwrap();
    assert!(!ale.is_at_rest());

    let c = [0.7, -1.3, 2.0];
    let u0: Vec<f64> = (0..hm.layout().num_dofs()).map(|d| c[d % 3]).collect();
    let u_prev = transfer_previous_solution(&u0, u0.len()).unwrap();
    assert_eq!(u_prev, u0);
    let boundary = BoundaryData { bottom: c, top: c, neumann: [0.0; 3] };
    let sys = assemble_system(&StepInputs {
        hm: &hm,
        ale: &ale,
        u_prev: &u_prev,
        dt: cfg.dt,
        tags: &mesh.boundary_tags(),
        boundary: &boundary,
        materials: &Materials { inside: cfg.a1, outside: cfg.a2 },
        neumann_faces: &[],
    })
    .unwrap();
    let u = dense_solve_by_component(&sys.k, &sys.f);
    let err = u.iter().zip(&u0).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(err < 1e-9, "{err}");
}

#[test]
fn mass_matrix_sums_to_domain_volume() {
    let mut sim = Simulation::new(&scenario(Preset::Paper1, 4)).unwrap();
    let prepared = sim.prepare_step().unwrap();
    let total: f64 = prepared.system.operators.mass.values().iter().sum();
    assert!((total - 1.0).abs() < 1e-12);
    let zeros = vec![0.0; sim.solution().len()];
    sim.commit(prepared, zeros).unwrap();
}

#[test]
fn strict_policy_reports_double_crossings() {
    // At n = 4 the initial sphere lies inside one cube and crosses its
    // main diagonal twice.
    let cfg = scenario(Preset::Paper1, 4);
    match Simulation::with_policy(&cfg, UnresolvedPolicy::Error) {
        Err(Error::UnresolvedEdge { time, .. }) => assert_eq!(time, 0.0),
        other => panic!("expected an unresolved edge, got {:?}", other.err()),
    }
    let sim = Simulation::new(&cfg).unwrap();
    assert!(!sim.current_cut().unresolved_edges.is_empty());
}

#[test]
fn growing_sphere_leaves_the_cube() {
    let cfg = scenario(Preset::Paper2, 4);
    let mesh = MacroMesh::build(4).unwrap();
    let ls = cfg.level_set().unwrap();
    let early = compute_cut(&mesh, &ls, 0.1, CutOptions::default()).unwrap();
    assert!(reconstruct_surface(&mesh, &early).unwrap().is_closed());
    let late = compute_cut(&mesh, &ls, cfg.end_time(), CutOptions::default()).unwrap();
    let surface = reconstruct_surface(&mesh, &late).unwrap();
    assert!(!surface.is_empty());
    assert!(!surface.is_closed());
    let summary = run_simulation(&cfg).unwrap();
    assert_eq!(summary.reports.len(), 9);
}

#[test]
fn assembled_matrix_survives_matrix_market() {
    let mut sim = Simulation::new(&scenario(Preset::Paper1, 2)).unwrap();
    let prepared = sim.prepare_step().unwrap();
    let mut buf = Vec::new();
    matrix_market::write(&mut buf, &prepared.system.k, "step 1").unwrap();
    let back = matrix_market::read(std::str::from_utf8(&buf).unwrap()).unwrap();
    assert_eq!(back, prepared.system.k);
    let (u, report) = solve_system(&prepared.system, &SolverOptions::default()).unwrap();
    assert!(report.rel_residual <= 1e-9);
    sim.commit(prepared, u).unwrap();
}

#[test]
fn step_errors_name_the_step() {
    let mut cfg = scenario(Preset::Paper1, 2);
    cfg.solver.maxit = 1;
    cfg.solver.tol = 1e-14;
    match run_simulation(&cfg) {
        Err(Error::Step { step, source }) => {
            assert_eq!(step, 1);
            assert!(matches!(*source, Error::NotConverged { .. }), "{source}");
        }
        other => panic!("expected a step error, got {:?}", other.map(|s| s.reports)),
    }
}
