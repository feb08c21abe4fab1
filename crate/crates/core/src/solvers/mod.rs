//! Linear solvers for the block system: AMG-preconditioned CG and GMRES on
//! the whole system, and the segregated Schur complement method.

mod amg;
mod krylov;
mod segregated;

use std::fmt;
use std::time::Instant;

pub use amg::{build_amg, AmgHierarchy, AmgParams, CoarseSolver};
pub use krylov::{solve_gmres, solve_pcg, IdentityPreconditioner, Preconditioner};
pub use segregated::{invert_block3, solve_segregated, SchurComplement};

use crate::assembly::BlockSystem;
use crate::sparse::{norm2, CsrMatrix};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Cg,
    Gmres,
    SchurCg,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::Cg => "CG",
            Method::Gmres => "GMRES",
            Method::SchurCg => "SCHUR_CG",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub method: Method,
    pub iterations: usize,
    /// `‖f − K u‖ / ‖f‖` of the returned solution.
    pub rel_residual: f64,
    pub tol: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub method: Method,
    pub tol: f64,
    pub maxit: usize,
    pub restart: usize,
    pub amg: AmgParams,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            method: Method::Cg,
            tol: 1e-9,
            maxit: 1000,
            restart: 30,
            amg: AmgParams::default(),
        }
    }
}

pub fn relative_residual(k: &CsrMatrix, f: &[f64], u: &[f64]) -> f64 {
    let ku = k.mul_vec(u);
    let r: Vec<f64> = f.iter().zip(&ku).map(|(a, b)| a - b).collect();
    let nf = norm2(f);
    if nf == 0.0 {
        norm2(&r)
    } else {
        norm2(&r) / nf
    }
}

/// Solves an assembled step with the configured method, including the AMG
/// setup in the reported time.
pub fn solve_system(sys: &BlockSystem, opts: &SolverOptions) -> Result<(Vec<f64>, SolveReport)> {
    let start = Instant::now();
    let (u, mut report) = match opts.method {
        Method::Cg => {
            let amg = build_amg(&sys.k, opts.amg)?;
            solve_pcg(&sys.k, &sys.f, &amg, opts.tol, opts.maxit)?
        }
        Method::Gmres => {
            let amg = build_amg(&sys.k, opts.amg)?;
            solve_gmres(&sys.k, &sys.f, &amg, opts.tol, opts.maxit, opts.restart)?
        }
        Method::SchurCg => solve_segregated(
            &sys.k,
            sys.num_vertex_dofs(),
            &sys.f,
            opts.tol,
            opts.maxit,
            opts.amg,
        )?,
    };
    report.seconds = start.elapsed().as_secs_f64();
    Ok((u, report))
}
