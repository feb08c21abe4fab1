//! Edge-local ALE displacement and mesh velocity.
//!
//! Macro vertices never move. The node on edge `(p, q)` sits at
//! `p + s (q - p)`, so its displacement from the midpoint is
//! `(s - 1/2)(q - p)` and its velocity is the backward difference of that
//! displacement over one time step.

use crate::cutting::CutState;
use crate::geometry::Point;
use crate::mesh::MacroMesh;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct AleState {
    pub d_prev: Vec<Point>,
    pub d_curr: Vec<Point>,
    pub w_nodes: Vec<Point>,
    pub dt: f64,
}

fn displacement(mesh: &MacroMesh, cut: &CutState) -> Vec<Point> {
    let nv = mesh.num_vertices();
    let mut d = vec![Point::zeros(); nv + mesh.num_edges()];
    for (e, s) in cut.edge_param.iter().enumerate() {
        let (p, q) = mesh.edge_endpoints(e);
        d[nv + e] = (q - p) * (s - 0.5);
    }
    d
}

pub fn advance_ale(prev: &CutState, curr: &CutState, mesh: &MacroMesh, dt: f64) -> Result<AleState> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Config(format!("time step must be positive, got {dt}")));
    }
    for cut in [prev, curr] {
        if cut.edge_param.len() != mesh.num_edges() {
            return Err(Error::SizeMismatch {
                expected: mesh.num_edges(),
                actual: cut.edge_param.len(),
            });
        }
    }
    let d_prev = displacement(mesh, prev);
    let d_curr = displacement(mesh, curr);
    let w_nodes = d_curr
        .iter()
        .zip(&d_prev)
        .map(|(c, p)| (c - p) / dt)
        .collect();
    Ok(AleState {
        d_prev,
        d_curr,
        w_nodes,
        dt,
    })
}

impl AleState {
    /// All-zero state for a mesh that does not move.
    pub fn at_rest(mesh: &MacroMesh, dt: f64) -> Self {
        let nn = mesh.num_vertices() + mesh.num_edges();
        AleState {
            d_prev: vec![Point::zeros(); nn],
            d_curr: vec![Point::zeros(); nn],
            w_nodes: vec![Point::zeros(); nn],
            dt,
        }
    }

    pub fn max_speed(&self) -> f64 {
        self.w_nodes.iter().map(|w| w.norm()).fold(0.0, f64::max)
    }

    pub fn is_at_rest(&self) -> bool {
        self.w_nodes.iter().all(|w| *w == Point::zeros())
    }
}

/// Carries the previous solution to the current configuration. Nodal values
/// travel with their nodes, so the coefficients are unchanged.
pub fn transfer_previous_solution(u_prev: &[f64], num_dofs: usize) -> Result<Vec<f64>> {
    if u_prev.len() != num_dofs {
        return Err(Error::SizeMismatch {
            expected: num_dofs,
            actual: u_prev.len(),
        });
    }
    Ok(u_prev.to_vec())
}
