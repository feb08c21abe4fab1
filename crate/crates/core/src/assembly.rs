//! Finite element assembly of one implicit Euler step of the ALE heat
//! equation on the hybrid tet/octahedron mesh.
//!
//! Per scalar component the step reads
//! `(M/dt + A - C) u = M u_prev / dt + neumann load`, where `M` is the P1
//! mass matrix, `A` the diffusion matrix with the piecewise constant
//! coefficient and `C` the mesh-velocity convection matrix
//! `C_ij = (w . grad phi_j, phi_i)`. The three components share the scalar
//! operator and are never coupled.

use nalgebra::SMatrix;
use rayon::prelude::*;

use crate::ale::AleState;
use crate::cutting::{HybridMesh, Region, OCTA_SPLIT};
use crate::geometry::{barycentric_gradients, centroid, Point};
use crate::mesh::{BoundaryTag, BoundaryTags, DofLayout};
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

const NC: usize = DofLayout::COMPONENTS;

/// Element matrices of one sub-element, split by term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementMatrices<const N: usize> {
    pub mass: SMatrix<f64, N, N>,
    pub diffusion: SMatrix<f64, N, N>,
    pub convection: SMatrix<f64, N, N>,
}

impl<const N: usize> ElementMatrices<N> {
    fn zeros() -> Self {
        ElementMatrices {
            mass: SMatrix::zeros(),
            diffusion: SMatrix::zeros(),
            convection: SMatrix::zeros(),
        }
    }

    /// `M/dt + A - C`, the scalar implicit Euler element matrix.
    pub fn system(&self, dt: f64) -> SMatrix<f64, N, N> {
        self.mass / dt + self.diffusion - self.convection
    }
}

/// P1 matrices on a tetrahedron. The convection term uses nodal quadrature,
/// which is exact for linear `w` times the constant gradient times the linear
/// test function up to the product of the two linears.
pub fn tet_element_matrices(
    coords: &[Point; 4],
    a: f64,
    w: &[Point; 4],
) -> Result<ElementMatrices<4>> {
    let (grads, vol) =
        barycentric_gradients(coords).ok_or(Error::DegenerateElement(0.0))?;
    if !(vol > 0.0) {
        return Err(Error::DegenerateElement(vol));
    }
    let mut m = ElementMatrices::<4>::zeros();
    for i in 0..4 {
        for j in 0..4 {
            m.mass[(i, j)] = if i == j { vol / 10.0 } else { vol / 20.0 };
            m.diffusion[(i, j)] = a * vol * grads[i].dot(&grads[j]);
            m.convection[(i, j)] = 0.25 * vol * w[i].dot(&grads[j]);
        }
    }
    Ok(m)
}

/// Matrices of an octahedron (apex, four equator nodes, apex) built on its
/// split into eight tetrahedra around the coordinate mean, with the center
/// value replaced by the average of the six nodal values.
pub fn octa_element_matrices(
    coords: &[Point; 6],
    a: f64,
    w: &[Point; 6],
) -> Result<ElementMatrices<6>> {
    let full = octa_unreduced_matrices(coords, a, w)?;
    Ok(ElementMatrices {
        mass: condense(&full.mass),
        diffusion: condense(&full.diffusion),
        convection: condense(&full.convection),
    })
}

/// The 7-node matrices including the auxiliary center node (index 6).
pub fn octa_unreduced_matrices(
    coords: &[Point; 6],
    a: f64,
    w: &[Point; 6],
) -> Result<ElementMatrices<7>> {
    let center = centroid(coords);
    let w_center = centroid(w);
    let p: [Point; 7] = std::array::from_fn(|k| if k < 6 { coords[k] } else { center });
    let wp: [Point; 7] = std::array::from_fn(|k| if k < 6 { w[k] } else { w_center });
    let mut full = ElementMatrices::<7>::zeros();
    for split in OCTA_SPLIT {
        let tet = tet_element_matrices(&split.map(|k| p[k]), a, &split.map(|k| wp[k]))?;
        for (li, gi) in split.iter().enumerate() {
            for (lj, gj) in split.iter().enumerate() {
                full.mass[(*gi, *gj)] += tet.mass[(li, lj)];
                full.diffusion[(*gi, *gj)] += tet.diffusion[(li, lj)];
                full.convection[(*gi, *gj)] += tet.convection[(li, lj)];
            }
        }
    }
    Ok(full)
}

/// `Pᵀ K P` with `P` the 7x6 prolongation whose last row averages the six
/// octahedron nodes. Written entrywise so a symmetric input stays bitwise
/// symmetric.
fn condense(k: &SMatrix<f64, 7, 7>) -> SMatrix<f64, 6, 6> {
    let sixth = 1.0 / 6.0;
    SMatrix::from_fn(|i, j| {
        k[(i, j)] + (k[(i, 6)] + k[(6, j)]) * sixth + k[(6, 6)] * (sixth * sixth)
    })
}

/// Material coefficients inside and outside the immersed object.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Materials {
    pub inside: f64,
    pub outside: f64,
}

impl Materials {
    pub fn uniform(a: f64) -> Self {
        Materials {
            inside: a,
            outside: a,
        }
    }

    pub fn coefficient(&self, region: Region) -> f64 {
        match region {
            Region::Inside => self.inside,
            Region::Outside => self.outside,
        }
    }
}

/// Dirichlet data on the bottom and top faces and a constant traction on the
/// remaining (Neumann) faces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryData {
    pub bottom: [f64; 3],
    pub top: [f64; 3],
    pub neumann: [f64; 3],
}

impl Default for BoundaryData {
    fn default() -> Self {
        BoundaryData {
            bottom: [0.0; 3],
            top: [1.0, 0.0, 0.0],
            neumann: [0.0; 3],
        }
    }
}

impl BoundaryData {
    pub fn value(&self, tag: BoundaryTag, component: usize) -> Option<f64> {
        match tag {
            BoundaryTag::DirichletBottom => Some(self.bottom[component]),
            BoundaryTag::DirichletTop => Some(self.top[component]),
            BoundaryTag::Neumann => None,
        }
    }
}

/// Global scalar operators sharing one sparsity pattern.
#[derive(Debug, Clone)]
pub struct ScalarOperators {
    pub mass: CsrMatrix,
    pub diffusion: CsrMatrix,
    pub convection: CsrMatrix,
}

impl ScalarOperators {
    pub fn system(&self, dt: f64) -> CsrMatrix {
        let mut k = self.mass.clone();
        for (((kv, m), a), c) in k
            .values_mut()
            .iter_mut()
            .zip(self.mass.values())
            .zip(self.diffusion.values())
            .zip(self.convection.values())
        {
            *kv = m / dt + a - c;
        }
        k
    }
}

fn check_finite(values: impl IntoIterator<Item = f64>, what: &'static str) -> Result<()> {
    if values.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

fn scalar_pattern(hm: &HybridMesh) -> CsrMatrix {
    let nn = hm.num_nodes();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); nn];
    let mut connect = |nodes: &[usize]| {
        for i in nodes {
            adjacency[*i].extend_from_slice(nodes);
        }
    };
    hm.sub_tets.iter().for_each(|t| connect(t));
    hm.octas.iter().for_each(|o| connect(o));
    let mut row_ptr = Vec::with_capacity(nn + 1);
    row_ptr.push(0);
    let mut col_idx = Vec::new();
    for mut row in adjacency {
        row.sort_unstable();
        row.dedup();
        col_idx.extend(row);
        row_ptr.push(col_idx.len());
    }
    let nnz = col_idx.len();
    CsrMatrix::new(nn, nn, row_ptr, col_idx, vec![0.0; nnz]).expect("pattern is well formed")
}

fn scatter<const N: usize>(
    ops: &mut ScalarOperators,
    nodes: &[usize; N],
    em: &ElementMatrices<N>,
) {
    for (li, gi) in nodes.iter().enumerate() {
        for (lj, gj) in nodes.iter().enumerate() {
            let k = ops.mass.position(*gi, *gj).expect("entry in pattern");
            ops.mass.values_mut()[k] += em.mass[(li, lj)];
            ops.diffusion.values_mut()[k] += em.diffusion[(li, lj)];
            ops.convection.values_mut()[k] += em.convection[(li, lj)];
        }
    }
}

/// Assembles the scalar mass, diffusion and convection matrices on the
/// current hybrid mesh. Elements are computed in parallel and summed in mesh
/// order.
pub fn assemble_operators(
    hm: &HybridMesh,
    ale: &AleState,
    materials: &Materials,
) -> Result<ScalarOperators> {
    if ale.w_nodes.len() != hm.num_nodes() {
        return Err(Error::SizeMismatch {
            expected: hm.num_nodes(),
            actual: ale.w_nodes.len(),
        });
    }
    check_finite(hm.node_coords.iter().flat_map(|p| p.iter().copied()), "node coordinates")?;
    check_finite(ale.w_nodes.iter().flat_map(|p| p.iter().copied()), "mesh velocity")?;
    check_finite([materials.inside, materials.outside], "material coefficients")?;

    let tets: Vec<ElementMatrices<4>> = (0..hm.sub_tets.len())
        .into_par_iter()
        .map(|t| {
            let nodes = hm.sub_tets[t];
            tet_element_matrices(
                &hm.tet_coords(t),
                materials.coefficient(hm.tet_region[t]),
                &nodes.map(|n| ale.w_nodes[n]),
            )
        })
        .collect::<Result<_>>()?;
    let octas: Vec<ElementMatrices<6>> = (0..hm.octas.len())
        .into_par_iter()
        .map(|o| {
            let nodes = hm.octas[o];
            octa_element_matrices(
                &hm.octa_coords(o),
                materials.coefficient(hm.octa_region[o]),
                &nodes.map(|n| ale.w_nodes[n]),
            )
        })
        .collect::<Result<_>>()?;

    let pattern = scalar_pattern(hm);
    let mut ops = ScalarOperators {
        mass: pattern.clone(),
        diffusion: pattern.clone(),
        convection: pattern,
    };
    for (nodes, em) in hm.sub_tets.iter().zip(&tets) {
        scatter(&mut ops, nodes, em);
    }
    for (nodes, em) in hm.octas.iter().zip(&octas) {
        scatter(&mut ops, nodes, em);
    }
    Ok(ops)
}

/// `K ⊗ I₃` in node-major ordering.
pub fn expand_components(scalar: &CsrMatrix) -> CsrMatrix {
    let n = scalar.nrows();
    let mut row_ptr = Vec::with_capacity(NC * n + 1);
    row_ptr.push(0);
    let mut col_idx = Vec::with_capacity(NC * scalar.nnz());
    let mut values = Vec::with_capacity(NC * scalar.nnz());
    for i in 0..n {
        let (cols, vals) = scalar.row(i);
        for c in 0..NC {
            col_idx.extend(cols.iter().map(|j| NC * j + c));
            values.extend_from_slice(vals);
            row_ptr.push(col_idx.len());
        }
    }
    CsrMatrix::new(NC * n, NC * scalar.ncols(), row_ptr, col_idx, values)
        .expect("expanded pattern is well formed")
}

/// Boundary triangles of the hybrid mesh on the Neumann faces of the cube,
/// as scalar-node triples. Only faces with a zero or unit x or y coordinate
/// qualify; the z faces carry Dirichlet data.
pub fn neumann_faces(mesh: &crate::mesh::MacroMesh) -> Vec<[usize; 3]> {
    let nv = mesh.num_vertices();
    let mut faces = Vec::new();
    for (t, verts) in mesh.macro_tets().iter().enumerate() {
        let edges = mesh.tet_edges()[t];
        let edge_node = |a: usize, b: usize| {
            let slot = crate::mesh::LOCAL_EDGES
                .iter()
                .position(|&(p, q)| (p, q) == (a.min(b), a.max(b)))
                .expect("local edge");
            nv + edges[slot]
        };
        for skip in 0..4 {
            let f: Vec<usize> = (0..4).filter(|l| *l != skip).collect();
            let on_side = (0..2).any(|axis| {
                [0.0, 1.0].iter().any(|plane| {
                    f.iter().all(|l| mesh.vertices()[verts[*l]][axis] == *plane)
                })
            });
            if !on_side {
                continue;
            }
            let (a, b, c) = (f[0], f[1], f[2]);
            let (ab, bc, ac) = (edge_node(a, b), edge_node(b, c), edge_node(a, c));
            let (va, vb, vc) = (verts[a], verts[b], verts[c]);
            faces.extend([[va, ab, ac], [ab, vb, bc], [ac, bc, vc], [ab, bc, ac]]);
        }
    }
    faces
}

/// The block-ordered linear system of one time step.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    pub layout: DofLayout,
    pub k: CsrMatrix,
    pub f: Vec<f64>,
    /// Prescribed value of each Dirichlet DOF.
    pub dirichlet: Vec<Option<f64>>,
    pub operators: ScalarOperators,
}

/// The four logical blocks of a [`BlockSystem`].
#[derive(Debug, Clone)]
pub struct Blocks {
    pub vv: CsrMatrix,
    pub ve: CsrMatrix,
    pub ev: CsrMatrix,
    pub ee: CsrMatrix,
}

impl BlockSystem {
    pub fn num_vertex_dofs(&self) -> usize {
        self.layout.num_vertex_dofs()
    }

    pub fn blocks(&self) -> Blocks {
        let nv = self.num_vertex_dofs();
        let n = self.k.nrows();
        Blocks {
            vv: self.k.submatrix(0..nv, 0..nv),
            ve: self.k.submatrix(0..nv, nv..n),
            ev: self.k.submatrix(nv..n, 0..nv),
            ee: self.k.submatrix(nv..n, nv..n),
        }
    }

    /// Stored entries of `K` that couple two distinct vertex nodes.
    pub fn vertex_coupling_entries(&self) -> Vec<(usize, usize)> {
        let nv = self.num_vertex_dofs();
        let mut out = Vec::new();
        for i in 0..nv {
            for j in self.k.row(i).0 {
                if *j < nv && j / NC != i / NC {
                    out.push((i, *j));
                }
            }
        }
        out
    }

    /// Stored entries of `K` that couple different vector components.
    pub fn component_coupling_entries(&self) -> usize {
        (0..self.k.nrows())
            .map(|i| self.k.row(i).0.iter().filter(|j| *j % NC != i % NC).count())
            .sum()
    }
}

/// Everything needed to assemble one time step.
pub struct StepInputs<'a> {
    pub hm: &'a HybridMesh,
    pub ale: &'a AleState,
    pub u_prev: &'a [f64],
    pub dt: f64,
    pub tags: &'a BoundaryTags,
    pub boundary: &'a BoundaryData,
    pub materials: &'a Materials,
    /// Neumann boundary triangles; empty when the traction is zero.
    pub neumann_faces: &'a [[usize; 3]],
}

/// Assembles `K u = f` and eliminates Dirichlet DOFs symmetrically: their
/// rows and columns are removed, the diagonal set to one and the known
/// couplings moved to the right-hand side.
pub fn assemble_system(inputs: &StepInputs<'_>) -> Result<BlockSystem> {
    let hm = inputs.hm;
    let nn = hm.num_nodes();
    let layout = hm.layout();
    let ndof = NC * nn;
    if inputs.u_prev.len() != ndof {
        return Err(Error::SizeMismatch {
            expected: ndof,
            actual: inputs.u_prev.len(),
        });
    }
    if inputs.tags.tags.len() != nn {
        return Err(Error::SizeMismatch {
            expected: nn,
            actual: inputs.tags.tags.len(),
        });
    }
    if !(inputs.dt > 0.0) {
        return Err(Error::Config(format!("time step must be positive, got {}", inputs.dt)));
    }
    check_finite(inputs.u_prev.iter().copied(), "previous solution")?;

    let ops = assemble_operators(hm, inputs.ale, inputs.materials)?;
    let k_full = expand_components(&ops.system(inputs.dt));

    let mut f = vec![0.0; ndof];
    let mass = expand_components(&ops.mass);
    mass.mul_vec_into(inputs.u_prev, &mut f);
    f.iter_mut().for_each(|v| *v /= inputs.dt);

    if inputs.boundary.neumann != [0.0; 3] {
        for tri in inputs.neumann_faces {
            let [a, b, c] = tri.map(|n| hm.node_coords[n]);
            let area = 0.5 * (b - a).cross(&(c - a)).norm();
            for node in tri {
                for comp in 0..NC {
                    f[NC * node + comp] += inputs.boundary.neumann[comp] * area / 3.0;
                }
            }
        }
    }

    let dirichlet: Vec<Option<f64>> = (0..ndof)
        .map(|dof| inputs.boundary.value(inputs.tags.tags[dof / NC], dof % NC))
        .collect();

    let mut row_ptr = Vec::with_capacity(ndof + 1);
    row_ptr.push(0);
    let mut col_idx = Vec::with_capacity(k_full.nnz());
    let mut values = Vec::with_capacity(k_full.nnz());
    for i in 0..ndof {
        if let Some(g) = dirichlet[i] {
            col_idx.push(i);
            values.push(1.0);
            f[i] = g;
        } else {
            let (cols, vals) = k_full.row(i);
            for (j, v) in cols.iter().zip(vals) {
                match dirichlet[*j] {
                    Some(g) => f[i] -= v * g,
                    None => {
                        col_idx.push(*j);
                        values.push(*v);
                    }
                }
            }
        }
        row_ptr.push(col_idx.len());
    }
    let k = CsrMatrix::new(ndof, ndof, row_ptr, col_idx, values)?;
    check_finite(f.iter().copied(), "right-hand side")?;

    Ok(BlockSystem {
        layout,
        k,
        f,
        dirichlet,
        operators: ops,
    })
}

/// Nodal interpolation of a vector field in DOF layout.
pub fn interpolate(node_coords: &[Point], field: impl Fn(&Point) -> [f64; 3]) -> Vec<f64> {
    node_coords.iter().flat_map(field).collect()
}
