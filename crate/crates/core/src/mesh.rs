//! The fixed reference macro mesh of the unit cube.
//!
//! The cube is divided into `n³` cells and each cell is split into six
//! tetrahedra around its main diagonal (Kuhn subdivision), which makes the
//! split conforming across cells. Every macro edge carries one extra scalar
//! node, so the scalar node set is "vertices, then edges".

use std::collections::HashMap;

use crate::geometry::{signed_volume, Point};
use crate::{Error, Result};

/// Local vertex pairs of the six edges of a tetrahedron, in the order used by
/// [`MacroMesh::tet_edges`].
pub const LOCAL_EDGES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Fixed reference macro-tetrahedral mesh of `[0, 1]³`.
#[derive(Debug, Clone)]
pub struct MacroMesh {
    resolution: usize,
    vertices: Vec<Point>,
    macro_tets: Vec<[usize; 4]>,
    edges: Vec<[usize; 2]>,
    tet_edges: Vec<[usize; 6]>,
}

impl MacroMesh {
    /// Builds the Kuhn-split mesh with `n` cells per axis.
    pub fn build(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidResolution(n));
        }
        let np = n + 1;
        let index = |i: usize, j: usize, k: usize| i + np * (j + np * k);
        let h = 1.0 / n as f64;

        let mut vertices = Vec::with_capacity(np * np * np);
        for k in 0..np {
            for j in 0..np {
                for i in 0..np {
                    vertices.push(Point::new(i as f64 * h, j as f64 * h, k as f64 * h));
                }
            }
        }

        // Each permutation of the axes gives one monotone lattice path from
        // the cell's low corner to its high corner.
        const PERMUTATIONS: [[usize; 3]; 6] = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let mut macro_tets = Vec::with_capacity(6 * n * n * n);
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    for perm in PERMUTATIONS {
                        let mut c = [i, j, k];
                        let mut tet = [index(i, j, k), 0, 0, 0];
                        for (slot, axis) in perm.iter().enumerate() {
                            c[*axis] += 1;
                            tet[slot + 1] = index(c[0], c[1], c[2]);
                        }
                        let vol = signed_volume(
                            &vertices[tet[0]],
                            &vertices[tet[1]],
                            &vertices[tet[2]],
                            &vertices[tet[3]],
                        );
                        if vol < 0.0 {
                            tet.swap(2, 3);
                        }
                        macro_tets.push(tet);
                    }
                }
            }
        }

        let mut lookup: HashMap<(usize, usize), usize> = HashMap::with_capacity(7 * n * n * n);
        let mut edges = Vec::new();
        let mut tet_edges = Vec::with_capacity(macro_tets.len());
        for tet in &macro_tets {
            let mut local = [0usize; 6];
            for (slot, (a, b)) in LOCAL_EDGES.iter().enumerate() {
                let (p, q) = (tet[*a], tet[*b]);
                let key = (p.min(q), p.max(q));
                local[slot] = *lookup.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edges.len() - 1
                });
            }
            tet_edges.push(local);
        }

        Ok(MacroMesh {
            resolution: n,
            vertices,
            macro_tets,
            edges,
            tet_edges,
        })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Macro cell edge length `1/n`.
    pub fn h(&self) -> f64 {
        1.0 / self.resolution as f64
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn macro_tets(&self) -> &[[usize; 4]] {
        &self.macro_tets
    }

    /// Global edges as sorted vertex pairs.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Per macro tet, the global edge index of each entry of [`LOCAL_EDGES`].
    pub fn tet_edges(&self) -> &[[usize; 6]] {
        &self.tet_edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_tets(&self) -> usize {
        self.macro_tets.len()
    }

    /// Reference position of scalar node `node` (vertex, or edge midpoint).
    pub fn reference_position(&self, node: usize) -> Point {
        let nv = self.vertices.len();
        if node < nv {
            self.vertices[node]
        } else {
            let [p, q] = self.edges[node - nv];
            0.5 * (self.vertices[p] + self.vertices[q])
        }
    }

    pub fn edge_endpoints(&self, edge: usize) -> (Point, Point) {
        let [p, q] = self.edges[edge];
        (self.vertices[p], self.vertices[q])
    }

    pub fn tet_volume(&self, tet: usize) -> f64 {
        let t = self.macro_tets[tet];
        signed_volume(
            &self.vertices[t[0]],
            &self.vertices[t[1]],
            &self.vertices[t[2]],
            &self.vertices[t[3]],
        )
    }

    pub fn dof_layout(&self) -> DofLayout {
        DofLayout {
            num_vertices: self.num_vertices(),
            num_edges: self.num_edges(),
        }
    }

    pub fn boundary_tags(&self) -> BoundaryTags {
        let tags = (0..self.num_vertices() + self.num_edges())
            .map(|node| BoundaryTag::classify(&self.reference_position(node)))
            .collect();
        BoundaryTags { tags }
    }
}

/// Global numbering: vertex nodes `0..V`, edge nodes `V..V+E`, and three
/// consecutive vector components per scalar node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofLayout {
    pub num_vertices: usize,
    pub num_edges: usize,
}

impl DofLayout {
    pub const COMPONENTS: usize = 3;

    pub fn num_nodes(&self) -> usize {
        self.num_vertices + self.num_edges
    }

    pub fn num_dofs(&self) -> usize {
        Self::COMPONENTS * self.num_nodes()
    }

    /// Number of DOFs in the vertex block `u_V`.
    pub fn num_vertex_dofs(&self) -> usize {
        Self::COMPONENTS * self.num_vertices
    }

    pub fn edge_node(&self, edge: usize) -> usize {
        self.num_vertices + edge
    }

    pub fn dof(&self, node: usize, component: usize) -> usize {
        Self::COMPONENTS * node + component
    }

    pub fn is_vertex_node(&self, node: usize) -> bool {
        node < self.num_vertices
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryTag {
    DirichletBottom,
    DirichletTop,
    Neumann,
}

impl BoundaryTag {
    const PLANE_TOL: f64 = 1e-12;

    pub fn classify(x: &Point) -> Self {
        if x.z.abs() <= Self::PLANE_TOL {
            BoundaryTag::DirichletBottom
        } else if (x.z - 1.0).abs() <= Self::PLANE_TOL {
            BoundaryTag::DirichletTop
        } else {
            BoundaryTag::Neumann
        }
    }

    pub fn is_dirichlet(self) -> bool {
        self != BoundaryTag::Neumann
    }
}

/// Boundary tag of every scalar node, indexed like [`DofLayout`].
#[derive(Debug, Clone)]
pub struct BoundaryTags {
    pub tags: Vec<BoundaryTag>,
}

impl BoundaryTags {
    pub fn count(&self, tag: BoundaryTag) -> usize {
        self.tags.iter().filter(|t| **t == tag).count()
    }

    /// Tags with every node forced to Neumann (no Dirichlet boundary).
    pub fn all_neumann(num_nodes: usize) -> Self {
        BoundaryTags {
            tags: vec![BoundaryTag::Neumann; num_nodes],
        }
    }
}
