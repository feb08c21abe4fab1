//! Interface capturing on the macro mesh: per-edge intersections, the hybrid
//! 4-tet + 1-octahedron subdivision, and the reconstructed interface surface.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::geometry::{centroid, signed_volume, Point};
use crate::level_set::LevelSet;
use crate::mesh::{DofLayout, MacroMesh};
use crate::{Error, Result};

/// Level-set values within this distance of zero at a macro vertex count as
/// inside.
pub const SIDE_TIE_TOL: f64 = 1e-12;

/// Bisection stops once the bracket in the edge parameter is this small.
pub const BISECTION_TOL: f64 = 1e-12;

pub const DEFAULT_EPS_CUT: f64 = 0.05;

/// What to do with an edge whose endpoints lie on the same side while the
/// edge itself dips through the interface (a double crossing).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnresolvedPolicy {
    /// Report [`Error::UnresolvedEdge`].
    Error,
    /// Leave the edge uncut with its node at the midpoint and record it in
    /// [`CutState::unresolved_edges`].
    #[default]
    Midpoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutOptions {
    pub eps_cut: f64,
    pub on_unresolved: UnresolvedPolicy,
}

impl Default for CutOptions {
    fn default() -> Self {
        CutOptions {
            eps_cut: DEFAULT_EPS_CUT,
            on_unresolved: UnresolvedPolicy::Midpoint,
        }
    }
}

impl CutOptions {
    pub fn strict(eps_cut: f64) -> Self {
        CutOptions {
            eps_cut,
            on_unresolved: UnresolvedPolicy::Error,
        }
    }
}

/// Edge-node placement and inside/outside classification at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct CutState {
    pub time: f64,
    /// Clamped node parameter along each edge, measured from the lower-index
    /// endpoint; 0.5 for uncut edges.
    pub edge_param: Vec<f64>,
    /// Unclamped interface root along each cut edge; 0.5 for uncut edges.
    pub edge_root: Vec<f64>,
    pub edge_is_cut: Vec<bool>,
    /// Per scalar node: -1 inside, +1 outside, 0 for edge nodes on the
    /// interface.
    pub node_side: Vec<i8>,
    /// Edges crossed twice and left uncut under [`UnresolvedPolicy::Midpoint`].
    pub unresolved_edges: Vec<usize>,
}

impl CutState {
    /// The state of a level set that does not touch the domain.
    pub fn uncut(mesh: &MacroMesh, time: f64, side: i8) -> Self {
        let ne = mesh.num_edges();
        CutState {
            time,
            edge_param: vec![0.5; ne],
            edge_root: vec![0.5; ne],
            edge_is_cut: vec![false; ne],
            node_side: vec![side; mesh.num_vertices() + ne],
            unresolved_edges: Vec::new(),
        }
    }

    pub fn num_cut_edges(&self) -> usize {
        self.edge_is_cut.iter().filter(|c| **c).count()
    }

    /// Current position of scalar node `node`.
    pub fn node_position(&self, mesh: &MacroMesh, node: usize) -> Point {
        let nv = mesh.num_vertices();
        if node < nv {
            mesh.vertices()[node]
        } else {
            let (p, q) = mesh.edge_endpoints(node - nv);
            p + (q - p) * self.edge_param[node - nv]
        }
    }

    /// Exact interface point on a cut edge.
    pub fn root_position(&self, mesh: &MacroMesh, edge: usize) -> Point {
        let (p, q) = mesh.edge_endpoints(edge);
        p + (q - p) * self.edge_root[edge]
    }
}

fn side_of(phi: f64) -> i8 {
    if phi <= SIDE_TIE_TOL {
        -1
    } else {
        1
    }
}

enum EdgeCut {
    Uncut,
    Cut { root: f64 },
    DoubleCrossing,
}

fn cut_edge(ls: &LevelSet, p: &Point, q: &Point, t: f64) -> EdgeCut {
    let side_p = side_of(ls.eval(p, t));
    let side_q = side_of(ls.eval(q, t));
    if side_p == side_q {
        if side_p > 0 && ls.min_on_segment(p, q, t) < 0.0 {
            return EdgeCut::DoubleCrossing;
        }
        return EdgeCut::Uncut;
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if side_of(ls.eval(&(p + (q - p) * mid), t)) == side_p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    EdgeCut::Cut {
        root: 0.5 * (lo + hi),
    }
}

/// Intersects the level set at time `t` with every macro edge.
pub fn compute_cut(mesh: &MacroMesh, ls: &LevelSet, t: f64, opts: CutOptions) -> Result<CutState> {
    if !(opts.eps_cut > 0.0 && opts.eps_cut < 0.5) {
        return Err(Error::Config(format!(
            "eps_cut must lie in (0, 0.5), got {}",
            opts.eps_cut
        )));
    }
    let cuts: Vec<EdgeCut> = mesh
        .edges()
        .par_iter()
        .map(|&[a, b]| cut_edge(ls, &mesh.vertices()[a], &mesh.vertices()[b], t))
        .collect();

    let nv = mesh.num_vertices();
    let ne = mesh.num_edges();
    let mut state = CutState::uncut(mesh, t, 1);
    for (v, x) in mesh.vertices().iter().enumerate() {
        state.node_side[v] = side_of(ls.eval(x, t));
    }
    for (e, cut) in cuts.into_iter().enumerate() {
        let [a, _] = mesh.edges()[e];
        match cut {
            EdgeCut::Uncut => state.node_side[nv + e] = state.node_side[a],
            EdgeCut::Cut { root } => {
                state.edge_is_cut[e] = true;
                state.edge_root[e] = root;
                state.edge_param[e] = root.clamp(opts.eps_cut, 1.0 - opts.eps_cut);
                state.node_side[nv + e] = 0;
            }
            EdgeCut::DoubleCrossing => {
                if opts.on_unresolved == UnresolvedPolicy::Error {
                    let [from, to] = mesh.edges()[e];
                    return Err(Error::UnresolvedEdge {
                        edge: e,
                        from,
                        to,
                        time: t,
                    });
                }
                state.node_side[nv + e] = state.node_side[a];
                state.unresolved_edges.push(e);
            }
        }
    }
    debug_assert_eq!(state.edge_param.len(), ne);
    Ok(state)
}

/// Local edge-node numbering 4..9 of a macro tet, as indices into
/// [`MacroMesh::tet_edges`]: 4=(0,1), 5=(1,2), 6=(0,2), 7=(0,3), 8=(1,3), 9=(2,3).
pub const EDGE_NODE_SLOTS: [usize; 6] = [0, 3, 1, 2, 4, 5];

/// Corner tetrahedra in macro-local numbering.
pub const CORNER_TETS: [[usize; 4]; 4] = [[0, 4, 6, 7], [4, 1, 5, 8], [6, 5, 2, 9], [7, 8, 9, 3]];

/// Octahedron in macro-local numbering: apex, four equator nodes in cyclic
/// order, apex.
pub const OCTAHEDRON: [usize; 6] = [6, 4, 5, 9, 7, 8];

/// Split of an octahedron (local 0 and 5 apexes, 1..4 equator, 6 center) into
/// eight positively oriented tetrahedra.
pub const OCTA_SPLIT: [[usize; 4]; 8] = [
    [0, 1, 2, 6],
    [0, 2, 3, 6],
    [0, 3, 4, 6],
    [0, 4, 1, 6],
    [5, 2, 1, 6],
    [5, 3, 2, 6],
    [5, 4, 3, 6],
    [5, 1, 4, 6],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Inside,
    Outside,
}

/// The current-configuration hybrid mesh.
#[derive(Debug, Clone)]
pub struct HybridMesh {
    pub time: f64,
    /// Macro vertices occupy scalar nodes `0..num_vertices`.
    pub num_vertices: usize,
    pub node_coords: Vec<Point>,
    pub sub_tets: Vec<[usize; 4]>,
    pub octas: Vec<[usize; 6]>,
    pub tet_region: Vec<Region>,
    pub octa_region: Vec<Region>,
}

impl HybridMesh {
    pub fn empty() -> Self {
        HybridMesh {
            time: 0.0,
            num_vertices: 0,
            node_coords: Vec::new(),
            sub_tets: Vec::new(),
            octas: Vec::new(),
            tet_region: Vec::new(),
            octa_region: Vec::new(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.node_coords.len()
    }

    pub fn layout(&self) -> DofLayout {
        DofLayout {
            num_vertices: self.num_vertices,
            num_edges: self.num_nodes() - self.num_vertices,
        }
    }

    pub fn tet_coords(&self, tet: usize) -> [Point; 4] {
        self.sub_tets[tet].map(|n| self.node_coords[n])
    }

    pub fn octa_coords(&self, octa: usize) -> [Point; 6] {
        self.octas[octa].map(|n| self.node_coords[n])
    }

    /// Octahedron vertices followed by the auxiliary center (coordinate mean).
    pub fn octa_coords_with_center(&self, octa: usize) -> [Point; 7] {
        let c = self.octa_coords(octa);
        let center = centroid(&c);
        [c[0], c[1], c[2], c[3], c[4], c[5], center]
    }

    pub fn octa_volume(&self, octa: usize) -> f64 {
        octa_volume(&self.octa_coords_with_center(octa))
    }

    pub fn tet_volume(&self, tet: usize) -> f64 {
        let p = self.tet_coords(tet);
        signed_volume(&p[0], &p[1], &p[2], &p[3])
    }

    pub fn total_volume(&self) -> f64 {
        let tets: f64 = (0..self.sub_tets.len()).map(|t| self.tet_volume(t)).sum();
        let octas: f64 = (0..self.octas.len()).map(|o| self.octa_volume(o)).sum();
        tets + octas
    }
}

/// Sum of the signed volumes of the eight split tetrahedra.
pub fn octa_volume(p: &[Point; 7]) -> f64 {
    OCTA_SPLIT
        .iter()
        .map(|s| signed_volume(&p[s[0]], &p[s[1]], &p[s[2]], &p[s[3]]))
        .sum()
}

/// Global scalar-node indices of the ten macro-local nodes of `tet`.
pub fn local_nodes(mesh: &MacroMesh, tet: usize) -> [usize; 10] {
    let nv = mesh.num_vertices();
    let v = mesh.macro_tets()[tet];
    let e = mesh.tet_edges()[tet];
    let mut nodes = [0usize; 10];
    nodes[..4].copy_from_slice(&v);
    for (k, slot) in EDGE_NODE_SLOTS.iter().enumerate() {
        nodes[4 + k] = nv + e[*slot];
    }
    nodes
}

fn classify(ls: &LevelSet, x: &Point, t: f64) -> Region {
    if ls.eval(x, t) < 0.0 {
        Region::Inside
    } else {
        Region::Outside
    }
}

/// Splits every macro tet into 4 tets and 1 octahedron using the edge-node
/// placement in `cut`, and classifies each sub-element by the level set at
/// its deformed centroid.
pub fn subdivide(mesh: &MacroMesh, cut: &CutState, ls: &LevelSet) -> Result<HybridMesh> {
    if cut.edge_param.len() != mesh.num_edges() {
        return Err(Error::SizeMismatch {
            expected: mesh.num_edges(),
            actual: cut.edge_param.len(),
        });
    }
    let nn = mesh.num_vertices() + mesh.num_edges();
    let node_coords: Vec<Point> = (0..nn).map(|n| cut.node_position(mesh, n)).collect();
    let t = cut.time;

    type Pieces = ([[usize; 4]; 4], [Region; 4], [usize; 6], Region);
    let pieces: Vec<Result<Pieces>> = (0..mesh.num_tets())
        .into_par_iter()
        .map(|tet| {
            let local = local_nodes(mesh, tet);
            let mut tets = [[0usize; 4]; 4];
            let mut regions = [Region::Outside; 4];
            for (k, corner) in CORNER_TETS.iter().enumerate() {
                let nodes = corner.map(|l| local[l]);
                let p = nodes.map(|n| node_coords[n]);
                let vol = signed_volume(&p[0], &p[1], &p[2], &p[3]);
                if !(vol > 0.0) {
                    return Err(Error::DegenerateCut {
                        macro_tet: tet,
                        volume: vol,
                    });
                }
                tets[k] = nodes;
                regions[k] = classify(ls, &centroid(&p), t);
            }
            let octa = OCTAHEDRON.map(|l| local[l]);
            let c = octa.map(|n| node_coords[n]);
            let center = centroid(&c);
            let with_center = [c[0], c[1], c[2], c[3], c[4], c[5], center];
            for s in OCTA_SPLIT {
                let vol = signed_volume(
                    &with_center[s[0]],
                    &with_center[s[1]],
                    &with_center[s[2]],
                    &with_center[s[3]],
                );
                if !(vol > 0.0) {
                    return Err(Error::DegenerateCut {
                        macro_tet: tet,
                        volume: vol,
                    });
                }
            }
            Ok((tets, regions, octa, classify(ls, &center, t)))
        })
        .collect();

    let mut hm = HybridMesh {
        time: t,
        num_vertices: mesh.num_vertices(),
        node_coords,
        sub_tets: Vec::with_capacity(4 * mesh.num_tets()),
        octas: Vec::with_capacity(mesh.num_tets()),
        tet_region: Vec::with_capacity(4 * mesh.num_tets()),
        octa_region: Vec::with_capacity(mesh.num_tets()),
    };
    for piece in pieces {
        let (tets, regions, octa, octa_region) = piece?;
        hm.sub_tets.extend_from_slice(&tets);
        hm.tet_region.extend_from_slice(&regions);
        hm.octas.push(octa);
        hm.octa_region.push(octa_region);
    }
    Ok(hm)
}

/// Indexed triangle mesh of the reconstructed interface.
#[derive(Debug, Clone, Default)]
pub struct TriangleSurface {
    /// Global scalar (edge) node index of each surface vertex.
    pub node_ids: Vec<usize>,
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
}

impl TriangleSurface {
    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Volume enclosed by the surface (divergence theorem); positive for
    /// outward-oriented closed surfaces.
    pub fn enclosed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i]);
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }

    /// Number of undirected triangle edges that are not shared by exactly two
    /// triangles.
    pub fn open_edge_count(&self) -> usize {
        let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *counts.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        counts.values().filter(|c| **c != 2).count()
    }

    pub fn is_closed(&self) -> bool {
        !self.is_empty() && self.open_edge_count() == 0
    }
}

/// Marching-tetrahedra reconstruction of the interface from the cut edges.
pub fn reconstruct_surface(mesh: &MacroMesh, cut: &CutState) -> Result<TriangleSurface> {
    let nv = mesh.num_vertices();
    let mut surface = TriangleSurface::default();
    let mut vertex_of: HashMap<usize, usize> = HashMap::new();

    let mut vertex = |surface: &mut TriangleSurface, edge: usize| -> usize {
        *vertex_of.entry(edge).or_insert_with(|| {
            surface.node_ids.push(nv + edge);
            surface.vertices.push(cut.root_position(mesh, edge));
            surface.vertices.len() - 1
        })
    };

    for (tet, verts) in mesh.macro_tets().iter().enumerate() {
        let edges = mesh.tet_edges()[tet];
        let n_cut = edges.iter().filter(|e| cut.edge_is_cut[**e]).count();
        if n_cut == 0 {
            continue;
        }
        if n_cut != 3 && n_cut != 4 {
            return Err(Error::InconsistentCutPattern {
                macro_tet: tet,
                cut_edges: n_cut,
            });
        }
        let inside: Vec<usize> = (0..4).filter(|l| cut.node_side[verts[*l]] < 0).collect();
        let outside: Vec<usize> = (0..4).filter(|l| cut.node_side[verts[*l]] > 0).collect();
        if inside.len() * outside.len() != n_cut {
            return Err(Error::InconsistentCutPattern {
                macro_tet: tet,
                cut_edges: n_cut,
            });
        }
        let x = |l: usize| mesh.vertices()[verts[l]];
        let towards_outside = centroid(&outside.iter().map(|l| x(*l)).collect::<Vec<_>>())
            - centroid(&inside.iter().map(|l| x(*l)).collect::<Vec<_>>());
        let edge_between = |a: usize, b: usize| -> usize {
            let slot = crate::mesh::LOCAL_EDGES
                .iter()
                .position(|&(p, q)| (p, q) == (a.min(b), a.max(b)))
                .expect("distinct local vertices");
            edges[slot]
        };

        let mut emit = |surface: &mut TriangleSurface, tri: [usize; 3]| {
            let mut ids = tri.map(|e| vertex(surface, e));
            let [a, b, c] = ids.map(|i| surface.vertices[i]);
            if (b - a).cross(&(c - a)).dot(&towards_outside) < 0.0 {
                ids.swap(1, 2);
            }
            surface.triangles.push(ids);
        };

        if n_cut == 3 {
            let (lone, others) = if inside.len() == 1 {
                (inside[0], &outside)
            } else {
                (outside[0], &inside)
            };
            let tri = [
                edge_between(lone, others[0]),
                edge_between(lone, others[1]),
                edge_between(lone, others[2]),
            ];
            emit(&mut surface, tri);
        } else {
            let (a, b) = (inside[0], inside[1]);
            let (c, d) = (outside[0], outside[1]);
            let (ac, ad, bd, bc) = (
                edge_between(a, c),
                edge_between(a, d),
                edge_between(b, d),
                edge_between(b, c),
            );
            let p = |e: usize| cut.root_position(mesh, e);
            let diag1 = (p(ac) - p(bd)).norm();
            let diag2 = (p(ad) - p(bc)).norm();
            let use_first = if (diag1 - diag2).abs() <= 1e-12 * diag1.max(diag2) {
                ac.min(bd) <= ad.min(bc)
            } else {
                diag1 < diag2
            };
            if use_first {
                emit(&mut surface, [ac, ad, bd]);
                emit(&mut surface, [ac, bd, bc]);
            } else {
                emit(&mut surface, [ad, bd, bc]);
                emit(&mut surface, [ad, bc, ac]);
            }
        }
    }
    Ok(surface)
}
