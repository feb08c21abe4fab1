//! Segregated solve by exact elimination of the vertex unknowns.
//!
//! With `K = [A_VV A_VE; A_EV A_EE]` and `A_VV` block diagonal,
//! `K = [A_VV 0; A_EV S] [I A_VV⁻¹A_VE; 0 I]` where
//! `S = A_EE − A_EV A_VV⁻¹ A_VE`. The edge unknowns solve `S u_E = b_E`
//! by AMG-PCG and the vertex unknowns follow by back substitution.

use std::time::Instant;

use super::amg::{build_amg, AmgParams};
use super::krylov::solve_pcg;
use super::{relative_residual, Method, SolveReport};
use crate::mesh::DofLayout;
use crate::sparse::{norm2, CsrMatrix};
use crate::{Error, Result};

const B: usize = DofLayout::COMPONENTS;

/// Closed-form inverse of a 3x3 matrix; `None` if singular.
pub fn invert_block3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let cof = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    let adj = [
        [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
        [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
        [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
    ];
    let det = m[0][0] * adj[0][0] + m[0][1] * adj[1][0] + m[0][2] * adj[2][0];
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    Some(adj.map(|row| row.map(|v| v / det)))
}

/// The blocks of `K` together with the exact Schur complement.
#[derive(Debug, Clone)]
pub struct SchurComplement {
    pub vv: CsrMatrix,
    pub ve: CsrMatrix,
    pub ev: CsrMatrix,
    pub ee: CsrMatrix,
    pub vv_inv: CsrMatrix,
    pub s: CsrMatrix,
}

impl SchurComplement {
    /// Splits `k` after its first `nv` rows/columns (a multiple of three)
    /// and forms `S`. Fails if `A_VV` couples distinct 3x3 node blocks.
    pub fn new(k: &CsrMatrix, nv: usize) -> Result<Self> {
        let n = k.nrows();
        if k.ncols() != n || nv > n || nv % B != 0 {
            return Err(Error::SizeMismatch { expected: n, actual: nv });
        }
        let vv = k.submatrix(0..nv, 0..nv);
        let ve = k.submatrix(0..nv, nv..n);
        let ev = k.submatrix(nv..n, 0..nv);
        let ee = k.submatrix(nv..n, nv..n);

        let mut triplets = Vec::with_capacity(B * nv);
        for node in 0..nv / B {
            let mut block = [[0.0; 3]; 3];
            for (r, row) in block.iter_mut().enumerate() {
                let i = B * node + r;
                let (cols, vals) = vv.row(i);
                for (j, v) in cols.iter().zip(vals) {
                    if j / B != node {
                        return Err(Error::NotBlockDiagonal { row: i, col: *j });
                    }
                    row[j % B] = *v;
                }
            }
            let inv = invert_block3(&block).ok_or(Error::SingularBlock { node })?;
            for (r, row) in inv.iter().enumerate() {
                for (c, v) in row.iter().enumerate() {
                    if *v != 0.0 {
                        triplets.push((B * node + r, B * node + c, *v));
                    }
                }
            }
        }
        let vv_inv = CsrMatrix::from_triplets(nv, nv, &triplets);
        let s = ee.add_scaled(-1.0, &ev.matmul(&vv_inv.matmul(&ve)));
        Ok(SchurComplement {
            vv,
            ve,
            ev,
            ee,
            vv_inv,
            s,
        })
    }

    pub fn num_vertex_dofs(&self) -> usize {
        self.vv.nrows()
    }

    /// Right-hand side `f_E − A_EV A_VV⁻¹ f_V` of the Schur equation.
    pub fn reduced_rhs(&self, f: &[f64]) -> Vec<f64> {
        let nv = self.num_vertex_dofs();
        let correction = self.ev.mul_vec(&self.vv_inv.mul_vec(&f[..nv]));
        f[nv..].iter().zip(&correction).map(|(f, c)| f - c).collect()
    }

    /// `u_V = A_VV⁻¹ (f_V − A_VE u_E)`.
    pub fn back_substitute(&self, f: &[f64], u_e: &[f64]) -> Vec<f64> {
        let nv = self.num_vertex_dofs();
        let t = self.ve.mul_vec(u_e);
        let rhs: Vec<f64> = f[..nv].iter().zip(&t).map(|(f, t)| f - t).collect();
        self.vv_inv.mul_vec(&rhs)
    }
}

pub fn solve_segregated(
    k: &CsrMatrix,
    nv: usize,
    f: &[f64],
    tol: f64,
    maxit: usize,
    amg_params: AmgParams,
) -> Result<(Vec<f64>, SolveReport)> {
    if f.len() != k.nrows() {
        return Err(Error::SizeMismatch {
            expected: k.nrows(),
            actual: f.len(),
        });
    }
    let start = Instant::now();
    let schur = SchurComplement::new(k, nv)?;
    let b_e = schur.reduced_rhs(f);

    // Ask the inner solve for a residual small enough in the norm of the
    // full right-hand side.
    let (nf, nb) = (norm2(f), norm2(&b_e));
    let inner_tol = if nb > 0.0 { tol * (nf / nb).min(1.0) } else { tol };
    let (u_e, iterations) = if schur.s.nrows() == 0 {
        (Vec::new(), 0)
    } else {
        let amg = build_amg(&schur.s, amg_params)?;
        let (u_e, inner) = solve_pcg(&schur.s, &b_e, &amg, inner_tol, maxit).map_err(|e| match e {
            Error::Breakdown { iterations, residual, .. } => Error::Breakdown {
                method: "SCHUR_CG",
                iterations,
                residual,
            },
            Error::NotConverged { iterations, residual, .. } => Error::NotConverged {
                method: "SCHUR_CG",
                iterations,
                residual,
            },
            other => other,
        })?;
        (u_e, inner.iterations)
    };
    let mut u = schur.back_substitute(f, &u_e);
    u.extend_from_slice(&u_e);
    let rel_residual = relative_residual(k, f, &u);
    Ok((
        u,
        SolveReport {
            method: Method::SchurCg,
            iterations,
            rel_residual,
            tol,
            seconds: start.elapsed().as_secs_f64(),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_block_system(nv_nodes: usize, ne: usize, seed: u64) -> CsrMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nv = 3 * nv_nodes;
        let n = nv + ne;
        let mut m = DMatrix::<f64>::zeros(n, n);
        for node in 0..nv_nodes {
            for r in 0..3 {
                for c in 0..3 {
                    m[(3 * node + r, 3 * node + c)] = rng.gen_range(-0.5..0.5);
                }
                m[(3 * node + r, 3 * node + r)] += 4.0;
            }
        }
        for i in 0..n {
            for j in nv..n {
                if i == j {
                    m[(i, j)] = 10.0;
                } else if rng.gen_bool(0.4) {
                    m[(i, j)] = rng.gen_range(-1.0..1.0);
                    m[(j, i)] = rng.gen_range(-1.0..1.0);
                }
            }
        }
        CsrMatrix::from_dense(&m)
    }

    #[test]
    fn block_inverse() {
        let m = [[4.0, 1.0, 0.5], [0.0, 3.0, -1.0], [2.0, 0.0, 5.0]];
        let inv = invert_block3(&m).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| m[i][k] * inv[k][j]).sum();
                assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
        assert!(invert_block3(&[[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 0.0, 1.0]]).is_none());
    }

    #[test]
    fn lu_reassembles_k() {
        for seed in 0..5 {
            let k = random_block_system(4, 7, seed);
            let sc = SchurComplement::new(&k, 12).unwrap();
            let (vv, ve, ev, s) = (
                sc.vv.to_dense(),
                sc.ve.to_dense(),
                sc.ev.to_dense(),
                sc.s.to_dense(),
            );
            let n = k.nrows();
            let mut l = DMatrix::zeros(n, n);
            l.view_mut((0, 0), (12, 12)).copy_from(&vv);
            l.view_mut((12, 0), (n - 12, 12)).copy_from(&ev);
            l.view_mut((12, 12), (n - 12, n - 12)).copy_from(&s);
            let mut u = DMatrix::identity(n, n);
            u.view_mut((0, 12), (12, n - 12)).copy_from(&(sc.vv_inv.to_dense() * ve));
            let diff = (l * u - k.to_dense()).abs().max();
            assert!(diff <= 1e-12, "seed {seed}: {diff}");
        }
    }

    #[test]
    fn decoupled_blocks() {
        // A_VE = A_EV = 0: S is A_EE and u_V comes from one blockwise pass.
        let k = CsrMatrix::from_triplets(
            5,
            5,
            &[
                (0, 0, 2.0),
                (1, 1, 4.0),
                (2, 2, 8.0),
                (3, 3, 2.0),
                (3, 4, -1.0),
                (4, 3, -1.0),
                (4, 4, 2.0),
            ],
        );
        let sc = SchurComplement::new(&k, 3).unwrap();
        assert_eq!(sc.s, sc.ee);
        let f = [2.0, 4.0, 8.0, 1.0, 1.0];
        let (u, rep) = solve_segregated(&k, 3, &f, 1e-12, 10, AmgParams::default()).unwrap();
        assert_eq!(&u[..3], &[1.0, 1.0, 1.0]);
        assert!((u[3] - 1.0).abs() < 1e-12 && (u[4] - 1.0).abs() < 1e-12);
        assert!(rep.rel_residual <= 1e-12);
    }

    #[test]
    fn off_block_vertex_coupling_rejected() {
        let k = CsrMatrix::from_triplets(6, 6, &[(0, 0, 1.0), (0, 3, 0.5), (1, 1, 1.0), (2, 2, 1.0), (3, 3, 1.0), (4, 4, 1.0), (5, 5, 1.0)]);
        assert!(matches!(
            SchurComplement::new(&k, 6),
            Err(Error::NotBlockDiagonal { row: 0, col: 3 })
        ));
    }

    #[test]
    fn singular_vertex_block_rejected() {
        let k = CsrMatrix::from_triplets(4, 4, &[(0, 0, 1.0), (1, 1, 0.0), (2, 2, 1.0), (3, 3, 1.0)]);
        assert!(matches!(SchurComplement::new(&k, 3), Err(Error::SingularBlock { node: 0 })));
    }
}
