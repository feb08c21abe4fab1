//! Preconditioned conjugate gradients and restarted GMRES.

use super::{Method, SolveReport};
use crate::sparse::{axpy, dot, norm2, CsrMatrix};
use crate::{Error, Result};

pub trait Preconditioner {
    /// `z = M⁻¹ r`.
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

pub struct IdentityPreconditioner;

impl Preconditioner for IdentityPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

fn residual(k: &CsrMatrix, f: &[f64], x: &[f64]) -> Vec<f64> {
    let kx = k.mul_vec(x);
    f.iter().zip(&kx).map(|(f, k)| f - k).collect()
}

fn check_sizes(k: &CsrMatrix, f: &[f64]) -> Result<()> {
    if k.nrows() != k.ncols() || k.nrows() != f.len() {
        return Err(Error::SizeMismatch {
            expected: k.nrows(),
            actual: f.len(),
        });
    }
    Ok(())
}

fn zero_rhs(n: usize, method: Method, tol: f64) -> (Vec<f64>, SolveReport) {
    (
        vec![0.0; n],
        SolveReport {
            method,
            iterations: 0,
            rel_residual: 0.0,
            tol,
            seconds: 0.0,
        },
    )
}

/// Preconditioned CG from a zero initial guess. Convergence is declared on
/// the true residual `‖f − K u‖ / ‖f‖ ≤ tol`.
pub fn solve_pcg(
    k: &CsrMatrix,
    f: &[f64],
    m: &dyn Preconditioner,
    tol: f64,
    maxit: usize,
) -> Result<(Vec<f64>, SolveReport)> {
    check_sizes(k, f)?;
    let n = f.len();
    let nf = norm2(f);
    if nf == 0.0 {
        return Ok(zero_rhs(n, Method::Cg, tol));
    }
    let mut x = vec![0.0; n];
    let mut r = f.to_vec();
    let mut z = vec![0.0; n];
    m.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    let mut res = 1.0;
    for it in 1..=maxit {
        k.mul_vec_into(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > 0.0) || !(rz > 0.0) {
            return Err(Error::Breakdown {
                method: "CG",
                iterations: it,
                residual: res,
            });
        }
        let alpha = rz / pq;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &q, &mut r);
        res = norm2(&r) / nf;
        if res <= tol {
            // Guard against drift of the recursive residual.
            r = residual(k, f, &x);
            res = norm2(&r) / nf;
            if res <= tol {
                return Ok((
                    x,
                    SolveReport {
                        method: Method::Cg,
                        iterations: it,
                        rel_residual: res,
                        tol,
                        seconds: 0.0,
                    },
                ));
            }
        }
        m.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.iter_mut().zip(&z).for_each(|(p, z)| *p = z + beta * *p);
    }
    Err(Error::NotConverged {
        method: "CG",
        iterations: maxit,
        residual: res,
    })
}

/// Left-preconditioned restarted GMRES (modified Gram-Schmidt, Givens
/// rotations) from a zero initial guess. Each restart cycle stops once the
/// preconditioned residual estimate predicts the true tolerance; the true
/// residual decides convergence.
pub fn solve_gmres(
    k: &CsrMatrix,
    f: &[f64],
    m: &dyn Preconditioner,
    tol: f64,
    maxit: usize,
    restart: usize,
) -> Result<(Vec<f64>, SolveReport)> {
    check_sizes(k, f)?;
    let restart = restart.max(1);
    let n = f.len();
    let nf = norm2(f);
    if nf == 0.0 {
        return Ok(zero_rhs(n, Method::Gmres, tol));
    }
    let mut x = vec![0.0; n];
    let mut iterations = 0;
    let mut w = vec![0.0; n];
    let mut kv = vec![0.0; n];
    loop {
        let r = residual(k, f, &x);
        let res = norm2(&r) / nf;
        if res <= tol {
            return Ok((
                x,
                SolveReport {
                    method: Method::Gmres,
                    iterations,
                    rel_residual: res,
                    tol,
                    seconds: 0.0,
                },
            ));
        }
        if iterations >= maxit {
            return Err(Error::NotConverged {
                method: "GMRES",
                iterations,
                residual: res,
            });
        }
        let mut z = vec![0.0; n];
        m.apply(&r, &mut z);
        let beta = norm2(&z);
        if !(beta > 0.0) {
            return Err(Error::Breakdown {
                method: "GMRES",
                iterations,
                residual: res,
            });
        }
        // Preconditioned residual that corresponds to the requested true one.
        let target = tol * nf * beta / norm2(&r);

        let mut basis: Vec<Vec<f64>> = vec![z.iter().map(|v| v / beta).collect()];
        let mut h: Vec<Vec<f64>> = Vec::new();
        let mut cs: Vec<f64> = Vec::new();
        let mut sn: Vec<f64> = Vec::new();
        let mut g = vec![beta];
        for j in 0..restart {
            k.mul_vec_into(&basis[j], &mut kv);
            m.apply(&kv, &mut w);
            let mut col = vec![0.0; j + 2];
            for (i, v) in basis.iter().enumerate() {
                col[i] = dot(&w, v);
                axpy(-col[i], v, &mut w);
            }
            col[j + 1] = norm2(&w);
            for i in 0..j {
                let t = cs[i] * col[i] + sn[i] * col[i + 1];
                col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
                col[i] = t;
            }
            let denom = col[j].hypot(col[j + 1]);
            let (c, s) = if denom == 0.0 {
                (1.0, 0.0)
            } else {
                (col[j] / denom, col[j + 1] / denom)
            };
            let next_norm = col[j + 1];
            col[j] = denom;
            col[j + 1] = 0.0;
            cs.push(c);
            sn.push(s);
            g.push(-s * g[j]);
            g[j] *= c;
            h.push(col);
            iterations += 1;
            if g[j + 1].abs() <= target || iterations >= maxit || next_norm == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / next_norm).collect());
        }
        // Back substitution on the triangular Hessenberg factor.
        let dim = h.len();
        let mut y = vec![0.0; dim];
        for i in (0..dim).rev() {
            let mut s = g[i];
            for (jj, yj) in y.iter().enumerate().skip(i + 1) {
                s -= h[jj][i] * yj;
            }
            if h[i][i] == 0.0 {
                return Err(Error::Breakdown {
                    method: "GMRES",
                    iterations,
                    residual: res,
                });
            }
            y[i] = s / h[i][i];
        }
        for (v, yi) in basis.iter().zip(&y) {
            axpy(*yi, v, &mut x);
        }
        let new_res = norm2(&residual(k, f, &x)) / nf;
        if new_res >= res && new_res > tol {
            return Err(Error::NotConverged {
                method: "GMRES",
                iterations,
                residual: new_res,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::{build_amg, AmgParams};

    #[test]
    fn identity_converges_in_one_iteration() {
        let k = CsrMatrix::identity(20);
        let f: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect();
        let amg = build_amg(&k, AmgParams::default()).unwrap();
        let (u, rep) = solve_pcg(&k, &f, &amg, 1e-12, 10).unwrap();
        assert_eq!(rep.iterations, 1);
        assert_eq!(u, f);
        let (u, rep) = solve_gmres(&k, &f, &amg, 1e-12, 10, 30).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(u.iter().zip(&f).all(|(a, b)| (a - b).abs() < 1e-15));
    }

    #[test]
    fn gmres_nonsymmetric_2x2() {
        let k = CsrMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (0, 1, 1.0), (1, 1, 3.0)]);
        let (u, rep) = solve_gmres(&k, &[3.0, 3.0], &IdentityPreconditioner, 1e-14, 10, 30).unwrap();
        assert!((u[0] - 1.0).abs() < 1e-14 && (u[1] - 1.0).abs() < 1e-14);
        assert!(rep.rel_residual <= 1e-14);
        let amg = build_amg(&k, AmgParams::default()).unwrap();
        let (u, _) = solve_gmres(&k, &[3.0, 3.0], &amg, 1e-14, 10, 30).unwrap();
        assert!((u[0] - 1.0).abs() < 1e-14 && (u[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_rhs_returns_zero() {
        let k = CsrMatrix::identity(3);
        let (u, rep) = solve_pcg(&k, &[0.0; 3], &IdentityPreconditioner, 1e-9, 5).unwrap();
        assert_eq!(u, vec![0.0; 3]);
        assert_eq!(rep.iterations, 0);
    }

    #[test]
    fn indefinite_matrix_breaks_down() {
        let k = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, -1.0)]);
        let err = solve_pcg(&k, &[1.0, 1.0], &IdentityPreconditioner, 1e-12, 10).unwrap_err();
        assert!(matches!(err, Error::Breakdown { .. }), "{err}");
    }

    #[test]
    fn restarted_gmres_on_convection_diffusion() {
        let n = 200;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.3));
            }
            if i + 1 < n {
                t.push((i, i + 1, -0.7));
            }
        }
        let k = CsrMatrix::from_triplets(n, n, &t);
        let f = vec![1.0; n];
        let (u, rep) = solve_gmres(&k, &f, &IdentityPreconditioner, 1e-10, 5000, 10).unwrap();
        assert!(rep.iterations > 10, "restart exercised");
        assert!(super::super::relative_residual(&k, &f, &u) <= 1e-10);
    }

    #[test]
    fn size_mismatch() {
        let k = CsrMatrix::identity(3);
        assert!(solve_pcg(&k, &[1.0; 2], &IdentityPreconditioner, 1e-9, 5).is_err());
    }
}
