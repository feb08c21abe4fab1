//! Graph-based algebraic multigrid.
//!
//! Coarse points are a maximal independent set of the matrix graph, picked
//! greedily in ascending index order. Fine points interpolate from their
//! coarse neighbours with equal weights, coarse points are injected, and the
//! coarse operators are Galerkin products. Rows without off-diagonal entries
//! (eliminated Dirichlet DOFs, for instance) are left to the smoother and get
//! no coarse representative.

use nalgebra::DVector;

use super::krylov::Preconditioner;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmgParams {
    /// Levels at or below this size are solved directly.
    pub max_coarse: usize,
    pub pre_sweeps: usize,
    pub post_sweeps: usize,
    pub max_levels: usize,
}

impl Default for AmgParams {
    fn default() -> Self {
        AmgParams {
            max_coarse: 200,
            pre_sweeps: 1,
            post_sweeps: 1,
            max_levels: 25,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Level {
    pub a: CsrMatrix,
    pub p: CsrMatrix,
    pub r: CsrMatrix,
    diag: Vec<f64>,
}

#[derive(Debug, Clone)]
pub enum CoarseSolver {
    Dense(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
    Diagonal(Vec<f64>),
}

impl CoarseSolver {
    fn new(a: &CsrMatrix) -> Result<Self> {
        let diagonal_only = (0..a.nrows()).all(|i| a.row(i).0.iter().all(|j| *j == i));
        if diagonal_only {
            let d = a.diagonal();
            if let Some(i) = d.iter().position(|v| *v == 0.0) {
                return Err(Error::ZeroDiagonal(i));
            }
            return Ok(CoarseSolver::Diagonal(d.iter().map(|v| 1.0 / v).collect()));
        }
        let lu = a.to_dense().lu();
        if !lu.is_invertible() {
            return Err(Error::SingularCoarse);
        }
        Ok(CoarseSolver::Dense(lu))
    }

    fn solve(&self, b: &[f64], x: &mut [f64]) {
        match self {
            CoarseSolver::Diagonal(inv) => {
                for ((x, b), d) in x.iter_mut().zip(b).zip(inv) {
                    *x = b * d;
                }
            }
            CoarseSolver::Dense(lu) => {
                let sol = lu
                    .solve(&DVector::from_column_slice(b))
                    .expect("coarse factorization checked invertible");
                x.copy_from_slice(sol.as_slice());
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct AmgHierarchy {
    /// Fine-to-coarse levels with their prolongation to the next level.
    pub levels: Vec<Level>,
    pub coarsest: CsrMatrix,
    coarse_solver: CoarseSolver,
    pub params: AmgParams,
}

impl AmgHierarchy {
    pub fn num_levels(&self) -> usize {
        self.levels.len() + 1
    }

    /// Sizes of all levels, finest first.
    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels
            .iter()
            .map(|l| l.a.nrows())
            .chain(std::iter::once(self.coarsest.nrows()))
            .collect()
    }

    /// Matrix of level `l`, finest is 0.
    pub fn matrix(&self, l: usize) -> &CsrMatrix {
        if l < self.levels.len() {
            &self.levels[l].a
        } else {
            &self.coarsest
        }
    }

    fn cycle(&self, l: usize, b: &[f64], x: &mut [f64]) {
        if l == self.levels.len() {
            self.coarse_solver.solve(b, x);
            return;
        }
        let level = &self.levels[l];
        x.iter_mut().for_each(|v| *v = 0.0);
        for _ in 0..self.params.pre_sweeps {
            gauss_seidel(&level.a, &level.diag, b, x, false);
        }
        let ax = level.a.mul_vec(x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let bc = level.r.mul_vec(&r);
        let mut xc = vec![0.0; bc.len()];
        self.cycle(l + 1, &bc, &mut xc);
        let correction = level.p.mul_vec(&xc);
        x.iter_mut().zip(&correction).for_each(|(x, c)| *x += c);
        for _ in 0..self.params.post_sweeps {
            gauss_seidel(&level.a, &level.diag, b, x, true);
        }
    }
}

impl Preconditioner for AmgHierarchy {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        self.cycle(0, r, z);
    }
}

/// One forward (or backward) Gauss-Seidel sweep in natural row order.
fn gauss_seidel(a: &CsrMatrix, diag: &[f64], b: &[f64], x: &mut [f64], backward: bool) {
    let n = a.nrows();
    let mut relax = |i: usize| {
        let (cols, vals) = a.row(i);
        let mut s = b[i];
        for (j, v) in cols.iter().zip(vals) {
            if *j != i {
                s -= v * x[*j];
            }
        }
        x[i] = s / diag[i];
    };
    if backward {
        (0..n).rev().for_each(&mut relax);
    } else {
        (0..n).for_each(&mut relax);
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mark {
    Undecided,
    Coarse,
    Fine,
    Isolated,
}

/// Symmetrized off-diagonal adjacency of the nonzero pattern.
fn adjacency(a: &CsrMatrix) -> Vec<Vec<usize>> {
    let n = a.nrows();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let (cols, vals) = a.row(i);
        for (j, v) in cols.iter().zip(vals) {
            if *j != i && *v != 0.0 {
                adj[i].push(*j);
                adj[*j].push(i);
            }
        }
    }
    for row in &mut adj {
        row.sort_unstable();
        row.dedup();
    }
    adj
}

/// Greedy maximal independent set coarsening and averaging prolongation.
/// Returns `None` when no coarse point can be chosen.
pub fn coarsen(a: &CsrMatrix) -> Option<CsrMatrix> {
    let n = a.nrows();
    let adj = adjacency(a);
    let mut mark: Vec<Mark> = adj
        .iter()
        .map(|nb| if nb.is_empty() { Mark::Isolated } else { Mark::Undecided })
        .collect();
    for i in 0..n {
        if mark[i] == Mark::Undecided {
            mark[i] = Mark::Coarse;
            for j in &adj[i] {
                if mark[*j] == Mark::Undecided {
                    mark[*j] = Mark::Fine;
                }
            }
        }
    }
    let mut coarse_index = vec![usize::MAX; n];
    let mut nc = 0;
    for i in 0..n {
        if mark[i] == Mark::Coarse {
            coarse_index[i] = nc;
            nc += 1;
        }
    }
    if nc == 0 {
        return None;
    }
    let mut triplets = Vec::new();
    for i in 0..n {
        match mark[i] {
            Mark::Coarse => triplets.push((i, coarse_index[i], 1.0)),
            Mark::Fine => {
                let coarse: Vec<usize> = adj[i]
                    .iter()
                    .filter(|j| mark[**j] == Mark::Coarse)
                    .map(|j| coarse_index[*j])
                    .collect();
                let w = 1.0 / coarse.len() as f64;
                triplets.extend(coarse.into_iter().map(|c| (i, c, w)));
            }
            Mark::Isolated => {}
            Mark::Undecided => unreachable!("greedy pass decides every connected node"),
        }
    }
    Some(CsrMatrix::from_triplets(n, nc, &triplets))
}

pub fn build_amg(k: &CsrMatrix, params: AmgParams) -> Result<AmgHierarchy> {
    if k.nrows() != k.ncols() {
        return Err(Error::SizeMismatch {
            expected: k.nrows(),
            actual: k.ncols(),
        });
    }
    if let Some(i) = (0..k.nrows()).find(|i| k.row(*i).0.is_empty()) {
        return Err(Error::EmptyRow(i));
    }
    let mut levels = Vec::new();
    let mut a = k.clone();
    while a.nrows() > params.max_coarse && levels.len() + 1 < params.max_levels {
        let diag = a.diagonal();
        if let Some(i) = diag.iter().position(|d| *d == 0.0) {
            return Err(Error::ZeroDiagonal(i));
        }
        let Some(p) = coarsen(&a) else { break };
        if p.ncols() >= a.nrows() {
            break;
        }
        let r = p.transpose();
        let coarse = r.matmul(&a).matmul(&p);
        levels.push(Level { a, p, r, diag });
        a = coarse;
    }
    let coarse_solver = CoarseSolver::new(&a)?;
    Ok(AmgHierarchy {
        levels,
        coarsest: a,
        coarse_solver,
        params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::norm2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense_galerkin(a: &CsrMatrix, p: &CsrMatrix) -> nalgebra::DMatrix<f64> {
        let pd = p.to_dense();
        pd.transpose() * a.to_dense() * pd
    }

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, &t)
    }

    fn small_params() -> AmgParams {
        AmgParams {
            max_coarse: 10,
            ..Default::default()
        }
    }

    #[test]
    fn identity_is_single_level() {
        let amg = build_amg(&CsrMatrix::identity(10), AmgParams::default()).unwrap();
        assert_eq!(amg.num_levels(), 1);
        // All rows isolated even below a tiny cap: still one level.
        let amg = build_amg(&CsrMatrix::identity(10), AmgParams { max_coarse: 2, ..Default::default() }).unwrap();
        assert_eq!(amg.num_levels(), 1);
        let mut z = vec![0.0; 10];
        let r: Vec<f64> = (0..10).map(|i| i as f64).collect();
        amg.apply(&r, &mut z);
        assert_eq!(z, r);
    }

    #[test]
    fn empty_row_rejected() {
        let m = CsrMatrix::from_triplets(3, 3, &[(0, 0, 1.0), (2, 2, 1.0)]);
        assert!(matches!(build_amg(&m, AmgParams::default()), Err(Error::EmptyRow(1))));
    }

    #[test]
    fn mis_halves_a_path() {
        let a = laplacian_1d(100);
        let p = coarsen(&a).unwrap();
        assert_eq!(p.ncols(), 50);
        // Full column rank through injection.
        for i in 0..100 {
            let (cols, vals) = p.row(i);
            if i % 2 == 0 {
                assert_eq!((cols, vals), (&[i / 2][..], &[1.0][..]));
            } else {
                assert!(vals.iter().all(|w| *w > 0.0));
                assert!((vals.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn galerkin_identity_on_every_level() {
        let a = laplacian_1d(100);
        let amg = build_amg(&a, small_params()).unwrap();
        assert!(amg.num_levels() >= 3);
        for (l, level) in amg.levels.iter().enumerate() {
            let expect = dense_galerkin(&level.a, &level.p);
            let got = amg.matrix(l + 1).to_dense();
            assert!((expect - got).abs().max() <= 1e-12);
        }
        assert!(amg.coarsest.nrows() <= 10);
    }

    #[test]
    fn v_cycle_contracts_error() {
        // Zero right-hand side: the iterate is the error.
        let a = laplacian_1d(100);
        let amg = build_amg(&a, small_params()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut x: Vec<f64> = (0..100).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut prev = norm2(&x);
        for _ in 0..10 {
            // x <- x - B A x
            let ax = a.mul_vec(&x);
            let mut z = vec![0.0; 100];
            amg.apply(&ax, &mut z);
            x.iter_mut().zip(&z).for_each(|(x, z)| *x -= z);
            let now = norm2(&x);
            assert!(now < prev, "{now} >= {prev}");
            prev = now;
        }
    }

    #[test]
    fn preconditioner_is_positive_for_spd() {
        let a = laplacian_1d(300);
        let amg = build_amg(&a, small_params()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let z: Vec<f64> = (0..300).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut mz = vec![0.0; 300];
            amg.apply(&z, &mut mz);
            assert!(crate::sparse::dot(&z, &mz) > 0.0);
        }
    }
}
