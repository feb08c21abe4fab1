//! Compressed sparse row matrices.
//!
//! Column indices within a row are kept sorted and unique. All constructors
//! sum duplicate entries in a fixed order, so assembled values do not depend
//! on the number of worker threads.

use std::ops::Range;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::{Error, Result};

const PAR_ROWS: usize = 16_384;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn new(
        nrows: usize,
        ncols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_ptr.len() != nrows + 1 {
            return Err(Error::SizeMismatch {
                expected: nrows + 1,
                actual: row_ptr.len(),
            });
        }
        if col_idx.len() != values.len() || row_ptr[nrows] != col_idx.len() || row_ptr[0] != 0 {
            return Err(Error::SizeMismatch {
                expected: col_idx.len(),
                actual: values.len(),
            });
        }
        for i in 0..nrows {
            if row_ptr[i] > row_ptr[i + 1] {
                return Err(Error::Config(format!("row pointer decreases at row {i}")));
            }
            let cols = &col_idx[row_ptr[i]..row_ptr[i + 1]];
            if cols.windows(2).any(|w| w[0] >= w[1]) || cols.iter().any(|c| *c >= ncols) {
                return Err(Error::Config(format!("row {i} has unsorted or out-of-range columns")));
            }
        }
        Ok(CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Builds a matrix from `(row, col, value)` triplets; duplicates are
    /// summed in input order.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for k in order {
            let (r, c, v) = triplets[k];
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of range");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut triplets = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)] != 0.0 {
                    triplets.push((i, j, m[(i, j)]));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), &triplets)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    /// Position of entry `(i, j)` in the value array.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let start = self.row_ptr[i];
        self.col_idx[start..self.row_ptr[i + 1]]
            .binary_search(&j)
            .ok()
            .map(|k| start + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.values[k])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        let row = |(i, yi): (usize, &mut f64)| {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(c, v)| v * x[*c]).sum();
        };
        if self.nrows >= PAR_ROWS {
            y.par_iter_mut().enumerate().for_each(row);
        } else {
            y.iter_mut().enumerate().for_each(row);
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.ncols + 1];
        for c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                let k = next[*c];
                col_idx[k] = i;
                values[k] = *v;
                next[*c] += 1;
            }
        }
        CsrMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Sparse product `A B`.
    pub fn matmul(&self, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!(self.ncols, other.nrows, "inner dimensions differ");
        let rows: Vec<(Vec<usize>, Vec<f64>)> = (0..self.nrows)
            .into_par_iter()
            .map_init(
                || (vec![0.0f64; other.ncols], vec![false; other.ncols]),
                |(acc, seen), i| {
                    let mut touched = Vec::new();
                    let (cols, vals) = self.row(i);
                    for (k, a) in cols.iter().zip(vals) {
                        let (bc, bv) = other.row(*k);
                        for (j, b) in bc.iter().zip(bv) {
                            if !seen[*j] {
                                seen[*j] = true;
                                touched.push(*j);
                            }
                            acc[*j] += a * b;
                        }
                    }
                    touched.sort_unstable();
                    let vals: Vec<f64> = touched
                        .iter()
                        .map(|j| {
                            seen[*j] = false;
                            std::mem::take(&mut acc[*j])
                        })
                        .collect();
                    (touched, vals)
                },
            )
            .collect();
        Self::from_rows(self.nrows, other.ncols, rows)
    }

    fn from_rows(nrows: usize, ncols: usize, rows: Vec<(Vec<usize>, Vec<f64>)>) -> CsrMatrix {
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        row_ptr.push(0);
        let nnz = rows.iter().map(|r| r.0.len()).sum();
        let mut col_idx = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        for (c, v) in rows {
            col_idx.extend(c);
            values.extend(v);
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// `self + alpha * other` on the union pattern.
    pub fn add_scaled(&self, alpha: f64, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let rows = (0..self.nrows)
            .map(|i| {
                let (ac, av) = self.row(i);
                let (bc, bv) = other.row(i);
                let (mut p, mut q) = (0, 0);
                let mut cols = Vec::with_capacity(ac.len() + bc.len());
                let mut vals = Vec::with_capacity(ac.len() + bc.len());
                while p < ac.len() || q < bc.len() {
                    let ca = ac.get(p).copied().unwrap_or(usize::MAX);
                    let cb = bc.get(q).copied().unwrap_or(usize::MAX);
                    if ca == cb {
                        cols.push(ca);
                        vals.push(av[p] + alpha * bv[q]);
                        p += 1;
                        q += 1;
                    } else if ca < cb {
                        cols.push(ca);
                        vals.push(av[p]);
                        p += 1;
                    } else {
                        cols.push(cb);
                        vals.push(alpha * bv[q]);
                        q += 1;
                    }
                }
                (cols, vals)
            })
            .collect();
        Self::from_rows(self.nrows, self.ncols, rows)
    }

    /// Rows `rows` and columns `cols`, reindexed from zero.
    pub fn submatrix(&self, rows: Range<usize>, cols: Range<usize>) -> CsrMatrix {
        let out_rows = rows
            .clone()
            .map(|i| {
                let (c, v) = self.row(i);
                c.iter()
                    .zip(v)
                    .filter(|(c, _)| cols.contains(c))
                    .map(|(c, v)| (c - cols.start, *v))
                    .unzip()
            })
            .collect();
        Self::from_rows(rows.len(), cols.len(), out_rows)
    }

    /// Removes stored entries equal to zero, keeping the diagonal.
    pub fn drop_zeros(&self) -> CsrMatrix {
        let rows = (0..self.nrows)
            .map(|i| {
                let (c, v) = self.row(i);
                c.iter()
                    .zip(v)
                    .filter(|(c, v)| **v != 0.0 || **c == i)
                    .map(|(c, v)| (*c, *v))
                    .unzip()
            })
            .collect();
        Self::from_rows(self.nrows, self.ncols, rows)
    }

    /// Exact structural and value symmetry.
    pub fn is_symmetric(&self) -> bool {
        self.nrows == self.ncols && *self == self.transpose()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            let (c, v) = self.row(i);
            for (c, v) in c.iter().zip(v) {
                m[(i, *c)] = *v;
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += alpha * x);
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> CsrMatrix {
        CsrMatrix::from_triplets(
            3,
            4,
            &[(0, 1, 2.0), (2, 3, -1.0), (0, 0, 1.0), (0, 1, 0.5), (1, 2, 4.0)],
        )
    }

    #[test]
    fn triplets_sum_duplicates() {
        let m = sample();
        assert_eq!(m.nnz(), 4);
        assert_eq!(m.get(0, 1), 2.5);
        assert_eq!(m.get(2, 2), 0.0);
        assert_eq!(m.row(0).0, &[0, 1]);
    }

    #[test]
    fn validation() {
        assert!(CsrMatrix::new(1, 2, vec![0, 2], vec![1, 0], vec![1.0, 1.0]).is_err());
        assert!(CsrMatrix::new(1, 2, vec![0, 1], vec![0], vec![1.0]).is_ok());
        assert!(CsrMatrix::new(2, 2, vec![0, 1], vec![0], vec![1.0]).is_err());
    }

    #[test]
    fn submatrix_and_drop() {
        let m = sample();
        let s = m.submatrix(0..2, 1..3);
        assert_eq!(s.to_dense(), DMatrix::from_row_slice(2, 2, &[2.5, 0.0, 0.0, 4.0]));
        let z = CsrMatrix::from_triplets(2, 2, &[(0, 0, 0.0), (0, 1, 0.0), (1, 1, 3.0)]);
        let d = z.drop_zeros();
        assert_eq!(d.nnz(), 2);
    }

    fn arb_matrix(n: usize, m: usize) -> impl Strategy<Value = DMatrix<f64>> {
        proptest::collection::vec(
            prop_oneof![3 => Just(0.0), 1 => -5.0f64..5.0],
            n * m,
        )
        .prop_map(move |v| DMatrix::from_row_slice(n, m, &v))
    }

    proptest! {
        #[test]
        fn products_match_dense(a in arb_matrix(5, 4), b in arb_matrix(4, 6), x in proptest::collection::vec(-1.0f64..1.0, 4)) {
            let sa = CsrMatrix::from_dense(&a);
            let sb = CsrMatrix::from_dense(&b);
            let prod = sa.matmul(&sb).to_dense();
            prop_assert!((prod - &a * &b).abs().max() < 1e-12);
            prop_assert_eq!(sa.transpose().to_dense(), a.transpose());
            let y = sa.mul_vec(&x);
            let dy = &a * nalgebra::DVector::from_vec(x.clone());
            for i in 0..5 {
                prop_assert!((y[i] - dy[i]).abs() < 1e-12);
            }
            let sum = sa.add_scaled(-2.0, &sa).to_dense();
            prop_assert!((sum + &a).abs().max() < 1e-12);
        }
    }
}
