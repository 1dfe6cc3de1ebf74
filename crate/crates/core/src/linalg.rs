//! Small sparse/dense complex linear-algebra helpers.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::C64;

pub type CMatrix = DMatrix<C64>;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// Compressed sparse column matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    pub nrows: usize,
    pub ncols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseMatrix { nrows, ncols, col_ptr: vec![0; ncols + 1], row_idx: Vec::new(), vals: Vec::new() }
    }

    /// Duplicates are summed; exact zeros are dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, C64)]) -> Self {
        let mut sorted: Vec<(usize, usize, C64)> = triplets.to_vec();
        sorted.sort_unstable_by_key(|&(r, c, _)| (c, r));
        let mut col_ptr = vec![0usize; ncols + 1];
        let mut row_idx = Vec::with_capacity(sorted.len());
        let mut vals: Vec<C64> = Vec::with_capacity(sorted.len());
        let mut cols = Vec::with_capacity(sorted.len());
        for (r, cidx, v) in sorted {
            debug_assert!(r < nrows && cidx < ncols);
            if let (Some(&lr), Some(&lc)) = (row_idx.last(), cols.last()) {
                if lr == r && lc == cidx {
                    *vals.last_mut().unwrap() += v;
                    continue;
                }
            }
            row_idx.push(r);
            cols.push(cidx);
            vals.push(v);
        }
        let keep: Vec<bool> = vals.iter().map(|v| *v != zero()).collect();
        let mut r2 = Vec::with_capacity(row_idx.len());
        let mut v2 = Vec::with_capacity(row_idx.len());
        for i in 0..row_idx.len() {
            if keep[i] {
                col_ptr[cols[i] + 1] += 1;
                r2.push(row_idx[i]);
                v2.push(vals[i]);
            }
        }
        for j in 0..ncols {
            col_ptr[j + 1] += col_ptr[j];
        }
        SparseMatrix { nrows, ncols, col_ptr, row_idx: r2, vals: v2 }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn triplets(&self) -> Vec<(usize, usize, C64)> {
        let mut out = Vec::with_capacity(self.nnz());
        for j in 0..self.ncols {
            for k in self.col_ptr[j]..self.col_ptr[j + 1] {
                out.push((self.row_idx[k], j, self.vals[k]));
            }
        }
        out
    }

    /// Nonzero `(row, value)` entries of column `j`.
    pub fn column(&self, j: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        (self.col_ptr[j]..self.col_ptr[j + 1]).map(move |k| (self.row_idx[k], self.vals[k]))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.column(j).find(|&(r, _)| r == i).map(|(_, v)| v).unwrap_or_else(zero)
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![zero(); self.nrows];
        for (j, &xj) in x.iter().enumerate() {
            if xj == zero() {
                continue;
            }
            for (i, v) in self.column(j) {
                y[i] += v * xj;
            }
        }
        y
    }

    pub fn add(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut t = self.triplets();
        t.extend(other.triplets());
        SparseMatrix::from_triplets(self.nrows, self.ncols, &t)
    }

    /// Dense submatrix on `rows x cols`.
    pub fn dense_block(&self, rows: &[usize], cols: &[usize]) -> CMatrix {
        let pos: HashMap<usize, usize> = rows.iter().enumerate().map(|(i, &r)| (r, i)).collect();
        let mut m = CMatrix::zeros(rows.len(), cols.len());
        for (jj, &j) in cols.iter().enumerate() {
            for (i, v) in self.column(j) {
                if let Some(&ii) = pos.get(&i) {
                    m[(ii, jj)] += v;
                }
            }
        }
        m
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }

    pub fn max_abs_diff(&self, other: &SparseMatrix) -> f64 {
        let mut t = self.triplets();
        t.extend(other.triplets().into_iter().map(|(i, j, v)| (i, j, -v)));
        SparseMatrix::from_triplets(self.nrows, self.ncols, &t).vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Nonzero entries of a dense matrix.
pub fn sparse_entries(m: &CMatrix) -> Vec<(usize, usize, C64)> {
    let mut out = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if v != zero() {
                out.push((i, j, v));
            }
        }
    }
    out
}

/// Triplets of the superoperator `rho -> A rho B` in column-stacked
/// vectorization, `vec(A rho B) = (B^T (x) A) vec(rho)`, scaled by `scale`.
pub fn sandwich_triplets(a: &CMatrix, b: &CMatrix, scale: C64, out: &mut Vec<(usize, usize, C64)>) {
    let d = a.nrows();
    let ea = sparse_entries(a);
    let eb = sparse_entries(b);
    for &(bc_row, bc_col, bv) in &eb {
        // B[c', c] with c' = bc_row, c = bc_col
        for &(r, rp, av) in &ea {
            out.push((r + bc_col * d, rp + bc_row * d, scale * av * bv));
        }
    }
}

pub fn vectorize(m: &CMatrix) -> Vec<C64> {
    m.as_slice().to_vec()
}

pub fn unvectorize(v: &[C64], d: usize) -> CMatrix {
    CMatrix::from_column_slice(d, d, v)
}

/// Right and left null vectors of a square matrix via SVD. Singular values
/// below `rel_tol * max` count as zero.
pub struct NullSpace {
    pub right: Vec<Vec<C64>>,
    pub left: Vec<Vec<C64>>,
    pub singular_values: Vec<f64>,
}

fn right_null(m: &CMatrix, rel_tol: f64) -> (Vec<Vec<C64>>, Vec<f64>) {
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.as_ref().unwrap();
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let vecs = (0..sv.len())
        .filter(|&k| sv[k] <= rel_tol * smax.max(f64::MIN_POSITIVE))
        .map(|k| vt.row(k).iter().map(|z| z.conj()).collect())
        .collect();
    (vecs, sv)
}

pub fn null_space(m: &CMatrix, rel_tol: f64) -> NullSpace {
    // left vectors from the adjoint: the U factor of the complex SVD is not
    // reliable for nearly defective blocks
    let (right, singular_values) = right_null(m, rel_tol);
    let (left, _) = right_null(&m.adjoint(), rel_tol);
    NullSpace { right, left, singular_values }
}

pub fn dot_conj(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sandwich_matches_dense_product() {
        let d = 3;
        let a = CMatrix::from_fn(d, d, |i, j| C64::new((i + 2 * j) as f64, (i as f64) - 1.0));
        let b = CMatrix::from_fn(d, d, |i, j| C64::new(1.0 - j as f64, (i * j) as f64));
        let rho = CMatrix::from_fn(d, d, |i, j| C64::new((i * 3 + j) as f64 * 0.1, -(j as f64)));
        let mut t = Vec::new();
        sandwich_triplets(&a, &b, c(1.0), &mut t);
        let s = SparseMatrix::from_triplets(d * d, d * d, &t);
        let got = unvectorize(&s.mul_vec(&vectorize(&rho)), d);
        let want = &a * &rho * &b;
        assert!((got - want).norm() < 1e-12);
    }

    #[test]
    fn triplets_sum_and_drop_zeros() {
        let s = SparseMatrix::from_triplets(2, 2, &[(0, 0, c(1.0)), (0, 0, c(-1.0)), (1, 0, c(2.0)), (1, 0, c(0.5))]);
        assert_eq!(s.nnz(), 1);
        assert_eq!(s.get(1, 0), c(2.5));
    }

    #[test]
    fn null_space_of_rank_deficient() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(2.0), c(4.0)]);
        let ns = null_space(&m, 1e-10);
        assert_eq!(ns.right.len(), 1);
        let v = &ns.right[0];
        let mv = &m * nalgebra::DVector::from_column_slice(v);
        assert!(mv.norm() < 1e-12);
        let l = nalgebra::DVector::from_column_slice(&ns.left[0]);
        assert!((l.adjoint() * &m).norm() < 1e-12);
    }

    #[test]
    fn left_null_vector_of_driven_two_level_block() {
        // detuned, driven two-level decay generator: left null vector is the trace
        let (om, det) = (0.278_016_869_737_651_33, 0.979_221_068_900_839_4);
        let h = CMatrix::from_row_slice(2, 2, &[zero(), c(om / 2.0), c(om / 2.0), c(-det)]);
        let s = CMatrix::from_row_slice(2, 2, &[zero(), c(1.0), zero(), zero()]);
        let id = CMatrix::identity(2, 2);
        let heff = &h - s.adjoint() * &s * C64::new(0.0, 0.5);
        let mut t = Vec::new();
        sandwich_triplets(&heff, &id, C64::new(0.0, -1.0), &mut t);
        sandwich_triplets(&id, &heff.adjoint(), C64::new(0.0, 1.0), &mut t);
        sandwich_triplets(&s, &s.adjoint(), c(1.0), &mut t);
        let m = SparseMatrix::from_triplets(4, 4, &t).to_dense();
        let ns = null_space(&m, 1e-10);
        assert_eq!(ns.left.len(), 1);
        let l = nalgebra::DVector::from_column_slice(&ns.left[0]);
        assert!((l.adjoint() * &m).norm() < 1e-13);
        let l = &l / l[0];
        assert!((l[3] - c(1.0)).norm() < 1e-13 && l[1].norm() < 1e-13 && l[2].norm() < 1e-13);
    }
}
