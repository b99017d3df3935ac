//! Dense exact matrices over ℚ(i) and the elimination kernel.
//!
//! Everything downstream (Weyr forms, stabilizer systems, the reduction
//! engine) reduces to [`rref`] on these matrices. Zero-row and zero-column
//! matrices are first-class: systems with m = 0 or l = 0 flow through the
//! same code paths.

use crate::scalar::Scalar;
use std::fmt;
use thiserror::Error;

/// Attempt to invert a rank-deficient matrix.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("matrix is singular")]
pub struct Singular;

/// A dense rows×cols matrix of [`Scalar`]s in row-major order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Scalar>,
}

/// Build an integer matrix literal: `mat![[1, 2], [3, 4]]`.
#[macro_export]
macro_rules! mat {
    ($([$($v:expr),* $(,)?]),* $(,)?) => {{
        let data: Vec<Vec<i64>> = vec![$(vec![$($v),*]),*];
        $crate::matrix::ExactMatrix::from_int_rows(&data)
    }};
}

impl ExactMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ExactMatrix {
            rows,
            cols,
            entries: vec![Scalar::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = ExactMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Scalar::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        ExactMatrix { rows, cols, entries }
    }

    /// Build from explicit rows; all rows must have equal length.
    pub fn from_rows(data: Vec<Vec<Scalar>>) -> Self {
        let rows = data.len();
        let cols = data.first().map_or(0, Vec::len);
        assert!(data.iter().all(|r| r.len() == cols), "ragged rows");
        ExactMatrix {
            rows,
            cols,
            entries: data.into_iter().flatten().collect(),
        }
    }

    pub fn from_int_rows(data: &[Vec<i64>]) -> Self {
        ExactMatrix::from_rows(
            data.iter()
                .map(|r| r.iter().map(|&v| Scalar::from_int(v)).collect())
                .collect(),
        )
    }

    /// Parse a matrix of scalar strings (the JSON wire format).
    pub fn parse_rows(data: &[Vec<&str>]) -> Result<Self, crate::scalar::ScalarParseError> {
        let mut rows = Vec::with_capacity(data.len());
        for r in data {
            rows.push(r.iter().map(|s| crate::scalar::parse_scalar(s)).collect::<Result<Vec<_>, _>>()?);
        }
        Ok(ExactMatrix::from_rows(rows))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.entries
    }

    pub fn at(&self, r: usize, c: usize) -> &Scalar {
        assert!(r < self.rows && c < self.cols, "index out of range");
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Scalar) {
        assert!(r < self.rows && c < self.cols, "index out of range");
        self.entries[r * self.cols + c] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Scalar::is_zero)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        ExactMatrix::from_fn(self.cols, self.rows, |r, c| self.at(c, r).clone())
    }

    pub fn mul(&self, rhs: &ExactMatrix) -> ExactMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in matrix product");
        ExactMatrix::from_fn(self.rows, rhs.cols, |r, c| {
            let mut acc = Scalar::zero();
            for k in 0..self.cols {
                if !self.at(r, k).is_zero() && !rhs.at(k, c).is_zero() {
                    acc = &acc + &(self.at(r, k) * rhs.at(k, c));
                }
            }
            acc
        })
    }

    pub fn add(&self, rhs: &ExactMatrix) -> ExactMatrix {
        assert!(self.rows == rhs.rows && self.cols == rhs.cols);
        ExactMatrix::from_fn(self.rows, self.cols, |r, c| self.at(r, c) + rhs.at(r, c))
    }

    pub fn sub(&self, rhs: &ExactMatrix) -> ExactMatrix {
        assert!(self.rows == rhs.rows && self.cols == rhs.cols);
        ExactMatrix::from_fn(self.rows, self.cols, |r, c| self.at(r, c) - rhs.at(r, c))
    }

    pub fn scale(&self, k: &Scalar) -> ExactMatrix {
        ExactMatrix::from_fn(self.rows, self.cols, |r, c| self.at(r, c) * k)
    }

    /// Copy of the rectangular block `rows0..rows1 × cols0..cols1`.
    pub fn submatrix(&self, rows0: usize, rows1: usize, cols0: usize, cols1: usize) -> ExactMatrix {
        assert!(rows0 <= rows1 && rows1 <= self.rows && cols0 <= cols1 && cols1 <= self.cols);
        ExactMatrix::from_fn(rows1 - rows0, cols1 - cols0, |r, c| {
            self.at(rows0 + r, cols0 + c).clone()
        })
    }

    /// Copy of the rows/columns selected by index lists (in the given order).
    pub fn select(&self, row_idx: &[usize], col_idx: &[usize]) -> ExactMatrix {
        ExactMatrix::from_fn(row_idx.len(), col_idx.len(), |r, c| {
            self.at(row_idx[r], col_idx[c]).clone()
        })
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &ExactMatrix) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for r in 0..block.rows {
            for c in 0..block.cols {
                self.set(r0 + r, c0 + c, block.at(r, c).clone());
            }
        }
    }

    pub fn hstack(&self, rhs: &ExactMatrix) -> ExactMatrix {
        assert_eq!(self.rows, rhs.rows);
        ExactMatrix::from_fn(self.rows, self.cols + rhs.cols, |r, c| {
            if c < self.cols {
                self.at(r, c).clone()
            } else {
                rhs.at(r, c - self.cols).clone()
            }
        })
    }

    pub fn vstack(&self, rhs: &ExactMatrix) -> ExactMatrix {
        assert_eq!(self.cols, rhs.cols);
        ExactMatrix::from_fn(self.rows + rhs.rows, self.cols, |r, c| {
            if r < self.rows {
                self.at(r, c).clone()
            } else {
                rhs.at(r - self.rows, c).clone()
            }
        })
    }

    /// Direct sum: `self ⊕ rhs` placed block-diagonally.
    pub fn direct_sum(&self, rhs: &ExactMatrix) -> ExactMatrix {
        let mut out = ExactMatrix::zeros(self.rows + rhs.rows, self.cols + rhs.cols);
        out.set_block(0, 0, self);
        out.set_block(self.rows, self.cols, rhs);
        out
    }
}

impl fmt::Debug for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}x{}]", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self.at(r, c).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Gauss–Jordan elimination. Returns `(R, pivots, T)` with `T` invertible,
/// `T·M = R`, `R` in reduced row echelon form, and `pivots` the pivot column
/// indices in increasing order. Deterministic: the pivot row is always the
/// first row with a nonzero entry in the pivot column.
pub fn rref(m: &ExactMatrix) -> (ExactMatrix, Vec<usize>, ExactMatrix) {
    let mut r = m.clone();
    let mut t = ExactMatrix::identity(m.rows());
    let mut pivots = Vec::new();
    let mut next_row = 0;
    for col in 0..m.cols() {
        let Some(pivot_row) = (next_row..m.rows()).find(|&i| !r.at(i, col).is_zero()) else {
            continue;
        };
        if pivot_row != next_row {
            for c in 0..r.cols() {
                let tmp = r.at(pivot_row, c).clone();
                r.set(pivot_row, c, r.at(next_row, c).clone());
                r.set(next_row, c, tmp);
            }
            for c in 0..t.cols() {
                let tmp = t.at(pivot_row, c).clone();
                t.set(pivot_row, c, t.at(next_row, c).clone());
                t.set(next_row, c, tmp);
            }
        }
        let inv = r.at(next_row, col).inv().expect("pivot is nonzero");
        for c in 0..r.cols() {
            r.set(next_row, c, r.at(next_row, c) * &inv);
        }
        for c in 0..t.cols() {
            t.set(next_row, c, t.at(next_row, c) * &inv);
        }
        for i in 0..m.rows() {
            if i != next_row && !r.at(i, col).is_zero() {
                let factor = r.at(i, col).clone();
                for c in 0..r.cols() {
                    let v = r.at(i, c) - &(&factor * r.at(next_row, c));
                    r.set(i, c, v);
                }
                for c in 0..t.cols() {
                    let v = t.at(i, c) - &(&factor * t.at(next_row, c));
                    t.set(i, c, v);
                }
            }
        }
        pivots.push(col);
        next_row += 1;
        if next_row == m.rows() {
            break;
        }
    }
    (r, pivots, t)
}

pub fn rank(m: &ExactMatrix) -> usize {
    rref(m).1.len()
}

/// Canonical nullspace basis read off the RREF: one vector per free column,
/// in increasing free-column order, with a 1 in the free coordinate.
pub fn nullspace(m: &ExactMatrix) -> Vec<ExactMatrix> {
    let (r, pivots, _) = rref(m);
    let mut basis = Vec::new();
    for free in 0..m.cols() {
        if pivots.contains(&free) {
            continue;
        }
        let mut v = ExactMatrix::zeros(m.cols(), 1);
        v.set(free, 0, Scalar::one());
        for (row, &pc) in pivots.iter().enumerate() {
            v.set(pc, 0, -r.at(row, free));
        }
        basis.push(v);
    }
    basis
}

pub fn invert(m: &ExactMatrix) -> Result<ExactMatrix, Singular> {
    assert!(m.is_square(), "invert requires a square matrix");
    let (_, pivots, t) = rref(m);
    if pivots.len() == m.rows() {
        Ok(t)
    } else {
        Err(Singular)
    }
}

/// The n²×n² matrix of the linear map Y ↦ YA − AY on row-major vectorized Y.
///
/// Its nullspace is the centralizer of A; the coefficient of `Y[k,l]` in
/// `(YA − AY)[i,j]` is `δ_{ik}·A[l,j] − A[i,k]·δ_{lj}`.
pub fn commutant_map(a: &ExactMatrix) -> ExactMatrix {
    assert!(a.is_square(), "commutant_map requires a square matrix");
    let n = a.rows();
    ExactMatrix::from_fn(n * n, n * n, |row, col| {
        let (i, j) = (row / n, row % n);
        let (k, l) = (col / n, col % n);
        let mut v = Scalar::zero();
        if i == k {
            v = &v + a.at(l, j);
        }
        if l == j {
            v = &v - a.at(i, k);
        }
        v
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rref_of_zero_matrix() {
        let m = ExactMatrix::zeros(2, 3);
        let (r, pivots, t) = rref(&m);
        assert!(r.is_zero());
        assert!(pivots.is_empty());
        assert_eq!(t, ExactMatrix::identity(2));
    }

    #[test]
    fn rref_of_identity() {
        let m = ExactMatrix::identity(3);
        let (r, pivots, _) = rref(&m);
        assert_eq!(r, ExactMatrix::identity(3));
        assert_eq!(pivots, vec![0, 1, 2]);
    }

    #[test]
    fn rref_normalizes_single_pivot() {
        let m = mat![[0, 2], [0, 0]];
        let (r, pivots, t) = rref(&m);
        assert_eq!(r, mat![[0, 1], [0, 0]]);
        assert_eq!(pivots, vec![1]);
        assert_eq!(t.mul(&m), r);
    }

    #[test]
    fn rank_and_nullspace() {
        assert_eq!(rank(&ExactMatrix::zeros(3, 2)), 0);
        let n = nullspace(&mat![[0, 1], [0, 0]]);
        assert_eq!(n.len(), 1);
        assert_eq!(n[0], mat![[1], [0]]);
    }

    #[test]
    fn invert_unipotent() {
        let m = mat![[1, 1], [0, 1]];
        assert_eq!(invert(&m).unwrap(), mat![[1, -1], [0, 1]]);
        assert_eq!(invert(&mat![[1, 1], [1, 1]]), Err(Singular));
    }

    #[test]
    fn zero_dimension_matrices_flow_through() {
        let m = ExactMatrix::zeros(0, 3);
        let (r, pivots, t) = rref(&m);
        assert_eq!(r.rows(), 0);
        assert!(pivots.is_empty());
        assert_eq!(t.rows(), 0);
        assert_eq!(nullspace(&m).len(), 3);
        let tall = ExactMatrix::zeros(3, 0);
        assert_eq!(rank(&tall), 0);
        assert!(nullspace(&tall).is_empty());
        assert_eq!(invert(&ExactMatrix::zeros(0, 0)).unwrap().rows(), 0);
    }

    #[test]
    fn commutant_nullities() {
        // Scalars commute with everything.
        let scalar = mat![[5, 0], [0, 5]];
        assert_eq!(nullspace(&commutant_map(&scalar)).len(), 4);
        // Centralizer of a nilpotent Jordan block is span{I, N}.
        let j2 = mat![[0, 1], [0, 0]];
        assert_eq!(nullspace(&commutant_map(&j2)).len(), 2);
        // Distinct eigenvalues: diagonal centralizer.
        let d = mat![[0, 0], [0, 1]];
        assert_eq!(nullspace(&commutant_map(&d)).len(), 2);
    }

    fn arb_matrix(max_dim: usize) -> impl Strategy<Value = ExactMatrix> {
        (1..=max_dim, 1..=max_dim).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-5i64..=5, r * c).prop_map(move |vals| {
                ExactMatrix::from_fn(r, c, |i, j| Scalar::from_int(vals[i * c + j]))
            })
        })
    }

    fn arb_invertible(n: usize) -> impl Strategy<Value = ExactMatrix> {
        proptest::collection::vec(-3i64..=3, n * n)
            .prop_map(move |vals| {
                // Unit lower × unit upper triangular is always invertible.
                let mut lo = ExactMatrix::identity(n);
                let mut hi = ExactMatrix::identity(n);
                for i in 0..n {
                    for j in 0..i {
                        lo.set(i, j, Scalar::from_int(vals[i * n + j]));
                        hi.set(j, i, Scalar::from_int(vals[j * n + i]));
                    }
                }
                lo.mul(&hi)
            })
    }

    proptest! {
        #[test]
        fn rref_certificate(m in arb_matrix(4)) {
            let (r, pivots, t) = rref(&m);
            prop_assert_eq!(t.mul(&m), r);
            prop_assert_eq!(pivots.len(), rank(&m));
            let t_inv = invert(&t).unwrap();
            prop_assert_eq!(t.mul(&t_inv), ExactMatrix::identity(m.rows()));
        }

        #[test]
        fn rank_nullity(m in arb_matrix(4)) {
            let basis = nullspace(&m);
            prop_assert_eq!(rank(&m) + basis.len(), m.cols());
            for v in basis {
                prop_assert!(m.mul(&v).is_zero());
            }
        }

        #[test]
        fn commutant_nullity_is_conjugation_invariant(
            a in arb_matrix(3).prop_filter("square", ExactMatrix::is_square),
            p_seed in arb_invertible(3),
        ) {
            let n = a.rows();
            let p = p_seed.submatrix(0, n, 0, n);
            let conj = p.mul(&a).mul(&invert(&p).unwrap());
            prop_assert_eq!(
                nullspace(&commutant_map(&a)).len(),
                nullspace(&commutant_map(&conj)).len()
            );
        }
    }
}
