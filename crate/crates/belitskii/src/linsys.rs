//! Incremental homogeneous linear systems over ℚ(i).
//!
//! The reduction engine tracks each intermediate stabilizer group as the
//! solution space of a growing homogeneous system over the m²+n²+l² group
//! coordinates. This module maintains that system in reduced row echelon
//! form so rank, nullity, coordinate patterns, and constrained solves stay
//! cheap as equations accumulate.

use crate::scalar::Scalar;

/// A homogeneous system `S·x = 0` over `nvars` variables, stored as RREF
/// rows. The solution space shrinks monotonically as equations are added.
#[derive(Clone)]
pub struct LinSys {
    nvars: usize,
    /// RREF rows, parallel to `pivots`, pivot columns strictly increasing.
    rows: Vec<Vec<Scalar>>,
    pivots: Vec<usize>,
}

impl LinSys {
    pub fn new(nvars: usize) -> Self {
        LinSys {
            nvars,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Dimension of the solution space.
    pub fn nullity(&self) -> usize {
        self.nvars - self.rows.len()
    }

    /// Eliminate all pivot components of `v` in place.
    pub fn reduce(&self, v: &mut [Scalar]) {
        assert_eq!(v.len(), self.nvars);
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if !v[p].is_zero() {
                let factor = v[p].clone();
                for c in p..self.nvars {
                    if !row[c].is_zero() {
                        v[c] = &v[c] - &(&factor * &row[c]);
                    }
                }
            }
        }
    }

    /// Add one equation `coeffs·x = 0`. Returns true if it was independent
    /// (the solution space lost a dimension).
    pub fn add_row(&mut self, mut coeffs: Vec<Scalar>) -> bool {
        self.reduce(&mut coeffs);
        let Some(pivot) = coeffs.iter().position(|c| !c.is_zero()) else {
            return false;
        };
        let inv = coeffs[pivot].inv().expect("pivot nonzero");
        for c in coeffs.iter_mut() {
            if !c.is_zero() {
                *c = &*c * &inv;
            }
        }
        // Back-substitute into existing rows to keep the full RREF shape.
        for row in self.rows.iter_mut() {
            if !row[pivot].is_zero() {
                let factor = row[pivot].clone();
                for c in pivot..self.nvars {
                    if !coeffs[c].is_zero() {
                        row[c] = &row[c] - &(&factor * &coeffs[c]);
                    }
                }
            }
        }
        let at = self.pivots.partition_point(|&p| p < pivot);
        self.pivots.insert(at, pivot);
        self.rows.insert(at, coeffs);
        true
    }

    /// Whether `x[var] = 0` for every solution.
    pub fn is_zero_coord(&self, var: usize) -> bool {
        let mut e = vec![Scalar::zero(); self.nvars];
        e[var] = Scalar::one();
        self.reduce(&mut e);
        e.iter().all(Scalar::is_zero)
    }

    /// Whether `x[a] = x[b]` for every solution.
    pub fn coords_locked_equal(&self, a: usize, b: usize) -> bool {
        if a == b {
            return true;
        }
        let mut e = vec![Scalar::zero(); self.nvars];
        e[a] = Scalar::one();
        e[b] = Scalar::from_int(-1);
        self.reduce(&mut e);
        e.iter().all(Scalar::is_zero)
    }

    /// Deterministic basis of the solution space: one vector per free
    /// variable, in increasing free-variable order.
    pub fn solution_basis(&self) -> Vec<Vec<Scalar>> {
        let mut basis = Vec::with_capacity(self.nullity());
        let mut next_pivot = 0;
        for free in 0..self.nvars {
            if next_pivot < self.pivots.len() && self.pivots[next_pivot] == free {
                next_pivot += 1;
                continue;
            }
            let mut v = vec![Scalar::zero(); self.nvars];
            v[free] = Scalar::one();
            for (row, &p) in self.rows.iter().zip(&self.pivots) {
                v[p] = -&row[free];
            }
            basis.push(v);
        }
        basis
    }

    /// Dimension of the projection of the solution space onto `coords`.
    pub fn proj_dim(&self, coords: &[usize]) -> usize {
        let mut echelon: Vec<Vec<Scalar>> = Vec::new();
        for sol in self.solution_basis() {
            let mut v: Vec<Scalar> = coords.iter().map(|&c| sol[c].clone()).collect();
            for row in &echelon {
                let lead = row.iter().position(|x| !x.is_zero()).unwrap();
                if !v[lead].is_zero() {
                    let factor = &v[lead] / &row[lead];
                    for i in lead..v.len() {
                        v[i] = &v[i] - &(&factor * &row[i]);
                    }
                }
            }
            if v.iter().any(|x| !x.is_zero()) {
                echelon.push(v);
            }
        }
        echelon.len()
    }

    /// The constraint rows restricted to `coords`, zero rows dropped. A
    /// vector supported on `coords` (and zero elsewhere) satisfies the full
    /// system if and only if it satisfies every restricted row, so the
    /// result characterizes the solutions living inside that coordinate
    /// subspace.
    pub fn restricted_rows(&self, coords: &[usize]) -> Vec<Vec<Scalar>> {
        self.rows
            .iter()
            .map(|row| coords.iter().map(|&c| row[c].clone()).collect::<Vec<_>>())
            .filter(|r| r.iter().any(|x| !x.is_zero()))
            .collect()
    }

    /// Solve for one solution of the homogeneous system that additionally
    /// satisfies the affine conditions `row·x = rhs`. Returns the canonical
    /// particular solution (free variables of the combined system set to
    /// zero), or `None` if the conditions are inconsistent.
    pub fn solve_affine(&self, conditions: &[(Vec<Scalar>, Scalar)]) -> Option<Vec<Scalar>> {
        // Working RREF of [coeffs | rhs].
        let mut rows: Vec<(Vec<Scalar>, Scalar)> = self
            .rows
            .iter()
            .map(|r| (r.clone(), Scalar::zero()))
            .collect();
        let mut pivots: Vec<usize> = self.pivots.clone();
        for (coeffs, rhs) in conditions {
            assert_eq!(coeffs.len(), self.nvars);
            let mut v = coeffs.clone();
            let mut b = rhs.clone();
            for ((row, r0), &p) in rows.iter().zip(&pivots) {
                if !v[p].is_zero() {
                    let factor = v[p].clone();
                    for c in 0..self.nvars {
                        if !row[c].is_zero() {
                            v[c] = &v[c] - &(&factor * &row[c]);
                        }
                    }
                    b = &b - &(&factor * r0);
                }
            }
            match v.iter().position(|c| !c.is_zero()) {
                None => {
                    if !b.is_zero() {
                        return None;
                    }
                }
                Some(pivot) => {
                    let inv = v[pivot].inv().unwrap();
                    for c in v.iter_mut() {
                        if !c.is_zero() {
                            *c = &*c * &inv;
                        }
                    }
                    b = &b * &inv;
                    for ((row, r0), _) in rows.iter_mut().zip(&pivots) {
                        if !row[pivot].is_zero() {
                            let factor = row[pivot].clone();
                            for c in 0..self.nvars {
                                if !v[c].is_zero() {
                                    row[c] = &row[c] - &(&factor * &v[c]);
                                }
                            }
                            *r0 = &*r0 - &(&factor * &b);
                        }
                    }
                    let at = pivots.partition_point(|&p| p < pivot);
                    pivots.insert(at, pivot);
                    rows.insert(at, (v, b));
                }
            }
        }
        let mut x = vec![Scalar::zero(); self.nvars];
        for ((_, rhs), &p) in rows.iter().zip(&pivots) {
            x[p] = rhs.clone();
        }
        Some(x)
    }
}
