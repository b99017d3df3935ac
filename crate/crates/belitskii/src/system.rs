//! Linear system triples (A, B, C) and the equivalence group action.

use crate::matrix::{invert, ExactMatrix};
use crate::scalar::scalar_total_order;
use std::cmp::Ordering;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SystemError {
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("group element is singular")]
    Singular,
}

/// A triple (A, B, C) with A: n×n, B: n×m, C: l×n.
///
/// m counts inputs, n states, l outputs; any of m, n, l may be zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemTriple {
    pub a: ExactMatrix,
    pub b: ExactMatrix,
    pub c: ExactMatrix,
}

impl SystemTriple {
    pub fn new(a: ExactMatrix, b: ExactMatrix, c: ExactMatrix) -> Result<Self, SystemError> {
        if !a.is_square() {
            return Err(SystemError::SizeMismatch(format!(
                "A must be square, got {}×{}",
                a.rows(),
                a.cols()
            )));
        }
        let n = a.rows();
        if b.rows() != n {
            return Err(SystemError::SizeMismatch(format!(
                "B must have {} rows to match A, got {}",
                n,
                b.rows()
            )));
        }
        if c.cols() != n {
            return Err(SystemError::SizeMismatch(format!(
                "C must have {} columns to match A, got {}",
                n,
                c.cols()
            )));
        }
        Ok(SystemTriple { a, b, c })
    }

    /// (m, n, l) = (inputs, states, outputs).
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.b.cols(), self.a.rows(), self.c.rows())
    }

    pub fn total_dim(&self) -> usize {
        let (m, n, l) = self.dims();
        m + n + l
    }

    /// Deterministic total order: by dimension vector, then by the entries
    /// of A, B, C in row-major scalar order. Used to sort direct summands.
    pub fn cmp_canonical(&self, other: &SystemTriple) -> Ordering {
        self.dims()
            .cmp(&other.dims())
            .then_with(|| cmp_entries(&self.a, &other.a))
            .then_with(|| cmp_entries(&self.b, &other.b))
            .then_with(|| cmp_entries(&self.c, &other.c))
    }

    /// Direct sum of two systems, block-diagonal in every coordinate.
    pub fn direct_sum(&self, other: &SystemTriple) -> SystemTriple {
        SystemTriple {
            a: self.a.direct_sum(&other.a),
            b: self.b.direct_sum(&other.b),
            c: self.c.direct_sum(&other.c),
        }
    }
}

fn cmp_entries(a: &ExactMatrix, b: &ExactMatrix) -> Ordering {
    debug_assert_eq!((a.rows(), a.cols()), (b.rows(), b.cols()));
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let ord = scalar_total_order(a.at(i, j), b.at(i, j));
            if ord != Ordering::Equal {
                return ord;
            }
        }
    }
    Ordering::Equal
}

/// An element (X, Y, Z) of GL_m × GL_n × GL_l.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupElement {
    pub x: ExactMatrix,
    pub y: ExactMatrix,
    pub z: ExactMatrix,
}

impl GroupElement {
    pub fn identity(m: usize, n: usize, l: usize) -> GroupElement {
        GroupElement {
            x: ExactMatrix::identity(m),
            y: ExactMatrix::identity(n),
            z: ExactMatrix::identity(l),
        }
    }

    /// Composition: `(self ∘ g)` acts as self after g.
    pub fn compose(&self, g: &GroupElement) -> GroupElement {
        GroupElement {
            x: self.x.mul(&g.x),
            y: self.y.mul(&g.y),
            z: self.z.mul(&g.z),
        }
    }
}

/// The equivalence action: (X,Y,Z)·(A,B,C) = (YAY⁻¹, YBX⁻¹, ZCY⁻¹).
pub fn apply_group(g: &GroupElement, sys: &SystemTriple) -> Result<SystemTriple, SystemError> {
    let (m, n, l) = sys.dims();
    if g.x.rows() != m || g.x.cols() != m || g.y.rows() != n || g.y.cols() != n
        || g.z.rows() != l || g.z.cols() != l
    {
        return Err(SystemError::SizeMismatch(format!(
            "group element sized ({}, {}, {}) applied to system sized ({}, {}, {})",
            g.x.rows(),
            g.y.rows(),
            g.z.rows(),
            m,
            n,
            l
        )));
    }
    let x_inv = invert(&g.x).map_err(|_| SystemError::Singular)?;
    let y_inv = invert(&g.y).map_err(|_| SystemError::Singular)?;
    invert(&g.z).map_err(|_| SystemError::Singular)?;
    Ok(SystemTriple {
        a: g.y.mul(&sys.a).mul(&y_inv),
        b: g.y.mul(&sys.b).mul(&x_inv),
        c: g.z.mul(&sys.c).mul(&y_inv),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat;

    fn example() -> SystemTriple {
        SystemTriple::new(
            mat![[2, 1], [0, 2]],
            mat![[1], [1]],
            mat![[0, 1]],
        )
        .unwrap()
    }

    #[test]
    fn dims_and_validation() {
        let sys = example();
        assert_eq!(sys.dims(), (1, 2, 1));
        assert_eq!(sys.total_dim(), 4);
        let bad = SystemTriple::new(mat![[1, 0], [0, 1]], mat![[1]], mat![[1, 0]]);
        assert!(matches!(bad, Err(SystemError::SizeMismatch(_))));
    }

    #[test]
    fn zero_dimensional_sides_are_allowed() {
        let sys = SystemTriple::new(
            mat![[3]],
            ExactMatrix::zeros(1, 0),
            ExactMatrix::zeros(0, 1),
        )
        .unwrap();
        assert_eq!(sys.dims(), (0, 1, 0));
        let g = GroupElement::identity(0, 1, 0);
        assert_eq!(apply_group(&g, &sys).unwrap(), sys);
    }

    #[test]
    fn identity_acts_trivially() {
        let sys = example();
        let g = GroupElement::identity(1, 2, 1);
        assert_eq!(apply_group(&g, &sys).unwrap(), sys);
    }

    #[test]
    fn action_is_a_left_action() {
        let sys = example();
        let g = GroupElement {
            x: mat![[2]],
            y: mat![[1, 1], [0, 1]],
            z: mat![[3]],
        };
        let h = GroupElement {
            x: mat![[1]],
            y: mat![[1, 0], [2, 1]],
            z: mat![[1]],
        };
        let lhs = apply_group(&g, &apply_group(&h, &sys).unwrap()).unwrap();
        let rhs = apply_group(&g.compose(&h), &sys).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn singular_element_is_rejected() {
        let sys = example();
        let g = GroupElement {
            x: mat![[0]],
            y: ExactMatrix::identity(2),
            z: ExactMatrix::identity(1),
        };
        assert_eq!(apply_group(&g, &sys), Err(SystemError::Singular));
    }

    #[test]
    fn wrong_size_element_is_rejected() {
        let sys = example();
        let g = GroupElement::identity(2, 2, 1);
        assert!(matches!(
            apply_group(&g, &sys),
            Err(SystemError::SizeMismatch(_))
        ));
    }

    #[test]
    fn canonical_order_is_by_dims_then_entries() {
        let small = SystemTriple::new(mat![[0]], ExactMatrix::zeros(1, 0), ExactMatrix::zeros(0, 1)).unwrap();
        let big = example();
        assert_eq!(small.cmp_canonical(&big), std::cmp::Ordering::Less);
        let other = SystemTriple::new(
            mat![[2, 1], [0, 3]],
            mat![[1], [1]],
            mat![[0, 1]],
        )
        .unwrap();
        assert_eq!(example().cmp_canonical(&other), std::cmp::Ordering::Less);
        assert_eq!(example().cmp_canonical(&example()), std::cmp::Ordering::Equal);
    }

    #[test]
    fn direct_sum_blocks() {
        let s = example().direct_sum(&example());
        assert_eq!(s.dims(), (2, 4, 2));
        assert_eq!(s.a.at(2, 2), &crate::scalar::Scalar::from_int(2));
        assert!(s.a.at(0, 2).is_zero());
    }
}
