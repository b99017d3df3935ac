//! Weyr canonical form with an exact transforming witness.
//!
//! The reduction engine works with Weyr matrices rather than Jordan ones
//! because the centralizer of a Weyr matrix is block upper triangular,
//! which is what makes strip-by-strip reduction well ordered. Jordan form
//! is kept as a display presentation via a permutation.

use crate::matrix::{invert, nullspace, rank, ExactMatrix};
use crate::poly::{char_poly, roots_in_qi};
use crate::scalar::Scalar;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EigenError {
    /// The characteristic polynomial does not split over ℚ(i); carries the
    /// monic rootless residual factor, ascending coefficient order.
    #[error("eigenvalues not in Q(i); residual factor coefficients {}", format_poly(.0))]
    EigenvaluesNotInField(Vec<Scalar>),
    #[error("not an eigenvalue")]
    NotAnEigenvalue,
}

fn format_poly(coeffs: &[Scalar]) -> String {
    let parts: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

/// Eigenvalues with their Jordan partitions, sorted by the scalar total
/// order; partition `q_1 ≥ q_2 ≥ …` lists Jordan block sizes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EigenStructure {
    pub eigenvalues: Vec<(Scalar, Vec<usize>)>,
}

impl EigenStructure {
    pub fn total_dim(&self) -> usize {
        self.eigenvalues
            .iter()
            .map(|(_, q)| q.iter().sum::<usize>())
            .sum()
    }

    /// Number of superdiagonal units in the Jordan presentation.
    pub fn superdiagonal_units(&self) -> usize {
        self.eigenvalues
            .iter()
            .map(|(_, q)| q.iter().map(|&s| s - 1).sum::<usize>())
            .sum()
    }
}

/// Σ_i Σ_j (2j−1)·q_ij — the dimension of the centralizer of any matrix
/// with this eigenstructure.
pub fn centralizer_dim(structure: &EigenStructure) -> usize {
    structure
        .eigenvalues
        .iter()
        .map(|(_, q)| {
            q.iter()
                .enumerate()
                .map(|(j, &size)| (2 * (j + 1) - 1) * size)
                .sum::<usize>()
        })
        .sum()
}

/// A Weyr matrix with its eigenstructure and Weyr characteristics
/// (`strip_sizes[i]` is the conjugate partition of eigenvalue i's Jordan
/// partition).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeyrForm {
    pub w: ExactMatrix,
    pub structure: EigenStructure,
    pub strip_sizes: Vec<Vec<usize>>,
}

/// One horizontal/vertical strip of a Weyr matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strip {
    /// Index into `structure.eigenvalues`.
    pub eig: usize,
    /// 1-based strip index within the eigenvalue.
    pub index: usize,
    pub start: usize,
    pub size: usize,
}

impl WeyrForm {
    /// All strips in row order (eigenvalues ascending, strips 1, 2, …).
    pub fn strips(&self) -> Vec<Strip> {
        let mut out = Vec::new();
        let mut start = 0;
        for (eig, sizes) in self.strip_sizes.iter().enumerate() {
            for (k, &size) in sizes.iter().enumerate() {
                out.push(Strip {
                    eig,
                    index: k + 1,
                    start,
                    size,
                });
                start += size;
            }
        }
        out
    }
}

/// All eigenvalues of A with multiplicity, sorted by the total order.
pub fn eigenvalues(a: &ExactMatrix) -> Result<Vec<Scalar>, EigenError> {
    let roots =
        roots_in_qi(&char_poly(a)).map_err(EigenError::EigenvaluesNotInField)?;
    let mut flat = Vec::with_capacity(a.rows());
    for (root, mult) in roots {
        flat.extend(std::iter::repeat(root).take(mult));
    }
    Ok(flat)
}

/// Jordan block sizes of A at λ: the conjugate of the Weyr characteristic
/// `w_k = dim ker(A−λI)^k − dim ker(A−λI)^{k−1}`.
pub fn jordan_partition(a: &ExactMatrix, lambda: &Scalar) -> Result<Vec<usize>, EigenError> {
    let n = a.rows();
    let shifted = a.sub(&ExactMatrix::identity(n).scale(lambda));
    if rank(&shifted) == n {
        return Err(EigenError::NotAnEigenvalue);
    }
    Ok(conjugate_partition(&weyr_characteristic(&shifted)))
}

/// Strip sizes `w_k` of a nilpotent-at-0 part: kernel dimension increments
/// of successive powers.
fn weyr_characteristic(shifted: &ExactMatrix) -> Vec<usize> {
    let n = shifted.rows();
    let mut sizes = Vec::new();
    let mut power = shifted.clone();
    let mut prev_nullity = 0;
    loop {
        let nullity = n - rank(&power);
        if nullity == prev_nullity {
            break;
        }
        sizes.push(nullity - prev_nullity);
        prev_nullity = nullity;
        power = power.mul(shifted);
    }
    sizes
}

fn conjugate_partition(w: &[usize]) -> Vec<usize> {
    let max = w.first().copied().unwrap_or(0);
    (1..=max).map(|j| w.iter().filter(|&&x| x >= j).count()).collect()
}

/// The Weyr nilpotent pattern for strip sizes w: identity-topped blocks
/// `[I_{w_{k+1}}; 0]` between consecutive strips.
fn weyr_nilpotent(w: &[usize]) -> ExactMatrix {
    let dim: usize = w.iter().sum();
    let mut n = ExactMatrix::zeros(dim, dim);
    let mut row_start = 0;
    for k in 0..w.len().saturating_sub(1) {
        let col_start = row_start + w[k];
        for j in 0..w[k + 1] {
            n.set(row_start + j, col_start + j, Scalar::one());
        }
        row_start += w[k];
    }
    n
}

/// Compute the Weyr form of A and a witness: returns `(form, Y)` with
/// `Y·A·Y⁻¹ = form.w`, exactly. Deterministic; if A is already a Weyr
/// matrix the witness is the identity.
pub fn weyr_form(a: &ExactMatrix) -> Result<(WeyrForm, ExactMatrix), EigenError> {
    assert!(a.is_square(), "weyr_form requires a square matrix");
    let n = a.rows();
    let roots = roots_in_qi(&char_poly(a)).map_err(EigenError::EigenvaluesNotInField)?;

    let mut structure = EigenStructure { eigenvalues: Vec::new() };
    let mut strip_sizes = Vec::new();
    let mut basis_columns: Vec<ExactMatrix> = Vec::new();

    for (lambda, mult) in &roots {
        let shifted = a.sub(&ExactMatrix::identity(n).scale(lambda));
        // Kernel chain of (A−λI)^k, k = 1.. until the generalized eigenspace
        // is exhausted.
        let mut kernels: Vec<Vec<ExactMatrix>> = Vec::new();
        let mut power = shifted.clone();
        loop {
            let basis = nullspace(&power);
            let done = basis.len() == *mult;
            kernels.push(basis);
            if done {
                break;
            }
            power = power.mul(&shifted);
        }
        let height = kernels.len();
        let w: Vec<usize> = {
            let mut prev = 0;
            kernels
                .iter()
                .map(|k| {
                    let inc = k.len() - prev;
                    prev = k.len();
                    inc
                })
                .collect()
        };

        // Jordan chains, tallest first, completed deterministically from the
        // canonical kernel bases. chain[k] is the strip-(k+1) vector.
        let mut chains: Vec<Vec<ExactMatrix>> = Vec::new();
        for h in (1..=height).rev() {
            let mut occupied = crate::linsys::LinSys::new(n);
            if h >= 2 {
                for v in &kernels[h - 2] {
                    occupied.add_row(column_to_vec(v));
                }
            }
            for chain in &chains {
                occupied.add_row(column_to_vec(&chain[h - 1]));
            }
            let needed = w[h - 1];
            for cand in &kernels[h - 1] {
                if chains.iter().filter(|c| c.len() >= h).count() == needed {
                    break;
                }
                if occupied.add_row(column_to_vec(cand)) {
                    let mut chain = vec![cand.clone()];
                    for _ in 1..h {
                        chain.push(shifted.mul(chain.last().unwrap()));
                    }
                    chain.reverse();
                    chains.push(chain);
                }
            }
            assert_eq!(
                chains.iter().filter(|c| c.len() >= h).count(),
                needed,
                "kernel ascent must supply every chain"
            );
        }
        chains.sort_by(|a, b| b.len().cmp(&a.len()));

        // Weyr basis order: strips ascending, chains (deepest first) within.
        for k in 0..height {
            for chain in &chains {
                if chain.len() > k {
                    basis_columns.push(chain[k].clone());
                }
            }
        }

        let q: Vec<usize> = chains.iter().map(Vec::len).collect();
        structure.eigenvalues.push((lambda.clone(), q));
        strip_sizes.push(w);
    }

    // Assemble the witness and the Weyr matrix, then verify exactly.
    let mut p = ExactMatrix::zeros(n, n);
    for (c, col) in basis_columns.iter().enumerate() {
        for r in 0..n {
            p.set(r, c, col.at(r, 0).clone());
        }
    }
    let y = invert(&p).expect("generalized eigenvectors form a basis");

    let mut w_matrix = ExactMatrix::zeros(n, n);
    let mut offset = 0;
    for (i, (lambda, _)) in structure.eigenvalues.iter().enumerate() {
        let dim: usize = strip_sizes[i].iter().sum();
        let block = ExactMatrix::identity(dim)
            .scale(lambda)
            .add(&weyr_nilpotent(&strip_sizes[i]));
        w_matrix.set_block(offset, offset, &block);
        offset += dim;
    }
    assert_eq!(
        y.mul(a).mul(&invert(&y).unwrap()),
        w_matrix,
        "Weyr conjugation identity must hold exactly"
    );

    Ok((
        WeyrForm {
            w: w_matrix,
            structure,
            strip_sizes,
        },
        y,
    ))
}

fn column_to_vec(col: &ExactMatrix) -> Vec<Scalar> {
    (0..col.rows()).map(|r| col.at(r, 0).clone()).collect()
}

/// The permutation P with `P·W·Pᵀ = J`, J a Jordan matrix with blocks
/// ordered by (eigenvalue order, decreasing size).
pub fn jordan_presentation(form: &WeyrForm) -> (ExactMatrix, ExactMatrix) {
    let n = form.w.rows();
    // Weyr order runs (strip k, chain b); Jordan order runs (block b, pos k).
    let mut weyr_index: Vec<(usize, usize, usize)> = Vec::new(); // (eig, k, b)
    for (eig, w) in form.strip_sizes.iter().enumerate() {
        for (k, &size) in w.iter().enumerate() {
            for b in 0..size {
                weyr_index.push((eig, k, b));
            }
        }
    }
    let mut jordan_index: Vec<(usize, usize, usize)> = Vec::new(); // (eig, b, k)
    for (eig, (_, q)) in form.structure.eigenvalues.iter().enumerate() {
        for (b, &size) in q.iter().enumerate() {
            for k in 0..size {
                jordan_index.push((eig, b, k));
            }
        }
    }
    let mut p = ExactMatrix::zeros(n, n);
    for (old, &(eig, k, b)) in weyr_index.iter().enumerate() {
        let new = jordan_index
            .iter()
            .position(|&(e, bb, kk)| (e, bb, kk) == (eig, b, k))
            .expect("indices are two orderings of the same set");
        p.set(new, old, Scalar::one());
    }

    let mut j = ExactMatrix::zeros(n, n);
    let mut offset = 0;
    for (lambda, q) in &form.structure.eigenvalues {
        for &size in q {
            for r in 0..size {
                j.set(offset + r, offset + r, lambda.clone());
                if r + 1 < size {
                    j.set(offset + r, offset + r + 1, Scalar::one());
                }
            }
            offset += size;
        }
    }
    debug_assert_eq!(p.mul(&form.w).mul(&p.transpose()), j);
    (p, j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat;
    use crate::matrix::commutant_map;
    use crate::scalar::parse_scalar;
    use proptest::prelude::*;

    fn sc(t: &str) -> Scalar {
        parse_scalar(t).unwrap()
    }

    #[test]
    fn eigenvalue_examples() {
        assert_eq!(eigenvalues(&mat![[5, 1], [0, 5]]).unwrap(), vec![sc("5"), sc("5")]);
        assert_eq!(
            eigenvalues(&mat![[0, -1], [1, 0]]).unwrap(),
            vec![sc("-i"), sc("i")]
        );
        assert_eq!(
            eigenvalues(&mat![[0, 1], [2, 0]]).unwrap_err(),
            EigenError::EigenvaluesNotInField(vec![sc("-2"), sc("0"), sc("1")])
        );
    }

    #[test]
    fn jordan_partition_examples() {
        assert_eq!(jordan_partition(&mat![[0, 1], [0, 0]], &sc("0")).unwrap(), vec![2]);
        assert_eq!(
            jordan_partition(&ExactMatrix::zeros(3, 3), &sc("0")).unwrap(),
            vec![1, 1, 1]
        );
        let j2_plus_j1 = mat![[0, 1, 0], [0, 0, 0], [0, 0, 0]];
        assert_eq!(jordan_partition(&j2_plus_j1, &sc("0")).unwrap(), vec![2, 1]);
        assert_eq!(
            jordan_partition(&mat![[0, 1], [0, 0]], &sc("1")),
            Err(EigenError::NotAnEigenvalue)
        );
    }

    #[test]
    fn weyr_of_single_jordan_block_is_itself() {
        let a = mat![[7, 1], [0, 7]];
        let (form, y) = weyr_form(&a).unwrap();
        assert_eq!(form.w, a);
        assert_eq!(y, ExactMatrix::identity(2));
        assert_eq!(form.strip_sizes, vec![vec![1, 1]]);
    }

    #[test]
    fn weyr_of_diagonalizable() {
        let a = mat![[1, 1], [0, 2]];
        let (form, y) = weyr_form(&a).unwrap();
        assert_eq!(form.w, mat![[1, 0], [0, 2]]);
        let y_inv = invert(&y).unwrap();
        assert_eq!(y.mul(&a).mul(&y_inv), form.w);
    }

    #[test]
    fn weyr_of_j2_plus_j1() {
        let a = mat![[0, 1, 0], [0, 0, 0], [0, 0, 0]];
        let (form, y) = weyr_form(&a).unwrap();
        // Strips (2,1): single nilpotent unit in the (strip1, strip2) block.
        assert_eq!(form.w, mat![[0, 0, 1], [0, 0, 0], [0, 0, 0]]);
        assert_eq!(form.strip_sizes, vec![vec![2, 1]]);
        assert_eq!(form.structure.eigenvalues[0].1, vec![2, 1]);
        assert_eq!(y.mul(&a).mul(&invert(&y).unwrap()), form.w);
    }

    #[test]
    fn weyr_input_gets_identity_witness() {
        // Two eigenvalues, one with Weyr characteristic (2,1).
        let w = mat![
            [0, 0, 1, 0],
            [0, 0, 0, 0],
            [0, 0, 0, 0],
            [0, 0, 0, 4]
        ];
        let (form, y) = weyr_form(&w).unwrap();
        assert_eq!(form.w, w);
        assert_eq!(y, ExactMatrix::identity(4));
    }

    #[test]
    fn centralizer_dim_examples() {
        let single = EigenStructure {
            eigenvalues: vec![(sc("0"), vec![2])],
        };
        assert_eq!(centralizer_dim(&single), 2);
        let repeated = EigenStructure {
            eigenvalues: vec![(sc("0"), vec![1, 1])],
        };
        assert_eq!(centralizer_dim(&repeated), 4);
        let distinct = EigenStructure {
            eigenvalues: vec![(sc("0"), vec![1]), (sc("1"), vec![1])],
        };
        assert_eq!(centralizer_dim(&distinct), 2);
    }

    #[test]
    fn jordan_presentation_examples() {
        let (formj2, _) = weyr_form(&mat![[3, 1], [0, 3]]).unwrap();
        let (p, j) = jordan_presentation(&formj2);
        assert_eq!(p, ExactMatrix::identity(2));
        assert_eq!(j, mat![[3, 1], [0, 3]]);

        let (form, _) = weyr_form(&mat![[0, 1, 0], [0, 0, 0], [0, 0, 0]]).unwrap();
        let (p, j) = jordan_presentation(&form);
        assert_eq!(j, mat![[0, 1, 0], [0, 0, 0], [0, 0, 0]]);
        assert_eq!(p.mul(&form.w).mul(&p.transpose()), j);
    }

    fn arb_nilpotent(n: usize) -> impl Strategy<Value = ExactMatrix> {
        // Strictly upper triangular in a random-ish conjugated basis.
        proptest::collection::vec(-3i64..=3, n * n).prop_map(move |vals| {
            let mut m = ExactMatrix::zeros(n, n);
            let mut idx = 0;
            for i in 0..n {
                for j in (i + 1)..n {
                    m.set(i, j, Scalar::from_int(vals[idx]));
                    idx += 1;
                }
            }
            let mut p = ExactMatrix::identity(n);
            for i in 0..n {
                for j in 0..i {
                    p.set(i, j, Scalar::from_int(vals[idx]));
                    idx += 1;
                }
            }
            p.mul(&m).mul(&invert(&p).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn conjugate_partition_duality(a in arb_nilpotent(5)) {
            let q = jordan_partition(&a, &Scalar::zero()).unwrap();
            let (form, _) = weyr_form(&a).unwrap();
            let w = &form.strip_sizes[0];
            prop_assert_eq!(&conjugate_partition(w), &q);
            prop_assert_eq!(&conjugate_partition(&q), w);
        }

        #[test]
        fn centralizer_matches_commutant_nullity(a in arb_nilpotent(4)) {
            let (form, _) = weyr_form(&a).unwrap();
            let nullity = crate::matrix::nullspace(&commutant_map(&a)).len();
            prop_assert_eq!(centralizer_dim(&form.structure), nullity);
        }

        #[test]
        fn witness_conjugates_exactly(a in arb_nilpotent(4)) {
            let (form, y) = weyr_form(&a).unwrap();
            prop_assert_eq!(y.mul(&a).mul(&invert(&y).unwrap()), form.w.clone());
            // Determinism: a second run yields identical output.
            let (form2, y2) = weyr_form(&a).unwrap();
            prop_assert_eq!(form, form2);
            prop_assert_eq!(y, y2);
        }
    }
}
