//! Reduction of a system triple to its canonical form.
//!
//! The engine reduces A to Weyr form, then finishes B's row strips bottom-up
//! and C's column strips left-to-right. Throughout, the transformations still
//! available form the invertible part of a linear space L: the solution space
//! of a homogeneous system in the entries of (X, Y, Z). L starts as the
//! commutant condition of A's Weyr form and grows by exact preservation
//! equations — the rows of YB − BX for every finished row of B, the columns
//! of ZC − CY for every finished column of C — so at any point L∩GL is
//! precisely the group fixing everything made canonical so far.
//!
//! Within one strip chunk, three moves occur:
//! - regularization clears every cell the additive freedom can always reach
//!   (carries from finished strips and column/row mixing from already
//!   canonical columns/rows), recording the cleared cells as [`BlockKind::Empty`];
//! - edge reduction takes a block with full independent row and column
//!   freedom to its rank normal form, with the identity in the upper right;
//! - loop reduction takes a block whose row and column transforms are locked
//!   equal (a conjugation action) to its Weyr form.
//!
//! Each finished block appends its preservation equations, and the resulting
//! drop in the stabilizer's dimension is asserted to equal the block's σ.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::linsys::LinSys;
use crate::matrix::{rref, ExactMatrix};
use crate::scalar::Scalar;
use crate::system::{apply_group, GroupElement, SystemTriple};
use crate::weyr::{centralizer_dim, weyr_form, EigenError, EigenStructure, Strip, WeyrForm};

/// Errors from [`canonicalize`].
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReduceError {
    #[error(transparent)]
    Eigenvalues(#[from] EigenError),
    /// The state space is zero-dimensional but inputs or outputs remain.
    #[error("state dimension is zero but the system has inputs or outputs")]
    EmptyStateSpace,
}

/// Errors from [`are_equivalent`].
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EquivError {
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error("systems have different dimension vectors")]
    SizeMismatch,
}

/// Which coordinate block of the system a reduced subblock lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    A,
    B,
    C,
}

/// What a subblock was reduced to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BlockKind {
    /// Cleared to zero by regularization: the stabilizer's additive freedom
    /// covers the block, so its entries carry no information.
    Empty,
    /// Rank normal form with an r×r identity in the upper-right corner and
    /// zeros elsewhere.
    EdgeIdentity(usize),
    /// Weyr form of a square block reduced under simultaneous conjugation.
    WeyrBlock(EigenStructure),
}

/// Where a reduced subblock sits: its region and the global row and column
/// indices it covers (not necessarily contiguous after repartitioning).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockLocation {
    pub region: Region,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

/// One entry of the reduction trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedBlock {
    pub kind: BlockKind,
    /// Row count of the subblock.
    pub m_k: usize,
    /// Column count of the subblock.
    pub n_k: usize,
    /// Drop in stabilizer dimension caused by fixing this block.
    pub sigma: usize,
    pub location: BlockLocation,
}

/// One basis direction of the stabilizer's parameter space, shaped like the
/// three matrices of a group element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerDirection {
    pub x: ExactMatrix,
    pub y: ExactMatrix,
    pub z: ExactMatrix,
}

/// Linear parametrization of the group fixing everything reduced so far:
/// the group is exactly the set of invertible triples in the span of
/// `basis`, a linear space that always contains the identity.
#[derive(Clone)]
pub struct StabilizerDescription {
    /// Number of free parameters.
    pub dim: usize,
    /// Basis of the parameter space.
    pub basis: Vec<StabilizerDirection>,
    /// Entries of X touched by some basis direction.
    pub free_x: Vec<(usize, usize)>,
    /// Entries of Y touched by some basis direction.
    pub free_y: Vec<(usize, usize)>,
    /// Entries of Z touched by some basis direction.
    pub free_z: Vec<(usize, usize)>,
    constraints: LinSys,
    dims: (usize, usize, usize),
}

impl StabilizerDescription {
    /// Whether the triple satisfies every linear constraint of the
    /// stabilizer (i.e. lies in the span of `basis`).
    pub fn contains(&self, g: &GroupElement) -> bool {
        let (m, n, l) = self.dims;
        if g.x.rows() != m || g.x.cols() != m || g.y.rows() != n || g.z.rows() != l {
            return false;
        }
        let mut v = Vec::with_capacity(self.constraints.nvars());
        for r in 0..m {
            for c in 0..m {
                v.push(g.x.at(r, c).clone());
            }
        }
        for r in 0..n {
            for c in 0..n {
                v.push(g.y.at(r, c).clone());
            }
        }
        for r in 0..l {
            for c in 0..l {
                v.push(g.z.at(r, c).clone());
            }
        }
        let all: Vec<usize> = (0..self.constraints.nvars()).collect();
        self.constraints.restricted_rows(&all).iter().all(|row| {
            let mut acc = Scalar::zero();
            for (j, coef) in row.iter().enumerate() {
                if !coef.is_zero() && !v[j].is_zero() {
                    acc = &acc + &(coef * &v[j]);
                }
            }
            acc.is_zero()
        })
    }
}

impl fmt::Debug for StabilizerDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StabilizerDescription")
            .field("dim", &self.dim)
            .field("free_x", &self.free_x)
            .field("free_y", &self.free_y)
            .field("free_z", &self.free_z)
            .finish_non_exhaustive()
    }
}

/// The result of a full reduction.
#[derive(Clone, Debug)]
pub struct CanonicalSystem {
    pub canonical: SystemTriple,
    /// Group element with apply_group(witness, input) = canonical, exactly.
    pub witness: GroupElement,
    /// Reduced subblocks in reduction order: A first, then B's strips
    /// bottom-up, then C's strips left-to-right.
    pub trace: Vec<ReducedBlock>,
    pub final_stabilizer: StabilizerDescription,
}

/// Rank normal form of a block under independent invertible row and column
/// transformations.
///
/// Returns `(r, e, t, g)` with `t·m·g⁻¹ = e`, where `e` is zero except for
/// an r×r identity in its upper-right corner and `r = rank(m)`.
pub fn edge_reduce(m: &ExactMatrix) -> (usize, ExactMatrix, ExactMatrix, ExactMatrix) {
    let (reduced, pivots, t) = rref(m);
    let r = pivots.len();
    let rows = m.rows();
    let cols = m.cols();
    let mut e = ExactMatrix::zeros(rows, cols);
    for k in 0..r {
        e.set(k, cols - r + k, Scalar::one());
    }
    // Column transform with e·g = rref(m): unit vectors at the free columns
    // on top, the nonzero reduced rows at the bottom. Unimodular because the
    // reduced rows are elementary at the pivot columns and the unit rows
    // cover the rest.
    let mut g = ExactMatrix::zeros(cols, cols);
    let mut next = 0;
    for j in 0..cols {
        if !pivots.contains(&j) {
            g.set(next, j, Scalar::one());
            next += 1;
        }
    }
    for k in 0..r {
        for j in 0..cols {
            g.set(cols - r + k, j, reduced.at(k, j).clone());
        }
    }
    (r, e, t, g)
}

/// Clear as much of `m` as the additive freedom allows.
///
/// `freedom` spans the translations available on the block. Returns the
/// reduced matrix `m + Σ cᵢ·freedomᵢ`, zero at every pivot cell of the span
/// (cells taken in row-major order), together with the cleared cells. When
/// the span is full the result is the zero matrix; otherwise the block is
/// only partially cleared and the remaining cells stay in play.
pub fn regularize(m: &ExactMatrix, freedom: &[ExactMatrix]) -> (ExactMatrix, Vec<(usize, usize)>) {
    let cols = m.cols();
    let values: Vec<Scalar> = (0..m.rows())
        .flat_map(|r| (0..cols).map(move |c| (r, c)))
        .map(|(r, c)| m.at(r, c).clone())
        .collect();
    let effects: Vec<Vec<Scalar>> = freedom
        .iter()
        .map(|f| {
            assert_eq!((f.rows(), f.cols()), (m.rows(), m.cols()), "freedom shape mismatch");
            (0..f.rows())
                .flat_map(|r| (0..cols).map(move |c| (r, c)))
                .map(|(r, c)| f.at(r, c).clone())
                .collect()
        })
        .collect();
    let (pivot_cells, coeffs) = pivot_combination(&values, &effects);
    let mut out = m.clone();
    for (f, c) in freedom.iter().zip(&coeffs) {
        if !c.is_zero() {
            out = out.add(&f.scale(c));
        }
    }
    let cleared: Vec<(usize, usize)> = pivot_cells.iter().map(|&p| (p / cols, p % cols)).collect();
    for &(r, c) in &cleared {
        debug_assert!(out.at(r, c).is_zero());
    }
    (out, cleared)
}

/// Reduce a square block under simultaneous conjugation: returns its Weyr
/// form together with the conjugating witness.
pub fn loop_reduce(m: &ExactMatrix) -> Result<(WeyrForm, ExactMatrix), EigenError> {
    weyr_form(m)
}

/// The pivot cells of the span of `effects` (leading cells of its row
/// echelon) and one coefficient vector whose combination cancels `values`
/// at exactly those cells. The pivot set depends only on the span, never on
/// `values`.
fn pivot_combination(values: &[Scalar], effects: &[Vec<Scalar>]) -> (Vec<usize>, Vec<Scalar>) {
    if effects.is_empty() || values.is_empty() {
        return (Vec::new(), vec![Scalar::zero(); effects.len()]);
    }
    let e = ExactMatrix::from_rows(effects.to_vec());
    let (_, pivot_cells, t) = rref(&e);
    let mut coeffs = vec![Scalar::zero(); effects.len()];
    for (j, &p) in pivot_cells.iter().enumerate() {
        let alpha = -&values[p];
        if alpha.is_zero() {
            continue;
        }
        for (i, c) in coeffs.iter_mut().enumerate() {
            *c = &*c + &(&alpha * t.at(j, i));
        }
    }
    (pivot_cells, coeffs)
}

/// A set of columns of B (rows of C) still mixed freely among themselves by
/// the stabilizer: the untouched initial group, or the columns/rows tied to
/// an edge identity by an earlier claim.
#[derive(Clone, Debug)]
struct TransGroup {
    indices: Vec<usize>,
    /// None = never claimed; Some(k) = claimed by the k-th edge identity of
    /// the phase. Newer claims are processed first.
    seq: Option<usize>,
}

/// One basis direction of the local regularization freedom.
#[derive(Clone, Copy)]
enum RegDir {
    /// An additive carry from a finished strip: ΔY[row, src] in the B phase,
    /// ΔY[src, col] in the C phase.
    Carry(usize, usize),
    /// Mixing within the phase's own side: ΔX[src, dst] on B's columns,
    /// ΔZ[dst, src] on C's rows.
    Mix(usize, usize),
}

struct Engine {
    m: usize,
    n: usize,
    l: usize,
    /// Total variable count m² + n² + l².
    nv: usize,
    sys: SystemTriple,
    witness: GroupElement,
    /// Homogeneous constraints cutting out the current stabilizer's span.
    eqs: LinSys,
    trace: Vec<ReducedBlock>,
    b_canon: Vec<Vec<bool>>,
    c_canon: Vec<Vec<bool>>,
    b_row_done: Vec<bool>,
    c_col_done: Vec<bool>,
    a_done: bool,
}

impl Engine {
    fn new(sys: SystemTriple) -> Engine {
        let (m, n, l) = sys.dims();
        Engine {
            m,
            n,
            l,
            nv: m * m + n * n + l * l,
            witness: GroupElement::identity(m, n, l),
            eqs: LinSys::new(m * m + n * n + l * l),
            trace: Vec::new(),
            b_canon: vec![vec![false; m]; n],
            c_canon: vec![vec![false; n]; l],
            b_row_done: vec![false; n],
            c_col_done: vec![false; n],
            a_done: false,
            sys,
        }
    }

    fn xi(&self, r: usize, c: usize) -> usize {
        r * self.m + c
    }

    fn yi(&self, r: usize, c: usize) -> usize {
        self.m * self.m + r * self.n + c
    }

    fn zi(&self, r: usize, c: usize) -> usize {
        self.m * self.m + self.n * self.n + r * self.l + c
    }

    fn apply_raw(&mut self, g: &GroupElement) {
        let next = apply_group(g, &self.sys).expect("reduction transforms are invertible");
        if self.a_done {
            assert_eq!(next.a, self.sys.a, "Weyr form of A must be preserved");
        }
        self.witness = g.compose(&self.witness);
        self.sys = next;
    }

    /// Apply `g` and assert that every cell already made canonical is
    /// preserved exactly.
    fn apply_checked(&mut self, g: &GroupElement) {
        let snap = self.sys.clone();
        self.apply_raw(g);
        self.assert_preserved(&snap);
    }

    fn assert_preserved(&self, snap: &SystemTriple) {
        for r in 0..self.n {
            for c in 0..self.m {
                if self.b_canon[r][c] {
                    assert_eq!(
                        self.sys.b.at(r, c),
                        snap.b.at(r, c),
                        "canonical cell of B moved at ({r}, {c})"
                    );
                }
            }
        }
        for r in 0..self.l {
            for c in 0..self.n {
                if self.c_canon[r][c] {
                    assert_eq!(
                        self.sys.c.at(r, c),
                        snap.c.at(r, c),
                        "canonical cell of C moved at ({r}, {c})"
                    );
                }
            }
        }
    }

    /// Canonical solution of "Δ ∈ L with the given coordinates pinned".
    fn solve_delta(&self, targets: &[(usize, Scalar)]) -> Option<Vec<Scalar>> {
        let conditions: Vec<(Vec<Scalar>, Scalar)> = targets
            .iter()
            .map(|(coord, val)| {
                let mut row = vec![Scalar::zero(); self.nv];
                row[*coord] = Scalar::one();
                (row, val.clone())
            })
            .collect();
        self.eqs.solve_affine(&conditions)
    }

    fn group_from_delta(&self, delta: &[Scalar]) -> GroupElement {
        let mut g = GroupElement::identity(self.m, self.n, self.l);
        for r in 0..self.m {
            for c in 0..self.m {
                let d = &delta[self.xi(r, c)];
                if !d.is_zero() {
                    let v = g.x.at(r, c) + d;
                    g.x.set(r, c, v);
                }
            }
        }
        for r in 0..self.n {
            for c in 0..self.n {
                let d = &delta[self.yi(r, c)];
                if !d.is_zero() {
                    let v = g.y.at(r, c) + d;
                    g.y.set(r, c, v);
                }
            }
        }
        for r in 0..self.l {
            for c in 0..self.l {
                let d = &delta[self.zi(r, c)];
                if !d.is_zero() {
                    let v = g.z.at(r, c) + d;
                    g.z.set(r, c, v);
                }
            }
        }
        g
    }

    // ----- phase A -----

    fn reduce_a(&mut self) -> Result<WeyrForm, ReduceError> {
        let (form, y0) = weyr_form(&self.sys.a)?;
        let g = GroupElement {
            x: ExactMatrix::identity(self.m),
            y: y0,
            z: ExactMatrix::identity(self.l),
        };
        self.apply_checked(&g);
        assert_eq!(self.sys.a, form.w, "A must land on its Weyr form");
        self.a_done = true;

        let before = self.eqs.nullity();
        for i in 0..self.n {
            for j in 0..self.n {
                let mut row = vec![Scalar::zero(); self.nv];
                for s in 0..self.n {
                    // (Y·W − W·Y)[i,j] collects +W[s,j] on Y[i,s] and −W[i,s] on Y[s,j].
                    let k = self.yi(i, s);
                    let v = &row[k] + self.sys.a.at(s, j);
                    row[k] = v;
                    let k = self.yi(s, j);
                    let v = &row[k] - self.sys.a.at(i, s);
                    row[k] = v;
                }
                self.eqs.add_row(row);
            }
        }
        let sigma = self.n * self.n - centralizer_dim(&form.structure);
        assert_eq!(
            before - self.eqs.nullity(),
            sigma,
            "stabilizer drop must equal the Weyr block's sigma"
        );
        self.trace.push(ReducedBlock {
            kind: BlockKind::WeyrBlock(form.structure.clone()),
            m_k: self.n,
            n_k: self.n,
            sigma,
            location: BlockLocation {
                region: Region::A,
                rows: (0..self.n).collect(),
                cols: (0..self.n).collect(),
            },
        });
        Ok(form)
    }

    // ----- phase B -----

    fn reduce_b(&mut self, strips: &[Strip]) -> Result<(), ReduceError> {
        if self.m == 0 {
            self.b_row_done = vec![true; self.n];
            return Ok(());
        }
        let mut groups = vec![TransGroup {
            indices: (0..self.m).collect(),
            seq: None,
        }];
        let mut next_seq = 0usize;
        for strip in strips.iter().rev() {
            let mut pending: Vec<usize> = (strip.start..strip.start + strip.size).collect();
            while !pending.is_empty() {
                let take = self.select_chunk_b(&pending);
                let chunk: Vec<usize> = pending[pending.len() - take..].to_vec();
                pending.truncate(pending.len() - take);
                let t0 = self.trace.len();
                self.process_chunk_b(&chunk, &mut groups, &mut next_seq)?;
                let sigma: usize = self.trace[t0..].iter().map(|b| b.sigma).sum();
                let drop = self.append_b_rows(&chunk);
                assert_eq!(drop, sigma, "stabilizer drop across a B chunk must equal Σσ");
            }
        }
        Ok(())
    }

    /// Largest suffix of the strip's pending rows that reduces autonomously:
    /// no live carries from any unfinished row outside it, and full GL
    /// freedom on its own Y sector. Suffixes win because within a strip the
    /// deeper chain families come first and may only receive from shallower
    /// ones, never the other way around.
    fn select_chunk_b(&self, pending: &[usize]) -> usize {
        for take in (1..=pending.len()).rev() {
            let chunk = &pending[pending.len() - take..];
            let outside: Vec<usize> = (0..self.n)
                .filter(|s| !self.b_row_done[*s] && !chunk.contains(s))
                .collect();
            let autonomous = chunk
                .iter()
                .all(|&r| outside.iter().all(|&p| self.eqs.is_zero_coord(self.yi(r, p))));
            if !autonomous {
                continue;
            }
            let mut sector = Vec::with_capacity(take * take);
            for &r in chunk {
                for &s in chunk {
                    sector.push(self.yi(r, s));
                }
            }
            if self.eqs.proj_dim(&sector) == take * take {
                return take;
            }
        }
        panic!("no admissible row chunk: unsupported stabilizer pattern");
    }

    fn process_chunk_b(
        &mut self,
        chunk: &[usize],
        groups: &mut Vec<TransGroup>,
        next_seq: &mut usize,
    ) -> Result<(), ReduceError> {
        loop {
            self.reg_b(chunk);
            let Some(gi) = self.pick_group(groups, |g| {
                g.indices
                    .iter()
                    .any(|&c| chunk.iter().any(|&r| !self.b_canon[r][c]))
            }) else {
                break;
            };
            let cols_act: Vec<usize> = groups[gi]
                .indices
                .iter()
                .copied()
                .filter(|&c| chunk.iter().any(|&r| !self.b_canon[r][c]))
                .collect();
            let rows_act: Vec<usize> = chunk
                .iter()
                .copied()
                .filter(|&r| cols_act.iter().any(|&c| !self.b_canon[r][c]))
                .collect();
            for &r in &rows_act {
                for &c in &cols_act {
                    assert!(
                        !self.b_canon[r][c],
                        "pending cells of a group must fill a rectangle"
                    );
                }
            }
            let (kr, kc) = (rows_act.len(), cols_act.len());
            let mut pair = Vec::with_capacity(kr * kr + kc * kc);
            for &r in &rows_act {
                for &s in &rows_act {
                    pair.push(self.yi(r, s));
                }
            }
            for &c in &cols_act {
                for &d in &cols_act {
                    pair.push(self.xi(c, d));
                }
            }
            let proj = self.eqs.proj_dim(&pair);
            if proj == kr * kr + kc * kc {
                self.edge_step_b(&rows_act, &cols_act, gi, groups, next_seq);
            } else if kr == kc
                && proj == kr * kr
                && self.locked_pair(&rows_act, &cols_act, |r, s| self.yi(r, s), |c, d| self.xi(c, d))
            {
                self.loop_step_b(&rows_act, &cols_act)?;
            } else {
                panic!(
                    "unsupported stabilizer shape on a {kr}×{kc} block of B ({proj} degrees of freedom)"
                );
            }
        }
        Ok(())
    }

    /// Regularization inside a B chunk: clear every pending cell reachable
    /// by carries ΔY[chunk row, finished row] and column mixes
    /// ΔX[canonical column, pending column], then record the cleared cells.
    fn reg_b(&mut self, chunk: &[usize]) {
        let pend: Vec<(usize, usize)> = chunk
            .iter()
            .flat_map(|&r| (0..self.m).map(move |c| (r, c)))
            .filter(|&(r, c)| !self.b_canon[r][c])
            .collect();
        if pend.is_empty() {
            return;
        }
        let mut coords: Vec<usize> = Vec::new();
        let mut kinds: Vec<RegDir> = Vec::new();
        for &r in chunk {
            for s in 0..self.n {
                if self.b_row_done[s] && !self.eqs.is_zero_coord(self.yi(r, s)) {
                    coords.push(self.yi(r, s));
                    kinds.push(RegDir::Carry(r, s));
                }
            }
        }
        let src_cols: Vec<usize> = (0..self.m)
            .filter(|&c| chunk.iter().all(|&r| self.b_canon[r][c]))
            .collect();
        let dst_cols: Vec<usize> = (0..self.m)
            .filter(|&c| chunk.iter().any(|&r| !self.b_canon[r][c]))
            .collect();
        for &src in &src_cols {
            for &dst in &dst_cols {
                if !self.eqs.is_zero_coord(self.xi(src, dst)) {
                    coords.push(self.xi(src, dst));
                    kinds.push(RegDir::Mix(src, dst));
                }
            }
        }
        if coords.is_empty() {
            return;
        }

        // The direction must lie in L and must not move any cell of the
        // chunk that is already canonical.
        let mut local = LinSys::new(coords.len());
        for row in self.eqs.restricted_rows(&coords) {
            local.add_row(row);
        }
        for &r in chunk {
            for c in 0..self.m {
                if !self.b_canon[r][c] {
                    continue;
                }
                let row: Vec<Scalar> =
                    kinds.iter().map(|k| self.reg_coef_b(*k, r, c)).collect();
                if row.iter().any(|x| !x.is_zero()) {
                    local.add_row(row);
                }
            }
        }
        let basis = local.solution_basis();
        if basis.is_empty() {
            return;
        }
        let effects: Vec<Vec<Scalar>> = basis
            .iter()
            .map(|v| {
                pend.iter()
                    .map(|&(r, c)| {
                        let mut acc = Scalar::zero();
                        for (k, kind) in kinds.iter().enumerate() {
                            if v[k].is_zero() {
                                continue;
                            }
                            let coef = self.reg_coef_b(*kind, r, c);
                            if !coef.is_zero() {
                                acc = &acc + &(&v[k] * &coef);
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        let values: Vec<Scalar> = pend.iter().map(|&(r, c)| self.sys.b.at(r, c).clone()).collect();
        let (pivot_cells, coeffs) = pivot_combination(&values, &effects);
        if pivot_cells.is_empty() {
            return;
        }

        let mut delta_local = vec![Scalar::zero(); kinds.len()];
        for (v, cv) in basis.iter().zip(&coeffs) {
            if cv.is_zero() {
                continue;
            }
            for (k, d) in delta_local.iter_mut().enumerate() {
                if !v[k].is_zero() {
                    *d = &*d + &(cv * &v[k]);
                }
            }
        }
        // Apply the column mixes first (their coefficients are the chunk's
        // canonical cells, read now), then the carries (their coefficients
        // live on finished rows, which the mix step preserves); both parts
        // lie in L and their combined action leaves every protected cell
        // exactly in place.
        let snap = self.sys.clone();
        let mut mix = vec![Scalar::zero(); self.nv];
        let mut carry = vec![Scalar::zero(); self.nv];
        let (mut any_mix, mut any_carry) = (false, false);
        for (k, kind) in kinds.iter().enumerate() {
            if delta_local[k].is_zero() {
                continue;
            }
            match kind {
                RegDir::Mix(..) => {
                    mix[coords[k]] = delta_local[k].clone();
                    any_mix = true;
                }
                RegDir::Carry(..) => {
                    carry[coords[k]] = delta_local[k].clone();
                    any_carry = true;
                }
            }
        }
        if any_mix {
            let g = self.group_from_delta(&mix);
            self.apply_raw(&g);
        }
        if any_carry {
            let g = self.group_from_delta(&carry);
            self.apply_raw(&g);
        }
        self.assert_preserved(&snap);

        let mut by_col: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &p in &pivot_cells {
            let (r, c) = pend[p];
            assert!(
                self.sys.b.at(r, c).is_zero(),
                "regularization must clear its pivot cells exactly"
            );
            self.b_canon[r][c] = true;
            by_col.entry(c).or_default().push(r);
        }
        for (c, rows) in by_col {
            let m_k = rows.len();
            self.trace.push(ReducedBlock {
                kind: BlockKind::Empty,
                m_k,
                n_k: 1,
                sigma: m_k,
                location: BlockLocation {
                    region: Region::B,
                    rows,
                    cols: vec![c],
                },
            });
        }
    }

    /// Additive effect of one regularization direction on cell (r, c) of B.
    fn reg_coef_b(&self, kind: RegDir, r: usize, c: usize) -> Scalar {
        match kind {
            RegDir::Carry(row, src) if row == r => self.sys.b.at(src, c).clone(),
            RegDir::Mix(src, dst) if dst == c => -self.sys.b.at(r, src),
            _ => Scalar::zero(),
        }
    }

    fn edge_step_b(
        &mut self,
        rows_act: &[usize],
        cols_act: &[usize],
        gi: usize,
        groups: &mut Vec<TransGroup>,
        next_seq: &mut usize,
    ) {
        let block = self.sys.b.select(rows_act, cols_act);
        let (r, canon, t, xg) = edge_reduce(&block);
        let mut targets = Vec::new();
        push_sector_targets(&mut targets, rows_act, &t, |i, j| self.yi(i, j));
        push_sector_targets(&mut targets, cols_act, &xg, |i, j| self.xi(i, j));
        let delta = self
            .solve_delta(&targets)
            .expect("edge transform must lift to the stabilizer");
        let g = self.group_from_delta(&delta);
        self.apply_checked(&g);
        assert_eq!(
            self.sys.b.select(rows_act, cols_act),
            canon,
            "edge block must land on its rank normal form"
        );
        for &row in rows_act {
            for &col in cols_act {
                self.b_canon[row][col] = true;
            }
        }
        let (kr, kc) = (rows_act.len(), cols_act.len());
        self.trace.push(ReducedBlock {
            kind: BlockKind::EdgeIdentity(r),
            m_k: kr,
            n_k: kc,
            sigma: r * (kr + kc - r),
            location: BlockLocation {
                region: Region::B,
                rows: rows_act.to_vec(),
                cols: cols_act.to_vec(),
            },
        });
        if r > 0 {
            *next_seq += 1;
            let claimed: Vec<usize> = cols_act[kc - r..].to_vec();
            let old = groups[gi].clone();
            let rest: Vec<usize> = old
                .indices
                .iter()
                .copied()
                .filter(|c| !claimed.contains(c))
                .collect();
            groups[gi] = TransGroup {
                indices: claimed,
                seq: Some(*next_seq),
            };
            if !rest.is_empty() {
                groups.push(TransGroup {
                    indices: rest,
                    seq: old.seq,
                });
            }
        }
    }

    fn loop_step_b(&mut self, rows_act: &[usize], cols_act: &[usize]) -> Result<(), ReduceError> {
        let block = self.sys.b.select(rows_act, cols_act);
        let (form, s) = weyr_form(&block)?;
        let mut targets = Vec::new();
        push_sector_targets(&mut targets, rows_act, &s, |i, j| self.yi(i, j));
        let delta = self
            .solve_delta(&targets)
            .expect("loop transform must lift to the stabilizer");
        let g = self.group_from_delta(&delta);
        self.apply_checked(&g);
        assert_eq!(
            self.sys.b.select(rows_act, cols_act),
            form.w,
            "loop block must land on its Weyr form"
        );
        for &row in rows_act {
            for &col in cols_act {
                self.b_canon[row][col] = true;
            }
        }
        let k = rows_act.len();
        self.trace.push(ReducedBlock {
            kind: BlockKind::WeyrBlock(form.structure.clone()),
            m_k: k,
            n_k: k,
            sigma: k * k - centralizer_dim(&form.structure),
            location: BlockLocation {
                region: Region::B,
                rows: rows_act.to_vec(),
                cols: cols_act.to_vec(),
            },
        });
        Ok(())
    }

    /// Append the exact preservation equations (YB − BX)[row, ·] = 0 for the
    /// finished rows and return the stabilizer-dimension drop.
    fn append_b_rows(&mut self, rows: &[usize]) -> usize {
        let before = self.eqs.nullity();
        for &r in rows {
            debug_assert!((0..self.m).all(|c| self.b_canon[r][c]));
            for c in 0..self.m {
                let mut row = vec![Scalar::zero(); self.nv];
                for s in 0..self.n {
                    let k = self.yi(r, s);
                    let v = &row[k] + self.sys.b.at(s, c);
                    row[k] = v;
                }
                for c2 in 0..self.m {
                    let k = self.xi(c2, c);
                    let v = &row[k] - self.sys.b.at(r, c2);
                    row[k] = v;
                }
                self.eqs.add_row(row);
            }
            self.b_row_done[r] = true;
        }
        before - self.eqs.nullity()
    }

    // ----- phase C -----

    fn reduce_c(&mut self, strips: &[Strip]) -> Result<(), ReduceError> {
        if self.l == 0 {
            self.c_col_done = vec![true; self.n];
            return Ok(());
        }
        let mut groups = vec![TransGroup {
            indices: (0..self.l).collect(),
            seq: None,
        }];
        let mut next_seq = 0usize;
        for strip in strips {
            let mut pending: Vec<usize> = (strip.start..strip.start + strip.size).collect();
            while !pending.is_empty() {
                let take = self.select_chunk_c(&pending);
                let chunk: Vec<usize> = pending[..take].to_vec();
                pending.drain(..take);
                let t0 = self.trace.len();
                self.process_chunk_c(&chunk, &mut groups, &mut next_seq)?;
                let sigma: usize = self.trace[t0..].iter().map(|b| b.sigma).sum();
                let drop = self.append_c_cols(&chunk);
                assert_eq!(drop, sigma, "stabilizer drop across a C chunk must equal Σσ");
            }
        }
        Ok(())
    }

    /// Largest prefix of the strip's pending columns that reduces
    /// autonomously (mirror of [`Engine::select_chunk_b`]).
    fn select_chunk_c(&self, pending: &[usize]) -> usize {
        for take in (1..=pending.len()).rev() {
            let chunk = &pending[..take];
            let outside: Vec<usize> = (0..self.n)
                .filter(|s| !self.c_col_done[*s] && !chunk.contains(s))
                .collect();
            let autonomous = chunk
                .iter()
                .all(|&c| outside.iter().all(|&p| self.eqs.is_zero_coord(self.yi(p, c))));
            if !autonomous {
                continue;
            }
            let mut sector = Vec::with_capacity(take * take);
            for &c in chunk {
                for &d in chunk {
                    sector.push(self.yi(c, d));
                }
            }
            if self.eqs.proj_dim(&sector) == take * take {
                return take;
            }
        }
        panic!("no admissible column chunk: unsupported stabilizer pattern");
    }

    fn process_chunk_c(
        &mut self,
        chunk: &[usize],
        groups: &mut Vec<TransGroup>,
        next_seq: &mut usize,
    ) -> Result<(), ReduceError> {
        loop {
            self.reg_c(chunk);
            let Some(gi) = self.pick_group(groups, |g| {
                g.indices
                    .iter()
                    .any(|&r| chunk.iter().any(|&c| !self.c_canon[r][c]))
            }) else {
                break;
            };
            let rows_act: Vec<usize> = groups[gi]
                .indices
                .iter()
                .copied()
                .filter(|&r| chunk.iter().any(|&c| !self.c_canon[r][c]))
                .collect();
            let cols_act: Vec<usize> = chunk
                .iter()
                .copied()
                .filter(|&c| rows_act.iter().any(|&r| !self.c_canon[r][c]))
                .collect();
            for &r in &rows_act {
                for &c in &cols_act {
                    assert!(
                        !self.c_canon[r][c],
                        "pending cells of a group must fill a rectangle"
                    );
                }
            }
            let (kr, kc) = (rows_act.len(), cols_act.len());
            let mut pair = Vec::with_capacity(kr * kr + kc * kc);
            for &r in &rows_act {
                for &s in &rows_act {
                    pair.push(self.zi(r, s));
                }
            }
            for &c in &cols_act {
                for &d in &cols_act {
                    pair.push(self.yi(c, d));
                }
            }
            let proj = self.eqs.proj_dim(&pair);
            if proj == kr * kr + kc * kc {
                self.edge_step_c(&rows_act, &cols_act, gi, groups, next_seq);
            } else if kr == kc
                && proj == kr * kr
                && self.locked_pair(&rows_act, &cols_act, |r, s| self.zi(r, s), |c, d| self.yi(c, d))
            {
                self.loop_step_c(&rows_act, &cols_act)?;
            } else {
                panic!(
                    "unsupported stabilizer shape on a {kr}×{kc} block of C ({proj} degrees of freedom)"
                );
            }
        }
        Ok(())
    }

    /// Regularization inside a C chunk: carries ΔY[finished col, chunk col]
    /// and row mixes ΔZ[pending row, canonical row].
    fn reg_c(&mut self, chunk: &[usize]) {
        let pend: Vec<(usize, usize)> = chunk
            .iter()
            .flat_map(|&c| (0..self.l).map(move |r| (r, c)))
            .filter(|&(r, c)| !self.c_canon[r][c])
            .collect();
        if pend.is_empty() {
            return;
        }
        let mut coords: Vec<usize> = Vec::new();
        let mut kinds: Vec<RegDir> = Vec::new();
        for &c in chunk {
            for s in 0..self.n {
                if self.c_col_done[s] && !self.eqs.is_zero_coord(self.yi(s, c)) {
                    coords.push(self.yi(s, c));
                    kinds.push(RegDir::Carry(s, c));
                }
            }
        }
        let src_rows: Vec<usize> = (0..self.l)
            .filter(|&r| chunk.iter().all(|&c| self.c_canon[r][c]))
            .collect();
        let dst_rows: Vec<usize> = (0..self.l)
            .filter(|&r| chunk.iter().any(|&c| !self.c_canon[r][c]))
            .collect();
        for &dst in &dst_rows {
            for &src in &src_rows {
                if !self.eqs.is_zero_coord(self.zi(dst, src)) {
                    coords.push(self.zi(dst, src));
                    kinds.push(RegDir::Mix(dst, src));
                }
            }
        }
        if coords.is_empty() {
            return;
        }

        let mut local = LinSys::new(coords.len());
        for row in self.eqs.restricted_rows(&coords) {
            local.add_row(row);
        }
        for &c in chunk {
            for r in 0..self.l {
                if !self.c_canon[r][c] {
                    continue;
                }
                let row: Vec<Scalar> =
                    kinds.iter().map(|k| self.reg_coef_c(*k, r, c)).collect();
                if row.iter().any(|x| !x.is_zero()) {
                    local.add_row(row);
                }
            }
        }
        let basis = local.solution_basis();
        if basis.is_empty() {
            return;
        }
        let effects: Vec<Vec<Scalar>> = basis
            .iter()
            .map(|v| {
                pend.iter()
                    .map(|&(r, c)| {
                        let mut acc = Scalar::zero();
                        for (k, kind) in kinds.iter().enumerate() {
                            if v[k].is_zero() {
                                continue;
                            }
                            let coef = self.reg_coef_c(*kind, r, c);
                            if !coef.is_zero() {
                                acc = &acc + &(&v[k] * &coef);
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        let values: Vec<Scalar> = pend.iter().map(|&(r, c)| self.sys.c.at(r, c).clone()).collect();
        let (pivot_cells, coeffs) = pivot_combination(&values, &effects);
        if pivot_cells.is_empty() {
            return;
        }

        let mut delta_local = vec![Scalar::zero(); kinds.len()];
        for (v, cv) in basis.iter().zip(&coeffs) {
            if cv.is_zero() {
                continue;
            }
            for (k, d) in delta_local.iter_mut().enumerate() {
                if !v[k].is_zero() {
                    *d = &*d + &(cv * &v[k]);
                }
            }
        }
        // Row mixes first (coefficients read from the chunk now), then the
        // carries (coefficients on finished columns, preserved by the mix).
        let snap = self.sys.clone();
        let mut mix = vec![Scalar::zero(); self.nv];
        let mut carry = vec![Scalar::zero(); self.nv];
        let (mut any_mix, mut any_carry) = (false, false);
        for (k, kind) in kinds.iter().enumerate() {
            if delta_local[k].is_zero() {
                continue;
            }
            match kind {
                RegDir::Mix(..) => {
                    mix[coords[k]] = delta_local[k].clone();
                    any_mix = true;
                }
                RegDir::Carry(..) => {
                    carry[coords[k]] = delta_local[k].clone();
                    any_carry = true;
                }
            }
        }
        if any_mix {
            let g = self.group_from_delta(&mix);
            self.apply_raw(&g);
        }
        if any_carry {
            let g = self.group_from_delta(&carry);
            self.apply_raw(&g);
        }
        self.assert_preserved(&snap);

        let mut by_row: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &p in &pivot_cells {
            let (r, c) = pend[p];
            assert!(
                self.sys.c.at(r, c).is_zero(),
                "regularization must clear its pivot cells exactly"
            );
            self.c_canon[r][c] = true;
            by_row.entry(r).or_default().push(c);
        }
        for (r, cols) in by_row {
            let n_k = cols.len();
            self.trace.push(ReducedBlock {
                kind: BlockKind::Empty,
                m_k: 1,
                n_k,
                sigma: n_k,
                location: BlockLocation {
                    region: Region::C,
                    rows: vec![r],
                    cols,
                },
            });
        }
    }

    /// Additive effect of one regularization direction on cell (r, c) of C.
    fn reg_coef_c(&self, kind: RegDir, r: usize, c: usize) -> Scalar {
        match kind {
            RegDir::Carry(src, col) if col == c => -self.sys.c.at(r, src),
            RegDir::Mix(dst, src) if dst == r => self.sys.c.at(src, c).clone(),
            _ => Scalar::zero(),
        }
    }

    fn edge_step_c(
        &mut self,
        rows_act: &[usize],
        cols_act: &[usize],
        gi: usize,
        groups: &mut Vec<TransGroup>,
        next_seq: &mut usize,
    ) {
        let block = self.sys.c.select(rows_act, cols_act);
        let (r, canon, t, yg) = edge_reduce(&block);
        let mut targets = Vec::new();
        push_sector_targets(&mut targets, rows_act, &t, |i, j| self.zi(i, j));
        push_sector_targets(&mut targets, cols_act, &yg, |i, j| self.yi(i, j));
        let delta = self
            .solve_delta(&targets)
            .expect("edge transform must lift to the stabilizer");
        let g = self.group_from_delta(&delta);
        self.apply_checked(&g);
        assert_eq!(
            self.sys.c.select(rows_act, cols_act),
            canon,
            "edge block must land on its rank normal form"
        );
        for &row in rows_act {
            for &col in cols_act {
                self.c_canon[row][col] = true;
            }
        }
        let (kr, kc) = (rows_act.len(), cols_act.len());
        self.trace.push(ReducedBlock {
            kind: BlockKind::EdgeIdentity(r),
            m_k: kr,
            n_k: kc,
            sigma: r * (kr + kc - r),
            location: BlockLocation {
                region: Region::C,
                rows: rows_act.to_vec(),
                cols: cols_act.to_vec(),
            },
        });
        if r > 0 {
            *next_seq += 1;
            // The identity occupies the FIRST r active rows (upper right).
            let claimed: Vec<usize> = rows_act[..r].to_vec();
            let old = groups[gi].clone();
            let rest: Vec<usize> = old
                .indices
                .iter()
                .copied()
                .filter(|row| !claimed.contains(row))
                .collect();
            groups[gi] = TransGroup {
                indices: claimed,
                seq: Some(*next_seq),
            };
            if !rest.is_empty() {
                groups.push(TransGroup {
                    indices: rest,
                    seq: old.seq,
                });
            }
        }
    }

    fn loop_step_c(&mut self, rows_act: &[usize], cols_act: &[usize]) -> Result<(), ReduceError> {
        let block = self.sys.c.select(rows_act, cols_act);
        let (form, s) = weyr_form(&block)?;
        let mut targets = Vec::new();
        push_sector_targets(&mut targets, cols_act, &s, |i, j| self.yi(i, j));
        let delta = self
            .solve_delta(&targets)
            .expect("loop transform must lift to the stabilizer");
        let g = self.group_from_delta(&delta);
        self.apply_checked(&g);
        assert_eq!(
            self.sys.c.select(rows_act, cols_act),
            form.w,
            "loop block must land on its Weyr form"
        );
        for &row in rows_act {
            for &col in cols_act {
                self.c_canon[row][col] = true;
            }
        }
        let k = rows_act.len();
        self.trace.push(ReducedBlock {
            kind: BlockKind::WeyrBlock(form.structure.clone()),
            m_k: k,
            n_k: k,
            sigma: k * k - centralizer_dim(&form.structure),
            location: BlockLocation {
                region: Region::C,
                rows: rows_act.to_vec(),
                cols: cols_act.to_vec(),
            },
        });
        Ok(())
    }

    /// Append the exact preservation equations (ZC − CY)[·, col] = 0 for the
    /// finished columns and return the stabilizer-dimension drop.
    fn append_c_cols(&mut self, cols: &[usize]) -> usize {
        let before = self.eqs.nullity();
        for &c in cols {
            debug_assert!((0..self.l).all(|r| self.c_canon[r][c]));
            for r in 0..self.l {
                let mut row = vec![Scalar::zero(); self.nv];
                for s in 0..self.l {
                    let k = self.zi(r, s);
                    let v = &row[k] + self.sys.c.at(s, c);
                    row[k] = v;
                }
                for s in 0..self.n {
                    let k = self.yi(s, c);
                    let v = &row[k] - self.sys.c.at(r, s);
                    row[k] = v;
                }
                self.eqs.add_row(row);
            }
            self.c_col_done[c] = true;
        }
        before - self.eqs.nullity()
    }

    // ----- shared dispatch helpers -----

    /// Next transversal group with work left: the virgin group first, then
    /// claimed groups newest-first.
    fn pick_group<F>(&self, groups: &[TransGroup], has_pending: F) -> Option<usize>
    where
        F: Fn(&TransGroup) -> bool,
    {
        groups
            .iter()
            .enumerate()
            .filter(|(_, g)| has_pending(g))
            .max_by_key(|(_, g)| g.seq.map_or(usize::MAX, |s| s))
            .map(|(i, _)| i)
    }

    /// Whether the two sectors are locked pointwise equal on L, i.e. the
    /// group acts on the block by simultaneous conjugation.
    fn locked_pair<FO, FI>(&self, outer: &[usize], inner: &[usize], fo: FO, fi: FI) -> bool
    where
        FO: Fn(usize, usize) -> usize,
        FI: Fn(usize, usize) -> usize,
    {
        outer.iter().enumerate().all(|(i, &r)| {
            outer.iter().enumerate().all(|(j, &s)| {
                self.eqs
                    .coords_locked_equal(fo(r, s), fi(inner[i], inner[j]))
            })
        })
    }

    fn stabilizer_description(&self) -> StabilizerDescription {
        let vecs = self.eqs.solution_basis();
        let mut basis = Vec::with_capacity(vecs.len());
        let mut free_x = BTreeSet::new();
        let mut free_y = BTreeSet::new();
        let mut free_z = BTreeSet::new();
        for v in &vecs {
            let x = ExactMatrix::from_fn(self.m, self.m, |r, c| v[self.xi(r, c)].clone());
            let y = ExactMatrix::from_fn(self.n, self.n, |r, c| v[self.yi(r, c)].clone());
            let z = ExactMatrix::from_fn(self.l, self.l, |r, c| v[self.zi(r, c)].clone());
            for r in 0..self.m {
                for c in 0..self.m {
                    if !x.at(r, c).is_zero() {
                        free_x.insert((r, c));
                    }
                }
            }
            for r in 0..self.n {
                for c in 0..self.n {
                    if !y.at(r, c).is_zero() {
                        free_y.insert((r, c));
                    }
                }
            }
            for r in 0..self.l {
                for c in 0..self.l {
                    if !z.at(r, c).is_zero() {
                        free_z.insert((r, c));
                    }
                }
            }
            basis.push(StabilizerDirection { x, y, z });
        }
        StabilizerDescription {
            dim: vecs.len(),
            basis,
            free_x: free_x.into_iter().collect(),
            free_y: free_y.into_iter().collect(),
            free_z: free_z.into_iter().collect(),
            constraints: self.eqs.clone(),
            dims: (self.m, self.n, self.l),
        }
    }
}

/// Pin the sector spanned by `indices` (via `coord`) to the matrix `target`,
/// expressed as offsets from the identity.
fn push_sector_targets<F>(
    targets: &mut Vec<(usize, Scalar)>,
    indices: &[usize],
    target: &ExactMatrix,
    coord: F,
) where
    F: Fn(usize, usize) -> usize,
{
    for (i, &a) in indices.iter().enumerate() {
        for (j, &b) in indices.iter().enumerate() {
            let mut v = target.at(i, j).clone();
            if i == j {
                v = &v - &Scalar::one();
            }
            targets.push((coord(a, b), v));
        }
    }
}

/// Reduce a system to its canonical form.
///
/// Deterministic: equivalent inputs produce byte-identical canonical
/// triples. The returned witness satisfies
/// `apply_group(&witness, &input) == canonical` exactly (asserted on every
/// run), the trace lists the reduced subblocks in reduction order, and the
/// final stabilizer describes the group fixing the canonical form.
pub fn canonicalize(s: &SystemTriple) -> Result<CanonicalSystem, ReduceError> {
    let (m, n, l) = s.dims();
    if n == 0 && (m > 0 || l > 0) {
        return Err(ReduceError::EmptyStateSpace);
    }
    let mut eng = Engine::new(s.clone());
    if n > 0 {
        let form = eng.reduce_a()?;
        let strips = form.strips();
        eng.reduce_b(&strips)?;
        eng.reduce_c(&strips)?;
    }
    assert!(
        eng.b_canon.iter().all(|row| row.iter().all(|&x| x)),
        "every cell of B must be canonical"
    );
    assert!(
        eng.c_canon.iter().all(|row| row.iter().all(|&x| x)),
        "every cell of C must be canonical"
    );
    let area = |region: Region| -> usize {
        eng.trace
            .iter()
            .filter(|b| b.location.region == region)
            .map(|b| b.m_k * b.n_k)
            .sum()
    };
    assert_eq!(area(Region::A), n * n, "trace must tile A");
    assert_eq!(area(Region::B), n * m, "trace must tile B");
    assert_eq!(area(Region::C), l * n, "trace must tile C");
    let replay = apply_group(&eng.witness, s).expect("witness is invertible");
    assert_eq!(replay, eng.sys, "witness must reproduce the canonical form");
    let final_stabilizer = eng.stabilizer_description();
    Ok(CanonicalSystem {
        canonical: eng.sys,
        witness: eng.witness,
        trace: eng.trace,
        final_stabilizer,
    })
}

/// Exact equivalence test: same canonical form ⟺ same orbit.
pub fn are_equivalent(s1: &SystemTriple, s2: &SystemTriple) -> Result<bool, EquivError> {
    if s1.dims() != s2.dims() {
        return Err(EquivError::SizeMismatch);
    }
    Ok(canonicalize(s1)?.canonical == canonicalize(s2)?.canonical)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invert;
    use crate::mat;

    fn sys(a: ExactMatrix, b: ExactMatrix, c: ExactMatrix) -> SystemTriple {
        SystemTriple::new(a, b, c).unwrap()
    }

    fn sigmas(cs: &CanonicalSystem) -> Vec<usize> {
        cs.trace.iter().map(|b| b.sigma).collect()
    }

    #[test]
    fn edge_reduce_scalar() {
        let (r, e, t, g) = edge_reduce(&mat![[5]]);
        assert_eq!(r, 1);
        assert_eq!(e, mat![[1]]);
        assert_eq!(t.mul(&mat![[5]]).mul(&invert(&g).unwrap()), e);
    }

    #[test]
    fn edge_reduce_zero_block() {
        let m = ExactMatrix::zeros(2, 3);
        let (r, e, t, g) = edge_reduce(&m);
        assert_eq!(r, 0);
        assert_eq!(e, m);
        assert_eq!(t, ExactMatrix::identity(2));
        assert_eq!(g, ExactMatrix::identity(3));
    }

    #[test]
    fn edge_reduce_rank_one() {
        let m = mat![[0, 2], [0, 0]];
        let (r, e, t, g) = edge_reduce(&m);
        assert_eq!(r, 1);
        assert_eq!(e, mat![[0, 1], [0, 0]]);
        assert_eq!(t.mul(&m).mul(&invert(&g).unwrap()), e);
    }

    #[test]
    fn edge_reduce_is_exact_on_a_wide_block() {
        let m = mat![[2, 4, 6], [1, 3, 5]];
        let (r, e, t, g) = edge_reduce(&m);
        assert_eq!(r, 2);
        assert_eq!(t.mul(&m).mul(&invert(&g).unwrap()), e);
        // identity sits in the upper right
        assert_eq!(e.at(0, 1), &Scalar::one());
        assert_eq!(e.at(1, 2), &Scalar::one());
        assert!(e.at(0, 0).is_zero() && e.at(1, 0).is_zero());
    }

    #[test]
    fn regularize_partial_clearing() {
        let m = mat![[3, 4]];
        let freedom = vec![mat![[1, 0]]];
        let (out, cleared) = regularize(&m, &freedom);
        assert_eq!(out, mat![[0, 4]]);
        assert_eq!(cleared, vec![(0, 0)]);
    }

    #[test]
    fn regularize_full_span_clears_everything() {
        let m = mat![[3, 4]];
        let freedom = vec![mat![[1, 0]], mat![[1, 1]]];
        let (out, cleared) = regularize(&m, &freedom);
        assert!(out.is_zero());
        assert_eq!(cleared, vec![(0, 0), (0, 1)]);
    }

    #[test]
    fn regularize_of_zero_block_still_records_pivots() {
        let m = ExactMatrix::zeros(1, 2);
        let freedom = vec![mat![[0, 1]]];
        let (out, cleared) = regularize(&m, &freedom);
        assert!(out.is_zero());
        assert_eq!(cleared, vec![(0, 1)]);
    }

    #[test]
    fn loop_reduce_examples() {
        let (form, s) = loop_reduce(&mat![[7]]).unwrap();
        assert_eq!(form.w, mat![[7]]);
        assert_eq!(s, ExactMatrix::identity(1));
        let (form, _) = loop_reduce(&mat![[0, 0], [2, 0]]).unwrap();
        assert_eq!(form.w, mat![[0, 1], [0, 0]]);
    }

    #[test]
    fn canonicalize_smallest_system() {
        let cs = canonicalize(&sys(mat![[3]], mat![[5]], mat![[7]])).unwrap();
        assert_eq!(cs.canonical, sys(mat![[3]], mat![[1]], mat![[1]]));
        assert_eq!(sigmas(&cs), vec![0, 1, 1]);
        assert_eq!(cs.final_stabilizer.dim, 1);
        assert!(cs
            .final_stabilizer
            .contains(&GroupElement::identity(1, 1, 1)));
    }

    #[test]
    fn canonicalize_reports_the_documented_sigma_chain() {
        // A = J₂(0) in Weyr coordinates, B = (0,1)ᵀ, C = (1, 5): a fixed
        // point whose trace drops the stabilizer by (2, 1, 1, 1, 0).
        let s = sys(mat![[0, 1], [0, 0]], mat![[0], [1]], mat![[1, 5]]);
        let cs = canonicalize(&s).unwrap();
        assert_eq!(cs.canonical, s);
        assert_eq!(sigmas(&cs), vec![2, 1, 1, 1, 0]);
        assert_eq!(cs.final_stabilizer.dim, 1);
    }

    #[test]
    fn canonicalize_normalizes_a_full_input_column() {
        let s = sys(ExactMatrix::zeros(2, 2), mat![[4], [8]], ExactMatrix::zeros(0, 2));
        let cs = canonicalize(&s).unwrap();
        assert_eq!(cs.canonical.b, mat![[1], [0]]);
        assert_eq!(sigmas(&cs), vec![0, 2]);
    }

    #[test]
    fn witnesses_are_recorded_not_recomputed() {
        let s = sys(mat![[2, 1], [0, 2]], mat![[3], [4]], mat![[5, 6]]);
        let cs = canonicalize(&s).unwrap();
        let replay = apply_group(&cs.witness, &s).unwrap();
        assert_eq!(replay, cs.canonical);
    }

    #[test]
    fn equivalence_examples() {
        let s1 = sys(mat![[2]], mat![[3]], mat![[0]]);
        let s2 = sys(mat![[2]], mat![[7]], mat![[0]]);
        assert!(are_equivalent(&s1, &s2).unwrap());
        let s3 = sys(mat![[0]], mat![[1]], mat![[1]]);
        let s4 = sys(mat![[1]], mat![[1]], mat![[1]]);
        assert!(!are_equivalent(&s3, &s4).unwrap());
    }

    #[test]
    fn size_mismatch_is_reported() {
        let s1 = sys(mat![[2]], mat![[3]], mat![[0]]);
        let s2 = sys(mat![[2]], mat![[3], [0]].transpose(), mat![[0]]);
        assert_eq!(are_equivalent(&s1, &s2), Err(EquivError::SizeMismatch));
    }

    #[test]
    fn empty_state_space_is_rejected() {
        let s = SystemTriple::new(
            ExactMatrix::zeros(0, 0),
            ExactMatrix::zeros(0, 1),
            ExactMatrix::zeros(0, 0),
        )
        .unwrap();
        assert_eq!(canonicalize(&s), Err(ReduceError::EmptyStateSpace));
    }

    #[test]
    fn totally_empty_system_is_its_own_canonical_form() {
        let s = SystemTriple::new(
            ExactMatrix::zeros(0, 0),
            ExactMatrix::zeros(0, 0),
            ExactMatrix::zeros(0, 0),
        )
        .unwrap();
        let cs = canonicalize(&s).unwrap();
        assert_eq!(cs.canonical, s);
        assert!(cs.trace.is_empty());
        assert_eq!(cs.final_stabilizer.dim, 0);
    }

    #[test]
    fn canonicalize_is_idempotent_on_examples() {
        let samples = vec![
            sys(mat![[3]], mat![[5]], mat![[7]]),
            sys(mat![[0, 1], [0, 0]], mat![[0], [1]], mat![[1, 5]]),
            sys(mat![[2, 1], [0, 2]], mat![[3], [4]], mat![[5, 6]]),
            sys(mat![[1, 0], [0, 2]], mat![[1, 2], [3, 4]], mat![[5, 6]]),
        ];
        for s in samples {
            let c1 = canonicalize(&s).unwrap().canonical;
            let c2 = canonicalize(&c1).unwrap().canonical;
            assert_eq!(c1, c2);
        }
    }

    #[test]
    fn equivalent_inputs_share_a_canonical_form() {
        let s = sys(mat![[0, 1], [0, 0]], mat![[0], [1]], mat![[1, 5]]);
        let g = GroupElement {
            x: mat![[3]],
            y: mat![[2, 5], [0, 1]],
            z: mat![[7]],
        };
        let moved = apply_group(&g, &s).unwrap();
        assert_ne!(moved, s);
        assert_eq!(canonicalize(&moved).unwrap().canonical, s);
    }

    #[test]
    fn canonical_form_separates_close_orbits() {
        // Same eigenvalues, same B, different C rank structure.
        let s1 = sys(mat![[1, 0], [0, 2]], mat![[1], [1]], mat![[1, 1]]);
        let s2 = sys(mat![[1, 0], [0, 2]], mat![[1], [1]], mat![[1, 0]]);
        assert!(!are_equivalent(&s1, &s2).unwrap());
    }

    #[test]
    fn stabilizer_dimension_never_increases_along_the_trace() {
        let s = sys(mat![[1, 0], [0, 2]], mat![[1, 2], [3, 4]], mat![[5, 6]]);
        let cs = canonicalize(&s).unwrap();
        let g0 = 2 * 2 + 2 * 2 + 1;
        let total: usize = cs.trace.iter().map(|b| b.sigma).sum();
        assert_eq!(g0 - total, cs.final_stabilizer.dim);
    }
}
