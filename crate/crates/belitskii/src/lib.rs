//! Exact canonical forms for linear systems (A, B, C) under the action
//! (X,Y,Z)·(A,B,C) = (YAY⁻¹, YBX⁻¹, ZCY⁻¹) of GL_m × GL_n × GL_l.
//!
//! Everything runs over ℚ(i) with exact big-rational arithmetic: canonical
//! forms, equivalence tests, orbit dimensions, and direct-sum decompositions
//! are decided, not approximated.

pub mod io;
pub mod linsys;
pub mod matrix;
pub mod poly;
pub mod scalar;
pub mod system;
pub mod weyr;

pub use io::{read_system, system_from_json, system_to_json, write_system, IoError, SystemFile};
pub use matrix::{
    commutant_map, invert, nullspace, rank, rref, ExactMatrix, Singular,
};
pub use poly::{char_poly, roots_in_qi};
pub use scalar::{parse_scalar, scalar_total_order, Scalar, ScalarParseError};
pub use system::{apply_group, GroupElement, SystemError, SystemTriple};
pub use weyr::{
    centralizer_dim, eigenvalues, jordan_partition, jordan_presentation, weyr_form, EigenError,
    EigenStructure, Strip, WeyrForm,
};
