//! Numerical toolkit for quantum (metric) graphs: the Dirichlet form with
//! measure perturbations, its spectrum, exact generalized eigensolutions,
//! and Schnol-type certificates of spectral membership built from cutoff
//! Weyl sequences.

// `!(x > 0.0)` is the idiom used throughout to reject NaN along with bad values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod eigensolution;
pub mod eigensolver;
pub mod error;
pub mod exp_poly;
pub mod forms;
pub mod function_space;
pub mod linalg;
pub mod metric_graph;
pub mod schnol;
pub mod table;

pub use error::{Error, Result};
