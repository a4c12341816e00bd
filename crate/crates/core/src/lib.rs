//! Thermodynamic formalism for hyperbolic toral automorphisms and their
//! derived-from-Anosov deformations: topological pressure from separated
//! sets, equilibrium-state criteria, SRB statistics and shadowing.

// `!(x > 0.0)` rejects NaN as well; index loops mirror the matrix formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod criteria;
pub mod decomposition;
pub mod error;
pub mod hp;
pub mod mane;
pub mod potential;
pub mod pressure;
pub mod shadowing;
pub mod srb;
pub mod torus;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
