//! Construction and local-stability certification of orthogonal
//! multipartite product-state sets.
//!
//! A set is locally stable when no party can perform a nontrivial
//! orthogonality-preserving measurement. For party `i` this holds exactly
//! when the operator span built from the set's pairwise cross terms has
//! dimension `d_i² − 1`; [`stability`] computes that span and its dimension.

pub mod cli;
pub mod constructions;
pub mod error;
pub mod numerics;
pub mod stability;
pub mod states;

pub use error::{Error, Result};
pub use numerics::{CMatrix, CVector, Tolerance};
pub use states::{DenseState, PartySignature, ProductState, State, StateSet};
