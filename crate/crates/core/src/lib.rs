//! Numerical toolkit for momentum maps of compact group actions.
//!
//! Models are linear slices `h⁰ ⊕ V` of Hamiltonian `G`-spaces built from a
//! compact group `G`, a closed subgroup `H` and a symplectic `H`-representation
//! `V`. The crate computes isotropy data, symplectic normal representations
//! and the labels of the Hamiltonian stratification, checks the linear and
//! quadratic identities satisfied by momentum maps, and evaluates invariant
//! polynomials and semi-algebraic descriptions of orbit and leaf spaces.

pub mod config;
pub mod error;
pub mod group;
pub mod linalg;
pub mod models;
pub mod poisson;
pub mod poly;
pub mod momentum;
pub mod semialg;
pub mod strata;
pub mod symplectic;

pub use config::Tolerances;
pub use error::{Error, Result};
