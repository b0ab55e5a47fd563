//! Decision procedures for module varieties over canonical algebras.
//!
//! A canonical algebra is described by its arm lengths ([`CanonicalType`]).
//! For a dimension vector `d` of a regular module, [`geometry::decide`]
//! computes `dim mod(d)` and decides whether the variety is a complete
//! intersection, irreducible and normal. The remaining modules produce
//! counterexamples ([`witnesses`]), reduction certificates ([`bounds`]) and
//! homological cross-checks over prime fields ([`repcalc`]).

pub mod bounds;
pub mod classify;
pub mod error;
pub mod geometry;
pub mod quiver;
pub mod repcalc;
pub mod witnesses;

pub use error::{Error, Result};
pub use quiver::{
    a_dim, build_quiver, gl_dim, ringel_form, special_vector_e, special_vector_e_alpha,
    special_vector_e_omega, special_vector_h, BoundQuiver, CanonicalType, DimVector, TubeParams,
    Vertex,
};
