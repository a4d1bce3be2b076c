//! Graded polynomial identities with involution on upper triangular matrices.
//!
//! The library works over the exact rationals throughout. It provides
//!
//! * finitely generated abelian groups and their homomorphisms ([`abgroup`]),
//! * elementary gradings and graded involutions on the algebra `UT_m` of
//!   upper triangular matrices ([`utalg`]),
//! * free associative algebras with involution, both over an untagged
//!   alphabet of homogeneous variables and over a tagged alphabet of
//!   symmetric/skew variables, with proper-polynomial machinery and
//!   T-ideal consequence generation ([`freealg`]),
//! * exact evaluation, identity checking, codimension and proper-codimension
//!   oracles based on fraction-free rank computation, basis certificates and
//!   exponent estimates ([`eval`]),
//! * the combinatorial layer of good monomials for the finest grading,
//!   with both a faithful enumerator and the closed-form count it is
//!   checked against ([`goodmono`]).
//!
//! Everything is deterministic: identical inputs produce identical reports,
//! byte for byte.

pub mod abgroup;
pub mod eval;
pub mod freealg;
pub mod goodmono;
pub mod linalg;
pub mod utalg;

/// Exact scalar type used everywhere.
pub type Rat = num_rational::BigRational;

/// Shorthand for integer rationals.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(n.into())
}
