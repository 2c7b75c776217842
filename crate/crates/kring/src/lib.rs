//! Exact equivariant K-ring computations for toric varieties attached to
//! Weyl-invariant fans and for the corresponding toroidal group embeddings.
//!
//! Everything is integer or rational arithmetic: Laurent polynomials over
//! character lattices, Smith normal forms, fan combinatorics, Weyl group
//! enumeration, fixed-point graphs with character-labelled edges, and the
//! Steinberg-basis decompositions built on top of them.

pub mod fan;
pub mod gkm;
pub mod lattice;
pub mod laurent;
pub mod toroidal;
pub mod weyl;
