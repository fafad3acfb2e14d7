//! Finite positive model theory.
//!
//! Everything here works over finite multi-sorted models. A family of models
//! is saturated into per-context lattices of simultaneously definable sets
//! ([`semcat`]), and the remaining modules compute invariants of that data:
//! the LM lattice and positive closedness ([`invariant`]), type spaces
//! ([`types`]), Tarski-Vaught subfunctors ([`subfunctor`]) and reduced
//! products over finite index sets ([`redprod`]).

pub mod corpus;
pub mod dlat;
pub mod invariant;
pub mod model;
pub mod redprod;
pub mod semcat;
pub mod subfunctor;
pub mod syntax;
pub mod types;
