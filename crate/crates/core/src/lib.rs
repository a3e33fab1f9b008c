//! Core library: LRT geometry, key space, inner overlays, the ART overlay,
//! and the deterministic simulator.

pub mod inner;
pub mod keyspace;
pub mod lrt;
pub mod overlay;
pub mod sim;
