//! Khovanov homology over GF(2) for link diagrams carrying marking data:
//! a set of marked points (boundary of a 1-manifold ω) recorded per edge.
//!
//! The library computes the marked complex and its reduced variant,
//! pseudo-diagram complexes with one or two dropped crossings together
//! with their D/E/F splittings, the combinatorial q/h filtration
//! gradings, and counts of marked binary dihedral representations via
//! exact integer linear algebra.

pub mod cube;
pub mod diagram;
pub mod dihedral;
pub mod dropped;
pub mod filtration;
pub mod gf2;
pub mod khovanov;

pub use cube::{Cube, CubeError, ResolvedState, Vertex};
pub use diagram::{Diagram, DiagramError, DiagramInput, EdgeId, MarkingData};
pub use gf2::{BitMatrix, Gf2Error};
