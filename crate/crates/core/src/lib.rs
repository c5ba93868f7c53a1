//! Combinatorial machinery for monodromy splitting: cluster exchange graphs of
//! polygons, ideal triangulations of marked bordered surfaces, quivers with
//! potential and their mutation, braid-group arc calculus, the six-chamber
//! wall-crossing groupoid, and flux monodromy of Morse-Bott-Lefschetz
//! fibrations.
//!
//! Every object here is a combinatorial shadow: Floer ranks, autoequivalences
//! and symplectomorphisms are represented only through the data they act on.

pub mod braid;
pub mod error;
pub mod flux;
pub mod graph;
pub mod groupoid;
pub mod polygon;
pub mod quiver;
pub mod surface;
pub mod verify;

pub use error::{Error, Result};
