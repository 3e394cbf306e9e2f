//! Toolkit for convolutional and trellis codes: exact finite-field linear
//! algebra, distance profiles with Singleton-type bounds, bipartite spectral
//! expanders, and the expander lift that turns a convolutional code plus a
//! high-rate block code into a trellis code over a constant-size alphabet
//! with a provably good distance profile.
//!
//! Every combinatorial quantity (rank, dimension, distance, bound value) is
//! computed exactly; floating point appears only in the spectral measurement
//! of expansion and is quarantined behind a reported tolerance.

pub mod block;
pub mod construction;
pub mod conv;
pub mod field;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod trellis;

pub use block::LinearBlockCode;
pub use conv::{ConvolutionalCode, PolyGeneratorMatrix};
pub use field::Field;
pub use linalg::{subspace_intersect, Matrix};
pub use trellis::{LabeledDigraph, TrellisCode};
