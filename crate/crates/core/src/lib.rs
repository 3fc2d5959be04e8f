//! Partial point counts and partial zeta functions of affine varieties over
//! finite fields.
//!
//! For a variety `X ⊂ A^n` over `F_q` and positive integers `d_1, …, d_n`, the
//! partial count `N_k` is the number of points of `X` whose `i`-th coordinate
//! lies in `F_{q^{d_i k}}`. This crate computes those counts exactly, builds the
//! associated zeta series, and analyses the resulting integer sequences
//! (linear recurrences, characteristic roots and their weights, q-adic
//! valuations), with independent oracles for each stage.

pub mod cfinite;
pub mod counting;
pub mod faltings;
pub mod ffield;
pub mod padic;
pub mod poly;
pub mod series;
pub mod symident;
mod upoly;

pub use ffield::{AmbientField, FieldConfig, FieldElement, FieldError, FieldSpec};
pub use poly::{MultiPoly, PolyMap};
pub use counting::{CountConfig, CountError, CountSeries, PartialCountQuery, VarietySpec};
