//! Two-dimensional straight-line programs.
//!
//! A [`Grammar2D`] derives a single rectangular string through horizontal
//! and vertical concatenation. A [`Tslp2D`] additionally has context symbols
//! that derive a rectangle with one rectangular hole. The crate validates
//! and expands both, transforms and rebalances them, and answers
//! random-access queries through three paths: plain descent, holed descent,
//! and the unwound grid index in [`fast`].
//!
//! All coordinates are 1-based.

pub mod access;
pub mod balance;
pub mod builder;
pub mod error;
pub mod fast;
pub mod gadgets;
pub mod geometry;
pub mod grammar;
pub mod matrix;
pub mod text;
pub mod transforms;
pub mod validate;

pub use access::{access_plain, access_tslp, Access};
pub use error::{Error, Result};
pub use geometry::{Dims, Geometry, Hole};
pub use grammar::{Axis, Grammar1D, Grammar2D, Production2D, Side, SymbolId, SymbolKind, Tslp2D, TslpProduction};
pub use matrix::{expand, expand_tslp, Matrix, DEFAULT_MAX_CELLS};
pub use validate::{validate, ValidationReport, Violation, ViolationKind};
