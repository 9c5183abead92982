//! Cross-section analysis of linear RF ion traps.
//!
//! The crate builds the transverse geometry of surface-electrode, trench and
//! wafer traps, solves the 2D exterior Laplace problem for every electrode with
//! a panel boundary-element method, and derives the quantities used to compare
//! trap designs: pseudopotential depth, secular frequencies, multipole content
//! and open numerical aperture.
//!
//! The usual entry point is [`pipeline::analyze_trap`], which runs the full
//! chain for one geometry. The individual stages are exposed for testing and
//! for custom studies.

pub mod analytic;
pub mod bem;
pub mod config;
pub mod error;
pub mod field;
pub mod geometry;
pub mod math;
pub mod multipole;
pub mod optics;
pub mod pipeline;
pub mod pseudo;
pub mod report;
pub mod sweep;

pub use error::{Error, Result};
pub use math::{Rect, Vec2};
