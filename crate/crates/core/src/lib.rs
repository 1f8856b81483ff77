//! Combinatorial membership test for the closure of double ramification loci.
//!
//! A marked stable curve, given by its dual graph, lies in the closure of
//! `DR_g(mu)` exactly when it carries a twistable rational function on some
//! level graph whose evaluation morphism vanishes at every level. This crate
//! implements that criterion with exact arithmetic: level graphs and their
//! enumeration, decorations and their validation, relative graph homology and
//! the evaluation morphism as a linear system, the twist and stabilization
//! constructions, a brute-force Hurwitz oracle for component realizability,
//! an admissible-cover validator, and a certificate search.

pub mod closure;
pub mod cover;
pub mod error;
pub mod ev;
pub mod fixtures;
pub mod graph;
pub mod homology;
pub mod hurwitz;
pub mod json;
pub mod linalg;
pub mod twist;
pub mod twr;

pub use error::{EvError, FormatError, GraphError, HurwitzError, TwistError};
pub use graph::{HalfEdge, LevelStructure, MarkedDualGraph};
pub use linalg::{LinearForm, Q};
pub use twr::{Decoration, PointKind, PointOrder};
