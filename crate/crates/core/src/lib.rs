//! Exact (C,F) cut-and-stack constructions of rank-one transformations.
//!
//! Schedules of high staircases and their partially-high variants are
//! materialized into tower levels with arbitrary-precision integers. Cylinder
//! sets are manipulated as interval sets, so measures, correlations
//! `mu(T^m A ∩ B)` and the derived norms are exact rationals. When a power of
//! `T` pushes mass past the deepest materialized tower, the unresolved mass is
//! reported explicitly and values become rational enclosures.

pub mod cli;
pub mod construction;
pub mod cylinder;
pub mod mixing;
pub mod rational;
pub mod spectral;

pub use construction::{build_levels, Schedule, SeqSpec, TowerLevels};
pub use cylinder::{CylinderSet, IntervalSet, PieceDecomposition};
pub use rational::{Enclosure, ExactRational};
