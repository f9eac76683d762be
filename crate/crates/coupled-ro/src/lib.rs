//! Robust and two-stage adaptive robust optimization under coupled
//! uncertainty sets.
//!
//! A coupled uncertainty set is the intersection of a constraint-wise set
//! `U = U_1 x ... x U_m` with a coupling set `C` that ties the blocks
//! together. This crate models both right-hand-side and constraint-coefficient
//! robust problems over such sets, computes the shrinkage factors that bound
//! the objective improvement from coupling, generates deterministic robust
//! counterparts, and solves problems by projection, robust counterpart,
//! cutting planes, linear decision rules, Benders decomposition, finite
//! scenarios, and full adaptivity via vertex enumeration.

pub mod error;
pub mod linalg;
pub mod lp;
pub mod sets;
pub mod shrinkage;
pub mod model;
pub mod solvers;
pub mod experiments;

pub use error::{Error, Result};
