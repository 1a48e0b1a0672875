//! Robust appointment time-slot template design.
//!
//! Given per-type treatment-duration statistics (mean, standard deviation,
//! normalized semivariance) and a nominal case mix, the library assigns the
//! types to groups and computes each group's slot duration minimizing group
//! activation cost plus the worst-case expected idle-time/overtime cost.
//! The worst case ranges over a two-layer ambiguity set: mode probabilities
//! move within a total-variation ball around the conditional nominal mix,
//! and each type's duration distribution ranges over all distributions
//! matching its three moments.
//!
//! The closed-form worst-case cost lives in [`piecewise`]; [`solver`] runs
//! the exact enumeration over groupings, [`heuristics`] the clustering
//! shortcuts, and [`oracle`] independent brute-force checks of both.

pub mod ambiguity;
pub mod bounds;
pub mod data;
pub mod domain;
mod error;
pub mod eval;
pub mod heuristics;
pub mod io;
pub mod oracle;
pub mod piecewise;
pub mod solver;

pub use error::{Error, Result};
