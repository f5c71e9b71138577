//! Dominance-move computation between solution sets in objective space.
//!
//! The dominance move of a set P towards a set Q is the minimum total
//! Manhattan movement of points of P such that every point of Q ends up
//! weakly dominated by some moved point. The crate provides three
//! interchangeable backends behind [`solver::dom`]: an exact subset
//! dynamic program, an exact bi-objective clustering algorithm, and an
//! external mixed-integer-programming solver driven through LP files.
//! Companion indicators (additive epsilon, IGD+, hypervolume, Pearson
//! correlation) live in [`indicators`].

pub mod error;
pub mod exact2d;
pub mod indicators;
pub mod io;
pub mod model;
pub mod point;
pub mod solver;

pub use error::{DomError, Result};
pub use model::{build_model, emit_lp, model_size, DomMipModel};
pub use point::{
    dominates, minmax_normalize, nondominated_filter, prefilter_pair, translate_nonnegative,
    weakly_leq, PointSet, PrefilterOutcome, Translation,
};
pub use solver::{dom, Backend, DomSolution, SolveOptions, SolveStatus};
