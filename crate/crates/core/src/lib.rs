//! Greedy sensor selection for optimal design of experiments.
//!
//! Given an `n x r` sensor-candidate matrix, pick `p` rows so that the
//! Fisher information matrix of the chosen rows is well conditioned in the
//! D-, A- or E-optimal sense. Three families of selectors are provided:
//!
//! * [`greedy::pure_greedy`]: one set, one best sensor per step (DG, AG, EG);
//! * [`group_greedy::group_greedy`]: the `L_max` best sets per step under a
//!   single objective (DGG, AGG, EGG);
//! * [`nmg::nmg_select`]: the `L_max` sets on the best Pareto fronts of all
//!   three objectives at once.
//!
//! ```
//! use nmg_select::{bench::random_candidate_matrix, nmg::{best_of_archive, nmg_select}, ObjectiveKind};
//!
//! let u = random_candidate_matrix(100, 5, 42)?;
//! let trajectory = nmg_select(&u, 8, 10, 7)?;
//! let best = best_of_archive(trajectory.last().unwrap(), ObjectiveKind::D).unwrap();
//! assert_eq!(best.set.len(), 8);
//! # Ok::<(), nmg_select::Error>(())
//! ```

pub mod bench;
pub mod error;
pub mod greedy;
pub mod group_greedy;
pub mod model;
pub mod nmg;
pub mod objectives;
pub mod pareto;

pub use error::{Error, Result};
pub use greedy::ObjectiveKind;
pub use model::{Archive, ArchiveMember, CandidateMatrix, ObjectiveVector, SensorSet};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/objectives.md")]
    mod objectives {}
    #[doc = include_str!("../../../book/src/greedy.md")]
    mod greedy {}
    #[doc = include_str!("../../../book/src/pareto.md")]
    mod pareto {}
    #[doc = include_str!("../../../book/src/nmg.md")]
    mod nmg {}
    #[doc = include_str!("../../../book/src/benchmarks.md")]
    mod benchmarks {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
