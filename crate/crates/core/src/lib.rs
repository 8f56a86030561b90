//! Recovery of a planted spanning tree or Hamiltonian path by the minimum
//! spanning tree of a complete graph with exponential edge weights.
//!
//! The crate covers instance generation ([`instance`]), exact MST recovery
//! ([`mst`]), the large-`n` fixed-point theory ([`fixed_point`],
//! [`theory`]), an independent branching-process simulation ([`bp`]) and the
//! MST-weight detection test ([`hypothesis`]).
//!
//! ```
//! use planted_mst::{gen_instance, recover, PlantedKind, WeightFamily};
//!
//! let law = WeightFamily::exponential(0.3).unwrap();
//! let instance = gen_instance(200, PlantedKind::Tree, law, 7).unwrap();
//! let r = recover(&instance);
//! assert!(r.overlap > 0.5);
//! ```

pub mod bp;
pub mod edge_set;
pub mod error;
pub mod experiment;
pub mod fixed_point;
pub mod hypothesis;
pub mod instance;
pub mod mst;
pub mod quadrature;
pub mod rng;
pub mod table1;
pub mod theory;
pub mod weights;

pub use bp::{mc_overlap, simulate_extinction, BranchingConfig, Caps, ExtinctionEstimate, Side};
pub use edge_set::{Edge, EdgeSet};
pub use error::{Error, Result};
pub use experiment::{run_trials, TrialPlan, TrialRecord, TrialSummary};
pub use fixed_point::{
    iterate, scalar_path, scalar_solve, scalar_tree, FixedPointSolution, GridFunction, IterationOptions, LimitModel,
    PointSolution, TreeSystem,
};
pub use hypothesis::{decide, error_rates, ErrorRates, HypothesisConfig, TestOutcome};
pub use instance::{gen_instance, gen_uniform_hamiltonian_path, gen_uniform_spanning_tree, PlantedInstance, PlantedKind};
pub use mst::{brute_force_mst, kruskal_mst, recover, RecoveryResult};
pub use theory::{predict, zeta3, TheoryOptions, TheoryPrediction, ZETA3};
pub use weights::{EdgeLaw, EdgeWeightModel, WeightFamily};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/instances.md")]
    pub struct Instances;
    #[doc = include_str!("../../../book/src/recovery.md")]
    pub struct Recovery;
    #[doc = include_str!("../../../book/src/fixed-points.md")]
    pub struct FixedPoints;
    #[doc = include_str!("../../../book/src/branching.md")]
    pub struct Branching;
    #[doc = include_str!("../../../book/src/theory.md")]
    pub struct Theory;
    #[doc = include_str!("../../../book/src/detection.md")]
    pub struct Detection;
    #[doc = include_str!("../../../book/src/cli.md")]
    pub struct Cli;
}
