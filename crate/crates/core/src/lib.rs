//! Multiobjective 0/1 optimization under the Ordered Weighted Averaging (OWA)
//! criterion.
//!
//! The crate is organised around the Min-Knapsack problem
//! `min OWA_w(c_1ᵀx, …, c_Kᵀx)` subject to `B_lo ≤ bᵀx ≤ B_hi`:
//!
//! - [`model`]: weight vectors, cost matrices, instances and OWA/Hurwicz evaluation.
//! - [`aggregation`]: ℓ-block objective aggregation with its a-priori ratio
//!   certificate `ρℓ`, K̄-means heuristic aggregation and the mean-cost baseline.
//! - [`solvers`]: brute force, branch-and-bound, aggregated solves and the
//!   Hurwicz decomposition into min-max subproblems.
//! - [`generators`]: seeded instance and weight generators.
//! - [`harness`]: instance files, LP export, bound tables and sweeps.

pub mod aggregation;
pub mod error;
pub mod exact;
pub mod generators;
pub mod harness;
pub mod model;
mod rng;
pub mod solvers;

pub use error::{Error, Result};
pub use model::{
    hurwicz_value, is_feasible, objective_values, owa_value, CostMatrix, KnapsackInstance,
    Solution, WeightVector,
};
