//! Pareto-front estimation for problems that can only be queried through a
//! weighted-sum oracle.
//!
//! An oracle solves `min_x w · f(x)` for a weight `w` on the simplex. Each call
//! yields one efficient point. [`nise`] chooses weights adaptively for two
//! objectives; [`monise`] does so for any number by solving a small MILP per
//! iteration with the engine re-exported as [`mip`].
//!
//! ```
//! use monise_core::monise::{run_monise, MoniseConfig};
//! use monise_core::problems::QuadraticSimplex;
//!
//! let mut problem = QuadraticSimplex::new(3);
//! let config = MoniseConfig { max_iter: Some(6), ..MoniseConfig::default() };
//! let frontier = run_monise(&mut problem, &config).unwrap();
//! assert!(frontier.len() >= 4);
//! assert!(frontier.mu_history.windows(2).all(|p| p[1] <= p[0] + 1e-8));
//! ```

pub mod domain;
pub mod metrics;
pub mod monise;
pub mod nise;
pub mod problems;

pub use monise_mip as mip;

pub use domain::{
    dominates, filter_nondominated, individual_minimum, solve_weighted, utopian, Frontier,
    ObjectiveVector, OracleError, OracleOutput, WeightVector, WeightedOracle, WeightedSolution,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/weighted-method.md")]
    mod weighted_method {}
    #[doc = include_str!("../../../book/src/nise.md")]
    mod nise {}
    #[doc = include_str!("../../../book/src/monise.md")]
    mod monise {}
    #[doc = include_str!("../../../book/src/mip.md")]
    mod mip {}
    #[doc = include_str!("../../../book/src/problems.md")]
    mod problems {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
}
