//! A small, dependency-free LP/MILP engine.
//!
//! [`simplex_solve`] is a dense two-phase tableau simplex and
//! [`branch_and_bound`] a best-bound search over binary variables on top of it.
//! Both target models with tens to low hundreds of variables; there is no
//! presolve, no cutting planes and no sparse linear algebra.
//!
//! ```
//! use monise_mip::{branch_and_bound, LinearProgram, MilpModel, MilpStatus, Relation, Sense};
//!
//! let mut lp = LinearProgram::new(2);
//! lp.set_objective(Sense::Maximize, &[(0, 1.0), (1, 2.0)]);
//! lp.add_row(&[(0, 1.0), (1, 1.0)], Relation::Le, 1.5);
//! let mut model = MilpModel::new(lp);
//! model.add_binary(0);
//! model.add_binary(1);
//!
//! let res = branch_and_bound(&model);
//! assert_eq!(res.status, MilpStatus::Optimal);
//! assert_eq!(res.objective_value, 2.0);
//! ```

mod branch;
mod model;
mod simplex;

pub use branch::{
    branch_and_bound, branch_and_bound_with, BranchOptions, MilpModel, MilpResult, MilpStatus,
};
pub use model::{LinearProgram, ModelError, Relation, Row, Sense};
pub use simplex::{simplex_solve, simplex_solve_with, LpResult, LpStatus, SimplexOptions};
