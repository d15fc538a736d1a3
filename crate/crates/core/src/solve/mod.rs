//! LP kernel, branch-and-cut and reference oracles.

pub mod bnc;
pub mod oracle;
pub mod separators;
pub mod simplex;

pub use bnc::{
    branch_and_cut, relative_gap, HeuristicGroup, Limits, MipOutcome, SeparationMode, Separator, SolveReport,
    SolveStatus,
};
pub use oracle::{
    oracle_finite_enum, oracle_grid, oracle_jk_enum, GridBracket, OracleSolution, GRID_MAX_POINTS, JK_ENUM_MAX_SAMPLES,
};
pub use separators::{solve_formulation, SeparationOptions};
pub use simplex::{solve_lp, LpResult, LpSolver, LpStatus};
