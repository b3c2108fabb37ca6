//! Windowed minimax approximation by lacunary polynomials.

pub mod lawson;
pub mod lp;
pub mod sample;
pub mod solver;
pub mod theta;

pub use lp::{solve_minimax, LpOptions, LpSolution, LpStatus};
pub use sample::{disc_grid, unit_point, CompactSample, ComplexNum, Num, Primitive, SampleSpec};
pub use solver::{
    evaluate_errors, solve_window, working_precision, ApproxRequest, ApproxResult, SolveMethod, SolveStatus,
    SolverOptions, Target, WindowSpec,
};
pub use theta::{theta_fit, ThetaEstimate};
