//! Exact linear programming for cost exponents.

pub mod exponent;
pub mod optimize;
mod scalar;
pub mod simplex;

pub use exponent::{build_exponent_lp, solve_schedule, ExponentLpError, LpOptions, ScheduleOptimum};
pub use optimize::{optimize_over_schedules, OptimizeConfig, OptimizeError, OptimizeMode, OptimizeResult};
pub use simplex::{
    solve_exact, solve_exact_big, verify_certificate, CertificateError, Constraint, LinearProgram, LpError,
    LpSolution, LpStatus, Relation,
};
