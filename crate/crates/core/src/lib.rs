//! Kantorovich main solutions of nonlinear Volterra operator-integral
//! equations, built by successive approximation and certified by integral
//! and algebraic (Lyapunov) majorants.
//!
//! The pipeline for a problem `F(u, t) = 0`:
//!
//! 1. bound `‖F(u, t) − Au‖` by a scalar majorant `f(t, ∫γ(‖u‖))`
//!    ([`MajorantSpec`]) and find its blow-up horizon ([`classify_blowup`]);
//! 2. solve the majorant on a mesh short of the horizon ([`solve_cauchy`],
//!    [`majorant_picard`]);
//! 3. iterate `u_n = L(u_{n−1})`, `u_0 = 0` ([`solve_main`]) and check the
//!    iterates against the majorant chain ([`verify_domination`]).
//!
//! [`LyapunovSpec`] gives the cruder algebraic guarantee `(r⁺, T⁺)`.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebraic_majorant;
pub mod conditions;
pub mod corpus;
pub mod error;
pub mod expr;
pub mod func;
pub mod integral_majorant;
mod ode;
pub mod operators;
pub mod picard;
pub mod problem;
pub mod quadrature;
pub mod roots;

pub use algebraic_majorant::{
    check_convexity, majorant_branch, solve_lyapunov, solve_tangency, solve_tangency_bisection,
    Branch, ConvexityReport, LyapunovSolution, LyapunovSpec, Tangency, TangencyMethod,
};
pub use conditions::{BGrid, Checker, Condition, ConditionReport, ConditionStatus, Location, Sampler, Witness};
pub use corpus::CorpusEntry;
pub use error::{Error, Result};
pub use expr::{parse, Env, Expr, ExprError};
pub use func::ScalarFn;
pub use integral_majorant::{
    certified_tail, check_upper_solution, classify_blowup, majorant_picard, solve_cauchy,
    solve_majorant, solve_majorant_with, BlowUp, CauchySolution, Classification, MajorantOptions,
    MajorantSolution, MajorantSpec, PicardChain,
};
pub use operators::{InverseMethod, LinearOperator, Scaled, SecondDifference};
pub use picard::{
    residual, solve_from, solve_main, verify_domination, verify_pair_domination, SolveOptions, SolveReport,
    SolveStatus,
};
pub use problem::{eval_f, eval_l, KernelStage, Mesh, OuterMap, Trajectory, VolterraProblem};
pub use quadrature::{graded_mesh, trapezoid_weights, ImproperKind, ImproperResult, WeightTable};
