//! Real-domain solvers for the double-exponential equation `y·e^(e^y) = X`
//! (the N function, `N(X) = y`) and its generalization `y^p·e^(e^y) = X`.
//!
//! The solvers use quadratic-approximation iteration: each correction is a
//! root of a quadratic obtained by replacing `ln((t + 1)/t)` with
//! `2/(2t + 1)`. Independent bisection, Newton and Lambert W routines in
//! [`oracle`] cross-check every result.
//!
//! ```
//! use nfunc::{nfunc, SolveConfig};
//!
//! let r = nfunc(1.0, &SolveConfig::default()).unwrap();
//! assert!((r.y - 0.2698741376).abs() < 1e-10);
//! ```

pub mod diagnostics;
pub mod error;
pub mod general;
mod iteration;
pub mod oracle;
pub mod scalar;
pub mod solvers;
pub mod tables;
pub mod transforms;

pub use error::{Error, Result};
pub use general::{
    general_forward, general_solve, general_solve_negative_exp, general_step, Branch, Form,
    GeneralProblem,
};
pub use scalar::{QuadraticCoeffs, RootBranch};
pub use solvers::{
    forward, forward_negative, nfunc, solve_method1, solve_method2, solve_method3, step_method1,
    step_method2, step_method3, IterationStep, Method, SolveConfig, SolveResult, Status,
};

/// `W(1)`, the omega constant.
pub const OMEGA: f64 = 0.567_143_290_409_784;
