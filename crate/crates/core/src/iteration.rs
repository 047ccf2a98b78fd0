//! Shared driver for the quadratic-correction schemes.

use crate::error::{Error, Result};
use crate::scalar::{quadratic_root, QuadraticCoeffs, RootBranch};
use crate::solvers::{IterationStep, SolveConfig, SolveResult, Status};

/// One rewrite of a defining equation into the `a² − l·a − m = 0` update.
pub(crate) trait Scheme {
    /// Right-hand side the residual is scaled by.
    fn target(&self) -> f64;

    fn coefficients(&self, iterate: f64) -> Result<QuadraticCoeffs>;

    /// Fails when `iterate` is outside the region the scheme is defined on.
    fn check_domain(&self, iterate: f64) -> Result<()>;

    /// Mismatch of the original equation at `iterate`.
    fn residual(&self, iterate: f64) -> Result<f64>;

    /// Maps an iterate back to the solution variable.
    fn solution(&self, iterate: f64) -> f64;

    /// First-order relative error of the solution implied by `residual`.
    fn relative_error(&self, iterate: f64, residual: f64) -> f64;

    fn branch(&self) -> RootBranch {
        RootBranch::Plus
    }
}

pub(crate) fn step<S: Scheme + ?Sized>(
    scheme: &S,
    index: usize,
    before: f64,
) -> Result<IterationStep> {
    scheme.check_domain(before)?;
    let coeffs = scheme.coefficients(before)?;
    let a = quadratic_root(&coeffs, scheme.branch())?;
    let after = before + a;
    scheme.check_domain(after)?;
    let residual = scheme.residual(after)?;
    if !residual.is_finite() {
        return Err(Error::NonFinite {
            what: "residual",
            value: residual,
        });
    }
    Ok(IterationStep {
        index,
        iterate_before: before,
        l: coeffs.l,
        m: coeffs.m,
        a,
        iterate_after: after,
        residual,
    })
}

/// Options that only some callers need.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct RunOptions {
    /// Multiply the iterate produced by step `n` by the factor before
    /// continuing.
    pub perturb: Option<(usize, f64)>,
    /// Give up once `|a_n|` has failed to shrink this many steps in a row.
    pub stall_limit: Option<usize>,
}

pub(crate) struct Run {
    pub trace: Vec<IterationStep>,
    pub status: Status,
    pub iterate: f64,
    pub failure: Option<Error>,
}

pub(crate) fn run<S: Scheme + ?Sized>(
    scheme: &S,
    start: f64,
    cfg: &SolveConfig,
    opts: RunOptions,
) -> Run {
    let scale = cfg.tol * scheme.target().abs().max(1.0);
    let mut trace: Vec<IterationStep> = Vec::new();
    let mut iterate = start;
    let mut stalled = 0usize;

    if let Err(e) = scheme.check_domain(start) {
        return Run {
            trace,
            status: Status::LeftDomain,
            iterate,
            failure: Some(e),
        };
    }

    for index in 1..=cfg.max_iter {
        let mut s = match step(scheme, index, iterate) {
            Ok(s) => s,
            Err(e) => {
                return Run {
                    trace,
                    status: Status::LeftDomain,
                    iterate,
                    failure: Some(e),
                }
            }
        };
        let mut perturbed = false;
        if let Some((at, factor)) = opts.perturb {
            if at == index && factor != 1.0 {
                let moved = s.iterate_after * factor;
                if let Err(e) = scheme.check_domain(moved) {
                    trace.push(s);
                    return Run {
                        trace,
                        status: Status::LeftDomain,
                        iterate,
                        failure: Some(e),
                    };
                }
                s.a = moved - s.iterate_before;
                s.iterate_after = moved;
                s.residual = scheme.residual(moved).unwrap_or(f64::INFINITY);
                perturbed = true;
            }
        }

        if let (Some(limit), Some(prev)) = (opts.stall_limit, trace.last()) {
            if s.a.abs() >= prev.a.abs() && index > 2 {
                stalled += 1;
            } else {
                stalled = 0;
            }
            if stalled >= limit {
                iterate = s.iterate_after;
                trace.push(s);
                return Run {
                    trace,
                    status: Status::MaxIterReached,
                    iterate,
                    failure: None,
                };
            }
        }

        // A correction of a few ulps means the iterate is as close as
        // doubles allow, even if the residual is still above tolerance.
        let fixed = s.a.abs() <= 4.0 * f64::EPSILON * s.iterate_before.abs().max(1.0);
        iterate = s.iterate_after;
        let done = !perturbed
            && s.a.abs() <= cfg.tol * iterate.abs().max(1.0)
            && (s.residual.abs() <= scale || fixed);
        trace.push(s);
        if done {
            return Run {
                trace,
                status: Status::Converged,
                iterate,
                failure: None,
            };
        }
    }

    Run {
        trace,
        status: Status::MaxIterReached,
        iterate,
        failure: None,
    }
}

/// Runs from `start`; if the iterate leaves the domain, restarts once from
/// `retry` (when given and different from `start`).
pub(crate) fn solve_with_retry<S: Scheme + ?Sized>(
    scheme: &S,
    start: f64,
    retry: Option<f64>,
    cfg: &SolveConfig,
    opts: RunOptions,
) -> SolveResult {
    let first = run(scheme, start, cfg, opts);
    if first.status == Status::LeftDomain {
        if let Some(r) = retry.filter(|r| *r != start && r.is_finite()) {
            let second = run(scheme, r, cfg, opts);
            return finish(scheme, second, r, true);
        }
    }
    finish(scheme, first, start, false)
}

pub(crate) fn finish<S: Scheme + ?Sized>(
    scheme: &S,
    run: Run,
    start: f64,
    retried: bool,
) -> SolveResult {
    let final_residual = match run.trace.last() {
        Some(s) => s.residual,
        None => scheme.residual(run.iterate).unwrap_or(f64::INFINITY),
    };
    SolveResult {
        y: scheme.solution(run.iterate),
        relative_error_estimate: scheme.relative_error(run.iterate, final_residual),
        trace: run.trace,
        status: run.status,
        final_residual,
        precision_limited: false,
        initial_guess: start,
        retried,
        failure: run.failure,
    }
}
