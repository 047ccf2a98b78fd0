//! Convergence analysis of recorded traces and perturbation experiments.

use crate::error::{Error, Result};
use crate::iteration::RunOptions;
use crate::solvers::{run_method, IterationStep, Method, SolveConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// `|a_{k+1}| / |a_k|` for consecutive corrections; 0 once `a_k = 0`.
    pub ratios: Vec<f64>,
    /// Ratios non-increasing from the second one onward and the last below
    /// 0.5, ignoring corrections at the rounding floor. A finite stand-in
    /// for "the ratio tends to zero".
    pub superlinear: bool,
    /// Corrections taken until `|a_k| ≤ tol·max(1, |iterate|)`, or the trace
    /// length if that never happens.
    pub steps_to_tol: usize,
    pub residual_history: Vec<f64>,
}

/// Ratio analysis of a trace with at least three corrections.
pub fn analyze_trace(trace: &[IterationStep]) -> Result<ConvergenceReport> {
    analyze_trace_with_tol(trace, SolveConfig::default().tol)
}

pub fn analyze_trace_with_tol(trace: &[IterationStep], tol: f64) -> Result<ConvergenceReport> {
    if trace.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "convergence analysis needs at least 3 corrections, trace has {}",
            trace.len()
        )));
    }
    let ratios: Vec<f64> = trace
        .windows(2)
        .map(|w| {
            let (prev, next) = (w[0].a.abs(), w[1].a.abs());
            if prev == 0.0 {
                0.0
            } else {
                next / prev
            }
        })
        .collect();
    // Corrections at the rounding floor carry no rate information, so the
    // flag only looks at ratios whose newer correction is above it.
    let significant: Vec<(usize, f64)> = ratios
        .iter()
        .copied()
        .enumerate()
        .filter(|&(i, _)| above_rounding_floor(&trace[i + 1]))
        .collect();
    // The first ratio reflects the quality of the guess, not the method.
    let tail: Vec<f64> = significant
        .iter()
        .filter(|(i, _)| *i >= 1)
        .map(|&(_, r)| r)
        .collect();
    let last = tail.last().or(significant.last().map(|(_, r)| r)).copied();
    let superlinear = tail.windows(2).all(|w| w[1] <= w[0]) && last.is_some_and(|r| r < 0.5);
    let steps_to_tol = trace
        .iter()
        .position(|s| s.a.abs() <= tol * s.iterate_after.abs().max(1.0))
        .map_or(trace.len(), |i| i + 1);
    Ok(ConvergenceReport {
        ratios,
        superlinear,
        steps_to_tol,
        residual_history: trace.iter().map(|s| s.residual).collect(),
    })
}

/// True when `|a|` exceeds what rounding of the iterate alone can produce.
pub fn above_rounding_floor(s: &IterationStep) -> bool {
    s.a.abs() > ROUNDING_FLOOR * s.iterate_after.abs().max(1.0)
}

/// Corrections within this many ulps (relative) of the iterate are noise.
pub const ROUNDING_FLOOR: f64 = 16.0 * f64::EPSILON;

/// Outcome of restarting a run from a deliberately corrupted iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeOutcome {
    pub y_clean: f64,
    /// `None` when the corrupted iterate left the method's domain or the run
    /// did not converge.
    pub y_perturbed: Option<f64>,
    /// Corrections needed beyond the clean run (negative if fewer).
    pub extra_steps: isize,
    pub clean_iterations: usize,
    pub perturbed_iterations: usize,
    pub failure: Option<Error>,
}

/// Multiplies the iterate produced by correction `perturb_at` by `factor`
/// and lets the iteration carry on from there.
pub fn self_correction_probe(
    x: f64,
    method: Method,
    perturb_at: usize,
    factor: f64,
    cfg: &SolveConfig,
) -> Result<ProbeOutcome> {
    let clean = run_method(x, method, cfg, RunOptions::default())?;
    if !clean.converged() {
        return Err(Error::InvalidConfig(format!(
            "clean run for X = {x} did not converge ({})",
            clean.status.name()
        )));
    }
    if perturb_at == 0 || perturb_at > clean.iterations() {
        return Err(Error::InvalidConfig(format!(
            "perturbation step {perturb_at} outside the clean trace of {} corrections",
            clean.iterations()
        )));
    }
    let opts = RunOptions {
        perturb: Some((perturb_at, factor)),
        ..RunOptions::default()
    };
    let perturbed = run_method(x, method, cfg, opts)?;
    let y_perturbed = perturbed.converged().then_some(perturbed.y);
    Ok(ProbeOutcome {
        y_clean: clean.y,
        y_perturbed,
        extra_steps: perturbed.iterations() as isize - clean.iterations() as isize,
        clean_iterations: clean.iterations(),
        perturbed_iterations: perturbed.iterations(),
        failure: perturbed.failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::solve_method1;

    fn synthetic(a: &[f64]) -> Vec<IterationStep> {
        a.iter()
            .enumerate()
            .map(|(i, &a)| IterationStep {
                index: i + 1,
                iterate_before: 0.0,
                l: 0.0,
                m: 0.0,
                a,
                iterate_after: 1.0,
                residual: a,
            })
            .collect()
    }

    #[test]
    fn table_one_trace_is_superlinear() {
        let r = solve_method1(1e-3, &SolveConfig::default().with_guess(2.0)).unwrap();
        let rep = analyze_trace(&r.trace).unwrap();
        assert!(rep.superlinear, "{rep:?}");
        assert_eq!(rep.ratios.len(), r.trace.len() - 1);
        assert!(rep.ratios.iter().all(|q| q.is_finite() && *q >= 0.0));
    }

    #[test]
    fn constant_steps_are_not_superlinear() {
        let rep = analyze_trace(&synthetic(&[0.1; 5])).unwrap();
        assert!(!rep.superlinear);
        assert_eq!(rep.steps_to_tol, 5);
    }

    #[test]
    fn zero_step_ratio() {
        let rep = analyze_trace(&synthetic(&[1.0, 1e-3, 0.0, 0.0])).unwrap();
        assert_eq!(rep.ratios, vec![1e-3, 0.0, 0.0]);
        assert!(rep.superlinear);
        assert_eq!(rep.steps_to_tol, 3);
    }

    #[test]
    fn rounding_noise_is_ignored() {
        let rep = analyze_trace(&synthetic(&[0.5, 1e-2, 1e-13, 1e-16])).unwrap();
        assert!(rep.ratios[2] > rep.ratios[1]);
        assert!(rep.superlinear);
    }

    #[test]
    fn short_trace() {
        assert!(matches!(
            analyze_trace(&synthetic(&[1.0, 0.1])),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn probe_examples() {
        let cfg = SolveConfig::default();
        let p = self_correction_probe(1e3, Method::Method1, 3, 1.5, &cfg).unwrap();
        assert!((p.y_perturbed.unwrap() - 1.84021218).abs() < 1e-7);
        assert!(p.extra_steps >= 0);

        let p = self_correction_probe(1.0, Method::Method2, 2, 1.0, &cfg).unwrap();
        assert_eq!(p.extra_steps, 0);
        assert_eq!(p.y_perturbed, Some(p.y_clean));

        let p = self_correction_probe(100.0, Method::Method2, 2, 100.0, &cfg).unwrap();
        assert!((p.y_perturbed.unwrap() - 1.4440285).abs() < 1e-6);
    }

    #[test]
    fn probe_out_of_range_step() {
        let cfg = SolveConfig::default();
        assert!(self_correction_probe(1.0, Method::Method2, 99, 1.5, &cfg).is_err());
    }
}
