//! The general equation `y^p·e^(e^y) = X` and its negative-exponent
//! companion `y^p·e^(e^(−y)) = X`.
//!
//! With `z = e^y` the first becomes `z + p·ln(ln z) = ln X` and is iterated
//! like method 2. For `p < 0` it has a lower and an upper solution; the
//! upper one follows the plus root of every step quadratic and the lower one
//! the minus root. The companion is iterated in `y` directly through
//! `y + ln(ln(X / y^p)) = 0`, which reduces to method 3 at `p = 1`.

use std::f64::consts::E;

use crate::error::{finite, Error, Result};
use crate::iteration::{self, RunOptions, Scheme};
use crate::oracle::lambert_w0;
use crate::scalar::{guarded_ln, guarded_lnln, QuadraticCoeffs, RootBranch};
use crate::solvers::{IterationStep, SolveConfig, SolveResult};

const STALL_LIMIT: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Form {
    /// `y^p·e^(e^y) = X`
    PositiveExp,
    /// `y^p·e^(e^(−y)) = X`
    NegativeExp,
}

/// Which of the two solutions of `y^p·e^(e^y) = X` to seek when `p < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Lower,
    Upper,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::Lower => "lower",
            Branch::Upper => "upper",
        }
    }

    pub fn root(self) -> RootBranch {
        match self {
            Branch::Lower => RootBranch::Minus,
            Branch::Upper => RootBranch::Plus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralProblem {
    pub p: f64,
    pub x: f64,
    pub form: Form,
    /// Only consulted for `PositiveExp` with `p < 0`.
    pub branch: Branch,
}

impl GeneralProblem {
    pub fn new(p: f64, x: f64, form: Form) -> Result<Self> {
        let prob = GeneralProblem {
            p,
            x,
            form,
            branch: Branch::Upper,
        };
        prob.validate()?;
        Ok(prob)
    }

    pub fn positive(p: f64, x: f64) -> Result<Self> {
        Self::new(p, x, Form::PositiveExp)
    }

    pub fn negative(p: f64, x: f64) -> Result<Self> {
        Self::new(p, x, Form::NegativeExp)
    }

    pub fn on_branch(mut self, branch: Branch) -> Self {
        self.branch = branch;
        self
    }

    /// True for the two-solution case.
    pub fn has_two_branches(&self) -> bool {
        self.form == Form::PositiveExp && self.p < 0.0
    }

    pub fn validate(&self) -> Result<()> {
        finite("p", self.p)?;
        finite("X", self.x)?;
        if self.p == 0.0 {
            return Err(Error::Domain {
                what: "p",
                value: self.p,
                requirement: "p ≠ 0",
            });
        }
        if self.x <= 0.0 {
            return Err(Error::Domain {
                what: "X",
                value: self.x,
                requirement: "X > 0",
            });
        }
        Ok(())
    }
}

/// `y^p·e^(e^y)` or `y^p·e^(e^(−y))` for `y > 0`.
pub fn general_forward(p: f64, y: f64, form: Form) -> Result<f64> {
    let p = finite("p", p)?;
    let y = finite("y", y)?;
    if y <= 0.0 {
        return Err(Error::Domain {
            what: "y",
            value: y,
            requirement: "y > 0 for a real power y^p",
        });
    }
    let inner = match form {
        Form::PositiveExp => y.exp(),
        Form::NegativeExp => (-y).exp(),
    };
    let value = (p * y.ln() + inner).exp();
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow {
            what: "y^p·e^(e^(±y))",
            value: y,
        })
    }
}

fn log_slope(p: f64, y: f64, form: Form) -> f64 {
    match form {
        Form::PositiveExp => p + y * y.exp(),
        Form::NegativeExp => p - y * (-y).exp(),
    }
}

fn relative_error(p: f64, x: f64, y: f64, residual: f64, form: Form) -> f64 {
    let denom = (x * log_slope(p, y, form)).abs();
    if denom > 0.0 {
        residual.abs() / denom
    } else {
        f64::INFINITY
    }
}

struct PositiveScheme {
    p: f64,
    x: f64,
    ln_x: f64,
    branch: RootBranch,
}

impl Scheme for PositiveScheme {
    fn target(&self) -> f64 {
        self.x
    }

    fn coefficients(&self, z: f64) -> Result<QuadraticCoeffs> {
        let ln_z = guarded_ln("z_n", z)?;
        let lnln_z = guarded_lnln("z_n", z)?;
        let r = self.ln_x - self.p * lnln_z - z;
        let l = -2.0 * (self.p + z * ln_z) / (1.0 + ln_z) + r;
        let m = 2.0 * z * ln_z * r / (1.0 + ln_z);
        QuadraticCoeffs::new(l, m)
    }

    fn check_domain(&self, z: f64) -> Result<()> {
        if z > 1.0 && z.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain {
                what: "z",
                value: z,
                requirement: "iterate must stay above 1",
            })
        }
    }

    fn residual(&self, z: f64) -> Result<f64> {
        Ok(general_forward(self.p, z.ln(), Form::PositiveExp)? - self.x)
    }

    fn solution(&self, z: f64) -> f64 {
        z.ln()
    }

    fn relative_error(&self, z: f64, residual: f64) -> f64 {
        relative_error(self.p, self.x, z.ln(), residual, Form::PositiveExp)
    }

    fn branch(&self) -> RootBranch {
        self.branch
    }
}

impl PositiveScheme {
    fn new(p: f64, x: f64, branch: RootBranch) -> Self {
        PositiveScheme {
            p,
            x,
            ln_x: x.ln(),
            branch,
        }
    }

    /// `|ln X − p·ln(ln z) − z|`, the quantity each correction reduces.
    fn log_residual(&self, z: f64) -> f64 {
        (self.ln_x - self.p * z.ln().ln() - z).abs()
    }
}

/// One correction of `z + p·ln(ln z) = ln X` on the requested root branch.
pub fn general_step(z_n: f64, p: f64, x: f64, branch: RootBranch) -> Result<IterationStep> {
    GeneralProblem::positive(p, x)?;
    let z_n = finite("z_n", z_n)?;
    iteration::step(&PositiveScheme::new(p, x, branch), 1, z_n)
}

/// `|ln X − p·ln(ln z) − z|` at `z`.
pub fn general_log_residual(z: f64, p: f64, x: f64) -> f64 {
    PositiveScheme::new(p, x, RootBranch::Plus).log_residual(z)
}

/// Restart point for `p > 0` when `z = 2` leaves the domain: `e^y` for the
/// small-`y` estimate `y ≈ (X/e)^(1/p)`, capped at `ln 2`.
fn positive_p_seed(p: f64, x: f64) -> f64 {
    let y = (x / E).powf(1.0 / p).min(std::f64::consts::LN_2);
    y.exp()
}

/// Starting `z` for `p < 0` on the requested branch, or `None` when `X` is
/// below the minimum of `y^p·e^(e^y)`. Both branches are attracting fixed
/// points of a rearrangement of the equation, which a few sweeps approach
/// from the minimum at `y·e^y = −p`.
fn negative_p_seed(p: f64, x: f64, branch: Branch) -> Option<f64> {
    let y_min = lambert_w0(-p).ok()?;
    let ln_x = x.ln();
    if ln_x < p * y_min.ln() + y_min.exp() {
        return None;
    }
    let sweep = |y: f64| match branch {
        Branch::Upper => (ln_x - p * y.ln()).ln(),
        Branch::Lower => ((ln_x - y.exp()) / p).exp(),
    };
    let mut y = y_min;
    for _ in 0..8 {
        let next = sweep(y);
        if !(next.is_finite() && next > 0.0) {
            break;
        }
        y = next;
    }
    let z = y.exp();
    (z > 1.0 && z.is_finite()).then_some(z)
}

/// Solves `y^p·e^(e^y) = X` (dispatching to the companion for `NegativeExp`).
///
/// For `p < 0` the branch is fixed for the whole run; a run that fails to
/// converge on it is reported as [`Error::NoSolutionOnBranch`].
pub fn general_solve(prob: &GeneralProblem, cfg: &SolveConfig) -> Result<SolveResult> {
    prob.validate()?;
    cfg.validate()?;
    if prob.form == Form::NegativeExp {
        return general_solve_negative_exp(prob, cfg);
    }
    let (p, x) = (prob.p, prob.x);
    let root = if p > 0.0 {
        RootBranch::Plus
    } else {
        prob.branch.root()
    };
    let scheme = PositiveScheme::new(p, x, root);
    let start = cfg.initial_guess.unwrap_or(2.0);
    let fallback = if p > 0.0 { positive_p_seed(p, x) } else { 2.0 };
    let retry = if start != fallback {
        fallback
    } else {
        1.0 + 0.5 * (start - 1.0)
    };
    let opts = RunOptions {
        stall_limit: (p < 0.0).then_some(STALL_LIMIT),
        ..Default::default()
    };
    let mut r = iteration::solve_with_retry(&scheme, start, Some(retry), cfg, opts);
    if p < 0.0 && !r.converged() {
        if let Some(seed) = negative_p_seed(p, x, prob.branch).filter(|s| *s != start) {
            let run = iteration::run(&scheme, seed, cfg, opts);
            r = iteration::finish(&scheme, run, seed, true);
        }
    }
    if p < 0.0 && !r.converged() {
        return Err(Error::NoSolutionOnBranch {
            branch: prob.branch.name(),
            p,
            x,
        });
    }
    Ok(r)
}

struct NegativeScheme {
    p: f64,
    x: f64,
    /// `X^(1/p)`, where `ln(X / y^p)` vanishes.
    edge: f64,
}

impl NegativeScheme {
    fn new(p: f64, x: f64) -> Self {
        NegativeScheme {
            p,
            x,
            edge: if p == 1.0 { x } else { x.powf(1.0 / p) },
        }
    }

    /// `ln(X / y^p)` written around the edge so it stays accurate near it.
    fn log_quotient(&self, y: f64) -> f64 {
        -self.p * ((y - self.edge) / self.edge).ln_1p()
    }

    fn seed(&self) -> f64 {
        let sweep = |y: f64| self.edge * (-(-y).exp() / self.p).exp();
        sweep(sweep(self.edge))
    }

    fn precision_limited(&self) -> bool {
        (-(-self.edge).exp() / self.p).exp_m1().abs() < f64::EPSILON
    }
}

impl Scheme for NegativeScheme {
    fn target(&self) -> f64 {
        self.x
    }

    fn coefficients(&self, y: f64) -> Result<QuadraticCoeffs> {
        let q = self.log_quotient(y);
        let ln_q = guarded_ln("ln(X/y_n^p)", q)?;
        let d = self.p - q;
        let l = -(y + ln_q) + 2.0 * (y * q - self.p) / d;
        let m = 2.0 * y * q * (y + ln_q) / d;
        QuadraticCoeffs::new(l, m)
    }

    fn check_domain(&self, y: f64) -> Result<()> {
        if y > 0.0 && y.is_finite() && self.log_quotient(y) > 0.0 {
            Ok(())
        } else {
            Err(Error::Domain {
                what: "y",
                value: y,
                requirement: "iterate must keep y > 0 and X / y^p > 1",
            })
        }
    }

    fn residual(&self, y: f64) -> Result<f64> {
        Ok(general_forward(self.p, y, Form::NegativeExp)? - self.x)
    }

    fn solution(&self, y: f64) -> f64 {
        y
    }

    fn relative_error(&self, y: f64, residual: f64) -> f64 {
        relative_error(self.p, self.x, y, residual, Form::NegativeExp)
    }
}

/// One correction of `y + ln(ln(X / y^p)) = 0`.
pub fn negative_exp_step(y_n: f64, p: f64, x: f64) -> Result<IterationStep> {
    GeneralProblem::negative(p, x)?;
    iteration::step(&NegativeScheme::new(p, x), 1, finite("y_n", y_n)?)
}

/// Solves `y^p·e^(e^(−y)) = X` for `y > 0`.
///
/// The default `y_1` is two sweeps of `y ← X^(1/p)·e^(−e^(−y)/p)` started at
/// `X^(1/p)`; a guess on the wrong side of `X^(1/p)` is replaced by it.
pub fn general_solve_negative_exp(prob: &GeneralProblem, cfg: &SolveConfig) -> Result<SolveResult> {
    prob.validate()?;
    cfg.validate()?;
    let scheme = NegativeScheme::new(prob.p, prob.x);
    let seed = scheme.seed();
    if scheme.precision_limited() {
        let y = seed;
        let mut r = SolveResult::exact(y);
        r.final_residual = scheme.residual(y)?;
        r.relative_error_estimate = scheme.relative_error(y, r.final_residual);
        r.precision_limited = true;
        return Ok(r);
    }
    let start = cfg.initial_guess.unwrap_or(seed);
    let retry = if start != seed {
        seed
    } else {
        0.5 * (start + scheme.edge)
    };
    Ok(iteration::solve_with_retry(
        &scheme,
        start,
        Some(retry),
        cfg,
        RunOptions::default(),
    ))
}

/// Exponent `num/den` for the negative-base reading `(−y)^p·e^(e^(−y)) = −X`.
///
/// A real solution exists only when the reduced numerator and denominator
/// are both odd; then `(−y)^p = −y^p` and the equation is
/// `y^p·e^(e^(−y)) = X`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NegativeBaseExponent {
    num: i64,
    den: i64,
}

impl NegativeBaseExponent {
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 || num == 0 {
            return Err(Error::Domain {
                what: "p",
                value: if den == 0 { f64::INFINITY } else { 0.0 },
                requirement: "p must be a nonzero ratio",
            });
        }
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()) as i64;
        let (mut num, mut den) = (num / g, den / g);
        if den < 0 {
            num = -num;
            den = -den;
        }
        if num % 2 == 0 || den % 2 == 0 {
            return Err(Error::Domain {
                what: "p",
                value: num as f64 / den as f64,
                requirement: "(−y)^p is real and negative only for odd/odd p",
            });
        }
        Ok(NegativeBaseExponent { num, den })
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn parts(self) -> (i64, i64) {
        (self.num, self.den)
    }

    /// The equivalent positive-`y` problem.
    pub fn problem(self, x: f64) -> Result<GeneralProblem> {
        GeneralProblem::negative(self.value(), x)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::nfunc;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn forward_examples() {
        let ee = E.powf(E);
        for p in [-3.0, 0.5, 7.0] {
            assert!(rel(general_forward(p, 1.0, Form::PositiveExp).unwrap(), ee) < 1e-14);
        }
        let v = general_forward(0.5, 0.107_785_023_9, Form::PositiveExp).unwrap();
        assert!(rel(v, 1.0) < 1e-8);
        let v = general_forward(10.0, 0.091_276_527_16, Form::NegativeExp).unwrap();
        assert!(rel(v, 1e-10) < 1e-7);
        assert!(general_forward(1.0, -1.0, Form::PositiveExp).is_err());
    }

    #[test]
    fn first_steps_match_table() {
        let s = general_step(2.0, 0.5, 1.0, RootBranch::Plus).unwrap();
        assert!(rel(s.iterate_after, 1.033_635_801) < 1e-8);
        let s = general_step(2.0, 10.0, 1e5, RootBranch::Plus).unwrap();
        assert!(rel(s.iterate_after, 6.511_463_632) < 1e-7);
        let s = general_step(2.0, -5.0, 50.0, RootBranch::Plus).unwrap();
        assert!(rel(s.iterate_after, 6.377_805_661) < 1e-9);
        let s = general_step(2.0, -5.0, 50.0, RootBranch::Minus).unwrap();
        assert!(rel(s.iterate_after, 1.970_278_27) < 1e-8);
    }

    #[test]
    fn reduces_to_nfunc_at_p_one() {
        let cfg = SolveConfig::default();
        for x in [1.0, 10.0, 1e5] {
            let g = general_solve(&GeneralProblem::positive(1.0, x).unwrap(), &cfg).unwrap();
            let n = nfunc(x, &cfg).unwrap();
            assert!(rel(g.y, n.y) < 1e-12, "X={x}");
        }
    }

    #[test]
    fn dual_branches() {
        let cfg = SolveConfig::default();
        let prob = GeneralProblem::positive(-5.0, 50.0).unwrap();
        let lo = general_solve(&prob.on_branch(Branch::Lower), &cfg).unwrap();
        let hi = general_solve(&prob.on_branch(Branch::Upper), &cfg).unwrap();
        assert!(rel(lo.y, 0.678_175_971_1) < 1e-9);
        assert!(rel(hi.y, 1.997_684_556) < 1e-9);
        assert!(lo.y < hi.y);
    }

    #[test]
    fn infeasible_branch_reported() {
        // y^(−1)·e^(e^y) has its minimum above e^e at y = W(1); X = 1 is
        // below it on both sides.
        let cfg = SolveConfig::default();
        let prob = GeneralProblem::positive(-1.0, 1.0).unwrap();
        for b in [Branch::Lower, Branch::Upper] {
            match general_solve(&prob.on_branch(b), &cfg) {
                Err(Error::NoSolutionOnBranch { branch, .. }) => assert_eq!(branch, b.name()),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn small_x_positive_p_restarts() {
        let cfg = SolveConfig::default();
        let r = general_solve(&GeneralProblem::positive(0.5, 1e-2).unwrap(), &cfg).unwrap();
        assert!(r.converged() && r.retried);
        let back = general_forward(0.5, r.y, Form::PositiveExp).unwrap();
        assert!(rel(back, 1e-2) < 1e-10);

        // y ≈ 1.4e-9 sits where z = e^y resolves y only to about 1e-7.
        let r = general_solve(&GeneralProblem::positive(0.5, 1e-4).unwrap(), &cfg).unwrap();
        assert!(r.converged());
        let back = general_forward(0.5, r.y, Form::PositiveExp).unwrap();
        assert!(rel(back, 1e-4) < 1e-6);
    }

    #[test]
    fn negative_exp_table_rows() {
        let cfg = SolveConfig::default();
        let prob = GeneralProblem::negative(10.0, 1e-10).unwrap();
        let r = general_solve_negative_exp(&prob, &cfg.clone().with_guess(0.09)).unwrap();
        assert!(rel(r.y, 0.091_276_527_16) < 1e-9);
        let prob = GeneralProblem::negative(-10.0, 1.0).unwrap();
        let r = general_solve_negative_exp(&prob, &cfg.clone().with_guess(1.01)).unwrap();
        assert!(rel(r.y, 1.036_119_907_8) < 1e-9);
    }

    #[test]
    fn negative_exp_reduces_to_method3() {
        let cfg = SolveConfig::default();
        let r = general_solve(&GeneralProblem::negative(1.0, 1.0).unwrap(), &cfg).unwrap();
        assert!(rel(r.y, crate::OMEGA) < 1e-12);
    }

    #[test]
    fn negative_exp_guess_on_wrong_side_is_replaced() {
        let cfg = SolveConfig::default().with_guess(0.2);
        let prob = GeneralProblem::negative(10.0, 1e-10).unwrap();
        let r = general_solve_negative_exp(&prob, &cfg).unwrap();
        assert!(r.retried);
        assert!(r.converged());
    }

    #[test]
    fn parity_rules() {
        assert!(NegativeBaseExponent::new(3, 5).is_ok());
        assert_eq!(NegativeBaseExponent::new(-6, 10).unwrap().parts(), (-3, 5));
        assert!(NegativeBaseExponent::new(2, 1).is_err());
        assert!(NegativeBaseExponent::new(4, 3).is_err());
        assert!(NegativeBaseExponent::new(3, 2).is_err());
        assert!(NegativeBaseExponent::new(1, 0).is_err());
        let prob = NegativeBaseExponent::new(1, 1)
            .unwrap()
            .problem(1.0)
            .unwrap();
        let r = general_solve(&prob, &SolveConfig::default()).unwrap();
        assert!(rel(r.y, crate::OMEGA) < 1e-12);
    }

    #[test]
    fn problem_validation() {
        assert!(GeneralProblem::positive(0.0, 1.0).is_err());
        assert!(GeneralProblem::positive(1.0, 0.0).is_err());
        assert!(GeneralProblem::positive(f64::NAN, 1.0).is_err());
        assert!(general_step(2.0, 0.0, 1.0, RootBranch::Plus).is_err());
    }

    #[test]
    fn negative_p_restarts_near_the_minimum_and_far_below_it() {
        let cfg = SolveConfig::default();
        let lower = general_solve(
            &GeneralProblem::positive(-0.5, 1e3)
                .unwrap()
                .on_branch(Branch::Lower),
            &cfg,
        )
        .unwrap();
        assert!(lower.retried);
        assert!((lower.y - 7.389165298e-6).abs() < 1e-13);

        // X sits 0.07% above the minimum of y^p·e^(e^y).
        let p = -1.8795319613900396;
        let prob = GeneralProblem::positive(p, 14.070950188794821).unwrap();
        let hi = general_solve(&prob, &cfg).unwrap();
        let lo = general_solve(&prob.on_branch(Branch::Lower), &cfg).unwrap();
        assert!(lo.y < hi.y);
        for y in [lo.y, hi.y] {
            assert!((general_forward(p, y, Form::PositiveExp).unwrap() - prob.x).abs() < 1e-10);
        }

        assert!(negative_p_seed(-1.0, 10.0, Branch::Upper).is_none());
    }
}
