//! Quadratic-approximation solvers for `y·e^(e^y) = X`.
//!
//! Three rewrites of the defining equation are iterated:
//!
//! * method 1: `z·ln(ln z) = X` with `y = ln(ln z)`,
//! * method 2: `z + ln(ln z) = ln X` with `y = ln z`,
//! * method 3: `−y = ln(ln(X / y))`, the negative branch `−y·e^(e^(−y)) = −X`.
//!
//! Each step substitutes `z_n + a_n` for the unknown, replaces the logarithm
//! of the ratio by its rational approximation and solves the resulting
//! quadratic for the correction `a_n`.

use std::f64::consts::E;

use crate::error::{finite, Error, Result};
use crate::iteration::{self, RunOptions, Scheme};
use crate::scalar::{guarded_ln, guarded_lnln, QuadraticCoeffs};

/// Iteration scheme selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Method1,
    Method2,
    Method3,
    /// Method 2 for positive `X`, method 3 for negative `X`.
    Auto,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Method1 => "method1",
            Method::Method2 => "method2",
            Method::Method3 => "method3",
            Method::Auto => "auto",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    /// `z_1` for methods 1 and 2, `y_1` for method 3.
    pub initial_guess: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub method: Method,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            initial_guess: None,
            tol: 1e-12,
            max_iter: 50,
            method: Method::Auto,
        }
    }
}

impl SolveConfig {
    pub fn with_method(method: Method) -> Self {
        SolveConfig {
            method,
            ..Default::default()
        }
    }

    pub fn with_guess(mut self, guess: f64) -> Self {
        self.initial_guess = Some(guess);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tol must be positive and finite, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        if let Some(g) = self.initial_guess {
            finite("initial_guess", g)?;
        }
        Ok(())
    }
}

/// One correction `iterate_after = iterate_before + a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationStep {
    pub index: usize,
    pub iterate_before: f64,
    pub l: f64,
    pub m: f64,
    pub a: f64,
    pub iterate_after: f64,
    /// Mismatch of the original equation at `iterate_after`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Converged,
    MaxIterReached,
    LeftDomain,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxIterReached => "max_iter_reached",
            Status::LeftDomain => "left_domain",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    /// Solution in the original variable.
    pub y: f64,
    pub trace: Vec<IterationStep>,
    pub status: Status,
    /// Original-equation residual at `y`; infinite if no valid iterate exists.
    pub final_residual: f64,
    /// First-order estimate of `|Δy| / |y|` implied by the residual.
    pub relative_error_estimate: f64,
    /// The solution cannot be separated from `X` in double precision.
    pub precision_limited: bool,
    /// Guess the returned trace started from.
    pub initial_guess: f64,
    /// The first attempt left the domain and the run was restarted.
    pub retried: bool,
    /// Why the iteration stopped early, if it did.
    pub failure: Option<Error>,
}

impl SolveResult {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }

    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    /// Iterates `z_1, z_2, …` (or `y_1, y_2, …`) in the scheme's own variable.
    pub fn iterates(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.trace.len() + 1);
        if let Some(first) = self.trace.first() {
            v.push(first.iterate_before);
        }
        v.extend(self.trace.iter().map(|s| s.iterate_after));
        v
    }

    pub(crate) fn exact(y: f64) -> Self {
        SolveResult {
            y,
            trace: Vec::new(),
            status: Status::Converged,
            final_residual: 0.0,
            relative_error_estimate: 0.0,
            precision_limited: false,
            initial_guess: y,
            retried: false,
            failure: None,
        }
    }
}

/// `y·e^(e^y)`.
pub fn forward(y: f64) -> Result<f64> {
    let y = finite("y", y)?;
    // For y > 0, fold y into the exponent so the product cannot overflow
    // before the result does.
    let value = if y > 0.0 {
        (y.exp() + y.ln()).exp()
    } else {
        y * y.exp().exp()
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow {
            what: "y·e^(e^y)",
            value: y,
        })
    }
}

/// `y·e^(e^(−y))`; the negative branch reads `−y·e^(e^(−y)) = −X`.
pub fn forward_negative(y: f64) -> Result<f64> {
    let y = finite("y", y)?;
    let value = y * (-y).exp().exp();
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow {
            what: "y·e^(e^(−y))",
            value: y,
        })
    }
}

fn positive_target(x: f64) -> Result<f64> {
    let x = finite("X", x)?;
    if x <= 0.0 {
        return Err(Error::Domain {
            what: "X",
            value: x,
            requirement: "X > 0",
        });
    }
    Ok(x)
}

fn above_one(what: &'static str, z: f64) -> Result<()> {
    if z > 1.0 && z.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value: z,
            requirement: "iterate must stay above 1",
        })
    }
}

/// `d ln F / d ln y` for `F(y) = y·e^(e^y)`.
fn log_slope_positive(y: f64) -> f64 {
    1.0 + y * y.exp()
}

fn relative_from_residual(residual: f64, target: f64, log_slope: f64) -> f64 {
    let denom = (target * log_slope).abs();
    if denom > 0.0 {
        residual.abs() / denom
    } else {
        f64::INFINITY
    }
}

pub(crate) struct Method1 {
    pub x: f64,
}

impl Scheme for Method1 {
    fn target(&self) -> f64 {
        self.x
    }

    fn coefficients(&self, z: f64) -> Result<QuadraticCoeffs> {
        let ln_z = guarded_ln("z_n", z)?;
        let lnln_z = guarded_lnln("z_n", z)?;
        let x = self.x;
        let k = 2.0 + lnln_z * (1.0 + ln_z);
        let l = -z - (2.0 * z * ln_z * lnln_z - x * (1.0 + ln_z)) / k;
        let m = -2.0 * z * ln_z * (z * lnln_z - x) / k;
        QuadraticCoeffs::new(l, m)
    }

    fn check_domain(&self, z: f64) -> Result<()> {
        above_one("z", z)
    }

    fn residual(&self, z: f64) -> Result<f64> {
        Ok(forward(guarded_lnln("z", z)?)? - self.x)
    }

    fn solution(&self, z: f64) -> f64 {
        z.ln().ln()
    }

    fn relative_error(&self, z: f64, residual: f64) -> f64 {
        let y = self.solution(z);
        relative_from_residual(residual, self.x, log_slope_positive(y))
    }
}

pub(crate) struct Method2 {
    pub x: f64,
    pub ln_x: f64,
}

impl Method2 {
    fn new(x: f64) -> Self {
        Method2 { x, ln_x: x.ln() }
    }
}

impl Scheme for Method2 {
    fn target(&self) -> f64 {
        self.x
    }

    fn coefficients(&self, z: f64) -> Result<QuadraticCoeffs> {
        let ln_z = guarded_ln("z_n", z)?;
        let lnln_z = guarded_lnln("z_n", z)?;
        let r = self.ln_x - lnln_z - z;
        let l = -2.0 * (1.0 + z * ln_z) / (1.0 + ln_z) + r;
        let m = 2.0 * z * ln_z * r / (1.0 + ln_z);
        QuadraticCoeffs::new(l, m)
    }

    fn check_domain(&self, z: f64) -> Result<()> {
        above_one("z", z)
    }

    fn residual(&self, z: f64) -> Result<f64> {
        Ok(forward(guarded_ln("z", z)?)? - self.x)
    }

    fn solution(&self, z: f64) -> f64 {
        z.ln()
    }

    fn relative_error(&self, z: f64, residual: f64) -> f64 {
        relative_from_residual(residual, self.x, log_slope_positive(z.ln()))
    }
}

/// `ln(X / y)` accurate when `y` is close to `X`.
pub(crate) fn log_ratio(x: f64, y: f64) -> f64 {
    ((x - y) / y).ln_1p()
}

pub(crate) struct Method3 {
    pub x: f64,
}

impl Scheme for Method3 {
    fn target(&self) -> f64 {
        self.x
    }

    fn coefficients(&self, y: f64) -> Result<QuadraticCoeffs> {
        let q = log_ratio(self.x, y);
        let ln_q = guarded_ln("ln(X/y_n)", q)?;
        let l = -(y + ln_q) + 2.0 * (y * q - 1.0) / (1.0 - q);
        let m = 2.0 * y * q * (y + ln_q) / (1.0 - q);
        QuadraticCoeffs::new(l, m)
    }

    fn check_domain(&self, y: f64) -> Result<()> {
        if y > 0.0 && y < self.x {
            Ok(())
        } else {
            Err(Error::Domain {
                what: "y",
                value: y,
                requirement: "iterate must stay inside (0, X)",
            })
        }
    }

    fn residual(&self, y: f64) -> Result<f64> {
        Ok(forward_negative(y)? - self.x)
    }

    fn solution(&self, y: f64) -> f64 {
        y
    }

    fn relative_error(&self, y: f64, residual: f64) -> f64 {
        relative_from_residual(residual, self.x, 1.0 - y * (-y).exp())
    }
}

fn run_positive(
    scheme: &dyn Scheme,
    cfg: &SolveConfig,
    default_guess: f64,
    fallback: f64,
) -> Result<SolveResult> {
    cfg.validate()?;
    let start = cfg.initial_guess.unwrap_or(default_guess);
    let retry = if start != fallback {
        fallback
    } else {
        1.0 + 0.5 * (start - 1.0)
    };
    Ok(iteration::solve_with_retry(
        scheme,
        start,
        Some(retry),
        cfg,
        RunOptions::default(),
    ))
}

/// Default `z_1` for method 1.
pub fn default_guess_method1(_x: f64) -> f64 {
    2.0
}

/// Default `z_1` for method 2: 2 for `X ≥ 1`, 1.001 below.
pub fn default_guess_method2(x: f64) -> f64 {
    if x >= 1.0 {
        2.0
    } else {
        1.001
    }
}

/// Restart point for method 2 after a domain exit: `e^(X/e)` below `X = 1`,
/// which is `e^y` for the small-`X` estimate `y ≈ X/e`.
pub fn fallback_guess_method2(x: f64) -> f64 {
    if x >= 1.0 {
        2.0
    } else {
        (x / E).exp()
    }
}

/// Default `y_1` for method 3: `X/2` up to `X = 2`, `X·(1 − 10⁻⁴)` above.
pub fn default_guess_method3(x: f64) -> f64 {
    if x <= 2.0 {
        0.5 * x
    } else {
        x * (1.0 - 1e-4)
    }
}

/// Restart point for method 3: two sweeps of `y ← X·e^(−e^(−y))` from `y = X`.
pub fn fallback_guess_method3(x: f64) -> f64 {
    let sweep = |y: f64| x * (-(-y).exp()).exp();
    sweep(sweep(x))
}

/// Relative gap `(X − y) / X` of the negative-branch solution is below
/// machine epsilon: `y` and `X` cannot be told apart in doubles.
pub fn negative_branch_precision_limited(x: f64) -> bool {
    -(-(-x).exp()).exp_m1() < f64::EPSILON
}

pub(crate) fn step_with(scheme: &dyn Scheme, iterate: f64) -> Result<IterationStep> {
    iteration::step(scheme, 1, iterate)
}

/// One method-1 correction from `z_n`.
pub fn step_method1(z_n: f64, x: f64) -> Result<IterationStep> {
    let x = positive_target(x)?;
    step_with(&Method1 { x }, finite("z_n", z_n)?)
}

/// One method-2 correction from `z_n`.
pub fn step_method2(z_n: f64, x: f64) -> Result<IterationStep> {
    let x = positive_target(x)?;
    step_with(&Method2::new(x), finite("z_n", z_n)?)
}

/// One method-3 correction from `y_n`.
pub fn step_method3(y_n: f64, x: f64) -> Result<IterationStep> {
    let x = positive_target(x)?;
    step_with(&Method3 { x }, finite("y_n", y_n)?)
}

/// Solves `z·ln(ln z) = X` and returns `y = ln(ln z)`.
pub fn solve_method1(x: f64, cfg: &SolveConfig) -> Result<SolveResult> {
    let x = positive_target(x)?;
    run_positive(&Method1 { x }, cfg, default_guess_method1(x), 2.0)
}

/// Solves `z + ln(ln z) = ln X` and returns `y = ln z`.
pub fn solve_method2(x: f64, cfg: &SolveConfig) -> Result<SolveResult> {
    let x = positive_target(x)?;
    run_positive(
        &Method2::new(x),
        cfg,
        default_guess_method2(x),
        fallback_guess_method2(x),
    )
}

/// Solves `y·e^(e^(−y)) = X` for positive `y < X`.
pub fn solve_method3(x: f64, cfg: &SolveConfig) -> Result<SolveResult> {
    let x = positive_target(x)?;
    cfg.validate()?;
    let scheme = Method3 { x };
    let seed = fallback_guess_method3(x);

    if negative_branch_precision_limited(x) {
        let y = seed.min(x);
        let mut r = SolveResult::exact(y);
        r.final_residual = scheme.residual(y)?;
        r.relative_error_estimate = scheme.relative_error(y, r.final_residual);
        r.precision_limited = true;
        return Ok(r);
    }

    let start = cfg
        .initial_guess
        .unwrap_or_else(|| default_guess_method3(x));
    let retry = if start != seed {
        seed
    } else {
        0.5 * (start + x / E)
    };
    Ok(iteration::solve_with_retry(
        &scheme,
        start,
        Some(retry),
        cfg,
        RunOptions::default(),
    ))
}

/// Single run without restart, from the configured or default start.
pub(crate) fn run_method(
    x: f64,
    method: Method,
    cfg: &SolveConfig,
    opts: RunOptions,
) -> Result<SolveResult> {
    let x = positive_target(x)?;
    cfg.validate()?;
    let (scheme, default): (Box<dyn Scheme>, f64) = match method {
        Method::Method1 => (Box::new(Method1 { x }), default_guess_method1(x)),
        Method::Method2 | Method::Auto => (Box::new(Method2::new(x)), default_guess_method2(x)),
        Method::Method3 => (Box::new(Method3 { x }), default_guess_method3(x)),
    };
    let start = cfg.initial_guess.unwrap_or(default);
    let run = iteration::run(scheme.as_ref(), start, cfg, opts);
    Ok(iteration::finish(scheme.as_ref(), run, start, false))
}

/// `N(X)`: the real `y` with `y·e^(e^y) = X`.
///
/// Positive `X` uses method 2 (or method 1 when selected), negative `X` the
/// negative branch through `N(−X) = −y`.
pub fn nfunc(x: f64, cfg: &SolveConfig) -> Result<SolveResult> {
    let x = finite("X", x)?;
    cfg.validate()?;
    if x == 0.0 {
        return Ok(SolveResult::exact(0.0));
    }
    if x > 0.0 {
        return match cfg.method {
            Method::Method1 => solve_method1(x, cfg),
            Method::Method2 | Method::Auto => solve_method2(x, cfg),
            Method::Method3 => Err(Error::InvalidConfig(
                "method3 solves the negative branch; it needs X < 0".into(),
            )),
        };
    }
    match cfg.method {
        Method::Method3 | Method::Auto => {}
        m => {
            return Err(Error::InvalidConfig(format!(
                "{} needs X > 0; negative X uses method3",
                m.name()
            )))
        }
    }
    let mut r = solve_method3(-x, cfg)?;
    r.y = -r.y;
    r.final_residual = 0.0 - r.final_residual;
    Ok(r)
}

/// Evaluates the forward map matching the sign of `X`: `forward(y)` for the
/// positive branch and `−forward_negative(−y)` for the negative one.
pub fn forward_signed(y: f64) -> Result<f64> {
    if y >= 0.0 {
        forward(y)
    } else {
        Ok(-forward_negative(-y)?)
    }
}
