//! Independent verification: bisection, Newton's method and Lambert W.
//!
//! Nothing here shares code with the quadratic schemes, so agreement between
//! the two is evidence rather than tautology.

use std::f64::consts::E;

use crate::error::{finite, Error, Result};
use crate::solvers::{
    forward, forward_negative, nfunc, IterationStep, SolveConfig, SolveResult, Status,
};
use crate::OMEGA;

/// A scalar equation `f(x) = 0` with a sign-changing bracket.
pub struct ResidualProblem<'a> {
    pub residual: Box<dyn Fn(f64) -> f64 + 'a>,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub description: String,
}

impl<'a> ResidualProblem<'a> {
    pub fn new(
        description: impl Into<String>,
        lo: f64,
        hi: f64,
        residual: impl Fn(f64) -> f64 + 'a,
    ) -> Self {
        ResidualProblem {
            residual: Box::new(residual),
            bracket_lo: lo,
            bracket_hi: hi,
            description: description.into(),
        }
    }
}

/// Bisection down to a bracket of width `tol`; returns the midpoint.
///
/// Deterministic: the same problem always yields the same bits.
pub fn bisect(prob: &ResidualProblem<'_>, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (prob.bracket_lo, prob.bracket_hi);
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }
    let f = &prob.residual;
    let (f_lo, f_hi) = (f(lo), f(hi));
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !(f_lo.is_finite() && f_hi.is_finite()) || f_lo.signum() == f_hi.signum() {
        return Err(Error::Bracket { lo, hi, f_lo, f_hi });
    }
    let lo_negative = f_lo < 0.0;
    // 2200 halvings exhaust any finite bracket down to adjacent doubles.
    for _ in 0..2200 {
        let mid = lo + 0.5 * (hi - lo);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo + 0.5 * (hi - lo))
}

/// Newton's iteration `x_{n+1} = x_n − f(x_n)/f'(x_n)`.
///
/// The trace records each update as an [`IterationStep`] with
/// `a = x_{n+1} − x_n`, `l = f'(x_n)` and `m = f(x_n)` so it can be read
/// side by side with the quadratic schemes.
pub fn newton_solve(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    x0: f64,
    tol: f64,
    max_iter: usize,
) -> Result<SolveResult> {
    let mut x = finite("x0", x0)?;
    let mut trace = Vec::new();
    let mut status = Status::MaxIterReached;
    let mut failure = None;
    for index in 1..=max_iter {
        let fx = f(x);
        let d = df(x);
        if d == 0.0 {
            return Err(Error::DerivativeZero { x });
        }
        let next = x - fx / d;
        if !next.is_finite() || !fx.is_finite() {
            status = Status::LeftDomain;
            failure = Some(Error::NonFinite {
                what: "Newton iterate",
                value: next,
            });
            break;
        }
        let residual = f(next);
        trace.push(IterationStep {
            index,
            iterate_before: x,
            l: d,
            m: fx,
            a: next - x,
            iterate_after: next,
            residual,
        });
        let step = (next - x).abs();
        x = next;
        if !residual.is_finite() {
            status = Status::LeftDomain;
            failure = Some(Error::NonFinite {
                what: "Newton residual",
                value: residual,
            });
            break;
        }
        if step <= tol * x.abs().max(1.0) || residual == 0.0 {
            status = Status::Converged;
            break;
        }
    }
    let final_residual = trace.last().map_or_else(|| f(x), |s| s.residual);
    Ok(SolveResult {
        y: x,
        initial_guess: x0,
        trace,
        status,
        final_residual,
        relative_error_estimate: f64::NAN,
        precision_limited: false,
        retried: false,
        failure,
    })
}

/// Principal branch of Lambert W on `[−1/e, ∞)`.
///
/// Halley refinement of a branch-point series near `−1/e`, `ln(1 + x)`
/// for moderate `x` and the two-term asymptotic seed for large `x`.
pub fn lambert_w0(x: f64) -> Result<f64> {
    let x = finite("x", x)?;
    let branch = -1.0 / E;
    if x < branch {
        // Inputs within rounding of −1/e are the branch point itself.
        if x >= branch * (1.0 + 4.0 * f64::EPSILON) {
            return Ok(-1.0);
        }
        return Err(Error::Domain {
            what: "x",
            value: x,
            requirement: "W0 needs x ≥ −1/e",
        });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let mut w = if x < -0.25 {
        let p = (2.0 * (E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 3.0 {
        x.ln_1p()
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let next = w - f / denom;
        if !next.is_finite() {
            break;
        }
        let done = (next - w).abs() <= 4.0 * f64::EPSILON * next.abs().max(f64::MIN_POSITIVE);
        w = next;
        if done {
            break;
        }
    }
    Ok(w)
}

/// Bracket for `N(X)`: `[0, min(6.5, max(1, ln(ln X) + 1))]` for `X > 1`,
/// `[0, 1]` for `0 < X ≤ 1`, `[0, |X|]` on the negative branch.
pub fn n_problem<'a>(x: f64) -> ResidualProblem<'a> {
    if x >= 0.0 {
        let lnln = if x > 1.0 { x.ln().ln() } else { 0.0 };
        let hi = (lnln + 1.0).clamp(1.0, 6.5);
        ResidualProblem::new(format!("y·e^(e^y) − {x}"), 0.0, hi, move |y| {
            forward(y).unwrap_or(f64::INFINITY) - x
        })
    } else {
        let ax = -x;
        ResidualProblem::new(format!("y·e^(e^(−y)) − {ax}"), 0.0, ax, move |y| {
            forward_negative(y).unwrap_or(f64::INFINITY) - ax
        })
    }
}

/// `N(X)` by bisection, to `tol` in `y`.
pub fn n_by_bisection(x: f64, tol: f64) -> Result<f64> {
    let x = finite("X", x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    let y = bisect(&n_problem(x), tol)?;
    Ok(if x < 0.0 { -y } else { y })
}

/// The real-valued relations between N and Lambert W.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Identity {
    /// `N(W(x)·e^(x/W(x))) = W(x)`
    NOfW(f64),
    /// `N(−W(x)·e^(W(x)/x)) = −W(x)`
    NOfNegW(f64),
    /// `N(−1) = −W(1) = −Ω`
    MinusOmega,
    /// `N(Ω·e^(1/Ω)) = W(1) = Ω`
    OmegaImage,
    /// `N(e^e) = W(e) = 1`
    One,
    /// `N(−e^(1/e)) = W(−1/e) = −1`
    MinusOne,
    /// `N(e^(1 + e^e)) = W(e^(e+1)) = e`
    Euler,
    /// `N(1) = 0.2698741376`
    NConstant,
}

impl Identity {
    pub fn label(&self) -> String {
        match self {
            Identity::NOfW(x) => format!("N(W(x)e^(x/W(x))) = W(x), x = {x}"),
            Identity::NOfNegW(x) => format!("N(-W(x)e^(W(x)/x)) = -W(x), x = {x}"),
            Identity::MinusOmega => "N(-1) = -W(1) = -Omega".into(),
            Identity::OmegaImage => "N(Omega e^(1/Omega)) = W(1) = Omega".into(),
            Identity::One => "N(e^e) = W(e) = 1".into(),
            Identity::MinusOne => "N(-e^(1/e)) = W(-1/e) = -1".into(),
            Identity::Euler => "N(e^(1+e^e)) = W(e^(e+1)) = e".into(),
            Identity::NConstant => "N(1) = 0.2698741376".into(),
        }
    }

    /// The real identity set, with the two parametric ones sampled at
    /// `x ∈ {0.5, 1, 2, e}`.
    pub fn standard_set() -> Vec<Identity> {
        let mut v = vec![
            Identity::One,
            Identity::MinusOne,
            Identity::NConstant,
            Identity::MinusOmega,
            Identity::OmegaImage,
            Identity::Euler,
        ];
        for x in [0.5, 1.0, 2.0, E] {
            v.push(Identity::NOfW(x));
            v.push(Identity::NOfNegW(x));
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub label: String,
    /// Argument handed to N.
    pub argument: f64,
    /// `N(argument)` from the quadratic schemes.
    pub lhs: f64,
    /// Value from Lambert W (or the stated constant).
    pub rhs: f64,
    pub relative_error: f64,
    pub pass: bool,
}

pub const IDENTITY_TOLERANCE: f64 = 1e-8;

/// Evaluates both sides of an identity; failures are reported, not raised.
pub fn check_identity(id: Identity) -> IdentityCheck {
    let w = |x: f64| lambert_w0(x).unwrap_or(f64::NAN);
    let (argument, rhs) = match id {
        Identity::NOfW(x) => {
            let wx = w(x);
            (wx * (x / wx).exp(), wx)
        }
        Identity::NOfNegW(x) => {
            let wx = w(x);
            (-wx * (wx / x).exp(), -wx)
        }
        Identity::MinusOmega => (-1.0, -w(1.0)),
        Identity::OmegaImage => (OMEGA * (1.0 / OMEGA).exp(), w(1.0)),
        Identity::One => (E.powf(E), w(E)),
        Identity::MinusOne => (-(1.0 / E).exp(), w(-1.0 / E)),
        Identity::Euler => ((1.0 + E.powf(E)).exp(), w((E + 1.0).exp())),
        Identity::NConstant => (1.0, 0.269_874_137_6),
    };
    let lhs = nfunc(argument, &SolveConfig::default())
        .map(|r| r.y)
        .unwrap_or(f64::NAN);
    let relative_error = (lhs - rhs).abs() / rhs.abs();
    let tol = match id {
        // The stated constant carries ten decimals.
        Identity::NConstant => 1e-10 / 0.269_874_137_6,
        _ => IDENTITY_TOLERANCE,
    };
    IdentityCheck {
        label: id.label(),
        argument,
        lhs,
        rhs,
        relative_error,
        pass: relative_error <= tol.max(IDENTITY_TOLERANCE),
    }
}
