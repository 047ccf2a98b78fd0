//! Equation families that reduce to `y·e^(e^y) = X` or `y^p·e^(e^y) = X`.
//!
//! Each [`Shape`] is a parameterized equation in `z`. [`canonicalize`] maps
//! it to a canonical problem plus the back-map `z = g(y)`, and
//! [`solve_transformed`] solves it and reports the residual of the original
//! equation at the recovered `z`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::general::{general_solve, Branch, Form, GeneralProblem};
use crate::solvers::{nfunc, Method, SolveConfig, SolveResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Shape {
    /// `p + ln z + e^(q·z) = r`
    LogExp,
    /// `z = r·ln ln(p·q/z)`
    RatioLogLog,
    /// `ln ln z + z = p`
    LogLogSum,
    /// `z·ln ln z = p`
    ZLogLog,
    /// `e^z·ln z = p`
    ExpLog,
    /// `a·z·e^(e^(b·z)) = p`
    Scaled,
    /// `q·ln z + e^(r·z) = s`
    PowerLogExp,
    /// `z = r·ln ln(p/z^q)`
    PowerRatioLogLog,
    /// `p·ln ln z + z^q = r`
    WeightedLogLog,
    /// `p·z + r·e^(q·e^z) = s`
    LinearDoubleExp,
    /// `e^(z^p)·ln(q·z) = r`
    ExpPowerLog,
    /// `z·ln ln(p/z^q) = r`
    ZLogLogPower,
    /// `z·e^(e^(z^q)) = p`
    DoubleExpPower,
}

impl Shape {
    pub const ALL: [Shape; 13] = [
        Shape::LogExp,
        Shape::RatioLogLog,
        Shape::LogLogSum,
        Shape::ZLogLog,
        Shape::ExpLog,
        Shape::Scaled,
        Shape::PowerLogExp,
        Shape::PowerRatioLogLog,
        Shape::WeightedLogLog,
        Shape::LinearDoubleExp,
        Shape::ExpPowerLog,
        Shape::ZLogLogPower,
        Shape::DoubleExpPower,
    ];

    /// Command-line name.
    pub fn name(self) -> &'static str {
        match self {
            Shape::LogExp => "log-exp",
            Shape::RatioLogLog => "ratio-loglog",
            Shape::LogLogSum => "loglog-sum",
            Shape::ZLogLog => "z-loglog",
            Shape::ExpLog => "exp-log",
            Shape::Scaled => "scaled",
            Shape::PowerLogExp => "power-log-exp",
            Shape::PowerRatioLogLog => "power-ratio-loglog",
            Shape::WeightedLogLog => "weighted-loglog",
            Shape::LinearDoubleExp => "linear-double-exp",
            Shape::ExpPowerLog => "exp-power-log",
            Shape::ZLogLogPower => "z-loglog-power",
            Shape::DoubleExpPower => "double-exp-power",
        }
    }

    pub fn from_name(name: &str) -> Option<Shape> {
        Shape::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn equation(self) -> &'static str {
        match self {
            Shape::LogExp => "p + ln z + e^(q z) = r",
            Shape::RatioLogLog => "z = r ln ln(p q / z)",
            Shape::LogLogSum => "ln ln z + z = p",
            Shape::ZLogLog => "z ln ln z = p",
            Shape::ExpLog => "e^z ln z = p",
            Shape::Scaled => "a z e^(e^(b z)) = p",
            Shape::PowerLogExp => "q ln z + e^(r z) = s",
            Shape::PowerRatioLogLog => "z = r ln ln(p / z^q)",
            Shape::WeightedLogLog => "p ln ln z + z^q = r",
            Shape::LinearDoubleExp => "p z + r e^(q e^z) = s",
            Shape::ExpPowerLog => "e^(z^p) ln(q z) = r",
            Shape::ZLogLogPower => "z ln ln(p / z^q) = r",
            Shape::DoubleExpPower => "z e^(e^(z^q)) = p",
        }
    }

    /// Parameter names the shape takes, in order.
    pub fn params(self) -> &'static [&'static str] {
        match self {
            Shape::LogExp => &["p", "q", "r"],
            Shape::RatioLogLog => &["p", "q", "r"],
            Shape::LogLogSum | Shape::ZLogLog | Shape::ExpLog => &["p"],
            Shape::Scaled => &["a", "b", "p"],
            Shape::PowerLogExp => &["q", "r", "s"],
            Shape::PowerRatioLogLog => &["p", "q", "r"],
            Shape::WeightedLogLog => &["p", "q", "r"],
            Shape::LinearDoubleExp => &["p", "q", "r", "s"],
            Shape::ExpPowerLog => &["p", "q", "r"],
            Shape::ZLogLogPower => &["p", "q", "r"],
            Shape::DoubleExpPower => &["p", "q"],
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformableEquation {
    pub shape: Shape,
    params: BTreeMap<&'static str, f64>,
    /// Solution to seek when the canonical exponent is negative.
    pub branch: Branch,
}

impl TransformableEquation {
    /// Fails unless exactly the shape's parameters are given, each finite.
    pub fn new(shape: Shape, params: &[(&str, f64)]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for &(name, value) in params {
            let key = shape.params().iter().find(|k| **k == name).ok_or_else(|| {
                Error::Untransformable(format!(
                    "{shape} takes parameters {:?}, got '{name}'",
                    shape.params()
                ))
            })?;
            if !value.is_finite() {
                return Err(Error::Untransformable(format!(
                    "parameter {name} must be finite, got {value}"
                )));
            }
            if map.insert(*key, value).is_some() {
                return Err(Error::Untransformable(format!(
                    "parameter {name} given twice"
                )));
            }
        }
        if let Some(missing) = shape.params().iter().find(|k| !map.contains_key(*k)) {
            return Err(Error::Untransformable(format!(
                "{shape} needs parameter {missing}"
            )));
        }
        Ok(TransformableEquation {
            shape,
            params: map,
            branch: Branch::Upper,
        })
    }

    pub fn on_branch(mut self, branch: Branch) -> Self {
        self.branch = branch;
        self
    }

    pub fn get(&self, name: &str) -> f64 {
        self.params[name]
    }

    pub fn params(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        self.params.iter().map(|(k, v)| (*k, *v))
    }

    /// Left- and right-hand side of the original equation at `z`.
    pub fn sides(&self, z: f64) -> (f64, f64) {
        let g = |k: &str| self.get(k);
        match self.shape {
            Shape::LogExp => (g("p") + z.ln() + (g("q") * z).exp(), g("r")),
            Shape::RatioLogLog => (z, g("r") * (g("p") * g("q") / z).ln().ln()),
            Shape::LogLogSum => (z.ln().ln() + z, g("p")),
            Shape::ZLogLog => (z * z.ln().ln(), g("p")),
            Shape::ExpLog => (z.exp() * z.ln(), g("p")),
            Shape::Scaled => (g("a") * z * (g("b") * z).exp().exp(), g("p")),
            Shape::PowerLogExp => (g("q") * z.ln() + (g("r") * z).exp(), g("s")),
            Shape::PowerRatioLogLog => (z, g("r") * (g("p") / z.powf(g("q"))).ln().ln()),
            Shape::WeightedLogLog => (g("p") * z.ln().ln() + z.powf(g("q")), g("r")),
            Shape::LinearDoubleExp => (g("p") * z + g("r") * (g("q") * z.exp()).exp(), g("s")),
            Shape::ExpPowerLog => (z.powf(g("p")).exp() * (g("q") * z).ln(), g("r")),
            Shape::ZLogLogPower => (z * (g("p") / z.powf(g("q"))).ln().ln(), g("r")),
            Shape::DoubleExpPower => (z * z.powf(g("q")).exp().exp(), g("p")),
        }
    }

    /// `lhs − rhs` of the original equation at `z`.
    pub fn residual(&self, z: f64) -> f64 {
        let (l, r) = self.sides(z);
        l - r
    }
}

/// How a canonical solution `y` maps back to `z`.
#[derive(Clone)]
pub struct BackMap {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub description: String,
}

impl BackMap {
    fn new(description: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        BackMap {
            f: Arc::new(f),
            description: description.into(),
        }
    }

    pub fn apply(&self, y: f64) -> f64 {
        (self.f)(y)
    }
}

impl fmt::Debug for BackMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BackMap({})", self.description)
    }
}

/// `y^p·e^(e^y) = X` together with the way back to the original variable.
#[derive(Debug, Clone)]
pub struct CanonicalProblem {
    pub p: f64,
    pub x: f64,
    pub form: Form,
    pub branch: Branch,
    /// Method to use when `p = 1`.
    pub method: Method,
    pub back_map: BackMap,
}

impl CanonicalProblem {
    fn new(p: f64, x: f64, back_map: BackMap) -> Self {
        CanonicalProblem {
            p,
            x,
            form: Form::PositiveExp,
            branch: Branch::Upper,
            method: Method::Auto,
            back_map,
        }
    }

    fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn general(&self) -> Result<GeneralProblem> {
        Ok(GeneralProblem::new(self.p, self.x, self.form)?.on_branch(self.branch))
    }
}

fn require(ok: bool, message: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Untransformable(message.to_string()))
    }
}

fn positive_x(x: f64, expr: &str) -> Result<f64> {
    require(
        x.is_finite() && x > 0.0,
        &format!("canonical X = {expr} = {x} must be positive and finite"),
    )?;
    Ok(x)
}

/// Reduces `p·ln ln w + w^q = r` to `y^p·e^(e^y) = q^p·e^r` with
/// `y = q·ln w`; returns `(exponent, X)` and leaves `w = e^(y/q)` to the
/// caller.
fn weighted_loglog(p: f64, q: f64, r: f64, expr: &str) -> Result<(f64, f64)> {
    require(p != 0.0, "the ln ln coefficient must be nonzero")?;
    require(q > 0.0, "the power of z must be positive")?;
    let x = positive_x((p * q.ln() + r).exp(), expr)?;
    Ok((p, x))
}

pub fn canonicalize(eq: &TransformableEquation) -> Result<CanonicalProblem> {
    let g = |k: &str| eq.get(k);
    let mut c = match eq.shape {
        Shape::LogExp => {
            let (p, q, r) = (g("p"), g("q"), g("r"));
            require(q > 0.0, "q must be positive so that z = y/q > 0")?;
            let x = positive_x(q * (r - p).exp(), "q·e^(r−p)")?;
            CanonicalProblem::new(1.0, x, BackMap::new("z = y/q", move |y| y / q))
        }
        Shape::RatioLogLog => {
            let (p, q, r) = (g("p"), g("q"), g("r"));
            require(r != 0.0, "r must be nonzero")?;
            let x = positive_x(p * q / r, "p·q/r")?;
            CanonicalProblem::new(1.0, x, BackMap::new("z = r·y", move |y| r * y))
        }
        Shape::LogLogSum => {
            let x = positive_x(g("p").exp(), "e^p")?;
            CanonicalProblem::new(1.0, x, BackMap::new("z = e^y", f64::exp))
        }
        Shape::ZLogLog => {
            let x = positive_x(g("p"), "p")?;
            CanonicalProblem::new(1.0, x, BackMap::new("z = e^(e^y)", |y: f64| y.exp().exp()))
                .with_method(Method::Method1)
        }
        Shape::ExpLog => {
            let x = positive_x(g("p"), "p")?;
            CanonicalProblem::new(1.0, x, BackMap::new("z = e^y", f64::exp))
                .with_method(Method::Method2)
        }
        Shape::Scaled => {
            let (a, b, p) = (g("a"), g("b"), g("p"));
            require(a != 0.0, "a must be nonzero")?;
            require(b != 0.0, "b must be nonzero")?;
            let x = positive_x(b * p / a, "b·p/a")?;
            CanonicalProblem::new(1.0, x, BackMap::new("z = y/b", move |y| y / b))
        }
        Shape::PowerLogExp => {
            let (q, r, s) = (g("q"), g("r"), g("s"));
            require(q != 0.0, "q must be nonzero")?;
            require(r > 0.0, "r must be positive so that z = y/r > 0")?;
            let x = positive_x((q * r.ln() + s).exp(), "r^q·e^s")?;
            CanonicalProblem::new(q, x, BackMap::new("z = y/r", move |y| y / r))
        }
        Shape::PowerRatioLogLog => {
            let (p, q, r) = (g("p"), g("q"), g("r"));
            require(q != 0.0, "q must be nonzero")?;
            require(r > 0.0, "r must be positive for r^q")?;
            require(p > 0.0, "p must be positive")?;
            let x = positive_x(p * r.powf(-q), "p·r^(−q)")?;
            CanonicalProblem::new(q, x, BackMap::new("z = r·y", move |y| r * y))
        }
        Shape::WeightedLogLog => {
            let (p, q, r) = (g("p"), g("q"), g("r"));
            let (e, x) = weighted_loglog(p, q, r, "q^p·e^r")?;
            CanonicalProblem::new(e, x, BackMap::new("z = e^(y/q)", move |y| (y / q).exp()))
        }
        Shape::LinearDoubleExp => {
            // z = ln ln w turns it into (p/r)·ln ln w + w^q = s/r.
            let (p, q, r, s) = (g("p"), g("q"), g("r"), g("s"));
            require(r != 0.0, "r must be nonzero")?;
            let (e, x) = weighted_loglog(p / r, q, s / r, "q^(p/r)·e^(s/r)")?;
            CanonicalProblem::new(e, x, BackMap::new("z = ln(y/q)", move |y| (y / q).ln()))
        }
        Shape::ExpPowerLog => {
            // w = q·z gives q^p·ln ln w + w^p = q^p·ln r.
            let (p, q, r) = (g("p"), g("q"), g("r"));
            require(q > 0.0, "q must be positive")?;
            require(r > 0.0, "r must be positive for ln r")?;
            let k = q.powf(p);
            let (e, x) = weighted_loglog(k, p, k * r.ln(), "(p·r)^(q^p)")?;
            CanonicalProblem::new(
                e,
                x,
                BackMap::new("z = e^(y/p)/q", move |y| (y / p).exp() / q),
            )
        }
        Shape::ZLogLogPower => {
            let (p, q, r) = (g("p"), g("q"), g("r"));
            require(q != 0.0, "q must be nonzero")?;
            require(r > 0.0, "r must be positive for r^q")?;
            require(p > 0.0, "p must be positive")?;
            let x = positive_x(p * r.powf(-q), "p/r^q")?;
            CanonicalProblem::new(-q, x, BackMap::new("z = r/y", move |y| r / y))
        }
        Shape::DoubleExpPower => {
            let (p, q) = (g("p"), g("q"));
            require(q != 0.0, "q must be nonzero")?;
            let x = positive_x(p, "p")?;
            CanonicalProblem::new(
                1.0 / q,
                x,
                BackMap::new("z = y^(1/q)", move |y: f64| y.powf(1.0 / q)),
            )
        }
    };
    c.branch = eq.branch;
    Ok(c)
}

/// Solves the canonical problem.
pub fn solve_canonical(c: &CanonicalProblem, cfg: &SolveConfig) -> Result<SolveResult> {
    if c.p == 1.0 && c.form == Form::PositiveExp {
        let cfg = SolveConfig {
            method: match cfg.method {
                Method::Auto => c.method,
                m => m,
            },
            ..cfg.clone()
        };
        nfunc(c.x, &cfg)
    } else {
        general_solve(&c.general()?, cfg)
    }
}

/// Solves the original equation. `y` of the result is `z`, and
/// `final_residual` is `lhs − rhs` of the original equation at that `z`.
pub fn solve_transformed(eq: &TransformableEquation, cfg: &SolveConfig) -> Result<SolveResult> {
    let c = canonicalize(eq)?;
    let mut r = solve_canonical(&c, cfg)?;
    let z = c.back_map.apply(r.y);
    r.y = z;
    r.final_residual = eq.residual(z);
    Ok(r)
}
