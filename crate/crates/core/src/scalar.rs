//! Scalar primitives shared by every iteration scheme.
//!
//! The schemes replace `ln((t + 1) / t)` by the rational approximation
//! `2 / (2t + 1)`, which turns each correction step into the quadratic
//! `a² − l·a − m = 0`. This module holds that approximation, the quadratic
//! root extraction, and logarithms that report domain violations instead of
//! producing NaN.

use crate::error::{finite, Error, Result};

/// Rational approximation of `ln((t + 1) / t)`.
///
/// The error is positive and bounded by `1 / (2t + 1)³` for `t ≥ 1`.
pub fn log_ratio_approx(t: f64) -> Result<f64> {
    let t = finite("t", t)?;
    if t <= 0.0 {
        return Err(Error::Domain {
            what: "t",
            value: t,
            requirement: "t > 0",
        });
    }
    Ok(2.0 / (2.0 * t + 1.0))
}

/// Which root of `a² − l·a − m = 0` to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RootBranch {
    /// `a = l/2 + √(l² + 4m)/2`
    Plus,
    /// `a = l/2 − √(l² + 4m)/2`
    Minus,
}

impl RootBranch {
    pub fn name(self) -> &'static str {
        match self {
            RootBranch::Plus => "plus",
            RootBranch::Minus => "minus",
        }
    }
}

/// Coefficients of `a² − l·a − m = 0` with the discriminant `l² + 4m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticCoeffs {
    pub l: f64,
    pub m: f64,
    pub discriminant: f64,
}

impl QuadraticCoeffs {
    pub fn new(l: f64, m: f64) -> Result<Self> {
        let l = finite("l", l)?;
        let m = finite("m", m)?;
        let discriminant = l.mul_add(l, 4.0 * m);
        Ok(QuadraticCoeffs { l, m, discriminant })
    }

    /// Value of `a² − l·a − m`.
    pub fn eval(&self, a: f64) -> f64 {
        a * a - self.l * a - self.m
    }

    pub fn has_real_roots(&self) -> bool {
        self.effective_discriminant().is_some()
    }

    /// Discriminant clamped to zero inside the rounding band
    /// `[−64·ε·l², 0)`; `None` when it is genuinely negative.
    fn effective_discriminant(&self) -> Option<f64> {
        let d = self.discriminant;
        if d >= 0.0 {
            Some(d)
        } else if d >= -64.0 * f64::EPSILON * self.l * self.l {
            Some(0.0)
        } else {
            None
        }
    }
}

/// Root of `a² − l·a − m = 0` on the requested branch.
///
/// The root of larger magnitude is formed directly and the other one as
/// `−m / large`, so the small correction near convergence (`|m| ≪ l²`)
/// keeps full relative precision.
pub fn quadratic_root(c: &QuadraticCoeffs, branch: RootBranch) -> Result<f64> {
    let d = c.effective_discriminant().ok_or(Error::NoRealRoot {
        discriminant: c.discriminant,
    })?;
    let s = d.sqrt();
    let (plus, minus) = if c.l >= 0.0 {
        let plus = 0.5 * (c.l + s);
        let minus = if plus == 0.0 { 0.0 } else { -c.m / plus };
        (plus, minus)
    } else {
        let minus = 0.5 * (c.l - s);
        (-c.m / minus, minus)
    };
    // `+ 0.0` folds a negative zero into zero.
    Ok(match branch {
        RootBranch::Plus => plus + 0.0,
        RootBranch::Minus => minus + 0.0,
    })
}

/// Natural logarithm that rejects non-positive arguments.
pub fn guarded_ln(what: &'static str, x: f64) -> Result<f64> {
    let x = finite(what, x)?;
    if x <= 0.0 {
        return Err(Error::Domain {
            what,
            value: x,
            requirement: "ln needs a positive argument",
        });
    }
    Ok(x.ln())
}

/// `ln(ln x)`, defined for `x > 1`.
pub fn guarded_lnln(what: &'static str, x: f64) -> Result<f64> {
    let x = finite(what, x)?;
    if x <= 1.0 {
        return Err(Error::Domain {
            what,
            value: x,
            requirement: "ln ln needs an argument above 1",
        });
    }
    Ok(x.ln().ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::E;

    #[test]
    fn log_ratio_at_one_and_ten() {
        // Both sides evaluated directly.
        let at_one = log_ratio_approx(1.0).unwrap();
        assert!((at_one - 2.0 / 3.0).abs() < 1e-15);
        assert!((2f64.ln() - at_one - 0.026_480_5).abs() < 1e-6);

        let at_ten = log_ratio_approx(10.0).unwrap();
        assert!((at_ten - 0.095_238_095_238).abs() < 1e-12);
        assert!((1.1f64.ln() - 0.095_310_179_804).abs() < 1e-12);
    }

    #[test]
    fn log_ratio_vanishes_for_large_t() {
        let t = 1e12;
        let approx = log_ratio_approx(t).unwrap();
        let exact = (1.0 / t).ln_1p();
        assert!((approx - exact).abs() <= f64::EPSILON * exact);
    }

    #[test]
    fn log_ratio_rejects_non_positive() {
        assert!(matches!(log_ratio_approx(0.0), Err(Error::Domain { .. })));
        assert!(matches!(log_ratio_approx(-3.0), Err(Error::Domain { .. })));
        assert!(matches!(
            log_ratio_approx(f64::NAN),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn log_ratio_error_band_on_log_grid() {
        // 0 < ln((t+1)/t) − 2/(2t+1) ≤ 1/(2t+1)³; above t ≈ 1e5 the gap is
        // below double resolution so only the upper bound is checked there.
        for k in 0..=120 {
            let t = 10f64.powf(k as f64 / 10.0);
            let gap = (1.0 / t).ln_1p() - log_ratio_approx(t).unwrap();
            let bound = (2.0 * t + 1.0).powi(-3);
            if t <= 1e3 {
                assert!(gap > 0.0, "t = {t}: gap {gap}");
            }
            assert!(
                gap <= bound + 4.0 * f64::EPSILON / (2.0 * t + 1.0),
                "t = {t}"
            );
        }
    }

    #[test]
    fn quadratic_roots_small_cases() {
        let c = QuadraticCoeffs::new(3.0, 4.0).unwrap();
        assert_eq!(quadratic_root(&c, RootBranch::Plus).unwrap(), 4.0);
        assert_eq!(quadratic_root(&c, RootBranch::Minus).unwrap(), -1.0);

        let c = QuadraticCoeffs::new(-2.5, 0.0).unwrap();
        let plus = quadratic_root(&c, RootBranch::Plus).unwrap();
        assert_eq!(plus, 0.0);
        assert!(plus.is_sign_positive());
        assert_eq!(quadratic_root(&c, RootBranch::Minus).unwrap(), -2.5);
    }

    #[test]
    fn quadratic_roots_table6_first_step() {
        // Hand evaluation of the closed form.
        let c = QuadraticCoeffs::new(4.3484, 0.13003).unwrap();
        let plus = quadratic_root(&c, RootBranch::Plus).unwrap();
        let minus = quadratic_root(&c, RootBranch::Minus).unwrap();
        assert!((plus - 4.3781).abs() < 1e-4, "{plus}");
        assert!((minus + 0.0297).abs() < 1e-4, "{minus}");
    }

    #[test]
    fn negative_discriminant_is_reported() {
        let c = QuadraticCoeffs::new(1.0, -1.0).unwrap();
        match quadratic_root(&c, RootBranch::Plus) {
            Err(Error::NoRealRoot { discriminant }) => assert_eq!(discriminant, -3.0),
            other => panic!("unexpected {other:?}"),
        }
        assert!(!c.has_real_roots());
    }

    #[test]
    fn rounding_band_counts_as_double_root() {
        let l = 2.0;
        let m = -1.0 - 8.0 * f64::EPSILON;
        let c = QuadraticCoeffs::new(l, m).unwrap();
        assert!(c.discriminant < 0.0);
        assert_eq!(quadratic_root(&c, RootBranch::Plus).unwrap(), 1.0);
    }

    #[test]
    fn guarded_logs() {
        assert!((guarded_ln("x", E).unwrap() - 1.0).abs() < 1e-15);
        assert!((guarded_lnln("x", E.powf(E)).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            guarded_lnln("z", 1.0),
            Err(Error::Domain { what: "z", .. })
        ));
        assert!(matches!(guarded_ln("x", 0.0), Err(Error::Domain { .. })));
        assert!(matches!(
            guarded_ln("x", f64::INFINITY),
            Err(Error::NonFinite { .. })
        ));
    }

    proptest! {
        #[test]
        fn plus_root_not_below_minus(l in -1e6f64..1e6, m in -1e6f64..1e6) {
            let c = QuadraticCoeffs::new(l, m).unwrap();
            if c.has_real_roots() {
                let p = quadratic_root(&c, RootBranch::Plus).unwrap();
                let q = quadratic_root(&c, RootBranch::Minus).unwrap();
                prop_assert!(p >= q);
            }
        }

        #[test]
        fn roots_satisfy_quadratic(l in -1e6f64..1e6, m in -1e6f64..1e6) {
            let c = QuadraticCoeffs::new(l, m).unwrap();
            prop_assume!(c.has_real_roots());
            let bound = 16.0 * f64::EPSILON * (l * l + m.abs() + 1.0);
            for branch in [RootBranch::Plus, RootBranch::Minus] {
                let a = quadratic_root(&c, branch).unwrap();
                prop_assert!(c.eval(a).abs() <= bound, "{branch:?} a={a} r={}", c.eval(a));
            }
        }
    }
}
