//! Adaptive Simpson quadrature and the deviation functionals bounded by the
//! theorems.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspec::{FunctionSpec, Interval};

pub const DEFAULT_ABS_TOL: f64 = 1e-11;
pub const DEFAULT_MAX_DEPTH: u32 = 60;

/// Below this relative size a local error estimate is rounding noise.
const ROUNDING_FLOOR: f64 = 16.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadResult {
    pub value: f64,
    /// Absolute error estimate.
    pub est_error: f64,
    pub evaluations: usize,
}

struct Simpson<'a, G> {
    g: &'a G,
    evaluations: usize,
    max_depth: u32,
    abs_tol: f64,
    /// Magnitude of the whole integral, used to stop chasing rounding noise.
    scale: f64,
}

impl<G: Fn(f64) -> f64> Simpson<'_, G> {
    fn sample(&mut self, x: f64) -> Result<f64> {
        self.evaluations += 1;
        let v = (self.g)(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteValue { x })
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(
        &mut self,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<(f64, f64)> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = self.sample(lm)?;
        let frm = self.sample(rm)?;
        // Each half uses its own rounded width, the same one the next level
        // recomputes as `b - a`.
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol || delta.abs() <= ROUNDING_FLOOR * self.scale {
            return Ok((left + right + delta / 15.0, delta.abs() / 15.0));
        }
        if depth >= self.max_depth || !(a < lm && rm < b) {
            return Err(Error::ToleranceNotReached {
                tol: self.abs_tol,
                depth: self.max_depth,
            });
        }
        let (lv, le) = self.refine(a, m, fa, flm, fm, left, tol / 2.0, depth + 1)?;
        let (rv, re) = self.refine(m, b, fm, frm, fb, right, tol / 2.0, depth + 1)?;
        Ok((lv + rv, le + re))
    }
}

/// Integrates `g` over `iv` with adaptive Simpson bisection (15× error
/// heuristic, Richardson-corrected).
///
/// Local error estimates smaller than the floating-point resolution of the
/// integral itself are accepted, so for integrals whose magnitude is large
/// compared with `abs_tol` the reported `est_error` is the achievable one.
pub fn integrate<G: Fn(f64) -> f64>(g: G, iv: &Interval, abs_tol: f64) -> Result<QuadResult> {
    integrate_with_depth(g, iv, abs_tol, DEFAULT_MAX_DEPTH)
}

pub fn integrate_with_depth<G: Fn(f64) -> f64>(
    g: G,
    iv: &Interval,
    abs_tol: f64,
    max_depth: u32,
) -> Result<QuadResult> {
    if !(abs_tol > 0.0) {
        return Err(Error::domain(format!("abs_tol must be > 0, got {abs_tol}")));
    }
    let (a, b) = (iv.a(), iv.b());
    let mut s = Simpson {
        g: &g,
        evaluations: 0,
        max_depth,
        abs_tol,
        scale: 0.0,
    };
    let fa = s.sample(a)?;
    let fm = s.sample(0.5 * (a + b))?;
    let fb = s.sample(b)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let spread = (b - a) * fa.abs().max(fm.abs()).max(fb.abs());
    s.scale = whole.abs().max(spread);
    let (value, est_error) = s.refine(a, b, fa, fm, fb, whole, abs_tol, 0)?;
    Ok(QuadResult {
        value,
        est_error,
        evaluations: s.evaluations,
    })
}

/// Sign in front of the endpoint-derivative term of `D2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConvention {
    /// `+ (b f'(b) + a f'(a)) / 2`, the sign that integration by parts forces.
    #[default]
    PlusDerived,
    /// `- (b f'(b) + a f'(a)) / 2`, as printed in the theorem statements.
    MinusAsPrinted,
}

impl SignConvention {
    pub fn name(self) -> &'static str {
        match self {
            SignConvention::PlusDerived => "plus",
            SignConvention::MinusAsPrinted => "minus",
        }
    }
}

fn mean_value(spec: &FunctionSpec, iv: &Interval) -> Result<f64> {
    let r = integrate(|x| spec.eval(x, 0).unwrap_or(f64::NAN), iv, DEFAULT_ABS_TOL)?;
    Ok(r.value / iv.width())
}

/// `D1 = (1/(b-a)) ∫ f - (b f(b) - a f(a)) / (b-a)`.
pub fn deviation_d1(spec: &FunctionSpec, iv: &Interval) -> Result<f64> {
    let (a, b) = (iv.a(), iv.b());
    let endpoint = (b * spec.eval(b, 0)? - a * spec.eval(a, 0)?) / iv.width();
    Ok(mean_value(spec, iv)? - endpoint)
}

/// `D2 = D1 ± (b f'(b) + a f'(a)) / 2`.
pub fn deviation_d2(spec: &FunctionSpec, iv: &Interval, sign: SignConvention) -> Result<f64> {
    let (a, b) = (iv.a(), iv.b());
    let term = 0.5 * (b * spec.eval(b, 1)? + a * spec.eval(a, 1)?);
    let d1 = deviation_d1(spec, iv)?;
    Ok(match sign {
        SignConvention::PlusDerived => d1 + term,
        SignConvention::MinusAsPrinted => d1 - term,
    })
}

/// `∫_0^1 t(1-t) h(ta + (1-t)b) dt`.
fn kernel_integral<H: Fn(f64) -> Result<f64>>(h: H, iv: &Interval) -> Result<f64> {
    let r = integrate(
        |t| t * (1.0 - t) * h(iv.lerp(t)).unwrap_or(f64::NAN),
        &Interval::unit(),
        DEFAULT_ABS_TOL,
    )?;
    Ok(r.value)
}

/// Right-hand side of the `D2` identity,
/// `((b-a)^2/2) [2 ∫ t(1-t) f'' + ∫ t(1-t) F]` with `F(x) = x f'''(x)`.
///
/// Equals `deviation_d2(.., PlusDerived)` for every thrice-differentiable `f`.
pub fn d2_identity(spec: &FunctionSpec, iv: &Interval) -> Result<f64> {
    let second = kernel_integral(|x| spec.eval(x, 2), iv)?;
    let weighted_third = kernel_integral(|x| spec.x_times_third(x), iv)?;
    Ok(0.5 * iv.width().powi(2) * (2.0 * second + weighted_third))
}

/// Both sides of the trapezoid-error identity
/// `(f(a)+f(b))/2 - (1/(b-a)) ∫ f = ((b-a)^2/2) ∫_0^1 t(1-t) f''(ta+(1-t)b) dt`.
pub fn lemma11_identity(spec: &FunctionSpec, iv: &Interval) -> Result<(f64, f64)> {
    let (a, b) = (iv.a(), iv.b());
    let lhs = 0.5 * (spec.eval(a, 0)? + spec.eval(b, 0)?) - mean_value(spec, iv)?;
    let rhs = 0.5 * iv.width().powi(2) * kernel_integral(|x| spec.eval(x, 2), iv)?;
    Ok((lhs, rhs))
}

/// Both sides of Jensen's inequality for the normalized uniform measure:
/// `(mean of φ∘f, φ(mean of f))`. The caller checks `lhs >= rhs`.
pub fn jensen_check<P, F>(phi: P, f: F, iv: &Interval) -> Result<(f64, f64)>
where
    P: Fn(f64) -> f64,
    F: Fn(f64) -> f64,
{
    let composed = integrate(|t| phi(f(t)), iv, DEFAULT_ABS_TOL)?.value / iv.width();
    let mean_f = integrate(&f, iv, DEFAULT_ABS_TOL)?.value / iv.width();
    Ok((composed, phi(mean_f)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn iv(a: f64, b: f64) -> Interval {
        Interval::new(a, b).unwrap()
    }

    #[test]
    fn integrate_examples() {
        let r = integrate(|x| x * x, &iv(0.0, 1.0), 1e-11).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() <= 1e-15);
        assert!(r.est_error >= 0.0 && r.evaluations >= 3);
        let r = integrate(|t| t * (1.0 - t), &iv(0.0, 1.0), 1e-11).unwrap();
        assert!((r.value - 1.0 / 6.0).abs() <= 1e-15);
        let r = integrate(f64::exp, &iv(1.0, 2.0), 1e-11).unwrap();
        assert!((r.value - (E * E - E)).abs() <= 1e-11);
        assert!((r.value - 4.670_774_270_471_605).abs() <= 1e-11);
    }

    #[test]
    fn integrate_errors() {
        assert!(matches!(
            integrate(|x| 1.0 / x, &iv(-1.0, 1.0), 1e-11),
            Err(Error::NonFiniteValue { .. })
        ));
        assert!(integrate(|x| x, &iv(0.0, 1.0), 0.0).is_err());
        // sqrt cusp at 0.3: depth 4 cannot reach 1e-14
        let r = integrate_with_depth(|x: f64| (x - 0.3).abs().sqrt(), &iv(0.0, 1.0), 1e-14, 4);
        assert!(matches!(r, Err(Error::ToleranceNotReached { .. })));
    }

    #[test]
    fn large_integrands_terminate() {
        let spec = FunctionSpec::Exp(2.0);
        let r = integrate(|x| spec.eval(x, 0).unwrap(), &iv(0.0, 5.0), 1e-11).unwrap();
        let exact = ((10.0f64).exp() - 1.0) / 2.0;
        assert!((r.value - exact).abs() / exact < 1e-13);
    }

    #[test]
    fn d1_examples() {
        assert!(
            deviation_d1(&FunctionSpec::Constant(3.0), &iv(0.3, 2.0))
                .unwrap()
                .abs()
                < 1e-14
        );
        assert!(
            (deviation_d1(&FunctionSpec::Power(1), &iv(0.0, 1.0)).unwrap() + 0.5).abs() < 1e-15
        );
        assert!(
            (deviation_d1(&FunctionSpec::Power(2), &iv(0.0, 1.0)).unwrap() + 2.0 / 3.0).abs()
                < 1e-15
        );
    }

    #[test]
    fn d2_examples() {
        let plus = SignConvention::PlusDerived;
        assert!(
            deviation_d2(&FunctionSpec::Power(1), &iv(0.4, 2.5), plus)
                .unwrap()
                .abs()
                < 1e-14
        );
        assert!(
            (deviation_d2(&FunctionSpec::Power(3), &iv(0.0, 1.0), plus).unwrap() - 0.75).abs()
                < 1e-15
        );
        assert!(
            (deviation_d2(&FunctionSpec::Power(2), &iv(0.0, 1.0), plus).unwrap() - 1.0 / 3.0).abs()
                < 1e-15
        );
        let minus = deviation_d2(
            &FunctionSpec::Power(3),
            &iv(0.0, 1.0),
            SignConvention::MinusAsPrinted,
        )
        .unwrap();
        assert!((minus + 2.25).abs() < 1e-15);
    }

    #[test]
    fn d2_matches_identity_for_exp() {
        // mpmath: D2(exp, [0.5, 1.5]) = 0.70824194990948416893835116807627806
        let spec = FunctionSpec::Exp(1.0);
        let i = iv(0.5, 1.5);
        let direct = deviation_d2(&spec, &i, SignConvention::PlusDerived).unwrap();
        let via = d2_identity(&spec, &i).unwrap();
        assert!((direct - 0.708_241_949_909_484_2).abs() < 1e-11);
        assert!((via - 0.708_241_949_909_484_2).abs() < 1e-11);
    }

    #[test]
    fn lemma11_examples() {
        for (a, b) in [(0.0, 1.0), (0.5, 2.0), (1.0, 4.0)] {
            let (l, r) = lemma11_identity(&FunctionSpec::Power(2), &iv(a, b)).unwrap();
            let expect = (b - a) * (b - a) / 6.0;
            assert!((l - expect).abs() < 1e-13 && (r - expect).abs() < 1e-13);
        }
        let (l, r) =
            lemma11_identity(&FunctionSpec::Affine { m: 2.0, k: -1.0 }, &iv(-1.0, 3.0)).unwrap();
        assert!(l.abs() < 1e-14 && r == 0.0);
        let (l, r) = lemma11_identity(&FunctionSpec::Power(3), &iv(0.0, 1.0)).unwrap();
        assert!((l - 0.25).abs() < 1e-15 && (r - 0.25).abs() < 1e-15);
    }

    #[test]
    fn jensen_examples() {
        let u = iv(0.0, 1.0);
        let (l, r) = jensen_check(|x| x * x, |t| t, &u).unwrap();
        assert!((l - 1.0 / 3.0).abs() < 1e-15 && (r - 0.25).abs() < 1e-15);
        let (l, r) = jensen_check(|x| x, |t| t, &u).unwrap();
        assert!((l - 0.5).abs() < 1e-15 && (r - 0.5).abs() < 1e-15);
        let (l, r) = jensen_check(f64::abs, |t| t - 0.5, &u).unwrap();
        assert!((l - 0.25).abs() < 1e-11 && r.abs() < 1e-15);
    }
}
