//! Test functions with closed-form derivatives, intervals, and grid-based
//! checks of the convexity / monotonicity hypotheses.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default number of grid points for hypothesis checks.
pub const DEFAULT_GRID_POINTS: usize = 201;

/// Relative slack of the grid checks.
pub const GRID_EPS: f64 = 1e-9;

/// A thrice-differentiable test function with exact derivative rules.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSpec {
    /// `x^n`, `n >= 1`.
    Power(u32),
    /// `exp(c x)`, `c > 0`.
    Exp(f64),
    /// `c0 + c1 x + c2 x^2 + ...` with all `ci >= 0`.
    PolyNonneg(Vec<f64>),
    /// `m x + k`.
    Affine { m: f64, k: f64 },
    /// `k`.
    Constant(f64),
}

impl FunctionSpec {
    pub fn power(n: u32) -> Result<Self> {
        let spec = FunctionSpec::Power(n);
        spec.validate()?;
        Ok(spec)
    }

    pub fn exp(c: f64) -> Result<Self> {
        let spec = FunctionSpec::Exp(c);
        spec.validate()?;
        Ok(spec)
    }

    pub fn poly(coeffs: Vec<f64>) -> Result<Self> {
        let spec = FunctionSpec::PolyNonneg(coeffs);
        spec.validate()?;
        Ok(spec)
    }

    /// Checks the family parameter constraints.
    pub fn validate(&self) -> Result<()> {
        match self {
            FunctionSpec::Power(n) if *n < 1 => Err(Error::domain("pow requires n >= 1")),
            FunctionSpec::Exp(c) if !(c.is_finite() && *c > 0.0) => {
                Err(Error::domain(format!("exp requires finite c > 0, got {c}")))
            }
            FunctionSpec::PolyNonneg(cs) if cs.is_empty() => {
                Err(Error::domain("poly requires at least one coefficient"))
            }
            FunctionSpec::PolyNonneg(cs) if cs.iter().any(|c| !(c.is_finite() && *c >= 0.0)) => {
                Err(Error::domain("poly coefficients must be finite and >= 0"))
            }
            FunctionSpec::Affine { m, k } if !(m.is_finite() && k.is_finite()) => {
                Err(Error::domain("affine parameters must be finite"))
            }
            FunctionSpec::Constant(k) if !k.is_finite() => {
                Err(Error::domain("constant must be finite"))
            }
            _ => Ok(()),
        }
    }

    /// Short family tag used in reports (`pow`, `exp`, ...).
    pub fn family(&self) -> &'static str {
        match self {
            FunctionSpec::Power(_) => "pow",
            FunctionSpec::Exp(_) => "exp",
            FunctionSpec::PolyNonneg(_) => "poly",
            FunctionSpec::Affine { .. } => "affine",
            FunctionSpec::Constant(_) => "const",
        }
    }

    /// Family parameters as they appear after the `:` of the canonical form.
    pub fn params(&self) -> String {
        match self {
            FunctionSpec::Power(n) => n.to_string(),
            FunctionSpec::Exp(c) => c.to_string(),
            FunctionSpec::PolyNonneg(cs) => cs
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(","),
            FunctionSpec::Affine { m, k } => format!("{m},{k}"),
            FunctionSpec::Constant(k) => k.to_string(),
        }
    }

    /// Value of the derivative of the given order (0 = the function itself).
    pub fn eval(&self, x: f64, order: u32) -> Result<f64> {
        if order > 3 {
            return Err(Error::UnsupportedOrder(order));
        }
        if !x.is_finite() {
            return Err(Error::domain(format!("x = {x} is not finite")));
        }
        let v = match self {
            FunctionSpec::Power(n) => {
                let n = *n;
                if order > n {
                    0.0
                } else {
                    falling_factorial(n, order) * x.powi((n - order) as i32)
                }
            }
            FunctionSpec::Exp(c) => c.powi(order as i32) * (c * x).exp(),
            FunctionSpec::PolyNonneg(cs) => {
                let k = order as usize;
                cs.iter()
                    .enumerate()
                    .skip(k)
                    .rev()
                    .fold(0.0, |acc, (i, c)| {
                        acc * x + c * falling_factorial(i as u32, order)
                    })
            }
            FunctionSpec::Affine { m, k } => match order {
                0 => m * x + k,
                1 => *m,
                _ => 0.0,
            },
            FunctionSpec::Constant(k) => {
                if order == 0 {
                    *k
                } else {
                    0.0
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteValue { x })
        }
    }

    /// `F(x) = x f'''(x)`, the weighted third derivative in the `D2` identity.
    pub fn x_times_third(&self, x: f64) -> Result<f64> {
        Ok(x * self.eval(x, 3)?)
    }
}

/// `n (n-1) ... (n-k+1)`.
fn falling_factorial(n: u32, k: u32) -> f64 {
    (0..k).map(|i| f64::from(n - i)).product()
}

/// Exact derivative of `spec` at `x`.
pub fn eval_deriv(spec: &FunctionSpec, x: f64, order: u32) -> Result<f64> {
    spec.eval(x, order)
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.family(), self.params())
    }
}

fn parse_real(input: &str, field: &str) -> Result<f64> {
    let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
        input: input.to_string(),
        reason: format!("{field:?} is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            input: input.to_string(),
            reason: format!("{field:?} is not finite"),
        });
    }
    Ok(v)
}

impl FromStr for FunctionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse_err = |reason: &str| Error::Parse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let lower = s.trim().to_ascii_lowercase();
        let (tag, rest) = lower
            .split_once(':')
            .ok_or_else(|| parse_err("expected <family>:<params>"))?;
        let fields: Vec<&str> = rest.split(',').collect();
        let expect = |n: usize| {
            if fields.len() == n {
                Ok(())
            } else {
                Err(parse_err(&format!(
                    "{tag} takes {n} parameter(s), got {}",
                    fields.len()
                )))
            }
        };
        let spec = match tag {
            "pow" => {
                expect(1)?;
                let n: u32 = fields[0]
                    .trim()
                    .parse()
                    .map_err(|_| parse_err("pow exponent must be a positive integer"))?;
                FunctionSpec::Power(n)
            }
            "exp" => {
                expect(1)?;
                FunctionSpec::Exp(parse_real(s, fields[0])?)
            }
            "poly" => FunctionSpec::PolyNonneg(
                fields
                    .iter()
                    .map(|f| parse_real(s, f))
                    .collect::<Result<Vec<_>>>()?,
            ),
            "affine" => {
                expect(2)?;
                FunctionSpec::Affine {
                    m: parse_real(s, fields[0])?,
                    k: parse_real(s, fields[1])?,
                }
            }
            "const" => {
                expect(1)?;
                FunctionSpec::Constant(parse_real(s, fields[0])?)
            }
            other => return Err(parse_err(&format!("unknown family {other:?}"))),
        };
        spec.validate().map_err(|e| parse_err(&e.to_string()))?;
        Ok(spec)
    }
}

impl Serialize for FunctionSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FunctionSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Sign requirement on the left endpoint of an [`Interval`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Positivity {
    #[default]
    Any,
    NonnegA,
    StrictlyPositive,
}

/// A closed interval `[a, b]` with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    a: f64,
    b: f64,
    positivity: Positivity,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        Self::with_positivity(a, b, Positivity::Any)
    }

    pub fn with_positivity(a: f64, b: f64, positivity: Positivity) -> Result<Self> {
        let invalid = |reason: &str| Error::InvalidInterval {
            a,
            b,
            reason: reason.to_string(),
        };
        if !(a.is_finite() && b.is_finite()) {
            return Err(invalid("endpoints must be finite"));
        }
        if a == b {
            return Err(Error::DegenerateInterval(a));
        }
        if a > b {
            return Err(invalid("need a < b"));
        }
        match positivity {
            Positivity::NonnegA if a < 0.0 => return Err(invalid("need a >= 0")),
            Positivity::StrictlyPositive if a <= 0.0 => return Err(invalid("need a > 0")),
            _ => {}
        }
        Ok(Interval { a, b, positivity })
    }

    /// The unit interval `[0, 1]`, the parameter range of `t ↦ ta + (1-t)b`.
    pub fn unit() -> Self {
        Interval {
            a: 0.0,
            b: 1.0,
            positivity: Positivity::NonnegA,
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn positivity(&self) -> Positivity {
        self.positivity
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    /// `t a + (1 - t) b`.
    pub fn lerp(&self, t: f64) -> f64 {
        t * self.a + (1.0 - t) * self.b
    }

    /// Uniform grid of `points` nodes including both endpoints.
    pub fn grid(&self, points: usize) -> impl Iterator<Item = f64> + '_ {
        let last = points.saturating_sub(1).max(1) as f64;
        (0..points).map(move |i| {
            if i + 1 == points {
                self.b
            } else {
                self.a + self.width() * (i as f64 / last)
            }
        })
    }
}

fn sample_grid<G: Fn(f64) -> f64>(g: G, iv: &Interval, points: usize) -> Result<(Vec<f64>, f64)> {
    let values = iv
        .grid(points)
        .map(|x| {
            let v = g(x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFiniteValue { x })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let scale = values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    Ok((values, scale))
}

/// True iff every centered second difference on the grid is
/// `>= -GRID_EPS * max(1, max |g|)`.
pub fn check_convex_on_grid<G: Fn(f64) -> f64>(g: G, iv: &Interval, points: usize) -> Result<bool> {
    if points < 3 {
        return Err(Error::InvalidGrid { points, min: 3 });
    }
    let (v, scale) = sample_grid(g, iv, points)?;
    let tol = GRID_EPS * scale;
    Ok(v.windows(3).all(|w| w[0] - 2.0 * w[1] + w[2] >= -tol))
}

/// True iff `g` is nondecreasing on the grid up to `GRID_EPS * max(1, max |g|)`.
pub fn check_increasing_on_grid<G: Fn(f64) -> f64>(
    g: G,
    iv: &Interval,
    points: usize,
) -> Result<bool> {
    if points < 2 {
        return Err(Error::InvalidGrid { points, min: 2 });
    }
    let (v, scale) = sample_grid(g, iv, points)?;
    let tol = GRID_EPS * scale;
    Ok(v.windows(2).all(|w| w[1] >= w[0] - tol))
}

/// The bounds this crate evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TheoremId {
    #[serde(rename = "thm2.1")]
    Thm21,
    #[serde(rename = "thm2.2")]
    Thm22,
    #[serde(rename = "thm2.3")]
    Thm23,
    #[serde(rename = "remark2.1")]
    Remark21,
    #[serde(rename = "thm2.4")]
    Thm24,
    #[serde(rename = "thm2.5")]
    Thm25,
    #[serde(rename = "thm2.6")]
    Thm26,
    #[serde(rename = "thm2.7")]
    Thm27,
}

impl TheoremId {
    pub const ALL: [TheoremId; 8] = [
        TheoremId::Thm21,
        TheoremId::Thm22,
        TheoremId::Thm23,
        TheoremId::Remark21,
        TheoremId::Thm24,
        TheoremId::Thm25,
        TheoremId::Thm26,
        TheoremId::Thm27,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TheoremId::Thm21 => "thm2.1",
            TheoremId::Thm22 => "thm2.2",
            TheoremId::Thm23 => "thm2.3",
            TheoremId::Remark21 => "remark2.1",
            TheoremId::Thm24 => "thm2.4",
            TheoremId::Thm25 => "thm2.5",
            TheoremId::Thm26 => "thm2.6",
            TheoremId::Thm27 => "thm2.7",
        }
    }

    /// Bounds on `D2` (the second-order deviation) rather than `D1`.
    pub fn is_second_order(self) -> bool {
        matches!(
            self,
            TheoremId::Thm24 | TheoremId::Thm25 | TheoremId::Thm26 | TheoremId::Thm27
        )
    }

    pub fn needs_q(self) -> bool {
        !matches!(self, TheoremId::Thm21)
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        TheoremId::ALL
            .into_iter()
            .find(|t| t.name() == lower)
            .ok_or_else(|| Error::ParameterMismatch(format!("unknown theorem {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub passed: bool,
}

/// Named hypothesis checks for one theorem instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub theorem: TheoremId,
    pub checks: Vec<HypothesisCheck>,
    /// Recorded for Theorems 2.1 and 2.2, whose proofs need `|t|` increasing.
    pub a_nonneg: Option<bool>,
    pub overall: bool,
}

impl HypothesisReport {
    fn new(theorem: TheoremId, checks: Vec<HypothesisCheck>, a_nonneg: Option<bool>) -> Self {
        let overall = checks.iter().all(|c| c.passed);
        HypothesisReport {
            theorem,
            checks,
            a_nonneg,
            overall,
        }
    }

    /// Overall flag ignoring the named check (used by the negative-`a` override).
    pub fn overall_excluding(&self, name: &str) -> bool {
        self.checks
            .iter()
            .filter(|c| c.name != name)
            .all(|c| c.passed)
    }

    pub fn push(&mut self, name: &str, passed: bool) {
        self.checks.push(HypothesisCheck {
            name: name.to_string(),
            passed,
        });
        self.overall = self.overall && passed;
    }
}

/// Name of the `a >= 0` check attached to Theorems 2.1, 2.2 and Remark 2.1.
pub const CHECK_A_NONNEG: &str = "a >= 0";

fn abs_pow(spec: &FunctionSpec, order: u32, q: f64) -> impl Fn(f64) -> f64 + '_ {
    move |x| match spec.eval(x, order) {
        Ok(v) => v.abs().powf(q),
        Err(_) => f64::NAN,
    }
}

fn check(name: &str, passed: bool) -> HypothesisCheck {
    HypothesisCheck {
        name: name.to_string(),
        passed,
    }
}

/// Grid-checks the hypotheses of `theorem` for `spec` on `iv`.
///
/// `q` is required for every theorem except 2.1.
pub fn hypotheses_for(
    theorem: TheoremId,
    spec: &FunctionSpec,
    iv: &Interval,
    q: Option<f64>,
) -> Result<HypothesisReport> {
    hypotheses_on_grid(theorem, spec, iv, q, DEFAULT_GRID_POINTS)
}

pub fn hypotheses_on_grid(
    theorem: TheoremId,
    spec: &FunctionSpec,
    iv: &Interval,
    q: Option<f64>,
    points: usize,
) -> Result<HypothesisReport> {
    let q = match (theorem.needs_q(), q) {
        (false, _) => 1.0,
        (true, Some(q)) => q,
        (true, None) => return Err(Error::MissingExponents(theorem.to_string())),
    };
    let a_nonneg = iv.a() >= 0.0;
    let first_order = |label_c: &str, label_i: &str| -> Result<Vec<HypothesisCheck>> {
        let g = abs_pow(spec, 1, q);
        Ok(vec![
            check(label_c, check_convex_on_grid(&g, iv, points)?),
            check(label_i, check_increasing_on_grid(&g, iv, points)?),
        ])
    };
    let report = match theorem {
        TheoremId::Thm21 => {
            let mut checks = first_order("|f'| convex", "|f'| increasing")?;
            checks.push(check(CHECK_A_NONNEG, a_nonneg));
            HypothesisReport::new(theorem, checks, Some(a_nonneg))
        }
        TheoremId::Thm22 => {
            let mut checks = first_order("|f'|^q convex", "|f'|^q increasing")?;
            checks.push(check(CHECK_A_NONNEG, a_nonneg));
            HypothesisReport::new(theorem, checks, Some(a_nonneg))
        }
        TheoremId::Thm23 => {
            let mut checks = first_order("|f'|^q convex", "|f'|^q increasing")?;
            checks.push(check("a > 0", iv.a() > 0.0));
            HypothesisReport::new(theorem, checks, None)
        }
        TheoremId::Remark21 => {
            let mut checks = first_order("|f'|^q convex", "|f'|^q increasing")?;
            checks.push(check(CHECK_A_NONNEG, a_nonneg));
            HypothesisReport::new(theorem, checks, Some(a_nonneg))
        }
        TheoremId::Thm24 | TheoremId::Thm25 | TheoremId::Thm26 | TheoremId::Thm27 => {
            let second = abs_pow(spec, 2, q);
            let third = abs_pow(spec, 3, q);
            let checks = vec![
                check("|f''|^q convex", check_convex_on_grid(&second, iv, points)?),
                check("|f'''|^q convex", check_convex_on_grid(&third, iv, points)?),
                check(
                    "|f'''|^q increasing",
                    check_increasing_on_grid(&third, iv, points)?,
                ),
            ];
            HypothesisReport::new(theorem, checks, None)
        }
    };
    Ok(report)
}
