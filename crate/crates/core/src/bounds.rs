//! Right-hand sides of the eight bounds and their pairing with the matching
//! deviation functional.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use crate::funcspec::TheoremId;
use crate::funcspec::{hypotheses_for, FunctionSpec, HypothesisReport, Interval};
use crate::quad::{deviation_d1, deviation_d2, SignConvention};
use crate::special::symmetric_beta_closed_form;

/// Tolerance on `1/p + 1/q = 1` for conjugate pairs.
pub const CONJUGACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentMode {
    /// `p > 1`, `q >= 1`.
    Independent,
    /// `p, q > 1` with `1/p + 1/q = 1`.
    Conjugate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentPair {
    p: f64,
    q: f64,
    mode: ExponentMode,
}

impl ExponentPair {
    pub fn independent(p: f64, q: f64) -> Result<Self> {
        if !(p.is_finite() && q.is_finite() && p > 1.0 && q >= 1.0) {
            return Err(Error::exponents(format!(
                "independent exponents need p > 1 and q >= 1, got p = {p}, q = {q}"
            )));
        }
        Ok(ExponentPair {
            p,
            q,
            mode: ExponentMode::Independent,
        })
    }

    pub fn conjugate(p: f64, q: f64) -> Result<Self> {
        if !(p.is_finite() && q.is_finite() && p > 1.0 && q > 1.0) {
            return Err(Error::exponents(format!(
                "conjugate exponents need p, q > 1, got p = {p}, q = {q}"
            )));
        }
        if (1.0 / p + 1.0 / q - 1.0).abs() > CONJUGACY_TOL {
            return Err(Error::exponents(format!(
                "1/p + 1/q = {} is not 1 for p = {p}, q = {q}",
                1.0 / p + 1.0 / q
            )));
        }
        Ok(ExponentPair {
            p,
            q,
            mode: ExponentMode::Conjugate,
        })
    }

    /// The conjugate pair `(p, p/(p-1))`.
    pub fn conjugate_of(p: f64) -> Result<Self> {
        Self::conjugate(p, p / (p - 1.0))
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn mode(&self) -> ExponentMode {
        self.mode
    }

    fn require(&self, mode: ExponentMode, what: &str) -> Result<()> {
        if self.mode == mode {
            Ok(())
        } else {
            Err(Error::exponents(format!("{what} needs {mode:?} exponents")))
        }
    }
}

/// Upper bound `M` on `|f'|` for Remark 2.1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeCap(f64);

impl DerivativeCap {
    pub fn new(m: f64) -> Result<Self> {
        if !(m.is_finite() && m >= 0.0) {
            return Err(Error::domain(format!(
                "derivative cap must be finite and >= 0, got {m}"
            )));
        }
        Ok(DerivativeCap(m))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

fn check_q(q: f64) -> Result<()> {
    if q.is_finite() && q >= 1.0 {
        Ok(())
    } else {
        Err(Error::exponents(format!("need q >= 1, got {q}")))
    }
}

fn abs_d(spec: &FunctionSpec, x: f64, order: u32) -> Result<f64> {
    Ok(spec.eval(x, order)?.abs())
}

/// `(|a||f'(a)| + |b||f'(b)|) / 2`.
pub fn thm21_rhs(spec: &FunctionSpec, iv: &Interval) -> Result<f64> {
    let (a, b) = (iv.a(), iv.b());
    Ok(0.5 * (a.abs() * abs_d(spec, a, 1)? + b.abs() * abs_d(spec, b, 1)?))
}

pub fn thm22_rhs(spec: &FunctionSpec, iv: &Interval, pq: &ExponentPair) -> Result<f64> {
    pq.require(ExponentMode::Independent, "thm2.2")?;
    let (a, b, p, q) = (iv.a(), iv.b(), pq.p, pq.q);
    let (da, db) = (abs_d(spec, a, 1)?, abs_d(spec, b, 1)?);
    let (ap, bp) = (a.abs().powf(p), b.abs().powf(p));
    Ok((db + da).powf((p - 1.0) / p)
        * (bp + ap).powf((q - 1.0) / (q * p))
        * (bp * db.powf(q) + ap * da.powf(q)).powf(1.0 / (q * p))
        / 2f64.powf(2.0 - 1.0 / p))
}

pub fn thm23_rhs(spec: &FunctionSpec, iv: &Interval, pq: &ExponentPair) -> Result<f64> {
    pq.require(ExponentMode::Independent, "thm2.3")?;
    let (a, b, p, q) = (iv.a(), iv.b(), pq.p, pq.q);
    if a <= 0.0 {
        return Err(Error::domain(format!("thm2.3 needs a > 0, got a = {a}")));
    }
    let (da, db) = (abs_d(spec, a, 1)?, abs_d(spec, b, 1)?);
    let (ap, bp) = (a.powf(p), b.powf(p));
    let outer = (q - 1.0) / (q * p);
    Ok((db + da).powf((p - 1.0) / p)
        * (b.powf(p + 1.0) - a.powf(p + 1.0)).powf(outer)
        * (bp * db.powf(q) + ap * da.powf(q)).powf(1.0 / (q * p))
        / (2f64.powf(2.0 - 1.0 / p) * (p + 1.0).powf(outer)))
}

/// `M^{(p-1+pq)/p} (b^{p+1} - a^{p+1}) / (2^{1/p} (b-a))`.
pub fn remark21_rhs(iv: &Interval, pq: &ExponentPair, cap: &DerivativeCap) -> Result<f64> {
    pq.require(ExponentMode::Independent, "remark2.1")?;
    let (a, b, p, q) = (iv.a(), iv.b(), pq.p, pq.q);
    if a < 0.0 {
        return Err(Error::domain(format!(
            "remark2.1 needs a >= 0, got a = {a}"
        )));
    }
    Ok(
        cap.0.powf((p - 1.0 + p * q) / p) * (b.powf(p + 1.0) - a.powf(p + 1.0))
            / (2f64.powf(1.0 / p) * iv.width()),
    )
}

/// Endpoint magnitudes `(|2f''(a)|, |2f''(b)|, |a f'''(a)|, |b f'''(b)|)`.
fn second_order_terms(spec: &FunctionSpec, iv: &Interval) -> Result<[f64; 4]> {
    let (a, b) = (iv.a(), iv.b());
    Ok([
        (2.0 * spec.eval(a, 2)?).abs(),
        (2.0 * spec.eval(b, 2)?).abs(),
        spec.x_times_third(a)?.abs(),
        spec.x_times_third(b)?.abs(),
    ])
}

pub fn thm24_rhs(spec: &FunctionSpec, iv: &Interval, q: f64) -> Result<f64> {
    check_q(q)?;
    let [ha, hb, fa, fb] = second_order_terms(spec, iv)?;
    let bracket = |x: f64, y: f64| ((x.powf(q) + y.powf(q)) / 12.0).powf(1.0 / q);
    Ok(0.5
        * iv.width().powi(2)
        * (1.0f64 / 6.0).powf((q - 1.0) / q)
        * (bracket(ha, hb) + bracket(fa, fb)))
}

pub fn thm25_rhs(spec: &FunctionSpec, iv: &Interval, q: f64) -> Result<f64> {
    check_q(q)?;
    let [ha, hb, fa, fb] = second_order_terms(spec, iv)?;
    let bracket = |x: f64, y: f64| (2.0 * x.powf(q) + (q + 1.0) * y.powf(q)).powf(1.0 / q);
    Ok(0.5
        * iv.width().powi(2)
        * 0.5f64.powf(1.0 - 1.0 / q)
        * (1.0 / ((q + 1.0) * (q + 2.0) * (q + 3.0))).powf(1.0 / q)
        * (bracket(ha, hb) + bracket(fa, fb)))
}

pub fn thm26_rhs(spec: &FunctionSpec, iv: &Interval, pq: &ExponentPair) -> Result<f64> {
    pq.require(ExponentMode::Conjugate, "thm2.6")?;
    let (p, q) = (pq.p, pq.q);
    let [ha, hb, fa, fb] = second_order_terms(spec, iv)?;
    let bracket = |x: f64, y: f64| ((x.powf(q) + y.powf(q)) / 2.0).powf(1.0 / q);
    Ok(0.5
        * iv.width().powi(2)
        * symmetric_beta_closed_form(p)?.powf(1.0 / p)
        * (bracket(ha, hb) + bracket(fa, fb)))
}

pub fn thm27_rhs(spec: &FunctionSpec, iv: &Interval, pq: &ExponentPair) -> Result<f64> {
    pq.require(ExponentMode::Conjugate, "thm2.7")?;
    let (p, q) = (pq.p, pq.q);
    let [ha, hb, fa, fb] = second_order_terms(spec, iv)?;
    let bracket = |x: f64, y: f64| {
        ((x.powf(q) + (q + 1.0) * y.powf(q)) / ((q + 1.0) * (q + 2.0))).powf(1.0 / q)
    };
    Ok(0.5
        * iv.width().powi(2)
        * (1.0 / (p + 1.0)).powf(1.0 / p)
        * (bracket(ha, hb) + bracket(fa, fb)))
}

/// Theorem-specific parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundParams {
    None,
    Q {
        q: f64,
    },
    Pair {
        pq: ExponentPair,
    },
    Capped {
        pq: ExponentPair,
        cap: DerivativeCap,
    },
}

impl BoundParams {
    /// Parameters of `theorem` from optional `p`, `q` and cap `m`. The
    /// conjugate theorems 2.6 and 2.7 derive a missing exponent from the other.
    pub fn for_theorem(
        theorem: TheoremId,
        p: Option<f64>,
        q: Option<f64>,
        m: Option<f64>,
    ) -> Result<Self> {
        let missing = |what: &str| Error::MissingExponents(format!("{theorem} ({what})"));
        let unexpected =
            |what: &str| Error::ParameterMismatch(format!("{theorem} does not take {what}"));
        if theorem != TheoremId::Remark21 && m.is_some() {
            return Err(unexpected("M"));
        }
        let independent = || {
            ExponentPair::independent(
                p.ok_or_else(|| missing("p"))?,
                q.ok_or_else(|| missing("q"))?,
            )
        };
        Ok(match theorem {
            TheoremId::Thm21 => {
                if p.is_some() || q.is_some() {
                    return Err(unexpected("p or q"));
                }
                BoundParams::None
            }
            TheoremId::Thm22 | TheoremId::Thm23 => BoundParams::Pair { pq: independent()? },
            TheoremId::Remark21 => BoundParams::Capped {
                pq: independent()?,
                cap: DerivativeCap::new(m.ok_or_else(|| missing("M"))?)?,
            },
            TheoremId::Thm24 | TheoremId::Thm25 => {
                if p.is_some() {
                    return Err(unexpected("p"));
                }
                let q = q.ok_or_else(|| missing("q"))?;
                if !(q.is_finite() && q >= 1.0) {
                    return Err(Error::exponents(format!("need q >= 1, got {q}")));
                }
                BoundParams::Q { q }
            }
            TheoremId::Thm26 | TheoremId::Thm27 => BoundParams::Pair {
                pq: match (p, q) {
                    (Some(p), Some(q)) => ExponentPair::conjugate(p, q)?,
                    (Some(p), None) => ExponentPair::conjugate_of(p)?,
                    (None, Some(q)) => ExponentPair::conjugate(q / (q - 1.0), q)?,
                    (None, None) => return Err(missing("p or q")),
                },
            },
        })
    }

    pub fn p(&self) -> Option<f64> {
        match self {
            BoundParams::Pair { pq } | BoundParams::Capped { pq, .. } => Some(pq.p),
            _ => None,
        }
    }

    pub fn q(&self) -> Option<f64> {
        match self {
            BoundParams::None => None,
            BoundParams::Q { q } => Some(*q),
            BoundParams::Pair { pq } | BoundParams::Capped { pq, .. } => Some(pq.q),
        }
    }

    pub fn cap(&self) -> Option<f64> {
        match self {
            BoundParams::Capped { cap, .. } => Some(cap.0),
            _ => None,
        }
    }
}

fn mismatch(theorem: TheoremId, params: &BoundParams) -> Error {
    Error::ParameterMismatch(format!("{theorem} does not take {params:?}"))
}

/// Hypothesis report for `theorem` with its parameters; Remark 2.1 also
/// checks `|f'| <= M` on the grid.
pub fn bound_hypotheses(
    theorem: TheoremId,
    spec: &FunctionSpec,
    iv: &Interval,
    params: &BoundParams,
) -> Result<HypothesisReport> {
    validate_params(theorem, params)?;
    let mut report = hypotheses_for(theorem, spec, iv, params.q())?;
    if let BoundParams::Capped { cap, .. } = params {
        let sup = sup_abs_first_derivative(spec, iv)?;
        report.push("|f'| <= M", sup <= cap.0);
    }
    Ok(report)
}

/// `max |f'|` over the default hypothesis grid.
pub fn sup_abs_first_derivative(spec: &FunctionSpec, iv: &Interval) -> Result<f64> {
    iv.grid(crate::funcspec::DEFAULT_GRID_POINTS)
        .try_fold(0.0f64, |m, x| Ok(m.max(spec.eval(x, 1)?.abs())))
}

fn validate_params(theorem: TheoremId, params: &BoundParams) -> Result<()> {
    use ExponentMode::*;
    let ok = match (theorem, params) {
        (TheoremId::Thm21, BoundParams::None) => true,
        (TheoremId::Thm22 | TheoremId::Thm23, BoundParams::Pair { pq }) => pq.mode == Independent,
        (TheoremId::Remark21, BoundParams::Capped { pq, .. }) => pq.mode == Independent,
        (TheoremId::Thm24 | TheoremId::Thm25, BoundParams::Q { .. }) => true,
        (TheoremId::Thm26 | TheoremId::Thm27, BoundParams::Pair { pq }) => pq.mode == Conjugate,
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(mismatch(theorem, params))
    }
}

/// `(|LHS|, RHS)` of `theorem`. The LHS is `|D1|` for Theorems 2.1–2.3 and
/// Remark 2.1 and `|D2|` under `sign` for Theorems 2.4–2.7.
pub fn bound_sides(
    theorem: TheoremId,
    spec: &FunctionSpec,
    iv: &Interval,
    params: &BoundParams,
    sign: SignConvention,
) -> Result<(f64, f64)> {
    validate_params(theorem, params)?;
    let rhs = match (theorem, params) {
        (TheoremId::Thm21, _) => thm21_rhs(spec, iv)?,
        (TheoremId::Thm22, BoundParams::Pair { pq }) => thm22_rhs(spec, iv, pq)?,
        (TheoremId::Thm23, BoundParams::Pair { pq }) => thm23_rhs(spec, iv, pq)?,
        (TheoremId::Remark21, BoundParams::Capped { pq, cap }) => remark21_rhs(iv, pq, cap)?,
        (TheoremId::Thm24, BoundParams::Q { q }) => thm24_rhs(spec, iv, *q)?,
        (TheoremId::Thm25, BoundParams::Q { q }) => thm25_rhs(spec, iv, *q)?,
        (TheoremId::Thm26, BoundParams::Pair { pq }) => thm26_rhs(spec, iv, pq)?,
        (TheoremId::Thm27, BoundParams::Pair { pq }) => thm27_rhs(spec, iv, pq)?,
        _ => return Err(mismatch(theorem, params)),
    };
    let lhs = if theorem.is_second_order() {
        deviation_d2(spec, iv, sign)?
    } else {
        deviation_d1(spec, iv)?
    };
    Ok((lhs.abs(), rhs))
}

/// One evaluated inequality instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub theorem: TheoremId,
    pub function: FunctionSpec,
    pub a: f64,
    pub b: f64,
    pub p: Option<f64>,
    pub q: Option<f64>,
    #[serde(rename = "M")]
    pub m: Option<f64>,
    pub lhs_abs: f64,
    pub rhs: f64,
    /// `rhs - lhs_abs`.
    pub margin: f64,
    pub hypotheses: HypothesisReport,
    /// Present for Theorems 2.4–2.7 only.
    pub sign_convention: Option<SignConvention>,
}

impl BoundReport {
    pub fn holds(&self, slack: f64) -> bool {
        self.margin >= -slack
    }
}

/// Evaluates `theorem` on one instance and attaches the hypothesis report.
pub fn evaluate_bound(
    theorem: TheoremId,
    spec: &FunctionSpec,
    iv: &Interval,
    params: &BoundParams,
    sign: SignConvention,
) -> Result<BoundReport> {
    let hypotheses = bound_hypotheses(theorem, spec, iv, params)?;
    evaluate_with_hypotheses(theorem, spec, iv, params, sign, hypotheses)
}

pub(crate) fn evaluate_with_hypotheses(
    theorem: TheoremId,
    spec: &FunctionSpec,
    iv: &Interval,
    params: &BoundParams,
    sign: SignConvention,
    hypotheses: HypothesisReport,
) -> Result<BoundReport> {
    let (lhs_abs, rhs) = bound_sides(theorem, spec, iv, params, sign)?;
    Ok(BoundReport {
        theorem,
        function: spec.clone(),
        a: iv.a(),
        b: iv.b(),
        p: params.p(),
        q: params.q(),
        m: params.cap(),
        lhs_abs,
        rhs,
        margin: rhs - lhs_abs,
        hypotheses,
        sign_convention: theorem.is_second_order().then_some(sign),
    })
}
