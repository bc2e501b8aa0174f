//! Seeded trial generation, suite execution and aggregation.
//!
//! Trial `i` of suite `s` draws from a ChaCha8 stream whose 256-bit key is
//! the master seed (8 bytes, little endian) followed by the suite name
//! (zero padded), with the stream number set to `i`. Floats are taken as
//! `(next_u64 >> 11) * 2^-53`, integers as `lo + next_u64 % (hi - lo + 1)`.
//! Records are therefore the same whether trials run serially or in
//! parallel and on every platform.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bounds::{
    bound_hypotheses, evaluate_with_hypotheses, sup_abs_first_derivative, BoundParams,
    DerivativeCap, ExponentPair,
};
use crate::error::{Error, Result};
use crate::funcspec::{
    check_convex_on_grid, FunctionSpec, HypothesisReport, Interval, TheoremId, CHECK_A_NONNEG,
    DEFAULT_GRID_POINTS,
};
use crate::hiprec;
use crate::means::{self, MeanOrder, PROP_SLACK};
use crate::quad::{jensen_check, lemma11_identity, SignConvention};

/// Asserted theorem trials pass when `margin >= -ASSERT_SLACK`.
pub const ASSERT_SLACK: f64 = 1e-9;
/// Lemma 1.1 trials pass when `|lhs - rhs| <= IDENTITY_TOL`.
pub const IDENTITY_TOL: f64 = 1e-9;
/// Jensen trials pass when `lhs - rhs >= -JENSEN_SLACK`.
pub const JENSEN_SLACK: f64 = 1e-10;
/// Asserted suites with fewer passing trials are inconclusive.
pub const MIN_ASSERTED: usize = 50;
/// Minimum interval width; narrower draws are resampled.
pub const MIN_WIDTH: f64 = 1e-3;
pub const DEFAULT_SHRINK_STEPS: u32 = 20;
const MAX_RESAMPLES: u32 = 10_000;

/// A property suite: one bound, one proposition, or one of the two lemma
/// checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SuiteId {
    Theorem(TheoremId),
    Prop31,
    Prop32,
    Prop33,
    Prop34,
    Lemma11,
    Jensen,
}

impl SuiteId {
    /// Every suite in report order.
    pub fn all() -> Vec<SuiteId> {
        let mut v: Vec<SuiteId> = TheoremId::ALL
            .iter()
            .map(|&t| SuiteId::Theorem(t))
            .collect();
        v.extend([
            SuiteId::Prop31,
            SuiteId::Prop32,
            SuiteId::Prop33,
            SuiteId::Prop34,
            SuiteId::Lemma11,
            SuiteId::Jensen,
        ]);
        v
    }

    pub fn name(self) -> &'static str {
        match self {
            SuiteId::Theorem(t) => t.name(),
            SuiteId::Prop31 => "prop3.1",
            SuiteId::Prop32 => "prop3.2",
            SuiteId::Prop33 => "prop3.3",
            SuiteId::Prop34 => "prop3.4",
            SuiteId::Lemma11 => "lemma1.1",
            SuiteId::Jensen => "jensen",
        }
    }

    /// Asserted suites fail the run on a violation; the others only report.
    pub fn asserted(self) -> bool {
        !matches!(
            self,
            SuiteId::Theorem(TheoremId::Remark21)
                | SuiteId::Prop32
                | SuiteId::Prop33
                | SuiteId::Prop34
        )
    }

    fn is_prop(self) -> bool {
        matches!(
            self,
            SuiteId::Prop31 | SuiteId::Prop32 | SuiteId::Prop33 | SuiteId::Prop34
        )
    }

    /// `(lo, hi, a must be > 0)` of the default sampling box.
    fn default_box(self) -> (f64, f64, bool) {
        match self {
            SuiteId::Theorem(TheoremId::Thm23) => (0.0, 5.0, true),
            SuiteId::Theorem(_) => (0.0, 5.0, false),
            SuiteId::Prop31 => (-3.0, 3.0, false),
            SuiteId::Prop32 | SuiteId::Prop33 | SuiteId::Prop34 => (0.0, 5.0, true),
            SuiteId::Lemma11 => (0.0, 3.0, false),
            SuiteId::Jensen => (0.0, 1.0, false),
        }
    }

    /// Suites whose hypotheses need `a >= 0` unless the override is set.
    fn needs_nonneg_a(self) -> bool {
        matches!(
            self,
            SuiteId::Theorem(TheoremId::Thm21 | TheoremId::Thm22 | TheoremId::Remark21)
        )
    }

    fn threshold(self) -> f64 {
        match self {
            SuiteId::Prop31 | SuiteId::Prop32 | SuiteId::Prop33 | SuiteId::Prop34 => PROP_SLACK,
            SuiteId::Lemma11 => IDENTITY_TOL,
            SuiteId::Jensen => JENSEN_SLACK,
            SuiteId::Theorem(_) => ASSERT_SLACK,
        }
    }
}

impl fmt::Display for SuiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SuiteId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        SuiteId::all()
            .into_iter()
            .find(|id| id.name() == lower)
            .ok_or_else(|| Error::config(format!("unknown suite {s:?}")))
    }
}

impl Serialize for SuiteId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for SuiteId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses `all` or a comma-separated list of suite names.
pub fn parse_suites(s: &str) -> Result<Vec<SuiteId>> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(SuiteId::all());
    }
    s.split(',').map(str::parse).collect()
}

/// Relative weights of the generated function families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilyWeights {
    pub power: f64,
    pub exp: f64,
    pub poly: f64,
}

impl Default for FamilyWeights {
    fn default() -> Self {
        FamilyWeights {
            power: 1.0,
            exp: 1.0,
            poly: 1.0,
        }
    }
}

/// An instance evaluated in addition to the random draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PinnedInstance {
    pub function: FunctionSpec,
    pub a: f64,
    pub b: f64,
}

impl FromStr for PinnedInstance {
    type Err = Error;

    /// `FUNC@A,B`, e.g. `pow:3@0,1`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |reason: &str| Error::Parse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let (func, ends) = s.split_once('@').ok_or_else(|| bad("expected FUNC@A,B"))?;
        let (a, b) = ends
            .split_once(',')
            .ok_or_else(|| bad("expected FUNC@A,B"))?;
        let a: f64 = a.trim().parse().map_err(|_| bad("bad endpoint a"))?;
        let b: f64 = b.trim().parse().map_err(|_| bad("bad endpoint b"))?;
        Interval::new(a, b)?;
        Ok(PinnedInstance {
            function: func.parse()?,
            a,
            b,
        })
    }
}

/// Everything that determines a harness run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrialConfig {
    pub seed: u64,
    pub trials: usize,
    pub suites: Vec<SuiteId>,
    /// Overrides of the per-suite sampling box.
    pub a_min: Option<f64>,
    pub a_max: Option<f64>,
    pub b_max: Option<f64>,
    /// `p` values; Theorems 2.6, 2.7 and Proposition 3.4 pair each with its
    /// conjugate.
    pub p_grid: Vec<f64>,
    pub q_grid: Vec<f64>,
    pub weights: FamilyWeights,
    pub sign: SignConvention,
    /// Lets Theorems 2.1, 2.2 and Remark 2.1 sample `a < 0` and assert there.
    pub allow_negative_a: bool,
    pub pins: Vec<PinnedInstance>,
    pub shrink_steps: u32,
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig {
            seed: 42,
            trials: 1000,
            suites: SuiteId::all(),
            a_min: None,
            a_max: None,
            b_max: None,
            p_grid: vec![1.5, 2.0, 3.0],
            q_grid: vec![1.0, 1.5, 2.0, 3.0],
            weights: FamilyWeights::default(),
            sign: SignConvention::PlusDerived,
            allow_negative_a: false,
            pins: Vec::new(),
            shrink_steps: DEFAULT_SHRINK_STEPS,
        }
    }
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::config("trials must be >= 1"));
        }
        if self.suites.is_empty() {
            return Err(Error::config("no suites selected"));
        }
        if self.p_grid.is_empty() || self.q_grid.is_empty() {
            return Err(Error::config("exponent grids must be non-empty"));
        }
        for &p in &self.p_grid {
            ExponentPair::conjugate_of(p).map_err(|e| Error::config(format!("p grid: {e}")))?;
        }
        for &q in &self.q_grid {
            if !(q.is_finite() && q >= 1.0) {
                return Err(Error::config(format!("q grid: need q >= 1, got {q}")));
            }
        }
        let w = self.weights;
        let ws = [w.power, w.exp, w.poly];
        if ws.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || ws.iter().sum::<f64>() <= 0.0 {
            return Err(Error::config(
                "family weights must be >= 0 with a positive sum",
            ));
        }
        for v in [self.a_min, self.a_max, self.b_max].into_iter().flatten() {
            if !v.is_finite() {
                return Err(Error::config("box bounds must be finite"));
            }
        }
        for &suite in &self.suites {
            self.sampling_box(suite)?;
        }
        for pin in &self.pins {
            pin.function.validate()?;
            Interval::new(pin.a, pin.b)?;
        }
        Ok(())
    }

    /// `(a_lo, a_hi, b_hi, a must be > 0)` for `suite`.
    fn sampling_box(&self, suite: SuiteId) -> Result<(f64, f64, f64, bool)> {
        let (lo, hi, strict) = suite.default_box();
        let mut a_lo = self.a_min.unwrap_or(lo);
        if suite.needs_nonneg_a() && !self.allow_negative_a {
            a_lo = a_lo.max(0.0);
        }
        let b_hi = self.b_max.unwrap_or(hi);
        let a_hi = self.a_max.unwrap_or(b_hi).min(b_hi - MIN_WIDTH);
        if !(a_lo <= a_hi) || (strict && a_hi <= 0.0) {
            return Err(Error::config(format!(
                "empty sampling box for {suite}: a in [{a_lo}, {a_hi}], b <= {b_hi}"
            )));
        }
        Ok((a_lo, a_hi, b_hi, strict))
    }
}

/// The per-trial random stream.
pub struct TrialRng(ChaCha8Rng);

impl TrialRng {
    pub fn new(seed: u64, tag: &str, index: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        let tag = tag.as_bytes();
        let len = tag.len().min(24);
        key[8..8 + len].copy_from_slice(&tag[..len]);
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(index);
        TrialRng(rng)
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + self.uniform() * (hi - lo)
    }

    /// Uniform integer in `lo..=hi`.
    pub fn int_in(&mut self, lo: u32, hi: u32) -> u32 {
        lo + (self.0.next_u64() % u64::from(hi - lo + 1)) as u32
    }

    pub fn pick<T: Copy>(&mut self, items: &[T]) -> T {
        items[self.int_in(0, items.len() as u32 - 1) as usize]
    }
}

/// The inputs of one trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Instance {
    /// The bounded function, `x^n` for the propositions, or the inner
    /// function of a Jensen pair.
    pub function: FunctionSpec,
    /// Outer convex function of a Jensen pair.
    pub phi: Option<FunctionSpec>,
    pub a: f64,
    pub b: f64,
    pub p: Option<f64>,
    pub q: Option<f64>,
}

fn draw_family(rng: &mut TrialRng, w: &FamilyWeights) -> FunctionSpec {
    let total = w.power + w.exp + w.poly;
    let r = rng.uniform() * total;
    if r < w.power {
        FunctionSpec::Power(rng.int_in(3, 8))
    } else if r < w.power + w.exp {
        FunctionSpec::Exp(rng.uniform_in(0.2, 2.0))
    } else {
        let len = rng.int_in(3, 5);
        FunctionSpec::PolyNonneg((0..len).map(|_| rng.uniform_in(0.0, 2.0)).collect())
    }
}

fn draw_interval(rng: &mut TrialRng, config: &TrialConfig, suite: SuiteId) -> Result<(f64, f64)> {
    let (a_lo, a_hi, b_hi, strict) = config.sampling_box(suite)?;
    for _ in 0..MAX_RESAMPLES {
        let x = rng.uniform_in(a_lo, b_hi);
        let y = rng.uniform_in(a_lo, b_hi);
        let (a, b) = if x <= y { (x, y) } else { (y, x) };
        if a <= a_hi && b - a >= MIN_WIDTH && !(strict && a <= 0.0) {
            return Ok((a, b));
        }
    }
    Err(Error::config(format!(
        "could not sample an interval for {suite}"
    )))
}

/// `(p, q)` drawn for `suite`; conjugate suites pair `p` with `p/(p-1)`.
fn draw_exponents(
    rng: &mut TrialRng,
    config: &TrialConfig,
    suite: SuiteId,
) -> (Option<f64>, Option<f64>) {
    match suite {
        SuiteId::Theorem(TheoremId::Thm21)
        | SuiteId::Prop31
        | SuiteId::Lemma11
        | SuiteId::Jensen => (None, None),
        SuiteId::Theorem(TheoremId::Thm24 | TheoremId::Thm25) | SuiteId::Prop33 => {
            (None, Some(rng.pick(&config.q_grid)))
        }
        SuiteId::Theorem(TheoremId::Thm26 | TheoremId::Thm27) | SuiteId::Prop34 => {
            let p = rng.pick(&config.p_grid);
            (Some(p), Some(p / (p - 1.0)))
        }
        SuiteId::Theorem(_) | SuiteId::Prop32 => {
            let p = rng.pick(&config.p_grid);
            (Some(p), Some(rng.pick(&config.q_grid)))
        }
    }
}

/// Draws trial `index` of `suite`.
pub fn generate_instance(config: &TrialConfig, suite: SuiteId, index: u64) -> Result<Instance> {
    let mut rng = TrialRng::new(config.seed, suite.name(), index);
    let (function, phi) = match suite {
        SuiteId::Prop31 => (FunctionSpec::Power(rng.int_in(1, 8)), None),
        SuiteId::Prop32 | SuiteId::Prop33 | SuiteId::Prop34 => {
            (FunctionSpec::Power(rng.int_in(3, 8)), None)
        }
        SuiteId::Jensen => {
            let phi = draw_family(&mut rng, &config.weights);
            (draw_family(&mut rng, &config.weights), Some(phi))
        }
        _ => (draw_family(&mut rng, &config.weights), None),
    };
    let (a, b) = draw_interval(&mut rng, config, suite)?;
    let (p, q) = draw_exponents(&mut rng, config, suite);
    Ok(Instance {
        function,
        phi,
        a,
        b,
        p,
        q,
    })
}

/// Per-trial outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Pass,
    Fail,
    Filtered,
    Error,
}

impl TrialStatus {
    pub fn name(self) -> &'static str {
        match self {
            TrialStatus::Pass => "pass",
            TrialStatus::Fail => "fail",
            TrialStatus::Filtered => "filtered",
            TrialStatus::Error => "error",
        }
    }
}

/// Extra values of the proposition suites.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropDetail {
    pub n: u32,
    /// `(K1, K2)` or `(K3, K4)`.
    pub k: Option<(f64, f64)>,
    /// The `|L_n^n + A(a^n, b^n)|` form.
    pub sum: Option<means::PropOutcome>,
    /// The plain `|L_n^n|` form (`a, b > 0`).
    pub plain: Option<means::PropOutcome>,
}

/// High-precision confirmation attached to a floating-point violation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRecord {
    pub digits: usize,
    pub confirmed: bool,
    pub forms: Vec<(String, hiprec::HpComparison)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub suite: SuiteId,
    pub trial: u64,
    pub pinned: bool,
    pub instance: Instance,
    pub m: Option<f64>,
    /// `|LHS|` for the bounds; the left side otherwise.
    pub lhs: f64,
    pub rhs: f64,
    /// Nonnegative when the inequality holds (`-|lhs - rhs|` for Lemma 1.1).
    pub margin: f64,
    pub hypotheses: Option<HypothesisReport>,
    pub hypotheses_ok: bool,
    pub sign: Option<SignConvention>,
    pub status: TrialStatus,
    pub error: Option<String>,
    pub prop: Option<PropDetail>,
    pub oracle: Option<OracleRecord>,
}

impl TrialRecord {
    fn new(suite: SuiteId, trial: u64, pinned: bool, instance: Instance) -> Self {
        TrialRecord {
            suite,
            trial,
            pinned,
            instance,
            m: None,
            lhs: f64::NAN,
            rhs: f64::NAN,
            margin: f64::NAN,
            hypotheses: None,
            hypotheses_ok: true,
            sign: None,
            status: TrialStatus::Error,
            error: None,
            prop: None,
            oracle: None,
        }
    }

    fn set_sides(&mut self, lhs: f64, rhs: f64, margin: f64) {
        self.lhs = lhs;
        self.rhs = rhs;
        self.margin = margin;
        self.status = if margin >= -self.suite.threshold() {
            TrialStatus::Pass
        } else {
            TrialStatus::Fail
        };
    }

    /// Failed with a finite margin (as opposed to an evaluation error).
    pub fn is_violation(&self) -> bool {
        self.status == TrialStatus::Fail && self.margin.is_finite()
    }
}

fn bound_params(
    theorem: TheoremId,
    spec: &FunctionSpec,
    iv: &Interval,
    inst: &Instance,
) -> Result<BoundParams> {
    let p = || {
        inst.p
            .ok_or_else(|| Error::MissingExponents(theorem.to_string()))
    };
    let q = || {
        inst.q
            .ok_or_else(|| Error::MissingExponents(theorem.to_string()))
    };
    Ok(match theorem {
        TheoremId::Thm21 => BoundParams::None,
        TheoremId::Thm22 | TheoremId::Thm23 => BoundParams::Pair {
            pq: ExponentPair::independent(p()?, q()?)?,
        },
        TheoremId::Remark21 => BoundParams::Capped {
            pq: ExponentPair::independent(p()?, q()?)?,
            cap: DerivativeCap::new(sup_abs_first_derivative(spec, iv)?)?,
        },
        TheoremId::Thm24 | TheoremId::Thm25 => BoundParams::Q { q: q()? },
        TheoremId::Thm26 | TheoremId::Thm27 => BoundParams::Pair {
            pq: ExponentPair::conjugate(p()?, q()?)?,
        },
    })
}

fn evaluate_theorem(
    rec: &mut TrialRecord,
    theorem: TheoremId,
    sign: SignConvention,
    allow_negative_a: bool,
) -> Result<()> {
    let inst = rec.instance.clone();
    let iv = Interval::new(inst.a, inst.b)?;
    let params = bound_params(theorem, &inst.function, &iv, &inst)?;
    rec.m = params.cap();
    if theorem.is_second_order() {
        rec.sign = Some(sign);
    }
    let hyp = bound_hypotheses(theorem, &inst.function, &iv, &params)?;
    let ok = if allow_negative_a {
        hyp.overall_excluding(CHECK_A_NONNEG)
    } else {
        hyp.overall
    };
    rec.hypotheses_ok = ok;
    rec.hypotheses = Some(hyp.clone());
    if !ok {
        rec.status = TrialStatus::Filtered;
        return Ok(());
    }
    let report = evaluate_with_hypotheses(theorem, &inst.function, &iv, &params, sign, hyp)?;
    rec.set_sides(report.lhs_abs, report.rhs, report.margin);
    Ok(())
}

fn order_of(spec: &FunctionSpec) -> Result<MeanOrder> {
    match spec {
        FunctionSpec::Power(n) => MeanOrder::new(*n),
        other => Err(Error::ParameterMismatch(format!(
            "propositions take pow:n, got {other}"
        ))),
    }
}

fn paired_margin(r: &means::PairedPropRecord) -> (f64, f64, f64) {
    match r.plain {
        Some(p) if p.margin() < r.sum.margin() => (p.lhs, p.rhs, p.margin()),
        _ => (r.sum.lhs, r.sum.rhs, r.sum.margin()),
    }
}

fn oracle_from(forms: Vec<(String, hiprec::HpComparison)>) -> OracleRecord {
    OracleRecord {
        digits: hiprec::REPORTED_DIGITS,
        confirmed: forms.iter().any(|(_, c)| c.violated),
        forms,
    }
}

fn evaluate_prop(rec: &mut TrialRecord) -> Result<()> {
    let inst = rec.instance.clone();
    let n = order_of(&inst.function)?;
    let (a, b) = (inst.a, inst.b);
    let missing = || Error::MissingExponents(rec.suite.to_string());
    let mut detail = PropDetail {
        n: n.get(),
        k: None,
        sum: None,
        plain: None,
    };
    match rec.suite {
        SuiteId::Prop31 => {
            let r = means::prop31_check(a, b, n)?;
            rec.set_sides(r.lhs, r.rhs, r.margin());
        }
        SuiteId::Prop32 => {
            let (p, q) = (inst.p.ok_or_else(missing)?, inst.q.ok_or_else(missing)?);
            let r = means::prop32_check(a, b, n, &ExponentPair::independent(p, q)?)?;
            rec.set_sides(r.lhs, r.rhs, r.margin());
            if !r.holds {
                let hp = hiprec::prop32(a, b, n.get(), p, q)?;
                rec.oracle = Some(oracle_from(vec![("plain".into(), hp)]));
            }
        }
        SuiteId::Prop33 | SuiteId::Prop34 => {
            let q = inst.q.ok_or_else(missing)?;
            let (r, hp) = if rec.suite == SuiteId::Prop33 {
                let r = means::prop33_check(a, b, n, q)?;
                (r, (!r.holds()).then(|| hiprec::prop33(a, b, n.get(), q)))
            } else {
                let p = inst.p.ok_or_else(missing)?;
                let r = means::prop34_check(a, b, n, &ExponentPair::conjugate(p, q)?)?;
                (r, (!r.holds()).then(|| hiprec::prop34(a, b, n.get(), p, q)))
            };
            detail.k = Some((r.k_first, r.k_second));
            detail.sum = Some(r.sum);
            detail.plain = r.plain;
            let (l, rh, m) = paired_margin(&r);
            rec.set_sides(l, rh, m);
            if let Some(hp) = hp {
                let hp = hp?;
                let mut forms = vec![("sum".to_string(), hp.sum)];
                if let Some(p) = hp.plain {
                    forms.push(("plain".to_string(), p));
                }
                rec.oracle = Some(oracle_from(forms));
            }
        }
        _ => unreachable!("not a proposition suite"),
    }
    rec.prop = Some(detail);
    Ok(())
}

fn eval_or_nan(spec: &FunctionSpec, x: f64) -> f64 {
    spec.eval(x, 0).unwrap_or(f64::NAN)
}

fn evaluate_jensen(rec: &mut TrialRecord) -> Result<()> {
    let inst = rec.instance.clone();
    let phi = inst
        .phi
        .clone()
        .ok_or_else(|| Error::config("jensen trial without phi"))?;
    let iv = Interval::new(inst.a, inst.b)?;
    let f = &inst.function;
    let (lo, hi) = iv.grid(DEFAULT_GRID_POINTS).try_fold(
        (f64::INFINITY, f64::NEG_INFINITY),
        |(lo, hi), x| {
            let v = f.eval(x, 0)?;
            Ok::<_, Error>((lo.min(v), hi.max(v)))
        },
    )?;
    let range = if hi > lo {
        Interval::new(lo, hi)?
    } else {
        Interval::new(lo, lo + 1.0)?
    };
    let convex = check_convex_on_grid(|x| eval_or_nan(&phi, x), &range, DEFAULT_GRID_POINTS)?;
    rec.hypotheses_ok = convex;
    if !convex {
        rec.status = TrialStatus::Filtered;
        return Ok(());
    }
    let (lhs, rhs) = jensen_check(|y| eval_or_nan(&phi, y), |t| eval_or_nan(f, t), &iv)?;
    rec.set_sides(lhs, rhs, lhs - rhs);
    Ok(())
}

fn evaluate_lemma(rec: &mut TrialRecord) -> Result<()> {
    let iv = Interval::new(rec.instance.a, rec.instance.b)?;
    let (lhs, rhs) = lemma11_identity(&rec.instance.function, &iv)?;
    rec.set_sides(lhs, rhs, -(lhs - rhs).abs());
    Ok(())
}

/// Evaluates one instance of `suite`. Evaluation errors are stored in the
/// record, never returned.
pub fn evaluate_instance(
    suite: SuiteId,
    trial: u64,
    pinned: bool,
    instance: Instance,
    sign: SignConvention,
    allow_negative_a: bool,
) -> TrialRecord {
    let mut rec = TrialRecord::new(suite, trial, pinned, instance);
    let result = match suite {
        SuiteId::Theorem(t) => evaluate_theorem(&mut rec, t, sign, allow_negative_a),
        SuiteId::Lemma11 => evaluate_lemma(&mut rec),
        SuiteId::Jensen => evaluate_jensen(&mut rec),
        _ => evaluate_prop(&mut rec),
    };
    if let Err(e) = result {
        rec.status = TrialStatus::Error;
        rec.error = Some(e.to_string());
        rec.lhs = f64::NAN;
        rec.rhs = f64::NAN;
        rec.margin = f64::NAN;
    }
    rec
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteStatus {
    Pass,
    Fail,
    /// Asserted, no violation, but fewer than [`MIN_ASSERTED`] passing trials.
    Inconclusive,
    /// Report-only suite.
    Reported,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub generated: usize,
    pub passed: usize,
    /// Violations plus evaluation errors.
    pub failed: usize,
    pub filtered: usize,
    pub errors: usize,
    pub filtered_rate: f64,
    pub min_margin: Option<f64>,
    pub worst_trial: Option<u64>,
    /// Floating-point violations the high-precision oracle confirmed
    /// (propositions 3.2–3.4 only).
    pub confirmed_violations: Option<usize>,
    pub status: SuiteStatus,
}

fn summarize(suite: SuiteId, records: &[TrialRecord]) -> Summary {
    let count = |s: TrialStatus| records.iter().filter(|r| r.status == s).count();
    let (passed, filtered, errors) = (
        count(TrialStatus::Pass),
        count(TrialStatus::Filtered),
        count(TrialStatus::Error),
    );
    let failed = count(TrialStatus::Fail) + errors;
    let mut worst: Option<&TrialRecord> = None;
    for r in records {
        if matches!(r.status, TrialStatus::Pass | TrialStatus::Fail)
            && r.margin.is_finite()
            && worst.is_none_or(|w| r.margin < w.margin)
        {
            worst = Some(r);
        }
    }
    let confirmed = (suite.is_prop() && suite != SuiteId::Prop31).then(|| {
        records
            .iter()
            .filter(|r| r.oracle.as_ref().is_some_and(|o| o.confirmed))
            .count()
    });
    let status = if !suite.asserted() {
        SuiteStatus::Reported
    } else if failed > 0 {
        SuiteStatus::Fail
    } else if passed < MIN_ASSERTED {
        SuiteStatus::Inconclusive
    } else {
        SuiteStatus::Pass
    };
    Summary {
        generated: records.len(),
        passed,
        failed,
        filtered,
        errors,
        filtered_rate: filtered as f64 / records.len().max(1) as f64,
        min_margin: worst.map(|w| w.margin),
        worst_trial: worst.map(|w| w.trial),
        confirmed_violations: confirmed,
        status,
    }
}

/// One suite's records and summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialBatch {
    pub suite: SuiteId,
    pub asserted: bool,
    pub records: Vec<TrialRecord>,
    pub summary: Summary,
    #[serde(skip)]
    pub wall_time_ms: u128,
}

/// The first exponent choice of `suite`, used for pinned instances.
fn pinned_exponents(config: &TrialConfig, suite: SuiteId) -> (Option<f64>, Option<f64>) {
    let p = config.p_grid[0];
    let q = config.q_grid[0];
    match suite {
        SuiteId::Theorem(TheoremId::Thm21)
        | SuiteId::Prop31
        | SuiteId::Lemma11
        | SuiteId::Jensen => (None, None),
        SuiteId::Theorem(TheoremId::Thm24 | TheoremId::Thm25) | SuiteId::Prop33 => (None, Some(q)),
        SuiteId::Theorem(TheoremId::Thm26 | TheoremId::Thm27) | SuiteId::Prop34 => {
            (Some(p), Some(p / (p - 1.0)))
        }
        _ => (Some(p), Some(q)),
    }
}

/// The sign-convention witness `x^3` on `[0, 1]`, pinned into the
/// second-order suites when they run with the printed minus sign.
pub fn sign_witness() -> PinnedInstance {
    PinnedInstance {
        function: FunctionSpec::Power(3),
        a: 0.0,
        b: 1.0,
    }
}

fn pins_for(config: &TrialConfig, suite: SuiteId) -> Vec<PinnedInstance> {
    let mut pins = config.pins.clone();
    if config.sign == SignConvention::MinusAsPrinted
        && matches!(suite, SuiteId::Theorem(t) if t.is_second_order())
        && !pins.contains(&sign_witness())
    {
        pins.insert(0, sign_witness());
    }
    if suite == SuiteId::Jensen {
        pins.clear();
    }
    pins
}

/// Runs one suite: random trials `0..trials` followed by pinned instances.
pub fn run_suite(config: &TrialConfig, suite: SuiteId) -> Result<TrialBatch> {
    config.validate()?;
    let start = Instant::now();
    let trials = config.trials as u64;
    let mut records: Vec<TrialRecord> = (0..trials)
        .into_par_iter()
        .map(|i| match generate_instance(config, suite, i) {
            Ok(inst) => {
                evaluate_instance(suite, i, false, inst, config.sign, config.allow_negative_a)
            }
            Err(e) => {
                let mut rec = TrialRecord::new(
                    suite,
                    i,
                    false,
                    Instance {
                        function: FunctionSpec::Constant(0.0),
                        phi: None,
                        a: f64::NAN,
                        b: f64::NAN,
                        p: None,
                        q: None,
                    },
                );
                rec.error = Some(e.to_string());
                rec
            }
        })
        .collect();
    for (k, pin) in pins_for(config, suite).into_iter().enumerate() {
        let (p, q) = pinned_exponents(config, suite);
        let inst = Instance {
            function: pin.function,
            phi: None,
            a: pin.a,
            b: pin.b,
            p,
            q,
        };
        records.push(evaluate_instance(
            suite,
            trials + k as u64,
            true,
            inst,
            config.sign,
            config.allow_negative_a,
        ));
    }
    let summary = summarize(suite, &records);
    Ok(TrialBatch {
        suite,
        asserted: suite.asserted(),
        records,
        summary,
        wall_time_ms: start.elapsed().as_millis(),
    })
}

/// Runs every configured suite in order.
pub fn run_all(config: &TrialConfig) -> Result<Vec<TrialBatch>> {
    config.validate()?;
    config
        .suites
        .iter()
        .map(|&s| run_suite(config, s))
        .collect()
}

/// True iff some asserted suite failed, the condition for exit code 1.
pub fn any_asserted_failure(batches: &[TrialBatch]) -> bool {
    batches
        .iter()
        .any(|b| b.asserted && b.summary.status == SuiteStatus::Fail)
}

/// `(a, b, function)` steps tried by the shrinker, in order.
fn shrink_candidates(inst: &Instance) -> Vec<Instance> {
    let mut out = Vec::new();
    let w = inst.b - inst.a;
    if w / 2.0 >= MIN_WIDTH {
        out.push(Instance {
            b: inst.a + w / 2.0,
            ..inst.clone()
        });
    }
    let toward_one = |c: f64| {
        if (c - 1.0).abs() < 1e-12 {
            None
        } else {
            Some(0.5 * (c + 1.0))
        }
    };
    match &inst.function {
        FunctionSpec::Exp(c) => {
            if let Some(c) = toward_one(*c) {
                out.push(Instance {
                    function: FunctionSpec::Exp(c),
                    ..inst.clone()
                });
            }
        }
        FunctionSpec::PolyNonneg(cs) if cs.iter().any(|&c| toward_one(c).is_some()) => {
            let moved = cs.iter().map(|&c| toward_one(c).unwrap_or(c)).collect();
            out.push(Instance {
                function: FunctionSpec::PolyNonneg(moved),
                ..inst.clone()
            });
        }
        _ => {}
    }
    out
}

/// Greedily shrinks a violated record: halves the interval to
/// `[a, a + (b-a)/2]` and moves coefficients toward 1 while the violation
/// persists, for at most `steps` accepted moves.
pub fn minimize_counterexample(
    record: &TrialRecord,
    steps: u32,
    sign: SignConvention,
    allow_negative_a: bool,
) -> Result<TrialRecord> {
    if !record.is_violation() {
        return Err(Error::NotAViolation(record.margin));
    }
    let mut best = record.clone();
    for _ in 0..steps {
        let next = shrink_candidates(&best.instance)
            .into_iter()
            .find_map(|inst| {
                let r = evaluate_instance(
                    best.suite,
                    best.trial,
                    best.pinned,
                    inst,
                    sign,
                    allow_negative_a,
                );
                r.is_violation().then_some(r)
            });
        match next {
            Some(r) => best = r,
            None => break,
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FindingKind {
    /// An asserted suite failed under the plus sign (or a first-order bound).
    AssertedViolation,
    /// A second-order bound failed under the printed minus sign.
    SignConvention,
    /// A report-only bound (Remark 2.1) failed.
    ReportedViolation,
    /// A proposition failed and the high-precision oracle agrees.
    PropositionViolation,
    Note,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Finding {
    pub kind: FindingKind,
    pub suite: SuiteId,
    pub message: String,
    /// Number of violating trials behind this finding.
    pub count: usize,
    pub record: Option<TrialRecord>,
    /// The record after [`minimize_counterexample`].
    pub minimized: Option<TrialRecord>,
}

fn violation_kind(suite: SuiteId, sign: SignConvention) -> FindingKind {
    match suite {
        SuiteId::Theorem(TheoremId::Remark21) => FindingKind::ReportedViolation,
        SuiteId::Theorem(t) if t.is_second_order() && sign == SignConvention::MinusAsPrinted => {
            FindingKind::SignConvention
        }
        SuiteId::Prop32 | SuiteId::Prop33 | SuiteId::Prop34 => FindingKind::PropositionViolation,
        _ => FindingKind::AssertedViolation,
    }
}

/// Findings of a run: per suite the worst violation (shrunk when possible)
/// and every violated pinned instance. Proposition violations count only
/// when the oracle confirms them.
pub fn findings(config: &TrialConfig, batches: &[TrialBatch]) -> Vec<Finding> {
    let mut out = Vec::new();
    for batch in batches {
        let suite = batch.suite;
        let kind = violation_kind(suite, config.sign);
        let counted: Vec<&TrialRecord> = batch
            .records
            .iter()
            .filter(|r| r.is_violation())
            .filter(|r| {
                kind != FindingKind::PropositionViolation
                    || r.oracle.as_ref().is_some_and(|o| o.confirmed)
            })
            .collect();
        let unconfirmed = batch.records.iter().filter(|r| r.is_violation()).count() - counted.len();
        if let Some(worst) = counted
            .iter()
            .copied()
            .reduce(|w, r| if r.margin < w.margin { r } else { w })
        {
            let minimized = (config.shrink_steps > 0 && !suite.is_prop())
                .then(|| {
                    minimize_counterexample(
                        worst,
                        config.shrink_steps,
                        config.sign,
                        config.allow_negative_a,
                    )
                    .ok()
                })
                .flatten();
            out.push(Finding {
                kind,
                suite,
                message: format!(
                    "{} of {} trials violate {suite}; worst margin {:e} at trial {}",
                    counted.len(),
                    batch.records.len(),
                    worst.margin,
                    worst.trial
                ),
                count: counted.len(),
                record: Some(worst.clone()),
                minimized,
            });
        }
        for pinned in counted.iter().filter(|r| r.pinned) {
            out.push(Finding {
                kind,
                suite,
                message: format!(
                    "pinned {} on [{}, {}]: |lhs| = {} > rhs = {}",
                    pinned.instance.function,
                    pinned.instance.a,
                    pinned.instance.b,
                    pinned.lhs,
                    pinned.rhs
                ),
                count: 1,
                record: Some((*pinned).clone()),
                minimized: None,
            });
        }
        if unconfirmed > 0 {
            out.push(Finding {
                kind: FindingKind::Note,
                suite,
                message: format!(
                    "{unconfirmed} floating-point violations not confirmed by the high-precision oracle"
                ),
                count: unconfirmed,
                record: None,
                minimized: None,
            });
        }
        if matches!(suite, SuiteId::Prop33 | SuiteId::Prop34) {
            out.push(Finding {
                kind: FindingKind::Note,
                suite,
                message: "for f = x^n the minus-sign deviation is D2 = -n(L_n^n + A(a^n, b^n)); \
                          the |L_n^n + A| form inherits the sign discrepancy of Theorems 2.4-2.7"
                    .to_string(),
                count: 0,
                record: None,
                minimized: None,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(suites: Vec<SuiteId>, trials: usize) -> TrialConfig {
        TrialConfig {
            trials,
            suites,
            ..TrialConfig::default()
        }
    }

    #[test]
    fn suite_names_round_trip() {
        for s in SuiteId::all() {
            assert_eq!(s.name().parse::<SuiteId>().unwrap(), s);
        }
        assert_eq!(
            "THM2.4".parse::<SuiteId>().unwrap(),
            SuiteId::Theorem(TheoremId::Thm24)
        );
        assert!("nosuch".parse::<SuiteId>().is_err());
        assert_eq!(parse_suites("all").unwrap().len(), 14);
        assert_eq!(parse_suites("thm2.1,prop3.1").unwrap().len(), 2);
    }

    #[test]
    fn rng_is_keyed_by_seed_suite_and_trial() {
        let mut a = TrialRng::new(42, "thm2.1", 0);
        let mut b = TrialRng::new(42, "thm2.1", 0);
        let xa: Vec<f64> = (0..5).map(|_| a.uniform()).collect();
        let xb: Vec<f64> = (0..5).map(|_| b.uniform()).collect();
        assert_eq!(xa, xb);
        assert!(xa.iter().all(|x| (0.0..1.0).contains(x)));
        let mut c = TrialRng::new(42, "thm2.1", 1);
        let mut d = TrialRng::new(42, "thm2.2", 0);
        assert_ne!(c.uniform(), xa[0]);
        assert_ne!(d.uniform(), xa[0]);
        let mut e = TrialRng::new(42, "x", 3);
        assert!((0..1000).all(|_| (3..=8).contains(&e.int_in(3, 8))));
    }

    #[test]
    fn generated_instances_respect_the_box() {
        let config = TrialConfig::default();
        for suite in SuiteId::all() {
            let (lo, hi, strict) = suite.default_box();
            for i in 0..200 {
                let inst = generate_instance(&config, suite, i).unwrap();
                assert!(inst.b - inst.a >= MIN_WIDTH);
                assert!(inst.a >= lo && inst.b <= hi, "{suite} {inst:?}");
                if strict {
                    assert!(inst.a > 0.0);
                }
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(TrialConfig::default().validate().is_ok());
        assert!(matches!(
            small(vec![], 10).validate(),
            Err(Error::Config(_))
        ));
        assert!(small(vec![SuiteId::Prop31], 0).validate().is_err());
        let c = TrialConfig {
            q_grid: vec![0.5],
            ..TrialConfig::default()
        };
        assert!(c.validate().is_err());
        let c = TrialConfig {
            a_min: Some(4.0),
            b_max: Some(3.0),
            ..TrialConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn accounting_and_determinism() {
        let config = small(vec![SuiteId::Theorem(TheoremId::Thm24)], 120);
        let one = run_suite(&config, config.suites[0]).unwrap();
        let two = run_suite(&config, config.suites[0]).unwrap();
        assert_eq!(one.records, two.records);
        assert_eq!(one.summary, two.summary);
        let s = &one.summary;
        assert_eq!(s.passed + s.failed + s.filtered, s.generated);
        assert_eq!(s.failed, 0);
        let min = one
            .records
            .iter()
            .filter(|r| r.margin.is_finite())
            .map(|r| r.margin)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(s.min_margin, Some(min));
        for r in &one.records {
            if r.status == TrialStatus::Pass {
                assert!(r.hypotheses.as_ref().unwrap().overall);
            }
        }
    }

    #[test]
    fn few_trials_are_inconclusive() {
        let config = small(vec![SuiteId::Prop31], 10);
        let b = run_suite(&config, SuiteId::Prop31).unwrap();
        assert_eq!(b.summary.status, SuiteStatus::Inconclusive);
    }

    #[test]
    fn minus_sign_records_the_witness() {
        let mut config = small(vec![SuiteId::Theorem(TheoremId::Thm24)], 5);
        config.sign = SignConvention::MinusAsPrinted;
        let b = run_suite(&config, config.suites[0]).unwrap();
        let w = b.records.iter().find(|r| r.pinned).unwrap();
        assert_eq!(w.instance.function, FunctionSpec::Power(3));
        assert_eq!(w.instance.q, Some(1.0));
        assert!((w.lhs - 2.25).abs() < 1e-10);
        assert!((w.rhs - 0.75).abs() < 1e-12);
        assert_eq!(w.status, TrialStatus::Fail);
        assert_eq!(b.summary.status, SuiteStatus::Fail);
    }

    #[test]
    fn minimize_examples() {
        let inst = Instance {
            function: FunctionSpec::Power(3),
            phi: None,
            a: 0.0,
            b: 1.0,
            p: None,
            q: Some(1.0),
        };
        let suite = SuiteId::Theorem(TheoremId::Thm24);
        let minus = SignConvention::MinusAsPrinted;
        let rec = evaluate_instance(suite, 0, true, inst.clone(), minus, false);
        assert_eq!(minimize_counterexample(&rec, 0, minus, false).unwrap(), rec);
        let small = minimize_counterexample(&rec, 20, minus, false).unwrap();
        assert!(small.is_violation());
        assert!(small.instance.b - small.instance.a <= 1.0);
        assert!(small.instance.b - small.instance.a < 1e-2);

        let ok = evaluate_instance(suite, 0, true, inst, SignConvention::PlusDerived, false);
        assert!(matches!(
            minimize_counterexample(&ok, 20, SignConvention::PlusDerived, false),
            Err(Error::NotAViolation(_))
        ));
    }

    #[test]
    fn evaluation_errors_stay_in_the_record() {
        let inst = Instance {
            function: FunctionSpec::Exp(1.0),
            phi: None,
            a: 0.0,
            b: 1.0,
            p: None,
            q: Some(1.0),
        };
        let rec = evaluate_instance(
            SuiteId::Prop33,
            3,
            false,
            inst,
            SignConvention::PlusDerived,
            false,
        );
        assert_eq!(rec.status, TrialStatus::Error);
        assert!(rec.error.is_some());
    }

    #[test]
    fn negative_a_override() {
        let inst = Instance {
            function: FunctionSpec::Exp(1.0),
            phi: None,
            a: -2.0,
            b: 1.0,
            p: None,
            q: None,
        };
        let suite = SuiteId::Theorem(TheoremId::Thm21);
        let plus = SignConvention::PlusDerived;
        let rec = evaluate_instance(suite, 0, false, inst.clone(), plus, false);
        assert_eq!(rec.status, TrialStatus::Filtered);
        let rec = evaluate_instance(suite, 0, false, inst, plus, true);
        assert_ne!(rec.status, TrialStatus::Filtered);
    }

    #[test]
    fn pinned_instances_parse() {
        let p: PinnedInstance = "pow:3@0,1".parse().unwrap();
        assert_eq!(p, sign_witness());
        assert!("pow:3@1,0".parse::<PinnedInstance>().is_err());
        assert!("pow:3".parse::<PinnedInstance>().is_err());
    }
}
