//! Arithmetic and generalized logarithmic means, and the special-means
//! proposition checks built on them.

use serde::Serialize;

use crate::bounds::{ExponentMode, ExponentPair};
use crate::error::{Error, Result};
use crate::special::symmetric_beta_closed_form;

/// Absolute slack of the proposition `holds` flags.
pub const PROP_SLACK: f64 = 1e-12;

/// Order `n >= 1` of the generalized logarithmic mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MeanOrder(u32);

impl MeanOrder {
    pub fn new(n: u32) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidOrder { n, min: 1 });
        }
        Ok(MeanOrder(n))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    fn at_least(self, min: u32) -> Result<u32> {
        if self.0 < min {
            Err(Error::InvalidOrder { n: self.0, min })
        } else {
            Ok(self.0)
        }
    }
}

pub fn arithmetic_mean(x: f64, y: f64) -> f64 {
    (x + y) / 2.0
}

fn check_pair(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInterval {
            a,
            b,
            reason: "endpoints must be finite".into(),
        });
    }
    if a == b {
        return Err(Error::DegenerateInterval(a));
    }
    if a > b {
        return Err(Error::InvalidInterval {
            a,
            b,
            reason: "need a < b".into(),
        });
    }
    Ok(())
}

/// `L_n^n(a, b) = (b^{n+1} - a^{n+1}) / ((b - a)(n + 1))`, the mean of `x^n`
/// over `[a, b]`.
///
/// Evaluated as `(Σ_{k=0}^{n} a^k b^{n-k}) / (n + 1)`, which is the same
/// quotient without the cancellation in `b^{n+1} - a^{n+1}`.
pub fn log_mean_pow(a: f64, b: f64, n: MeanOrder) -> Result<f64> {
    check_pair(a, b)?;
    let n = n.get() as i32;
    let sum: f64 = (0..=n).map(|k| a.powi(k) * b.powi(n - k)).sum();
    Ok(sum / f64::from(n + 1))
}

/// `L_n(a, b)` itself, defined only where `L_n^n > 0`.
pub fn log_mean(a: f64, b: f64, n: MeanOrder) -> Result<f64> {
    let radicand = log_mean_pow(a, b, n)?;
    if radicand <= 0.0 {
        return Err(Error::domain(format!(
            "L_n^n({a}, {b}) = {radicand} has no real positive n-th root"
        )));
    }
    Ok(radicand.powf(1.0 / f64::from(n.get())))
}

fn check_q(q: f64) -> Result<()> {
    if q.is_finite() && q >= 1.0 {
        Ok(())
    } else {
        Err(Error::exponents(format!("need q >= 1, got {q}")))
    }
}

fn conjugate(pq: &ExponentPair) -> Result<(f64, f64)> {
    if pq.mode() != ExponentMode::Conjugate {
        return Err(Error::exponents("conjugate exponents required"));
    }
    Ok((pq.p(), pq.q()))
}

/// `|a|^{(n-2)q}` and `|b|^{(n-2)q}`.
fn shifted_powers(a: f64, b: f64, n: u32, q: f64) -> (f64, f64) {
    let e = f64::from(n - 2) * q;
    (a.abs().powf(e), b.abs().powf(e))
}

/// `K1 = (1/3) [A(|a|^{(n-2)q}, |b|^{(n-2)q})]^{1/q}`.
pub fn k1(a: f64, b: f64, n: MeanOrder, q: f64) -> Result<f64> {
    let n = n.at_least(3)?;
    check_q(q)?;
    let (x, y) = shifted_powers(a, b, n, q);
    Ok(arithmetic_mean(x, y).powf(1.0 / q) / 3.0)
}

/// `K2 = [4/((q+1)(q+2)(q+3))]^{1/q} [A(2|a|^{(n-2)q}, (q+1)|b|^{(n-2)q})]^{1/q}`.
pub fn k2(a: f64, b: f64, n: MeanOrder, q: f64) -> Result<f64> {
    let n = n.at_least(3)?;
    check_q(q)?;
    let (x, y) = shifted_powers(a, b, n, q);
    Ok((4.0 / ((q + 1.0) * (q + 2.0) * (q + 3.0))).powf(1.0 / q)
        * arithmetic_mean(2.0 * x, (q + 1.0) * y).powf(1.0 / q))
}

/// `K3 = B(p+1,p+1)^{1/p} [A(|a|^{(n-2)q}, |b|^{(n-2)q})]^{1/q}`, with the
/// Beta factor in its Gamma form.
pub fn k3(a: f64, b: f64, n: MeanOrder, pq: &ExponentPair) -> Result<f64> {
    let n = n.at_least(3)?;
    let (p, q) = conjugate(pq)?;
    let (x, y) = shifted_powers(a, b, n, q);
    Ok(symmetric_beta_closed_form(p)?.powf(1.0 / p) * arithmetic_mean(x, y).powf(1.0 / q))
}

/// `K4 = (1/(p+1))^{1/p} [2/((q+1)(q+2))]^{1/q} [A(|a|^{(n-2)q}, (q+1)|b|^{(n-2)q})]^{1/q}`.
pub fn k4(a: f64, b: f64, n: MeanOrder, pq: &ExponentPair) -> Result<f64> {
    let n = n.at_least(3)?;
    let (p, q) = conjugate(pq)?;
    let (x, y) = shifted_powers(a, b, n, q);
    Ok((1.0 / (p + 1.0)).powf(1.0 / p)
        * (2.0 / ((q + 1.0) * (q + 2.0))).powf(1.0 / q)
        * arithmetic_mean(x, (q + 1.0) * y).powf(1.0 / q))
}

/// One side-by-side inequality evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropOutcome {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl PropOutcome {
    fn new(lhs: f64, rhs: f64) -> Self {
        PropOutcome {
            lhs,
            rhs,
            holds: lhs <= rhs + PROP_SLACK,
        }
    }

    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// `L_n^n(a,b) <= A(|a|^n, |b|^n)`.
pub fn prop31_check(a: f64, b: f64, n: MeanOrder) -> Result<PropOutcome> {
    let lhs = log_mean_pow(a, b, n)?;
    let k = n.get() as i32;
    Ok(PropOutcome::new(
        lhs,
        arithmetic_mean(a.abs().powi(k), b.abs().powi(k)),
    ))
}

pub fn prop32_check(a: f64, b: f64, n: MeanOrder, pq: &ExponentPair) -> Result<PropOutcome> {
    let nn = n.at_least(3)?;
    if pq.mode() != ExponentMode::Independent {
        return Err(Error::exponents("prop3.2 needs independent exponents"));
    }
    let lhs = log_mean_pow(a, b, n)?.abs();
    let (p, q) = (pq.p(), pq.q());
    let nf = f64::from(nn);
    let mean_pow = |e: f64| arithmetic_mean(a.abs().powf(e), b.abs().powf(e));
    let rhs = 2.0
        * nf.powf((1.0 - q) / (p * q))
        * mean_pow(nf - 1.0).powf((p - 1.0) / p)
        * mean_pow(nf).powf((q - 1.0) / (q * p))
        * mean_pow(nf * (p + q) - q).powf(1.0 / (p * q));
    Ok(PropOutcome::new(lhs, rhs))
}

/// The two-form record of Propositions 3.3 and 3.4: the `|L_n^n + A(a^n, b^n)|`
/// form and, for `a, b > 0`, the plain `|L_n^n|` form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairedPropRecord {
    /// `(K1, K2)` or `(K3, K4)`.
    pub k_first: f64,
    pub k_second: f64,
    pub sum: PropOutcome,
    pub plain: Option<PropOutcome>,
}

impl PairedPropRecord {
    pub fn holds(&self) -> bool {
        self.sum.holds && self.plain.is_none_or(|p| p.holds)
    }
}

fn paired(
    a: f64,
    b: f64,
    n: MeanOrder,
    k_first: f64,
    k_second: f64,
    sum_divisor: f64,
    plain_divisor: f64,
) -> Result<PairedPropRecord> {
    let lnn = log_mean_pow(a, b, n)?;
    let nn = n.get() as i32;
    let nf = f64::from(n.get());
    let base = k_first.min(k_second) * nf * (nf - 1.0) * (b - a).powi(2);
    let sum = PropOutcome::new(
        (lnn + arithmetic_mean(a.powi(nn), b.powi(nn))).abs(),
        base / sum_divisor,
    );
    let plain = (a > 0.0 && b > 0.0).then(|| PropOutcome::new(lnn.abs(), base / plain_divisor));
    Ok(PairedPropRecord {
        k_first,
        k_second,
        sum,
        plain,
    })
}

pub fn prop33_check(a: f64, b: f64, n: MeanOrder, q: f64) -> Result<PairedPropRecord> {
    check_pair(a, b)?;
    paired(a, b, n, k1(a, b, n, q)?, k2(a, b, n, q)?, 4.0, 8.0)
}

/// The `a, b > 0` form of Proposition 3.3 on its own.
pub fn prop33_plain(a: f64, b: f64, n: MeanOrder, q: f64) -> Result<PropOutcome> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::PositivityRequired(format!(
            "prop3.3 plain form needs a, b > 0, got a = {a}, b = {b}"
        )));
    }
    Ok(prop33_check(a, b, n, q)?.plain.expect("a, b > 0"))
}

pub fn prop34_check(a: f64, b: f64, n: MeanOrder, pq: &ExponentPair) -> Result<PairedPropRecord> {
    check_pair(a, b)?;
    paired(a, b, n, k3(a, b, n, pq)?, k4(a, b, n, pq)?, 2.0, 4.0)
}

pub fn prop34_plain(a: f64, b: f64, n: MeanOrder, pq: &ExponentPair) -> Result<PropOutcome> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::PositivityRequired(format!(
            "prop3.4 plain form needs a, b > 0, got a = {a}, b = {b}"
        )));
    }
    Ok(prop34_check(a, b, n, pq)?.plain.expect("a, b > 0"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(k: u32) -> MeanOrder {
        MeanOrder::new(k).unwrap()
    }

    fn close(x: f64, y: f64, tol: f64) -> bool {
        (x - y).abs() <= tol * y.abs().max(1.0)
    }

    #[test]
    fn arithmetic_mean_examples() {
        assert_eq!(arithmetic_mean(2.0, 4.0), 3.0);
        assert_eq!(arithmetic_mean(1.25, 1.25), 1.25);
        assert_eq!(arithmetic_mean(-1.0, 1.0), 0.0);
    }

    #[test]
    fn log_mean_pow_examples() {
        assert!(close(
            log_mean_pow(1.0, 2.0, n(2)).unwrap(),
            7.0 / 3.0,
            1e-15
        ));
        assert_eq!(
            log_mean_pow(-0.5, 3.0, n(1)).unwrap(),
            arithmetic_mean(-0.5, 3.0)
        );
        assert!(close(log_mean_pow(0.0, 1.0, n(3)).unwrap(), 0.25, 1e-15));
        assert!(matches!(
            log_mean_pow(1.0, 1.0, n(2)),
            Err(Error::DegenerateInterval(_))
        ));
        assert!(log_mean_pow(2.0, 1.0, n(2)).is_err());
        assert!(MeanOrder::new(0).is_err());
    }

    #[test]
    fn log_mean_requires_positive_radicand() {
        assert!(close(
            log_mean(1.0, 2.0, n(2)).unwrap(),
            (7.0f64 / 3.0).sqrt(),
            1e-15
        ));
        assert!(log_mean(-2.0, 1.0, n(1)).is_err());
    }

    #[test]
    fn k_examples() {
        assert!(close(k1(1.0, 1.0, n(3), 1.0).unwrap(), 1.0 / 3.0, 1e-15));
        assert!(close(k2(1.0, 1.0, n(3), 1.0).unwrap(), 1.0 / 3.0, 1e-15));
        assert!(close(
            k1(0.0, 2.0, n(4), 2.0).unwrap(),
            8f64.sqrt() / 3.0,
            1e-15
        ));
        assert!(matches!(
            k1(0.0, 1.0, n(2), 1.0),
            Err(Error::InvalidOrder { .. })
        ));

        let pq = ExponentPair::conjugate(2.0, 2.0).unwrap();
        assert!(close(
            k3(1.0, 1.0, n(3), &pq).unwrap(),
            (1.0f64 / 30.0).sqrt(),
            1e-13
        ));
        assert!(close(k4(1.0, 1.0, n(3), &pq).unwrap(), 1.0 / 3.0, 1e-15));
        // (1/√3)(1/√6)(3/2)^{1/2} = 1/√12
        assert!(close(
            k4(0.0, 1.0, n(3), &pq).unwrap(),
            0.288_675_134_594_812_9,
            1e-15
        ));
        let ind = ExponentPair::independent(2.0, 2.0).unwrap();
        assert!(matches!(
            k3(1.0, 2.0, n(3), &ind),
            Err(Error::InvalidExponents(_))
        ));
    }

    #[test]
    fn prop31_examples() {
        let r = prop31_check(0.0, 1.0, n(2)).unwrap();
        assert!(close(r.lhs, 1.0 / 3.0, 1e-15) && r.rhs == 0.5 && r.holds);
        let r = prop31_check(0.5, 2.0, n(1)).unwrap();
        assert_eq!(r.lhs, r.rhs);
        assert!(r.holds);
        let r = prop31_check(-1.0, 1.0, n(2)).unwrap();
        assert!(close(r.lhs, 1.0 / 3.0, 1e-15) && r.rhs == 1.0 && r.holds);
    }

    #[test]
    fn prop32_examples() {
        let pq = ExponentPair::independent(2.0, 1.0).unwrap();
        let r = prop32_check(0.0, 1.0, n(3), &pq).unwrap();
        assert!(close(r.lhs, 0.25, 1e-15) && close(r.rhs, 1.0, 1e-15) && r.holds);
        assert!(matches!(
            prop32_check(1.0, 1.0, n(3), &pq),
            Err(Error::DegenerateInterval(_))
        ));
        // mpmath 50 digits: 16.651228563089134086144189385959351304212436566715
        let pq = ExponentPair::independent(2.0, 2.0).unwrap();
        let r = prop32_check(1.0, 2.0, n(3), &pq).unwrap();
        assert!(close(r.lhs, 3.75, 1e-15));
        assert!(close(r.rhs, 16.651_228_563_089_134, 1e-14));
        assert!(prop32_check(0.0, 1.0, n(2), &pq).is_err());
    }

    #[test]
    fn prop33_examples() {
        let r = prop33_check(1.0, 2.0, n(3), 1.0).unwrap();
        assert!(close(r.k_first, 0.5, 1e-15) && close(r.k_second, 0.5, 1e-15));
        assert!(close(r.sum.rhs, 0.75, 1e-15));
        assert!(close(r.sum.lhs, 33.0 / 4.0, 1e-15));
        assert!(!r.sum.holds);

        let r = prop33_check(0.0, 1.0, n(3), 1.0).unwrap();
        assert!(close(r.sum.lhs, 0.75, 1e-15));
        assert!(close(r.k_first, 1.0 / 6.0, 1e-15) && close(r.k_second, 1.0 / 6.0, 1e-15));
        assert!(close(r.sum.rhs, 0.25, 1e-15));
        assert!(r.plain.is_none());
        assert!(matches!(
            prop33_plain(0.0, 1.0, n(3), 1.0),
            Err(Error::PositivityRequired(_))
        ));
        assert!(prop33_plain(1.0, 2.0, n(3), 1.0).is_ok());
    }

    #[test]
    fn prop34_examples() {
        let pq = ExponentPair::conjugate(2.0, 2.0).unwrap();
        let r = prop34_check(0.0, 1.0, n(3), &pq).unwrap();
        assert!(close(r.sum.lhs, 0.75, 1e-15));
        // mpmath: K3 = 0.12909944487358056, K4 = 0.28867513459481288
        assert!(close(r.k_first, 0.129_099_444_873_580_56, 1e-13));
        assert!(close(r.k_second, 0.288_675_134_594_812_9, 1e-15));
        assert!(close(r.sum.rhs, 0.387_298_334_620_741_7, 1e-13));
        assert!(ExponentPair::conjugate(2.0, 1.0).is_err());
        assert!(matches!(
            prop34_check(1.0, 1.0, n(3), &pq),
            Err(Error::DegenerateInterval(_))
        ));
    }
}
