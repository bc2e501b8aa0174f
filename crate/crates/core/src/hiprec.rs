//! High-precision substitution oracle for the special-means propositions.
//!
//! Every floating-point violation of Propositions 3.2–3.4 is re-evaluated
//! here at 256 bits (about 77 decimal digits) before it is reported as a
//! finding. The oracle deliberately takes different routes from the `f64`
//! code: `L_n^n` is formed as `(b^{n+1} - a^{n+1}) / ((b-a)(n+1))`, and the
//! Beta factor of `K3` as `exp(2 ln Γ(p+1) - ln Γ(2p+2))` with a Stirling
//! series instead of the Lanczos approximation.

use std::sync::OnceLock;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Working precision in bits.
pub const PRECISION_BITS: usize = 256;

/// Significant digits kept in the decimal renderings.
pub const REPORTED_DIGITS: usize = 50;

const RM: RoundingMode = RoundingMode::ToEven;

/// Stirling series terms and the shift that makes them converge to well
/// beyond the working precision.
const STIRLING_TERMS: usize = 30;
const STIRLING_SHIFT: f64 = 40.0;

/// `B_2, B_4, ..., B_{2 STIRLING_TERMS}` as exact decimal fractions.
fn bernoulli_even() -> &'static [(String, String)] {
    static CACHE: OnceLock<Vec<(String, String)>> = OnceLock::new();
    CACHE.get_or_init(|| {
        let m_max = 2 * STIRLING_TERMS;
        let mut b: Vec<BigRational> = Vec::with_capacity(m_max + 1);
        b.push(BigRational::one());
        for m in 1..=m_max {
            // B_m = -1/(m+1) Σ_{k<m} C(m+1, k) B_k
            let mut binom = BigInt::one();
            let mut acc = BigRational::zero();
            for (k, bk) in b.iter().enumerate() {
                acc += BigRational::from_integer(binom.clone()) * bk;
                binom = binom * BigInt::from(m + 1 - k) / BigInt::from(k + 1);
            }
            b.push(-acc / BigRational::from_integer(BigInt::from(m + 1)));
        }
        (1..=STIRLING_TERMS)
            .map(|k| {
                let r = &b[2 * k];
                (r.numer().to_string(), r.denom().to_string())
            })
            .collect()
    })
}

/// Arithmetic helper carrying the precision and the constants cache.
pub struct HpContext {
    cc: Consts,
}

impl HpContext {
    pub fn new() -> Result<Self> {
        let cc = Consts::new().map_err(|e| Error::domain(format!("astro-float: {e:?}")))?;
        Ok(HpContext { cc })
    }

    pub fn num(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, PRECISION_BITS)
    }

    fn int(&self, i: i64) -> BigFloat {
        BigFloat::from_i64(i, PRECISION_BITS)
    }

    fn parse(&mut self, s: &str) -> BigFloat {
        BigFloat::parse(s, Radix::Dec, PRECISION_BITS, RM, &mut self.cc)
    }

    fn add(&self, x: &BigFloat, y: &BigFloat) -> BigFloat {
        x.add(y, PRECISION_BITS, RM)
    }

    fn sub(&self, x: &BigFloat, y: &BigFloat) -> BigFloat {
        x.sub(y, PRECISION_BITS, RM)
    }

    fn mul(&self, x: &BigFloat, y: &BigFloat) -> BigFloat {
        x.mul(y, PRECISION_BITS, RM)
    }

    fn div(&self, x: &BigFloat, y: &BigFloat) -> BigFloat {
        x.div(y, PRECISION_BITS, RM)
    }

    fn ln(&mut self, x: &BigFloat) -> BigFloat {
        x.ln(PRECISION_BITS, RM, &mut self.cc)
    }

    fn exp(&mut self, x: &BigFloat) -> BigFloat {
        x.exp(PRECISION_BITS, RM, &mut self.cc)
    }

    fn abs(&self, x: &BigFloat) -> BigFloat {
        x.abs()
    }

    fn powi(&self, x: &BigFloat, n: u32) -> BigFloat {
        x.powi(n as usize, PRECISION_BITS, RM)
    }

    /// `x^y` for `x >= 0`, with `0^0 = 1` and `0^y = 0` for `y > 0`.
    fn powf(&mut self, x: &BigFloat, y: &BigFloat) -> BigFloat {
        if y.is_zero() {
            return self.int(1);
        }
        if x.is_zero() {
            return self.int(0);
        }
        let l = self.ln(x);
        let e = self.mul(y, &l);
        self.exp(&e)
    }

    fn mean(&self, x: &BigFloat, y: &BigFloat) -> BigFloat {
        self.div(&self.add(x, y), &self.int(2))
    }

    /// `ln Γ(x)` for `x > 0` from the Stirling series after shifting the
    /// argument past `STIRLING_SHIFT`.
    pub fn ln_gamma(&mut self, x: &BigFloat) -> BigFloat {
        let mut shift = 0u32;
        let mut product = self.int(1);
        let mut z = x.clone();
        let threshold = self.num(STIRLING_SHIFT);
        while z.cmp(&threshold).is_some_and(|c| c < 0) {
            product = self.mul(&product, &z);
            z = self.add(&z, &self.int(1));
            shift += 1;
        }
        let half = self.div(&self.int(1), &self.int(2));
        let two_pi = {
            let pi = self.cc.pi(PRECISION_BITS, RM);
            self.mul(&pi, &self.int(2))
        };
        let ln_z = self.ln(&z);
        let mut acc = self.sub(&self.mul(&self.sub(&z, &half), &ln_z), &z);
        let ln_two_pi = self.ln(&two_pi);
        acc = self.add(&acc, &self.mul(&half, &ln_two_pi));
        let z_sq = self.mul(&z, &z);
        let mut z_pow = z.clone();
        for (k, (num, den)) in bernoulli_even().iter().enumerate() {
            let k = (k + 1) as i64;
            let bk = {
                let n = self.parse(num);
                let d = self.parse(den);
                self.div(&n, &d)
            };
            let denom = self.mul(&self.int(2 * k * (2 * k - 1)), &z_pow);
            acc = self.add(&acc, &self.div(&bk, &denom));
            z_pow = self.mul(&z_pow, &z_sq);
        }
        if shift > 0 {
            let ln_product = self.ln(&product);
            acc = self.sub(&acc, &ln_product);
        }
        acc
    }

    /// `B(x, y)` through `ln Γ`.
    pub fn beta(&mut self, x: &BigFloat, y: &BigFloat) -> BigFloat {
        let lx = self.ln_gamma(x);
        let ly = self.ln_gamma(y);
        let sum = self.add(x, y);
        let lxy = self.ln_gamma(&sum);
        let e = self.sub(&self.add(&lx, &ly), &lxy);
        self.exp(&e)
    }

    /// `L_n^n(a, b) = (b^{n+1} - a^{n+1}) / ((b - a)(n + 1))`.
    fn log_mean_pow(&self, a: &BigFloat, b: &BigFloat, n: u32) -> BigFloat {
        let num = self.sub(&self.powi(b, n + 1), &self.powi(a, n + 1));
        let den = self.mul(&self.sub(b, a), &self.int(i64::from(n) + 1));
        self.div(&num, &den)
    }

    /// Decimal rendering with [`REPORTED_DIGITS`] significant digits.
    pub fn render(&mut self, x: &BigFloat) -> String {
        let full = x
            .format(Radix::Dec, RM, &mut self.cc)
            .unwrap_or_else(|_| "NaN".to_string());
        truncate_digits(&full, REPORTED_DIGITS)
    }

    /// Nearest `f64`.
    pub fn to_f64(&mut self, x: &BigFloat) -> f64 {
        self.render(x).parse().unwrap_or(f64::NAN)
    }
}

/// Keeps `digits` significant digits of a `d.ddd...e±x` string.
fn truncate_digits(s: &str, digits: usize) -> String {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], &s[i..]),
        None => (s, ""),
    };
    let mut out = String::with_capacity(digits + 8);
    let mut kept = 0;
    for ch in mantissa.chars() {
        if ch.is_ascii_digit() {
            if kept == digits {
                continue;
            }
            kept += 1;
        }
        out.push(ch);
    }
    out.push_str(exponent);
    out
}

/// One inequality re-evaluated at high precision.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HpComparison {
    pub lhs: String,
    pub rhs: String,
    /// `lhs > rhs` exactly at the working precision.
    pub violated: bool,
}

/// High-precision verdicts for the two forms of Propositions 3.3 / 3.4.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HpPaired {
    pub sum: HpComparison,
    pub plain: Option<HpComparison>,
}

impl HpPaired {
    pub fn violated(&self) -> bool {
        self.sum.violated || self.plain.as_ref().is_some_and(|p| p.violated)
    }
}

fn compare(ctx: &mut HpContext, lhs: &BigFloat, rhs: &BigFloat) -> HpComparison {
    let violated = lhs.cmp(rhs).is_some_and(|c| c > 0);
    HpComparison {
        lhs: ctx.render(lhs),
        rhs: ctx.render(rhs),
        violated,
    }
}

/// Proposition 3.2 at high precision.
pub fn prop32(a: f64, b: f64, n: u32, p: f64, q: f64) -> Result<HpComparison> {
    let mut c = HpContext::new()?;
    let (ba, bb, bp, bq) = (c.num(a), c.num(b), c.num(p), c.num(q));
    let nf = c.int(i64::from(n));
    let (aa, ab) = (c.abs(&ba), c.abs(&bb));
    let lhs = c.abs(&c.log_mean_pow(&ba, &bb, n));

    let mean_pow = |c: &mut HpContext, e: &BigFloat| {
        let x = c.powf(&aa, e);
        let y = c.powf(&ab, e);
        c.mean(&x, &y)
    };
    let one = c.int(1);
    let pq = c.mul(&bp, &bq);
    let e0 = c.div(&c.sub(&one, &bq), &pq);
    let pre = c.powf(&nf, &e0);
    let m1 = {
        let e = c.sub(&nf, &one);
        mean_pow(&mut c, &e)
    };
    let m2 = mean_pow(&mut c, &nf.clone());
    let m3 = {
        let e = c.sub(&c.mul(&nf, &c.add(&bp, &bq)), &bq);
        mean_pow(&mut c, &e)
    };
    let f1 = {
        let e = c.div(&c.sub(&bp, &one), &bp);
        c.powf(&m1, &e)
    };
    let f2 = {
        let e = c.div(&c.sub(&bq, &one), &pq);
        c.powf(&m2, &e)
    };
    let f3 = {
        let e = c.div(&one, &pq);
        c.powf(&m3, &e)
    };
    let rhs = c.mul(&c.mul(&c.mul(&c.mul(&c.int(2), &pre), &f1), &f2), &f3);
    Ok(compare(&mut c, &lhs, &rhs))
}

fn paired(
    c: &mut HpContext,
    a: f64,
    b: f64,
    n: u32,
    k_min: &BigFloat,
    sum_divisor: i64,
    plain_divisor: i64,
) -> HpPaired {
    let (ba, bb) = (c.num(a), c.num(b));
    let lnn = c.log_mean_pow(&ba, &bb, n);
    let an = c.powi(&ba, n);
    let bn = c.powi(&bb, n);
    let lhs_sum = c.abs(&c.add(&lnn, &c.mean(&an, &bn)));
    let width = c.sub(&bb, &ba);
    let nn1 = c.int(i64::from(n) * (i64::from(n) - 1));
    let base = c.mul(&c.mul(k_min, &nn1), &c.mul(&width, &width));
    let rhs_sum = c.div(&base, &c.int(sum_divisor));
    let sum = compare(c, &lhs_sum, &rhs_sum);
    let plain = (a > 0.0 && b > 0.0).then(|| {
        let lhs = c.abs(&lnn);
        let rhs = c.div(&base, &c.int(plain_divisor));
        compare(c, &lhs, &rhs)
    });
    HpPaired { sum, plain }
}

fn min(x: BigFloat, y: BigFloat) -> BigFloat {
    if x.cmp(&y).is_some_and(|c| c <= 0) {
        x
    } else {
        y
    }
}

/// `(A(|a|^{(n-2)q}, w |b|^{(n-2)q}))^{1/q}` scaled by `w_a` on the first slot.
fn shifted_mean_root(
    c: &mut HpContext,
    a: f64,
    b: f64,
    n: u32,
    q: &BigFloat,
    wa: &BigFloat,
    wb: &BigFloat,
) -> BigFloat {
    let e = c.mul(&c.int(i64::from(n) - 2), q);
    let (aa, ab) = (c.abs(&c.num(a)), c.abs(&c.num(b)));
    let x = c.powf(&aa, &e);
    let y = c.powf(&ab, &e);
    let m = c.mean(&c.mul(wa, &x), &c.mul(wb, &y));
    let inv_q = c.div(&c.int(1), q);
    c.powf(&m, &inv_q)
}

/// Proposition 3.3 at high precision.
pub fn prop33(a: f64, b: f64, n: u32, q: f64) -> Result<HpPaired> {
    let mut c = HpContext::new()?;
    let bq = c.num(q);
    let one = c.int(1);
    let k1 = {
        let r = shifted_mean_root(&mut c, a, b, n, &bq, &one, &one);
        c.div(&r, &c.int(3))
    };
    let k2 = {
        let q1 = c.add(&bq, &one);
        let q2 = c.add(&bq, &c.int(2));
        let q3 = c.add(&bq, &c.int(3));
        let frac = c.div(&c.int(4), &c.mul(&c.mul(&q1, &q2), &q3));
        let inv_q = c.div(&one, &bq);
        let pre = c.powf(&frac, &inv_q);
        let two = c.int(2);
        let r = shifted_mean_root(&mut c, a, b, n, &bq, &two, &q1);
        c.mul(&pre, &r)
    };
    let k = min(k1, k2);
    Ok(paired(&mut c, a, b, n, &k, 4, 8))
}

/// Proposition 3.4 at high precision (conjugate `p`, `q`).
pub fn prop34(a: f64, b: f64, n: u32, p: f64, q: f64) -> Result<HpPaired> {
    let mut c = HpContext::new()?;
    let (bp, bq) = (c.num(p), c.num(q));
    let one = c.int(1);
    let inv_p = c.div(&one, &bp);
    let inv_q = c.div(&one, &bq);
    let k3 = {
        let p1 = c.add(&bp, &one);
        let beta = c.beta(&p1, &p1);
        let pre = c.powf(&beta, &inv_p);
        let r = shifted_mean_root(&mut c, a, b, n, &bq, &one, &one);
        c.mul(&pre, &r)
    };
    let k4 = {
        let p1 = c.add(&bp, &one);
        let q1 = c.add(&bq, &one);
        let q2 = c.add(&bq, &c.int(2));
        let f1 = {
            let base = c.div(&one, &p1);
            c.powf(&base, &inv_p)
        };
        let f2 = {
            let base = c.div(&c.int(2), &c.mul(&q1, &q2));
            c.powf(&base, &inv_q)
        };
        let r = shifted_mean_root(&mut c, a, b, n, &bq, &one, &q1);
        c.mul(&c.mul(&f1, &f2), &r)
    };
    let k = min(k3, k4);
    Ok(paired(&mut c, a, b, n, &k, 2, 4))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prefix_matches(rendered: &str, digits: &str) {
        let got: String = rendered
            .chars()
            .filter(|c| c.is_ascii_digit())
            .take(digits.len())
            .collect();
        assert_eq!(got, digits, "rendered {rendered}");
    }

    #[test]
    fn bernoulli_numbers() {
        let b = bernoulli_even();
        assert_eq!(b[0], ("1".to_string(), "6".to_string()));
        assert_eq!(b[1], ("-1".to_string(), "30".to_string()));
        assert_eq!(b[5], ("-691".to_string(), "2730".to_string()));
    }

    #[test]
    fn ln_gamma_half_and_integers() {
        let mut c = HpContext::new().unwrap();
        // Γ(1/2)^2 = π
        let half = c.num(0.5);
        let l = c.ln_gamma(&half);
        let two_l = c.mul(&l, &c.int(2));
        let pi_back = c.exp(&two_l);
        prefix_matches(
            &c.render(&pi_back),
            "31415926535897932384626433832795028841971693993751",
        );
        // Γ(7) = 720
        let seven = c.num(7.0);
        let l7 = c.ln_gamma(&seven);
        let g7 = c.exp(&l7);
        assert!((c.to_f64(&g7) - 720.0).abs() < 1e-12);
        // B(3,3) = 1/30
        let three = c.num(3.0);
        let bt = c.beta(&three, &three);
        prefix_matches(
            &c.render(&bt),
            "33333333333333333333333333333333333333333333333333",
        );
    }

    #[test]
    fn prop32_matches_mpmath() {
        // mpmath, 50 digits: 16.651228563089134086144189385959351304212436566715
        let r = prop32(1.0, 2.0, 3, 2.0, 2.0).unwrap();
        prefix_matches(&r.rhs, "16651228563089134086144189385959351304212436566");
        prefix_matches(&r.lhs, "375");
        assert!(!r.violated);
    }

    #[test]
    fn prop33_matches_hand_values() {
        // K1 = K2 = 1/2, rhs_sum = 3/4, lhs_sum = 33/4
        let r = prop33(1.0, 2.0, 3, 1.0).unwrap();
        prefix_matches(&r.sum.lhs, "825");
        prefix_matches(&r.sum.rhs, "75");
        assert!(r.sum.violated);
        assert!(r.plain.is_some());
        assert!(r.violated());
    }

    #[test]
    fn prop34_matches_mpmath() {
        // mpmath: rhs_sum = 0.38729833462074168851792653997823996108329217052916
        let r = prop34(0.0, 1.0, 3, 2.0, 2.0).unwrap();
        prefix_matches(
            &r.sum.rhs,
            "38729833462074168851792653997823996108329217052",
        );
        prefix_matches(&r.sum.lhs, "75");
        assert!(r.sum.violated);
        assert!(r.plain.is_none());
    }

    #[test]
    fn truncation() {
        assert_eq!(truncate_digits("1.23456e+5", 3), "1.23e+5");
        assert_eq!(truncate_digits("-0.5", 10), "-0.5");
    }
}
