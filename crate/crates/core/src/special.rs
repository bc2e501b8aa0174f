//! Gamma and Beta functions for positive real arguments.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest argument accepted by [`gamma`].
pub const GAMMA_MAX_ARG: f64 = 30.0;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(x: f64) -> f64 {
    LANCZOS_COEFFS[1..]
        .iter()
        .enumerate()
        .fold(LANCZOS_COEFFS[0], |acc, (i, c)| {
            acc + c / (x + (i + 1) as f64)
        })
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!(
            "ln_gamma needs finite x > 0, got {x}"
        )));
    }
    if x < 0.5 {
        return Ok(ln_gamma(x + 1.0)? - x.ln());
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln())
}

/// `Γ(x)` for `0 < x <= 30`.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("gamma needs x > 0, got {x}")));
    }
    if x > GAMMA_MAX_ARG {
        return Err(Error::domain(format!(
            "gamma is only supported up to x = {GAMMA_MAX_ARG}, got {x}"
        )));
    }
    if x < 0.5 {
        return Ok(gamma(x + 1.0)? / x);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok((2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * lanczos_sum(z))
}

/// `B(x, y) = exp(ln Γ(x) + ln Γ(y) - ln Γ(x + y))`.
pub fn beta(x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0 && y > 0.0) {
        return Err(Error::domain(format!(
            "beta needs x, y > 0, got ({x}, {y})"
        )));
    }
    Ok((ln_gamma(x)? + ln_gamma(y)? - ln_gamma(x + y)?).exp())
}

/// `√π Γ(p+1) / (2^{1+2p} Γ(p+3/2))`, the closed form of `B(p+1, p+1)`.
pub fn symmetric_beta_closed_form(p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::domain(format!("need p > 0, got {p}")));
    }
    Ok(PI.sqrt() * gamma(p + 1.0)? / (2f64.powf(1.0 + 2.0 * p) * gamma(p + 1.5)?))
}

/// `(B(p+1, p+1), 2^{1-2(p+1)} √π Γ(p+1)/Γ(p+3/2))`; the two agree by the
/// duplication formula.
pub fn beta_duplication_check(p: f64) -> Result<(f64, f64)> {
    if !(p > 0.0) {
        return Err(Error::domain(format!("need p > 0, got {p}")));
    }
    Ok((beta(p + 1.0, p + 1.0)?, symmetric_beta_closed_form(p)?))
}
