use super::{c, ln_gamma, real, ComplexScalar};
use crate::error::{Error, Result};
use crate::quad::CompensatedSum;
use std::f64::consts::PI;

/// Argument above which the large-`x` expansion may replace the series.
pub const BESSEL_SWITCH: f64 = 30.0;

const MAX_TERMS: usize = 5000;

fn check(mu: ComplexScalar, x: f64) -> Result<()> {
    super::ensure_finite(mu, "Bessel order")?;
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "Bessel argument must be positive and finite, got {x}"
        )));
    }
    Ok(())
}

// I_{-n} = I_n for integer n; the series below needs mu + 1 off the poles.
fn fold_negative_integer(mu: ComplexScalar) -> ComplexScalar {
    if mu.im == 0.0 && mu.re < 0.0 && mu.re == mu.re.round() {
        real(-mu.re)
    } else {
        mu
    }
}

fn use_asymptotic(mu: ComplexScalar, x: f64) -> bool {
    x >= BESSEL_SWITCH && x >= 0.5 * mu.norm_sqr()
}

/// `exp(-x) I_mu(x)` for complex order and positive real argument.
pub fn bessel_i_scaled(mu: ComplexScalar, x: f64) -> Result<ComplexScalar> {
    check(mu, x)?;
    let mu = fold_negative_integer(mu);
    if use_asymptotic(mu, x) {
        Ok(asymptotic_scaled(mu, x))
    } else {
        series_scaled(mu, x)
    }
}

/// Modified Bessel function of the first kind `I_mu(x)`.
pub fn bessel_i(mu: ComplexScalar, x: f64) -> Result<ComplexScalar> {
    let s = bessel_i_scaled(mu, x)?;
    let v = s * x.exp();
    if !(v.re.is_finite() && v.im.is_finite()) {
        return Err(Error::Overflow(format!(
            "I_mu(x) exceeds double range at x={x}; use the scaled form"
        )));
    }
    Ok(v)
}

// sum (x/2)^{mu+2n} / (n! Gamma(mu+n+1)), times e^{-x}
pub(crate) fn series_scaled(mu: ComplexScalar, x: f64) -> Result<ComplexScalar> {
    let lead = mu * (0.5 * x).ln() - ln_gamma(mu + 1.0)? - x;
    let mut term = lead.exp();
    let mut acc = CompensatedSum::new();
    acc.add(term);
    let q = 0.25 * x * x;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        term = term * q / ((mu + nf + 1.0) * (nf + 1.0));
        acc.add(term);
        if nf > 0.5 * x && term.norm() <= 1e-17 * acc.total().norm() {
            return Ok(acc.total());
        }
    }
    Err(Error::NonConvergence {
        what: format!("Bessel series at mu={mu}, x={x}"),
        estimate: term.norm(),
        tolerance: 1e-17 * acc.total().norm(),
    })
}

// e^{-x} I_mu(x) ~ (2 pi x)^{-1/2} sum_k (-1)^k a_k(mu) / x^k
pub(crate) fn asymptotic_scaled(mu: ComplexScalar, x: f64) -> ComplexScalar {
    let four_mu2 = mu * mu * 4.0;
    let mut term = c(1.0, 0.0);
    let mut acc = term;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term = -term * (four_mu2 - odd * odd) / (8.0 * k as f64 * x);
        let size = term.norm();
        if size > last {
            break;
        }
        acc += term;
        if size <= 1e-17 * acc.norm() {
            break;
        }
        last = size;
    }
    acc / (2.0 * PI * x).sqrt()
}
