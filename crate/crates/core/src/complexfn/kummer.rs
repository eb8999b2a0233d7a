use super::{c, ComplexScalar};
use crate::error::{Error, Result};
use crate::quad::CompensatedSum;

const MAX_TERMS: usize = 20_000;

fn check_b(b: ComplexScalar) -> Result<()> {
    if b.im == 0.0 && b.re <= 0.0 && b.re == b.re.round() {
        return Err(Error::Pole(format!("Kummer Phi is undefined for b = {}", b.re)));
    }
    Ok(())
}

/// Kummer's confluent hypergeometric function `Phi(a, b; x)` for real `x`.
pub fn kummer_phi(a: ComplexScalar, b: ComplexScalar, x: f64) -> Result<ComplexScalar> {
    kummer_phi_complex(a, b, c(x, 0.0))
}

/// Ascending series `sum (a)_n / (b)_n z^n / n!`, summed with compensation.
///
/// Accurate when the terms do not cancel, i.e. for moderate `|z|` or for
/// arguments where the terms keep roughly one phase (the transform layer
/// only calls it with `z = 1/(2a) > 0`).
pub fn kummer_phi_complex(a: ComplexScalar, b: ComplexScalar, z: ComplexScalar) -> Result<ComplexScalar> {
    check_b(b)?;
    let mut acc = CompensatedSum::new();
    let mut term = c(1.0, 0.0);
    acc.add(term);
    let zn = z.norm();
    let mut small_run = 0;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        term = term * (a + nf) / ((b + nf) * (nf + 1.0)) * z;
        acc.add(term);
        if term.re == 0.0 && term.im == 0.0 {
            // a is a non-positive integer: the series terminates.
            return Ok(acc.total());
        }
        let past_peak = nf > zn && nf > (a.norm() - b.norm()).abs();
        if past_peak && term.norm() <= 1e-17 * acc.total().norm() {
            small_run += 1;
            if small_run >= 2 {
                return Ok(acc.total());
            }
        } else {
            small_run = 0;
        }
        if !(term.re.is_finite() && term.im.is_finite()) {
            return Err(Error::Overflow(format!(
                "Kummer series overflowed at a={a}, b={b}, z={z}"
            )));
        }
    }
    Err(Error::NonConvergence {
        what: format!("Kummer series for a={a}, b={b}, z={z}"),
        estimate: term.norm(),
        tolerance: 1e-17 * acc.total().norm(),
    })
}
