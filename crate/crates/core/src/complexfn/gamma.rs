use super::{c, ComplexScalar};
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_741_780_329_736_405_6;

// B_{2k} / (2k (2k-1)) for k = 1..=10
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
    43_867.0 / 244_188.0,
    -174_611.0 / 125_400.0,
];

const SHIFT_TO: f64 = 15.0;

fn is_nonpositive_integer(z: ComplexScalar) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// `ln Gamma(z)` on the branch that is continuous in the right half-plane
/// and real on the positive real axis. `exp(ln_gamma(z)) = Gamma(z)`.
pub fn ln_gamma(z: ComplexScalar) -> Result<ComplexScalar> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "ln_gamma argument must be finite, got {z}"
        )));
    }
    if is_nonpositive_integer(z) {
        return Err(Error::Pole(format!("Gamma has a pole at {}", z.re)));
    }
    if z.re < 0.5 {
        // Reflection: Gamma(z) Gamma(1 - z) = pi / sin(pi z)
        let lg = ln_gamma_right(c(1.0, 0.0) - z);
        return Ok(c(PI.ln(), 0.0) - ln_sin_pi(z) - lg);
    }
    Ok(ln_gamma_right(z))
}

// ln sin(pi z), modulo 2 pi i; stays finite for large |Im z|.
fn ln_sin_pi(z: ComplexScalar) -> ComplexScalar {
    if z.im.abs() < 20.0 {
        return sin_pi(z).ln();
    }
    let n = z.re.round();
    let zr = c(z.re - n, z.im);
    let parity = if (n as i64) % 2 == 0 { c(0.0, 0.0) } else { c(0.0, PI) };
    let iz = c(0.0, PI) * zr;
    let lead = if z.im > 0.0 {
        // sin(pi z) = (i/2) e^{-i pi z} (1 - e^{2 i pi z})
        c(0.5f64.ln(), PI / 2.0) - iz + (c(1.0, 0.0) - (iz * 2.0).exp()).ln()
    } else {
        // sin(pi z) = (-i/2) e^{i pi z} (1 - e^{-2 i pi z})
        c(0.5f64.ln(), -PI / 2.0) + iz + (c(1.0, 0.0) - (-iz * 2.0).exp()).ln()
    };
    lead + parity
}

fn sin_pi(z: ComplexScalar) -> ComplexScalar {
    // Reduce the real part to keep sin accurate near the integers.
    let n = z.re.round();
    let r = z.re - n;
    let s = (c(r, z.im) * PI).sin();
    if (n as i64) % 2 == 0 {
        s
    } else {
        -s
    }
}

fn ln_gamma_right(z: ComplexScalar) -> ComplexScalar {
    let mut z = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while z.norm() < SHIFT_TO {
        shift += z.ln();
        z += 1.0;
    }
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = inv;
    for coef in STIRLING {
        series += pow * coef;
        pow *= inv2;
    }
    (z - 0.5) * z.ln() - z + LN_SQRT_2PI + series - shift
}

/// `1 / Gamma(z)`, entire; exactly zero at the non-positive integers.
pub fn recip_gamma(z: ComplexScalar) -> ComplexScalar {
    if is_nonpositive_integer(z) {
        return c(0.0, 0.0);
    }
    match ln_gamma(z) {
        Ok(lg) => (-lg).exp(),
        Err(_) => c(f64::NAN, f64::NAN),
    }
}
