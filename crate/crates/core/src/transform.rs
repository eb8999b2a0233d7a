//! The Laplace transform `F_{GY,a}(z) = D_nu(a, z) / (z (z - 2(nu+1)))` of the
//! constant-strike value function, and its numerator `D_nu(a, z)` by two
//! independent routes.

use crate::complexfn::{bessel_i_scaled, c, kummer_phi, ln_gamma, mu_of_z, real, ComplexScalar};
use crate::error::{Error, Result};
use crate::quad::{integrate_with_breaks, QuadOptions};
use serde::{Deserialize, Serialize};

/// Largest `1/(2a)` the closed form accepts before `Phi` overflows.
const MAX_INV_2A: f64 = 600.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformMethod {
    WeberQuadrature,
    HypergeometricClosedForm,
}

/// A transform value with the point it was taken at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformPoint {
    pub z: ComplexScalar,
    pub value: ComplexScalar,
    pub abscissa_ok: bool,
    pub method: TransformMethod,
}

/// `max{0, Im(nu)^2 / 2 + 2 (Re(nu) + 1)}`.
pub fn abscissa_of_convergence(nu: ComplexScalar) -> f64 {
    (0.5 * nu.im * nu.im + 2.0 * (nu.re + 1.0)).max(0.0)
}

fn check(nu: f64, a: f64, z: ComplexScalar) -> Result<()> {
    if !nu.is_finite() {
        return Err(Error::InvalidInput(format!("nu must be finite, got {nu}")));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidInput(format!("a must be positive, got {a}")));
    }
    crate::complexfn::ensure_finite(z, "z")?;
    let x0 = abscissa_of_convergence(real(nu));
    if !(z.re > x0) {
        return Err(Error::Domain(format!(
            "Re(z) = {} is not right of the abscissa {x0} for nu = {nu}",
            z.re
        )));
    }
    Ok(())
}

/// Closed form of `D_nu(a, z)` through Kummer's function, Gamma ratios in
/// log space.
pub fn d_closed(nu: f64, a: f64, z: ComplexScalar) -> Result<ComplexScalar> {
    check(nu, a, z)?;
    let inv = 0.5 / a;
    if inv > MAX_INV_2A {
        return Err(Error::Overflow(format!("a = {a} is too small for the closed form")));
    }
    let mu = mu_of_z(real(nu), z);
    let big_a = (mu + nu + 4.0) * 0.5;
    let phi = kummer_phi(big_a, mu + 1.0, inv)?;
    let log = ln_gamma(big_a)? - ln_gamma(mu + 1.0)? + (real(nu + 2.0) - mu) * 0.5 * (2.0 * a).ln() - inv;
    Ok(log.exp() * phi)
}

/// `D_nu(a, z) = (e^{-1/(2a)} / a) int_0^inf e^{-x^2/(2a)} x^{nu+3} I_mu(x/a) dx`
/// by adaptive quadrature. Slow; kept as an independent check on
/// [`d_closed`].
pub fn d_weber(nu: f64, a: f64, z: ComplexScalar) -> Result<ComplexScalar> {
    check(nu, a, z)?;
    let mu = mu_of_z(real(nu), z);
    // e^{-x^2/2a + x/a - 1/2a} = e^{-(x-1)^2/(2a)}: a Gaussian at x = 1, times
    // the scaled Bessel function.
    let sa = a.sqrt();
    let x_max = 1.0 + a * (mu.norm() + nu.abs() + 4.0) + 12.0 * sa + 40.0 * a;
    let mut breaks = vec![0.0];
    for k in -6..=6 {
        let x = 1.0 + k as f64 * sa;
        if x > 0.0 && x < x_max {
            breaks.push(x);
        }
    }
    breaks.push(x_max);
    breaks.dedup();
    let mut failure = None;
    let f = |x: f64| {
        if x == 0.0 {
            return c(0.0, 0.0);
        }
        match bessel_i_scaled(mu, x / a) {
            Ok(i) => i * ((-(x - 1.0) * (x - 1.0) / (2.0 * a) + (nu + 3.0) * x.ln()).exp() / a),
            Err(e) => {
                failure.get_or_insert(e);
                c(f64::NAN, f64::NAN)
            }
        }
    };
    let r = integrate_with_breaks(f, &breaks, QuadOptions::rel(1e-12).with_abs(0.0));
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(r?.value)
}

/// `F_{GY,a}(z) = D_nu(a, z) / (z (z - 2(nu+1)))`.
pub fn f_gy(nu: f64, a: f64, z: ComplexScalar) -> Result<ComplexScalar> {
    let pole = 2.0 * (nu + 1.0);
    if (z.re == 0.0 && z.im == 0.0) || (z.re == pole && z.im == 0.0) {
        return Err(Error::Pole(format!("F_GY has a pole at z = {z}")));
    }
    let d = d_closed(nu, a, z)?;
    Ok(d / (z * (z - pole)))
}

/// Evaluate `D_nu(a, z)` by the requested route, recording whether `z` lies in
/// the half-plane of convergence.
pub fn transform_point(nu: f64, a: f64, z: ComplexScalar, method: TransformMethod) -> Result<TransformPoint> {
    let value = match method {
        TransformMethod::WeberQuadrature => d_weber(nu, a, z)?,
        TransformMethod::HypergeometricClosedForm => d_closed(nu, a, z)?,
    };
    Ok(TransformPoint {
        z,
        value,
        abscissa_ok: z.re > abscissa_of_convergence(real(nu)),
        method,
    })
}
