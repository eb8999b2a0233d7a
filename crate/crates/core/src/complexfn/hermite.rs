use super::{c, kummer_phi_complex, ln_gamma, real, recip_gamma, ComplexScalar};
use crate::error::Result;
use crate::quad::{integrate, integrate_with_breaks, QuadOptions};
use std::f64::consts::PI;

const POLY_MAX_DEGREE: f64 = 400.0;
const QUAD_REL: f64 = 1e-13;
// Near Re mu = 0 the Laplace-type integral degenerates (1/Gamma(-mu) -> 0
// against a log-divergent integral), so it is only used up to here.
const INTEGRAL_MAX_RE: f64 = -0.5;
// relative distance from the axes below which the straight saddle path is kept
const AXIS_BAND: f64 = 1e-3;

fn nonneg_integer_degree(mu: ComplexScalar) -> Option<usize> {
    if mu.im == 0.0 && mu.re >= 0.0 && mu.re == mu.re.round() && mu.re <= POLY_MAX_DEGREE {
        Some(mu.re as usize)
    } else {
        None
    }
}

fn polynomial(n: usize, z: ComplexScalar) -> ComplexScalar {
    let mut prev = real(1.0);
    if n == 0 {
        return prev;
    }
    let mut cur = z * 2.0;
    for k in 1..n {
        let next = z * 2.0 * cur - prev * (2.0 * k as f64);
        prev = cur;
        cur = next;
    }
    cur
}

/// Hermite function `H_mu(z)` of complex degree.
///
/// Non-negative integer degrees use the polynomial recurrence. For
/// `Re mu <= -1/2` away from the origin the Laplace-type integral is used
/// since the Kummer combination cancels badly there; larger degrees at
/// large `|z|` recur upward from two such degrees.
pub fn hermite_h(mu: ComplexScalar, z: ComplexScalar) -> Result<ComplexScalar> {
    hermite_h_scaled(mu, z, 0.0)
}

/// `H_mu(z) e^{-shift}`, with the shift applied inside the exponentials so
/// that values beyond the double range can be carried when the caller
/// multiplies by a compensating small factor.
pub fn hermite_h_scaled(mu: ComplexScalar, z: ComplexScalar, shift: f64) -> Result<ComplexScalar> {
    super::ensure_finite(mu, "Hermite degree")?;
    super::ensure_finite(z, "Hermite argument")?;
    if let Some(n) = nonneg_integer_degree(mu) {
        return Ok(polynomial(n, z) * (-shift).exp());
    }
    if mu.re <= INTEGRAL_MAX_RE {
        let direct = z.re > 0.0 && z.im.abs() < z.re;
        if direct || z.norm() >= 1.0 {
            return integral_scaled(mu, z, shift);
        }
        return Ok(hermite_h_kummer(mu, z)? * (-shift).exp());
    }
    if z.norm() <= 2.0 {
        return Ok(hermite_h_kummer(mu, z)? * (-shift).exp());
    }
    // H_{m+1} = 2 z H_m - 2 m H_{m-1}, started from two degrees where the
    // integral is well conditioned
    let steps = ((mu.re - INTEGRAL_MAX_RE).ceil() as usize).max(1);
    let base = mu - steps as f64;
    let mut lower = integral_scaled(base - 1.0, z, shift)?;
    let mut upper = integral_scaled(base, z, shift)?;
    for k in 0..steps {
        let m = base + k as f64;
        let next = z * 2.0 * upper - m * 2.0 * lower;
        lower = upper;
        upper = next;
    }
    Ok(upper)
}

/// Two-term Kummer combination
/// `2^mu sqrt(pi) [Phi(-mu/2, 1/2; z^2)/Gamma((1-mu)/2) - 2z Phi((1-mu)/2, 3/2; z^2)/Gamma(-mu/2)]`.
pub fn hermite_h_kummer(mu: ComplexScalar, z: ComplexScalar) -> Result<ComplexScalar> {
    let z2 = z * z;
    let even = kummer_phi_complex(-mu * 0.5, real(0.5), z2)? * recip_gamma((real(1.0) - mu) * 0.5);
    let odd = kummer_phi_complex((real(1.0) - mu) * 0.5, real(1.5), z2)? * recip_gamma(-mu * 0.5);
    let scale = (mu * 2f64.ln()).exp() * PI.sqrt();
    Ok(scale * (even - z * 2.0 * odd))
}

/// `H_mu(z) = (1/Gamma(-mu)) int_0^inf exp(-u^2 - 2 z u) u^{-mu-1} du`, `Re mu < 0`.
///
/// When the real-axis path would oscillate or grow, the contour follows the
/// steepest-descent path from the origin, or runs straight to the saddle
/// `-z` when `z` lies close to an axis.
pub fn hermite_h_integral(mu: ComplexScalar, z: ComplexScalar) -> Result<ComplexScalar> {
    integral_scaled(mu, z, 0.0)
}

fn integral_scaled(mu: ComplexScalar, z: ComplexScalar, shift: f64) -> Result<ComplexScalar> {
    if mu.re >= 0.0 {
        return Err(crate::error::Error::Domain(format!(
            "the Laplace-type integral needs Re(mu) < 0, got mu={mu}"
        )));
    }
    let p = -mu - 1.0;
    let opts = QuadOptions::rel(QUAD_REL);
    let lg = ln_gamma(-mu)? + shift;
    if z.re > 0.0 && z.im.abs() < z.re {
        let x = z.re;
        // peak of u^{Re p} exp(-u^2 - 2 x u)
        let peak = if p.re > 0.0 {
            0.5 * (-x + (x * x + 2.0 * p.re).sqrt())
        } else {
            0.0
        };
        let u_max = peak + 10.0;
        let f = |u: f64| {
            if u == 0.0 {
                return c(0.0, 0.0);
            }
            (-z * (2.0 * u) - u * u + p * u.ln() - lg).exp()
        };
        let near = singular_head(f, p, u_max.min(1.0), opts)?;
        let tail = if u_max > 1.0 {
            integrate(f, 1.0, u_max, opts)?.value
        } else {
            c(0.0, 0.0)
        };
        return Ok(near + tail);
    }
    // near either axis the segment to the saddle -z has a nearly constant
    // phase; elsewhere it oscillates and the steepest-descent path is used
    let tilt = z.re.abs().min(z.im.abs());
    if tilt >= AXIS_BAND * z.norm() {
        return descent(p, z, lg, opts);
    }
    saddle_segment(p, z, lg, opts)
}

// int_0^inf along u = -z s to the saddle, then u = -z + t
fn saddle_segment(p: ComplexScalar, z: ComplexScalar, lg: ComplexScalar, opts: QuadOptions) -> Result<ComplexScalar> {
    let mz = -z;
    let lead = (p + 1.0) * mz.ln() - lg;
    let z2 = z * z;
    let seg = singular_head(
        |s: f64| {
            if s == 0.0 {
                return c(0.0, 0.0);
            }
            (z2 * (2.0 * s - s * s) + p * s.ln() + lead).exp()
        },
        p,
        1.0,
        opts,
    )?;
    let t_max = 10.0 + p.re.max(0.0).sqrt();
    let ray = integrate(
        |t: f64| {
            let base = real(t) - z;
            (-t * t + z2 + p * base.ln() - lg).exp()
        },
        0.0,
        t_max,
        opts,
    )?
    .value;
    Ok(seg + ray)
}

// Steepest descent from the origin: -u^2 - 2zu = -s along
// u(s) = -z + z sqrt(1 + s/z^2). The path ends at +inf when Re z > 0; for
// Re z < 0 it ends at -inf and the horizontal line through the saddle
// closes the contour.
fn descent(p: ComplexScalar, z: ComplexScalar, lg: ComplexScalar, opts: QuadOptions) -> Result<ComplexScalar> {
    let z2 = z * z;
    let inv = z2.inv();
    let f = |s: f64| {
        if s == 0.0 {
            return c(0.0, 0.0);
        }
        let root = (real(1.0) + inv * s).sqrt();
        let v = z * root;
        // v - z without cancellation
        let u = (s / z) / (root + 1.0);
        // du/ds = 1 / (2v)
        (p * u.ln() - s - lg).exp() / (v * 2.0)
    };
    // u ~ s/(2z) near 0; the integrand is largest near s = Re p and the path
    // passes closest to the saddle at s = -Re z^2
    let s_max = 60.0 + 2.0 * p.re.max(0.0);
    let head_end = 1f64.min(s_max);
    let mut total = singular_head(f, p, head_end, opts)?;
    let mut breaks = vec![head_end];
    let closest = -z2.re;
    if closest > head_end && closest < s_max {
        breaks.push(closest);
    }
    breaks.push(s_max);
    total += integrate_with_breaks(f, &breaks, opts)?.value;
    if z.re < 0.0 {
        let t_max = 12.0 + (2.0 * p.re.max(0.0)).sqrt();
        let line = integrate_with_breaks(
            |t: f64| (-t * t + z2 + p * (real(t) - z).ln() - lg).exp(),
            &[-t_max, 0.0, t_max],
            opts,
        )?;
        total += line.value;
    }
    Ok(total)
}

// int_0^b f(u) du where f ~ u^p at the origin: substitute u = tau^{1/(Re p + 1)}
// so the integrand stays bounded there.
fn singular_head<F>(f: F, p: ComplexScalar, b: f64, opts: QuadOptions) -> Result<ComplexScalar>
where
    F: Fn(f64) -> ComplexScalar,
{
    let e = p.re + 1.0;
    if e >= 2.0 {
        return Ok(integrate(f, 0.0, b, opts)?.value);
    }
    let inv = 1.0 / e;
    let tau_max = b.powf(e);
    let g = |tau: f64| {
        if tau == 0.0 {
            return c(0.0, 0.0);
        }
        let u = tau.powf(inv);
        // du = u / (e tau) dtau
        f(u) * (u / (e * tau))
    };
    Ok(integrate(g, 0.0, tau_max, opts)?.value)
}
