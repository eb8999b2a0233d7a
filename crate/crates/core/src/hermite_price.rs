//! Normalized price as a difference of Hermite-function integrals:
//! `C = c e^{2h(nu+1)} S_{nu+2} - c S_nu` with
//! `S_xi = Im int_Gamma H_{-(nu+4)}(-cosh(w)/sqrt(2q)) (E_xi + E_{-xi})(w) dw`
//! over a path from the real axis to `+inf + i pi/2`.
//!
//! Splitting the path at `Re w = rho` gives a trigonometric integral (the
//! vertical piece) and two hyperbolic ones (the horizontal piece at
//! `Im w = pi/2`). The integrand is entire, so any such path gives the same
//! `S_xi`; what changes is how much the pieces cancel.

use crate::complexfn::{c, erfcx_c, hermite_h_scaled, ln_gamma, real, ComplexScalar};
use crate::error::{Error, Result};
use crate::quad::{integrate, CompensatedSum, QuadOptions};
use crate::result::{Method, PriceResult};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, LN_10, PI};

const REL_TOL: f64 = 1e-12;
/// Absolute floor of each term integral, in units of the final price.
const PRICE_FLOOR: f64 = 1e-18;
/// Shift of the split point (or corner) used for the error estimate.
pub const RHO_PERTURBATION: f64 = 0.25;
/// Corner of the default path: straight from 0 to `(pi/2)(1 + i)`.
pub const DIAGONAL_CORNER: f64 = FRAC_PI_2;

/// The three integrals making up `S_xi` at one split point `rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HermiteTerms {
    pub rho: f64,
    pub trig: f64,
    pub hyp_plus: f64,
    pub hyp_minus: f64,
    pub s_xi: f64,
}

/// Path of integration for `S_xi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Contour {
    /// Up from `rho` to `rho + i pi/2`, then right.
    Rectangle { rho: f64 },
    /// Straight from 0 to `corner + i pi/2`, then right.
    Diagonal { corner: f64 },
}

impl Contour {
    fn shifted(self, by: f64) -> Self {
        match self {
            Contour::Rectangle { rho } => Contour::Rectangle { rho: rho + by },
            Contour::Diagonal { corner } => Contour::Diagonal { corner: corner + by },
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Contour::Rectangle { .. } => "rectangle",
            Contour::Diagonal { .. } => "diagonal",
        }
    }

    fn split(&self) -> f64 {
        match *self {
            Contour::Rectangle { rho } => rho,
            Contour::Diagonal { corner } => corner,
        }
    }
}

/// `E_xi(h)(w) = e^{w xi} Erfc(w / sqrt(2h) + (xi/2) sqrt(2h))`.
///
/// Written as `exp(-w^2/(2h) - xi^2 h/2) erfcx(Z)` so the growth of the
/// exponential weight and the decay of `Erfc` never meet as `inf * 0`.
pub fn weighted_erfc(xi: f64, h: f64, w: ComplexScalar) -> ComplexScalar {
    let s = (2.0 * h).sqrt();
    let z = w / s + 0.5 * xi * s;
    let gauss = -(w * w) / (2.0 * h) - 0.5 * xi * xi * h;
    if z.re >= 0.0 {
        gauss.exp() * erfcx_c(z)
    } else {
        // Erfc(Z) = 2 - Erfc(-Z)
        (w * xi).exp() * 2.0 - gauss.exp() * erfcx_c(-z)
    }
}

fn degree(nu: f64) -> ComplexScalar {
    real(-(nu + 4.0))
}

fn check(nu: f64, h: f64, q: f64, split: f64) -> Result<()> {
    if !nu.is_finite() {
        return Err(Error::InvalidInput(format!("nu must be finite, got {nu}")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidInput(format!("h must be positive, got {h}")));
    }
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::InvalidInput(format!("Hermite route needs q > 0, got {q}")));
    }
    if !(split >= 0.0 && split.is_finite()) {
        return Err(Error::InvalidInput(format!("rho must be >= 0, got {split}")));
    }
    Ok(())
}

/// Integrates `g` and reports the first error raised inside it.
fn guarded<F>(mut g: F, a: f64, b: f64, opts: QuadOptions) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut failure = None;
    let r = integrate(
        |x: f64| match g(x) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        a,
        b,
        opts,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(r?.value)
}

/// `H_{-(nu+4)}(-cosh(w)/sqrt(2q)) e^{-shift}`.
fn hermite_factor(nu: f64, q: f64, w: ComplexScalar, shift: f64) -> Result<ComplexScalar> {
    hermite_h_scaled(degree(nu), -w.cosh() / (2.0 * q).sqrt(), shift)
}

fn both_weights(xi: f64, h: f64, w: ComplexScalar) -> ComplexScalar {
    weighted_erfc(xi, h, w) + weighted_erfc(-xi, h, w)
}

/// Upper limit of the horizontal integrals: `|E_xi(y + i pi/2)|` carries
/// `exp(-(y^2 - pi^2/4)/(2h) + |xi| y)`, so stop 40 e-folds below its level
/// at `y = 0`.
fn hyp_upper(h: f64, xi: f64, from: f64) -> f64 {
    let b = xi.abs() * h;
    let y = b + (b * b + PI * PI / 4.0 + 80.0 * h).sqrt();
    y.max(from + 1.0)
}

fn trig_scaled(nu: f64, h: f64, q: f64, xi: f64, rho: f64, shift: f64, opts: QuadOptions) -> Result<f64> {
    guarded(
        |phi| {
            let w = c(rho, phi);
            Ok((hermite_factor(nu, q, w, shift)? * both_weights(xi, h, w)).re)
        },
        0.0,
        FRAC_PI_2,
        opts,
    )
}

fn hyp_scaled(nu: f64, h: f64, q: f64, xi: f64, from: f64, shift: f64, opts: QuadOptions) -> Result<f64> {
    guarded(
        |y| {
            let w = c(y, FRAC_PI_2);
            Ok((hermite_factor(nu, q, w, shift)? * weighted_erfc(xi, h, w)).im)
        },
        from,
        hyp_upper(h, xi, from),
        opts,
    )
}

/// `int_0^{pi/2} Re(H_{-(nu+4)}(-cosh(rho + i phi)/sqrt(2q)) (E_xi + E_{-xi})(rho + i phi)) dphi`.
///
/// Both weights `E_{+-xi}` enter: at `rho = 0` this reduces to
/// `2 int_0^{pi/2} H_{-(nu+4)}(-cos(phi)/sqrt(2q)) cos(xi phi) dphi`.
pub fn trig_term(nu: f64, h: f64, q: f64, xi: f64, rho: f64) -> Result<f64> {
    check(nu, h, q, rho)?;
    trig_scaled(nu, h, q, xi, rho, 0.0, QuadOptions::rel(REL_TOL))
}

/// `int_rho^inf Im(H_{-(nu+4)}(-i sinh(y)/sqrt(2q)) E_xi(y + i pi/2)) dy`.
pub fn hyp_term(nu: f64, h: f64, q: f64, xi: f64, rho: f64) -> Result<f64> {
    check(nu, h, q, rho)?;
    hyp_scaled(nu, h, q, xi, rho, 0.0, QuadOptions::rel(REL_TOL))
}

fn s_rectangle(nu: f64, h: f64, q: f64, xi: f64, rho: f64, shift: f64, opts: QuadOptions) -> Result<HermiteTerms> {
    let trig = trig_scaled(nu, h, q, xi, rho, shift, opts)?;
    let hyp_plus = hyp_scaled(nu, h, q, xi, rho, shift, opts)?;
    let hyp_minus = hyp_scaled(nu, h, q, -xi, rho, shift, opts)?;
    let mut acc = CompensatedSum::new();
    acc.add(trig);
    acc.add(hyp_plus);
    acc.add(hyp_minus);
    Ok(HermiteTerms {
        rho,
        trig,
        hyp_plus,
        hyp_minus,
        s_xi: acc.total(),
    })
}

/// `S_xi(rho)` with its three summands.
pub fn s_terms(nu: f64, h: f64, q: f64, xi: f64, rho: f64) -> Result<HermiteTerms> {
    check(nu, h, q, rho)?;
    s_rectangle(nu, h, q, xi, rho, 0.0, QuadOptions::rel(REL_TOL))
}

fn s_diagonal(nu: f64, h: f64, q: f64, xi: f64, corner: f64, shift: f64, opts: QuadOptions) -> Result<f64> {
    let d = c(corner, FRAC_PI_2);
    let slope = guarded(
        |t| {
            let w = d * t;
            Ok((hermite_factor(nu, q, w, shift)? * both_weights(xi, h, w) * d).im)
        },
        0.0,
        1.0,
        opts,
    )?;
    let mut acc = CompensatedSum::new();
    acc.add(slope);
    acc.add(hyp_scaled(nu, h, q, xi, corner, shift, opts)?);
    acc.add(hyp_scaled(nu, h, q, -xi, corner, shift, opts)?);
    Ok(acc.total())
}

/// `S_xi` along the straight path from 0 to `corner + i pi/2` and on to
/// `+inf + i pi/2`.
pub fn s_on_diagonal(nu: f64, h: f64, q: f64, xi: f64, corner: f64) -> Result<f64> {
    check(nu, h, q, corner)?;
    s_diagonal(nu, h, q, xi, corner, 0.0, QuadOptions::rel(REL_TOL))
}

/// `ln|c(nu, q)| + 1/(2q)` and the sign of `c`, where
/// `c = Gamma(nu+4) (2q)^{(nu+2)/2} / (2 pi (nu+1) e^{1/(2q)})`.
/// The `e^{-1/(2q)}` factor is applied to `H` instead.
fn ln_prefactor(nu: f64, q: f64) -> Result<(f64, f64)> {
    let lg = ln_gamma(real(nu + 4.0))?;
    // Gamma(nu+4) < 0 shows up as Im(ln Gamma) = odd multiple of pi
    let gamma_sign = if (lg.im / PI).round() as i64 % 2 == 0 {
        1.0
    } else {
        -1.0
    };
    let sign = gamma_sign * (nu + 1.0).signum();
    let ln = lg.re + 0.5 * (nu + 2.0) * (2.0 * q).ln() - (2.0 * PI * (nu + 1.0).abs()).ln();
    Ok((ln, sign))
}

struct Assembled {
    value: f64,
    s_nu_plus_2: f64,
    s_nu: f64,
}

fn assemble(nu: f64, h: f64, q: f64, path: Contour, ln_c: f64, sign: f64) -> Result<Assembled> {
    let shift = 0.5 / q;
    let floor = PRICE_FLOOR * (-ln_c).exp();
    let opts = QuadOptions::rel(REL_TOL).with_abs(floor);
    let s = |xi: f64| match path {
        Contour::Rectangle { rho } => s_rectangle(nu, h, q, xi, rho, shift, opts).map(|t| t.s_xi),
        Contour::Diagonal { corner } => s_diagonal(nu, h, q, xi, corner, shift, opts),
    };
    let s2 = s(nu + 2.0)?;
    let s0 = s(nu)?;
    let a = (ln_c + 2.0 * h * (nu + 1.0)).exp() * s2;
    let b = ln_c.exp() * s0;
    Ok(Assembled {
        value: sign * (a - b),
        s_nu_plus_2: s2,
        s_nu: s0,
    })
}

/// `C^(nu)(h, q)` by the Hermite-function representation.
///
/// With `rho = Some(r)` the path is split at `Re w = r` into the
/// trigonometric and hyperbolic terms. Near `r = 0` the hyperbolic terms
/// reach `exp(pi^2/(8h) - 1/(2q))` times the price and cancel; at `h = 0.01`
/// no split point keeps that below `e^20`.
///
/// `rho = None` integrates along the diagonal `0 -> (pi/2)(1 + i)` instead.
/// There `|c H E|` never exceeds the price scale: on the diagonal
/// `Re w^2 = 0` and `Re cosh(w)^2 <= 1`, and beyond the corner the weight
/// has already decayed.
///
/// The error estimate is the change of the price when the split point or
/// corner moves by [`RHO_PERTURBATION`]; the exact value does not depend on
/// either.
pub fn price_hermite(nu: f64, h: f64, q: f64, rho: Option<f64>) -> Result<PriceResult> {
    let path = match rho {
        Some(rho) => Contour::Rectangle { rho },
        None => Contour::Diagonal {
            corner: DIAGONAL_CORNER,
        },
    };
    price_hermite_on(nu, h, q, path)
}

/// [`price_hermite`] on an explicit path.
pub fn price_hermite_on(nu: f64, h: f64, q: f64, path: Contour) -> Result<PriceResult> {
    check(nu, h, q, path.split())?;
    if (nu + 1.0).abs() < 1e-6 {
        return Err(Error::InvalidInput(format!(
            "Hermite route is undefined at nu = -1 (got nu = {nu}); use the Laplace route"
        )));
    }
    let (ln_c, sign) = ln_prefactor(nu, q)?;
    let main = assemble(nu, h, q, path, ln_c, sign)?;
    let moved = assemble(nu, h, q, path.shifted(RHO_PERTURBATION), ln_c, sign)?;
    let mut out = PriceResult::new(main.value, Method::Hermite, (main.value - moved.value).abs())
        .with("contour", path.name())
        .with("prefactor_log10", (ln_c - 0.5 / q) / LN_10)
        .with("s_nu_plus_2_scaled", main.s_nu_plus_2)
        .with("s_nu_scaled", main.s_nu)
        .with("value_at_shifted_path", moved.value);
    out = match path {
        Contour::Rectangle { rho } => out.with("rho", rho),
        Contour::Diagonal { corner } => out.with("corner", corner),
    };
    Ok(out)
}
