//! The triple-integral representation
//! `C = c ∫_0^∞ x^nu ∫_0^∞ e^{-(1+x^2) y/2} (1/y - q)^+ psi_{xy}(h) dy dx`
//! and its normalizing constant `c_{nu,h}`.
//!
//! `c_{nu,h}` carries `e^{pi^2/(2h)}` (about 10^213 at h = 0.01) and `psi`
//! is correspondingly tiny, so both live in log space here. Even so the
//! representation only delivers three digits for `h` above roughly 0.05;
//! below [`PRACTICAL_MIN_H`] it is refused outright.

use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_with_breaks, uniform_breaks, QuadOptions};
use serde::{Deserialize, Serialize};
use std::cell::Cell;
use std::f64::consts::{LN_10, PI};

/// Smallest `h` the triple integral is attempted for.
pub const PRACTICAL_MIN_H: f64 = 0.02;
/// Relative accuracy the route must reach before it reports a price.
pub const TARGET_REL: f64 = 1e-3;
const LEVEL_REL: f64 = 1e-9;
// psi~ values within this factor of its rounding noise are treated as noise
const NOISE_MARGIN: f64 = 100.0;
const MAX_PANELS: usize = 4000;

/// Outcome of [`price_yor_triple`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleIntegralReport {
    /// `log10 c_{nu,h}` as stated for the representation.
    pub c_log10: f64,
    /// `log10` of the constant actually multiplying the integral, `pi c_{nu,h}`.
    pub normaliser_log10: f64,
    /// The double integral of `psi`, `exp(integral_ln)`.
    pub integral_value: f64,
    pub integral_ln: f64,
    /// `exp(ln(pi c) + integral_ln)`.
    pub price: f64,
    pub inner_psi_evals: usize,
    pub estimated_rel_error: f64,
    /// Support `[a_lo, a_max]` of the outer integral in `a = x y`.
    pub a_range: (f64, f64),
}

/// `log10 c_{nu,h}` with `c_{nu,h} = e^{pi^2/(2h) - nu^2 h/2} / (pi sqrt(2 pi^3 h))`.
pub fn c_const_log10(nu: f64, h: f64) -> f64 {
    ln_c(nu, h) / LN_10
}

fn ln_c(nu: f64, h: f64) -> f64 {
    PI * PI / (2.0 * h) - 0.5 * nu * nu * h - PI.ln() - 0.5 * (2.0 * PI.powi(3) * h).ln()
}

/// `e^{pi^2/(2h)} psi_a(h)` with its absolute rounding noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledPsi {
    pub value: f64,
    pub noise: f64,
    pub evaluations: usize,
}

/// Rounding noise of [`psi_scaled`]: a few ulps of `∫ |integrand|`, which is
/// `e^{pi^2/(8h)} sqrt(pi h/2) e^{h/2}`.
pub fn psi_noise(h: f64) -> f64 {
    let l1 = (PI * PI / (8.0 * h)).exp() * (0.5 * PI * h).sqrt() * (0.5 * h).exp();
    50.0 * f64::EPSILON * l1
}

/// `e^{pi^2/(2h)} psi_a(h)`, integrated on the line `Im w = pi/2`.
///
/// With `w = v + i pi/2` the Gaussian `e^{-(w - i pi)^2/(2h)}` and the factor
/// `e^{-a cosh w} = e^{-i a sinh v}` leave
/// `∫_0^∞ e^{-(v^2 - pi^2/4)/(2h)} cosh(v) cos(pi v/(2h) - a sinh v) dv`;
/// the piece along the imaginary axis is real and drops out. The integrand
/// peaks at `e^{pi^2/(8h)}`, which bounds the attainable absolute accuracy.
pub fn psi_scaled(a: f64, h: f64) -> Result<ScaledPsi> {
    check_psi(a, h)?;
    let noise = psi_noise(h);
    let v_max = h + (h * h + 80.0 * h).sqrt();
    let phase = |v: f64| PI * v / (2.0 * h) - a * v.sinh();
    let turns = (phase(v_max).abs() + PI * v_max / (2.0 * h)) / PI;
    let pieces = (turns.ceil() as usize / 2 + 1).min(MAX_PANELS / 4);
    let r = integrate_with_breaks(
        |v: f64| (-(v * v - PI * PI / 4.0) / (2.0 * h)).exp() * v.cosh() * phase(v).cos(),
        &uniform_breaks(0.0, v_max, pieces),
        QuadOptions {
            max_panels: MAX_PANELS,
            ..QuadOptions::rel(LEVEL_REL).with_abs(noise)
        },
    )?;
    Ok(ScaledPsi {
        value: r.value,
        noise,
        evaluations: r.evaluations,
    })
}

fn check_psi(a: f64, h: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidInput(format!("a must be positive, got {a}")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidInput(format!("h must be positive, got {h}")));
    }
    Ok(())
}

/// `psi_a(h) = ∫_0^∞ e^{-w^2/(2h)} e^{-a cosh w} sinh(w) sin(pi w/h) dw`.
///
/// For `a > 3 pi^2/(8h)` the real-axis integrand is already below the
/// contour's noise floor and is integrated directly; otherwise the value is
/// `e^{-pi^2/(2h)}` times [`psi_scaled`], which underflows to 0 once
/// `h` drops below about 0.016.
pub fn psi(a: f64, h: f64) -> Result<f64> {
    check_psi(a, h)?;
    if a > 3.0 * PI * PI / (8.0 * h) {
        // e^{-a(cosh w - 1)} or the Gaussian is below 1e-300 beyond w_max
        let w_max = (1380.0 * h).sqrt().min((1.0 + 700.0 / a).acosh());
        let pieces = ((w_max / h).ceil() as usize).clamp(1, MAX_PANELS / 4);
        let r = integrate_with_breaks(
            |w: f64| (-w * w / (2.0 * h) - a * w.cosh()).exp() * w.sinh() * (PI * w / h).sin(),
            &uniform_breaks(0.0, w_max, pieces),
            QuadOptions {
                max_panels: MAX_PANELS,
                ..QuadOptions::rel(LEVEL_REL)
            },
        )?;
        return Ok(r.value);
    }
    Ok((-PI * PI / (2.0 * h)).exp() * psi_scaled(a, h)?.value)
}

/// `W(a) = ∫_0^{1/q} (1/y - q) e^{-y/2 - a^2/(2y)} y^{-nu-1} dy`, the inner
/// integral once `a = x y` replaces `x`.
pub fn payoff_weight(nu: f64, q: f64, a: f64) -> Result<f64> {
    let top = 1.0 / q;
    let f = |y: f64| {
        if y <= 0.0 {
            return 0.0;
        }
        (1.0 / y - q) * (-0.5 * y - a * a / (2.0 * y) - (nu + 1.0) * y.ln()).exp()
    };
    let mut breaks = vec![0.0];
    // e^{-a^2/(2y)} y^{-nu-2} peaks at a^2 / (2(nu+2))
    for x in [a * a / (2.0 * (nu + 2.0)).max(1e-300), a] {
        if x > 0.0 && x < top && x.is_finite() {
            breaks.push(x);
        }
    }
    breaks.push(top);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    Ok(integrate_with_breaks(f, &breaks, QuadOptions::rel(LEVEL_REL))?.value)
}

/// Normalized price through the triple integral.
///
/// Substituting `a = x y` turns the triple integral into
/// `∫_0^∞ a^nu W(a) psi_a(h) da`, so `psi` is needed once per outer node
/// instead of once per `(x, y)` pair. The integrand is below
/// `e^{a - a^2 q/2 - 1/(2q)}`, which fixes the upper end; at the lower end
/// `psi` vanishes faster than any power and the range is cut where it
/// drops into its own rounding noise.
///
/// The constant multiplying the integral is `pi c_{nu,h}`; with `c_{nu,h}`
/// alone the result is low by exactly that factor of `pi`.
pub fn price_yor_triple(nu: f64, h: f64, q: f64) -> Result<TripleIntegralReport> {
    if !nu.is_finite() {
        return Err(Error::InvalidInput(format!("nu must be finite, got {nu}")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidInput(format!("h must be positive, got {h}")));
    }
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::InvalidInput(format!("the triple integral needs q > 0, got {q}")));
    }
    if h < PRACTICAL_MIN_H {
        return Err(Error::Practicality(format!(
            "h = {h} is below {PRACTICAL_MIN_H}: c_(nu,h) = 10^{:.1} would need the integral to {:.0} digits",
            c_const_log10(nu, h),
            c_const_log10(nu, h) + 16.0
        )));
    }
    let evals = Cell::new(0usize);
    let failure = Cell::new(None::<Error>);
    let psi_t = |a: f64| match psi_scaled(a, h) {
        Ok(p) => {
            evals.set(evals.get() + p.evaluations);
            p.value
        }
        Err(e) => {
            if failure.take().is_none() {
                failure.set(Some(e));
            }
            f64::NAN
        }
    };
    let weight = |a: f64| match payoff_weight(nu, q, a) {
        Ok(w) => a.powf(nu) * w,
        Err(e) => {
            failure.set(Some(e));
            f64::NAN
        }
    };
    let noise = psi_noise(h);
    let a_max = 1.0 / q + (80.0 / q).sqrt();

    // walk down from the bulk until psi~ sinks into its noise
    let mut a_lo = (1.0 / q).min(0.5 * a_max);
    while a_lo > 1e-8 && psi_t(a_lo) > NOISE_MARGIN * noise {
        a_lo *= 0.8;
    }
    let breaks = uniform_breaks(a_lo, a_max, 32);
    let noise_mass = integrate_with_breaks(weight, &breaks, QuadOptions::rel(1e-4))?.value * noise;
    let outer = integrate_with_breaks(
        |a: f64| weight(a) * psi_t(a),
        &breaks,
        QuadOptions {
            max_panels: MAX_PANELS,
            ..QuadOptions::rel(LEVEL_REL).with_abs(noise_mass)
        },
    );
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let outer = outer?;
    // below a_lo psi~ < NOISE_MARGIN * noise and falls off super-polynomially
    let cut = integrate(weight, 0.5 * a_lo, a_lo, QuadOptions::rel(1e-3))?.value * NOISE_MARGIN * noise;
    let value = outer.value;
    let abs_err = outer.abs_error + noise_mass + cut;
    let rel = if value > 0.0 { abs_err / value } else { f64::INFINITY };
    if rel > TARGET_REL {
        return Err(Error::NonConvergence {
            what: format!("triple integral at h = {h} (rounding noise of psi dominates)"),
            estimate: rel,
            tolerance: TARGET_REL,
        });
    }
    let shift = PI * PI / (2.0 * h);
    let integral_ln = value.ln() - shift;
    let normaliser_ln = ln_c(nu, h) + PI.ln();
    Ok(TripleIntegralReport {
        c_log10: c_const_log10(nu, h),
        normaliser_log10: normaliser_ln / LN_10,
        integral_value: integral_ln.exp(),
        integral_ln,
        price: (normaliser_ln + integral_ln).exp(),
        inner_psi_evals: evals.get(),
        estimated_rel_error: rel,
        a_range: (a_lo, a_max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let dx = (b - a) / n as f64;
        let inner: f64 = (1..n).map(|i| f(a + i as f64 * dx)).sum();
        dx * (0.5 * (f(a) + f(b)) + inner)
    }

    #[test]
    fn constant_in_log_space() {
        // nu = 0 drops the drift term
        let h = 0.05;
        let want = (PI * PI / (2.0 * h) - PI.ln() - 0.5 * (2.0 * PI.powi(3) * h).ln()) / LN_10;
        assert!((c_const_log10(0.0, h) - want).abs() < 1e-13);
        // h = 0.001 would overflow any direct evaluation
        assert!(c_const_log10(1.5, 0.001).is_finite());
        assert!((c_const_log10(1.5, 0.01) - c_const_log10(-1.5, 0.01)).abs() < 1e-15);
    }

    #[test]
    fn psi_against_trapezoid() {
        let (a, h) = (1.0, 1.0);
        let f = |w: f64| (-w * w / (2.0 * h) - a * w.cosh()).exp() * w.sinh() * (PI * w / h).sin();
        let oracle = trapezoid(f, 0.0, 12.0, 1_000_000);
        let got = psi(a, h).unwrap();
        assert!((got - oracle).abs() < 1e-6 * oracle.abs(), "{got} vs {oracle}");
    }

    #[test]
    fn contour_and_real_axis_agree() {
        // moderate h: the real-axis integral still has enough digits
        let h = 0.5;
        for a in [0.5, 2.0, 6.0] {
            let f = |w: f64| (-w * w / (2.0 * h) - a * w.cosh()).exp() * w.sinh() * (PI * w / h).sin();
            let direct = integrate_with_breaks(f, &uniform_breaks(0.0, 8.0, 64), QuadOptions::rel(1e-13))
                .unwrap()
                .value;
            let contour = psi(a, h).unwrap();
            assert!(
                (contour - direct).abs() < 1e-9 * direct.abs().max(1e-12),
                "a={a}: {contour} vs {direct}"
            );
        }
    }

    #[test]
    fn psi_crushed_for_large_a() {
        for a in [500.0, 2000.0] {
            assert!(psi(a, 0.1).unwrap().abs() < 1e-200);
            assert!(psi(a, 1.0).unwrap().abs() < 1e-200);
        }
    }

    #[test]
    fn psi_converges_for_small_h() {
        // far below double range: the contour value underflows cleanly
        let v = psi(1.0, 0.005).unwrap();
        assert!(v.abs() < 1e-300);
        let s = psi_scaled(1.0, 0.005).unwrap();
        assert!(s.value.is_finite() && s.noise.is_finite());
    }

    #[test]
    fn psi_is_nonnegative() {
        let h = 0.125;
        for a in [2.0, 5.0, 10.0, 20.0] {
            let s = psi_scaled(a, h).unwrap();
            assert!(s.value > -10.0 * s.noise, "a={a}: {}", s.value);
        }
    }

    #[test]
    fn payoff_weight_vanishes_beyond_support() {
        // (1/y - q)^+ on (0, 1/q): larger q shrinks the weight
        let a = 3.0;
        let w1 = payoff_weight(-0.6, 0.05, a).unwrap();
        let w2 = payoff_weight(-0.6, 0.1, a).unwrap();
        assert!(w1 > w2 && w2 > 0.0);
        assert!(payoff_weight(-0.6, 1e6, a).unwrap() < 1e-300);
    }

    #[test]
    fn practicality_floor() {
        assert!(matches!(
            price_yor_triple(-0.6, 0.01, 0.01),
            Err(Error::Practicality(_))
        ));
        assert!(matches!(
            price_yor_triple(1.5, 0.0199, 0.02),
            Err(Error::Practicality(_))
        ));
    }

    #[test]
    fn log_space_composition() {
        let r = price_yor_triple(-0.6, 0.125, 0.125).unwrap();
        let again = (r.normaliser_log10 * LN_10 + r.integral_ln).exp();
        assert_eq!(again.to_bits(), r.price.to_bits());
        assert!((r.normaliser_log10 - r.c_log10 - PI.log10()).abs() < 1e-12);
        assert!(r.price > 0.0);
    }

    #[test]
    fn decreasing_in_strike() {
        let h = 0.125;
        let prices: Vec<f64> = [0.08, 0.125, 0.2]
            .iter()
            .map(|&q| price_yor_triple(-0.6, h, q).unwrap().price)
            .collect();
        assert!(prices[0] > prices[1] && prices[1] > prices[2], "{prices:?}");
    }

    #[test]
    fn deep_out_of_the_money_goes_to_zero() {
        let r = price_yor_triple(-0.6, 0.125, 5.0);
        match r {
            Ok(r) => assert!(r.price < 1e-12, "{}", r.price),
            // the integral may sink into psi's noise before it is resolved
            Err(e) => assert!(matches!(e, Error::NonConvergence { .. }), "{e}"),
        }
    }
}
