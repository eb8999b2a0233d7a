//! Numerical Bromwich inversion and the Laplace-route price
//! `C^(nu)(h, q) = L^{-1}(F_{GY,q})(h)`.

use crate::complexfn::{c, real, ComplexScalar};
use crate::error::{Error, Result};
use crate::result::{Method, PriceResult};
use crate::transform::{abscissa_of_convergence, f_gy};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Discretization parameter of the Euler contour. The aliasing error is
/// about `e^{-A}` relative and roundoff grows like `e^{A/2}`; 28 balances
/// the two in double precision.
pub const EULER_A: f64 = 28.0;
/// Binomial averaging depth of the Euler summation.
pub const EULER_M: usize = 11;
/// Fixed Talbot needs about 0.6 digits per node; beyond this roundoff wins.
pub const TALBOT_MAX_NODES: usize = 24;
/// Negative results down to this size are treated as roundoff and clipped.
pub const CLIP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InversionAlgorithm {
    EulerSummation,
    FixedTalbot,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InversionConfig {
    pub algorithm: InversionAlgorithm,
    pub terms: usize,
    /// Distance of the contour to the right of the abscissa. `None` picks
    /// `EULER_A / (2 t)`, which keeps the aliasing error near `e^{-A}`.
    pub contour_shift: Option<f64>,
    pub target_abs_tol: f64,
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self {
            algorithm: InversionAlgorithm::EulerSummation,
            terms: 80,
            contour_shift: None,
            target_abs_tol: 1e-8,
        }
    }
}

impl InversionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.terms < 10 {
            return Err(Error::InvalidInput(format!(
                "need at least 10 terms, got {}",
                self.terms
            )));
        }
        if let Some(s) = self.contour_shift {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidInput(format!("contour shift must be positive, got {s}")));
            }
        }
        if !(self.target_abs_tol > 0.0) {
            return Err(Error::InvalidInput("target tolerance must be positive".into()));
        }
        Ok(())
    }

    fn shift_for(&self, t: f64) -> f64 {
        self.contour_shift.unwrap_or(EULER_A / (2.0 * t))
    }
}

/// Inverse transform value with the estimated error
/// `|result(terms) - result(terms/2)|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inversion {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Bromwich inverse of `transform` at `t_eval`.
///
/// Fails with a non-convergence error when the estimate exceeds
/// `cfg.target_abs_tol`; [`invert_unchecked`] returns it regardless.
pub fn invert<F>(transform: F, t_eval: f64, abscissa: f64, cfg: &InversionConfig) -> Result<Inversion>
where
    F: Fn(ComplexScalar) -> Result<ComplexScalar>,
{
    let inv = invert_unchecked(transform, t_eval, abscissa, cfg)?;
    if !(inv.error_estimate <= cfg.target_abs_tol) {
        return Err(Error::NonConvergence {
            what: format!("Laplace inversion at t = {t_eval}"),
            estimate: inv.error_estimate,
            tolerance: cfg.target_abs_tol,
        });
    }
    Ok(inv)
}

pub fn invert_unchecked<F>(transform: F, t_eval: f64, abscissa: f64, cfg: &InversionConfig) -> Result<Inversion>
where
    F: Fn(ComplexScalar) -> Result<ComplexScalar>,
{
    cfg.validate()?;
    if !(t_eval > 0.0 && t_eval.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "inversion time must be positive, got {t_eval}"
        )));
    }
    match cfg.algorithm {
        InversionAlgorithm::EulerSummation => euler(&transform, t_eval, abscissa, cfg),
        InversionAlgorithm::FixedTalbot => talbot(&transform, t_eval, abscissa, cfg),
    }
}

fn euler<F>(transform: &F, t: f64, abscissa: f64, cfg: &InversionConfig) -> Result<Inversion>
where
    F: Fn(ComplexScalar) -> Result<ComplexScalar>,
{
    let sigma = abscissa + cfg.shift_for(t);
    let n = cfg.terms;
    // Re F on the vertical line, k = 0 ..= n + m. Conjugate symmetry lets the
    // real part stand in for the pair at +-k.
    let mut samples = Vec::with_capacity(n + EULER_M + 1);
    for k in 0..=n + EULER_M {
        let z = c(sigma, k as f64 * PI / t);
        samples.push(transform(z)?.re);
    }
    let scale = (sigma * t).exp() / t;
    let full = euler_sum(&samples, n) * scale;
    let half = euler_sum(&samples, n / 2) * scale;
    Ok(Inversion {
        value: full,
        error_estimate: (full - half).abs(),
        evaluations: samples.len(),
    })
}

// Binomially averaged partial sums s_n .. s_{n+m} of
// 1/2 a_0 + sum (-1)^k a_k.
fn euler_sum(samples: &[f64], n: usize) -> f64 {
    let mut partial = Vec::with_capacity(n + EULER_M + 1);
    let mut s = 0.5 * samples[0];
    partial.push(s);
    for (k, a) in samples.iter().enumerate().take(n + EULER_M + 1).skip(1) {
        s += if k % 2 == 0 { *a } else { -*a };
        partial.push(s);
    }
    let mut binom = 1.0;
    let mut acc = 0.0;
    for j in 0..=EULER_M {
        acc += binom * partial[n + j];
        binom = binom * (EULER_M - j) as f64 / (j + 1) as f64;
    }
    acc / 2f64.powi(EULER_M as i32)
}

fn talbot<F>(transform: &F, t: f64, abscissa: f64, cfg: &InversionConfig) -> Result<Inversion>
where
    F: Fn(ComplexScalar) -> Result<ComplexScalar>,
{
    if abscissa > 0.0 {
        return Err(Error::Domain(format!(
            "fixed Talbot contour would enter Re(z) < {abscissa}, where the transform is not known to exist"
        )));
    }
    let run = |m: usize| -> Result<f64> {
        let r = 2.0 * m as f64 / (5.0 * t);
        let mut acc = 0.5 * (transform(real(r))? * (r * t).exp()).re;
        for k in 1..m {
            let theta = k as f64 * PI / m as f64;
            let cot = 1.0 / theta.tan();
            let s = c(r * theta * cot, r * theta);
            let sig = theta + (theta * cot - 1.0) * cot;
            acc += ((s * t).exp() * transform(s)? * c(1.0, sig)).re;
        }
        Ok(acc * r / m as f64)
    };
    let m = cfg.terms.min(TALBOT_MAX_NODES);
    let full = run(m)?;
    let half = run(m / 2)?;
    Ok(Inversion {
        value: full,
        error_estimate: (full - half).abs(),
        evaluations: m + m / 2,
    })
}

/// `C^(nu)(h, q)` by inverting `F_{GY,q}` at `h`.
pub fn price_asian_laplace(nu: f64, h: f64, q: f64, cfg: &InversionConfig) -> Result<PriceResult> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::InvalidInput(format!("Laplace route needs q > 0, got {q}")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidInput(format!("Laplace route needs h > 0, got {h}")));
    }
    let abscissa = abscissa_of_convergence(real(nu));
    let inv = invert(|z| f_gy(nu, q, z), h, abscissa, cfg)?;
    let mut value = inv.value;
    let mut clipped = false;
    if value < 0.0 {
        if value >= -CLIP_TOL {
            value = 0.0;
            clipped = true;
        } else {
            return Err(Error::NonConvergence {
                what: format!("Laplace price came out negative ({:e})", inv.value),
                estimate: -inv.value,
                tolerance: CLIP_TOL,
            });
        }
    }
    Ok(PriceResult::new(value, Method::Laplace, inv.error_estimate)
        .with("clipped", clipped)
        .with("raw_value", inv.value)
        .with("abscissa", abscissa)
        .with("contour_real_part", abscissa + cfg.shift_for(h))
        .with("transform_evaluations", inv.evaluations)
        .with("algorithm", format!("{:?}", cfg.algorithm)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalize::{moment_A, price_nonpositive_q};

    fn cfg() -> InversionConfig {
        InversionConfig::default()
    }

    #[test]
    fn heaviside_and_ramp() {
        let one = invert(|z| Ok(z.inv()), 1.0, 0.0, &cfg()).unwrap();
        assert!((one.value - 1.0).abs() < 1e-10, "{}", one.value);
        let ramp = invert(|z| Ok((z * z).inv()), 3.0, 0.0, &cfg()).unwrap();
        assert!((ramp.value - 3.0).abs() < 1e-9, "{}", ramp.value);
    }

    #[test]
    fn mean_of_yor_process() {
        for &(nu, h) in &[(0.5f64, 0.7), (-0.6, 0.0625), (3.0, 0.01), (-1.7, 2.0)] {
            let pole = 2.0 * (nu + 1.0);
            let inv = invert(|z| Ok((z * (z - pole)).inv()), h, pole.max(0.0), &cfg()).unwrap();
            let want = moment_A(nu, h);
            assert!(
                (inv.value - want).abs() < 1e-8 * want.max(1.0),
                "nu={nu} h={h}: {} vs {want}",
                inv.value
            );
        }
    }

    #[test]
    fn talbot_refuses_positive_abscissa() {
        let c = InversionConfig {
            algorithm: InversionAlgorithm::FixedTalbot,
            ..cfg()
        };
        assert!(matches!(invert(|z| Ok(z.inv()), 1.0, 0.5, &c), Err(Error::Domain(_))));
        let v = invert(|z| Ok((z * z).inv()), 3.0, 0.0, &c).unwrap();
        assert!((v.value - 3.0).abs() < 1e-9);
    }

    #[test]
    fn config_validation() {
        assert!(InversionConfig { terms: 5, ..cfg() }.validate().is_err());
        assert!(InversionConfig {
            contour_shift: Some(0.0),
            ..cfg()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn table_three_row_by_inversion() {
        // sigma = 30%, r = 9%: nu = 1, h = q = 0.0225
        let p = price_asian_laplace(1.0, 0.0225, 0.0225, &cfg()).unwrap();
        assert!((p.value - 0.002_173_545_046_250_37).abs() < 1e-9, "{}", p.value);
    }

    #[test]
    fn continuity_at_zero_strike() {
        // Phi(., .; 1/(2q)) limits q to about 1e-3; there E[(q - A)^+] is
        // negligible and the price is E[A] - q.
        let (nu, h) = (-0.6, 0.0625);
        for q in [1e-3, 2e-3, 5e-3] {
            let p = price_asian_laplace(nu, h, q, &cfg()).unwrap();
            let lin = price_nonpositive_q(nu, h, 0.0).unwrap() - q;
            assert!((p.value - lin).abs() < 1e-6, "{} vs {lin}", p.value);
        }
        assert!(matches!(
            price_asian_laplace(nu, h, 1e-9, &cfg()),
            Err(Error::Overflow(_))
        ));
    }

    #[test]
    fn monotone_in_strike_and_time() {
        let nu = 0.4;
        let mut last = f64::INFINITY;
        for q in [0.02, 0.05, 0.1, 0.2] {
            let v = price_asian_laplace(nu, 0.1, q, &cfg()).unwrap().value;
            assert!(v < last);
            last = v;
        }
        let mut last = 0.0;
        for h in [0.02, 0.05, 0.1, 0.2] {
            let v = price_asian_laplace(nu, h, 0.05, &cfg()).unwrap().value;
            assert!(v > last);
            last = v;
        }
    }

    #[test]
    fn doubling_terms_within_estimate() {
        let a = price_asian_laplace(-0.6, 0.125, 0.125, &cfg()).unwrap();
        let b = price_asian_laplace(-0.6, 0.125, 0.125, &InversionConfig { terms: 160, ..cfg() }).unwrap();
        assert!((a.value - b.value).abs() <= a.error_estimate.max(1e-15f64));
    }

    #[test]
    fn rejects_nonpositive_strike() {
        assert!(price_asian_laplace(0.0, 0.1, 0.0, &cfg()).is_err());
    }
}
