//! Market inputs, the normalized coordinates `(nu, h, q, k, q*)`, and the
//! closed-form price for a non-positive normalized strike.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Contract and market inputs, in years and currency units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    pub r: f64,
    pub delta: f64,
    pub sigma: f64,
    /// Start of the averaging window.
    pub t0: f64,
    /// Valuation time.
    pub t: f64,
    /// Maturity `T`.
    pub maturity: f64,
    pub strike: f64,
    pub spot: f64,
    /// `int_{t0}^{t} S_u du`, already observed.
    pub accrued: f64,
    /// Replaces `r - delta` as the risk-neutral drift when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carry_override: Option<f64>,
}

impl MarketParams {
    /// Fresh contract: `t = t0 = 0`, nothing accrued.
    pub fn fresh(r: f64, delta: f64, sigma: f64, maturity: f64, strike: f64, spot: f64) -> Self {
        Self {
            r,
            delta,
            sigma,
            t0: 0.0,
            t: 0.0,
            maturity,
            strike,
            spot,
            accrued: 0.0,
            carry_override: None,
        }
    }

    /// Drift of the underlying under the pricing measure.
    pub fn carry(&self) -> f64 {
        self.carry_override.unwrap_or(self.r - self.delta)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("r", self.r),
            ("delta", self.delta),
            ("sigma", self.sigma),
            ("t0", self.t0),
            ("t", self.t),
            ("T", self.maturity),
            ("strike", self.strike),
            ("spot", self.spot),
            ("accrued", self.accrued),
        ];
        if let Some((name, v)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("{name} must be finite, got {v}")));
        }
        if let Some(c) = self.carry_override {
            if !c.is_finite() {
                return Err(Error::InvalidInput(format!("carry override must be finite, got {c}")));
            }
        }
        if !(self.sigma > 0.0) {
            return Err(Error::InvalidInput(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if !(self.spot > 0.0) {
            return Err(Error::InvalidInput(format!("spot must be positive, got {}", self.spot)));
        }
        if !(self.t0 <= self.t && self.t < self.maturity) {
            return Err(Error::InvalidInput(format!(
                "need t0 <= t < T, got t0={}, t={}, T={}",
                self.t0, self.t, self.maturity
            )));
        }
        if self.accrued < 0.0 {
            return Err(Error::InvalidInput(format!(
                "accrued average must be >= 0, got {}",
                self.accrued
            )));
        }
        if self.t == self.t0 && self.accrued != 0.0 {
            return Err(Error::InvalidInput("accrued must be 0 when t = t0".into()));
        }
        Ok(())
    }
}

/// Dimensionless coordinates of the normalized price `C^(nu)(h, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedParams {
    pub nu: f64,
    pub h: f64,
    pub q: f64,
    pub k: f64,
    pub q_star: f64,
}

pub fn normalize(m: &MarketParams) -> Result<NormalizedParams> {
    m.validate()?;
    let s2 = m.sigma * m.sigma;
    let nu = 2.0 * m.carry() / s2 - 1.0;
    let h = 0.25 * s2 * (m.maturity - m.t);
    let k = m.strike / m.spot;
    let q_star = s2 / (4.0 * m.spot) * (m.strike * (m.t - m.t0) - m.accrued);
    Ok(NormalizedParams {
        nu,
        h,
        q: k * h + q_star,
        k,
        q_star,
    })
}

/// `C_t = e^{-r(T-t)} / (T - t0) * 4 S_t / sigma^2 * C^(nu)`.
pub fn denormalize_price(m: &MarketParams, c_norm: f64) -> Result<f64> {
    if m.maturity == m.t0 {
        return Err(Error::InvalidInput("T must differ from t0".into()));
    }
    if !(c_norm >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "normalized price must be >= 0, got {c_norm}"
        )));
    }
    let disc = (-m.r * (m.maturity - m.t)).exp();
    Ok(disc / (m.maturity - m.t0) * 4.0 * m.spot / (m.sigma * m.sigma) * c_norm)
}

/// `E[A_h^(nu)] = (e^{2h(nu+1)} - 1) / (2(nu+1))`, equal to `h` at `nu = -1`.
#[allow(non_snake_case)]
pub fn moment_A(nu: f64, h: f64) -> f64 {
    let eps = nu + 1.0;
    if (2.0 * eps).abs() < 1e-10 {
        // second-order expansion around the removable singularity
        return h * (1.0 + h * eps + 2.0 / 3.0 * (h * eps).powi(2));
    }
    (2.0 * h * eps).exp_m1() / (2.0 * eps)
}

/// `C^(nu)(h, q) = E[A_h] - q` when `q <= 0`: the payoff is linear.
pub fn price_nonpositive_q(nu: f64, h: f64, q: f64) -> Result<f64> {
    if q > 0.0 {
        return Err(Error::InvalidInput(format!("closed form needs q <= 0, got {q}")));
    }
    if !(h >= 0.0) {
        return Err(Error::InvalidInput(format!("h must be >= 0, got {h}")));
    }
    Ok(moment_A(nu, h) - q)
}
