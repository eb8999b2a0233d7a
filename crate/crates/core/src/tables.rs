//! Published benchmark values and the market inputs behind them.

use crate::normalize::MarketParams;
use serde::{Deserialize, Serialize};

/// A number too large for `f64`, as `mantissa * 10^exp10` with `1 <= |mantissa| < 10`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scientific {
    pub mantissa: f64,
    pub exp10: i64,
}

impl Scientific {
    pub fn from_log10(l: f64) -> Self {
        let e = l.floor();
        Self {
            mantissa: 10f64.powf(l - e),
            exp10: e as i64,
        }
    }

    pub fn log10(&self) -> f64 {
        self.mantissa.log10() + self.exp10 as f64
    }
}

impl std::fmt::Display for Scientific {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.3}e{}", self.mantissa, self.exp10)
    }
}

/// Rate used for the `c_{nu,h}` table, with `t0 = 0` and carry equal to `r`.
pub const TABLE1_R: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table1Cell {
    pub sigma: f64,
    pub maturity: f64,
    pub printed: Scientific,
}

impl Table1Cell {
    /// `(nu, h)` of the cell.
    pub fn coordinates(&self) -> (f64, f64) {
        let s2 = self.sigma * self.sigma;
        (2.0 * TABLE1_R / s2 - 1.0, 0.25 * s2 * self.maturity)
    }
}

const fn sci(mantissa: f64, exp10: i64) -> Scientific {
    Scientific { mantissa, exp10 }
}

pub const TABLE1: [Table1Cell; 6] = [
    Table1Cell {
        sigma: 0.2,
        maturity: 1.0,
        printed: sci(2.627, 213),
    },
    Table1Cell {
        sigma: 0.3,
        maturity: 1.0,
        printed: sci(2.265, 94),
    },
    Table1Cell {
        sigma: 0.4,
        maturity: 1.0,
        printed: sci(4.816, 52),
    },
    Table1Cell {
        sigma: 0.2,
        maturity: 0.5,
        printed: sci(7.686, 427),
    },
    Table1Cell {
        sigma: 0.3,
        maturity: 0.5,
        printed: sci(5.717, 189),
    },
    Table1Cell {
        sigma: 0.4,
        maturity: 0.5,
        printed: sci(2.583, 106),
    },
];

/// Strike shared by the seven Laplace-inversion cases.
pub const TABLE2_STRIKE: f64 = 2.0;
/// Half-width of the printed precision of the seven cases.
pub const TABLE2_TOL: f64 = 5e-4;

/// How the `2C` column relates to the normalized price.
pub const TABLE2_SCALING: &str =
    "column value = market price C_0 = e^{-rT}/T * 4 S0/sigma^2 * C(h,q) with K = 2 and the row's S0; \
     the '2' is the strike/spot level of the contracts, not a factor on the normalized price";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table2Case {
    pub case: u8,
    pub r: f64,
    pub sigma: f64,
    pub maturity: f64,
    pub spot: f64,
    pub printed: f64,
}

impl Table2Case {
    pub fn market(&self) -> MarketParams {
        MarketParams::fresh(self.r, 0.0, self.sigma, self.maturity, TABLE2_STRIKE, self.spot)
    }
}

const fn case(case: u8, r: f64, sigma: f64, maturity: f64, spot: f64, printed: f64) -> Table2Case {
    Table2Case {
        case,
        r,
        sigma,
        maturity,
        spot,
        printed,
    }
}

pub const TABLE2: [Table2Case; 7] = [
    case(1, 0.02, 0.10, 1.0, 2.0, 0.056),
    case(2, 0.18, 0.30, 1.0, 2.0, 0.219),
    case(3, 0.0125, 0.25, 2.0, 2.0, 0.172),
    case(4, 0.05, 0.50, 1.0, 1.9, 0.194),
    case(5, 0.05, 0.50, 1.0, 2.0, 0.247),
    case(6, 0.05, 0.50, 1.0, 2.1, 0.307),
    case(7, 0.05, 0.50, 2.0, 2.0, 0.352),
];

/// At-the-money, one year, `r = 9%`.
pub const TABLE3_R: f64 = 0.09;
pub const TABLE3_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table3Row {
    pub sigma: f64,
    pub printed: f64,
}

impl Table3Row {
    pub fn market(&self) -> MarketParams {
        MarketParams::fresh(TABLE3_R, 0.0, self.sigma, 1.0, 2.0, 2.0)
    }
}

pub const TABLE3: [Table3Row; 4] = [
    Table3Row {
        sigma: 0.2,
        printed: 0.00074155998788343,
    },
    Table3Row {
        sigma: 0.3,
        printed: 0.00217354504625037,
    },
    Table3Row {
        sigma: 0.4,
        printed: 0.00478100328341654,
    },
    Table3Row {
        sigma: 0.5,
        printed: 0.00890942045213227,
    },
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalize::normalize;

    #[test]
    fn scientific_round_trip() {
        let s = Scientific::from_log10(213.4194);
        assert_eq!(s.exp10, 213);
        assert!((s.log10() - 213.4194).abs() < 1e-12);
        assert_eq!(sci(2.627, 213).to_string(), "2.627e213");
    }

    #[test]
    fn table_coordinates() {
        let (nu, h) = TABLE1[5].coordinates();
        assert!((nu + 0.375).abs() < 1e-12 && (h - 0.02).abs() < 1e-12);
        let n = normalize(&TABLE3[0].market()).unwrap();
        assert!((n.nu - 3.5).abs() < 1e-12 && (n.h - 0.01).abs() < 1e-15 && (n.q - n.h).abs() < 1e-15);
        let n = normalize(&TABLE2[3].market()).unwrap();
        assert!((n.nu + 0.6).abs() < 1e-12 && (n.k - 2.0 / 1.9).abs() < 1e-15);
    }
}
