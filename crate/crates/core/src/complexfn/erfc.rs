use super::{c, ComplexScalar};
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::OnceLock;

// Weideman's rational series for the Faddeeva function; N = 40 keeps the
// relative error near 1e-14 over the range the pricing layer visits.
const N: usize = 40;

struct Weideman {
    l: f64,
    coef: [f64; N],
}

fn weideman() -> &'static Weideman {
    static TABLE: OnceLock<Weideman> = OnceLock::new();
    TABLE.get_or_init(|| {
        let m = 2 * N;
        let l = (N as f64 * FRAC_1_SQRT_2).sqrt();
        // samples of exp(-t^2)(L^2 + t^2) at t = L tan(theta/2)
        let samples: Vec<(f64, f64)> = (1..m as i64)
            .map(|k| {
                let theta = k as f64 * PI / m as f64;
                let t = l * (theta / 2.0).tan();
                (k as f64, (-t * t).exp() * (l * l + t * t))
            })
            .collect();
        let mut coef = [0.0; N];
        for (n, slot) in coef.iter_mut().enumerate() {
            let n = (n + 1) as f64;
            // k = 0 term plus the even pairs +-k, which leave only cosines
            let mut s = l * l;
            for &(k, f) in &samples {
                s += 2.0 * f * (PI * k * n / m as f64).cos();
            }
            *slot = s / (2 * m) as f64;
        }
        Weideman { l, coef }
    })
}

fn faddeeva_upper(z: ComplexScalar) -> ComplexScalar {
    let tab = weideman();
    let iz = c(-z.im, z.re);
    let den = c(tab.l, 0.0) - iz;
    let zz = (c(tab.l, 0.0) + iz) / den;
    let mut p = c(0.0, 0.0);
    for &a in tab.coef.iter().rev() {
        p = p * zz + a;
    }
    p * 2.0 / (den * den) + den.inv() / PI.sqrt()
}

/// Faddeeva function `w(z) = exp(-z^2) Erfc(-i z)`.
pub fn faddeeva(z: ComplexScalar) -> ComplexScalar {
    if z.im >= 0.0 {
        faddeeva_upper(z)
    } else {
        (-(z * z)).exp() * 2.0 - faddeeva_upper(-z)
    }
}

/// Scaled complementary error function `exp(z^2) Erfc(z)`.
///
/// Stays finite where `Erfc` underflows (large positive real part).
pub fn erfcx_c(z: ComplexScalar) -> ComplexScalar {
    if z.re >= 0.0 {
        faddeeva_upper(c(-z.im, z.re))
    } else {
        (z * z).exp() * 2.0 - faddeeva_upper(c(z.im, -z.re))
    }
}

/// Complementary error function of complex argument.
pub fn erfc_c(z: ComplexScalar) -> ComplexScalar {
    if z.re >= 0.0 {
        (-(z * z)).exp() * faddeeva_upper(c(-z.im, z.re))
    } else {
        c(2.0, 0.0) - erfc_c(-z)
    }
}
