//! Complex arithmetic and special functions used by the transform and
//! pricing layers: principal square root, log-gamma, modified Bessel `I`
//! of complex order, Kummer's confluent hypergeometric function, the
//! complementary error function of complex argument and Hermite functions
//! of complex degree.
//!
//! Every multivalued function here uses the principal branch; see
//! [`BranchPolicy`].

mod bessel;
mod erfc;
mod gamma;
mod hermite;
mod kummer;

pub use bessel::{bessel_i, bessel_i_scaled, BESSEL_SWITCH};
pub use erfc::{erfc_c, erfcx_c, faddeeva};
pub use gamma::{ln_gamma, recip_gamma};
pub use hermite::{hermite_h, hermite_h_integral, hermite_h_kummer, hermite_h_scaled};
pub use kummer::{kummer_phi, kummer_phi_complex};

use crate::error::{Error, Result};
pub use num_complex::Complex64;

/// Complex scalar used throughout the kernel.
pub type ComplexScalar = Complex64;

/// Marker documenting the branch conventions of this module.
///
/// The logarithm has its cut on the non-positive real axis with
/// `Im(log z)` in `(-pi, pi]`; powers and square roots inherit that cut.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BranchPolicy;

#[inline]
pub fn c(re: f64, im: f64) -> ComplexScalar {
    Complex64::new(re, im)
}

#[inline]
pub fn real(x: f64) -> ComplexScalar {
    Complex64::new(x, 0.0)
}

/// Reject NaN or infinite components.
pub fn ensure_finite(z: ComplexScalar, what: &str) -> Result<ComplexScalar> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::InvalidInput(format!("{what} must be finite, got {z}")))
    }
}

/// Principal square root: `Re >= 0`, and `Im > 0` on the negative real axis.
pub fn principal_sqrt(z: ComplexScalar) -> ComplexScalar {
    if z.re == 0.0 && z.im == 0.0 {
        return c(0.0, 0.0);
    }
    let r = z.norm();
    // Avoid cancellation in (r +- re) / 2 by computing the larger part first.
    let t = ((r + z.re.abs()) * 0.5).sqrt();
    if z.re >= 0.0 {
        c(t, z.im / (2.0 * t))
    } else {
        // On the negative real axis im may be -0.0; the convention puts the
        // root on the positive imaginary axis.
        let im = if z.im == 0.0 { t } else { t.copysign(z.im) };
        c(z.im.abs() / (2.0 * t), im)
    }
}

/// `mu(z) = sqrt(2 z + nu^2)` on the principal branch.
pub fn mu_of_z(nu: ComplexScalar, z: ComplexScalar) -> ComplexScalar {
    principal_sqrt(z * 2.0 + nu * nu)
}

/// True when `2 z + nu^2` lies on the closed negative real axis, where the
/// principal branch is discontinuous.
pub fn mu_on_branch_cut(nu: ComplexScalar, z: ComplexScalar) -> bool {
    let w = z * 2.0 + nu * nu;
    w.im == 0.0 && w.re <= 0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sqrt_examples() {
        assert_eq!(principal_sqrt(real(4.0)), real(2.0));
        assert_eq!(principal_sqrt(real(0.0)), real(0.0));
        assert_eq!(principal_sqrt(real(-1.0)), c(0.0, 1.0));
        assert_eq!(principal_sqrt(c(-1.0, -0.0)), c(0.0, 1.0));
        let s = principal_sqrt(c(-4.0, -1e-300));
        assert!(s.im < 0.0);
    }

    #[test]
    fn mu_examples() {
        assert_eq!(mu_of_z(real(0.0), real(2.0)), real(2.0));
        assert_eq!(mu_of_z(real(3.0), real(0.0)), real(3.0));
        assert!(mu_on_branch_cut(real(1.0), real(-1.0)));
        assert!(!mu_on_branch_cut(real(1.0), c(-1.0, 0.1)));
    }

    #[test]
    fn sqrt_squares_back_on_random_sample() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100_000 {
            let mag = 10f64.powf(rng.random_range(-8.0..8.0));
            let arg = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
            let z = Complex64::from_polar(mag, arg);
            let s = principal_sqrt(z);
            assert!(s.re >= 0.0);
            // 4 ulps of |z|
            assert!((s * s - z).norm() <= 4.0 * f64::EPSILON * z.norm(), "{z}");
        }
    }

    proptest! {
        // Re mu(z) > |Re nu| whenever |Im nu| <= eps and Re z > 2 eps^2.
        #[test]
        fn square_root_lemma(
            eps_idx in 0usize..4,
            nu_re in -20.0f64..20.0,
            nu_im_frac in -1.0f64..=1.0,
            z_re_excess in 1e-6f64..50.0,
            z_im in -100.0f64..100.0,
        ) {
            let eps = [0.0, 0.5, 1.0, 2.0][eps_idx];
            let nu = c(nu_re, nu_im_frac * eps);
            let z = c(2.0 * eps * eps + z_re_excess, z_im);
            let mu = mu_of_z(nu, z);
            prop_assert!(mu.re > nu.re.abs(), "nu={nu} z={z} mu={mu}");
        }
    }
}
