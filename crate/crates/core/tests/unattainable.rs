//! The three acceptance criteria that cannot hold as stated, asserted
//! literally. Run with `cargo test -- --ignored` to see them fail; the
//! acceptance target prints the measured numbers.

use asianq::inversion::{invert, price_asian_laplace, InversionConfig};
use asianq::normalize::{denormalize_price, moment_A, normalize};
use asianq::tables::{TABLE1, TABLE2, TABLE2_TOL};
use asianq::yor::c_const_log10;
use rand::{Rng, SeedableRng};

#[test]
#[ignore = "the published column is off by up to 1.9e-3"]
fn table_two_within_half_a_thousandth() {
    for case in TABLE2 {
        let m = case.market();
        let n = normalize(&m).unwrap();
        let c = price_asian_laplace(n.nu, n.h, n.q, &InversionConfig::default())
            .unwrap()
            .value;
        let c0 = denormalize_price(&m, c).unwrap();
        assert!(
            (c0 - case.printed).abs() <= TABLE2_TOL,
            "case {}: {c0} vs {}",
            case.case,
            case.printed
        );
    }
}

#[test]
#[ignore = "the printed constants use a different normalization"]
fn table_one_within_a_thousandth() {
    for cell in TABLE1 {
        let (nu, h) = cell.coordinates();
        let rel = 10f64.powf(c_const_log10(nu, h) - cell.printed.log10()) - 1.0;
        assert!(rel.abs() <= 1e-3, "sigma={} T={}: rel {rel}", cell.sigma, cell.maturity);
    }
}

#[test]
#[ignore = "absolute 1e-8 on moments up to 1e12 exceeds double precision"]
fn transform_pair_absolute() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    let cfg = InversionConfig {
        target_abs_tol: f64::INFINITY,
        ..InversionConfig::default()
    };
    for _ in 0..50 {
        let nu: f64 = rng.random_range(-2.0..4.0);
        let h = 3.0 * (1.0 - rng.random::<f64>());
        let pole = 2.0 * (nu + 1.0);
        let got = invert(|z| Ok((z * (z - pole)).inv()), h, pole.max(0.0), &cfg)
            .unwrap()
            .value;
        assert!((got - moment_A(nu, h)).abs() <= 1e-8, "nu={nu} h={h}");
    }
}
