use num_complex::Complex64;
use proptest::prelude::*;
use tensor_moments::limitlaw::{
    contracted_law, density, density_by_inversion, law_moment_quadrature, moment, omega_c,
    stieltjes, LimitLaw, DEFAULT_ETA, RESIDUAL_TOL,
};

fn residual(p: usize, z: Complex64, r: Complex64) -> f64 {
    (z.powi(p as i32 - 2) * r.powi(p as i32) - z * r + 1.0).norm()
}

#[test]
fn semicircle_inversion_matches_closed_form() {
    let mut worst: f64 = 0.0;
    let mut y = -1.9;
    while y <= 1.9 + 1e-12 {
        let inv = density_by_inversion(2, y, DEFAULT_ETA).unwrap();
        let exact = (4.0 - y * y).sqrt() / (2.0 * std::f64::consts::PI);
        worst = worst.max((inv - exact).abs());
        y += 0.01;
    }
    assert!(worst < 1e-5, "sup gap {worst:e}");
}

#[test]
fn cubic_endpoint() {
    assert!((omega_c(3) - 2.598).abs() < 5e-4);
    assert_eq!(density(3, 2.6).unwrap(), 0.0);
    assert!(density(3, 2.59).unwrap() > 0.0);
}

#[test]
fn normalization_and_moments_by_quadrature() {
    for p in 2..=5 {
        for n in [0usize, 2, 4, 6] {
            let q = law_moment_quadrature(p, n).unwrap();
            let exact = moment(p, n) as f64;
            let tol = if p <= 3 { 1e-8 } else { 1e-4 } * exact.max(1.0);
            assert!((q - exact).abs() < tol, "p = {p}, n = {n}: {q} vs {exact}");
        }
        assert!(law_moment_quadrature(p, 3).unwrap().abs() < 1e-6);
    }
}

#[test]
fn density_is_symmetric() {
    for p in 2..=5 {
        for y in [0.1, 0.7, 1.3, 1.9] {
            let a = density(p, y).unwrap();
            let b = density(p, -y).unwrap();
            assert!((a - b).abs() < 1e-8 * (1.0 + a), "p = {p}, y = {y}");
        }
    }
}

#[test]
fn top_depth_support_after_renormalization() {
    // with the extra factor p the support of the depth p−2 law is 2/√(p(p−1))
    for p in 3..=9 {
        let c = contracted_law(p, p - 2).unwrap();
        let (num, den) = c.support_squared_exact();
        assert_eq!(num * (p as u128 - 1), 4 * den, "p = {p}");
        let renormalized = c.support() / (p as f64).sqrt();
        assert!((renormalized - 2.0 / ((p * (p - 1)) as f64).sqrt()).abs() < 1e-14);
    }
}

#[test]
fn contracted_support_matches_dilated_endpoint() {
    for p in 3..=7 {
        for k in 0..=p - 2 {
            let c = contracted_law(p, k).unwrap();
            let (num, den) = c.support_squared_exact();
            let s2 = num as f64 / den as f64;
            assert!(
                (c.support().powi(2) - s2).abs() < 1e-12 * s2,
                "p = {p}, k = {k}"
            );
        }
    }
}

#[test]
fn dilated_density_integrates_to_one() {
    let c = contracted_law(4, 1).unwrap();
    let s = c.support();
    let f = |y: f64| c.density(y).unwrap().min(1e300);
    let total = quadrature::integrate(f, -s, 0.0, 1e-10).integral
        + quadrature::integrate(f, 0.0, s, 1e-10).integral;
    assert!((total - 1.0).abs() < 1e-8, "{total}");
}

#[test]
fn stieltjes_is_conjugate_symmetric_and_matches_dilation() {
    let z = Complex64::new(0.8, 0.3);
    let a = stieltjes(4, z).unwrap();
    let b = stieltjes(4, z.conj()).unwrap();
    assert!((a - b.conj()).norm() < 1e-12);
    let law = LimitLaw {
        p: 3,
        dilation: 2.0,
    };
    let direct = law.stieltjes(z).unwrap();
    assert!((direct - 2.0 * stieltjes(3, 2.0 * z).unwrap()).norm() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn residual_and_branch(p in 2usize..7, re in -4.0f64..4.0, im in 1e-4f64..3.0) {
        let z = Complex64::new(re, im);
        let r = stieltjes(p, z).unwrap();
        prop_assert!(residual(p, z, r) < RESIDUAL_TOL);
        prop_assert!(r.im < 0.0);
    }

    #[test]
    fn real_axis_outside_support(p in 2usize..7, gap in 1e-3f64..5.0, neg in any::<bool>()) {
        let x = (omega_c(p) + gap) * if neg { -1.0 } else { 1.0 };
        let r = stieltjes(p, Complex64::new(x, 0.0)).unwrap();
        prop_assert!(r.im.abs() < 1e-12);
        prop_assert!(r.re * x > 0.0);
    }
}
