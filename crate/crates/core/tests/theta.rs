use std::f64::consts::PI;

use num_complex::Complex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use siegel_core::cusps::{plane_stabilizer, IsotropicPlane};
use num_traits::ToPrimitive;
use siegel_core::exact::RationalMatrix;
use siegel_core::groups::*;
use siegel_core::real::DoubleDouble as Dd;
use siegel_core::theta::*;

fn c(re: f64, im: f64) -> Complex<Dd> {
    Complex::new(Dd::from(re), Dd::from(im))
}

fn point(t1: (f64, f64), t2: (f64, f64), t3: (f64, f64)) -> SiegelPoint<Dd> {
    SiegelPoint::new(c(t1.0, t1.1), c(t2.0, t2.1), c(t3.0, t3.1)).unwrap()
}

fn f(z: Complex<Dd>) -> Complex<f64> {
    Complex::new(z.re.hi() + z.re.lo(), z.im.hi() + z.im.lo())
}

/// Plain f64 summation of the genus 1 theta constant with characteristic
/// `(a/2, b/2)`.
fn oracle_1d(a: u8, b: u8, tau: Complex<f64>) -> Complex<f64> {
    let (a, b) = (a as f64 / 2.0, b as f64 / 2.0);
    (-60..=60)
        .map(|n| {
            let v = n as f64 + a;
            (Complex::new(0.0, PI) * (tau * v * v + 2.0 * v * b)).exp()
        })
        .sum()
}

fn rel(a: Complex<f64>, b: Complex<f64>) -> f64 {
    (a - b).norm() / b.norm()
}

const TOL: f64 = 1e-24;

#[test]
fn odd_constants_vanish_without_summation() {
    let tau = point((0.1, 1.2), (0.3, 0.2), (-0.4, 0.9));
    for ch in ThetaChar::all().into_iter().filter(|c| !c.is_even()) {
        let r = theta_constant(ch, &tau, TOL).unwrap();
        assert_eq!(r.terms, 0);
        assert_eq!(f(r.value), Complex::new(0.0, 0.0));
    }
}

#[test]
fn classical_constants() {
    let one_d = oracle_1d(0, 0, Complex::new(0.0, 1.0));
    assert!((one_d.re - 1.0864348112).abs() < 1e-10);
    let v = theta_constant(ThetaChar::new([0, 0], [0, 0]).unwrap(), &point((0., 1.), (0., 0.), (0., 1.)), TOL).unwrap();
    assert!((f(v.value) - one_d * one_d).norm() < 1e-14);
    assert!((f(v.value).re - 1.1803405990).abs() < 1e-10);
    let two = oracle_1d(0, 0, Complex::new(0.0, 2.0));
    let v = theta_constant(ThetaChar::new([0, 0], [0, 0]).unwrap(), &point((0., 2.), (0., 0.), (0., 2.)), TOL).unwrap();
    assert!((f(v.value) - two * two).norm() < 1e-14);
    let e = elliptic_theta(c(0.0, 1.0), c(0.0, 0.0), TOL).unwrap();
    assert!((f(e.value).re - 1.0864348112).abs() < 1e-10);
}

#[test]
fn diagonal_splitting() {
    let (t1, t3) = (Complex::new(0.3, 1.1), Complex::new(-0.2, 0.8));
    let tau = point((t1.re, t1.im), (0., 0.), (t3.re, t3.im));
    for ch in ThetaChar::all() {
        let [(a1, b1), (a2, b2)] = ch.split();
        let expected = oracle_1d(a1, b1, t1) * oracle_1d(a2, b2, t3);
        let got = f(theta_constant(ch, &tau, TOL).unwrap().value);
        assert!((got - expected).norm() < 1e-10, "{ch:?}");
        let one = f(elliptic_theta_char(a1, b1, c(t1.re, t1.im), TOL).unwrap().value);
        assert!((one - oracle_1d(a1, b1, t1)).norm() < 1e-12);
    }
}

#[test]
fn delta10_vanishes_on_the_diagonal() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..10 {
        let tau = point((rng.gen_range(-0.5..0.5), rng.gen_range(0.6..1.5)), (0., 0.), (rng.gen_range(-0.5..0.5), rng.gen_range(0.6..1.5)));
        let v = igusa_delta10(&tau, TOL).unwrap();
        assert!(f(v.value).norm() < TOL);
    }
}

fn base_point() -> SiegelPoint<Dd> {
    point((0.1, 1.1), (0.2, 0.3), (-0.3, 0.9))
}

#[test]
fn delta10_periodicity() {
    let tau = base_point();
    let base = f(igusa_delta10(&tau, TOL).unwrap().value);
    for s in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [2.0, -1.0, 3.0]] {
        let moved = tau.translate(s.map(Dd::from));
        assert!(rel(f(igusa_delta10(&moved, TOL).unwrap().value), base) < 1e-9);
    }
}

#[test]
fn delta10_modularity() {
    let tau = base_point();
    assert!(tau.min_imag_eigenvalue().hi() >= 0.5);
    let base = f(igusa_delta10(&tau, TOL).unwrap().value);
    let sp = GroupSpec::rational(1, 1, Flavor::Plain);
    for g in sample_members(&sp, 20, 2024).unwrap() {
        let v = slash(igusa_delta10, 10, &g, &tau, TOL).unwrap();
        assert!(rel(f(v.value), base) < 1e-8);
    }
}

#[test]
fn slash_identities_and_cocycle() {
    let tau = base_point();
    let d10 = igusa_delta10::<Dd>;
    let base = f(d10(&tau, TOL).unwrap().value);
    let id = RationalMatrix::identity(4);
    assert!(rel(f(slash(d10, 10, &id, &tau, TOL).unwrap().value), base) < 1e-28);
    assert!(rel(f(slash(d10, 10, &(-&id), &tau, TOL).unwrap().value), base) < 1e-28);
    // the cocycle holds for any weight, so use an odd one to make branch errors visible
    let sp = GroupSpec::rational(2, 1, Flavor::Plain);
    let gs = sample_members(&sp, 6, 3).unwrap();
    for w in gs.windows(2) {
        let (m1, m2) = (&w[0], &w[1]);
        let nested = slash(|t, tol| slash(d10, 3, m1, t, tol), 3, m2, &tau, 1e-12).unwrap();
        let direct = slash(d10, 3, &(m1 * m2), &tau, 1e-12).unwrap();
        assert!(rel(f(nested.value), f(direct.value)) < 1e-9);
    }
}

#[test]
fn f0_trivial_level() {
    let tau = base_point();
    let a = f0(&tau, 1, TOL).unwrap();
    let b = igusa_delta10(&tau, TOL).unwrap();
    assert_eq!(a.value, b.value);
}

#[test]
fn f0_modularity() {
    let tau = base_point();
    for (d, mu) in [(2, 6), (3, 12)] {
        let base = f(f0(&tau, d, 1e-20).unwrap().value);
        let weight = f0_weight(mu) as i32;
        for g in sample_members(&GroupSpec::rational(d, 1, Flavor::Plain), 10, 99).unwrap() {
            let v = slash(|t, tol| f0(t, d, tol), weight, &g, &tau, 1e-20).unwrap();
            assert!(rel(f(v.value), base) < 1e-7, "d={d}");
        }
    }
}

#[test]
fn f0_translation_invariance_on_the_stabilizer_lattice() {
    let tau = base_point();
    let base = f(f0(&tau, 2, 1e-20).unwrap().value);
    let report = plane_stabilizer(&IsotropicPlane::standard(), &GroupSpec::rational(2, 1, Flavor::Plain)).unwrap();
    for j in 0..3 {
        let s: [_; 3] = std::array::from_fn(|i| report.lattice[(i, j)].clone());
        let u = upper_unipotent(s.clone());
        let direct = tau.translate(s.map(|x| Dd::from(x.to_f64().unwrap())));
        let via_slash = f(slash(|t, tol| f0(t, 2, tol), 60, &u, &tau, 1e-20).unwrap().value);
        let moved = f(f0(&direct, 2, 1e-20).unwrap().value);
        assert!(rel(moved, base) < 1e-9);
        assert!(rel(via_slash, base) < 1e-9);
    }
}

#[test]
fn vanishing_order_is_two() {
    for (t1, t3) in [(c(0., 1.), c(0., 2.)), (c(0., 2.), c(0., 3.))] {
        let s = vanishing_order_diagonal(t1, t3, &default_eps_ladder(), 1e-28).unwrap();
        assert!((s.slope - 2.0).abs() < 0.05, "{s:?}");
        let total: f64 = ThetaChar::even()
            .into_iter()
            .map(|ch| vanishing_order_factor(ch, t1, t3, &default_eps_ladder(), 1e-28).unwrap().slope)
            .sum();
        assert!((total - s.slope).abs() < 1e-6);
        let odd_pair = ThetaChar::new([1, 1], [1, 1]).unwrap();
        let own = vanishing_order_factor(odd_pair, t1, t3, &default_eps_ladder(), 1e-28).unwrap();
        assert!((own.slope - 2.0).abs() < 0.05);
    }
}

#[test]
fn vanishing_order_rejects_bad_ladders() {
    assert!(vanishing_order_diagonal(c(0., 1.), c(0., 1.), &[0.1, 0.2], 1e-28).is_err());
    assert!(matches!(
        vanishing_order_diagonal(c(0., 1.), c(0., 1.), &[0.1, 0.01], 1e-28),
        Err(siegel_core::Error::Estimation(_))
    ));
}

#[test]
fn cusp_decay() {
    let base = point((0., 1.5), (0.2, 0.3), (0., 2.));
    let low: Vec<f64> = (2..=6).map(f64::from).collect();
    let high: Vec<f64> = (4..=8).map(f64::from).collect();
    let r = cusp_decay_rate(&base, &low, 1e-30).unwrap();
    assert!((r / (-2.0 * PI) - 1.0).abs() < 0.02, "{r}");
    let shifted = base.translate([Dd::from(0.0), Dd::from(1.0), Dd::from(0.0)]);
    let r2 = cusp_decay_rate(&shifted, &low, 1e-30).unwrap();
    assert!((r - r2).abs() < 1e-9);
    let r3 = cusp_decay_rate(&base, &high, 1e-30).unwrap();
    assert!((r3 / r - 1.0).abs() < 0.01);
}

#[test]
fn quasi_periodicity() {
    assert!(verify_formula3(c(0., 1.), c(0.3, 0.1), 1, 0).unwrap() < 1e-10);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let tau = c(rng.gen_range(-0.5..0.5), rng.gen_range(0.5..2.0));
        let z = c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        let (k, m) = (rng.gen_range(-3..=3), rng.gen_range(-3..=3));
        assert!(verify_formula3(tau, z, k, m).unwrap() < 1e-10);
        assert!(verify_formula3(tau, z, 0, m).unwrap() < 1e-25);
    }
}

#[test]
fn conormal_exponent_is_a_rescaled_theta_exponent() {
    for n in [1, 2, 3, 4, 5, 12] {
        assert!(exponent_identity_holds(n));
    }
    assert_eq!(conormal_shear_exponent(4)[0], siegel_core::exact::rat(-1, 4));
}

#[test]
fn backends_agree() {
    let dd = base_point();
    let lo = dd.to_f64();
    let a = f(igusa_delta10(&dd, TOL).unwrap().value);
    let b = igusa_delta10(&lo, 1e-10).unwrap().value;
    assert!(rel(b, a) < 1e-11);
}

#[test]
fn deterministic_across_threads() {
    let run = || f0(&base_point(), 2, 1e-20).unwrap().value;
    let here = run();
    let there = std::thread::spawn(run).join().unwrap();
    assert_eq!(here, there);
}

#[test]
fn conditioning_floor() {
    let thin = point((0., 1.0), (0., 0.0), (0., 5e-4));
    assert!(matches!(theta_constant(ThetaChar::even()[0], &thin, TOL), Err(siegel_core::Error::Conditioning(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn truncation_certificate(x1 in -0.5..0.5f64, y1 in 0.5..2.0f64, x2 in -0.5..0.5f64, y2 in -0.2..0.2f64,
                              x3 in -0.5..0.5f64, y3 in 0.5..2.0f64, idx in 0usize..10, tol_exp in 8i32..20) {
        let tau = point((x1, y1), (x2, y2), (x3, y3));
        prop_assume!(tau.min_imag_eigenvalue().hi() > 0.2);
        let tol = 10f64.powi(-tol_exp);
        let ch = ThetaChar::even()[idx];
        let coarse = theta_constant(ch, &tau, tol).unwrap();
        let fine = theta_constant(ch, &tau, tol / 100.0).unwrap();
        prop_assert!(coarse.error <= tol);
        prop_assert!((f(coarse.value) - f(fine.value)).norm() < coarse.error);
    }
}
