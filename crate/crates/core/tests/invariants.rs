use num_integer::Integer;
use proptest::prelude::*;
use siegel_core::exact::{rat, rint};
use siegel_core::groups::psl2_classes;
use siegel_core::invariants::*;

/// `|SL(2, Z/k)|` by enumeration.
fn sl2_order(k: i64) -> i64 {
    let mut count = 0;
    for a in 0..k {
        for b in 0..k {
            for c in 0..k {
                for d in 0..k {
                    if (a * d - b * c - 1).rem_euclid(k) == 0 {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

#[test]
fn mu_examples_and_oracle() {
    assert_eq!(mu(1).unwrap(), 1);
    assert_eq!(mu(2).unwrap(), 6);
    assert_eq!(mu(3).unwrap(), 12);
    assert_eq!(mu(4).unwrap(), 24);
    for d in 3..=12 {
        assert_eq!(mu(d).unwrap(), sl2_order(d) / 2, "d={d}");
    }
    for d in 1..=6 {
        assert_eq!(mu(d).unwrap() as usize, psl2_classes(d).len());
    }
    assert!(mu(0).is_err());
}

#[test]
fn curve_examples() {
    assert_eq!(cusp_number_t(3).unwrap(), 4);
    assert_eq!(cusp_number_t(5).unwrap(), 12);
    assert_eq!(cusp_number_t(15).unwrap(), 96);
    assert_eq!(genus_x(5).unwrap(), 0);
    assert_eq!(genus_x(7).unwrap(), 3);
    assert_eq!(genus_x(15).unwrap(), 73);
    assert_eq!(deg_l_x(6).unwrap(), rint(6));
    assert!(cusp_number_t(2).is_err());
}

/// Cusp count and genus from Riemann-Hurwitz over the j-line, with the
/// index counted by enumeration.
#[test]
fn riemann_hurwitz_oracle() {
    for k in 3..=16 {
        let index = sl2_order(k) / 2;
        let cusps = index / k;
        assert_eq!(cusp_number_t(k).unwrap(), cusps);
        // 2g - 2 = -2 index + index/2 + 2 index/3 + (index - cusps)
        let two_g_minus_two = -2 * index + index / 2 + 2 * index / 3 + (index - cusps);
        assert_eq!(2 * genus_x(k).unwrap() - 2, two_g_minus_two, "k={k}");
    }
}

#[test]
fn consistency_chain() {
    for k in 3..=60 {
        let t = cusp_number_t(k).unwrap();
        assert_eq!(deg_l_x(k).unwrap(), rat(k * t, 12));
        assert_eq!(rint(2 * genus_x(k).unwrap() - 2), rat((k - 6) * t, 6));
    }
}

#[test]
fn canonical_class_examples() {
    assert!(canonical_class_s(4).unwrap().is_zero());
    assert_eq!(canonical_class_s(5).unwrap().coeff_f, rint(3));
    assert_eq!(canonical_class_s(15).unwrap().coeff_f, rint(264));
}

#[test]
fn intersection_rules() {
    let k = 15;
    let f = ShiodaClass::fibre(k).unwrap();
    let l00 = ShiodaClass::section(k, 0, 0).unwrap();
    let l12 = ShiodaClass::section(k, 1, 2).unwrap();
    let lx = ShiodaClass::hodge(k).unwrap();
    assert_eq!(intersect(&f, &f).unwrap(), rint(0));
    assert_eq!(intersect(&f, &l00).unwrap(), rint(1));
    assert_eq!(intersect(&l00, &l00).unwrap(), rint(-120));
    assert_eq!(intersect(&l00, &l12).unwrap(), rint(0));
    assert_eq!(intersect(&lx, &f).unwrap(), rint(0));
    assert_eq!(intersect(&lx, &l00).unwrap(), rint(120));
    assert_eq!(intersect(&lx, &lx).unwrap(), rint(0));
    let combo = f.scale(&rat(2, 3)).try_add(&l00.scale(&rat(5, 7))).unwrap();
    assert_eq!(intersect(&combo, &f).unwrap(), rat(5, 7));
    assert!(intersect(&f, &ShiodaClass::fibre(5).unwrap()).is_err());
    assert_eq!(ShiodaClass::section(k, -1, 16).unwrap(), ShiodaClass::section(k, 14, 1).unwrap());
}

#[test]
fn normal_bundles() {
    let c = normal_bundle_class(NormalBundle::Central { n: 5, p: 3 }).unwrap();
    assert_eq!(c.coeff_lx, rat(-2, 15));
    assert_eq!(c.coeff_sections.len(), 225);
    assert!(c.coeff_sections.values().all(|v| *v == rat(-2, 15)));
    let p = normal_bundle_class(NormalBundle::Peripheral { n: 5 }).unwrap();
    assert!(p.coeff_sections.values().all(|v| *v == rat(-2, 5)));
    assert_eq!(
        normal_bundle_class(NormalBundle::Central { n: 4, p: 3 }).unwrap(),
        normal_bundle_class(NormalBundle::Peripheral { n: 12 }).unwrap()
    );
    assert!(normal_bundle_class(NormalBundle::Central { n: 6, p: 3 }).is_err());
    assert!(normal_bundle_class(NormalBundle::Peripheral { n: 2 }).is_err());
}

#[test]
fn central_normal_bundle_degrees() {
    let r = verify_prop22(5, 3).unwrap();
    assert_eq!(r.nc_dot_f, "-30/1");
    assert_eq!(r.nc_dot_l00, "0/1");
    assert_eq!(r.deg_k_l00, "144/1");
    assert_eq!(r.genus, 73);
    assert!(r.passed);
    for n in 4..=8 {
        for p in [3, 5, 7] {
            if n.gcd(&p) == 1 {
                assert!(verify_prop22(n, p).unwrap().passed, "({n},{p})");
            }
        }
    }
}

#[test]
fn positivity_quantities() {
    assert_eq!(kc_diagonal_curve(4).unwrap(), rint(0));
    assert_eq!(kc_diagonal_curve(5).unwrap(), rint(3));
    assert_eq!(kc_diagonal_curve(3).unwrap(), rint(-1));
    assert_eq!(boundary_positivity(4).unwrap(), rint(0));
    assert_eq!(boundary_positivity(15).unwrap(), rint(264));
    assert_eq!(boundary_positivity(5).unwrap(), rint(3));
    for n in 3..=50 {
        assert_eq!(kc_diagonal_curve(n).unwrap() > rint(0), n >= 5);
    }
}

#[test]
fn k_decomposition_examples() {
    let r = k_decomposition(4, 2).unwrap();
    assert_eq!(r.expr.coeff(Symbol::L), rat(1, 2));
    assert_eq!(r.expr.coeff(Symbol::DEff), rat(1, 24));
    assert!(r.l_coefficient_positive);
    let r = k_decomposition(3, 1).unwrap();
    assert_eq!(r.expr.coeff(Symbol::L), rat(-1, 3));
    assert!(!r.l_coefficient_positive);
    assert_eq!(k_decomposition(10, 1).unwrap().expr.coeff(Symbol::L), rint(2));
    for n in 1..=40 {
        for d in 1..=6 {
            assert_eq!(k_decomposition(n, d).unwrap().l_coefficient_positive, n >= 4);
        }
    }
}

#[test]
fn discrepancy_examples() {
    assert!(discrepancy_ok(&DiscrepancyCheck::new(4, 2)).unwrap());
    assert!(discrepancy_ok(&DiscrepancyCheck::new(4, 1)).unwrap());
    assert!(!discrepancy_ok(&DiscrepancyCheck::new(3, 1)).unwrap());
    for n in 4..=30 {
        for d in 1..=6 {
            assert!(discrepancy_ok(&DiscrepancyCheck::new(n, d)).unwrap());
        }
    }
}

#[test]
fn weissauer_examples() {
    assert!(weissauer_margin(5, &rint(2)).unwrap());
    assert!(!weissauer_margin(5, &rint(3)).unwrap());
    assert!(!weissauer_margin(4, &rint(1)).unwrap());
    assert!(weissauer_margin(5, &rint(0)).is_err());
}

#[test]
fn table_rows() {
    let rows = invariant_table(3, 7).unwrap();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[4].genus, 3);
    assert_eq!(rows[3].deg_l, "6/1");
}

proptest! {
    #[test]
    fn intersection_is_symmetric_and_bilinear(k in 3i64..12, a in -5i64..5, b in -5i64..5, c in -5i64..5, i in 0i64..12, j in 0i64..12) {
        let x = ShiodaClass::fibre(k).unwrap().scale(&rint(a)).try_add(&ShiodaClass::section(k, i, j).unwrap().scale(&rint(b))).unwrap();
        let y = ShiodaClass::hodge(k).unwrap().scale(&rint(c)).try_add(&ShiodaClass::section(k, j, i).unwrap()).unwrap();
        prop_assert_eq!(intersect(&x, &y).unwrap(), intersect(&y, &x).unwrap());
        let z = x.try_add(&y).unwrap();
        prop_assert_eq!(intersect(&z, &y).unwrap(), intersect(&x, &y).unwrap() + intersect(&y, &y).unwrap());
    }

    #[test]
    fn normal_bundle_degrees(n in 3i64..12, p in 3i64..8) {
        prop_assume!(n.gcd(&p) == 1);
        let nc = normal_bundle_class(NormalBundle::Central { n, p }).unwrap();
        let k = n * p;
        prop_assert_eq!(intersect(&nc, &ShiodaClass::fibre(k).unwrap()).unwrap(), rint(-2 * k));
        prop_assert_eq!(intersect(&nc, &ShiodaClass::section(k, 0, 0).unwrap()).unwrap(), rint(0));
    }
}
