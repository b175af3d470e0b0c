use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use siegel_core::cusps::*;
use siegel_core::exact::*;
use siegel_core::groups::*;

fn row(g: &RationalMatrix, i: usize) -> [i64; 4] {
    std::array::from_fn(|j| i64::try_from(&g[(i, j)].to_integer()).unwrap())
}

fn e3_image(l: &IsotropicLine, frame: &RationalMatrix) -> bool {
    let r = row(frame, 2);
    let v = l.vector();
    r == v || r == v.map(|x| -x)
}

#[test]
fn frame_examples() {
    let (m, bz) = frame_for_line(&IsotropicLine::new([0, 0, 1, 0]).unwrap()).unwrap();
    assert_eq!(m, RationalMatrix::identity(4));
    assert!(bz);
    for v in [[1, 0, 0, 0], [1, 0, 2, 0], [0, 1, 2, 2], [3, -5, 7, 2], [0, 0, 4, 6]] {
        let l = IsotropicLine::new(v).unwrap();
        let (m, _) = frame_for_line(&l).unwrap();
        assert!(m.is_integral() && is_symplectic(&m, &standard_j(2)).unwrap());
        assert!(e3_image(&l, &m), "{v:?}");
    }
    let (m, bz) = frame_for_line(&IsotropicLine::new([1, 0, 0, 0]).unwrap()).unwrap();
    assert!(!bz);
    assert_eq!(row(&m, 2), [1, 0, 0, 0]);
}

#[test]
fn plane_frames_span_the_plane() {
    let sp = GroupSpec::rational(1, 1, Flavor::Plain);
    for g in sample_members(&sp, 20, 77).unwrap() {
        let h = IsotropicPlane::new(row(&g, 2), row(&g, 3)).unwrap();
        let m = frame_for_plane(&h).unwrap();
        assert!(is_symplectic(&m, &standard_j(2)).unwrap());
        let span = |a: [i64; 4], b: [i64; 4]| IsotropicPlane::new(a, b).unwrap();
        assert_eq!(span(row(&m, 2), row(&m, 3)), h);
    }
    assert!(IsotropicPlane::new([1, 0, 0, 0], [0, 0, 1, 0]).is_err());
}

#[test]
fn line_examples() {
    let l0 = IsotropicLine::new([0, 0, 1, 0]).unwrap();
    for d in [1, 2] {
        let r = line_stabilizer(&l0, &GroupSpec::rational(d, 1, Flavor::Plain)).unwrap();
        assert_eq!(r.basis, vec![vec!["1/1".to_string()]]);
        assert_eq!(r.elementary_divisors_vs_reference, vec!["1/1".to_string()]);
        assert!(r.certified);
    }
    let spec = GroupSpec::rational(2, 1, Flavor::Plain);
    for v in [[1, 0, 2, 0], [0, 1, 0, 0], [0, 1, 2, 2], [1, 1, 1, 1]] {
        let r = line_stabilizer(&IsotropicLine::new(v).unwrap(), &spec).unwrap();
        let s0 = parse_rational(&r.basis[0][0]).unwrap();
        assert!([rat(1, 2), rint(1), rint(2)].contains(&s0), "{v:?} {s0}");
    }
}

#[test]
fn line_solve_matches_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..40 {
        let v: [i64; 4] = std::array::from_fn(|_| rng.gen_range(-4..=4));
        let Ok(l) = IsotropicLine::new(v) else { continue };
        for (d, flavor) in [(2, Flavor::Plain), (3, Flavor::Lev), (4, Flavor::Plain), (6, Flavor::LevelN)] {
            let spec = GroupSpec::rational(d, 5, flavor);
            let r = line_stabilizer(&l, &spec).unwrap();
            let s0 = parse_rational(&r.basis[0][0]).unwrap();
            let scan = line_stabilizer_scan(&l, &spec, d * d * d * 5).unwrap();
            assert_eq!(scan, Some(s0.clone()), "{v:?} d={d} {flavor:?}");
            assert!(r.certified);
        }
    }
}

#[test]
fn plane_examples() {
    let h0 = IsotropicPlane::standard();
    let r = plane_stabilizer(&h0, &GroupSpec::rational(1, 1, Flavor::Plain)).unwrap();
    assert!(same_lattice(&r.lattice, &RationalMatrix::identity(3)));
    let r = plane_stabilizer(&h0, &GroupSpec::rational(2, 1, Flavor::Plain)).unwrap();
    assert!(same_lattice(&r.lattice, &RationalMatrix::from_i64(&[[1, 0, 0], [0, 2, 0], [0, 0, 2]])));
    assert_eq!(r.elementary_divisors_vs_reference, ["1/1", "2/1", "2/1"]);
    assert_eq!(r.direction, Direction::Coarser);
    assert!(r.certified);
}

#[test]
fn plane_solve_matches_scan() {
    let spec3 = GroupSpec::rational(3, 1, Flavor::Plain);
    let sp = GroupSpec::rational(1, 1, Flavor::Plain);
    for g in sample_members(&sp, 4, 3).unwrap() {
        let h = IsotropicPlane::new(row(&g, 2), row(&g, 3)).unwrap();
        let exact = plane_stabilizer(&h, &spec3).unwrap();
        let scan = plane_stabilizer_scan(&h, &spec3, 9).unwrap();
        assert!(same_lattice(&exact.lattice, &scan), "{h:?}");
        for e in &exact.elementary_divisors_vs_reference {
            let e = parse_rational(e).unwrap();
            assert!([rat(1, 3), rint(1), rint(3)].contains(&e));
        }
    }
}

#[test]
fn level_lattices_scale_by_n() {
    let sp = GroupSpec::rational(1, 1, Flavor::Plain);
    let gs = sample_members(&sp, 6, 12).unwrap();
    for (d, n) in [(2, 5), (3, 4), (6, 5)] {
        for (base, lvl) in [(Flavor::Plain, Flavor::LevelN), (Flavor::Lev, Flavor::LevLevelN)] {
            for g in &gs {
                let h = IsotropicPlane::new(row(g, 2), row(g, 3)).unwrap();
                let a = plane_stabilizer(&h, &GroupSpec::rational(d, n, base)).unwrap().lattice;
                let b = plane_stabilizer(&h, &GroupSpec::rational(d, n, lvl)).unwrap().lattice;
                assert!(same_lattice(&b, &a.scale(&rint(n))));
            }
        }
    }
}

/// At composite d some lines have a stabilizer lattice that is neither a
/// sublattice nor a superlattice of Z.
#[test]
fn composite_level_incomparable_line() {
    let l = IsotropicLine::new([0, 1, 2, 2]).unwrap();
    let r = line_stabilizer(&l, &GroupSpec::rational(6, 1, Flavor::Plain)).unwrap();
    assert_eq!(r.basis[0][0], "3/2");
    assert_eq!(r.direction, Direction::Incomparable);
    assert!(!divides_either_way(&rat(3, 2), 6));
}

#[test]
fn p_l0_generators_are_members() {
    for (p, n) in [(3, 5), (5, 4), (3, 4), (7, 2)] {
        let gens = p_l0_generators(p, n).unwrap();
        assert_eq!(gens.len(), 6);
        let spec = GroupSpec::rational(p, n, Flavor::LevLevelN);
        assert!(gens.iter().all(|g| is_member(g, &spec).unwrap()));
    }
    assert!(p_l0_generators(3, 6).is_err());
    assert!(p_l0_generators(4, 5).is_err());
}

#[test]
fn tits_examples() {
    let t = |p| {
        let c = tits_counts(p).unwrap();
        (c.central_lines, c.peripheral_lines, c.planes)
    };
    assert_eq!(t(3), (1, 4, 4));
    assert_eq!(t(5), (1, 12, 6));
    assert_eq!(t(7), (1, 24, 8));
    assert_eq!(t(11), (1, 60, 12));
    assert!(tits_counts(9).is_err() && tits_counts(2).is_err());
}

#[test]
fn chart_residuals() {
    let tau = SiegelPoint::new(Complex::new(0.05, 1.0), Complex::new(0.02, 0.03), Complex::new(-0.01, 1.1)).unwrap();
    assert_eq!(verify_cusp_coordinates(3, 5, &RationalMatrix::identity(4), &tau).unwrap(), 0.0);
    for g in p_l0_generators(3, 5).unwrap() {
        let r = verify_cusp_coordinates(3, 5, &g, &tau).unwrap();
        assert!(r < 1e-10, "{g:?} {r}");
    }
    let mixed = &p_l0_generators(3, 5).unwrap()[1] * &p_l0_generators(3, 5).unwrap()[4];
    assert!(verify_cusp_coordinates(3, 5, &mixed, &tau).is_err());
}
