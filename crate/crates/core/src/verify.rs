//! The verification report: every acceptance check, run from one seed.

use std::f64::consts::PI;

use num_complex::Complex;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cusps::{line_stabilizer, plane_stabilizer, IsotropicLine, IsotropicPlane};
use crate::error::Result;
use crate::exact::{
    divides_either_way, format_rational, is_symplectic, parse_rational, rat, rint, same_lattice, standard_j,
    RationalMatrix,
};
use crate::groups::{
    congruence_pattern_holds, coset_reps_psl2, dual_quotient_action, is_member, sample_members, Coords, Flavor, GroupSpec,
    SiegelPoint,
};
use crate::invariants::*;
use crate::real::{to_c64, Backend, DoubleDouble, Real};
use crate::theta::*;
use crate::voronoi::{
    ambient_determinant, basic_determinant, is_basic, principal_cone, smoothness_report, Sym2Lattice,
};

pub const DEFAULT_SEED: u64 = 2024;
pub const DEFAULT_PRECISION_DIGITS: u32 = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub name: String,
    pub status: Status,
    pub details: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub tool_version: String,
    pub seed: u64,
    pub precision_digits: u32,
    pub sections: Vec<Section>,
    pub overall: Status,
}

impl VerificationReport {
    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }
}

/// Named sub-checks of one section.
#[derive(Default)]
struct Checks {
    items: Vec<Value>,
    ok: bool,
}

impl Checks {
    fn new() -> Self {
        Self { items: Vec::new(), ok: true }
    }

    fn record(&mut self, name: &str, pass: bool, value: Value) {
        self.ok &= pass;
        self.items.push(json!({ "check": name, "pass": pass, "value": value }));
    }

    /// Records an evaluation that raised an error as a failed check.
    fn record_result(&mut self, name: &str, r: Result<(bool, Value)>) {
        match r {
            Ok((pass, value)) => self.record(name, pass, value),
            Err(e) => self.record(name, false, json!({ "error": e.to_string() })),
        }
    }

    fn finish(self, name: &str) -> Section {
        Section {
            name: name.to_string(),
            status: if self.ok { Status::Pass } else { Status::Fail },
            details: Value::Array(self.items),
        }
    }
}

fn sub_seed(seed: u64, tag: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(tag)
}

fn row(g: &RationalMatrix, i: usize) -> [i64; 4] {
    std::array::from_fn(|j| i64::try_from(&g[(i, j)].to_integer()).unwrap_or(0))
}

/// Sci-notation string, so reports compare byte for byte.
fn num(x: f64) -> Value {
    json!(format!("{x:.6e}"))
}

const FLAVORS: [Flavor; 4] = [Flavor::Plain, Flavor::Lev, Flavor::LevelN, Flavor::LevLevelN];
const GROUP_LEVEL: i64 = 7;

/// Seeded members for every `(d, flavor)`, `d <= 6`.
pub fn group_arithmetic(seed: u64) -> Section {
    let mut c = Checks::new();
    for d in 1..=6 {
        for flavor in FLAVORS {
            let spec = GroupSpec::rational(d, GROUP_LEVEL, flavor);
            c.record_result(
                &format!("members d={d} {flavor:?}"),
                (|| {
                    let members = sample_members(&spec, 200, sub_seed(seed, d as u64))?;
                    let mut bad = 0usize;
                    for m in &members {
                        let lev_ok = !flavor.has_lev() || (m.is_integral() && is_symplectic(m, &standard_j(2))?);
                        if !(is_member(m, &spec)? && congruence_pattern_holds(m, d) && lev_ok) {
                            bad += 1;
                        }
                    }
                    Ok((bad == 0, json!({ "samples": members.len(), "violations": bad })))
                })(),
            );
        }
        c.record_result(
            &format!("dual action homomorphism d={d}"),
            (|| {
                let spec = GroupSpec::new(d, 1, Flavor::Plain, Coords::Integral)?;
                let s = sample_members(&spec, 40, sub_seed(seed, 100 + d as u64))?;
                let mut bad = 0usize;
                for w in s.windows(2) {
                    let lhs = dual_quotient_action(&(&w[0] * &w[1]), d)?;
                    let rhs = dual_quotient_action(&w[0], d)?.compose(&dual_quotient_action(&w[1], d)?);
                    bad += usize::from(lhs != rhs);
                }
                Ok((bad == 0, json!({ "pairs": s.len() - 1, "violations": bad })))
            })(),
        );
    }
    c.finish("groups")
}

/// Stabilizer lattices of seeded lines and planes against the reference.
pub fn cusp_lattices(seed: u64) -> Section {
    let mut c = Checks::new();
    let sp = GroupSpec::rational(1, 1, Flavor::Plain);
    let frames = match sample_members(&sp, 20, sub_seed(seed, 200)) {
        Ok(f) => f,
        Err(e) => {
            c.record("sample frames", false, json!(e.to_string()));
            return c.finish("cusps");
        }
    };
    for d in [2, 3, 4, 6] {
        let spec = GroupSpec::rational(d, 1, Flavor::Plain);
        c.record_result(
            &format!("divisors divide d={d}"),
            (|| {
                let mut bad = Vec::new();
                for g in &frames {
                    let l = IsotropicLine::new(row(g, 2))?;
                    let h = IsotropicPlane::new(row(g, 2), row(g, 3))?;
                    let mut divs = line_stabilizer(&l, &spec)?.elementary_divisors_vs_reference;
                    divs.extend(plane_stabilizer(&h, &spec)?.elementary_divisors_vs_reference);
                    for e in divs {
                        if !divides_either_way(&parse_rational(&e)?, d) {
                            bad.push(json!({ "line": l.vector(), "divisor": e }));
                        }
                    }
                }
                Ok((bad.is_empty(), json!({ "lines": frames.len(), "planes": frames.len(), "violations": bad })))
            })(),
        );
    }
    for (d, n) in [(2, 5), (3, 4), (3, 5), (4, 5), (6, 5)] {
        c.record_result(
            &format!("level scaling d={d} n={n}"),
            (|| {
                let mut bad = 0usize;
                for (base, lvl) in [(Flavor::Plain, Flavor::LevelN), (Flavor::Lev, Flavor::LevLevelN)] {
                    let (a_spec, b_spec) = (GroupSpec::rational(d, 1, base), GroupSpec::rational(d, n, lvl));
                    for g in &frames {
                        let h = IsotropicPlane::new(row(g, 2), row(g, 3))?;
                        let a = plane_stabilizer(&h, &a_spec)?.lattice;
                        let b = plane_stabilizer(&h, &b_spec)?.lattice;
                        bad += usize::from(!same_lattice(&b, &a.scale(&rint(n))));
                        let l = IsotropicLine::new(row(g, 2))?;
                        let a = line_stabilizer(&l, &a_spec)?.lattice;
                        let b = line_stabilizer(&l, &b_spec)?.lattice;
                        bad += usize::from(!same_lattice(&b, &a.scale(&rint(n))));
                    }
                }
                Ok((bad == 0, json!({ "violations": bad })))
            })(),
        );
    }
    c.finish("cusps")
}

/// Absolute series tolerance for a requested number of digits.
pub fn theta_tolerance<T: Real>(digits: u32) -> f64 {
    10f64.powi(-(digits.min(300) as i32)).max(working_floor::<T>())
}

fn cpt<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::of(re), T::of(im))
}

fn rel<T: Real>(a: Complex<T>, b: Complex<T>) -> f64 {
    ((a - b).norm() / b.norm()).to_f64()
}

/// Evaluates `check` on seeded members until `count` of them have been
/// evaluated, skipping members whose images fall below the conditioning
/// floor. Returns the worst value and the number skipped.
fn worst_over_members<F>(spec: &GroupSpec, count: usize, seed: u64, mut check: F) -> Result<(f64, usize)>
where
    F: FnMut(&RationalMatrix) -> Result<f64>,
{
    let candidates = sample_members(spec, 4 * count, seed)?;
    let (mut worst, mut used, mut skipped) = (0.0f64, 0usize, 0usize);
    for g in &candidates {
        if used == count {
            break;
        }
        match check(g) {
            Ok(r) => {
                worst = worst.max(r);
                used += 1;
            }
            Err(crate::Error::Conditioning(_)) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    if used < count {
        return Err(crate::Error::Conditioning(format!("only {used} of {count} members could be evaluated")));
    }
    Ok((worst, skipped))
}

fn base_point<T: Real>() -> SiegelPoint<T> {
    SiegelPoint::unchecked(cpt(0.1, 1.1), cpt(0.2, 0.3), cpt(-0.3, 0.9))
}

fn theta_checks<T: Real>(seed: u64, digits: u32) -> Section {
    let tol = theta_tolerance::<T>(digits);
    let mut c = Checks::new();
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, 300));
    let generic = SiegelPoint::<T>::unchecked(cpt(0.1, 1.2), cpt(0.3, 0.2), cpt(-0.4, 0.9));
    c.record_result(
        "odd constants vanish",
        (|| {
            let mut worst = 0.0f64;
            for ch in ThetaChar::all().into_iter().filter(|ch| !ch.is_even()) {
                worst = worst.max(to_c64(theta_constant(ch, &generic, tol)?.value).norm());
            }
            Ok((worst == 0.0, num(worst)))
        })(),
    );
    c.record_result(
        "diagonal splitting",
        (|| {
            let (t1, t3) = (cpt::<T>(0.3, 1.1), cpt::<T>(-0.2, 0.8));
            let tau = SiegelPoint::diagonal(t1, t3)?;
            let mut worst = 0.0f64;
            for ch in ThetaChar::all() {
                let [(a1, b1), (a2, b2)] = ch.split();
                let lhs = theta_constant(ch, &tau, tol)?.value;
                let rhs = elliptic_theta_char(a1, b1, t1, tol)?.value * elliptic_theta_char(a2, b2, t3, tol)?.value;
                worst = worst.max((lhs - rhs).norm().to_f64());
            }
            Ok((worst < 1e-10, num(worst)))
        })(),
    );
    c.record_result(
        "modularity",
        (|| {
            let tau = base_point::<T>();
            let base = igusa_delta10(&tau, tol)?.value;
            let (worst, skipped) =
                worst_over_members(&GroupSpec::rational(1, 1, Flavor::Plain), 20, sub_seed(seed, 301), |g| {
                    Ok(rel(slash(igusa_delta10, 10, g, &tau, tol)?.value, base))
                })?;
            Ok((worst < 1e-8, json!({ "residual": num(worst), "skipped": skipped })))
        })(),
    );
    c.record_result(
        "diagonal vanishing",
        (|| {
            let mut worst = 0.0f64;
            for _ in 0..10 {
                let t1 = cpt::<T>(rng.gen_range(-0.5..0.5), rng.gen_range(0.6..1.5));
                let t3 = cpt::<T>(rng.gen_range(-0.5..0.5), rng.gen_range(0.6..1.5));
                worst = worst.max(to_c64(igusa_delta10(&SiegelPoint::diagonal(t1, t3)?, tol)?.value).norm());
            }
            Ok((worst < 1e-9, num(worst)))
        })(),
    );
    c.record_result(
        "vanishing order",
        (|| {
            let mut slopes = Vec::new();
            for (t1, t3) in [(cpt::<T>(0.0, 1.0), cpt::<T>(0.0, 2.0)), (cpt(0.0, 2.0), cpt(0.0, 3.0))] {
                slopes.push(vanishing_order_diagonal(t1, t3, &default_eps_ladder(), tol)?.slope);
            }
            let pass = slopes.iter().all(|s| (s - 2.0).abs() <= 0.05);
            Ok((pass, Value::Array(slopes.into_iter().map(num).collect())))
        })(),
    );
    c.record_result(
        "cusp decay",
        (|| {
            let base = SiegelPoint::unchecked(cpt::<T>(0.0, 1.5), cpt(0.2, 0.3), cpt(0.0, 2.0));
            let heights: Vec<f64> = (2..=6).map(f64::from).collect();
            let r = cusp_decay_rate(&base, &heights, tol)?;
            Ok(((r / (-2.0 * PI) - 1.0).abs() <= 0.02, num(r)))
        })(),
    );
    c.record_result(
        "quasi-periodicity",
        (|| {
            let mut worst = 0.0f64;
            for _ in 0..50 {
                let tau = cpt::<T>(rng.gen_range(-0.5..0.5), rng.gen_range(0.5..2.0));
                let z = cpt::<T>(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
                let (k, m) = (rng.gen_range(-3..=3), rng.gen_range(-3..=3));
                worst = worst.max(verify_formula3(tau, z, k, m)?);
            }
            Ok((worst < 1e-10, num(worst)))
        })(),
    );
    c.finish("theta")
}

fn f0_checks<T: Real>(seed: u64, digits: u32) -> Section {
    // the product of 10 mu(d) factors needs some headroom over a single series
    let tol = theta_tolerance::<T>(digits).max(1e8 * working_floor::<T>());
    let mut c = Checks::new();
    let tau = base_point::<T>();
    for (d, mu_d) in [(2, 6usize), (3, 12)] {
        c.record_result(
            &format!("coset count d={d}"),
            coset_reps_psl2(d).map(|r| (r.len() == mu_d, json!(r.len()))),
        );
        c.record_result(
            &format!("invariance d={d}"),
            (|| {
                let base = f0(&tau, d, tol)?.value;
                let weight = f0_weight(mu_d as i64) as i32;
                let spec = GroupSpec::rational(d, 1, Flavor::Plain);
                let (worst, skipped) = worst_over_members(&spec, 10, sub_seed(seed, 400 + d as u64), |g| {
                    Ok(rel(slash(|t, tl| f0(t, d, tl), weight, g, &tau, tol)?.value, base))
                })?;
                Ok((worst < 1e-7, json!({ "residual": num(worst), "skipped": skipped })))
            })(),
        );
    }
    c.record_result(
        "trivial level",
        (|| {
            let a = f0(&tau, 1, tol)?.value;
            let b = igusa_delta10(&tau, tol)?.value;
            Ok((a == b, num((a - b).norm().to_f64())))
        })(),
    );
    c.finish("f0")
}

/// The theta section, run on the backend selected by `digits`.
pub fn theta_suite(seed: u64, digits: u32) -> Section {
    match Backend::for_digits(digits) {
        Backend::Double => theta_checks::<f64>(seed, digits),
        Backend::DoubleDouble => theta_checks::<DoubleDouble>(seed, digits),
    }
}

pub fn f0_suite(seed: u64, digits: u32) -> Section {
    match Backend::for_digits(digits) {
        Backend::Double => f0_checks::<f64>(seed, digits),
        Backend::DoubleDouble => f0_checks::<DoubleDouble>(seed, digits),
    }
}

fn all_ok<I: IntoIterator<Item = Result<bool>>>(it: I) -> Result<bool> {
    for r in it {
        if !r? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exact checks on the closed forms and the divisor calculus.
pub fn invariants_suite() -> Section {
    let mut c = Checks::new();
    c.record_result(
        "t, genus and degree consistency",
        all_ok((3..=60).map(|k| {
            let t = cusp_number_t(k)?;
            Ok(deg_l_x(k)? == rat(k * t, 12) && rint(2 * genus_x(k)? - 2) == rat((k - 6) * t, 6))
        }))
        .map(|ok| (ok, json!("3..=60"))),
    );
    let pairs: Vec<(i64, i64)> =
        (4..=8).flat_map(|n| [3, 5, 7].into_iter().map(move |p| (n, p))).filter(|(n, p)| n % p != 0).collect();
    c.record_result(
        "normal bundle degrees",
        all_ok(pairs.iter().map(|&(n, p)| {
            let r = verify_prop22(n, p)?;
            Ok(r.passed && r.nc_dot_f == format_rational(&rint(-2 * n * p)) && r.nc_dot_l00 == "0/1")
        }))
        .map(|ok| (ok, json!(pairs.len()))),
    );
    c.record_result(
        "diagonal curve degree sign",
        (|| {
            let at4 = kc_diagonal_curve(4)?;
            let sign_ok = all_ok((1..=50).map(|n| {
                if n < 3 {
                    return Ok(true);
                }
                Ok(kc_diagonal_curve(n)?.is_positive() == (n >= 5))
            }))?;
            Ok((sign_ok && at4 == rint(0), json!({ "n=4": at4.to_string(), "n=5": kc_diagonal_curve(5)?.to_string() })))
        })(),
    );
    c.record_result(
        "L coefficient sign",
        all_ok((1..=50).flat_map(|n| (1..=6).map(move |d| (n, d))).map(|(n, d)| {
            Ok(k_decomposition(n, d)?.l_coefficient_positive == (n >= 4))
        }))
        .map(|ok| (ok, json!("n <= 50, d <= 6"))),
    );
    c.record_result(
        "discrepancy",
        (|| {
            let good = all_ok((4..=50).flat_map(|n| (1..=6).map(move |d| (n, d))).map(|(n, d)| discrepancy_ok(&DiscrepancyCheck::new(n, d))))?;
            let bad = discrepancy_ok(&DiscrepancyCheck::new(3, 1))?;
            Ok((good && !bad, json!({ "n>=4": good, "n=3,d=1": bad })))
        })(),
    );
    c.record_result(
        "weissauer margin",
        (|| {
            let a = weissauer_margin(5, &rint(2))?;
            let b = weissauer_margin(5, &rint(3))?;
            Ok((a && !b, json!({ "eps=2": a, "eps=3": b })))
        })(),
    );
    c.finish("invariants")
}

/// Basicness checks and the smoothness reports.
pub fn voronoi_suite() -> Section {
    let mut c = Checks::new();
    let cone = principal_cone();
    let std = Sym2Lattice::standard();
    c.record_result(
        "principal cone vs Sym2(Z)",
        basic_determinant(&cone, &std).map(|d| (d.abs() == 1.into(), json!(d.to_string()))),
    );
    c.record_result(
        "principal cone vs n Sym2(Z)",
        all_ok((1..=6).map(|n| is_basic(&cone, &std.scaled(&rint(n))?))).map(|ok| (ok, json!("n <= 6"))),
    );
    c.record_result(
        "d=2 plane lattice non-basic with det 4",
        (|| {
            let lattice = Sym2Lattice::from_columns(&RationalMatrix::diagonal(&[rint(1), rint(2), rint(2)]))?;
            let det = basic_determinant(&cone, &lattice)?;
            let basic = is_basic(&cone, &lattice)?;
            let ambient = ambient_determinant(&cone, &lattice)?;
            Ok((
                det.abs() == 4.into() && !basic,
                json!({ "determinant": det.to_string(), "basic": basic, "ambient_determinant": ambient.to_string() }),
            ))
        })(),
    );
    for (p, n) in [(3, 4), (3, 5), (5, 4)] {
        c.record_result(
            &format!("smooth p={p} n={n}"),
            smoothness_report(p, n).map(|r| {
                let cones: usize = r.planes.iter().map(|v| v.cones.len()).sum();
                (r.smooth, json!({ "planes": r.planes.len(), "cones": cones, "smooth": r.smooth }))
            }),
        );
    }
    c.finish("voronoi")
}

/// Recomputes a sample and an evaluation on another thread and compares.
pub fn determinism_suite(seed: u64) -> Section {
    let mut c = Checks::new();
    let work = move || -> Result<(Vec<RationalMatrix>, Complex<DoubleDouble>)> {
        let m = sample_members(&GroupSpec::rational(3, 1, Flavor::Lev), 5, seed)?;
        let v = igusa_delta10(&base_point::<DoubleDouble>(), 1e-24)?.value;
        Ok((m, v))
    };
    let here = work();
    let there = std::thread::spawn(work).join().unwrap_or_else(|_| Err(crate::Error::Internal("worker panicked".into())));
    c.record_result(
        "repeat on another thread",
        match (here, there) {
            (Ok(a), Ok(b)) => Ok((a == b, json!("bitwise"))),
            (Err(e), _) | (_, Err(e)) => Err(e),
        },
    );
    c.finish("determinism")
}

/// Runs every section. Failures are reported, never raised.
pub fn verify_all(seed: u64, precision_digits: u32) -> VerificationReport {
    let sections = vec![
        group_arithmetic(seed),
        cusp_lattices(seed),
        theta_suite(seed, precision_digits),
        f0_suite(seed, precision_digits),
        invariants_suite(),
        voronoi_suite(),
        determinism_suite(seed),
    ];
    let overall = if sections.iter().all(|s| s.status != Status::Fail) { Status::Pass } else { Status::Fail };
    VerificationReport {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        precision_digits,
        sections,
        overall,
    }
}
