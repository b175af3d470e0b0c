//! Paramodular groups of polarization type (1, d), their level subgroups,
//! the action on the Siegel space and the SL(2, Z/d) coset machinery.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{ext_gcd, is_symplectic, rat, rint, Rational, RationalMatrix};
use crate::real::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    Plain,
    Lev,
    LevelN,
    LevLevelN,
}

impl Flavor {
    pub fn has_lev(self) -> bool {
        matches!(self, Flavor::Lev | Flavor::LevLevelN)
    }

    pub fn has_level(self) -> bool {
        matches!(self, Flavor::LevelN | Flavor::LevLevelN)
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(Flavor::Plain),
            "lev" => Ok(Flavor::Lev),
            "level_n" | "level-n" => Ok(Flavor::LevelN),
            "lev_level_n" | "lev-level-n" => Ok(Flavor::LevLevelN),
            other => Err(Error::Parse(format!("unknown flavor {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coords {
    /// Integer matrices preserving the form of type (1, d).
    Integral,
    /// Conjugated into `Sp(4, Q)`.
    Rational,
}

impl Coords {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "integral" => Ok(Coords::Integral),
            "rational" => Ok(Coords::Rational),
            other => Err(Error::Parse(format!("unknown coordinates {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupSpec {
    pub d: i64,
    pub n: i64,
    pub flavor: Flavor,
    pub coords: Coords,
}

impl GroupSpec {
    pub fn new(d: i64, n: i64, flavor: Flavor, coords: Coords) -> Result<Self> {
        if d < 1 || n < 1 {
            return Err(Error::Precondition(format!("d and n must be positive (got d={d}, n={n})")));
        }
        Ok(Self { d, n, flavor, coords })
    }

    /// Rational coordinates; the form used by most callers.
    pub fn rational(d: i64, n: i64, flavor: Flavor) -> Self {
        Self::new(d, n, flavor, Coords::Rational).expect("positive parameters")
    }

    pub fn with_coords(self, coords: Coords) -> Self {
        Self { coords, ..self }
    }

    /// Effective level: 1 unless the flavor carries a level structure.
    pub fn level(&self) -> i64 {
        if self.flavor.has_level() {
            self.n
        } else {
            1
        }
    }
}

pub fn lambda_matrix(d: i64) -> RationalMatrix {
    let mut m = RationalMatrix::zeros(4, 4);
    m[(0, 2)] = rint(1);
    m[(1, 3)] = rint(d);
    m[(2, 0)] = rint(-1);
    m[(3, 1)] = rint(-d);
    m
}

fn r_diag(d: i64) -> [Rational; 4] {
    [rint(1), rint(1), rint(1), rint(d)]
}

fn check_4x4(m: &RationalMatrix) -> Result<()> {
    if m.rows() != 4 || m.cols() != 4 {
        return Err(Error::DimensionMismatch(format!("expected 4x4, got {}x{}", m.rows(), m.cols())));
    }
    Ok(())
}

/// `R_d * m * R_d^{-1}`: rational coordinates to integral ones.
pub fn to_integral(m: &RationalMatrix, d: i64) -> Result<RationalMatrix> {
    check_4x4(m)?;
    let r = r_diag(d);
    let mut out = m.clone();
    for i in 0..4 {
        for j in 0..4 {
            out[(i, j)] = &m[(i, j)] * &r[i] / &r[j];
        }
    }
    Ok(out)
}

/// `R_d^{-1} * m * R_d`: integral coordinates to rational ones.
pub fn to_rational(m: &RationalMatrix, d: i64) -> Result<RationalMatrix> {
    check_4x4(m)?;
    let r = r_diag(d);
    let mut out = m.clone();
    for i in 0..4 {
        for j in 0..4 {
            out[(i, j)] = &m[(i, j)] * &r[j] / &r[i];
        }
    }
    Ok(out)
}

fn integral_image(m: &RationalMatrix, spec: &GroupSpec) -> Result<RationalMatrix> {
    match spec.coords {
        Coords::Integral => {
            check_4x4(m)?;
            Ok(m.clone())
        }
        Coords::Rational => to_integral(m, spec.d),
    }
}

fn congruent_to_identity(m: &RationalMatrix, n: i64) -> bool {
    let n = BigInt::from(n);
    (0..4).all(|i| {
        (0..4).all(|j| {
            let mut x = m[(i, j)].to_integer();
            if i == j {
                x -= 1;
            }
            x.is_multiple_of(&n)
        })
    })
}

/// Integral-coordinates membership test for the group selected by `spec`.
pub fn is_member(m: &RationalMatrix, spec: &GroupSpec) -> Result<bool> {
    let mt = integral_image(m, spec)?;
    if !mt.is_integral() {
        return Ok(false);
    }
    // M Λ_d M^T = Λ_d
    if !is_symplectic(&mt.transpose(), &lambda_matrix(spec.d))? {
        return Ok(false);
    }
    if spec.flavor.has_level() && !congruent_to_identity(&mt, spec.n) {
        return Ok(false);
    }
    if spec.flavor.has_lev() && !dual_quotient_action(&mt, spec.d)?.is_identity() {
        return Ok(false);
    }
    Ok(true)
}

/// Entrywise test of `m - 1` against the pattern
/// `[[Z,Z,Z,dZ],[dZ,Z,dZ,dZ],[Z,Z,Z,dZ],[Z,Z/d,Z,Z]]` (rational coordinates).
pub fn congruence_pattern_holds(m: &RationalMatrix, d: i64) -> bool {
    if m.rows() != 4 || m.cols() != 4 {
        return false;
    }
    let dz = rint(d);
    let one_over_d = rat(1, d);
    let unit = rint(1);
    let slot = |i: usize, j: usize| -> &Rational {
        match (i, j) {
            (0, 3) | (1, 0) | (1, 2) | (1, 3) | (2, 3) => &dz,
            (3, 1) => &one_over_d,
            _ => &unit,
        }
    };
    (0..4).all(|i| {
        (0..4).all(|j| {
            let mut x = m[(i, j)].clone();
            if i == j {
                x -= rint(1);
            }
            (x / slot(i, j)).is_integer()
        })
    })
}

/// Action on the discriminant group `L^v / L` in the basis `(e2/d, e4/d)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DualAction {
    pub d: i64,
    pub matrix: [[i64; 2]; 2],
}

impl DualAction {
    pub fn new(d: i64, m: [[i64; 2]; 2]) -> Self {
        let r = |x: i64| x.rem_euclid(d.max(1));
        Self { d, matrix: [[r(m[0][0]), r(m[0][1])], [r(m[1][0]), r(m[1][1])]] }
    }

    pub fn is_identity(&self) -> bool {
        *self == DualAction::new(self.d, [[1, 0], [0, 1]])
    }

    pub fn compose(&self, other: &DualAction) -> DualAction {
        let (a, b) = (&self.matrix, &other.matrix);
        let mut c = [[0i64; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                c[i][j] = (a[i][0] * b[0][j] + a[i][1] * b[1][j]).rem_euclid(self.d);
            }
        }
        DualAction::new(self.d, c)
    }

    pub fn negate(&self) -> DualAction {
        let m = self.matrix;
        DualAction::new(self.d, [[-m[0][0], -m[0][1]], [-m[1][0], -m[1][1]]])
    }

    pub fn determinant(&self) -> i64 {
        let m = self.matrix;
        (m[0][0] * m[1][1] - m[0][1] * m[1][0]).rem_euclid(self.d)
    }

    /// Class in `SL(2, Z/d) / {+-1}`: the lexicographically smaller of the
    /// two sign representatives.
    pub fn psl_class(&self) -> [i64; 4] {
        let flat = |a: &DualAction| [a.matrix[0][0], a.matrix[0][1], a.matrix[1][0], a.matrix[1][1]];
        flat(self).min(flat(&self.negate()))
    }
}

fn bigint_mod(x: &BigInt, d: i64) -> i64 {
    x.mod_floor(&BigInt::from(d)).to_i64().expect("residue fits")
}

/// Requires integral-coordinates input.
pub fn dual_quotient_action(mt: &RationalMatrix, d: i64) -> Result<DualAction> {
    check_4x4(mt)?;
    if !mt.is_integral() {
        return Err(Error::Precondition("dual action needs an integer matrix".into()));
    }
    let e = |i: usize, j: usize| bigint_mod(&mt[(i, j)].to_integer(), d);
    Ok(DualAction::new(d, [[e(1, 1), e(1, 3)], [e(3, 1), e(3, 3)]]))
}

/// Embeds `gamma` on `span(e2, e4)` in integral coordinates.
pub fn embed_sl2(gamma: [[i64; 2]; 2], _d: i64) -> Result<RationalMatrix> {
    let [[a, b], [c, dd]] = gamma;
    if a * dd - b * c != 1 {
        return Err(Error::Precondition(format!("det {gamma:?} != 1")));
    }
    let mut m = RationalMatrix::identity(4);
    m[(1, 1)] = rint(a);
    m[(1, 3)] = rint(b);
    m[(3, 1)] = rint(c);
    m[(3, 3)] = rint(dd);
    Ok(m)
}

/// Lifts a class of `SL(2, Z/n)` to `SL(2, Z)`.
pub fn lift_sl2(class: [i64; 4], n: i64) -> [[i64; 2]; 2] {
    if n == 1 {
        return [[1, 0], [0, 1]];
    }
    let [a0, b0, c0, d0] = class;
    let c = if c0 == 0 { n } else { c0 };
    let mut dd = d0;
    while dd.gcd(&c) != 1 {
        dd += n;
    }
    let big = |x: i64| BigInt::from(x);
    let (_, u, v) = ext_gcd(&big(dd), &big(c));
    // u*dd + v*c = 1, so (x, y) = (u, -v) has x*dd - y*c = 1
    let (x, y) = (u.to_i64().unwrap(), -v.to_i64().unwrap());
    let (_, p, q) = ext_gcd(&big(c), &big(dd));
    let (p, q) = (p.to_i64().unwrap(), q.to_i64().unwrap());
    let k = (p * (a0 - x) + q * (b0 - y)).rem_euclid(n);
    [[x + k * c, y + k * dd], [c, dd]]
}

/// Sorted list of `SL(2, Z/d) / {+-1}` classes.
pub fn psl2_classes(d: i64) -> Vec<[i64; 4]> {
    if d == 1 {
        return vec![[0, 0, 0, 0]];
    }
    let mut seen = std::collections::BTreeSet::new();
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for e in 0..d {
                    if (a * e - b * c).rem_euclid(d) == 1 {
                        seen.insert(DualAction::new(d, [[a, b], [c, e]]).psl_class());
                    }
                }
            }
        }
    }
    seen.into_iter().collect()
}

/// One member of `Gamma_{1,d}` (rational coordinates) per class of
/// `PSL(2, Z/d)`, ordered by the class tuple.
pub fn coset_reps_psl2(d: i64) -> Result<Vec<RationalMatrix>> {
    if d < 1 {
        return Err(Error::Precondition("d must be positive".into()));
    }
    psl2_classes(d)
        .into_iter()
        .map(|cls| to_rational(&embed_sl2(lift_sl2(cls, d), d)?, d))
        .collect()
}

pub fn upper_unipotent(s: [Rational; 3]) -> RationalMatrix {
    let [s1, s2, s3] = s;
    let mut m = RationalMatrix::identity(4);
    m[(0, 2)] = s1;
    m[(0, 3)] = s2.clone();
    m[(1, 2)] = s2;
    m[(1, 3)] = s3;
    m
}

pub fn lower_unipotent(s: [Rational; 3]) -> RationalMatrix {
    upper_unipotent(s).transpose()
}

/// Standard involution `[[0, I], [-I, 0]]`.
pub fn standard_involution() -> RationalMatrix {
    crate::exact::standard_j(2)
}

/// A 2x2 integer block placed on coordinates `(e1, e3)`.
pub fn embed_13(gamma: [[i64; 2]; 2]) -> RationalMatrix {
    let mut m = RationalMatrix::identity(4);
    m[(0, 0)] = rint(gamma[0][0]);
    m[(0, 2)] = rint(gamma[0][1]);
    m[(2, 0)] = rint(gamma[1][0]);
    m[(2, 2)] = rint(gamma[1][1]);
    m
}

/// Generators (rational coordinates) used to build sample words.
pub fn generator_pool(spec: &GroupSpec) -> Result<Vec<RationalMatrix>> {
    let d = spec.d;
    let n = spec.level();
    let lev = spec.flavor.has_lev();
    let e3_up = if lev { d * d } else { d };
    let mut pool = vec![
        upper_unipotent([rint(n), rint(0), rint(0)]),
        upper_unipotent([rint(0), rint(n * d), rint(0)]),
        upper_unipotent([rint(0), rint(0), rint(n * e3_up)]),
        lower_unipotent([rint(n), rint(0), rint(0)]),
        lower_unipotent([rint(0), rint(n), rint(0)]),
        lower_unipotent([rint(0), rint(0), if lev { rint(n) } else { rat(n, d) }]),
    ];
    // SL(2) on (e2, e4) congruent to 1 modulo the level of the dual action
    let m = match (lev, spec.flavor.has_level()) {
        (false, false) => 1,
        (true, false) => d,
        (false, true) => n,
        (true, true) => d * n,
    };
    let mut sl2 = vec![[[1, m], [0, 1]], [[1, 0], [m, 1]], [[1 + m, m], [-m, 1 - m]]];
    if m == 1 {
        sl2.push([[0, -1], [1, 0]]);
    }
    for g in sl2 {
        pool.push(to_rational(&embed_sl2(g, d)?, d)?);
    }
    if spec.flavor.has_level() {
        pool.push(embed_13([[1 + n, n], [-n, 1 - n]]));
    } else {
        pool.push(embed_13([[0, 1], [-1, 0]]));
        if !lev {
            // the integral standard involution
            pool.push(to_rational(&standard_involution(), d)?);
        }
    }
    for g in &pool {
        if !is_member(g, &spec.with_coords(Coords::Rational))? {
            return Err(Error::Internal(format!("generator outside the group: {g:?}")));
        }
    }
    Ok(pool)
}

/// Seeded members built as words of length 1..=8 in the generator pool and
/// its inverses. Output is in the coordinates requested by `spec`.
pub fn sample_members(spec: &GroupSpec, count: usize, seed: u64) -> Result<Vec<RationalMatrix>> {
    let mut pool = generator_pool(spec)?;
    let inverses = pool.iter().map(RationalMatrix::inverse).collect::<Result<Vec<_>>>()?;
    pool.extend(inverses);
    let rational_spec = spec.with_coords(Coords::Rational);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let len = rng.gen_range(1..=8);
        let mut w = RationalMatrix::identity(4);
        for _ in 0..len {
            w = &w * &pool[rng.gen_range(0..pool.len())];
        }
        if !is_member(&w, &rational_spec)? {
            return Err(Error::Internal("word left the group".into()));
        }
        out.push(match spec.coords {
            Coords::Rational => w,
            Coords::Integral => to_integral(&w, spec.d)?,
        });
    }
    Ok(out)
}

/// Point of the Siegel upper half space of genus 2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SiegelPoint<T = f64> {
    pub tau1: Complex<T>,
    pub tau2: Complex<T>,
    pub tau3: Complex<T>,
}

/// Complex 2x2 matrix, row-major.
pub type C2<T> = [[Complex<T>; 2]; 2];

impl<T: Real> SiegelPoint<T> {
    pub fn new(tau1: Complex<T>, tau2: Complex<T>, tau3: Complex<T>) -> Result<Self> {
        let p = Self { tau1, tau2, tau3 };
        p.validate()?;
        Ok(p)
    }

    pub fn unchecked(tau1: Complex<T>, tau2: Complex<T>, tau3: Complex<T>) -> Self {
        Self { tau1, tau2, tau3 }
    }

    pub fn diagonal(tau1: Complex<T>, tau3: Complex<T>) -> Result<Self> {
        Self::new(tau1, Complex::new(T::zero(), T::zero()), tau3)
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b, c) = (self.tau1.im, self.tau2.im, self.tau3.im);
        let finite = [self.tau1, self.tau2, self.tau3].iter().all(|z| z.re.is_finite() && z.im.is_finite());
        if !finite || a <= T::zero() || a * c - b * b <= T::zero() {
            return Err(Error::Precondition("imaginary part is not positive definite".into()));
        }
        Ok(())
    }

    /// Smallest eigenvalue of `Im tau`.
    pub fn min_imag_eigenvalue(&self) -> T {
        let (a, b, c) = (self.tau1.im, self.tau2.im, self.tau3.im);
        let half = T::of(0.5);
        let mean = (a + c) * half;
        let rad = (((a - c) * half).powi(2) + b * b).sqrt();
        mean - rad
    }

    pub fn matrix(&self) -> C2<T> {
        [[self.tau1, self.tau2], [self.tau2, self.tau3]]
    }

    pub fn translate(&self, s: [T; 3]) -> Self {
        Self {
            tau1: self.tau1 + s[0],
            tau2: self.tau2 + s[1],
            tau3: self.tau3 + s[2],
        }
    }

    pub fn to_f64(&self) -> SiegelPoint<f64> {
        SiegelPoint {
            tau1: crate::real::to_c64(self.tau1),
            tau2: crate::real::to_c64(self.tau2),
            tau3: crate::real::to_c64(self.tau3),
        }
    }
}

impl SiegelPoint<f64> {
    pub fn to_backend<T: Real>(&self) -> SiegelPoint<T> {
        SiegelPoint {
            tau1: crate::real::of_c64(self.tau1),
            tau2: crate::real::of_c64(self.tau2),
            tau3: crate::real::of_c64(self.tau3),
        }
    }

    /// `i * I_2`
    pub fn diag_i() -> Self {
        let i = Complex::new(0.0, 1.0);
        Self { tau1: i, tau2: Complex::new(0.0, 0.0), tau3: i }
    }
}

impl Serialize for SiegelPoint<f64> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [[self.tau1.re, self.tau1.im], [self.tau2.re, self.tau2.im], [self.tau3.re, self.tau3.im]].serialize(s)
    }
}

impl<'de> Deserialize<'de> for SiegelPoint<f64> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = <[[f64; 2]; 3]>::deserialize(d)?;
        let c = |p: [f64; 2]| Complex::new(p[0], p[1]);
        SiegelPoint::new(c(v[0]), c(v[1]), c(v[2])).map_err(serde::de::Error::custom)
    }
}

pub fn c2_mul<T: Real>(a: &C2<T>, b: &C2<T>) -> C2<T> {
    let mut c = [[Complex::new(T::zero(), T::zero()); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

pub fn c2_det<T: Real>(a: &C2<T>) -> Complex<T> {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

fn c2_norm<T: Real>(a: &C2<T>) -> T {
    a.iter().flatten().map(|z| z.norm()).fold(T::zero(), |x, y| x.max(y))
}

/// `X * tau + Y` for real 2x2 blocks.
fn affine<T: Real>(x: &RationalMatrix, y: &RationalMatrix, tau: &C2<T>) -> C2<T> {
    let f = |q: &Rational| crate::real::div_r(T::of(q.numer().to_f64().unwrap()), T::of(q.denom().to_f64().unwrap()));
    let mut out = [[Complex::new(T::zero(), T::zero()); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let mut z = Complex::new(f(&y[(i, j)]), T::zero());
            for k in 0..2 {
                z = z + tau[k][j] * f(&x[(i, k)]);
            }
            out[i][j] = z;
        }
    }
    out
}

/// Blocks `(A, B, C, D)` of a 4x4 matrix in rational coordinates.
pub fn blocks(m: &RationalMatrix) -> [RationalMatrix; 4] {
    [m.block(0, 0, 2, 2), m.block(0, 2, 2, 2), m.block(2, 0, 2, 2), m.block(2, 2, 2, 2)]
}

const CONDITIONING_FLOOR: f64 = 1e-12;

/// `C tau + D` for `m` in rational coordinates.
pub fn automorphy_matrix<T: Real>(m: &RationalMatrix, tau: &SiegelPoint<T>) -> Result<C2<T>> {
    check_4x4(m)?;
    let [_, _, c, d] = blocks(m);
    Ok(affine(&c, &d, &tau.matrix()))
}

/// `det(C tau + D)` for `m` in rational coordinates.
pub fn automorphy_factor<T: Real>(m: &RationalMatrix, tau: &SiegelPoint<T>) -> Result<Complex<T>> {
    Ok(c2_det(&automorphy_matrix(m, tau)?))
}

fn c2_inverse<T: Real>(a: &C2<T>) -> Result<C2<T>> {
    let det = c2_det(a);
    let scale = c2_norm(a);
    if !(det.norm() > T::of(CONDITIONING_FLOOR) * scale * scale) {
        return Err(Error::Conditioning("C tau + D is numerically singular".into()));
    }
    let inv = crate::real::cinv(det);
    Ok([[a[1][1] * inv, -a[0][1] * inv], [-a[1][0] * inv, a[0][0] * inv]])
}

/// Action `tau -> (A tau + B)(C tau + D)^{-1}` in rational coordinates, or the
/// twisted form `(A tau + B E)(C tau + D E)^{-1} E` in integral coordinates.
pub fn act<T: Real>(m: &RationalMatrix, tau: &SiegelPoint<T>, coords: Coords, d: i64) -> Result<SiegelPoint<T>> {
    check_4x4(m)?;
    let t = tau.matrix();
    let [a, b, c, dd] = blocks(m);
    let (num, den) = match coords {
        Coords::Rational => (affine(&a, &b, &t), affine(&c, &dd, &t)),
        Coords::Integral => {
            let e = RationalMatrix::diagonal(&[rint(1), rint(d)]);
            (affine(&a, &(&b * &e), &t), affine(&c, &(&dd * &e), &t))
        }
    };
    let mut r = c2_mul(&num, &c2_inverse(&den)?);
    if coords == Coords::Integral {
        let e = T::of_i64(d);
        r[0][1] = r[0][1] * e;
        r[1][1] = r[1][1] * e;
    }
    let half = T::of(0.5);
    let out = SiegelPoint { tau1: r[0][0], tau2: (r[0][1] + r[1][0]) * half, tau3: r[1][1] };
    if out.validate().is_err() {
        return Err(Error::Conditioning("image left the Siegel space numerically".into()));
    }
    Ok(out)
}

/// Multiplicity of each `PSL(2, Z/d)` class among the dual actions of
/// `reps` (rational coordinates).
pub fn class_histogram(reps: &[RationalMatrix], d: i64) -> Result<BTreeMap<[i64; 4], usize>> {
    let mut h = BTreeMap::new();
    for r in reps {
        let cls = dual_quotient_action(&to_integral(r, d)?, d)?.psl_class();
        *h.entry(cls).or_insert(0) += 1;
    }
    Ok(h)
}
