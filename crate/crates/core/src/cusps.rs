//! Isotropic lines and planes, the unipotent parts of their stabilizers and
//! the boundary charts around the standard cusp.
//!
//! Vectors act from the left as rows: a frame `M` in `Sp(4, Z)` carries the
//! standard line `e3` (resp. plane `e3 ^ e4`) to row 3 (resp. rows 3 and 4)
//! of `M`, and stabilizer elements are written `M^{-1} u M`.

use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{
    ext_gcd, format_rational, hnf, integrality_lattice, is_symplectic, normalize_basis, relative_divisors, rint, snf,
    standard_j, Direction, IntMatrix, Rational, RationalMatrix,
};
use crate::groups::{act, is_member, to_integral, upper_unipotent, Coords, GroupSpec, SiegelPoint};

fn big(x: i64) -> BigInt {
    BigInt::from(x)
}

/// `omega(x, y) = x^T J y`
fn omega(x: &[BigInt], y: &[BigInt]) -> BigInt {
    &x[0] * &y[2] + &x[1] * &y[3] - &x[2] * &y[0] - &x[3] * &y[1]
}

/// `J * x`
fn j_mul(x: &[BigInt]) -> Vec<BigInt> {
    vec![x[2].clone(), x[3].clone(), -&x[0], -&x[1]]
}

/// Primitive integer 4-vector, first nonzero entry positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IsotropicLine {
    vector: [i64; 4],
}

impl IsotropicLine {
    pub fn new(v: [i64; 4]) -> Result<Self> {
        let g = v.iter().fold(0i64, |g, x| g.gcd(x));
        if g == 0 {
            return Err(Error::Precondition("zero vector does not span a line".into()));
        }
        let mut w = v.map(|x| x / g);
        if w.iter().find(|x| **x != 0).is_some_and(|x| *x < 0) {
            w = w.map(|x| -x);
        }
        Ok(Self { vector: w })
    }

    pub fn vector(&self) -> [i64; 4] {
        self.vector
    }

    fn big(&self) -> Vec<BigInt> {
        self.vector.iter().map(|&x| big(x)).collect()
    }
}

/// Isotropic plane given by an HNF-normalized integer basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IsotropicPlane {
    basis: [[i64; 4]; 2],
}

impl IsotropicPlane {
    /// Isotropy is checked for the standard form (rational coordinates).
    pub fn new(v: [i64; 4], w: [i64; 4]) -> Result<Self> {
        let vb: Vec<BigInt> = v.iter().map(|&x| big(x)).collect();
        let wb: Vec<BigInt> = w.iter().map(|&x| big(x)).collect();
        if !omega(&vb, &wb).is_zero() {
            return Err(Error::Precondition("plane is not isotropic".into()));
        }
        let m = IntMatrix::new(4, 2, (0..4).flat_map(|i| [vb[i].clone(), wb[i].clone()]).collect())?;
        if crate::exact::rank(&m) != 2 {
            return Err(Error::Precondition("plane basis is linearly dependent".into()));
        }
        let sat = saturate(&m);
        let (h, _) = hnf(&sat);
        let col = |j: usize| -> [i64; 4] { std::array::from_fn(|i| h[(i, j)].to_i64().expect("small entries")) };
        Ok(Self { basis: [col(0), col(1)] })
    }

    pub fn basis(&self) -> [[i64; 4]; 2] {
        self.basis
    }

    /// `h0 = e3 ^ e4`
    pub fn standard() -> Self {
        Self::new([0, 0, 1, 0], [0, 0, 0, 1]).expect("standard plane")
    }
}

/// Basis (as columns) of `(Q-span of the columns) cap Z^n`.
fn saturate(m: &IntMatrix) -> IntMatrix {
    let s = snf(m);
    // m = L^{-1} D R^{-1}; the first r columns of L^{-1} span the saturation
    let linv = RationalMatrix::from_int(&s.left).inverse().expect("unimodular").to_int().expect("integral inverse");
    let r = s.diagonal.iter().filter(|x| !x.is_zero()).count();
    let mut out = IntMatrix::zeros(m.rows(), r);
    for j in 0..r {
        for i in 0..m.rows() {
            out[(i, j)] = linv[(i, j)].clone();
        }
    }
    out
}

fn rows_to_matrix(rows: &[Vec<BigInt>; 4]) -> RationalMatrix {
    let r: Vec<Vec<Rational>> =
        rows.iter().map(|row| row.iter().cloned().map(Rational::from_integer).collect()).collect();
    RationalMatrix::from_rows(r).expect("4x4")
}

/// Some `f` with `omega(f, v) = 1`, for primitive `v`.
fn symplectic_partner(v: &[BigInt]) -> Result<Vec<BigInt>> {
    let jv = j_mul(v);
    // ext-gcd fold: coefficients with sum c_i * jv_i = gcd = 1
    let mut g = BigInt::zero();
    let mut coef = vec![BigInt::zero(); 4];
    for i in 0..4 {
        let (ng, x, y) = ext_gcd(&g, &jv[i]);
        for c in coef.iter_mut() {
            *c *= &x;
        }
        coef[i] = y;
        g = ng;
    }
    if !g.is_one() {
        return Err(Error::Precondition("vector is not primitive".into()));
    }
    Ok(coef)
}

fn check_frame(m: &RationalMatrix) -> Result<()> {
    if !m.is_integral() || !is_symplectic(&m.transpose(), &standard_j(2))? {
        return Err(Error::Internal("frame construction produced a non-symplectic matrix".into()));
    }
    Ok(())
}

/// Integer symplectic matrix whose third row is the line's vector.
///
/// When `gcd(l3, l4) = 1` the frame has vanishing upper-right block and the
/// returned flag is `true`; otherwise a general symplectic completion is used.
pub fn frame_for_line(l: &IsotropicLine) -> Result<(RationalMatrix, bool)> {
    let v = l.big();
    let (g, x, y) = ext_gcd(&v[2], &v[3]);
    if g.is_one() {
        // D = [[l3, l4], [-y, x]], A = D^{-T}, row 3 of C = (l1, l2)
        let d = [[v[2].clone(), v[3].clone()], [-y.clone(), x.clone()]];
        let a = [[x.clone(), y.clone()], [-v[3].clone(), v[2].clone()]];
        // X = C D^T symmetric with first row (l1, l2) D^T and x22 = 0
        let x11 = &v[0] * &d[0][0] + &v[1] * &d[0][1];
        let x12 = &v[0] * &d[1][0] + &v[1] * &d[1][1];
        // C = X D^{-T}; D^{-T} = a
        let xm = [[x11, x12.clone()], [x12, BigInt::zero()]];
        let c: Vec<Vec<BigInt>> =
            (0..2).map(|i| (0..2).map(|j| &xm[i][0] * &a[0][j] + &xm[i][1] * &a[1][j]).collect()).collect();
        let rows = [
            vec![a[0][0].clone(), a[0][1].clone(), BigInt::zero(), BigInt::zero()],
            vec![a[1][0].clone(), a[1][1].clone(), BigInt::zero(), BigInt::zero()],
            vec![c[0][0].clone(), c[0][1].clone(), d[0][0].clone(), d[0][1].clone()],
            vec![c[1][0].clone(), c[1][1].clone(), d[1][0].clone(), d[1][1].clone()],
        ];
        let m = rows_to_matrix(&rows);
        check_frame(&m)?;
        return Ok((m, true));
    }
    let f1 = symplectic_partner(&v)?;
    // projection onto the orthogonal complement of span(f1, v)
    let proj = |e: &[BigInt]| -> Vec<BigInt> {
        let a = omega(e, &v);
        let b = omega(e, &f1);
        (0..4).map(|i| &e[i] - &a * &f1[i] + &b * &v[i]).collect()
    };
    let mut cols = Vec::new();
    for k in 0..4 {
        let mut e = vec![BigInt::zero(); 4];
        e[k] = BigInt::one();
        cols.push(proj(&e));
    }
    let gens = IntMatrix::new(4, 4, (0..4).flat_map(|i| cols.iter().map(move |c| c[i].clone())).collect())?;
    let (h, _) = hnf(&gens);
    let (mut g1, mut g2) = (h.column(0), h.column(1));
    let w = omega(&g1, &g2);
    if w == big(-1) {
        std::mem::swap(&mut g1, &mut g2);
    } else if w != big(1) {
        return Err(Error::Internal("complement is not unimodular".into()));
    }
    let m = rows_to_matrix(&[f1, g1, v, g2]);
    check_frame(&m)?;
    Ok((m, false))
}

/// Integer symplectic matrix whose rows 3 and 4 span the plane.
pub fn frame_for_plane(h: &IsotropicPlane) -> Result<RationalMatrix> {
    let [b1, b2] = h.basis();
    let v3: Vec<BigInt> = b1.iter().map(|&x| big(x)).collect();
    let v4: Vec<BigInt> = b2.iter().map(|&x| big(x)).collect();
    if !omega(&v3, &v4).is_zero() {
        return Err(Error::Precondition("plane is not isotropic for the standard form".into()));
    }
    // x with (omega(x, v3), omega(x, v4)) = e_k
    let jv3 = j_mul(&v3);
    let jv4 = j_mul(&v4);
    let a = IntMatrix::new(2, 4, jv3.iter().chain(jv4.iter()).cloned().collect())?;
    let s = snf(&a);
    if s.diagonal.iter().any(|x| !x.is_one()) {
        return Err(Error::Precondition("plane basis is not saturated".into()));
    }
    // a = L^{-1} [I 0] R^{-1}, so x = R [L e_k; 0]
    let solve = |k: usize| -> Vec<BigInt> {
        let y: Vec<BigInt> = (0..2).map(|i| s.left[(i, k)].clone()).collect();
        (0..4).map(|i| &s.right[(i, 0)] * &y[0] + &s.right[(i, 1)] * &y[1]).collect()
    };
    let f1 = solve(0);
    let mut f2 = solve(1);
    let c = omega(&f1, &f2);
    for i in 0..4 {
        f2[i] -= &c * &v3[i];
    }
    let m = rows_to_matrix(&[f1, f2, v3, v4]);
    check_frame(&m)?;
    Ok(m)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilizerLatticeReport {
    pub rank: usize,
    /// Lattice basis: `[s]` for lines, `[s1, s2, s3]` per vector for planes.
    pub basis: Vec<Vec<String>>,
    pub elementary_divisors_vs_reference: Vec<String>,
    pub direction: Direction,
    pub frame: RationalMatrix,
    /// Line frames only: whether the frame has a vanishing upper-right block.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block_zero_frame: Option<bool>,
    /// Basis elements are members and no basis vector divided by a prime
    /// dividing `d * n` gives further members.
    pub certified: bool,
    #[serde(skip)]
    pub lattice: RationalMatrix,
}

/// Integrality conditions on `s` for `I + sum s_k N_k` to lie in the group.
/// Each `N_k` is given in rational coordinates and must be nilpotent and
/// symplectic in the Lie algebra sense.
fn condition_matrix(ns: &[RationalMatrix], spec: &GroupSpec) -> Result<RationalMatrix> {
    let d = spec.d;
    let level = rint(spec.level());
    let tilde: Vec<RationalMatrix> = ns.iter().map(|n| to_integral(n, d)).collect::<Result<_>>()?;
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for i in 0..4 {
        for j in 0..4 {
            rows.push(tilde.iter().map(|t| &t[(i, j)] / &level).collect());
        }
    }
    if spec.flavor.has_lev() {
        let dd = rint(d);
        for (i, j) in [(1, 1), (1, 3), (3, 1), (3, 3)] {
            rows.push(tilde.iter().map(|t| &t[(i, j)] / &dd).collect());
        }
    }
    RationalMatrix::from_rows(rows)
}

fn member_of(ns: &[RationalMatrix], s: &[Rational], spec: &GroupSpec) -> Result<bool> {
    let mut g = RationalMatrix::identity(4);
    for (n, x) in ns.iter().zip(s) {
        g = &g + &n.scale(x);
    }
    is_member(&g, &spec.with_coords(Coords::Rational))
}

fn primes_of(mut x: i64) -> Vec<i64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= x {
        if x % p == 0 {
            out.push(p);
            while x % p == 0 {
                x /= p;
            }
        }
        p += 1;
    }
    if x > 1 {
        out.push(x);
    }
    out
}

fn certify(ns: &[RationalMatrix], lattice: &RationalMatrix, spec: &GroupSpec) -> Result<bool> {
    let m = lattice.cols();
    let col = |j: usize| lattice.column(j);
    for j in 0..m {
        if !member_of(ns, &col(j), spec)? {
            return Ok(false);
        }
    }
    for p in primes_of(spec.d * spec.level()) {
        let total = (p as usize).pow(m as u32);
        for code in 1..total {
            let mut c = code;
            let mut v = vec![Rational::zero(); ns.len()];
            for j in 0..m {
                let cj = rint((c % p as usize) as i64);
                c /= p as usize;
                for (vi, bj) in v.iter_mut().zip(col(j)) {
                    *vi += &cj * bj;
                }
            }
            let v: Vec<Rational> = v.into_iter().map(|x| x / rint(p)).collect();
            if member_of(ns, &v, spec)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn sym_generators() -> [RationalMatrix; 3] {
    [
        upper_unipotent([rint(1), rint(0), rint(0)]),
        upper_unipotent([rint(0), rint(1), rint(0)]),
        upper_unipotent([rint(0), rint(0), rint(1)]),
    ]
    .map(|u| &u - &RationalMatrix::identity(4))
}

fn build_report(
    ns: &[RationalMatrix],
    spec: &GroupSpec,
    frame: RationalMatrix,
    block_zero_frame: Option<bool>,
) -> Result<StabilizerLatticeReport> {
    let w = condition_matrix(ns, spec)?;
    let lattice = integrality_lattice(&w)?;
    let m = ns.len();
    let reference = RationalMatrix::identity(m).scale(&rint(spec.level()));
    let (divs, direction) = relative_divisors(&lattice, &reference)?;
    let certified = certify(ns, &lattice, spec)?;
    let basis = (0..lattice.cols()).map(|j| lattice.column(j).iter().map(format_rational).collect()).collect();
    Ok(StabilizerLatticeReport {
        rank: m,
        basis,
        elementary_divisors_vs_reference: divs.iter().map(format_rational).collect(),
        direction,
        frame,
        block_zero_frame,
        certified,
        lattice,
    })
}

/// Nilpotent part `M^{-1} E M` conjugated by the frame.
fn conjugate(frame: &RationalMatrix, e: &RationalMatrix) -> Result<RationalMatrix> {
    Ok(&(&frame.inverse()? * e) * frame)
}

/// Rank 1 lattice of `s` with `M^{-1} T(s) M` in the group, `T(s) = I + s E13`.
pub fn line_stabilizer(l: &IsotropicLine, spec: &GroupSpec) -> Result<StabilizerLatticeReport> {
    let (frame, block_zero) = frame_for_line(l)?;
    let [e13, _, _] = sym_generators();
    let n = conjugate(&frame, &e13)?;
    build_report(&[n], spec, frame, Some(block_zero))
}

/// Rank 3 lattice of `S` with `M^{-1} u(S) M` in the group.
pub fn plane_stabilizer(h: &IsotropicPlane, spec: &GroupSpec) -> Result<StabilizerLatticeReport> {
    let frame = frame_for_plane(h)?;
    let ns = sym_generators().iter().map(|e| conjugate(&frame, e)).collect::<Result<Vec<_>>>()?;
    build_report(&ns, spec, frame, None)
}

/// Brute-force generator of the line lattice: the least positive `q / d`
/// with `q <= bound` whose unipotent lies in the group.
pub fn line_stabilizer_scan(l: &IsotropicLine, spec: &GroupSpec, bound: i64) -> Result<Option<Rational>> {
    let (frame, _) = frame_for_line(l)?;
    let [e13, _, _] = sym_generators();
    let n = conjugate(&frame, &e13)?;
    for q in 1..=bound {
        let s = Rational::new(big(q), big(spec.d));
        if member_of(std::slice::from_ref(&n), &[s.clone()], spec)? {
            return Ok(Some(s));
        }
    }
    Ok(None)
}

/// Plane lattice obtained by scanning `S in (1/d) Sym2(Z)` with numerators
/// in `[-bound, bound]`, as an independent check of the exact solve.
pub fn plane_stabilizer_scan(h: &IsotropicPlane, spec: &GroupSpec, bound: i64) -> Result<RationalMatrix> {
    let frame = frame_for_plane(h)?;
    let ns = sym_generators().iter().map(|e| conjugate(&frame, e)).collect::<Result<Vec<_>>>()?;
    let d = spec.d;
    let mut found: Vec<Vec<Rational>> = Vec::new();
    for a in -bound..=bound {
        for b in -bound..=bound {
            for c in -bound..=bound {
                if (a, b, c) == (0, 0, 0) {
                    continue;
                }
                let s = vec![Rational::new(big(a), big(d)), Rational::new(big(b), big(d)), Rational::new(big(c), big(d))];
                if member_of(&ns, &s, spec)? {
                    found.push(s);
                }
            }
        }
    }
    if found.is_empty() {
        return Ok(RationalMatrix::zeros(3, 0));
    }
    let mut gens = RationalMatrix::zeros(3, found.len());
    for (j, s) in found.iter().enumerate() {
        for i in 0..3 {
            gens[(i, j)] = s[i].clone();
        }
    }
    Ok(normalize_basis(&gens))
}

pub(crate) fn check_odd_prime(p: i64) -> Result<()> {
    if p < 3 || p % 2 == 0 || primes_of(p) != vec![p] {
        return Err(Error::Precondition(format!("{p} is not an odd prime")));
    }
    Ok(())
}

fn p_l0_element(k: i64, s: i64, m: i64, abcd: [i64; 4]) -> RationalMatrix {
    let [a, b, c, d] = abcd;
    RationalMatrix::from_i64(&[[1, k, s, m], [0, a, m, b], [0, 0, 1, 0], [0, c, -k, d]])
}

/// Generators of the unipotent and Levi parts of the stabilizer of `e3` in
/// `Gamma^lev_{1,p}(n)`, in rational coordinates.
pub fn p_l0_generators(p: i64, n: i64) -> Result<Vec<RationalMatrix>> {
    check_odd_prime(p)?;
    if n < 1 || p.gcd(&n) != 1 {
        return Err(Error::Precondition(format!("need gcd(p, n) = 1 (p={p}, n={n})")));
    }
    let np = n * p;
    let mut gens = vec![
        p_l0_element(0, n, 0, [1, 0, 0, 1]),
        p_l0_element(n, 0, 0, [1, 0, 0, 1]),
        p_l0_element(0, 0, np, [1, 0, 0, 1]),
        p_l0_element(0, 0, 0, [1, np * p, 0, 1]),
        p_l0_element(0, 0, 0, [1, 0, n, 1]),
    ];
    if let Some(abcd) = search_gamma1_element(p, n) {
        gens.push(p_l0_element(0, 0, 0, abcd));
    }
    let spec = GroupSpec::rational(p, n, crate::groups::Flavor::LevLevelN);
    for g in &gens {
        if !is_member(g, &spec)? {
            return Err(Error::Internal(format!("generator outside the group: {g:?}")));
        }
    }
    Ok(gens)
}

/// An element of the level group on `span(e2, e4)` with `a != 1` and `c != 0`.
fn search_gamma1_element(p: i64, n: i64) -> Option<[i64; 4]> {
    let np = n * p;
    for i in 1..=20i64 {
        let a = 1 + np * i;
        for j in 1..=200i64 {
            let c = n * j;
            // need d = (1 + b c) / a with b = n p^2 t, d = 1 mod np
            for t in -200..=200i64 {
                let b = np * p * t;
                let num = 1 + b * c;
                if num % a == 0 {
                    let d = num / a;
                    if (d - 1).rem_euclid(np) == 0 {
                        return Some([a, b, c, d]);
                    }
                }
            }
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TitsCounts {
    pub central_lines: i64,
    pub peripheral_lines: i64,
    pub planes: i64,
}

pub fn tits_counts(p: i64) -> Result<TitsCounts> {
    check_odd_prime(p)?;
    Ok(TitsCounts { central_lines: 1, peripheral_lines: (p * p - 1) / 2, planes: p + 1 })
}

/// Recognized shapes of boundary-chart elements around `e3`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChartElement {
    Translation { s: i64 },
    Shear { k: i64, m: i64 },
    Levi { a: i64, b: i64, c: i64, d: i64 },
}

pub fn classify_chart_element(g: &RationalMatrix) -> Result<ChartElement> {
    let gi = g.to_int().ok_or_else(|| Error::Precondition("element is not integral".into()))?;
    let e = |i: usize, j: usize| gi[(i, j)].to_i64().unwrap_or(i64::MAX);
    let fixed = e(0, 0) == 1 && e(1, 0) == 0 && e(2, 0) == 0 && e(3, 0) == 0 && e(2, 1) == 0 && e(2, 2) == 1 && e(2, 3) == 0;
    if g.rows() != 4 || g.cols() != 4 || !fixed {
        return Err(Error::Precondition("element is not of boundary-chart shape".into()));
    }
    let (k, s, m) = (e(0, 1), e(0, 2), e(0, 3));
    let (a, b, c, d) = (e(1, 1), e(1, 3), e(3, 1), e(3, 3));
    let levi_trivial = (a, b, c, d) == (1, 0, 0, 1);
    if levi_trivial && k == 0 && m == 0 && e(1, 2) == 0 && e(3, 2) == 0 {
        return Ok(ChartElement::Translation { s });
    }
    if levi_trivial && s == 0 && e(1, 2) == m && e(3, 2) == -k {
        return Ok(ChartElement::Shear { k, m });
    }
    if k == 0 && s == 0 && m == 0 && e(1, 2) == 0 && e(3, 2) == 0 && a * d - b * c == 1 {
        return Ok(ChartElement::Levi { a, b, c, d });
    }
    Err(Error::Precondition("element mixes shear and Levi parts".into()))
}

/// `|t1' / (t1 * factor) - 1|` where `t1 = exp(2 pi i tau1 / n)` and the
/// factor is the predicted transformation of the boundary coordinate.
pub fn verify_cusp_coordinates(p: i64, n: i64, g: &RationalMatrix, tau: &SiegelPoint) -> Result<f64> {
    check_odd_prime(p)?;
    let kind = classify_chart_element(g)?;
    let moved = act(g, tau, Coords::Rational, p)?;
    let two_pi_i_over_n = Complex::new(0.0, 2.0 * std::f64::consts::PI / n as f64);
    let (t2, t3) = (tau.tau2, tau.tau3);
    let exponent = match kind {
        ChartElement::Translation { s } => Complex::new(s as f64, 0.0),
        ChartElement::Shear { k, m } => {
            let (k, m) = (k as f64, m as f64);
            t3 * (k * k) + t2 * (2.0 * k) + k * m
        }
        ChartElement::Levi { c, d, .. } => {
            let c = c as f64;
            -(t2 * t2 * c) / (t3 * c + d as f64)
        }
    };
    let t1 = (tau.tau1 * two_pi_i_over_n).exp();
    let t1_moved = (moved.tau1 * two_pi_i_over_n).exp();
    let factor = (exponent * two_pi_i_over_n).exp();
    Ok((t1_moved / (t1 * factor) - 1.0).norm())
}
