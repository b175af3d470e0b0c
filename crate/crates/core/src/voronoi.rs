//! Cones of the genus 2 second Voronoi fan and their basicness with
//! respect to lattices of symmetric matrices.
//!
//! A symmetric form `[[a, b], [b, c]]` is identified with the vector
//! `(a, b, c)`, which is also how the translation parts
//! `S = [[s1, s2], [s2, s3]]` of the cusp stabilizers are stored.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::cusps::{plane_stabilizer, IsotropicPlane};
use crate::error::{Error, Result};
use crate::exact::{format_rational, rint, Rational, RationalMatrix};
use crate::groups::{Flavor, GroupSpec};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymForm {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
}

impl SymForm {
    pub fn new(a: Rational, b: Rational, c: Rational) -> Self {
        Self { a, b, c }
    }

    pub fn int(a: i64, b: i64, c: i64) -> Self {
        Self::new(rint(a), rint(b), rint(c))
    }

    pub fn vector(&self) -> [Rational; 3] {
        [self.a.clone(), self.b.clone(), self.c.clone()]
    }

    pub fn determinant(&self) -> Rational {
        &self.a * &self.c - &self.b * &self.b
    }

    pub fn is_psd(&self) -> bool {
        !self.a.is_negative() && !self.c.is_negative() && !self.determinant().is_negative()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.a.is_positive() && self.determinant().is_positive()
    }

    /// `g q g^T` for a rational 2x2 matrix `g`.
    pub fn congruent(&self, g: &[[Rational; 2]; 2]) -> SymForm {
        let q = [[self.a.clone(), self.b.clone()], [self.b.clone(), self.c.clone()]];
        let entry = |i: usize, j: usize| {
            let mut s = rint(0);
            for k in 0..2 {
                for l in 0..2 {
                    s += &g[i][k] * &q[k][l] * &g[j][l];
                }
            }
            s
        };
        SymForm::new(entry(0, 0), entry(0, 1), entry(1, 1))
    }

    pub fn add(&self, other: &SymForm) -> SymForm {
        SymForm::new(&self.a + &other.a, &self.b + &other.b, &self.c + &other.c)
    }

    pub fn scale(&self, s: &Rational) -> SymForm {
        SymForm::new(&self.a * s, &self.b * s, &self.c * s)
    }

    pub fn to_strings(&self) -> [String; 3] {
        [format_rational(&self.a), format_rational(&self.b), format_rational(&self.c)]
    }
}

fn column_matrix(forms: &[SymForm; 3]) -> RationalMatrix {
    let mut m = RationalMatrix::zeros(3, 3);
    for (j, f) in forms.iter().enumerate() {
        for (i, x) in f.vector().into_iter().enumerate() {
            m[(i, j)] = x;
        }
    }
    m
}

/// Simplicial cone spanned by three positive semidefinite forms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cone3 {
    pub generators: [SymForm; 3],
}

impl Cone3 {
    pub fn new(generators: [SymForm; 3]) -> Result<Self> {
        if generators.iter().any(|g| !g.is_psd()) {
            return Err(Error::Precondition("cone generators must be positive semidefinite".into()));
        }
        if column_matrix(&generators).determinant()?.is_zero() {
            return Err(Error::Precondition("cone generators are linearly dependent".into()));
        }
        Ok(Self { generators })
    }

    pub fn generator_matrix(&self) -> RationalMatrix {
        column_matrix(&self.generators)
    }

    /// Image under `q -> g q g^T`.
    pub fn transport(&self, g: &[[Rational; 2]; 2]) -> Result<Cone3> {
        Cone3::new(self.generators.clone().map(|q| q.congruent(g)))
    }
}

/// Full-rank lattice in the space of symmetric 2x2 matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sym2Lattice {
    pub basis: [SymForm; 3],
}

impl Sym2Lattice {
    pub fn new(basis: [SymForm; 3]) -> Result<Self> {
        if column_matrix(&basis).determinant()?.is_zero() {
            return Err(Error::Precondition("lattice basis is linearly dependent".into()));
        }
        Ok(Self { basis })
    }

    /// Lattice whose basis is given by the columns of a 3x3 matrix.
    pub fn from_columns(m: &RationalMatrix) -> Result<Self> {
        if m.rows() != 3 || m.cols() != 3 {
            return Err(Error::DimensionMismatch("a Sym2 lattice basis is 3x3".into()));
        }
        let col = |j: usize| SymForm::new(m[(0, j)].clone(), m[(1, j)].clone(), m[(2, j)].clone());
        Self::new([col(0), col(1), col(2)])
    }

    /// `Sym_2(Z)`.
    pub fn standard() -> Self {
        Self { basis: [SymForm::int(1, 0, 0), SymForm::int(0, 1, 0), SymForm::int(0, 0, 1)] }
    }

    pub fn scaled(&self, n: &Rational) -> Result<Self> {
        Self::new(self.basis.clone().map(|b| b.scale(n)))
    }

    pub fn basis_matrix(&self) -> RationalMatrix {
        column_matrix(&self.basis)
    }

    /// Coordinates of `q` in the lattice basis.
    pub fn coordinates(&self, q: &SymForm) -> Result<[Rational; 3]> {
        let x = self.basis_matrix().inverse()?.mul_vec(&q.vector())?;
        Ok([x[0].clone(), x[1].clone(), x[2].clone()])
    }
}

/// `x^2`, `y^2`, `(x - y)^2`.
pub fn principal_cone() -> Cone3 {
    Cone3 { generators: [SymForm::int(1, 0, 0), SymForm::int(0, 0, 1), SymForm::int(1, -1, 1)] }
}

/// Image of the cone under `q -> u q u^T` for unimodular `u`.
pub fn gl2_translate(cone: &Cone3, u: [[i64; 2]; 2]) -> Result<Cone3> {
    let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
    if det.abs() != 1 {
        return Err(Error::Precondition("translation matrix is not unimodular".into()));
    }
    cone.transport(&u.map(|r| r.map(rint)))
}

/// Integer coordinates of the primitive lattice point on the ray through
/// `q`.
pub fn primitive_ray_point(q: &SymForm, lattice: &Sym2Lattice) -> Result<[BigInt; 3]> {
    let x = lattice.coordinates(q)?;
    if x.iter().all(Zero::is_zero) {
        return Err(Error::Precondition("ray through the origin only".into()));
    }
    let den = x.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let ints: Vec<BigInt> = x.iter().map(|v| (v * Rational::from_integer(den.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    Ok([&ints[0] / &g, &ints[1] / &g, &ints[2] / &g])
}

/// Determinant of the primitive ray points in lattice coordinates.
pub fn basic_determinant(cone: &Cone3, lattice: &Sym2Lattice) -> Result<BigInt> {
    let pts = cone.generators.iter().map(|g| primitive_ray_point(g, lattice)).collect::<Result<Vec<_>>>()?;
    let m = RationalMatrix::new(
        3,
        3,
        (0..3).flat_map(|i| pts.iter().map(move |p| Rational::from_integer(p[i].clone()))).collect(),
    )?;
    Ok(m.determinant()?.to_integer())
}

/// Determinant of the primitive ray points in the ambient `(a, b, c)`
/// coordinates.
pub fn ambient_determinant(cone: &Cone3, lattice: &Sym2Lattice) -> Result<Rational> {
    let pts = cone
        .generators
        .iter()
        .map(|g| {
            let x = primitive_ray_point(g, lattice)?;
            let mut q = SymForm::int(0, 0, 0);
            for (b, c) in lattice.basis.iter().zip(x.iter()) {
                q = q.add(&b.scale(&Rational::from_integer(c.clone())));
            }
            Ok(q)
        })
        .collect::<Result<Vec<_>>>()?;
    column_matrix(&[pts[0].clone(), pts[1].clone(), pts[2].clone()]).determinant()
}

/// True when the primitive ray points form a basis of the lattice.
pub fn is_basic(cone: &Cone3, lattice: &Sym2Lattice) -> Result<bool> {
    Ok(basic_determinant(cone, lattice)?.abs().is_one())
}

/// Words of length at most 3 in the generators `T`, `T^-1`, `S` of
/// `GL(2, Z)`, in a fixed order.
pub fn translate_sample() -> Vec<(String, [[i64; 2]; 2])> {
    let gens: [(&str, [[i64; 2]; 2]); 4] =
        [("T", [[1, 1], [0, 1]]), ("t", [[1, -1], [0, 1]]), ("S", [[0, -1], [1, 0]]), ("R", [[0, 1], [1, 0]])];
    let mul = |x: [[i64; 2]; 2], y: [[i64; 2]; 2]| -> [[i64; 2]; 2] {
        let mut z = [[0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                z[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
            }
        }
        z
    };
    let mut out = vec![("1".to_string(), [[1, 0], [0, 1]])];
    let mut frontier = out.clone();
    for _ in 0..3 {
        let mut next = Vec::new();
        for (w, m) in &frontier {
            for (g, gm) in &gens {
                let word = if w == "1" { g.to_string() } else { format!("{w}{g}") };
                next.push((word, mul(*m, *gm)));
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeVerdict {
    pub word: String,
    pub determinant: String,
    pub basic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlaneVerdict {
    pub plane: [[i64; 4]; 2],
    pub lattice: Vec<[String; 3]>,
    /// Diagonal of the matrix `g` carrying the principal cone into the
    /// cusp's coordinates.
    pub transport: [String; 2],
    /// Whether the level lattice is `n` times the level 1 lattice.
    pub scales_by_n: bool,
    pub cones: Vec<ConeVerdict>,
    pub basic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmoothnessReport {
    pub p: i64,
    pub n: i64,
    pub flavor: Flavor,
    pub planes: Vec<PlaneVerdict>,
    pub smooth: bool,
}

/// Basicness of the transported principal cone and its sampled translates
/// against one lattice.
pub fn lattice_verdicts(lattice: &Sym2Lattice, transport: &[[Rational; 2]; 2]) -> Result<(Vec<ConeVerdict>, bool)> {
    let base = principal_cone();
    let mut cones = Vec::new();
    for (word, u) in translate_sample() {
        let cone = gl2_translate(&base, u)?.transport(transport)?;
        let det = basic_determinant(&cone, lattice)?;
        cones.push(ConeVerdict { word, determinant: det.to_string(), basic: det.abs().is_one() });
    }
    let basic = cones.iter().all(|c| c.basic);
    Ok((cones, basic))
}

/// `diag(1, d)`.
pub fn paramodular_transport(d: i64) -> [[Rational; 2]; 2] {
    [[rint(1), rint(0)], [rint(0), rint(d)]]
}

fn rational_sqrt(q: &Rational) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    let (n, d) = (q.numer().sqrt(), q.denom().sqrt());
    let r = Rational::new(n, d);
    (&r * &r == *q).then_some(r)
}

/// `g = diag(x, z)` with `lattice = g Sym_2(Z) g^T`, when the lattice has
/// that shape.
pub fn sym2_shape(lattice: &RationalMatrix) -> Option<[[Rational; 2]; 2]> {
    let normal = crate::exact::normalize_basis(lattice);
    let off_diagonal = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).any(|(i, j)| i != j && !normal[(i, j)].is_zero());
    if normal.cols() != 3 || off_diagonal {
        return None;
    }
    let (x, z) = (rational_sqrt(&normal[(0, 0)])?, rational_sqrt(&normal[(2, 2)])?);
    (normal[(1, 1)] == &x * &z).then(|| [[x, rint(0)], [rint(0), z]])
}

/// The `p + 1` isotropic planes through the central line `e_3`:
/// `<e_3, c e_2 + e_4>` for `0 <= c < p` and `<e_3, e_2>`.
pub fn representative_planes(p: i64) -> Result<Vec<IsotropicPlane>> {
    let mut out = Vec::new();
    for c in 0..p {
        out.push(IsotropicPlane::new([0, 0, 1, 0], [0, c, 0, 1])?);
    }
    out.push(IsotropicPlane::new([0, 0, 1, 0], [0, 1, 0, 0])?);
    Ok(out)
}

fn without_level(flavor: Flavor) -> Flavor {
    if flavor.has_lev() {
        Flavor::Lev
    } else {
        Flavor::Plain
    }
}

/// Smoothness of the toroidal compactification at every plane type. The
/// principal cone is carried into each cusp's coordinates by the `g` that
/// makes the level 1 lattice equal to `g Sym_2(Z) g^T`.
pub fn smoothness_report_for(p: i64, n: i64, flavor: Flavor) -> Result<SmoothnessReport> {
    crate::cusps::check_odd_prime(p)?;
    if n < 1 || n.gcd(&p) != 1 {
        return Err(Error::Precondition("need gcd(p, n) = 1".into()));
    }
    let spec = GroupSpec::rational(p, n, flavor);
    let reference = GroupSpec::rational(p, 1, without_level(flavor));
    let mut planes = Vec::new();
    for h in representative_planes(p)? {
        let level_one = plane_stabilizer(&h, &reference)?.lattice;
        let report = plane_stabilizer(&h, &spec)?;
        let g = sym2_shape(&level_one).ok_or_else(|| {
            Error::Precondition(format!("the level 1 lattice of {:?} is not of the form g Sym2(Z) g^T", h.basis()))
        })?;
        let scale = if flavor.has_level() { rint(n) } else { rint(1) };
        let scales_by_n = crate::exact::same_lattice(&report.lattice, &level_one.scale(&scale));
        let lattice = Sym2Lattice::from_columns(&report.lattice)?;
        let (cones, basic) = lattice_verdicts(&lattice, &g)?;
        planes.push(PlaneVerdict {
            plane: h.basis(),
            lattice: lattice.basis.iter().map(SymForm::to_strings).collect(),
            transport: [format_rational(&g[0][0]), format_rational(&g[1][1])],
            scales_by_n,
            cones,
            basic,
        });
    }
    let smooth = planes.iter().all(|v| v.basic);
    Ok(SmoothnessReport { p, n, flavor, planes, smooth })
}

/// Smoothness verdict for the level-`n` subgroup of the paramodular group of
/// an odd prime level `p`.
pub fn smoothness_report(p: i64, n: i64) -> Result<SmoothnessReport> {
    smoothness_report_for(p, n, Flavor::LevLevelN)
}

/// Verdict for a lattice given directly, against the untransported
/// principal cone and its sampled translates.
pub fn lattice_smoothness(lattice: &Sym2Lattice) -> Result<(Vec<ConeVerdict>, bool)> {
    lattice_verdicts(lattice, &paramodular_transport(1))
}
