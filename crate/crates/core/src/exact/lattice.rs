use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::matrix::{Rational, RationalMatrix};
use super::normal_form::{hnf, snf};
use crate::error::{Error, Result};

/// Scales a rational matrix to an integer one: returns `(D, D*m)`.
fn clear_denominators(m: &RationalMatrix) -> (BigInt, super::IntMatrix) {
    let den = m.common_denominator();
    let scaled = m.scale(&Rational::from_integer(den.clone()));
    (den, scaled.to_int().expect("denominators cleared"))
}

/// Canonical column basis of the lattice spanned by the columns of `basis`.
///
/// Zero columns are dropped; the result is the column HNF of the scaled
/// generators, scaled back.
pub fn normalize_basis(basis: &RationalMatrix) -> RationalMatrix {
    let (den, int) = clear_denominators(basis);
    let (h, _) = hnf(&int);
    let keep: Vec<usize> = (0..h.cols()).filter(|&j| h.column(j).iter().any(|x| !x.is_zero())).collect();
    let mut out = RationalMatrix::zeros(basis.rows(), keep.len());
    for (c, &j) in keep.iter().enumerate() {
        for i in 0..basis.rows() {
            out[(i, c)] = Rational::new(h[(i, j)].clone(), den.clone());
        }
    }
    out
}

/// Column basis of `{ s in Q^m : w * s in Z^r }`.
///
/// `w` must have rank `m`, otherwise the set is not a lattice.
pub fn integrality_lattice(w: &RationalMatrix) -> Result<RationalMatrix> {
    let m = w.cols();
    let (den, int) = clear_denominators(w);
    let s = snf(&int);
    if s.diagonal.len() < m || s.diagonal.iter().take(m).any(Zero::is_zero) {
        return Err(Error::Precondition("integrality conditions do not cut out a lattice".into()));
    }
    let mut basis = RationalMatrix::zeros(m, m);
    for j in 0..m {
        let f = Rational::new(den.clone(), s.diagonal[j].clone());
        for i in 0..m {
            basis[(i, j)] = Rational::from_integer(s.right[(i, j)].clone()) * &f;
        }
    }
    Ok(normalize_basis(&basis))
}

/// Integer coordinates of `v` in the full-column-rank `basis`, if any.
pub fn coordinates(basis: &RationalMatrix, v: &[Rational]) -> Option<Vec<Rational>> {
    let bt = basis.transpose();
    let gram = &bt * basis;
    let rhs = bt.mul_vec(v).ok()?;
    let x = gram.inverse().ok()?.mul_vec(&rhs).ok()?;
    (basis.mul_vec(&x).ok()? == v).then_some(x)
}

pub fn contains(basis: &RationalMatrix, v: &[Rational]) -> bool {
    coordinates(basis, v).is_some_and(|x| x.iter().all(|c| c.is_integer()))
}

/// Lattice equality of two column bases.
pub fn same_lattice(a: &RationalMatrix, b: &RationalMatrix) -> bool {
    a.rows() == b.rows() && normalize_basis(a) == normalize_basis(b)
}

/// How a lattice sits relative to a reference lattice of the same rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Contained in the reference (equality included).
    Coarser,
    /// Strictly contains the reference.
    Finer,
    Incomparable,
}

/// Elementary divisors of `lattice` measured in the basis of `reference`,
/// together with the inclusion direction they imply.
pub fn relative_divisors(lattice: &RationalMatrix, reference: &RationalMatrix) -> Result<(Vec<Rational>, Direction)> {
    if lattice.rows() != reference.rows() || lattice.cols() != reference.cols() || !reference.is_square() {
        return Err(Error::DimensionMismatch("relative divisors need full-rank lattices of equal rank".into()));
    }
    let coords = &reference.inverse()? * lattice;
    let (den, int) = clear_denominators(&coords);
    let divisors: Vec<Rational> =
        snf(&int).diagonal.into_iter().map(|e| Rational::new(e, den.clone())).collect();
    if divisors.iter().any(Zero::is_zero) {
        return Err(Error::Precondition("lattice is not of full rank".into()));
    }
    let dir = if divisors.iter().all(|e| e.is_integer()) {
        Direction::Coarser
    } else if divisors.iter().all(|e| e.recip().is_integer()) {
        Direction::Finer
    } else {
        Direction::Incomparable
    };
    Ok((divisors, dir))
}

/// True when `x` or its reciprocal is an integer dividing `d`.
pub fn divides_either_way(x: &Rational, d: i64) -> bool {
    let d = BigInt::from(d);
    let one = BigInt::one();
    let check = |q: &Rational| q.is_integer() && (&d % q.to_integer()).is_zero();
    !x.is_zero() && (check(x) || check(&(Rational::from_integer(one) / x)))
}
