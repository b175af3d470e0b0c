//! Exact linear algebra over the integers and rationals.

mod lattice;
mod matrix;
mod normal_form;

pub use lattice::{
    contains, coordinates, divides_either_way, integrality_lattice, normalize_basis, relative_divisors, same_lattice,
    Direction,
};
pub use matrix::{
    format_rational, is_symplectic, parse_rational, rat, rint, standard_j, IntMatrix, Rational, RationalMatrix,
};
pub use normal_form::{ext_gcd, hnf, rank, snf, SmithDecomposition};
