//! Closed-form invariants of modular curves and Shioda modular surfaces,
//! the intersection calculus on `S(k)` and the coefficient identities of
//! the canonical class on the paramodular threefolds.
//!
//! Everything here is exact.

use std::collections::BTreeMap;
use std::ops::{Add, Mul};

use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{format_rational, rat, rint, Rational};

fn prime_divisors(mut n: i64) -> Vec<i64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// `prod_{p | k} (1 - 1/p^2)`.
fn euler_factor(k: i64) -> Rational {
    prime_divisors(k).into_iter().fold(rint(1), |acc, p| acc * (rint(1) - rat(1, p * p)))
}

fn to_integer(q: Rational, what: &str) -> Result<i64> {
    if !q.is_integer() {
        return Err(Error::Internal(format!("{what} is not an integer: {q}")));
    }
    i64::try_from(q.to_integer()).map_err(|_| Error::Internal(format!("{what} overflows")))
}

fn check_level(k: i64) -> Result<()> {
    if k < 3 {
        return Err(Error::Precondition(format!("level {k} is below 3")));
    }
    Ok(())
}

/// Half the order of `SL(2, Z/d)`, with `mu(1) = 1`.
pub fn mu(d: i64) -> Result<i64> {
    match d {
        d if d < 1 => Err(Error::Precondition("d must be positive".into())),
        1 => Ok(1),
        2 => Ok(6),
        _ => to_integer(rat(d * d * d, 2) * euler_factor(d), "mu"),
    }
}

/// Number of cusps of `X(k)`.
pub fn cusp_number_t(k: i64) -> Result<i64> {
    check_level(k)?;
    to_integer(rat(k * k, 2) * euler_factor(k), "t(k)")
}

pub fn genus_x(k: i64) -> Result<i64> {
    let t = cusp_number_t(k)?;
    to_integer(rint(1) + rat((k - 6) * t, 12), "genus")
}

/// Degree of the Hodge line bundle on `X(k)`.
pub fn deg_l_x(k: i64) -> Result<Rational> {
    Ok(rat(k * cusp_number_t(k)?, 12))
}

/// Divisor class on the Shioda surface `S(k)` in the span of the fibre `F`,
/// the pullback `L_X` of the Hodge bundle and the torsion sections `L_ij`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiodaClass {
    pub k: i64,
    pub coeff_f: Rational,
    pub coeff_lx: Rational,
    pub coeff_sections: BTreeMap<(i64, i64), Rational>,
}

impl ShiodaClass {
    pub fn zero(k: i64) -> Result<Self> {
        check_level(k)?;
        Ok(Self { k, coeff_f: rint(0), coeff_lx: rint(0), coeff_sections: BTreeMap::new() })
    }

    pub fn fibre(k: i64) -> Result<Self> {
        Ok(Self { coeff_f: rint(1), ..Self::zero(k)? })
    }

    pub fn hodge(k: i64) -> Result<Self> {
        Ok(Self { coeff_lx: rint(1), ..Self::zero(k)? })
    }

    pub fn section(k: i64, i: i64, j: i64) -> Result<Self> {
        let mut c = Self::zero(k)?;
        c.coeff_sections.insert((i.rem_euclid(k), j.rem_euclid(k)), rint(1));
        Ok(c)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = self.clone();
        out.coeff_f *= c;
        out.coeff_lx *= c;
        for v in out.coeff_sections.values_mut() {
            *v *= c;
        }
        out.prune();
        out
    }

    fn prune(&mut self) {
        self.coeff_sections.retain(|_, v| !v.is_zero());
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        same_level(self, other)?;
        let mut out = self.clone();
        out.coeff_f += &other.coeff_f;
        out.coeff_lx += &other.coeff_lx;
        for (key, v) in &other.coeff_sections {
            *out.coeff_sections.entry(*key).or_insert_with(|| rint(0)) += v;
        }
        out.prune();
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.coeff_f.is_zero() && self.coeff_lx.is_zero() && self.coeff_sections.is_empty()
    }
}

fn same_level(a: &ShiodaClass, b: &ShiodaClass) -> Result<()> {
    if a.k != b.k {
        return Err(Error::Precondition(format!("classes live on S({}) and S({})", a.k, b.k)));
    }
    Ok(())
}

/// Canonical class `((k - 4)/4) t(k) F`.
pub fn canonical_class_s(k: i64) -> Result<ShiodaClass> {
    let t = cusp_number_t(k)?;
    Ok(ShiodaClass { coeff_f: rat((k - 4) * t, 4), ..ShiodaClass::zero(k)? })
}

/// Intersection pairing on `S(k)`.
pub fn intersect(a: &ShiodaClass, b: &ShiodaClass) -> Result<Rational> {
    same_level(a, b)?;
    let deg = deg_l_x(a.k)?;
    let sum = |m: &BTreeMap<(i64, i64), Rational>| m.values().fold(rint(0), |acc, v| acc + v);
    let (sa, sb) = (sum(&a.coeff_sections), sum(&b.coeff_sections));
    let mut total = &a.coeff_f * &sb + &b.coeff_f * &sa;
    total += (&a.coeff_lx * &sb + &b.coeff_lx * &sa) * &deg;
    for (key, v) in &a.coeff_sections {
        if let Some(w) = b.coeff_sections.get(key) {
            total -= v * w * &deg;
        }
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NormalBundle {
    Central { n: i64, p: i64 },
    Peripheral { n: i64 },
}

impl NormalBundle {
    pub fn level(&self) -> Result<i64> {
        match *self {
            NormalBundle::Central { n, p } => {
                if n < 1 || p < 1 || n.gcd(&p) != 1 {
                    return Err(Error::Precondition("central boundary needs coprime n, p".into()));
                }
                Ok(n * p)
            }
            NormalBundle::Peripheral { n } => Ok(n),
        }
    }
}

/// `-(2/k) (L_X + sum_ij L_ij)` on `S(k)`.
pub fn normal_bundle_class(kind: NormalBundle) -> Result<ShiodaClass> {
    let k = kind.level()?;
    check_level(k)?;
    let c = rat(-2, k);
    let mut sections = BTreeMap::new();
    for i in 0..k {
        for j in 0..k {
            sections.insert((i, j), c.clone());
        }
    }
    Ok(ShiodaClass { k, coeff_f: rint(0), coeff_lx: c, coeff_sections: sections })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Prop22Report {
    pub n: i64,
    pub p: i64,
    pub nc_dot_f: String,
    pub nc_dot_l00: String,
    pub deg_k_l00: String,
    pub genus: i64,
    pub fibre_degree_ok: bool,
    pub section_degree_ok: bool,
    pub adjunction_ok: bool,
    pub passed: bool,
}

/// Degree checks for the normal bundle of a central boundary component.
pub fn verify_prop22(n: i64, p: i64) -> Result<Prop22Report> {
    let nc = normal_bundle_class(NormalBundle::Central { n, p })?;
    let k = n * p;
    let nc_f = intersect(&nc, &ShiodaClass::fibre(k)?)?;
    let nc_l = intersect(&nc, &ShiodaClass::section(k, 0, 0)?)?;
    let t = cusp_number_t(k)?;
    let deg_k = rat((k - 6) * t, 6);
    let genus = genus_x(k)?;
    let fibre_degree_ok = nc_f == rint(-2 * k);
    let section_degree_ok = nc_l.is_zero();
    let adjunction_ok = deg_k == rint(2 * genus - 2);
    Ok(Prop22Report {
        n,
        p,
        nc_dot_f: format_rational(&nc_f),
        nc_dot_l00: format_rational(&nc_l),
        deg_k_l00: format_rational(&deg_k),
        genus,
        fibre_degree_ok,
        section_degree_ok,
        adjunction_ok,
        passed: fibre_degree_ok && section_degree_ok && adjunction_ok,
    })
}

/// `K.C` for the closure of the diagonal curve, `(n/4 - 1) t(n)`.
pub fn kc_diagonal_curve(n: i64) -> Result<Rational> {
    boundary_positivity(n)
}

/// `(k/4 - 1) t(k)`.
pub fn boundary_positivity(k: i64) -> Result<Rational> {
    Ok((rat(k, 4) - rint(1)) * rint(cusp_number_t(k)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Symbol {
    L,
    D,
    DEff,
    K,
}

/// Formal rational combination of `L`, `D`, `D_eff` and `K`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct FormalDivisorExpr {
    pub coeffs: BTreeMap<Symbol, Rational>,
}

impl FormalDivisorExpr {
    pub fn term(s: Symbol, c: Rational) -> Self {
        let mut e = Self::default();
        if !c.is_zero() {
            e.coeffs.insert(s, c);
        }
        e
    }

    pub fn coeff(&self, s: Symbol) -> Rational {
        self.coeffs.get(&s).cloned().unwrap_or_else(|| rint(0))
    }

    /// Replaces every occurrence of `s` by `by`.
    pub fn substitute(&self, s: Symbol, by: &FormalDivisorExpr) -> Self {
        let c = self.coeff(s);
        let mut rest = self.clone();
        rest.coeffs.remove(&s);
        rest + by.clone() * c
    }

    pub fn to_strings(&self) -> BTreeMap<Symbol, String> {
        self.coeffs.iter().map(|(s, c)| (*s, format_rational(c))).collect()
    }
}

impl Add for FormalDivisorExpr {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (s, c) in rhs.coeffs {
            *self.coeffs.entry(s).or_insert_with(|| rint(0)) += c;
        }
        self.coeffs.retain(|_, c| !c.is_zero());
        self
    }
}

impl Mul<Rational> for FormalDivisorExpr {
    type Output = Self;
    fn mul(mut self, rhs: Rational) -> Self {
        for c in self.coeffs.values_mut() {
            *c *= &rhs;
        }
        self.coeffs.retain(|_, c| !c.is_zero());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KDecomposition {
    pub n: i64,
    pub d: i64,
    pub expression: BTreeMap<Symbol, String>,
    pub l_coefficient_positive: bool,
    #[serde(skip)]
    pub expr: FormalDivisorExpr,
}

/// Substitutes `D = (10/n) L - (1/(n mu(d))) D_eff` into `K = 3L - D`.
pub fn k_decomposition(n: i64, d: i64) -> Result<KDecomposition> {
    if n < 1 {
        return Err(Error::Precondition("n must be positive".into()));
    }
    let m = mu(d)?;
    let k = FormalDivisorExpr::term(Symbol::L, rint(3)) + FormalDivisorExpr::term(Symbol::D, rint(-1));
    let d_expr = FormalDivisorExpr::term(Symbol::L, rat(10, n)) + FormalDivisorExpr::term(Symbol::DEff, rat(-1, n * m));
    let expr = k.substitute(Symbol::D, &d_expr);
    Ok(KDecomposition {
        n,
        d,
        expression: expr.to_strings(),
        l_coefficient_positive: expr.coeff(Symbol::L).is_positive(),
        expr,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscrepancyCheck {
    pub n: i64,
    pub d: i64,
    /// Exclusive lower bound on the discrepancy.
    pub alpha_lower_bound: Rational,
}

impl DiscrepancyCheck {
    pub fn new(n: i64, d: i64) -> Self {
        Self { n, d, alpha_lower_bound: rint(-1) }
    }
}

/// True when `mu(d)(3n - 10) + alpha > 0` for every admissible `alpha`.
pub fn discrepancy_ok(check: &DiscrepancyCheck) -> Result<bool> {
    if check.n < 1 {
        return Err(Error::Precondition("n must be positive".into()));
    }
    let coeff = rint(mu(check.d)? * (3 * check.n - 10));
    Ok(coeff + &check.alpha_lower_bound >= rint(0))
}

/// `3 - (12 + eps)/n > 0`.
pub fn weissauer_margin(n: i64, eps: &Rational) -> Result<bool> {
    if n < 1 || !eps.is_positive() {
        return Err(Error::Precondition("need n >= 1 and eps > 0".into()));
    }
    Ok((rint(3) - (rint(12) + eps) / rint(n)).is_positive())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantRow {
    pub k: i64,
    pub t: i64,
    pub genus: i64,
    pub deg_l: String,
}

pub fn invariant_table(k_min: i64, k_max: i64) -> Result<Vec<InvariantRow>> {
    (k_min.max(3)..=k_max)
        .map(|k| {
            Ok(InvariantRow { k, t: cusp_number_t(k)?, genus: genus_x(k)?, deg_l: format_rational(&deg_l_x(k)?) })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes() {
        assert_eq!(prime_divisors(60), vec![2, 3, 5]);
        assert_eq!(prime_divisors(49), vec![7]);
        assert!(prime_divisors(1).is_empty());
    }

    #[test]
    fn substitution_removes_the_symbol() {
        let e = k_decomposition(4, 2).unwrap().expr;
        assert_eq!(e.coeff(Symbol::D), rint(0));
        assert!(!e.coeffs.contains_key(&Symbol::K));
    }
}
