use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::matrix::IntMatrix;

/// Returns `(g, x, y)` with `g = gcd(a, b) >= 0` and `x*a + y*b = g`.
pub fn ext_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let e = a.extended_gcd(b);
    if e.gcd.is_negative() {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

/// Column Hermite normal form `h = m * transform` with `transform` unimodular.
///
/// Pivots are found row by row; each pivot is positive and the entries of
/// its row in earlier columns are reduced into `[0, pivot)`.
pub fn hnf(m: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let (rows, cols) = (m.rows(), m.cols());
    let mut h = m.clone();
    let mut u = IntMatrix::identity(cols);
    let mut pc = 0;
    for r in 0..rows {
        if pc == cols {
            break;
        }
        for j in pc + 1..cols {
            if h[(r, j)].is_zero() {
                continue;
            }
            if h[(r, pc)].is_zero() {
                h.swap_cols(pc, j);
                u.swap_cols(pc, j);
                continue;
            }
            let a = h[(r, pc)].clone();
            let b = h[(r, j)].clone();
            let (g, x, y) = ext_gcd(&a, &b);
            let (p, q) = (&a / &g, &b / &g);
            // new pc = x*c_pc + y*c_j, new j = -q*c_pc + p*c_j
            let nq = -q;
            h.combine_cols(pc, j, &x, &y, &nq, &p);
            u.combine_cols(pc, j, &x, &y, &nq, &p);
        }
        if h[(r, pc)].is_zero() {
            continue;
        }
        if h[(r, pc)].is_negative() {
            h.negate_col(pc);
            u.negate_col(pc);
        }
        let piv = h[(r, pc)].clone();
        for j in 0..pc {
            let f = -h[(r, j)].div_floor(&piv);
            if !f.is_zero() {
                h.add_col(j, pc, &f);
                u.add_col(j, pc, &f);
            }
        }
        pc += 1;
    }
    (h, u)
}

/// Smith decomposition `left * m * right = diag(diagonal)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmithDecomposition {
    pub diagonal: Vec<BigInt>,
    #[serde(skip)]
    pub left: IntMatrix,
    #[serde(skip)]
    pub right: IntMatrix,
}

pub fn snf(m: &IntMatrix) -> SmithDecomposition {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = m.clone();
    let mut left = IntMatrix::identity(rows);
    let mut right = IntMatrix::identity(cols);
    let k = rows.min(cols);
    for t in 0..k {
        // smallest nonzero entry in the trailing block as pivot
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !a[(i, j)].is_zero()
                    && best.map_or(true, |(bi, bj)| a[(i, j)].abs() < a[(bi, bj)].abs())
                {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap_rows(t, pi);
        left.swap_rows(t, pi);
        a.swap_cols(t, pj);
        right.swap_cols(t, pj);
        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                if a[(i, t)].is_zero() {
                    continue;
                }
                let (p, b) = (a[(t, t)].clone(), a[(i, t)].clone());
                if b.is_multiple_of(&p) {
                    let f = -(&b / &p);
                    a.add_row(i, t, &f);
                    left.add_row(i, t, &f);
                    continue;
                }
                let (g, x, y) = ext_gcd(&p, &b);
                let (pp, bb) = (&p / &g, &b / &g);
                let nb = -bb;
                a.combine_rows(t, i, &x, &y, &nb, &pp);
                left.combine_rows(t, i, &x, &y, &nb, &pp);
            }
            for j in t + 1..cols {
                if a[(t, j)].is_zero() {
                    continue;
                }
                let (p, b) = (a[(t, t)].clone(), a[(t, j)].clone());
                if b.is_multiple_of(&p) {
                    let f = -(&b / &p);
                    a.add_col(j, t, &f);
                    right.add_col(j, t, &f);
                    continue;
                }
                let (g, x, y) = ext_gcd(&p, &b);
                let (pp, bb) = (&p / &g, &b / &g);
                let nb = -bb;
                a.combine_cols(t, j, &x, &y, &nb, &pp);
                right.combine_cols(t, j, &x, &y, &nb, &pp);
                dirty = true;
            }
            if dirty && (t + 1..rows).any(|i| !a[(i, t)].is_zero()) {
                continue;
            }
            // enforce divisibility of the remaining block by the pivot
            let p = a[(t, t)].clone();
            let bad = (t + 1..rows)
                .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                .find(|&(i, j)| !a[(i, j)].is_multiple_of(&p));
            match bad {
                Some((i, _)) => {
                    let one = BigInt::one();
                    a.add_row(t, i, &one);
                    left.add_row(t, i, &one);
                }
                None => break,
            }
        }
        if a[(t, t)].is_negative() {
            a.negate_row(t);
            left.negate_row(t);
        }
    }
    let diagonal = (0..k).map(|i| a[(i, i)].clone()).collect();
    SmithDecomposition { diagonal, left, right }
}

/// Rank of an integer matrix (via its Smith form).
pub fn rank(m: &IntMatrix) -> usize {
    snf(m).diagonal.iter().filter(|d| !d.is_zero()).count()
}
