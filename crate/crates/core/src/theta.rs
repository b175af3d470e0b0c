//! Genus 1 and genus 2 theta constants, Igusa's `Delta_10`, the slash
//! operator and the symmetrized form `F_0`.
//!
//! Every evaluator is generic over the floating-point backend. Series are
//! summed over a square box in a fixed order, so results are reproducible
//! bit for bit.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{rat, Rational, RationalMatrix};
use crate::groups::{act, automorphy_factor, coset_reps_psl2, Coords, SiegelPoint};
use crate::real::{cexp, cinv, div_r, to_c64, Real};

/// Smallest eigenvalue of `Im tau` accepted by the series evaluators.
pub const LAMBDA_FLOOR: f64 = 1e-3;

/// Half-integral characteristic; `a[i]`, `b[i]` are 0 or 1 and stand for
/// 0 or 1/2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ThetaChar {
    pub a: [u8; 2],
    pub b: [u8; 2],
}

impl ThetaChar {
    pub fn new(a: [u8; 2], b: [u8; 2]) -> Result<Self> {
        if a.iter().chain(b.iter()).any(|&x| x > 1) {
            return Err(Error::Precondition("characteristic entries are 0 or 1 (halves)".into()));
        }
        Ok(Self { a, b })
    }

    /// `4 a.b mod 2`.
    pub fn parity(&self) -> u8 {
        (self.a[0] * self.b[0] + self.a[1] * self.b[1]) % 2
    }

    pub fn is_even(&self) -> bool {
        self.parity() == 0
    }

    /// All 16 characteristics, ordered by `(a, b)`.
    pub fn all() -> Vec<ThetaChar> {
        let mut out = Vec::with_capacity(16);
        for code in 0u8..16 {
            let bit = |k: u8| (code >> k) & 1;
            out.push(ThetaChar { a: [bit(3), bit(2)], b: [bit(1), bit(0)] });
        }
        out
    }

    pub fn even() -> Vec<ThetaChar> {
        Self::all().into_iter().filter(ThetaChar::is_even).collect()
    }

    /// The genus 1 factors `((a1, b1), (a2, b2))` of a diagonal splitting.
    pub fn split(&self) -> [(u8, u8); 2] {
        [(self.a[0], self.b[0]), (self.a[1], self.b[1])]
    }
}

/// Value of a series together with a bound on its total error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Approx<T> {
    pub value: Complex<T>,
    pub error: f64,
    pub terms: u64,
}

impl<T: Real> Approx<T> {
    pub fn exact(value: Complex<T>) -> Self {
        Self { value, error: 0.0, terms: 0 }
    }

    pub fn to_result(&self) -> EvalResult {
        EvalResult { value: to_c64(self.value), tail_bound: self.error, terms_used: self.terms }
    }

    /// Product with error `(|x|+e)(|y|+f) - |x||y|`.
    pub fn mul(&self, other: &Approx<T>) -> Approx<T> {
        let (x, y) = (self.value.norm().to_f64(), other.value.norm().to_f64());
        let error = (x + self.error) * (y + other.error) - x * y + x * y * 4.0 * T::EPS;
        Approx { value: self.value * other.value, error, terms: self.terms + other.terms }
    }

    pub fn scale(&self, c: Complex<T>) -> Approx<T> {
        let s = c.norm().to_f64();
        Approx { value: self.value * c, error: self.error * s * (1.0 + 4.0 * T::EPS), terms: self.terms }
    }
}

/// Serializable result of an evaluator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalResult {
    pub value: Complex<f64>,
    pub tail_bound: f64,
    pub terms_used: u64,
}

impl Serialize for EvalResult {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("EvalResult", 3)?;
        st.serialize_field("value", &[self.value.re, self.value.im])?;
        st.serialize_field("tail_bound", &self.tail_bound)?;
        st.serialize_field("terms_used", &self.terms_used)?;
        st.end()
    }
}

/// `sum_{k >= 0} exp(-pi lambda (x0 + k)^2)`, bounded by a geometric series.
fn one_sided_tail(lambda: f64, x0: f64) -> f64 {
    let pi = std::f64::consts::PI;
    (-pi * lambda * x0 * x0).exp() / (1.0 - (-2.0 * pi * lambda * x0).exp())
}

/// Bound on the genus 2 terms outside the box `|n_i| <= radius`.
fn box_tail(lambda: f64, radius: u64) -> f64 {
    let x0 = radius as f64 + 0.5;
    let full = 2.0 + 1.0 / lambda.sqrt();
    2.0 * (2.0 * one_sided_tail(lambda, x0)) * full
}

/// Tail constant in the radius formula.
const TAIL_CONSTANT: f64 = 8.0;

fn check_tolerance(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Precondition("tolerance must be positive".into()));
    }
    Ok(())
}

/// Truncation radius for smallest eigenvalue `lambda`, enlarged until the
/// certified tail is below `tol`.
pub fn truncation_radius(lambda: f64, tol: f64) -> u64 {
    let guess = ((TAIL_CONSTANT / tol).ln().max(0.0) / (std::f64::consts::PI * lambda)).sqrt();
    let mut n = guess.ceil() as u64 + 2;
    while box_tail(lambda, n) >= tol {
        n += 1;
    }
    n
}

fn conditioned_lambda<T: Real>(tau: &SiegelPoint<T>) -> Result<f64> {
    tau.validate()?;
    let lambda = tau.min_imag_eigenvalue().to_f64();
    if lambda < LAMBDA_FLOOR {
        return Err(Error::Conditioning(format!(
            "smallest eigenvalue of Im tau is {lambda:.3e}, below the floor {LAMBDA_FLOOR:e}"
        )));
    }
    Ok(lambda)
}

/// Smallest tolerance requested from the factors of a product.
pub fn working_floor<T: Real>() -> f64 {
    1e4 * T::EPS
}

/// Sums `start * r * (r w) * (r w^2) ...` for `len` steps, returning the sum
/// and the sum of absolute values. Stops early once terms underflow.
fn geometric_run<T: Real>(start: Complex<T>, ratio: Complex<T>, w: Complex<T>, len: i64) -> (Complex<T>, f64) {
    let mut term = start;
    let mut r = ratio;
    let mut sum = Complex::new(T::zero(), T::zero());
    let mut abs = 0.0;
    for _ in 0..len {
        term = term * r;
        r = r * w;
        let a = term.norm().to_f64();
        if a == 0.0 {
            break;
        }
        abs += a;
        sum = sum + term;
    }
    (sum, abs)
}

/// Genus 2 theta constant with characteristic `ch`.
///
/// Each row `n1` of the box is summed outward from its peak by a two-term
/// recurrence, so only three exponentials are taken per row.
pub fn theta_constant<T: Real>(ch: ThetaChar, tau: &SiegelPoint<T>, tol: f64) -> Result<Approx<T>> {
    check_tolerance(tol)?;
    within(theta_unchecked(ch, tau, tol)?, tol)
}

/// Theta constant whose truncation tail is below `tol`; rounding is
/// added to the error bound without being checked.
fn theta_unchecked<T: Real>(ch: ThetaChar, tau: &SiegelPoint<T>, tol: f64) -> Result<Approx<T>> {
    let lambda = conditioned_lambda(tau)?;
    if !ch.is_even() {
        return Ok(Approx::exact(Complex::new(T::zero(), T::zero())));
    }
    let radius = truncation_radius(lambda, tol);
    let r = radius as i64;
    let half = T::of(0.5);
    let two = T::of(2.0);
    let a = [T::of_i64(ch.a[0] as i64) * half, T::of_i64(ch.a[1] as i64) * half];
    let b = [T::of_i64(ch.b[0] as i64) * half, T::of_i64(ch.b[1] as i64) * half];
    let i_pi = Complex::new(T::zero(), T::PI());
    let exponent = |v1: T, v2: T| {
        let quad = tau.tau1 * (v1 * v1) + tau.tau2 * (two * v1 * v2) + tau.tau3 * (v2 * v2);
        i_pi * (quad + two * (v1 * b[0] + v2 * b[1]))
    };
    // term(v2 + 1) / term(v2) = exp(i pi ((2 v2 + 1) tau3 + 2 v1 tau2 + 2 b2)); the ratio itself
    // shrinks by w = exp(2 pi i tau3) per step in either direction
    let w = cexp(i_pi * tau.tau3 * two);
    let y12 = tau.tau2.im.to_f64();
    let y22 = tau.tau3.im.to_f64();
    let mut sum = Complex::new(T::zero(), T::zero());
    let mut abs_sum = 0.0;
    for n1 in -r..=r {
        let v1 = T::of_i64(n1) + a[0];
        let peak = (-(y12 * v1.to_f64()) / y22 - a[1].to_f64()).round().clamp(-r as f64, r as f64) as i64;
        let v2 = T::of_i64(peak) + a[1];
        let start = cexp(exponent(v1, v2));
        let up = cexp(i_pi * (tau.tau3 * (two * v2 + T::one()) + tau.tau2 * (two * v1) + two * b[1]));
        let down = cexp(-(i_pi * (tau.tau3 * (two * v2 - T::one()) + tau.tau2 * (two * v1) + two * b[1])));
        let (s_up, a_up) = geometric_run(start, up, w, r - peak);
        let (s_down, a_down) = geometric_run(start, down, w, peak + r);
        sum = sum + start + s_up + s_down;
        abs_sum += start.norm().to_f64() + a_up + a_down;
    }
    let terms = ((2 * r + 1) * (2 * r + 1)) as u64;
    // each term carries a relative error growing linearly with the number of recurrence steps
    let rounding = abs_sum * T::EPS * (16.0 + 8.0 * 2.0 * r as f64);
    Ok(Approx { value: sum, error: box_tail(lambda, radius) + rounding, terms })
}

/// Tolerance requested from each theta constant inside a product: the
/// working floor, or tighter when the caller asks for it.
fn factor_tol<T: Real>(tol: f64, count: usize) -> f64 {
    (tol / (4.0 * count as f64)).min(working_floor::<T>())
}

fn within<T: Real>(a: Approx<T>, tol: f64) -> Result<Approx<T>> {
    if a.error >= tol {
        return Err(Error::Conditioning(format!(
            "propagated error {:.3e} does not meet tolerance {tol:.3e}",
            a.error
        )));
    }
    Ok(a)
}

fn delta10_unchecked<T: Real>(tau: &SiegelPoint<T>, theta_tol: f64) -> Result<Approx<T>> {
    let mut acc = Approx::exact(Complex::new(T::one(), T::zero()));
    for ch in ThetaChar::even() {
        let t = theta_unchecked(ch, tau, theta_tol)?;
        acc = acc.mul(&t).mul(&t);
    }
    Ok(acc)
}

/// Igusa's `Delta_10`: product of the squares of the ten even theta
/// constants.
pub fn igusa_delta10<T: Real>(tau: &SiegelPoint<T>, tol: f64) -> Result<Approx<T>> {
    check_tolerance(tol)?;
    within(delta10_unchecked(tau, factor_tol::<T>(tol, 20))?, tol)
}

/// `det(C tau + D)^{-k} f(M tau)` for `m` in rational coordinates.
///
/// `f` receives the tolerance that makes the rescaled value meet `tol`.
pub fn slash<T, F>(f: F, k: i32, m: &RationalMatrix, tau: &SiegelPoint<T>, tol: f64) -> Result<Approx<T>>
where
    T: Real,
    F: Fn(&SiegelPoint<T>, f64) -> Result<Approx<T>>,
{
    let image = act(m, tau, Coords::Rational, 1)?;
    let j = automorphy_factor(m, tau)?;
    let factor = cinv(j).powi(k);
    let inner_tol = tol / factor.norm().to_f64();
    Ok(f(&image, inner_tol)?.scale(factor))
}

/// Weight of `F_0` for a given `mu(d)`.
pub fn f0_weight(mu: i64) -> i64 {
    10 * mu
}

/// `F_0 = prod_M Delta_10 | M` over the coset representatives of
/// `PSL(2, Z/d)`.
pub fn f0<T: Real>(tau: &SiegelPoint<T>, d: i64, tol: f64) -> Result<Approx<T>> {
    check_tolerance(tol)?;
    let reps = coset_reps_psl2(d)?;
    let ftol = factor_tol::<T>(tol, 20 * reps.len());
    let mut acc = Approx::exact(Complex::new(T::one(), T::zero()));
    for m in &reps {
        let v = slash(|t: &SiegelPoint<T>, _| delta10_unchecked(t, ftol), 10, m, tau, tol)?;
        acc = acc.mul(&v);
    }
    within(acc, tol)
}

/// Genus 1 theta function `sum_n exp(pi i n^2 tau + 2 pi i n z)`.
pub fn elliptic_theta<T: Real>(tau: Complex<T>, z: Complex<T>, tol: f64) -> Result<Approx<T>> {
    check_tolerance(tol)?;
    within(elliptic_unchecked(tau, z, tol)?, tol)
}

/// Size of the largest term of `theta(tau, z)`.
fn elliptic_peak(y: f64, w: f64) -> f64 {
    (std::f64::consts::PI * w * w / y).exp()
}

fn elliptic_unchecked<T: Real>(tau: Complex<T>, z: Complex<T>, tol: f64) -> Result<Approx<T>> {
    let y = tau.im.to_f64();
    if !(y > 0.0) {
        return Err(Error::Precondition("Im tau must be positive".into()));
    }
    if y < LAMBDA_FLOOR {
        return Err(Error::Conditioning(format!("Im tau = {y:.3e} is below the floor {LAMBDA_FLOOR:e}")));
    }
    // terms peak near n = -Im z / Im tau
    let w = z.im.to_f64();
    let center = (-w / y).round() as i64;
    let peak = elliptic_peak(y, w);
    let mut radius = ((TAIL_CONSTANT * peak / tol).ln().max(0.0) / (std::f64::consts::PI * y)).sqrt().ceil() as u64 + 2;
    let tail = |r: u64| 2.0 * peak * one_sided_tail(y, r as f64 + 0.5);
    while tail(radius) >= tol {
        radius += 1;
    }
    let r = radius as i64;
    let i_pi = Complex::new(T::zero(), T::PI());
    let mut sum = Complex::new(T::zero(), T::zero());
    let mut abs_sum = 0.0;
    for n in center - r..=center + r {
        let nn = T::of_i64(n);
        let term = cexp(i_pi * (tau * (nn * nn) + z * (T::of(2.0) * nn)));
        abs_sum += term.norm().to_f64();
        sum = sum + term;
    }
    Ok(Approx { value: sum, error: tail(radius) + abs_sum * T::EPS * 8.0, terms: (2 * r + 1) as u64 })
}

/// Genus 1 theta constant with characteristic `(a/2, b/2)`.
pub fn elliptic_theta_char<T: Real>(a: u8, b: u8, tau: Complex<T>, tol: f64) -> Result<Approx<T>> {
    // theta[a,b](tau) = exp(pi i a^2 tau / 4 + pi i a b / 2) theta(tau, (a tau + b) / 2)
    let half = T::of(0.5);
    let (af, bf) = (T::of_i64(a as i64), T::of_i64(b as i64));
    let z = (tau * af + bf) * half;
    let shift = cexp(Complex::new(T::zero(), T::PI()) * (tau * (af * af * T::of(0.25)) + af * bf * half));
    Ok(elliptic_theta(tau, z, tol)?.scale(shift))
}

/// Relative residual of the quasi-periodicity law
/// `theta(tau, z + k tau + m) = exp(-pi i k^2 tau - 2 pi i k z) theta(tau, z)`.
///
/// Both sides are summed to the working precision relative to their
/// largest term.
pub fn verify_formula3<T: Real>(tau: Complex<T>, z: Complex<T>, k: i64, m: i64) -> Result<f64> {
    let (kf, mf) = (T::of_i64(k), T::of_i64(m));
    let y = tau.im.to_f64();
    let eval = |w: Complex<T>| elliptic_unchecked(tau, w, working_floor::<T>() * elliptic_peak(y, w.im.to_f64()));
    let lhs = eval(z + tau * kf + mf)?;
    let rhs = eval(z)?;
    let exponent = Complex::new(T::zero(), T::PI()) * (tau * (-kf * kf) - z * (T::of(2.0) * kf));
    let predicted = rhs.value * cexp(exponent);
    let den = predicted.norm();
    if den.to_f64() == 0.0 {
        return Err(Error::Conditioning("theta vanishes at the base point".into()));
    }
    Ok(div_r((lhs.value - predicted).norm(), den).to_f64())
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Estimation("need at least two points for a slope".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Estimation("abscissae are all equal".into()));
    }
    Ok(sxy / sxx)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeEstimate {
    pub slope: f64,
    pub points_used: usize,
    pub points_rejected: usize,
}

/// Default ladder `10^-1, ..., 10^-4`.
pub fn default_eps_ladder() -> Vec<f64> {
    (1..=4).map(|k| 10f64.powi(-k)).collect()
}

fn usable_log(a: &Approx<impl Real>) -> Option<f64> {
    let v = a.value.norm().to_f64();
    (v > 0.0 && a.error < 0.01 * v).then(|| v.ln())
}

/// Slope of `log|g(tau_1, eps, tau_3)|` against `log eps` over a decreasing
/// ladder of `eps`.
pub fn diagonal_slope<T, G>(tau1: Complex<T>, tau3: Complex<T>, ladder: &[f64], g: G) -> Result<SlopeEstimate>
where
    T: Real,
    G: Fn(&SiegelPoint<T>) -> Result<Approx<T>>,
{
    if tau1.im <= T::zero() || tau3.im <= T::zero() {
        return Err(Error::Precondition("Im tau_1 and Im tau_3 must be positive".into()));
    }
    if ladder.iter().any(|&e| !(e > 0.0)) || ladder.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Precondition("eps ladder must be positive and decreasing".into()));
    }
    let (mut xs, mut ys, mut rejected) = (Vec::new(), Vec::new(), 0);
    for &eps in ladder {
        let tau = SiegelPoint::new(tau1, Complex::new(T::of(eps), T::zero()), tau3)?;
        match g(&tau).ok().as_ref().and_then(usable_log) {
            Some(l) => {
                xs.push(eps.ln());
                ys.push(l);
            }
            None => rejected += 1,
        }
    }
    if xs.len() < 3 {
        return Err(Error::Estimation(format!("only {} usable points on the ladder", xs.len())));
    }
    Ok(SlopeEstimate { slope: ls_slope(&xs, &ys)?, points_used: xs.len(), points_rejected: rejected })
}

/// Vanishing order of `Delta_10` along the diagonal.
pub fn vanishing_order_diagonal<T: Real>(tau1: Complex<T>, tau3: Complex<T>, ladder: &[f64], tol: f64) -> Result<SlopeEstimate> {
    diagonal_slope(tau1, tau3, ladder, |t| igusa_delta10(t, tol))
}

/// Vanishing order of a single squared theta constant along the diagonal.
pub fn vanishing_order_factor<T: Real>(
    ch: ThetaChar,
    tau1: Complex<T>,
    tau3: Complex<T>,
    ladder: &[f64],
    tol: f64,
) -> Result<SlopeEstimate> {
    diagonal_slope(tau1, tau3, ladder, |t| theta_constant(ch, t, tol).map(|a| a.mul(&a)))
}

/// Slope of `log|Delta_10|` against `Im tau_3` with `tau_1`, `tau_2` and
/// `Re tau_3` held fixed.
pub fn cusp_decay_rate<T: Real>(base: &SiegelPoint<T>, heights: &[f64], tol: f64) -> Result<f64> {
    if heights.len() < 2 || heights.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("heights must be increasing with at least two entries".into()));
    }
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for &h in heights {
        let tau = SiegelPoint::new(base.tau1, base.tau2, Complex::new(base.tau3.re, T::of(h)))?;
        let v = igusa_delta10(&tau, tol)?;
        let l = usable_log(&v).ok_or_else(|| Error::Estimation(format!("Delta_10 below precision at height {h}")))?;
        xs.push(h);
        ys.push(l);
    }
    ls_slope(&xs, &ys)
}

/// Coefficients of an exponent `2 pi i (x k^2 tau_3 + y k tau_2 + z k m)`.
pub type ExponentCoeffs = [Rational; 3];

/// Exponent of the conormal section under the shear `(k, m)` at level `n`.
pub fn conormal_shear_exponent(n: i64) -> ExponentCoeffs {
    [rat(-1, n), rat(-2, n), rat(0, 1)]
}

/// Exponent of the quasi-periodicity factor of the genus 1 theta function.
pub fn theta_shift_exponent() -> ExponentCoeffs {
    [rat(-1, 2), rat(-1, 1), rat(0, 1)]
}

/// Checks `conormal = (2/n) * theta` coefficientwise.
pub fn exponent_identity_holds(n: i64) -> bool {
    let c = rat(2, n);
    conormal_shear_exponent(n).iter().zip(theta_shift_exponent().iter()).all(|(x, y)| *x == &c * y)
}
