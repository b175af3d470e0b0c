//! Floating-point backends for the numerical evaluators.
//!
//! `f64` is used for up to 15 significant digits, a double-double type for
//! anything beyond. The double-double transcendental functions are
//! implemented here because the upstream ones stop around 1e-18.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst};
use twofloat::TwoFloat;

/// The double-double backend type.
pub type DoubleDouble = TwoFloat;

pub trait Real: Float + FloatConst + Debug + Display + Send + Sync + 'static {
    /// Relative unit roundoff of the backend.
    const EPS: f64;

    fn of(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn exp_r(self) -> Self;
    fn ln_r(self) -> Self;
    fn sin_cos_r(self) -> (Self, Self);
    fn recip_r(self) -> Self;

    fn of_i64(n: i64) -> Self {
        Self::of(n as f64)
    }
}

impl Real for f64 {
    const EPS: f64 = f64::EPSILON;

    fn of(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn exp_r(self) -> Self {
        self.exp()
    }
    fn ln_r(self) -> Self {
        self.ln()
    }
    fn sin_cos_r(self) -> (Self, Self) {
        self.sin_cos()
    }
    fn recip_r(self) -> Self {
        self.recip()
    }
}

const LN2_DD: (f64, f64) = (0.6931471805599453, 2.3190468138462996e-17);

fn dd_ln2() -> TwoFloat {
    TwoFloat::new_add(LN2_DD.0, LN2_DD.1)
}

fn dd_exp(x: TwoFloat) -> TwoFloat {
    let hi = x.hi();
    if hi.is_nan() {
        return x;
    }
    if hi < -745.0 {
        return TwoFloat::from(0.0);
    }
    if hi > 709.0 {
        return TwoFloat::from(f64::INFINITY);
    }
    let k = (hi / LN2_DD.0).round();
    let r = (x - dd_ln2() * k) / 1024.0;
    // exp(r) - 1 by Taylor, then undo the scaling by squaring (1+s)
    let mut term = r;
    let mut s = r;
    for n in 2..=14 {
        term = term * r / (n as f64);
        s += term;
        if term.hi().abs() < 1e-36 {
            break;
        }
    }
    for _ in 0..10 {
        s = s * 2.0 + s * s;
    }
    let e = s + 1.0;
    let k = k as i32;
    // split the power of two so neither factor overflows
    let (k1, k2) = (k / 2, k - k / 2);
    e * 2f64.powi(k1) * 2f64.powi(k2)
}

fn dd_sin_cos(x: TwoFloat) -> (TwoFloat, TwoFloat) {
    let half_pi = twofloat::consts::FRAC_PI_2;
    let j = (x.hi() / half_pi.hi()).round();
    let r = x - half_pi * j;
    let r2 = r * r;
    let mut sin = r;
    let mut cos = TwoFloat::from(1.0);
    let mut ts = r;
    let mut tc = TwoFloat::from(1.0);
    let mut n = 1.0;
    loop {
        tc = -tc * r2 / (n * (n + 1.0));
        ts = -ts * r2 / ((n + 1.0) * (n + 2.0));
        cos += tc;
        sin += ts;
        n += 2.0;
        if tc.hi().abs() < 1e-36 && ts.hi().abs() < 1e-36 {
            break;
        }
    }
    match (j as i64).rem_euclid(4) {
        0 => (sin, cos),
        1 => (cos, -sin),
        2 => (-sin, -cos),
        _ => (-cos, sin),
    }
}

impl Real for TwoFloat {
    const EPS: f64 = 1e-32;

    fn of(x: f64) -> Self {
        TwoFloat::from(x)
    }
    fn to_f64(self) -> f64 {
        self.hi() + self.lo()
    }
    fn exp_r(self) -> Self {
        dd_exp(self)
    }
    fn ln_r(self) -> Self {
        let y = TwoFloat::from(self.hi().ln());
        y + self * dd_exp(-y) - 1.0
    }
    fn sin_cos_r(self) -> (Self, Self) {
        dd_sin_cos(self)
    }
    // upstream division drops the low word of the residual; two Newton steps on 1/x
    fn recip_r(self) -> Self {
        let one = TwoFloat::from(1.0);
        let mut y = TwoFloat::from(self.hi().recip());
        for _ in 0..2 {
            y = y + y * (one - self * y);
        }
        y
    }
}

/// Complex exponential built on the backend's own `exp` and `sin_cos`.
pub fn cexp<T: Real>(z: Complex<T>) -> Complex<T> {
    let r = z.re.exp_r();
    let (s, c) = z.im.sin_cos_r();
    Complex::new(r * c, r * s)
}

/// `a / b` through `recip_r`.
pub fn div_r<T: Real>(a: T, b: T) -> T {
    a * b.recip_r()
}

pub fn cinv<T: Real>(z: Complex<T>) -> Complex<T> {
    let s = (z.re * z.re + z.im * z.im).recip_r();
    Complex::new(z.re * s, -z.im * s)
}

pub fn cdiv<T: Real>(a: Complex<T>, b: Complex<T>) -> Complex<T> {
    a * cinv(b)
}

pub fn to_c64<T: Real>(z: Complex<T>) -> Complex<f64> {
    Complex::new(z.re.to_f64(), z.im.to_f64())
}

pub fn of_c64<T: Real>(z: Complex<f64>) -> Complex<T> {
    Complex::new(T::of(z.re), T::of(z.im))
}

/// Backend selection from a requested number of significant digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    Double,
    DoubleDouble,
}

impl Backend {
    pub fn for_digits(digits: u32) -> Self {
        if digits <= 15 {
            Backend::Double
        } else {
            Backend::DoubleDouble
        }
    }
}
