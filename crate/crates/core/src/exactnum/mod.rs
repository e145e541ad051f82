//! Exact arithmetic in real quadratic fields `Q(sqrt(m))`.
//!
//! A [`QuadValue`] is stored as `(p + q*sqrt(m)) / d` with arbitrary
//! precision integers in canonical form (`d >= 1`, `gcd(p, q, d) = 1`).
//! Rational values (`q = 0`) always carry `m = 0`, so a rational number is
//! compatible with every field while two irrational values from different
//! fields refuse to combine.
//!
//! The Galois conjugation [`QuadValue::star`] doubles as the internal-space
//! projection of the cut-and-project schemes built in [`crate::cps`].

mod text;

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest bit length accepted for any of `p`, `q`, `d` by the checked
/// operations. Results beyond this raise [`Error::Capacity`].
pub const MAX_BITS: u64 = 1 << 14;

/// Exact element `(p + q*sqrt(m)) / d` of a real quadratic field.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadValue {
    p: BigInt,
    q: BigInt,
    d: BigInt,
    m: u32,
}

/// Binary ring operation selector for [`quad_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

/// Checked ring operation on two values of the same field.
pub fn quad_arith(a: &QuadValue, b: &QuadValue, op: ArithOp) -> Result<QuadValue> {
    match op {
        ArithOp::Add => a.checked_add(b),
        ArithOp::Sub => a.checked_sub(b),
        ArithOp::Mul => a.checked_mul(b),
    }
}

/// Exact comparison of two values of the same field.
///
/// Unlike the [`Ord`] impl this refuses to compare irrational values from
/// different fields.
pub fn quad_cmp(a: &QuadValue, b: &QuadValue) -> Result<Ordering> {
    common_radicand(a, b)?;
    Ok(a.checked_sub(b)?.signum())
}

/// Returns true if `m` has no repeated prime factor.
pub fn is_square_free(m: u64) -> bool {
    if m == 0 {
        return false;
    }
    let mut n = m;
    let mut f = 2u64;
    while f * f <= n {
        if n.is_multiple_of(f) {
            n /= f;
            if n.is_multiple_of(f) {
                return false;
            }
        }
        f += 1;
    }
    true
}

fn common_radicand(a: &QuadValue, b: &QuadValue) -> Result<u32> {
    match (a.m, b.m) {
        (0, m) | (m, 0) => Ok(m),
        (x, y) if x == y => Ok(x),
        (x, y) => Err(Error::MixedRadicand(x, y)),
    }
}

impl QuadValue {
    /// Builds `(p + q*sqrt(m)) / d`. `m` must be 0 (rational mode) or a
    /// square-free integer greater than one.
    pub fn new(p: impl Into<BigInt>, q: impl Into<BigInt>, d: impl Into<BigInt>, m: u32) -> Result<Self> {
        let (p, q, d) = (p.into(), q.into(), d.into());
        if d.is_zero() {
            return Err(Error::domain("zero denominator"));
        }
        if m == 1 || (m > 1 && !is_square_free(m as u64)) {
            return Err(Error::Validation(format!("radicand {m} is not square-free and > 1")));
        }
        if m == 0 && !q.is_zero() {
            return Err(Error::domain("irrational part given without a radicand"));
        }
        let v = Self::canonical(p, q, d, m);
        v.check_capacity()?;
        Ok(v)
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        QuadValue { p: BigInt::from(n), q: BigInt::zero(), d: BigInt::one(), m: 0 }
    }

    /// The rational `num / den`.
    pub fn from_ratio(num: i64, den: i64) -> Result<Self> {
        Self::new(num, 0, den, 0)
    }

    /// `sqrt(m)` for square-free `m > 1`.
    pub fn sqrt(m: u32) -> Result<Self> {
        Self::new(0, 1, 1, m)
    }

    /// The exact dyadic rational equal to a finite `f64`.
    pub fn from_f64_exact(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::domain(format!("non-finite value {x}")));
        }
        let (mant, exp, sign) = num_traits::Float::integer_decode(x);
        let mut p = BigInt::from(mant) * i64::from(sign);
        let mut d = BigInt::one();
        if exp >= 0 {
            p <<= exp as usize;
        } else {
            d <<= (-exp) as usize;
        }
        Ok(Self::canonical(p, BigInt::zero(), d, 0))
    }

    pub(crate) fn canonical(mut p: BigInt, mut q: BigInt, mut d: BigInt, m: u32) -> Self {
        if d.is_negative() {
            p = -p;
            q = -q;
            d = -d;
        }
        let g = p.gcd(&q).gcd(&d);
        if !g.is_one() && !g.is_zero() {
            p /= &g;
            q /= &g;
            d /= &g;
        }
        if p.is_zero() && q.is_zero() {
            d = BigInt::one();
        }
        let m = if q.is_zero() { 0 } else { m };
        QuadValue { p, q, d, m }
    }

    fn check_capacity(&self) -> Result<()> {
        let bits = self.p.bits().max(self.q.bits()).max(self.d.bits());
        if bits > MAX_BITS {
            return Err(Error::Capacity(format!("{bits}-bit quadratic value exceeds {MAX_BITS} bits")));
        }
        Ok(())
    }

    pub fn p(&self) -> &BigInt {
        &self.p
    }

    pub fn q(&self) -> &BigInt {
        &self.q
    }

    pub fn d(&self) -> &BigInt {
        &self.d
    }

    /// Radicand of the field; 0 for rational values.
    pub fn radicand(&self) -> u32 {
        self.m
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.q.is_zero()
    }

    /// Galois conjugate `(p - q*sqrt(m)) / d`.
    pub fn star(&self) -> Self {
        QuadValue { p: self.p.clone(), q: -&self.q, d: self.d.clone(), m: self.m }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        let m = common_radicand(self, other)?;
        let v = if self.d == other.d {
            Self::canonical(&self.p + &other.p, &self.q + &other.q, self.d.clone(), m)
        } else {
            Self::canonical(&self.p * &other.d + &other.p * &self.d, &self.q * &other.d + &other.q * &self.d, &self.d * &other.d, m)
        };
        v.check_capacity()?;
        Ok(v)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&-other)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        let m = common_radicand(self, other)?;
        let v = Self::canonical(
            &self.p * &other.p + BigInt::from(m) * &self.q * &other.q,
            &self.p * &other.q + &other.p * &self.q,
            &self.d * &other.d,
            m,
        );
        v.check_capacity()?;
        Ok(v)
    }

    /// Multiplicative inverse, rationalising the denominator.
    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::domain("division by zero"));
        }
        // d / (p + q r) = d (p - q r) / (p^2 - m q^2)
        let norm = &self.p * &self.p - BigInt::from(self.m) * &self.q * &self.q;
        let v = Self::canonical(&self.d * &self.p, -(&self.d * &self.q), norm, self.m);
        v.check_capacity()?;
        Ok(v)
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        self.checked_mul(&other.recip()?)
    }

    /// Field norm `x * star(x)`, always rational.
    pub fn norm(&self) -> Self {
        let num = &self.p * &self.p - BigInt::from(self.m) * &self.q * &self.q;
        Self::canonical(num, BigInt::zero(), &self.d * &self.d, 0)
    }

    /// Exact sign of the real value.
    pub fn signum(&self) -> Ordering {
        sign_of(&self.p, &self.q, self.m)
    }

    pub fn abs(&self) -> Self {
        if self.signum() == Ordering::Less {
            -self
        } else {
            self.clone()
        }
    }

    /// Nearest double, within a few ulp of the exact real.
    pub fn to_f64(&self) -> f64 {
        if self.q.is_zero() {
            return ratio_to_f64(&self.p, &self.d);
        }
        let m = BigInt::from(self.m);
        let q2m = &self.q * &self.q * &m;
        let mut k = 64usize;
        loop {
            // floor(|q| sqrt(m) 2^k), error below one unit
            let s = (&q2m << (2 * k)).sqrt();
            let s = if self.q.is_negative() { -s } else { s };
            let num = (&self.p << k) + s;
            if num.bits() > 80 {
                return ratio_to_f64(&num, &(&self.d << k));
            }
            k += 64;
        }
    }

    /// Lower bound `a` with `value * d * 2^k` in `[a, a + 1]`.
    fn scaled_floor(&self, k: usize) -> BigInt {
        let s = ((&self.q * &self.q * BigInt::from(self.m)) << (2 * k)).sqrt();
        let s = if self.q.is_negative() { -s - 1 } else { s };
        (&self.p << k) + s
    }

    fn cmp_across_fields(&self, other: &Self) -> Ordering {
        let mut k = 32usize;
        loop {
            let a = self.scaled_floor(k);
            let b = other.scaled_floor(k);
            if (&a + 1) * &other.d < &b * &self.d {
                return Ordering::Less;
            }
            if (&b + 1) * &self.d < &a * &other.d {
                return Ordering::Greater;
            }
            k += 32;
        }
    }
}

fn sign_of(p: &BigInt, q: &BigInt, m: u32) -> Ordering {
    let sp = p.sign();
    let sq = q.sign();
    match (sp, sq) {
        (Sign::NoSign, Sign::NoSign) => Ordering::Equal,
        (_, Sign::NoSign) => sign_to_ord(sp),
        (Sign::NoSign, _) => sign_to_ord(sq),
        (a, b) if a == b => sign_to_ord(a),
        _ => {
            let p2 = p * p;
            let mq2 = q * q * BigInt::from(m);
            if p2 > mq2 {
                sign_to_ord(sp)
            } else {
                sign_to_ord(sq)
            }
        }
    }
}

fn sign_to_ord(s: Sign) -> Ordering {
    match s {
        Sign::Minus => Ordering::Less,
        Sign::NoSign => Ordering::Equal,
        Sign::Plus => Ordering::Greater,
    }
}

/// Correctly scaled conversion of `num / den` (den > 0) to `f64`.
fn ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let shift = (66 + den.bits() as i64 - num.bits() as i64).max(0);
    let quot = (num.abs() << shift as usize) / den;
    // quot has at least 65 significant bits; the u64 -> f64 cast rounds the
    // top 64 of them, the truncated tail costs at most one more ulp
    let excess = quot.bits() - 64;
    let top = (&quot >> excess as usize).to_u64().expect("64-bit window");
    let mut exp = excess as i64 - shift;
    let mut v = top as f64;
    while exp > 0 {
        let step = exp.min(1000);
        v *= 2f64.powi(step as i32);
        exp -= step;
    }
    while exp < 0 {
        let step = (-exp).min(1000);
        v /= 2f64.powi(step as i32);
        exp += step;
    }
    if num.is_negative() {
        -v
    } else {
        v
    }
}

impl PartialOrd for QuadValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Total order by real value. Values from different fields are compared by
/// interval refinement, which terminates because distinct algebraic numbers
/// never coincide.
impl Ord for QuadValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match common_radicand(self, other) {
            Ok(m) => {
                let p = &self.p * &other.d - &other.p * &self.d;
                let q = &self.q * &other.d - &other.q * &self.d;
                sign_of(&p, &q, m)
            }
            Err(_) => self.cmp_across_fields(other),
        }
    }
}

impl Neg for &QuadValue {
    type Output = QuadValue;
    fn neg(self) -> QuadValue {
        QuadValue { p: -&self.p, q: -&self.q, d: self.d.clone(), m: self.m }
    }
}

impl Neg for QuadValue {
    type Output = QuadValue;
    fn neg(self) -> QuadValue {
        -&self
    }
}

macro_rules! panicking_op {
    ($tr:ident, $method:ident, $checked:ident) => {
        /// Panics on mixed radicands or capacity overflow; use the
        /// `checked_*` methods where either can happen.
        impl $tr<&QuadValue> for &QuadValue {
            type Output = QuadValue;
            fn $method(self, rhs: &QuadValue) -> QuadValue {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }

        impl $tr<QuadValue> for QuadValue {
            type Output = QuadValue;
            fn $method(self, rhs: QuadValue) -> QuadValue {
                (&self).$method(&rhs)
            }
        }
    };
}

panicking_op!(Add, add, checked_add);
panicking_op!(Sub, sub, checked_sub);
panicking_op!(Mul, mul, checked_mul);

impl fmt::Debug for QuadValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QuadValue({self})")
    }
}

impl From<i64> for QuadValue {
    fn from(n: i64) -> Self {
        QuadValue::from_int(n)
    }
}
