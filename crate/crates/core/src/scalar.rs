//! Scalar fields.
//!
//! All geometry is generic over [`Field`], which has two implementations:
//! [`Rational`] (arbitrary-precision fractions, residuals certified to be
//! literally zero) and [`Float`] (IEEE doubles compared against a
//! [`Tolerance`]). [`Scalar`] is the backend-tagged value used at the
//! serialization boundary.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Environment variable overriding the default float epsilon.
pub const EPSILON_ENV: &str = "QUADCONIC_EPSILON";

pub const DEFAULT_EPSILON: f64 = 1e-9;

/// Relative size below which a float construction is treated as degenerate.
pub const FLOAT_DEGENERACY: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Float,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Exact => "exact",
            Backend::Float => "float",
        })
    }
}

impl FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Backend::Exact),
            "float" => Ok(Backend::Float),
            other => Err(Error::Schema(format!("unknown backend {other:?}"))),
        }
    }
}

/// Zero test policy for the float backend. The exact backend ignores it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub epsilon: f64,
    /// Compare residuals normalized by the norms of their operands.
    pub relative: bool,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            epsilon: DEFAULT_EPSILON,
            relative: true,
        }
    }
}

impl Tolerance {
    pub fn new(epsilon: f64) -> Self {
        assert!(epsilon >= 0.0, "tolerance must be nonnegative");
        Tolerance {
            epsilon,
            relative: true,
        }
    }

    pub fn absolute(epsilon: f64) -> Self {
        Tolerance {
            relative: false,
            ..Tolerance::new(epsilon)
        }
    }

    /// Default tolerance, overridden by `QUADCONIC_EPSILON` when set.
    pub fn from_env() -> Self {
        std::env::var(EPSILON_ENV)
            .ok()
            .and_then(|v| v.parse::<f64>().ok())
            .filter(|e| *e >= 0.0 && e.is_finite())
            .map(Tolerance::new)
            .unwrap_or_default()
    }
}

/// A field element usable by every geometric operation.
pub trait Field:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    const BACKEND: Backend;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(n: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Result<Self>;
    /// Converts a tagged scalar. Exact scalars convert into either backend;
    /// float scalars only into the float backend.
    fn from_scalar(s: &Scalar) -> Result<Self>;
    fn to_scalar(&self) -> Scalar;
    fn to_f64(&self) -> f64;

    fn checked_div(&self, rhs: &Self) -> Result<Self>;
    fn sqrt(&self) -> Result<Self>;
    fn abs(&self) -> Self;
    fn is_exact_zero(&self) -> bool;
    fn is_finite(&self) -> bool;

    /// Zero test: literal for exact, `|a| <= epsilon` for float.
    fn is_zero(&self, tol: &Tolerance) -> bool;

    /// Vector norm used to normalize residuals: Euclidean for float, max-abs
    /// for exact (so residuals stay rational).
    fn norm(v: &[Self]) -> Self;

    /// Rescales a projective representative: unit length for float,
    /// primitive integer vector for exact. Sign is fixed so that the last
    /// nonzero entry is positive (exact) or the first non-negligible entry is
    /// positive (float).
    fn normalize_projective(v: &mut [Self]);

    /// Degeneracy guard for constructions: literal zero for exact, below
    /// `1e-13 * scale` for float.
    fn negligible(&self, scale: &Self) -> bool;

    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
}

// ---------------------------------------------------------------------------
// exact backend

/// Arbitrary-precision rational, always in lowest terms with positive
/// denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(pub BigRational);

impl Rational {
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(BigRational::new(num.into(), den.into())))
    }

    pub fn from_big(num: BigInt, den: BigInt) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(BigRational::new(num, den)))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    /// Closest rational with denominator `2^52` or smaller.
    pub fn from_f64(x: f64) -> Result<Self> {
        BigRational::from_float(x)
            .map(Rational)
            .ok_or(Error::NonFiniteResult)
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Parses `"p"`, `"p/q"` or a finite decimal such as `"-0.25"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Schema(format!("cannot parse rational {s:?}"));
        if let Some((p, q)) = s.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            return Rational::from_big(p, q);
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let neg = int.starts_with('-');
            let int_part: BigInt = if int.is_empty() || int == "-" {
                BigInt::zero()
            } else {
                int.parse().map_err(|_| bad())?
            };
            let scale = BigInt::from(10u32).pow(frac.len() as u32);
            let frac_part: BigInt = frac.parse().map_err(|_| bad())?;
            let mag = int_part.abs() * &scale + frac_part;
            let num = if neg { -mag } else { mag };
            return Rational::from_big(num, scale);
        }
        let p: BigInt = s.parse().map_err(|_| bad())?;
        Ok(Rational(BigRational::from_integer(p)))
    }
}

macro_rules! forward_binop {
    ($ty:ident, $tr:ident, $m:ident) => {
        impl $tr for $ty {
            type Output = $ty;
            fn $m(self, rhs: $ty) -> $ty {
                $ty(self.0.$m(rhs.0))
            }
        }
    };
}

forward_binop!(Rational, Add, add);
forward_binop!(Rational, Sub, sub);
forward_binop!(Rational, Mul, mul);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

fn exact_isqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

impl Field for Rational {
    const BACKEND: Backend = Backend::Exact;

    fn zero() -> Self {
        Rational(BigRational::zero())
    }
    fn one() -> Self {
        Rational(BigRational::one())
    }
    fn from_i64(n: i64) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }
    fn from_ratio(num: i64, den: i64) -> Result<Self> {
        Rational::new(num, den)
    }
    fn from_scalar(s: &Scalar) -> Result<Self> {
        match s {
            Scalar::Exact(r) => Ok(Rational(r.clone())),
            Scalar::Float(_) => Err(Error::BackendMismatch),
        }
    }
    fn to_scalar(&self) -> Scalar {
        Scalar::Exact(self.0.clone())
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
    fn checked_div(&self, rhs: &Self) -> Result<Self> {
        if rhs.0.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(&self.0 / &rhs.0))
    }
    fn sqrt(&self) -> Result<Self> {
        if self.0.is_negative() {
            return Err(Error::NegativeRadicand);
        }
        match (exact_isqrt(self.0.numer()), exact_isqrt(self.0.denom())) {
            (Some(p), Some(q)) => Ok(Rational(BigRational::new(p, q))),
            _ => Err(Error::NonSquareRational(self.to_string())),
        }
    }
    fn abs(&self) -> Self {
        Rational(self.0.abs())
    }
    fn is_exact_zero(&self) -> bool {
        self.0.is_zero()
    }
    fn is_finite(&self) -> bool {
        true
    }
    fn is_zero(&self, _tol: &Tolerance) -> bool {
        self.0.is_zero()
    }
    fn norm(v: &[Self]) -> Self {
        v.iter()
            .map(|x| x.abs())
            .fold(Self::zero(), Self::max_of)
    }
    fn negligible(&self, _scale: &Self) -> bool {
        self.0.is_zero()
    }
    fn normalize_projective(v: &mut [Self]) {
        if v.iter().all(|x| x.0.is_zero()) {
            return;
        }
        let lcm = v
            .iter()
            .fold(BigInt::one(), |acc, x| acc.lcm(x.0.denom()));
        let ints: Vec<BigInt> = v
            .iter()
            .map(|x| x.0.numer() * (&lcm / x.0.denom()))
            .collect();
        let mut g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
        let last = ints.iter().rev().find(|x| !x.is_zero()).unwrap();
        if last.is_negative() {
            g = -g;
        }
        for (slot, n) in v.iter_mut().zip(ints) {
            *slot = Rational(BigRational::from_integer(n / &g));
        }
    }
}

// ---------------------------------------------------------------------------
// float backend

/// Finite IEEE double. Operators may overflow; geometric constructors check
/// [`Field::is_finite`] and surface [`Error::NonFiniteResult`].
#[derive(Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Float(pub f64);

impl fmt::Debug for Float {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for Float {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

forward_binop!(Float, Add, add);
forward_binop!(Float, Sub, sub);
forward_binop!(Float, Mul, mul);

impl Neg for Float {
    type Output = Float;
    fn neg(self) -> Float {
        Float(-self.0)
    }
}

impl Field for Float {
    const BACKEND: Backend = Backend::Float;

    fn zero() -> Self {
        Float(0.0)
    }
    fn one() -> Self {
        Float(1.0)
    }
    fn from_i64(n: i64) -> Self {
        Float(n as f64)
    }
    fn from_ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(Float(num as f64 / den as f64))
    }
    fn from_scalar(s: &Scalar) -> Result<Self> {
        let x = s.to_f64();
        if x.is_finite() {
            Ok(Float(x))
        } else {
            Err(Error::NonFiniteResult)
        }
    }
    fn to_scalar(&self) -> Scalar {
        Scalar::Float(self.0)
    }
    fn to_f64(&self) -> f64 {
        self.0
    }
    fn checked_div(&self, rhs: &Self) -> Result<Self> {
        if rhs.0.abs() <= f64::MIN_POSITIVE {
            return Err(Error::DivisionByZero);
        }
        let q = self.0 / rhs.0;
        if q.is_finite() {
            Ok(Float(q))
        } else {
            Err(Error::NonFiniteResult)
        }
    }
    fn sqrt(&self) -> Result<Self> {
        if self.0 < 0.0 {
            return Err(Error::NegativeRadicand);
        }
        Ok(Float(self.0.sqrt()))
    }
    fn abs(&self) -> Self {
        Float(self.0.abs())
    }
    fn is_exact_zero(&self) -> bool {
        self.0 == 0.0
    }
    fn is_finite(&self) -> bool {
        self.0.is_finite()
    }
    fn is_zero(&self, tol: &Tolerance) -> bool {
        self.0.abs() <= tol.epsilon
    }
    fn norm(v: &[Self]) -> Self {
        Float(v.iter().map(|x| x.0 * x.0).sum::<f64>().sqrt())
    }
    fn negligible(&self, scale: &Self) -> bool {
        self.0.abs() <= FLOAT_DEGENERACY * scale.0.abs()
    }
    fn normalize_projective(v: &mut [Self]) {
        let n = Self::norm(v).0;
        if n == 0.0 || !n.is_finite() {
            return;
        }
        let lead = v.iter().find(|x| x.0.abs() > 1e-9 * n).map(|x| x.0);
        let s = if lead.is_some_and(|x| x < 0.0) { -n } else { n };
        for x in v.iter_mut() {
            x.0 /= s;
        }
    }
}

// ---------------------------------------------------------------------------
// tagged scalar

/// Backend-tagged value. JSON: exact as the string `"p/q"`, float as a number.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Exact(BigRational),
    Float(f64),
}

impl Scalar {
    pub fn exact(num: i64, den: i64) -> Result<Scalar> {
        Rational::new(num, den).map(|r| Scalar::Exact(r.0))
    }

    pub fn backend(&self) -> Backend {
        match self {
            Scalar::Exact(_) => Backend::Exact,
            Scalar::Float(_) => Backend::Float,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Scalar::Float(x) => *x,
        }
    }

    fn float_result(x: f64) -> Result<Scalar> {
        if x.is_finite() {
            Ok(Scalar::Float(x))
        } else {
            Err(Error::NonFiniteResult)
        }
    }

    fn binop(
        &self,
        rhs: &Scalar,
        exact: impl FnOnce(&BigRational, &BigRational) -> Result<BigRational>,
        float: impl FnOnce(f64, f64) -> f64,
    ) -> Result<Scalar> {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => exact(a, b).map(Scalar::Exact),
            (Scalar::Float(a), Scalar::Float(b)) => Scalar::float_result(float(*a, *b)),
            _ => Err(Error::BackendMismatch),
        }
    }

    pub fn add(&self, rhs: &Scalar) -> Result<Scalar> {
        self.binop(rhs, |a, b| Ok(a + b), |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Scalar) -> Result<Scalar> {
        self.binop(rhs, |a, b| Ok(a - b), |a, b| a - b)
    }

    pub fn mul(&self, rhs: &Scalar) -> Result<Scalar> {
        self.binop(rhs, |a, b| Ok(a * b), |a, b| a * b)
    }

    pub fn div(&self, rhs: &Scalar) -> Result<Scalar> {
        match (self, rhs) {
            (Scalar::Exact(_), Scalar::Exact(b)) if b.is_zero() => Err(Error::DivisionByZero),
            (Scalar::Float(_), Scalar::Float(b)) if b.abs() <= f64::MIN_POSITIVE => {
                Err(Error::DivisionByZero)
            }
            _ => self.binop(rhs, |a, b| Ok(a / b), |a, b| a / b),
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(-a),
            Scalar::Float(a) => Scalar::Float(-a),
        }
    }

    pub fn sqrt(&self) -> Result<Scalar> {
        match self {
            Scalar::Exact(a) => Rational(a.clone()).sqrt().map(|r| Scalar::Exact(r.0)),
            Scalar::Float(a) => Float(*a).sqrt().map(|r| Scalar::Float(r.0)),
        }
    }

    pub fn is_zero(&self, tol: &Tolerance) -> bool {
        match self {
            Scalar::Exact(a) => a.is_zero(),
            Scalar::Float(a) => a.abs() <= tol.epsilon,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => write!(f, "{r}"),
            Scalar::Float(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Scalar::Exact(r) => s.serialize_str(&r.to_string()),
            Scalar::Float(x) => s.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(n) => Ok(Scalar::Exact(BigRational::from_integer(n.into()))),
            Raw::Num(x) => Ok(Scalar::Float(x)),
            Raw::Str(s) => s
                .parse::<Rational>()
                .map(|r| Scalar::Exact(r.0))
                .map_err(serde::de::Error::custom),
        }
    }
}

/// Shorthand for exact literals in tests and examples: `q(1, 3)`.
pub fn q(num: i64, den: i64) -> Rational {
    Rational::new(num, den).expect("nonzero denominator")
}
