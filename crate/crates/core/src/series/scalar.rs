//! Numeric atoms: exact Gaussian rationals and fixed-precision complex floats.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rug::{Complex, Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default working precision (bits) for float mode.
pub const DEFAULT_PRECISION: u32 = 256;

/// Arithmetic mode of a [`Scalar`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Mode {
    Exact,
    Float { precision: u32 },
}

impl Mode {
    pub fn float(precision: u32) -> Self {
        Mode::Float { precision }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Mode::Exact)
    }

    /// Precision used when a modulus or other irrational quantity has to be
    /// materialized. Exact mode falls back to [`DEFAULT_PRECISION`].
    pub fn working_precision(self) -> u32 {
        match self {
            Mode::Exact => DEFAULT_PRECISION,
            Mode::Float { precision } => precision,
        }
    }

    /// Combines two modes; floats of different precision promote to the wider one.
    pub fn join(self, other: Mode) -> Result<Mode> {
        match (self, other) {
            (Mode::Exact, Mode::Exact) => Ok(Mode::Exact),
            (Mode::Float { precision: a }, Mode::Float { precision: b }) => {
                Ok(Mode::Float { precision: a.max(b) })
            }
            (left, right) => Err(Error::ModeMismatch { left, right }),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => write!(f, "exact"),
            Mode::Float { precision } => write!(f, "float:{precision}"),
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    /// Accepts `exact`, `float` (default precision) and `float:<bits>`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::float(DEFAULT_PRECISION)),
            other => {
                let bits = other
                    .strip_prefix("float:")
                    .and_then(|b| b.parse::<u32>().ok())
                    .filter(|&b| b >= 2)
                    .ok_or_else(|| Error::Parse(format!("unknown mode {other:?}")))?;
                Ok(Mode::float(bits))
            }
        }
    }
}

impl From<Mode> for String {
    fn from(m: Mode) -> String {
        m.to_string()
    }
}

impl TryFrom<String> for Mode {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Parses `"16/15"`, `"-3"`, `"1.25"`, `"2.5e-3"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty number".into()));
    }
    if s.contains('/') {
        return Rational::from_str(s).map_err(|e| Error::Parse(format!("{s:?}: {e}")));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => {
            let exp: i64 = s[i + 1..]
                .parse()
                .map_err(|e| Error::Parse(format!("{s:?}: {e}")))?;
            (&s[..i], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.find('.') {
        Some(i) => (&digits[..i], &digits[i + 1..]),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::Parse(format!("{s:?}: no digits")));
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(Error::Parse(format!("{s:?}: not a number")));
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from(
        Integer::from_str(if all_digits.is_empty() { "0" } else { &all_digits })
            .map_err(|e| Error::Parse(format!("{s:?}: {e}")))?,
    );
    let shift = exponent - frac_part.len() as i64;
    let ten_pow = Integer::from(Integer::u_pow_u(10, shift.unsigned_abs() as u32));
    if shift >= 0 {
        value *= ten_pow;
    } else {
        value /= ten_pow;
    }
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Exact rational value of a finite `f64`.
pub fn rational_from_f64(x: f64) -> Result<Rational> {
    Rational::from_f64(x).ok_or_else(|| Error::Parse(format!("non-finite value {x}")))
}

/// Formats a float as a C99-style hex-float string (`-0x1bp-3`).
pub fn format_hex_float(x: &Float) -> String {
    if x.is_zero() {
        return "0x0p+0".to_string();
    }
    match x.to_integer_exp() {
        None => {
            if x.is_zero() {
                "0x0p+0".to_string()
            } else {
                x.to_string()
            }
        }
        Some((mut mantissa, mut exp)) => {
            let trailing = mantissa.find_one(0).unwrap_or(0);
            mantissa >>= trailing;
            exp += trailing as i32;
            let sign = if mantissa < 0 { "-" } else { "" };
            mantissa.abs_mut();
            let exp_sign = if exp >= 0 { "+" } else { "" };
            format!("{sign}0x{}p{exp_sign}{exp}", mantissa.to_string_radix(16))
        }
    }
}

/// Parses the output of [`format_hex_float`] (also accepts a fractional hex part).
pub fn parse_hex_float(text: &str, precision: u32) -> Result<Float> {
    let s = text.trim();
    let bad = || Error::Parse(format!("invalid hex float {s:?}"));
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let body = body
        .strip_prefix("0x")
        .or_else(|| body.strip_prefix("0X"))
        .ok_or_else(bad)?;
    let p = body.find(['p', 'P']).ok_or_else(bad)?;
    let mut exp: i64 = body[p + 1..].parse().map_err(|_| bad())?;
    let digits = &body[..p];
    let (int_part, frac_part) = match digits.find('.') {
        Some(i) => (&digits[..i], &digits[i + 1..]),
        None => (digits, ""),
    };
    let all = format!("{int_part}{frac_part}");
    if all.is_empty() {
        return Err(bad());
    }
    let mut mantissa = Integer::from_str_radix(&all, 16).map_err(|_| bad())?;
    exp -= 4 * frac_part.len() as i64;
    if negative {
        mantissa = -mantissa;
    }
    let exp = i32::try_from(exp).map_err(|_| bad())?;
    Ok(Float::with_val(precision, mantissa) << exp)
}

/// Decimal scientific rendering of a float with 20 significant digits.
pub fn float_string(x: &Float) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    x.to_string_radix(10, Some(20))
}

/// Parses a decimal or hex float string at the given precision.
pub fn parse_float(text: &str, precision: u32) -> Result<Float> {
    let s = text.trim();
    if s.trim_start_matches(['-', '+']).starts_with("0x") {
        return parse_hex_float(s, precision);
    }
    Float::parse(s)
        .map(|v| Float::with_val(precision, v))
        .map_err(|e| Error::Parse(format!("{s:?}: {e}")))
}

/// Exact complex number with rational real and imaginary parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct GaussRational {
    pub re: Rational,
    pub im: Rational,
}

impl GaussRational {
    pub fn new(re: impl Into<Rational>, im: impl Into<Rational>) -> Self {
        GaussRational { re: re.into(), im: im.into() }
    }

    pub fn real(re: impl Into<Rational>) -> Self {
        GaussRational { re: re.into(), im: Rational::new() }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::real(1)
    }

    pub fn from_f64(re: f64, im: f64) -> Result<Self> {
        Ok(GaussRational { re: rational_from_f64(re)?, im: rational_from_f64(im)? })
    }

    pub fn parse(re: &str, im: &str) -> Result<Self> {
        Ok(GaussRational { re: parse_rational(re)?, im: parse_rational(im)? })
    }

    pub fn is_real(&self) -> bool {
        self.im.cmp0() == Ordering::Equal
    }

    pub fn norm_sqr(&self) -> Rational {
        Rational::from(&self.re * &self.re) + Rational::from(&self.im * &self.im)
    }

    pub fn conj(&self) -> Self {
        GaussRational { re: self.re.clone(), im: Rational::from(-&self.im) }
    }

    pub fn to_complex(&self, precision: u32) -> Complex {
        Complex::with_val(precision, (&self.re, &self.im))
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

impl fmt::Display for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_real() {
            write!(f, "{}", self.re)
        } else {
            write!(f, "({} + {}i)", self.re, self.im)
        }
    }
}

impl Serialize for GaussRational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.re.to_string(), self.im.to_string()].serialize(s)
    }
}

impl<'de> Deserialize<'de> for GaussRational {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [re, im] = <[String; 2]>::deserialize(d)?;
        GaussRational::parse(&re, &im).map_err(serde::de::Error::custom)
    }
}

/// Complex float carrying its own precision.
#[derive(Clone, Debug, PartialEq)]
pub struct BigComplex(pub Complex);

impl BigComplex {
    pub fn new(precision: u32, re: &Float, im: &Float) -> Self {
        BigComplex(Complex::with_val(precision, (re, im)))
    }

    pub fn from_gauss(q: &GaussRational, precision: u32) -> Self {
        BigComplex(q.to_complex(precision))
    }

    pub fn precision(&self) -> u32 {
        let (a, b) = self.0.prec();
        a.max(b)
    }

    pub fn re(&self) -> &Float {
        self.0.real()
    }

    pub fn im(&self) -> &Float {
        self.0.imag()
    }

    fn prec_with(&self, other: &Self) -> u32 {
        self.precision().max(other.precision())
    }
}

/// Arithmetic shared by exact and float scalars. Constructors take `&self` so
/// that the result inherits the receiver's mode and precision.
pub trait Field: Clone + fmt::Debug + Send + Sync + 'static {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn from_gauss_like(&self, q: &GaussRational) -> Self;
    fn from_integer_like(&self, n: &Integer) -> Self;

    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn conj(&self) -> Self;
    fn try_div(&self, rhs: &Self) -> Option<Self>;
    fn mul_integer(&self, n: &Integer) -> Self;
    fn add_assign(&mut self, rhs: &Self);
    fn mul_assign(&mut self, rhs: &Self);

    fn is_zero(&self) -> bool;
    /// |x| as a float of the given precision.
    fn modulus(&self, precision: u32) -> Float;
    fn mode(&self) -> Mode;

    fn into_scalar(self) -> Scalar;
    fn view(s: &Scalar) -> Option<&Self>;

    fn pow_u64(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = self.one_like();
        while e > 0 {
            if e & 1 == 1 {
                acc.mul_assign(&base);
            }
            e >>= 1;
            if e > 0 {
                let sq = base.mul(&base);
                base = sq;
            }
        }
        acc
    }
}

impl Field for GaussRational {
    fn zero_like(&self) -> Self {
        GaussRational::zero()
    }

    fn one_like(&self) -> Self {
        GaussRational::one()
    }

    fn from_gauss_like(&self, q: &GaussRational) -> Self {
        q.clone()
    }

    fn from_integer_like(&self, n: &Integer) -> Self {
        GaussRational::real(n.clone())
    }

    fn add(&self, rhs: &Self) -> Self {
        GaussRational {
            re: Rational::from(&self.re + &rhs.re),
            im: Rational::from(&self.im + &rhs.im),
        }
    }

    fn sub(&self, rhs: &Self) -> Self {
        GaussRational {
            re: Rational::from(&self.re - &rhs.re),
            im: Rational::from(&self.im - &rhs.im),
        }
    }

    fn mul(&self, rhs: &Self) -> Self {
        if self.is_real() && rhs.is_real() {
            return GaussRational::real(Rational::from(&self.re * &rhs.re));
        }
        let re = Rational::from(&self.re * &rhs.re) - Rational::from(&self.im * &rhs.im);
        let im = Rational::from(&self.re * &rhs.im) + Rational::from(&self.im * &rhs.re);
        GaussRational { re, im }
    }

    fn neg(&self) -> Self {
        GaussRational { re: Rational::from(-&self.re), im: Rational::from(-&self.im) }
    }

    fn conj(&self) -> Self {
        GaussRational::conj(self)
    }

    fn try_div(&self, rhs: &Self) -> Option<Self> {
        if rhs.is_zero() {
            return None;
        }
        if rhs.is_real() {
            return Some(GaussRational {
                re: Rational::from(&self.re / &rhs.re),
                im: Rational::from(&self.im / &rhs.re),
            });
        }
        let den = rhs.norm_sqr();
        let num = self.mul(&GaussRational::conj(rhs));
        Some(GaussRational { re: num.re / &den, im: num.im / den })
    }

    fn mul_integer(&self, n: &Integer) -> Self {
        GaussRational { re: Rational::from(&self.re * n), im: Rational::from(&self.im * n) }
    }

    fn add_assign(&mut self, rhs: &Self) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }

    fn mul_assign(&mut self, rhs: &Self) {
        *self = Field::mul(self, rhs);
    }

    fn is_zero(&self) -> bool {
        self.re.cmp0() == Ordering::Equal && self.im.cmp0() == Ordering::Equal
    }

    fn modulus(&self, precision: u32) -> Float {
        Float::with_val(precision, self.norm_sqr()).sqrt()
    }

    fn mode(&self) -> Mode {
        Mode::Exact
    }

    fn into_scalar(self) -> Scalar {
        Scalar::Exact(self)
    }

    fn view(s: &Scalar) -> Option<&Self> {
        match s {
            Scalar::Exact(q) => Some(q),
            Scalar::Float(_) => None,
        }
    }
}

impl Field for BigComplex {
    fn zero_like(&self) -> Self {
        BigComplex(Complex::new(self.precision()))
    }

    fn one_like(&self) -> Self {
        BigComplex(Complex::with_val(self.precision(), 1))
    }

    fn from_gauss_like(&self, q: &GaussRational) -> Self {
        BigComplex::from_gauss(q, self.precision())
    }

    fn from_integer_like(&self, n: &Integer) -> Self {
        BigComplex(Complex::with_val(self.precision(), n))
    }

    fn add(&self, rhs: &Self) -> Self {
        BigComplex(Complex::with_val(self.prec_with(rhs), &self.0 + &rhs.0))
    }

    fn sub(&self, rhs: &Self) -> Self {
        BigComplex(Complex::with_val(self.prec_with(rhs), &self.0 - &rhs.0))
    }

    fn mul(&self, rhs: &Self) -> Self {
        BigComplex(Complex::with_val(self.prec_with(rhs), &self.0 * &rhs.0))
    }

    fn neg(&self) -> Self {
        BigComplex(Complex::with_val(self.precision(), -&self.0))
    }

    fn conj(&self) -> Self {
        BigComplex(Complex::with_val(self.precision(), self.0.conj_ref()))
    }

    fn try_div(&self, rhs: &Self) -> Option<Self> {
        if rhs.0.is_zero() {
            return None;
        }
        Some(BigComplex(Complex::with_val(self.prec_with(rhs), &self.0 / &rhs.0)))
    }

    fn mul_integer(&self, n: &Integer) -> Self {
        let f = Float::with_val(self.precision(), n);
        BigComplex(Complex::with_val(self.precision(), &self.0 * &f))
    }

    fn add_assign(&mut self, rhs: &Self) {
        self.0 += &rhs.0;
    }

    fn mul_assign(&mut self, rhs: &Self) {
        self.0 *= &rhs.0;
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    fn modulus(&self, precision: u32) -> Float {
        Float::with_val(precision, self.0.abs_ref())
    }

    fn mode(&self) -> Mode {
        Mode::Float { precision: self.precision() }
    }

    fn into_scalar(self) -> Scalar {
        Scalar::Float(self)
    }

    fn view(s: &Scalar) -> Option<&Self> {
        match s {
            Scalar::Float(c) => Some(c),
            Scalar::Exact(_) => None,
        }
    }
}

/// A numeric atom in either exact or float mode.
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(GaussRational),
    Float(BigComplex),
}

impl Scalar {
    pub fn zero(mode: Mode) -> Self {
        Self::from_gauss(&GaussRational::zero(), mode)
    }

    pub fn one(mode: Mode) -> Self {
        Self::from_gauss(&GaussRational::one(), mode)
    }

    pub fn from_gauss(q: &GaussRational, mode: Mode) -> Self {
        match mode {
            Mode::Exact => Scalar::Exact(q.clone()),
            Mode::Float { precision } => Scalar::Float(BigComplex::from_gauss(q, precision)),
        }
    }

    pub fn from_rational(re: impl Into<Rational>, mode: Mode) -> Self {
        Self::from_gauss(&GaussRational::real(re), mode)
    }

    pub fn from_int(n: i64, mode: Mode) -> Self {
        Self::from_rational(Rational::from(n), mode)
    }

    /// Parses real and imaginary parts; both accept rational or decimal notation.
    pub fn parse(re: &str, im: &str, mode: Mode) -> Result<Self> {
        Ok(Self::from_gauss(&GaussRational::parse(re, im)?, mode))
    }

    pub fn mode(&self) -> Mode {
        match self {
            Scalar::Exact(_) => Mode::Exact,
            Scalar::Float(c) => Mode::Float { precision: c.precision() },
        }
    }

    /// Converts to another mode. Float to exact is exact (floats are dyadic).
    pub fn to_mode(&self, mode: Mode) -> Result<Self> {
        match (self, mode) {
            (Scalar::Exact(q), m) => Ok(Self::from_gauss(q, m)),
            (Scalar::Float(c), Mode::Float { precision }) => {
                Ok(Scalar::Float(BigComplex(Complex::with_val(precision, &c.0))))
            }
            (Scalar::Float(c), Mode::Exact) => {
                let re = c.re().to_rational().ok_or_else(|| Error::domain("non-finite float"))?;
                let im = c.im().to_rational().ok_or_else(|| Error::domain("non-finite float"))?;
                Ok(Scalar::Exact(GaussRational { re, im }))
            }
        }
    }

    pub fn as_exact(&self) -> Option<&GaussRational> {
        GaussRational::view(self)
    }

    pub fn as_float(&self) -> Option<&BigComplex> {
        BigComplex::view(self)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(q) => q.is_zero(),
            Scalar::Float(c) => c.is_zero(),
        }
    }

    pub fn is_real(&self) -> bool {
        match self {
            Scalar::Exact(q) => q.is_real(),
            Scalar::Float(c) => c.im().is_zero(),
        }
    }

    pub fn modulus(&self) -> Float {
        let prec = self.mode().working_precision();
        match self {
            Scalar::Exact(q) => q.modulus(prec),
            Scalar::Float(c) => c.modulus(prec),
        }
    }

    /// Real and imaginary parts rounded to `f64`.
    pub fn to_f64_pair(&self) -> (f64, f64) {
        match self {
            Scalar::Exact(q) => q.to_f64_pair(),
            Scalar::Float(c) => (c.re().to_f64(), c.im().to_f64()),
        }
    }

    /// Real and imaginary parts as complex float of the given precision.
    pub fn to_complex(&self, precision: u32) -> Complex {
        match self {
            Scalar::Exact(q) => q.to_complex(precision),
            Scalar::Float(c) => Complex::with_val(precision, &c.0),
        }
    }

    fn binary(
        &self,
        rhs: &Scalar,
        exact: impl FnOnce(&GaussRational, &GaussRational) -> Option<GaussRational>,
        float: impl FnOnce(&BigComplex, &BigComplex) -> Option<BigComplex>,
    ) -> Result<Scalar> {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => {
                exact(a, b).map(Scalar::Exact).ok_or(Error::DivisionByZero)
            }
            (Scalar::Float(a), Scalar::Float(b)) => {
                float(a, b).map(Scalar::Float).ok_or(Error::DivisionByZero)
            }
            _ => Err(Error::ModeMismatch { left: self.mode(), right: rhs.mode() }),
        }
    }

    pub fn checked_add(&self, rhs: &Scalar) -> Result<Scalar> {
        self.binary(rhs, |a, b| Some(Field::add(a, b)), |a, b| Some(Field::add(a, b)))
    }

    pub fn checked_sub(&self, rhs: &Scalar) -> Result<Scalar> {
        self.binary(rhs, |a, b| Some(Field::sub(a, b)), |a, b| Some(Field::sub(a, b)))
    }

    pub fn checked_mul(&self, rhs: &Scalar) -> Result<Scalar> {
        self.binary(rhs, |a, b| Some(Field::mul(a, b)), |a, b| Some(Field::mul(a, b)))
    }

    pub fn checked_div(&self, rhs: &Scalar) -> Result<Scalar> {
        self.binary(rhs, |a, b| a.try_div(b), |a, b| a.try_div(b))
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Exact(q) => Scalar::Exact(Field::neg(q)),
            Scalar::Float(c) => Scalar::Float(Field::neg(c)),
        }
    }

    pub fn conj(&self) -> Scalar {
        match self {
            Scalar::Exact(q) => Scalar::Exact(GaussRational::conj(q)),
            Scalar::Float(c) => Scalar::Float(Field::conj(c)),
        }
    }

    /// Integer power; negative exponents require a nonzero base.
    pub fn pow(&self, e: i64) -> Result<Scalar> {
        let positive = match self {
            Scalar::Exact(q) => Scalar::Exact(q.pow_u64(e.unsigned_abs())),
            Scalar::Float(c) => Scalar::Float(c.pow_u64(e.unsigned_abs())),
        };
        if e >= 0 {
            Ok(positive)
        } else {
            Scalar::one(self.mode()).checked_div(&positive)
        }
    }
}

impl From<GaussRational> for Scalar {
    fn from(q: GaussRational) -> Self {
        Scalar::Exact(q)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(q) => write!(f, "{q}"),
            Scalar::Float(c) => {
                let (re, im) = (c.re().to_f64(), c.im().to_f64());
                if im == 0.0 {
                    write!(f, "{re:e}")
                } else {
                    write!(f, "({re:e} + {im:e}i)")
                }
            }
        }
    }
}
