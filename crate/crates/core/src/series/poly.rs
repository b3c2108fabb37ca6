//! Sparse polynomials keyed by degree.

use std::collections::BTreeMap;

use rayon::prelude::*;
use rug::Float;

use super::scalar::{BigComplex, Field, GaussRational, Mode, Scalar};
use crate::error::{Error, Result};

/// Polynomial stored as a map from degree to nonzero coefficient.
///
/// All coefficients share the polynomial's mode; float coefficients are
/// rounded to the polynomial's precision on insertion.
#[derive(Clone, Debug, PartialEq)]
pub struct SparsePolynomial {
    mode: Mode,
    coeffs: BTreeMap<u64, Scalar>,
}

impl SparsePolynomial {
    pub fn new(mode: Mode) -> Self {
        SparsePolynomial { mode, coeffs: BTreeMap::new() }
    }

    pub fn monomial(degree: u64, coeff: Scalar) -> Self {
        let mut p = SparsePolynomial::new(coeff.mode());
        if !coeff.is_zero() {
            p.coeffs.insert(degree, coeff);
        }
        p
    }

    pub fn from_terms(mode: Mode, terms: impl IntoIterator<Item = (u64, Scalar)>) -> Result<Self> {
        let mut p = SparsePolynomial::new(mode);
        for (k, c) in terms {
            p.add_term(k, &c)?;
        }
        Ok(p)
    }

    /// Builds a polynomial with exact rational coefficients from `(degree, value)` pairs.
    pub fn from_gauss(mode: Mode, terms: &[(u64, GaussRational)]) -> Self {
        let mut p = SparsePolynomial::new(mode);
        for (k, q) in terms {
            let c = Scalar::from_gauss(q, mode);
            if !c.is_zero() {
                p.coeffs.insert(*k, c);
            }
        }
        p
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    fn admit(&self, c: &Scalar) -> Result<Scalar> {
        match (self.mode, c.mode()) {
            (Mode::Exact, Mode::Exact) => Ok(c.clone()),
            (Mode::Float { precision: a }, Mode::Float { precision: b }) if a == b => Ok(c.clone()),
            (Mode::Float { .. }, Mode::Float { .. }) => c.to_mode(self.mode),
            (left, right) => Err(Error::ModeMismatch { left, right }),
        }
    }

    /// Sets the coefficient of `z^degree`; a zero value removes the term.
    pub fn set(&mut self, degree: u64, c: Scalar) -> Result<()> {
        let c = self.admit(&c)?;
        if c.is_zero() {
            self.coeffs.remove(&degree);
        } else {
            self.coeffs.insert(degree, c);
        }
        Ok(())
    }

    /// Adds `c` to the coefficient of `z^degree`.
    pub fn add_term(&mut self, degree: u64, c: &Scalar) -> Result<()> {
        let c = self.admit(c)?;
        let sum = match self.coeffs.get(&degree) {
            Some(old) => old.checked_add(&c)?,
            None => c,
        };
        if sum.is_zero() {
            self.coeffs.remove(&degree);
        } else {
            self.coeffs.insert(degree, sum);
        }
        Ok(())
    }

    pub fn get(&self, degree: u64) -> Option<&Scalar> {
        self.coeffs.get(&degree)
    }

    /// Coefficient of `z^degree`, zero when absent.
    pub fn coefficient(&self, degree: u64) -> Scalar {
        self.coeffs.get(&degree).cloned().unwrap_or_else(|| Scalar::zero(self.mode))
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Number of stored (nonzero) terms.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn valuation(&self) -> Option<u64> {
        self.coeffs.keys().next().copied()
    }

    pub fn degree(&self) -> Option<u64> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (u64, &Scalar)> {
        self.coeffs.iter().map(|(k, c)| (*k, c))
    }

    /// True when every coefficient has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.coeffs.values().all(Scalar::is_real)
    }

    /// Terms of degree at most `n`.
    pub fn truncate(&self, n: u64) -> Self {
        self.restrict(0, n)
    }

    /// Terms with degree in `lo..=hi`.
    pub fn restrict(&self, lo: u64, hi: u64) -> Self {
        let coeffs = if lo > hi {
            BTreeMap::new()
        } else {
            self.coeffs.range(lo..=hi).map(|(k, c)| (*k, c.clone())).collect()
        };
        SparsePolynomial { mode: self.mode, coeffs }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mode = self.mode.join(other.mode)?;
        let mut out = self.to_mode(mode)?;
        for (k, c) in other.iter() {
            out.add_term(k, c)?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        SparsePolynomial {
            mode: self.mode,
            coeffs: self.coeffs.iter().map(|(k, c)| (*k, c.neg())).collect(),
        }
    }

    pub fn scale(&self, s: &Scalar) -> Result<Self> {
        let mut out = SparsePolynomial::new(self.mode.join(s.mode())?);
        for (k, c) in self.iter() {
            out.set(k, c.checked_mul(s)?)?;
        }
        Ok(out)
    }

    pub fn to_mode(&self, mode: Mode) -> Result<Self> {
        if mode == self.mode {
            return Ok(self.clone());
        }
        let mut out = SparsePolynomial::new(mode);
        for (k, c) in self.iter() {
            out.set(k, c.to_mode(mode)?)?;
        }
        Ok(out)
    }

    /// Exact rational copy; float coefficients convert exactly.
    pub fn to_exact(&self) -> Result<Self> {
        self.to_mode(Mode::Exact)
    }

    /// Evaluates at `z` by sparse Horner; exact in exact mode.
    pub fn eval(&self, z: &Scalar) -> Result<Scalar> {
        match z {
            Scalar::Exact(q) => {
                let terms = self.typed::<GaussRational>(z)?;
                Ok(Scalar::Exact(sparse_horner(&terms, q)))
            }
            Scalar::Float(c) => {
                let terms = self.typed::<BigComplex>(z)?;
                Ok(Scalar::Float(sparse_horner(&terms, c)))
            }
        }
    }

    /// Evaluates at many points in parallel.
    pub fn eval_many(&self, points: &[Scalar]) -> Result<Vec<Scalar>> {
        points.par_iter().map(|z| self.eval(z)).collect()
    }

    /// Maximum of |P(z)| over the given points.
    pub fn sup_modulus(&self, points: &[Scalar]) -> Result<Float> {
        let prec = self.mode.working_precision();
        let values = self.eval_many(points)?;
        Ok(values.iter().fold(Float::new(prec), |acc, v| acc.max(&v.modulus())))
    }

    fn typed<F: Field>(&self, z: &Scalar) -> Result<Vec<(u64, &F)>> {
        if self.mode.is_exact() != z.mode().is_exact() {
            return Err(Error::ModeMismatch { left: self.mode, right: z.mode() });
        }
        Ok(self.coeffs.iter().map(|(k, c)| (*k, F::view(c).expect("uniform mode"))).collect())
    }
}

/// Horner evaluation over ascending `(degree, coefficient)` pairs, skipping
/// absent degrees with a single power per gap.
pub(crate) fn sparse_horner<F: Field>(terms: &[(u64, &F)], z: &F) -> F {
    let Some(&(top, lead)) = terms.last() else {
        return z.zero_like();
    };
    let mut acc = lead.clone();
    let mut prev = top;
    for &(k, c) in terms.iter().rev().skip(1) {
        acc.mul_assign(&z.pow_u64(prev - k));
        acc.add_assign(c);
        prev = k;
    }
    if prev > 0 {
        acc.mul_assign(&z.pow_u64(prev));
    }
    acc
}
