//! JSON representation of coefficient streams.
//!
//! Exact values are written as rational strings (`"16/15"`), floats as
//! hex-float strings (`"-0x1bp-3"`), so every value round-trips bit for bit.

use serde::{Deserialize, Serialize};

use super::block::BlockSeries;
use super::poly::SparsePolynomial;
use super::scalar::{format_hex_float, parse_hex_float, BigComplex, GaussRational, Mode, Scalar};
use crate::error::{Error, Result};

/// One serialized coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoefficientRecord {
    pub degree: u64,
    pub re: String,
    pub im: String,
}

/// Serialized scalar without a degree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalarRecord {
    pub re: String,
    pub im: String,
}

impl ScalarRecord {
    pub fn from_scalar(s: &Scalar) -> Self {
        let (re, im) = scalar_strings(s);
        ScalarRecord { re, im }
    }

    pub fn to_scalar(&self, mode: Mode) -> Result<Scalar> {
        parse_scalar(&self.re, &self.im, mode)
    }
}

fn scalar_strings(s: &Scalar) -> (String, String) {
    match s {
        Scalar::Exact(q) => (q.re.to_string(), q.im.to_string()),
        Scalar::Float(c) => (format_hex_float(c.re()), format_hex_float(c.im())),
    }
}

/// Parses a value in the given mode. Hex floats are accepted only in float mode;
/// rational strings are accepted in both.
pub fn parse_scalar(re: &str, im: &str, mode: Mode) -> Result<Scalar> {
    let is_hex = |s: &str| s.trim_start_matches(['-', '+']).starts_with("0x");
    match mode {
        Mode::Exact => {
            if is_hex(re) || is_hex(im) {
                return Err(Error::Parse(format!("hex float {re:?}/{im:?} in exact mode")));
            }
            Ok(Scalar::Exact(GaussRational::parse(re, im)?))
        }
        Mode::Float { precision } => {
            let part = |s: &str| -> Result<rug::Float> {
                if is_hex(s) {
                    parse_hex_float(s, precision)
                } else {
                    let q = super::scalar::parse_rational(s)?;
                    Ok(rug::Float::with_val(precision, q))
                }
            };
            Ok(Scalar::Float(BigComplex::new(precision, &part(re)?, &part(im)?)))
        }
    }
}

pub fn records_of(p: &SparsePolynomial) -> Vec<CoefficientRecord> {
    p.iter()
        .map(|(degree, c)| {
            let (re, im) = scalar_strings(c);
            CoefficientRecord { degree, re, im }
        })
        .collect()
}

pub fn polynomial_from_records(mode: Mode, records: &[CoefficientRecord]) -> Result<SparsePolynomial> {
    let mut p = SparsePolynomial::new(mode);
    for r in records {
        if p.get(r.degree).is_some() {
            return Err(Error::Parse(format!("duplicate degree {}", r.degree)));
        }
        p.set(r.degree, parse_scalar(&r.re, &r.im, mode)?)?;
    }
    Ok(p)
}

/// Serialized polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolynomialDoc {
    pub mode: Mode,
    pub terms: Vec<CoefficientRecord>,
}

impl From<&SparsePolynomial> for PolynomialDoc {
    fn from(p: &SparsePolynomial) -> Self {
        PolynomialDoc { mode: p.mode(), terms: records_of(p) }
    }
}

impl PolynomialDoc {
    pub fn to_polynomial(&self) -> Result<SparsePolynomial> {
        polynomial_from_records(self.mode, &self.terms)
    }
}

/// Serialized block series: one record list per block.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesDoc {
    pub mode: Mode,
    pub blocks: Vec<Vec<CoefficientRecord>>,
}

impl From<&BlockSeries> for SeriesDoc {
    fn from(f: &BlockSeries) -> Self {
        SeriesDoc { mode: f.mode(), blocks: f.blocks().iter().map(records_of).collect() }
    }
}

impl SeriesDoc {
    pub fn to_series(&self) -> Result<BlockSeries> {
        let blocks = self
            .blocks
            .iter()
            .map(|b| polynomial_from_records(self.mode, b))
            .collect::<Result<Vec<_>>>()?;
        BlockSeries::from_blocks(self.mode, blocks)
    }
}

impl Serialize for SparsePolynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PolynomialDoc::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for SparsePolynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        PolynomialDoc::deserialize(d)?.to_polynomial().map_err(serde::de::Error::custom)
    }
}

impl Serialize for BlockSeries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SeriesDoc::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for BlockSeries {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        SeriesDoc::deserialize(d)?.to_series().map_err(serde::de::Error::custom)
    }
}
