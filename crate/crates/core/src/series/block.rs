//! Finite block series and expansion centers.

use std::cmp::Ordering;

use rug::Float;

use super::poly::SparsePolynomial;
use super::scalar::{Mode, Scalar};
use crate::error::{Error, Result};

/// Ordered sequence of polynomial blocks with strictly increasing, disjoint supports.
///
/// Empty blocks are allowed and keep their position, so stage indices stay aligned
/// with construction records.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSeries {
    mode: Mode,
    blocks: Vec<SparsePolynomial>,
}

impl BlockSeries {
    pub fn new(mode: Mode) -> Self {
        BlockSeries { mode, blocks: Vec::new() }
    }

    pub fn from_blocks(mode: Mode, blocks: impl IntoIterator<Item = SparsePolynomial>) -> Result<Self> {
        let mut s = BlockSeries::new(mode);
        for b in blocks {
            s.push_block(b)?;
        }
        Ok(s)
    }

    pub fn from_polynomial(p: SparsePolynomial) -> Self {
        BlockSeries { mode: p.mode(), blocks: vec![p] }
    }

    /// Appends a block; its valuation must exceed the current horizon.
    pub fn push_block(&mut self, block: SparsePolynomial) -> Result<()> {
        let block = block.to_mode(self.mode).map_err(|_| Error::ModeMismatch {
            left: self.mode,
            right: block.mode(),
        })?;
        if let (Some(h), Some(v)) = (self.horizon(), block.valuation()) {
            if v <= h {
                return Err(Error::invariant(format!(
                    "block starting at degree {v} overlaps horizon {h}"
                )));
            }
        }
        self.blocks.push(block);
        Ok(())
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn blocks(&self) -> &[SparsePolynomial] {
        &self.blocks
    }

    /// Largest degree carrying a nonzero coefficient.
    pub fn horizon(&self) -> Option<u64> {
        self.blocks.iter().rev().find_map(SparsePolynomial::degree)
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().all(SparsePolynomial::is_empty)
    }

    /// Coefficient a_k, zero outside every block support.
    pub fn coefficient(&self, k: u64) -> Scalar {
        self.blocks
            .iter()
            .find_map(|b| b.get(k).cloned())
            .unwrap_or_else(|| Scalar::zero(self.mode))
    }

    /// All nonzero terms as one polynomial.
    pub fn flatten(&self) -> SparsePolynomial {
        let mut out = SparsePolynomial::new(self.mode);
        for b in &self.blocks {
            for (k, c) in b.iter() {
                out.set(k, c.clone()).expect("uniform mode");
            }
        }
        out
    }

    /// S_n(f) at the origin: truncation to degrees at most `n`.
    pub fn partial_sum_origin(&self, n: u64) -> SparsePolynomial {
        let mut out = SparsePolynomial::new(self.mode);
        for b in &self.blocks {
            if b.valuation().is_some_and(|v| v > n) {
                break;
            }
            for (k, c) in b.iter().take_while(|(k, _)| *k <= n) {
                out.set(k, c.clone()).expect("uniform mode");
            }
        }
        out
    }

    /// Terms with degree in `lo..=hi`, kept as a single block.
    pub fn restrict(&self, lo: u64, hi: u64) -> BlockSeries {
        let blocks = self.blocks.iter().map(|b| b.restrict(lo, hi)).filter(|b| !b.is_empty());
        BlockSeries { mode: self.mode, blocks: blocks.collect() }
    }

    pub fn eval(&self, z: &Scalar) -> Result<Scalar> {
        self.flatten().eval(z)
    }

    pub fn to_mode(&self, mode: Mode) -> Result<Self> {
        Ok(BlockSeries {
            mode,
            blocks: self.blocks.iter().map(|b| b.to_mode(mode)).collect::<Result<_>>()?,
        })
    }
}

/// Expansion center ζ with |ζ| < 1.
#[derive(Clone, Debug, PartialEq)]
pub struct Center {
    zeta: Scalar,
}

impl Center {
    pub fn new(zeta: Scalar) -> Result<Self> {
        let inside = match &zeta {
            Scalar::Exact(q) => q.norm_sqr() < 1,
            Scalar::Float(_) => zeta.modulus() < 1,
        };
        if !inside {
            return Err(Error::domain(format!("center {zeta} must satisfy |ζ| < 1")));
        }
        Ok(Center { zeta })
    }

    pub fn origin(mode: Mode) -> Self {
        Center { zeta: Scalar::zero(mode) }
    }

    pub fn zeta(&self) -> &Scalar {
        &self.zeta
    }

    pub fn mode(&self) -> Mode {
        self.zeta.mode()
    }

    pub fn is_origin(&self) -> bool {
        self.zeta.is_zero()
    }

    pub fn modulus(&self) -> Float {
        self.zeta.modulus()
    }

    /// Compares |ζ| with `r`, exactly when both are exact.
    pub fn cmp_modulus(&self, r: &rug::Rational) -> Ordering {
        match &self.zeta {
            Scalar::Exact(q) => q.norm_sqr().cmp(&rug::Rational::from(r * r)),
            Scalar::Float(_) => self.modulus().partial_cmp(r).unwrap_or(Ordering::Greater),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::Rational;

    fn ex(n: i64) -> Scalar {
        Scalar::from_int(n, Mode::Exact)
    }

    fn block(terms: &[(u64, i64)]) -> SparsePolynomial {
        SparsePolynomial::from_terms(Mode::Exact, terms.iter().map(|&(k, c)| (k, ex(c)))).unwrap()
    }

    #[test]
    fn overlapping_blocks_are_rejected() {
        let mut f = BlockSeries::new(Mode::Exact);
        f.push_block(block(&[(2, 1), (3, 1)])).unwrap();
        assert!(f.push_block(block(&[(3, 5)])).is_err());
        f.push_block(SparsePolynomial::new(Mode::Exact)).unwrap();
        f.push_block(block(&[(10, 1)])).unwrap();
        assert_eq!(f.horizon(), Some(10));
        assert_eq!(f.coefficient(7), ex(0));
        assert_eq!(f.coefficient(3), ex(1));
    }

    #[test]
    fn partial_sum_examples() {
        let f = BlockSeries::from_polynomial(block(&[(5, 1), (9, 2)]));
        assert!(f.partial_sum_origin(4).is_empty());

        let g = BlockSeries::from_polynomial(block(&[(1, 1), (3, 1)]));
        assert_eq!(g.partial_sum_origin(2), block(&[(1, 1)]));

        let h = BlockSeries::from_blocks(
            Mode::Exact,
            [block(&[(2, 1), (3, 2)]), block(&[(10, 3), (11, 4), (12, 5)])],
        )
        .unwrap();
        assert_eq!(h.partial_sum_origin(11), block(&[(2, 1), (3, 2), (10, 3), (11, 4)]));
    }

    #[test]
    fn center_must_lie_in_unit_disc() {
        assert!(Center::new(Scalar::from_rational(Rational::from((1, 2)), Mode::Exact)).is_ok());
        assert!(Center::new(ex(1)).is_err());
        let c = Center::new(Scalar::parse("0.6", "0.6", Mode::Exact).unwrap()).unwrap();
        assert_eq!(c.cmp_modulus(&Rational::from((17, 20))), Ordering::Less);
    }
}
