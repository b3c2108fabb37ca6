//! μ-partial sums at a probe point and universality witnesses.

use rayon::prelude::*;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaps::Subsequence;
use crate::series::{partial_sum_at, BlockSeries, Center, Scalar, SparsePolynomial};
use crate::window::CompactSample;

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeValue {
    pub n: usize,
    pub mu: u64,
    pub value: Scalar,
    pub modulus: Float,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeReport {
    pub values: Vec<ProbeValue>,
    /// Moduli non-increasing over the last `tail` values, all below `tol`.
    pub decaying: bool,
}

/// `S_{μ_n}(f, ζ)(z0)` for every `μ_n ≤ horizon`.
pub fn probe_partial_sums(
    f: &BlockSeries,
    mu: &Subsequence,
    center: &Center,
    z0: &Scalar,
    horizon: u64,
    tail: usize,
    tol: f64,
) -> Result<ProbeReport> {
    let terms = mu.indexed_up_to(horizon);
    let values: Vec<ProbeValue> = terms
        .par_iter()
        .map(|&(n, m)| {
            let value = partial_sum_at(f, center, m, z0)?;
            let modulus = value.modulus();
            Ok(ProbeValue { n, mu: m, value, modulus })
        })
        .collect::<Result<_>>()?;
    let decaying = decaying(&values.iter().map(|v| v.modulus.clone()).collect::<Vec<_>>(), tail, tol);
    Ok(ProbeReport { values, decaying })
}

/// Non-increasing over the last `tail` entries and all of those below `tol`.
pub fn decaying(moduli: &[Float], tail: usize, tol: f64) -> bool {
    if moduli.is_empty() || tail == 0 {
        return false;
    }
    let last = &moduli[moduli.len().saturating_sub(tail)..];
    last.windows(2).all(|w| w[1] <= w[0]) && last.iter().all(|m| *m < tol)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub target: usize,
    /// Index `n` with the smallest `sup_K |S_n(f) − f_s|`, if that error is below `tol`.
    pub index: Option<u64>,
    #[serde(with = "crate::float_serde")]
    pub error: Float,
}

/// For each `(K, f_s)`, the best index among `indices` at which the origin
/// partial sum approximates `f_s` on K.
pub fn verify_universality_samples(
    f: &BlockSeries,
    targets: &[(CompactSample, SparsePolynomial)],
    indices: &[u64],
    tol: f64,
) -> Result<Vec<Witness>> {
    if indices.is_empty() {
        return Err(Error::domain("no candidate indices"));
    }
    let mode = f.mode();
    targets
        .iter()
        .enumerate()
        .map(|(i, (k, target))| {
            let pts = k.scalars(mode);
            let tv = target.to_mode(mode)?.eval_many(&pts)?;
            let mut best: Option<(u64, Float)> = None;
            for &n in indices {
                let sv = f.partial_sum_origin(n).eval_many(&pts)?;
                let err = sv
                    .iter()
                    .zip(&tv)
                    .map(|(a, b)| a.checked_sub(b).map(|d| d.modulus()))
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .fold(Float::new(mode.working_precision()), |a, e| a.max(&e));
                if best.as_ref().map_or(true, |(_, b)| err < *b) {
                    best = Some((n, err));
                }
            }
            let (n, err) = best.expect("nonempty indices");
            Ok(Witness { target: i, index: (err < tol).then_some(n), error: err })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{GaussRational, Mode};

    #[test]
    fn block_above_all_mu_gives_zero_probes() {
        let mode = Mode::Exact;
        let block = SparsePolynomial::monomial(50, Scalar::from_int(3, mode));
        let f = BlockSeries::from_polynomial(block);
        let mu = Subsequence::custom(vec![1, 4, 9, 16, 25]).unwrap();
        let z0 = Scalar::from_int(1, mode);
        let rep = probe_partial_sums(&f, &mu, &Center::origin(mode), &z0, 40, 2, 0.1).unwrap();
        assert_eq!(rep.values.len(), 5);
        assert!(rep.values.iter().all(|v| v.value.is_zero()));
        assert!(rep.decaying);
    }

    #[test]
    fn polynomial_witnesses_itself() {
        let mode = Mode::Exact;
        let mut p = SparsePolynomial::new(mode);
        p.set(2, Scalar::from_int(1, mode)).unwrap();
        p.set(5, Scalar::from_int(-2, mode)).unwrap();
        let f = BlockSeries::from_polynomial(p.clone());
        let k = CompactSample::new("K", vec![GaussRational::real(2), GaussRational::new(0, 1)], true).unwrap();
        let w = verify_universality_samples(&f, &[(k, p)], &[3, 5, 7], 1e-12).unwrap();
        assert_eq!(w[0].index, Some(5));
        assert!(w[0].error.is_zero());
    }
}
