//! Finite-scale checks that partial sums transfer across gaps and centers.
//!
//! A monitored sequence passes when it is non-increasing across recorded stages
//! and its last `tail` entries are below the tolerance.

use rayon::prelude::*;
use rug::ops::Pow;
use rug::Float;
use serde::{Deserialize, Serialize};

use super::structure::{GapStructure, Subsequence};
use crate::error::{Error, Result};
use crate::series::{recenter_coefficients, BlockSeries, Center, Scalar};

/// Default number of final stages that must sit below the tolerance.
pub const DEFAULT_TAIL: usize = 2;

/// Non-increasing and the last `tail` values below `tol`.
pub fn trend_passes(values: &[Float], tol: f64, tail: usize) -> bool {
    if values.is_empty() || tail == 0 {
        return false;
    }
    let monotone = values.windows(2).all(|w| w[1] <= w[0]);
    let start = values.len().saturating_sub(tail);
    monotone && values[start..].iter().all(|v| *v < tol)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapTransferStage {
    pub m: usize,
    pub p: u64,
    pub q: u64,
    pub hit: Option<u64>,
    /// sup over K of |S_{μ_j}(f)(z) − S_{p}(f)(z)|.
    #[serde(with = "crate::float_serde::option")]
    pub sup: Option<Float>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapTransferReport {
    pub stages: Vec<GapTransferStage>,
    pub tol: f64,
    pub tail: usize,
    pub passed: bool,
    pub note: Option<String>,
}

fn sup_modulus(values: &[Scalar], precision: u32) -> Float {
    values.iter().fold(Float::new(precision), |acc, v| acc.max(&v.modulus()))
}

/// For each gap with a hit μ_j in [p, q), the sup over `k` of |S_{μ_j}(f) − S_p(f)|.
pub fn verify_gap_transfer(
    f: &BlockSeries,
    gaps: &GapStructure,
    mu: &Subsequence,
    k: &[Scalar],
    tol: f64,
    tail: usize,
) -> Result<GapTransferReport> {
    let horizon = f.horizon().unwrap_or(0);
    if let Some(&(_, q)) = gaps.pairs().iter().find(|&&(_, q)| q > horizon.max(1) && !f.is_zero()) {
        return Err(Error::domain(format!("gap end {q} lies beyond the horizon {horizon}")));
    }
    let flat = f.flatten();
    let precision = f.mode().working_precision();
    let stages = gaps
        .pairs()
        .par_iter()
        .enumerate()
        .map(|(i, &(p, q))| {
            let hit = mu.hit_gap((p, q));
            let sup = match hit {
                Some(h) if h > p => {
                    let piece = flat.restrict(p + 1, h);
                    Some(sup_modulus(&piece.eval_many(k)?, precision))
                }
                Some(_) => Some(Float::new(precision)),
                None => None,
            };
            Ok(GapTransferStage { m: i + 1, p, q, hit, sup })
        })
        .collect::<Result<Vec<_>>>()?;
    let sups: Vec<Float> = stages.iter().filter_map(|s| s.sup.clone()).collect();
    let note = if sups.is_empty() {
        Some("no gap is hit by the subsequence".to_string())
    } else {
        None
    };
    let passed = trend_passes(&sups, tol, tail);
    Ok(GapTransferReport { stages, tol, tail, passed, note })
}

/// sup over centers and points of |A₁|, |A₂| and |A₁ + A₂| for one gap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSup {
    #[serde(with = "crate::float_serde")]
    pub a1: Float,
    #[serde(with = "crate::float_serde")]
    pub a2: Float,
    #[serde(with = "crate::float_serde")]
    pub total: Float,
}

fn horner_shifted(b: &[Scalar], w: &Scalar) -> Result<Scalar> {
    let mut acc = Scalar::zero(w.mode());
    for c in b.iter().rev() {
        acc = acc.checked_mul(w)?.checked_add(c)?;
    }
    Ok(acc)
}

/// Sups of the A₁/A₂ split over every (ζ, z) pair, sharing one re-expansion per center.
pub fn split_sups(
    f: &BlockSeries,
    gap: (u64, u64),
    centers: &[Center],
    k: &[Scalar],
) -> Result<SplitSup> {
    let (p, q) = gap;
    if p >= q {
        return Err(Error::domain(format!("gap ({p}, {q}) requires p < q")));
    }
    let horizon = f.horizon().unwrap_or(0);
    let inner = f.restrict(p + 1, q);
    let outer = if q < horizon { f.restrict(q + 1, horizon) } else { BlockSeries::new(f.mode()) };
    let precision = f.mode().working_precision();
    let per_center = centers
        .par_iter()
        .map(|c| {
            let b1 = recenter_coefficients(&inner, c, p)?;
            let b2 = recenter_coefficients(&outer, c, p)?;
            let mut s = SplitSup {
                a1: Float::new(precision),
                a2: Float::new(precision),
                total: Float::new(precision),
            };
            for z in k {
                let w = z.checked_sub(c.zeta())?;
                let a1 = horner_shifted(&b1, &w)?;
                let a2 = horner_shifted(&b2, &w)?;
                let t = a1.checked_add(&a2)?;
                s.a1.max_mut(&a1.modulus());
                s.a2.max_mut(&a2.modulus());
                s.total.max_mut(&t.modulus());
            }
            Ok(s)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = SplitSup {
        a1: Float::new(precision),
        a2: Float::new(precision),
        total: Float::new(precision),
    };
    for s in per_center {
        out.a1.max_mut(&s.a1);
        out.a2.max_mut(&s.a2);
        out.total.max_mut(&s.total);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CenterTransferStage {
    pub m: usize,
    pub p: u64,
    pub q: u64,
    pub split: SplitSup,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CenterTransferReport {
    pub stages: Vec<CenterTransferStage>,
    pub tol: f64,
    pub tail: usize,
    pub passed: bool,
}

impl CenterTransferReport {
    /// D_m = sup |S_{p_m}(f,ζ)(z) − S_{p_m}(f,0)(z)| per stage.
    pub fn d_values(&self) -> Vec<Float> {
        self.stages.iter().map(|s| s.split.total.clone()).collect()
    }
}

/// D_m for every gap of `gaps`, over all centers in `centers` and points in `k`.
pub fn verify_center_transfer(
    f: &BlockSeries,
    gaps: &GapStructure,
    centers: &[Center],
    k: &[Scalar],
    tol: f64,
    tail: usize,
) -> Result<CenterTransferReport> {
    let stages = gaps
        .pairs()
        .iter()
        .enumerate()
        .map(|(i, &(p, q))| {
            Ok(CenterTransferStage { m: i + 1, p, q, split: split_sups(f, (p, q), centers, k)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let d: Vec<Float> = stages.iter().map(|s| s.split.total.clone()).collect();
    let passed = trend_passes(&d, tol, tail);
    Ok(CenterTransferReport { stages, tol, tail, passed })
}

/// Upper bounds for sup |A₁| and sup |A₂| over |ζ| ≤ r, |z − ζ| ≤ M when |a_k| ≤ ε^k on the gap.
///
/// bound_A1 = (2εM)^{1+p} / (1 − 2εr) and
/// bound_A2 = (1+p)/(1 − (1+ε)r) · (M/((1+ε)r))^p · ((1+ε)r)^{1+q}.
pub fn lemma23_bound_rhs(r: f64, m: f64, eps: f64, p: u64, q: u64) -> Result<(Float, Float)> {
    const PREC: u32 = 256;
    let two_eps_m = Float::with_val(PREC, 2.0 * eps) * m;
    if !(two_eps_m < 1) {
        return Err(Error::domain("2εM < 1 violated"));
    }
    let growth = Float::with_val(PREC, 1.0 + eps) * r;
    if !(growth < 1) {
        return Err(Error::domain("r(1+ε) < 1 violated"));
    }
    if !(m > 2.0 && m > 2.0 * r) {
        return Err(Error::domain("M > max(2, 2r) violated"));
    }
    if p >= q {
        return Err(Error::domain("p < q violated"));
    }
    if !(eps > 0.0 && r >= 0.0) {
        return Err(Error::domain("ε > 0 and r ≥ 0 required"));
    }
    let one_minus = Float::with_val(PREC, 1) - Float::with_val(PREC, 2.0 * eps) * r;
    let a1 = two_eps_m.pow((1 + p) as u32) / one_minus;
    let a2 = if r == 0.0 {
        Float::new(PREC)
    } else {
        let lead = Float::with_val(PREC, 1 + p) / (Float::with_val(PREC, 1) - &growth);
        let ratio = Float::with_val(PREC, m) / &growth;
        lead * ratio.pow(p as u32) * growth.pow((1 + q) as u32)
    };
    Ok((a1, a2))
}
