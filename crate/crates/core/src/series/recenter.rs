//! Partial sums at a center via binomial re-expansion.
//!
//! b_j = Σ_{k≥j} a_k C(k,j) ζ^{k−j} and S_n(f,ζ)(z) = Σ_{j≤n} b_j (z−ζ)^j.
//! Binomials are always exact integers. Sums for each b_j run over k in
//! ascending order, so results do not depend on the thread count.

use rayon::prelude::*;
use rug::Integer;

use super::block::{BlockSeries, Center};
use super::poly::SparsePolynomial;
use super::scalar::{BigComplex, Field, GaussRational, Scalar};
use crate::error::{Error, Result};

const CHUNK: u64 = 64;

/// Exact binomial coefficient C(k, j).
pub fn binomial(k: u64, j: u64) -> Result<Integer> {
    if j > k {
        return Err(Error::domain(format!("binomial({k}, {j}) requires j ≤ k")));
    }
    let k32 = u32::try_from(k).map_err(|_| Error::domain(format!("binomial degree {k} too large")))?;
    let j32 = j.min(k - j) as u32;
    Ok(Integer::from(Integer::binomial_u(k32, j32)))
}

fn check_modes(f: &BlockSeries, center: &Center) -> Result<()> {
    if f.mode().is_exact() != center.mode().is_exact() {
        return Err(Error::ModeMismatch { left: f.mode(), right: center.mode() });
    }
    Ok(())
}

fn typed_terms<'a, F: Field>(p: &'a SparsePolynomial) -> Vec<(u64, &'a F)> {
    p.iter().map(|(k, c)| (k, F::view(c).expect("uniform mode"))).collect()
}

fn recenter_kernel<F: Field>(terms: &[(u64, &F)], zeta: &F, n: u64) -> Vec<F> {
    let zero = zeta.zero_like();
    let Some(&(horizon, _)) = terms.last() else {
        return vec![zero; n as usize + 1];
    };
    if zeta.is_zero() {
        let mut b = vec![zero; n as usize + 1];
        for &(k, a) in terms.iter().take_while(|(k, _)| *k <= n) {
            b[k as usize] = a.clone();
        }
        return b;
    }
    let top = n.min(horizon);
    let mut powers = Vec::with_capacity(horizon as usize + 1);
    powers.push(zeta.one_like());
    for d in 1..=horizon as usize {
        let next = powers[d - 1].mul(zeta);
        powers.push(next);
    }
    let starts: Vec<u64> = (0..=top).step_by(CHUNK as usize).collect();
    let chunks: Vec<Vec<F>> = starts
        .par_iter()
        .map(|&j0| {
            let j1 = (j0 + CHUNK - 1).min(top);
            let mut acc = vec![zero.clone(); (j1 - j0 + 1) as usize];
            for &(k, a) in terms.iter().filter(|(k, _)| *k >= j0) {
                let mut c = Integer::from(Integer::binomial_u(k as u32, j0 as u32));
                for j in j0..=j1.min(k) {
                    let term = a.mul_integer(&c).mul(&powers[(k - j) as usize]);
                    acc[(j - j0) as usize].add_assign(&term);
                    c *= k - j;
                    c /= j + 1;
                }
            }
            acc
        })
        .collect();
    let mut b: Vec<F> = chunks.into_iter().flatten().collect();
    b.resize(n as usize + 1, zero);
    b
}

fn dense_horner<F: Field>(b: &[F], w: &F) -> F {
    let mut acc = w.zero_like();
    for c in b.iter().rev() {
        acc.mul_assign(w);
        acc.add_assign(c);
    }
    acc
}

/// Taylor coefficients b_0..b_n of f at ζ.
pub fn recenter_coefficients(f: &BlockSeries, center: &Center, n: u64) -> Result<Vec<Scalar>> {
    check_modes(f, center)?;
    if let Some(h) = f.horizon() {
        if h > u32::MAX as u64 {
            return Err(Error::domain("horizon exceeds supported degree range"));
        }
    }
    let flat = f.flatten();
    Ok(match center.zeta() {
        Scalar::Exact(q) => recenter_kernel(&typed_terms::<GaussRational>(&flat), q, n)
            .into_iter()
            .map(Scalar::Exact)
            .collect(),
        Scalar::Float(c) => {
            let zeta = c.clone();
            let flat = flat.to_mode(f.mode().join(center.mode())?)?;
            recenter_kernel(&typed_terms::<BigComplex>(&flat), &zeta, n)
                .into_iter()
                .map(Scalar::Float)
                .collect()
        }
    })
}

/// Evaluates Σ_{j} b_j (z−ζ)^j for a coefficient list produced by [`recenter_coefficients`].
pub fn eval_recentered(b: &[Scalar], center: &Center, z: &Scalar) -> Result<Scalar> {
    let w = z.checked_sub(center.zeta())?;
    match &w {
        Scalar::Exact(q) => {
            let typed: Vec<GaussRational> = b
                .iter()
                .map(|s| s.as_exact().cloned().ok_or(Error::ModeMismatch { left: s.mode(), right: w.mode() }))
                .collect::<Result<_>>()?;
            Ok(Scalar::Exact(dense_horner(&typed, q)))
        }
        Scalar::Float(c) => {
            let typed: Vec<BigComplex> = b
                .iter()
                .map(|s| match s {
                    Scalar::Float(x) => Ok(x.clone()),
                    other => Err(Error::ModeMismatch { left: other.mode(), right: w.mode() }),
                })
                .collect::<Result<_>>()?;
            Ok(Scalar::Float(dense_horner(&typed, c)))
        }
    }
}

/// S_n(f,ζ)(z).
pub fn partial_sum_at(f: &BlockSeries, center: &Center, n: u64, z: &Scalar) -> Result<Scalar> {
    if center.is_origin() {
        return f.partial_sum_origin(n).to_mode(f.mode().join(z.mode())?)?.eval(z);
    }
    let b = recenter_coefficients(f, center, n)?;
    eval_recentered(&b, center, z)
}

/// S_n(f,ζ) at many points, sharing one re-expansion.
pub fn partial_sum_at_many(
    f: &BlockSeries,
    center: &Center,
    n: u64,
    points: &[Scalar],
) -> Result<Vec<Scalar>> {
    if center.is_origin() {
        return f.partial_sum_origin(n).eval_many(points);
    }
    let b = recenter_coefficients(f, center, n)?;
    points.par_iter().map(|z| eval_recentered(&b, center, z)).collect()
}

/// The re-expansion of a series at ζ, as a series in powers of (z−ζ).
pub fn recentered_series(f: &BlockSeries, center: &Center) -> Result<BlockSeries> {
    let h = f.horizon().unwrap_or(0);
    let b = recenter_coefficients(f, center, h)?;
    let poly = SparsePolynomial::from_terms(
        f.mode(),
        b.into_iter().enumerate().map(|(j, c)| (j as u64, c)),
    )?;
    Ok(BlockSeries::from_polynomial(poly))
}

/// (A₁, A₂): contributions of degrees (p, q] and (q, horizon] to S_p(f,ζ)(z) − S_p(f,0)(z).
pub fn a1_a2_split(
    f: &BlockSeries,
    center: &Center,
    gap: (u64, u64),
    z: &Scalar,
) -> Result<(Scalar, Scalar)> {
    let (p, q) = gap;
    if p >= q {
        return Err(Error::domain(format!("gap ({p}, {q}) requires p < q")));
    }
    let horizon = f.horizon().unwrap_or(0);
    let inner = f.restrict(p + 1, q);
    let outer = if q < horizon { f.restrict(q + 1, horizon) } else { BlockSeries::new(f.mode()) };
    let a1 = partial_sum_at(&inner, center, p, z)?;
    let a2 = partial_sum_at(&outer, center, p, z)?;
    Ok((a1, a2))
}
