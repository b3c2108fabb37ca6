//! Choice of stage indices and window triples from μ.

use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaps::Subsequence;

/// Degrees `u < v < w` of one stage: `u = μ_n + 1`, `w = μ_{n+1}`, `v = ⌊√(u·w)⌋`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowTriple {
    pub u: u64,
    pub v: u64,
    pub w: u64,
}

/// Stage indices chosen from a μ prefix.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexSelection {
    /// 1-based indices `n_j`, increasing.
    pub indices: Vec<usize>,
    /// `μ_{n+1}/μ_n` for each chosen index.
    pub ratios: Vec<Rational>,
    pub warning: Option<String>,
}

/// Picks `j` indices with the largest ratios `μ_{n+1}/μ_n` (ties go to the smaller `n`).
pub fn select_indices(mu: &[u64], j: usize) -> Result<IndexSelection> {
    if mu.len() < 2 || j > mu.len() - 1 {
        return Err(Error::domain(format!(
            "{j} stage indices requested but only {} ratios are available",
            mu.len().saturating_sub(1)
        )));
    }
    let ratios: Vec<Rational> = mu.windows(2).map(|w| Rational::from((w[1], w[0]))).collect();
    let mut order: Vec<usize> = (0..ratios.len()).collect();
    order.sort_by(|&a, &b| ratios[b].cmp(&ratios[a]).then(a.cmp(&b)));
    let mut chosen: Vec<usize> = order[..j].to_vec();
    chosen.sort_unstable();
    let warning = ratios
        .iter()
        .all(|r| *r == ratios[0])
        .then(|| "all ratios are equal: no divergence in μ_{n+1}/μ_n".to_string());
    Ok(IndexSelection {
        indices: chosen.iter().map(|i| i + 1).collect(),
        ratios: chosen.iter().map(|&i| ratios[i].clone()).collect(),
        warning,
    })
}

/// A stage index that was passed over, with the reason.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedIndex {
    pub index: usize,
    pub reason: String,
}

/// Chooses `count` stages in the order of [`select_indices`], passing over
/// indices whose triple is invalid or rejected by `accept`.
pub fn plan_stages(
    mu: &[u64],
    count: usize,
    accept: impl Fn(&WindowTriple) -> Option<String>,
) -> Result<(Vec<(usize, WindowTriple)>, Vec<SkippedIndex>)> {
    if mu.len() < 2 {
        return Err(Error::domain("μ prefix needs at least two terms"));
    }
    let mut order: Vec<usize> = (1..mu.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = Rational::from((mu[a], mu[a - 1]));
        let rb = Rational::from((mu[b], mu[b - 1]));
        rb.cmp(&ra).then(a.cmp(&b))
    });
    let mut chosen = Vec::new();
    let mut skipped = Vec::new();
    for n in order {
        if chosen.len() == count {
            break;
        }
        match triple_from(mu[n - 1], mu[n]) {
            Ok(t) => match accept(&t) {
                None => chosen.push((n, t)),
                Some(reason) => skipped.push(SkippedIndex { index: n, reason }),
            },
            Err(e) => skipped.push(SkippedIndex { index: n, reason: e.to_string() }),
        }
    }
    if chosen.len() < count {
        return Err(Error::domain(format!(
            "only {} usable stages in a μ prefix of {} terms, {count} requested",
            chosen.len(),
            mu.len()
        )));
    }
    chosen.sort_by_key(|(n, _)| *n);
    Ok((chosen, skipped))
}

/// Window triple for the 1-based index `n`.
pub fn build_sequences(mu: &Subsequence, n: usize) -> Result<WindowTriple> {
    let lo = mu.term(n).ok_or_else(|| Error::domain(format!("μ has no term {n}")))?;
    let hi = mu.term(n + 1).ok_or_else(|| Error::domain(format!("μ has no term {}", n + 1)))?;
    triple_from(lo, hi)
}

/// Triple from consecutive values `μ_n`, `μ_{n+1}`.
pub fn triple_from(mu_n: u64, mu_next: u64) -> Result<WindowTriple> {
    let u = mu_n + 1;
    let w = mu_next;
    let v = (Integer::from(u) * w).sqrt().to_u64().expect("square root fits");
    if !(u < v && v < w) {
        return Err(Error::domain(format!("no room for a window between {mu_n} and {mu_next}: (u, v, w) = ({u}, {v}, {w})")));
    }
    Ok(WindowTriple { u, v, w })
}

/// True iff no `μ_n` with `n ≥ first + 1` lies in any `[u, w − 1]`.
pub fn check_mu_avoidance(mu: &Subsequence, stages: &[WindowTriple], first: usize) -> bool {
    let Some(top) = stages.iter().map(|t| t.w).max() else {
        return true;
    };
    mu.iter()
        .enumerate()
        .skip(first)
        .take_while(|(_, m)| *m < top)
        .all(|(_, m)| stages.iter().all(|t| m < t.u || m >= t.w))
}
