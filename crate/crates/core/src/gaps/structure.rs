//! Subsequences, ratio profiles and gap detection.

use std::fmt;

use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{BlockSeries, Scalar};

/// Named generator for a subsequence μ (indices start at 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MuRule {
    /// n²
    Squares,
    /// 2ⁿ
    PowersOf2,
    /// n!
    Factorials,
    /// the n-th prime
    Primes,
}

impl MuRule {
    pub fn parse(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "squares" | "square" => Ok(MuRule::Squares),
            "powers-of-2" | "powers-of-two" | "pow2" | "2^n" => Ok(MuRule::PowersOf2),
            "factorials" | "factorial" | "n!" => Ok(MuRule::Factorials),
            "primes" | "prime" => Ok(MuRule::Primes),
            other => Err(Error::Parse(format!("unknown subsequence generator {other:?}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MuRule::Squares => "squares",
            MuRule::PowersOf2 => "powers-of-2",
            MuRule::Factorials => "factorials",
            MuRule::Primes => "primes",
        }
    }
}

/// Strictly increasing sequence of positive integers, either generated or a finite list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Subsequence {
    Rule(MuRule),
    Custom(Vec<u64>),
}

impl Subsequence {
    pub fn custom(values: Vec<u64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("custom subsequence is empty"));
        }
        if values[0] < 1 {
            return Err(Error::domain("subsequence values must be at least 1"));
        }
        if let Some(w) = values.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::domain(format!(
                "subsequence must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Subsequence::Custom(values))
    }

    pub fn name(&self) -> String {
        match self {
            Subsequence::Rule(r) => r.name().to_string(),
            Subsequence::Custom(v) => format!("custom[{}]", v.len()),
        }
    }

    /// Iterator over μ_1, μ_2, … (stops on overflow or at the end of a custom list).
    pub fn iter(&self) -> MuIter<'_> {
        MuIter { seq: self, n: 0, prev: 1, primes: Vec::new() }
    }

    /// μ_n for 1-based `n`.
    pub fn term(&self, n: usize) -> Option<u64> {
        if n == 0 {
            return None;
        }
        self.iter().nth(n - 1)
    }

    /// First `count` terms.
    pub fn prefix(&self, count: usize) -> Result<Vec<u64>> {
        let v: Vec<u64> = self.iter().take(count).collect();
        if v.len() < count {
            return Err(Error::domain(format!(
                "subsequence {} has only {} representable terms, {count} requested",
                self.name(),
                v.len()
            )));
        }
        Ok(v)
    }

    /// All terms not exceeding `limit`, with their 1-based indices.
    pub fn indexed_up_to(&self, limit: u64) -> Vec<(usize, u64)> {
        self.iter().take_while(|&m| m <= limit).enumerate().map(|(i, m)| (i + 1, m)).collect()
    }

    /// Smallest μ_j with p ≤ μ_j < q.
    pub fn hit_gap(&self, gap: (u64, u64)) -> Option<u64> {
        let (p, q) = gap;
        self.iter().take_while(|&m| m < q).find(|&m| m >= p)
    }
}

impl fmt::Display for Subsequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

pub struct MuIter<'a> {
    seq: &'a Subsequence,
    n: u64,
    prev: u64,
    primes: Vec<u64>,
}

impl Iterator for MuIter<'_> {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        self.n += 1;
        let n = self.n;
        let value = match self.seq {
            Subsequence::Custom(v) => v.get(n as usize - 1).copied(),
            Subsequence::Rule(MuRule::Squares) => n.checked_mul(n),
            Subsequence::Rule(MuRule::PowersOf2) => 1u64.checked_shl(n as u32).filter(|_| n < 64),
            Subsequence::Rule(MuRule::Factorials) => self.prev.checked_mul(n),
            Subsequence::Rule(MuRule::Primes) => {
                let mut c = self.primes.last().map_or(2, |p| p + 1);
                while self.primes.iter().take_while(|&&p| p * p <= c).any(|&p| c % p == 0) {
                    c += 1;
                }
                self.primes.push(c);
                Some(c)
            }
        };
        if let Some(v) = value {
            self.prev = v;
        }
        value
    }
}

/// Configuration form of a subsequence: a generator name, an explicit list, or a generator
/// with a term count.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MuSpec {
    Named(String),
    List(Vec<u64>),
    Rule { rule: String, terms: usize },
}

impl MuSpec {
    /// The subsequence and, when the config fixes one, the number of terms to use.
    pub fn resolve(&self) -> Result<(Subsequence, Option<usize>)> {
        match self {
            MuSpec::Named(name) => Ok((Subsequence::Rule(MuRule::parse(name)?), None)),
            MuSpec::List(v) => Ok((Subsequence::custom(v.clone())?, Some(v.len()))),
            MuSpec::Rule { rule, terms } => Ok((Subsequence::Rule(MuRule::parse(rule)?), Some(*terms))),
        }
    }

    /// A finite prefix: the configured length, or `default_terms`.
    pub fn prefix(&self, default_terms: usize) -> Result<Subsequence> {
        let (seq, n) = self.resolve()?;
        Ok(match seq {
            Subsequence::Custom(_) => seq,
            Subsequence::Rule(_) => Subsequence::Custom(seq.prefix(n.unwrap_or(default_terms))?),
        })
    }
}

/// Ratio profile classification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Classification {
    BoundedBy(Rational),
    DivergentTrend,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::BoundedBy(b) => write!(f, "bounded_by {b}"),
            Classification::DivergentTrend => f.write_str("divergent_trend"),
        }
    }
}

/// Successive ratios μ_{n+1}/μ_n of a finite prefix and their classification.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioProfile {
    pub terms: Vec<u64>,
    pub ratios: Vec<Rational>,
    /// Checkpoints (number of ratios seen) and the running maximum at each.
    pub ladder: Vec<(usize, Rational)>,
    pub classification: Classification,
}

/// Default checkpoints for `m` ratios: ⌈m/4⌉, ⌈m/2⌉, m (deduplicated).
pub fn default_ladder(m: usize) -> Vec<usize> {
    let mut v = vec![m.div_ceil(4), m.div_ceil(2), m];
    v.retain(|&c| c >= 1);
    v.dedup();
    v
}

/// Ratios of the first `n` terms of μ.
///
/// The trend is divergent when the running maximum strictly increases across every
/// pair of consecutive checkpoints; otherwise the profile is bounded by the user bound
/// (when every ratio respects it) or by the largest observed ratio.
pub fn mu_ratio_profile(
    mu: &Subsequence,
    n: usize,
    bound: Option<&Rational>,
    ladder: Option<&[usize]>,
) -> Result<RatioProfile> {
    if n < 1 {
        return Err(Error::domain("ratio profile needs N ≥ 1"));
    }
    let terms = mu.prefix(n)?;
    let ratios: Vec<Rational> =
        terms.windows(2).map(|w| Rational::from((w[1], w[0]))).collect();
    let checkpoints = match ladder {
        Some(l) => {
            if l.windows(2).any(|w| w[0] >= w[1]) || l.iter().any(|&c| c == 0 || c > ratios.len()) {
                return Err(Error::domain("ratio ladder must be increasing checkpoints within the profile"));
            }
            l.to_vec()
        }
        None => default_ladder(ratios.len()),
    };
    let running: Vec<(usize, Rational)> = checkpoints
        .iter()
        .map(|&c| (c, ratios[..c].iter().max().cloned().unwrap_or_default()))
        .collect();
    let divergent = running.len() >= 2 && running.windows(2).all(|w| w[1].1 > w[0].1);
    let max = ratios.iter().max().cloned().unwrap_or_else(|| Rational::from(1));
    let classification = if divergent {
        Classification::DivergentTrend
    } else {
        match bound {
            Some(b) if ratios.iter().all(|r| r <= b) => Classification::BoundedBy(b.clone()),
            _ => Classification::BoundedBy(max),
        }
    };
    Ok(RatioProfile { terms, ratios, ladder: running, classification })
}

/// Ostrowski-gap index pairs: zeros or small coefficients on p+1..=q.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(u64, u64)>", into = "Vec<(u64, u64)>")]
pub struct GapStructure {
    pairs: Vec<(u64, u64)>,
}

impl GapStructure {
    /// Validates p₁ < q₁ ≤ p₂ < q₂ ≤ ….
    pub fn new(pairs: Vec<(u64, u64)>) -> Result<Self> {
        for (i, &(p, q)) in pairs.iter().enumerate() {
            if p >= q {
                return Err(Error::domain(format!("gap {i} has p = {p} ≥ q = {q}")));
            }
            if i > 0 && pairs[i - 1].1 > p {
                return Err(Error::domain(format!(
                    "gap {i} starts at {p} before the previous gap ends at {}",
                    pairs[i - 1].1
                )));
            }
        }
        Ok(GapStructure { pairs })
    }

    pub fn pairs(&self) -> &[(u64, u64)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// q_m / p_m for each pair; `None` when p_m = 0.
    pub fn ratios(&self) -> Vec<Option<Rational>> {
        self.pairs
            .iter()
            .map(|&(p, q)| (p > 0).then(|| Rational::from((q, p))))
            .collect()
    }
}

impl TryFrom<Vec<(u64, u64)>> for GapStructure {
    type Error = Error;

    fn try_from(pairs: Vec<(u64, u64)>) -> Result<Self> {
        GapStructure::new(pairs)
    }
}

impl From<GapStructure> for Vec<(u64, u64)> {
    fn from(g: GapStructure) -> Self {
        g.pairs
    }
}

/// Guard band added to η when comparing |a_j|^{1/j}.
pub fn guard_band() -> f64 {
    2f64.powi(-50)
}

const ROOT_PRECISION: u32 = 128;

/// |a_j|^{1/j} in float, zero for absent coefficients.
pub fn coefficient_root(a: &Scalar, j: u64) -> Float {
    if a.is_zero() {
        return Float::new(ROOT_PRECISION);
    }
    let m = Float::with_val(ROOT_PRECISION, a.modulus());
    let ln = m.ln() / j as f64;
    ln.exp()
}

/// Per-gap maximum of |a_j|^{1/j}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapDiagnostic {
    pub p: u64,
    pub q: u64,
    pub max_root: f64,
}

/// Maximum of |a_j|^{1/j} over each gap, in stage order; the trend over m is the sequence.
pub fn gap_diagnostics(f: &BlockSeries, g: &GapStructure) -> Vec<GapDiagnostic> {
    let flat = f.flatten();
    g.pairs()
        .iter()
        .map(|&(p, q)| {
            let max_root = flat
                .restrict(p + 1, q)
                .iter()
                .map(|(j, a)| coefficient_root(a, j).to_f64())
                .fold(0.0, f64::max);
            GapDiagnostic { p, q, max_root }
        })
        .collect()
}

/// Maximal runs p+1..=q (j ≥ 1) where every |a_j|^{1/j} ≤ η, filtered to q/p ≥ ρ.
pub fn detect_gaps(f: &BlockSeries, eta: f64, rho: f64) -> Result<GapStructure> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::domain(format!("threshold η = {eta} must lie in (0, 1)")));
    }
    if !(rho > 1.0) {
        return Err(Error::domain(format!("minimum ratio ρ = {rho} must exceed 1")));
    }
    let Some(horizon) = f.horizon() else {
        return Err(Error::domain("gap detection needs a nonzero series"));
    };
    let flat = f.flatten();
    let limit = eta + guard_band();
    let failing: Vec<u64> = flat
        .iter()
        .filter(|&(j, a)| j >= 1 && coefficient_root(a, j) > limit)
        .map(|(j, _)| j)
        .collect();
    let mut pairs = Vec::new();
    let mut start = 1u64;
    for stop in failing.iter().copied().chain(std::iter::once(horizon + 1)) {
        if stop > start {
            let (p, q) = (start - 1, stop - 1);
            if p == 0 || q as f64 >= rho * p as f64 {
                pairs.push((p, q));
            }
        }
        start = start.max(stop + 1);
    }
    GapStructure::new(pairs)
}
