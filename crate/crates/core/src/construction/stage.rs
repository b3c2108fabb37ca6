//! Stage targets and budgeted window solves with a retry ladder.

use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{float_string, GaussRational, Mode, Scalar, SparsePolynomial};
use crate::window::sample::{DEFAULT_DENSITY, DEFAULT_MIN_POINTS};
use crate::window::{
    solve_window, ApproxRequest, CompactSample, ComplexNum, Num, Primitive, SampleSpec, SolverOptions, Target,
    WindowSpec,
};

/// One polynomial term in a config: degree and a real or complex value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    pub degree: u64,
    pub value: ComplexNum,
}

/// Configuration form of a stage target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTargetSpec {
    pub k: SampleSpec,
    pub f: Vec<TermSpec>,
    pub r: Num,
}

/// Compact set, target polynomial and disc radius of one stage.
#[derive(Clone, Debug)]
pub struct StageTarget {
    pub spec: SampleSpec,
    pub k: CompactSample,
    /// Exact rational coefficients.
    pub f: SparsePolynomial,
    pub r: Rational,
}

impl StageTarget {
    pub fn new(spec: SampleSpec, f: SparsePolynomial, r: Rational) -> Result<Self> {
        if r <= 0 || r >= 1 {
            return Err(Error::domain("stage radius must lie in (0, 1)"));
        }
        let f = f.to_exact()?;
        let k = CompactSample::from_spec(&spec)?;
        Ok(StageTarget { spec, k, f, r })
    }

    pub fn from_spec(spec: &StageTargetSpec) -> Result<Self> {
        let mut f = SparsePolynomial::new(Mode::Exact);
        for t in &spec.f {
            f.add_term(t.degree, &Scalar::Exact(t.value.to_gauss()?))?;
        }
        StageTarget::new(spec.k.clone(), f, spec.r.to_rational()?)
    }
}

/// Checks that radii increase strictly across stages.
pub fn check_radii(targets: &[StageTarget]) -> Result<()> {
    if let Some(w) = targets.windows(2).find(|w| w[0].r >= w[1].r) {
        return Err(Error::domain(format!("stage radii must increase ({} then {})", w[0].r, w[1].r)));
    }
    Ok(())
}

/// Σ_k (|Re c_k| + |Im c_k|)·r^k, an exact upper bound for max_{|z|≤r} |P(z)|.
pub fn coefficient_disc_bound(p: &SparsePolynomial, r: &Rational) -> Result<Rational> {
    let exact = p.to_exact()?;
    let mut total = Rational::new();
    let mut rk = Rational::from(1);
    let mut deg = 0u64;
    for (k, c) in exact.iter() {
        let q = c.as_exact().expect("exact copy");
        let step = u32::try_from(k - deg).map_err(|_| Error::domain("degree gap too large"))?;
        rk *= Rational::from(rug::ops::Pow::pow(r, step));
        deg = k;
        let a = Rational::from(q.re.abs_ref()) + Rational::from(q.im.abs_ref());
        total += a * &rk;
    }
    Ok(total)
}

/// Placement of the unknowns inside a long window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    Bottom,
    Top,
}

/// Settings shared by the stage solves of a builder.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct StageSolveConfig {
    /// Number of unknown coefficients in the first attempt.
    pub max_terms: u64,
    pub placement: Placement,
    pub retries: usize,
    pub solver: SolverOptions,
}

impl Default for StageSolveConfig {
    fn default() -> Self {
        StageSolveConfig { max_terms: 30, placement: Placement::Top, retries: 6, solver: SolverOptions::default() }
    }
}

/// Outcome of a budgeted solve.
#[derive(Clone, Debug)]
pub struct BudgetedApprox {
    pub polynomial: SparsePolynomial,
    /// Sample actually used (after densification).
    pub k: CompactSample,
    pub err_k: Float,
    pub disc_bound: Rational,
    pub window: WindowSpec,
    pub attempts: usize,
}

/// `|value| < bound` (or `≤`), exactly in exact mode.
pub fn modulus_below(value: &Scalar, bound: &Rational, strict: bool) -> bool {
    match value {
        Scalar::Exact(q) => {
            let n = q.norm_sqr();
            let b2 = Rational::from(bound * bound);
            if strict {
                n < b2
            } else {
                n <= b2
            }
        }
        Scalar::Float(_) => {
            let m = value.modulus();
            if strict {
                m < *bound
            } else {
                m <= *bound
            }
        }
    }
}

fn sub_window(full: WindowSpec, terms: u64, placement: Placement) -> WindowSpec {
    let terms = terms.min(full.len());
    match placement {
        Placement::Bottom => WindowSpec { lo: full.lo, hi: full.lo + terms - 1 },
        Placement::Top => WindowSpec { lo: full.hi + 1 - terms, hi: full.hi },
    }
}

/// Source of the sample set K for a budgeted solve. `level` counts densifications.
pub trait SampleSource {
    fn sample(&self, level: u32) -> Result<CompactSample>;
}

impl SampleSource for SampleSpec {
    fn sample(&self, level: u32) -> Result<CompactSample> {
        let mut spec = self.clone();
        if level > 0 {
            let f = 1usize << level;
            spec.density = Some(spec.density.unwrap_or(DEFAULT_DENSITY) * f as f64);
            spec.min_points = Some(spec.min_points.unwrap_or(DEFAULT_MIN_POINTS) * f);
            for p in &mut spec.primitives {
                if let Primitive::Segment { points: Some(n), .. } | Primitive::Arc { points: Some(n), .. } = p {
                    *n *= f;
                }
            }
        }
        CompactSample::from_spec(&spec)
    }
}

/// Equispaced real grid on [−a, a] with `base·2^level + 1` points.
#[derive(Clone, Debug)]
pub struct RealGrid {
    pub a: Rational,
    pub base: usize,
}

impl SampleSource for RealGrid {
    fn sample(&self, level: u32) -> Result<CompactSample> {
        CompactSample::real_grid(&self.a, (self.base << level) + 1)
    }
}

/// Finds P with support in `window` such that `|P − target| < budget` on
/// `K ∪ extra` and, when `r` is given, the coefficient disc bound at `r` is `< budget`.
///
/// On failure the attempt is repeated with a wider sub-window, a denser K, a
/// finer polygon, or a heavier disc weight, in that order of preference.
#[allow(clippy::too_many_arguments)]
pub fn solve_budgeted(
    target: &SparsePolynomial,
    source: &dyn SampleSource,
    extra: &[GaussRational],
    r: Option<&Rational>,
    window: WindowSpec,
    budget: &Rational,
    mode: Mode,
    cfg: &StageSolveConfig,
) -> Result<BudgetedApprox> {
    let mut level = 0u32;
    let mut terms = cfg.max_terms.max(1);
    let mut opts = cfg.solver.clone();
    opts.output = mode;
    let radius = match r {
        Some(r) => r.clone(),
        None => {
            opts.disc_points = 0;
            Rational::from((1, 2))
        }
    };
    let mut lambda = Rational::from(1);
    let mut last_reason = String::new();
    for attempt in 1..=cfg.retries + 1 {
        let mut k = source.sample(level)?;
        for z in extra {
            k = k.with_point(z)?;
        }
        let sub = sub_window(window, terms, cfg.placement);
        let mut req = ApproxRequest::new(Target::Polynomial(target.clone()), k.clone(), radius.clone(), sub);
        req.lambda = lambda.clone();
        req.options = opts.clone();
        let res = solve_window(&req)?;
        let residuals: Vec<Scalar> = {
            let pts = k.scalars(mode);
            let pv = res.polynomial.eval_many(&pts)?;
            let tv = target.to_mode(mode)?.eval_many(&pts)?;
            pv.iter().zip(&tv).map(|(a, b)| a.checked_sub(b)).collect::<Result<_>>()?
        };
        let k_ok = residuals.iter().all(|v| modulus_below(v, budget, true));
        let disc_bound = match r {
            Some(r) => coefficient_disc_bound(&res.polynomial, r)?,
            None => Rational::new(),
        };
        let disc_ok = disc_bound < *budget;
        if k_ok && disc_ok {
            return Ok(BudgetedApprox {
                polynomial: res.polynomial,
                k,
                err_k: res.err_k,
                disc_bound,
                window: sub,
                attempts: attempt,
            });
        }
        last_reason = format!(
            "window [{}, {}]: err_K = {}, disc bound = {:.6e} against budget {}",
            sub.lo,
            sub.hi,
            float_string(&res.err_k),
            disc_bound.to_f64(),
            budget
        );
        if !k_ok {
            if sub.len() < window.len() && 2 * terms <= opts.window_cap {
                terms *= 2;
            } else if attempt % 2 == 1 {
                level += 1;
            } else {
                opts.polygon_order += 1;
            }
        } else {
            lambda *= 4;
        }
    }
    Err(Error::Solver(last_reason))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disc_bound_is_exact_sum() {
        let mut p = SparsePolynomial::new(Mode::Exact);
        p.set(1, Scalar::Exact(GaussRational::new(-2, 1))).unwrap();
        p.set(3, Scalar::Exact(GaussRational::real(8))).unwrap();
        let r = Rational::from((1, 2));
        // 3·(1/2) + 8·(1/8)
        assert_eq!(coefficient_disc_bound(&p, &r).unwrap(), Rational::from((5, 2)));
    }

    #[test]
    fn zero_target_meets_any_budget() {
        let spec = SampleSpec::segment(1.2, 1.3);
        let f = SparsePolynomial::new(Mode::Exact);
        let res = solve_budgeted(
            &f,
            &spec,
            &[],
            Some(&Rational::from((1, 2))),
            WindowSpec::new(3, 4).unwrap(),
            &Rational::from((1, 4)),
            Mode::Exact,
            &StageSolveConfig::default(),
        )
        .unwrap();
        assert!(res.polynomial.is_empty());
        assert_eq!(res.attempts, 1);
    }

    #[test]
    fn constant_on_short_segment() {
        let spec = SampleSpec::segment(1.2, 1.3);
        let f = SparsePolynomial::monomial(0, Scalar::from_int(1, Mode::Exact));
        let res = solve_budgeted(
            &f,
            &spec,
            &[GaussRational::real(Rational::from((6, 5)))],
            Some(&Rational::from((2, 5))),
            WindowSpec::new(3, 4).unwrap(),
            &Rational::from((1, 4)),
            Mode::float(256),
            &StageSolveConfig::default(),
        )
        .unwrap();
        assert!(res.err_k < 0.25);
        assert!(res.disc_bound < Rational::from((1, 4)));
        assert_eq!(res.polynomial.valuation(), Some(3));
    }
}
