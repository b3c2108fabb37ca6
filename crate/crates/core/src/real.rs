//! Real-line analogue: windowed uniform approximation on [−A, A] of targets
//! vanishing at 0, and the real counterexample construction.

use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

use crate::construction::certificate::{
    probe_bound, probe_record, stage_inequalities, Certificate, ConstructionKind, EvalContext, SkippedStage,
    StageRecord,
};
use crate::construction::plan::{check_mu_avoidance, plan_stages};
use crate::construction::stage::{solve_budgeted, RealGrid, StageSolveConfig};
use crate::construction::stage_budget;
use crate::error::{Error, Result};
use crate::gaps::Subsequence;
use crate::series::{BlockSeries, GaussRational, Mode, SparsePolynomial};
use crate::window::{solve_window, ApproxRequest, CompactSample, SolverOptions, Target, WindowSpec};

/// Grid points per unit of A.
pub const GRID_DENSITY: usize = 400;

/// A real target on [−A, A] with `h(0) = 0`.
#[derive(Clone, Debug)]
pub enum RealTarget {
    /// Real polynomial without constant term.
    Polynomial { f: SparsePolynomial, a: Rational },
    /// Values on the equispaced grid of `values.len()` points (odd, so 0 is a node).
    Samples { a: Rational, values: Vec<Rational> },
}

impl RealTarget {
    pub fn polynomial(f: SparsePolynomial, a: Rational) -> Result<Self> {
        let f = f.to_exact()?;
        if !f.is_real() {
            return Err(Error::domain("real target must have real coefficients"));
        }
        if f.get(0).is_some_and(|c| !c.is_zero()) {
            return Err(Error::domain("real target must vanish at 0"));
        }
        if a <= 0 {
            return Err(Error::domain("interval half-width A must be positive"));
        }
        Ok(RealTarget::Polynomial { f, a })
    }

    pub fn samples(a: Rational, values: Vec<Rational>) -> Result<Self> {
        if a <= 0 {
            return Err(Error::domain("interval half-width A must be positive"));
        }
        if values.len() < 3 || values.len() % 2 == 0 {
            return Err(Error::domain("sampled target needs an odd number (≥ 3) of grid values"));
        }
        if values[values.len() / 2] != 0 {
            return Err(Error::domain("sampled target must vanish at the grid point 0"));
        }
        Ok(RealTarget::Samples { a, values })
    }

    pub fn a(&self) -> &Rational {
        match self {
            RealTarget::Polynomial { a, .. } | RealTarget::Samples { a, .. } => a,
        }
    }

    /// Default number of grid points: `400·⌈A⌉ + 1`.
    pub fn default_grid_len(a: &Rational) -> usize {
        let ceil = a.clone().ceil().to_f64() as usize;
        GRID_DENSITY * ceil.max(1) + 1
    }

    fn grid(&self) -> Result<CompactSample> {
        match self {
            RealTarget::Polynomial { a, .. } => CompactSample::real_grid(a, Self::default_grid_len(a)),
            RealTarget::Samples { a, values } => CompactSample::real_grid(a, values.len()),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RealWindowResult {
    pub polynomial: SparsePolynomial,
    /// Maximal error over the grid.
    #[serde(with = "crate::float_serde")]
    pub err: Float,
    pub grid_points: usize,
}

/// Best real P with support in `[l, m]` in the discrete sup norm on the grid of [−A, A].
pub fn solve_real_window(h: &RealTarget, l: u64, m: u64, options: &SolverOptions) -> Result<RealWindowResult> {
    if l == 0 {
        return Err(Error::domain("window must start at degree ≥ 1 for targets vanishing at 0"));
    }
    let window = WindowSpec::new(l, m)?;
    let grid = h.grid()?;
    let target = match h {
        RealTarget::Polynomial { f, .. } => Target::Polynomial(f.clone()),
        RealTarget::Samples { values, .. } => {
            Target::Samples(values.iter().map(|v| GaussRational::real(v.clone())).collect())
        }
    };
    let mut opts = options.clone();
    opts.disc_points = 0;
    opts.real_coefficients = Some(true);
    let mut req = ApproxRequest::new(target, grid.clone(), Rational::from((1, 2)), window);
    req.options = opts;
    let res = solve_window(&req)?;
    Ok(RealWindowResult { polynomial: res.polynomial, err: res.err_k, grid_points: grid.len() })
}

/// One stage of the real construction: target `f_s` on `[−A_s, A_s]`.
#[derive(Clone, Debug)]
pub struct RealStageTarget {
    pub f: SparsePolynomial,
    pub a: Rational,
}

impl RealStageTarget {
    pub fn new(f: SparsePolynomial, a: Rational) -> Result<Self> {
        match RealTarget::polynomial(f, a)? {
            RealTarget::Polynomial { f, a } => Ok(RealStageTarget { f, a }),
            RealTarget::Samples { .. } => unreachable!(),
        }
    }
}

/// Builds a real series with `S_v(f) ≈ f_s` and `S_w(f) ≈ 0` on `[−A_s, A_s]`
/// and records the probe of `S_{μ_n}(f)` on a grid of [−1, 1].
pub fn build_real_counterexample(
    mu: &[u64],
    targets: &[RealStageTarget],
    mode: Mode,
    cfg: &StageSolveConfig,
) -> Result<Certificate> {
    if targets.is_empty() {
        return Err(Error::domain("at least one stage target is required"));
    }
    if let Some(w) = targets.windows(2).find(|w| w[1].a < w[0].a) {
        return Err(Error::domain(format!("interval half-widths must not decrease ({} then {})", w[0].a, w[1].a)));
    }
    let (plan, skipped) = plan_stages(mu, targets.len(), |_| None)?;
    let mut cfg = cfg.clone();
    cfg.solver.real_coefficients = Some(true);
    let mut series = BlockSeries::new(mode);
    let mut prev = SparsePolynomial::new(mode);
    let mut records = Vec::new();
    for (s, ((index, t), target)) in plan.iter().zip(targets).enumerate() {
        let s = s + 1;
        let budget = stage_budget(s);
        let grid = RealGrid { a: target.a.clone(), base: RealTarget::default_grid_len(&target.a) - 1 };
        let fs = target.f.to_mode(mode)?;
        let p = solve_budgeted(&fs.sub(&prev)?, &grid, &[], None, WindowSpec { lo: t.u, hi: t.v }, &budget, mode, &cfg)
            .map_err(|e| Error::StageFailed { stage: s, reason: format!("P: {e}") })?;
        let q = solve_budgeted(&fs.neg(), &grid, &[], None, WindowSpec { lo: t.v + 1, hi: t.w }, &budget, mode, &cfg)
            .map_err(|e| Error::StageFailed { stage: s, reason: format!("Q: {e}") })?;
        let k = if p.k.len() >= q.k.len() { p.k.points().to_vec() } else { q.k.points().to_vec() };
        prev = prev.add(&p.polynomial)?.add(&q.polynomial)?;
        series.push_block(p.polynomial)?;
        series.push_block(q.polynomial)?;
        records.push(StageRecord {
            stage: s,
            index: *index,
            triple: *t,
            k,
            r: None,
            target: target.f.clone(),
            budget: budget.to_string(),
            p_support: p.window,
            q_support: Some(q.window),
            corrective_degree: None,
            attempts: vec![p.attempts, q.attempts],
            inequalities: Vec::new(),
        });
    }
    let ctx = EvalContext { kind: ConstructionKind::Real, mode, zeta: None, z0: None };
    for rec in &mut records {
        rec.inequalities = stage_inequalities(&ctx, &series, rec)?;
        if let Some(bad) = rec.inequalities.iter().find(|i| !i.holds) {
            return Err(Error::StageFailed { stage: rec.stage, reason: format!("{} (value {})", bad.name, bad.value) });
        }
    }
    let triples: Vec<_> = records.iter().map(|r| r.triple).collect();
    let budgets: Vec<Rational> = (1..=records.len()).map(stage_budget).collect();
    let probe = probe_record(&ctx, &series, mu, &triples, Some(probe_bound(&budgets)))?;
    let first_index = plan[0].0;
    let mu_avoidance = check_mu_avoidance(&Subsequence::custom(mu.to_vec())?, &triples, first_index);
    Ok(Certificate {
        kind: ConstructionKind::Real,
        mode,
        mu: mu.to_vec(),
        first_index,
        zeta: None,
        z0: None,
        series,
        skipped: skipped.into_iter().map(|s| SkippedStage { index: s.index, reason: s.reason }).collect(),
        stages: records,
        probe,
        mu_avoidance,
    })
}

/// `Σ_k c_k x^k` with real coefficients, evaluated in f64 (for plotting and CSV).
pub fn eval_real_f64(p: &SparsePolynomial, x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, (k, c)| acc + c.to_f64_pair().0 * x.powi(k as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Scalar;

    fn x_poly() -> SparsePolynomial {
        SparsePolynomial::monomial(1, Scalar::from_int(1, Mode::Exact))
    }

    #[test]
    fn identity_in_window() {
        let h = RealTarget::polynomial(x_poly(), Rational::from(1)).unwrap();
        let opts = SolverOptions { output: Mode::Exact, ..SolverOptions::default() };
        let res = solve_real_window(&h, 1, 3, &opts).unwrap();
        assert!(res.err.is_zero());
        assert_eq!(res.polynomial.len(), 1);
        assert_eq!(res.polynomial.coefficient(1), Scalar::from_int(1, Mode::Exact));
    }

    #[test]
    fn zero_target() {
        let h = RealTarget::polynomial(SparsePolynomial::new(Mode::Exact), Rational::from(2)).unwrap();
        let res = solve_real_window(&h, 2, 5, &SolverOptions::default()).unwrap();
        assert!(res.polynomial.is_empty());
        assert!(res.err.is_zero());
    }

    #[test]
    fn rejects_zero_valuation_and_nonvanishing_targets() {
        let h = RealTarget::polynomial(x_poly(), Rational::from(1)).unwrap();
        assert!(matches!(solve_real_window(&h, 0, 3, &SolverOptions::default()), Err(Error::Domain(_))));
        let c = SparsePolynomial::monomial(0, Scalar::from_int(1, Mode::Exact));
        assert!(RealTarget::polynomial(c, Rational::from(1)).is_err());
        let v = vec![Rational::from(1), Rational::from(1), Rational::from(1)];
        assert!(RealTarget::samples(Rational::from(1), v).is_err());
    }

    #[test]
    fn sampled_target_matches_polynomial_target() {
        let a = Rational::from(1);
        let n = 101;
        let grid = CompactSample::real_grid(&a, n).unwrap();
        let values: Vec<Rational> = grid.points().iter().map(|z| z.re.clone()).collect();
        let hs = RealTarget::samples(a.clone(), values).unwrap();
        let res = solve_real_window(&hs, 1, 2, &SolverOptions::default()).unwrap();
        assert!(res.err < 1e-60);
        assert_eq!(res.grid_points, n);
    }
}
