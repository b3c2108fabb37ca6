//! Block series universal at the origin whose μ-partial sums stay bounded at a
//! point outside the disc.
//!
//! Stage `s` places `P_s` in `[u, v]` and `Q_s` in `[v + 1, w]`:
//! `S_v(f) ≈ f_s` and `S_w(f) ≈ 0` on `K_s ∪ {z0}`, both small on `|z| ≤ r_s`.
//! Every μ_n after the first stage falls between windows, so `S_{μ_n}(f)(z0)`
//! is a completed cancellation sum.

use rug::Rational;

use super::certificate::{
    probe_bound, probe_record, stage_inequalities, Certificate, ConstructionKind, EvalContext, SkippedStage,
    StageRecord,
};
use super::plan::{check_mu_avoidance, plan_stages};
use super::stage::{check_radii, solve_budgeted, StageSolveConfig, StageTarget};
use crate::error::{Error, Result};
use crate::gaps::Subsequence;
use crate::series::{BlockSeries, GaussRational, Mode, Scalar, ScalarRecord, SparsePolynomial};
use crate::window::WindowSpec;

/// Stage budget `1/(s+1)²`.
pub fn stage_budget(s: usize) -> Rational {
    Rational::from((1u64, ((s + 1) * (s + 1)) as u64))
}

/// Builds the series and its certificate, one stage per target.
pub fn build_u_minus_umu(
    mu: &[u64],
    targets: &[StageTarget],
    z0: &GaussRational,
    mode: Mode,
    cfg: &StageSolveConfig,
) -> Result<Certificate> {
    if targets.is_empty() {
        return Err(Error::domain("at least one stage target is required"));
    }
    if z0.norm_sqr() < 1 {
        return Err(Error::domain("z0 must satisfy |z0| ≥ 1"));
    }
    check_radii(targets)?;
    let (plan, skipped) = plan_stages(mu, targets.len(), |_| None)?;
    let mut series = BlockSeries::new(mode);
    let mut prev = SparsePolynomial::new(mode);
    let mut records = Vec::new();
    for (s, ((index, t), target)) in plan.iter().zip(targets).enumerate() {
        let s = s + 1;
        let budget = stage_budget(s);
        let fs = target.f.to_mode(mode)?;
        let p_target = fs.sub(&prev)?;
        let extra = [z0.clone()];
        let p = solve_budgeted(&p_target, &target.spec, &extra, Some(&target.r), WindowSpec { lo: t.u, hi: t.v }, &budget, mode, cfg)
            .map_err(|e| Error::StageFailed { stage: s, reason: format!("P: {e}") })?;
        let q = solve_budgeted(&fs.neg(), &target.spec, &extra, Some(&target.r), WindowSpec { lo: t.v + 1, hi: t.w }, &budget, mode, cfg)
            .map_err(|e| Error::StageFailed { stage: s, reason: format!("Q: {e}") })?;
        let mut k: Vec<GaussRational> = q.k.points().to_vec();
        for z in p.k.points() {
            if !k.contains(z) {
                k.push(z.clone());
            }
        }
        prev = prev.add(&p.polynomial)?.add(&q.polynomial)?;
        series.push_block(p.polynomial)?;
        series.push_block(q.polynomial)?;
        records.push(StageRecord {
            stage: s,
            index: *index,
            triple: *t,
            k,
            r: Some(target.r.to_string()),
            target: target.f.clone(),
            budget: budget.to_string(),
            p_support: p.window,
            q_support: Some(q.window),
            corrective_degree: None,
            attempts: vec![p.attempts, q.attempts],
            inequalities: Vec::new(),
        });
    }
    let ctx = EvalContext {
        kind: ConstructionKind::UMinusUmu,
        mode,
        zeta: None,
        z0: Some(Scalar::from_gauss(z0, mode)),
    };
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
        kind: ConstructionKind::UMinusUmu,
        mode,
        mu: mu.to_vec(),
        first_index,
        zeta: None,
        z0: Some(ScalarRecord::from_scalar(&Scalar::Exact(z0.clone()))),
        series,
        skipped: skipped.into_iter().map(|s| SkippedStage { index: s.index, reason: s.reason }).collect(),
        stages: records,
        probe,
        mu_avoidance,
    })
}
