//! Block series whose μ-partial sums approximate at the origin but vanish at
//! `z0 = ζ/|ζ|` when re-expanded at ζ.
//!
//! Stage `l` places `P_l` in `[1 + v, w]` and one corrective monomial
//! `R_l = a·z^{1+w}` chosen so that `S_w(Σ_{i≤l}(P_i + R_i), ζ)(z0) = 0`.

use rug::Rational;

use super::certificate::{
    probe_record, stage_inequalities, unit_direction, Certificate, ConstructionKind, EvalContext, SkippedStage,
    StageRecord,
};
use super::plan::{check_mu_avoidance, plan_stages, WindowTriple};
use super::stage::{check_radii, solve_budgeted, StageSolveConfig, StageTarget};
use crate::error::{Error, Result};
use crate::gaps::Subsequence;
use crate::series::{BlockSeries, Mode, Scalar, ScalarRecord, SparsePolynomial};
use crate::window::WindowSpec;

/// Stage budget `1/2^l`.
pub fn center_budget(l: usize) -> Rational {
    Rational::from((1u64, 1u64 << l))
}

/// `z0^j − (z0 − ζ)^j`.
pub fn eligibility_denominator(z0: &Scalar, zeta: &Scalar, j: u64) -> Result<Scalar> {
    z0.pow(j as i64)?.checked_sub(&z0.checked_sub(zeta)?.pow(j as i64)?)
}

/// `2|z0^j − (z0 − ζ)^j| > 1`, exactly in exact mode.
pub fn eligible(z0: &Scalar, zeta: &Scalar, j: u64) -> Result<bool> {
    let d = eligibility_denominator(z0, zeta, j)?;
    Ok(match &d {
        Scalar::Exact(q) => Rational::from(q.norm_sqr() * 4u32) > 1,
        Scalar::Float(_) => d.modulus() * 2u32 > 1,
    })
}

/// Corrective coefficient `a = −value / (z0^{1+w} − (z0 − ζ)^{1+w})`.
pub fn corrective_coefficient(value: &Scalar, z0: &Scalar, zeta: &Scalar, w: u64) -> Result<Scalar> {
    let d = eligibility_denominator(z0, zeta, 1 + w)?;
    value.neg().checked_div(&d)
}

pub fn build_center_counterexample(
    mu: &[u64],
    zeta: &Scalar,
    targets: &[StageTarget],
    mode: Mode,
    cfg: &StageSolveConfig,
) -> Result<Certificate> {
    if zeta.is_zero() {
        return Err(Error::domain("zeta must be nonzero for the center construction"));
    }
    if targets.is_empty() {
        return Err(Error::domain("at least one stage target is required"));
    }
    check_radii(targets)?;
    let zeta = zeta.to_mode(mode)?;
    crate::series::Center::new(zeta.clone())?;
    let z0 = unit_direction(&zeta)?;
    let z0_exact = z0.to_mode(Mode::Exact)?.as_exact().cloned().expect("exact");
    let (plan, skipped) = plan_stages(mu, targets.len(), |t: &WindowTriple| match eligible(&z0, &zeta, 1 + t.w) {
        Ok(true) => None,
        Ok(false) => Some(format!("2|z0^j - (z0-zeta)^j| <= 1 at j = {}", 1 + t.w)),
        Err(e) => Some(e.to_string()),
    })?;
    let mut series = BlockSeries::new(mode);
    let mut prev = SparsePolynomial::new(mode);
    let mut records = Vec::new();
    for (l, ((index, t), target)) in plan.iter().zip(targets).enumerate() {
        let l = l + 1;
        let budget = center_budget(l);
        let fl = target.f.to_mode(mode)?;
        if fl.eval(&z0)?.modulus() > t.w {
            return Err(Error::StageFailed { stage: l, reason: format!("|f_l(z0)| exceeds w = {}", t.w) });
        }
        let p_target = fl.sub(&prev)?;
        let extra = [z0_exact.clone()];
        let p = solve_budgeted(&p_target, &target.spec, &extra, Some(&target.r), WindowSpec { lo: t.v + 1, hi: t.w }, &budget, mode, cfg)
            .map_err(|e| Error::StageFailed { stage: l, reason: format!("P: {e}") })?;
        let with_p = prev.add(&p.polynomial)?;
        let a = corrective_coefficient(&with_p.eval(&z0)?, &z0, &zeta, t.w)?;
        let r_poly = SparsePolynomial::monomial(1 + t.w, a);
        prev = with_p.add(&r_poly)?;
        series.push_block(p.polynomial)?;
        series.push_block(r_poly)?;
        records.push(StageRecord {
            stage: l,
            index: *index,
            triple: *t,
            k: p.k.points().to_vec(),
            r: Some(target.r.to_string()),
            target: target.f.clone(),
            budget: budget.to_string(),
            p_support: p.window,
            q_support: None,
            corrective_degree: Some(1 + t.w),
            attempts: vec![p.attempts],
            inequalities: Vec::new(),
        });
    }
    let ctx = EvalContext { kind: ConstructionKind::Center, mode, zeta: Some(zeta.clone()), z0: Some(z0.clone()) };
    for rec in &mut records {
        rec.inequalities = stage_inequalities(&ctx, &series, rec)?;
        if let Some(bad) = rec.inequalities.iter().find(|i| !i.holds) {
            return Err(Error::StageFailed { stage: rec.stage, reason: format!("{} (value {})", bad.name, bad.value) });
        }
    }
    let triples: Vec<_> = records.iter().map(|r| r.triple).collect();
    let probe = probe_record(&ctx, &series, mu, &triples, None)?;
    let first_index = plan[0].0;
    let mu_avoidance = check_mu_avoidance(&Subsequence::custom(mu.to_vec())?, &triples, first_index);
    Ok(Certificate {
        kind: ConstructionKind::Center,
        mode,
        mu: mu.to_vec(),
        first_index,
        zeta: Some(ScalarRecord::from_scalar(&zeta)),
        z0: Some(ScalarRecord::from_scalar(&z0)),
        series,
        skipped: skipped.into_iter().map(|s| SkippedStage { index: s.index, reason: s.reason }).collect(),
        stages: records,
        probe,
        mu_avoidance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::from_rational(Rational::from((n, d)), Mode::Exact)
    }

    #[test]
    fn eligibility_at_half() {
        let one = Scalar::from_int(1, Mode::Exact);
        assert!(!eligible(&one, &q(1, 2), 1).unwrap());
        for j in 2..10 {
            assert!(eligible(&one, &q(1, 2), j).unwrap());
        }
    }

    #[test]
    fn corrective_coefficient_example() {
        let one = Scalar::from_int(1, Mode::Exact);
        let a = corrective_coefficient(&one, &one, &q(1, 2), 3).unwrap();
        assert_eq!(a, q(-16, 15));
    }

    #[test]
    fn zero_zeta_is_rejected() {
        let res = build_center_counterexample(&[1, 2, 6], &Scalar::zero(Mode::Exact), &[], Mode::Exact, &StageSolveConfig::default());
        assert!(matches!(res, Err(Error::Domain(_))));
    }
}
