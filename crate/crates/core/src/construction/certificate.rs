//! Serialized stage certificates and their independent re-verification.
//!
//! A certificate stores the series, the stage plan, the sample sets, targets
//! and budgets. Every inequality is recomputed from those fields alone by
//! [`Certificate::verify`]; recorded values must match the recomputation
//! exactly and every inequality must hold.

use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

use super::plan::{check_mu_avoidance, WindowTriple};
use super::stage::coefficient_disc_bound;
use crate::error::{Error, Result};
use crate::gaps::Subsequence;
use crate::series::{
    format_hex_float, partial_sum_at, BlockSeries, Center, GaussRational, Mode, Scalar, ScalarRecord,
    SparsePolynomial,
};
use crate::window::WindowSpec;

/// Precision of recorded values.
pub const RECORD_PRECISION: u32 = 256;
/// Points of the probe grid on [−1, 1] in the real construction.
pub const REAL_PROBE_POINTS: usize = 401;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructionKind {
    /// f ∈ U(D,0) ∖ U^(μ)(D,0).
    UMinusUmu,
    /// f ∈ U^(μ)(D,0) ∖ U^(μ)(D,ζ).
    Center,
    /// Real-line analogue.
    Real,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "=0")]
    Zero,
}

/// One checked inequality: `value relation bound`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inequality {
    pub name: String,
    pub value: String,
    pub relation: Relation,
    pub bound: String,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: usize,
    /// Index `n_j` of μ that produced the triple.
    pub index: usize,
    pub triple: WindowTriple,
    /// Sample points of K̃ (K together with the probe point).
    pub k: Vec<GaussRational>,
    /// Disc radius, absent for the real construction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<String>,
    pub target: SparsePolynomial,
    pub budget: String,
    pub p_support: WindowSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_support: Option<WindowSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrective_degree: Option<u64>,
    pub attempts: Vec<usize>,
    pub inequalities: Vec<Inequality>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeEntry {
    pub n: usize,
    pub mu: u64,
    /// Stage whose probe range contains μ_n (0 before the first stage).
    pub stage: usize,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub entries: Vec<ProbeEntry>,
    /// Maximum of the entries belonging to each stage (index 0 = stage 1).
    pub stage_maxima: Vec<String>,
    pub max: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<String>,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedStage {
    pub index: usize,
    pub reason: String,
}

/// A constructed series with its per-stage certificates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: ConstructionKind,
    pub mode: Mode,
    /// The μ prefix used to plan the stages.
    pub mu: Vec<u64>,
    pub first_index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<ScalarRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z0: Option<ScalarRecord>,
    pub series: BlockSeries,
    #[serde(default)]
    pub skipped: Vec<SkippedStage>,
    pub stages: Vec<StageRecord>,
    pub probe: ProbeRecord,
    pub mu_avoidance: bool,
}

/// Result of [`Certificate::verify`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub failures: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_failing_stage: Option<usize>,
}

/// Canonical text of a recorded value.
pub fn value_string(x: &Float) -> String {
    format_hex_float(&Float::with_val(RECORD_PRECISION, x))
}

fn rational_value(q: &Rational) -> Float {
    Float::with_val(RECORD_PRECISION, q)
}

/// Maximal modulus among values, with an exact comparison against `bound`.
fn sup_check(values: &[Scalar], bound: &Rational, relation: Relation) -> (Float, bool) {
    let exact = values.iter().all(|v| v.as_exact().is_some());
    if exact && !values.is_empty() {
        let max = values
            .iter()
            .map(|v| v.as_exact().expect("exact").norm_sqr())
            .max()
            .expect("nonempty");
        let b2 = Rational::from(bound * bound);
        let holds = match relation {
            Relation::Lt => max < b2,
            Relation::Le => max <= b2,
            Relation::Gt => max > b2,
            Relation::Zero => max == 0,
        };
        (Float::with_val(RECORD_PRECISION, &max).sqrt(), holds)
    } else {
        let max = values.iter().fold(Float::new(RECORD_PRECISION), |a, v| a.max(&v.modulus()));
        let holds = match relation {
            Relation::Lt => max < *bound,
            Relation::Le => max <= *bound,
            Relation::Gt => max > *bound,
            Relation::Zero => max.is_zero(),
        };
        (max, holds)
    }
}

fn inequality(name: String, value: &Float, relation: Relation, bound: &Rational, holds: bool) -> Inequality {
    Inequality { name, value: value_string(value), relation, bound: bound.to_string(), holds }
}

/// Context shared by all stages of one certificate.
pub(crate) struct EvalContext {
    pub kind: ConstructionKind,
    pub mode: Mode,
    pub zeta: Option<Scalar>,
    pub z0: Option<Scalar>,
}

fn parse_q(text: &str) -> Result<Rational> {
    crate::series::parse_rational(text)
}

/// Recomputes the inequalities of one stage from the series and the stage record.
pub(crate) fn stage_inequalities(
    ctx: &EvalContext,
    series: &BlockSeries,
    rec: &StageRecord,
) -> Result<Vec<Inequality>> {
    let mode = ctx.mode;
    let t = rec.triple;
    let s = rec.stage;
    let budget = parse_q(&rec.budget)?;
    let pts: Vec<Scalar> = rec.k.iter().map(|q| Scalar::from_gauss(q, mode)).collect();
    let target = rec.target.to_mode(mode)?;
    let fv = target.eval_many(&pts)?;
    let diff = |p: &SparsePolynomial, sign: i64| -> Result<Vec<Scalar>> {
        let pv = p.eval_many(&pts)?;
        pv.iter()
            .zip(&fv)
            .map(|(a, b)| if sign < 0 { a.checked_sub(b) } else { a.checked_add(b) })
            .collect()
    };
    let mut out = Vec::new();
    match ctx.kind {
        ConstructionKind::UMinusUmu | ConstructionKind::Real => {
            let sv = series.partial_sum_origin(t.v);
            let (val, holds) = sup_check(&diff(&sv, -1)?, &budget, Relation::Lt);
            out.push(inequality(format!("stage {s}: sup_K |S_v(f) - f_s| < budget"), &val, Relation::Lt, &budget, holds));
            let q = series.restrict(t.v + 1, t.w).flatten();
            let (val, holds) = sup_check(&diff(&q, 1)?, &budget, Relation::Lt);
            out.push(inequality(format!("stage {s}: sup_K |Q_s + f_s| < budget"), &val, Relation::Lt, &budget, holds));
            if let Some(r) = &rec.r {
                let r = parse_q(r)?;
                let p = series.restrict(t.u, t.v).flatten();
                for (label, poly) in [("P_s", &p), ("Q_s", &q)] {
                    let b = coefficient_disc_bound(poly, &r)?;
                    let holds = b <= budget;
                    out.push(inequality(
                        format!("stage {s}: sup_(|z|<=r) |{label}| <= budget"),
                        &rational_value(&b),
                        Relation::Le,
                        &budget,
                        holds,
                    ));
                }
            }
            let sw: Vec<Scalar> = series.partial_sum_origin(t.w).eval_many(&pts)?;
            let twice = Rational::from(&budget * 2u32);
            let (val, holds) = sup_check(&sw, &twice, Relation::Lt);
            out.push(inequality(format!("stage {s}: sup_K |S_w(f)| < 2 budget"), &val, Relation::Lt, &twice, holds));
        }
        ConstructionKind::Center => {
            let zeta = ctx.zeta.clone().ok_or_else(|| Error::invariant("center certificate without zeta"))?;
            let z0 = ctx.z0.clone().ok_or_else(|| Error::invariant("center certificate without z0"))?;
            let sw = series.partial_sum_origin(t.w);
            let (val, holds) = sup_check(&diff(&sw, -1)?, &budget, Relation::Lt);
            out.push(inequality(format!("stage {s}: sup_K |S_w(f) - f_l| < budget"), &val, Relation::Lt, &budget, holds));
            let r = parse_q(rec.r.as_deref().ok_or_else(|| Error::invariant("center stage without radius"))?)?;
            let p = series.restrict(t.v + 1, t.w).flatten();
            let b = coefficient_disc_bound(&p, &r)?;
            let holds = b < budget;
            out.push(inequality(format!("stage {s}: sup_(|z|<=r) |P_l| < budget"), &rational_value(&b), Relation::Lt, &budget, holds));
            let fz0 = target.eval(&z0)?;
            let wq = Rational::from(t.w);
            let (val, holds) = sup_check(std::slice::from_ref(&fz0), &wq, Relation::Le);
            out.push(inequality(format!("stage {s}: |f_l(z0)| <= w"), &val, Relation::Le, &wq, holds));
            let e = 1 + t.w;
            let d = z0.pow(e as i64)?.checked_sub(&z0.checked_sub(&zeta)?.pow(e as i64)?)?;
            let two_d = d.checked_mul(&Scalar::from_int(2, mode))?;
            let one = Rational::from(1);
            let (val, holds) = sup_check(std::slice::from_ref(&two_d), &one, Relation::Gt);
            out.push(inequality(format!("stage {s}: 2|z0^(1+w) - (z0-zeta)^(1+w)| > 1"), &val, Relation::Gt, &one, holds));
            let a = series.coefficient(e);
            let cap = Rational::from(2 * e);
            let (val, holds) = sup_check(std::slice::from_ref(&a), &cap, Relation::Le);
            out.push(inequality(format!("stage {s}: |a_(1+w)| <= 2(1+w)"), &val, Relation::Le, &cap, holds));
            let fl = series.restrict(0, e);
            let center = Center::new(zeta)?;
            let id = partial_sum_at(&fl, &center, t.w, &z0)?;
            let zero = Rational::new();
            let (val, holds) = match &id {
                Scalar::Exact(q) => (Float::with_val(RECORD_PRECISION, q.norm_sqr()).sqrt(), q.norm_sqr() == 0),
                Scalar::Float(_) => {
                    let m = id.modulus();
                    let tol = Float::with_val(m.prec(), Float::i_exp(1, -((mode.working_precision() / 2) as i32)));
                    let scale = Float::with_val(m.prec(), a.modulus() * &tol) + &tol;
                    let ok = m <= scale;
                    (m, ok)
                }
            };
            out.push(inequality(format!("stage {s}: S_w(F_l, zeta)(z0) = 0"), &val, Relation::Zero, &zero, holds));
        }
    }
    Ok(out)
}

/// Last stage `l` with `w_l ≤ μ` (0 if none).
fn stage_of(mu: u64, stages: &[WindowTriple]) -> usize {
    stages.iter().rposition(|t| mu >= t.w).map_or(0, |i| i + 1)
}

/// Recomputes the probe over all μ_n up to the series horizon.
pub(crate) fn probe_record(
    ctx: &EvalContext,
    series: &BlockSeries,
    mu: &[u64],
    stages: &[WindowTriple],
    bound: Option<Rational>,
) -> Result<ProbeRecord> {
    let mode = ctx.mode;
    let horizon = stages.iter().map(|t| t.w + 1).max().unwrap_or(0);
    let probe_points: Vec<Scalar> = match ctx.kind {
        ConstructionKind::Real => {
            let step = Rational::from((2, REAL_PROBE_POINTS as u64 - 1));
            (0..REAL_PROBE_POINTS)
                .map(|i| Scalar::from_rational(Rational::from(&step * i as u64) - 1u32, mode))
                .collect()
        }
        _ => vec![ctx.z0.clone().ok_or_else(|| Error::invariant("probe point missing"))?],
    };
    let center = match (&ctx.kind, &ctx.zeta) {
        (ConstructionKind::Center, Some(z)) => Center::new(z.clone())?,
        _ => Center::origin(mode),
    };
    let mut entries = Vec::new();
    let mut stage_max = vec![Float::new(RECORD_PRECISION); stages.len()];
    let mut max = Float::new(RECORD_PRECISION);
    for (i, &m) in mu.iter().enumerate() {
        if m > horizon {
            break;
        }
        let values = crate::series::partial_sum_at_many(series, &center, m, &probe_points)?;
        let sup = values.iter().fold(Float::new(RECORD_PRECISION), |a, v| a.max(&v.modulus()));
        let st = stage_of(m, stages);
        if st > 0 {
            stage_max[st - 1].max_mut(&sup);
        }
        max.max_mut(&sup);
        entries.push(ProbeEntry { n: i + 1, mu: m, stage: st, value: value_string(&sup) });
    }
    let holds = bound.as_ref().map_or(true, |b| max <= *b);
    Ok(ProbeRecord {
        entries,
        stage_maxima: stage_max.iter().map(value_string).collect(),
        max: value_string(&max),
        bound: bound.map(|b| b.to_string()),
        holds,
    })
}

/// `2 Σ_{s ≤ S} budget_s`.
pub fn probe_bound(budgets: &[Rational]) -> Rational {
    budgets.iter().fold(Rational::new(), |a, b| a + b) * 2u32
}

impl Certificate {
    pub(crate) fn context(&self) -> Result<EvalContext> {
        let zeta = self.zeta.as_ref().map(|r| r.to_scalar(self.mode)).transpose()?;
        let z0 = self.z0.as_ref().map(|r| r.to_scalar(self.mode)).transpose()?;
        Ok(EvalContext { kind: self.kind, mode: self.mode, zeta, z0 })
    }

    pub fn triples(&self) -> Vec<WindowTriple> {
        self.stages.iter().map(|s| s.triple).collect()
    }

    pub fn budgets(&self) -> Result<Vec<Rational>> {
        self.stages.iter().map(|s| parse_q(&s.budget)).collect()
    }

    /// Allowed coefficient degrees of stage `rec`.
    fn support_ok(&self, rec: &StageRecord) -> Option<String> {
        let t = rec.triple;
        let (plo, phi) = match self.kind {
            ConstructionKind::Center => (t.v + 1, t.w),
            _ => (t.u, t.v),
        };
        if rec.p_support.lo < plo || rec.p_support.hi > phi {
            return Some(format!("stage {}: P support [{}, {}] outside [{plo}, {phi}]", rec.stage, rec.p_support.lo, rec.p_support.hi));
        }
        if let Some(q) = rec.q_support {
            if q.lo < t.v + 1 || q.hi > t.w {
                return Some(format!("stage {}: Q support [{}, {}] outside [{}, {}]", rec.stage, q.lo, q.hi, t.v + 1, t.w));
            }
        }
        if let Some(d) = rec.corrective_degree {
            if d != t.w + 1 {
                return Some(format!("stage {}: corrective degree {d} differs from 1 + w", rec.stage));
            }
        }
        None
    }

    fn allowed(&self, k: u64) -> bool {
        self.stages.iter().any(|rec| {
            let inside = |w: &WindowSpec| w.lo <= k && k <= w.hi;
            inside(&rec.p_support) || rec.q_support.as_ref().is_some_and(inside) || rec.corrective_degree == Some(k)
        })
    }

    /// Re-checks every recorded inequality from the serialized data alone.
    pub fn verify(&self) -> VerifyReport {
        let mut failures = Vec::new();
        let mut first_stage = None;
        let mut fail = |stage: Option<usize>, msg: String, failures: &mut Vec<String>| {
            if first_stage.is_none() {
                first_stage = stage;
            }
            failures.push(msg);
        };
        if self.series.mode() != self.mode {
            fail(None, format!("series mode {} differs from certificate mode {}", self.series.mode(), self.mode), &mut failures);
        }
        let ctx = match self.context() {
            Ok(c) => c,
            Err(e) => {
                fail(None, format!("unreadable probe data: {e}"), &mut failures);
                return VerifyReport { passed: false, failures, first_failing_stage: None };
            }
        };
        for rec in &self.stages {
            if let Some(msg) = self.support_ok(rec) {
                fail(Some(rec.stage), msg, &mut failures);
            }
        }
        for (k, _) in self.series.flatten().iter() {
            if !self.allowed(k) {
                let stage = self.stages.iter().find(|r| k <= r.triple.w + 1).map(|r| r.stage);
                fail(stage, format!("coefficient of degree {k} lies outside every stage support"), &mut failures);
                break;
            }
        }
        for rec in &self.stages {
            match stage_inequalities(&ctx, &self.series, rec) {
                Ok(fresh) => {
                    if fresh.len() != rec.inequalities.len() {
                        fail(Some(rec.stage), format!("stage {}: inequality list does not match", rec.stage), &mut failures);
                        continue;
                    }
                    for (new, old) in fresh.iter().zip(&rec.inequalities) {
                        if new.name != old.name || new.bound != old.bound || new.relation != old.relation {
                            fail(Some(rec.stage), format!("{}: record does not match recomputation", old.name), &mut failures);
                        } else if !new.holds {
                            fail(Some(rec.stage), format!("{} violated: value {} against bound {}", new.name, new.value, new.bound), &mut failures);
                        } else if new.value != old.value {
                            fail(Some(rec.stage), format!("{}: recorded value {} but recomputed {}", new.name, old.value, new.value), &mut failures);
                        }
                    }
                }
                Err(e) => fail(Some(rec.stage), format!("stage {}: {e}", rec.stage), &mut failures),
            }
        }
        let bound = match self.kind {
            ConstructionKind::Center => None,
            _ => self.budgets().ok().map(|b| probe_bound(&b)),
        };
        match probe_record(&ctx, &self.series, &self.mu, &self.triples(), bound) {
            Ok(fresh) => {
                if !fresh.holds {
                    fail(None, format!("probe bound violated: max {} against {:?}", fresh.max, fresh.bound), &mut failures);
                }
                if fresh != self.probe {
                    fail(None, "probe values do not match recomputation".into(), &mut failures);
                }
            }
            Err(e) => fail(None, format!("probe: {e}"), &mut failures),
        }
        match Subsequence::custom(self.mu.clone()) {
            Ok(mu) => {
                let ok = check_mu_avoidance(&mu, &self.triples(), self.first_index);
                if !ok || ok != self.mu_avoidance {
                    fail(None, "μ-avoidance fails".into(), &mut failures);
                }
            }
            Err(e) => fail(None, format!("μ: {e}"), &mut failures),
        }
        VerifyReport { passed: failures.is_empty(), failures, first_failing_stage: first_stage }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Exact z0 = ζ/|ζ| for real or rational-modulus ζ, otherwise an exact point
/// on the unit circle at the angle of ζ.
pub fn unit_direction(zeta: &Scalar) -> Result<Scalar> {
    if zeta.is_zero() {
        return Err(Error::domain("zeta must be nonzero"));
    }
    match zeta {
        Scalar::Exact(q) => {
            let n = q.norm_sqr();
            let (num, den) = (n.numer().clone(), n.denom().clone());
            if num.is_perfect_square() && den.is_perfect_square() {
                let m = Rational::from((num.sqrt(), den.sqrt()));
                return Ok(Scalar::Exact(GaussRational::new(
                    Rational::from(&q.re / &m),
                    Rational::from(&q.im / &m),
                )));
            }
            let (re, im) = q.to_f64_pair();
            Ok(Scalar::Exact(crate::window::unit_point(im.atan2(re))))
        }
        Scalar::Float(c) => {
            let prec = c.precision();
            let m = zeta.modulus();
            let re = Float::with_val(prec, c.re() / &m);
            let im = Float::with_val(prec, c.im() / &m);
            Ok(Scalar::Float(crate::series::BigComplex::new(prec, &re, &im)))
        }
    }
}
