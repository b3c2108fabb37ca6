use ostrowski::construction::{
    build_center_counterexample, build_u_minus_umu, Certificate, ConstructionKind, StageSolveConfig, StageTarget,
};
use ostrowski::real::{build_real_counterexample, RealStageTarget};
use ostrowski::series::{GaussRational, Mode, Scalar, SparsePolynomial};
use ostrowski::window::SampleSpec;
use ostrowski::Error;
use rug::Rational;

fn poly(terms: &[(u64, i64)]) -> SparsePolynomial {
    let mut p = SparsePolynomial::new(Mode::Exact);
    for &(k, c) in terms {
        p.set(k, Scalar::from_int(c, Mode::Exact)).unwrap();
    }
    p
}

fn target(f: &[(u64, i64)], lo: f64, hi: f64, r: (i64, i64)) -> StageTarget {
    StageTarget::new(SampleSpec::segment(lo, hi), poly(f), Rational::from(r)).unwrap()
}

fn one_stage_universal() -> Certificate {
    let z0 = GaussRational::real(Rational::from((6, 5)));
    build_u_minus_umu(&[1, 2, 6], &[target(&[(0, 1)], 1.2, 1.3, (2, 5))], &z0, Mode::float(256), &StageSolveConfig::default())
        .unwrap()
}

fn one_stage_center() -> Certificate {
    let zeta = Scalar::from_rational(Rational::from((1, 2)), Mode::Exact);
    let t = [target(&[(1, 1), (0, -1)], 1.0, 1.1, (1, 2))];
    build_center_counterexample(&[1, 2, 6, 24], &zeta, &t, Mode::Exact, &StageSolveConfig::default()).unwrap()
}

#[test]
fn single_stage_universal_round_trips_and_verifies() {
    let cert = one_stage_universal();
    assert_eq!(cert.kind, ConstructionKind::UMinusUmu);
    assert_eq!(cert.stages.len(), 1);
    let t = cert.stages[0].triple;
    assert_eq!((t.u, t.v, t.w), (3, 4, 6));
    assert!(cert.mu_avoidance);
    let back = Certificate::from_json(&cert.to_json().unwrap()).unwrap();
    assert_eq!(back.to_json().unwrap(), cert.to_json().unwrap());
    let report = back.verify();
    assert!(report.passed, "{:?}", report.failures);
}

#[test]
fn single_stage_center_has_exact_cancellation() {
    let cert = one_stage_center();
    let rec = &cert.stages[0];
    assert_eq!(rec.corrective_degree, Some(rec.triple.w + 1));
    let zero = rec.inequalities.iter().find(|i| i.name.contains("= 0")).unwrap();
    assert!(zero.holds);
    assert!(cert.verify().passed);
}

#[test]
fn edited_record_values_are_rejected() {
    let cert = one_stage_universal();
    let mut json: serde_json::Value = serde_json::from_str(&cert.to_json().unwrap()).unwrap();
    json["stages"][0]["inequalities"][0]["value"] = serde_json::Value::String("0x0p+0".into());
    let edited = Certificate::from_json(&json.to_string()).unwrap();
    let report = edited.verify();
    assert!(!report.passed);
    assert_eq!(report.first_failing_stage, Some(1));
}

#[test]
fn loosened_budget_is_rejected() {
    let cert = one_stage_center();
    let mut json: serde_json::Value = serde_json::from_str(&cert.to_json().unwrap()).unwrap();
    json["stages"][0]["budget"] = serde_json::Value::String("100".into());
    let edited = Certificate::from_json(&json.to_string()).unwrap();
    assert!(!edited.verify().passed);
}

#[test]
fn coefficient_outside_the_recorded_window_is_rejected() {
    let cert = one_stage_universal();
    let mut json: serde_json::Value = serde_json::from_str(&cert.to_json().unwrap()).unwrap();
    let terms = json["series"]["blocks"][0].as_array_mut().unwrap();
    terms[0]["degree"] = serde_json::Value::from(2u64);
    let edited = Certificate::from_json(&json.to_string()).unwrap();
    assert!(!edited.verify().passed);
}

#[test]
fn builders_reject_bad_inputs() {
    let cfg = StageSolveConfig::default();
    let z0 = GaussRational::real(Rational::from(2));
    let t = |r| target(&[(0, 1)], 1.2, 1.3, r);
    // Too few usable windows in the prefix.
    let res = build_u_minus_umu(&[1, 2, 6], &[t((1, 2)), t((3, 5))], &z0, Mode::float(128), &cfg);
    assert!(matches!(res, Err(Error::Domain(_))));
    // Radii must increase.
    let res = build_u_minus_umu(&[1, 2, 6, 24, 120], &[t((3, 5)), t((1, 2))], &z0, Mode::float(128), &cfg);
    assert!(matches!(res, Err(Error::Domain(_))));
    // Probe point inside the disc.
    let inside = GaussRational::real(Rational::from((1, 2)));
    let res = build_u_minus_umu(&[1, 2, 6], &[t((1, 2))], &inside, Mode::float(128), &cfg);
    assert!(matches!(res, Err(Error::Domain(_))));
    // Center at the origin.
    let res = build_center_counterexample(&[1, 2, 6, 24], &Scalar::zero(Mode::Exact), &[t((1, 2))], Mode::Exact, &cfg);
    assert!(matches!(res, Err(Error::Domain(_))));
}

#[test]
fn real_builder_rejects_bad_targets() {
    assert!(RealStageTarget::new(poly(&[(0, 1), (2, 1)]), Rational::from(1)).is_err());
    assert!(RealStageTarget::new(poly(&[(2, 1)]), Rational::from(0)).is_err());
    let shrinking = [
        RealStageTarget::new(poly(&[(4, 1)]), Rational::from(2)).unwrap(),
        RealStageTarget::new(poly(&[(4, 1)]), Rational::from(1)).unwrap(),
    ];
    let res = build_real_counterexample(&[1, 2, 6, 24, 120], &shrinking, Mode::float(128), &StageSolveConfig::default());
    assert!(matches!(res, Err(Error::Domain(_))));
}

#[test]
fn zero_real_target_gives_zero_stream() {
    let zero = [RealStageTarget::new(SparsePolynomial::new(Mode::Exact), Rational::from(1)).unwrap()];
    let cert = build_real_counterexample(&[1, 2, 6], &zero, Mode::Exact, &StageSolveConfig::default()).unwrap();
    assert!(cert.series.is_zero());
    assert_eq!(cert.probe.max, "0x0p+0");
    assert!(cert.verify().passed);
}
