//! Builders (`construct`, `center`, `real`) and certificate re-verification (`verify`).

use std::path::PathBuf;

use clap::Args;
use ostrowski::construction::{
    build_center_counterexample, build_u_minus_umu, Certificate, StageSolveConfig, StageTarget, StageTargetSpec,
    TermSpec, VerifyReport,
};
use ostrowski::gaps::MuSpec;
use ostrowski::real::{build_real_counterexample, RealStageTarget};
use ostrowski::series::{float_string, parse_hex_float, Mode, Scalar, SparsePolynomial};
use ostrowski::window::{ComplexNum, Num};
use serde::Deserialize;

use crate::error::{CliError, CliResult};
use crate::io::{load, parse_json, read_text, Output};
use crate::Global;

/// Terms taken from a named μ generator when the config does not fix a count.
const DEFAULT_MU_TERMS: usize = 12;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstructConfig {
    mu: MuSpec,
    z0: ComplexNum,
    targets: Vec<StageTargetSpec>,
    #[serde(default)]
    mode: Option<Mode>,
    #[serde(default)]
    solver: Option<StageSolveConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CenterConfig {
    mu: MuSpec,
    zeta: ComplexNum,
    targets: Vec<StageTargetSpec>,
    #[serde(default)]
    mode: Option<Mode>,
    #[serde(default)]
    solver: Option<StageSolveConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RealTargetSpec {
    f: Vec<TermSpec>,
    a: Num,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RealConfig {
    mu: MuSpec,
    targets: Vec<RealTargetSpec>,
    #[serde(default)]
    mode: Option<Mode>,
    #[serde(default)]
    solver: Option<StageSolveConfig>,
}

fn mu_prefix(spec: &MuSpec, file: &str) -> CliResult<Vec<u64>> {
    let seq = spec.prefix(DEFAULT_MU_TERMS).map_err(|e| CliError::at(file, "/mu", e))?;
    seq.prefix(seq.iter().count()).map_err(|e| CliError::at(file, "/mu", e))
}

fn stage_targets(specs: &[StageTargetSpec], file: &str) -> CliResult<Vec<StageTarget>> {
    specs
        .iter()
        .enumerate()
        .map(|(i, s)| StageTarget::from_spec(s).map_err(|e| CliError::at(file, format!("/targets/{i}"), e)))
        .collect()
}

fn polynomial(terms: &[TermSpec]) -> ostrowski::Result<SparsePolynomial> {
    let mut p = SparsePolynomial::new(Mode::Exact);
    for t in terms {
        p.add_term(t.degree, &Scalar::Exact(t.value.to_gauss()?))?;
    }
    Ok(p)
}

pub fn construct(g: &Global) -> CliResult<()> {
    let path = g.require_config("construct")?;
    let file = path.display().to_string();
    let cfg: ConstructConfig = load(path)?;
    let mu = mu_prefix(&cfg.mu, &file)?;
    let targets = stage_targets(&cfg.targets, &file)?;
    let z0 = cfg.z0.to_gauss().map_err(|e| CliError::at(&file, "/z0", e))?;
    let mode = g.mode(cfg.mode, Mode::float(256))?;
    let cert = build_u_minus_umu(&mu, &targets, &z0, mode, &cfg.solver.unwrap_or_default())?;
    finish(g, &cert)
}

pub fn center(g: &Global) -> CliResult<()> {
    let path = g.require_config("center")?;
    let file = path.display().to_string();
    let cfg: CenterConfig = load(path)?;
    let mu = mu_prefix(&cfg.mu, &file)?;
    let targets = stage_targets(&cfg.targets, &file)?;
    let mode = g.mode(cfg.mode, Mode::Exact)?;
    let zeta = cfg.zeta.to_gauss().map_err(|e| CliError::at(&file, "/zeta", e))?;
    let cert = build_center_counterexample(&mu, &Scalar::from_gauss(&zeta, mode), &targets, mode, &cfg.solver.unwrap_or_default())?;
    finish(g, &cert)
}

pub fn real(g: &Global) -> CliResult<()> {
    let path = g.require_config("real")?;
    let file = path.display().to_string();
    let cfg: RealConfig = load(path)?;
    let mu = mu_prefix(&cfg.mu, &file)?;
    let targets = cfg
        .targets
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let at = |e| CliError::at(&file, format!("/targets/{i}"), e);
            RealStageTarget::new(polynomial(&t.f).map_err(at)?, t.a.to_rational().map_err(at)?).map_err(at)
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mode = g.mode(cfg.mode, Mode::float(256))?;
    let cert = build_real_counterexample(&mu, &targets, mode, &cfg.solver.unwrap_or_default())?;
    finish(g, &cert)
}

fn relation_text<T: serde::Serialize>(r: &T) -> String {
    serde_json::to_value(r).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

fn decimal(hex: &str) -> String {
    parse_hex_float(hex, 256).map(|x| float_string(&x)).unwrap_or_else(|_| hex.to_string())
}

/// Writes the artifacts, then re-reads the certificate from disk and verifies it.
fn finish(g: &Global, cert: &Certificate) -> CliResult<()> {
    let out = Output::new(&g.out_dir())?;
    out.json("series.json", &cert.series)?;
    let cert_path = out.json("certificate.json", cert)?;
    let probe_rows: Vec<Vec<String>> = cert
        .probe
        .entries
        .iter()
        .map(|e| vec![e.n.to_string(), e.mu.to_string(), e.stage.to_string(), decimal(&e.value), e.value.clone()])
        .collect();
    out.csv("probe.csv", &["n", "mu", "stage", "modulus", "modulus_hex"], &probe_rows)?;
    let mut stage_rows: Vec<Vec<String>> = Vec::new();
    for rec in &cert.stages {
        for ineq in &rec.inequalities {
            stage_rows.push(vec![
                rec.stage.to_string(),
                ineq.name.clone(),
                decimal(&ineq.value),
                relation_text(&ineq.relation),
                decimal(&ineq.bound),
                ineq.holds.to_string(),
            ]);
        }
    }
    stage_rows.push(vec![
        "probe".into(),
        "max |S_mu_n(z0)|".into(),
        decimal(&cert.probe.max),
        "<=".into(),
        cert.probe.bound.as_deref().map(decimal).unwrap_or_default(),
        cert.probe.holds.to_string(),
    ]);
    out.csv("stages.csv", &["stage", "quantity", "value", "relation", "bound", "pass"], &stage_rows)?;

    for s in &cert.skipped {
        println!("skipped index {}: {}", s.index, s.reason);
    }
    println!(
        "{} stages, horizon {}, probe max {}{}",
        cert.stages.len(),
        cert.series.horizon().map_or("-".to_string(), |h| h.to_string()),
        decimal(&cert.probe.max),
        cert.probe.bound.as_deref().map(|b| format!(" (bound {})", decimal(b))).unwrap_or_default()
    );
    let reread: Certificate = parse_json(&read_text(&cert_path)?, &cert_path.display().to_string())?;
    report(&reread.verify())
}

fn report(r: &VerifyReport) -> CliResult<()> {
    if r.passed {
        println!("certificate: PASS");
        return Ok(());
    }
    println!("certificate: FAIL");
    for f in &r.failures {
        eprintln!("  {f}");
    }
    Err(CliError::Certificate {
        location: r.first_failing_stage.map_or("certificate level".to_string(), |s| format!("stage {s}")),
        message: r.failures.first().cloned().unwrap_or_default(),
    })
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Certificate JSON (defaults to --config).
    pub certificate: Option<PathBuf>,
}

pub fn verify(g: &Global, args: &VerifyArgs) -> CliResult<()> {
    let path = match (&args.certificate, &g.config) {
        (Some(p), _) | (None, Some(p)) => p,
        (None, None) => return Err(CliError::Usage("`verify` needs a certificate path".into())),
    };
    let cert: Certificate = load(path)?;
    let r = cert.verify();
    if let Some(dir) = &g.out {
        Output::new(dir)?.json("verify.json", &r)?;
    }
    report(&r)
}
