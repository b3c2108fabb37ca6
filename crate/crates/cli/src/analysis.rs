//! `gaps`, `ratios` and `probe`.

use std::path::{Path, PathBuf};

use clap::Args;
use ostrowski::construction::probe_partial_sums;
use ostrowski::gaps::{
    detect_gaps, gap_diagnostics, mu_ratio_profile, verify_center_transfer, verify_gap_transfer, GapStructure, MuSpec,
    Subsequence,
};
use ostrowski::series::{float_string, parse_rational, BlockSeries, Center, Mode, Scalar};
use ostrowski::window::{CompactSample, ComplexNum, Num, SampleSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::io::{load, parse_json, read_text, Output};
use crate::Global;

const DEFAULT_TAIL: usize = 2;

fn default_tail() -> usize {
    DEFAULT_TAIL
}

/// Reads a series file, or the series inside a certificate file. Relative paths
/// are resolved against the config's directory.
fn load_series(config: &Path, series: &Path) -> CliResult<BlockSeries> {
    let path = if series.is_absolute() {
        series.to_path_buf()
    } else {
        config.parent().unwrap_or(Path::new(".")).join(series)
    };
    let file = path.display().to_string();
    let mut value: serde_json::Value = parse_json(&read_text(&path)?, &file)?;
    if value.get("stages").is_some() {
        value = value["series"].take();
    }
    serde_path_to_error::deserialize(value).map_err(|e| CliError::Schema {
        file,
        pointer: crate::io::json_pointer(e.path()),
        message: e.inner().to_string(),
    })
}

fn subsequence(spec: &MuSpec, file: &str) -> CliResult<Subsequence> {
    Ok(spec.resolve().map_err(|e| CliError::at(file, "/mu", e))?.0)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GapsConfig {
    series: PathBuf,
    #[serde(default)]
    eta: Option<f64>,
    #[serde(default)]
    rho: Option<f64>,
    /// Explicit gaps; detection is skipped when present.
    #[serde(default)]
    gaps: Option<Vec<(u64, u64)>>,
    #[serde(default)]
    mu: Option<MuSpec>,
    #[serde(default)]
    k: Option<SampleSpec>,
    #[serde(default)]
    centers: Vec<ComplexNum>,
    #[serde(default = "default_tail")]
    tail: usize,
}

pub fn gaps(g: &Global) -> CliResult<()> {
    let path = g.require_config("gaps")?;
    let file = path.display().to_string();
    let cfg: GapsConfig = load(path)?;
    let f = load_series(path, &cfg.series)?;
    let mode = f.mode();
    let tol = g.tol(1e-4)?;
    let gaps = match &cfg.gaps {
        Some(pairs) => GapStructure::new(pairs.clone()).map_err(|e| CliError::at(&file, "/gaps", e))?,
        None => detect_gaps(&f, cfg.eta.unwrap_or(0.5), cfg.rho.unwrap_or(4.0))?,
    };
    let mu = cfg.mu.as_ref().map(|m| subsequence(m, &file)).transpose()?;
    let k = match &cfg.k {
        Some(spec) => Some(CompactSample::from_spec(spec).map_err(|e| CliError::at(&file, "/k", e))?.scalars(mode)),
        None => None,
    };
    let out = Output::new(&g.out_dir())?;

    let diagnostics = gap_diagnostics(&f, &gaps);
    let ratios = gaps.ratios();
    let rows: Vec<Vec<String>> = diagnostics
        .iter()
        .zip(&ratios)
        .enumerate()
        .map(|(i, (d, r))| {
            let hit = mu.as_ref().and_then(|m| m.hit_gap((d.p, d.q)));
            vec![
                (i + 1).to_string(),
                d.p.to_string(),
                d.q.to_string(),
                r.as_ref().map_or(String::new(), |r| format!("{:.6}", r.to_f64())),
                format!("{:e}", d.max_root),
                hit.map_or(String::new(), |h| h.to_string()),
            ]
        })
        .collect();
    out.csv("gaps.csv", &["m", "p", "q", "ratio", "max_root", "hit"], &rows)?;
    println!("{} gaps", gaps.len());

    let transfer = match (&mu, &k) {
        (Some(mu), Some(k)) => Some(verify_gap_transfer(&f, &gaps, mu, k, tol, cfg.tail)?),
        _ => None,
    };
    if let Some(rep) = &transfer {
        let rows: Vec<Vec<String>> = rep
            .stages
            .iter()
            .filter_map(|s| {
                let sup = s.sup.as_ref()?;
                Some(vec![s.m.to_string(), "sup |S_mu - S_p|".into(), float_string(sup), format!("{tol:e}"), (*sup < tol).to_string()])
            })
            .collect();
        out.csv("transfer.csv", &["stage", "quantity", "value", "bound", "pass"], &rows)?;
        println!("gap transfer trend: {}", if rep.passed { "pass" } else { "fail" });
    }

    let centers = cfg
        .centers
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let at = |e| CliError::at(&file, format!("/centers/{i}"), e);
            Center::new(Scalar::from_gauss(&c.to_gauss().map_err(at)?, mode)).map_err(at)
        })
        .collect::<CliResult<Vec<_>>>()?;
    let center = match (&k, centers.is_empty()) {
        (Some(k), false) => Some(verify_center_transfer(&f, &gaps, &centers, k, tol, cfg.tail)?),
        _ => None,
    };
    if let Some(rep) = &center {
        let rows: Vec<Vec<String>> = rep
            .stages
            .iter()
            .map(|s| {
                vec![
                    s.m.to_string(),
                    s.p.to_string(),
                    s.q.to_string(),
                    float_string(&s.split.a1),
                    float_string(&s.split.a2),
                    float_string(&s.split.total),
                ]
            })
            .collect();
        out.csv("center.csv", &["stage", "p", "q", "a1", "a2", "d"], &rows)?;
        println!("center transfer trend: {}", if rep.passed { "pass" } else { "fail" });
    }

    #[derive(Serialize)]
    struct Report<'a> {
        gaps: &'a GapStructure,
        diagnostics: &'a [ostrowski::gaps::GapDiagnostic],
        #[serde(skip_serializing_if = "Option::is_none")]
        transfer: Option<&'a ostrowski::gaps::GapTransferReport>,
        #[serde(skip_serializing_if = "Option::is_none")]
        center: Option<&'a ostrowski::gaps::CenterTransferReport>,
    }
    out.json("gaps.json", &Report { gaps: &gaps, diagnostics: &diagnostics, transfer: transfer.as_ref(), center: center.as_ref() })?;
    Ok(())
}

#[derive(Args, Debug)]
pub struct RatioArgs {
    /// Generator name (squares, powers-of-2, factorials, primes) or a comma-separated list.
    #[arg(long)]
    pub mu: Option<String>,
    /// Number of terms.
    #[arg(long)]
    pub n: Option<usize>,
    /// Claimed upper bound for the ratios.
    #[arg(long)]
    pub bound: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RatiosConfig {
    #[serde(default)]
    mu: Option<MuSpec>,
    #[serde(default)]
    n: Option<usize>,
    #[serde(default)]
    bound: Option<Num>,
    #[serde(default)]
    ladder: Option<Vec<usize>>,
}

fn mu_from_flag(text: &str) -> MuSpec {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    match parts.iter().map(|p| p.parse::<u64>()).collect::<Result<Vec<_>, _>>() {
        Ok(values) => MuSpec::List(values),
        Err(_) => MuSpec::Named(text.trim().to_string()),
    }
}

pub fn ratios(g: &Global, args: &RatioArgs) -> CliResult<()> {
    let (cfg, file) = match &g.config {
        Some(p) => (load::<RatiosConfig>(p)?, p.display().to_string()),
        None => (RatiosConfig::default(), "command line".to_string()),
    };
    let spec = match (&args.mu, &cfg.mu) {
        (Some(text), _) => mu_from_flag(text),
        (None, Some(m)) => m.clone(),
        (None, None) => return Err(CliError::Usage("`ratios` needs --mu or \"mu\" in the config".into())),
    };
    let (mu, fixed) = spec.resolve()?;
    let n = args.n.or(cfg.n).or(fixed).ok_or_else(|| CliError::Usage("`ratios` needs --n".into()))?;
    let bound = match (&args.bound, &cfg.bound) {
        (Some(text), _) => Some(parse_rational(text)?),
        (None, Some(b)) => Some(b.to_rational().map_err(|e| CliError::at(&file, "/bound", e))?),
        (None, None) => None,
    };
    let profile = mu_ratio_profile(&mu, n, bound.as_ref(), cfg.ladder.as_deref())?;
    let rows: Vec<Vec<String>> = profile
        .ratios
        .iter()
        .enumerate()
        .map(|(i, r)| {
            vec![
                (i + 2).to_string(),
                profile.terms[i].to_string(),
                profile.terms[i + 1].to_string(),
                r.to_string(),
                format!("{}", r.to_f64()),
            ]
        })
        .collect();
    let out = Output::new(&g.out_dir())?;
    out.csv("ratios.csv", &["n", "mu_prev", "mu_n", "ratio", "ratio_decimal"], &rows)?;

    #[derive(Serialize)]
    struct Report {
        mu: String,
        terms: Vec<u64>,
        ratios: Vec<String>,
        ladder: Vec<(usize, String)>,
        classification: String,
    }
    let classification = profile.classification.to_string();
    out.json(
        "ratios.json",
        &Report {
            mu: mu.name(),
            terms: profile.terms.clone(),
            ratios: profile.ratios.iter().map(|r| r.to_string()).collect(),
            ladder: profile.ladder.iter().map(|(c, r)| (*c, r.to_string())).collect(),
            classification: classification.clone(),
        },
    )?;
    println!("classification: {classification}");
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProbeConfig {
    series: PathBuf,
    mu: MuSpec,
    z0: ComplexNum,
    #[serde(default)]
    zeta: Option<ComplexNum>,
    #[serde(default)]
    horizon: Option<u64>,
    #[serde(default = "default_tail")]
    tail: usize,
}

pub fn probe(g: &Global) -> CliResult<()> {
    let path = g.require_config("probe")?;
    let file = path.display().to_string();
    let cfg: ProbeConfig = load(path)?;
    let f = load_series(path, &cfg.series)?;
    let mode = f.mode();
    let mu = subsequence(&cfg.mu, &file)?;
    let z0 = Scalar::from_gauss(&cfg.z0.to_gauss().map_err(|e| CliError::at(&file, "/z0", e))?, mode);
    let center = match &cfg.zeta {
        Some(z) => {
            let at = |e| CliError::at(&file, "/zeta", e);
            Center::new(Scalar::from_gauss(&z.to_gauss().map_err(at)?, mode)).map_err(at)?
        }
        None => Center::origin(mode),
    };
    let horizon = cfg.horizon.or(f.horizon()).unwrap_or(0);
    let tol = g.tol(0.1)?;
    let rep = probe_partial_sums(&f, &mu, &center, &z0, horizon, cfg.tail, tol)?;
    let prec = match mode {
        Mode::Float { precision } => precision,
        Mode::Exact => 256,
    };
    let rows: Vec<Vec<String>> = rep
        .values
        .iter()
        .map(|v| {
            let c = v.value.to_complex(prec);
            vec![v.n.to_string(), v.mu.to_string(), float_string(c.real()), float_string(c.imag()), float_string(&v.modulus)]
        })
        .collect();
    let out = Output::new(&g.out_dir())?;
    out.csv("probe.csv", &["n", "mu", "re", "im", "modulus"], &rows)?;

    #[derive(Serialize)]
    struct Report {
        horizon: u64,
        points: usize,
        tail: usize,
        tol: f64,
        decaying: bool,
    }
    out.json("probe.json", &Report { horizon, points: rep.values.len(), tail: cfg.tail, tol, decaying: rep.decaying })?;
    println!("{} partial sums up to {horizon}; decaying: {}", rep.values.len(), rep.decaying);
    Ok(())
}
