//! `approx`: window sweep of the minimax solver.

use clap::Args;
use ostrowski::series::{float_string, parse_rational, Mode, Scalar, SparsePolynomial};
use ostrowski::construction::TermSpec;
use ostrowski::window::{
    solve_window, theta_fit, ApproxRequest, ApproxResult, CompactSample, ComplexNum, Num, SampleSpec, SolverOptions,
    Target, ThetaEstimate, WindowSpec,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::io::{load, Output};
use crate::Global;

#[derive(Args, Debug)]
pub struct ApproxArgs {
    /// Window σ:τ (repeatable); replaces the config's windows.
    #[arg(long = "window", value_parser = parse_window)]
    pub windows: Vec<WindowSpec>,
    /// Disc radius r.
    #[arg(long)]
    pub r: Option<String>,
    /// Weight λ of the disc error.
    #[arg(long)]
    pub lambda: Option<String>,
}

fn parse_window(text: &str) -> Result<WindowSpec, String> {
    let (lo, hi) = text.split_once(':').ok_or_else(|| format!("expected σ:τ, got {text:?}"))?;
    let lo = lo.trim().parse().map_err(|e| format!("σ: {e}"))?;
    let hi = hi.trim().parse().map_err(|e| format!("τ: {e}"))?;
    WindowSpec::new(lo, hi).map_err(|e| e.to_string())
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum TargetSpec {
    Polynomial(Vec<TermSpec>),
    /// z^e; negative exponents give 1/z, 1/z², ….
    Power(i64),
    /// One value per point of K, in sampling order.
    Samples(Vec<ComplexNum>),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ApproxConfig {
    k: SampleSpec,
    target: TargetSpec,
    #[serde(default)]
    r: Option<Num>,
    #[serde(default)]
    windows: Vec<(u64, u64)>,
    #[serde(default)]
    lambda: Option<Num>,
    #[serde(default)]
    mode: Option<Mode>,
    #[serde(default)]
    options: Option<SolverOptions>,
}

#[derive(Serialize)]
struct Sweep<'a> {
    results: &'a [ApproxResult],
    windows: &'a [WindowSpec],
    #[serde(skip_serializing_if = "Option::is_none")]
    theta: Option<ThetaEstimate>,
}

fn target(spec: &TargetSpec, k: &CompactSample, file: &str) -> CliResult<Target> {
    let at = |e| CliError::at(file, "/target", e);
    Ok(match spec {
        TargetSpec::Polynomial(terms) => {
            let mut p = SparsePolynomial::new(Mode::Exact);
            for t in terms {
                p.add_term(t.degree, &Scalar::Exact(t.value.to_gauss().map_err(at)?)).map_err(at)?;
            }
            Target::Polynomial(p)
        }
        TargetSpec::Power(exponent) => {
            let values = k
                .points()
                .iter()
                .map(|z| {
                    let v = Scalar::Exact(z.clone()).pow(*exponent)?;
                    Ok(v.as_exact().cloned().expect("exact power of an exact point"))
                })
                .collect::<ostrowski::Result<Vec<_>>>()
                .map_err(at)?;
            Target::Samples(values)
        }
        TargetSpec::Samples(values) => {
            if values.len() != k.len() {
                return Err(CliError::Schema {
                    file: file.to_string(),
                    pointer: "/target/samples".into(),
                    message: format!("{} values for {} sample points", values.len(), k.len()),
                });
            }
            Target::Samples(values.iter().map(|v| v.to_gauss()).collect::<ostrowski::Result<_>>().map_err(at)?)
        }
    })
}

pub fn run(g: &Global, args: &ApproxArgs) -> CliResult<()> {
    let path = g.require_config("approx")?;
    let file = path.display().to_string();
    let cfg: ApproxConfig = load(path)?;
    let k = CompactSample::from_spec(&cfg.k).map_err(|e| CliError::at(&file, "/k", e))?;
    let target = target(&cfg.target, &k, &file)?;
    let r = match (&args.r, &cfg.r) {
        (Some(text), _) => parse_rational(text)?,
        (None, Some(n)) => n.to_rational().map_err(|e| CliError::at(&file, "/r", e))?,
        (None, None) => return Err(CliError::Usage("disc radius missing: give --r or \"r\" in the config".into())),
    };
    let lambda = match (&args.lambda, &cfg.lambda) {
        (Some(text), _) => Some(parse_rational(text)?),
        (None, Some(n)) => Some(n.to_rational().map_err(|e| CliError::at(&file, "/lambda", e))?),
        (None, None) => None,
    };
    let windows: Vec<WindowSpec> = if args.windows.is_empty() {
        cfg.windows
            .iter()
            .enumerate()
            .map(|(i, &(lo, hi))| WindowSpec::new(lo, hi).map_err(|e| CliError::at(&file, format!("/windows/{i}"), e)))
            .collect::<CliResult<_>>()?
    } else {
        args.windows.clone()
    };
    if windows.is_empty() {
        return Err(CliError::Usage("no windows: give --window σ:τ or \"windows\" in the config".into()));
    }
    let mut options = cfg.options.clone().unwrap_or_default();
    options.output = g.mode(cfg.mode, options.output)?;

    let mut results = Vec::new();
    for w in &windows {
        let mut req = ApproxRequest::new(target.clone(), k.clone(), r.clone(), *w);
        if let Some(l) = &lambda {
            req.lambda = l.clone();
        }
        req.options = options.clone();
        let res = solve_window(&req)?;
        println!(
            "window {}:{}  err_K {}  err_disc {}  {:?}",
            w.lo,
            w.hi,
            float_string(&res.err_k),
            float_string(&res.err_disc),
            res.status
        );
        results.push(res);
    }
    let theta = if results.len() >= 3 {
        let samples: Vec<_> = windows.iter().zip(&results).map(|(w, r)| (w.hi, r.err_k.clone().max(&r.err_disc))).collect();
        let t = theta_fit(&samples)?;
        match &t {
            ThetaEstimate::Fitted { theta, residual, .. } => println!("theta {theta:.6}  residual {residual:.6}"),
            ThetaEstimate::Exact => println!("theta: exact reproduction in some window"),
        }
        Some(t)
    } else {
        None
    };

    let out = Output::new(&g.out_dir())?;
    let rows: Vec<Vec<String>> = windows
        .iter()
        .zip(&results)
        .map(|(w, r)| {
            vec![
                w.lo.to_string(),
                w.hi.to_string(),
                float_string(&r.err_k),
                float_string(&r.err_disc),
                float_string(&r.objective),
                serde_json::to_value(r.status).map(|v| v.as_str().unwrap_or_default().to_string()).unwrap_or_default(),
                serde_json::to_value(r.method).map(|v| v.as_str().unwrap_or_default().to_string()).unwrap_or_default(),
                r.precision.to_string(),
                r.polynomial.len().to_string(),
            ]
        })
        .collect();
    out.csv(
        "approx.csv",
        &["lo", "hi", "err_k", "err_disc", "objective", "status", "method", "precision", "terms"],
        &rows,
    )?;
    out.json("approx.json", &Sweep { results: &results, windows: &windows, theta })?;
    Ok(())
}
