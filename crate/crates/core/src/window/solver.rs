//! Best approximation on K by polynomials with degrees in a window, penalized
//! by the size of the polynomial on a disc.
//!
//! Minimizes `max(sup_K |P − h|, λ·sup_{|z|=r} |P|)` over polynomials with
//! support in `[lo, hi]`. The complex modulus is replaced by the maximum over
//! `M = 2^order` directions, turning the problem into a linear program.

use std::collections::HashMap;

use rayon::prelude::*;
use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float, Rational};
use serde::{Deserialize, Serialize};

use super::lawson::{lawson, Component, LawsonOptions};
use super::lp::{solve_minimax, LpOptions, LpStatus};
use super::sample::{disc_grid, CompactSample, DEFAULT_DISC_POINTS};
use crate::error::{Error, Result};
use crate::series::{GaussRational, Mode, Scalar, SparsePolynomial};

/// Hard ceiling on the working precision.
pub const MAX_PRECISION: u32 = 8192;

/// Inclusive degree window `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub lo: u64,
    pub hi: u64,
}

impl WindowSpec {
    pub fn new(lo: u64, hi: u64) -> Result<Self> {
        if lo > hi {
            return Err(Error::domain(format!("empty window [{lo}, {hi}]")));
        }
        Ok(WindowSpec { lo, hi })
    }

    pub fn len(&self) -> u64 {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Function to approximate on K.
#[derive(Clone, Debug)]
pub enum Target {
    Polynomial(SparsePolynomial),
    /// Values at the points of K, in order.
    Samples(Vec<GaussRational>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// The modulus is linearized with a regular `2^polygon_order`-gon.
    pub polygon_order: u32,
    /// Overrides the adaptive working precision.
    pub precision: Option<u32>,
    /// Mode of the returned coefficients and of the reported errors.
    pub output: Mode,
    pub window_cap: u64,
    /// Largest LP size (rows × columns) before switching to Lawson iteration.
    pub lp_budget: usize,
    pub lp_max_iterations: usize,
    pub lawson_iterations: usize,
    /// `Some(false)` forces complex coefficients; otherwise real coefficients are
    /// used when K and the target are symmetric under conjugation.
    pub real_coefficients: Option<bool>,
    /// Number of grid points on |z| = r; zero drops the disc constraint.
    pub disc_points: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            polygon_order: 3,
            precision: None,
            output: Mode::float(256),
            window_cap: 1024,
            lp_budget: 4_000_000,
            lp_max_iterations: 20_000,
            lawson_iterations: 300,
            real_coefficients: None,
            disc_points: DEFAULT_DISC_POINTS,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ApproxRequest {
    pub target: Target,
    pub k: CompactSample,
    pub r: Rational,
    pub window: WindowSpec,
    pub lambda: Rational,
    pub options: SolverOptions,
}

impl ApproxRequest {
    pub fn new(target: Target, k: CompactSample, r: Rational, window: WindowSpec) -> Self {
        ApproxRequest { target, k, r, window, lambda: Rational::from(1), options: SolverOptions::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    IllConditioned,
    IterationLimit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    ZeroTarget,
    Simplex,
    Lawson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ApproxResult {
    pub polynomial: SparsePolynomial,
    /// `max_K |P − h|`, evaluated in the output mode.
    #[serde(with = "crate::float_serde")]
    pub err_k: Float,
    /// `max |P|` over the disc-boundary grid, evaluated in the output mode.
    #[serde(with = "crate::float_serde")]
    pub err_disc: Float,
    /// `max(err_k, λ·err_disc)`.
    #[serde(with = "crate::float_serde")]
    pub objective: Float,
    /// Optimal value of the linearized program, if the simplex was used.
    #[serde(with = "crate::float_serde::option", default)]
    pub lp_value: Option<Float>,
    pub status: SolveStatus,
    pub method: SolveMethod,
    pub precision: u32,
    pub iterations: usize,
    pub real_coefficients: bool,
}

/// Adaptive working precision for a window solve.
pub fn working_precision(k: &CompactSample, window: WindowSpec, output: Mode) -> u32 {
    let out = match output {
        Mode::Exact => 128,
        Mode::Float { precision } => precision.max(128),
    };
    let spread = (k.max_modulus(64) / k.min_modulus_outside_disc(64)).to_f64().log2().max(0.0);
    let extra = (window.hi as f64 * spread).ceil() as u64 + 6 * window.len();
    (out as u64 + 64 + extra).min(MAX_PRECISION as u64) as u32
}

struct PreparedPoint {
    z: Complex,
    h: Complex,
    weight: Float,
    real_only: bool,
}

fn target_values(req: &ApproxRequest, prec: u32) -> Result<Vec<Complex>> {
    match &req.target {
        Target::Polynomial(p) => {
            let pf = p.to_mode(Mode::float(prec))?;
            let pts = req.k.scalars(Mode::float(prec));
            Ok(pf.eval_many(&pts)?.iter().map(|v| v.to_complex(prec)).collect())
        }
        Target::Samples(v) => {
            if v.len() != req.k.len() {
                return Err(Error::domain(format!(
                    "{} target samples for {} points of K",
                    v.len(),
                    req.k.len()
                )));
            }
            Ok(v.iter().map(|q| q.to_complex(prec)).collect())
        }
    }
}

fn target_is_zero(t: &Target) -> bool {
    match t {
        Target::Polynomial(p) => p.is_empty(),
        Target::Samples(v) => v.iter().all(|q| q.re == 0 && q.im == 0),
    }
}

fn target_is_conjugation_symmetric(req: &ApproxRequest) -> bool {
    match &req.target {
        Target::Polynomial(p) => p.is_real(),
        Target::Samples(v) => {
            let map: HashMap<&GaussRational, &GaussRational> = req.k.points().iter().zip(v).collect();
            req.k.points().iter().zip(v).all(|(z, h)| map.get(&z.conj()).is_some_and(|hc| **hc == h.conj()))
        }
    }
}

/// Solves one window problem.
pub fn solve_window(req: &ApproxRequest) -> Result<ApproxResult> {
    let opts = &req.options;
    let window = req.window;
    if window.lo > window.hi {
        return Err(Error::domain("empty window"));
    }
    if window.len() > opts.window_cap {
        return Err(Error::WindowTooLarge { size: window.len(), cap: opts.window_cap });
    }
    if req.r <= 0 || req.r >= 1 {
        return Err(Error::domain("disc radius must lie in (0, 1)"));
    }
    if req.lambda <= 0 {
        return Err(Error::domain("disc weight must be positive"));
    }
    if opts.polygon_order == 0 || opts.polygon_order > 12 {
        return Err(Error::domain("polygon order must lie in 1..=12"));
    }
    let real = match opts.real_coefficients {
        Some(false) => false,
        _ => req.k.is_conjugation_closed() && target_is_conjugation_symmetric(req),
    };
    if opts.real_coefficients == Some(true) && !real {
        return Err(Error::domain("real coefficients requested for a non-symmetric problem"));
    }
    let disc = if opts.disc_points == 0 { Vec::new() } else { disc_grid(&req.r, opts.disc_points) };

    if target_is_zero(&req.target) {
        let polynomial = SparsePolynomial::new(opts.output);
        let zero = Float::new(opts.output.working_precision());
        return Ok(ApproxResult {
            polynomial,
            err_k: zero.clone(),
            err_disc: zero.clone(),
            objective: zero,
            lp_value: None,
            status: SolveStatus::Optimal,
            method: SolveMethod::ZeroTarget,
            precision: 0,
            iterations: 0,
            real_coefficients: real,
        });
    }

    let prec = opts.precision.unwrap_or_else(|| working_precision(&req.k, window, opts.output));
    let h = target_values(req, prec)?;
    let s = req.k.max_modulus(prec);
    let lambda = Float::with_val(prec, &req.lambda);
    let one = Float::with_val(prec, 1);

    let mut points: Vec<PreparedPoint> = Vec::new();
    for (q, hv) in req.k.points().iter().zip(h) {
        if real && q.im < 0 {
            continue;
        }
        let real_only = real && q.is_real();
        points.push(PreparedPoint { z: q.to_complex(prec), h: hv, weight: one.clone(), real_only });
    }
    for q in &disc {
        if real && q.im < 0 {
            continue;
        }
        points.push(PreparedPoint {
            z: q.to_complex(prec),
            h: Complex::new(prec),
            weight: lambda.clone(),
            real_only: real && q.is_real(),
        });
    }

    let n_terms = window.len() as usize;
    let n_var = if real { n_terms } else { 2 * n_terms };
    let dirs = 1usize << opts.polygon_order;
    let n_rows: usize = points.iter().map(|p| if p.real_only { 2 } else { dirs }).sum();
    let use_lp = n_rows.saturating_mul(n_var + 1) <= opts.lp_budget;

    // Scaled monomial values w_k = (z/s)^k, weighted.
    let columns: Vec<Vec<Complex>> = points
        .par_iter()
        .map(|p| {
            let w = Complex::with_val(prec, &p.z / &s);
            let mut pw = w.clone().pow(window.lo as u32) * &p.weight;
            let mut col = Vec::with_capacity(n_terms);
            for _ in 0..n_terms {
                col.push(pw.clone());
                pw *= &w;
            }
            col
        })
        .collect();

    let pi = Float::with_val(prec, Constant::Pi);
    let angles: Vec<(Float, Float)> = (0..dirs)
        .map(|m| {
            let th = Float::with_val(prec, &pi * (2 * m) as u32) / dirs as u32;
            (Float::with_val(prec, th.cos_ref()), Float::with_val(prec, th.sin_ref()))
        })
        .collect();

    let (x, lp_value, status, method, iterations) = if use_lp {
        let (rows, b): (Vec<Vec<Float>>, Vec<Float>) = points
            .par_iter()
            .zip(columns.par_iter())
            .flat_map_iter(|(p, col)| {
                let hb = Complex::with_val(prec, &p.h * &p.weight);
                let dir_list: Vec<(Float, Float)> = if p.real_only {
                    vec![(one.clone(), Float::new(prec)), (Float::with_val(prec, -&one), Float::new(prec))]
                } else {
                    angles.clone()
                };
                dir_list
                    .into_iter()
                    .map(|(c, sn)| {
                        let mut row = Vec::with_capacity(n_var);
                        for v in col {
                            let (al, be) = (v.real(), v.imag());
                            let xc = Float::with_val(prec, al * &c) + Float::with_val(prec, be * &sn);
                            row.push(xc);
                            if !real {
                                let yc = Float::with_val(prec, al * &sn) - Float::with_val(prec, be * &c);
                                row.push(yc);
                            }
                        }
                        let bv = Float::with_val(prec, hb.real() * &c) + Float::with_val(prec, hb.imag() * &sn);
                        (row, bv)
                    })
                    .collect::<Vec<_>>()
            })
            .unzip();
        let mut lp_opts = LpOptions::new(prec);
        lp_opts.max_iterations = opts.lp_max_iterations;
        let sol = solve_minimax(&rows, &b, &lp_opts)?;
        let status = match sol.status {
            LpStatus::Optimal => SolveStatus::Optimal,
            LpStatus::IterationLimit => SolveStatus::IterationLimit,
        };
        (sol.x, Some(sol.t), status, SolveMethod::Simplex, sol.iterations)
    } else {
        let groups: Vec<Vec<Component>> = points
            .par_iter()
            .zip(columns.par_iter())
            .map(|(p, col)| {
                let hb = Complex::with_val(prec, &p.h * &p.weight);
                let mut re_row = Vec::with_capacity(n_var);
                let mut im_row = Vec::with_capacity(n_var);
                for v in col {
                    re_row.push(v.real().clone());
                    im_row.push(v.imag().clone());
                    if !real {
                        im_row.push(v.real().clone());
                        re_row.push(Float::with_val(prec, -v.imag()));
                    }
                }
                let mut g = vec![(re_row, hb.real().clone())];
                if !p.real_only {
                    g.push((im_row, hb.imag().clone()));
                }
                g
            })
            .collect();
        let sol = lawson(&groups, &LawsonOptions { precision: prec, iterations: opts.lawson_iterations })?;
        let status = if sol.ill_conditioned { SolveStatus::IllConditioned } else { SolveStatus::Optimal };
        (sol.x, None, status, SolveMethod::Lawson, sol.iterations)
    };

    // Undo the scaling: c_k = x_k / s^k.
    let work = Mode::float(prec);
    let mut scaled = SparsePolynomial::new(work);
    let mut sk = s.clone().pow(window.lo as u32);
    for i in 0..n_terms {
        let (re, im) = if real {
            (x[i].clone(), Float::new(prec))
        } else {
            (x[2 * i].clone(), x[2 * i + 1].clone())
        };
        let c = Complex::with_val(prec, (re / &sk, im / &sk));
        scaled.set(window.lo + i as u64, Scalar::Float(crate::series::BigComplex(c)))?;
        sk *= &s;
    }
    let mut polynomial = scaled.to_mode(opts.output)?;
    let (mut err_k, mut err_disc) = evaluate_errors(&polynomial, &req.target, &req.k, &disc)?;
    if opts.output == Mode::Exact {
        let snapped = snap_coefficients(&polynomial, prec / 3)?;
        let (sk, sd) = evaluate_errors(&snapped, &req.target, &req.k, &disc)?;
        if sk <= err_k && sd <= err_disc {
            (polynomial, err_k, err_disc) = (snapped, sk, sd);
        }
    }
    let lam_disc = Float::with_val(err_disc.prec(), &err_disc * &req.lambda);
    let objective = Float::with_val(err_k.prec(), err_k.max_ref(&lam_disc));
    Ok(ApproxResult {
        polynomial,
        err_k,
        err_disc,
        objective,
        lp_value,
        status,
        method,
        precision: prec,
        iterations,
        real_coefficients: real,
    })
}

/// Simplest rational in the closed interval `[a, b]`.
fn simplest_between(a: &Rational, b: &Rational) -> Rational {
    if *b < 0 {
        return -simplest_between(&Rational::from(-b), &Rational::from(-a));
    }
    if *a <= 0 {
        return Rational::new();
    }
    let fl = Rational::from(a.floor_ref());
    if fl == *a {
        return fl;
    }
    let next = Rational::from(&fl + 1u32);
    if next <= *b {
        return next;
    }
    let inner = simplest_between(&Rational::from(b - &fl).recip(), &Rational::from(a - &fl).recip());
    fl + inner.recip()
}

/// Replaces each exact coefficient by the simplest rational within `2^{-bits}·max(1, |c|)`.
fn snap_coefficients(p: &SparsePolynomial, bits: u32) -> Result<SparsePolynomial> {
    let snap = |q: &Rational| {
        let scale = if q.clone().abs() > 1 { q.clone().abs() } else { Rational::from(1) };
        let delta = scale / (Rational::from(1) << bits);
        simplest_between(&Rational::from(q - &delta), &Rational::from(q + &delta))
    };
    let mut out = SparsePolynomial::new(Mode::Exact);
    for (k, c) in p.iter() {
        let g = c.as_exact().expect("exact polynomial");
        out.set(k, Scalar::Exact(GaussRational::new(snap(&g.re), snap(&g.im))))?;
    }
    Ok(out)
}

/// `(max_K |P − h|, max_disc |P|)` evaluated in the mode of `p`.
pub fn evaluate_errors(
    p: &SparsePolynomial,
    target: &Target,
    k: &CompactSample,
    disc: &[GaussRational],
) -> Result<(Float, Float)> {
    let mode = p.mode();
    let pts = k.scalars(mode);
    let values = p.eval_many(&pts)?;
    let targets: Vec<Scalar> = match target {
        Target::Polynomial(t) => t.to_mode(mode)?.eval_many(&pts)?,
        Target::Samples(v) => v.iter().map(|q| Scalar::from_gauss(q, mode)).collect(),
    };
    let prec = mode.working_precision();
    let err_k = values
        .par_iter()
        .zip(targets.par_iter())
        .map(|(a, b)| a.checked_sub(b).map(|d| d.modulus()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(Float::new(prec), |acc, e| acc.max(&e));
    let dpts: Vec<Scalar> = disc.iter().map(|q| Scalar::from_gauss(q, mode)).collect();
    let err_disc = p.sup_modulus(&dpts)?;
    Ok((err_k, err_disc))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplest_rationals() {
        let q = |n: i64, d: i64| Rational::from((n, d));
        assert_eq!(simplest_between(&q(1, 2), &q(3, 5)), q(1, 2));
        assert_eq!(simplest_between(&q(11, 20), &q(3, 5)), q(3, 5));
        assert_eq!(simplest_between(&q(-3, 5), &q(-11, 20)), q(-3, 5));
        assert_eq!(simplest_between(&q(-1, 7), &q(1, 9)), q(0, 1));
        let third = q(1, 3);
        let eps = q(1, 1_000_000_000);
        assert_eq!(simplest_between(&Rational::from(&third - &eps), &Rational::from(&third + &eps)), third);
    }
    use crate::window::sample::SampleSpec;

    fn point_sample(x: i64) -> CompactSample {
        CompactSample::new("K", vec![GaussRational::real(x)], true).unwrap()
    }

    #[test]
    fn zero_target_returns_zero_polynomial() {
        let req = ApproxRequest::new(
            Target::Polynomial(SparsePolynomial::new(Mode::Exact)),
            point_sample(2),
            Rational::from((1, 2)),
            WindowSpec::new(3, 9).unwrap(),
        );
        let res = solve_window(&req).unwrap();
        assert!(res.polynomial.is_empty());
        assert_eq!(res.method, SolveMethod::ZeroTarget);
        assert!(res.objective.is_zero());
    }

    /// K = {2}, P = c·z, r = 1/2, h = 2: minimize max(|2c − 2|, |c|/2) over c,
    /// scanned on a fine grid; the optimum is c = 4/5 with value 2/5.
    #[test]
    fn single_point_single_term_matches_scan() {
        let h = SparsePolynomial::monomial(0, Scalar::from_int(2, Mode::Exact));
        let req = ApproxRequest::new(
            Target::Polynomial(h),
            point_sample(2),
            Rational::from((1, 2)),
            WindowSpec::new(1, 1).unwrap(),
        );
        let res = solve_window(&req).unwrap();
        assert!(res.real_coefficients);
        let c = res.polynomial.coefficient(1).to_f64_pair().0;
        let scan = (0..=200_000)
            .map(|i| {
                let c = i as f64 / 100_000.0;
                (c, f64::max((2.0 * c - 2.0).abs(), c.abs() / 2.0))
            })
            .fold((0.0, f64::INFINITY), |best, v| if v.1 < best.1 { v } else { best });
        assert!((c - scan.0).abs() < 1e-4, "{c} vs {}", scan.0);
        assert!((res.objective.to_f64() - scan.1).abs() < 1e-4);
        assert!((c - 0.8).abs() < 1e-30);
        assert!((res.objective.to_f64() - 0.4).abs() < 1e-30);
    }

    #[test]
    fn complex_coefficients_for_non_symmetric_sets() {
        let k = CompactSample::new("K", vec![GaussRational::new(0, 2)], true).unwrap();
        let h = SparsePolynomial::monomial(0, Scalar::from_int(1, Mode::Exact));
        let req = ApproxRequest::new(Target::Polynomial(h), k, Rational::from((1, 4)), WindowSpec::new(1, 2).unwrap());
        let res = solve_window(&req).unwrap();
        assert!(!res.real_coefficients);
        // (2i)^1 c = 1 needs c = -i/2, so the coefficient of z is imaginary.
        assert!(res.err_k.to_f64() < 0.2, "{}", res.err_k);
    }

    #[test]
    fn error_decreases_along_growing_windows() {
        let k = CompactSample::from_spec(&SampleSpec::segment(1.1, 2.0).with_points(60)).unwrap();
        let samples: Vec<GaussRational> = k
            .points()
            .iter()
            .map(|z| GaussRational::real(Rational::from(1) / &z.re))
            .collect();
        let mut last = f64::INFINITY;
        for n in 2..=4u64 {
            let mut req = ApproxRequest::new(
                Target::Samples(samples.clone()),
                k.clone(),
                Rational::from((1, 2)),
                WindowSpec::new(n, n * n).unwrap(),
            );
            req.options.output = Mode::Exact;
            let res = solve_window(&req).unwrap();
            let e = res.objective.to_f64();
            assert!(e < last, "n = {n}: {e} !< {last}");
            last = e;
        }
    }

    #[test]
    fn lawson_fallback_runs_when_budget_is_small() {
        let h = SparsePolynomial::monomial(0, Scalar::from_int(2, Mode::Exact));
        let mut req = ApproxRequest::new(
            Target::Polynomial(h),
            point_sample(2),
            Rational::from((1, 2)),
            WindowSpec::new(1, 1).unwrap(),
        );
        req.options.lp_budget = 1;
        let res = solve_window(&req).unwrap();
        assert_eq!(res.method, SolveMethod::Lawson);
        assert!((res.objective.to_f64() - 0.4).abs() < 1e-2, "{}", res.objective);
    }

    #[test]
    fn oversized_window_is_rejected() {
        let h = SparsePolynomial::monomial(0, Scalar::from_int(2, Mode::Exact));
        let mut req =
            ApproxRequest::new(Target::Polynomial(h), point_sample(2), Rational::from((1, 2)), WindowSpec::new(1, 50).unwrap());
        req.options.window_cap = 10;
        assert!(matches!(solve_window(&req), Err(Error::WindowTooLarge { size: 50, cap: 10 })));
    }
}
