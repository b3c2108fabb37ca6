//! Discrete minimax by linear programming.
//!
//! Solves `min t` subject to `a_jᵀx − b_j ≤ t` for all rows `j` through its dual
//! `min bᵀy` s.t. `Σ y_j a_j = 0`, `Σ y_j = 1`, `y ≥ 0`, with a two-phase
//! revised simplex over MPFR floats. The primal solution is read off the
//! simplex multipliers at the dual optimum.
//!
//! The dual is feasible whenever every row has a partner `−a_j`, which the
//! window solver guarantees by pairing opposite directions.

use rayon::prelude::*;
use rug::Float;

use crate::error::{Error, Result};

/// Options for [`solve_minimax`].
#[derive(Clone, Debug)]
pub struct LpOptions {
    pub precision: u32,
    pub max_iterations: usize,
    pub refactor_every: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub degenerate_switch: usize,
}

impl LpOptions {
    pub fn new(precision: u32) -> Self {
        LpOptions { precision, max_iterations: 20_000, refactor_every: 64, degenerate_switch: 50 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    IterationLimit,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<Float>,
    /// Optimal value `t`, read from the multipliers.
    pub t: Float,
    /// `max_j (a_jᵀx − b_j)` recomputed at the returned `x`.
    pub max_residual: Float,
    pub iterations: usize,
    pub status: LpStatus,
}

struct Simplex<'a> {
    prec: u32,
    rows: &'a [Vec<Float>],
    n_var: usize,
    m: usize,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    binv: Vec<Vec<Float>>,
    xb: Vec<Float>,
    cost_tol: Float,
    pivot_rel: Float,
    pivots_since_refactor: usize,
    iterations: usize,
}

impl<'a> Simplex<'a> {
    fn n_cols(&self) -> usize {
        self.rows.len()
    }

    /// Entry `i` of constraint column `j` (artificial columns are unit vectors).
    fn entry(&self, j: usize, i: usize) -> Float {
        if j < self.n_cols() {
            if i < self.n_var {
                self.rows[j][i].clone()
            } else {
                Float::with_val(self.prec, 1)
            }
        } else if j - self.n_cols() == i {
            Float::with_val(self.prec, 1)
        } else {
            Float::new(self.prec)
        }
    }

    fn column(&self, j: usize) -> Vec<Float> {
        (0..self.m).map(|i| self.entry(j, i)).collect()
    }

    /// πᵀ·column j.
    fn dot_column(&self, pi: &[Float], j: usize) -> Float {
        let mut s = Float::with_val(self.prec, &pi[self.n_var]);
        for i in 0..self.n_var {
            s += Float::with_val(self.prec, &pi[i] * &self.rows[j][i]);
        }
        s
    }

    fn multipliers(&self, cost: &(dyn Fn(usize) -> Float + Sync)) -> Vec<Float> {
        let cb: Vec<Float> = self.basis.iter().map(|&j| cost(j)).collect();
        (0..self.m)
            .map(|i| {
                let mut s = Float::new(self.prec);
                for r in 0..self.m {
                    if !cb[r].is_zero() {
                        s += Float::with_val(self.prec, &cb[r] * &self.binv[r][i]);
                    }
                }
                s
            })
            .collect()
    }

    fn ftran(&self, col: &[Float]) -> Vec<Float> {
        (0..self.m)
            .map(|r| {
                let mut s = Float::new(self.prec);
                for (i, c) in col.iter().enumerate() {
                    if !c.is_zero() {
                        s += Float::with_val(self.prec, &self.binv[r][i] * c);
                    }
                }
                s
            })
            .collect()
    }

    fn pivot(&mut self, r: usize, q: usize, alpha: &[Float]) -> Result<()> {
        let piv = alpha[r].clone();
        let theta = Float::with_val(self.prec, &self.xb[r] / &piv);
        for i in 0..self.m {
            if i != r && !alpha[i].is_zero() {
                let d = Float::with_val(self.prec, &alpha[i] * &theta);
                self.xb[i] -= d;
            }
        }
        self.xb[r] = theta;
        let row_r: Vec<Float> = self.binv[r].iter().map(|v| Float::with_val(self.prec, v / &piv)).collect();
        for i in 0..self.m {
            if i != r && !alpha[i].is_zero() {
                for k in 0..self.m {
                    if !row_r[k].is_zero() {
                        let d = Float::with_val(self.prec, &alpha[i] * &row_r[k]);
                        self.binv[i][k] -= d;
                    }
                }
            }
        }
        self.binv[r] = row_r;
        self.in_basis[self.basis[r]] = false;
        self.basis[r] = q;
        self.in_basis[q] = true;
        self.iterations += 1;
        self.pivots_since_refactor += 1;
        Ok(())
    }

    /// Recomputes B⁻¹ and the basic solution from scratch.
    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        let mut a: Vec<Vec<Float>> = vec![Vec::new(); m];
        for (c, &j) in self.basis.iter().enumerate() {
            let col = self.column(j);
            for i in 0..m {
                if a[i].is_empty() {
                    a[i] = vec![Float::new(self.prec); m];
                }
                a[i][c] = col[i].clone();
            }
        }
        let inv = invert(a, self.prec)?;
        self.binv = inv;
        let mut rhs = vec![Float::new(self.prec); m];
        rhs[m - 1] = Float::with_val(self.prec, 1);
        self.xb = self.ftran(&rhs);
        self.pivots_since_refactor = 0;
        Ok(())
    }

    /// Runs simplex iterations with the given cost. Artificial columns may not enter.
    fn run(&mut self, cost: &(dyn Fn(usize) -> Float + Sync), opts: &LpOptions) -> Result<LpStatus> {
        let mut degenerate_run = 0usize;
        loop {
            if self.iterations >= opts.max_iterations {
                return Ok(LpStatus::IterationLimit);
            }
            if self.pivots_since_refactor >= opts.refactor_every {
                self.refactor()?;
            }
            let pi = self.multipliers(cost);
            let bland = degenerate_run >= opts.degenerate_switch;
            let neg_tol = Float::with_val(self.prec, -&self.cost_tol);
            let reduced: Vec<(usize, Float)> = (0..self.n_cols())
                .into_par_iter()
                .filter(|&j| !self.in_basis[j])
                .filter_map(|j| {
                    let d = cost(j) - self.dot_column(&pi, j);
                    (d < neg_tol).then_some((j, d))
                })
                .collect();
            let entering = if bland {
                reduced.iter().map(|(j, _)| *j).min()
            } else {
                reduced
                    .iter()
                    .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal).then(a.0.cmp(&b.0)))
                    .map(|(j, _)| *j)
            };
            let Some(q) = entering else {
                return Ok(LpStatus::Optimal);
            };
            let alpha = self.ftran(&self.column(q));
            let amax = alpha.iter().fold(Float::new(self.prec), |acc, v| acc.max(&Float::with_val(self.prec, v.abs_ref())));
            let ptol = Float::with_val(self.prec, &amax * &self.pivot_rel);
            let mut leave: Option<(usize, Float)> = None;
            for r in 0..self.m {
                if alpha[r] > ptol {
                    let xr = if self.xb[r].is_sign_negative() { Float::new(self.prec) } else { self.xb[r].clone() };
                    let ratio = Float::with_val(self.prec, &xr / &alpha[r]);
                    let better = match &leave {
                        None => true,
                        Some((lr, best)) => {
                            ratio < *best || (ratio == *best && (bland && self.basis[r] < self.basis[*lr] || !bland && alpha[r] > alpha[*lr]))
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((r, ratio)) = leave else {
                return Err(Error::Solver("minimax dual is unbounded".into()));
            };
            if self.xb[r].is_sign_negative() {
                self.xb[r] = Float::new(self.prec);
            }
            if ratio.is_zero() {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, q, &alpha)?;
        }
    }

    /// Pivots artificial columns out of the basis where possible.
    fn drive_out_artificials(&mut self) -> Result<()> {
        let n = self.n_cols();
        for r in 0..self.m {
            if self.basis[r] < n {
                continue;
            }
            let row = self.binv[r].clone();
            let best = (0..n)
                .into_par_iter()
                .filter(|&j| !self.in_basis[j])
                .map(|j| {
                    let mut s = Float::with_val(self.prec, &row[self.n_var]);
                    for i in 0..self.n_var {
                        s += Float::with_val(self.prec, &row[i] * &self.rows[j][i]);
                    }
                    (j, s)
                })
                .max_by(|a, b| {
                    a.1.clone().abs().partial_cmp(&b.1.clone().abs()).unwrap_or(std::cmp::Ordering::Equal).then(b.0.cmp(&a.0))
                });
            if let Some((q, v)) = best {
                if Float::with_val(self.prec, v.abs_ref()) > self.pivot_rel {
                    self.xb[r] = Float::new(self.prec);
                    let alpha = self.ftran(&self.column(q));
                    self.pivot(r, q, &alpha)?;
                }
            }
        }
        Ok(())
    }
}

/// Gauss-Jordan inverse with partial pivoting.
pub(crate) fn invert(mut a: Vec<Vec<Float>>, prec: u32) -> Result<Vec<Vec<Float>>> {
    let m = a.len();
    let mut inv: Vec<Vec<Float>> = (0..m)
        .map(|i| (0..m).map(|k| Float::with_val(prec, if i == k { 1 } else { 0 })).collect())
        .collect();
    for c in 0..m {
        let p = (c..m)
            .max_by(|&x, &y| {
                a[x][c].clone().abs().partial_cmp(&a[y][c].clone().abs()).unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("nonempty");
        if a[p][c].is_zero() {
            return Err(Error::Solver("singular basis".into()));
        }
        a.swap(c, p);
        inv.swap(c, p);
        let piv = a[c][c].clone();
        for k in 0..m {
            a[c][k] /= &piv;
            inv[c][k] /= &piv;
        }
        for i in 0..m {
            if i != c && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for k in 0..m {
                    let d = Float::with_val(prec, &f * &a[c][k]);
                    a[i][k] -= d;
                    let d = Float::with_val(prec, &f * &inv[c][k]);
                    inv[i][k] -= d;
                }
            }
        }
    }
    Ok(inv)
}

/// `max_j (a_jᵀx − b_j)`.
pub fn max_residual(rows: &[Vec<Float>], b: &[Float], x: &[Float], prec: u32) -> Float {
    rows.par_iter()
        .zip(b.par_iter())
        .map(|(a, bj)| {
            let mut s = Float::with_val(prec, -bj);
            for (ai, xi) in a.iter().zip(x) {
                s += Float::with_val(prec, ai * xi);
            }
            s
        })
        .reduce(|| Float::with_val(prec, f64::NEG_INFINITY), |a, c| a.max(&c))
}

/// Minimizes `max_j (a_jᵀx − b_j)` over `x`.
pub fn solve_minimax(rows: &[Vec<Float>], b: &[Float], opts: &LpOptions) -> Result<LpSolution> {
    let prec = opts.precision;
    if rows.is_empty() || rows.len() != b.len() {
        return Err(Error::domain("minimax needs matching nonempty rows and right-hand sides"));
    }
    let n_var = rows[0].len();
    if rows.iter().any(|r| r.len() != n_var) {
        return Err(Error::domain("minimax rows have different lengths"));
    }
    let n = rows.len();
    let m = n_var + 1;
    let mut xb = vec![Float::new(prec); m];
    xb[m - 1] = Float::with_val(prec, 1);
    let mut in_basis = vec![false; n + m];
    for k in 0..m {
        in_basis[n + k] = true;
    }
    let mut sx = Simplex {
        prec,
        rows,
        n_var,
        m,
        basis: (n..n + m).collect(),
        in_basis,
        binv: (0..m)
            .map(|i| (0..m).map(|k| Float::with_val(prec, if i == k { 1 } else { 0 })).collect())
            .collect(),
        xb,
        cost_tol: Float::with_val(prec, Float::i_exp(1, -((prec / 2) as i32))),
        pivot_rel: Float::with_val(prec, Float::i_exp(1, -((prec / 3) as i32))),
        pivots_since_refactor: 0,
        iterations: 0,
    };
    let phase1 = |j: usize| Float::with_val(prec, if j >= n { 1 } else { 0 });
    let status = sx.run(&phase1, opts)?;
    if status == LpStatus::Optimal {
        let infeas = sx
            .basis
            .iter()
            .zip(&sx.xb)
            .filter(|(j, _)| **j >= n)
            .fold(Float::new(prec), |acc, (_, v)| acc + v);
        if infeas > Float::with_val(prec, Float::i_exp(1, -((prec / 4) as i32))) {
            return Err(Error::Solver("minimax dual is infeasible".into()));
        }
        sx.drive_out_artificials()?;
        sx.refactor()?;
    }
    let phase2 = |j: usize| if j >= n { Float::new(prec) } else { b[j].clone() };
    let status = if status == LpStatus::Optimal { sx.run(&phase2, opts)? } else { status };
    let pi = sx.multipliers(&phase2);
    let x: Vec<Float> = pi[..n_var].to_vec();
    let t = Float::with_val(prec, -&pi[n_var]);
    let max_res = max_residual(rows, b, &x, prec);
    Ok(LpSolution { x, t, max_residual: max_res, iterations: sx.iterations, status })
}
