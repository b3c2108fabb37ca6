//! Lawson's iteratively reweighted least squares for complex minimax.
//!
//! Used when the linear program would be too large. Each group holds the real
//! residual components of one sample point; its error is the Euclidean norm of
//! those components.

use rug::Float;

use crate::error::{Error, Result};

/// One real residual component `aᵀx − b`.
pub type Component = (Vec<Float>, Float);

#[derive(Clone, Debug)]
pub struct LawsonOptions {
    pub precision: u32,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub struct LawsonSolution {
    pub x: Vec<Float>,
    pub max_error: Float,
    pub iterations: usize,
    /// The normal equations became singular; `x` is the best iterate seen.
    pub ill_conditioned: bool,
}

fn group_error(g: &[Component], x: &[Float], prec: u32) -> Float {
    let mut s = Float::new(prec);
    for (a, b) in g {
        let mut r = Float::with_val(prec, -b);
        for (ai, xi) in a.iter().zip(x) {
            r += Float::with_val(prec, ai * xi);
        }
        s += r.square();
    }
    s.sqrt()
}

/// Solves `G x = h` for symmetric positive definite `G`; `None` if not positive definite.
pub(crate) fn cholesky_solve(mut g: Vec<Vec<Float>>, mut h: Vec<Float>, prec: u32) -> Option<Vec<Float>> {
    let n = h.len();
    for j in 0..n {
        for k in 0..j {
            let d = Float::with_val(prec, &g[j][k] * &g[j][k]);
            g[j][j] -= d;
        }
        if !(g[j][j] > 0) {
            return None;
        }
        g[j][j].sqrt_mut();
        for i in j + 1..n {
            for k in 0..j {
                let d = Float::with_val(prec, &g[i][k] * &g[j][k]);
                g[i][j] -= d;
            }
            let d = g[j][j].clone();
            g[i][j] /= d;
        }
    }
    for i in 0..n {
        for k in 0..i {
            let d = Float::with_val(prec, &g[i][k] * &h[k]);
            h[i] -= d;
        }
        let d = g[i][i].clone();
        h[i] /= d;
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            let d = Float::with_val(prec, &g[k][i] * &h[k]);
            h[i] -= d;
        }
        let d = g[i][i].clone();
        h[i] /= d;
    }
    Some(h)
}

/// Minimizes `max_g ‖residual_g(x)‖` approximately.
pub fn lawson(groups: &[Vec<Component>], opts: &LawsonOptions) -> Result<LawsonSolution> {
    let prec = opts.precision;
    let n = groups
        .iter()
        .flat_map(|g| g.first())
        .map(|(a, _)| a.len())
        .next()
        .ok_or_else(|| Error::domain("Lawson iteration needs at least one residual"))?;
    let mut weights = vec![Float::with_val(prec, 1) / groups.len() as u32; groups.len()];
    let mut best_x = vec![Float::new(prec); n];
    let mut best = groups.iter().map(|g| group_error(g, &best_x, prec)).fold(Float::new(prec), |a, e| a.max(&e));
    let mut ill = false;
    let mut done = 0;
    for it in 0..opts.iterations {
        done = it + 1;
        let mut gram = vec![vec![Float::new(prec); n]; n];
        let mut rhs = vec![Float::new(prec); n];
        for (g, w) in groups.iter().zip(&weights) {
            for (a, b) in g {
                for i in 0..n {
                    let wa = Float::with_val(prec, w * &a[i]);
                    rhs[i] += Float::with_val(prec, &wa * b);
                    for k in 0..=i {
                        gram[i][k] += Float::with_val(prec, &wa * &a[k]);
                    }
                }
            }
        }
        let Some(x) = cholesky_solve(gram, rhs, prec) else {
            ill = true;
            break;
        };
        let errs: Vec<Float> = groups.iter().map(|g| group_error(g, &x, prec)).collect();
        let max = errs.iter().fold(Float::new(prec), |a, e| a.max(e));
        let improved = max < best;
        if improved {
            best = max.clone();
            best_x = x;
        }
        let mut total = Float::new(prec);
        for (w, e) in weights.iter_mut().zip(&errs) {
            *w *= e;
            total += &*w;
        }
        if total.is_zero() {
            break;
        }
        for w in weights.iter_mut() {
            *w /= &total;
        }
    }
    Ok(LawsonSolution { x: best_x, max_error: best, iterations: done, ill_conditioned: ill })
}
