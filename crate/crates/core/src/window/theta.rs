//! Geometric decay rate of approximation errors along a window sweep.
//!
//! Fits `ln err ≈ a + τ·ln θ` by least squares and reports `θ`.

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThetaEstimate {
    Fitted {
        theta: f64,
        /// Root-mean-square residual of the fit in natural-log units.
        residual: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        warning: Option<String>,
    },
    /// Some window reproduced the target exactly.
    Exact,
}

/// Fits `θ` to `(τ, err)` pairs; `τ` is the top degree of each window.
pub fn theta_fit(samples: &[(u64, Float)]) -> Result<ThetaEstimate> {
    if samples.len() < 3 {
        return Err(Error::domain("theta fit needs at least three windows"));
    }
    if samples.iter().any(|(_, e)| e.is_zero()) {
        return Ok(ThetaEstimate::Exact);
    }
    if samples.iter().any(|(_, e)| e.is_sign_negative() || !e.is_finite()) {
        return Err(Error::domain("errors must be positive and finite"));
    }
    let xs: Vec<f64> = samples.iter().map(|(t, _)| *t as f64).collect();
    let ys: Vec<f64> = samples.iter().map(|(_, e)| Float::with_val(e.prec(), e.ln_ref()).to_f64()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("theta fit needs distinct window tops"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / n).sqrt();
    let theta = slope.exp();
    let warning = (theta >= 1.0).then(|| format!("no geometric decay: theta = {theta}"));
    Ok(ThetaEstimate::Fitted { theta, residual, warning })
}
