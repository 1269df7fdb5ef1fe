//! Linear least squares on user-supplied basis functions, used for divergence
//! laws and convergence-rate fits.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Outcome of a least-squares fit y ≈ Σ c_i φ_i(x).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub coefficients: Vec<f64>,
    /// Coefficient of determination 1 − SS_res/SS_tot.
    pub r_squared: f64,
    /// Root-mean-square residual.
    pub rms_residual: f64,
}

/// Fit `ys` against the basis functions evaluated at `xs`.
pub fn least_squares(xs: &[f64], ys: &[f64], basis: &[&dyn Fn(f64) -> f64]) -> Result<LinearFit> {
    let n = xs.len();
    let p = basis.len();
    if n != ys.len() || n < p || p == 0 {
        return Err(Error::Fit(format!("{n} points cannot determine {p} coefficients")));
    }
    let a = DMatrix::from_fn(n, p, |i, j| basis[j](xs[i]));
    let b = DVector::from_column_slice(ys);
    let svd = a.clone().svd(true, true);
    let c = svd
        .solve(&b, 1e-14)
        .map_err(|e| Error::Fit(e.to_string()))?;
    let res = &a * &c - &b;
    let ss_res = res.norm_squared();
    let mean = ys.iter().sum::<f64>() / n as f64;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else if ss_res == 0.0 { 1.0 } else { 0.0 };
    Ok(LinearFit {
        coefficients: c.iter().copied().collect(),
        r_squared,
        rms_residual: (ss_res / n as f64).sqrt(),
    })
}

/// Fit |y| ≈ A xᵖ in log–log space and return (p, A, R²).
pub fn power_law(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys
        .iter()
        .map(|y| {
            if *y == 0.0 {
                f64::NEG_INFINITY
            } else {
                y.abs().ln()
            }
        })
        .collect();
    if ly.iter().any(|v| !v.is_finite()) {
        return Err(Error::Fit("power law needs nonzero samples".into()));
    }
    let f = least_squares(&lx, &ly, &[&|_| 1.0, &|x| x])?;
    Ok((f.coefficients[1], f.coefficients[0].exp(), f.r_squared))
}

/// Polynomial (Neville) extrapolation of samples y(h) to h = 0.
///
/// Returns the extrapolated value and an error estimate equal to the
/// difference between the two highest-order table entries.
pub fn richardson(hs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let n = hs.len();
    if n < 2 || n != ys.len() {
        return Err(Error::Fit("Richardson extrapolation needs at least two samples".into()));
    }
    let mut p = ys.to_vec();
    let mut prev_top = p[n - 1];
    let mut top = p[n - 1];
    for level in 1..n {
        for i in (level..n).rev() {
            let (hi, hj) = (hs[i], hs[i - level]);
            p[i] = (hj * p[i] - hi * p[i - 1]) / (hj - hi);
        }
        prev_top = top;
        top = p[n - 1];
    }
    Ok((top, (top - prev_top).abs()))
}
