//! Mass ledger: bare mass, counterterm series and discarded vacuum constants.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernels::C_LIGHT;
use crate::model::Dim;

/// Divergent self-energy mass term δm(α) with m_bare = m − δm:
/// (q²/4πc²) ln(α/α₀) in d = 2 and (4/3)(q²/c²)√(α/2π) in d = 3.
pub fn divergent_mass_term(d: Dim, q: f64, alpha: f64, alpha0: f64) -> f64 {
    let c2 = C_LIGHT * C_LIGHT;
    match d {
        Dim::Two => q * q / (4.0 * PI * c2) * (alpha / alpha0).ln(),
        Dim::Three => 4.0 / 3.0 * q * q / c2 * (alpha / (2.0 * PI)).sqrt(),
    }
}

/// Bare mass m_bare(α) = m − δm(α).
pub fn bare_mass(d: Dim, m: f64, q: f64, alpha: f64, alpha0: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(invalid("alpha must be positive"));
    }
    Ok(m - divergent_mass_term(d, q, alpha, alpha0))
}

/// Geometric ratio r = δm/m of the counterterm series.
pub fn counterterm_ratio(d: Dim, m: f64, q: f64, alpha: f64, alpha0: f64) -> f64 {
    divergent_mass_term(d, q, alpha, alpha0) / m
}

/// Value of the counterterm series (1/2m) Σ_{ℓ=1}^{L} rˡ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Counterterm {
    pub value: f64,
    pub ratio: f64,
    /// Set when |r| ≥ 1: the truncation is formal and has no convergent limit.
    pub formal_series: bool,
    /// Truncation order, `None` for the summed convergent series.
    pub order: Option<usize>,
}

/// Counterterm series truncated at `order`, or summed in closed form when
/// `order` is `None` (allowed only for |r| < 1).
pub fn counterterm_series(d: Dim, m: f64, q: f64, alpha: f64, alpha0: f64, order: Option<usize>) -> Result<Counterterm> {
    if !(m > 0.0 && alpha > 0.0) {
        return Err(invalid("mass and alpha must be positive"));
    }
    let r = counterterm_ratio(d, m, q, alpha, alpha0);
    let formal_series = r.abs() >= 1.0;
    let value = match order {
        Some(l) => {
            let mut s = 0.0;
            let mut p = 1.0;
            for _ in 0..l {
                p *= r;
                s += p;
            }
            s / (2.0 * m)
        }
        None => {
            if formal_series {
                return Err(Error::InvalidInput(format!(
                    "counterterm series with ratio {r} is not summable; request a finite truncation"
                )));
            }
            r / (1.0 - r) / (2.0 * m)
        }
    };
    Ok(Counterterm {
        value,
        ratio: r,
        formal_series,
        order,
    })
}

/// j-independent divergent constant dropped from the level shifts:
/// (q²ħ/2mc)√(α/2π) in d = 2 and (q²ħ/πmc)·α in d = 3.
pub fn discarded_vacuum_constant(d: Dim, alpha: f64, q: f64, m: f64) -> f64 {
    match d {
        Dim::Two => q * q / (2.0 * m * C_LIGHT) * (alpha / (2.0 * PI)).sqrt(),
        Dim::Three => q * q / (PI * m * C_LIGHT) * alpha,
    }
}

/// Closed-form regulator α* at which the bare mass vanishes.
pub fn sign_flip_alpha(d: Dim, m: f64, q: f64, alpha0: f64) -> f64 {
    let c2 = C_LIGHT * C_LIGHT;
    match d {
        Dim::Two => alpha0 * (4.0 * PI * m * c2 / (q * q)).exp(),
        Dim::Three => 2.0 * PI * (3.0 * m * c2 / (4.0 * q * q)).powi(2),
    }
}

/// Locate the zero of m_bare(α) by bisection in ln α on [lo, hi].
pub fn locate_sign_flip(d: Dim, m: f64, q: f64, alpha0: f64, lo: f64, hi: f64) -> Result<f64> {
    let f = |la: f64| m - divergent_mass_term(d, q, la.exp(), alpha0);
    let (mut a, mut b) = (lo.ln(), hi.ln());
    if f(a) * f(b) > 0.0 {
        return Err(invalid("bare mass does not change sign in the bracket"));
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if f(a) * f(mid) <= 0.0 {
            b = mid;
        } else {
            a = mid;
        }
        if b - a < 1e-15 * a.abs().max(1.0) {
            break;
        }
    }
    Ok((0.5 * (a + b)).exp())
}

/// One row of the mass ledger.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassLedger {
    pub d: Dim,
    pub m: f64,
    pub q: f64,
    pub alpha: f64,
    pub alpha0: f64,
    pub m_bare: f64,
    /// O(q²) counterterm (L = 1).
    pub counterterm_order1: f64,
    pub discarded_constant: f64,
}

impl MassLedger {
    /// Assemble the ledger at a given α.
    pub fn new(d: Dim, m: f64, q: f64, alpha: f64, alpha0: f64) -> Result<Self> {
        Ok(Self {
            d,
            m,
            q,
            alpha,
            alpha0,
            m_bare: bare_mass(d, m, q, alpha, alpha0)?,
            counterterm_order1: counterterm_series(d, m, q, alpha, alpha0, Some(1))?.value,
            discarded_constant: discarded_vacuum_constant(d, alpha, q, m),
        })
    }
}
