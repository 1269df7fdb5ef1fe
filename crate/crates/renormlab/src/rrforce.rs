//! Radiation-reaction electric force on a prescribed c-number trajectory.
//!
//! With the Gaussian charge profile the transverse self-field reduces, after
//! the angular integration, to
//!
//! F(t) = −P_d q_t ∫₀^∞ dτ ∫₀^∞ k^{d−1} cos(kcτ) e^{−k²/2α} dk · q_{t−τ} v(t−τ),
//!
//! with P₃ = 4/(3π) and P₂ = 1/(2π). In three dimensions the kernel is
//! Gaussian-localized and the force is local plus O(α^{−1/2}):
//! −(4/3)(q²/c²)√(α/2π) ẍ + (2/3)(q²/c³) x⃛. In two dimensions the k-integral
//! is Ξ′_α(cτ), which decays only as τ⁻², and the force splits into a local
//! ln α term and a logarithmic memory integral.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec::Exec;
use crate::fit::least_squares;
use crate::kernels::{f_alpha_zero, xi_alpha_prime, KernelContext};
use crate::memconv::LogConvolver;
use crate::model::{Charge, Dim};
use crate::motion::Motion;
use crate::quad::{integrate_oscillatory, integrate_points, QuadOpts};

/// Retarded-time window of the three-dimensional kernel in units of 1/(√α c).
pub const D3_WINDOW: f64 = 8.0;

/// Controls for the exact evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactOpts {
    /// Requested relative tolerance of the outer quadrature.
    pub tol: f64,
    /// Highest angular frequency present in the motion; sets panel widths.
    pub max_frequency: f64,
    /// Start of the history. Defaults to where q_t falls below 10⁻¹⁶·q.
    pub history_start: Option<f64>,
}

impl Default for ExactOpts {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_frequency: 1.0,
            history_start: None,
        }
    }
}

/// A force vector with its estimated absolute error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceEval {
    pub force: Vec<f64>,
    /// Quadrature plus truncation error estimate (max over components).
    pub error_estimate: f64,
}

fn history_start(charge: &Charge, opts: &ExactOpts) -> Result<f64> {
    if let Some(t0) = opts.history_start {
        return Ok(t0);
    }
    let t0 = charge.switching.start_time(1e-16);
    if t0.is_finite() {
        Ok(t0)
    } else {
        Err(Error::InsufficientHistory(
            "a constant charge needs an explicit history start".into(),
        ))
    }
}

/// K₃(τ) = ∫₀^∞ k² cos(kcτ) e^{−k²/2α} dk by adaptive quadrature.
pub fn kernel_d3(ctx: &KernelContext, tau: f64) -> Result<f64> {
    let a = ctx.alpha;
    let kmax = (80.0 * a).sqrt();
    let w = ctx.c * tau;
    let half = if w > 0.0 { PI / w } else { f64::INFINITY };
    let f = |k: f64| k * k * (k * w).cos() * (-k * k / (2.0 * a)).exp();
    let scale = a.powf(1.5);
    Ok(integrate_oscillatory(f, 0.0, kmax, half, &[], QuadOpts::new(1e-15 * scale, 1e-13))?.value)
}

/// Exact force at finite α by nested quadrature.
///
/// In three dimensions the k-integral is done numerically for every τ and
/// the τ-integral is truncated at 8/(√α c). In two dimensions the k-integral
/// is Ξ′_α(cτ) and the τ-integral runs over the whole history.
pub fn rr_force_exact(
    ctx: &KernelContext,
    motion: &dyn Motion,
    charge: &Charge,
    d: Dim,
    t: f64,
    opts: &ExactOpts,
) -> Result<ForceEval> {
    if motion.dim() != d.n() {
        return Err(invalid("motion dimension does not match d"));
    }
    let qt = charge.at(t);
    let c = ctx.c;
    let mut force = vec![0.0; d.n()];
    let mut err = 0.0f64;
    // Absolute error scale of the cancelling τ-integral, set by the tolerance
    // handed to the quadrature relative to ∫|integrand|.
    let mut floor = 0.0f64;
    match d {
        Dim::Three => {
            let tmax = D3_WINDOW / (ctx.alpha.sqrt() * c);
            let n = 32;
            let pts: Vec<f64> = (0..=n).map(|i| tmax * i as f64 / n as f64).collect();
            let vmax = (0..d.n())
                .map(|k| motion.deriv(1, t, k).abs())
                .fold(0.0, f64::max);
            // ∫_T^∞ K₃ dτ = −√(πα/2) α T e^{−αc²T²/2}; the tail beyond the
            // window is added with q v frozen at t − T, and the first
            // neglected Taylor term bounds the remainder.
            let tail = -(PI * ctx.alpha / 2.0).sqrt() * ctx.alpha * tmax * (-0.5 * D3_WINDOW * D3_WINDOW).exp();
            let te = t - tmax;
            let rate = (0..d.n())
                .map(|k| (charge.rate(te) * motion.deriv(1, te, k) + charge.at(te) * motion.deriv(2, te, k)).abs())
                .fold(0.0, f64::max);
            let trunc = 4.0 / (3.0 * PI) * qt.abs() * tail.abs() * tmax * rate;
            for (comp, slot) in force.iter_mut().enumerate() {
                let f = |tau: f64| {
                    let k3 = kernel_d3(ctx, tau).unwrap_or(f64::NAN);
                    k3 * charge.at(t - tau) * motion.deriv(1, t - tau, comp)
                };
                let scale = ctx.alpha * vmax * charge.q.abs() + f64::MIN_POSITIVE;
                floor = floor.max(1e-3 * 4.0 / (3.0 * PI) * qt.abs() * scale);
                let r = integrate_points(f, &pts, QuadOpts::new(opts.tol * 1e-3 * scale, opts.tol))?;
                if !r.value.is_finite() {
                    return Err(Error::Tolerance {
                        context: "inner k quadrature".into(),
                        achieved: f64::INFINITY,
                        requested: opts.tol,
                    });
                }
                let tail_part = tail * charge.at(te) * motion.deriv(1, te, comp);
                *slot = -4.0 / (3.0 * PI) * qt * (r.value + tail_part);
                err = err.max(4.0 / (3.0 * PI) * qt.abs() * r.error + trunc);
            }
        }
        Dim::Two => {
            let t0 = history_start(charge, opts)?;
            if !(t > t0) {
                return Err(Error::InsufficientHistory("evaluation time precedes the history".into()));
            }
            let span = t - t0;
            let w0 = 1.0 / (ctx.alpha.sqrt() * c);
            let mut pts = vec![0.0];
            let mut p = w0;
            let half = PI / opts.max_frequency.max(1e-12);
            while p < span.min(half) {
                pts.push(p);
                p *= 2.0;
            }
            for (comp, slot) in force.iter_mut().enumerate() {
                let f = |tau: f64| xi_alpha_prime(ctx, c * tau) * charge.at(t - tau) * motion.deriv(1, t - tau, comp);
                let r = integrate_oscillatory(f, 0.0, span, half, &pts, QuadOpts::new(1e-16, opts.tol))?;
                *slot = -qt / (2.0 * PI) * r.value;
                err = err.max(qt.abs() / (2.0 * PI) * r.error);
            }
        }
    }
    let scale = force.iter().fold(0.0f64, |a, f| a.max(f.abs()));
    if err > opts.tol * scale.max(floor).max(1e-300) * 1e3 && err > 1e-14 {
        return Err(Error::Tolerance {
            context: "exact radiation-reaction force".into(),
            achieved: err / scale.max(1e-300),
            requested: opts.tol,
        });
    }
    Ok(ForceEval {
        force,
        error_estimate: err,
    })
}

/// Discretization of the two-dimensional memory integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemoryOpts {
    /// Sampling step of the history.
    pub dt: f64,
    /// Start of the history; defaults to where q_t falls below 10⁻¹⁶·q.
    pub history_start: Option<f64>,
}

fn memory_samples(motion: &dyn Motion, charge: &Charge, comp: usize, t: f64, mem: &MemoryOpts) -> Result<Vec<f64>> {
    let t0 = match mem.history_start {
        Some(t0) => t0,
        None => {
            let t0 = charge.switching.start_time(1e-16);
            if !t0.is_finite() {
                return Err(Error::InsufficientHistory("memory integral needs a finite history start".into()));
            }
            t0
        }
    };
    if !(t > t0) || !(mem.dt > 0.0) {
        return Err(Error::InsufficientHistory("memory window is empty".into()));
    }
    let n = ((t - t0) / mem.dt).ceil() as usize;
    // ä with a(t′) = d(q_{t′} v(t′))/dt′, sampled backwards from t.
    Ok((0..=n)
        .rev()
        .map(|k| {
            let tp = t - k as f64 * mem.dt;
            let (q, qd, qdd) = (charge.at(tp), charge.rate(tp), charge.accel(tp));
            let (v, a, j) = (motion.deriv(1, tp, comp), motion.deriv(2, tp, comp), motion.deriv(3, tp, comp));
            qdd * v + 2.0 * qd * a + q * j
        })
        .collect())
}

/// Memory integral ∫₀^∞ ln(τ/t_c) ä(t − τ) dτ per component, with
/// a = d(q v)/dt, by product integration on a uniform grid.
pub fn memory_integral(motion: &dyn Motion, charge: &Charge, t: f64, t_c: f64, mem: &MemoryOpts) -> Result<Vec<f64>> {
    let mut conv = LogConvolver::new(mem.dt, t_c)?;
    (0..motion.dim())
        .map(|c| Ok(conv.convolve(&memory_samples(motion, charge, c, t, mem)?).value))
        .collect()
}

/// Asymptotic force.
///
/// d = 3: −(4/3)(q_t²/c²)√(α/2π) ẍ + (2/3)(q_t²/c³) x⃛.
/// d = 2: −(q_t²/4πc²) ẍ ln(α/α₀(η)) − (q_t/2πc²) ∫ ln((t−t′)/t_c) d²(q v)/dt′² dt′,
/// with α₀(η) = e^{2cζ(η)} and t_c = η t̃; the memory settings are required.
pub fn rr_force_asymptotic(
    ctx: &KernelContext,
    motion: &dyn Motion,
    charge: &Charge,
    d: Dim,
    t: f64,
    memory: Option<&MemoryOpts>,
) -> Result<Vec<f64>> {
    let qt = charge.at(t);
    let c = ctx.c;
    match d {
        Dim::Three => Ok((0..3)
            .map(|k| {
                -4.0 / 3.0 * qt * qt / (c * c) * (ctx.alpha / (2.0 * PI)).sqrt() * motion.deriv(2, t, k)
                    + 2.0 / 3.0 * qt * qt / c.powi(3) * motion.deriv(3, t, k)
            })
            .collect()),
        Dim::Two => {
            if qt == 0.0 {
                return Ok(vec![0.0; 2]);
            }
            let mem = memory.ok_or_else(|| Error::InsufficientHistory("d = 2 needs memory settings".into()))?;
            let alpha0_eta = (2.0 * c * ctx.zeta_eta()).exp();
            let i_t = memory_integral(motion, charge, t, ctx.t_c, mem)?;
            Ok((0..2)
                .map(|k| {
                    -qt * qt / (4.0 * PI * c * c) * motion.deriv(2, t, k) * (ctx.alpha / alpha0_eta).ln()
                        - qt / (2.0 * PI * c * c) * i_t[k]
                })
                .collect())
        }
    }
}

/// Two-dimensional force with the exact local coefficient 𝓕_α(0):
/// (q_t/2πc) 𝓕_α(0) a(t) − (q_t/2πc²) ∫ ln((t−t′)/t_c) ȧ(t′) dt′, a = d(q v)/dt.
///
/// Both terms depend on η = t_c/t̃ only through ln η, and the two ln η pieces
/// cancel, so the sum is η-independent up to O(α⁻¹).
pub fn rr_force_d2_local_memory(
    ctx: &KernelContext,
    motion: &dyn Motion,
    charge: &Charge,
    t: f64,
    mem: &MemoryOpts,
) -> Result<Vec<f64>> {
    let qt = charge.at(t);
    let c = ctx.c;
    let f0 = f_alpha_zero(ctx);
    let i_t = memory_integral(motion, charge, t, ctx.t_c, mem)?;
    Ok((0..2)
        .map(|k| {
            let a = charge.rate(t) * motion.deriv(1, t, k) + charge.at(t) * motion.deriv(2, t, k);
            qt / (2.0 * PI * c) * f0 * a - qt / (2.0 * PI * c * c) * i_t[k]
        })
        .collect())
}

/// Divergence law of the local term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DivergenceLaw {
    SqrtAlpha,
    LogAlpha,
}

/// Fitted leading coefficient of the local force as α → ∞.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceFit {
    pub d: Dim,
    pub law: DivergenceLaw,
    /// Fitted coefficient of √α or ln α per component.
    pub coefficient: Vec<f64>,
    /// −(4/3)(q²/c²)ẍ/√(2π) or −q²ẍ/(4πc²) per component.
    pub expected: Vec<f64>,
    /// max_c |fitted − expected| / max_c |expected|.
    pub relative_error: f64,
    /// Smallest R² over components.
    pub r_squared: f64,
    /// Largest rms fit residual over components.
    pub residual: f64,
    pub alphas: Vec<f64>,
    /// Exact force per α.
    pub forces: Vec<Vec<f64>>,
}

/// Evaluate the exact force over a list of α values and fit the divergent
/// local term: against [√α, 1, α^{−1/2}] in three dimensions and
/// [ln α, 1, α^{−1/2}] in two.
#[allow(clippy::too_many_arguments)]
pub fn divergence_scan(
    template: &KernelContext,
    motion: &dyn Motion,
    charge: &Charge,
    d: Dim,
    t: f64,
    alphas: &[f64],
    opts: &ExactOpts,
    exec: Exec,
) -> Result<DivergenceFit> {
    if alphas.len() < 5 {
        return Err(invalid("divergence scan needs at least five alpha values"));
    }
    let (lo, hi) = alphas
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(l, h), &a| (l.min(a), h.max(a)));
    if hi / lo < 1e3 * (1.0 - 1e-12) {
        return Err(invalid("divergence scan must span at least three decades"));
    }
    let results = exec.map(alphas, |&a| {
        let ctx = template.with_alpha(a)?;
        rr_force_exact(&ctx, motion, charge, d, t, opts).map(|r| r.force)
    });
    let forces: Vec<Vec<f64>> = results.into_iter().collect::<Result<_>>()?;
    let (law, basis): (DivergenceLaw, [&dyn Fn(f64) -> f64; 3]) = match d {
        Dim::Three => (DivergenceLaw::SqrtAlpha, [&|a: f64| a.sqrt(), &|_| 1.0, &|a: f64| 1.0 / a.sqrt()]),
        Dim::Two => (DivergenceLaw::LogAlpha, [&|a: f64| a.ln(), &|_| 1.0, &|a: f64| 1.0 / a.sqrt()]),
    };
    let q2 = charge.q * charge.q * charge.switching.s(t).powi(2);
    let c2 = template.c * template.c;
    let expected: Vec<f64> = (0..d.n())
        .map(|k| {
            let acc = motion.deriv(2, t, k);
            match d {
                Dim::Three => -4.0 / 3.0 * q2 / c2 * acc / (2.0 * PI).sqrt(),
                Dim::Two => -q2 / (4.0 * PI * c2) * acc,
            }
        })
        .collect();
    let mut coefficient = Vec::with_capacity(d.n());
    let mut r2 = 1.0f64;
    let mut residual = 0.0f64;
    for k in 0..d.n() {
        let ys: Vec<f64> = forces.iter().map(|f| f[k]).collect();
        let fit = least_squares(alphas, &ys, &basis)?;
        coefficient.push(fit.coefficients[0]);
        r2 = r2.min(fit.r_squared);
        residual = residual.max(fit.rms_residual);
    }
    let emax = expected.iter().fold(0.0f64, |a, e| a.max(e.abs()));
    let dmax = coefficient
        .iter()
        .zip(&expected)
        .fold(0.0f64, |a, (c, e)| a.max((c - e).abs()));
    let relative_error = if emax > 0.0 { dmax / emax } else { dmax };
    let fit = DivergenceFit {
        d,
        law,
        coefficient,
        expected,
        relative_error,
        r_squared: r2,
        residual,
        alphas: alphas.to_vec(),
        forces,
    };
    if fit.r_squared < 0.999 {
        return Err(Error::Fit(format!(
            "divergence law violated: R² = {:.6} < 0.999",
            fit.r_squared
        )));
    }
    Ok(fit)
}
