//! Second-order level shifts of the atom coupled to the radiation field.
//!
//! Every shift reduces to sums over intermediate levels j′ of one-dimensional
//! integrals of the form
//!
//! I = ∫ h(k) / (ω − k + iε) dk,  ω = E_j − E_j′,
//!
//! with h piecewise smooth. The primary evaluation takes ε → 0⁺ analytically:
//! the principal value is computed by folding the panel around the pole,
//! ∫₀^δ [h(ω−u) − h(ω+u)]/u du, and the residue contributes −iπ h(ω). The
//! secondary evaluation integrates at finite ε on a halving ladder and
//! extrapolates to ε = 0.
//!
//! Three shifts are provided, all in units ħ = c = 1:
//!
//! * naive (no counterterm), cut off at |k| < K:
//!   d = 3: (2q²/3πm²) Σ|p|² ∫₀^K k/(ω−k+iε) dk,
//!   d = 2: (q²/4πm²) Σ|p|² ∫₀^K 1/(ω−k+iε) dk;
//! * renormalized, d = 3: (2q²/3πm²) Σ|p|² ∫₀^∞ e^{−k²/2α} ω/(ω−k+iε) dk;
//! * renormalized, d = 2, with the momentum split at 𝒦:
//!   (q²/4πm²) Σ|p|² [∫₀^𝒦 e^{−k²/2α}/(ω−k+iε) dk + ∫_𝒦^∞ e^{−k²/2α} ω/(k(ω−k+iε)) dk].
//!
//! The level sums skip j′ = j and couplings with p_{jj′} = 0.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::atom::{sum_rule, AtomSpectrum, SumRule};
use crate::error::{invalid, Error, Result};
use crate::exec::Exec;
use crate::fit::{least_squares, power_law, richardson};
use crate::kernels::KernelContext;
use crate::model::Dim;
use crate::quad::{integrate_points, QuadOpts};
use crate::special::EULER_GAMMA;

/// Upper momentum of the Gaussian-damped integrals in units of √α; the
/// neglected tail is below e^{−72}.
const GAUSS_REACH: f64 = 12.0;

/// How the +iε prescription is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EpsMode {
    /// Principal value plus −iπ times the residue.
    Pole,
    /// Finite-ε quadrature on a halving ladder, extrapolated to ε = 0.
    Extrapolate,
}

/// Controls for the shift evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftOpts {
    pub eps_mode: EpsMode,
    /// Relative tolerance of every one-dimensional quadrature.
    pub tol: f64,
    /// Largest ε of the extrapolation ladder, relative to |ω|.
    pub eps0_ratio: f64,
    /// Number of ε values on the ladder.
    pub eps_steps: usize,
    /// Multiplies the momentum split 𝒦 = √(2α₀e^{−γ}) of the d = 2 shift.
    pub split_scale: f64,
}

impl Default for ShiftOpts {
    fn default() -> Self {
        Self {
            eps_mode: EpsMode::Pole,
            tol: 1e-12,
            eps0_ratio: 0.05,
            eps_steps: 6,
            split_scale: 1.0,
        }
    }
}

/// A complex second-order shift; Im E2 = −Γ/2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexShift {
    pub e2: Complex64,
    pub j: usize,
    pub d: Dim,
    /// Regulator α; `None` for the α → ∞ closed form.
    pub alpha: Option<f64>,
    /// Momentum split 𝒦 (d = 2) or cutoff K (naive).
    pub split: Option<f64>,
    pub eps_mode: EpsMode,
    /// Smallest ε used; zero on the pole path.
    pub eps_used: f64,
    /// Highest level index J_max in the sum.
    pub j_max: usize,
    /// Estimated absolute error of E2.
    pub error_estimate: f64,
    /// ∂ Re E2/∂ ln α, reported for the d = 3 shift.
    pub log_alpha_derivative: Option<f64>,
    /// Completeness of the truncated level sum.
    pub sum_rule: SumRule,
}

impl ComplexShift {
    /// Decay rate Γ = −2 Im E2.
    pub fn gamma(&self) -> f64 {
        -2.0 * self.e2.im
    }
}

/// 𝒦 = √(2α₀e^{−γ}).
pub fn split_momentum(alpha0: f64) -> f64 {
    (2.0 * alpha0 * (-EULER_GAMMA).exp()).sqrt()
}

/// One intermediate level of a level sum.
#[derive(Debug, Clone, Copy)]
struct Channel {
    omega: f64,
    weight: f64,
}

fn channels(spec: &AtomSpectrum, j: usize) -> Result<Vec<Channel>> {
    if j >= spec.len() {
        return Err(invalid(format!("level {j} exceeds J_max = {}", spec.len() - 1)));
    }
    let p2 = spec.p2_diag[j].abs().max(f64::MIN_POSITIVE);
    let scale = spec.energies.iter().fold(0.0f64, |a, e| a.max(e.abs())).max(f64::MIN_POSITIVE);
    let mut out = Vec::new();
    for jp in (0..spec.len()).filter(|&jp| jp != j) {
        let weight = spec.p_abs2(jp, j);
        if weight <= 1e-14 * p2 {
            continue;
        }
        let omega = spec.omega(j, jp);
        if omega.abs() <= 1e-12 * scale {
            return Err(invalid(format!(
                "levels {j} and {jp} are degenerate but coupled; the shift is infrared divergent"
            )));
        }
        out.push(Channel { omega, weight });
    }
    Ok(out)
}

/// Absolute accuracy floor for panels whose own contribution is tiny: a
/// fraction of the tolerance times the integrand size near the resonance.
fn abs_floor<H: Fn(f64) -> f64>(h: &H, omega: f64, pieces: &[f64], tol: f64) -> f64 {
    let first = 0.5 * pieces.get(1).copied().unwrap_or(1.0);
    1e-2 * tol * (h(omega.abs()).abs() + h(first).abs())
}

/// Geometric points between `from` and `to` starting at distance `step`
/// from `from`, in either direction.
fn geometric_between(from: f64, to: f64, step: f64) -> Vec<f64> {
    let mut pts = Vec::new();
    let span = (to - from).abs();
    let dir = (to - from).signum();
    let mut s = step;
    while s < span {
        pts.push(from + dir * s);
        s *= 2.0;
    }
    pts
}

/// ∫ over `pieces` (ascending, h smooth inside each piece) of h(k)/(ω − k + i0).
///
/// Returns the value and an absolute error estimate. A pole on a piece
/// boundary is rejected: there the principal value does not exist unless h
/// is continuous, and the pieces mark discontinuities of h.
fn resonant_pole<H>(h: &H, omega: f64, pieces: &[f64], tol: f64) -> Result<(Complex64, f64)>
where
    H: Fn(f64) -> f64,
{
    let opts = QuadOpts::new(abs_floor(h, omega, pieces, tol), tol);
    let mut value = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for w in pieces.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let scale = (b - a).min(a.abs().max(b.abs()));
        let near_edge = (omega - a).abs() <= 1e-12 * scale.max(omega.abs()) || (omega - b).abs() <= 1e-12 * scale.max(omega.abs());
        if near_edge && a > 0.0 && (omega - a).abs() < (omega - b).abs() {
            return Err(invalid("resonance falls on a discontinuity of the integrand"));
        }
        let f = |k: f64| h(k) / (omega - k);
        if omega > a && omega < b {
            let delta = 0.5 * (omega - a).min(b - omega);
            let fold = |u: f64| (h(omega - u) - h(omega + u)) / u;
            let mut fold_pts = vec![0.0];
            fold_pts.extend(geometric_between(delta, 0.0, delta * 1e-3).into_iter().rev());
            fold_pts.push(delta);
            let r = integrate_points(fold, &fold_pts, opts)?;
            value.re += r.value;
            err += r.error;
            let mut left = vec![a];
            left.extend(geometric_between(omega - delta, a, delta).into_iter().rev());
            left.push(omega - delta);
            let r = integrate_points(f, &left, opts)?;
            value.re += r.value;
            err += r.error;
            let mut right = vec![omega + delta];
            right.extend(geometric_between(omega + delta, b, delta));
            right.push(b);
            let r = integrate_points(f, &right, opts)?;
            value.re += r.value;
            err += r.error;
            value.im -= PI * h(omega);
        } else {
            let pts = regular_points(a, b, omega);
            let r = integrate_points(f, &pts, opts)?;
            value.re += r.value;
            err += r.error;
        }
    }
    Ok((value, err))
}

/// Panel points of a pole-free piece, refined geometrically towards the end
/// nearest to the pole and towards k = 0 when the piece starts there.
fn regular_points(a: f64, b: f64, omega: f64) -> Vec<f64> {
    let mut pts = vec![a, b];
    let d = if omega <= a { a - omega } else { omega - b }.max(1e-300);
    if omega <= a {
        pts.extend(geometric_between(a, b, d));
    } else {
        pts.extend(geometric_between(b, a, d));
    }
    if a == 0.0 && b > 0.0 {
        pts.extend(geometric_between(0.0, b, b * 1e-6));
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// The same integral at finite ε > 0.
fn resonant_finite_eps<H>(h: &H, omega: f64, eps: f64, pieces: &[f64], tol: f64) -> Result<(Complex64, f64)>
where
    H: Fn(f64) -> f64,
{
    let opts = QuadOpts::new(abs_floor(h, omega, pieces, tol), tol);
    let mut value = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for w in pieces.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let f = |k: f64| Complex64::new(h(k), 0.0) / Complex64::new(omega - k, eps);
        let mut pts = vec![a, b];
        if omega > a && omega < b {
            pts.push(omega);
            pts.extend(geometric_between(omega, a, eps * 0.25));
            pts.extend(geometric_between(omega, b, eps * 0.25));
        } else {
            pts.extend(regular_points(a, b, omega));
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let r = integrate_points(f, &pts, opts)?;
        value += r.value;
        err += r.error;
    }
    Ok((value, err))
}

/// Resonant integral under the chosen ε treatment; returns (value, error, smallest ε).
fn resonant<H>(h: &H, omega: f64, pieces: &[f64], opts: &ShiftOpts) -> Result<(Complex64, f64, f64)>
where
    H: Fn(f64) -> f64,
{
    match opts.eps_mode {
        EpsMode::Pole => {
            let (v, e) = resonant_pole(h, omega, pieces, opts.tol)?;
            Ok((v, e, 0.0))
        }
        EpsMode::Extrapolate => {
            if opts.eps_steps < 2 || !(opts.eps0_ratio > 0.0) {
                return Err(invalid("ε extrapolation needs at least two ladder steps and a positive ε₀"));
            }
            let eps: Vec<f64> = (0..opts.eps_steps)
                .map(|i| opts.eps0_ratio * omega.abs() * 0.5f64.powi(i as i32))
                .collect();
            let mut re = Vec::with_capacity(eps.len());
            let mut im = Vec::with_capacity(eps.len());
            let mut qerr = 0.0f64;
            for &e in &eps {
                let (v, er) = resonant_finite_eps(h, omega, e, pieces, opts.tol)?;
                re.push(v.re);
                im.push(v.im);
                qerr = qerr.max(er);
            }
            let (r, er) = richardson(&eps, &re)?;
            let (i, ei) = richardson(&eps, &im)?;
            Ok((Complex64::new(r, i), er.max(ei) + qerr, *eps.last().unwrap_or(&0.0)))
        }
    }
}

fn upper_limit(alpha: f64) -> f64 {
    GAUSS_REACH * alpha.sqrt()
}

/// Breakpoints [0, …, upper] with the Gaussian scale √α inserted.
fn gauss_pieces(alpha: f64, extra: &[f64]) -> Vec<f64> {
    let mut p = vec![0.0];
    p.extend(extra.iter().copied().filter(|&x| x > 0.0 && x < upper_limit(alpha)));
    p.push(upper_limit(alpha));
    p.sort_by(f64::total_cmp);
    p.dedup();
    p
}

/// Naive second-order shift with the momentum cutoff K and no counterterm.
pub fn naive_shift(spec: &AtomSpectrum, q: f64, j: usize, cutoff: f64, opts: &ShiftOpts) -> Result<ComplexShift> {
    if !(cutoff > 0.0) {
        return Err(invalid("cutoff K must be positive"));
    }
    let m = spec.mass;
    let (pref, power) = match spec.dim {
        Dim::Three => (2.0 * q * q / (3.0 * PI * m * m), 1),
        Dim::Two => (q * q / (4.0 * PI * m * m), 0),
    };
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut eps_used = 0.0f64;
    for ch in channels(spec, j)? {
        let h = |k: f64| k.powi(power);
        let (v, e, eu) = resonant(&h, ch.omega, &[0.0, cutoff], opts)?;
        total += ch.weight * v;
        err += ch.weight * e;
        eps_used = eps_used.max(eu);
    }
    Ok(ComplexShift {
        e2: pref * total,
        j,
        d: spec.dim,
        alpha: None,
        split: Some(cutoff),
        eps_mode: opts.eps_mode,
        eps_used,
        j_max: spec.len() - 1,
        error_estimate: pref.abs() * err,
        log_alpha_derivative: None,
        sum_rule: sum_rule(spec, j),
    })
}

/// Naive shifts on a cutoff ladder with the divergence fit of Re E2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveScan {
    pub d: Dim,
    pub cutoffs: Vec<f64>,
    pub shifts: Vec<Complex64>,
    /// Fitted coefficient of K (d = 3) or ln K (d = 2).
    pub growth_coefficient: f64,
    /// Large-K prediction: −(2q²/3πm²)Σ|p|² (d = 3) or −(q²/4πm²)Σ|p|² (d = 2).
    pub expected_coefficient: f64,
    pub r_squared: f64,
    /// max − min of Im E2 over the cutoffs above every resonance.
    pub im_spread: f64,
}

/// Scan the naive shift over ascending cutoffs (at least five).
pub fn naive_shift_scan(spec: &AtomSpectrum, q: f64, j: usize, cutoffs: &[f64], opts: &ShiftOpts, exec: Exec) -> Result<NaiveScan> {
    if cutoffs.len() < 5 || cutoffs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("naive scan needs at least five ascending cutoffs"));
    }
    let shifts = exec
        .map(cutoffs, |&k| naive_shift(spec, q, j, k, opts).map(|s| s.e2))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let re: Vec<f64> = shifts.iter().map(|z| z.re).collect();
    let m = spec.mass;
    let wsum: f64 = channels(spec, j)?.iter().map(|c| c.weight).sum();
    let (fit, expected) = match spec.dim {
        Dim::Three => (
            least_squares(cutoffs, &re, &[&|k| k, &|k: f64| k.ln(), &|_| 1.0])?,
            -2.0 * q * q / (3.0 * PI * m * m) * wsum,
        ),
        Dim::Two => (
            least_squares(cutoffs, &re, &[&|k: f64| k.ln(), &|_| 1.0, &|k| 1.0 / k])?,
            -q * q / (4.0 * PI * m * m) * wsum,
        ),
    };
    let wmax = channels(spec, j)?.iter().fold(0.0f64, |a, c| a.max(c.omega));
    let ims: Vec<f64> = cutoffs.iter().zip(&shifts).filter(|(k, _)| **k > wmax).map(|(_, z)| z.im).collect();
    let im_spread = ims.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - ims.iter().cloned().fold(f64::INFINITY, f64::min);
    if q != 0.0 && fit.r_squared < 0.999 {
        return Err(Error::Fit(format!("naive divergence law fit has R² = {:.6}", fit.r_squared)));
    }
    Ok(NaiveScan {
        d: spec.dim,
        cutoffs: cutoffs.to_vec(),
        shifts,
        growth_coefficient: fit.coefficients[0],
        expected_coefficient: expected,
        r_squared: fit.r_squared,
        im_spread: if im_spread.is_finite() { im_spread } else { 0.0 },
    })
}

/// Renormalized d = 3 shift at finite α, with ∂ Re E2/∂ ln α.
pub fn renorm_shift_d3(spec: &AtomSpectrum, q: f64, alpha: f64, j: usize, opts: &ShiftOpts) -> Result<ComplexShift> {
    if spec.dim != Dim::Three {
        return Err(invalid("renorm_shift_d3 needs a three-dimensional spectrum"));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(invalid("alpha must be positive and finite"));
    }
    let m = spec.mass;
    let pref = 2.0 * q * q / (3.0 * PI * m * m);
    let mut total = Complex64::new(0.0, 0.0);
    let mut deriv = 0.0;
    let mut err = 0.0;
    let mut eps_used = 0.0f64;
    let pieces = gauss_pieces(alpha, &[alpha.sqrt()]);
    for ch in channels(spec, j)? {
        let w = ch.omega;
        let h = |k: f64| (-k * k / (2.0 * alpha)).exp() * w;
        let (v, e, eu) = resonant(&h, w, &pieces, opts)?;
        // ∂/∂ln α of e^{−k²/2α} is (k²/2α) e^{−k²/2α}.
        let hd = |k: f64| k * k / (2.0 * alpha) * (-k * k / (2.0 * alpha)).exp() * w;
        let (dv, de) = resonant_pole(&hd, w, &pieces, opts.tol)?;
        total += ch.weight * v;
        deriv += ch.weight * dv.re;
        err += ch.weight * (e + de);
        eps_used = eps_used.max(eu);
    }
    Ok(ComplexShift {
        e2: pref * total,
        j,
        d: Dim::Three,
        alpha: Some(alpha),
        split: None,
        eps_mode: opts.eps_mode,
        eps_used,
        j_max: spec.len() - 1,
        error_estimate: pref * err,
        log_alpha_derivative: Some(pref * deriv),
        sum_rule: sum_rule(spec, j),
    })
}

fn d2_pieces(alpha: f64, split: f64) -> Vec<f64> {
    gauss_pieces(alpha, &[split, alpha.sqrt()])
}

fn d2_integrand(alpha: f64, split: f64, omega: f64) -> impl Fn(f64) -> f64 {
    move |k: f64| {
        let g = (-k * k / (2.0 * alpha)).exp();
        if k < split {
            g
        } else {
            g * omega / k
        }
    }
}

/// Renormalized d = 2 shift at finite α (the pre-limit form with e^{−k²/2α}).
pub fn renorm_shift_d2(spec: &AtomSpectrum, ctx: &KernelContext, q: f64, j: usize, opts: &ShiftOpts) -> Result<ComplexShift> {
    if spec.dim != Dim::Two {
        return Err(invalid("renorm_shift_d2 needs a two-dimensional spectrum"));
    }
    let m = spec.mass;
    let pref = q * q / (4.0 * PI * m * m);
    let split = opts.split_scale * split_momentum(ctx.alpha0);
    let pieces = d2_pieces(ctx.alpha, split);
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut eps_used = 0.0f64;
    for ch in channels(spec, j)? {
        let h = d2_integrand(ctx.alpha, split, ch.omega);
        let (v, e, eu) = resonant(&h, ch.omega, &pieces, opts)?;
        total += ch.weight * v;
        err += ch.weight * e;
        eps_used = eps_used.max(eu);
    }
    Ok(ComplexShift {
        e2: pref * total,
        j,
        d: Dim::Two,
        alpha: Some(ctx.alpha),
        split: Some(split),
        eps_mode: opts.eps_mode,
        eps_used,
        j_max: spec.len() - 1,
        error_estimate: pref * err,
        log_alpha_derivative: None,
        sum_rule: sum_rule(spec, j),
    })
}

/// The α → ∞ limit of the d = 2 shift in closed form:
/// (q²/4πm²) Σ|p|² [ln(|ω|/𝒦) − iπ θ(ω)].
pub fn renorm_shift_d2_limit(spec: &AtomSpectrum, alpha0: f64, q: f64, j: usize, split_scale: f64) -> Result<ComplexShift> {
    if spec.dim != Dim::Two {
        return Err(invalid("renorm_shift_d2_limit needs a two-dimensional spectrum"));
    }
    let m = spec.mass;
    let pref = q * q / (4.0 * PI * m * m);
    let split = split_scale * split_momentum(alpha0);
    let mut total = Complex64::new(0.0, 0.0);
    for ch in channels(spec, j)? {
        if (ch.omega - split).abs() <= 1e-12 * split {
            return Err(invalid("resonance falls on the momentum split"));
        }
        let im = if ch.omega > 0.0 { -PI } else { 0.0 };
        total += ch.weight * Complex64::new((ch.omega.abs() / split).ln(), im);
    }
    Ok(ComplexShift {
        e2: pref * total,
        j,
        d: Dim::Two,
        alpha: None,
        split: Some(split),
        eps_mode: EpsMode::Pole,
        eps_used: 0.0,
        j_max: spec.len() - 1,
        error_estimate: 0.0,
        log_alpha_derivative: None,
        sum_rule: sum_rule(spec, j),
    })
}

/// d = 3 shifts over a ladder of α with the ln α fit of Re E2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogAlphaScan {
    pub alphas: Vec<f64>,
    pub shifts: Vec<Complex64>,
    /// Fitted slope of Re E2 against ln α.
    pub slope: f64,
    /// Large-α prediction −(1/3π)(q²/m²) Σ|p|² ω.
    pub expected_slope: f64,
    pub r_squared: f64,
    /// (max − min)/max |Im E2| over the ladder; zero when Im E2 vanishes.
    pub im_relative_spread: f64,
}

/// Scan [`renorm_shift_d3`] over α (at least five values).
pub fn renorm_shift_d3_scan(spec: &AtomSpectrum, q: f64, j: usize, alphas: &[f64], opts: &ShiftOpts, exec: Exec) -> Result<LogAlphaScan> {
    if alphas.len() < 5 {
        return Err(invalid("the ln α scan needs at least five α values"));
    }
    let shifts = exec
        .map(alphas, |&a| renorm_shift_d3(spec, q, a, j, opts).map(|s| s.e2))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let la: Vec<f64> = alphas.iter().map(|a| a.ln()).collect();
    let re: Vec<f64> = shifts.iter().map(|z| z.re).collect();
    let fit = least_squares(&la, &re, &[&|x| x, &|_| 1.0])?;
    let m = spec.mass;
    let expected = -q * q / (3.0 * PI * m * m) * channels(spec, j)?.iter().map(|c| c.weight * c.omega).sum::<f64>();
    let ims: Vec<f64> = shifts.iter().map(|z| z.im).collect();
    let hi = ims.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = ims.iter().cloned().fold(f64::INFINITY, f64::min);
    let big = hi.abs().max(lo.abs());
    Ok(LogAlphaScan {
        alphas: alphas.to_vec(),
        shifts,
        slope: fit.coefficients[0],
        expected_slope: expected,
        r_squared: fit.r_squared,
        im_relative_spread: if big > 0.0 { (hi - lo) / big } else { 0.0 },
    })
}

/// One row of the cancellation table: the three lines of the renormalized
/// second-order energy before the divergent pieces are dropped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CancellationRow {
    pub alpha: f64,
    /// Regular level-sum integral (first line).
    pub regular: Complex64,
    /// Subtraction line, −(q²/4π²m²) ∫χ k⁻² e^{−k²/2α} Σ|ε·p|² d^dk.
    pub subtraction: f64,
    /// Counterterm line from the O(q²) mass counterterm.
    pub counterterm: f64,
    /// subtraction + counterterm.
    pub residual: f64,
    /// Sum of the three lines.
    pub total: Complex64,
}

/// Cancellation table over α and, for d = 2, the fitted decay exponent of
/// the residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CancellationReport {
    pub d: Dim,
    pub j: usize,
    pub rows: Vec<CancellationRow>,
    /// max |residual|/|counterterm| over the rows.
    pub max_relative_residual: f64,
    /// Power-law exponent of |residual| versus α (d = 2 only).
    pub residual_exponent: Option<f64>,
}

/// ∫_𝒦^∞ e^{−k²/2α}/k dk by quadrature.
fn log_tail(alpha: f64, split: f64, tol: f64) -> Result<f64> {
    let top = upper_limit(alpha).max(2.0 * split);
    let mut pts = vec![split];
    pts.extend(geometric_between(split, top, split));
    pts.push(top);
    Ok(integrate_points(|k: f64| (-k * k / (2.0 * alpha)).exp() / k, &pts, QuadOpts::new(0.0, tol))?.value)
}

/// Emit the three lines of the second-order energy per α.
///
/// d = 3: subtraction = −(q²/4π²m²)(8π/3)√(πα/2)⟨p²⟩ and counterterm =
/// (2/3)(q²/m²)√(α/2π)⟨p²⟩ cancel identically. d = 2: subtraction =
/// −(q²/4πm²)⟨p²⟩∫_𝒦^∞ e^{−k²/2α}/k dk and counterterm =
/// (q²/8πm²) ln(α/α₀)⟨p²⟩ cancel up to O(α⁻¹).
pub fn cancellation_report(
    spec: &AtomSpectrum,
    ctx: &KernelContext,
    q: f64,
    j: usize,
    alphas: &[f64],
    opts: &ShiftOpts,
    exec: Exec,
) -> Result<CancellationReport> {
    if alphas.is_empty() {
        return Err(invalid("cancellation report needs at least one α"));
    }
    let m = spec.mass;
    let p2 = spec.p2_diag[j];
    let rows = exec
        .map(alphas, |&alpha| -> Result<CancellationRow> {
            let c = ctx.with_alpha(alpha)?;
            let (regular, subtraction, counterterm) = match spec.dim {
                Dim::Three => {
                    let r = renorm_shift_d3(spec, q, alpha, j, opts)?.e2;
                    let sub = -q * q / (4.0 * PI * PI * m * m) * (8.0 * PI / 3.0) * (PI * alpha / 2.0).sqrt() * p2;
                    let ct = 2.0 / 3.0 * q * q / (m * m) * (alpha / (2.0 * PI)).sqrt() * p2;
                    (r, sub, ct)
                }
                Dim::Two => {
                    let r = renorm_shift_d2(spec, &c, q, j, opts)?;
                    let split = r.split.unwrap_or(0.0);
                    let sub = -q * q / (4.0 * PI * m * m) * p2 * log_tail(alpha, split, opts.tol)?;
                    let ct = q * q / (8.0 * PI * m * m) * (alpha / c.alpha0).ln() * p2;
                    (r.e2, sub, ct)
                }
            };
            Ok(CancellationRow {
                alpha,
                regular,
                subtraction,
                counterterm,
                residual: subtraction + counterterm,
                total: regular + subtraction + counterterm,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let max_relative_residual = rows
        .iter()
        .map(|r| if r.counterterm != 0.0 { (r.residual / r.counterterm).abs() } else { r.residual.abs() })
        .fold(0.0, f64::max);
    let residual_exponent = match spec.dim {
        Dim::Two if rows.len() >= 2 && q != 0.0 => {
            let xs: Vec<f64> = rows.iter().map(|r| r.alpha).collect();
            let ys: Vec<f64> = rows.iter().map(|r| r.residual).collect();
            Some(power_law(&xs, &ys)?.0)
        }
        _ => None,
    };
    Ok(CancellationReport {
        d: spec.dim,
        j,
        rows,
        max_relative_residual,
        residual_exponent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atom::{solve_spectrum, PotentialSpec};

    fn two_level(omega: f64) -> impl Fn(f64) -> f64 {
        move |k: f64| (-k * k / 2e4).exp() * omega
    }

    #[test]
    fn pole_path_matches_closed_form_log() {
        // ∫₀^K 1/(ω − k + i0) dk = −ln|(ω − K)/ω| − iπ.
        let (w, k) = (0.3, 5.0);
        let (v, _) = resonant_pole(&|_| 1.0, w, &[0.0, k], 1e-13).unwrap();
        assert!((v.re + ((w - k) / w).abs().ln()).abs() < 1e-12, "{v}");
        assert!((v.im + PI).abs() < 1e-15);
    }

    #[test]
    fn extrapolation_agrees_with_pole_path() {
        let h = two_level(0.2);
        let pieces = [0.0, 1.0, 100.0, 1200.0];
        let (a, _) = resonant_pole(&h, 0.2, &pieces, 1e-13).unwrap();
        let opts = ShiftOpts { eps_mode: EpsMode::Extrapolate, ..Default::default() };
        let (b, _, _) = resonant(&h, 0.2, &pieces, &opts).unwrap();
        assert!((a - b).norm() < 1e-9 * a.norm(), "{a} {b}");
    }

    #[test]
    fn no_pole_below_the_resonance() {
        let (v, _) = resonant_pole(&|_| 1.0, -0.5, &[0.0, 3.0], 1e-13).unwrap();
        assert_eq!(v.im, 0.0);
        assert!((v.re - (-(3.5f64 / 0.5).ln())).abs() < 1e-12);
    }

    #[test]
    fn rejects_pole_on_discontinuity() {
        let h = d2_integrand(1e4, 0.5, 0.5);
        assert!(resonant_pole(&h, 0.5, &[0.0, 0.5, 1200.0], 1e-12).is_err());
    }

    #[test]
    fn ground_level_is_stable() {
        let spec = solve_spectrum(&PotentialSpec::harmonic(Dim::Three, 1.0, 1e-3), 9).unwrap();
        let s = renorm_shift_d3(&spec, 0.3, 1e6, 0, &ShiftOpts::default()).unwrap();
        assert_eq!(s.e2.im, 0.0);
        assert!(s.e2.re > 0.0);
    }
}
