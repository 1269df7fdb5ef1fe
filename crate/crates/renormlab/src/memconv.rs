//! The logarithmic-memory convolution
//!
//! I_t = ∫_{−∞}^{t} f(t′) ln((t − t′)/t_c) dt′
//!
//! evaluated in the time domain by product integration on a sampled history,
//! and in the frequency domain from the one-sided spectrum
//! f̃(Ω) = (1/2π)∫_{−∞}^{t} f(t′) e^{−iΩ(t−t′)} dt′ via
//!
//! I_t = lim_{ε→0⁺} ∫₀^∞ dΩ f̃(Ω) [ln((Ω+iε)t_c) + γ − iπ/2] / [i(Ω+iε)] + c.c.
//!
//! The frequency route requires f to be Fourier transformable, f̃ to be
//! expandable as f̃(0) + Ω f̃′(0) + O(Ω²) at low frequency, and f̃ to fall off
//! at least as Ω⁻¹. [`admissibility_check_spectrum`] and
//! [`admissibility_check_samples`] test these three conditions.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fit::{least_squares, power_law};
use crate::model::Charge;
use crate::motion::Motion;
use crate::quad::{gk15, integrate_oscillatory, integrate_points, QuadOpts};
use crate::special::EULER_GAMMA;

/// ∫₀² L_j(u) ln u du for the quadratic Lagrange basis on nodes 0, 1, 2.
fn singular_pair_weights() -> [f64; 3] {
    let l2 = std::f64::consts::LN_2;
    let m0 = 2.0 * (l2 - 1.0);
    let m1 = 2.0 * l2 - 1.0;
    let m2 = 8.0 / 3.0 * (l2 - 1.0 / 3.0);
    [(m2 - 3.0 * m1 + 2.0 * m0) / 2.0, 2.0 * m1 - m2, (m2 - m1) / 2.0]
}

/// ∫_a^b L_j(u) ln(shift + u) du for the quadratic basis on nodes 0, 1, 2.
fn smooth_weights(shift: f64, a: f64, b: f64) -> [f64; 3] {
    let basis: [fn(f64) -> f64; 3] = [
        |u| 0.5 * (u - 1.0) * (u - 2.0),
        |u| u * (2.0 - u),
        |u| 0.5 * u * (u - 1.0),
    ];
    let mut w = [0.0; 3];
    for (j, l) in basis.iter().enumerate() {
        w[j] = gk15(&|u: f64| l(u) * (shift + u).ln(), a, b).0;
    }
    w
}

/// Product-integration weights for the log kernel on a uniform grid.
///
/// The history is split into panel pairs counted backwards from t; on each
/// pair f is replaced by its quadratic interpolant and the logarithm is
/// integrated exactly (in closed form on the pair touching τ = 0, by a
/// 15-point Kronrod rule elsewhere where ln is smooth).
#[derive(Debug, Clone)]
pub struct LogConvolver {
    dt: f64,
    t_c: f64,
    log_base: f64,
    /// ∫₀² L_j(u) ln(2k + u) du for pair k.
    pairs: Vec<[f64; 3]>,
}

/// Value of a windowed convolution with a bound on the neglected history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvResult {
    pub value: f64,
    /// Conservative bound on |∫ f ln| over the history before the window.
    pub tail_bound: f64,
}

impl LogConvolver {
    /// Convolver for step `dt` and reference time `t_c`.
    pub fn new(dt: f64, t_c: f64) -> Result<Self> {
        if !(dt > 0.0 && t_c > 0.0) {
            return Err(invalid("convolution needs dt > 0 and t_c > 0"));
        }
        Ok(Self {
            dt,
            t_c,
            log_base: (dt / t_c).ln(),
            pairs: vec![singular_pair_weights()],
        })
    }

    /// Time step.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Reference time.
    pub fn t_c(&self) -> f64 {
        self.t_c
    }

    /// Precompute pair weights for histories of up to `n_samples` samples.
    pub fn reserve(&mut self, n_samples: usize) {
        let need = n_samples / 2 + 1;
        while self.pairs.len() < need {
            let k = self.pairs.len();
            self.pairs.push(smooth_weights(2.0 * k as f64, 0.0, 2.0));
        }
    }

    /// I_t over the sampled window, samples ordered oldest first and the
    /// last sample taken at t. Grows the weight cache as needed.
    pub fn convolve(&mut self, samples: &[f64]) -> ConvResult {
        self.reserve(samples.len());
        self.convolve_reserved(samples)
            .expect("weights were reserved for this history")
    }

    /// As [`LogConvolver::convolve`] but without touching the cache; fails
    /// when the history is longer than the reserved weights.
    pub fn convolve_reserved(&self, samples: &[f64]) -> Result<ConvResult> {
        let n_panels = samples.len().saturating_sub(1);
        if n_panels == 0 {
            return Ok(ConvResult {
                value: 0.0,
                tail_bound: 0.0,
            });
        }
        if n_panels / 2 >= self.pairs.len() {
            return Err(invalid(format!(
                "history of {} samples exceeds the reserved weights",
                samples.len()
            )));
        }
        let h = self.dt;
        let g = |k: usize| samples[n_panels - k];
        let mut acc = 0.0;
        if n_panels == 1 {
            acc += g(0) * (0.5 * self.log_base - 0.75) + g(1) * (0.5 * self.log_base - 0.25);
        } else {
            let full = n_panels / 2;
            let base = [1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0];
            for (k, w) in self.pairs.iter().take(full).enumerate() {
                let i = 2 * k;
                for j in 0..3 {
                    acc += g(i + j) * (base[j] * self.log_base + w[j]);
                }
            }
            if n_panels % 2 == 1 {
                // Last panel [(N−1)h, Nh] with the quadratic through N−2, N−1, N.
                let shift = (n_panels - 2) as f64;
                let w = smooth_weights(shift, 1.0, 2.0);
                let base = [-1.0 / 12.0, 2.0 / 3.0, 5.0 / 12.0];
                for j in 0..3 {
                    acc += g(n_panels - 2 + j) * (base[j] * self.log_base + w[j]);
                }
            }
        }
        Ok(ConvResult {
            value: h * acc,
            tail_bound: self.tail_bound(samples),
        })
    }

    fn tail_bound(&self, samples: &[f64]) -> f64 {
        let n = samples.len();
        let m = (n / 100).max(2).min(n);
        let env = samples[..m].iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let span = (n - 1) as f64 * self.dt;
        env * span * (2.0 * span / self.t_c).ln().abs().max(1.0)
    }
}

/// One-shot time-domain convolution of a history ending at t. With
/// `tail_tol` set, fails when the neglected history may exceed it.
pub fn conv_time(samples: &[f64], dt: f64, t_c: f64, tail_tol: Option<f64>) -> Result<ConvResult> {
    let mut conv = LogConvolver::new(dt, t_c)?;
    let r = conv.convolve(samples);
    if let Some(tol) = tail_tol {
        if r.tail_bound > tol {
            return Err(Error::InsufficientHistory(format!(
                "windowed tail bound {:.3e} exceeds {tol:.3e}",
                r.tail_bound
            )));
        }
    }
    Ok(r)
}

type SpectrumFn = dyn Fn(f64) -> Complex64 + Send + Sync;

/// One-sided spectrum f̃(Ω), Ω ≥ 0, of a real signal.
#[derive(Clone)]
pub struct SignalSpectrum {
    f: Arc<SpectrumFn>,
    /// f̃(0), real for a real signal.
    pub f0: f64,
    /// Right derivative f̃′(0⁺) = iβ + ρ.
    pub f0_prime: Complex64,
    /// Frequencies where f̃ varies quickly (resonances), used as panel breaks.
    pub breakpoints: Vec<f64>,
    /// f̃ vanishes above this frequency when set.
    pub support: Option<f64>,
}

impl std::fmt::Debug for SignalSpectrum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SignalSpectrum")
            .field("f0", &self.f0)
            .field("f0_prime", &self.f0_prime)
            .field("breakpoints", &self.breakpoints)
            .field("support", &self.support)
            .finish()
    }
}

impl SignalSpectrum {
    /// Spectrum with explicitly known low-frequency coefficients.
    pub fn new(
        f: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
        f0: f64,
        f0_prime: Complex64,
        breakpoints: Vec<f64>,
    ) -> Self {
        Self {
            f: Arc::new(f),
            f0,
            f0_prime,
            breakpoints,
            support: None,
        }
    }

    /// Spectrum whose low-frequency coefficients are estimated by one-sided
    /// differences on the scale `omega_scale`·10⁻⁴.
    pub fn from_fn(f: impl Fn(f64) -> Complex64 + Send + Sync + 'static, omega_scale: f64, breakpoints: Vec<f64>) -> Self {
        let h = 1e-4 * omega_scale;
        let (a, b, c) = (f(0.0), f(h), f(2.0 * h));
        let d = (-3.0 * a + 4.0 * b - c) / (2.0 * h);
        Self::new(f, a.re, d, breakpoints)
    }

    /// f̃ ≡ f0 on [0, cut) and zero above.
    pub fn constant_below(f0: f64, cut: f64) -> Self {
        let mut s = Self::new(move |w| if w < cut { Complex64::new(f0, 0.0) } else { Complex64::new(0.0, 0.0) }, f0, Complex64::new(0.0, 0.0), vec![]);
        s.support = Some(cut);
        s
    }

    /// Spectrum of f(t − τ) = cos(Ω₀τ) e^{−aτ} for τ ≥ 0:
    /// f̃ = (1/4π)[1/(a + i(Ω − Ω₀)) + 1/(a + i(Ω + Ω₀))].
    pub fn damped_cosine(omega0: f64, a: f64) -> Self {
        let f = move |w: f64| {
            let one = Complex64::new(1.0, 0.0);
            (one / Complex64::new(a, w - omega0) + one / Complex64::new(a, w + omega0)) / (4.0 * PI)
        };
        let f0 = (f(0.0)).re;
        // d/dΩ of 1/(a + i(Ω ∓ Ω₀)) is −i/(a + i(Ω ∓ Ω₀))².
        let s1 = Complex64::new(a, -omega0);
        let s2 = Complex64::new(a, omega0);
        let fp = Complex64::new(0.0, -1.0) * (s1.powi(-2) + s2.powi(-2)) / (4.0 * PI);
        let mut bp = vec![omega0];
        for k in [1.0, 3.0, 10.0, 30.0] {
            bp.push(omega0 + k * a);
            if omega0 - k * a > 0.0 {
                bp.push(omega0 - k * a);
            }
        }
        Self::new(f, f0, fp, bp)
    }

    /// Spectrum of a uniformly sampled history (oldest first, last sample at
    /// t) with f interpolated linearly between samples.
    pub fn from_samples(samples: &[f64], dt: f64) -> Result<Self> {
        if samples.len() < 2 || !(dt > 0.0) {
            return Err(invalid("sampled spectrum needs two samples and dt > 0"));
        }
        let g: Arc<Vec<f64>> = Arc::new(samples.iter().rev().copied().collect());
        let g2 = g.clone();
        let f = move |w: f64| sampled_transform(&g2, dt, w);
        // Exact low-frequency moments of the linear interpolant.
        let m0 = trapezoid_moment(&g, dt, 0);
        let m1 = trapezoid_moment(&g, dt, 1);
        let span = (g.len() - 1) as f64 * dt;
        Ok(Self::new(
            f,
            m0 / (2.0 * PI),
            Complex64::new(0.0, -m1 / (2.0 * PI)),
            vec![PI / span],
        ))
    }

    /// f̃(Ω) for Ω ≥ 0.
    pub fn eval(&self, omega: f64) -> Complex64 {
        match self.support {
            Some(cut) if omega >= cut => Complex64::new(0.0, 0.0),
            _ => (self.f)(omega),
        }
    }
}

/// ∫₀^T τⁿ g(τ) dτ for the linear interpolant of g (n = 0, 1).
fn trapezoid_moment(g: &[f64], dt: f64, n: usize) -> f64 {
    let mut s = 0.0;
    for k in 0..g.len() - 1 {
        let (a, b) = (g[k], g[k + 1]);
        let t0 = k as f64 * dt;
        s += match n {
            0 => 0.5 * dt * (a + b),
            _ => dt * (a * (t0 / 2.0 + dt / 6.0) + b * (t0 / 2.0 + dt / 3.0)),
        };
    }
    s
}

/// (1/2π)∫₀^T g(τ) e^{−iΩτ} dτ for the piecewise-linear interpolant.
fn sampled_transform(g: &[f64], dt: f64, w: f64) -> Complex64 {
    let th = w * dt;
    // Per-panel weights for the left and right node values:
    // ∫₀¹ (1−s) e^{−iθs} ds and ∫₀¹ s e^{−iθs} ds.
    let (wl, wr) = if th.abs() < 1e-3 {
        let i = Complex64::new(0.0, 1.0);
        (
            Complex64::new(0.5, 0.0) - i * th / 6.0 - th * th / 24.0,
            Complex64::new(0.5, 0.0) - i * th / 3.0 - th * th / 8.0,
        )
    } else {
        let e = Complex64::new(0.0, -th).exp();
        let i = Complex64::new(0.0, 1.0);
        let e0 = (Complex64::new(1.0, 0.0) - e) / (i * th);
        let e1 = (e0 - e) / (i * th);
        (e0 - e1, e1)
    };
    let step = Complex64::new(0.0, -th).exp();
    let mut phase = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..g.len() - 1 {
        acc += phase * (wl * g[k] + wr * g[k + 1]);
        phase *= step;
        if k % 64 == 63 {
            phase = Complex64::from_polar(1.0, -th * (k + 1) as f64);
        }
    }
    acc * dt / (2.0 * PI)
}

/// The braces of the frequency-domain formula at ε = 0:
/// B(Ω) = [ln(Ω t_c) + γ − iπ/2] / (iΩ).
fn brace(w: f64, t_c: f64) -> Complex64 {
    Complex64::new((w * t_c).ln() + EULER_GAMMA, -0.5 * PI) / Complex64::new(0.0, w)
}

/// Frequency-domain evaluation of I_t with auxiliary split frequency Ω_cut.
///
/// On [0, Ω_cut] the constant and linear parts of f̃ are integrated in closed
/// form, −πf̃(0)(ln(Ω_cut t_c) + γ) and 2βΩ_cut(ln(Ω_cut t_c) − 1 + γ) − πρΩ_cut
/// for f̃′(0) = iβ + ρ, and the O(Ω²) remainder numerically. Above Ω_cut the
/// ε → 0 limit is taken inside the integrand.
pub fn conv_freq(spec: &SignalSpectrum, t_c: f64, omega_cut: f64) -> Result<f64> {
    if !(t_c > 0.0 && omega_cut > 0.0) {
        return Err(invalid("conv_freq needs t_c > 0 and omega_cut > 0"));
    }
    if !spec.f0.is_finite() || !spec.f0_prime.re.is_finite() || !spec.f0_prime.im.is_finite() {
        return Err(Error::Admissibility {
            condition: "low-frequency expansion".into(),
            detail: "f̃(0) or f̃′(0) is not finite".into(),
        });
    }
    if spec.support.is_none_or(|s| s > omega_cut) {
        let fall = falloff_exponent(|w| spec.eval(w), 1e2 * omega_cut.max(1.0), 1e5 * omega_cut.max(1.0));
        if !(fall.0 <= -1.0 + FALLOFF_SLACK) {
            return Err(Error::Admissibility {
                condition: "high-frequency falloff".into(),
                detail: format!("|f̃| decays as Ω^{:.3}, slower than Ω⁻¹", fall.0),
            });
        }
    }
    let lc = (omega_cut * t_c).ln();
    let beta = spec.f0_prime.im;
    let rho = spec.f0_prime.re;
    let closed = -PI * spec.f0 * (lc + EULER_GAMMA) + 2.0 * beta * omega_cut * (lc - 1.0 + EULER_GAMMA) - PI * rho * omega_cut;

    let opts = QuadOpts::new(1e-15 * (1.0 + spec.f0.abs()), 1e-13);
    let f0 = spec.f0;
    let fp = spec.f0_prime;
    let remainder = |w: f64| {
        let r = spec.eval(w) - f0 - fp * w;
        2.0 * (r * brace(w, t_c)).re
    };
    let mut pts = vec![0.0, omega_cut];
    pts.extend(spec.breakpoints.iter().copied().filter(|&b| b > 0.0 && b < omega_cut));
    if let Some(s) = spec.support {
        if s > 0.0 && s < omega_cut {
            pts.push(s);
        }
    }
    pts.sort_by(f64::total_cmp);
    let low = integrate_points(remainder, &pts, opts)?.value;

    let high = match spec.support {
        Some(s) if s <= omega_cut => 0.0,
        _ => {
            // Ω = Ω_cut/u maps [Ω_cut, ∞) onto (0, 1].
            let upper = |u: f64| {
                let w = omega_cut / u;
                2.0 * (spec.eval(w) * brace(w, t_c)).re * omega_cut / (u * u)
            };
            let mut up = vec![0.0, 1.0];
            up.extend(spec.breakpoints.iter().filter(|&&b| b > omega_cut).map(|b| omega_cut / b));
            if let Some(s) = spec.support {
                up.push(omega_cut / s);
            }
            // Geometric breaks resolve the logarithmic behavior near u = 0.
            let mut u = 0.5;
            while u > 1e-12 {
                up.push(u);
                u *= 0.25;
            }
            up.sort_by(f64::total_cmp);
            up.dedup();
            integrate_points(upper, &up, opts)?.value
        }
    };
    Ok(closed + low + high)
}

/// χ_ν(Ω) = (1/2π)∫_{−∞}^{t} q_{t′} x^{(ν)}(t′) e^{−iΩ(t−t′)} dt′ per component.
///
/// The history starts at `t_start`; `max_frequency` bounds the frequencies
/// present in the motion and sets the panel width.
pub fn chi_moment(
    motion: &dyn Motion,
    charge: &Charge,
    nu: usize,
    omega: f64,
    t: f64,
    t_start: f64,
    max_frequency: f64,
) -> Result<Vec<Complex64>> {
    if nu == 0 || !(t > t_start) {
        return Err(invalid("chi moments need nu >= 1 and t > t_start"));
    }
    let half = PI / (omega.abs() + max_frequency.abs()).max(1e-12);
    (0..motion.dim())
        .map(|c| {
            let f = |tp: f64| {
                Complex64::from_polar(charge.at(tp) * motion.deriv(nu, tp, c), -omega * (t - tp)) / (2.0 * PI)
            };
            Ok(integrate_oscillatory(f, t_start, t, half, &[], QuadOpts::new(1e-16, 1e-12))?.value)
        })
        .collect()
}

/// χ_ν, χ_{ν−1} and the residual of the recursion
/// χ_ν = (q_t/2π) x^{(ν−1)}(t) − iΩ χ_{ν−1}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiReport {
    pub nu: usize,
    pub omega: f64,
    pub chi: Vec<Complex64>,
    pub chi_prev: Vec<Complex64>,
    /// (q_t/2π) x^{(ν−1)}(t).
    pub boundary: Vec<f64>,
    /// max_c |χ_ν − boundary + iΩχ_{ν−1}| relative to max(|χ_ν|, |boundary|).
    pub residual: f64,
}

/// Evaluate χ_ν and χ_{ν−1} by quadrature and the recursion residual.
pub fn chi_moments(
    motion: &dyn Motion,
    charge: &Charge,
    nu: usize,
    omega: f64,
    t: f64,
    t_start: f64,
    max_frequency: f64,
) -> Result<ChiReport> {
    if nu < 2 {
        return Err(invalid("the recursion needs nu >= 2"));
    }
    let chi = chi_moment(motion, charge, nu, omega, t, t_start, max_frequency)?;
    let chi_prev = chi_moment(motion, charge, nu - 1, omega, t, t_start, max_frequency)?;
    let qt = charge.at(t);
    let boundary: Vec<f64> = (0..motion.dim())
        .map(|c| qt / (2.0 * PI) * motion.deriv(nu - 1, t, c))
        .collect();
    let mut res = 0.0f64;
    let mut scale = 0.0f64;
    for c in 0..motion.dim() {
        let r = chi[c] - boundary[c] + Complex64::new(0.0, omega) * chi_prev[c];
        res = res.max(r.norm());
        scale = scale.max(chi[c].norm()).max(boundary[c].abs());
    }
    Ok(ChiReport {
        nu,
        omega,
        chi,
        chi_prev,
        boundary,
        residual: if scale > 0.0 { res / scale } else { res },
    })
}

/// Pass/fail outcome of one admissibility condition with its evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub pass: bool,
    /// The measured quantity the verdict rests on.
    pub measure: f64,
    pub evidence: String,
}

/// The three admissibility conditions of the frequency-domain formula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    /// Fourier transformability.
    pub cond1: ConditionReport,
    /// Low-frequency power-series expansion.
    pub cond3: ConditionReport,
    /// Falloff at least as fast as Ω⁻¹.
    pub cond4: ConditionReport,
    /// Fitted f̃(0).
    pub f0: Complex64,
    /// Fitted f̃′(0).
    pub f0_prime: Complex64,
    /// Fitted exponent p of |f̃| ~ Ωᵖ at high frequency.
    pub falloff_exponent: f64,
}

impl AdmissibilityReport {
    /// True when all three conditions pass.
    pub fn all_pass(&self) -> bool {
        self.cond1.pass && self.cond3.pass && self.cond4.pass
    }

    /// Name of the first failing condition.
    pub fn first_failure(&self) -> Option<&'static str> {
        if !self.cond1.pass {
            Some("Fourier transformability")
        } else if !self.cond3.pass {
            Some("low-frequency expansion")
        } else if !self.cond4.pass {
            Some("high-frequency falloff")
        } else {
            None
        }
    }
}

/// Slack on the falloff exponent, absorbing fit noise.
const FALLOFF_SLACK: f64 = 0.05;

fn falloff_exponent(f: impl Fn(f64) -> Complex64, lo: f64, hi: f64) -> (f64, f64) {
    let n = 24;
    let ws: Vec<f64> = (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect();
    let ys: Vec<f64> = ws.iter().map(|&w| f(w).norm()).collect();
    if ys.iter().all(|&y| y == 0.0) {
        return (f64::NEG_INFINITY, 1.0);
    }
    if ys.iter().any(|&y| y == 0.0 || !y.is_finite()) {
        return (f64::NAN, 0.0);
    }
    match power_law(&ws, &ys) {
        Ok((p, _, r2)) => (p, r2),
        Err(_) => (f64::NAN, 0.0),
    }
}

fn low_frequency_fit(f: &dyn Fn(f64) -> Complex64, scale: f64) -> (Complex64, Complex64, f64) {
    let ws: Vec<f64> = (0..12).map(|i| scale * 1e-4 * 10f64.powf(i as f64 * 2.0 / 11.0)).collect();
    let vals: Vec<Complex64> = ws.iter().map(|&w| f(w)).collect();
    let basis: [&dyn Fn(f64) -> f64; 3] = [&|_| 1.0, &|w| w, &|w| w * w];
    let re: Vec<f64> = vals.iter().map(|v| v.re).collect();
    let im: Vec<f64> = vals.iter().map(|v| v.im).collect();
    let (fr, fi) = match (least_squares(&ws, &re, &basis), least_squares(&ws, &im, &basis)) {
        (Ok(a), Ok(b)) => (a, b),
        _ => return (Complex64::new(f64::NAN, 0.0), Complex64::new(f64::NAN, 0.0), f64::INFINITY),
    };
    let peak = vals.iter().fold(0.0f64, |a, v| a.max(v.norm())).max(f64::MIN_POSITIVE);
    let rms = (fr.rms_residual.powi(2) + fi.rms_residual.powi(2)).sqrt() / peak;
    (
        Complex64::new(fr.coefficients[0], fi.coefficients[0]),
        Complex64::new(fr.coefficients[1], fi.coefficients[1]),
        rms,
    )
}

fn spectral_conditions(f: &dyn Fn(f64) -> Complex64, low_scale: f64, hi_lo: f64, hi_hi: f64) -> (ConditionReport, ConditionReport, Complex64, Complex64, f64) {
    let (f0, fp, rms) = low_frequency_fit(f, low_scale);
    let real_f0 = f0.im.abs() <= 1e-6 * f0.norm().max(fp.norm() * low_scale).max(f64::MIN_POSITIVE);
    let cond3 = ConditionReport {
        pass: rms.is_finite() && rms < 1e-6 && real_f0,
        measure: rms,
        evidence: format!(
            "quadratic fit on [{:.3e}, {:.3e}]: relative rms {rms:.3e}, Im f̃(0) = {:.3e}",
            low_scale * 1e-4,
            low_scale * 1e-2,
            f0.im
        ),
    };
    let (p, r2) = falloff_exponent(f, hi_lo, hi_hi);
    let cond4 = ConditionReport {
        pass: p <= -1.0 + FALLOFF_SLACK,
        measure: p,
        evidence: format!("|f̃| ~ Ω^{p:.4} on [{hi_lo:.3e}, {hi_hi:.3e}], R² = {r2:.6}"),
    };
    (cond3, cond4, f0, fp, p)
}

/// Check an analytically given spectrum. `omega_scale` is the characteristic
/// frequency of the signal: the low-frequency fit uses [10⁻⁴, 10⁻²]·scale
/// and the falloff fit [10³, 10⁵]·scale.
pub fn admissibility_check_spectrum(spec: &SignalSpectrum, omega_scale: f64) -> AdmissibilityReport {
    let f = |w: f64| spec.eval(w);
    let probe: Vec<f64> = (0..40).map(|i| omega_scale * 10f64.powf(-6.0 + 0.3 * i as f64)).collect();
    let finite = probe.iter().all(|&w| {
        let v = f(w);
        v.re.is_finite() && v.im.is_finite()
    });
    let cond1 = ConditionReport {
        pass: finite,
        measure: if finite { 0.0 } else { 1.0 },
        evidence: format!("f̃ finite on [{:.3e}, {:.3e}]: {finite}", probe[0], probe[39]),
    };
    let (cond3, cond4, f0, fp, p) = spectral_conditions(&f, omega_scale, 1e3 * omega_scale, 1e5 * omega_scale);
    AdmissibilityReport {
        cond1,
        cond3,
        cond4,
        f0,
        f0_prime: fp,
        falloff_exponent: p,
    }
}

/// Check a sampled history (oldest first, last sample at t).
///
/// Transformability requires the history to have decayed at its old end to
/// 10⁻⁶ of its peak. The low-frequency fit uses [10⁻⁴, 10⁻²]·`omega_scale`
/// and the falloff fit frequencies up to a fifth of the Nyquist frequency.
pub fn admissibility_check_samples(samples: &[f64], dt: f64, omega_scale: f64) -> Result<AdmissibilityReport> {
    let spec = SignalSpectrum::from_samples(samples, dt)?;
    let n = samples.len();
    let m = (n / 100).max(2).min(n);
    let peak = samples.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let old = samples[..m].iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let ratio = if peak > 0.0 { old / peak } else { 0.0 };
    let finite = samples.iter().all(|v| v.is_finite());
    let cond1 = ConditionReport {
        pass: finite && ratio < 1e-6,
        measure: ratio,
        evidence: format!("oldest-window envelope / peak = {ratio:.3e}"),
    };
    let nyq = PI / dt;
    let f = |w: f64| spec.eval(w);
    let (cond3, cond4, f0, fp, p) = spectral_conditions(&f, omega_scale, 2e-3 * nyq, 0.2 * nyq);
    Ok(AdmissibilityReport {
        cond1,
        cond3,
        cond4,
        f0,
        f0_prime: fp,
        falloff_exponent: p,
    })
}
