//! Gaussian-regularized auxiliary kernels of the radiation-reaction force.
//!
//! With the charge profile regularized by e^{−k²/2α}, the force involves
//!
//! * ρ_α(s) = (1/π)∫₀^∞ cos(ks) e^{−k²/2α} dk = √(α/2π) e^{−αs²/2},
//! * Ξ_α(s) = ∫₀^∞ sin(ks) e^{−k²/2α} dk = √(2α) F(√(α/2) s), with F the
//!   Dawson integral,
//! * 𝓕_α(δ) = ∫_{t_c}^{δ} Ξ_α(cτ) dτ and its value at δ = 0,
//! * the finite constant ζ = lim_{α→∞} [𝓕_α(0)|_{η=1} + (1/2c) ln α] and
//!   α₀ = e^{2cζ}.
//!
//! Integrals of Ξ_α reduce to G(Z) = ∫₀^Z F(z) dz, evaluated by adaptive
//! quadrature up to Z = 7 and by the term-wise integrated asymptotic series
//! beyond.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fit::richardson;
use crate::quad::{integrate, integrate_oscillatory, QuadOpts};
use crate::special::dawson;

/// Speed of light in internal units.
pub const C_LIGHT: f64 = 1.0;

/// Matching point between quadrature and asymptotic series for G(Z).
const G_SPLIT: f64 = 7.0;

/// Precomputed α-dependent constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelContext {
    pub alpha: f64,
    pub c: f64,
    pub m: f64,
    pub eta: f64,
    /// Compton time ħ/(mc²).
    pub t_tilde: f64,
    /// Memory reference time η·t̃.
    pub t_c: f64,
    /// ζ at η = 1.
    pub zeta: f64,
    /// e^{2cζ}.
    pub alpha0: f64,
}

impl KernelContext {
    /// Build a context, computing ζ by ladder extrapolation.
    pub fn new(alpha: f64, m: f64, eta: f64) -> Result<Self> {
        let zeta = zeta_const(m, C_LIGHT)?;
        Self::with_zeta(alpha, m, eta, zeta)
    }

    /// Build a context from a previously computed ζ.
    pub fn with_zeta(alpha: f64, m: f64, eta: f64, zeta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(invalid("alpha must be positive and finite"));
        }
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(invalid("eta must be positive and finite"));
        }
        if !(m > 0.0 && m.is_finite()) {
            return Err(invalid("mass must be positive and finite"));
        }
        let c = C_LIGHT;
        let t_tilde = 1.0 / (m * c * c);
        Ok(Self {
            alpha,
            c,
            m,
            eta,
            t_tilde,
            t_c: eta * t_tilde,
            zeta,
            alpha0: (2.0 * c * zeta).exp(),
        })
    }

    /// Same context with a different α.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::with_zeta(alpha, self.m, self.eta, self.zeta)
    }

    /// Same context with a different η.
    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        Self::with_zeta(self.alpha, self.m, eta, self.zeta)
    }

    /// ζ(η) = ζ − (1/c) ln η.
    pub fn zeta_eta(&self) -> f64 {
        self.zeta - self.eta.ln() / self.c
    }
}

/// ρ_α(s) = √(α/2π) e^{−αs²/2}.
pub fn rho_alpha(ctx: &KernelContext, s: f64) -> f64 {
    (ctx.alpha / (2.0 * PI)).sqrt() * (-0.5 * ctx.alpha * s * s).exp()
}

/// Second derivative ∂²_τ ρ_α(cτ).
pub fn rho_alpha_dd(ctx: &KernelContext, tau: f64) -> f64 {
    let a = ctx.alpha;
    let s = ctx.c * tau;
    ctx.c * ctx.c * (a / (2.0 * PI)).sqrt() * (a * a * s * s - a) * (-0.5 * a * s * s).exp()
}

/// Closed-form moments ∫₀^∞ τⁿ ∂²_τ ρ_α(cτ) dτ for n = 0..3.
pub fn rho_moment(ctx: &KernelContext, n: usize) -> Result<f64> {
    let (a, c) = (ctx.alpha, ctx.c);
    match n {
        0 => Ok(0.0),
        1 => Ok((a / (2.0 * PI)).sqrt()),
        2 => Ok(1.0 / c),
        3 => Ok(3.0 / (c * c) * (2.0 / (PI * a)).sqrt()),
        _ => Err(invalid(format!("moment order {n} outside 0..3"))),
    }
}

/// Ξ_α(s) = ∫₀^∞ sin(ks) e^{−k²/2α} dk, odd in s.
pub fn xi_alpha(ctx: &KernelContext, s: f64) -> f64 {
    let a = ctx.alpha;
    (2.0 * a).sqrt() * dawson((0.5 * a).sqrt() * s)
}

/// Derivative Ξ'_α(s) = α(1 − sΞ_α(s)).
///
/// Beyond z = √(α/2)|s| = 7 the bracket is summed from the asymptotic series
/// 1 − 2zF(z) = −Σ_{n≥1} (2n−1)!!/(2z²)ⁿ, which avoids the cancellation
/// between 1 and 2zF(z).
pub fn xi_alpha_prime(ctx: &KernelContext, s: f64) -> f64 {
    let z = (0.5 * ctx.alpha).sqrt() * s.abs();
    if z <= G_SPLIT {
        return ctx.alpha * (1.0 - 2.0 * z * dawson(z));
    }
    let inv = 1.0 / (2.0 * z * z);
    let mut term = 1.0;
    let mut sum = 0.0f64;
    for n in 1..200 {
        let next = term * (2 * n - 1) as f64 * inv;
        if next >= term || next < 1e-18 * sum.abs() {
            break;
        }
        term = next;
        sum += term;
    }
    -ctx.alpha * sum
}

fn g_split_value() -> f64 {
    static G7: OnceLock<f64> = OnceLock::new();
    *G7.get_or_init(|| {
        integrate(dawson, 0.0, G_SPLIT, QuadOpts::rel(1e-15))
            .expect("Dawson integral on a finite interval")
            .value
    })
}

/// Term-wise integral of the asymptotic series of F: ½ ln z − Σ aₙ/(4n) z^{−2n}
/// with aₙ = (2n−1)!!/2ⁿ.
fn g_asymptotic(z: f64) -> f64 {
    let inv = 1.0 / (z * z);
    let mut a = 1.0;
    let mut pow = 1.0;
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    for n in 1..200 {
        a *= (2 * n - 1) as f64 / 2.0;
        pow *= inv;
        let term = a / (4.0 * n as f64) * pow;
        if term >= last || term < 1e-18 {
            break;
        }
        sum += term;
        last = term;
    }
    0.5 * z.ln() - sum
}

/// G(Z) = ∫₀^Z F(z) dz for Z ≥ 0.
pub fn dawson_integral(z: f64) -> f64 {
    if z <= 0.0 {
        0.0
    } else if z <= G_SPLIT {
        integrate(dawson, 0.0, z, QuadOpts::rel(1e-15))
            .expect("Dawson integral on a finite interval")
            .value
    } else {
        g_split_value() + g_asymptotic(z) - g_asymptotic(G_SPLIT)
    }
}

/// ∫₀^{τ} Ξ_α(cτ′) dτ′ for τ ≥ 0.
fn xi_time_integral(ctx: &KernelContext, tau: f64) -> f64 {
    2.0 / ctx.c * dawson_integral((0.5 * ctx.alpha).sqrt() * ctx.c * tau)
}

/// 𝓕_α(δ) = ∫_{t_c}^{δ} Ξ_α(cτ) dτ for δ > 0.
pub fn f_alpha(ctx: &KernelContext, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(invalid("f_alpha requires delta > 0"));
    }
    Ok(xi_time_integral(ctx, delta) - xi_time_integral(ctx, ctx.t_c))
}

/// 𝓕_α(0) = ∫₀^∞ e^{−k²/2α}(cos(k c t_c) − 1)/(kc) dk = −∫₀^{t_c} Ξ_α(cτ) dτ.
pub fn f_alpha_zero(ctx: &KernelContext) -> f64 {
    -xi_time_integral(ctx, ctx.t_c)
}

/// Large-α expansion −(1/2c) ln(η²α) + ζ + 1/(2c³η²t̃²α).
pub fn f_alpha_zero_asymptotic(ctx: &KernelContext) -> f64 {
    let c = ctx.c;
    -0.5 / c * (ctx.eta * ctx.eta * ctx.alpha).ln()
        + ctx.zeta
        + 1.0 / (2.0 * c.powi(3) * ctx.t_c * ctx.t_c * ctx.alpha)
}

/// 𝓕_α(0) by direct quadrature over k (oscillatory route), used as the
/// independent second ladder for ζ.
pub fn f_alpha_zero_k_route(ctx: &KernelContext) -> Result<f64> {
    let (a, c, tc) = (ctx.alpha, ctx.c, ctx.t_c);
    let kmax = (2.0 * a * 40.0).sqrt();
    let w = c * tc;
    let integrand = |k: f64| {
        let x = k * w;
        // (cos x − 1)/k written without cancellation near k = 0.
        let h = 0.5 * x;
        let s = h.sin();
        -2.0 * s * s / (k * c) * (-k * k / (2.0 * a)).exp()
    };
    Ok(integrate_oscillatory(integrand, 0.0, kmax, PI / w, &[], QuadOpts::rel(1e-14))?.value)
}

/// Ladder of regulators α_k = scale·10^{2+k/2}, k = 0..8.
pub fn zeta_ladder(scale: f64) -> Vec<f64> {
    (0..9).map(|k| scale * 10f64.powf(2.0 + 0.5 * k as f64)).collect()
}

/// Extrapolate ζ from residuals R(α) = 𝓕_α(0)|_{η=1} + (1/2c) ln α on a
/// ladder using polynomial extrapolation in 1/α.
pub fn zeta_from_ladder(
    m: f64,
    c: f64,
    alphas: &[f64],
    route: impl Fn(&KernelContext) -> Result<f64>,
) -> Result<(f64, f64)> {
    let mut hs = Vec::with_capacity(alphas.len());
    let mut rs = Vec::with_capacity(alphas.len());
    for &a in alphas {
        let ctx = KernelContext::with_zeta(a, m, 1.0, 0.0)?;
        rs.push(route(&ctx)? + 0.5 / c * a.ln());
        hs.push(1.0 / a);
    }
    richardson(&hs, &rs)
}

/// ζ(m, c) by Richardson extrapolation over the standard ladder.
pub fn zeta_const(m: f64, c: f64) -> Result<f64> {
    if !(m > 0.0) {
        return Err(invalid("zeta requires m > 0"));
    }
    let (z, err) = zeta_from_ladder(m, c, &zeta_ladder(1.0), |ctx| Ok(f_alpha_zero(ctx)))?;
    if err > 1e-9 {
        return Err(Error::Tolerance {
            context: "zeta ladder extrapolation".into(),
            achieved: err,
            requested: 1e-9,
        });
    }
    Ok(z)
}

/// ‖κκᵀ + Σ εεᵀ − 𝕀‖_max for a unit vector κ and its polarization basis.
pub fn closure_check(k_hat: &[f64], basis: &[Vec<f64>]) -> Result<f64> {
    let d = k_hat.len();
    let norm: f64 = k_hat.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(invalid(format!("k_hat has norm {norm}, expected 1")));
    }
    if basis.len() + 1 != d || basis.iter().any(|e| e.len() != d) {
        return Err(invalid("polarization basis must have d−1 vectors of length d"));
    }
    let mut dev: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let mut s = k_hat[i] * k_hat[j];
            for e in basis {
                s += e[i] * e[j];
            }
            if i == j {
                s -= 1.0;
            }
            dev = dev.max(s.abs());
        }
    }
    Ok(dev)
}

/// Orthonormal polarization vectors completing κ to a basis, by Gram–Schmidt
/// against the coordinate axes.
pub fn polarization_basis(k_hat: &[f64]) -> Vec<Vec<f64>> {
    let d = k_hat.len();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(d - 1);
    let mut axes: Vec<usize> = (0..d).collect();
    // Start from the axes least aligned with κ for numerical stability.
    axes.sort_by(|&a, &b| k_hat[a].abs().total_cmp(&k_hat[b].abs()));
    for &ax in &axes {
        if out.len() == d - 1 {
            break;
        }
        let mut v = vec![0.0; d];
        v[ax] = 1.0;
        for u in std::iter::once(k_hat).chain(out.iter().map(|x| x.as_slice())) {
            let p: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= p * b);
        }
        let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            v.iter_mut().for_each(|x| *x /= n);
            out.push(v);
        }
    }
    out
}

/// Rows (α, s, ρ_α(s), Ξ_α(s)) for documentation plots.
pub fn kernel_table(ctxs: &[KernelContext], ss: &[f64]) -> Vec<[f64; 4]> {
    ctxs.iter()
        .flat_map(|ctx| ss.iter().map(move |&s| [ctx.alpha, s, rho_alpha(ctx, s), xi_alpha(ctx, s)]))
        .collect()
}
