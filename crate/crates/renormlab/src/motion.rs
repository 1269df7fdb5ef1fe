//! Prescribed c-number trajectories: analytic harmonic motion and uniformly
//! sampled histories with finite-difference derivatives.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::Charge;

/// A trajectory x(t) whose time derivatives can be evaluated pointwise.
pub trait Motion: Sync {
    /// Number of Cartesian components.
    fn dim(&self) -> usize;

    /// Component `c` of dⁿx/dtⁿ at time `t`; n = 1 is the velocity.
    fn deriv(&self, n: usize, t: f64, c: usize) -> f64;

    /// All components of dⁿx/dtⁿ at `t`.
    fn deriv_vec(&self, n: usize, t: f64) -> Vec<f64> {
        (0..self.dim()).map(|c| self.deriv(n, t, c)).collect()
    }
}

/// x(t) = A sin(ωt + φ) componentwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicMotion {
    pub amplitude: Vec<f64>,
    pub omega: f64,
    pub phase: f64,
}

impl HarmonicMotion {
    /// Motion whose velocity is v₀ sin(ωt), that is x = −(v₀/ω) cos(ωt).
    pub fn from_velocity(v0: Vec<f64>, omega: f64) -> Self {
        Self {
            amplitude: v0.iter().map(|v| v / omega).collect(),
            omega,
            phase: -std::f64::consts::FRAC_PI_2,
        }
    }
}

impl Motion for HarmonicMotion {
    fn dim(&self) -> usize {
        self.amplitude.len()
    }

    fn deriv(&self, n: usize, t: f64, c: usize) -> f64 {
        let arg = self.omega * t + self.phase + n as f64 * std::f64::consts::FRAC_PI_2;
        self.amplitude[c] * self.omega.powi(n as i32) * arg.sin()
    }
}

/// Motion with x ≡ 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AtRest(pub usize);

impl Motion for AtRest {
    fn dim(&self) -> usize {
        self.0
    }

    fn deriv(&self, _n: usize, _t: f64, _c: usize) -> f64 {
        0.0
    }
}

/// Sum of two motions, used for superposition checks.
pub struct Superposed<'a> {
    pub a: &'a dyn Motion,
    pub b: &'a dyn Motion,
    pub wa: f64,
    pub wb: f64,
}

impl Motion for Superposed<'_> {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn deriv(&self, n: usize, t: f64, c: usize) -> f64 {
        self.wa * self.a.deriv(n, t, c) + self.wb * self.b.deriv(n, t, c)
    }
}

/// Uniformly sampled history t_i = t0 + i·dt of positions, velocities and
/// the switched charge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub t0: f64,
    pub dt: f64,
    /// Positions per component; may be empty when only velocities are known.
    pub x: Vec<Vec<f64>>,
    /// Velocities per component.
    pub v: Vec<Vec<f64>>,
    /// q_{t_i}.
    pub q: Vec<f64>,
}

/// Stencil width of the finite-difference derivatives.
const STENCIL: usize = 5;

impl Trajectory {
    /// Sample a motion and a charge profile on `n` points.
    pub fn sample(motion: &dyn Motion, charge: &Charge, t0: f64, dt: f64, n: usize) -> Result<Self> {
        if !(dt > 0.0) || n < STENCIL {
            return Err(invalid(format!("trajectory needs dt > 0 and at least {STENCIL} samples")));
        }
        let d = motion.dim();
        let ts: Vec<f64> = (0..n).map(|i| t0 + i as f64 * dt).collect();
        Ok(Self {
            t0,
            dt,
            x: (0..d).map(|c| ts.iter().map(|&t| motion.deriv(0, t, c)).collect()).collect(),
            v: (0..d).map(|c| ts.iter().map(|&t| motion.deriv(1, t, c)).collect()).collect(),
            q: ts.iter().map(|&t| charge.at(t)).collect(),
        })
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.q.len()
    }

    /// True when no samples are stored.
    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// Time of sample i.
    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    /// Last sampled time.
    pub fn t_end(&self) -> f64 {
        self.time(self.len().saturating_sub(1))
    }

    /// Samples of the `order`-th derivative of v for component `c`, by
    /// five-point fourth-order differences: centered in the interior and
    /// one-sided at both ends.
    pub fn velocity_derivative(&self, order: usize, c: usize) -> Vec<f64> {
        derivative_samples(&self.v[c], self.dt, order)
    }

    /// Samples of dⁿ(q v_c)/dtⁿ by the same stencils.
    pub fn charged_velocity_derivative(&self, order: usize, c: usize) -> Vec<f64> {
        let qv: Vec<f64> = self.q.iter().zip(&self.v[c]).map(|(q, v)| q * v).collect();
        derivative_samples(&qv, self.dt, order)
    }

    fn stencil_start(&self, t: f64) -> (usize, f64) {
        let n = self.len();
        let s = (t - self.t0) / self.dt;
        let centre = s.round().clamp(0.0, (n - 1) as f64) as isize;
        let start = (centre - (STENCIL / 2) as isize).clamp(0, (n - STENCIL) as isize) as usize;
        (start, s - start as f64)
    }

    fn interpolate(&self, data: &[f64], order: usize, t: f64) -> f64 {
        let (start, s) = self.stencil_start(t);
        let nodes: Vec<f64> = (0..STENCIL).map(|i| i as f64).collect();
        let w = fornberg_weights(s, &nodes, order);
        let scale = self.dt.powi(order as i32);
        (0..STENCIL).map(|i| w[order][i] * data[start + i]).sum::<f64>() / scale
    }
}

impl Motion for Trajectory {
    fn dim(&self) -> usize {
        self.v.len()
    }

    /// Local quartic interpolation of the samples; the position (n = 0) is
    /// NaN when positions were not stored.
    fn deriv(&self, n: usize, t: f64, c: usize) -> f64 {
        if n == 0 {
            if self.x.is_empty() {
                return f64::NAN;
            }
            return self.interpolate(&self.x[c], 0, t);
        }
        if n > STENCIL {
            return 0.0;
        }
        self.interpolate(&self.v[c], n - 1, t)
    }
}

/// Finite-difference weights for derivatives of order 0..=m at `x0` from
/// values at `nodes` (Fornberg's recursion). Row k holds the weights of the
/// k-th derivative.
pub fn fornberg_weights(x0: f64, nodes: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Derivative samples of a uniformly sampled signal using five-point
/// stencils, one-sided near the ends.
pub fn derivative_samples(f: &[f64], dt: f64, order: usize) -> Vec<f64> {
    let n = f.len();
    if order == 0 || n < STENCIL {
        return if order == 0 { f.to_vec() } else { vec![0.0; n] };
    }
    let nodes: Vec<f64> = (0..STENCIL).map(|i| i as f64).collect();
    let tables: Vec<Vec<f64>> = (0..STENCIL)
        .map(|p| fornberg_weights(p as f64, &nodes, order).swap_remove(order))
        .collect();
    let scale = dt.powi(order as i32);
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(STENCIL / 2).min(n - STENCIL);
            let w = &tables[i - start];
            (0..STENCIL).map(|k| w[k] * f[start + k]).sum::<f64>() / scale
        })
        .collect()
}
