//! Renormalized mean-field propagation of the atom.
//!
//! In the mean-field ansatz the phase-redefined atomic state obeys
//!
//! i ∂_t ψ̃ = {v(t)·p̂ + V} ψ̃,
//!
//! with the classical velocity v(t) = ⟨ẋ⟩ driven by
//!
//! m v̇ = ⟨−∇V⟩_ψ̃ + q_t E₀(t) + F_AL,
//!
//! where m is the physical mass and F_AL the finite Abraham–Lorentz force:
//! (2/3) q_t² x⃛ in three dimensions and −(q_t/2π) ∫ ln((t−t′)/t_c)
//! d²(q v)/dt′² dt′ in two. The three-dimensional x⃛ is replaced by its
//! order-reduced form (1/m) d/dt[⟨−∇V⟩ + q_t E₀], which excludes the runaway
//! solutions of the literal third-order equation.
//!
//! ψ̃ is stepped by Strang splitting on a periodic grid: half a step of the
//! diagonal phase e^{−iV dt/2}, the rigid translation by ∫v dt generated by
//! v·p̂, and another half step of V. The amplitudes are stored in the frame
//! displaced by the accumulated translation, so both factors are exact
//! isometries without interpolation. The global phase involving the bare
//! mass multiplies the identity and is dropped.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::atom::{grid_state, solve_spectrum_grid, GridSpec, PotentialKind, PotentialSpec};
use crate::error::{invalid, Error, Result};
use crate::exec::Exec;
use crate::fit::least_squares;
use crate::kernels::{polarization_basis, KernelContext};
use crate::memconv::LogConvolver;
use crate::model::{Charge, Dim, ModelConfig};
use crate::motion::{fornberg_weights, Motion, Trajectory};
use crate::renorm::bare_mass;
use crate::rrforce::{memory_integral, rr_force_exact, ExactOpts, MemoryOpts};

/// Incoming field E₀(t) = A e^{−(t−t_p)²/2σ²} cos(ω_L(t−t_p) + φ) ε̂.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub center: f64,
    pub width: f64,
    pub carrier: f64,
    pub amplitude: f64,
    pub phase: f64,
    pub polarization: Vec<f64>,
}

impl PulseSpec {
    /// No incoming field.
    pub fn none(d: Dim) -> Self {
        Self {
            center: 0.0,
            width: 1.0,
            carrier: 0.0,
            amplitude: 0.0,
            phase: 0.0,
            polarization: vec![0.0; d.n()],
        }
    }

    /// Check the width and the polarization dimension.
    pub fn validate(&self, d: Dim) -> Result<()> {
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(invalid("pulse width must be positive"));
        }
        if self.polarization.len() != d.n() {
            return Err(invalid("pulse polarization has the wrong dimension"));
        }
        if !self.amplitude.is_finite() || !self.carrier.is_finite() {
            return Err(invalid("pulse amplitude and carrier must be finite"));
        }
        Ok(())
    }

    fn envelope(&self, t: f64) -> (f64, f64) {
        let s = t - self.center;
        let g = (-0.5 * s * s / (self.width * self.width)).exp();
        let arg = self.carrier * s + self.phase;
        let e = self.amplitude * g * arg.cos();
        let de = self.amplitude * g * (-s / (self.width * self.width) * arg.cos() - self.carrier * arg.sin());
        (e, de)
    }

    /// E₀(t).
    pub fn field(&self, t: f64) -> Vec<f64> {
        let (e, _) = self.envelope(t);
        self.polarization.iter().map(|p| p * e).collect()
    }

    /// dE₀/dt.
    pub fn field_rate(&self, t: f64) -> Vec<f64> {
        let (_, de) = self.envelope(t);
        self.polarization.iter().map(|p| p * de).collect()
    }
}

/// How the d-dimensional periodic grid is laid out: n points per axis with
/// spacing L/n, centered on the origin, flattened with axis 0 fastest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    pub dim: Dim,
    pub n: usize,
    pub length: f64,
}

impl SpatialGrid {
    /// Spacing.
    pub fn h(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Total number of points.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim.n() as u32)
    }

    /// True when the grid holds no points.
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Coordinate along one axis.
    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 - 0.5 * (self.n as f64 - 1.0)) * self.h()
    }

    /// Cartesian position of flat index `idx`.
    pub fn point(&self, idx: usize, out: &mut [f64]) {
        let mut r = idx;
        for o in out.iter_mut() {
            *o = self.coord(r % self.n);
            r /= self.n;
        }
    }

    /// Volume element h^d.
    pub fn cell(&self) -> f64 {
        self.h().powi(self.dim.n() as i32)
    }

    fn wavenumber(&self, i: usize) -> f64 {
        let n = self.n as isize;
        let j = i as isize;
        let m = if j < n / 2 { j } else { j - n };
        2.0 * PI * m as f64 / self.length
    }

    fn validate(&self) -> Result<()> {
        if self.n < 8 || !(self.length > 0.0) {
            return Err(invalid("grid needs at least 8 points per axis and a positive length"));
        }
        Ok(())
    }
}

/// In-place d-dimensional FFT over a [`SpatialGrid`] layout.
struct GridFft {
    forward: std::sync::Arc<dyn Fft<f64>>,
    inverse: std::sync::Arc<dyn Fft<f64>>,
    n: usize,
    d: usize,
}

impl GridFft {
    fn new(grid: &SpatialGrid) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(grid.n),
            inverse: planner.plan_fft_inverse(grid.n),
            n: grid.n,
            d: grid.dim.n(),
        }
    }

    fn transform(&self, data: &mut [Complex64], forward: bool) {
        let fft = if forward { &self.forward } else { &self.inverse };
        let n = self.n;
        let total = data.len();
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for axis in 0..self.d {
            let stride = n.pow(axis as u32);
            for base in 0..total {
                // Visit each line once, from its element with axis index 0.
                if !(base / stride).is_multiple_of(n) {
                    continue;
                }
                for (i, l) in line.iter_mut().enumerate() {
                    *l = data[base + i * stride];
                }
                fft.process(&mut line);
                for (i, l) in line.iter().enumerate() {
                    data[base + i * stride] = *l;
                }
            }
        }
        if !forward {
            let s = 1.0 / total as f64;
            data.iter_mut().for_each(|z| *z *= s);
        }
    }
}

/// Controls for [`propagate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagateOpts {
    pub dt: f64,
    pub steps: usize,
    /// Record every this many steps.
    pub record_every: usize,
    /// Runaway bound on |v| (units of c).
    pub v_max: f64,
    /// Largest allowed translation per step in grid cells.
    pub cfl: f64,
    /// Abort when |‖ψ̃‖² − 1| exceeds this.
    pub norm_tol: f64,
    /// Compare each velocity step with two half steps and keep the
    /// extrapolated result.
    pub step_doubling: bool,
}

impl Default for PropagateOpts {
    fn default() -> Self {
        Self {
            dt: 0.01,
            steps: 1000,
            record_every: 1,
            v_max: 0.5,
            cfl: 0.5,
            norm_tol: 1e-8,
            step_doubling: true,
        }
    }
}

/// Grid state of the propagator.
///
/// ψ̃ is stored in the frame displaced by `offset` = ∫v dt:
/// ψ̃(x) = `psi`(x − offset) with `psi` sampled on the centered grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldState {
    pub grid: SpatialGrid,
    pub psi: Vec<Complex64>,
    pub offset: Vec<f64>,
    pub t: f64,
    pub v: Vec<f64>,
    /// ⟨ψ̃|ψ̃⟩.
    pub norm: f64,
}

impl MeanFieldState {
    /// Ground state of the configured potential at rest at time `t0`.
    pub fn ground(config: &ModelConfig, grid: SpatialGrid, t0: f64) -> Result<Self> {
        let psi = ground_state(&config.potential, &grid)?;
        let norm = norm_of(&psi, &grid);
        let d = grid.dim.n();
        Ok(Self {
            grid,
            psi,
            offset: vec![0.0; d],
            t: t0,
            v: vec![0.0; d],
            norm,
        })
    }

    /// |ψ̃|² on the lab-frame grid, translating the stored density by the
    /// offset spectrally.
    pub fn density(&self) -> Vec<f64> {
        let mut rho: Vec<Complex64> = self.psi.iter().map(|z| Complex64::new(z.norm_sqr(), 0.0)).collect();
        if self.offset.iter().any(|o| *o != 0.0) {
            let fft = GridFft::new(&self.grid);
            translate(&mut rho, &self.grid, &fft, &self.offset);
        }
        rho.iter().map(|z| z.re).collect()
    }

    /// ⟨x⟩.
    pub fn mean_position(&self) -> Vec<f64> {
        let d = self.grid.dim.n();
        let mut out = self.offset.clone();
        let mut x = vec![0.0; d];
        let cell = self.grid.cell();
        for (i, z) in self.psi.iter().enumerate() {
            self.grid.point(i, &mut x);
            let w = z.norm_sqr() * cell;
            for c in 0..d {
                out[c] += w * x[c];
            }
        }
        out
    }
}

fn norm_of(psi: &[Complex64], grid: &SpatialGrid) -> f64 {
    psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.cell()
}

/// Ground state of `pot` sampled on `grid`, normalized on the grid.
///
/// The isotropic oscillator uses its Gaussian in any dimension; other
/// potentials use the d = 2 grid eigensolver on the same points.
pub fn ground_state(pot: &PotentialSpec, grid: &SpatialGrid) -> Result<Vec<Complex64>> {
    grid.validate()?;
    if pot.dim != grid.dim {
        return Err(invalid("potential and grid dimensions differ"));
    }
    let mut psi: Vec<Complex64> = match pot.kind {
        PotentialKind::IsotropicHarmonic { omega0 } => {
            let a = pot.mass * omega0;
            let d = grid.dim.n();
            let mut x = vec![0.0; d];
            (0..grid.len())
                .map(|i| {
                    grid.point(i, &mut x);
                    Complex64::new((-0.5 * a * x.iter().map(|v| v * v).sum::<f64>()).exp(), 0.0)
                })
                .collect()
        }
        _ => {
            if grid.dim != Dim::Two {
                return Err(invalid("non-harmonic ground states are available in d = 2 only"));
            }
            let spec = solve_spectrum_grid(pot, 2, GridSpec { n: grid.n, length: grid.length }, Exec::default())?;
            let (_, v) = grid_state(&spec, 0).ok_or_else(|| invalid("grid solver returned no state"))?;
            v.iter().map(|&a| Complex64::new(a, 0.0)).collect()
        }
    };
    let s = norm_of(&psi, grid).sqrt();
    psi.iter_mut().for_each(|z| *z /= s);
    Ok(psi)
}

/// Sampled history of the propagated velocity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Propagation {
    pub times: Vec<f64>,
    /// v per record.
    pub v: Vec<Vec<f64>>,
    /// ⟨x⟩ per record.
    pub x_mean: Vec<Vec<f64>>,
    pub norm: Vec<f64>,
    /// max over records of ‖|ψ̃_t|² − |ψ̃_0|²‖_∞ on the lab-frame grid.
    pub max_density_change: f64,
    /// max over interior records of |d⟨x⟩/dt − v| by centered differences.
    pub velocity_consistency: f64,
    /// Largest step-doubling error estimate of (displacement, velocity).
    pub step_error: f64,
    /// max |(2/3)q_t²(x⃛_literal − x⃛_reduced)| over interior steps (d = 3).
    pub al_residual: f64,
    /// Full-resolution trajectory (every step), for mode reconstruction.
    pub trajectory: Trajectory,
    pub final_state: MeanFieldState,
}

/// Density weights below this fraction of the total are skipped in the
/// potential moments.
const WEIGHT_FLOOR: f64 = 1e-24;

/// Frozen inputs of one velocity step.
struct StepContext<'a> {
    config: &'a ModelConfig,
    pulse: &'a PulseSpec,
    charge: Charge,
    d: usize,
    /// Occupied grid points: stored-frame coordinates and weights.
    points: &'a [f64],
    weights: &'a [f64],
    offset: &'a [f64],
    /// Spring constant, total weight and first moment of the stored density
    /// when V is the isotropic oscillator, whose moments are then exact.
    harmonic: Option<(f64, f64, &'a [f64])>,
    memory_force: &'a [f64],
    exec: Exec,
}

impl StepContext<'_> {
    /// ⟨−∇V⟩ and ⟨∂∂V⟩ over the density displaced by offset + `shift`.
    fn potential_moments(&self, shift: &[f64], want_hessian: bool) -> (Vec<f64>, Vec<f64>) {
        let d = self.d;
        if let Some((k, total, first)) = self.harmonic {
            let g = (0..d).map(|c| -k * (first[c] + total * (self.offset[c] + shift[c]))).collect();
            let mut h = vec![0.0; d * d];
            for c in 0..d {
                h[c * d + c] = k * total;
            }
            return (g, h);
        }
        let n = self.weights.len();
        let chunk = 2048;
        let parts = self.exec.map_range(n.div_ceil(chunk), |ci| {
            let mut g = vec![0.0; d];
            let mut h = vec![0.0; d * d];
            let mut x = vec![0.0; d];
            let mut gb = vec![0.0; d];
            let mut hb = vec![0.0; d * d];
            for i in ci * chunk..((ci + 1) * chunk).min(n) {
                let w = self.weights[i];
                for c in 0..d {
                    x[c] = self.points[i * d + c] + self.offset[c] + shift[c];
                }
                self.config.potential.gradient(&x, &mut gb);
                for c in 0..d {
                    g[c] -= w * gb[c];
                }
                if want_hessian {
                    self.config.potential.hessian(&x, &mut hb);
                    for k in 0..d * d {
                        h[k] += w * hb[k];
                    }
                }
            }
            (g, h)
        });
        let mut g = vec![0.0; d];
        let mut h = vec![0.0; d * d];
        for (pg, ph) in parts {
            for c in 0..d {
                g[c] += pg[c];
            }
            for k in 0..d * d {
                h[k] += ph[k];
            }
        }
        (g, h)
    }

    /// Acceleration and the order-reduced x⃛ at time t for displacement
    /// `shift` (since the start of the step) and velocity v.
    fn acceleration(&self, t: f64, shift: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let d = self.d;
        let m = self.config.mass;
        let qt = self.charge.at(t);
        let e0 = self.pulse.field(t);
        let three = self.config.dim == Dim::Three && qt != 0.0;
        let (g, h) = self.potential_moments(shift, three);
        let mut a = vec![0.0; d];
        let mut jerk = vec![0.0; d];
        if three {
            let de0 = self.pulse.field_rate(t);
            let qd = self.charge.rate(t);
            for c in 0..d {
                let hv: f64 = (0..d).map(|b| h[c * d + b] * v[b]).sum();
                jerk[c] = (-hv + qd * e0[c] + qt * de0[c]) / m;
            }
        }
        for c in 0..d {
            let al = if three { 2.0 / 3.0 * qt * qt * jerk[c] } else { self.memory_force[c] };
            a[c] = (g[c] + qt * e0[c] + al) / m;
        }
        (a, jerk)
    }

    /// Classical RK4 step of (displacement, v), displacement measured from
    /// `base` within the current step.
    fn rk4(&self, t: f64, base: &[f64], v0: &[f64], dt: f64) -> (Vec<f64>, Vec<f64>) {
        let d = self.d;
        let add = |a: &[f64], b: &[f64], s: f64| a.iter().zip(b).map(|(x, y)| x + s * y).collect::<Vec<f64>>();
        let (k1, _) = self.acceleration(t, base, v0);
        let v2 = add(v0, &k1, 0.5 * dt);
        let (k2, _) = self.acceleration(t + 0.5 * dt, &add(base, v0, 0.5 * dt), &v2);
        let v3 = add(v0, &k2, 0.5 * dt);
        let (k3, _) = self.acceleration(t + 0.5 * dt, &add(base, &v2, 0.5 * dt), &v3);
        let v4 = add(v0, &k3, dt);
        let (k4, _) = self.acceleration(t + dt, &add(base, &v3, dt), &v4);
        let shift = (0..d).map(|c| dt / 6.0 * (v0[c] + 2.0 * v2[c] + 2.0 * v3[c] + v4[c])).collect();
        let v = (0..d).map(|c| v0[c] + dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c])).collect();
        (shift, v)
    }
}

/// Highest angular frequency of the atom that the step must resolve.
fn atomic_frequency(pot: &PotentialSpec) -> f64 {
    match pot.kind {
        PotentialKind::IsotropicHarmonic { omega0 } => omega0,
        _ => 0.0,
    }
}

/// Apply e^{−iV dt_phase} on the grid.
fn potential_phase(psi: &mut [Complex64], potential_values: &[f64], dt_phase: f64, exec: Exec) {
    exec.for_each_chunk_mut(psi, 4096, |start, chunk| {
        for (k, z) in chunk.iter_mut().enumerate() {
            *z *= Complex64::from_polar(1.0, -potential_values[start + k] * dt_phase);
        }
    });
}

fn phase_factors(potential_values: &[f64], dt: f64, exec: Exec) -> Vec<Complex64> {
    exec.map(potential_values, |v| Complex64::from_polar(1.0, -v * dt))
}

fn apply_phase(psi: &mut [Complex64], phase: &[Complex64], exec: Exec) {
    exec.for_each_chunk_mut(psi, 4096, |start, chunk| {
        for (k, z) in chunk.iter_mut().enumerate() {
            *z *= phase[start + k];
        }
    });
}

/// V at every stored-frame point displaced by `offset`.
fn potential_at(pot: &PotentialSpec, points: &[f64], d: usize, offset: &[f64], exec: Exec) -> Vec<f64> {
    let mut out = vec![0.0; points.len() / d];
    exec.for_each_chunk_mut(&mut out, 4096, |start, chunk| {
        let mut x = vec![0.0; d];
        for (k, o) in chunk.iter_mut().enumerate() {
            let i = start + k;
            for c in 0..d {
                x[c] = points[i * d + c] + offset[c];
            }
            *o = pot.value(&x);
        }
    });
    out
}

/// Translate a grid function in place: f(x) → f(x − shift), applied as the
/// phase e^{−ik·shift} in the conjugate representation.
fn translate(psi: &mut [Complex64], grid: &SpatialGrid, fft: &GridFft, shift: &[f64]) {
    fft.transform(psi, true);
    let n = grid.n;
    let d = grid.dim.n();
    for (idx, z) in psi.iter_mut().enumerate() {
        let mut r = idx;
        let mut phase = 0.0;
        for s in shift.iter().take(d) {
            phase += grid.wavenumber(r % n) * s;
            r /= n;
        }
        *z *= Complex64::from_polar(1.0, -phase);
    }
    fft.transform(psi, false);
}

/// Propagate the renormalized mean-field equations.
///
/// Each step applies e^{−iV dt/2}, the translation generated by v·p̂ over
/// dt, and e^{−iV dt/2}. The translation acts on the frame offset, so the
/// stored amplitudes only ever receive diagonal phases; a spectral shift of
/// the amplitudes themselves would alias once the accumulated V phase
/// develops wavenumbers |∇V| t beyond the grid's Nyquist limit.
///
/// The charge history before the initial time is taken to be at rest, so
/// the d = 2 memory integral starts at `state.t`. The d = 2 memory force is
/// evaluated once per step and held fixed across the Runge–Kutta stages.
pub fn propagate(
    config: &ModelConfig,
    ctx: &KernelContext,
    pulse: &PulseSpec,
    mut state: MeanFieldState,
    opts: &PropagateOpts,
    exec: Exec,
) -> Result<Propagation> {
    config.validate()?;
    pulse.validate(config.dim)?;
    state.grid.validate()?;
    let d = config.dim.n();
    if state.grid.dim != config.dim || state.v.len() != d || state.offset.len() != d || state.psi.len() != state.grid.len() {
        return Err(invalid("state does not match the configuration"));
    }
    if !(opts.dt > 0.0) || opts.record_every == 0 {
        return Err(invalid("dt must be positive and record_every at least 1"));
    }
    let w_max = atomic_frequency(&config.potential).max(pulse.carrier.abs());
    if w_max > 0.0 && opts.dt > 2.0 * PI / (40.0 * w_max) {
        return Err(invalid(format!(
            "dt = {} resolves the fastest frequency {} with fewer than 40 steps per period",
            opts.dt, w_max
        )));
    }
    let grid = state.grid;
    let charge = config.charge_profile();
    let cell = grid.cell();
    let mut points = vec![0.0; grid.len() * d];
    for i in 0..grid.len() {
        grid.point(i, &mut points[i * d..(i + 1) * d]);
    }
    // |psi|² is invariant under the diagonal phases, so the weights of the
    // potential moments are fixed for the whole run.
    let all_weights: Vec<f64> = state.psi.iter().map(|z| z.norm_sqr() * cell).collect();
    let total: f64 = all_weights.iter().sum();
    let mut occ_points = Vec::new();
    let mut occ_weights = Vec::new();
    for (i, &w) in all_weights.iter().enumerate() {
        if w > WEIGHT_FLOOR * total {
            occ_points.extend_from_slice(&points[i * d..(i + 1) * d]);
            occ_weights.push(w);
        }
    }
    let lab_first: Vec<f64> = (0..d)
        .map(|c| all_weights.iter().enumerate().map(|(i, w)| w * points[i * d + c]).sum())
        .collect();
    let occ_total: f64 = occ_weights.iter().sum();
    let first_moment: Vec<f64> = (0..d)
        .map(|c| occ_weights.iter().enumerate().map(|(i, w)| w * occ_points[i * d + c]).sum())
        .collect();
    let harmonic = match config.potential.kind {
        PotentialKind::IsotropicHarmonic { omega0 } => Some((config.potential.mass * omega0 * omega0, occ_total, first_moment.as_slice())),
        _ => None,
    };
    let rho_lab0 = state.density();
    let norm0 = state.norm;

    let t0 = state.t;
    let dt = opts.dt;
    let mut conv = LogConvolver::new(dt, ctx.t_c)?;
    if config.dim == Dim::Two {
        conv.reserve(opts.steps + 2);
    }
    // Per component: d(q v)/dt samples and their derivatives, oldest first.
    let mut g_hist: Vec<Vec<f64>> = vec![Vec::with_capacity(opts.steps + 1); d];
    let mut f_hist: Vec<Vec<f64>> = vec![Vec::with_capacity(opts.steps + 2); d];
    let mut traj_v: Vec<Vec<f64>> = vec![Vec::with_capacity(opts.steps + 1); d];
    let mut traj_x: Vec<Vec<f64>> = vec![Vec::with_capacity(opts.steps + 1); d];
    let mut traj_q = Vec::with_capacity(opts.steps + 1);
    let mut jerks: Vec<Vec<f64>> = vec![Vec::with_capacity(opts.steps + 1); d];

    let mut out = Propagation {
        times: Vec::new(),
        v: Vec::new(),
        x_mean: Vec::new(),
        norm: Vec::new(),
        max_density_change: 0.0,
        velocity_consistency: 0.0,
        step_error: 0.0,
        al_residual: 0.0,
        trajectory: Trajectory { t0, dt, x: vec![], v: vec![], q: vec![] },
        final_state: state.clone(),
    };
    let mut memory_force = vec![0.0; d];
    let stencil: Vec<Vec<f64>> = (0..5)
        .map(|p| fornberg_weights(p as f64, &[0.0, 1.0, 2.0, 3.0, 4.0], 1).swap_remove(1))
        .collect();
    let zero = vec![0.0; d];
    let mut v_here = potential_at(&config.potential, &points, d, &state.offset, exec);
    let mut full_phase = phase_factors(&v_here, dt, exec);

    for step in 0..=opts.steps {
        let t = t0 + step as f64 * dt;
        let x_mean: Vec<f64> = (0..d).map(|c| state.offset[c] + lab_first[c]).collect();

        // Two-dimensional memory force from f = d²(q v)/dt², with the newest
        // sample extrapolated linearly until it is computed below.
        if config.dim == Dim::Two {
            let qt = charge.at(t);
            for c in 0..d {
                let fh = &mut f_hist[c];
                let next = match fh.len() {
                    0 => 0.0,
                    1 => fh[0],
                    k => 2.0 * fh[k - 1] - fh[k - 2],
                };
                fh.push(next);
                memory_force[c] = -qt / (2.0 * PI) * conv.convolve_reserved(fh)?.value;
                fh.pop();
            }
        }
        let sc = StepContext {
            config,
            pulse,
            charge,
            d,
            points: &occ_points,
            weights: &occ_weights,
            offset: &state.offset,
            harmonic,
            memory_force: &memory_force,
            exec,
        };
        let (a_now, jerk_now) = sc.acceleration(t, &zero, &state.v);

        traj_q.push(charge.at(t));
        for c in 0..d {
            traj_v[c].push(state.v[c]);
            traj_x[c].push(x_mean[c]);
            jerks[c].push(jerk_now[c]);
            g_hist[c].push(charge.rate(t) * state.v[c] + charge.at(t) * a_now[c]);
            let k = g_hist[c].len();
            let f_new = if k >= 5 {
                (0..5).map(|i| stencil[4][i] * g_hist[c][k - 5 + i]).sum::<f64>() / dt
            } else if k >= 2 {
                (g_hist[c][k - 1] - g_hist[c][k - 2]) / dt
            } else {
                0.0
            };
            f_hist[c].push(f_new);
            if k >= 5 {
                // Replace the sample two steps back with the centered stencil.
                f_hist[c][k - 3] = (0..5).map(|i| stencil[2][i] * g_hist[c][k - 5 + i]).sum::<f64>() / dt;
            }
        }

        if step % opts.record_every == 0 || step == opts.steps {
            let dev = state
                .density()
                .iter()
                .zip(&rho_lab0)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            out.max_density_change = out.max_density_change.max(dev);
            out.times.push(t);
            out.v.push(state.v.clone());
            out.x_mean.push(x_mean.clone());
            out.norm.push(state.norm);
        }
        if step == opts.steps {
            break;
        }

        let (shift, v_new) = if opts.step_doubling {
            let (s_full, v_full) = sc.rk4(t, &zero, &state.v, dt);
            let (s_a, v_a) = sc.rk4(t, &zero, &state.v, 0.5 * dt);
            let (s_b, v_b) = sc.rk4(t + 0.5 * dt, &s_a, &v_a, 0.5 * dt);
            let mut err = 0.0f64;
            let mut s = vec![0.0; d];
            let mut v = vec![0.0; d];
            for c in 0..d {
                let s_half = s_a[c] + s_b[c];
                err = err.max((s_half - s_full[c]).abs()).max((v_b[c] - v_full[c]).abs());
                s[c] = s_half + (s_half - s_full[c]) / 15.0;
                v[c] = v_b[c] + (v_b[c] - v_full[c]) / 15.0;
            }
            out.step_error = out.step_error.max(err / 15.0);
            (s, v)
        } else {
            sc.rk4(t, &zero, &state.v, dt)
        };

        let h = grid.h();
        if shift.iter().any(|s| s.abs() > opts.cfl * h) {
            return Err(Error::Propagation(format!(
                "translation {:.3e} per step exceeds {} grid cells at t = {t}",
                shift.iter().fold(0.0f64, |a, s| a.max(s.abs())),
                opts.cfl
            )));
        }
        if v_new.iter().any(|v| !v.is_finite() || v.abs() > opts.v_max) {
            return Err(Error::Propagation(format!("runaway velocity {v_new:?} at t = {t}")));
        }

        if shift.iter().all(|s| *s == 0.0) {
            // Both half steps see the same V.
            apply_phase(&mut state.psi, &full_phase, exec);
        } else {
            potential_phase(&mut state.psi, &v_here, 0.5 * dt, exec);
            for c in 0..d {
                state.offset[c] += shift[c];
            }
            v_here = potential_at(&config.potential, &points, d, &state.offset, exec);
            potential_phase(&mut state.psi, &v_here, 0.5 * dt, exec);
            full_phase.clear();
        }
        if full_phase.is_empty() {
            full_phase = phase_factors(&v_here, dt, exec);
        }
        state.v = v_new;
        state.t = t + dt;
        state.norm = norm_of(&state.psi, &grid);
        if (state.norm - norm0).abs() > opts.norm_tol {
            return Err(Error::Propagation(format!(
                "norm drifted by {:.3e} at t = {}",
                state.norm - norm0,
                state.t
            )));
        }
    }
    // d⟨x⟩/dt against v on the recorded samples.
    for i in 1..out.times.len().saturating_sub(1) {
        let span = out.times[i + 1] - out.times[i - 1];
        for c in 0..d {
            let dx = (out.x_mean[i + 1][c] - out.x_mean[i - 1][c]) / span;
            out.velocity_consistency = out.velocity_consistency.max((dx - out.v[i][c]).abs());
        }
    }
    if config.dim == Dim::Three {
        for c in 0..d {
            let lit = crate::motion::derivative_samples(&traj_v[c], dt, 2);
            for k in 2..lit.len().saturating_sub(2) {
                let q = traj_q[k];
                out.al_residual = out.al_residual.max((2.0 / 3.0 * q * q * (lit[k] - jerks[c][k])).abs());
            }
        }
    }
    out.trajectory = Trajectory { t0, dt, x: traj_x, v: traj_v, q: traj_q };
    out.final_state = state;
    Ok(out)
}

/// Finite Abraham–Lorentz force on a prescribed history.
///
/// d = 3 returns the literal (2/3) q_t² x⃛; the propagator instead uses the
/// order-reduced form of [`al_force_reduced`]. d = 2 returns
/// −(q_t/2π) ∫ ln((t−t′)/t_c) d²(q v)/dt′² dt′ with t_c from `ctx`.
pub fn al_force(
    d: Dim,
    ctx: &KernelContext,
    motion: &dyn Motion,
    charge: &Charge,
    t: f64,
    mem: Option<&MemoryOpts>,
) -> Result<Vec<f64>> {
    if motion.dim() != d.n() {
        return Err(invalid("motion dimension does not match d"));
    }
    let qt = charge.at(t);
    let c = ctx.c;
    match d {
        Dim::Three => Ok((0..3).map(|k| 2.0 / 3.0 * qt * qt / c.powi(3) * motion.deriv(3, t, k)).collect()),
        Dim::Two => {
            let mem = mem.ok_or_else(|| Error::InsufficientHistory("d = 2 needs memory settings".into()))?;
            let i_t = memory_integral(motion, charge, t, ctx.t_c, mem)?;
            Ok(i_t.iter().map(|i| -qt / (2.0 * PI * c * c) * i).collect())
        }
    }
}

/// Order-reduced three-dimensional force (2/3)(q_t²/m)(−⟨∂∂V⟩ v + q̇ E₀ + q Ė₀),
/// given the density-averaged Hessian of V (row-major d × d).
pub fn al_force_reduced(config: &ModelConfig, pulse: &PulseSpec, mean_hessian: &[f64], v: &[f64], t: f64) -> Vec<f64> {
    let d = v.len();
    let charge = config.charge_profile();
    let (qt, qd) = (charge.at(t), charge.rate(t));
    let e0 = pulse.field(t);
    let de0 = pulse.field_rate(t);
    (0..d)
        .map(|c| {
            let hv: f64 = (0..d).map(|b| mean_hessian[c * d + b] * v[b]).sum();
            2.0 / 3.0 * qt * qt / config.mass * (-hv + qd * e0[c] + qt * de0[c])
        })
        .collect()
}

/// Mode grid: log-spaced |k| times a fixed set of directions, each with its
/// transverse polarizations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KGrid {
    pub dim: Dim,
    pub ks: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
    /// Polarization vectors per direction.
    pub polarizations: Vec<Vec<Vec<f64>>>,
}

impl KGrid {
    /// `n_k` magnitudes log-spaced on [k_min, k_max] and `n_dirs`
    /// directions: equally spaced angles in d = 2, a Fibonacci sphere in d = 3.
    pub fn log_spaced(dim: Dim, k_min: f64, k_max: f64, n_k: usize, n_dirs: usize) -> Result<Self> {
        if !(k_min > 0.0 && k_max > k_min) || n_k < 2 || n_dirs == 0 {
            return Err(invalid("k-grid needs 0 < k_min < k_max, n_k ≥ 2 and at least one direction"));
        }
        let ks = (0..n_k)
            .map(|i| k_min * (k_max / k_min).powf(i as f64 / (n_k - 1) as f64))
            .collect();
        let directions: Vec<Vec<f64>> = match dim {
            Dim::Two => (0..n_dirs)
                .map(|i| {
                    let th = 2.0 * PI * i as f64 / n_dirs as f64;
                    vec![th.cos(), th.sin()]
                })
                .collect(),
            Dim::Three => {
                let golden = PI * (3.0 - 5f64.sqrt());
                (0..n_dirs)
                    .map(|i| {
                        let z = 1.0 - 2.0 * (i as f64 + 0.5) / n_dirs as f64;
                        let r = (1.0 - z * z).sqrt();
                        let ph = golden * i as f64;
                        vec![r * ph.cos(), r * ph.sin(), z]
                    })
                    .collect()
            }
        };
        let polarizations = directions.iter().map(|k| polarization_basis(k)).collect();
        Ok(Self { dim, ks, directions, polarizations })
    }

    /// Default grid for a configuration: |k| from ω₀/10 to 10√α.
    pub fn for_config(config: &ModelConfig, omega0: f64, n_k: usize, n_dirs: usize) -> Result<Self> {
        Self::log_spaced(config.dim, omega0 / 10.0, 10.0 * config.alpha.sqrt(), n_k, n_dirs)
    }

    /// Number of (k, direction, polarization) modes.
    pub fn modes(&self) -> usize {
        self.ks.len() * self.polarizations.iter().map(Vec::len).sum::<usize>()
    }
}

/// Field amplitudes β_{k℘}(t), indexed [k][direction][polarization].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeAmplitudes {
    pub grid: KGrid,
    pub t: f64,
    pub beta: Vec<Vec<Vec<Complex64>>>,
}

/// ∫₀^h e^{iωs} φ(s) ds for the two hat functions φ = 1 − s/h and s/h.
fn filon_weights(omega: f64, h: f64) -> (Complex64, Complex64) {
    let th = omega * h;
    let i = Complex64::i();
    if th.abs() < 0.5 {
        // Series of ∫₀¹ e^{iθu} du and ∫₀¹ u e^{iθu} du.
        let mut e0 = Complex64::new(0.0, 0.0);
        let mut e1 = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for n in 0..30 {
            e0 += term / (n as f64 + 1.0);
            e1 += term / (n as f64 + 2.0);
            term *= i * th / (n as f64 + 1.0);
        }
        ((e0 - e1) * h, e1 * h)
    } else {
        let eth = Complex64::from_polar(1.0, th);
        let e0 = (eth - 1.0) / (i * th);
        let e1 = eth / (i * th) + (eth - 1.0) / (th * th);
        ((e0 - e1) * h, e1 * h)
    }
}

/// Reconstruct the field amplitudes at the end of a sampled trajectory:
///
/// β(t) = β(t₀) e^{−iω_k(t−t₀)} − (1/2π) ω_k^{−1/2} e^{−k²/4α} ∫_{t₀}^t e^{−iω_k(t−t′)} q_{t′} ε·v(t′) dt′,
///
/// with the integral evaluated by Filon's rule on the piecewise-linear
/// interpolant of q ε·v. `beta0` defaults to zero.
pub fn reconstruct_modes(
    config: &ModelConfig,
    trajectory: &Trajectory,
    grid: &KGrid,
    beta0: Option<&ModeAmplitudes>,
    exec: Exec,
) -> Result<ModeAmplitudes> {
    let d = config.dim.n();
    if trajectory.dim() != d || grid.dim != config.dim {
        return Err(invalid("trajectory, k-grid and configuration dimensions differ"));
    }
    if trajectory.len() < 2 {
        return Err(invalid("trajectory needs at least two samples"));
    }
    if let Some(b) = beta0 {
        if b.grid != *grid {
            return Err(invalid("initial amplitudes live on a different k-grid"));
        }
    }
    let n = trajectory.len();
    let h = trajectory.dt;
    let t_end = trajectory.t_end();
    let t0 = trajectory.t0;
    let c = 1.0;
    let beta = exec.map_range(grid.ks.len(), |ik| {
        let k = grid.ks[ik];
        let w = c * k;
        let (wa, wb) = filon_weights(w, h);
        let pref = -(1.0 / (2.0 * PI)) / w.sqrt() * (-k * k / (4.0 * config.alpha)).exp();
        let free = Complex64::from_polar(1.0, -w * (t_end - t0));
        grid.polarizations
            .iter()
            .enumerate()
            .map(|(idir, pols)| {
                pols.iter()
                    .enumerate()
                    .map(|(ip, eps)| {
                        let g = |i: usize| trajectory.q[i] * (0..d).map(|cc| eps[cc] * trajectory.v[cc][i]).sum::<f64>();
                        let mut acc = Complex64::new(0.0, 0.0);
                        let mut g_prev = g(0);
                        for i in 0..n - 1 {
                            let g_next = g(i + 1);
                            // e^{−iω(t−t′)} with t′ = t_i + s.
                            let phase = Complex64::from_polar(1.0, -w * (t_end - trajectory.time(i)));
                            acc += phase * (wa * g_prev + wb * g_next);
                            g_prev = g_next;
                        }
                        let b0 = beta0.map_or(Complex64::new(0.0, 0.0), |b| b.beta[ik][idir][ip]);
                        b0 * free + pref * acc
                    })
                    .collect()
            })
            .collect()
    });
    Ok(ModeAmplitudes { grid: grid.clone(), t: t_end, beta })
}

/// Effective coefficient of v̇ with and without the mass counterterm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownReport {
    pub d: Dim,
    pub mass: f64,
    pub alphas: Vec<f64>,
    /// Local self-force coefficient c_loc(α), F_local = −c_loc ẍ.
    pub local_coefficient: Vec<f64>,
    /// m + c_loc: the coefficient when the bare mass is set to m.
    pub naive_coefficient: Vec<f64>,
    /// m_bare(α) + c_loc.
    pub renormalized_coefficient: Vec<f64>,
    /// max over sample times of |F_RR|, a proxy for the self-field strength.
    pub rr_amplitude: Vec<f64>,
    /// Fitted coefficient of √α (d = 3) or ln α (d = 2) in the naive path.
    pub growth_coefficient: f64,
    /// (4/3) q²/√(2π) in d = 3, q²/4π in d = 2.
    pub expected_growth: f64,
    pub growth_r_squared: f64,
    /// max over α of |m_bare + c_loc − m| / m.
    pub renormalized_max_deviation: f64,
}

/// Extract the v̇ coefficient of the self-force on one prescribed trajectory
/// for several α, with the bare mass set to m and then to m_bare(α).
///
/// The finite Abraham–Lorentz remainder is subtracted from the exact force
/// and the rest is regressed on ẍ over the sample times.
#[allow(clippy::too_many_arguments)]
pub fn naive_breakdown_demo(
    config: &ModelConfig,
    motion: &dyn Motion,
    times: &[f64],
    alphas: &[f64],
    exact: &ExactOpts,
    mem: &MemoryOpts,
    exec: Exec,
) -> Result<BreakdownReport> {
    config.validate()?;
    let d = config.dim;
    if motion.dim() != d.n() || times.is_empty() || alphas.len() < 2 {
        return Err(invalid("demo needs a matching motion, sample times and at least two α"));
    }
    let charge = config.charge_profile();
    let m = config.mass;
    let base = KernelContext::new(config.alpha, m, config.eta)?;
    // The memory remainder does not depend on α.
    let memory: Vec<Vec<f64>> = match d {
        Dim::Two => times
            .iter()
            .map(|&t| al_force(d, &base, motion, &charge, t, Some(mem)))
            .collect::<Result<_>>()?,
        Dim::Three => times
            .iter()
            .map(|&t| al_force(d, &base, motion, &charge, t, None))
            .collect::<Result<_>>()?,
    };
    let per_alpha = exec.map(alphas, |&a| -> Result<(f64, f64, f64)> {
        let ctx = base.with_alpha(a)?;
        let (mut num, mut den, mut amp) = (0.0, 0.0, 0.0f64);
        for (it, &t) in times.iter().enumerate() {
            let f = rr_force_exact(&ctx, motion, &charge, d, t, exact)?;
            for k in 0..d.n() {
                let acc = motion.deriv(2, t, k);
                let local = f.force[k] - memory[it][k];
                // Least squares of local = −c_loc · acc with q_t² scaling.
                let q2 = charge.at(t).powi(2);
                num -= local * acc * q2;
                den += acc * acc * q2 * q2;
                amp = amp.max(f.force[k].abs());
            }
        }
        let c_loc = if den > 0.0 { num / den * config.charge.powi(2) } else { 0.0 };
        let m_bare = bare_mass(d, m, config.charge, a, ctx.alpha0)?;
        Ok((c_loc, m_bare, amp))
    });
    let mut local = Vec::with_capacity(alphas.len());
    let mut renorm = Vec::with_capacity(alphas.len());
    let mut amps = Vec::with_capacity(alphas.len());
    for r in per_alpha {
        let (c_loc, m_bare, amp) = r?;
        local.push(c_loc);
        renorm.push(m_bare + c_loc);
        amps.push(amp);
    }
    let naive: Vec<f64> = local.iter().map(|c| m + c).collect();
    let q2 = config.charge * config.charge;
    let (fit, expected) = match d {
        Dim::Three => (
            least_squares(alphas, &local, &[&|a: f64| a.sqrt(), &|_| 1.0])?,
            4.0 / 3.0 * q2 / (2.0 * PI).sqrt(),
        ),
        Dim::Two => (least_squares(alphas, &local, &[&|a: f64| a.ln(), &|_| 1.0])?, q2 / (4.0 * PI)),
    };
    let dev = renorm.iter().map(|c| (c - m).abs() / m).fold(0.0, f64::max);
    Ok(BreakdownReport {
        d,
        mass: m,
        alphas: alphas.to_vec(),
        local_coefficient: local,
        naive_coefficient: naive,
        renormalized_coefficient: renorm,
        rr_amplitude: amps,
        growth_coefficient: fit.coefficients[0],
        expected_growth: expected,
        growth_r_squared: fit.r_squared,
        renormalized_max_deviation: dev,
    })
}

/// Energy bookkeeping of the reference split-step run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyCheck {
    pub initial: f64,
    pub max_relative_drift: f64,
    pub norm_drift: f64,
}

/// Propagate ψ under p²/2m + V by kinetic–potential Strang splitting and
/// report the drift of ⟨p²/2m + V⟩. This is the uncoupled (q = 0) reference
/// dynamics and is independent of the mean-field scheme.
pub fn reference_energy_check(
    pot: &PotentialSpec,
    grid: &SpatialGrid,
    psi0: &[Complex64],
    dt: f64,
    steps: usize,
    exec: Exec,
) -> Result<EnergyCheck> {
    grid.validate()?;
    if psi0.len() != grid.len() || !(dt > 0.0) {
        return Err(invalid("initial state does not fit the grid or dt is not positive"));
    }
    let d = grid.dim.n();
    let n = grid.n;
    let fft = GridFft::new(grid);
    let mut x = vec![0.0; d];
    let vals: Vec<f64> = (0..grid.len())
        .map(|i| {
            grid.point(i, &mut x);
            pot.value(&x)
        })
        .collect();
    let k2: Vec<f64> = (0..grid.len())
        .map(|idx| {
            let mut r = idx;
            let mut s = 0.0;
            for _ in 0..d {
                s += grid.wavenumber(r % n).powi(2);
                r /= n;
            }
            s
        })
        .collect();
    let m = pot.mass;
    let energy = |psi: &[Complex64]| -> f64 {
        let mut hat = psi.to_vec();
        fft.transform(&mut hat, true);
        let total = grid.len() as f64;
        let kin = hat.iter().zip(&k2).map(|(z, k)| z.norm_sqr() * k).sum::<f64>() / total / (2.0 * m);
        let pv = psi.iter().zip(&vals).map(|(z, v)| z.norm_sqr() * v).sum::<f64>();
        let nrm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>();
        (kin + pv) / nrm
    };
    let mut psi = psi0.to_vec();
    let e0 = energy(&psi);
    let n0 = norm_of(&psi, grid);
    let mut drift = 0.0f64;
    let kin_phase: Vec<Complex64> = k2.iter().map(|k| Complex64::from_polar(1.0, -k / (2.0 * m) * dt)).collect();
    for _ in 0..steps {
        potential_phase(&mut psi, &vals, 0.5 * dt, exec);
        fft.transform(&mut psi, true);
        psi.iter_mut().zip(&kin_phase).for_each(|(z, p)| *z *= p);
        fft.transform(&mut psi, false);
        potential_phase(&mut psi, &vals, 0.5 * dt, exec);
        drift = drift.max(((energy(&psi) - e0) / e0).abs());
    }
    Ok(EnergyCheck {
        initial: e0,
        max_relative_drift: drift,
        norm_drift: (norm_of(&psi, grid) - n0).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_translation_is_an_isometry_and_shifts_smooth_data() {
        let grid = SpatialGrid { dim: Dim::Two, n: 64, length: 20.0 };
        let fft = GridFft::new(&grid);
        let mut x = [0.0; 2];
        let f = |x: &[f64]| (-0.5 * (x[0] * x[0] + x[1] * x[1])).exp();
        let mut data: Vec<Complex64> = (0..grid.len())
            .map(|i| {
                grid.point(i, &mut x);
                Complex64::new(f(&x), 0.0)
            })
            .collect();
        let before = norm_of(&data, &grid);
        let shift = [0.37, -1.21];
        translate(&mut data, &grid, &fft, &shift);
        assert!((norm_of(&data, &grid) - before).abs() < 1e-13 * before);
        for (i, z) in data.iter().enumerate() {
            grid.point(i, &mut x);
            let expected = f(&[x[0] - shift[0], x[1] - shift[1]]);
            assert!((z.re - expected).abs() < 1e-12 && z.im.abs() < 1e-12, "{i} {z} {expected}");
        }
    }

    #[test]
    fn filon_weights_match_direct_quadrature() {
        for (omega, h) in [(0.3, 0.1), (40.0, 0.1), (7.0, 0.5)] {
            let (a, b) = filon_weights(omega, h);
            let n = 20_000;
            let (mut ea, mut eb) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for k in 0..n {
                let s = (k as f64 + 0.5) * h / n as f64;
                let e = Complex64::from_polar(1.0, omega * s) * (h / n as f64);
                ea += e * (1.0 - s / h);
                eb += e * (s / h);
            }
            assert!((a - ea).norm() < 1e-9 * h && (b - eb).norm() < 1e-9 * h);
        }
    }

    #[test]
    fn three_dimensional_fft_round_trips() {
        let grid = SpatialGrid { dim: Dim::Three, n: 8, length: 4.0 };
        let fft = GridFft::new(&grid);
        let orig: Vec<Complex64> = (0..grid.len()).map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64).cos())).collect();
        let mut data = orig.clone();
        fft.transform(&mut data, true);
        fft.transform(&mut data, false);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-13);
        }
    }
}
