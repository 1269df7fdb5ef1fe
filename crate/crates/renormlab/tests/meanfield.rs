use std::f64::consts::PI;

use num_complex::Complex64;
use renormlab::atom::PotentialSpec;
use renormlab::kernels::KernelContext;
use renormlab::meanfield::*;
use renormlab::model::{Charge, Dim, ModelConfig, Switching};
use renormlab::motion::{HarmonicMotion, Motion, Trajectory};
use renormlab::rrforce::{ExactOpts, MemoryOpts};
use renormlab::{Error, Exec};

fn harmonic_config(dim: Dim, q: f64, omega0: f64, switching: Switching) -> ModelConfig {
    ModelConfig {
        dim,
        mass: 1.0,
        charge: q,
        potential: PotentialSpec::harmonic(dim, 1.0, omega0),
        alpha: 1e4,
        eta: 1.0,
        switching,
    }
}

fn ctx_for(config: &ModelConfig) -> KernelContext {
    KernelContext::new(config.alpha, config.mass, config.eta).unwrap()
}

fn x_pulse(dim: Dim, center: f64, width: f64, carrier: f64, amplitude: f64) -> PulseSpec {
    let mut polarization = vec![0.0; dim.n()];
    polarization[0] = 1.0;
    PulseSpec { center, width, carrier, amplitude, phase: 0.0, polarization }
}

/// Simpson's rule on [a, b] with n (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

#[test]
fn ground_state_is_a_fixed_point_in_two_dimensions() {
    let config = harmonic_config(Dim::Two, 0.3, 1.0, Switching::Constant);
    let grid = SpatialGrid { dim: Dim::Two, n: 48, length: 14.0 };
    let state = MeanFieldState::ground(&config, grid, 0.0).unwrap();
    let opts = PropagateOpts { dt: 0.01, steps: 2000, record_every: 50, ..Default::default() };
    let run = propagate(&config, &ctx_for(&config), &PulseSpec::none(Dim::Two), state, &opts, Exec::default()).unwrap();
    let vmax = run.v.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    assert!(vmax < 1e-12, "v drifted to {vmax:e}");
    assert!(run.max_density_change < 1e-10);
    assert!(run.norm.iter().all(|n| (n - 1.0).abs() < 1e-10));
}

#[test]
fn uncharged_atom_ignores_the_pulse() {
    let config = harmonic_config(Dim::Two, 0.0, 1.0, Switching::Constant);
    let grid = SpatialGrid { dim: Dim::Two, n: 32, length: 12.0 };
    let state = MeanFieldState::ground(&config, grid, 0.0).unwrap();
    let pulse = x_pulse(Dim::Two, 3.0, 1.0, 1.0, 0.1);
    let opts = PropagateOpts { dt: 0.02, steps: 400, record_every: 10, ..Default::default() };
    let run = propagate(&config, &ctx_for(&config), &pulse, state, &opts, Exec::default()).unwrap();
    assert!(run.v.iter().flatten().all(|v| v.abs() < 1e-14));
}

/// mẍ + mγẋ + mω₀²x = qE₀ + (2/3)(q³/m)Ė₀ with γ = (2/3)q²ω₀²/m, solved by
/// its retarded Green's function.
fn driven_oscillator(pulse: &PulseSpec, q: f64, omega0: f64, t: f64) -> f64 {
    let gamma = 2.0 / 3.0 * q * q * omega0 * omega0;
    let wd = (omega0 * omega0 - 0.25 * gamma * gamma).sqrt();
    let force = |s: f64| q * pulse.field(s)[0] + 2.0 / 3.0 * q.powi(3) * pulse.field_rate(s)[0];
    simpson(
        |s| {
            let tau = t - s;
            (-0.5 * gamma * tau).exp() * (wd * tau).sin() / wd * force(s)
        },
        0.0,
        t.max(1e-12),
        4000,
    )
}

#[test]
fn weak_pulse_matches_the_damped_oscillator() {
    let (q, omega0) = (0.3, 1.0);
    let config = harmonic_config(Dim::Three, q, omega0, Switching::Constant);
    let grid = SpatialGrid { dim: Dim::Three, n: 16, length: 10.0 };
    let state = MeanFieldState::ground(&config, grid, 0.0).unwrap();
    let pulse = x_pulse(Dim::Three, 8.0, 2.0, omega0, 1e-3);
    let dt = 0.025;
    let steps = (5.0 * 2.0 * PI / omega0 / dt) as usize;
    let opts = PropagateOpts { dt, steps, record_every: 4, ..Default::default() };
    let run = propagate(&config, &ctx_for(&config), &pulse, state, &opts, Exec::default()).unwrap();
    let (mut num, mut den) = (0.0, 0.0);
    for (t, x) in run.times.iter().zip(&run.x_mean) {
        let oracle = driven_oscillator(&pulse, q, omega0, *t);
        num += (x[0] - oracle).powi(2);
        den += oracle * oracle;
    }
    let rel = (num / den).sqrt();
    assert!(rel < 2e-2, "relative L2 error {rel:e}");
    assert!(run.al_residual < 1e-4, "order-reduction residual {:e}", run.al_residual);
}

#[test]
fn mean_position_tracks_velocity_at_second_order() {
    let config = harmonic_config(Dim::Two, 0.2, 1.0, Switching::Constant);
    let grid = SpatialGrid { dim: Dim::Two, n: 32, length: 12.0 };
    let pulse = x_pulse(Dim::Two, 3.0, 1.0, 1.0, 1e-2);
    let consistency = |record_every: usize| {
        let state = MeanFieldState::ground(&config, grid, 0.0).unwrap();
        let opts = PropagateOpts { dt: 0.01, steps: 600, record_every, ..Default::default() };
        propagate(&config, &ctx_for(&config), &pulse, state, &opts, Exec::default())
            .unwrap()
            .velocity_consistency
    };
    let coarse = consistency(20);
    let fine = consistency(10);
    let ratio = coarse / fine;
    assert!((3.0..5.0).contains(&ratio), "consistency ratio {ratio}");
}

#[test]
fn free_oscillation_is_radiatively_damped() {
    let (q, omega0) = (0.3, 1.0);
    let config = harmonic_config(Dim::Three, q, omega0, Switching::Constant);
    let grid = SpatialGrid { dim: Dim::Three, n: 12, length: 10.0 };
    let mut state = MeanFieldState::ground(&config, grid, 0.0).unwrap();
    state.v = vec![1e-3, 0.0, 0.0];
    let per_period = 64;
    let dt = 2.0 * PI / omega0 / per_period as f64;
    let opts = PropagateOpts { dt, steps: 50 * per_period, record_every: 1, ..Default::default() };
    let run = propagate(&config, &ctx_for(&config), &PulseSpec::none(Dim::Three), state, &opts, Exec::default()).unwrap();
    let peaks: Vec<f64> = run
        .v
        .chunks(per_period)
        .map(|c| c.iter().fold(0.0f64, |a, v| a.max(v[0].abs())))
        .collect();
    assert!(peaks.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    // Amplitude decays as e^{−γt/2}, γ = (2/3)q²ω₀².
    let gamma = 2.0 / 3.0 * q * q * omega0 * omega0;
    let expected = (-0.5 * gamma * 49.0 * 2.0 * PI).exp();
    let measured = peaks[49] / peaks[0];
    assert!((measured / expected - 1.0).abs() < 1e-2, "{measured} vs {expected}");
}

#[test]
fn propagation_guards_trip() {
    let config = harmonic_config(Dim::Two, 0.3, 1.0, Switching::Constant);
    let grid = SpatialGrid { dim: Dim::Two, n: 32, length: 12.0 };
    let ctx = ctx_for(&config);
    let state = MeanFieldState::ground(&config, grid, 0.0).unwrap();
    let none = PulseSpec::none(Dim::Two);

    let coarse = PropagateOpts { dt: 0.5, steps: 10, ..Default::default() };
    assert!(matches!(propagate(&config, &ctx, &none, state.clone(), &coarse, Exec::default()), Err(Error::InvalidInput(_))));

    let mut fast = state.clone();
    fast.v = vec![0.3, 0.0];
    let opts = PropagateOpts { dt: 0.01, steps: 10, v_max: 0.1, ..Default::default() };
    assert!(matches!(propagate(&config, &ctx, &none, fast.clone(), &opts, Exec::default()), Err(Error::Propagation(_))));

    let opts = PropagateOpts { dt: 0.01, steps: 10, cfl: 1e-3, ..Default::default() };
    assert!(matches!(propagate(&config, &ctx, &none, fast, &opts, Exec::default()), Err(Error::Propagation(_))));
}

#[test]
fn reduced_al_force_equals_literal_on_harmonic_motion() {
    let (q, omega0) = (0.3, 0.7);
    let config = harmonic_config(Dim::Three, q, omega0, Switching::Constant);
    let ctx = ctx_for(&config);
    let motion = HarmonicMotion::from_velocity(vec![1e-2, -3e-3, 5e-3], omega0);
    let charge = config.charge_profile();
    let hess = [omega0 * omega0, 0.0, 0.0, 0.0, omega0 * omega0, 0.0, 0.0, 0.0, omega0 * omega0];
    for t in [0.0, 0.3, 1.7, 4.2] {
        let literal = al_force(Dim::Three, &ctx, &motion, &charge, t, None).unwrap();
        let v = motion.deriv_vec(1, t);
        let reduced = al_force_reduced(&config, &PulseSpec::none(Dim::Three), &hess, &v, t);
        for (a, b) in literal.iter().zip(&reduced) {
            assert!((a - b).abs() <= 1e-15 + 1e-12 * a.abs(), "{a} vs {b}");
        }
    }
}

/// x⃛ = sech²(t/s): ẍ = s(1 + tanh(t/s)), v = s t + s² ln cosh(t/s) + s² ln 2.
struct SechJerk {
    s: f64,
}

impl Motion for SechJerk {
    fn dim(&self) -> usize {
        2
    }
    fn deriv(&self, n: usize, t: f64, c: usize) -> f64 {
        let s = self.s;
        let u = t / s;
        let scale = if c == 0 { 1.0 } else { -0.5 };
        let lncosh = u.abs() + (-2.0 * u.abs()).exp().ln_1p() - std::f64::consts::LN_2;
        scale
            * match n {
                1 => s * t + s * s * lncosh + s * s * std::f64::consts::LN_2,
                2 => s * (1.0 + u.tanh()),
                3 => 1.0 / (u.cosh() * u.cosh()),
                _ => 0.0,
            }
    }
}

#[test]
fn two_dimensional_al_force_matches_log_quadrature() {
    let config = harmonic_config(Dim::Two, 0.4, 1.0, Switching::Constant);
    let ctx = ctx_for(&config);
    let motion = SechJerk { s: 2.0 };
    let charge = config.charge_profile();
    let t = 0.5;
    let mem = MemoryOpts { dt: 0.002, history_start: Some(t - 80.0) };
    let force = al_force(Dim::Two, &ctx, &motion, &charge, t, Some(&mem)).unwrap();
    // ∫₀^∞ ln(τ/t_c) x⃛(t − τ) dτ with τ = e^u.
    let memory = simpson(
        |u| {
            let tau = u.exp();
            (u - ctx.t_c.ln()) * motion.deriv(3, t - tau, 0) * tau
        },
        -40.0,
        80f64.ln(),
        200_000,
    );
    for (c, scale) in [(0, 1.0), (1, -0.5)] {
        let expected = -config.charge * config.charge / (2.0 * PI) * scale * memory;
        assert!((force[c] - expected).abs() < 1e-6 * expected.abs(), "{} vs {expected}", force[c]);
    }
}

#[test]
fn al_force_vanishes_for_uniform_motion() {
    struct Uniform;
    impl Motion for Uniform {
        fn dim(&self) -> usize {
            2
        }
        fn deriv(&self, n: usize, t: f64, _c: usize) -> f64 {
            match n {
                0 => 0.01 * t,
                1 => 0.01,
                _ => 0.0,
            }
        }
    }
    let config = harmonic_config(Dim::Two, 0.3, 1.0, Switching::Constant);
    let ctx = ctx_for(&config);
    let charge = Charge::constant(0.3);
    let mem = MemoryOpts { dt: 0.01, history_start: Some(-10.0) };
    let f = al_force(Dim::Two, &ctx, &Uniform, &charge, 0.0, Some(&mem)).unwrap();
    assert!(f.iter().all(|x| *x == 0.0));
}

fn sampled(v: impl Fn(f64) -> f64, q: f64, t0: f64, dt: f64, n: usize) -> Trajectory {
    let ts: Vec<f64> = (0..n).map(|i| t0 + i as f64 * dt).collect();
    Trajectory {
        t0,
        dt,
        x: vec![],
        v: vec![vec![0.0; n], ts.iter().map(|&t| v(t)).collect()],
        q: vec![q; n],
    }
}

#[test]
fn modes_stay_empty_without_a_source() {
    let config = harmonic_config(Dim::Two, 0.3, 1.0, Switching::Constant);
    let grid = KGrid::for_config(&config, 1.0, 12, 8).unwrap();
    let traj = sampled(|_| 0.0, 0.3, 0.0, 0.01, 500);
    let modes = reconstruct_modes(&config, &traj, &grid, None, Exec::default()).unwrap();
    assert!(modes.beta.iter().flatten().flatten().all(|b| b.norm() == 0.0));
    assert_eq!(grid.modes(), 12 * 8);
}

#[test]
fn resonant_mode_grows_linearly() {
    let omega0 = 0.5;
    let config = harmonic_config(Dim::Two, 0.3, omega0, Switching::Constant);
    let grid = KGrid::log_spaced(Dim::Two, omega0, 2.0 * omega0, 2, 1).unwrap();
    let dt = 0.01;
    let periods = |n: usize| {
        let traj = sampled(|t| 1e-2 * (omega0 * t).sin(), 0.3, 0.0, dt, (n as f64 * 2.0 * PI / omega0 / dt) as usize + 1);
        reconstruct_modes(&config, &traj, &grid, None, Exec::default()).unwrap().beta[0][0][0].norm()
    };
    let ratio = periods(40) / periods(20);
    assert!((ratio - 2.0).abs() < 0.02, "growth ratio {ratio}");
}

#[test]
fn modes_satisfy_their_equation_of_motion() {
    let config = harmonic_config(Dim::Three, 0.3, 1.0, Switching::Constant);
    let grid = KGrid::log_spaced(Dim::Three, 0.1, 30.0, 6, 5).unwrap();
    let dt = 0.001;
    let v = |t: f64| 1e-2 * (0.9 * t).sin() * (-0.05 * t * t).exp();
    let make = |n: usize| {
        let ts: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
        Trajectory {
            t0: 0.0,
            dt,
            x: vec![],
            v: vec![ts.iter().map(|&t| v(t)).collect(), ts.iter().map(|&t| 0.5 * v(t)).collect(), vec![0.0; n]],
            q: vec![0.3; n],
        }
    };
    let n = 3000;
    let minus = reconstruct_modes(&config, &make(n - 1), &grid, None, Exec::default()).unwrap();
    let centre = reconstruct_modes(&config, &make(n), &grid, None, Exec::default()).unwrap();
    let plus = reconstruct_modes(&config, &make(n + 1), &grid, None, Exec::default()).unwrap();
    let t = (n - 1) as f64 * dt;
    let i = Complex64::i();
    for (ik, &k) in grid.ks.iter().enumerate() {
        for (idir, pols) in grid.polarizations.iter().enumerate() {
            for (ip, eps) in pols.iter().enumerate() {
                let deriv = (plus.beta[ik][idir][ip] - minus.beta[ik][idir][ip]) / (2.0 * dt);
                let source = 0.3 * (eps[0] * v(t) + eps[1] * 0.5 * v(t));
                let rhs = -i * k * centre.beta[ik][idir][ip]
                    - (1.0 / (2.0 * PI)) / k.sqrt() * (-k * k / (4.0 * config.alpha)).exp() * source;
                let scale = 1e-3 / k.sqrt();
                assert!((deriv - rhs).norm() < 1e-3 * scale + 1e-2 * (k * dt).powi(2) * scale, "k = {k}: {deriv} vs {rhs}");
            }
        }
    }
}

#[test]
fn initial_amplitudes_rotate_freely() {
    let config = harmonic_config(Dim::Two, 0.3, 1.0, Switching::Constant);
    let grid = KGrid::log_spaced(Dim::Two, 0.2, 5.0, 4, 3).unwrap();
    let traj = sampled(|_| 0.0, 0.0, 0.0, 0.01, 301);
    let mut beta0 = reconstruct_modes(&config, &traj, &grid, None, Exec::default()).unwrap();
    for row in beta0.beta.iter_mut().flatten().flatten() {
        *row = Complex64::new(1.0, 0.5);
    }
    let out = reconstruct_modes(&config, &traj, &grid, Some(&beta0), Exec::default()).unwrap();
    for (ik, &k) in grid.ks.iter().enumerate() {
        let expected = Complex64::new(1.0, 0.5) * Complex64::from_polar(1.0, -k * 3.0);
        assert!((out.beta[ik][0][0] - expected).norm() < 1e-12);
    }
}

#[test]
fn uncharged_breakdown_demo_returns_the_mass() {
    let w = 0.2;
    let config = harmonic_config(Dim::Three, 0.0, w, Switching::Constant);
    let motion = HarmonicMotion::from_velocity(vec![0.01, 0.0, 0.0], w);
    let report = naive_breakdown_demo(
        &config,
        &motion,
        &[1.0, 2.0],
        &[1e3, 1e4, 1e5],
        &ExactOpts { tol: 1e-10, max_frequency: w, history_start: Some(-100.0) },
        &MemoryOpts { dt: 0.05, history_start: Some(-100.0) },
        Exec::default(),
    )
    .unwrap();
    for (n, r) in report.naive_coefficient.iter().zip(&report.renormalized_coefficient) {
        assert_eq!(*n, 1.0);
        assert_eq!(*r, 1.0);
    }
}

#[test]
fn breakdown_demo_grows_with_sqrt_alpha_in_three_dimensions() {
    let w = 0.1;
    let config = harmonic_config(Dim::Three, 0.3, w, Switching::tanh(0.0, 20.0 / w));
    let motion = HarmonicMotion::from_velocity(vec![0.01, 0.005, 0.0], w);
    let report = naive_breakdown_demo(
        &config,
        &motion,
        &[1900.3, 1907.1, 1915.9],
        &[1e3, 1e4, 1e5, 1e6],
        &ExactOpts { tol: 1e-10, max_frequency: w, history_start: None },
        &MemoryOpts { dt: 0.05, history_start: None },
        Exec::default(),
    )
    .unwrap();
    assert!((report.growth_coefficient / report.expected_growth - 1.0).abs() < 1e-2);
    assert!(report.renormalized_max_deviation < 1e-2);
    assert!(report.naive_coefficient.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn reference_split_step_conserves_energy() {
    let pot = PotentialSpec::harmonic(Dim::Two, 1.0, 1.0);
    let grid = SpatialGrid { dim: Dim::Two, n: 64, length: 16.0 };
    let mut psi = ground_state(&pot, &grid).unwrap();
    // Displace the ground state to make the motion non-trivial.
    let mut x = [0.0; 2];
    for (i, z) in psi.iter_mut().enumerate() {
        grid.point(i, &mut x);
        *z *= Complex64::from_polar(1.0, 0.8 * x[0]);
    }
    let check = reference_energy_check(&pot, &grid, &psi, 1e-4, 2000, Exec::default()).unwrap();
    assert!(check.max_relative_drift < 1e-8, "drift {:e}", check.max_relative_drift);
    assert!(check.norm_drift < 1e-12);
}

#[test]
fn pulse_rate_is_the_derivative_of_the_field() {
    let p = PulseSpec { center: 1.0, width: 0.7, carrier: 3.0, amplitude: 2.0, phase: 0.4, polarization: vec![0.6, 0.8] };
    let h = 1e-5;
    for t in [-1.0, 0.3, 1.0, 2.2] {
        let fd = (p.field(t + h)[1] - p.field(t - h)[1]) / (2.0 * h);
        assert!((fd - p.field_rate(t)[1]).abs() < 1e-8);
    }
    assert!(p.field(40.0)[0].abs() < 1e-200);
}
