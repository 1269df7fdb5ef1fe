//! The ten acceptance criteria, each printed as one PASS/FAIL line with the
//! measured quantities and wall time. Exits nonzero when any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use renormlab::atom::{solve_spectrum, AtomSpectrum, PotentialSpec};
use renormlab::kernels::*;
use renormlab::meanfield::*;
use renormlab::memconv::*;
use renormlab::model::{Charge, Dim, ModelConfig, Switching};
use renormlab::motion::HarmonicMotion;
use renormlab::rrforce::*;
use renormlab::rspt::*;
use renormlab::special::EULER_GAMMA;
use renormlab::Exec;

const Q: f64 = 0.3;
const W: f64 = 0.1;
const T_EVAL: f64 = 1900.3;

struct Outcome {
    pass: bool,
    detail: String,
}

fn zeta() -> f64 {
    -0.5 * (EULER_GAMMA + 2f64.ln())
}

fn ctx(alpha: f64) -> KernelContext {
    KernelContext::with_zeta(alpha, 1.0, 1.0, zeta()).unwrap()
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    s * h / 3.0
}

fn switched() -> Charge {
    Charge {
        q: Q,
        switching: Switching::tanh(0.0, 20.0 / W),
    }
}

fn exact_opts() -> ExactOpts {
    ExactOpts {
        tol: 1e-10,
        max_frequency: W,
        history_start: None,
    }
}

fn harmonic_config(dim: Dim, omega0: f64, switching: Switching) -> ModelConfig {
    ModelConfig {
        dim,
        mass: 1.0,
        charge: Q,
        potential: PotentialSpec::harmonic(dim, 1.0, omega0),
        alpha: 1e4,
        eta: 1.0,
        switching,
    }
}

fn spectrum(dim: Dim) -> AtomSpectrum {
    let j_max = if dim == Dim::Two { 5 } else { 9 };
    solve_spectrum(&PotentialSpec::harmonic(dim, 1.0, 1e-3), j_max).unwrap()
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

fn kernels() -> Outcome {
    // Oracle error budget: 1e−9 relative plus the rounding of the O(peak) sum.
    let close = |got: f64, want: f64, peak: f64| (got - want).abs() <= 1e-9 * want.abs() + 1e-14 * peak;
    let mut worst = 0.0f64;
    let mut pass = true;
    for alpha in [1.0, 10.0, 1e3] {
        let c = ctx(alpha);
        let kmax = (80.0f64 * alpha).sqrt();
        let gauss = |k: f64| (-k * k / (2.0 * alpha)).exp();
        for i in 0..=30 {
            let s = 0.1 * i as f64;
            let rho = simpson(|k| (k * s).cos() * gauss(k), 0.0, kmax, 200_000) / PI;
            let xi = simpson(|k| (k * s).sin() * gauss(k), 0.0, kmax, 200_000);
            pass &= close(rho_alpha(&c, s), rho, rho_alpha(&c, 0.0));
            pass &= close(xi_alpha(&c, s), xi, (2.0 * alpha).sqrt());
            worst = worst.max((rho_alpha(&c, s) - rho).abs() / rho.abs().max(1e-300).max(1e-5 * rho_alpha(&c, 0.0)));
        }
        for delta in [0.5, 1.0, 2.0, 5.0] {
            let want = simpson(|t| xi_alpha(&c, t), c.t_c, delta, 40_000);
            let got = f_alpha(&c, delta).unwrap();
            pass &= close(got, want, 1.0);
        }
    }
    let c = ctx(10.0);
    let closed = [0.0, (10.0 / (2.0 * PI)).sqrt(), 1.0, 3.0 * (2.0 / (PI * 10.0)).sqrt()];
    let dd = |t: f64| (10.0 / (2.0 * PI)).sqrt() * (100.0 * t * t - 10.0) * (-5.0 * t * t).exp();
    let mut moment_err = 0.0f64;
    for (n, want) in closed.iter().enumerate() {
        pass &= rho_moment(&c, n).unwrap() == *want;
        let q = simpson(|t| t.powi(n as i32) * dd(t), 0.0, 4.0, 40_000);
        moment_err = moment_err.max((q - want).abs());
    }
    pass &= moment_err < 1e-8;
    Outcome {
        pass,
        detail: format!("worst rho rel {worst:.2e}, moment quadrature {moment_err:.2e}"),
    }
}

fn scan_alphas() -> Vec<f64> {
    (0..7).map(|i| 1e3 * 10f64.powf(0.5 * i as f64)).collect()
}

fn d3_divergence() -> Outcome {
    let m = HarmonicMotion::from_velocity(vec![0.01, 0.005, 0.0], W);
    let fit = divergence_scan(&ctx(1e4), &m, &switched(), Dim::Three, T_EVAL, &scan_alphas(), &exact_opts(), Exec::default()).unwrap();
    Outcome {
        pass: fit.relative_error < 1e-2,
        detail: format!("sqrt-alpha coefficient rel err {:.2e}, R² {:.9}", fit.relative_error, fit.r_squared),
    }
}

fn d2_divergence() -> Outcome {
    let m = HarmonicMotion::from_velocity(vec![0.01, 0.005], W);
    let fit = divergence_scan(&ctx(1e4), &m, &switched(), Dim::Two, T_EVAL, &scan_alphas(), &exact_opts(), Exec::default()).unwrap();
    let mem = MemoryOpts { dt: 0.05, history_start: None };
    let base = rr_force_d2_local_memory(&ctx(1e8), &m, &switched(), T_EVAL, &mem).unwrap();
    let mut spread = 0.0f64;
    for eta in [0.5, 2.0] {
        let f = rr_force_d2_local_memory(&ctx(1e8).with_eta(eta).unwrap(), &m, &switched(), T_EVAL, &mem).unwrap();
        for c in 0..2 {
            spread = spread.max((f[c] - base[c]).abs() / base[c].abs());
        }
    }
    Outcome {
        pass: fit.relative_error < 1e-2 && spread < 1e-6,
        detail: format!("ln-alpha coefficient rel err {:.2e}, eta spread {spread:.2e}", fit.relative_error),
    }
}

fn cancellation() -> Outcome {
    let alphas: Vec<f64> = (0..7).map(|i| 1e2 * 10f64.powf(0.5 * i as f64)).collect();
    let opts = ShiftOpts::default();
    let d3 = cancellation_report(&spectrum(Dim::Three), &ctx(1e4), Q, 1, &alphas, &opts, Exec::default()).unwrap();
    let d2 = cancellation_report(&spectrum(Dim::Two), &ctx(1e4), Q, 1, &alphas, &opts, Exec::default()).unwrap();
    let p = d2.residual_exponent.unwrap_or(f64::NAN);
    Outcome {
        pass: d3.max_relative_residual < 1e-13 && (p + 1.0).abs() < 0.15,
        detail: format!("d3 residual {:.2e}, d2 exponent {p:.4}", d3.max_relative_residual),
    }
}

fn finiteness() -> Outcome {
    let opts = ShiftOpts::default();
    let s2 = spectrum(Dim::Two);
    let lo = renorm_shift_d2(&s2, &ctx(1e6), Q, 1, &opts).unwrap();
    let hi = renorm_shift_d2(&s2, &ctx(1e8), Q, 1, &opts).unwrap();
    let d2 = rel(lo.e2, hi.e2);
    let scan = renorm_shift_d3_scan(&spectrum(Dim::Three), Q, 1, &scan_alphas(), &opts, Exec::default()).unwrap();
    let slope_err = (scan.slope / scan.expected_slope - 1.0).abs();
    Outcome {
        pass: d2 < 1e-6 && slope_err < 1e-3 && scan.r_squared > 1.0 - 1e-9 && scan.im_relative_spread < 1e-6,
        detail: format!(
            "d2 change {d2:.2e}, d3 ln-alpha slope rel err {slope_err:.2e}, R² {:.12}, Im spread {:.2e}",
            scan.r_squared, scan.im_relative_spread
        ),
    }
}

fn pole_handling() -> Outcome {
    let pole = ShiftOpts::default();
    let eps = ShiftOpts { eps_mode: EpsMode::Extrapolate, ..pole };
    let s2 = spectrum(Dim::Two);
    let s3 = spectrum(Dim::Three);
    let d2 = rel(
        renorm_shift_d2(&s2, &ctx(1e6), Q, 1, &eps).unwrap().e2,
        renorm_shift_d2(&s2, &ctx(1e6), Q, 1, &pole).unwrap().e2,
    );
    let d3 = rel(
        renorm_shift_d3(&s3, Q, 1e6, 1, &eps).unwrap().e2,
        renorm_shift_d3(&s3, Q, 1e6, 1, &pole).unwrap().e2,
    );
    Outcome {
        pass: d2 < 1e-7 && d3 < 1e-7,
        detail: format!("d2 {d2:.2e}, d3 {d3:.2e}"),
    }
}

fn memory_engine() -> Outcome {
    let (omega0, a) = (1.0, 0.05);
    let dt = 0.01;
    let n = (30.0 / a / dt) as usize;
    let samples: Vec<f64> = (0..=n)
        .map(|i| {
            let tau = (n - i) as f64 * dt;
            (omega0 * tau).cos() * (-a * tau).exp()
        })
        .collect();
    let time = conv_time(&samples, dt, 1.0, Some(1e-9)).unwrap().value;
    let spec = SignalSpectrum::damped_cosine(omega0, a);
    let freq = conv_freq(&spec, 1.0, 0.5).unwrap();
    let dual = (time - freq).abs() / time.abs().max(1.0);
    let mut cut_spread = 0.0f64;
    for cut in [0.05, 0.2, 2.0] {
        cut_spread = cut_spread.max((conv_freq(&spec, 1.0, cut).unwrap() - freq).abs() / freq.abs().max(1.0));
    }
    let (f0, cut, t_c) = (0.37, 2.5, 1.3);
    let closed = (conv_freq(&SignalSpectrum::constant_below(f0, cut), t_c, cut).unwrap() + PI * f0 * ((cut * t_c).ln() + EULER_GAMMA)).abs();
    let m = HarmonicMotion::from_velocity(vec![0.01, 0.005], W);
    let ch = Charge {
        q: Q,
        switching: Switching::tanh(0.0, 200.0),
    };
    let t0 = ch.switching.start_time(1e-16);
    let chi = [0.03, 0.2, 0.4]
        .iter()
        .map(|&om| chi_moments(&m, &ch, 2, om, T_EVAL, t0, W).unwrap().residual)
        .fold(0.0f64, f64::max);
    Outcome {
        pass: dual < 1e-6 && closed < 1e-10 && cut_spread < 1e-8 && chi < 1e-8,
        detail: format!("dual {dual:.2e}, closed form {closed:.2e}, cut spread {cut_spread:.2e}, chi residual {chi:.2e}"),
    }
}

fn fixed_point() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (dim, n) in [(Dim::Two, 64), (Dim::Three, 24)] {
        let config = harmonic_config(dim, 1.0, Switching::Constant);
        let k = KernelContext::new(config.alpha, 1.0, 1.0).unwrap();
        let state = MeanFieldState::ground(&config, SpatialGrid { dim, n, length: 16.0 }, 0.0).unwrap();
        let opts = PropagateOpts {
            dt: 0.01,
            steps: 10_000,
            record_every: 100,
            ..Default::default()
        };
        let p = propagate(&config, &k, &PulseSpec::none(dim), state, &opts, Exec::default()).unwrap();
        let vmax = p.v.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        let norm = p.norm.iter().fold(0.0f64, |a, v| a.max((v / p.norm[0] - 1.0).abs()));
        pass &= vmax < 1e-12 && p.max_density_change < 1e-10 && norm < 1e-10;
        parts.push(format!("d{} v {vmax:.1e} density {:.1e} norm {norm:.1e}", dim.n(), p.max_density_change));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn naive_breakdown() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for dim in [Dim::Three, Dim::Two] {
        let config = harmonic_config(dim, W, Switching::tanh(0.0, 20.0 / W));
        let m = HarmonicMotion::from_velocity(vec![0.01; dim.n()], W);
        let r = naive_breakdown_demo(
            &config,
            &m,
            &[1900.3, 1907.1, 1915.9, 1921.4],
            &[1e3, 1e4, 1e5, 1e6],
            &exact_opts(),
            &MemoryOpts { dt: 0.05, history_start: None },
            Exec::default(),
        )
        .unwrap();
        let growth = (r.growth_coefficient / r.expected_growth - 1.0).abs();
        pass &= growth < 1e-2 && r.renormalized_max_deviation < 1e-2;
        parts.push(format!("d{} growth rel err {growth:.2e}, renormalized dev {:.2e}", dim.n(), r.renormalized_max_deviation));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn driven_oscillator() -> Outcome {
    let w0 = 1.0;
    let config = harmonic_config(Dim::Three, w0, Switching::Constant);
    let k = KernelContext::new(config.alpha, 1.0, 1.0).unwrap();
    let state = MeanFieldState::ground(&config, SpatialGrid { dim: Dim::Three, n: 24, length: 12.0 }, 0.0).unwrap();
    let pulse = PulseSpec {
        center: 15.0,
        width: 4.0,
        carrier: w0,
        amplitude: 1e-3,
        phase: 0.0,
        polarization: vec![1.0, 0.0, 0.0],
    };
    let dt = 0.02;
    let steps = (20.0 * 2.0 * PI / w0 / dt) as usize;
    let opts = PropagateOpts {
        dt,
        steps,
        record_every: 1,
        ..Default::default()
    };
    let p = propagate(&config, &k, &pulse, state, &opts, Exec::default()).unwrap();
    // Reduced equation ẍ + γẋ + ω₀²x = (q/m)E + (2/3)q³Ė/m² with γ = (2/3)q²ω₀²,
    // solved by its Green's function under Simpson quadrature.
    let g = 2.0 / 3.0 * Q * Q * w0 * w0;
    let wd = (w0 * w0 - g * g / 4.0).sqrt();
    let drive = |t: f64| Q * pulse.field(t)[0] + 2.0 / 3.0 * Q.powi(3) * pulse.field_rate(t)[0];
    let (mut num, mut den) = (0.0, 0.0);
    for (i, &t) in p.times.iter().enumerate() {
        let x = if t > 0.0 {
            simpson(|tp| (-g * (t - tp) / 2.0).exp() * (wd * (t - tp)).sin() / wd * drive(tp), 0.0, t, 4000)
        } else {
            0.0
        };
        num += (p.x_mean[i][0] - x).powi(2);
        den += x * x;
    }
    let l2 = (num / den).sqrt();
    Outcome {
        pass: l2 < 2e-2,
        detail: format!("relative L2 {l2:.2e} over {} samples", p.times.len()),
    }
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome, Duration);
    let criteria: [Criterion; 10] = [
        ("kernel closed forms", kernels, Duration::from_secs(10)),
        ("d3 divergence law", d3_divergence, Duration::from_secs(120)),
        ("d2 divergence law and eta invariance", d2_divergence, Duration::from_secs(300)),
        ("counterterm cancellation", cancellation, Duration::from_secs(120)),
        ("renormalized shift finiteness", finiteness, Duration::from_secs(180)),
        ("pole handling dual oracle", pole_handling, Duration::from_secs(60)),
        ("logarithmic memory engine", memory_engine, Duration::from_secs(30)),
        ("mean-field ground-state fixed point", fixed_point, Duration::from_secs(60)),
        ("naive breakdown", naive_breakdown, Duration::from_secs(180)),
        ("driven harmonic atom", driven_oscillator, Duration::from_secs(120)),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let pass = out.pass && elapsed < *budget;
        failed += usize::from(!pass);
        println!(
            "{} {:>2} {name}: {} [{:.1} s of {} s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            out.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
