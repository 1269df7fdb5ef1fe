use std::f64::consts::PI;

use num_complex::Complex64;
use renormlab::memconv::*;
use renormlab::model::{Charge, Switching};
use renormlab::motion::{AtRest, HarmonicMotion, Motion};
use renormlab::special::EULER_GAMMA;

/// Samples of g(τ) at τ = (n − i)·dt, oldest first.
fn history(g: impl Fn(f64) -> f64, dt: f64, span: f64) -> Vec<f64> {
    let n = (span / dt).round() as usize;
    (0..=n).map(|i| g((n - i) as f64 * dt)).collect()
}

fn damped(omega0: f64, a: f64) -> impl Fn(f64) -> f64 {
    move |tau| (omega0 * tau).cos() * (-a * tau).exp()
}

#[test]
fn zero_signal_gives_zero() {
    assert_eq!(conv_time(&[0.0; 101], 0.1, 1.0, None).unwrap().value, 0.0);
    let spec = SignalSpectrum::new(|_| Complex64::new(0.0, 0.0), 0.0, Complex64::new(0.0, 0.0), vec![]);
    assert_eq!(conv_freq(&spec, 1.0, 0.5).unwrap(), 0.0);
}

#[test]
fn exponential_history_matches_the_laplace_oracle() {
    for t_c in [1.0, 0.3, 4.0] {
        let s = history(|tau| (-tau).exp(), 0.01, 50.0);
        let r = conv_time(&s, 0.01, t_c, Some(1e-12)).unwrap();
        let want = -EULER_GAMMA - t_c.ln();
        assert!((r.value - want).abs() < 1e-8, "t_c {t_c}: {} vs {want}", r.value);
    }
}

#[test]
fn short_history_is_rejected_when_a_tail_bound_is_requested() {
    let s = history(|tau| (-0.01 * tau).exp(), 0.1, 20.0);
    assert!(conv_time(&s, 0.1, 1.0, Some(1e-9)).is_err());
}

#[test]
fn time_and_frequency_domains_agree() {
    for (omega0, a) in [(1.0, 0.05), (0.3, 0.1)] {
        let span = 30.0 / a;
        let dt = 0.01;
        let s = history(damped(omega0, a), dt, span);
        let time = conv_time(&s, dt, 1.0, Some(1e-9)).unwrap().value;
        let freq = conv_freq(&SignalSpectrum::damped_cosine(omega0, a), 1.0, 10.0 * a).unwrap();
        assert!((time - freq).abs() < 1e-6 * time.abs().max(1.0), "{time} vs {freq}");
    }
}

#[test]
fn constant_spectrum_closed_form_and_split_invariance() {
    let (f0, cut, t_c) = (0.37, 2.5, 1.3);
    let spec = SignalSpectrum::constant_below(f0, cut);
    let want = -PI * f0 * ((cut * t_c).ln() + EULER_GAMMA);
    for split in [cut, 0.5 * cut, 0.1 * cut] {
        let got = conv_freq(&spec, t_c, split).unwrap();
        assert!((got - want).abs() < 1e-10, "split {split}: {got} vs {want}");
    }
}

#[test]
fn split_frequency_is_arbitrary() {
    let spec = SignalSpectrum::damped_cosine(1.0, 0.05);
    let base = conv_freq(&spec, 1.0, 0.5).unwrap();
    for cut in [0.05, 0.2, 2.0] {
        let v = conv_freq(&spec, 1.0, cut).unwrap();
        assert!((v - base).abs() < 1e-8 * base.abs().max(1.0), "cut {cut}: {v} vs {base}");
    }
}

#[test]
fn convolution_is_linear_and_additive() {
    let dt = 0.02;
    let f = history(damped(1.0, 0.2), dt, 200.0);
    let g = history(|tau| (-0.3 * tau).exp() * (tau * 0.1).sin(), dt, 200.0);
    let i = |s: &[f64]| conv_time(s, dt, 0.8, None).unwrap().value;
    let mix: Vec<f64> = f.iter().zip(&g).map(|(a, b)| 1.5 * a - 0.25 * b).collect();
    let want = 1.5 * i(&f) - 0.25 * i(&g);
    assert!((i(&mix) - want).abs() < 1e-12 * want.abs().max(1.0));
    // Split one history into an old and a recent piece on the same window.
    let cut = f.len() / 3;
    let old: Vec<f64> = f.iter().enumerate().map(|(k, v)| if k < cut { *v } else { 0.0 }).collect();
    let new: Vec<f64> = f.iter().enumerate().map(|(k, v)| if k < cut { 0.0 } else { *v }).collect();
    assert!((i(&old) + i(&new) - i(&f)).abs() < 1e-12 * i(&f).abs().max(1.0));
}

#[test]
fn singular_panel_converges_at_second_order_or_better() {
    // Signal with a kink-free but nonzero slope at τ = 0 so the last panel matters.
    let g = |tau: f64| (2.0 * tau).cos() * (-tau).exp();
    // ∫₀^∞ cos(2τ)e^{−τ} ln τ dτ = Re[−(γ + ln(1 − 2i))/(1 − 2i)] with t_c = 1.
    let z = Complex64::new(1.0, -2.0);
    let want = (-(Complex64::new(EULER_GAMMA, 0.0) + z.ln()) / z).re;
    let err = |dt: f64| (conv_time(&history(g, dt, 50.0), dt, 1.0, None).unwrap().value - want).abs();
    let (e1, e2) = (err(0.1), err(0.05));
    assert!(e1 / e2 >= 4.0, "{e1} / {e2}");
}

fn switched() -> Charge {
    Charge {
        q: 0.3,
        switching: Switching::tanh(0.0, 200.0),
    }
}

#[test]
fn chi_recursion_holds_on_a_harmonic_history() {
    let m = HarmonicMotion::from_velocity(vec![0.01, 0.005], 0.1);
    let ch = switched();
    let t0 = ch.switching.start_time(1e-16);
    for omega in [0.03, 0.2, 0.4] {
        let r = chi_moments(&m, &ch, 2, omega, 1900.3, t0, 0.1).unwrap();
        assert!(r.residual < 1e-8, "omega {omega}: {}", r.residual);
    }
    let rest = chi_moments(&AtRest(2), &ch, 2, 0.1, 1900.3, t0, 0.1).unwrap();
    assert!(rest.chi.iter().all(|c| c.norm() == 0.0) && rest.boundary.iter().all(|&b| b == 0.0));
    assert!(chi_moments(&m, &ch, 1, 0.1, 1900.3, t0, 0.1).is_err());
}

#[test]
fn chi_falls_off_at_high_frequency() {
    let w = 0.1;
    let m = HarmonicMotion::from_velocity(vec![0.01, 0.0], w);
    let ch = switched();
    let t0 = ch.switching.start_time(1e-16);
    let peak = chi_moment(&m, &ch, 1, w, 1900.3, t0, w).unwrap()[0].norm();
    let far = chi_moment(&m, &ch, 1, 1e3 * w, 1900.3, t0, w).unwrap()[0].norm();
    assert!(far < 1e-4 * peak, "{far} vs {peak}");
}

#[test]
fn switched_harmonic_history_is_admissible() {
    let w = 0.1;
    let m = HarmonicMotion::from_velocity(vec![0.01, 0.0], w);
    let ch = switched();
    let t = 1900.3;
    let dt = 0.05;
    let t0 = ch.switching.start_time(1e-16);
    // f = d/dt′(q v̇) sampled on the history.
    let f = |tp: f64| ch.rate(tp) * m.deriv(2, tp, 0) + ch.at(tp) * m.deriv(3, tp, 0);
    let samples = history(|tau| f(t - tau), dt, t - t0);
    let r = admissibility_check_samples(&samples, dt, w).unwrap();
    assert!(r.all_pass(), "{r:?}");
    let want_f0 = ch.at(t) * m.deriv(2, t, 0) / (2.0 * PI);
    let want_fp = Complex64::new(0.0, -ch.at(t) * m.deriv(1, t, 0) / (2.0 * PI));
    assert!((r.f0.re - want_f0).abs() < 1e-3 * want_f0.abs(), "{} vs {want_f0}", r.f0);
    assert!((r.f0_prime - want_fp).norm() < 1e-3 * want_fp.norm(), "{} vs {want_fp}", r.f0_prime);
}

#[test]
fn non_decaying_history_fails_transformability() {
    let r = admissibility_check_samples(&[1.0; 4001], 0.05, 0.1).unwrap();
    assert!(!r.cond1.pass);
    assert_eq!(r.first_failure(), Some("Fourier transformability"));
}

#[test]
fn slow_spectral_tail_fails_the_falloff_condition() {
    let spec = SignalSpectrum::new(
        |w| Complex64::new((1.0 + w).powf(-0.5), 0.0),
        1.0,
        Complex64::new(-0.5, 0.0),
        vec![],
    );
    let r = admissibility_check_spectrum(&spec, 1.0);
    assert!(r.cond1.pass && !r.cond4.pass, "{r:?}");
    assert!((r.falloff_exponent + 0.5).abs() < 0.01);
    assert_eq!(r.first_failure(), Some("high-frequency falloff"));
    let ok = admissibility_check_spectrum(&SignalSpectrum::damped_cosine(1.0, 0.05), 1.0);
    assert!(ok.all_pass(), "{ok:?}");
}
