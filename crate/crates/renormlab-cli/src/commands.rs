//! One function per subcommand. Each computes every output in memory and
//! returns it; nothing touches the file system here.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use num_complex::Complex64;
use renormlab::atom::{solve_spectrum, sum_rule, AtomSpectrum, PotentialKind};
use renormlab::fit::least_squares;
use renormlab::kernels::KernelContext;
use renormlab::meanfield::{naive_breakdown_demo, propagate, reconstruct_modes, KGrid, MeanFieldState, PropagateOpts};
use renormlab::memconv::{admissibility_check_samples, AdmissibilityReport};
use renormlab::model::{Charge, Dim};
use renormlab::motion::{HarmonicMotion, Motion};
use renormlab::renorm::MassLedger;
use renormlab::rrforce::{divergence_scan, DivergenceLaw, ExactOpts, MemoryOpts};
use renormlab::rspt::{renorm_shift_d2, renorm_shift_d2_limit, renorm_shift_d3, ComplexShift, EpsMode, ShiftOpts};
use renormlab::Exec;
use serde::Serialize;

use crate::config::{load_pulse, RunConfig};
use crate::error::{config_err, CliError, Result};
use crate::output::{to_csv, to_json, Artifact};

/// Outputs of a successful command and a one-line summary for stdout.
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub summary: String,
    /// Failure to report after the artifacts are written.
    pub deferred_error: Option<CliError>,
}

impl Outcome {
    fn new(artifacts: Vec<Artifact>, summary: String) -> Self {
        Self {
            artifacts,
            summary,
            deferred_error: None,
        }
    }
}

/// `n` log-spaced values on [lo, hi].
fn log_range(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && lo.is_finite() && hi.is_finite()) || n < 2 {
        return Err(config_err(format!("alpha range needs 0 < min < max and at least 2 steps, got [{lo}, {hi}] x {n}")));
    }
    Ok((0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect())
}

/// Reference velocity amplitude of the prescribed test motion.
fn test_motion(d: Dim, omega: f64) -> HarmonicMotion {
    let v0 = match d {
        Dim::Two => vec![0.01, 0.005],
        Dim::Three => vec![0.01, 0.005, 0.0],
    };
    HarmonicMotion::from_velocity(v0, omega)
}

/// Evaluation time well after the charge ramp: 9.5 ramp widths past its
/// center, offset so it does not sit on a node of the test motion.
fn settled_time(charge: &Charge, omega: f64) -> f64 {
    match charge.switching {
        renormlab::model::Switching::Tanh { t_on, width } => t_on + 9.5 * width + 0.03 / omega,
        renormlab::model::Switching::Constant => 0.0,
    }
}

fn default_jmax(d: Dim) -> usize {
    match d {
        Dim::Two => 5,
        Dim::Three => 9,
    }
}

fn spectrum(cfg: &RunConfig, j_max: Option<usize>) -> Result<AtomSpectrum> {
    Ok(solve_spectrum(&cfg.model.potential, j_max.unwrap_or(default_jmax(cfg.model.dim)))?)
}

fn kernel_context(cfg: &RunConfig) -> Result<KernelContext> {
    Ok(KernelContext::new(cfg.model.alpha, cfg.model.mass, cfg.model.eta)?)
}

#[derive(Args, Debug)]
pub struct EigArgs {
    /// Highest level index J_max.
    #[arg(long)]
    pub jmax: Option<usize>,
    #[arg(long, default_value = "eig.json")]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct PElem {
    jp: usize,
    j: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

#[derive(Serialize)]
struct SumRuleRow {
    j: usize,
    deficit: f64,
    warn: bool,
}

#[derive(Serialize)]
struct EigReport {
    dim: usize,
    mass: f64,
    energies: Vec<f64>,
    p_elems: Vec<PElem>,
    sum_rule: Vec<SumRuleRow>,
}

pub fn eig(cfg: &RunConfig, a: &EigArgs) -> Result<Outcome> {
    let s = spectrum(cfg, a.jmax)?;
    let d = s.dim.n();
    let n = s.len();
    let mut p_elems = Vec::with_capacity(n * n);
    for jp in 0..n {
        for j in 0..n {
            let p: Vec<Complex64> = (0..d).map(|c| s.p(jp, j, c)).collect();
            p_elems.push(PElem {
                jp,
                j,
                re: p.iter().map(|z| z.re).collect(),
                im: p.iter().map(|z| z.im).collect(),
            });
        }
    }
    let sum_rule = (0..n)
        .map(|j| {
            let r = sum_rule(&s, j);
            SumRuleRow {
                j,
                deficit: r.deficit,
                warn: r.warn,
            }
        })
        .collect();
    let report = EigReport {
        dim: d,
        mass: s.mass,
        energies: s.energies.clone(),
        p_elems,
        sum_rule,
    };
    let summary = format!("{} levels, E0 = {:.12e}", n, s.energies[0]);
    Ok(Outcome::new(
        vec![Artifact {
            path: a.out.clone(),
            bytes: to_json(&report),
        }],
        summary,
    ))
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum EpsArg {
    Pole,
    Extrapolate,
}

#[derive(Args, Debug)]
pub struct ShiftArgs {
    /// Level index j.
    #[arg(long, default_value_t = 0)]
    pub level: usize,
    /// Regulator α; defaults to the configured value.
    #[arg(long, conflicts_with = "alpha_scan")]
    pub alpha: Option<f64>,
    /// Log-spaced scan "min:max:steps".
    #[arg(long)]
    pub alpha_scan: Option<String>,
    #[arg(long)]
    pub jmax: Option<usize>,
    #[arg(long, value_enum, default_value = "pole")]
    pub eps_mode: EpsArg,
    #[arg(long, default_value = "shift.json")]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct ShiftPieces {
    split: Option<f64>,
    eps_used: f64,
    j_max: usize,
    error_estimate: f64,
    log_alpha_derivative: Option<f64>,
    sum_rule_deficit: f64,
    /// α → ∞ closed form in two dimensions.
    limit_re: Option<f64>,
    limit_im: Option<f64>,
}

#[derive(Serialize)]
struct ShiftRecord {
    dim: usize,
    level: usize,
    alpha: f64,
    eps_mode: EpsMode,
    re: f64,
    im: f64,
    gamma: f64,
    pieces: ShiftPieces,
}

fn shift_record(s: &ComplexShift, alpha: f64, limit: Option<Complex64>) -> ShiftRecord {
    ShiftRecord {
        dim: s.d.n(),
        level: s.j,
        alpha,
        eps_mode: s.eps_mode,
        re: s.e2.re,
        im: s.e2.im,
        // Adding zero turns −0 into +0 for a stable record.
        gamma: s.gamma() + 0.0,
        pieces: ShiftPieces {
            split: s.split,
            eps_used: s.eps_used,
            j_max: s.j_max,
            error_estimate: s.error_estimate,
            log_alpha_derivative: s.log_alpha_derivative,
            sum_rule_deficit: s.sum_rule.deficit,
            limit_re: limit.map(|z| z.re),
            limit_im: limit.map(|z| z.im),
        },
    }
}

fn parse_scan(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || config_err(format!("--alpha-scan expects min:max:steps, got {spec:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo = parts[0].trim().parse::<f64>().map_err(|_| bad())?;
    let hi = parts[1].trim().parse::<f64>().map_err(|_| bad())?;
    let n = parts[2].trim().parse::<usize>().map_err(|_| bad())?;
    log_range(lo, hi, n)
}

pub fn shift(cfg: &RunConfig, a: &ShiftArgs) -> Result<Outcome> {
    let s = spectrum(cfg, a.jmax)?;
    if a.level >= s.len() {
        return Err(config_err(format!("level {} exceeds J_max = {}", a.level, s.len() - 1)));
    }
    let opts = ShiftOpts {
        eps_mode: match a.eps_mode {
            EpsArg::Pole => EpsMode::Pole,
            EpsArg::Extrapolate => EpsMode::Extrapolate,
        },
        ..ShiftOpts::default()
    };
    let ctx = kernel_context(cfg)?;
    let q = cfg.model.charge;
    let limit = match cfg.model.dim {
        Dim::Two => Some(renorm_shift_d2_limit(&s, ctx.alpha0, q, a.level, opts.split_scale)?.e2),
        Dim::Three => None,
    };
    let one = |alpha: f64| -> Result<ShiftRecord> {
        let r = match cfg.model.dim {
            Dim::Two => renorm_shift_d2(&s, &ctx.with_alpha(alpha)?, q, a.level, &opts)?,
            Dim::Three => renorm_shift_d3(&s, q, alpha, a.level, &opts)?,
        };
        Ok(shift_record(&r, alpha, limit))
    };
    let (bytes, summary) = match &a.alpha_scan {
        Some(spec) => {
            let records = parse_scan(spec)?.into_iter().map(one).collect::<Result<Vec<_>>>()?;
            let summary = format!("{} alpha values, last E2 = {:.6e} {:+.6e}i", records.len(), records.last().unwrap().re, records.last().unwrap().im);
            #[derive(Serialize)]
            struct Scan {
                scan: Vec<ShiftRecord>,
            }
            (to_json(&Scan { scan: records }), summary)
        }
        None => {
            let r = one(a.alpha.unwrap_or(cfg.model.alpha))?;
            let summary = format!("E2 = {:.12e} {:+.12e}i, gamma = {:.6e}", r.re, r.im, r.gamma);
            (to_json(&r), summary)
        }
    };
    Ok(Outcome::new(vec![Artifact { path: a.out.clone(), bytes }], summary))
}

#[derive(Args, Debug)]
pub struct RrScanArgs {
    #[arg(long, default_value_t = 1e3)]
    pub alpha_min: f64,
    #[arg(long, default_value_t = 1e6)]
    pub alpha_max: f64,
    #[arg(long, default_value_t = 7)]
    pub alpha_steps: usize,
    /// Angular frequency of the prescribed test motion.
    #[arg(long, default_value_t = 0.1)]
    pub omega0: f64,
    #[arg(long, default_value = "rr_scan.csv")]
    pub out: PathBuf,
}

pub fn rr_scan(cfg: &RunConfig, a: &RrScanArgs) -> Result<Outcome> {
    if !(a.omega0 > 0.0 && a.omega0.is_finite()) {
        return Err(config_err("omega0 must be positive"));
    }
    let d = cfg.model.dim;
    let alphas = log_range(a.alpha_min, a.alpha_max, a.alpha_steps)?;
    let motion = test_motion(d, a.omega0);
    let charge = cfg.switched_charge(a.omega0);
    let t = settled_time(&charge, a.omega0);
    let opts = ExactOpts {
        tol: 1e-10,
        max_frequency: a.omega0,
        history_start: None,
    };
    let fit = divergence_scan(&kernel_context(cfg)?, &motion, &charge, d, t, &alphas, &opts, Exec::default())?;
    // Project each force on −ẍ/|ẍ|², so the divergent coefficient is the
    // scalar multiplying −ẍ·law(α).
    let acc: Vec<f64> = (0..d.n()).map(|c| motion.deriv(2, t, c)).collect();
    let acc2: f64 = acc.iter().map(|x| x * x).sum();
    let project = |f: &[f64]| -f.iter().zip(&acc).map(|(x, y)| x * y).sum::<f64>() / acc2;
    let ys: Vec<f64> = fit.forces.iter().map(|f| project(f)).collect();
    let expected = project(&fit.expected);
    let law = move |x: f64| match fit.law {
        DivergenceLaw::SqrtAlpha => x.sqrt(),
        DivergenceLaw::LogAlpha => x.ln(),
    };
    let inv_sqrt = |x: f64| 1.0 / x.sqrt();
    let scalar = least_squares(&alphas, &ys, &[&law, &|_| 1.0, &inv_sqrt])?;
    let c = &scalar.coefficients;
    let rows = alphas.iter().zip(&ys).map(|(&x, &y)| {
        let model = c[0] * law(x) + c[1] + c[2] * inv_sqrt(x);
        vec![x, (y - c[1] - c[2] * inv_sqrt(x)) / law(x), y - model]
    });
    let csv = to_csv(&["alpha", "force_local_coeff", "fit_residual"], rows);
    let summary = format!(
        "fitted coefficient {:.10e}, expected {:.10e}, relative error {:.3e}",
        c[0],
        expected,
        (c[0] / expected - 1.0).abs()
    );
    Ok(Outcome::new(vec![Artifact { path: a.out.clone(), bytes: csv }], summary))
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum TableFormat {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct LedgerArgs {
    #[arg(long, default_value_t = 1.0)]
    pub alpha_min: f64,
    #[arg(long, default_value_t = 1e8)]
    pub alpha_max: f64,
    #[arg(long, default_value_t = 9)]
    pub alpha_steps: usize,
    /// Override the computed reference scale α₀.
    #[arg(long)]
    pub alpha0: Option<f64>,
    /// Defaults to JSON when the output name ends in `.json`, CSV otherwise.
    #[arg(long, value_enum)]
    pub format: Option<TableFormat>,
    #[arg(long, default_value = "ledger.csv")]
    pub out: PathBuf,
}

pub fn ledger(cfg: &RunConfig, a: &LedgerArgs) -> Result<Outcome> {
    let alpha0 = match a.alpha0 {
        Some(x) if x > 0.0 && x.is_finite() => x,
        Some(x) => return Err(config_err(format!("alpha0 must be positive, got {x}"))),
        None => kernel_context(cfg)?.alpha0,
    };
    let m = &cfg.model;
    let rows = log_range(a.alpha_min, a.alpha_max, a.alpha_steps)?
        .into_iter()
        .map(|alpha| MassLedger::new(m.dim, m.mass, m.charge, alpha, alpha0))
        .collect::<renormlab::Result<Vec<_>>>()?;
    let format = a.format.unwrap_or(if a.out.extension().is_some_and(|e| e == "json") {
        TableFormat::Json
    } else {
        TableFormat::Csv
    });
    let bytes = match format {
        TableFormat::Csv => to_csv(
            &["alpha", "m_bare", "counterterm_O(q^2)", "discarded_constant"],
            rows.iter().map(|r| vec![r.alpha, r.m_bare, r.counterterm_order1, r.discarded_constant]),
        ),
        TableFormat::Json => to_json(&rows),
    };
    let negative = rows.iter().find(|r| r.m_bare < 0.0).map(|r| r.alpha);
    let summary = match negative {
        Some(x) => format!("{} rows, bare mass negative from alpha = {x:.6e}", rows.len()),
        None => format!("{} rows, bare mass positive throughout", rows.len()),
    };
    Ok(Outcome::new(vec![Artifact { path: a.out.clone(), bytes }], summary))
}

#[derive(Args, Debug)]
pub struct KernelCheckArgs {
    /// History samples, one per line, oldest first; defaults to the
    /// switched harmonic test history.
    #[arg(long)]
    pub samples: Option<PathBuf>,
    /// Sampling step of the history.
    #[arg(long, default_value_t = 0.05)]
    pub dt: f64,
    /// Frequency scale of the signal.
    #[arg(long, default_value_t = 0.1)]
    pub omega0: f64,
    #[arg(long, default_value = "kernel_check.json")]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct KernelCheckReport<'a> {
    samples: usize,
    dt: f64,
    omega_scale: f64,
    all_pass: bool,
    first_failure: Option<&'static str>,
    report: &'a AdmissibilityReport,
}

pub fn kernel_check(cfg: &RunConfig, a: &KernelCheckArgs) -> Result<Outcome> {
    if !(a.dt > 0.0 && a.omega0 > 0.0) {
        return Err(config_err("dt and omega0 must be positive"));
    }
    let samples: Vec<f64> = match &a.samples {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| config_err(format!("cannot read samples {}: {e}", p.display())))?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.parse::<f64>().map_err(|_| config_err(format!("samples: cannot parse {l:?}"))))
            .collect::<Result<_>>()?,
        None => {
            // f(t′) = d/dt′(q_{t′} v̇(t′)) on the history of the test motion.
            let d = cfg.model.dim;
            let m = test_motion(d, a.omega0);
            let ch = cfg.switched_charge(a.omega0);
            let t = settled_time(&ch, a.omega0);
            let t0 = ch.switching.start_time(1e-16);
            let n = ((t - t0) / a.dt).round() as usize;
            (0..=n)
                .map(|i| {
                    let tp = t - (n - i) as f64 * a.dt;
                    ch.rate(tp) * m.deriv(2, tp, 0) + ch.at(tp) * m.deriv(3, tp, 0)
                })
                .collect()
        }
    };
    let report = admissibility_check_samples(&samples, a.dt, a.omega0)?;
    let out = KernelCheckReport {
        samples: samples.len(),
        dt: a.dt,
        omega_scale: a.omega0,
        all_pass: report.all_pass(),
        first_failure: report.first_failure(),
        report: &report,
    };
    let artifacts = vec![Artifact {
        path: a.out.clone(),
        bytes: to_json(&out),
    }];
    let mut outcome = Outcome::new(artifacts, format!("{} samples, all conditions pass: {}", samples.len(), report.all_pass()));
    if let Some(name) = report.first_failure() {
        let cond = [&report.cond1, &report.cond3, &report.cond4].into_iter().find(|c| !c.pass).unwrap();
        outcome.deferred_error = Some(CliError::Admissibility {
            condition: name.to_string(),
            detail: cond.evidence.clone(),
        });
    }
    Ok(outcome)
}

#[derive(Args, Debug)]
pub struct PropagateArgs {
    /// Pulse file; no incoming field when omitted.
    #[arg(long)]
    pub pulse: Option<PathBuf>,
    /// Propagation time.
    #[arg(long = "T")]
    pub duration: f64,
    #[arg(long)]
    pub dt: f64,
    /// Record every this many steps in the trajectory CSV.
    #[arg(long, default_value_t = 1)]
    pub record_every: usize,
    #[arg(long, default_value = "propagate")]
    pub out_prefix: String,
}

/// Sample times and α values of the breakdown demonstration.
const DEMO_ALPHAS: [f64; 4] = [1e3, 1e4, 1e5, 1e6];
const DEMO_OFFSETS: [f64; 4] = [0.3, 7.1, 15.9, 21.4];

fn breakdown_csv(r: &renormlab::meanfield::BreakdownReport) -> Vec<u8> {
    to_csv(
        &["alpha", "local_coefficient", "naive_coefficient", "renormalized_coefficient", "rr_amplitude"],
        (0..r.alphas.len()).map(|i| {
            vec![
                r.alphas[i],
                r.local_coefficient[i],
                r.naive_coefficient[i],
                r.renormalized_coefficient[i],
                r.rr_amplitude[i],
            ]
        }),
    )
}

pub fn propagate_cmd(cfg: &RunConfig, a: &PropagateArgs) -> Result<Outcome> {
    if !(a.duration > 0.0 && a.dt > 0.0 && a.duration.is_finite()) {
        return Err(config_err("--T and --dt must be positive"));
    }
    let config = &cfg.model;
    let pulse = load_pulse(a.pulse.as_deref(), config.dim)?;
    let ctx = kernel_context(cfg)?;
    let state = MeanFieldState::ground(config, cfg.grid(), 0.0)?;
    let opts = PropagateOpts {
        dt: a.dt,
        steps: (a.duration / a.dt).round() as usize,
        record_every: a.record_every,
        ..PropagateOpts::default()
    };
    let p = propagate(config, &ctx, &pulse, state, &opts, Exec::default())?;
    let d = config.dim.n();
    let axes = ["x", "y", "z"];
    let mut header: Vec<String> = vec!["t".into()];
    header.extend((0..d).map(|c| format!("v_{}", axes[c])));
    header.extend((0..d).map(|c| format!("x_{}", axes[c])));
    header.push("norm".into());
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let trajectory = to_csv(
        &header_refs,
        (0..p.times.len()).map(|i| {
            let mut row = vec![p.times[i]];
            row.extend(&p.v[i]);
            row.extend(&p.x_mean[i]);
            row.push(p.norm[i]);
            row
        }),
    );
    let omega_ref = match config.potential.kind {
        PotentialKind::IsotropicHarmonic { omega0 } => omega0,
        _ if pulse.carrier > 0.0 => pulse.carrier,
        _ => 1.0,
    };
    let kgrid = KGrid::for_config(config, omega_ref, 24, 8)?;
    let modes = reconstruct_modes(config, &p.trajectory, &kgrid, None, Exec::default())?;
    // The breakdown demo regresses the self-force of the propagated
    // trajectory on its acceleration in the last part of the run.
    let t_end = p.trajectory.t_end();
    let span = 0.25 * (t_end - p.trajectory.t0);
    let times: Vec<f64> = DEMO_OFFSETS.iter().map(|o| t_end - span * (1.0 - o / 25.0)).collect();
    let history = Some(p.trajectory.t0);
    let demo = naive_breakdown_demo(
        config,
        &p.trajectory,
        &times,
        &DEMO_ALPHAS,
        &ExactOpts {
            tol: 1e-10,
            max_frequency: omega_ref,
            history_start: history,
        },
        &MemoryOpts {
            dt: p.trajectory.dt,
            history_start: history,
        },
        Exec::default(),
    )?;
    let prefix = &a.out_prefix;
    let summary = format!(
        "{} records, max |v| = {:.6e}, norm drift {:.3e}",
        p.times.len(),
        p.v.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())),
        p.norm.iter().fold(0.0f64, |m, n| m.max((n / p.norm[0] - 1.0).abs()))
    );
    Ok(Outcome::new(
        vec![
            Artifact {
                path: format!("{prefix}_trajectory.csv").into(),
                bytes: trajectory,
            },
            Artifact {
                path: format!("{prefix}_modes.json").into(),
                bytes: to_json(&modes),
            },
            Artifact {
                path: format!("{prefix}_breakdown.csv").into(),
                bytes: breakdown_csv(&demo),
            },
        ],
        summary,
    ))
}

#[derive(Args, Debug)]
pub struct DemoNaiveArgs {
    #[arg(long, default_value_t = 1e3)]
    pub alpha_min: f64,
    #[arg(long, default_value_t = 1e6)]
    pub alpha_max: f64,
    #[arg(long, default_value_t = 4)]
    pub alpha_steps: usize,
    /// Angular frequency of the prescribed test motion.
    #[arg(long, default_value_t = 0.1)]
    pub omega0: f64,
    #[arg(long, default_value = "demo_naive.csv")]
    pub out: PathBuf,
}

pub fn demo_naive(cfg: &RunConfig, a: &DemoNaiveArgs) -> Result<Outcome> {
    if !(a.omega0 > 0.0 && a.omega0.is_finite()) {
        return Err(config_err("omega0 must be positive"));
    }
    let alphas = log_range(a.alpha_min, a.alpha_max, a.alpha_steps)?;
    let mut config = cfg.model.clone();
    let charge = cfg.switched_charge(a.omega0);
    config.switching = charge.switching;
    let motion = test_motion(config.dim, a.omega0);
    let t = settled_time(&charge, a.omega0);
    let times: Vec<f64> = DEMO_OFFSETS.iter().map(|o| t + o * 0.1 / a.omega0).collect();
    let r = naive_breakdown_demo(
        &config,
        &motion,
        &times,
        &alphas,
        &ExactOpts {
            tol: 1e-10,
            max_frequency: a.omega0,
            history_start: None,
        },
        &MemoryOpts {
            dt: 0.005 / a.omega0,
            history_start: None,
        },
        Exec::default(),
    )?;
    let summary = format!(
        "growth coefficient {:.6e} (expected {:.6e}), renormalized deviation {:.3e}",
        r.growth_coefficient, r.expected_growth, r.renormalized_max_deviation
    );
    Ok(Outcome::new(
        vec![Artifact {
            path: a.out.clone(),
            bytes: breakdown_csv(&r),
        }],
        summary,
    ))
}
