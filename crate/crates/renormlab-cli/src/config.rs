//! Flat `key = value` run configuration and pulse files.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown or repeated
//! keys are errors so that a typo never silently falls back to a default.

use std::collections::BTreeMap;
use std::path::Path;

use renormlab::atom::{Monomial, PotentialKind, PotentialSpec};
use renormlab::meanfield::{PulseSpec, SpatialGrid};
use renormlab::model::{Charge, Dim, ModelConfig, Switching};
use serde::Serialize;

use crate::error::{config_err, Result};

const CONFIG_KEYS: &[&str] = &[
    "dim",
    "mass",
    "charge",
    "omega0",
    "potential",
    "alpha",
    "eta",
    "switching_T",
    "grid_n",
    "grid_L",
];

const PULSE_KEYS: &[&str] = &["center", "width", "carrier", "amplitude", "phase", "polarization"];

/// Ramp width T_sw = this / ω when a command needs a switched charge and
/// the configuration does not set `switching_T`.
pub const DEFAULT_SWITCH_PERIODS: f64 = 20.0;

/// A validated configuration with the run-level settings that are not part
/// of the physical model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub model: ModelConfig,
    /// ω₀ of a harmonic potential; `None` for polynomial potentials.
    pub omega0: Option<f64>,
    pub switching_t: Option<f64>,
    pub grid_n: usize,
    pub grid_l: f64,
}

impl RunConfig {
    /// Charge profile for commands that need a finite history: the
    /// configured ramp, or a tanh ramp of width 20/ω centered at t = 0.
    pub fn switched_charge(&self, omega: f64) -> Charge {
        let width = self.switching_t.unwrap_or(DEFAULT_SWITCH_PERIODS / omega);
        Charge {
            q: self.model.charge,
            switching: Switching::tanh(0.0, width),
        }
    }

    pub fn grid(&self) -> SpatialGrid {
        SpatialGrid {
            dim: self.model.dim,
            n: self.grid_n,
            length: self.grid_l,
        }
    }
}

fn parse_pairs(text: &str, allowed: &[&str], what: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| config_err(format!("{what} line {}: expected key = value", no + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if !allowed.contains(&k) {
            return Err(config_err(format!("{what} line {}: unknown key {k:?}", no + 1)));
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(config_err(format!("{what} line {}: key {k:?} given twice", no + 1)));
        }
    }
    Ok(map)
}

fn read(path: &Path, what: &str) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {what} {}: {e}", path.display())))
}

fn number(map: &BTreeMap<String, String>, key: &str) -> Result<Option<f64>> {
    map.get(key)
        .map(|v| {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| config_err(format!("{key}: {v:?} is not a finite number")))
        })
        .transpose()
}

fn positive(map: &BTreeMap<String, String>, key: &str) -> Result<Option<f64>> {
    match number(map, key)? {
        Some(x) if x <= 0.0 => Err(config_err(format!("{key} must be positive, got {x}"))),
        other => Ok(other),
    }
}

/// Parse a polynomial such as `x^4 + y^4 - 0.5*x^2*y^2`.
fn parse_polynomial(text: &str, dim: Dim) -> Result<Vec<Monomial>> {
    let axes = ['x', 'y', 'z'];
    let d = dim.n();
    // Split on signs that are not part of a number's exponent.
    let mut pieces = vec![String::new()];
    let mut prev = ' ';
    for ch in text.chars().filter(|c| !c.is_whitespace()) {
        let exponent_sign = matches!(prev, 'e' | 'E') && pieces.last().is_some_and(|p| p.len() > 1);
        if (ch == '+' || ch == '-') && !exponent_sign {
            pieces.push(String::new());
        }
        if ch != '+' || exponent_sign {
            pieces.last_mut().unwrap().push(ch);
        }
        prev = ch;
    }
    let mut terms = Vec::new();
    for term in pieces.iter().map(|t| t.as_str()).filter(|t| !t.is_empty()) {
        let (sign, body) = match term.strip_prefix('-') {
            Some(rest) => (-1.0, rest.trim()),
            None => (1.0, term),
        };
        let mut coef = sign;
        let mut powers = vec![0u32; d];
        for factor in body.split('*').map(str::trim) {
            let bad = || config_err(format!("potential: cannot parse factor {factor:?}"));
            let mut chars = factor.chars();
            match chars.next() {
                Some(a) if axes.contains(&a) => {
                    let axis = axes.iter().position(|&c| c == a).unwrap();
                    if axis >= d {
                        return Err(config_err(format!("potential: axis {a} does not exist in d = {d}")));
                    }
                    let rest = chars.as_str();
                    let p = match rest.strip_prefix('^') {
                        Some(e) => e.parse::<u32>().map_err(|_| bad())?,
                        None if rest.is_empty() => 1,
                        None => return Err(bad()),
                    };
                    powers[axis] += p;
                }
                _ => coef *= factor.parse::<f64>().map_err(|_| bad())?,
            }
        }
        terms.push(Monomial { coef, powers });
    }
    if terms.is_empty() {
        return Err(config_err("potential: empty polynomial"));
    }
    Ok(terms)
}

/// Build a run configuration from file contents, with an optional
/// command-line dimension override.
pub fn parse_config(text: &str, dim_override: Option<usize>) -> Result<RunConfig> {
    let map = parse_pairs(text, CONFIG_KEYS, "config")?;
    let dim_raw = match dim_override {
        Some(d) => d.to_string(),
        None => map.get("dim").cloned().unwrap_or_else(|| "3".into()),
    };
    let dim_n: usize = dim_raw
        .parse()
        .map_err(|_| config_err(format!("dim: {dim_raw:?} is not an integer")))?;
    let dim = Dim::from_usize(dim_n).map_err(|_| config_err(format!("dim must be 2 or 3, got {dim_n}")))?;
    let mass = positive(&map, "mass")?.unwrap_or(1.0);
    let charge = number(&map, "charge")?.unwrap_or(0.3);
    let alpha = positive(&map, "alpha")?.unwrap_or(1e4);
    let eta = positive(&map, "eta")?.unwrap_or(1.0);
    let switching_t = positive(&map, "switching_T")?;
    let grid_l = positive(&map, "grid_L")?.unwrap_or(16.0);
    let grid_n = match map.get("grid_n") {
        Some(v) => v
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 8)
            .ok_or_else(|| config_err(format!("grid_n: {v:?} must be an integer of at least 8")))?,
        None => 32,
    };
    let omega0 = positive(&map, "omega0")?;
    let (kind, omega0) = match map.get("potential").map(String::as_str) {
        None | Some("harmonic") => {
            let w = omega0.unwrap_or(0.1);
            (PotentialKind::IsotropicHarmonic { omega0: w }, Some(w))
        }
        Some(poly) => {
            if omega0.is_some() {
                return Err(config_err("omega0 only applies to the harmonic potential"));
            }
            (
                PotentialKind::Polynomial {
                    terms: parse_polynomial(poly, dim)?,
                },
                None,
            )
        }
    };
    let model = ModelConfig {
        dim,
        mass,
        charge,
        potential: PotentialSpec { dim, mass, kind },
        alpha,
        eta,
        switching: switching_t.map_or(Switching::Constant, |w| Switching::tanh(0.0, w)),
    };
    model.validate().map_err(|e| config_err(e.to_string()))?;
    Ok(RunConfig {
        model,
        omega0,
        switching_t,
        grid_n,
        grid_l,
    })
}

/// Load the configuration file, or the defaults when no file is given.
pub fn load_config(path: Option<&Path>, dim_override: Option<usize>) -> Result<RunConfig> {
    let text = match path {
        Some(p) => read(p, "config")?,
        None => String::new(),
    };
    parse_config(&text, dim_override)
}

/// Parse a pulse file. `polarization` is a comma-separated vector and
/// defaults to the first axis.
pub fn parse_pulse(text: &str, dim: Dim) -> Result<PulseSpec> {
    let map = parse_pairs(text, PULSE_KEYS, "pulse")?;
    let polarization = match map.get("polarization") {
        Some(v) => v
            .split(',')
            .map(|c| c.trim().parse::<f64>().map_err(|_| config_err(format!("polarization: cannot parse {c:?}"))))
            .collect::<Result<Vec<_>>>()?,
        None => {
            let mut p = vec![0.0; dim.n()];
            p[0] = 1.0;
            p
        }
    };
    let pulse = PulseSpec {
        center: number(&map, "center")?.unwrap_or(0.0),
        width: number(&map, "width")?.unwrap_or(1.0),
        carrier: number(&map, "carrier")?.unwrap_or(0.0),
        amplitude: number(&map, "amplitude")?.unwrap_or(0.0),
        phase: number(&map, "phase")?.unwrap_or(0.0),
        polarization,
    };
    pulse.validate(dim).map_err(|e| config_err(e.to_string()))?;
    Ok(pulse)
}

pub fn load_pulse(path: Option<&Path>, dim: Dim) -> Result<PulseSpec> {
    match path {
        Some(p) => parse_pulse(&read(p, "pulse file")?, dim),
        None => Ok(PulseSpec::none(dim)),
    }
}
