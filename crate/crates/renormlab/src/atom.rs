//! Bound-state spectra E_j and momentum matrix elements p_{j′j}.
//!
//! Two paths are provided:
//!
//! * the analytic isotropic harmonic oscillator in any dimension, using the
//!   ladder-operator closed forms;
//! * a two-dimensional grid path: a sinc discrete-variable representation
//!   (uniform grid, spectrally accurate kinetic and derivative matrices) with
//!   a Chebyshev-filtered subspace iteration for the lowest states.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec::Exec;
use crate::model::Dim;

/// One monomial c·Π x_i^{p_i} of a polynomial potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coef: f64,
    pub powers: Vec<u32>,
}

/// Potential values on a uniform square grid [−L/2, L/2]², interpolated by
/// bicubic Catmull–Rom splines; outside the table the potential is a hard wall.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedGrid {
    pub n: usize,
    pub length: f64,
    /// Row-major values, index `ix + n·iy`.
    pub values: Vec<f64>,
}

/// Shape of the binding potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PotentialKind {
    /// V = ½ m ω₀² |x|².
    IsotropicHarmonic { omega0: f64 },
    /// V = Σ monomials.
    Polynomial { terms: Vec<Monomial> },
    /// Interpolated table (two dimensions only).
    Tabulated(TabulatedGrid),
}

/// A binding potential together with the particle mass it acts on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub dim: Dim,
    pub mass: f64,
    pub kind: PotentialKind,
}

impl PotentialSpec {
    /// Isotropic harmonic potential.
    pub fn harmonic(dim: Dim, mass: f64, omega0: f64) -> Self {
        Self {
            dim,
            mass,
            kind: PotentialKind::IsotropicHarmonic { omega0 },
        }
    }

    /// Check that the potential is strictly bound and consistent with `dim`.
    pub fn validate(&self, dim: Dim) -> Result<()> {
        if dim != self.dim {
            return Err(invalid("potential dimension differs from model dimension"));
        }
        if !(self.mass > 0.0) {
            return Err(invalid("potential mass must be positive"));
        }
        let d = dim.n();
        match &self.kind {
            PotentialKind::IsotropicHarmonic { omega0 } => {
                if !(*omega0 > 0.0 && omega0.is_finite()) {
                    return Err(invalid("omega0 must be positive"));
                }
            }
            PotentialKind::Polynomial { terms } => {
                if terms.iter().any(|t| t.powers.len() != d) {
                    return Err(invalid("monomial powers must have one entry per dimension"));
                }
                let deg = terms
                    .iter()
                    .filter(|t| t.coef != 0.0)
                    .map(|t| t.powers.iter().sum::<u32>())
                    .max()
                    .unwrap_or(0);
                if deg == 0 || deg % 2 == 1 {
                    return Err(invalid("polynomial potential must have even positive top degree"));
                }
                // The top-degree homogeneous part must be positive on the sphere.
                let top = |x: &[f64]| -> f64 {
                    terms
                        .iter()
                        .filter(|t| t.powers.iter().sum::<u32>() == deg)
                        .map(|t| t.coef * t.powers.iter().zip(x).map(|(&p, &xi)| xi.powi(p as i32)).product::<f64>())
                        .sum()
                };
                for dir in sphere_directions(d, 64) {
                    if top(&dir) <= 0.0 {
                        return Err(invalid("polynomial potential is not bound: top-degree part not positive"));
                    }
                }
            }
            PotentialKind::Tabulated(g) => {
                if d != 2 {
                    return Err(invalid("tabulated potentials are two-dimensional"));
                }
                if g.n < 4 || g.values.len() != g.n * g.n || !(g.length > 0.0) {
                    return Err(invalid("tabulated grid shape mismatch"));
                }
                let n = g.n;
                let interior_min = g.values.iter().cloned().fold(f64::INFINITY, f64::min);
                let boundary_min = (0..n)
                    .flat_map(|i| [g.values[i], g.values[i + n * (n - 1)], g.values[i * n], g.values[n - 1 + i * n]])
                    .fold(f64::INFINITY, f64::min);
                if !(boundary_min > interior_min) {
                    return Err(invalid("tabulated potential does not rise toward the boundary"));
                }
            }
        }
        Ok(())
    }

    /// V(x).
    pub fn value(&self, x: &[f64]) -> f64 {
        match &self.kind {
            PotentialKind::IsotropicHarmonic { omega0 } => {
                0.5 * self.mass * omega0 * omega0 * x.iter().map(|v| v * v).sum::<f64>()
            }
            PotentialKind::Polynomial { terms } => terms
                .iter()
                .map(|t| t.coef * t.powers.iter().zip(x).map(|(&p, &xi)| xi.powi(p as i32)).product::<f64>())
                .sum(),
            PotentialKind::Tabulated(g) => g.eval(x[0], x[1]).0,
        }
    }

    /// ∇V(x) written into `out`.
    pub fn gradient(&self, x: &[f64], out: &mut [f64]) {
        match &self.kind {
            PotentialKind::IsotropicHarmonic { omega0 } => {
                let k = self.mass * omega0 * omega0;
                out.iter_mut().zip(x).for_each(|(o, xi)| *o = k * xi);
            }
            PotentialKind::Polynomial { terms } => {
                for (c, o) in out.iter_mut().enumerate() {
                    *o = terms
                        .iter()
                        .filter(|t| t.powers[c] > 0)
                        .map(|t| {
                            t.coef
                                * t.powers
                                    .iter()
                                    .zip(x)
                                    .enumerate()
                                    .map(|(i, (&p, &xi))| {
                                        if i == c {
                                            p as f64 * xi.powi(p as i32 - 1)
                                        } else {
                                            xi.powi(p as i32)
                                        }
                                    })
                                    .product::<f64>()
                        })
                        .sum();
                }
            }
            PotentialKind::Tabulated(g) => {
                let (_, gx, gy) = g.eval(x[0], x[1]);
                out[0] = gx;
                out[1] = gy;
            }
        }
    }

    /// Hessian ∂_a∂_b V(x), row-major d×d, written into `out`.
    pub fn hessian(&self, x: &[f64], out: &mut [f64]) {
        let d = x.len();
        match &self.kind {
            PotentialKind::IsotropicHarmonic { omega0 } => {
                let k = self.mass * omega0 * omega0;
                for a in 0..d {
                    for b in 0..d {
                        out[a * d + b] = if a == b { k } else { 0.0 };
                    }
                }
            }
            PotentialKind::Polynomial { terms } => {
                for a in 0..d {
                    for b in 0..d {
                        out[a * d + b] = terms
                            .iter()
                            .map(|t| {
                                let mut p: Vec<i32> = t.powers.iter().map(|&v| v as i32).collect();
                                let mut f = t.coef;
                                f *= p[a] as f64;
                                p[a] -= 1;
                                f *= p[b] as f64;
                                p[b] -= 1;
                                if f == 0.0 {
                                    return 0.0;
                                }
                                f * p.iter().zip(x).map(|(&pi, &xi)| xi.powi(pi)).product::<f64>()
                            })
                            .sum();
                    }
                }
            }
            PotentialKind::Tabulated(_) => {
                // Central differences of the analytic spline gradient.
                let h = 1e-5;
                let mut gp = vec![0.0; d];
                let mut gm = vec![0.0; d];
                for b in 0..d {
                    let mut xp = x.to_vec();
                    let mut xm = x.to_vec();
                    xp[b] += h;
                    xm[b] -= h;
                    self.gradient(&xp, &mut gp);
                    self.gradient(&xm, &mut gm);
                    for a in 0..d {
                        out[a * d + b] = (gp[a] - gm[a]) / (2.0 * h);
                    }
                }
            }
        }
    }
}

impl TabulatedGrid {
    fn coord(&self, i: usize) -> f64 {
        -0.5 * self.length + self.length * i as f64 / (self.n - 1) as f64
    }

    /// Value and gradient of the bicubic Catmull–Rom interpolant.
    fn eval(&self, x: f64, y: f64) -> (f64, f64, f64) {
        let n = self.n;
        let h = self.length / (n - 1) as f64;
        let fx = (x + 0.5 * self.length) / h;
        let fy = (y + 0.5 * self.length) / h;
        if fx < 0.0 || fy < 0.0 || fx > (n - 1) as f64 || fy > (n - 1) as f64 {
            return (f64::INFINITY, 0.0, 0.0);
        }
        let ix = (fx.floor() as usize).min(n - 2);
        let iy = (fy.floor() as usize).min(n - 2);
        let (tx, ty) = (fx - ix as f64, fy - iy as f64);
        let at = |i: isize, j: isize| {
            let i = i.clamp(0, n as isize - 1) as usize;
            let j = j.clamp(0, n as isize - 1) as usize;
            self.values[i + n * j]
        };
        let w = |t: f64| {
            [
                0.5 * (-t * t * t + 2.0 * t * t - t),
                0.5 * (3.0 * t * t * t - 5.0 * t * t + 2.0),
                0.5 * (-3.0 * t * t * t + 4.0 * t * t + t),
                0.5 * (t * t * t - t * t),
            ]
        };
        let dw = |t: f64| {
            [
                0.5 * (-3.0 * t * t + 4.0 * t - 1.0),
                0.5 * (9.0 * t * t - 10.0 * t),
                0.5 * (-9.0 * t * t + 8.0 * t + 1.0),
                0.5 * (3.0 * t * t - 2.0 * t),
            ]
        };
        let (wx, wy, dwx, dwy) = (w(tx), w(ty), dw(tx), dw(ty));
        let (mut v, mut gx, mut gy) = (0.0, 0.0, 0.0);
        for a in 0..4 {
            for b in 0..4 {
                let f = at(ix as isize + a as isize - 1, iy as isize + b as isize - 1);
                v += wx[a] * wy[b] * f;
                gx += dwx[a] * wy[b] * f;
                gy += wx[a] * dwy[b] * f;
            }
        }
        (v, gx / h, gy / h)
    }

    /// Tabulate `f` on an n×n grid of side `length`.
    pub fn from_fn(n: usize, length: f64, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut g = Self {
            n,
            length,
            values: vec![0.0; n * n],
        };
        for j in 0..n {
            for i in 0..n {
                g.values[i + n * j] = f(g.coord(i), g.coord(j));
            }
        }
        g
    }
}

fn sphere_directions(d: usize, m: usize) -> Vec<Vec<f64>> {
    if d == 2 {
        (0..m)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / m as f64;
                vec![t.cos(), t.sin()]
            })
            .collect()
    } else {
        // Fibonacci sphere.
        let golden = PI * (3.0 - 5f64.sqrt());
        (0..m)
            .map(|i| {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / m as f64;
                let r = (1.0 - z * z).sqrt();
                let t = golden * i as f64;
                vec![r * t.cos(), r * t.sin(), z]
            })
            .collect()
    }
}

/// Grid description for the two-dimensional path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Points per dimension.
    pub n: usize,
    /// Side length of the square domain [−L/2, L/2]².
    pub length: f64,
}

impl GridSpec {
    /// Grid spacing.
    pub fn h(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Coordinate of grid index i.
    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - 0.5 * (self.n as f64 - 1.0)) * self.h()
    }
}

/// How the spectrum was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BasisMeta {
    /// Harmonic closed forms; quantum numbers per state.
    Analytic { omega0: f64, quanta: Vec<Vec<u32>> },
    /// Grid eigenvectors (ℓ²-normalized, index `ix + n·iy`).
    Grid { grid: GridSpec, states: Vec<Vec<f64>> },
}

/// Energies and momentum matrix elements of the lowest J_max+1 states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomSpectrum {
    pub dim: Dim,
    pub mass: f64,
    pub energies: Vec<f64>,
    /// p_{j′j} component c stored at `(jp * nstates + j) * d + c`.
    pub p_elems: Vec<Complex64>,
    /// ⟨ψ_j|p̂²|ψ_j⟩ over the full (untruncated) basis.
    pub p2_diag: Vec<f64>,
    pub basis: BasisMeta,
}

impl AtomSpectrum {
    /// Number of states J_max + 1.
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    /// True when the spectrum holds no states.
    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Component c of p_{j′j}.
    pub fn p(&self, jp: usize, j: usize, c: usize) -> Complex64 {
        let d = self.dim.n();
        self.p_elems[(jp * self.len() + j) * d + c]
    }

    /// |p_{j′j}|² summed over components.
    pub fn p_abs2(&self, jp: usize, j: usize) -> f64 {
        (0..self.dim.n()).map(|c| self.p(jp, j, c).norm_sqr()).sum()
    }

    /// ω^A_{jj′} = E_j − E_j′ (ħ = 1).
    pub fn omega(&self, j: usize, jp: usize) -> f64 {
        self.energies[j] - self.energies[jp]
    }

    /// Returns a copy with every p_{j′j} multiplied by `s`.
    pub fn scaled_momenta(&self, s: f64) -> Self {
        let mut o = self.clone();
        o.p_elems.iter_mut().for_each(|p| *p *= s);
        o.p2_diag.iter_mut().for_each(|p| *p *= s * s);
        o
    }
}

/// Solve for the lowest J_max+1 states of `pot`.
///
/// The isotropic harmonic potential uses the analytic path in any dimension.
/// Other potentials require d = 2 and a grid; see [`solve_spectrum_grid`].
pub fn solve_spectrum(pot: &PotentialSpec, j_max: usize) -> Result<AtomSpectrum> {
    pot.validate(pot.dim)?;
    if j_max < 2 {
        return Err(invalid("J_max must be at least 2"));
    }
    match pot.kind {
        PotentialKind::IsotropicHarmonic { omega0 } => Ok(harmonic_spectrum(pot.dim, pot.mass, omega0, j_max)),
        _ => {
            let grid = auto_grid(pot, j_max)?;
            solve_spectrum_grid(pot, j_max, grid, Exec::default())
        }
    }
}

fn harmonic_spectrum(dim: Dim, m: f64, w: f64, j_max: usize) -> AtomSpectrum {
    let d = dim.n();
    let count = j_max + 1;
    // Enumerate shells of total quantum number until enough states exist.
    let mut quanta: Vec<Vec<u32>> = Vec::new();
    let mut shell = 0u32;
    while quanta.len() < count {
        let mut sh = Vec::new();
        let mut cur = vec![0u32; d];
        enumerate_shell(d, shell, 0, &mut cur, &mut sh);
        sh.sort();
        quanta.extend(sh);
        shell += 1;
    }
    quanta.truncate(count);
    let energies: Vec<f64> = quanta
        .iter()
        .map(|q| w * (q.iter().sum::<u32>() as f64 + 0.5 * d as f64))
        .collect();
    let amp = (0.5 * m * w).sqrt();
    let mut p = vec![Complex64::new(0.0, 0.0); count * count * d];
    for (j, qj) in quanta.iter().enumerate() {
        for (jp, qp) in quanta.iter().enumerate() {
            for c in 0..d {
                let others_equal = (0..d).all(|i| i == c || qj[i] == qp[i]);
                if !others_equal {
                    continue;
                }
                // p = i√(mω/2)(a† − a).
                let v = if qp[c] == qj[c] + 1 {
                    Complex64::new(0.0, amp * ((qj[c] + 1) as f64).sqrt())
                } else if qp[c] + 1 == qj[c] {
                    Complex64::new(0.0, -amp * (qj[c] as f64).sqrt())
                } else {
                    continue;
                };
                p[(jp * count + j) * d + c] = v;
            }
        }
    }
    let p2_diag = quanta
        .iter()
        .map(|q| q.iter().map(|&n| m * w * (n as f64 + 0.5)).sum())
        .collect();
    AtomSpectrum {
        dim,
        mass: m,
        energies,
        p_elems: p,
        p2_diag,
        basis: BasisMeta::Analytic { omega0: w, quanta },
    }
}

fn enumerate_shell(d: usize, left: u32, idx: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if idx == d - 1 {
        cur[idx] = left;
        out.push(cur.clone());
        return;
    }
    for k in 0..=left {
        cur[idx] = k;
        enumerate_shell(d, left - k, idx + 1, cur, out);
    }
}

/// Pick a grid whose extent covers the classically allowed region of the
/// J_max-th level with a generous margin.
fn auto_grid(pot: &PotentialSpec, j_max: usize) -> Result<GridSpec> {
    // Estimate the level energy from the potential scale along the axes.
    let e_guess = 2.0 * (j_max as f64 + 2.0);
    let mut r = 0.5;
    while pot.value(&[r, 0.0]).min(pot.value(&[0.0, r])) < 4.0 * e_guess && r < 1e3 {
        r *= 1.1;
    }
    let length = 2.0 * r + 6.0 / (pot.mass * e_guess).sqrt();
    Ok(GridSpec { n: 48, length })
}

/// Sinc-DVR kinetic matrix T = p²/2m on a uniform 1-D grid.
pub fn dvr_kinetic(n: usize, h: f64, m: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        let pre = 1.0 / (2.0 * m * h * h);
        if i == j {
            pre * PI * PI / 3.0
        } else {
            let k = i as f64 - j as f64;
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            pre * 2.0 * sign / (k * k)
        }
    })
}

/// Sinc-DVR first-derivative matrix on a uniform 1-D grid.
pub fn dvr_derivative(n: usize, h: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            let k = i as f64 - j as f64;
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            sign / (k * h)
        }
    })
}

/// Two-dimensional Hamiltonian T⊗1 + 1⊗T + V on a sinc-DVR grid.
struct GridHamiltonian {
    n: usize,
    t: DMatrix<f64>,
    v: Vec<f64>,
}

impl GridHamiltonian {
    fn new(pot: &PotentialSpec, grid: GridSpec) -> Self {
        let n = grid.n;
        let t = dvr_kinetic(n, grid.h(), pot.mass);
        let mut v = vec![0.0; n * n];
        for iy in 0..n {
            for ix in 0..n {
                v[ix + n * iy] = pot.value(&[grid.x(ix), grid.x(iy)]);
            }
        }
        Self { n, t, v }
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n;
        let xm = DMatrix::from_column_slice(n, n, x);
        let y = &self.t * &xm + &xm * &self.t;
        for (k, o) in out.iter_mut().enumerate() {
            *o = y[k] + self.v[k] * x[k];
        }
    }

    /// Gershgorin bounds on the spectrum.
    fn bounds(&self) -> (f64, f64) {
        let rowsum = (0..self.n)
            .map(|i| (0..self.n).map(|j| if i == j { 0.0 } else { self.t[(i, j)].abs() }).sum::<f64>())
            .fold(0.0, f64::max);
        let tdiag = self.t[(0, 0)];
        let vmin = self.v.iter().cloned().fold(f64::INFINITY, f64::min);
        let vmax = self.v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (vmin + 2.0 * (tdiag - rowsum), vmax + 2.0 * (tdiag + rowsum))
    }
}

/// Lowest `k` eigenpairs of the grid Hamiltonian by Chebyshev-filtered
/// subspace iteration.
fn chebyshev_subspace(h: &GridHamiltonian, k: usize, exec: Exec) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let nn = h.n * h.n;
    let block = k + 6.max(k / 4);
    let (lo, hi) = h.bounds();
    // Deterministic pseudo-random start block.
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
    let mut x = DMatrix::from_fn(nn, block, |_, _| {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    });
    let apply_block = |x: &DMatrix<f64>| -> DMatrix<f64> {
        let cols = exec.map_range(x.ncols(), |c| {
            let mut out = vec![0.0; nn];
            h.apply(x.column(c).as_slice(), &mut out);
            out
        });
        DMatrix::from_fn(nn, x.ncols(), |i, c| cols[c][i])
    };
    let mut cut = lo + 0.02 * (hi - lo);
    let degree = 24;
    for _iter in 0..300 {
        // Filter damping [cut, hi] and amplifying below cut.
        let e = 0.5 * (hi - cut);
        let c = 0.5 * (hi + cut);
        let mut y_prev = x.clone();
        let mut y = (apply_block(&x) - &x * c) / e;
        for _ in 1..degree {
            let y_next = (apply_block(&y) - &y * c) * (2.0 / e) - &y_prev;
            y_prev = y;
            y = y_next;
            let scale = y.norm();
            if scale > 1e100 {
                y /= scale;
                y_prev /= scale;
            }
        }
        let q = y.qr().q();
        let hq = apply_block(&q);
        let hk = q.transpose() * &hq;
        let hk = (&hk + hk.transpose()) * 0.5;
        let eig = SymmetricEigen::new(hk);
        let mut order: Vec<usize> = (0..block).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vecs = DMatrix::from_fn(block, block, |r, c| eig.eigenvectors[(r, order[c])]);
        x = &q * &vecs;
        let hx = &hq * &vecs;
        let mut worst: f64 = 0.0;
        for i in 0..k {
            let r = hx.column(i) - x.column(i) * vals[i];
            worst = worst.max(r.norm() / vals[i].abs().max(1.0));
        }
        if worst < 1e-11 {
            return Ok((vals[..k].to_vec(), x.columns(0, k).into_owned()));
        }
        cut = vals[block - 1];
    }
    Err(Error::Tolerance {
        context: "Chebyshev subspace eigensolver".into(),
        achieved: f64::NAN,
        requested: 1e-11,
    })
}

/// Grid path in two dimensions on an explicit grid.
pub fn solve_spectrum_grid(pot: &PotentialSpec, j_max: usize, grid: GridSpec, exec: Exec) -> Result<AtomSpectrum> {
    pot.validate(pot.dim)?;
    if pot.dim != Dim::Two {
        return Err(invalid("grid eigensolver supports d = 2 only"));
    }
    if j_max < 2 {
        return Err(invalid("J_max must be at least 2"));
    }
    let count = j_max + 1;
    let n = grid.n;
    if n * n < 4 * count {
        return Err(invalid("grid too small for the requested number of states"));
    }
    let ham = GridHamiltonian::new(pot, grid);
    let (vals, vecs) = chebyshev_subspace(&ham, count, exec)?;

    // Boundary amplitude check on the highest state.
    let last = vecs.column(count - 1);
    let mut edge: f64 = 0.0;
    let mut peak: f64 = 0.0;
    for iy in 0..n {
        for ix in 0..n {
            let a = last[ix + n * iy].abs();
            peak = peak.max(a);
            if ix == 0 || iy == 0 || ix == n - 1 || iy == n - 1 {
                edge = edge.max(a);
            }
        }
    }
    if edge > 1e-6 * peak {
        return Err(invalid(format!(
            "grid too small: boundary amplitude {:.2e} of the highest state relative to its peak",
            edge / peak
        )));
    }

    let dmat = dvr_derivative(n, grid.h());
    let xs: Vec<f64> = (0..n).map(|i| grid.x(i)).collect();
    let mut states: Vec<Vec<f64>> = (0..count).map(|i| vecs.column(i).iter().copied().collect()).collect();
    // Deterministic sign: largest-magnitude component positive.
    for s in states.iter_mut() {
        let (imax, _) = s
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |acc, (i, v)| if v.abs() > acc.1 + 1e-12 { (i, v.abs()) } else { acc });
        if s[imax] < 0.0 {
            s.iter_mut().for_each(|v| *v = -*v);
        }
    }
    let mean_x = |s: &[f64]| -> (f64, f64) {
        let mut mx = 0.0;
        let mut my = 0.0;
        for iy in 0..n {
            for ix in 0..n {
                let w = s[ix + n * iy] * s[ix + n * iy];
                mx += w * xs[ix];
                my += w * xs[iy];
            }
        }
        (mx, my)
    };
    let mut order: Vec<usize> = (0..count).collect();
    let scale = vals.iter().map(|v| v.abs()).fold(1.0, f64::max);
    order.sort_by(|&a, &b| {
        if (vals[a] - vals[b]).abs() > 1e-8 * scale {
            vals[a].total_cmp(&vals[b])
        } else {
            let (xa, ya) = mean_x(&states[a]);
            let (xb, yb) = mean_x(&states[b]);
            xa.total_cmp(&xb).then(ya.total_cmp(&yb))
        }
    });
    let energies: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    let states: Vec<Vec<f64>> = order.iter().map(|&i| std::mem::take(&mut states[i])).collect();

    // Derivatives of every state along x and y.
    let derivs: Vec<[Vec<f64>; 2]> = exec.map(&states, |s| {
        let sm = DMatrix::from_column_slice(n, n, s);
        let dx = &dmat * &sm;
        let dy = &sm * dmat.transpose();
        [dx.as_slice().to_vec(), dy.as_slice().to_vec()]
    });
    let mut p = vec![Complex64::new(0.0, 0.0); count * count * 2];
    for jp in 0..count {
        for j in 0..count {
            for c in 0..2 {
                let dot: f64 = states[jp].iter().zip(&derivs[j][c]).map(|(a, b)| a * b).sum();
                // p = −i∂.
                p[(jp * count + j) * 2 + c] = Complex64::new(0.0, -dot);
            }
        }
    }
    let p2_diag = derivs
        .iter()
        .map(|d| d[0].iter().chain(d[1].iter()).map(|v| v * v).sum())
        .collect();
    Ok(AtomSpectrum {
        dim: Dim::Two,
        mass: pot.mass,
        energies,
        p_elems: p,
        p2_diag,
        basis: BasisMeta::Grid { grid, states },
    })
}

/// Solve on `grid` and on a grid with 1.5× the points, and fail if any energy
/// moves by more than `tol` (relative to max(1, |E|)).
pub fn solve_spectrum_checked(pot: &PotentialSpec, j_max: usize, grid: GridSpec, tol: f64) -> Result<AtomSpectrum> {
    let coarse = solve_spectrum_grid(pot, j_max, grid, Exec::default())?;
    let fine_grid = GridSpec {
        n: grid.n * 3 / 2,
        length: grid.length,
    };
    let fine = solve_spectrum_grid(pot, j_max, fine_grid, Exec::default())?;
    for (a, b) in coarse.energies.iter().zip(&fine.energies) {
        if (a - b).abs() > tol * b.abs().max(1.0) {
            return Err(invalid(format!("grid too coarse: energy {a} moves to {b} under refinement")));
        }
    }
    Ok(fine)
}

/// Σ_℘ Σ_{j′} |ε_℘·p_{j′j}|² for propagation direction κ and its polarization basis.
pub fn momentum_coupling_sum(spec: &AtomSpectrum, k_hat: &[f64], basis: &[Vec<f64>], j: usize) -> Result<f64> {
    let d = spec.dim.n();
    if k_hat.len() != d || j >= spec.len() {
        return Err(invalid("direction or level index out of range"));
    }
    let mut s = 0.0;
    for jp in 0..spec.len() {
        for e in basis {
            let proj: Complex64 = (0..d).map(|c| spec.p(jp, j, c) * e[c]).sum();
            s += proj.norm_sqr();
        }
    }
    Ok(s)
}

/// Angle-integrated coupling weights per j′: π|p_{jj′}|² (d = 2) or
/// (8π/3)|p_{jj′}|² (d = 3).
pub fn angular_weights(spec: &AtomSpectrum, j: usize) -> Vec<f64> {
    let f = spec.dim.transverse_angular_factor();
    (0..spec.len()).map(|jp| f * spec.p_abs2(jp, j)).collect()
}

/// Sum-rule completeness of the truncated level sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumRule {
    /// Σ_{j′ ≤ J_max} |p_{jj′}|².
    pub truncated_sum: f64,
    /// ⟨ψ_j|p̂²|ψ_j⟩.
    pub p2: f64,
    /// (p2 − truncated_sum)/p2.
    pub deficit: f64,
    /// Deficit above the 5% threshold.
    pub warn: bool,
}

/// Threshold on the sum-rule deficit above which results are flagged.
pub const SUM_RULE_WARN: f64 = 0.05;

/// Sum rule Σ_{j′}|p_{jj′}|² against ⟨p̂²⟩ for level j.
pub fn sum_rule(spec: &AtomSpectrum, j: usize) -> SumRule {
    let truncated_sum: f64 = (0..spec.len()).map(|jp| spec.p_abs2(jp, j)).sum();
    let p2 = spec.p2_diag[j];
    let deficit = if p2 > 0.0 { (p2 - truncated_sum) / p2 } else { 0.0 };
    SumRule {
        truncated_sum,
        p2,
        deficit,
        warn: deficit > SUM_RULE_WARN,
    }
}

/// Eigenvalues of a 1-D Hamiltonian p²/2m + V(x) on a dense sinc-DVR grid.
pub fn dvr_levels_1d(v: impl Fn(f64) -> f64, m: f64, n: usize, length: f64, count: usize) -> Vec<f64> {
    let g = GridSpec { n, length };
    let mut h = dvr_kinetic(n, g.h(), m);
    for i in 0..n {
        h[(i, i)] += v(g.x(i));
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev.truncate(count);
    ev
}

/// Ground-state density of a spectrum on its grid, or `None` for analytic spectra.
pub fn grid_state(spec: &AtomSpectrum, j: usize) -> Option<(GridSpec, DVector<f64>)> {
    match &spec.basis {
        BasisMeta::Grid { grid, states } => Some((*grid, DVector::from_column_slice(&states[j]))),
        BasisMeta::Analytic { .. } => None,
    }
}
