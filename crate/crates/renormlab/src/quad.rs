//! Adaptive Gauss–Kronrod quadrature (7-point Gauss, 15-point Kronrod) with
//! global bisection, explicit breakpoints, oscillation-aware panelling and
//! semi-infinite ranges.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Kronrod abscissae on [0, 1]; odd indices are the Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Values that can be integrated: real or complex scalars.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn zero() -> Self;
    fn norm(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn norm(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn norm(&self) -> f64 {
        Complex64::norm(*self)
    }
}

/// Tolerances and work limits for the adaptive driver.
#[derive(Debug, Clone, Copy)]
pub struct QuadOpts {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOpts {
    fn default() -> Self {
        Self {
            abs_tol: 1e-300,
            rel_tol: 1e-12,
            max_intervals: 20_000,
        }
    }
}

impl QuadOpts {
    /// Options with the given relative tolerance and a negligible absolute one.
    pub fn rel(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    /// Options with both tolerances set.
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub evals: usize,
}

/// One 15-point Kronrod rule on [a, b] with its embedded 7-point Gauss error.
pub fn gk15<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64) {
    let (v, e, _) = gk15_floor(f, a, b);
    (v, e)
}

/// [`gk15`] plus the roundoff floor 50·ε·∫|f| below which the error estimate
/// cannot be reduced.
fn gk15_floor<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_k = fc.norm() * WGK[7];
    let mut fv = [(fc, fc); 7];
    for (i, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = h * x;
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv[i] = (f1, f2);
        kron = kron + (f1 + f2) * w;
        abs_k += w * (f1.norm() + f2.norm());
        if i % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[i / 2];
        }
    }
    let mean = kron * 0.5;
    let mut asc = (fc - mean).norm() * WGK[7];
    for (&(f1, f2), &w) in fv.iter().zip(WGK.iter()) {
        asc += w * ((f1 - mean).norm() + (f2 - mean).norm());
    }
    let asc = asc * h.abs();
    let abs_k = abs_k * h.abs();
    let mut err = ((kron - gauss) * h).norm();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * abs_k;
    if abs_k > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(floor);
    }
    (kron * h, err, floor)
}

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
    floor: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error)
    }
}

/// Globally adaptive integration over the consecutive panels defined by
/// `points` (at least two, ascending).
pub fn integrate_points<T: QuadValue, F: Fn(f64) -> T>(
    f: F,
    points: &[f64],
    opts: QuadOpts,
) -> Result<QuadResult<T>> {
    if points.len() < 2 {
        return Err(crate::error::invalid("quadrature needs at least two points"));
    }
    let mut heap = BinaryHeap::new();
    let mut total = T::zero();
    let mut total_err = 0.0;
    let mut floor = 0.0;
    let mut evals = 0usize;
    for w in points.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        let (v, e, fl) = gk15_floor(&f, w[0], w[1]);
        evals += 15;
        total = total + v;
        total_err += e;
        floor += fl;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
            floor: fl,
        });
    }
    // Requests below the accumulated roundoff floor are treated as met.
    while total_err > opts.abs_tol.max(opts.rel_tol * total.norm()).max(2.0 * floor) {
        if heap.len() >= opts.max_intervals {
            return Err(Error::Tolerance {
                context: "adaptive Gauss-Kronrod".into(),
                achieved: total_err,
                requested: opts.abs_tol.max(opts.rel_tol * total.norm()),
            });
        }
        let Some(s) = heap.pop() else { break };
        let m = 0.5 * (s.a + s.b);
        if m <= s.a || m >= s.b {
            heap.push(s);
            break;
        }
        let (v1, e1, f1) = gk15_floor(&f, s.a, m);
        let (v2, e2, f2) = gk15_floor(&f, m, s.b);
        evals += 30;
        total = total - s.value + v1 + v2;
        total_err += e1 + e2 - s.error;
        floor += f1 + f2 - s.floor;
        heap.push(Segment {
            a: s.a,
            b: m,
            value: v1,
            error: e1,
            floor: f1,
        });
        heap.push(Segment {
            a: m,
            b: s.b,
            value: v2,
            error: e2,
            floor: f2,
        });
    }
    // Re-sum to remove drift accumulated by incremental updates.
    let mut value = T::zero();
    let mut error = 0.0;
    for s in heap.iter() {
        value = value + s.value;
        error += s.error;
    }
    Ok(QuadResult {
        value,
        error,
        evals,
    })
}

/// Adaptive integration over [a, b].
pub fn integrate<T: QuadValue, F: Fn(f64) -> T>(
    f: F,
    a: f64,
    b: f64,
    opts: QuadOpts,
) -> Result<QuadResult<T>> {
    integrate_points(f, &[a, b], opts)
}

/// Adaptive integration over [a, b] with panel boundaries at every half period
/// `half_period` of the trigonometric factor, plus any extra `points`.
pub fn integrate_oscillatory<T: QuadValue, F: Fn(f64) -> T>(
    f: F,
    a: f64,
    b: f64,
    half_period: f64,
    points: &[f64],
    opts: QuadOpts,
) -> Result<QuadResult<T>> {
    let mut pts = vec![a, b];
    if half_period.is_finite() && half_period > 0.0 {
        let n = ((b - a) / half_period).floor() as usize;
        pts.extend((1..=n.min(2_000_000)).map(|i| a + i as f64 * half_period));
    }
    pts.extend(points.iter().copied().filter(|&p| p > a && p < b));
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * y.abs().max(1e-300));
    integrate_points(f, &pts, opts)
}

/// Integration over [a, ∞) by consecutive panels of geometrically growing
/// width starting at `scale`, stopped once `quiet` panels in a row contribute
/// below the tolerance. The integrand must decay at least like a power larger
/// than one or be cut off by a Gaussian.
pub fn integrate_to_infinity<T: QuadValue, F: Fn(f64) -> T>(
    f: F,
    a: f64,
    scale: f64,
    opts: QuadOpts,
) -> Result<QuadResult<T>> {
    let mut total = T::zero();
    let mut err = 0.0;
    let mut evals = 0;
    let mut lo = a;
    let mut width = scale;
    let mut quiet = 0;
    for _ in 0..400 {
        let hi = lo + width;
        let r = integrate(&f, lo, hi, QuadOpts { abs_tol: opts.abs_tol, rel_tol: opts.rel_tol, max_intervals: opts.max_intervals })
            .or_else(|_| integrate(&f, lo, hi, QuadOpts::new(opts.abs_tol.max(opts.rel_tol * total.norm()), opts.rel_tol)))?;
        total = total + r.value;
        err += r.error;
        evals += r.evals;
        if r.value.norm() <= opts.rel_tol * 1e-3 * total.norm() + opts.abs_tol {
            quiet += 1;
            if quiet >= 3 {
                return Ok(QuadResult {
                    value: total,
                    error: err,
                    evals,
                });
            }
        } else {
            quiet = 0;
        }
        lo = hi;
        width *= 1.6;
    }
    Err(Error::Tolerance {
        context: "semi-infinite panel sum".into(),
        achieved: f64::INFINITY,
        requested: opts.rel_tol,
    })
}

/// Composite Simpson rule on `n` (rounded up to even) panels; used as an
/// independent oracle.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n.max(2) + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}
