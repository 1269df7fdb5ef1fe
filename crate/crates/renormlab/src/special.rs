//! Special functions needed by the kernels: Dawson's integral and the
//! exponential integral E₁.

/// Euler–Mascheroni constant γ.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402_43;

/// Argument above which [`dawson`] uses its asymptotic series.
const DAWSON_ASYMPTOTIC_FROM: f64 = 7.0;

/// Dawson's integral F(x) = e^{−x²} ∫₀ˣ e^{t²} dt = (√π/2) e^{−x²} erfi(x).
///
/// For |x| ≤ 7 the positive-term series e^{−x²} Σ x^{2n+1}/(n!(2n+1)) is
/// summed without cancellation; above that the asymptotic expansion
/// (1/2x) Σ (2n−1)!!/(2x²)ⁿ is truncated at its smallest term, whose size is
/// below 1e−17 there. Relative accuracy is a few ulps across the real line.
pub fn dawson(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax == 0.0 {
        0.0
    } else if ax <= DAWSON_ASYMPTOTIC_FROM {
        let x2 = ax * ax;
        let mut term = ax; // x^{2n+1}/n!
        let mut sum = ax;
        let mut n = 0.0;
        loop {
            n += 1.0;
            term *= x2 / n;
            let add = term / (2.0 * n + 1.0);
            sum += add;
            if add < sum * 1e-17 {
                break;
            }
        }
        sum * (-x2).exp()
    } else {
        let inv = 1.0 / (2.0 * ax * ax);
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut n = 0.0;
        loop {
            n += 1.0;
            let next = term * (2.0 * n - 1.0) * inv;
            if next >= term || next < 1e-18 {
                break;
            }
            term = next;
            sum += term;
        }
        sum / (2.0 * ax)
    };
    v.copysign(x)
}

/// Exponential integral E₁(x) = ∫ₓ^∞ e^{−t}/t dt for x > 0.
pub fn expint_e1(x: f64) -> f64 {
    assert!(x > 0.0, "E1 requires x > 0");
    if x <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        let mut k = 1.0;
        loop {
            term *= -x / k;
            let add = -term / k;
            sum += add;
            if add.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
            k += 1.0;
        }
        -EULER_GAMMA - x.ln() + sum
    } else {
        // Modified Lentz evaluation of the continued fraction
        // E₁(x) = e^{−x} / (x + 1 − 1/(x + 3 − 4/(x + 5 − ...))).
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let a = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}
