//! Exponential-integral family used by the two-dimensional screened kernels.
//!
//! The Gaussian screening of the logarithmic and biharmonic kernels in the
//! plane produces the exponential integral `E1(u)` and a handful of entire
//! functions of `u = alpha^2 r^2` that must stay accurate as `u -> 0`, where
//! the naive closed forms cancel catastrophically.

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Beyond this argument `E1` underflows to zero in double precision.
const E1_UNDERFLOW: f64 = 740.0;

/// Exponential integral `E1(x) = \int_x^\infty e^{-t}/t dt` for `x > 0`.
///
/// Power series for `x <= 1`, modified Lentz continued fraction above.
/// Relative accuracy is a few ulp over the whole positive axis.
pub fn exp_integral_e1(x: f64) -> f64 {
    assert!(x > 0.0, "E1 requires a positive argument, got {x}");
    if x <= 1.0 {
        -EULER_GAMMA - x.ln() + ein_series(x)
    } else if x < E1_UNDERFLOW {
        e1_continued_fraction(x)
    } else {
        0.0
    }
}

/// The entire function `Ein(x) = E1(x) + gamma + ln x = \int_0^x (1 - e^{-t})/t dt`.
pub fn ein(x: f64) -> f64 {
    if x <= 2.0 {
        ein_series(x)
    } else {
        exp_integral_e1(x) + EULER_GAMMA + x.ln()
    }
}

fn ein_series(x: f64) -> f64 {
    // sum_{k>=1} (-1)^{k+1} x^k / (k k!)
    let mut term = x; // (-1)^{k+1} x^k / k!
    let mut sum = x;
    let mut k = 1.0;
    loop {
        k += 1.0;
        term *= -x / k;
        let contrib = term / k;
        sum += contrib;
        if contrib.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn e1_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-x).exp()
}

/// `(1 - e^{-u}) / u`, continuous at `u = 0` where it equals 1.
pub fn phi1(u: f64) -> f64 {
    if u == 0.0 {
        1.0
    } else {
        -(-u).exp_m1() / u
    }
}

/// `(1 - (1 + u) e^{-u}) / u^2`, continuous at `u = 0` where it equals 1/2.
pub fn phi2(u: f64) -> f64 {
    if u < 0.1 {
        // sum_{m>=2} (-1)^m (m-1) u^{m-2} / m!
        let mut sum = 0.0;
        let mut pow = 1.0;
        let mut fact = 2.0;
        for m in 2..24 {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * (m - 1) as f64 * pow / fact;
            pow *= u;
            fact *= (m + 1) as f64;
        }
        sum
    } else {
        (-(-u).exp_m1() - u * (-u).exp()) / (u * u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // Reference values from a 50-digit evaluation (mpmath.e1).
    #[test]
    fn e1_reference_values() {
        let cases = [
            (1e-10, 22.448635265138923),
            (0.1, 1.8229239584193906),
            (0.5, 0.5597735947761608),
            (1.0, 0.21938393439552027),
            (1.5, 0.10001958240663265),
            (2.0, 0.04890051070806112),
            (5.0, 0.0011482955912753257),
            (10.0, 4.1569689296853243e-6),
            (50.0, 3.783264029550459e-24),
        ];
        for (x, want) in cases {
            let got = exp_integral_e1(x);
            assert!(rel(got, want) < 1e-14, "E1({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn ein_matches_definition_away_from_zero() {
        for &x in &[0.3, 1.0, 1.9, 2.1, 4.0, 12.0] {
            let direct = exp_integral_e1(x) + EULER_GAMMA + x.ln();
            assert!(rel(ein(x), direct) < 1e-14);
        }
        // small-argument behaviour: Ein(x) ~ x - x^2/4 + x^3/18
        let x = 1e-6;
        assert!(rel(ein(x), x - x * x / 4.0 + x * x * x / 18.0) < 1e-15);
    }

    #[test]
    fn phi_helpers_are_continuous() {
        assert_eq!(phi1(0.0), 1.0);
        assert!((phi2(0.0) - 0.5).abs() < 1e-16);
        for &u in &[0.0999999, 0.1, 0.1000001] {
            let closed = (1.0 - (1.0 + u) * (-u as f64).exp()) / (u * u);
            assert!(rel(phi2(u), closed) < 1e-12);
        }
        assert!(rel(phi1(1e-8), 1.0 - 0.5e-8) < 1e-15);
    }
}
