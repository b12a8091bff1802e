//! Gamma function helpers used by the Mittag-Leffler evaluator and the
//! convolution quadrature weights.

use std::f64::consts::PI;

const MAX_GAMMA_ARG: f64 = 171.6;

/// sin(πx) with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    if x.fract() == 0.0 {
        return 0.0;
    }
    // reduce to [-1, 1] so that the argument of sin stays small
    let r = x - 2.0 * (x / 2.0).round();
    (PI * r).sin()
}

/// cos(πx) with exact zeros at the half-integers.
pub fn cos_pi(x: f64) -> f64 {
    sin_pi(x + 0.5)
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x.fract() == 0.0
}

/// Γ(x) for real x. Poles return `f64::INFINITY`.
///
/// Arguments are shifted into [1, 2) where the Lanczos sum is evaluated and
/// the recurrence is applied as a product, which keeps factorial-like values
/// accurate to a few ulps.
pub fn gamma(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if is_nonpositive_integer(x) {
        return f64::INFINITY;
    }
    if x < 0.5 {
        return PI / (sin_pi(x) * gamma(1.0 - x));
    }
    if x > MAX_GAMMA_ARG {
        return f64::INFINITY;
    }
    if x.fract() == 0.0 && x <= 23.0 {
        let n = x as u32;
        return (1..n).fold(1.0, |acc, i| acc * i as f64);
    }
    let mut y = x;
    let mut scale = 1.0;
    while y < 1.0 {
        scale /= y;
        y += 1.0;
    }
    while y >= 2.0 {
        y -= 1.0;
        scale *= y;
    }
    scale * statrs::function::gamma::gamma(y)
}

/// 1/Γ(x), an entire function: zero at the non-positive integers.
pub fn recip_gamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return 0.0;
    }
    if x < 0.5 {
        return sin_pi(x) * gamma(1.0 - x) / PI;
    }
    if x > MAX_GAMMA_ARG {
        return (-ln_gamma(x)).exp();
    }
    1.0 / gamma(x)
}

/// ln|Γ(x)|.
pub fn ln_gamma(x: f64) -> f64 {
    if x > 0.5 && x < 20.0 {
        return gamma(x).ln();
    }
    statrs::function::gamma::ln_gamma(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_integers_are_factorials() {
        assert_eq!(gamma(1.0), 1.0);
        assert_eq!(gamma(5.0), 24.0);
        assert_eq!(gamma(11.0), 3_628_800.0);
        let f30: f64 = (1..30).map(|i| i as f64).product();
        assert!((gamma(30.0) / f30 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gamma_half_integers() {
        let sqrt_pi = PI.sqrt();
        let rel = |a: f64, b: f64| (a / b - 1.0).abs();
        assert!(rel(gamma(0.5), sqrt_pi) < 4e-15);
        assert!(rel(gamma(1.5), 0.5 * sqrt_pi) < 4e-15);
        assert!(rel(gamma(-0.5), -2.0 * sqrt_pi) < 4e-15);
        assert!(rel(gamma(10.5), 1_133_278.388_948_785_6) < 1e-14);
    }

    #[test]
    fn recip_gamma_vanishes_at_poles() {
        for n in 0..6 {
            assert_eq!(recip_gamma(-(n as f64)), 0.0);
        }
        assert!((recip_gamma(-0.35) - 1.0 / gamma(-0.35)).abs() < 1e-15);
        assert!(recip_gamma(172.0) > 0.0);
        assert!(recip_gamma(172.0) < 1e-300);
    }

    #[test]
    fn sin_pi_exact_zeros() {
        assert_eq!(sin_pi(3.0), 0.0);
        assert_eq!(sin_pi(-7.0), 0.0);
        assert!((sin_pi(0.5) - 1.0).abs() < 1e-16);
        assert!((sin_pi(-1.35) - (-1.35 * PI).sin()).abs() < 1e-15);
        assert_eq!(cos_pi(0.5), 0.0);
    }
}
