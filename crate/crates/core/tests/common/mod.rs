#![allow(dead_code)]

use nalgebra::Complex;
use std::f64::consts::PI;

/// Fixed-Talbot inversion of a Laplace transform at time t.
pub fn talbot<F>(transform: F, t: f64, terms: usize) -> f64
where
    F: Fn(Complex<f64>) -> Complex<f64>,
{
    let m = terms as f64;
    let r = 2.0 * m / (5.0 * t);
    let mut sum = 0.5 * (transform(Complex::new(r, 0.0)) * (r * t).exp()).re;
    for k in 1..terms {
        let theta = k as f64 * PI / m;
        let cot = theta.cos() / theta.sin();
        let z = Complex::new(r * theta * cot, r * theta);
        let sigma = theta + (theta * cot - 1.0) * cot;
        let term = (z * t).exp() * transform(z) * Complex::new(1.0, sigma);
        sum += term.re;
    }
    r / m * sum
}

/// Laplace transform z^{ρ-1} / (z^ρ + λ) of E_ρ(−λ t^ρ).
pub fn resolvent_transform(rho: f64, lambda: f64) -> impl Fn(Complex<f64>) -> Complex<f64> {
    move |z: Complex<f64>| z.powf(rho - 1.0) / (z.powf(rho) + lambda)
}

/// Sample covariance of paths stored row-wise, with per-entry standard errors.
pub fn sample_covariance(paths: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = paths.len() as f64;
    let dim = paths[0].len();
    let mean: Vec<f64> = (0..dim)
        .map(|i| paths.iter().map(|p| p[i]).sum::<f64>() / n)
        .collect();
    let mut cov = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        for j in 0..dim {
            cov[i][j] = paths
                .iter()
                .map(|p| (p[i] - mean[i]) * (p[j] - mean[j]))
                .sum::<f64>()
                / (n - 1.0);
        }
    }
    let se = (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| ((cov[i][i] * cov[j][j] + cov[i][j] * cov[i][j]) / n).sqrt())
                .collect()
        })
        .collect();
    (cov, se)
}

/// Largest disagreement between the two evaluators adjacent to each regime
/// boundary of E_{ρ,μ}, over `per_boundary` arguments spread across ±2% of it.
pub fn cross_regime_gap(rho: f64, mu: f64, per_boundary: usize) -> fracsim::Result<f64> {
    use fracsim::mlf::MittagLeffler;
    let ml = MittagLeffler::new(rho, mu)?;
    let mut worst = 0.0f64;
    let spread = |r: f64, i: usize| -r * (0.98 + 0.04 * i as f64 / (per_boundary - 1) as f64);
    let r1 = ml.series_radius();
    let r2 = ml.asymptotic_radius();
    if r2 > r1 {
        for i in 0..per_boundary {
            let z = spread(r1, i);
            worst = worst.max((ml.eval_series(z)? - ml.eval_integral(z)?).abs());
            let z = spread(r2, i);
            worst = worst.max((ml.eval_integral(z)? - ml.eval_asymptotic(z)?).abs());
        }
    } else {
        for i in 0..per_boundary {
            let z = spread(r1, i);
            worst = worst.max((ml.eval_series(z)? - ml.eval_asymptotic(z)?).abs());
        }
    }
    Ok(worst)
}
