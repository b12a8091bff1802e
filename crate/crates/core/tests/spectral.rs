mod common;

use common::{resolvent_transform, sample_covariance, talbot};
use fracsim::grid::TimeGrid;
use fracsim::rng::StreamKey;
use fracsim::spectral::{
    factor_covariance, mode_covariance, resolvent_diag, sample_mode_path, simulate_spectral,
    spectral_error_path, Noise, SpectralParams, SpectralSampler,
};
use std::f64::consts::PI;

#[test]
fn talbot_recovers_exponential() {
    let v = talbot(resolvent_transform(1.0, 2.0), 0.5, 32);
    assert!((v - (-1.0f64).exp()).abs() < 1e-10);
}

#[test]
fn resolvent_matches_inverse_laplace() {
    let lambda = PI * PI;
    for &(rho, t) in &[(1.35, 1.0), (1.35, 0.3), (1.2, 1.0), (1.8, 0.7)] {
        let oracle = talbot(resolvent_transform(rho, lambda), t, 32);
        let v = resolvent_diag(rho, 1.0, lambda, t).unwrap();
        assert!((v - oracle).abs() < 1e-6, "rho={rho} t={t}: {v} vs {oracle}");
    }
}

#[test]
fn factor_reconstructs_covariance() {
    let grid = TimeGrid::new(1.0, 100).unwrap();
    let params = SpectralParams::new(0.35, 64, grid).unwrap();
    for k in [1, 8, 64] {
        let cf = factor_covariance(mode_covariance(k, &params).unwrap()).unwrap();
        let tol = (1e-8 * cf.r.amax()).max(1e-10);
        let err = cf.reconstruction_error().unwrap();
        assert!(err < tol, "mode {k}: {err:e} (clipped {})", cf.clip_count);
        assert_eq!(cf.r, cf.r.transpose());
    }
}

#[test]
fn covariance_refines_consistently() {
    let grid = TimeGrid::new(1.0, 20).unwrap();
    let params = SpectralParams::new(0.35, 40, grid).unwrap();
    let fine = params.clone().with_quadrature(80, 12).unwrap();
    for k in [1, 5, 40] {
        let a = mode_covariance(k, &params).unwrap().r;
        let b = mode_covariance(k, &fine).unwrap().r;
        let rel = (a - &b).amax() / b.amax();
        assert!(rel < 1e-8, "mode {k}: {rel:e}");
    }
}

#[test]
fn sampled_paths_have_the_target_covariance() {
    let grid = TimeGrid::new(1.0, 5).unwrap();
    let params = SpectralParams::new(0.35, 1, grid).unwrap();
    let cf = factor_covariance(mode_covariance(1, &params).unwrap()).unwrap();
    let paths: Vec<Vec<f64>> = (0..20_000)
        .map(|s| sample_mode_path(&cf, StreamKey::new(11, s, 1)).unwrap())
        .collect();
    let (cov, se) = sample_covariance(&paths);
    for i in 0..5 {
        for j in 0..5 {
            let diff = (cov[i][j] - cf.r[(i, j)]).abs();
            assert!(diff <= 3.0 * se[i][j], "({i},{j}): {diff:e} > 3*{:e}", se[i][j]);
        }
    }
}

#[test]
fn modes_are_independent_and_centred() {
    let grid = TimeGrid::new(1.0, 4).unwrap();
    let params = SpectralParams::new(0.35, 2, grid)
        .unwrap()
        .with_u0_coeffs(vec![0.0, 0.0])
        .unwrap();
    let sampler = SpectralSampler::new(params).unwrap();
    let n = 10_000;
    let (mut s1, mut s2, mut s12, mut q1, mut q2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for s in 0..n {
        let sol = sampler.sample(Noise::White { seed: 5, sample: s }).unwrap();
        let (a, b) = (sol.coeff(4, 1), sol.coeff(4, 2));
        s1 += a;
        s2 += b;
        s12 += a * b;
        q1 += a * a;
        q2 += b * b;
    }
    let nf = n as f64;
    let (m1, m2) = (s1 / nf, s2 / nf);
    let (v1, v2) = (q1 / nf - m1 * m1, q2 / nf - m2 * m2);
    assert!(m1.abs() <= 3.0 * (v1 / nf).sqrt());
    assert!(m2.abs() <= 3.0 * (v2 / nf).sqrt());
    let cov = s12 / nf - m1 * m2;
    assert!(cov.abs() <= 3.0 * (v1 * v2 / nf).sqrt(), "cross covariance {cov:e}");
}

#[test]
fn tail_norm_equals_direct_subtraction() {
    let grid = TimeGrid::new(1.0, 8).unwrap();
    let noise = Noise::White { seed: 42, sample: 3 };
    let reference = simulate_spectral(&SpectralParams::new(0.35, 16, grid.clone()).unwrap(), noise).unwrap();
    let coarse = simulate_spectral(&SpectralParams::new(0.35, 4, grid).unwrap(), noise).unwrap();
    let tail = spectral_error_path(&reference, 4).unwrap();
    for (m, t) in tail.iter().enumerate() {
        let direct = (1..=16)
            .map(|k| {
                let c = if k <= 4 { coarse.coeff(m, k) } else { 0.0 };
                let d = reference.coeff(m, k) - c;
                d * d
            })
            .sum::<f64>()
            .sqrt();
        assert!((direct - t).abs() <= 1e-12, "node {m}");
    }
}

#[test]
fn runs_are_reproducible() {
    let grid = TimeGrid::new(1.0, 6).unwrap();
    let params = SpectralParams::new(0.5, 5, grid).unwrap();
    let noise = Noise::White { seed: 9, sample: 1 };
    let a = simulate_spectral(&params, noise).unwrap();
    let b = simulate_spectral(&params, noise).unwrap();
    assert_eq!(a.coeffs, b.coeffs);
    assert_eq!(a.row(0), params.u0_coeffs.as_slice());
}
