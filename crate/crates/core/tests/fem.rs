use fracsim::fem::{
    assemble, fem_error_path, l2_distance, lcq_convolve_check, lcq_weights, FemScheme,
    FemSolution, InitialDatum, Mesh1D,
};
use fracsim::grid::TimeGrid;
use fracsim::mlf::MittagLeffler;
use fracsim::rng::brownian_increments;
use proptest::prelude::*;
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

fn deterministic_error(cells: usize, steps: usize, alpha: f64) -> f64 {
    let scheme = FemScheme::new(
        Mesh1D::new(cells).unwrap(),
        TimeGrid::new(1.0, steps).unwrap(),
        alpha,
    )
    .unwrap();
    let sol = scheme.simulate(&InitialDatum::Interpolation, None).unwrap();
    let amp = MittagLeffler::new(alpha + 1.0, 1.0)
        .unwrap()
        .eval(-PI * PI)
        .unwrap();
    l2_distance(&scheme.matrices.mesh, sol.row(steps), |x| amp * (PI * x).sin())
}

#[test]
fn zero_noise_matches_mittag_leffler_decay() {
    let coarse = deterministic_error(1 << 6, 1 << 9, 0.25);
    let fine = deterministic_error(1 << 7, 1 << 10, 0.25);
    assert!(fine < 5e-3, "error {fine:e}");
    assert!(coarse / fine >= 1.8, "ratio {}", coarse / fine);
}

#[test]
fn weights_match_gamma_ratio() {
    for alpha in [0.2, 0.5, 0.8] {
        let w = lcq_weights(alpha, 1.0, 2000).unwrap();
        for (k, &om) in w.omega.iter().enumerate() {
            let kf = k as f64;
            let direct = (ln_gamma(kf + alpha) - ln_gamma(alpha) - ln_gamma(kf + 1.0)).exp();
            assert!((om - direct).abs() <= 1e-12, "alpha={alpha} k={k}");
        }
        assert!(w.omega.windows(2).all(|p| p[1] < p[0] && p[1] > 0.0));
    }
}

#[test]
fn convolution_check_decays_under_refinement() {
    let check = |m: usize, alpha: f64| {
        let grid = TimeGrid::new(1.0, m).unwrap();
        lcq_convolve_check(&lcq_weights(alpha, grid.dt(), m).unwrap(), &grid).unwrap()
    };
    for alpha in [0.2, 0.5, 0.8] {
        let ratio = check(200, alpha) / check(100, alpha);
        // the worst node is t_1, where the error is exactly Δt^α |1 − 1/Γ(1+α)|
        assert!((ratio - 0.5f64.powf(alpha)).abs() < 1e-10, "alpha={alpha}: {ratio}");
    }
}

#[test]
fn error_path_of_identical_runs_is_zero() {
    let grid = TimeGrid::new(1.0, 20).unwrap();
    let scheme = FemScheme::new(Mesh1D::new(16).unwrap(), grid.clone(), 0.3).unwrap();
    let db = brownian_increments(&grid, 1, 0);
    let sol = scheme.simulate(&InitialDatum::Projection, Some(&db)).unwrap();
    assert!(fem_error_path(&sol, &sol).unwrap().iter().all(|&e| e == 0.0));
}

#[test]
fn error_path_against_zero_coarse_data() {
    let grid = TimeGrid::new(1.0, 3).unwrap();
    let fine_mesh = Mesh1D::new(32).unwrap();
    let coarse_mesh = Mesh1D::new(8).unwrap();
    let fine = FemSolution {
        mesh: fine_mesh,
        grid: grid.clone(),
        nodal: vec![1.0; 4 * 31],
    };
    let coarse = FemSolution {
        mesh: coarse_mesh,
        grid,
        nodal: vec![0.0; 4 * 7],
    };
    // unit interior values drop linearly to zero in the two boundary cells
    let h = fine_mesh.h();
    let want = (1.0 - 4.0 * h / 3.0).sqrt();
    for e in fem_error_path(&coarse, &fine).unwrap() {
        assert!((e - want).abs() < 1e-12);
    }
}

#[test]
fn error_path_rejects_mismatched_inputs() {
    let a = FemSolution {
        mesh: Mesh1D::new(4).unwrap(),
        grid: TimeGrid::new(1.0, 2).unwrap(),
        nodal: vec![0.0; 9],
    };
    let b = FemSolution {
        mesh: Mesh1D::new(6).unwrap(),
        grid: TimeGrid::new(1.0, 2).unwrap(),
        nodal: vec![0.0; 15],
    };
    assert!(fem_error_path(&a, &b).is_err());
    let c = FemSolution {
        mesh: Mesh1D::new(8).unwrap(),
        grid: TimeGrid::new(1.0, 4).unwrap(),
        nodal: vec![0.0; 35],
    };
    assert!(fem_error_path(&a, &c).is_err());
}

#[test]
fn mass_matrix_is_positive_definite() {
    for cells in [2, 3, 17, 512] {
        let m = assemble(&Mesh1D::new(cells).unwrap());
        assert!(m.mass.factor().unwrap().pivots().iter().all(|&d| d > 0.0));
        assert!(m.load.iter().all(|&j| (0.0..=m.mesh.h()).contains(&j)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn noise_enters_linearly(seed in any::<u64>(), c in -4.0f64..4.0) {
        let grid = TimeGrid::new(1.0, 16).unwrap();
        let scheme = FemScheme::new(Mesh1D::new(8).unwrap(), grid.clone(), 0.45).unwrap();
        let db = brownian_increments(&grid, seed, 0);
        let scaled: Vec<f64> = db.iter().map(|v| c * v).collect();
        let a = scheme.simulate(&InitialDatum::Zero, Some(&db)).unwrap();
        let b = scheme.simulate(&InitialDatum::Zero, Some(&scaled)).unwrap();
        for (x, y) in a.nodal.iter().zip(&b.nodal) {
            prop_assert!((c * x - y).abs() <= 1e-13 * (1.0 + y.abs()));
        }
    }
}
