//! Linear finite elements in space with first-order Lubich convolution
//! quadrature in time, driven by the rank-one noise 1_{[0, 1/2]}(x) dβ(t).
//!
//! With hat functions φ_k on a uniform mesh, the nodal vector Ū_n solves
//!
//! ```text
//! (Mass + Δt ω_0 Stiff) Ū_n = Mass Ū_{n−1} − Δt Stiff Σ_{i=1}^{n−1} ω_{n−i} Ū_i + J Δ_nβ,
//! ```
//!
//! where Σ ω_k z^k = ((1 − z)/Δt)^{−α} and J_k = ∫_0^{1/2} φ_k.

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::special::gamma;
use crate::tridiag::{LdlFactor, SymTridiag};
use std::f64::consts::PI;

/// Right end of the support of the noise profile.
pub const NOISE_SUPPORT: f64 = 0.5;

/// Uniform mesh of [0, 1] with `cells` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh1D {
    cells: usize,
    h: f64,
}

impl Mesh1D {
    pub fn new(cells: usize) -> Result<Self> {
        if cells < 2 {
            return Err(Error::invalid(format!("mesh needs at least 2 cells, got {cells}")));
        }
        Ok(Self {
            cells,
            h: 1.0 / cells as f64,
        })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Number of interior nodes, N − 1.
    pub fn interior(&self) -> usize {
        self.cells - 1
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 / self.cells as f64
    }

    /// Interior node coordinates x_1..x_{N−1}.
    pub fn interior_nodes(&self) -> Vec<f64> {
        (1..self.cells).map(|i| self.node(i)).collect()
    }

    /// Whether every node of `self` is a node of `fine`.
    pub fn is_refined_by(&self, fine: &Mesh1D) -> bool {
        fine.cells.is_multiple_of(self.cells)
    }
}

/// ∫_0^c φ_k for the hat centred at interior node k.
fn hat_integral_up_to(mesh: &Mesh1D, k: usize, c: f64) -> f64 {
    let h = mesh.h;
    let (lo, mid, hi) = (mesh.node(k - 1), mesh.node(k), mesh.node(k + 1));
    if c <= lo {
        0.0
    } else if c <= mid {
        (c - lo) * (c - lo) / (2.0 * h)
    } else if c < hi {
        h - (hi - c) * (hi - c) / (2.0 * h)
    } else {
        h
    }
}

/// Gram matrices of the interior hats and the noise load vector.
#[derive(Debug, Clone)]
pub struct FemMatrices {
    pub mesh: Mesh1D,
    /// ∫ φ_i φ_j.
    pub mass: SymTridiag,
    /// ∫ φ′_i φ′_j.
    pub stiffness: SymTridiag,
    /// J_k = ∫_0^{1/2} φ_k.
    pub load: Vec<f64>,
}

pub fn assemble(mesh: &Mesh1D) -> FemMatrices {
    let n = mesh.interior();
    let h = mesh.h;
    FemMatrices {
        mesh: *mesh,
        mass: SymTridiag::constant(n, 2.0 * h / 3.0, h / 6.0),
        stiffness: SymTridiag::constant(n, 2.0 / h, -1.0 / h),
        load: (1..=n)
            .map(|k| hat_integral_up_to(mesh, k, NOISE_SUPPORT))
            .collect(),
    }
}

/// Convolution quadrature weights of the Riesz kernel t^{α−1}/Γ(α).
#[derive(Debug, Clone)]
pub struct LcqWeights {
    pub alpha: f64,
    pub dt: f64,
    pub omega: Vec<f64>,
}

/// ω_k = Δt^α c_k with c_0 = 1, c_k = c_{k−1}(k − 1 + α)/k, for k = 0..=steps.
///
/// α = 1 is accepted as the limiting case of a constant kernel.
pub fn lcq_weights(alpha: f64, dt: f64, steps: usize) -> Result<LcqWeights> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid(format!("alpha = {alpha} must lie in (0, 1]")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!("dt = {dt} must be positive")));
    }
    let scale = dt.powf(alpha);
    let mut omega = Vec::with_capacity(steps + 1);
    let mut c = 1.0;
    omega.push(scale);
    for k in 1..=steps {
        c *= (k as f64 - 1.0 + alpha) / k as f64;
        omega.push(scale * c);
    }
    Ok(LcqWeights { alpha, dt, omega })
}

/// max_m |Σ_{k<m} ω_k − t_m^α/Γ(α+1)|, the quadrature error for g ≡ 1.
pub fn lcq_convolve_check(weights: &LcqWeights, grid: &TimeGrid) -> Result<f64> {
    if (weights.dt - grid.dt()).abs() > 1e-12 * grid.dt() {
        return Err(Error::invalid(format!(
            "weights built for dt = {} but grid step is {}",
            weights.dt,
            grid.dt()
        )));
    }
    if weights.omega.len() < grid.len() {
        return Err(Error::invalid("fewer weights than grid nodes"));
    }
    let g = gamma(weights.alpha + 1.0);
    let mut partial = 0.0;
    let mut worst = 0.0f64;
    for (m, &t) in grid.nodes().iter().enumerate().skip(1) {
        partial += weights.omega[m - 1];
        worst = worst.max((partial - t.powf(weights.alpha) / g).abs());
    }
    Ok(worst)
}

/// Initial datum of the FEM scheme, approximating sin(πx) unless stated.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialDatum {
    /// L² projection onto the finite element space.
    Projection,
    /// Nodal interpolation.
    Interpolation,
    Zero,
    /// Explicit interior nodal values.
    Nodal(Vec<f64>),
}

/// (sin(πx), φ_k) in closed form.
fn sine_moments(mesh: &Mesh1D) -> Vec<f64> {
    let h = mesh.h;
    let factor = 2.0 * (1.0 - (PI * h).cos()) / (PI * PI * h);
    mesh.interior_nodes()
        .iter()
        .map(|&x| (PI * x).sin() * factor)
        .collect()
}

/// Matrices, weights and the factored step matrix of one (mesh, grid, α).
#[derive(Debug, Clone)]
pub struct FemScheme {
    pub matrices: FemMatrices,
    pub grid: TimeGrid,
    pub weights: LcqWeights,
    system: LdlFactor,
    mass_factor: LdlFactor,
}

impl FemScheme {
    pub fn new(mesh: Mesh1D, grid: TimeGrid, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid(format!("alpha = {alpha} must lie in (0, 1)")));
        }
        let matrices = assemble(&mesh);
        let weights = lcq_weights(alpha, grid.dt(), grid.steps())?;
        let system = matrices
            .mass
            .combine(1.0, &matrices.stiffness, grid.dt() * weights.omega[0])
            .factor()?;
        let mass_factor = matrices.mass.factor()?;
        Ok(Self {
            matrices,
            grid,
            weights,
            system,
            mass_factor,
        })
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.matrices.mesh
    }

    pub fn initial_nodal(&self, datum: &InitialDatum) -> Result<Vec<f64>> {
        let mesh = self.mesh();
        Ok(match datum {
            InitialDatum::Projection => self.mass_factor.solve(&sine_moments(mesh)),
            InitialDatum::Interpolation => mesh
                .interior_nodes()
                .iter()
                .map(|&x| (PI * x).sin())
                .collect(),
            InitialDatum::Zero => vec![0.0; mesh.interior()],
            InitialDatum::Nodal(v) => {
                if v.len() != mesh.interior() {
                    return Err(Error::invalid(format!(
                        "{} nodal values for {} interior nodes",
                        v.len(),
                        mesh.interior()
                    )));
                }
                v.clone()
            }
        })
    }

    /// Runs the recursion; `increments` are Δ_nβ for n = 1..=M or `None` for no noise.
    pub fn simulate(&self, datum: &InitialDatum, increments: Option<&[f64]>) -> Result<FemSolution> {
        let steps = self.grid.steps();
        if let Some(db) = increments {
            if db.len() != steps {
                return Err(Error::invalid(format!(
                    "{} Brownian increments for {steps} steps",
                    db.len()
                )));
            }
        }
        let n = self.mesh().interior();
        let dt = self.grid.dt();
        let omega = &self.weights.omega;
        let m = &self.matrices;
        let mut nodal = vec![0.0; (steps + 1) * n];
        nodal[..n].copy_from_slice(&self.initial_nodal(datum)?);
        let mut history = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        let mut stiff_hist = vec![0.0; n];
        for step in 1..=steps {
            history.iter_mut().for_each(|v| *v = 0.0);
            for i in 1..step {
                let w = omega[step - i];
                let row = &nodal[i * n..(i + 1) * n];
                for (h, u) in history.iter_mut().zip(row) {
                    *h += w * u;
                }
            }
            m.stiffness.mul_vec_into(&history, &mut stiff_hist);
            m.mass.mul_vec_into(&nodal[(step - 1) * n..step * n], &mut rhs);
            let db = increments.map_or(0.0, |d| d[step - 1]);
            for k in 0..n {
                rhs[k] += m.load[k] * db - dt * stiff_hist[k];
            }
            self.system.solve_in_place(&mut rhs);
            nodal[step * n..(step + 1) * n].copy_from_slice(&rhs);
        }
        Ok(FemSolution {
            mesh: *self.mesh(),
            grid: self.grid.clone(),
            nodal,
        })
    }

    /// Coordinates y with |y|₂ equal to the L² norm of the finite element function.
    pub fn l2_coordinates(&self, nodal: &[f64]) -> Vec<f64> {
        let d = self.mass_factor.pivots();
        let l = self.mass_factor.lower();
        let n = nodal.len();
        (0..n)
            .map(|i| {
                let next = if i + 1 < n { l[i] * nodal[i + 1] } else { 0.0 };
                d[i].sqrt() * (nodal[i] + next)
            })
            .collect()
    }
}

/// Interior nodal values Ū_{n,k}, stored row-major as (M+1) × (N−1).
#[derive(Debug, Clone)]
pub struct FemSolution {
    pub mesh: Mesh1D,
    pub grid: TimeGrid,
    pub nodal: Vec<f64>,
}

impl FemSolution {
    pub fn row(&self, m: usize) -> &[f64] {
        let n = self.mesh.interior();
        &self.nodal[m * n..(m + 1) * n]
    }
}

/// One FEM sample path for the given scheme.
pub fn simulate_fem(
    scheme: &FemScheme,
    datum: &InitialDatum,
    increments: Option<&[f64]>,
) -> Result<FemSolution> {
    scheme.simulate(datum, increments)
}

/// Linear interpolation of coarse interior values onto the interior nodes of `fine`.
pub fn prolongate(coarse: &Mesh1D, values: &[f64], fine: &Mesh1D) -> Result<Vec<f64>> {
    if !coarse.is_refined_by(fine) {
        return Err(Error::invalid(format!(
            "mesh with {} cells does not refine mesh with {} cells",
            fine.cells, coarse.cells
        )));
    }
    let r = fine.cells / coarse.cells;
    let at = |i: usize| {
        if i == 0 || i == coarse.cells {
            0.0
        } else {
            values[i - 1]
        }
    };
    Ok((1..fine.cells)
        .map(|j| {
            let (c, o) = (j / r, j % r);
            if o == 0 {
                at(c)
            } else {
                let s = o as f64 / r as f64;
                (1.0 - s) * at(c) + s * at(c + 1)
            }
        })
        .collect())
}

/// Fine interior values at the coarse interior nodes.
pub fn restrict(fine: &Mesh1D, values: &[f64], coarse: &Mesh1D) -> Result<Vec<f64>> {
    if !coarse.is_refined_by(fine) {
        return Err(Error::invalid("meshes are not nested"));
    }
    let r = fine.cells / coarse.cells;
    Ok((1..coarse.cells).map(|i| values[i * r - 1]).collect())
}

/// Nodal difference fine − P(coarse), row-major (M+1) × (N_fine − 1).
pub fn fem_error_rows(coarse: &FemSolution, fine: &FemSolution) -> Result<Vec<f64>> {
    if coarse.grid != fine.grid {
        return Err(Error::invalid("coarse and fine solutions use different time grids"));
    }
    let n = fine.mesh.interior();
    let mut out = Vec::with_capacity(fine.nodal.len());
    for m in 0..fine.grid.len() {
        let p = prolongate(&coarse.mesh, coarse.row(m), &fine.mesh)?;
        out.extend(fine.row(m).iter().zip(&p).map(|(f, c)| f - c));
    }
    debug_assert_eq!(out.len(), fine.grid.len() * n);
    Ok(out)
}

/// ‖fine(t_m) − P coarse(t_m)‖_{L²(0,1)} for every node, via the fine mass matrix.
pub fn fem_error_path(coarse: &FemSolution, fine: &FemSolution) -> Result<Vec<f64>> {
    let rows = fem_error_rows(coarse, fine)?;
    let n = fine.mesh.interior();
    let mass = assemble(&fine.mesh).mass;
    Ok(rows
        .chunks_exact(n)
        .map(|d| mass.quad_form(d).max(0.0).sqrt())
        .collect())
}

/// L² distance between the finite element function with interior values
/// `nodal` and `f`, by 4-point Gauss-Legendre per cell.
pub fn l2_distance<F: Fn(f64) -> f64>(mesh: &Mesh1D, nodal: &[f64], f: F) -> f64 {
    let gl = crate::quad::GaussLegendre::new(4);
    let at = |i: usize| {
        if i == 0 || i == mesh.cells {
            0.0
        } else {
            nodal[i - 1]
        }
    };
    let mut s = 0.0;
    for c in 0..mesh.cells {
        let (a, b) = (mesh.node(c), mesh.node(c + 1));
        let (ua, ub) = (at(c), at(c + 1));
        for (x, w) in gl.on(a, b) {
            let uh = ua + (ub - ua) * (x - a) / mesh.h;
            let d = uh - f(x);
            s += w * d * d;
        }
    }
    s.sqrt()
}
