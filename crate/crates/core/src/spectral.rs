//! Spectral Galerkin discretisation in space with exact sampling in time.
//!
//! With e_k(x) = √2 sin(kπx) and λ_k = k²π², the Galerkin coefficients obey
//!
//! ```text
//! U_{m,k} = E_{α+1}(−λ_k t_m^{α+1}) U_{0,k} + O_k(t_m),
//! O_k(t) = ∫_0^t E_{α+1}(−λ_k (t−s)^{α+1}) dβ_k(s),
//! ```
//!
//! so each mode is a Gaussian vector (O_k(t_1), …, O_k(t_M)) with an explicit
//! covariance. Sampling it through a factor K with K Kᵀ = R introduces no
//! time-stepping error.

use crate::error::{Error, Result, ResultExt};
use crate::grid::TimeGrid;
use crate::mlf::MittagLeffler;
use crate::quad::GaussLegendre;
use crate::rng::StreamKey;
use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Gauss-Legendre nodes per panel of the covariance quadrature.
pub const DEFAULT_QUAD_NODES: usize = 8;
const GRADED_NODES: usize = 16;
// width of the innermost graded interval relative to the boundary layer
const GRADING_DEPTH: f64 = 0.05;
// the symbol behaves like 1 − c·u^ρ at the origin, so grading is always applied
const MIN_GRADING_LEVELS: usize = 24;
const COVARIANCE_RTOL: f64 = 1e-8;

/// λ_k = k²π², the k-th Dirichlet eigenvalue of −d²/dx² on (0, 1).
pub fn eigenvalue(k: usize) -> f64 {
    let kp = k as f64 * PI;
    kp * kp
}

/// Coefficients (sin(πx), e_k) for k = 1..=modes: only the first is nonzero.
pub fn sine_initial_coeffs(modes: usize) -> Vec<f64> {
    let mut c = vec![0.0; modes];
    if let Some(first) = c.first_mut() {
        *first = std::f64::consts::FRAC_1_SQRT_2;
    }
    c
}

/// Parameters of one spectral Galerkin run.
#[derive(Debug, Clone)]
pub struct SpectralParams {
    pub alpha: f64,
    pub modes: usize,
    pub grid: TimeGrid,
    pub u0_coeffs: Vec<f64>,
    /// Panels over [0, T]; must be a positive multiple of the step count.
    pub quad_panels: usize,
    pub quad_nodes: usize,
}

impl SpectralParams {
    /// Defaults: U₀ = sin(πx), one 8-point panel per time step.
    pub fn new(alpha: f64, modes: usize, grid: TimeGrid) -> Result<Self> {
        let params = Self {
            alpha,
            modes,
            quad_panels: grid.steps(),
            quad_nodes: DEFAULT_QUAD_NODES,
            u0_coeffs: sine_initial_coeffs(modes),
            grid,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_u0_coeffs(mut self, u0: Vec<f64>) -> Result<Self> {
        self.u0_coeffs = u0;
        self.validate()?;
        Ok(self)
    }

    pub fn with_quadrature(mut self, panels: usize, nodes: usize) -> Result<Self> {
        self.quad_panels = panels;
        self.quad_nodes = nodes;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!("alpha = {} must lie in (0, 1)", self.alpha)));
        }
        if self.modes == 0 {
            return Err(Error::invalid("at least one mode is required"));
        }
        if self.u0_coeffs.len() != self.modes {
            return Err(Error::invalid(format!(
                "{} initial coefficients given for {} modes",
                self.u0_coeffs.len(),
                self.modes
            )));
        }
        if self.u0_coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("initial coefficients must be finite"));
        }
        if self.quad_panels == 0 || !self.quad_panels.is_multiple_of(self.grid.steps()) {
            return Err(Error::invalid(format!(
                "quad_panels = {} must be a positive multiple of M = {}",
                self.quad_panels,
                self.grid.steps()
            )));
        }
        if self.quad_nodes == 0 {
            return Err(Error::invalid("quad_nodes must be positive"));
        }
        Ok(())
    }

    /// Order ρ = α + 1 of the Mittag-Leffler kernel.
    pub fn kernel_order(&self) -> f64 {
        self.alpha + 1.0
    }
}

/// Diagonal symbol t^{β−1} E_{α′,β}(−λ t^{α′}) of the resolvent S^{α′,β}(t).
///
/// For β = 1 and α′ = α + 1 this is the factor multiplying (v, e_k) in S(t)v.
pub fn resolvent_diag(alpha_prime: f64, beta: f64, lambda: f64, t: f64) -> Result<f64> {
    if !(alpha_prime > 0.0 && alpha_prime < 2.0) {
        return Err(Error::invalid(format!("alpha' = {alpha_prime} must lie in (0, 2)")));
    }
    if !(beta > 0.5 && beta.is_finite()) {
        return Err(Error::invalid(format!("beta = {beta} must exceed 1/2")));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("lambda = {lambda} must be positive")));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("t = {t} must be nonnegative")));
    }
    if t == 0.0 {
        return if beta == 1.0 {
            Ok(1.0)
        } else if beta > 1.0 {
            Ok(0.0)
        } else {
            Err(Error::invalid(format!("symbol is singular at t = 0 for beta = {beta}")))
        };
    }
    let e = MittagLeffler::new(alpha_prime, beta)?.eval(-lambda * t.powf(alpha_prime))?;
    Ok(t.powf(beta - 1.0) * e)
}

/// Covariance matrix of one mode's stochastic convolution and its factor.
#[derive(Debug, Clone)]
pub struct CovarianceFactor {
    pub mode: usize,
    /// R_{i,j} = Cov(O_k(t_i), O_k(t_j)), i, j = 1..M.
    pub r: DMatrix<f64>,
    /// K with K Kᵀ ≈ R; lower triangular unless the eigen fallback was used.
    pub k: Option<DMatrix<f64>>,
    pub lower_triangular: bool,
    /// Eigenvalues clipped to zero by the semidefinite fallback.
    pub clip_count: usize,
}

impl CovarianceFactor {
    pub fn from_matrix(mode: usize, r: DMatrix<f64>) -> Self {
        Self {
            mode,
            r,
            k: None,
            lower_triangular: false,
            clip_count: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.r.nrows()
    }

    /// max |K Kᵀ − R|.
    pub fn reconstruction_error(&self) -> Option<f64> {
        let k = self.k.as_ref()?;
        let kkt = k * k.transpose();
        Some((kkt - &self.r).amax())
    }
}

/// Composite rule for ∫_0^{t_i ∧ t_j} f(t_i − s) f(t_j − s) ds on a uniform grid.
///
/// Substituting u = t_i − s, the integral becomes a sum over time steps of
/// ∫_{t_p}^{t_{p+1}} f(u) f(u + t_j − t_i) du, so every entry reuses the symbol
/// at one fixed set of nodes. The first sub-panel, where f has a boundary
/// layer of width `layer`, is graded geometrically towards u = 0; there the
/// shifted factor f(u + t_d), d ≥ 1, is smooth and handled by product
/// integration against the Lagrange basis of the regular nodes.
#[derive(Debug, Clone)]
struct CovarianceRule {
    steps: usize,
    sub: usize,
    panel: f64,
    gl: GaussLegendre,
}

impl CovarianceRule {
    fn new(grid: &TimeGrid, panels: usize, nodes: usize) -> Self {
        Self {
            steps: grid.steps(),
            sub: panels / grid.steps(),
            panel: grid.horizon() / panels as f64,
            gl: GaussLegendre::new(nodes),
        }
    }

    fn per_step(&self) -> usize {
        self.sub * self.gl.len()
    }

    // nodes and weights of the regular rule inside one time step, relative to its start
    fn step_nodes(&self) -> (Vec<f64>, Vec<f64>) {
        let mut x = Vec::with_capacity(self.per_step());
        let mut w = Vec::with_capacity(self.per_step());
        for j in 0..self.sub {
            let a = j as f64 * self.panel;
            for (u, wt) in self.gl.on(a, a + self.panel) {
                x.push(u);
                w.push(wt);
            }
        }
        (x, w)
    }

    fn graded_nodes(&self, layer: f64) -> Vec<(f64, f64)> {
        let h = self.panel;
        let levels = if layer > 0.0 && layer < h {
            ((h / (GRADING_DEPTH * layer)).log2().ceil().max(0.0) as usize).min(60)
        } else {
            0
        }
        .max(MIN_GRADING_LEVELS);
        let rule = GaussLegendre::new(GRADED_NODES);
        let mut out = Vec::new();
        let mut hi = h;
        for _ in 0..levels {
            let lo = 0.5 * hi;
            out.extend(rule.on(lo, hi));
            hi = lo;
        }
        out.extend(rule.on(0.0, hi));
        out
    }

    fn build<F>(&self, symbol: &F, layer: f64, dt: f64) -> Result<DMatrix<f64>>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let m = self.steps;
        let n_loc = self.per_step();
        let n_gl = self.gl.len();
        let (xs, ws) = self.step_nodes();
        let mut f = vec![0.0; m * n_loc];
        for p in 0..m {
            let t0 = p as f64 * dt;
            for (q, &x) in xs.iter().enumerate() {
                f[p * n_loc + q] = symbol(t0 + x)?;
            }
        }

        // first sub-panel of the first step
        let y: Vec<f64> = xs[..n_gl].to_vec();
        let bary = barycentric_weights(&y);
        let mut moments = vec![0.0; n_gl];
        let mut self_term = 0.0;
        for (u, w) in self.graded_nodes(layer) {
            let fu = symbol(u)?;
            self_term += w * fu * fu;
            let basis = lagrange_basis(&y, &bary, u);
            for (mom, b) in moments.iter_mut().zip(basis) {
                *mom += w * fu * b;
            }
        }

        let panel_sum = |p: usize, d: usize| -> f64 {
            let a = &f[p * n_loc..(p + 1) * n_loc];
            let b = &f[(p + d) * n_loc..(p + d + 1) * n_loc];
            let start = if p == 0 { n_gl } else { 0 };
            let mut s = 0.0;
            for q in start..n_loc {
                s += ws[q] * a[q] * b[q];
            }
            if p == 0 {
                s += if d == 0 {
                    self_term
                } else {
                    moments.iter().zip(b).map(|(w, v)| w * v).sum::<f64>()
                };
            }
            s
        };

        let mut r = DMatrix::<f64>::zeros(m, m);
        for d in 0..m {
            let mut acc = 0.0;
            for i in 0..m - d {
                acc += panel_sum(i, d);
                r[(i, i + d)] = acc;
                r[(i + d, i)] = acc;
            }
        }
        Ok(r)
    }
}

fn barycentric_weights(y: &[f64]) -> Vec<f64> {
    (0..y.len())
        .map(|q| {
            let prod: f64 = (0..y.len())
                .filter(|&r| r != q)
                .map(|r| y[q] - y[r])
                .product();
            1.0 / prod
        })
        .collect()
}

fn lagrange_basis(y: &[f64], bary: &[f64], u: f64) -> Vec<f64> {
    if let Some(hit) = y.iter().position(|&v| v == u) {
        let mut e = vec![0.0; y.len()];
        e[hit] = 1.0;
        return e;
    }
    let terms: Vec<f64> = y.iter().zip(bary).map(|(&v, &b)| b / (u - v)).collect();
    let denom: f64 = terms.iter().sum();
    terms.into_iter().map(|t| t / denom).collect()
}

/// Covariance of ∫_0^t f(t − s) dβ(s) on the nodes t_1..t_M of `grid`.
///
/// `layer` is the width of the boundary layer of `f` at 0 (use the grid step
/// or larger when `f` is smooth). The result is checked against a rule with
/// doubled panels on the last diagonal entry; a relative mismatch above 1e-8
/// is an accuracy failure.
pub fn covariance_from_symbol<F>(
    symbol: F,
    layer: f64,
    grid: &TimeGrid,
    panels: usize,
    nodes: usize,
) -> Result<DMatrix<f64>>
where
    F: Fn(f64) -> Result<f64>,
{
    if panels == 0 || !panels.is_multiple_of(grid.steps()) {
        return Err(Error::invalid(format!(
            "panels = {panels} must be a positive multiple of M = {}",
            grid.steps()
        )));
    }
    let rule = CovarianceRule::new(grid, panels, nodes);
    let r = rule.build(&symbol, layer, grid.dt())?;

    // ∫_0^T f² with doubled panels and one more grading level
    let fine = CovarianceRule::new(grid, 2 * panels, nodes);
    let (xs, ws) = fine.step_nodes();
    let mut check = fine
        .graded_nodes(0.5 * layer)
        .into_iter()
        .map(|(u, w)| symbol(u).map(|v| w * v * v))
        .sum::<Result<f64>>()?;
    for p in 0..grid.steps() {
        let t0 = p as f64 * grid.dt();
        for (q, (&x, &w)) in xs.iter().zip(&ws).enumerate() {
            if p == 0 && q < fine.gl.len() {
                continue;
            }
            let v = symbol(t0 + x)?;
            check += w * v * v;
        }
    }
    let last = r[(grid.steps() - 1, grid.steps() - 1)];
    let residual = (last - check).abs() / last.abs().max(f64::MIN_POSITIVE);
    if residual > COVARIANCE_RTOL {
        return Err(Error::Accuracy {
            what: "covariance quadrature".into(),
            residual,
        });
    }
    Ok(r)
}

/// Fills R for mode `k` (1-based); the factor is left empty.
pub fn mode_covariance(k: usize, params: &SpectralParams) -> Result<CovarianceFactor> {
    if k == 0 || k > params.modes {
        return Err(Error::invalid(format!(
            "mode {k} outside 1..={}",
            params.modes
        )));
    }
    let rho = params.kernel_order();
    let lambda = eigenvalue(k);
    let ml = MittagLeffler::new(rho, 1.0)?;
    let symbol = |u: f64| ml.eval(-lambda * u.powf(rho));
    let layer = lambda.powf(-1.0 / rho);
    let r = covariance_from_symbol(
        symbol,
        layer,
        &params.grid,
        params.quad_panels,
        params.quad_nodes,
    )
    .context_with(|| format!("mode {k}"))?;
    Ok(CovarianceFactor::from_matrix(k, r))
}

/// Computes K with K Kᵀ = R: Cholesky first, then a clipped eigendecomposition.
pub fn factor_covariance(mut cf: CovarianceFactor) -> Result<CovarianceFactor> {
    let r = &cf.r;
    if r.nrows() != r.ncols() || r.nrows() == 0 {
        return Err(Error::invalid("covariance matrix must be square and nonempty"));
    }
    let scale = r.amax();
    let asym = (r - r.transpose()).amax();
    if asym > 1e-12 * scale.max(1.0) {
        return Err(Error::invalid(format!(
            "covariance of mode {} is not symmetric (max deviation {asym:e})",
            cf.mode
        )));
    }
    if r.diagonal().iter().any(|&d| !(d > 0.0)) {
        return Err(Error::invalid(format!(
            "covariance of mode {} has a nonpositive diagonal",
            cf.mode
        )));
    }
    if let Some(chol) = r.clone().cholesky() {
        cf.k = Some(chol.l());
        cf.lower_triangular = true;
        cf.clip_count = 0;
        return Ok(cf);
    }
    let eig = SymmetricEigen::new(r.clone());
    let mut clipped = 0;
    let roots: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&e| {
            if e < 0.0 {
                clipped += 1;
                0.0
            } else {
                e.sqrt()
            }
        })
        .collect();
    let mut k = eig.eigenvectors;
    for (j, s) in roots.iter().enumerate() {
        k.column_mut(j).scale_mut(*s);
    }
    cf.k = Some(k);
    cf.lower_triangular = false;
    cf.clip_count = clipped;
    Ok(cf)
}

/// K χ for a given standard normal vector χ.
pub fn apply_factor(cf: &CovarianceFactor, chi: &[f64]) -> Result<Vec<f64>> {
    let k = cf
        .k
        .as_ref()
        .ok_or_else(|| Error::invalid(format!("mode {} has not been factored", cf.mode)))?;
    let m = k.nrows();
    if chi.len() != k.ncols() {
        return Err(Error::invalid(format!(
            "expected {} normals, got {}",
            k.ncols(),
            chi.len()
        )));
    }
    let mut out = vec![0.0; m];
    for (i, o) in out.iter_mut().enumerate() {
        let cols = if cf.lower_triangular { i + 1 } else { k.ncols() };
        let mut s = 0.0;
        for (j, c) in chi.iter().enumerate().take(cols) {
            s += k[(i, j)] * c;
        }
        *o = s;
    }
    Ok(out)
}

/// Samples (O_k(t_1), …, O_k(t_M)) as K χ with χ drawn from `key`.
pub fn sample_mode_path(cf: &CovarianceFactor, key: StreamKey) -> Result<Vec<f64>> {
    apply_factor(cf, &key.normals(cf.dim()))
}

/// E_{α+1}(−λ_k t_m^{α+1}) for m = 0..=M.
pub fn mode_decay(k: usize, params: &SpectralParams) -> Result<Vec<f64>> {
    let rho = params.kernel_order();
    let lambda = eigenvalue(k);
    let ml = MittagLeffler::new(rho, 1.0)?;
    params
        .grid
        .nodes()
        .iter()
        .map(|&t| ml.eval(-lambda * t.powf(rho)))
        .collect()
}

/// Noise source for a spectral run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Noise {
    /// Space-time white noise; mode k draws from stream (seed, sample, k).
    White { seed: u64, sample: u64 },
    /// Deterministic problem: the stochastic convolution is dropped.
    Disabled,
}

/// Galerkin coefficients U_{m,k}, stored row-major as (M+1) × N.
#[derive(Debug, Clone)]
pub struct SpectralSolution {
    pub params: SpectralParams,
    pub coeffs: Vec<f64>,
}

impl SpectralSolution {
    pub fn modes(&self) -> usize {
        self.params.modes
    }

    pub fn coeff(&self, m: usize, k: usize) -> f64 {
        self.coeffs[m * self.params.modes + (k - 1)]
    }

    /// Coefficients at node m, modes 1..=N.
    pub fn row(&self, m: usize) -> &[f64] {
        let n = self.params.modes;
        &self.coeffs[m * n..(m + 1) * n]
    }

    /// ‖Σ_{k>n} (U_{i,k} − U_{j,k}) e_k‖.
    pub fn tail_diff_norm(&self, n: usize, i: usize, j: usize) -> f64 {
        let a = &self.row(i)[n.min(self.modes())..];
        let b = &self.row(j)[n.min(self.modes())..];
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }
}

/// Precomputed per-mode data for repeated sampling with fixed parameters.
#[derive(Debug, Clone)]
pub struct SpectralSampler {
    params: SpectralParams,
    decay: Vec<Vec<f64>>,
    factors: Option<Vec<CovarianceFactor>>,
}

impl SpectralSampler {
    /// Builds and factors the covariance of every mode, in parallel.
    pub fn new(params: SpectralParams) -> Result<Self> {
        params.validate()?;
        let factors = (1..=params.modes)
            .into_par_iter()
            .map(|k| {
                mode_covariance(k, &params)
                    .and_then(factor_covariance)
                    .context_with(|| format!("mode {k}"))
            })
            .collect::<Result<Vec<_>>>()?;
        let decay = Self::decays(&params)?;
        Ok(Self {
            params,
            decay,
            factors: Some(factors),
        })
    }

    /// Sampler for the noise-free problem; no covariance work is done.
    pub fn deterministic(params: SpectralParams) -> Result<Self> {
        params.validate()?;
        let decay = Self::decays(&params)?;
        Ok(Self {
            params,
            decay,
            factors: None,
        })
    }

    fn decays(params: &SpectralParams) -> Result<Vec<Vec<f64>>> {
        (1..=params.modes)
            .into_par_iter()
            .map(|k| {
                if params.u0_coeffs[k - 1] == 0.0 {
                    Ok(Vec::new())
                } else {
                    mode_decay(k, params)
                }
            })
            .collect()
    }

    pub fn params(&self) -> &SpectralParams {
        &self.params
    }

    pub fn factors(&self) -> Option<&[CovarianceFactor]> {
        self.factors.as_deref()
    }

    pub fn sample(&self, noise: Noise) -> Result<SpectralSolution> {
        let n = self.params.modes;
        let steps = self.params.grid.steps();
        let mut coeffs = vec![0.0; (steps + 1) * n];
        for (k, &u0) in self.params.u0_coeffs.iter().enumerate() {
            coeffs[k] = u0;
            if u0 != 0.0 {
                for m in 1..=steps {
                    coeffs[m * n + k] = self.decay[k][m] * u0;
                }
            }
        }
        if let Noise::White { seed, sample } = noise {
            let factors = self
                .factors
                .as_ref()
                .ok_or_else(|| Error::invalid("sampler was built without noise factors"))?;
            let paths = factors
                .par_iter()
                .map(|cf| sample_mode_path(cf, StreamKey::new(seed, sample, cf.mode as u64)))
                .collect::<Result<Vec<_>>>()?;
            for (k, path) in paths.iter().enumerate() {
                for (m, v) in path.iter().enumerate() {
                    coeffs[(m + 1) * n + k] += v;
                }
            }
        }
        Ok(SpectralSolution {
            params: self.params.clone(),
            coeffs,
        })
    }
}

/// One spectral Galerkin sample path.
pub fn simulate_spectral(params: &SpectralParams, noise: Noise) -> Result<SpectralSolution> {
    let sampler = match noise {
        Noise::Disabled => SpectralSampler::deterministic(params.clone())?,
        Noise::White { .. } => SpectralSampler::new(params.clone())?,
    };
    sampler.sample(noise)
}

/// ‖U_ref(t_m) − U_n(t_m)‖ for the n-mode solution coupled to `reference`.
///
/// Under shared per-mode noise the first n modes cancel, leaving the tail
/// norm sqrt(Σ_{k>n} U_{m,k}²).
pub fn spectral_error_path(reference: &SpectralSolution, n: usize) -> Result<Vec<f64>> {
    if n > reference.modes() {
        return Err(Error::invalid(format!(
            "approximation dimension {n} exceeds the reference dimension {}",
            reference.modes()
        )));
    }
    Ok((0..reference.params.grid.len())
        .map(|m| {
            reference.row(m)[n..]
                .iter()
                .map(|c| c * c)
                .sum::<f64>()
                .sqrt()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn resolvent_trivial_values() {
        assert_eq!(resolvent_diag(1.325, 1.0, PI * PI, 0.0).unwrap(), 1.0);
        assert_eq!(resolvent_diag(1.325, 2.0, PI * PI, 0.0).unwrap(), 0.0);
        let v = resolvent_diag(1.0, 1.0, 2.0, 0.5).unwrap();
        assert!(close(v, (-1.0f64).exp(), 1e-12));
        // S^{1,2}(t) = ∫_0^t e^{-λs} ds on the eigenline
        let v = resolvent_diag(1.0, 2.0, 2.0, 0.5).unwrap();
        assert!(close(v, (1.0 - (-1.0f64).exp()) / 2.0, 1e-12));
    }

    #[test]
    fn resolvent_rejects_out_of_range() {
        assert!(resolvent_diag(2.0, 1.0, 1.0, 1.0).is_err());
        assert!(resolvent_diag(1.5, 0.5, 1.0, 1.0).is_err());
        assert!(resolvent_diag(1.5, 1.0, 0.0, 1.0).is_err());
        assert!(resolvent_diag(1.5, 1.0, 1.0, -1.0).is_err());
        assert!(resolvent_diag(1.5, 0.75, 1.0, 0.0).is_err());
    }

    #[test]
    fn heat_symbol_covariance_matches_closed_form() {
        let grid = TimeGrid::new(1.0, 4).unwrap();
        let lambda = 1.0;
        let r = covariance_from_symbol(|u| Ok((-lambda * u).exp()), 1.0, &grid, 4, 8).unwrap();
        let t = grid.nodes();
        for i in 1..=4 {
            for j in 1..=4 {
                let (ti, tj) = (t[i], t[j]);
                let lo = ti.min(tj);
                let exact =
                    (-lambda * (ti + tj)).exp() * ((2.0 * lambda * lo).exp() - 1.0) / (2.0 * lambda);
                assert!(close(r[(i - 1, j - 1)], exact, 1e-8 * exact), "{i},{j}");
            }
        }
    }

    #[test]
    fn unit_symbol_gives_brownian_covariance() {
        let grid = TimeGrid::new(1.0, 5).unwrap();
        let r = covariance_from_symbol(|_| Ok(1.0), 1.0, &grid, 5, 4).unwrap();
        assert!(close(r[(0, 0)], grid.nodes()[1], 1e-14));
        assert!(close(r[(1, 3)], grid.nodes()[2], 1e-14));
        assert_eq!(r[(1, 3)], r[(3, 1)]);
    }

    #[test]
    fn hand_cholesky() {
        let r = DMatrix::from_row_slice(2, 2, &[4.0, 2.0, 2.0, 5.0]);
        let cf = factor_covariance(CovarianceFactor::from_matrix(1, r)).unwrap();
        let k = cf.k.unwrap();
        assert_eq!(k, DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 1.0, 2.0]));
        assert!(cf.lower_triangular);

        let cf = factor_covariance(CovarianceFactor::from_matrix(1, DMatrix::identity(3, 3))).unwrap();
        assert_eq!(cf.k.unwrap(), DMatrix::identity(3, 3));
    }

    #[test]
    fn semidefinite_falls_back_to_eigen() {
        // rank one: [[1,1],[1,1]]
        let r = DMatrix::from_element(2, 2, 1.0);
        let cf = factor_covariance(CovarianceFactor::from_matrix(1, r)).unwrap();
        assert!(!cf.lower_triangular);
        assert!(cf.reconstruction_error().unwrap() < 1e-12);
    }

    #[test]
    fn factor_rejects_asymmetric_input() {
        let r = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(matches!(
            factor_covariance(CovarianceFactor::from_matrix(1, r)),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn sampling_with_trivial_factors() {
        let mut cf = CovarianceFactor::from_matrix(1, DMatrix::identity(4, 4));
        cf.k = Some(DMatrix::zeros(4, 4));
        cf.lower_triangular = true;
        let key = StreamKey::new(1, 0, 1);
        assert_eq!(sample_mode_path(&cf, key).unwrap(), vec![0.0; 4]);
        cf.k = Some(DMatrix::identity(4, 4));
        assert_eq!(sample_mode_path(&cf, key).unwrap(), key.normals(4));
        cf.k = None;
        assert!(sample_mode_path(&cf, key).is_err());
    }

    #[test]
    fn deterministic_run_follows_resolvent() {
        let grid = TimeGrid::new(1.0, 10).unwrap();
        let params = SpectralParams::new(0.35, 3, grid.clone())
            .unwrap()
            .with_u0_coeffs(vec![1.0, 0.0, 0.0])
            .unwrap();
        let sol = simulate_spectral(&params, Noise::Disabled).unwrap();
        for (m, &t) in grid.nodes().iter().enumerate() {
            let want = resolvent_diag(1.35, 1.0, PI * PI, t).unwrap();
            assert!(close(sol.coeff(m, 1), want, 1e-12));
            assert_eq!(sol.coeff(m, 2), 0.0);
            assert_eq!(sol.coeff(m, 3), 0.0);
        }
    }

    #[test]
    fn sine_initial_datum() {
        let c = sine_initial_coeffs(4);
        assert!(close(c[0], 0.5f64.sqrt(), 1e-16));
        assert!(c[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn error_path_edge_cases() {
        let grid = TimeGrid::new(1.0, 4).unwrap();
        let params = SpectralParams::new(0.35, 6, grid).unwrap();
        let sol = simulate_spectral(&params, Noise::White { seed: 3, sample: 0 }).unwrap();
        assert!(spectral_error_path(&sol, 6).unwrap().iter().all(|&v| v == 0.0));
        let full = spectral_error_path(&sol, 0).unwrap();
        for (m, v) in full.iter().enumerate() {
            let norm = sol.row(m).iter().map(|c| c * c).sum::<f64>().sqrt();
            assert_eq!(*v, norm);
        }
        assert!(spectral_error_path(&sol, 7).is_err());
    }

    #[test]
    fn params_validation() {
        let grid = TimeGrid::new(1.0, 4).unwrap();
        assert!(SpectralParams::new(1.0, 4, grid.clone()).is_err());
        assert!(SpectralParams::new(0.5, 0, grid.clone()).is_err());
        let p = SpectralParams::new(0.5, 2, grid).unwrap();
        assert!(p.clone().with_quadrature(6, 8).is_err());
        assert!(p.clone().with_quadrature(8, 8).is_ok());
        assert!(p.with_u0_coeffs(vec![1.0]).is_err());
    }
}
