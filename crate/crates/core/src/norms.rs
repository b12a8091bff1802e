//! Pathwise norms of error processes and convergence-rate estimates.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Discretisation whose error is being measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Spectral,
    Fem,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Spectral => "spectral",
            Method::Fem => "fem",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Norms ‖e(t_m)‖ of an error process on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NormedPath {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl NormedPath {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::invalid(format!(
                "path has {} times and {} values",
                times.len(),
                values.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("path times must be strictly increasing"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid("path values must be finite and nonnegative"));
        }
        Ok(Self { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Every `stride`-th node, always keeping the first.
    pub fn subsample(&self, stride: usize) -> Self {
        let stride = stride.max(1);
        Self {
            times: self.times.iter().copied().step_by(stride).collect(),
            values: self.values.iter().copied().step_by(stride).collect(),
        }
    }
}

pub fn sup_norm(path: &NormedPath) -> f64 {
    path.values.iter().fold(0.0, |m, &v| m.max(v))
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::invalid(format!(
            "Hölder exponent {gamma} must lie in (0, 1); use the sup norm for 0"
        )));
    }
    Ok(())
}

/// max_{i<j} diff(i, j) / (t_j − t_i)^γ, where diff(i, j) = ‖e(t_i) − e(t_j)‖.
pub fn holder_seminorm<F>(path: &NormedPath, gamma: f64, diff: F) -> Result<f64>
where
    F: Fn(usize, usize) -> f64,
{
    check_gamma(gamma)?;
    let t = &path.times;
    let mut best = 0.0f64;
    for j in 1..t.len() {
        for i in 0..j {
            best = best.max(diff(i, j) / (t[j] - t[i]).powf(gamma));
        }
    }
    Ok(best)
}

/// Hölder seminorm on the uniform grid {s·dt : s = 0..n}, with the gap
/// powers computed once per gap.
pub fn holder_seminorm_uniform<F>(dt: f64, n: usize, gamma: f64, diff: F) -> Result<f64>
where
    F: Fn(usize, usize) -> f64,
{
    check_gamma(gamma)?;
    let inv: Vec<f64> = (0..n)
        .map(|g| if g == 0 { 0.0 } else { (g as f64 * dt).powf(-gamma) })
        .collect();
    let mut best = 0.0f64;
    for j in 1..n {
        for i in 0..j {
            best = best.max(diff(i, j) * inv[j - i]);
        }
    }
    Ok(best)
}

/// Sup norm for γ = 0, Hölder seminorm otherwise.
pub fn path_norm<F>(path: &NormedPath, gamma: f64, diff: F) -> Result<f64>
where
    F: Fn(usize, usize) -> f64,
{
    if gamma == 0.0 {
        Ok(sup_norm(path))
    } else {
        holder_seminorm(path, gamma, diff)
    }
}

/// Monte Carlo estimate ((1/S) Σ x_s^p)^{1/p} of ‖X‖_{L^p(Ω)}.
pub fn lp_omega_estimate(samples: &[f64], p: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::invalid("no samples"));
    }
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::invalid(format!("p = {p} must be positive")));
    }
    if samples.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::invalid("sample norms must be finite and nonnegative"));
    }
    let mean = samples.iter().map(|x| x.powf(p)).sum::<f64>() / samples.len() as f64;
    Ok(mean.powf(1.0 / p))
}

/// min_i −ln(err_i/err_{i+1}) / ln(dim_i/dim_{i+1}).
pub fn empirical_rate(errors: &[f64], dims: &[f64]) -> Result<f64> {
    if errors.len() != dims.len() || errors.len() < 2 {
        return Err(Error::invalid(format!(
            "need at least two (error, dim) pairs, got {} errors and {} dims",
            errors.len(),
            dims.len()
        )));
    }
    if errors.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(Error::invalid("errors must be positive"));
    }
    if dims.iter().any(|d| !(*d > 0.0)) || dims.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("dims must be positive and strictly increasing"));
    }
    Ok((0..errors.len() - 1)
        .map(|i| -(errors[i] / errors[i + 1]).ln() / (dims[i] / dims[i + 1]).ln())
        .fold(f64::INFINITY, f64::min))
}

/// Predicted strong rate: (1−2γ)/(1+α) − 1/2 in N for the spectral
/// method, (1−2γ)/(1+α) in 1/h for finite elements.
pub fn theoretical_rate(method: Method, alpha: f64, gamma: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    if !(0.0..0.5).contains(&gamma) {
        return Err(Error::invalid(format!("gamma = {gamma} must lie in [0, 1/2)")));
    }
    let base = (1.0 - 2.0 * gamma) / (1.0 + alpha);
    Ok(match method {
        Method::Spectral => base - 0.5,
        Method::Fem => base,
    })
}

/// Aggregated errors of a convergence study, one row of `errors` per γ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateStudy {
    pub method: Method,
    pub alpha: f64,
    pub gammas: Vec<f64>,
    pub p: f64,
    pub dims: Vec<usize>,
    pub errors: Vec<Vec<f64>>,
    pub empirical_rates: Vec<f64>,
    pub theoretical_rates: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
}

impl RateStudy {
    /// Fills in both rate lists from `errors`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        method: Method,
        alpha: f64,
        gammas: Vec<f64>,
        p: f64,
        dims: Vec<usize>,
        errors: Vec<Vec<f64>>,
        samples: usize,
        seed: u64,
    ) -> Result<Self> {
        if errors.len() != gammas.len() {
            return Err(Error::invalid("one error row per gamma is required"));
        }
        let dims_f: Vec<f64> = dims.iter().map(|&d| d as f64).collect();
        let empirical_rates = errors
            .iter()
            .map(|row| empirical_rate(row, &dims_f))
            .collect::<Result<Vec<_>>>()?;
        let theoretical_rates = gammas
            .iter()
            .map(|&g| theoretical_rate(method, alpha, g))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            method,
            alpha,
            gammas,
            p,
            dims,
            errors,
            empirical_rates,
            theoretical_rates,
            samples,
            seed,
        })
    }

    /// Pairs (γ_a, γ_b), γ_a < γ_b, whose empirical rates increase with γ by more than `slack`.
    pub fn gamma_trend_violations(&self, slack: f64) -> Vec<(f64, f64)> {
        let mut order: Vec<usize> = (0..self.gammas.len()).collect();
        order.sort_by(|&a, &b| self.gammas[a].total_cmp(&self.gammas[b]));
        order
            .windows(2)
            .filter(|w| self.empirical_rates[w[1]] > self.empirical_rates[w[0]] + slack)
            .map(|w| (self.gammas[w[0]], self.gammas[w[1]]))
            .collect()
    }
}
