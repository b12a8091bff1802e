//! Monte Carlo convergence studies and their CSV/JSON output.

use crate::config::StudyConfig;
use crate::error::{Error, Result, ResultExt};
use crate::fem::{fem_error_rows, FemScheme, InitialDatum, Mesh1D};
use crate::grid::TimeGrid;
use crate::norms::{holder_seminorm_uniform, lp_omega_estimate, Method, RateStudy};
use crate::rng::{brownian_increments, StreamKey};
use crate::spectral::{
    factor_covariance, mode_covariance, mode_decay, sample_mode_path, SpectralParams,
};
use rayon::prelude::*;
use serde::Serialize;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

/// Version of the CSV and JSON layouts.
pub const SCHEMA_VERSION: u32 = 1;
pub const CSV_COLUMNS: &str =
    "schema,method,alpha,gamma,p,dim,samples,seed,error,empirical_rate,theoretical_rate,wall_ms";
pub const FOOTER_PREFIX: &str = "# complete rows=";
// allowed increase of the empirical rate between consecutive exponents before warning
const TREND_SLACK: f64 = 0.02;
// modes factored concurrently per block
const MODE_BLOCK: usize = 32;

#[derive(Debug, Clone, Default)]
pub struct StudyOptions {
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Write the elapsed time into the CSV `wall_ms` column (otherwise 0,
    /// which keeps reruns byte-identical).
    pub wall_clock: bool,
}

#[derive(Debug, Clone)]
pub struct StudyOutcome {
    pub study: RateStudy,
    pub warnings: Vec<String>,
    pub wall_ms: u64,
    pub csv_path: PathBuf,
    pub json_path: PathBuf,
}

#[derive(Debug, Serialize)]
struct GammaSummary {
    gamma: f64,
    errors: Vec<f64>,
    empirical_rate: f64,
    theoretical_rate: f64,
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    schema: u32,
    method: Method,
    alpha: f64,
    p: f64,
    dims: &'a [usize],
    samples: usize,
    seed: u64,
    results: Vec<GammaSummary>,
    warnings: &'a [String],
    wall_ms: u64,
    config: &'a StudyConfig,
}

/// Sum of squared differences with independent partial sums.
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            let d = x[l] - y[l];
            acc[l] += d * d;
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in ra.iter().zip(rb) {
        s += (x - y) * (x - y);
    }
    s
}

fn sq_norm(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum()
}

#[inline]
fn pair_index(i: usize, j: usize) -> usize {
    j * (j - 1) / 2 + i
}

/// Path norms for every γ from squared node norms and squared pair distances.
fn norms_from_pairs(node_sq: &[f64], pair_sq: &[f64], dt: f64, gammas: &[f64]) -> Result<Vec<f64>> {
    let dist: Vec<f64> = pair_sq.iter().map(|v| v.sqrt()).collect();
    gammas
        .iter()
        .map(|&g| {
            if g == 0.0 {
                Ok(node_sq.iter().fold(0.0f64, |m, v| m.max(v.sqrt())))
            } else {
                holder_seminorm_uniform(dt, node_sq.len(), g, |i, j| dist[pair_index(i, j)])
            }
        })
        .collect()
}

struct Layout {
    grid: TimeGrid,
    meas: Vec<usize>,
    meas_dt: f64,
}

impl Layout {
    fn new(config: &StudyConfig) -> Result<Self> {
        let grid = TimeGrid::with_step(config.horizon, config.dt)?;
        let meas: Vec<usize> = (0..grid.len()).step_by(config.measurement_stride).collect();
        if meas.len() < 2 {
            return Err(Error::Config(
                "measurement_stride: leaves fewer than two measurement nodes".into(),
            ));
        }
        Ok(Self {
            meas_dt: grid.dt() * config.measurement_stride as f64,
            grid,
            meas,
        })
    }
}

/// Per-sample path norms, indexed [sample][dim][gamma].
type SampleNorms = Vec<Vec<Vec<f64>>>;

fn spectral_norms(config: &StudyConfig) -> Result<SampleNorms> {
    let layout = Layout::new(config)?;
    let n = config.ref_dim;
    let params = SpectralParams::new(config.alpha, n, layout.grid.clone())?;
    let nodes = layout.grid.len();
    let steps = layout.grid.steps();
    let per_sample = nodes * n * std::mem::size_of::<f64>();
    let chunk = (config.memory_budget_mb * (1 << 20) / per_sample).clamp(1, config.samples);
    let decay = mode_decay(1, &params)?;

    let mut out = Vec::with_capacity(config.samples);
    let sample_ids: Vec<u64> = (0..config.samples as u64).collect();
    for ids in sample_ids.chunks(chunk) {
        // coeffs[s][m][k], time-major within each sample
        let mut coeffs = vec![0.0; ids.len() * nodes * n];
        // U₀ = sin(πx) has a single nonzero coefficient
        let u0 = params.u0_coeffs[0];
        for block in coeffs.chunks_exact_mut(nodes * n) {
            for m in 0..nodes {
                block[m * n] = decay[m] * u0;
            }
        }
        let modes: Vec<usize> = (1..=n).collect();
        for block in modes.chunks(MODE_BLOCK) {
            let paths = block
                .par_iter()
                .map(|&k| {
                    let cf = factor_covariance(mode_covariance(k, &params)?)?;
                    ids.iter()
                        .map(|&s| {
                            sample_mode_path(&cf, StreamKey::new(config.seed, s, k as u64))
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
                .context_with(|| format!("samples {}..{}", ids[0], ids[ids.len() - 1] + 1))?;
            for (&k, per_sample) in block.iter().zip(&paths) {
                for (s, path) in per_sample.iter().enumerate() {
                    let base = s * nodes * n;
                    for m in 0..steps {
                        coeffs[base + (m + 1) * n + (k - 1)] += path[m];
                    }
                }
            }
        }
        let norms = coeffs
            .par_chunks_exact(nodes * n)
            .zip(ids.par_iter())
            .map(|(c, &s)| {
                spectral_sample_norms(c, n, &layout, &config.dims, &config.gammas)
                    .context_with(|| format!("sample {s}"))
            })
            .collect::<Result<Vec<_>>>()?;
        out.extend(norms);
    }
    Ok(out)
}

/// Norms of the coupled errors of every dimension for one reference sample.
///
/// The error of the n-mode solution is the tail Σ_{k>n}; tails are nested,
/// so squared pair distances are accumulated band by band from the top.
fn spectral_sample_norms(
    c: &[f64],
    n: usize,
    layout: &Layout,
    dims: &[usize],
    gammas: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let q = layout.meas.len();
    let mut node_sq = vec![0.0; q];
    let mut pair_sq = vec![0.0; q * (q - 1) / 2];
    let mut result = vec![Vec::new(); dims.len()];
    let mut upper = n;
    for d in (0..dims.len()).rev() {
        let lo = dims[d];
        let row = |j: usize| {
            let m = layout.meas[j];
            &c[m * n + lo..m * n + upper]
        };
        for j in 0..q {
            let rj = row(j);
            node_sq[j] += sq_norm(rj);
            for i in 0..j {
                pair_sq[pair_index(i, j)] += sq_dist(row(i), rj);
            }
        }
        upper = lo;
        result[d] = norms_from_pairs(&node_sq, &pair_sq, layout.meas_dt, gammas)?;
    }
    Ok(result)
}

fn fem_norms(config: &StudyConfig) -> Result<SampleNorms> {
    let layout = Layout::new(config)?;
    let reference = FemScheme::new(Mesh1D::new(config.ref_dim)?, layout.grid.clone(), config.alpha)?;
    let schemes = config
        .dims
        .iter()
        .map(|&d| FemScheme::new(Mesh1D::new(d)?, layout.grid.clone(), config.alpha))
        .collect::<Result<Vec<_>>>()?;
    (0..config.samples as u64)
        .into_par_iter()
        .map(|s| {
            fem_sample_norms(config, &layout, &reference, &schemes, s)
                .context_with(|| format!("sample {s}"))
        })
        .collect()
}

fn fem_sample_norms(
    config: &StudyConfig,
    layout: &Layout,
    reference: &FemScheme,
    schemes: &[FemScheme],
    sample: u64,
) -> Result<Vec<Vec<f64>>> {
    let db = brownian_increments(&layout.grid, config.seed, sample);
    let fine = reference.simulate(&InitialDatum::Projection, Some(&db))?;
    let nf = reference.mesh().interior();
    let q = layout.meas.len();
    schemes
        .iter()
        .map(|scheme| {
            let coarse = scheme.simulate(&InitialDatum::Projection, Some(&db))?;
            let rows = fem_error_rows(&coarse, &fine)?;
            let y: Vec<f64> = layout
                .meas
                .iter()
                .flat_map(|&m| reference.l2_coordinates(&rows[m * nf..(m + 1) * nf]))
                .collect();
            let row = |j: usize| &y[j * nf..(j + 1) * nf];
            let node_sq: Vec<f64> = (0..q).map(|j| sq_norm(row(j))).collect();
            let mut pair_sq = vec![0.0; q * (q - 1) / 2];
            for j in 1..q {
                for i in 0..j {
                    pair_sq[pair_index(i, j)] = sq_dist(row(i), row(j));
                }
            }
            norms_from_pairs(&node_sq, &pair_sq, layout.meas_dt, &config.gammas)
        })
        .enumerate()
        .map(|(d, r)| r.context_with(|| format!("{} cells", config.dims[d])))
        .collect()
}

/// Runs the Monte Carlo study and aggregates the per-sample norms.
pub fn compute_study(config: &StudyConfig) -> Result<RateStudy> {
    config.validate()?;
    let norms = match config.method {
        Method::Spectral => spectral_norms(config)?,
        Method::Fem => fem_norms(config)?,
    };
    let errors = (0..config.gammas.len())
        .map(|g| {
            (0..config.dims.len())
                .map(|d| {
                    let xs: Vec<f64> = norms.iter().map(|s| s[d][g]).collect();
                    lp_omega_estimate(&xs, config.p)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    RateStudy::new(
        config.method,
        config.alpha,
        config.gammas.clone(),
        config.p,
        config.dims.clone(),
        errors,
        config.samples,
        config.seed,
    )
}

/// Warnings for empirical rates that increase with γ.
pub fn trend_warnings(study: &RateStudy) -> Vec<String> {
    study
        .gamma_trend_violations(TREND_SLACK)
        .into_iter()
        .map(|(a, b)| {
            format!("empirical rate increases from gamma = {a} to gamma = {b} beyond {TREND_SLACK}")
        })
        .collect()
}

pub fn write_csv_header<W: Write>(w: &mut W) -> std::io::Result<()> {
    writeln!(w, "# fracsim convergence study, schema {SCHEMA_VERSION}")?;
    writeln!(w, "{CSV_COLUMNS}")
}

/// One row per (γ, dim) followed by the completion footer.
pub fn write_csv_rows<W: Write>(w: &mut W, study: &RateStudy, wall_ms: u64) -> std::io::Result<()> {
    let mut rows = 0;
    for (g, &gamma) in study.gammas.iter().enumerate() {
        for (d, &dim) in study.dims.iter().enumerate() {
            writeln!(
                w,
                "{SCHEMA_VERSION},{},{},{},{},{},{},{},{},{},{},{}",
                study.method,
                study.alpha,
                gamma,
                study.p,
                dim,
                study.samples,
                study.seed,
                study.errors[g][d],
                study.empirical_rates[g],
                study.theoretical_rates[g],
                wall_ms
            )?;
            rows += 1;
        }
    }
    writeln!(w, "{FOOTER_PREFIX}{rows}")
}

fn summary_json(config: &StudyConfig, study: &RateStudy, warnings: &[String], wall_ms: u64) -> Result<String> {
    let results = study
        .gammas
        .iter()
        .enumerate()
        .map(|(g, &gamma)| GammaSummary {
            gamma,
            errors: study.errors[g].clone(),
            empirical_rate: study.empirical_rates[g],
            theoretical_rate: study.theoretical_rates[g],
        })
        .collect();
    let summary = Summary {
        schema: SCHEMA_VERSION,
        method: study.method,
        alpha: study.alpha,
        p: study.p,
        dims: &study.dims,
        samples: study.samples,
        seed: study.seed,
        results,
        warnings,
        wall_ms,
        config,
    };
    serde_json::to_string_pretty(&summary).map_err(|e| Error::Io(e.into()))
}

/// Runs a study and writes `<output_path>/<method>_alpha<α>.{csv,json}`.
///
/// The CSV header is written before any computation; a file without the
/// completion footer belongs to a run that did not finish.
pub fn run_study(config: &StudyConfig, options: &StudyOptions) -> Result<StudyOutcome> {
    config.validate()?;
    let start = Instant::now();
    let csv_path = config.csv_path();
    let json_path = config.json_path();
    fs::create_dir_all(&config.output_path)?;
    let mut csv = BufWriter::new(fs::File::create(&csv_path)?);
    write_csv_header(&mut csv)?;
    csv.flush()?;

    let study = match options.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::Config(format!("threads: {e}")))?
            .install(|| compute_study(config))?,
        None => compute_study(config)?,
    };
    let wall_ms = start.elapsed().as_millis() as u64;
    let warnings = trend_warnings(&study);
    write_csv_rows(&mut csv, &study, if options.wall_clock { wall_ms } else { 0 })?;
    csv.flush()?;
    fs::write(&json_path, summary_json(config, &study, &warnings, wall_ms)?)?;
    Ok(StudyOutcome {
        study,
        warnings,
        wall_ms,
        csv_path,
        json_path,
    })
}
