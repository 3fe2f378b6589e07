//! Subcommand implementations.

use std::path::{Path, PathBuf};

use num_complex::Complex;
use serde::Serialize;

use tfalg::gabor::{trace_estimate, GaborSystem};
use tfalg::invert::{
    certify_decay, gelfand_spectral_radius, invert_contraction, invert_symmetric,
    InversionReport,
};
use tfalg::oracle::{frame_bounds, Grid, GridFunction, ShiftMode};
use tfalg::window::{plan_window_aligned, realize_window, verify_orthonormal};
use tfalg::{TfError, TfOperator64, TfPoint64, Weight64};

use crate::config::validate_positive;
use crate::{fixtures, CliError};

fn read_operator(path: &Path) -> Result<TfOperator64, CliError> {
    let text = std::fs::read_to_string(path)?;
    TfOperator64::from_json(&text).map_err(|e| CliError::Parse(e.to_string()))
}

fn write_text(path: &Path, content: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, content)?;
    Ok(())
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    text
}

// ---------------------------------------------------------------------------
// invert
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InvertMode {
    Auto,
    Contraction,
    Symmetric,
}

pub struct InvertParams {
    pub operator_path: PathBuf,
    pub mode: InvertMode,
    pub weight: Weight64,
    pub tol: f64,
    pub max_iter: usize,
    pub term_cap: usize,
    pub grid_n: usize,
    pub grid_l: f64,
    pub a_bound: Option<f64>,
    pub b_bound: Option<f64>,
    pub inverse_out: PathBuf,
    pub report_out: PathBuf,
}

pub struct InvertOutcome {
    pub report_json: String,
    pub tol_met: bool,
}

fn symmetric_bounds(
    op: &TfOperator64,
    params: &InvertParams,
) -> Result<(f64, f64), CliError> {
    match (params.a_bound, params.b_bound) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => {
            let grid = Grid::new(1, params.grid_n, params.grid_l)?;
            Ok(frame_bounds(op, &grid)?)
        }
    }
}

pub fn run_invert(params: &InvertParams) -> Result<InvertOutcome, CliError> {
    validate_positive("tol", params.tol)?;
    let op = read_operator(&params.operator_path)?;
    let report: InversionReport<f64> = match params.mode {
        InvertMode::Contraction => invert_contraction(
            &op,
            &params.weight,
            params.tol,
            params.max_iter,
            params.term_cap,
        )?,
        InvertMode::Symmetric => {
            let (a, b) = symmetric_bounds(&op, params)?;
            invert_symmetric(
                &op,
                &params.weight,
                a,
                b,
                params.tol,
                params.max_iter,
                params.term_cap,
            )?
        }
        InvertMode::Auto => {
            match invert_contraction(
                &op,
                &params.weight,
                params.tol,
                params.max_iter,
                params.term_cap,
            ) {
                Ok(r) => r,
                Err(TfError::NotContractive { .. }) => {
                    let (a, b) = symmetric_bounds(&op, params)?;
                    invert_symmetric(
                        &op,
                        &params.weight,
                        a,
                        b,
                        params.tol,
                        params.max_iter,
                        params.term_cap,
                    )?
                }
                Err(e) => return Err(e.into()),
            }
        }
    };

    write_text(&params.inverse_out, &report.inverse.to_json())?;
    let report_json = to_pretty(&report.to_record());
    write_text(&params.report_out, &report_json)?;
    Ok(InvertOutcome {
        tol_met: report.residual_av <= params.tol,
        report_json,
    })
}

// ---------------------------------------------------------------------------
// trace
// ---------------------------------------------------------------------------

pub struct TraceParams {
    pub operator_path: PathBuf,
    pub alpha: f64,
    pub beta: f64,
    pub m_trunc: usize,
    pub n_trunc: usize,
    pub grid_n: usize,
    pub grid_l: f64,
    pub grid_cap: usize,
    pub lambda: Option<TfPoint64>,
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct CoefficientReport {
    lambda_t: Vec<f64>,
    lambda_omega: Vec<f64>,
    value: (f64, f64),
    #[serde(rename = "M")]
    m_trunc: usize,
    #[serde(rename = "N")]
    n_trunc: usize,
}

pub fn run_trace(params: &TraceParams) -> Result<String, CliError> {
    let op = read_operator(&params.operator_path)?;
    let grid = Grid::with_cap(1, params.grid_n, params.grid_l, params.grid_cap)?;
    let system = GaborSystem::build(grid, params.alpha, params.beta)?;
    let json = match &params.lambda {
        None => {
            let estimate = trace_estimate(&op, &system, params.m_trunc, params.n_trunc)?;
            to_pretty(&estimate.to_record())
        }
        Some(lambda) => {
            let probe = TfOperator64::unit(lambda.clone()).adjoint();
            let shifted = probe.compose(&op)?;
            let estimate = trace_estimate(&shifted, &system, params.m_trunc, params.n_trunc)?;
            to_pretty(&CoefficientReport {
                lambda_t: lambda.t().to_vec(),
                lambda_omega: lambda.omega().to_vec(),
                value: (estimate.value.re, estimate.value.im),
                m_trunc: params.m_trunc,
                n_trunc: params.n_trunc,
            })
        }
    };
    if let Some(path) = &params.out {
        write_text(path, &json)?;
    }
    Ok(json)
}

// ---------------------------------------------------------------------------
// equalize
// ---------------------------------------------------------------------------

pub enum ChannelSource {
    File(PathBuf),
    Random { k: usize, seed: u64, snap: bool },
}

pub struct EqualizeParams {
    pub channel: ChannelSource,
    pub margin: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub term_cap: usize,
    pub grid_n: usize,
    pub grid_l: f64,
    pub budgets: Vec<f64>,
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct EqualizeReport {
    seed: Option<u64>,
    channel_terms: usize,
    margin: f64,
    tol: f64,
    /// (inversion tolerance, relative L2 reconstruction error) pairs.
    curve: Vec<(f64, f64)>,
    final_error: f64,
    residual_av: f64,
    iterations: usize,
}

pub fn run_equalize(params: &EqualizeParams) -> Result<(String, bool), CliError> {
    validate_positive("tol", params.tol)?;
    let grid = Grid::new(1, params.grid_n, params.grid_l)?;
    let (channel, seed) = match &params.channel {
        ChannelSource::File(path) => (read_operator(path)?, None),
        ChannelSource::Random { k, seed, snap } => (
            fixtures::random_channel(
                *seed,
                *k,
                params.margin,
                params.grid_l / 4.0,
                snap.then_some(&grid),
            ),
            Some(*seed),
        ),
    };

    let sigma = params.grid_l / 8.0;
    let signal = GridFunction::from_fn(grid.clone(), |x| {
        Complex::new((-x[0] * x[0] / (2.0 * sigma * sigma)).exp(), 0.0)
    });
    let received = signal.apply_operator(&channel, ShiftMode::Bandlimited)?;

    let mut budgets = params.budgets.clone();
    if budgets.is_empty() {
        budgets = vec![1e-2, 1e-4];
    }
    budgets.push(params.tol);
    budgets.sort_by(|a, b| b.partial_cmp(a).unwrap());
    budgets.dedup();

    let weight = Weight64::Constant;
    let mut curve = Vec::new();
    let mut last_report = None;
    for &budget in &budgets {
        let report = match invert_contraction(
            &channel,
            &weight,
            budget,
            params.max_iter,
            params.term_cap,
        ) {
            Ok(r) => r,
            Err(TfError::NotContractive { .. }) => {
                let (a, b) = frame_bounds(&channel, &grid)?;
                invert_symmetric(
                    &channel,
                    &weight,
                    a,
                    b,
                    budget,
                    params.max_iter,
                    params.term_cap,
                )?
            }
            Err(e) => return Err(e.into()),
        };
        let equalized = received.apply_operator(&report.inverse, ShiftMode::Bandlimited)?;
        let error = equalized.sub(&signal).norm() / signal.norm();
        curve.push((budget, error));
        last_report = Some(report);
    }
    let report = last_report.expect("at least one budget");
    let final_error = curve.last().unwrap().1;

    let json = to_pretty(&EqualizeReport {
        seed,
        channel_terms: channel.num_terms(),
        margin: params.margin,
        tol: params.tol,
        curve,
        final_error,
        residual_av: report.residual_av,
        iterations: report.iterations,
    });
    if let Some(path) = &params.out {
        write_text(path, &json)?;
    }
    // Reconstruction inherits the certified residual plus discretization.
    Ok((json, final_error <= params.tol + 1e-6))
}

// ---------------------------------------------------------------------------
// spectrum
// ---------------------------------------------------------------------------

pub struct SpectrumParams {
    pub operator_path: PathBuf,
    pub weight: Weight64,
    pub weight_spec: String,
    pub n_max: usize,
    pub term_cap: usize,
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct SpectrumReport {
    weight: String,
    n_max: usize,
    estimates: Vec<f64>,
    extrapolated: f64,
}

pub fn run_spectrum(params: &SpectrumParams) -> Result<String, CliError> {
    let op = read_operator(&params.operator_path)?;
    let estimate = gelfand_spectral_radius(&op, &params.weight, params.n_max, params.term_cap)?;
    let json = to_pretty(&SpectrumReport {
        weight: params.weight_spec.clone(),
        n_max: params.n_max,
        estimates: estimate.estimates,
        extrapolated: estimate.extrapolated,
    });
    if let Some(path) = &params.out {
        write_text(path, &json)?;
    }
    Ok(json)
}

// ---------------------------------------------------------------------------
// decay
// ---------------------------------------------------------------------------

pub struct DecayParams {
    pub inverse_path: PathBuf,
    pub a_bound: f64,
    pub b_bound: f64,
    pub r0: f64,
    pub radii: Vec<f64>,
    pub out: Option<PathBuf>,
}

pub fn run_decay(params: &DecayParams) -> Result<(String, bool), CliError> {
    let inverse = read_operator(&params.inverse_path)?;
    let cert = certify_decay(
        &inverse,
        params.a_bound,
        params.b_bound,
        params.r0,
        &params.radii,
    )?;
    let json = to_pretty(&cert.to_record());
    if let Some(path) = &params.out {
        write_text(path, &json)?;
    }
    Ok((json, cert.certified))
}

// ---------------------------------------------------------------------------
// window
// ---------------------------------------------------------------------------

pub struct WindowParams {
    pub sigma_path: PathBuf,
    pub grid_n: usize,
    pub grid_l: f64,
    pub grid_cap: usize,
    pub tol: f64,
    pub window_out: Option<PathBuf>,
    pub report_out: Option<PathBuf>,
}

#[derive(serde::Deserialize)]
struct SigmaFile {
    dim: usize,
    points: Vec<SigmaPoint>,
}

#[derive(serde::Deserialize)]
struct SigmaPoint {
    t: Vec<f64>,
    omega: Vec<f64>,
}

#[derive(Serialize)]
struct WindowReport {
    plan: tfalg::window::WindowPlanRecord<f64>,
    fourier_zero_residuals: Vec<f64>,
    gram_max_deviation: f64,
    pass: bool,
}

pub fn run_window(params: &WindowParams) -> Result<(String, bool), CliError> {
    let text = std::fs::read_to_string(&params.sigma_path)?;
    let sigma_file: SigmaFile = serde_json::from_str(&text)?;
    let sigma: Result<Vec<TfPoint64>, TfError> = sigma_file
        .points
        .iter()
        .map(|p| {
            if p.t.len() != sigma_file.dim {
                return Err(TfError::DimensionMismatch {
                    expected: sigma_file.dim,
                    got: p.t.len(),
                });
            }
            TfPoint64::new(p.t.clone(), p.omega.clone())
        })
        .collect();
    let sigma = sigma.map_err(CliError::from)?;

    let grid = Grid::with_cap(sigma_file.dim, params.grid_n, params.grid_l, params.grid_cap)?;
    let plan = plan_window_aligned(&sigma, grid.spacing())?;
    let window = realize_window(&plan, &grid)?;
    let zeros = tfalg::window::fourier_zero_residuals(&plan, &grid)?;
    let gram = verify_orthonormal(&window, &sigma, params.tol)?;

    if let Some(path) = &params.window_out {
        window.write_binary(path)?;
    }
    let report = WindowReport {
        plan: plan.to_record(),
        fourier_zero_residuals: zeros,
        gram_max_deviation: gram.max_deviation,
        pass: gram.pass,
    };
    let json = to_pretty(&report);
    if let Some(path) = &params.report_out {
        write_text(path, &json)?;
    }
    Ok((json, report.pass))
}
