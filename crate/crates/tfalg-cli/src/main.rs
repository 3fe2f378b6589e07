//! `tfalg` — reproducible experiments with time-frequency shift operator
//! algebras: inversion, trace averages, spectral radius, coefficient decay,
//! orthonormalizing windows, and a channel-equalization demo.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tfalg::TfPoint64;
use tfalg_cli::commands::{
    self, ChannelSource, DecayParams, EqualizeParams, InvertMode, InvertParams, SpectrumParams,
    TraceParams, WindowParams,
};
use tfalg_cli::config::{parse_weight, resolve, resolve_term_cap, FileConfig};
use tfalg_cli::CliError;

#[derive(Parser)]
#[command(name = "tfalg", version, about = "Time-frequency shift operator algebra toolkit")]
struct Cli {
    /// JSON config file mirroring the common flags; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeFlag {
    Auto,
    Contraction,
    Symmetric,
}

#[derive(Args)]
struct GridFlags {
    /// Samples per axis for the oracle grid (power of two).
    #[arg(long)]
    grid_n: Option<usize>,
    /// Half-length L of the grid domain [-L, L).
    #[arg(long)]
    grid_l: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Invert an operator inside the algebra with a certified residual.
    Invert {
        operator_file: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeFlag::Auto)]
        mode: ModeFlag,
        /// Weight spec: constant | poly:S | subexp:A,B | exp:A.
        #[arg(long)]
        weight: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
        /// Lower spectral bound A for symmetric mode (estimated if omitted).
        #[arg(long)]
        a: Option<f64>,
        /// Upper spectral bound B for symmetric mode (estimated if omitted).
        #[arg(long)]
        b: Option<f64>,
        #[command(flatten)]
        grid: GridFlags,
        /// Output path for the inverse operator file.
        #[arg(long)]
        inverse_out: Option<PathBuf>,
        /// Output path for the inversion report.
        #[arg(long)]
        report_out: Option<PathBuf>,
    },
    /// Estimate the trace (or recover one coefficient) by Gabor averages.
    Trace {
        operator_file: PathBuf,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        /// Frequency truncation M.
        #[arg(short = 'M', long)]
        m: Option<usize>,
        /// Time truncation N.
        #[arg(short = 'N', long)]
        n: Option<usize>,
        /// Recover the coefficient at this point: 2d reals (t..., omega...).
        #[arg(long, num_args = 2.., value_name = "REAL", allow_negative_numbers = true)]
        lambda: Option<Vec<f64>>,
        #[command(flatten)]
        grid: GridFlags,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Channel equalization demo: apply, invert, reconstruct, report errors.
    Equalize {
        /// Channel operator file; mutually exclusive with --random.
        #[arg(long, conflicts_with = "random")]
        channel_file: Option<PathBuf>,
        /// Number of random off-origin channel taps.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Snap random supports to the grid lattice.
        #[arg(long, default_value_t = true)]
        snap: bool,
        /// Off-origin mass of the random channel.
        #[arg(long)]
        margin: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
        /// Inversion tolerance ladder for the budget -> error curve.
        #[arg(long, value_delimiter = ',')]
        budgets: Vec<f64>,
        #[command(flatten)]
        grid: GridFlags,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spectral radius estimates from operator powers.
    Spectrum {
        operator_file: PathBuf,
        #[arg(long)]
        weight: Option<String>,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify exponential decay of inverse coefficients.
    Decay {
        inverse_file: PathBuf,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        /// Support radius of R = 1 - (2/(A+B)) T*T in the rate formula.
        #[arg(long)]
        r0: f64,
        /// Increasing tail radii to sample.
        #[arg(long, value_delimiter = ',', required = true)]
        radii: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a window making the given time-frequency shifts orthonormal.
    Window {
        sigma_file: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        grid: GridFlags,
        /// Output path for the window samples (binary + JSON sidecar).
        #[arg(long)]
        window_out: Option<PathBuf>,
        #[arg(long)]
        report_out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let config = FileConfig::load(cli.config.as_deref())?;
    let term_cap = resolve_term_cap(&config)?;

    match cli.command {
        Command::Invert {
            operator_file,
            mode,
            weight,
            tol,
            max_iter,
            a,
            b,
            grid,
            inverse_out,
            report_out,
        } => {
            let stem = operator_file
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "operator".into());
            let weight_spec = weight
                .or_else(|| config.weight.clone())
                .unwrap_or_else(|| "constant".into());
            let params = InvertParams {
                operator_path: operator_file.clone(),
                mode: match mode {
                    ModeFlag::Auto => InvertMode::Auto,
                    ModeFlag::Contraction => InvertMode::Contraction,
                    ModeFlag::Symmetric => InvertMode::Symmetric,
                },
                weight: parse_weight(&weight_spec)?,
                tol: resolve(tol, config.tol, 1e-6),
                max_iter: resolve(max_iter, config.max_iter, 2000),
                term_cap,
                grid_n: resolve(grid.grid_n, config.grid_n, 128),
                grid_l: resolve(grid.grid_l, config.grid_l, 8.0),
                a_bound: a,
                b_bound: b,
                inverse_out: inverse_out
                    .unwrap_or_else(|| PathBuf::from(format!("{stem}.inverse.json"))),
                report_out: report_out
                    .unwrap_or_else(|| PathBuf::from(format!("{stem}.report.json"))),
            };
            let outcome = commands::run_invert(&params)?;
            print!("{}", outcome.report_json);
            Ok(if outcome.tol_met {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            })
        }
        Command::Trace {
            operator_file,
            alpha,
            beta,
            m,
            n,
            lambda,
            grid,
            out,
        } => {
            let lambda = match lambda {
                None => None,
                Some(values) => {
                    if values.len() % 2 != 0 || values.is_empty() {
                        return Err(CliError::Parse(
                            "--lambda takes 2d reals: t components then omega components".into(),
                        ));
                    }
                    let d = values.len() / 2;
                    Some(
                        TfPoint64::new(values[..d].to_vec(), values[d..].to_vec())
                            .map_err(|e| CliError::Parse(e.to_string()))?,
                    )
                }
            };
            let params = TraceParams {
                operator_path: operator_file,
                alpha: resolve(alpha, config.alpha, 0.5),
                beta: resolve(beta, config.beta, 0.5),
                m_trunc: resolve(m, config.m_trunc, 16),
                n_trunc: resolve(n, config.n_trunc, 16),
                grid_n: resolve(grid.grid_n, config.grid_n, 1024),
                grid_l: resolve(grid.grid_l, config.grid_l, 32.0),
                grid_cap: 8192,
                lambda,
                out,
            };
            print!("{}", commands::run_trace(&params)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Equalize {
            channel_file,
            random,
            seed,
            snap,
            margin,
            tol,
            max_iter,
            budgets,
            grid,
            out,
        } => {
            let channel = match (channel_file, random) {
                (Some(path), None) => ChannelSource::File(path),
                (None, Some(k)) => ChannelSource::Random {
                    k,
                    seed: resolve(seed, config.seed, 42),
                    snap,
                },
                (None, None) => {
                    return Err(CliError::Parse(
                        "provide either --channel-file or --random K".into(),
                    ))
                }
                (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
            };
            let params = EqualizeParams {
                channel,
                margin: resolve(margin, config.margin, 0.8),
                tol: resolve(tol, config.tol, 1e-6),
                max_iter: resolve(max_iter, config.max_iter, 2000),
                term_cap,
                grid_n: resolve(grid.grid_n, config.grid_n, 128),
                grid_l: resolve(grid.grid_l, config.grid_l, 8.0),
                budgets,
                out,
            };
            let (json, ok) = commands::run_equalize(&params)?;
            print!("{json}");
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(3) })
        }
        Command::Spectrum {
            operator_file,
            weight,
            n_max,
            out,
        } => {
            let weight_spec = weight
                .or_else(|| config.weight.clone())
                .unwrap_or_else(|| "constant".into());
            let params = SpectrumParams {
                operator_path: operator_file,
                weight: parse_weight(&weight_spec)?,
                weight_spec,
                n_max: resolve(n_max, None, 16),
                term_cap,
                out,
            };
            print!("{}", commands::run_spectrum(&params)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Decay {
            inverse_file,
            a,
            b,
            r0,
            radii,
            out,
        } => {
            let params = DecayParams {
                inverse_path: inverse_file,
                a_bound: a,
                b_bound: b,
                r0,
                radii,
                out,
            };
            let (json, certified) = commands::run_decay(&params)?;
            print!("{json}");
            Ok(if certified {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            })
        }
        Command::Window {
            sigma_file,
            tol,
            grid,
            window_out,
            report_out,
        } => {
            let params = WindowParams {
                sigma_path: sigma_file,
                grid_n: resolve(grid.grid_n, config.grid_n, 1024),
                grid_l: resolve(grid.grid_l, config.grid_l, 8.0),
                grid_cap: 16384,
                tol: resolve(tol, config.tol, 1e-5),
                window_out,
                report_out,
            };
            let (json, pass) = commands::run_window(&params)?;
            print!("{json}");
            Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(3) })
        }
    }
}
