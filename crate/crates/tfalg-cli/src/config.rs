//! Parameter resolution: command flags override the optional JSON config
//! file, which overrides built-in defaults.

use serde::Deserialize;

use tfalg::{TfError, Weight64, DEFAULT_TERM_CAP};

use crate::CliError;

/// Optional config file mirroring the common flags.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub grid_n: Option<usize>,
    pub grid_l: Option<f64>,
    pub weight: Option<String>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub term_cap: Option<usize>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub m_trunc: Option<usize>,
    pub n_trunc: Option<usize>,
    pub seed: Option<u64>,
    pub margin: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&std::path::Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)?;
                Ok(serde_json::from_str(&text)?)
            }
        }
    }
}

/// Flag > config > default.
pub fn resolve<T: Copy>(flag: Option<T>, config: Option<T>, default: T) -> T {
    flag.or(config).unwrap_or(default)
}

/// Live-term cap: flagless; env var TFALG_TERM_CAP overrides config/default.
pub fn resolve_term_cap(config: &FileConfig) -> Result<usize, CliError> {
    if let Ok(text) = std::env::var("TFALG_TERM_CAP") {
        return text
            .parse::<usize>()
            .map_err(|e| CliError::Parse(format!("TFALG_TERM_CAP: {e}")));
    }
    Ok(config.term_cap.unwrap_or(DEFAULT_TERM_CAP))
}

/// Weight specs: `constant`, `poly:S` / `polynomial:S`,
/// `subexp:ALPHA,BETA`, `exp:ALPHA` / `exponential:ALPHA`.
pub fn parse_weight(spec: &str) -> Result<Weight64, CliError> {
    let spec = spec.trim();
    if spec.eq_ignore_ascii_case("constant") {
        return Ok(Weight64::Constant);
    }
    let (kind, args) = spec
        .split_once(':')
        .ok_or_else(|| CliError::Parse(format!("weight spec '{spec}' missing parameters")))?;
    let nums: Result<Vec<f64>, _> = args.split(',').map(|s| s.trim().parse::<f64>()).collect();
    let nums = nums.map_err(|e| CliError::Parse(format!("weight spec '{spec}': {e}")))?;
    match (kind.to_ascii_lowercase().as_str(), nums.as_slice()) {
        ("poly" | "polynomial", [s]) if *s >= 0.0 => Ok(Weight64::polynomial(*s)),
        ("subexp" | "subexponential", [a, b]) if *a >= 0.0 && *b > 0.0 && *b < 1.0 => {
            Ok(Weight64::subexponential(*a, *b))
        }
        ("exp" | "exponential", [a]) if *a > 0.0 => Ok(Weight64::exponential(*a)),
        _ => Err(CliError::Parse(format!("unrecognized weight spec '{spec}'"))),
    }
}

pub fn validate_positive(name: &str, value: f64) -> Result<(), CliError> {
    if !(value > 0.0 && value.is_finite()) {
        return Err(CliError::Precondition(format!(
            "{name} must be positive and finite, got {value}"
        )));
    }
    Ok(())
}

pub fn map_tf(err: TfError) -> CliError {
    err.into()
}
