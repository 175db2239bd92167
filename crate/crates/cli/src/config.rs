//! Run configuration: one JSON document per invocation.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use stable_extrap::minimax::{DensityClassF, DensityClassG, EigenMode, MinimaxOptions};
use stable_extrap::{FunctionalCoeffs, SpectralDensity};

use crate::Failure;

pub const DEFAULT_TRUNCATION: usize = 128;
pub const DEFAULT_GRID: usize = 2048;
pub const DEFAULT_MAX_LAG: usize = 16;
pub const DEFAULT_ORDER: usize = 32;
pub const DEFAULT_REPLICATES: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Fourier,
    Factorize,
    Extrapolate,
    Minimax,
    Simulate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Fourier => "fourier",
            Command::Factorize => "factorize",
            Command::Extrapolate => "extrapolate",
            Command::Minimax => "minimax",
            Command::Simulate => "simulate",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// Top singular vector of the functional's operator (`α = 2`, `β = 1`, no noise).
    Eigen,
    /// Stationary sequences, optional noise class.
    Gauss,
    /// SαS with a noise class.
    Stable,
    StableNoiseless,
}

/// A real number, `[re, im]` or `{"re": …, "im": …}`.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(untagged)]
pub enum ComplexInput {
    Real(f64),
    Pair([f64; 2]),
    Parts { re: f64, im: f64 },
}

impl From<ComplexInput> for Complex64 {
    fn from(z: ComplexInput) -> Self {
        match z {
            ComplexInput::Real(x) => Complex64::new(x, 0.0),
            ComplexInput::Pair([re, im]) | ComplexInput::Parts { re, im } => Complex64::new(re, im),
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Must agree with the subcommand when given.
    pub command: Option<Command>,
    pub alpha: Option<f64>,
    pub f: Option<SpectralDensity>,
    pub g: Option<SpectralDensity>,
    pub a: Option<Vec<ComplexInput>>,
    /// `N` (stationary routes) or `M` (stable routes).
    pub truncation: Option<usize>,
    pub grid_size: Option<usize>,
    /// Largest Fourier lag reported by `fourier`.
    pub max_lag: Option<usize>,
    /// Factor length `L` for `factorize`.
    pub order: Option<usize>,
    pub route: Option<Route>,
    pub class_f: Option<DensityClassF>,
    pub class_g: Option<DensityClassG>,
    /// Power bound `mean(f) = P` of the eigen route.
    pub p: Option<f64>,
    pub mode: Option<EigenMode>,
    pub options: Option<MinimaxOptions>,
    pub replicates: Option<usize>,
    pub horizon: Option<usize>,
    pub perturbations: Option<usize>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Input(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::Input(format!("invalid config {}: {e}", path.display())))
    }

    pub fn require<'a, T>(field: &'a Option<T>, name: &str, command: Command) -> Result<&'a T, Failure> {
        field
            .as_ref()
            .ok_or_else(|| Failure::Input(format!("`{name}` is required for {}", command.name())))
    }

    pub fn functional(&self, command: Command) -> Result<FunctionalCoeffs, Failure> {
        let a = Self::require(&self.a, "a", command)?;
        Ok(FunctionalCoeffs::new(a.iter().map(|&z| z.into()).collect())?)
    }

    pub fn density(&self, command: Command) -> Result<&SpectralDensity, Failure> {
        let f = Self::require(&self.f, "f", command)?;
        f.validate()?;
        Ok(f)
    }

    pub fn noise(&self) -> Result<Option<&SpectralDensity>, Failure> {
        if let Some(g) = &self.g {
            g.validate()?;
        }
        Ok(self.g.as_ref())
    }

    pub fn grid(&self) -> usize {
        self.grid_size.unwrap_or(DEFAULT_GRID)
    }
}
