//! Optimal and minimax-robust linear extrapolation of harmonizable symmetric
//! α-stable sequences observed with or without additive noise.
//!
//! All spectral quantities live on the uniform grid `θ_m = -π + 2πm/G` and
//! Fourier coefficients use `r_k = (1/2π)∫e^{-ikθ}ρ(θ)dθ`.

mod convex;
pub mod error;
pub mod extrap_gauss;
pub mod extrap_stable;
pub mod factorization;
pub mod grid;
pub mod minimax;
pub mod montecarlo;
pub mod operators;
pub mod signed_power;
pub mod spectral;

pub use error::{Error, Result};
pub use extrap_gauss::{extrapolate_noiseless_gauss, extrapolate_noisy_gauss, EstimateReport, SpectralCharacteristic};
pub use extrap_stable::{solve_stable_noiseless, solve_stable_noisy, StableProblem, StableSolution};
pub use factorization::{factorize_reciprocal, FactorizationResult};
pub use montecarlo::{simulate_gauss, SimulationConfig, SimulationReport};
pub use grid::Grid;
pub use spectral::{FourierCoeffs, FunctionalCoeffs, SpectralDensity};
