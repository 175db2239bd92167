//! Spectral densities on `[-π, π)`: representation, grid evaluation, Fourier
//! coefficients and the minimality diagnostic.
//!
//! All integrals are normalized by `1/2π`, so `fourier_coeffs(white(c))`
//! gives `r_0 = c` and a density's `r_0` is the variance of the sequence.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, Grid};

fn one() -> f64 {
    1.0
}

/// A nonnegative 2π-periodic spectral density.
///
/// Polynomials are in `z = e^{-iθ}` with unit leading term:
/// `ma` is `scale·|1 + Σ θ_j z^j|²`, `ar` is `scale/|1 - Σ a_j z^j|²` and
/// `rational` is `scale·|1 + Σ n_j z^j|² / |1 + Σ d_j z^j|²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SpectralDensity {
    White {
        level: f64,
    },
    Ma {
        coeffs: Vec<f64>,
        #[serde(default = "one")]
        scale: f64,
    },
    Ar {
        coeffs: Vec<f64>,
        #[serde(default = "one")]
        scale: f64,
    },
    Rational {
        numerator: Vec<f64>,
        denominator: Vec<f64>,
        #[serde(default = "one")]
        scale: f64,
    },
    /// Values at `θ_m = -π + 2πm/G`, `G = values.len()`.
    Tabulated {
        values: Vec<f64>,
    },
    /// `(1-ε)·base + ε·contamination`.
    Contaminated {
        base: Box<SpectralDensity>,
        contamination: Box<SpectralDensity>,
        epsilon: f64,
    },
}

/// `|1 + sign·Σ c_j e^{-ijθ}|²`.
fn poly_mod_sq(coeffs: &[f64], sign: f64, theta: f64) -> f64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for (j, &c) in coeffs.iter().enumerate() {
        acc += Complex64::from_polar(sign * c, -((j + 1) as f64) * theta);
    }
    acc.norm_sqr()
}

impl SpectralDensity {
    pub fn white(level: f64) -> Self {
        SpectralDensity::White { level }
    }

    pub fn ma(coeffs: Vec<f64>, scale: f64) -> Self {
        SpectralDensity::Ma { coeffs, scale }
    }

    pub fn ar(coeffs: Vec<f64>, scale: f64) -> Self {
        SpectralDensity::Ar { coeffs, scale }
    }

    pub fn rational(numerator: Vec<f64>, denominator: Vec<f64>, scale: f64) -> Self {
        SpectralDensity::Rational {
            numerator,
            denominator,
            scale,
        }
    }

    pub fn tabulated(values: Vec<f64>) -> Self {
        SpectralDensity::Tabulated { values }
    }

    pub fn contaminated(base: SpectralDensity, contamination: SpectralDensity, epsilon: f64) -> Self {
        SpectralDensity::Contaminated {
            base: Box::new(base),
            contamination: Box::new(contamination),
            epsilon,
        }
    }

    /// `|1 - ρ e^{-iθ}|^{-2}`, the first-order autoregressive density.
    pub fn ar1(rho: f64) -> Self {
        SpectralDensity::ar(vec![rho], 1.0)
    }

    /// Parameter checks that do not need a grid.
    pub fn validate(&self) -> Result<()> {
        let finite = |xs: &[f64], what: &str| -> Result<()> {
            if xs.iter().all(|x| x.is_finite()) {
                Ok(())
            } else {
                Err(Error::validation(format!("{what} contains a non-finite value")))
            }
        };
        let scale_ok = |s: f64| -> Result<()> {
            if s.is_finite() && s >= 0.0 {
                Ok(())
            } else {
                Err(Error::validation(format!("scale must be finite and nonnegative, got {s}")))
            }
        };
        match self {
            SpectralDensity::White { level } => scale_ok(*level),
            SpectralDensity::Ma { coeffs, scale } | SpectralDensity::Ar { coeffs, scale } => {
                finite(coeffs, "coefficient list")?;
                scale_ok(*scale)
            }
            SpectralDensity::Rational {
                numerator,
                denominator,
                scale,
            } => {
                finite(numerator, "numerator")?;
                finite(denominator, "denominator")?;
                scale_ok(*scale)
            }
            SpectralDensity::Tabulated { values } => {
                if values.len() < grid::MIN_GRID || values.len() % 2 != 0 {
                    return Err(Error::validation(format!(
                        "tabulated density needs an even grid of at least {} points, got {}",
                        grid::MIN_GRID,
                        values.len()
                    )));
                }
                finite(values, "tabulated density")?;
                if let Some((m, v)) = values.iter().enumerate().find(|(_, v)| **v < 0.0) {
                    return Err(Error::validation(format!(
                        "tabulated density is negative ({v}) at grid index {m}"
                    )));
                }
                Ok(())
            }
            SpectralDensity::Contaminated {
                base,
                contamination,
                epsilon,
            } => {
                if !(0.0..=1.0).contains(epsilon) {
                    return Err(Error::validation(format!(
                        "contamination weight must lie in [0, 1], got {epsilon}"
                    )));
                }
                base.validate()?;
                contamination.validate()
            }
        }
    }

    /// Density value at an arbitrary angle. Tabulated densities are
    /// interpolated linearly between grid points (periodically).
    pub fn value_at(&self, theta: f64) -> f64 {
        match self {
            SpectralDensity::White { level } => *level,
            SpectralDensity::Ma { coeffs, scale } => scale * poly_mod_sq(coeffs, 1.0, theta),
            SpectralDensity::Ar { coeffs, scale } => scale / poly_mod_sq(coeffs, -1.0, theta),
            SpectralDensity::Rational {
                numerator,
                denominator,
                scale,
            } => scale * poly_mod_sq(numerator, 1.0, theta) / poly_mod_sq(denominator, 1.0, theta),
            SpectralDensity::Tabulated { values } => {
                let n = values.len();
                let pos = (theta + PI).rem_euclid(2.0 * PI) / (2.0 * PI) * n as f64;
                let lo = (pos.floor() as usize) % n;
                let hi = (lo + 1) % n;
                let w = pos - pos.floor();
                (1.0 - w) * values[lo] + w * values[hi]
            }
            SpectralDensity::Contaminated {
                base,
                contamination,
                epsilon,
            } => (1.0 - epsilon) * base.value_at(theta) + epsilon * contamination.value_at(theta),
        }
    }

    /// Values on the grid `θ_m = -π + 2πm/G`.
    pub fn evaluate(&self, grid_size: usize) -> Result<Vec<f64>> {
        let grid = Grid::new(grid_size)?;
        self.validate()?;
        let values = match self {
            SpectralDensity::Tabulated { values } if values.len() == grid_size => values.clone(),
            SpectralDensity::Contaminated {
                base,
                contamination,
                epsilon,
            } => {
                let b = base.evaluate(grid_size)?;
                let c = contamination.evaluate(grid_size)?;
                b.iter()
                    .zip(&c)
                    .map(|(x, y)| (1.0 - epsilon) * x + epsilon * y)
                    .collect()
            }
            _ => (0..grid_size).map(|m| self.value_at(grid.theta(m))).collect(),
        };
        if let Some((m, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::validation(format!(
                "density evaluates to {v} at θ = {:.6} (grid index {m})",
                grid.theta(m)
            )));
        }
        Ok(values)
    }

    /// Grid values, additionally requiring strict positivity.
    pub fn evaluate_positive(&self, grid_size: usize, name: &str) -> Result<Vec<f64>> {
        let v = self.evaluate(grid_size)?;
        require_positive(&v, name)?;
        Ok(v)
    }
}

pub(crate) fn require_positive(values: &[f64], name: &str) -> Result<()> {
    match values.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        Some((m, v)) => Err(Error::domain(format!(
            "{name} must be strictly positive on the grid; value {v} at index {m}"
        ))),
        None => Ok(()),
    }
}

/// Fourier coefficients `r_k = (1/2π)∫e^{-ikθ}ρ(θ)dθ` for `|k| ≤ max_lag`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierCoeffs {
    max_lag: usize,
    /// `coeffs[k + max_lag] = r_k`.
    coeffs: Vec<Complex64>,
}

impl FourierCoeffs {
    pub fn from_lags(max_lag: usize, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(coeffs.len(), 2 * max_lag + 1, "lag vector has the wrong length");
        Self { max_lag, coeffs }
    }

    pub fn max_lag(&self) -> usize {
        self.max_lag
    }

    /// `r_k`; zero beyond `max_lag`.
    pub fn get(&self, k: isize) -> Complex64 {
        if k.unsigned_abs() > self.max_lag {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(k + self.max_lag as isize) as usize]
        }
    }

    /// `(k, r_k)` for `k = -K..=K`.
    pub fn iter(&self) -> impl Iterator<Item = (isize, Complex64)> + '_ {
        let k0 = self.max_lag as isize;
        self.coeffs.iter().enumerate().map(move |(i, &c)| (i as isize - k0, c))
    }
}

/// Coefficients of a real grid function; `r_{-k} = conj(r_k)` is enforced.
pub fn fourier_coeffs(values: &[f64], max_lag: usize) -> Result<FourierCoeffs> {
    let g = values.len();
    if 2 * max_lag >= g {
        return Err(Error::Resolution {
            max_lag,
            grid_size: g,
        });
    }
    let all = grid::dft_coeffs_real(values);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * max_lag + 1];
    coeffs[max_lag] = Complex64::new(all[0].re, 0.0);
    for k in 1..=max_lag {
        let r = all[k];
        coeffs[max_lag + k] = r;
        coeffs[max_lag - k] = r.conj();
    }
    Ok(FourierCoeffs { max_lag, coeffs })
}

/// Coefficients of a complex grid function (no symmetry imposed).
pub fn fourier_coeffs_complex(values: &[Complex64], max_lag: usize) -> Result<FourierCoeffs> {
    let g = values.len();
    if 2 * max_lag >= g {
        return Err(Error::Resolution {
            max_lag,
            grid_size: g,
        });
    }
    let all = grid::dft_coeffs(values);
    let coeffs = (-(max_lag as isize)..=max_lag as isize)
        .map(|k| grid::coeff_at(&all, k))
        .collect();
    Ok(FourierCoeffs { max_lag, coeffs })
}

/// Outcome of the minimality diagnostic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimalityReport {
    pub passes: bool,
    /// `∫(f+g)^{-1/(α-1)} dθ` over `[-π, π)` at the finest resolution.
    pub integral: f64,
    /// The same quadrature at `G`, `2G`, `4G`.
    pub refinements: [f64; 3],
    pub note: String,
}

/// Heuristic check of `∫(f+g)^{-1/(α-1)} < ∞`.
///
/// The integral is evaluated at `G`, `2G` and `4G` points. A non-finite value,
/// or growth by more than a factor 2 from the coarsest to the finest grid, is
/// reported as a failure. Sampled values cannot prove integrability; this is a
/// diagnostic only.
pub fn check_minimality(
    f: &SpectralDensity,
    g: Option<&SpectralDensity>,
    alpha: f64,
    grid_size: usize,
) -> MinimalityReport {
    let fail = |note: String| MinimalityReport {
        passes: false,
        integral: f64::INFINITY,
        refinements: [f64::INFINITY; 3],
        note,
    };
    if !(alpha > 1.0 && alpha <= 2.0) {
        return fail(format!("alpha = {alpha} is outside (1, 2]"));
    }
    let exponent = -1.0 / (alpha - 1.0);
    let mut refinements = [0.0; 3];
    for (i, level) in refinements.iter_mut().enumerate() {
        let size = grid_size << i;
        let fv = match f.evaluate(size) {
            Ok(v) => v,
            Err(e) => return fail(e.to_string()),
        };
        let total: Vec<f64> = match g.map(|g| g.evaluate(size)) {
            Some(Ok(gv)) => fv.iter().zip(&gv).map(|(a, b)| a + b).collect(),
            Some(Err(e)) => return fail(e.to_string()),
            None => fv,
        };
        let integrand: Vec<f64> = total.iter().map(|v| v.powf(exponent)).collect();
        *level = 2.0 * PI * grid::mean(&integrand);
    }
    let integral = refinements[2];
    if !refinements.iter().all(|v| v.is_finite()) {
        return MinimalityReport {
            passes: false,
            integral,
            refinements,
            note: "integrand is infinite at a grid point (spectral zero)".into(),
        };
    }
    let growth = refinements[2] / refinements[0];
    let passes = growth <= 2.0;
    MinimalityReport {
        passes,
        integral,
        refinements,
        note: if passes {
            "stable under refinement".into()
        } else {
            format!("integral grew by a factor {growth:.3} over two refinements")
        },
    }
}

/// Coefficients `(a_0, …, a_M)` of the target functional `Aξ = Σ a_j ξ_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FunctionalCoeffs(Vec<Complex64>);

impl FunctionalCoeffs {
    pub fn new(a: Vec<Complex64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::validation("functional needs at least one coefficient"));
        }
        if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::validation("functional coefficients must be finite"));
        }
        Ok(Self(a))
    }

    pub fn from_real(a: &[f64]) -> Result<Self> {
        Self::new(a.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|z| *z == Complex64::new(0.0, 0.0))
    }

    pub fn is_real(&self) -> bool {
        self.0.iter().all(|z| z.im == 0.0)
    }

    /// `Σ|a_j|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `A(e^{iθ}) = Σ a_j e^{ijθ}` on the grid.
    pub fn symbol_on_grid(&self, grid: Grid) -> Vec<Complex64> {
        grid::synthesize_lags(grid, self.0.iter().enumerate().map(|(j, &a)| (j as isize, a)))
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self(self.0.iter().map(|z| z * c).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn white_is_flat() {
        let v = SpectralDensity::white(1.0).evaluate(64).unwrap();
        assert!(v.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn ar1_at_zero() {
        let v = SpectralDensity::ar1(0.5).evaluate(64).unwrap();
        // θ = 0 sits at index G/2.
        assert!((v[32] - 4.0).abs() < 1e-12);
        let grid = Grid::new(64).unwrap();
        for (m, x) in v.iter().enumerate() {
            let t = grid.theta(m);
            let expect = 1.0 / Complex64::new(1.0 - 0.5 * t.cos(), 0.5 * t.sin()).norm_sqr();
            assert!((x - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn contaminated_is_convex_combination() {
        let d = SpectralDensity::contaminated(SpectralDensity::white(1.0), SpectralDensity::white(2.0), 0.5);
        assert!(d.evaluate(64).unwrap().iter().all(|&x| x == 1.5));

        let base = SpectralDensity::ar1(0.3);
        let w = SpectralDensity::ma(vec![0.7], 2.0);
        let eps = 0.3;
        let mix = SpectralDensity::contaminated(base.clone(), w.clone(), eps).evaluate(128).unwrap();
        let b = base.evaluate(128).unwrap();
        let c = w.evaluate(128).unwrap();
        for i in 0..128 {
            assert_eq!(mix[i], (1.0 - eps) * b[i] + eps * c[i]);
        }
    }

    #[test]
    fn negative_tabulated_is_rejected() {
        let mut vals = vec![1.0; 64];
        vals[10] = -0.1;
        let err = SpectralDensity::tabulated(vals).evaluate(64).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
        assert!(SpectralDensity::tabulated(vec![1.0; 30]).evaluate(64).is_err());
    }

    #[test]
    fn tabulated_resamples_linearly() {
        let vals = SpectralDensity::ar1(0.2).evaluate(256).unwrap();
        let tab = SpectralDensity::tabulated(vals.clone());
        assert_eq!(tab.evaluate(256).unwrap(), vals);
        let fine = tab.evaluate(512).unwrap();
        for m in 0..256 {
            assert!((fine[2 * m] - vals[m]).abs() < 1e-14);
        }
    }

    #[test]
    fn white_coefficients() {
        let r = fourier_coeffs(&SpectralDensity::white(2.5).evaluate(64).unwrap(), 5).unwrap();
        assert!((r.get(0).re - 2.5).abs() < 1e-14);
        for k in 1..=5 {
            assert!(r.get(k).norm() < 1e-14);
            assert!(r.get(-k).norm() < 1e-14);
        }
    }

    #[test]
    fn reciprocal_of_example_density() {
        let alpha = 0.5;
        let f = SpectralDensity::ar1(alpha).evaluate(256).unwrap();
        let inv: Vec<f64> = f.iter().map(|x| 1.0 / x).collect();
        let b = fourier_coeffs(&inv, 6).unwrap();
        assert!((b.get(0).re - (1.0 + alpha * alpha)).abs() < 1e-13);
        assert!((b.get(-1) - Complex64::new(-alpha, 0.0)).norm() < 1e-13);
        assert!((b.get(1) - Complex64::new(-alpha, 0.0)).norm() < 1e-13);
        for p in 2..=6 {
            assert!(b.get(p).norm() < 1e-13);
        }
    }

    #[test]
    fn ar1_covariances_follow_geometric_series() {
        // Independent oracle: ξ_n = 0.5 ξ_{n-1} + ε_n has
        // Cov(ξ_0, ξ_k) = 0.5^|k| / (1 - 0.25).
        let r = fourier_coeffs(&SpectralDensity::ar1(0.5).evaluate(1024).unwrap(), 20).unwrap();
        for k in -20isize..=20 {
            let expect = (4.0 / 3.0) * 0.5f64.powi(k.abs() as i32);
            assert!((r.get(k).re - expect).abs() < 1e-12, "lag {k}");
            assert!(r.get(k).im.abs() < 1e-12);
        }
    }

    #[test]
    fn lag_too_large_for_grid() {
        let v = vec![1.0; 64];
        assert_eq!(
            fourier_coeffs(&v, 32).unwrap_err(),
            Error::Resolution {
                max_lag: 32,
                grid_size: 64
            }
        );
        assert!(fourier_coeffs(&v, 31).is_ok());
    }

    #[test]
    fn minimality_examples() {
        let rep = check_minimality(&SpectralDensity::white(1.0), None, 2.0, 64);
        assert!(rep.passes);
        assert!((rep.integral - 2.0 * PI).abs() < 1e-12);

        let unit_root = SpectralDensity::ma(vec![-1.0], 1.0);
        assert!(!check_minimality(&unit_root, None, 2.0, 64).passes);

        let rep = check_minimality(&SpectralDensity::ar1(0.5), None, 2.0, 64);
        assert!(rep.passes);
        assert!((rep.integral / (2.0 * PI) - 1.25).abs() < 1e-12);

        assert!(!check_minimality(&SpectralDensity::white(1.0), None, 1.0, 64).passes);
    }

    #[test]
    fn density_json_schema() {
        let d: SpectralDensity = serde_json::from_str(r#"{"kind":"ar","coeffs":[0.5]}"#).unwrap();
        assert_eq!(d, SpectralDensity::ar1(0.5));
        let d: SpectralDensity = serde_json::from_str(
            r#"{"kind":"contaminated","base":{"kind":"white","level":1},"contamination":{"kind":"white","level":2},"epsilon":0.5}"#,
        )
        .unwrap();
        assert!(matches!(d, SpectralDensity::Contaminated { .. }));
        assert!(serde_json::from_str::<SpectralDensity>(r#"{"kind":"white","level":1,"bogus":2}"#).is_err());
        assert!(serde_json::from_str::<SpectralDensity>(r#"{"kind":"spline"}"#).is_err());
    }

    #[test]
    fn functional_symbol() {
        let a = FunctionalCoeffs::from_real(&[1.0, 2.0]).unwrap();
        let grid = Grid::new(64).unwrap();
        let s = a.symbol_on_grid(grid);
        for (m, z) in s.iter().enumerate() {
            let t = grid.theta(m);
            let expect = Complex64::new(1.0, 0.0) + Complex64::from_polar(2.0, t);
            assert!((z - expect).norm() < 1e-13);
        }
        assert!(FunctionalCoeffs::new(vec![]).is_err());
    }
}
