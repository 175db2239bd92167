//! Optimal extrapolation of harmonizable SαS sequences, `1 < α ≤ 2`.
//!
//! With noise, the error `Δ(h) = mean(|A - h|^α f + |h|^α g)` is minimized
//! directly over `h = Σ_{k=1}^{M} h_{-k} e^{-ikθ}`; its stationarity conditions
//! are the vanishing of the positive-lag coefficients of
//! `F = (A - h)^<α-1> f - h^<α-1> g`, and `F = conj(C)` on the rest.
//!
//! Without noise the coefficients `c_0..c_M` of `C` are found from the convex
//! dual `J(c) = mean(|C|^{α'} f^{-1/(α-1)})/α' - Re Σ conj(c_j) a_j`,
//! `α' = α/(α-1)`, whose gradient is `-½ r_k(h)` for
//! `h = A - |C|^{α'-2} C f^{-1/(α-1)}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::convex::{ConvexProblem, NewtonOptions, Term};
use crate::error::{Error, Result};
use crate::extrap_gauss::SpectralCharacteristic;
use crate::grid::{self, Grid};
use crate::signed_power::signed_pow_unchecked;
use crate::spectral::{check_minimality, require_positive, FunctionalCoeffs, SpectralDensity};

/// Smoothing `|z|² → |z|² + ε²` used inside Newton only.
pub const SMOOTHING: f64 = 1e-10;
/// Smallest ε tried when the smoothed optimum fails the KKT check.
const MIN_SMOOTHING: f64 = 1e-25;
/// KKT residual, relative to `sup|A|^{α-1} f`, accepted as converged.
pub const KKT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_GRID: usize = 2048;
const MAX_NEWTON: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StableProblem {
    pub alpha: f64,
    pub f: SpectralDensity,
    pub g: Option<SpectralDensity>,
    pub a: FunctionalCoeffs,
    /// Number `M` of unknown coefficients; `4·len(a)` by default.
    pub truncation: usize,
    /// Defaults to `max(2048, 16·M)`.
    pub grid_size: usize,
}

impl StableProblem {
    pub fn new(alpha: f64, f: SpectralDensity, g: Option<SpectralDensity>, a: FunctionalCoeffs) -> Self {
        let truncation = 4 * a.len();
        Self {
            alpha,
            f,
            g,
            a,
            truncation,
            grid_size: DEFAULT_GRID.max(16 * truncation),
        }
    }

    pub fn with_truncation(mut self, m: usize) -> Self {
        self.truncation = m;
        self.grid_size = self.grid_size.max(16 * m);
        self
    }

    pub fn with_grid(mut self, grid_size: usize) -> Self {
        self.grid_size = grid_size;
        self
    }

    fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if self.truncation == 0 {
            return Err(Error::validation("truncation M must be positive"));
        }
        if self.grid_size < 16 * self.truncation {
            return Err(Error::Resolution {
                max_lag: self.truncation,
                grid_size: self.grid_size,
            });
        }
        let rep = check_minimality(&self.f, self.g.as_ref(), self.alpha, self.grid_size);
        if !rep.passes {
            return Err(Error::domain(format!("minimality condition fails: {}", rep.note)));
        }
        Ok(())
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 1.0 && alpha <= 2.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("alpha must lie in (1, 2], got {alpha}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StableSolution {
    pub h: SpectralCharacteristic,
    /// `c_0, …, c_M`.
    pub c_coeffs: Vec<Complex64>,
    /// `Δ(h)`, unsmoothed.
    pub error_value: f64,
    /// The same error by the second available route.
    pub error_check: f64,
    /// Largest coefficient of the equations actually solved.
    pub kkt_residual: f64,
    /// `sup|A|^{α-1} f`, the unit in which `kkt_residual` is judged.
    pub kkt_scale: f64,
    /// `sup|F - conj(C)|` (noisy) or `max_{k≥0} |r_k(h)|` (noiseless); both
    /// shrink as the truncation grows.
    pub truncation_defect: f64,
    pub iterations: usize,
    pub solver_trace: Vec<String>,
}

pub fn solve_stable_noisy(p: &StableProblem) -> Result<StableSolution> {
    p.validate()?;
    let fv = p.f.evaluate(p.grid_size)?;
    let gv = p.g.as_ref().map(|g| g.evaluate(p.grid_size)).transpose()?;
    stable_noisy_on_grid(p.alpha, &fv, gv.as_deref(), &p.a, p.truncation, None)
}

pub fn solve_stable_noiseless(p: &StableProblem) -> Result<StableSolution> {
    if p.g.is_some() {
        return Err(Error::validation("noiseless solver called with a noise density"));
    }
    p.validate()?;
    let fv = p.f.evaluate(p.grid_size)?;
    stable_noiseless_on_grid(p.alpha, &fv, &p.a, p.truncation, None)
}

pub(crate) fn kkt_scale(alpha: f64, big_a: &[Complex64], f: &[f64]) -> f64 {
    big_a
        .iter()
        .zip(f)
        .map(|(a, f)| a.norm().powf(alpha - 1.0) * f)
        .fold(0.0, f64::max)
}

/// `mean(|A - h|^α f + |h|^α g)`.
pub(crate) fn error_functional(alpha: f64, big_a: &[Complex64], h: &[Complex64], f: &[f64], g: Option<&[f64]>) -> f64 {
    let vals: Vec<f64> = (0..f.len())
        .map(|m| {
            let noise = g.map_or(0.0, |g| h[m].norm().powf(alpha) * g[m]);
            (big_a[m] - h[m]).norm().powf(alpha) * f[m] + noise
        })
        .collect();
    grid::mean(&vals)
}

/// Coefficients `c_j = conj(r_{-j}(F))`, `0 ≤ j ≤ M`, of
/// `F = (A - h)^⟨α-1⟩f - h^⟨α-1⟩g`, the KKT residual `max_{1≤k≤M} |r_k(F)|`,
/// and the sup-distance between `F` and its truncation to lags `-M..=0`.
pub(crate) fn stationarity(
    alpha: f64,
    big_a: &[Complex64],
    h_vals: &[Complex64],
    f: &[f64],
    g: Option<&[f64]>,
    m: usize,
) -> (Vec<Complex64>, f64, f64) {
    let grid = Grid::of_len(f.len());
    let big_f: Vec<Complex64> = (0..f.len())
        .map(|i| {
            let noise = g.map_or(Complex64::new(0.0, 0.0), |g| signed_pow_unchecked(h_vals[i], alpha - 1.0) * g[i]);
            signed_pow_unchecked(big_a[i] - h_vals[i], alpha - 1.0) * f[i] - noise
        })
        .collect();
    let fc = grid::dft_coeffs(&big_f);
    let kkt_residual = (1..=m as isize).map(|k| grid::coeff_at(&fc, k).norm()).fold(0.0, f64::max);
    let c_coeffs: Vec<Complex64> = (0..=m as isize).map(|j| grid::coeff_at(&fc, -j).conj()).collect();
    let conj_c = grid::synthesize_lags(grid, c_coeffs.iter().enumerate().map(|(j, c)| (-(j as isize), c.conj())));
    let truncation_defect = big_f.iter().zip(&conj_c).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    (c_coeffs, kkt_residual, truncation_defect)
}

pub(crate) fn stable_noisy_on_grid(
    alpha: f64,
    f: &[f64],
    g: Option<&[f64]>,
    a: &FunctionalCoeffs,
    m: usize,
    init: Option<&[Complex64]>,
) -> Result<StableSolution> {
    check_alpha(alpha)?;
    let grid = Grid::new(f.len())?;
    match g {
        Some(g) => require_positive(&f.iter().zip(g).map(|(x, y)| x + y).collect::<Vec<_>>(), "f + g")?,
        None => require_positive(f, "f")?,
    }
    let big_a = a.symbol_on_grid(grid);
    let scale = kkt_scale(alpha, &big_a, f);
    let lags: Vec<isize> = (1..=m as isize).map(|k| -k).collect();
    let build = |power: f64| {
        let mut terms = vec![Term {
            offset: big_a.clone(),
            sign: -1.0,
            weight: f.to_vec(),
            power,
        }];
        if let Some(g) = g {
            terms.push(Term {
                offset: vec![Complex64::new(0.0, 0.0); f.len()],
                sign: 1.0,
                weight: g.to_vec(),
                power,
            });
        }
        ConvexProblem {
            grid,
            lags: lags.clone(),
            terms,
            linear: vec![Complex64::new(0.0, 0.0); m],
            smoothing: SMOOTHING,
        }
    };
    let opts = NewtonOptions {
        max_iterations: MAX_NEWTON,
        gradient_tol: 1e-12 * scale.max(f64::MIN_POSITIVE),
    };
    let zero = vec![Complex64::new(0.0, 0.0); m];
    let x0 = match init {
        Some(x) if x.len() == m => x.to_vec(),
        _ => build(2.0).minimize(&zero, opts)?.x,
    };
    let mut problem = build(alpha);
    let mut out = problem.minimize(&x0, opts)?;
    let mut trace = std::mem::take(&mut out.trace);
    let mut h_vals = problem.field(&out.x);
    let (mut c_coeffs, mut kkt_residual, mut truncation_defect) = stationarity(alpha, &big_a, &h_vals, f, g, m);
    // When the optimal h is comparable to ε (f close to white) the smoothed
    // minimizer is off; shrink ε and restart from the current point.
    while kkt_residual > KKT_TOLERANCE * scale && problem.smoothing > MIN_SMOOTHING {
        problem.smoothing *= 1e-3;
        trace.push(format!("kkt residual {kkt_residual:.3e}; smoothing lowered to {:.0e}", problem.smoothing));
        let Ok(next) = problem.minimize(&out.x, opts) else { break };
        trace.extend(next.trace);
        out.iterations += next.iterations;
        out.x = next.x;
        h_vals = problem.field(&out.x);
        (c_coeffs, kkt_residual, truncation_defect) = stationarity(alpha, &big_a, &h_vals, f, g, m);
    }

    if kkt_residual > KKT_TOLERANCE * scale {
        trace.push(format!("kkt residual {kkt_residual:.3e} vs scale {scale:.3e}"));
        return Err(Error::convergence("stable solver stopped away from stationarity", trace));
    }
    let error_value = error_functional(alpha, &big_a, &h_vals, f, g);
    Ok(StableSolution {
        h: SpectralCharacteristic::from_coeffs(out.x, grid, alpha),
        c_coeffs,
        error_value,
        error_check: problem.value_unsmoothed(&x0_or(&problem, &h_vals)),
        kkt_residual,
        kkt_scale: scale,
        truncation_defect,
        iterations: out.iterations,
        solver_trace: trace,
    })
}

/// Re-reads the coefficients from the synthesized grid values so the check
/// value goes through an independent path.
fn x0_or(problem: &ConvexProblem, h_vals: &[Complex64]) -> Vec<Complex64> {
    let hc = grid::dft_coeffs(h_vals);
    problem.lags.iter().map(|&l| grid::coeff_at(&hc, l)).collect()
}

pub(crate) fn stable_noiseless_on_grid(
    alpha: f64,
    f: &[f64],
    a: &FunctionalCoeffs,
    m: usize,
    init: Option<&[Complex64]>,
) -> Result<StableSolution> {
    check_alpha(alpha)?;
    let grid = Grid::new(f.len())?;
    require_positive(f, "f")?;
    let big_a = a.symbol_on_grid(grid);
    let scale = kkt_scale(alpha, &big_a, f);
    let dual = alpha / (alpha - 1.0);
    let w: Vec<f64> = f.iter().map(|v| v.powf(-1.0 / (alpha - 1.0))).collect();
    let linear: Vec<Complex64> = (0..=m).map(|j| a.as_slice().get(j).copied().unwrap_or_default()).collect();
    let build = |power: f64| ConvexProblem {
        grid,
        lags: (0..=m as isize).collect(),
        terms: vec![Term {
            offset: vec![Complex64::new(0.0, 0.0); f.len()],
            sign: 1.0,
            weight: w.iter().map(|x| x / power).collect(),
            power,
        }],
        linear: linear.clone(),
        smoothing: 0.0,
    };
    let a_scale = linear.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let opts = NewtonOptions {
        max_iterations: MAX_NEWTON,
        gradient_tol: 1e-12 * a_scale.max(f64::MIN_POSITIVE),
    };
    let zero = vec![Complex64::new(0.0, 0.0); m + 1];
    if a.is_zero() {
        let h = SpectralCharacteristic::from_coeffs(vec![Complex64::new(0.0, 0.0); m], grid, alpha);
        return Ok(StableSolution {
            h,
            c_coeffs: zero,
            error_value: 0.0,
            error_check: 0.0,
            kkt_residual: 0.0,
            kkt_scale: scale,
            truncation_defect: 0.0,
            iterations: 0,
            solver_trace: vec!["a = 0: trivial solution".into()],
        });
    }
    let x0 = match init {
        Some(x) if x.len() == m + 1 && x.iter().any(|z| z.norm() > 0.0) => x.to_vec(),
        _ => build(2.0).minimize(&zero, opts)?.x,
    };
    let problem = build(dual);
    let out = problem.minimize(&x0, opts)?;
    let c_coeffs = out.x;

    let big_c = problem.field(&c_coeffs);
    let h_vals: Vec<Complex64> = (0..f.len())
        .map(|i| big_a[i] - big_c[i] * (big_c[i].norm().powf(dual - 2.0) * w[i]))
        .collect();
    let hc = grid::dft_coeffs(&h_vals);
    let kkt_residual = (0..=m as isize).map(|k| grid::coeff_at(&hc, k).norm()).fold(0.0, f64::max);
    let truncation_defect = hc[..f.len() / 2].iter().map(|z| z.norm()).fold(0.0, f64::max);

    let mut trace = out.trace;
    if kkt_residual > KKT_TOLERANCE * scale.max(a_scale) {
        trace.push(format!("one-sidedness residual {kkt_residual:.3e}"));
        return Err(Error::convergence("noiseless stable solver stopped away from stationarity", trace));
    }
    let closed: Vec<f64> = (0..f.len())
        .map(|i| big_c[i].norm().powf(dual) * f[i].powf(1.0 - dual))
        .collect();
    let error_value = grid::mean(&closed);
    let error_check = error_functional(alpha, &big_a, &h_vals, f, None);
    Ok(StableSolution {
        h: SpectralCharacteristic::from_grid(h_vals, m, alpha),
        c_coeffs,
        error_value,
        error_check,
        kkt_residual,
        kkt_scale: scale,
        truncation_defect,
        iterations: out.iterations,
        solver_trace: trace,
    })
}
