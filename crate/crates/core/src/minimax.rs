//! Least favorable densities and minimax characteristics over
//! `D_f^β = {mean(f^β) = P1}` and
//! `D_g^ε = {g = (1-ε)g_1 + εw, w ≥ 0, mean(g) = P2}`.
//!
//! The error `Δ(h; f, g) = mean(|A - h|^α f + |h|^α g)` is linear in `(f, g)`,
//! so its maximum over the classes has a closed form
//!
//! `W(h) = P1^{1/β}‖|A - h|^α‖_{β/(β-1)} + mean((1-ε)g_1|h|^α) + excess·max|h|^α`
//!
//! where `excess = P2 - (1-ε)mean(g_1)`. The maximizers are the least
//! favorable equations `|A - h|^α = γ_1 f^{β-1}` and `|h|^α = φ_1 + γ_2`.
//!
//! Noisy classes minimize `W` over one-sided `h` by a log-barrier Newton
//! method on the epigraph of the max term; the barrier multipliers are the
//! contamination density. Noiseless classes iterate the closed-form density
//! update against the inner solver. Every solution is checked by sampling both
//! saddle inequalities.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extrap_gauss::{gauss_on_grid, SpectralCharacteristic};
use crate::convex;
use crate::extrap_stable::{check_alpha, error_functional, kkt_scale, stable_noiseless_on_grid, stationarity};
use crate::grid::{self, Grid};
use crate::spectral::{FunctionalCoeffs, SpectralDensity};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityClassF {
    pub beta: f64,
    /// `mean(f^β) = P1`.
    pub p1: f64,
}

impl DensityClassF {
    pub fn new(beta: f64, p1: f64) -> Result<Self> {
        let c = Self { beta, p1 };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 1.0 && self.beta.is_finite()) {
            return Err(Error::domain(format!("beta must be at least 1, got {}", self.beta)));
        }
        if !(self.p1 > 0.0 && self.p1.is_finite()) {
            return Err(Error::domain(format!("P1 must be positive, got {}", self.p1)));
        }
        Ok(())
    }

    pub fn moment(&self, f: &[f64]) -> f64 {
        grid::mean(&f.iter().map(|v| v.powf(self.beta)).collect::<Vec<_>>())
    }

    /// Rescales `f` onto the constraint surface.
    pub fn normalize(&self, f: &mut [f64]) {
        let m = self.moment(f);
        if m > 0.0 {
            let s = (self.p1 / m).powf(1.0 / self.beta);
            f.iter_mut().for_each(|v| *v *= s);
        }
    }

    /// The constant member `P1^{1/β}`.
    pub fn white_start(&self, grid_size: usize) -> Vec<f64> {
        vec![self.p1.powf(1.0 / self.beta); grid_size]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityClassG {
    pub epsilon: f64,
    pub g1: SpectralDensity,
    /// `mean(g) = P2`.
    pub p2: f64,
}

impl DensityClassG {
    pub fn new(epsilon: f64, g1: SpectralDensity, p2: f64) -> Result<Self> {
        let c = Self { epsilon, g1, p2 };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::domain(format!("epsilon must lie in [0, 1], got {}", self.epsilon)));
        }
        if !(self.p2 > 0.0 && self.p2.is_finite()) {
            return Err(Error::domain(format!("P2 must be positive, got {}", self.p2)));
        }
        self.g1.validate()
    }

    /// Grid values of `(1-ε)g_1` and the contamination mass `P2 - mean((1-ε)g_1)`.
    pub fn lower_bound(&self, grid_size: usize) -> Result<(Vec<f64>, f64)> {
        let lb: Vec<f64> = self
            .g1
            .evaluate(grid_size)?
            .iter()
            .map(|v| (1.0 - self.epsilon) * v)
            .collect();
        let mut excess = self.p2 - grid::mean(&lb);
        let tol = 1e-12 * self.p2;
        if excess < -tol {
            return Err(Error::validation(format!(
                "contamination class is empty: (1-ε)·mean(g1) = {} exceeds P2 = {}",
                grid::mean(&lb),
                self.p2
            )));
        }
        if excess.abs() <= tol {
            excess = 0.0;
        }
        if self.epsilon == 0.0 && excess > 0.0 {
            return Err(Error::validation(format!(
                "with epsilon = 0 the class is {{g1}}, but mean(g1) = {} differs from P2 = {}",
                grid::mean(&lb),
                self.p2
            )));
        }
        Ok((lb, excess))
    }
}

/// Matrix used by the eigenvector route.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EigenMode {
    /// `A_{i,j} = a_{i+j}`: `‖Aφ‖²` is the prediction error of the density
    /// with causal factor `φ`.
    #[default]
    Symmetric,
    /// `A_{i,j} = a_{i-j}` for `i ≥ j`, truncated to `N×N`.
    LowerTriangular,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MinimaxOptions {
    /// Outer iterations of the noiseless fixed point.
    pub max_iterations: usize,
    /// Relative sup-distance between a noiseless iterate and its update.
    pub tolerance: f64,
    /// Initial relaxation weight of the noiseless fixed point; halved when the
    /// error fails to increase.
    pub relaxation: f64,
    /// Final barrier weight of the noisy solver relative to `W(0)`; this is
    /// the duality gap at exit.
    pub barrier_gap: f64,
    pub certificate_samples: usize,
    pub saddle_slack: f64,
    pub seed: u64,
}

impl Default for MinimaxOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            tolerance: 1e-6,
            relaxation: 1.0,
            barrier_gap: 1e-10,
            certificate_samples: 200,
            saddle_slack: 1e-5,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// `Δ` at the current densities (fixed point) or `W(h)` (barrier).
    pub error: f64,
    /// Density update distance (fixed point) or squared Newton decrement
    /// (barrier).
    pub change: f64,
    /// `(W(h) - Δ(h; f, g)) / Δ(h; f, g)` for the current `h`.
    pub gap: f64,
    pub relaxation: Option<f64>,
    pub barrier: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MinimaxResiduals {
    /// `|mean(f0^β) - P1| / P1`.
    pub p1_relative: f64,
    pub p2_relative: Option<f64>,
    /// `sup|(|A - h|^α - γ_1 f0^{β-1})| / sup|A - h|^α`.
    pub f_equation: f64,
    /// `max_θ (g0 - (1-ε)g_1)/excess · |φ_1|/γ_2` with `φ_1 = |h0|^α - γ_2 ≤ 0`
    /// and `γ_2 = max |h0|^α`.
    pub complementarity: Option<f64>,
    /// Negative-lag stationarity of `h0` for `(f0, g0)` relative to
    /// `sup|A|^{α-1}f0`; noisy classes only.
    pub kkt: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaddleCertificate {
    pub samples: usize,
    /// `max (Δ(h0; f, g) - Δ(h0; f0, g0))` over sampled feasible densities.
    pub right_violation: f64,
    /// `max (Δ(h0; f0, g0) - Δ(h; f0, g0))` over sampled one-sided `h`.
    pub left_violation: f64,
    pub slack: f64,
    pub passes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenInfo {
    pub mode: EigenMode,
    /// `P·σ²` with `σ` the top singular value of the operator.
    pub value: f64,
    pub singular_value: f64,
    /// `φ^H A φ` for the unit maximizer; the signed eigenvalue when `A` is
    /// real symmetric.
    pub rayleigh: Complex64,
    /// Unit-norm maximizer; the least favorable sequence is
    /// `ξ_j = √P Σ_k φ_k ε_{j-k}`.
    pub phi: Vec<Complex64>,
    pub second_value: f64,
    pub degenerate: bool,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimaxSolution {
    pub f0: SpectralDensity,
    pub g0: Option<SpectralDensity>,
    pub h0: SpectralCharacteristic,
    pub c: Vec<Complex64>,
    pub gamma1: f64,
    pub gamma2: Option<f64>,
    /// `|h0|^α - γ_2` on the grid.
    pub phi1: Option<Vec<f64>>,
    pub error_value: f64,
    pub residuals: MinimaxResiduals,
    pub certificate: Option<SaddleCertificate>,
    pub iterations: usize,
    pub history: Vec<IterationRecord>,
    pub eigen: Option<EigenInfo>,
    pub warnings: Vec<String>,
}

/// Exponent `α/(α + (α-1)(β-1))` of the noiseless least favorable density.
pub fn noiseless_exponent(alpha: f64, beta: f64) -> f64 {
    alpha / (alpha + (alpha - 1.0) * (beta - 1.0))
}

struct GClass {
    lower: Vec<f64>,
    excess: f64,
}

/// `W(h)` relative to `Δ(h; f, g)`, as in [`IterationRecord::gap`].
fn worst_case(
    alpha: f64,
    big_a: &[Complex64],
    h: &[Complex64],
    class_f: &DensityClassF,
    class_g: Option<&GClass>,
) -> f64 {
    let beta = class_f.beta;
    let u: Vec<f64> = big_a.iter().zip(h).map(|(a, h)| (a - h).norm().powf(alpha)).collect();
    let mut worst = if beta == 1.0 {
        class_f.p1 * u.iter().copied().fold(0.0, f64::max)
    } else {
        let q = beta / (beta - 1.0);
        let m = grid::mean(&u.iter().map(|x| x.powf(q)).collect::<Vec<_>>());
        class_f.p1.powf(1.0 / beta) * m.powf(1.0 / q)
    };
    if let Some(c) = class_g {
        let v: Vec<f64> = h.iter().map(|h| h.norm().powf(alpha)).collect();
        let lv: Vec<f64> = v.iter().zip(&c.lower).map(|(x, y)| x * y).collect();
        worst += grid::mean(&lv) + c.excess * v.iter().copied().fold(0.0, f64::max);
    }
    worst
}

fn relative_gap(worst: f64, error: f64) -> f64 {
    (worst - error) / error.max(f64::MIN_POSITIVE)
}

// ---------------------------------------------------------------------------
// Noiseless fixed point

#[derive(Clone, Copy, Debug)]
enum Inner {
    /// Dual Newton solver; supplies `|C|` for the closed-form update.
    Dual { alpha: f64, m: usize },
    Gauss { n: usize },
}

impl Inner {
    fn alpha(self) -> f64 {
        match self {
            Inner::Dual { alpha, .. } => alpha,
            Inner::Gauss { .. } => 2.0,
        }
    }
}

struct InnerSolution {
    h: SpectralCharacteristic,
    c: Vec<Complex64>,
    error: f64,
    warm: Vec<Complex64>,
    c_modulus: Option<Vec<f64>>,
}

fn solve_inner(
    inner: Inner,
    f: &[f64],
    a: &FunctionalCoeffs,
    big_a: &[Complex64],
    warm: Option<&[Complex64]>,
) -> Result<InnerSolution> {
    match inner {
        Inner::Dual { alpha, m } => {
            let s = stable_noiseless_on_grid(alpha, f, a, m, warm)?;
            let grid = Grid::of_len(f.len());
            let cm = grid::synthesize_lags(grid, s.c_coeffs.iter().enumerate().map(|(j, &c)| (j as isize, c)))
                .iter()
                .map(|z| z.norm())
                .collect();
            let error = error_functional(alpha, big_a, &s.h.grid_values, f, None);
            Ok(InnerSolution {
                warm: s.c_coeffs.clone(),
                h: s.h,
                c: s.c_coeffs,
                error,
                c_modulus: Some(cm),
            })
        }
        Inner::Gauss { n } => {
            let r = gauss_on_grid(f, None, a, n, false)?;
            let error = error_functional(2.0, big_a, &r.h.grid_values, f, None);
            Ok(InnerSolution {
                warm: Vec::new(),
                h: r.h,
                c: r.c.c,
                error,
                c_modulus: None,
            })
        }
    }
}

fn sup_rel_change(new: &[f64], old: &[f64]) -> f64 {
    let scale = old.iter().chain(new).copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    new.iter().zip(old).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale
}

/// Type-II Anderson extrapolation `x + r - (ΔX + ΔR)γ` with `γ` the
/// least-squares fit of `r` by the residual differences.
fn anderson_step(x: &[f64], r: &[f64], dx: &[Vec<f64>], dr: &[Vec<f64>]) -> Option<Vec<f64>> {
    if dr.is_empty() {
        return None;
    }
    let m = dr.len();
    let mat = DMatrix::from_fn(x.len(), m, |i, j| dr[j][i]);
    let rhs = DVector::from_column_slice(r);
    let gamma = mat.svd(true, true).solve(&rhs, 1e-10).ok()?;
    let out: Vec<f64> = (0..x.len())
        .map(|i| x[i] + r[i] - (0..m).map(|j| gamma[j] * (dx[j][i] + dr[j][i])).sum::<f64>())
        .collect();
    out.iter().all(|v| v.is_finite()).then_some(out)
}

struct FixedPoint<'a> {
    inner: Inner,
    class_f: &'a DensityClassF,
    a: &'a FunctionalCoeffs,
    big_a: Vec<Complex64>,
    opts: MinimaxOptions,
    /// `f ∝ |C|^{exponent}` when set, `f ∝ |A - h|^{α/(β-1)}` otherwise.
    closed_form: Option<f64>,
}

struct FixedPointState {
    f: Vec<f64>,
    sol: InnerSolution,
    iterations: usize,
    history: Vec<IterationRecord>,
}

impl FixedPoint<'_> {
    fn update(&self, sol: &InnerSolution) -> Vec<f64> {
        let alpha = self.inner.alpha();
        let mut out: Vec<f64> = match (self.closed_form, &sol.c_modulus) {
            (Some(e), Some(cm)) => cm.iter().map(|x| x.powf(e)).collect(),
            _ => {
                let expo = alpha / (self.class_f.beta - 1.0);
                self.big_a
                    .iter()
                    .zip(&sol.h.grid_values)
                    .map(|(a, h)| (a - h).norm().powf(expo))
                    .collect()
            }
        };
        self.class_f.normalize(&mut out);
        out
    }

    fn project(&self, x: &[f64]) -> Vec<f64> {
        let mut f: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
        self.class_f.normalize(&mut f);
        f
    }

    fn run(&self, f_start: Vec<f64>, relaxation: f64) -> Result<FixedPointState> {
        const DEPTH: usize = 6;
        let alpha = self.inner.alpha();
        let mut f = f_start;
        let mut sol = solve_inner(self.inner, &f, self.a, &self.big_a, None)?;
        let mut omega = relaxation;
        let mut history = Vec::new();
        let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
        let mut dx: Vec<Vec<f64>> = Vec::new();
        let mut dr: Vec<Vec<f64>> = Vec::new();
        for it in 0..self.opts.max_iterations {
            let f_up = self.update(&sol);
            let change = sup_rel_change(&f_up, &f);
            let worst = worst_case(alpha, &self.big_a, &sol.h.grid_values, self.class_f, None);
            history.push(IterationRecord {
                iteration: it,
                error: sol.error,
                change,
                gap: relative_gap(worst, sol.error),
                relaxation: Some(omega),
                barrier: None,
            });
            if change < self.opts.tolerance {
                return Ok(FixedPointState {
                    f,
                    sol,
                    iterations: it,
                    history,
                });
            }
            let residual: Vec<f64> = f_up.iter().zip(&f).map(|(b, x)| omega * (b - x)).collect();
            if let Some((px, pr)) = prev.take() {
                dx.push(f.iter().zip(&px).map(|(a, b)| a - b).collect());
                dr.push(residual.iter().zip(&pr).map(|(a, b)| a - b).collect());
                if dx.len() > DEPTH {
                    dx.remove(0);
                    dr.remove(0);
                }
            }
            prev = Some((f.clone(), residual.clone()));

            let warm = (!sol.warm.is_empty()).then(|| sol.warm.clone());
            let mut accepted = false;
            if let Some(xa) = anderson_step(&f, &residual, &dx, &dr) {
                let fa = self.project(&xa);
                if let Ok(next) = solve_inner(self.inner, &fa, self.a, &self.big_a, warm.as_deref()) {
                    if next.error >= sol.error * (1.0 - 1e-12) {
                        f = fa;
                        sol = next;
                        accepted = true;
                    }
                }
                if !accepted {
                    dx.clear();
                    dr.clear();
                }
            }
            while !accepted {
                let xr: Vec<f64> = f.iter().zip(&f_up).map(|(x, b)| (1.0 - omega) * x + omega * b).collect();
                let f_new = self.project(&xr);
                let next = solve_inner(self.inner, &f_new, self.a, &self.big_a, warm.as_deref())?;
                // The optimal error is concave in f; a drop means overshoot.
                if next.error < sol.error * (1.0 - 1e-12) && omega > 1.0 / 1024.0 {
                    omega *= 0.5;
                    dx.clear();
                    dr.clear();
                    prev = None;
                    continue;
                }
                f = f_new;
                sol = next;
                accepted = true;
            }
        }
        Err(Error::convergence(
            format!(
                "least favorable density iteration did not settle in {} steps (last change {:.3e})",
                self.opts.max_iterations,
                history.last().map_or(f64::NAN, |r: &IterationRecord| r.change)
            ),
            history.iter().rev().take(20).map(format_record).collect(),
        ))
    }

    fn solve(&self, f_start: Vec<f64>) -> Result<FixedPointState> {
        match self.run(f_start.clone(), self.opts.relaxation) {
            Ok(s) => Ok(s),
            Err(Error::Convergence { .. }) if self.opts.relaxation > 0.5 => self.run(f_start, 0.5).map_err(|e| match e {
                Error::Convergence { message, trace } => Error::convergence(
                    format!("{message}; retried with relaxation 0.5, consider a smaller relaxation weight"),
                    trace,
                ),
                other => other,
            }),
            Err(e) => Err(e),
        }
    }
}

fn format_record(r: &IterationRecord) -> String {
    let mut s = format!(
        "iter {}: error {:.12e}, change {:.3e}, gap {:.3e}",
        r.iteration, r.error, r.change, r.gap
    );
    if let Some(w) = r.relaxation {
        s.push_str(&format!(", relaxation {w}"));
    }
    if let Some(mu) = r.barrier {
        s.push_str(&format!(", barrier {mu:.3e}"));
    }
    s
}

// ---------------------------------------------------------------------------
// Noisy classes: barrier minimization of W

/// Grid values and Wirtinger derivatives of `(|z|² + ε²)^{p/2}` with respect
/// to `conj(z)`.
struct Powered {
    val: Vec<f64>,
    d: Vec<Complex64>,
    w1: Vec<f64>,
    w2: Vec<Complex64>,
}

fn powered(z: &[Complex64], p: f64, eps2: f64) -> Powered {
    let half = p / 2.0;
    let n = z.len();
    let mut out = Powered {
        val: Vec::with_capacity(n),
        d: Vec::with_capacity(n),
        w1: Vec::with_capacity(n),
        w2: Vec::with_capacity(n),
    };
    for &z in z {
        let s = z.norm_sqr() + eps2;
        let s1 = half * s.powf(half - 1.0);
        let s2 = if s > 0.0 { (half - 1.0) * s1 / s } else { 0.0 };
        out.val.push(s.powf(half));
        out.d.push(z * s1);
        out.w1.push(s1 + s2 * z.norm_sqr());
        out.w2.push(z * z * s2);
    }
    out
}

/// `W` with the max term replaced by `excess·t - μ·mean(log(t - |h|^α))`,
/// over `x = (Re h_{-k}, Im h_{-k}, t)`.
struct Barrier<'a> {
    grid: Grid,
    lags: Vec<isize>,
    big_a: &'a [Complex64],
    alpha: f64,
    /// Hölder conjugate `β/(β-1)`.
    q: f64,
    scale_f: f64,
    lower: &'a [f64],
    excess: f64,
    eps2: f64,
}

struct BarrierPoint {
    h: Vec<Complex64>,
    u: Powered,
    v: Powered,
    t: f64,
    /// Hölder maximizer `f` of `u`, and `P1^{1/β}‖u‖_q`.
    f: Vec<f64>,
    norm: f64,
}

impl Barrier<'_> {
    fn m(&self) -> usize {
        self.lags.len()
    }

    fn has_t(&self) -> bool {
        self.excess > 0.0
    }

    fn dim(&self) -> usize {
        2 * self.m() + usize::from(self.has_t())
    }

    fn coeffs(&self, x: &DVector<f64>) -> Vec<Complex64> {
        let m = self.m();
        (0..m).map(|k| Complex64::new(x[k], x[m + k])).collect()
    }

    fn point(&self, x: &DVector<f64>) -> BarrierPoint {
        let coeffs = self.coeffs(x);
        let h = crate::extrap_gauss::synthesize_negative(&coeffs, self.grid);
        let zu: Vec<Complex64> = h.iter().zip(self.big_a).map(|(h, a)| h - a).collect();
        let u = powered(&zu, self.alpha, self.eps2);
        let v = powered(&h, self.alpha, self.eps2);
        let nq = grid::mean(&u.val.iter().map(|x| x.powf(self.q)).collect::<Vec<_>>());
        let norm = self.scale_f * nq.powf(1.0 / self.q);
        let k = self.scale_f * nq.powf(1.0 / self.q - 1.0);
        let f = u.val.iter().map(|x| k * x.powf(self.q - 1.0)).collect();
        let t = if self.has_t() { x[2 * self.m()] } else { 0.0 };
        BarrierPoint { h, u, v, t, f, norm }
    }

    /// `W` with the true max term.
    fn worst(&self, p: &BarrierPoint) -> f64 {
        let lv: Vec<f64> = p.v.val.iter().zip(self.lower).map(|(v, l)| v * l).collect();
        let vmax = p.v.val.iter().copied().fold(0.0, f64::max);
        p.norm + grid::mean(&lv) + self.excess * vmax
    }

    fn value(&self, p: &BarrierPoint, mu: f64) -> f64 {
        let lv: Vec<f64> = p.v.val.iter().zip(self.lower).map(|(v, l)| v * l).collect();
        let mut total = p.norm + grid::mean(&lv);
        if self.has_t() {
            let mut logs = Vec::with_capacity(p.v.val.len());
            for &v in &p.v.val {
                if p.t <= v {
                    return f64::INFINITY;
                }
                logs.push((p.t - v).ln());
            }
            total += self.excess * p.t - mu * grid::mean(&logs);
        }
        total
    }

    fn derivatives(&self, p: &BarrierPoint, mu: f64) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.grid.size();
        let mdim = self.m();
        let mut d = vec![Complex64::new(0.0, 0.0); n];
        let mut w1 = vec![Complex64::new(0.0, 0.0); n];
        let mut w2 = vec![Complex64::new(0.0, 0.0); n];
        let mut d_cross = vec![Complex64::new(0.0, 0.0); n];
        let mut d_norm = vec![Complex64::new(0.0, 0.0); n];
        let (mut mean_omega, mut mean_omega2) = (0.0, 0.0);
        for i in 0..n {
            let (fu, du) = (p.f[i], p.u.d[i]);
            d_norm[i] = du * fu;
            let curv = (self.q - 1.0) * fu / p.u.val[i];
            let mut c = self.lower[i];
            let mut outer_v = 0.0;
            if self.has_t() {
                let gap = p.t - p.v.val[i];
                let omega = mu / gap;
                c += omega;
                outer_v = omega / gap;
                mean_omega += omega;
                mean_omega2 += outer_v;
                d_cross[i] = -p.v.d[i] * outer_v;
            }
            let dv = p.v.d[i];
            d[i] = du * fu + dv * c;
            w1[i] = Complex64::new(fu * p.u.w1[i] + curv * du.norm_sqr() + c * p.v.w1[i] + outer_v * dv.norm_sqr(), 0.0);
            w2[i] = p.u.w2[i] * fu + du * du * curv + p.v.w2[i] * c + dv * dv * outer_v;
        }
        let grad_x = convex::real_gradient(&convex::field_gradient(&self.lags, &d));
        let mut hess_x = convex::real_hessian(&self.lags, &grid::dft_coeffs(&w1), &grid::dft_coeffs(&w2));
        // Coupling of the Hölder norm through its normalization.
        let gn = convex::real_gradient(&convex::field_gradient(&self.lags, &d_norm));
        hess_x -= (&gn * gn.transpose()) * ((self.q - 1.0) / p.norm);
        if !self.has_t() {
            return (grad_x, hess_x);
        }
        let dim = self.dim();
        let mut grad = DVector::zeros(dim);
        grad.rows_mut(0, 2 * mdim).copy_from(&grad_x);
        grad[2 * mdim] = self.excess - mean_omega / n as f64;
        let mut hess = DMatrix::zeros(dim, dim);
        hess.view_mut((0, 0), (2 * mdim, 2 * mdim)).copy_from(&hess_x);
        let cross = convex::real_gradient(&convex::field_gradient(&self.lags, &d_cross));
        for k in 0..2 * mdim {
            hess[(k, 2 * mdim)] = cross[k];
            hess[(2 * mdim, k)] = cross[k];
        }
        hess[(2 * mdim, 2 * mdim)] = mean_omega2 / n as f64;
        (grad, hess)
    }

    /// Damped Newton on the barrier problem at fixed `μ`. Returns the number
    /// of steps and the last squared Newton decrement.
    fn center(&self, x: &mut DVector<f64>, mu: f64, tol: f64, budget_tol: f64) -> Result<(usize, f64)> {
        let mut p = self.point(x);
        let mut value = self.value(&p, mu);
        let mut decrement = f64::INFINITY;
        for it in 0..200 {
            let (grad, hess) = self.derivatives(&p, mu);
            let step = convex::newton_direction(&hess, &grad)?;
            decrement = -grad.dot(&step);
            // The t-curvature grows like 1/μ, so a small decrement alone leaves
            // the budget `mean(μ/(t - v)) = excess` loose.
            let budget_ok = !self.has_t() || grad[2 * self.m()].abs() <= budget_tol;
            let stalled = decrement <= 1e-20 * self.value(&p, 0.0).abs();
            if decrement / 2.0 <= tol && (budget_ok || stalled) {
                return Ok((it, decrement));
            }
            let mut s = 1.0;
            loop {
                let trial = &*x + &step * s;
                let tp = self.point(&trial);
                let tv = self.value(&tp, mu);
                if tv <= value - 1e-4 * s * decrement {
                    *x = trial;
                    p = tp;
                    value = tv;
                    break;
                }
                s *= 0.5;
                if s < 1e-14 {
                    // Decrease below rounding: accept the current center.
                    return Ok((it, decrement));
                }
            }
        }
        Err(Error::convergence(
            format!("barrier Newton did not center at weight {mu:.3e} (decrement {decrement:.3e})"),
            Vec::new(),
        ))
    }
}

struct BarrierOutcome {
    f: Vec<f64>,
    g: Vec<f64>,
    coeffs: Vec<Complex64>,
    newton_steps: usize,
    history: Vec<IterationRecord>,
}

fn solve_barrier(
    alpha: f64,
    class_f: &DensityClassF,
    class_g: &GClass,
    grid: Grid,
    big_a: &[Complex64],
    m: usize,
    opts: &MinimaxOptions,
) -> Result<BarrierOutcome> {
    let beta = class_f.beta;
    let problem = Barrier {
        grid,
        lags: (1..=m as isize).map(|k| -k).collect(),
        big_a,
        alpha,
        q: beta / (beta - 1.0),
        scale_f: class_f.p1.powf(1.0 / beta),
        lower: &class_g.lower,
        excess: class_g.excess,
        eps2: 1e-20,
    };
    let mut x = DVector::zeros(problem.dim());
    let start = problem.point(&x);
    let w0 = problem.worst(&start).max(f64::MIN_POSITIVE);
    let mut history = Vec::new();
    let mut steps = 0;
    let record = |x: &DVector<f64>, it: usize, decrement: f64, mu: Option<f64>| {
        let p = problem.point(x);
        let w = problem.worst(&p);
        let lv: Vec<f64> = p.v.val.iter().zip(&class_g.lower).map(|(v, l)| v * l).collect();
        // Δ(h; f_h, g) for the barrier's own g: W minus the barrier gap.
        let error = p.norm + grid::mean(&lv) + mu.map_or(0.0, |mu| class_g.excess * p.t - mu);
        IterationRecord {
            iteration: it,
            error: w,
            change: decrement,
            gap: relative_gap(w, error.min(w)),
            relaxation: None,
            barrier: mu,
        }
    };
    if !problem.has_t() {
        let (it, dec) = problem.center(&mut x, 0.0, 1e-15 * w0, 0.0)?;
        steps += it;
        history.push(record(&x, steps, dec, None));
    } else {
        let vmax = start.v.val.iter().copied().fold(0.0, f64::max);
        let umax = start.u.val.iter().copied().fold(0.0, f64::max);
        x[2 * m] = vmax + umax.max(f64::MIN_POSITIVE);
        let mu_final = opts.barrier_gap * w0;
        let mut mu = 0.1 * w0;
        loop {
            let last = mu <= mu_final;
            let (tol, budget_tol) = if last {
                (1e-15 * w0, 1e-10 * class_g.excess)
            } else {
                (1e-3 * mu, f64::INFINITY)
            };
            let (it, dec) = problem.center(&mut x, mu, tol, budget_tol)?;
            steps += it;
            history.push(record(&x, steps, dec, Some(mu)));
            if last {
                break;
            }
            mu = (mu * 0.1).max(mu_final);
        }
    }
    let p = problem.point(&x);
    let coeffs = problem.coeffs(&x);
    // Report the exact Hölder maximizer of the unsmoothed |A - h|^α.
    let mut f: Vec<f64> = big_a
        .iter()
        .zip(&p.h)
        .map(|(a, h)| (a - h).norm().powf(alpha * (problem.q - 1.0)))
        .collect();
    class_f.normalize(&mut f);
    let g = if problem.has_t() {
        // The barrier multipliers μ/(t - |h|^α) are the contamination
        // density; rescale away the centering error in the budget.
        let mu = opts.barrier_gap * w0;
        let omega: Vec<f64> = p.v.val.iter().map(|v| mu / (p.t - v)).collect();
        let scale = class_g.excess / grid::mean(&omega);
        class_g.lower.iter().zip(&omega).map(|(l, w)| l + w * scale).collect()
    } else {
        class_g.lower.clone()
    };
    Ok(BarrierOutcome {
        f,
        g,
        coeffs,
        newton_steps: steps,
        history,
    })
}

// ---------------------------------------------------------------------------
// Common reporting

struct Candidate {
    alpha: f64,
    f: Vec<f64>,
    g: Option<Vec<f64>>,
    h: SpectralCharacteristic,
    c: Vec<Complex64>,
    /// Inner stationarity relative to `sup|A|^{α-1}f`.
    kkt: Option<f64>,
    iterations: usize,
    history: Vec<IterationRecord>,
}

fn finish(
    cand: Candidate,
    class_f: &DensityClassF,
    class_g: Option<&GClass>,
    big_a: &[Complex64],
    opts: &MinimaxOptions,
) -> MinimaxSolution {
    let Candidate {
        alpha,
        f,
        g,
        h,
        c,
        kkt,
        iterations,
        history,
    } = cand;
    let beta = class_f.beta;
    let u: Vec<f64> = big_a.iter().zip(&h.grid_values).map(|(a, h)| (a - h).norm().powf(alpha)).collect();
    let uf: Vec<f64> = u.iter().zip(&f).map(|(x, y)| x * y).collect();
    let gamma1 = grid::mean(&uf) / class_f.moment(&f);
    let usup = u.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let f_equation = u
        .iter()
        .zip(&f)
        .map(|(x, y)| (x - gamma1 * y.powf(beta - 1.0)).abs())
        .fold(0.0, f64::max)
        / usup;
    let p1_relative = (class_f.moment(&f) - class_f.p1).abs() / class_f.p1;

    let (gamma2, phi1, complementarity, p2_relative) = match (class_g, &g) {
        (Some(class), Some(gv)) => {
            let v: Vec<f64> = h.grid_values.iter().map(|h| h.norm().powf(alpha)).collect();
            let gamma2 = v.iter().copied().fold(0.0, f64::max);
            let phi1: Vec<f64> = v.iter().map(|x| x - gamma2).collect();
            let target = grid::mean(&class.lower) + class.excess;
            // Product form: contamination mass may only sit where φ_1 = 0.
            let comp = if class.excess > 0.0 && gamma2 > 0.0 {
                (0..gv.len())
                    .map(|i| (gv[i] - class.lower[i]) / class.excess * phi1[i].abs() / gamma2)
                    .fold(0.0, f64::max)
            } else {
                0.0
            };
            let p2 = (grid::mean(gv) - target).abs() / target;
            (Some(gamma2), Some(phi1), Some(comp), Some(p2))
        }
        _ => (None, None, None, None),
    };
    let error_value = error_functional(alpha, big_a, &h.grid_values, &f, g.as_deref());
    let mut out = MinimaxSolution {
        f0: SpectralDensity::tabulated(f.clone()),
        g0: g.clone().map(SpectralDensity::tabulated),
        h0: h,
        c,
        gamma1,
        gamma2,
        phi1,
        error_value,
        residuals: MinimaxResiduals {
            p1_relative,
            p2_relative,
            f_equation,
            complementarity,
            kkt,
        },
        certificate: None,
        iterations,
        history,
        eigen: None,
        warnings: Vec::new(),
    };
    if opts.certificate_samples > 0 {
        let cert = saddle_certificate(alpha, big_a, &out.h0, &f, g.as_deref(), class_f, class_g, opts);
        if !cert.passes {
            out.warnings.push(format!(
                "saddle certificate failed: right {:.3e}, left {:.3e}",
                cert.right_violation, cert.left_violation
            ));
        }
        out.certificate = Some(cert);
    }
    out
}

/// Random smooth positive function `exp(Σ_{k≤4} (u_k cos kθ + v_k sin kθ))`.
fn random_shape(rng: &mut ChaCha8Rng, grid: Grid, amplitude: f64) -> Vec<f64> {
    let coeffs: Vec<(f64, f64)> = (1..=4)
        .map(|_| (rng.random_range(-amplitude..amplitude), rng.random_range(-amplitude..amplitude)))
        .collect();
    grid.thetas()
        .iter()
        .map(|t| {
            coeffs
                .iter()
                .enumerate()
                .map(|(k, (u, v))| u * ((k + 1) as f64 * t).cos() + v * ((k + 1) as f64 * t).sin())
                .sum::<f64>()
                .exp()
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn saddle_certificate(
    alpha: f64,
    big_a: &[Complex64],
    h0: &SpectralCharacteristic,
    f0: &[f64],
    g0: Option<&[f64]>,
    class_f: &DensityClassF,
    class_g: Option<&GClass>,
    opts: &MinimaxOptions,
) -> SaddleCertificate {
    let grid = Grid::of_len(f0.len());
    let base = error_functional(alpha, big_a, &h0.grid_values, f0, g0);
    let hnorm = h0.negative_coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-3);
    let results: Vec<(f64, f64)> = (0..opts.certificate_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(i as u64);
            // Right half: a feasible (f, g) mixed with the candidate.
            let t: f64 = rng.random_range(0.0..1.0);
            let mut shape = random_shape(&mut rng, grid, 1.0);
            class_f.normalize(&mut shape);
            let mut f: Vec<f64> = f0.iter().zip(&shape).map(|(a, b)| (1.0 - t) * a + t * b).collect();
            class_f.normalize(&mut f);
            let g = class_g.zip(g0).map(|(c, g0)| {
                let w = random_shape(&mut rng, grid, 1.0);
                let wm = grid::mean(&w);
                g0.iter()
                    .zip(&c.lower)
                    .zip(&w)
                    .map(|((g0, lb), w)| (1.0 - t) * g0 + t * (lb + c.excess * w / wm))
                    .collect::<Vec<f64>>()
            });
            let right = error_functional(alpha, big_a, &h0.grid_values, &f, g.as_deref()) - base;
            // Left half: a nearby one-sided h.
            let scale = hnorm * rng.random_range(1e-3..0.3);
            let coeffs: Vec<Complex64> = h0
                .negative_coeffs
                .iter()
                .map(|z| z + Complex64::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale)))
                .collect();
            let h = crate::extrap_gauss::synthesize_negative(&coeffs, grid);
            let left = base - error_functional(alpha, big_a, &h, f0, g0);
            (right, left)
        })
        .collect();
    let right_violation = results.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
    let left_violation = results.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    SaddleCertificate {
        samples: opts.certificate_samples,
        right_violation,
        left_violation,
        slack: opts.saddle_slack,
        passes: right_violation <= opts.saddle_slack && left_violation <= opts.saddle_slack,
    }
}

fn start_f(class_f: &DensityClassF, grid_size: usize, initial: Option<&[f64]>) -> Result<Vec<f64>> {
    match initial {
        Some(f) if f.len() == grid_size => {
            let mut f = f.to_vec();
            class_f.normalize(&mut f);
            Ok(f)
        }
        Some(f) => Err(Error::validation(format!(
            "initial density has {} values, grid has {grid_size}",
            f.len()
        ))),
        None => Ok(class_f.white_start(grid_size)),
    }
}

fn prepare(
    class_f: &DensityClassF,
    class_g: Option<&DensityClassG>,
    a: &FunctionalCoeffs,
    grid_size: usize,
) -> Result<(Grid, Option<GClass>)> {
    class_f.validate()?;
    if a.is_zero() {
        return Err(Error::validation("the functional a is zero; every density is least favorable"));
    }
    let grid = Grid::new(grid_size)?;
    let gc = class_g
        .map(|c| {
            c.validate()?;
            c.lower_bound(grid_size).map(|(lower, excess)| GClass { lower, excess })
        })
        .transpose()?;
    Ok((grid, gc))
}

fn unsupported_beta_one() -> Error {
    Error::Unsupported(
        "beta = 1 with noisy observations: the f-equation |A-h|^α = γ1 has no density solution in general; \
         use the noiseless routes"
            .into(),
    )
}

/// Noisy classes: barrier solve of `W`, then the inner solver at the
/// resulting densities for an exactly optimal `h`.
#[allow(clippy::too_many_arguments)]
fn noisy(
    alpha: f64,
    class_f: &DensityClassF,
    class_g: &DensityClassG,
    a: &FunctionalCoeffs,
    m: usize,
    grid_size: usize,
    opts: &MinimaxOptions,
) -> Result<MinimaxSolution> {
    if class_f.beta == 1.0 {
        return Err(unsupported_beta_one());
    }
    let (grid, gc) = prepare(class_f, Some(class_g), a, grid_size)?;
    let gc = gc.expect("noise class present");
    if m == 0 || grid_size < 4 * m {
        return Err(Error::Resolution { max_lag: m, grid_size });
    }
    let big_a = a.symbol_on_grid(grid);
    let out = solve_barrier(alpha, class_f, &gc, grid, &big_a, m, opts)?;
    let h = SpectralCharacteristic::from_coeffs(out.coeffs, grid, alpha);
    let (c, kkt, _) = stationarity(alpha, &big_a, &h.grid_values, &out.f, Some(&out.g), m);
    let kkt = kkt / kkt_scale(alpha, &big_a, &out.f).max(f64::MIN_POSITIVE);
    let cand = Candidate {
        alpha,
        f: out.f,
        g: Some(out.g),
        h,
        c,
        kkt: Some(kkt),
        iterations: out.newton_steps,
        history: out.history,
    };
    Ok(finish(cand, class_f, Some(&gc), &big_a, opts))
}

/// Least favorable `(f0, g0)` for noisy SαS observations, `β > 1`, with `M`
/// past coefficients in the characteristic.
pub fn least_favorable_stable(
    alpha: f64,
    class_f: &DensityClassF,
    class_g: &DensityClassG,
    a: &FunctionalCoeffs,
    m: usize,
    grid_size: usize,
    opts: &MinimaxOptions,
) -> Result<MinimaxSolution> {
    check_alpha(alpha)?;
    noisy(alpha, class_f, class_g, a, m, grid_size, opts)
}

/// Least favorable `f0` for noiseless SαS observations, any `β ≥ 1`, by
/// iterating `f0 ∝ |C|^{α/(α+(α-1)(β-1))}` against the dual solver.
pub fn least_favorable_stable_noiseless(
    alpha: f64,
    class_f: &DensityClassF,
    a: &FunctionalCoeffs,
    m: usize,
    grid_size: usize,
    opts: &MinimaxOptions,
    initial_f: Option<&[f64]>,
) -> Result<MinimaxSolution> {
    check_alpha(alpha)?;
    let (grid, _) = prepare(class_f, None, a, grid_size)?;
    let fp = FixedPoint {
        inner: Inner::Dual { alpha, m },
        class_f,
        a,
        big_a: a.symbol_on_grid(grid),
        opts: *opts,
        closed_form: Some(noiseless_exponent(alpha, class_f.beta)),
    };
    noiseless(fp, grid_size, initial_f)
}

fn noiseless(fp: FixedPoint<'_>, grid_size: usize, initial_f: Option<&[f64]>) -> Result<MinimaxSolution> {
    let state = fp.solve(start_f(fp.class_f, grid_size, initial_f)?)?;
    let cand = Candidate {
        alpha: fp.inner.alpha(),
        f: state.f,
        g: None,
        h: state.sol.h,
        c: state.sol.c,
        kkt: None,
        iterations: state.iterations,
        history: state.history,
    };
    Ok(finish(cand, fp.class_f, None, &fp.big_a, &fp.opts))
}

/// Least favorable densities for stationary sequences (`α = 2`) with `N`
/// past coefficients. Without a noise class the density is iterated against
/// the operator solver (`β > 1`) or the closed form `f0 ∝ |C|` (`β = 1`);
/// with one, `W` is minimized directly.
pub fn least_favorable_gauss(
    class_f: &DensityClassF,
    class_g: Option<&DensityClassG>,
    a: &FunctionalCoeffs,
    n: usize,
    grid_size: usize,
    opts: &MinimaxOptions,
    initial_f: Option<&[f64]>,
) -> Result<MinimaxSolution> {
    if let Some(cg) = class_g {
        return noisy(2.0, class_f, cg, a, n, grid_size, opts);
    }
    let (grid, _) = prepare(class_f, None, a, grid_size)?;
    let beta_one = class_f.beta == 1.0;
    let fp = FixedPoint {
        inner: if beta_one { Inner::Dual { alpha: 2.0, m: n } } else { Inner::Gauss { n } },
        class_f,
        a,
        big_a: a.symbol_on_grid(grid),
        opts: *opts,
        closed_form: beta_one.then(|| noiseless_exponent(2.0, 1.0)),
    };
    noiseless(fp, grid_size, initial_f)
}

/// The operator whose top singular vector gives the least favorable factor.
pub fn eigen_operator(a: &FunctionalCoeffs, n: usize, mode: EigenMode) -> DMatrix<Complex64> {
    let a = a.as_slice();
    let at = |k: isize| -> Complex64 {
        if k >= 0 && (k as usize) < a.len() {
            a[k as usize]
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    DMatrix::from_fn(n, n, |i, j| match mode {
        EigenMode::Symmetric => at((i + j) as isize),
        EigenMode::LowerTriangular => at(i as isize - j as isize),
    })
}

/// Power iteration on `A^H A`, optionally restricted to the orthogonal
/// complement of `deflate`. Returns `(σ², unit vector, converged)`.
fn power_iteration(
    gram: &DMatrix<Complex64>,
    start: DVector<Complex64>,
    deflate: Option<&DVector<Complex64>>,
) -> (f64, DVector<Complex64>, bool) {
    let project = |v: &mut DVector<Complex64>| {
        if let Some(d) = deflate {
            let c = d.dotc(v);
            *v -= d * c;
        }
    };
    let mut v = start;
    project(&mut v);
    let norm = v.norm();
    if norm == 0.0 {
        return (0.0, v, true);
    }
    v /= Complex64::new(norm, 0.0);
    let mut lambda = 0.0;
    for _ in 0..100_000 {
        let mut w = gram * &v;
        project(&mut w);
        lambda = v.dotc(&w).re;
        let wn = w.norm();
        if wn == 0.0 {
            return (0.0, v, true);
        }
        let residual = (&w - &v * Complex64::new(lambda, 0.0)).norm();
        v = w / Complex64::new(wn, 0.0);
        if residual <= 1e-13 * lambda.abs() {
            return (lambda, v, true);
        }
    }
    (lambda, v, false)
}

/// Maximizes `‖Aφ‖²` over `‖φ‖² = P`, the least favorable factor for
/// noiseless stationary observations under `mean(f) = P`.
pub fn least_favorable_eigen(
    a: &FunctionalCoeffs,
    p: f64,
    n: usize,
    grid_size: usize,
    mode: EigenMode,
    opts: &MinimaxOptions,
) -> Result<MinimaxSolution> {
    if a.is_zero() {
        return Err(Error::validation("the functional a is zero"));
    }
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::domain(format!("P must be positive, got {p}")));
    }
    if n < a.len() {
        return Err(Error::validation(format!("operator size N = {n} is below len(a) = {}", a.len())));
    }
    let grid = Grid::new(grid_size)?;
    let op = eigen_operator(a, n, mode);
    let gram = op.adjoint() * &op;
    let e0 = DVector::from_fn(n, |i, _| Complex64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0));
    let generic = DVector::from_fn(n, |i, _| Complex64::from_polar(1.0 / (i + 1) as f64, 0.7 * i as f64));
    let (l0, v0, c0) = power_iteration(&gram, e0, None);
    let (l1, v1, c1) = power_iteration(&gram, generic, None);
    let (sigma2, mut phi, converged) = if l1 > l0 * (1.0 + 1e-12) { (l1, v1, c1) } else { (l0, v0, c0) };
    let second_start = DVector::from_fn(n, |i, _| Complex64::from_polar(1.0, 1.3 * i as f64 + 0.2));
    let (second, _, _) = power_iteration(&gram, second_start, Some(&phi));
    let degenerate = sigma2 - second <= 1e-8 * sigma2;

    // Canonical phase: φ_0 real and nonnegative when possible.
    if let Some(k) = (0..n).find(|&k| phi[k].norm() > 1e-12) {
        let phase = phi[k].conj() / phi[k].norm();
        phi *= phase;
    }
    let rayleigh = phi.dotc(&(&op * &phi));
    let phi_vec: Vec<Complex64> = phi.iter().copied().collect();
    let value = p * sigma2;

    let scale = p.sqrt();
    let factor = grid::synthesize_lags(grid, phi_vec.iter().enumerate().map(|(j, &c)| (-(j as isize), c * scale)));
    let f0: Vec<f64> = factor.iter().map(|z| z.norm_sqr()).collect();
    let mut warnings = Vec::new();
    if degenerate {
        warnings.push("top singular value is degenerate; returned one of several maximizers".into());
    }
    if !converged {
        warnings.push("power iteration hit its iteration cap".into());
    }
    let eigen = EigenInfo {
        mode,
        value,
        singular_value: sigma2.sqrt(),
        rayleigh,
        phi: phi_vec,
        second_value: p * second,
        degenerate,
        converged,
    };
    let gauss = match gauss_on_grid(&f0, None, a, n.max(4 * a.len()), false) {
        Ok(r) => r,
        Err(e) => {
            warnings.push(format!("no optimal characteristic for f0: {e}"));
            let mean_f = grid::mean(&f0);
            return Ok(MinimaxSolution {
                f0: SpectralDensity::tabulated(f0),
                g0: None,
                h0: SpectralCharacteristic::from_coeffs(vec![Complex64::new(0.0, 0.0); n], grid, 2.0),
                c: Vec::new(),
                gamma1: sigma2,
                gamma2: None,
                phi1: None,
                error_value: value,
                residuals: MinimaxResiduals {
                    p1_relative: (mean_f - p).abs() / p,
                    ..Default::default()
                },
                certificate: None,
                iterations: 0,
                history: Vec::new(),
                eigen: Some(eigen),
                warnings,
            });
        }
    };
    if mode == EigenMode::Symmetric && (gauss.error_value - value).abs() > 1e-6 * value {
        warnings.push(format!(
            "prediction error of f0 ({:.9}) differs from P·σ² ({value:.9}); the maximizer is not minimum phase",
            gauss.error_value
        ));
    }
    // Only the Hankel maximizer solves the β = 1 minimax problem, so only it
    // is certified as a saddle point.
    let cert_opts = MinimaxOptions {
        certificate_samples: if mode == EigenMode::Symmetric { opts.certificate_samples } else { 0 },
        ..*opts
    };
    let cand = Candidate {
        alpha: 2.0,
        f: f0,
        g: None,
        h: gauss.h,
        c: gauss.c.c,
        kkt: None,
        iterations: 0,
        history: Vec::new(),
    };
    let class_f = DensityClassF::new(1.0, p)?;
    let mut sol = finish(cand, &class_f, None, &a.symbol_on_grid(grid), &cert_opts);
    sol.eigen = Some(eigen);
    sol.warnings.extend(warnings);
    Ok(sol)
}
