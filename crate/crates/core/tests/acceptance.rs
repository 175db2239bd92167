//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so every line is printed; exits non-zero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use common::{descent_minimize, random_coeffs, random_rational, stationarity_residual, thetas, DirectFunctional};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stable_extrap::factorization::factorize_reciprocal;
use stable_extrap::minimax::{
    least_favorable_eigen, least_favorable_gauss, least_favorable_stable, least_favorable_stable_noiseless,
    DensityClassF, DensityClassG, EigenMode, MinimaxOptions, MinimaxSolution,
};
use stable_extrap::operators::b_inverse_via_phi;
use stable_extrap::{
    extrapolate_noiseless_gauss, extrapolate_noisy_gauss, simulate_gauss, solve_stable_noiseless, solve_stable_noisy,
    FunctionalCoeffs, SimulationConfig, SpectralDensity, StableProblem, StableSolution,
};

const RHO: f64 = 0.5;

type Check = Result<String, String>;

fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(f64::MIN_POSITIVE)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("runtime {elapsed:.2?} exceeds {limit:?}"))
}

fn real(a: &[f64]) -> FunctionalCoeffs {
    FunctionalCoeffs::from_real(a).unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn ar_half() -> SpectralDensity {
    SpectralDensity::ar1(RHO)
}

/// Prediction error of `Σ a_j ξ_j` from the past of an AR(1) sequence with
/// unit innovations: `Σ_m |Σ_{j≥m} a_j ρ^{j-m}|²`.
fn ar1_error(a: &[Complex64], rho: f64) -> f64 {
    (0..a.len())
        .map(|m| a[m..].iter().enumerate().map(|(i, x)| x * rho.powi(i as i32)).sum::<Complex64>().norm_sqr())
        .sum()
}

fn criterion_1() -> Check {
    let cases = [
        vec![c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)],
        vec![c(0.3, 0.0), c(-2.0, 0.0), c(0.7, 0.0)],
        vec![c(1.0, 1.0), c(0.5, 0.0), c(0.0, -0.25)],
    ];
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for a in &cases {
        let rep = extrapolate_noiseless_gauss(&ar_half(), &FunctionalCoeffs::new(a.clone()).unwrap(), 128, 2048)
            .map_err(|e| e.to_string())?;
        let k = a[0] * RHO + a[1] * RHO.powi(2) + a[2] * RHO.powi(3);
        for (h, t) in rep.h.grid_values.iter().zip(thetas(2048)) {
            worst = worst.max((h - k * Complex64::from_polar(1.0, -t)).norm());
        }
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    ensure(worst < 1e-6, || format!("sup error {worst:.3e}"))?;
    Ok(format!("sup |h - (a0ρ + a1ρ² + a2ρ³)e^(-iθ)| = {worst:.2e} over {} functionals", cases.len()))
}

fn criterion_2() -> Check {
    let start = Instant::now();
    let a = real(&[1.0, 1.0, 1.0]);
    let rep = extrapolate_noiseless_gauss(&ar_half(), &a, 128, 2048).map_err(|e| e.to_string())?;
    within(start.elapsed(), Duration::from_secs(1))?;
    let d = &rep.diagnostics;
    let routes = [
        ("quadrature", d.error_quadrature),
        ("<B^-1 a, a>", d.error_bilinear),
        ("|A phi|^2", d.error_factor.unwrap_or(f64::NAN)),
    ];
    let oracle = ar1_error(a.as_slice(), RHO);
    ensure(rel(oracle, 6.3125) < 1e-15, || format!("oracle gives {oracle}"))?;
    for (name, v) in routes {
        ensure(rel(v, 6.3125) < 1e-6, || format!("{name} route gives {v}"))?;
    }
    Ok(format!(
        "quadrature {:.10}, bilinear {:.10}, factor {:.10}",
        routes[0].1, routes[1].1, routes[2].1
    ))
}

fn criterion_3() -> Check {
    let fact = factorize_reciprocal(&ar_half(), 32, 1024).map_err(|e| e.to_string())?;
    let binv = b_inverse_via_phi(&fact, 6);
    let mut worst: f64 = 0.0;
    for k in 0..6 {
        for j in 0..6 {
            let expected: f64 = (0..=k.min(j)).map(|m| RHO.powi((k - m) as i32) * RHO.powi((j - m) as i32)).sum();
            worst = worst.max((binv[(k, j)] - c(expected, 0.0)).norm());
        }
    }
    // The displayed pattern: first row ρ^j, (1,1) = ρ·ρ + 1.
    for j in 0..6 {
        ensure((binv[(0, j)].re - RHO.powi(j as i32)).abs() < 1e-8, || format!("(0,{j}) = {}", binv[(0, j)]))?;
    }
    ensure((binv[(1, 1)].re - (RHO * RHO + 1.0)).abs() < 1e-8, || format!("(1,1) = {}", binv[(1, 1)]))?;
    ensure(worst < 1e-8, || format!("max entry error {worst:.3e}"))?;
    Ok(format!("6x6 block, max entry error {worst:.2e}"))
}

fn criterion_4() -> Check {
    let a = real(&[1.0, 2.0]);
    let opts = MinimaxOptions::default();
    let sym = least_favorable_eigen(&a, 1.0, 2, 2048, EigenMode::Symmetric, &opts).map_err(|e| e.to_string())?;
    let tri = least_favorable_eigen(&a, 1.0, 2, 2048, EigenMode::LowerTriangular, &opts).map_err(|e| e.to_string())?;
    let top = sym.eigen.as_ref().unwrap().rayleigh.re;
    let gram = tri.eigen.as_ref().unwrap().value;
    let want_sym = (1.0 + 17f64.sqrt()) / 2.0;
    let want_tri = 3.0 + 2.0 * 2f64.sqrt();
    ensure((top - want_sym).abs() < 1e-10, || format!("symmetric top eigenvalue {top}"))?;
    ensure((gram - want_tri).abs() < 1e-10, || format!("lower-triangular top value {gram}"))?;
    ensure((top - gram).abs() > 1.0, || "interpretations coincide".into())?;
    Ok(format!(
        "symmetric (1+√17)/2 = {top:.12}; lower-triangular 3+2√2 = {gram:.12}; they differ"
    ))
}

/// `(f, g, a)` for the α = 2 reduction.
fn reduction_instances() -> Vec<(SpectralDensity, SpectralDensity, FunctionalCoeffs)> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    (0..10)
        .map(|case| {
            let f = random_rational(&mut rng, 0.5);
            let g = random_rational(&mut rng, 0.5);
            let a = (0..1 + case % 3).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            (f, g, FunctionalCoeffs::new(a).unwrap())
        })
        .collect()
}

fn criterion_5() -> Check {
    let start = Instant::now();
    let (n, grid) = (32, 1024);
    let (mut h_worst, mut e_worst): (f64, f64) = (0.0, 0.0);
    for (case, (f, g, a)) in reduction_instances().into_iter().enumerate() {
        let gauss = extrapolate_noisy_gauss(&f, &g, &a, n, grid).map_err(|e| format!("case {case}: {e}"))?;
        let p = StableProblem::new(2.0, f, Some(g), a).with_truncation(n).with_grid(grid);
        let stable = solve_stable_noisy(&p).map_err(|e| format!("case {case}: {e}"))?;
        let dh = stable
            .h
            .negative_coeffs
            .iter()
            .zip(&gauss.h.negative_coeffs)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        h_worst = h_worst.max(dh);
        e_worst = e_worst.max(rel(stable.error_value, gauss.error_value));
    }
    within(start.elapsed(), Duration::from_secs(30))?;
    ensure(h_worst < 1e-6 && e_worst < 1e-6, || format!("sup h gap {h_worst:.3e}, error gap {e_worst:.3e}"))?;
    Ok(format!("10 instances: sup h gap {h_worst:.2e}, relative error gap {e_worst:.2e}"))
}

/// Five instances per α with `M = 8`; the last of each five is noiseless.
fn stable_instances() -> Vec<StableProblem> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut out = Vec::new();
    for alpha in [1.3, 1.5, 1.8] {
        for case in 0..5 {
            let f = random_rational(&mut rng, 0.5);
            let g = (case < 4).then(|| random_rational(&mut rng, 0.5));
            let a = real(&random_coeffs(&mut rng, 1 + case % 2));
            out.push(StableProblem::new(alpha, f, g, a).with_truncation(8).with_grid(512));
        }
    }
    out
}

fn solve_stable(p: &StableProblem) -> Result<StableSolution, String> {
    let sol = if p.g.is_some() { solve_stable_noisy(p) } else { solve_stable_noiseless(p) };
    sol.map_err(|e| format!("α = {}: {e}", p.alpha))
}

fn criterion_6() -> Check {
    let start = Instant::now();
    let (mut e_worst, mut kkt_worst): (f64, f64) = (0.0, 0.0);
    for p in stable_instances() {
        let sol = solve_stable(&p)?;
        let grid = p.grid_size;
        let fv = p.f.evaluate(grid).unwrap();
        let gv = p.g.as_ref().map_or(vec![0.0; grid], |g| g.evaluate(grid).unwrap());
        let kkt = stationarity_residual(p.alpha, p.a.as_slice(), &fv, &gv, &sol.h.grid_values, p.truncation);
        kkt_worst = kkt_worst.max(kkt);
        let oracle = DirectFunctional::new(p.alpha, fv, gv, p.a.as_slice(), p.truncation);
        let (_, value) = descent_minimize(&oracle, 20_000);
        e_worst = e_worst.max(rel(sol.error_value, value));
    }
    within(start.elapsed(), Duration::from_secs(300))?;
    ensure(e_worst < 1e-5, || format!("Newton and descent errors differ by {e_worst:.3e}"))?;
    ensure(kkt_worst < 1e-6, || format!("KKT residual {kkt_worst:.3e}"))?;
    Ok(format!("15 instances: error gap {e_worst:.2e}, KKT residual {kkt_worst:.2e}"))
}

fn criterion_7() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (order, grid) = (64, 1024);
    let fine = thetas(4096);
    let (mut synth_worst, mut conv_worst): (f64, f64) = (0.0, 0.0);
    for case in 0..20 {
        let f = random_rational(&mut rng, 0.7);
        let fact = factorize_reciprocal(&f, order, grid).map_err(|e| format!("case {case}: {e}"))?;
        for &t in &fine {
            let s: Complex64 = fact.psi.iter().enumerate().map(|(j, p)| p * Complex64::from_polar(1.0, -(j as f64) * t)).sum();
            synth_worst = synth_worst.max((s.norm_sqr() * f.value_at(t) - 1.0).abs());
        }
        for k in 0..=order {
            let conv: Complex64 = (0..=k).map(|j| fact.psi[j] * fact.phi[k - j]).sum();
            let target = if k == 0 { 1.0 } else { 0.0 };
            conv_worst = conv_worst.max((conv - target).norm());
        }
    }
    ensure(synth_worst < 1e-6, || format!("sup ||ψ|²f - 1| = {synth_worst:.3e}"))?;
    ensure(conv_worst < 1e-8, || format!("ψ * φ differs from the impulse by {conv_worst:.3e}"))?;

    let fact = factorize_reciprocal(&ar_half(), 16, 256).map_err(|e| e.to_string())?;
    let mut ex_worst: f64 = 0.0;
    for j in 0..=16 {
        let psi = match j {
            0 => 1.0,
            1 => -RHO,
            _ => 0.0,
        };
        ex_worst = ex_worst.max((fact.psi[j] - psi).norm()).max((fact.phi[j] - RHO.powi(j as i32)).norm());
    }
    ensure(ex_worst < 1e-8, || format!("AR(1) factors off by {ex_worst:.3e}"))?;
    Ok(format!(
        "20 densities: synthesis {synth_worst:.2e}, inversion {conv_worst:.2e}; ψ = (1, -ρ), φ = ρ^j to {ex_worst:.2e}"
    ))
}

fn certify(name: &str, sol: &MinimaxSolution) -> Result<String, String> {
    let r = &sol.residuals;
    ensure(r.p1_relative < 1e-6, || format!("{name}: P1 residual {:.3e}", r.p1_relative))?;
    if let Some(p2) = r.p2_relative {
        ensure(p2 < 1e-6, || format!("{name}: P2 residual {p2:.3e}"))?;
    }
    if let Some(comp) = r.complementarity {
        ensure(comp < 1e-6, || format!("{name}: complementarity {comp:.3e}"))?;
    }
    let cert = sol.certificate.as_ref().ok_or_else(|| format!("{name}: no saddle certificate"))?;
    ensure(cert.samples == 200, || format!("{name}: {} saddle samples", cert.samples))?;
    ensure(
        cert.passes && cert.right_violation <= 1e-5 && cert.left_violation <= 1e-5,
        || format!("{name}: saddle violations {:.3e} / {:.3e}", cert.right_violation, cert.left_violation),
    )?;
    Ok(format!(
        "{name} (saddle {:.1e}/{:.1e})",
        cert.right_violation.max(0.0),
        cert.left_violation.max(0.0)
    ))
}

/// Minimax instances; `n` and `grid` apply to the stationary routes, the
/// stable routes keep their own `M` and use `grid` too.
fn minimax_instances(n: usize, grid: usize) -> Vec<(&'static str, stable_extrap::Result<MinimaxSolution>)> {
    let opts = MinimaxOptions::default();
    let a = real(&[1.0, 0.5]);
    let a3 = real(&[1.0, -0.4, 0.2]);
    let b1 = DensityClassF::new(1.0, 1.0).unwrap();
    let b2 = DensityClassF::new(2.0, 1.0).unwrap();
    let b15 = DensityClassF::new(1.5, 2.0).unwrap();
    let contaminated = DensityClassG::new(0.5, SpectralDensity::white(1.0), 1.0).unwrap();
    let shaped = DensityClassG::new(0.3, SpectralDensity::ar1(0.4), 1.5).unwrap();
    let budget = DensityClassG::new(1.0, SpectralDensity::white(1.0), 0.8).unwrap();
    vec![
        ("gauss noisy", least_favorable_gauss(&b2, Some(&contaminated), &a, n, grid, &opts, None)),
        ("gauss ε = 1", least_favorable_gauss(&b2, Some(&budget), &a, n, grid, &opts, None)),
        ("gauss noiseless β = 2", least_favorable_gauss(&b2, None, &a, n, grid, &opts, None)),
        ("fixed point β = 1", least_favorable_gauss(&b1, None, &a, n, grid, &opts, None)),
        ("eigen", least_favorable_eigen(&a, 1.0, n, grid, EigenMode::Symmetric, &opts)),
        ("stable α = 1.5", least_favorable_stable(1.5, &b2, &contaminated, &a, 8, grid, &opts)),
        ("stable α = 1.3", least_favorable_stable(1.3, &b15, &shaped, &a3, 12, grid, &opts)),
        ("stable noiseless", least_favorable_stable_noiseless(1.6, &b2, &a, 8, grid, &opts, None)),
    ]
}

fn criterion_8() -> Check {
    let grid = 1024;
    let mut lines = Vec::new();
    let mut f0 = std::collections::BTreeMap::new();
    for (name, sol) in minimax_instances(32, grid) {
        let sol = sol.map_err(|e| format!("{name}: {e}"))?;
        lines.push(certify(name, &sol)?);
        f0.insert(name, sol.f0.evaluate(grid).unwrap());
    }
    let (fixed, eigen) = (&f0["fixed point β = 1"], &f0["eigen"]);
    let scale = eigen.iter().copied().fold(0.0, f64::max);
    let gap = fixed.iter().zip(eigen).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale;
    ensure(gap < 1e-4, || format!("fixed point and eigen f0 differ by {gap:.3e}"))?;
    Ok(format!("{}; fixed point vs eigen f0 {gap:.2e}", lines.join(", ")))
}

/// Name, signal, noise and the known optimal error where there is one.
fn monte_carlo_instances() -> [(&'static str, SpectralDensity, Option<SpectralDensity>, f64); 3] {
    [
        ("AR(1) noiseless", ar_half(), None, 1.0),
        ("white + white", SpectralDensity::white(1.0), Some(SpectralDensity::white(1.0)), 1.0),
        ("AR(1) + white", ar_half(), Some(SpectralDensity::white(1.0)), f64::NAN),
    ]
}

fn criterion_9() -> Check {
    let start = Instant::now();
    let mut parts = Vec::new();
    for (i, (name, f, g, expected)) in monte_carlo_instances().into_iter().enumerate() {
        let cfg = SimulationConfig::new(f, g, real(&[1.0]), 100_000, 128, 900 + i as u64);
        let rep = simulate_gauss(&cfg).map_err(|e| format!("{name}: {e}"))?;
        if expected.is_finite() {
            ensure(rel(rep.theoretical, expected) < 1e-6, || format!("{name}: theoretical {}", rep.theoretical))?;
        }
        ensure(rep.z_score.abs() <= 3.0, || {
            format!("{name}: empirical {:.5} vs {:.5}, z = {:.2}", rep.empirical_mse, rep.theoretical, rep.z_score)
        })?;
        ensure(rep.witness_passes, || format!("{name}: a weight perturbation lowered the MSE"))?;
        let min_z = rep
            .perturbations
            .iter()
            .map(|p| p.change / p.standard_error)
            .fold(f64::INFINITY, f64::min);
        parts.push(format!("{name} z = {:+.2} (witness min z {min_z:+.1})", rep.z_score));
    }
    within(start.elapsed(), Duration::from_secs(120))?;
    Ok(parts.join(", "))
}

/// Largest relative change of an error value under a refinement.
#[derive(Default)]
struct Drift {
    worst: f64,
    name: String,
    count: usize,
}

impl Drift {
    fn track(&mut self, name: &str, base: f64, refined: f64) {
        let r = rel(refined, base);
        self.count += 1;
        if r >= self.worst {
            self.worst = r;
            self.name = name.to_owned();
        }
    }
}

fn criterion_10() -> Check {
    const N: usize = 128;
    const G: usize = 2048;
    let e = |x: stable_extrap::Error| x.to_string();
    let mut drift = Drift::default();

    for (i, a) in [real(&[1.0, 1.0, 1.0]), real(&[0.3, -2.0, 0.7])].iter().enumerate() {
        let run = |n, gs| extrapolate_noiseless_gauss(&ar_half(), a, n, gs).map(|r| r.error_value);
        drift.track(&format!("AR(1) functional {i}"), run(N, G).map_err(e)?, run(2 * N, 2 * G).map_err(e)?);
    }
    for (name, f, g, _) in monte_carlo_instances() {
        let a = real(&[1.0]);
        let run = |n, gs| match &g {
            Some(g) => extrapolate_noisy_gauss(&f, g, &a, n, gs),
            None => extrapolate_noiseless_gauss(&f, &a, n, gs),
        };
        let (x, y) = (run(N, G).map_err(e)?, run(2 * N, 2 * G).map_err(e)?);
        drift.track(name, x.error_value, y.error_value);
    }
    for (case, (f, g, a)) in reduction_instances().iter().enumerate() {
        let run = |n, gs| extrapolate_noisy_gauss(f, g, a, n, gs).map(|r| r.error_value);
        drift.track(&format!("reduction case {case}"), run(N, G).map_err(e)?, run(2 * N, 2 * G).map_err(e)?);
    }
    for (case, p) in stable_instances().into_iter().enumerate() {
        let base = solve_stable(&p.clone().with_grid(G))?.error_value;
        let refined = solve_stable(&p.with_grid(2 * G))?.error_value;
        drift.track(&format!("stable case {case}"), base, refined);
    }
    let eig = |n, gs| least_favorable_eigen(&real(&[1.0, 2.0]), 1.0, n, gs, EigenMode::Symmetric, &MinimaxOptions::default());
    drift.track("eigen a = (1, 2)", eig(N, G).map_err(e)?.error_value, eig(2 * N, 2 * G).map_err(e)?.error_value);
    for ((name, base), (_, refined)) in minimax_instances(N, G).into_iter().zip(minimax_instances(2 * N, 2 * G)) {
        let (base, refined) = (base.map_err(e)?, refined.map_err(e)?);
        drift.track(name, base.error_value, refined.error_value);
    }

    ensure(drift.worst < 1e-5, || format!("{} changes by {:.3e}", drift.name, drift.worst))?;
    Ok(format!(
        "{} error values, largest relative change {:.2e} ({})",
        drift.count, drift.worst, drift.name
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("AR(1) spectral characteristic", criterion_1),
        ("AR(1) error value, three routes", criterion_2),
        ("AR(1) inverse-operator entries", criterion_3),
        ("eigen route numbers for a = (1, 2)", criterion_4),
        ("alpha = 2 reduction", criterion_5),
        ("stable solver certificate", criterion_6),
        ("factorization suite", criterion_7),
        ("minimax certificate", criterion_8),
        ("Monte Carlo", criterion_9),
        ("truncation convergence", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} [{secs:.2}s]: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name} [{secs:.2}s]: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
