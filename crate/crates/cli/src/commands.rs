//! One function per subcommand. Each resolves defaults, calls the library and
//! returns the result together with the parameters actually used.

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use stable_extrap::extrap_stable::DEFAULT_GRID as STABLE_GRID;
use stable_extrap::factorization::factorize_reciprocal;
use stable_extrap::grid::Grid;
use stable_extrap::minimax::{
    least_favorable_eigen, least_favorable_gauss, least_favorable_stable, least_favorable_stable_noiseless, EigenMode,
    MinimaxSolution,
};
use stable_extrap::spectral::{check_minimality, fourier_coeffs};
use stable_extrap::{
    extrapolate_noiseless_gauss, extrapolate_noisy_gauss, simulate_gauss, solve_stable_noiseless, solve_stable_noisy,
    SimulationConfig, StableProblem,
};

use crate::config::{Command, Route, RunConfig, DEFAULT_MAX_LAG, DEFAULT_ORDER, DEFAULT_REPLICATES, DEFAULT_TRUNCATION};
use crate::Failure;

/// Plot-ready table written by `--csv`.
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

pub struct Outcome {
    pub parameters: Value,
    pub result: Value,
    pub table: Table,
    pub warnings: Vec<String>,
    pub trace: Vec<String>,
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("library types serialize to JSON")
}

fn grid_table(grid_size: usize, columns: Vec<(&'static str, Vec<f64>)>) -> Table {
    let grid = Grid::new(grid_size).expect("grid size already validated");
    let mut header = vec!["theta"];
    header.extend(columns.iter().map(|(name, _)| *name));
    let rows = (0..grid_size)
        .map(|m| {
            let mut row = vec![grid.theta(m)];
            row.extend(columns.iter().map(|(_, col)| col[m]));
            row
        })
        .collect();
    Table { header, rows }
}

fn split(z: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    (z.iter().map(|c| c.re).collect(), z.iter().map(|c| c.im).collect())
}

pub fn run(command: Command, cfg: &RunConfig, mode: Option<EigenMode>) -> Result<Outcome, Failure> {
    if let Some(declared) = cfg.command {
        if declared != command {
            return Err(Failure::Input(format!(
                "config declares command `{}` but `{}` was invoked",
                declared.name(),
                command.name()
            )));
        }
    }
    match command {
        Command::Fourier => fourier(cfg),
        Command::Factorize => factorize(cfg),
        Command::Extrapolate => extrapolate(cfg),
        Command::Minimax => minimax(cfg, mode),
        Command::Simulate => simulate(cfg),
    }
}

fn fourier(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let f = cfg.density(Command::Fourier)?;
    let grid_size = cfg.grid();
    let max_lag = cfg.max_lag.unwrap_or(DEFAULT_MAX_LAG);
    let alpha = cfg.alpha.unwrap_or(2.0);
    let values = f.evaluate(grid_size)?;
    let coeffs = fourier_coeffs(&values, max_lag)?;
    let minimality = check_minimality(f, cfg.noise()?, alpha, grid_size);
    let rows = coeffs.iter().map(|(k, z)| vec![k as f64, z.re, z.im]).collect();
    Ok(Outcome {
        parameters: json!({ "grid_size": grid_size, "max_lag": max_lag, "alpha": alpha }),
        result: json!({ "coefficients": coeffs, "minimality": minimality }),
        table: Table {
            header: vec!["lag", "re", "im"],
            rows,
        },
        warnings: Vec::new(),
        trace: Vec::new(),
    })
}

fn factorize(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let f = cfg.density(Command::Factorize)?;
    let grid_size = cfg.grid();
    let order = cfg.order.unwrap_or(DEFAULT_ORDER);
    let fact = factorize_reciprocal(f, order, grid_size)?;
    let rows = fact
        .psi
        .iter()
        .zip(&fact.phi)
        .enumerate()
        .map(|(j, (p, q))| vec![j as f64, p.re, p.im, q.re, q.im])
        .collect();
    Ok(Outcome {
        parameters: json!({ "grid_size": grid_size, "order": order }),
        result: to_value(&fact),
        table: Table {
            header: vec!["j", "psi_re", "psi_im", "phi_re", "phi_im"],
            rows,
        },
        warnings: Vec::new(),
        trace: Vec::new(),
    })
}

fn extrapolate(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let f = cfg.density(Command::Extrapolate)?;
    let g = cfg.noise()?;
    let a = cfg.functional(Command::Extrapolate)?;
    let alpha = cfg.alpha.unwrap_or(2.0);
    if alpha == 2.0 {
        let n = cfg.truncation.unwrap_or(DEFAULT_TRUNCATION);
        let grid_size = cfg.grid();
        let rep = match g {
            Some(g) => extrapolate_noisy_gauss(f, g, &a, n, grid_size)?,
            None => extrapolate_noiseless_gauss(f, &a, n, grid_size)?,
        };
        let (re, im) = split(&rep.h.grid_values);
        return Ok(Outcome {
            parameters: json!({ "alpha": alpha, "route": "gauss", "truncation": n, "grid_size": grid_size }),
            result: to_value(&rep),
            table: grid_table(grid_size, vec![("h_re", re), ("h_im", im)]),
            warnings: rep.diagnostics.warnings.clone(),
            trace: Vec::new(),
        });
    }
    let mut problem = StableProblem::new(alpha, f.clone(), g.cloned(), a);
    if let Some(m) = cfg.truncation {
        problem = problem.with_truncation(m);
    }
    if let Some(gs) = cfg.grid_size {
        problem = problem.with_grid(gs);
    }
    let sol = if g.is_some() {
        solve_stable_noisy(&problem)?
    } else {
        solve_stable_noiseless(&problem)?
    };
    let (re, im) = split(&sol.h.grid_values);
    Ok(Outcome {
        parameters: json!({
            "alpha": alpha,
            "route": "stable",
            "truncation": problem.truncation,
            "grid_size": problem.grid_size,
        }),
        result: to_value(&sol),
        table: grid_table(problem.grid_size, vec![("h_re", re), ("h_im", im)]),
        warnings: Vec::new(),
        trace: sol.solver_trace.clone(),
    })
}

fn minimax(cfg: &RunConfig, mode_flag: Option<EigenMode>) -> Result<Outcome, Failure> {
    let cmd = Command::Minimax;
    let route = *RunConfig::require(&cfg.route, "route", cmd)?;
    let a = cfg.functional(cmd)?;
    let opts = cfg.options.unwrap_or_default();
    let mut parameters = json!({ "route": route, "options": opts });
    let (sol, grid_size): (MinimaxSolution, usize) = match route {
        Route::Eigen => {
            let mode = mode_flag.or(cfg.mode).unwrap_or_default();
            let p = cfg.p.unwrap_or(1.0);
            let n = cfg.truncation.unwrap_or(DEFAULT_TRUNCATION);
            let gs = cfg.grid();
            parameters["mode"] = to_value(&mode);
            parameters["p"] = json!(p);
            parameters["truncation"] = json!(n);
            (least_favorable_eigen(&a, p, n, gs, mode, &opts)?, gs)
        }
        Route::Gauss => {
            let cf = RunConfig::require(&cfg.class_f, "class_f", cmd)?;
            let n = cfg.truncation.unwrap_or(DEFAULT_TRUNCATION);
            let gs = cfg.grid();
            parameters["truncation"] = json!(n);
            (least_favorable_gauss(cf, cfg.class_g.as_ref(), &a, n, gs, &opts, None)?, gs)
        }
        Route::Stable | Route::StableNoiseless => {
            let alpha = *RunConfig::require(&cfg.alpha, "alpha", cmd)?;
            let cf = RunConfig::require(&cfg.class_f, "class_f", cmd)?;
            let m = cfg.truncation.unwrap_or(4 * a.len());
            let gs = cfg.grid_size.unwrap_or(STABLE_GRID.max(16 * m));
            parameters["alpha"] = json!(alpha);
            parameters["truncation"] = json!(m);
            let sol = if route == Route::Stable {
                let cg = RunConfig::require(&cfg.class_g, "class_g", cmd)?;
                least_favorable_stable(alpha, cf, cg, &a, m, gs, &opts)?
            } else {
                least_favorable_stable_noiseless(alpha, cf, &a, m, gs, &opts, None)?
            };
            (sol, gs)
        }
    };
    parameters["grid_size"] = json!(grid_size);

    let f0 = sol.f0.evaluate(grid_size)?;
    let g0 = match &sol.g0 {
        Some(g) => g.evaluate(grid_size)?,
        None => vec![0.0; grid_size],
    };
    let (re, im) = split(&sol.h0.grid_values);
    let trace = sol
        .history
        .iter()
        .map(|r| format!("iteration {:>4}  error {:.12e}  change {:.3e}  gap {:.3e}", r.iteration, r.error, r.change, r.gap))
        .collect();
    Ok(Outcome {
        parameters,
        result: to_value(&sol),
        table: grid_table(grid_size, vec![("f0", f0), ("g0", g0), ("h0_re", re), ("h0_im", im)]),
        warnings: sol.warnings.clone(),
        trace,
    })
}

fn simulate(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let f = cfg.density(Command::Simulate)?;
    let g = cfg.noise()?;
    let a = cfg.functional(Command::Simulate)?;
    if cfg.alpha.is_some_and(|alpha| alpha != 2.0) {
        return Err(Failure::Input("simulate supports alpha = 2 only".into()));
    }
    let truncation = cfg.truncation.unwrap_or(DEFAULT_TRUNCATION);
    let sim = SimulationConfig {
        f: f.clone(),
        g: g.cloned(),
        a,
        replicates: cfg.replicates.unwrap_or(DEFAULT_REPLICATES),
        horizon: cfg.horizon.unwrap_or(truncation),
        seed: cfg.seed.unwrap_or(0),
        truncation,
        grid_size: cfg.grid(),
        perturbations: cfg.perturbations.unwrap_or(20),
    };
    let rep = simulate_gauss(&sim)?;
    let rows = rep
        .perturbations
        .iter()
        .enumerate()
        .map(|(i, p)| vec![i as f64, p.empirical_mse, p.change, p.standard_error])
        .collect();
    Ok(Outcome {
        parameters: json!({
            "replicates": sim.replicates,
            "horizon": sim.horizon,
            "seed": sim.seed,
            "truncation": sim.truncation,
            "grid_size": sim.grid_size,
            "perturbations": sim.perturbations,
        }),
        result: to_value(&rep),
        table: Table {
            header: vec!["perturbation", "empirical_mse", "change", "standard_error"],
            rows,
        },
        warnings: rep.warnings.clone(),
        trace: Vec::new(),
    })
}
