//! Subcommand implementations.
//!
//! Every command prints one `check <name>: PASS|FAIL` line per check it runs
//! and returns whether all of them passed; `--quiet` suppresses the PASS
//! lines and informational output, never failures.

use crate::config::{parse_config, RunConfig};
use crate::output;
use backstep_core::bessel;
use backstep_core::goursat::GoursatGrid;
use backstep_core::simulator::{
    make_compatible_initial, run_decay_experiment, run_dependence_experiment, SimConfig,
};
use backstep_core::solver::{
    check_bound, extract_gains, solve_kernel, uniqueness_probe, KernelField, KernelSolution,
};
use backstep_core::{validate_spec, CoreError, ProblemSpec};
use std::fmt;
use std::path::{Path, PathBuf};

const DEPENDENCE_ALPHAS: [f64; 3] = [1.0, 0.1, 0.01];
const UNIQUENESS_N_MAX: usize = 12;
const UNIQUENESS_REL_TOL: f64 = 1e-8;
const UNIQUENESS_ABS_FLOOR: f64 = 1e-13;
/// Refinement factor the interior residual must drop by under grid halving.
const RESIDUAL_RATIO_MIN: f64 = 2.5;

#[derive(Debug)]
pub enum CliError {
    Config(crate::config::ConfigError),
    Core(CoreError),
    Io(std::io::Error),
    Usage(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "io error: {e}"),
            CliError::Usage(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<crate::config::ConfigError> for CliError {
    fn from(e: crate::config::ConfigError) -> Self {
        CliError::Config(e)
    }
}
impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}
impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

#[derive(Debug, Clone)]
pub struct Options {
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub quiet: bool,
}

struct Reporter {
    quiet: bool,
    all_passed: bool,
}

impl Reporter {
    fn new(quiet: bool) -> Self {
        Self {
            quiet,
            all_passed: true,
        }
    }

    fn check(&mut self, name: &str, passed: bool, detail: &str) {
        if !passed {
            self.all_passed = false;
        }
        if passed && self.quiet {
            return;
        }
        let verdict = if passed { "PASS" } else { "FAIL" };
        if detail.is_empty() {
            println!("check {name}: {verdict}");
        } else {
            println!("check {name}: {verdict} ({detail})");
        }
    }

    fn skip(&self, name: &str, why: &str) {
        if !self.quiet {
            println!("check {name}: SKIP ({why})");
        }
    }

    fn info(&self, msg: &str) {
        if !self.quiet {
            println!("{msg}");
        }
    }
}

fn load(opts: &Options) -> Result<(RunConfig, PathBuf), CliError> {
    let text = std::fs::read_to_string(&opts.config)?;
    let cfg = parse_config(&text)?;
    let out_dir = opts
        .out
        .clone()
        .or_else(|| cfg.outputs.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir)?;
    Ok((cfg, out_dir))
}

fn t_horizon(cfg: &RunConfig) -> f64 {
    cfg.simulation.as_ref().map_or(1.0, |s| s.t_end)
}

/// Runs the standing-assumption report and prints one check line; returns
/// whether it passed.
fn assumptions_check(rep: &mut Reporter, cfg: &RunConfig) -> Result<bool, CliError> {
    let report = validate_spec(&cfg.problem, t_horizon(cfg), 101)?;
    let passed = report.all_passed();
    let detail = report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{}: {}", c.name, c.witness))
        .collect::<Vec<_>>()
        .join("; ");
    rep.check("assumptions", passed, &detail);
    Ok(passed)
}

fn solve(cfg: &RunConfig) -> Result<KernelSolution, CliError> {
    let grid = GoursatGrid::new(cfg.solver.n)?;
    Ok(solve_kernel(
        &cfg.problem,
        grid,
        cfg.solver.tol,
        cfg.solver.max_iter,
    )?)
}

fn bound_check(rep: &mut Reporter, sol: &KernelSolution) {
    let b = check_bound(sol);
    rep.check(
        "maximum-bound",
        b.passed,
        &format!(
            "max|k| = {:.6e} at ({:.3}, {:.3}), bound = {:.6e}",
            b.max_abs, b.location.0, b.location.1, b.bound
        ),
    );
}

fn envelope_check(rep: &mut Reporter, sol: &KernelSolution) {
    rep.check(
        "factorial-envelope",
        sol.trace.within_envelope(),
        &format!("{} iterations", sol.iterations),
    );
}

pub fn cmd_solve_kernel(opts: &Options) -> Result<bool, CliError> {
    let (cfg, out_dir) = load(opts)?;
    let mut rep = Reporter::new(opts.quiet);
    if !assumptions_check(&mut rep, &cfg)? {
        return Ok(false);
    }
    let sol = solve(&cfg)?;
    bound_check(&mut rep, &sol);
    envelope_check(&mut rep, &sol);
    let gains = extract_gains(&sol, cfg.solver.gain_nodes)?;
    output::write_kernel_csv(&out_dir.join("kernel.csv"), &sol.k)?;
    output::write_gains_csv(&out_dir.join("gains.csv"), &gains)?;
    std::fs::write(
        out_dir.join("kernel_meta.txt"),
        output::solution_metadata(&sol),
    )?;
    rep.info(&format!(
        "wrote kernel.csv, gains.csv, kernel_meta.txt to {}",
        out_dir.display()
    ));
    Ok(rep.all_passed)
}

/// True when the kernel equation's data (`μ`, `f`) reduce to the
/// constant-coefficient special case with a closed form.
fn has_closed_form(spec: &ProblemSpec) -> bool {
    spec.c1.is_zero() && spec.f.is_zero()
}

fn residual_check(rep: &mut Reporter, cfg: &RunConfig, sol: &KernelSolution) -> Result<(), CliError> {
    let fine = &sol.residual;
    let half_n = (cfg.solver.n / 2).max(8) + (cfg.solver.n / 2).max(8) % 2;
    let coarse = {
        let grid = GoursatGrid::new(half_n)?;
        let s = solve_kernel(&cfg.problem, grid, cfg.solver.tol, cfg.solver.max_iter)?;
        s.residual
    };
    let scale = 1.0 + sol.k.max_abs_location().0;
    // either second-order refinement or already at the roundoff floor
    let at_floor = fine.interior_max <= 1e-9 * scale;
    let ratio = coarse.interior_max / fine.interior_max.max(1e-300);
    let interior_ok = at_floor || ratio >= RESIDUAL_RATIO_MIN;
    let diag_ok = fine.diagonal_max <= 1e-10 * (1.0 + cfg.problem.lambda0.abs());
    let edge_ok = fine.edge_max <= 1e-9 * scale || {
        let c_ratio = coarse.edge_max / fine.edge_max.max(1e-300);
        c_ratio >= RESIDUAL_RATIO_MIN
    };
    let corner_ok = fine.corner_abs <= 1e-12;
    rep.check(
        "pde-residual",
        interior_ok && diag_ok && edge_ok && corner_ok,
        &format!(
            "interior = {:.3e} (x{:.2} under halving), diagonal = {:.3e}, edge = {:.3e}, corner = {:.3e}",
            fine.interior_max, ratio, fine.diagonal_max, fine.edge_max, fine.corner_abs
        ),
    );
    Ok(())
}

fn uniqueness_check(rep: &mut Reporter, cfg: &RunConfig, sol: &KernelSolution) -> Result<(), CliError> {
    let grid = GoursatGrid::new(cfg.solver.n)?;
    let probe = uniqueness_probe(
        &cfg.problem,
        grid,
        sol,
        UNIQUENESS_N_MAX,
        UNIQUENESS_REL_TOL,
        UNIQUENESS_ABS_FLOOR,
    )?;
    let detail = match probe.witness {
        None => format!("delta = {:.3e}, n <= {UNIQUENESS_N_MAX}", probe.delta),
        Some((it, (i, j))) => format!("violated at iteration {it}, node ({i}, {j})"),
    };
    rep.check("uniqueness-estimate", probe.passed, &detail);
    Ok(())
}

fn bessel_check(rep: &mut Reporter, cfg: &RunConfig, sol: &KernelSolution) {
    if !has_closed_form(&cfg.problem) {
        rep.skip("bessel-crosscheck", "no closed form for this data");
        return;
    }
    let lambda0 = cfg.problem.lambda0;
    let n = sol.k.n();
    let mut worst = 0.0f64;
    let closed = KernelField::from_fn(n, |x, y| {
        bessel::closed_form_kernel(lambda0, x, y).expect("node in D")
    });
    for (a, b) in sol.k.nodes() {
        worst = worst.max((sol.k.get(a, b) - closed.get(a, b)).abs());
    }
    // second-order quadrature against the exact series
    let tol = 25.0 * (1.0 + lambda0 * lambda0) / (n * n) as f64;
    rep.check(
        "bessel-crosscheck",
        worst <= tol,
        &format!("max diff = {worst:.3e}, tol = {tol:.3e}"),
    );
}

pub fn cmd_validate(opts: &Options) -> Result<bool, CliError> {
    let (cfg, _out_dir) = load(opts)?;
    let mut rep = Reporter::new(opts.quiet);
    let sol = solve(&cfg)?;
    bound_check(&mut rep, &sol);
    residual_check(&mut rep, &cfg, &sol)?;
    envelope_check(&mut rep, &sol);
    uniqueness_check(&mut rep, &cfg, &sol)?;
    bessel_check(&mut rep, &cfg, &sol);
    Ok(rep.all_passed)
}

pub fn cmd_simulate(opts: &Options) -> Result<bool, CliError> {
    let (cfg, out_dir) = load(opts)?;
    simulate_loaded(opts, &cfg, &out_dir)
}

fn simulate_loaded(opts: &Options, cfg: &RunConfig, out_dir: &Path) -> Result<bool, CliError> {
    let mut rep = Reporter::new(opts.quiet);
    let sim_cfg = cfg.simulation.as_ref().ok_or_else(|| {
        CliError::Usage(String::from("simulate requires a [simulation] section"))
    })?;
    if !assumptions_check(&mut rep, cfg)? {
        return Ok(false);
    }
    let sol = solve(cfg)?;
    let gains = extract_gains(&sol, cfg.solver.gain_nodes)?;

    let sc = SimConfig {
        nx: sim_cfg.nx,
        dt: sim_cfg.dt,
        t_end: sim_cfg.t_end,
        p_list: sim_cfg.p_list.clone(),
        with_w1p: sim_cfg.with_w1p,
        burn_in: sim_cfg.burn_in,
        max_samples: sim_cfg.max_samples,
    };
    sc.validate(&cfg.problem)?;

    let w0 = make_compatible_initial(&sim_cfg.initial, &gains, sim_cfg.nx)?;
    let decay = run_decay_experiment(&cfg.problem, &gains, &sc, &w0)?;
    output::write_norms_csv(&out_dir.join("norms.csv"), &decay)?;
    std::fs::write(out_dir.join("decay.txt"), output::decay_metadata(&decay))?;
    rep.check("closed-loop-run", true, &format!("t_end = {}", sc.t_end));
    for s in &decay.series {
        if let Some(f) = &s.fit {
            rep.info(&format!("{}: sigma_hat = {:.6}", s.label, f.sigma_hat));
        }
    }

    if let Some(init2) = &sim_cfg.initial2 {
        let w02 = make_compatible_initial(init2, &gains, sim_cfg.nx)?;
        let dep = run_dependence_experiment(
            &cfg.problem,
            &gains,
            &sc,
            &w0,
            &w02,
            &DEPENDENCE_ALPHAS,
        )?;
        std::fs::write(
            out_dir.join("dependence.txt"),
            output::dependence_metadata(&dep),
        )?;
        let finite = dep
            .entries
            .iter()
            .all(|e| e.ratios.iter().all(|r| r.is_finite()));
        rep.check(
            "dependence-ratios-finite",
            finite || dep.degenerate,
            "",
        );
    }
    rep.info(&format!("wrote simulation artifacts to {}", out_dir.display()));
    Ok(rep.all_passed)
}

pub fn cmd_all(opts: &Options) -> Result<bool, CliError> {
    let a = cmd_validate(opts)?;
    let b = cmd_solve_kernel(opts)?;
    let (cfg, out_dir) = load(opts)?;
    let c = if cfg.simulation.is_some() {
        simulate_loaded(opts, &cfg, &out_dir)?
    } else {
        true
    };
    Ok(a && b && c)
}
