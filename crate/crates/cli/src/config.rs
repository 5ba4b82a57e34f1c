//! Sectioned key=value run configuration.
//!
//! Four sections: `[problem]`, `[solver]`, `[simulation]`, `[outputs]`.
//! `#` starts a comment line; blank lines are ignored; unknown sections and
//! keys are rejected with the offending line number. Function-valued keys use
//! the descriptor text form (see [`crate::descriptor_text`]).

use crate::descriptor_text::{
    format_function1, format_function2, parse_function1, parse_function2,
};
use backstep_core::simulator::PValue;
use backstep_core::ProblemSpec;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Goursat grid resolution (even, ≥ 8).
    pub n: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// Nodes of the emitted `k_x(1,y)` gain table.
    pub gain_nodes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSection {
    pub nx: usize,
    pub dt: f64,
    pub t_end: f64,
    pub p_list: Vec<PValue>,
    pub with_w1p: bool,
    pub burn_in: f64,
    pub max_samples: usize,
    /// Base profile for the compatible initial state.
    pub initial: backstep_core::Function1,
    /// Second base profile; enables the dependence experiment.
    pub initial2: Option<backstep_core::Function1>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputsConfig {
    pub dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub solver: SolverConfig,
    pub simulation: Option<SimSection>,
    pub outputs: OutputsConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "config error: {}", self.message)
        } else {
            write!(f, "config error at line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        message: message.into(),
    }
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64, ConfigError> {
    v.parse::<f64>()
        .map_err(|_| err(line, format!("{key}: `{v}` is not a number")))
}

fn parse_usize(line: usize, key: &str, v: &str) -> Result<usize, ConfigError> {
    v.parse::<usize>()
        .map_err(|_| err(line, format!("{key}: `{v}` is not a nonnegative integer")))
}

fn parse_bool(line: usize, key: &str, v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(err(line, format!("{key}: `{v}` is not true/false"))),
    }
}

fn parse_p_list(line: usize, v: &str) -> Result<Vec<PValue>, ConfigError> {
    let mut out = Vec::new();
    for part in v.split(',') {
        let part = part.trim();
        if part == "inf" {
            out.push(PValue::Inf);
        } else {
            out.push(PValue::Finite(parse_f64(line, "p_list", part)?));
        }
    }
    if out.is_empty() {
        return Err(err(line, "p_list must not be empty"));
    }
    Ok(out)
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    #[derive(PartialEq, Clone, Copy)]
    enum Section {
        None,
        Problem,
        Solver,
        Simulation,
        Outputs,
    }
    let mut section = Section::None;

    let mut problem = ProblemSpec::constant_coefficient(f64::NAN);
    let mut have_lambda0 = false;
    let mut solver = SolverConfig {
        n: 0,
        tol: 1e-10,
        max_iter: 200,
        gain_nodes: 201,
    };
    let mut have_n = false;
    let mut sim: Option<SimSection> = None;
    let mut outputs = OutputsConfig::default();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| err(lineno, "unterminated section header"))?;
            section = match name {
                "problem" => Section::Problem,
                "solver" => Section::Solver,
                "simulation" => {
                    sim.get_or_insert_with(|| SimSection {
                        nx: 0,
                        dt: 0.0,
                        t_end: 0.0,
                        p_list: vec![PValue::Finite(2.0)],
                        with_w1p: false,
                        burn_in: -1.0,
                        max_samples: 400,
                        initial: backstep_core::Function1::zero(),
                        initial2: None,
                    });
                    Section::Simulation
                }
                "outputs" => Section::Outputs,
                other => return Err(err(lineno, format!("unknown section [{other}]"))),
            };
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(lineno, format!("expected key = value, got `{line}`")))?;
        let key = key.trim();
        let value = value.trim();
        let fun1 = |v: &str| parse_function1(v).map_err(|m| err(lineno, m));
        match section {
            Section::None => return Err(err(lineno, "key before any section header")),
            Section::Problem => match key {
                "lambda0" => {
                    problem.lambda0 = parse_f64(lineno, key, value)?;
                    have_lambda0 = true;
                }
                "c1" => problem.c1 = fun1(value)?,
                "c2" => problem.c2 = fun1(value)?,
                "c3_L" => problem.c3_l = fun1(value)?,
                "c3_gamma0" => problem.c3_gamma0 = parse_f64(lineno, key, value)?,
                "c3_shape" => problem.c3_shape = fun1(value)?,
                "f" => problem.f = parse_function2(value).map_err(|m| err(lineno, m))?,
                "theta" => problem.theta = parse_f64(lineno, key, value)?,
                other => return Err(err(lineno, format!("unknown [problem] key `{other}`"))),
            },
            Section::Solver => match key {
                "n" => {
                    solver.n = parse_usize(lineno, key, value)?;
                    have_n = true;
                }
                "tol" => solver.tol = parse_f64(lineno, key, value)?,
                "max_iter" => solver.max_iter = parse_usize(lineno, key, value)?,
                "gain_nodes" => solver.gain_nodes = parse_usize(lineno, key, value)?,
                other => return Err(err(lineno, format!("unknown [solver] key `{other}`"))),
            },
            Section::Simulation => {
                let s = sim.as_mut().expect("section seen");
                match key {
                    "nx" => s.nx = parse_usize(lineno, key, value)?,
                    "dt" => s.dt = parse_f64(lineno, key, value)?,
                    "t_end" => s.t_end = parse_f64(lineno, key, value)?,
                    "p_list" => s.p_list = parse_p_list(lineno, value)?,
                    "with_w1p" => s.with_w1p = parse_bool(lineno, key, value)?,
                    "burn_in" => s.burn_in = parse_f64(lineno, key, value)?,
                    "max_samples" => s.max_samples = parse_usize(lineno, key, value)?,
                    "initial" => s.initial = fun1(value)?,
                    "initial2" => s.initial2 = Some(fun1(value)?),
                    other => {
                        return Err(err(lineno, format!("unknown [simulation] key `{other}`")))
                    }
                }
            }
            Section::Outputs => match key {
                "dir" => outputs.dir = Some(value.to_string()),
                other => return Err(err(lineno, format!("unknown [outputs] key `{other}`"))),
            },
        }
    }

    if !have_lambda0 {
        return Err(err(0, "[problem] lambda0 is required"));
    }
    if !have_n {
        return Err(err(0, "[solver] n is required"));
    }
    if let Some(s) = &mut sim {
        if s.nx == 0 || s.dt <= 0.0 || s.t_end <= 0.0 {
            return Err(err(0, "[simulation] requires nx, dt and t_end"));
        }
        if s.burn_in < 0.0 {
            s.burn_in = 0.1 * s.t_end;
        }
    }
    Ok(RunConfig {
        problem,
        solver,
        simulation: sim,
        outputs,
    })
}

/// Regenerates the config text; `parse_config(format_config(c))` reproduces
/// every number bit-exactly.
pub fn format_config(c: &RunConfig) -> String {
    let mut out = String::new();
    let p = &c.problem;
    out.push_str("[problem]\n");
    out.push_str(&format!("lambda0 = {}\n", p.lambda0));
    out.push_str(&format!("c1 = {}\n", format_function1(&p.c1)));
    out.push_str(&format!("c2 = {}\n", format_function1(&p.c2)));
    out.push_str(&format!("c3_L = {}\n", format_function1(&p.c3_l)));
    out.push_str(&format!("c3_gamma0 = {}\n", p.c3_gamma0));
    out.push_str(&format!("c3_shape = {}\n", format_function1(&p.c3_shape)));
    out.push_str(&format!("f = {}\n", format_function2(&p.f)));
    out.push_str(&format!("theta = {}\n", p.theta));
    out.push_str("\n[solver]\n");
    out.push_str(&format!("n = {}\n", c.solver.n));
    out.push_str(&format!("tol = {}\n", c.solver.tol));
    out.push_str(&format!("max_iter = {}\n", c.solver.max_iter));
    out.push_str(&format!("gain_nodes = {}\n", c.solver.gain_nodes));
    if let Some(s) = &c.simulation {
        out.push_str("\n[simulation]\n");
        out.push_str(&format!("nx = {}\n", s.nx));
        out.push_str(&format!("dt = {}\n", s.dt));
        out.push_str(&format!("t_end = {}\n", s.t_end));
        let ps: Vec<String> = s
            .p_list
            .iter()
            .map(|p| match p {
                PValue::Inf => String::from("inf"),
                PValue::Finite(v) => format!("{v}"),
            })
            .collect();
        out.push_str(&format!("p_list = {}\n", ps.join(", ")));
        out.push_str(&format!("with_w1p = {}\n", s.with_w1p));
        out.push_str(&format!("burn_in = {}\n", s.burn_in));
        out.push_str(&format!("max_samples = {}\n", s.max_samples));
        out.push_str(&format!("initial = {}\n", format_function1(&s.initial)));
        if let Some(i2) = &s.initial2 {
            out.push_str(&format!("initial2 = {}\n", format_function1(i2)));
        }
    }
    if let Some(d) = &c.outputs.dir {
        out.push_str("\n[outputs]\n");
        out.push_str(&format!("dir = {d}\n"));
    }
    out
}
