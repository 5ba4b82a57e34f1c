//! CSV and metadata artifact writers.
//!
//! Numbers are written in scientific notation with 17 significant digits,
//! `.` decimal separator and LF line endings, so identical inputs produce
//! byte-identical files on every platform.

use backstep_core::simulator::{DecayReport, DependenceReport};
use backstep_core::solver::{ControlGains, KernelField, KernelSolution};
use std::io;
use std::path::Path;

/// 17 significant digits: enough to reproduce any f64 exactly.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_kernel_csv(path: &Path, k: &KernelField) -> io::Result<()> {
    let mut out = String::from("x,y,k\n");
    let dx = k.dx();
    for (a, b) in k.nodes() {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_num(a as f64 * dx),
            fmt_num(b as f64 * dx),
            fmt_num(k.get(a, b))
        ));
    }
    std::fs::write(path, out)
}

pub fn write_gains_csv(path: &Path, g: &ControlGains) -> io::Result<()> {
    let mut out = String::from("y,kx1\n");
    for (y, v) in g.y_nodes.iter().zip(&g.kx1) {
        out.push_str(&format!("{},{}\n", fmt_num(*y), fmt_num(*v)));
    }
    std::fs::write(path, out)
}

/// Plain-text metadata block for a kernel solve.
pub fn solution_metadata(sol: &KernelSolution) -> String {
    let (max_abs, (lx, ly)) = sol.k.max_abs_location();
    let mut out = String::new();
    out.push_str(&format!("iterations = {}\n", sol.iterations));
    out.push_str(&format!("n = {}\n", sol.k.n()));
    out.push_str(&format!("f_bar = {}\n", fmt_num(sol.constants.f_bar)));
    out.push_str(&format!(
        "lambda_bar = {}\n",
        fmt_num(sol.constants.lambda_bar)
    ));
    out.push_str(&format!("M = {}\n", fmt_num(sol.constants.m)));
    out.push_str(&format!("bound = {}\n", fmt_num(sol.constants.bound)));
    out.push_str(&format!("max_abs_k = {}\n", fmt_num(max_abs)));
    out.push_str(&format!(
        "max_abs_k_at = {}, {}\n",
        fmt_num(lx),
        fmt_num(ly)
    ));
    out.push_str(&format!(
        "residual_interior = {}\n",
        fmt_num(sol.residual.interior_max)
    ));
    out.push_str(&format!(
        "residual_diagonal = {}\n",
        fmt_num(sol.residual.diagonal_max)
    ));
    out.push_str(&format!(
        "residual_edge = {}\n",
        fmt_num(sol.residual.edge_max)
    ));
    out.push_str(&format!(
        "residual_corner = {}\n",
        fmt_num(sol.residual.corner_abs)
    ));
    out
}

/// Time-series CSV: one `t` column plus one column per recorded norm.
pub fn write_norms_csv(path: &Path, rep: &DecayReport) -> io::Result<()> {
    let mut header = String::from("t");
    for s in &rep.series {
        header.push(',');
        header.push_str(&s.label);
    }
    header.push('\n');
    let mut out = header;
    if let Some(first) = rep.series.first() {
        for (row, t) in first.times.iter().enumerate() {
            out.push_str(&fmt_num(*t));
            for s in &rep.series {
                out.push(',');
                out.push_str(&fmt_num(s.values[row]));
            }
            out.push('\n');
        }
    }
    std::fs::write(path, out)
}

pub fn decay_metadata(rep: &DecayReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("scheme = {}\n", rep.scheme));
    out.push_str(&format!("burn_in = {}\n", fmt_num(rep.burn_in)));
    for s in &rep.series {
        match (&s.fit, s.degenerate) {
            (_, true) => out.push_str(&format!("{}: degenerate (zero series)\n", s.label)),
            (Some(f), _) => out.push_str(&format!(
                "{}: sigma_hat = {} c_hat = {} fit_residual = {}\n",
                s.label,
                fmt_num(f.sigma_hat),
                fmt_num(f.c_hat),
                fmt_num(f.residual)
            )),
            (None, _) => out.push_str(&format!("{}: no fit (too few samples)\n", s.label)),
        }
    }
    out
}

pub fn dependence_metadata(rep: &DependenceReport) -> String {
    let mut out = String::new();
    let alphas: Vec<String> = rep.alphas.iter().map(|a| fmt_num(*a)).collect();
    out.push_str(&format!("alphas = {}\n", alphas.join(", ")));
    if rep.degenerate {
        out.push_str("degenerate = true (identical initial states)\n");
    }
    for e in &rep.entries {
        let rs: Vec<String> = e.ratios.iter().map(|r| fmt_num(*r)).collect();
        out.push_str(&format!("{}: ratios = {}\n", e.label, rs.join(", ")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        let s = fmt_num(core::f64::consts::PI);
        assert_eq!(s, "3.1415926535897931e0");
        // round-trips exactly
        let back: f64 = s.parse().unwrap();
        assert_eq!(back, core::f64::consts::PI);
    }

    #[test]
    fn kernel_csv_shape() {
        let k = KernelField::from_fn(4, |x, y| x + y);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("k.csv");
        write_kernel_csv(&p, &k).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,y,k");
        // 15 triangular nodes for n = 4
        assert_eq!(lines.len(), 16);
        assert!(!text.contains('\r'));
    }
}
