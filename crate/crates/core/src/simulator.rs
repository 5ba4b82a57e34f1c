//! Closed-loop finite-difference simulation and norm measurements.
//!
//! Space: uniform grid on `[0,1]` with both Neumann conditions imposed by
//! second-order ghost nodes; the control enters through the `x = 1` ghost
//! value. Time: Crank–Nicolson on diffusion (constant tridiagonal system,
//! factored once), explicit treatment of the reaction term `c w`, the
//! Volterra term and the boundary flux. The full update is linear in the
//! state, which the dependence experiment exploits.

use crate::coefficients::ProblemSpec;
use crate::descriptor::Function1;
use crate::error::CoreError;
use crate::math;
use crate::solver::ControlGains;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// Scheme identifier recorded in reports.
pub const SCHEME: &str = "CN-diffusion/explicit-reaction";

/// A norm request: `L^p` for finite `p ≥ 1`, or the sup norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PValue {
    Finite(f64),
    Inf,
}

impl PValue {
    pub fn label(&self) -> String {
        match self {
            PValue::Finite(p) if math::abs(p - math::round(*p)) < 1e-12 => {
                format!("{}", math::round(*p) as i64)
            }
            PValue::Finite(p) => format!("{p}"),
            PValue::Inf => String::from("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Spatial subdivisions; `dx = 1/nx`.
    pub nx: usize,
    pub dt: f64,
    pub t_end: f64,
    pub p_list: Vec<PValue>,
    /// Also record `W^{1,p}` series.
    pub with_w1p: bool,
    /// Start of the decay-fit window.
    pub burn_in: f64,
    /// Upper bound on recorded samples per series.
    pub max_samples: usize,
}

impl SimConfig {
    pub fn new(nx: usize, dt: f64, t_end: f64) -> Self {
        Self {
            nx,
            dt,
            t_end,
            p_list: vec![PValue::Finite(2.0)],
            with_w1p: false,
            burn_in: 0.1 * t_end,
            max_samples: 400,
        }
    }

    /// Checks structural constraints and the explicit-reaction stability
    /// margin `dt ≤ 0.5 / (sup |c| + f̄ + 1)` (sampled over
    /// `[0,1] × [0, t_end]`).
    pub fn validate(&self, spec: &ProblemSpec) -> Result<(), CoreError> {
        if self.nx < 4 {
            return Err(CoreError::Config {
                what: format!("nx = {} too small", self.nx),
            });
        }
        if self.dt <= 0.0 || self.t_end <= 0.0 {
            return Err(CoreError::Config {
                what: String::from("dt and t_end must be positive"),
            });
        }
        if self.burn_in < 0.0 || self.burn_in >= self.t_end {
            return Err(CoreError::Config {
                what: format!("burn_in = {} not in [0, t_end)", self.burn_in),
            });
        }
        for p in &self.p_list {
            if let PValue::Finite(p) = p {
                if *p < 1.0 {
                    return Err(CoreError::Domain {
                        what: format!("p = {p} < 1"),
                    });
                }
            }
        }
        let s = 101;
        let mut c_sup: f64 = 0.0;
        for i in 0..s {
            for j in 0..s {
                let x = i as f64 / (s - 1) as f64;
                let t = self.t_end * j as f64 / (s - 1) as f64;
                c_sup = c_sup.max(math::abs(spec.c(x, t)));
            }
        }
        let mut f_bar: f64 = 0.0;
        for i in 0..s {
            for j in 0..s {
                f_bar = f_bar.max(math::abs(
                    spec.f.eval(i as f64 / (s - 1) as f64, j as f64 / (s - 1) as f64),
                ));
            }
        }
        let margin = 0.5 / (c_sup + f_bar + 1.0);
        if self.dt > margin {
            return Err(CoreError::Config {
                what: format!(
                    "dt = {} exceeds the explicit-reaction stability margin {margin:.6}",
                    self.dt
                ),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub w: Vec<f64>,
}

impl SimState {
    pub fn zero(nx: usize) -> Self {
        Self {
            t: 0.0,
            w: vec![0.0; nx + 1],
        }
    }

    pub fn from_fn(nx: usize, mut f: impl FnMut(f64) -> f64) -> Self {
        Self {
            t: 0.0,
            w: (0..=nx).map(|i| f(i as f64 / nx as f64)).collect(),
        }
    }
}

/// Discrete `L^p` norm by composite trapezoid (node max for `p = ∞`).
pub fn lp_norm(w: &[f64], p: PValue) -> Result<f64, CoreError> {
    let n = w.len() - 1;
    let dx = 1.0 / n as f64;
    match p {
        PValue::Inf => Ok(w.iter().fold(0.0f64, |m, v| m.max(v.abs()))),
        PValue::Finite(p) => {
            if p < 1.0 {
                return Err(CoreError::Domain {
                    what: format!("p = {p} < 1"),
                });
            }
            let mut acc = 0.0;
            for (i, v) in w.iter().enumerate() {
                let wgt = if i == 0 || i == n { 0.5 * dx } else { dx };
                acc += wgt * math::pow(math::abs(*v), p);
            }
            Ok(math::pow(acc, 1.0 / p))
        }
    }
}

/// First derivative by central differences (second-order one-sided at the
/// ends).
pub fn derivative(w: &[f64]) -> Vec<f64> {
    let n = w.len() - 1;
    let dx = 1.0 / n as f64;
    let mut d = vec![0.0; n + 1];
    d[0] = (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * dx);
    for i in 1..n {
        d[i] = (w[i + 1] - w[i - 1]) / (2.0 * dx);
    }
    d[n] = (3.0 * w[n] - 4.0 * w[n - 1] + w[n - 2]) / (2.0 * dx);
    d
}

/// Discrete `W^{1,p}` norm in the `p`-sum convention
/// `(‖w‖_p^p + ‖w_x‖_p^p)^{1/p}` (max combination for `p = ∞`).
pub fn w1p_norm(w: &[f64], p: PValue) -> Result<f64, CoreError> {
    let d = derivative(w);
    match p {
        PValue::Inf => Ok(lp_norm(w, p)?.max(lp_norm(&d, p)?)),
        PValue::Finite(pv) => {
            let a = lp_norm(w, p)?;
            let b = lp_norm(&d, p)?;
            Ok(math::pow(math::pow(a, pv) + math::pow(b, pv), 1.0 / pv))
        }
    }
}

/// One time-stepper instance: the tridiagonal Crank–Nicolson factorization,
/// the gains resampled to the simulation grid, and the `f` rows for the
/// Volterra term.
pub struct Simulator {
    spec: ProblemSpec,
    cfg: SimConfig,
    k11: f64,
    /// `k_x(1, x_i)` on the simulation grid.
    kx1: Vec<f64>,
    // Thomas factorization of I - (dt/2) L
    sub: Vec<f64>,
    cp: Vec<f64>,
    den: Vec<f64>,
    /// `f(x_i, x_j)` for `j ≤ i`; `None` when `f ≡ 0`.
    f_rows: Option<Vec<f64>>,
}

impl Simulator {
    pub fn new(spec: &ProblemSpec, gains: &ControlGains, cfg: &SimConfig) -> Result<Self, CoreError> {
        cfg.validate(spec)?;
        let nx = cfg.nx;
        let dx = 1.0 / nx as f64;
        let r = 0.5 * cfg.dt / (dx * dx);

        // rows of I - r*L, L the ghost-node Neumann Laplacian
        let mut sub = vec![-r; nx + 1];
        let mut sup = vec![-r; nx + 1];
        let diag = vec![1.0 + 2.0 * r; nx + 1];
        sup[0] = -2.0 * r;
        sub[nx] = -2.0 * r;

        let mut cp = vec![0.0; nx + 1];
        let mut den = vec![0.0; nx + 1];
        den[0] = diag[0];
        cp[0] = sup[0] / den[0];
        for i in 1..=nx {
            den[i] = diag[i] - sub[i] * cp[i - 1];
            cp[i] = sup[i] / den[i];
        }

        let kx1 = (0..=nx).map(|i| gains.kx1_at(i as f64 * dx)).collect();

        let f_rows = if spec.f.is_zero() {
            None
        } else {
            let mut rows = Vec::with_capacity((nx + 1) * (nx + 2) / 2);
            for i in 0..=nx {
                for j in 0..=i {
                    rows.push(spec.f.eval(i as f64 * dx, j as f64 * dx));
                }
            }
            Some(rows)
        };

        Ok(Self {
            spec: spec.clone(),
            cfg: cfg.clone(),
            k11: gains.k11,
            kx1,
            sub,
            cp,
            den,
            f_rows,
        })
    }

    /// Feedback `U = -k(1,1) w(1) - ∫_0^1 k_x(1,y) w(y) dy` (trapezoid).
    pub fn control(&self, w: &[f64]) -> f64 {
        let nx = self.cfg.nx;
        let dx = 1.0 / nx as f64;
        let mut integral = 0.0;
        for i in 0..=nx {
            let wgt = if i == 0 || i == nx { 0.5 * dx } else { dx };
            integral += wgt * self.kx1[i] * w[i];
        }
        -self.k11 * w[nx] - integral
    }

    /// Advances one `dt`. Diffusion is Crank–Nicolson; reaction, Volterra
    /// term and boundary flux are explicit at the current time.
    pub fn step(&self, state: &SimState) -> Result<SimState, CoreError> {
        let nx = self.cfg.nx;
        let dx = 1.0 / nx as f64;
        let dt = self.cfg.dt;
        let r = 0.5 * dt / (dx * dx);
        let w = &state.w;
        let t = state.t;

        let u = self.control(w);

        // rhs = (I + r L) w + dt * (b + c w + volterra)
        let mut rhs = vec![0.0; nx + 1];
        rhs[0] = w[0] + r * (2.0 * w[1] - 2.0 * w[0]);
        for i in 1..nx {
            rhs[i] = w[i] + r * (w[i - 1] - 2.0 * w[i] + w[i + 1]);
        }
        rhs[nx] = w[nx] + r * (2.0 * w[nx - 1] - 2.0 * w[nx]) + dt * 2.0 * u / dx;

        for (i, item) in rhs.iter_mut().enumerate() {
            let x = i as f64 * dx;
            let mut reaction = self.spec.c(x, t) * w[i];
            if let Some(rows) = &self.f_rows {
                let base = i * (i + 1) / 2;
                let mut volterra = 0.0;
                if i > 0 {
                    for j in 0..=i {
                        let wgt = if j == 0 || j == i { 0.5 * dx } else { dx };
                        volterra += wgt * w[j] * rows[base + j];
                    }
                }
                reaction += volterra;
            }
            *item += dt * reaction;
        }

        // Thomas solve with the precomputed factorization
        let mut out = vec![0.0; nx + 1];
        out[0] = rhs[0] / self.den[0];
        for i in 1..=nx {
            out[i] = (rhs[i] - self.sub[i] * out[i - 1]) / self.den[i];
        }
        for i in (0..nx).rev() {
            out[i] -= self.cp[i] * out[i + 1];
        }

        let t_next = t + dt;
        if out.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::BlowUp { t: t_next });
        }
        Ok(SimState { t: t_next, w: out })
    }

    /// Runs to `t_end`, invoking the observer at the sampling stride
    /// (including the initial and final states).
    pub fn run(
        &self,
        w0: &SimState,
        mut observe: impl FnMut(f64, &[f64]),
    ) -> Result<SimState, CoreError> {
        let steps = math::ceil(self.cfg.t_end / self.cfg.dt) as usize;
        let stride = (steps / self.cfg.max_samples).max(1);
        let mut state = w0.clone();
        observe(state.t, &state.w);
        for s in 1..=steps {
            state = self.step(&state)?;
            if s % stride == 0 || s == steps {
                observe(state.t, &state.w);
            }
        }
        Ok(state)
    }
}

/// Residuals of the two discrete compatibility conditions: `w_x(0) = 0` and
/// `w_x(1) = U[w]`, both by second-order one-sided differences.
pub fn compatibility_residuals(w: &[f64], gains: &ControlGains) -> (f64, f64) {
    let nx = w.len() - 1;
    let dx = 1.0 / nx as f64;
    let d0 = (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * dx);
    let d1 = (3.0 * w[nx] - 4.0 * w[nx - 1] + w[nx - 2]) / (2.0 * dx);
    let mut integral = 0.0;
    for i in 0..=nx {
        let wgt = if i == 0 || i == nx { 0.5 * dx } else { dx };
        integral += wgt * gains.kx1_at(i as f64 * dx) * w[i];
    }
    let u = -gains.k11 * w[nx] - integral;
    (math::abs(d0), math::abs(d1 - u))
}

/// Samples `base` and adds the correction `α x²(x - 1/2) + β (1-x)²` whose
/// coefficients solve the 2×2 linear system imposed by the two discrete
/// compatibility conditions, driving both residuals to roundoff.
pub fn make_compatible_initial(
    base: &Function1,
    gains: &ControlGains,
    nx: usize,
) -> Result<SimState, CoreError> {
    let sample = |f: &dyn Fn(f64) -> f64| -> Vec<f64> {
        (0..=nx).map(|i| f(i as f64 / nx as f64)).collect()
    };
    let b = sample(&|x| base.eval(x));
    let p = sample(&|x| x * x * (x - 0.5));
    let q = sample(&|x| (1.0 - x) * (1.0 - x));

    let dx = 1.0 / nx as f64;
    let d0 = |w: &[f64]| (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * dx);
    let e = |w: &[f64]| {
        let d1 = (3.0 * w[nx] - 4.0 * w[nx - 1] + w[nx - 2]) / (2.0 * dx);
        let mut integral = 0.0;
        for i in 0..=nx {
            let wgt = if i == 0 || i == nx { 0.5 * dx } else { dx };
            integral += wgt * gains.kx1_at(i as f64 * dx) * w[i];
        }
        // residual functional: w_x(1) - U[w], affine in w
        d1 + gains.k11 * w[nx] + integral
    };

    // [d0(p) d0(q); e(p) e(q)] [alpha; beta] = -[d0(b); e(b)]
    let (a11, a12, a21, a22) = (d0(&p), d0(&q), e(&p), e(&q));
    let det = a11 * a22 - a12 * a21;
    if math::abs(det) < 1e-14 {
        return Err(CoreError::Compatibility {
            what: String::from(
                "correction system is singular; try a different base profile",
            ),
        });
    }
    let (r1, r2) = (-d0(&b), -e(&b));
    let alpha = (r1 * a22 - r2 * a12) / det;
    let beta = (a11 * r2 - a21 * r1) / det;

    let w: Vec<f64> = (0..=nx)
        .map(|i| b[i] + alpha * p[i] + beta * q[i])
        .collect();
    Ok(SimState { t: 0.0, w })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// Fitted decay rate of `log ‖w[t]‖ ≈ log Ĉ - σ̂ t`.
    pub sigma_hat: f64,
    pub c_hat: f64,
    /// RMS misfit of the log-norm over the fit window.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormSeries {
    pub label: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub fit: Option<DecayFit>,
    /// Set when the series is identically (near) zero and no fit is
    /// meaningful.
    pub degenerate: bool,
}

impl NormSeries {
    /// True when the series is strictly decreasing at every recorded sample
    /// past `t0`.
    pub fn strictly_decreasing_after(&self, t0: f64) -> bool {
        let vals: Vec<f64> = self
            .times
            .iter()
            .zip(&self.values)
            .filter(|(t, _)| **t >= t0)
            .map(|(_, v)| *v)
            .collect();
        vals.windows(2).all(|p| p[1] < p[0])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub series: Vec<NormSeries>,
    pub scheme: String,
    pub burn_in: f64,
}

fn requested_norms(cfg: &SimConfig) -> Vec<(String, PValue, bool)> {
    let mut out = Vec::new();
    for p in &cfg.p_list {
        out.push((format!("L{}", p.label()), *p, false));
    }
    if cfg.with_w1p {
        for p in &cfg.p_list {
            out.push((format!("W1,{}", p.label()), *p, true));
        }
    }
    out
}

fn fit_log_decay(times: &[f64], values: &[f64], burn_in: f64) -> Option<DecayFit> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, v)| **t >= burn_in && **v > 1e-300)
        .map(|(t, v)| (*t, math::ln(*v)))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom == 0.0 {
        return None;
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mut ss = 0.0;
    for (t, ly) in &pts {
        let e = ly - (intercept + slope * t);
        ss += e * e;
    }
    Some(DecayFit {
        sigma_hat: -slope,
        c_hat: math::exp(intercept),
        residual: math::sqrt(ss / n),
    })
}

/// Simulates to `t_end`, records the requested norms, and fits
/// `log ‖w[t]‖ ≈ log Ĉ - σ̂ t` by least squares over `[burn_in, t_end]`.
pub fn run_decay_experiment(
    spec: &ProblemSpec,
    gains: &ControlGains,
    cfg: &SimConfig,
    w0: &SimState,
) -> Result<DecayReport, CoreError> {
    let sim = Simulator::new(spec, gains, cfg)?;
    let norms = requested_norms(cfg);
    let mut times = Vec::new();
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); norms.len()];
    sim.run(w0, |t, w| {
        times.push(t);
        for (slot, (_, p, sobolev)) in values.iter_mut().zip(&norms) {
            let v = if *sobolev {
                w1p_norm(w, *p)
            } else {
                lp_norm(w, *p)
            }
            .unwrap_or(f64::NAN);
            slot.push(v);
        }
    })?;

    let series = norms
        .into_iter()
        .zip(values)
        .map(|((label, _, _), vals)| {
            let degenerate = vals.iter().all(|v| *v <= 1e-300);
            let fit = if degenerate {
                None
            } else {
                fit_log_decay(&times, &vals, cfg.burn_in)
            };
            NormSeries {
                label,
                times: times.clone(),
                values: vals,
                fit,
                degenerate,
            }
        })
        .collect();
    Ok(DecayReport {
        series,
        scheme: String::from(SCHEME),
        burn_in: cfg.burn_in,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DependenceEntry {
    pub label: String,
    /// One ratio per perturbation scale, in the order of `alphas`.
    pub ratios: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DependenceReport {
    pub alphas: Vec<f64>,
    pub entries: Vec<DependenceEntry>,
    /// Set when the two initial states coincide (ratio would be 0/0).
    pub degenerate: bool,
}

/// Simulates the pair `(w01, w01 + α (w02 - w01))` for each scale `α` and
/// returns `sup_t ‖w1[t] - w2[t]‖ / ‖w01 - w02'‖` per requested norm. For a
/// linear closed loop the ratios are independent of `α` up to roundoff.
pub fn run_dependence_experiment(
    spec: &ProblemSpec,
    gains: &ControlGains,
    cfg: &SimConfig,
    w01: &SimState,
    w02: &SimState,
    alphas: &[f64],
) -> Result<DependenceReport, CoreError> {
    let norms = requested_norms(cfg);
    let diff0: Vec<f64> = w01.w.iter().zip(&w02.w).map(|(a, b)| b - a).collect();
    if diff0.iter().all(|v| *v == 0.0) {
        return Ok(DependenceReport {
            alphas: alphas.to_vec(),
            entries: norms
                .into_iter()
                .map(|(label, _, _)| DependenceEntry {
                    label,
                    ratios: vec![0.0; alphas.len()],
                })
                .collect(),
            degenerate: true,
        });
    }

    let sim = Simulator::new(spec, gains, cfg)?;
    let mut snap1: Vec<Vec<f64>> = Vec::new();
    sim.run(w01, |_, w| snap1.push(w.to_vec()))?;

    let mut entries: Vec<DependenceEntry> = norms
        .iter()
        .map(|(label, _, _)| DependenceEntry {
            label: label.clone(),
            ratios: Vec::new(),
        })
        .collect();
    for &alpha in alphas {
        let w0b = SimState {
            t: w01.t,
            w: w01
                .w
                .iter()
                .zip(&diff0)
                .map(|(a, d)| a + alpha * d)
                .collect(),
        };
        let mut idx = 0usize;
        let mut sups = vec![0.0f64; norms.len()];
        let mut denoms = vec![0.0f64; norms.len()];
        sim.run(&w0b, |_, w| {
            let d: Vec<f64> = w.iter().zip(&snap1[idx]).map(|(b, a)| b - a).collect();
            for (slot, (_, p, sobolev)) in sups.iter_mut().zip(&norms) {
                let v = if *sobolev {
                    w1p_norm(&d, *p)
                } else {
                    lp_norm(&d, *p)
                }
                .unwrap_or(f64::NAN);
                *slot = slot.max(v);
            }
            if idx == 0 {
                for (slot, (_, p, sobolev)) in denoms.iter_mut().zip(&norms) {
                    *slot = if *sobolev {
                        w1p_norm(&d, *p)
                    } else {
                        lp_norm(&d, *p)
                    }
                    .unwrap_or(f64::NAN);
                }
            }
            idx += 1;
        })?;
        for (entry, (s, d)) in entries.iter_mut().zip(sups.iter().zip(&denoms)) {
            entry.ratios.push(s / d);
        }
    }
    Ok(DependenceReport {
        alphas: alphas.to_vec(),
        entries,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptor::TermKind;
    use core::f64::consts::PI;

    fn diffusion_only() -> ProblemSpec {
        ProblemSpec::constant_coefficient(1.0)
    }

    fn cfg(nx: usize, dt: f64, t_end: f64) -> SimConfig {
        SimConfig::new(nx, dt, t_end)
    }

    #[test]
    fn zero_is_equilibrium() {
        let spec = diffusion_only();
        let c = cfg(50, 1e-3, 0.1);
        let sim = Simulator::new(&spec, &ControlGains::zero(11), &c).unwrap();
        let mut state = SimState::zero(50);
        for _ in 0..20 {
            state = sim.step(&state).unwrap();
        }
        assert!(state.w.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn step_is_linear() {
        let spec = {
            let mut s = diffusion_only();
            s.c1 = Function1::single(TermKind::Sine, 0.3, 2.0);
            s.f = crate::descriptor::Function2::constant(0.2);
            s
        };
        let mut gains = ControlGains::zero(11);
        gains.k11 = 0.5;
        for v in gains.kx1.iter_mut() {
            *v = 0.3;
        }
        let c = cfg(40, 1e-3, 0.1);
        let sim = Simulator::new(&spec, &gains, &c).unwrap();
        let s1 = SimState::from_fn(40, |x| (PI * x).cos());
        let s2 = SimState::from_fn(40, |x| x * x);
        let combo = SimState {
            t: 0.0,
            w: s1.w.iter().zip(&s2.w).map(|(a, b)| 2.0 * a - 0.7 * b).collect(),
        };
        let out1 = sim.step(&s1).unwrap();
        let out2 = sim.step(&s2).unwrap();
        let outc = sim.step(&combo).unwrap();
        for i in 0..combo.w.len() {
            let lin = 2.0 * out1.w[i] - 0.7 * out2.w[i];
            assert!((outc.w[i] - lin).abs() < 1e-12);
        }
    }

    #[test]
    fn norm_examples() {
        let ones = vec![1.0; 201];
        assert!((lp_norm(&ones, PValue::Inf).unwrap() - 1.0).abs() < 1e-15);
        assert!((lp_norm(&ones, PValue::Finite(1.0)).unwrap() - 1.0).abs() < 1e-15);
        let lin: Vec<f64> = (0..=200).map(|i| i as f64 / 200.0).collect();
        let l2 = lp_norm(&lin, PValue::Finite(2.0)).unwrap();
        assert!((l2 - 1.0 / 3.0f64.sqrt()).abs() < 1e-4, "l2 = {l2}");
    }

    #[test]
    fn norm_rejects_small_p() {
        let w = vec![1.0; 11];
        assert!(lp_norm(&w, PValue::Finite(0.5)).is_err());
    }

    #[test]
    fn w1p_of_linear_profile() {
        let lin: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        // ||x||_inf = 1, ||1||_inf = 1
        assert!((w1p_norm(&lin, PValue::Inf).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn compatible_zero_base() {
        let st = make_compatible_initial(&Function1::zero(), &ControlGains::zero(11), 50).unwrap();
        assert!(st.w.iter().all(|&v| v == 0.0));
        let (r0, r1) = compatibility_residuals(&st.w, &ControlGains::zero(11));
        assert_eq!((r0, r1), (0.0, 0.0));
    }

    #[test]
    fn compatible_cosine_base_needs_no_left_fix() {
        // cos(pi x) already has zero slope at x = 0, so beta vanishes.
        let base = Function1::single(TermKind::Cosine, 1.0, PI);
        let mut gains = ControlGains::zero(33);
        gains.k11 = 0.5;
        let st = make_compatible_initial(&base, &gains, 100).unwrap();
        let (r0, r1) = compatibility_residuals(&st.w, &gains);
        assert!(r0 < 1e-8, "left residual {r0}");
        assert!(r1 < 1e-8, "right residual {r1}");
        // the left end moves only by the O(dx^2) discrete slope of the cubic
        assert!((st.w[0] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn compatible_constant_base() {
        let base = Function1::constant(1.0);
        let mut gains = ControlGains::zero(33);
        gains.k11 = 0.5;
        for (i, v) in gains.kx1.iter_mut().enumerate() {
            *v = 0.6 + 0.01 * i as f64;
        }
        let st = make_compatible_initial(&base, &gains, 80).unwrap();
        let (r0, r1) = compatibility_residuals(&st.w, &gains);
        assert!(r0 < 1e-8 && r1 < 1e-8, "residuals {r0}, {r1}");
    }

    #[test]
    fn config_rejects_large_dt() {
        let mut spec = diffusion_only();
        spec.c2 = Function1::constant(0.5);
        let mut c = cfg(50, 0.4, 1.0);
        assert!(c.validate(&spec).is_err());
        c.dt = 1e-3;
        assert!(c.validate(&spec).is_ok());
    }

    #[test]
    fn pure_diffusion_eigenfunction_rate() {
        // coarse version of the calibration run: nx=100, dt=1e-4
        let spec = ProblemSpec::constant_coefficient(1.0);
        let mut c = cfg(100, 1e-4, 0.2);
        c.burn_in = 0.02;
        let w0 = SimState::from_fn(100, |x| (PI * x).cos());
        let rep = run_decay_experiment(&spec, &ControlGains::zero(11), &c, &w0).unwrap();
        let fit = rep.series[0].fit.unwrap();
        let rel = (fit.sigma_hat - PI * PI).abs() / (PI * PI);
        assert!(rel < 0.02, "sigma_hat = {}, rel err {rel}", fit.sigma_hat);
    }

    #[test]
    fn decay_report_zero_initial_is_degenerate() {
        let spec = diffusion_only();
        let c = cfg(40, 1e-3, 0.2);
        let rep =
            run_decay_experiment(&spec, &ControlGains::zero(11), &c, &SimState::zero(40)).unwrap();
        assert!(rep.series[0].degenerate);
        assert!(rep.series[0].fit.is_none());
    }

    #[test]
    fn dependence_identical_inputs_flagged() {
        let spec = diffusion_only();
        let c = cfg(40, 1e-3, 0.1);
        let w0 = SimState::from_fn(40, |x| (PI * x).cos());
        let rep = run_dependence_experiment(
            &spec,
            &ControlGains::zero(11),
            &c,
            &w0,
            &w0.clone(),
            &[1.0, 0.1],
        )
        .unwrap();
        assert!(rep.degenerate);
    }

    #[test]
    fn dependence_scale_invariance() {
        let spec = diffusion_only();
        let c = cfg(40, 1e-3, 0.1);
        let w01 = SimState::from_fn(40, |x| (PI * x).cos());
        let w02 = SimState::from_fn(40, |x| (PI * x).cos() + 0.2 * (2.0 * PI * x).cos());
        let rep = run_dependence_experiment(
            &spec,
            &ControlGains::zero(11),
            &c,
            &w01,
            &w02,
            &[1.0, 0.1, 0.01],
        )
        .unwrap();
        let r = &rep.entries[0].ratios;
        for v in r {
            assert!(v.is_finite());
            assert!((v - r[0]).abs() / r[0] < 0.01, "ratios {r:?}");
        }
        // pure diffusion contracts in L2
        assert!(r[0] <= 1.0 + 0.02);
    }

    #[test]
    fn step_halving_consistency() {
        // halving dt must shrink the one-interval defect
        let spec = {
            let mut s = diffusion_only();
            s.c2 = Function1::constant(0.3);
            s
        };
        let w0 = SimState::from_fn(64, |x| (PI * x).cos() + 0.1);
        let final_w = |dt: f64, steps: usize| {
            let c = cfg(64, dt, dt * steps as f64 * 1.0000001);
            let sim = Simulator::new(&spec, &ControlGains::zero(11), &c).unwrap();
            let mut s = w0.clone();
            for _ in 0..steps {
                s = sim.step(&s).unwrap();
            }
            s.w
        };
        let a = final_w(4e-4, 1);
        let b = final_w(2e-4, 2);
        let c = final_w(1e-4, 4);
        let diff = |u: &[f64], v: &[f64]| {
            u.iter()
                .zip(v)
                .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        };
        let d1 = diff(&a, &b);
        let d2 = diff(&b, &c);
        assert!(d2 < d1, "d1 = {d1}, d2 = {d2}");
        assert!(d1 / d2 > 1.7, "ratio {}", d1 / d2);
    }
}
