//! Problem data and derived constants.
//!
//! The reaction coefficient is `c(x,t) = c1(x) + c2(t) + c3(x,t)` with
//! `c3(x,t) = L(t) * shape(x)`, where the spatial profile obeys the modulus
//! bound `|shape(x) - shape(y)| ≤ ω(|x-y|)` with `ω(s) = s^γ0`. The kernel
//! equation only involves `λ0`, `c1` (through `μ(x,y) = λ0 - c1(x) + c1(y)`)
//! and `f`; `c2` and `c3` enter the simulator only.

use crate::descriptor::{Function1, Function2};
use crate::error::CoreError;
use crate::math;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    /// Target decay parameter; must dominate `sup c(x,t)`.
    pub lambda0: f64,
    /// Spatial part of the reaction coefficient, on `[0,1]`.
    pub c1: Function1,
    /// Temporal part, on `t ≥ 0`.
    pub c2: Function1,
    /// Envelope `L(t)` of the space-time part.
    pub c3_l: Function1,
    /// Modulus exponent: `ω(s) = s^γ0`, `γ0 ≥ 1`.
    pub c3_gamma0: f64,
    /// Spatial profile of `c3`; must obey `|shape(x)-shape(y)| ≤ ω(|x-y|)`.
    pub c3_shape: Function1,
    /// Convolution kernel on `[0,1]²`.
    pub f: Function2,
    /// Hölder exponent in `(0, 1/2]`; regularity metadata only, never used
    /// numerically.
    pub theta: f64,
}

impl ProblemSpec {
    /// A spec with `c ≡ 0` and `f ≡ 0`; the kernel then has a modified
    /// Bessel closed form.
    pub fn constant_coefficient(lambda0: f64) -> Self {
        Self {
            lambda0,
            c1: Function1::zero(),
            c2: Function1::zero(),
            c3_l: Function1::zero(),
            c3_gamma0: 1.0,
            c3_shape: Function1::zero(),
            f: Function2::zero(),
            theta: 0.5,
        }
    }

    pub fn c3(&self, x: f64, t: f64) -> f64 {
        self.c3_l.eval(t) * self.c3_shape.eval(x)
    }

    /// Full reaction coefficient `c(x,t)`.
    pub fn c(&self, x: f64, t: f64) -> f64 {
        self.c1.eval(x) + self.c2.eval(t) + self.c3(x, t)
    }

    pub fn omega(&self, s: f64) -> f64 {
        math::pow(s, self.c3_gamma0)
    }
}

/// Constants of the maximum estimate, computed by exhaustive lattice
/// maximization at a recorded resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    /// `max |f|` over `[0,1]²`.
    pub f_bar: f64,
    /// `max{λ0, max_D |μ|}`.
    pub lambda_bar: f64,
    /// `M = (f̄ + Λ̄) / 2`.
    pub m: f64,
    /// `M e^{2M}`, the kernel maximum estimate.
    pub bound: f64,
    /// `inf λ(x,t) = λ0 - sup c` over the sampled window.
    pub lambda_under: f64,
    /// Lattice resolution used for the maxima.
    pub sample_count: usize,
}

/// `μ(x,y) = λ0 - c1(x) + c1(y)` on the triangle `D`.
pub fn eval_mu(spec: &ProblemSpec, x: f64, y: f64) -> Result<f64, CoreError> {
    if !(0.0..=1.0).contains(&x) || y < 0.0 || y > x {
        return Err(CoreError::Domain {
            what: format!("({x}, {y}) is not in D = {{0 <= y <= x <= 1}}"),
        });
    }
    Ok(spec.lambda0 - spec.c1.eval(x) + spec.c1.eval(y))
}

/// Computes `f̄`, `Λ̄`, `M`, the maximum estimate and `λ̲` by exhaustive
/// maximization over a uniform `sample_count`-point-per-axis lattice.
///
/// `lambda_under` is sampled over `[0,1] × [0, t_horizon]` with
/// `t_horizon = 1`; use [`validate_spec`] for a different window.
pub fn compute_constants(spec: &ProblemSpec, sample_count: usize) -> Result<DerivedConstants, CoreError> {
    if sample_count < 2 {
        return Err(CoreError::Config {
            what: format!("sample_count = {sample_count} < 2"),
        });
    }
    let n = sample_count;
    let grid = |i: usize| i as f64 / (n - 1) as f64;

    let mut f_bar: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            f_bar = f_bar.max(math::abs(spec.f.eval(grid(i), grid(j))));
        }
    }

    let mut mu_max: f64 = 0.0;
    for i in 0..n {
        for j in 0..=i {
            let mu = spec.lambda0 - spec.c1.eval(grid(i)) + spec.c1.eval(grid(j));
            mu_max = mu_max.max(math::abs(mu));
        }
    }
    let lambda_bar = spec.lambda0.max(mu_max);
    let m = 0.5 * (f_bar + lambda_bar);

    let mut c_sup = f64::NEG_INFINITY;
    for i in 0..n {
        for j in 0..n {
            c_sup = c_sup.max(spec.c(grid(i), grid(j)));
        }
    }

    Ok(DerivedConstants {
        f_bar,
        lambda_bar,
        m,
        bound: m * math::exp(2.0 * m),
        lambda_under: spec.lambda0 - c_sup,
        sample_count: n,
    })
}

/// Outcome of one standing-assumption check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Human-readable witness of the failure, empty on pass.
    pub witness: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub t_horizon: f64,
    pub sample_count: usize,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Checks the standing assumptions at sampled resolution:
/// `λ0 > sup c`, `ω(s) ≤ 1` on `[0,1]`, the `c3` modulus inequality, `L ≥ 0`,
/// and (advisory) that `L` is decreasing over the window — the asymptotic
/// condition `L(t) → 0` cannot be verified on a finite horizon.
pub fn validate_spec(spec: &ProblemSpec, t_horizon: f64, sample_count: usize) -> Result<ValidationReport, CoreError> {
    if t_horizon <= 0.0 {
        return Err(CoreError::Config {
            what: format!("t_horizon = {t_horizon} must be positive"),
        });
    }
    if sample_count < 2 {
        return Err(CoreError::Config {
            what: format!("sample_count = {sample_count} < 2"),
        });
    }
    let n = sample_count;
    let xs = |i: usize| i as f64 / (n - 1) as f64;
    let ts = |i: usize| t_horizon * i as f64 / (n - 1) as f64;
    let mut checks = Vec::new();

    // lambda0 > sup c on [0,1] x [0, t_horizon]
    let mut c_sup = f64::NEG_INFINITY;
    let mut c_arg = (0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let v = spec.c(xs(i), ts(j));
            if v > c_sup {
                c_sup = v;
                c_arg = (xs(i), ts(j));
            }
        }
    }
    checks.push(Check {
        name: String::from("lambda0 > sup c"),
        passed: spec.lambda0 > c_sup,
        witness: if spec.lambda0 > c_sup {
            String::new()
        } else {
            format!(
                "c({}, {}) = {} >= lambda0 = {}",
                c_arg.0, c_arg.1, c_sup, spec.lambda0
            )
        },
    });

    // omega(s) <= 1 on [0,1]
    let mut omega_bad = None;
    for i in 0..n {
        let s = xs(i);
        if spec.omega(s) > 1.0 + 1e-12 {
            omega_bad = Some(s);
            break;
        }
    }
    checks.push(Check {
        name: String::from("omega(s) <= 1 on [0,1]"),
        passed: omega_bad.is_none(),
        witness: omega_bad.map_or(String::new(), |s| format!("omega({s}) = {} > 1", spec.omega(s))),
    });

    // gamma0 >= 1
    checks.push(Check {
        name: String::from("gamma0 >= 1"),
        passed: spec.c3_gamma0 >= 1.0,
        witness: if spec.c3_gamma0 >= 1.0 {
            String::new()
        } else {
            format!("gamma0 = {}", spec.c3_gamma0)
        },
    });

    // L(t) >= 0 on the window
    let mut l_bad = None;
    for j in 0..n {
        let t = ts(j);
        if spec.c3_l.eval(t) < -1e-12 {
            l_bad = Some(t);
            break;
        }
    }
    checks.push(Check {
        name: String::from("L(t) >= 0"),
        passed: l_bad.is_none(),
        witness: l_bad.map_or(String::new(), |t| format!("L({t}) = {}", spec.c3_l.eval(t))),
    });

    // modulus inequality |c3(x,t) - c3(y,t)| <= L(t) omega(|x-y|)
    // With c3 = L(t) shape(x) this reduces to the shape modulus; check the
    // full triple anyway so a mis-specified shape is caught as stated.
    let mut mod_bad = None;
    'outer: for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let (x, y, t) = (xs(i), xs(j), ts(k));
                let lhs = math::abs(spec.c3(x, t) - spec.c3(y, t));
                let rhs = spec.c3_l.eval(t) * spec.omega(math::abs(x - y));
                if lhs > rhs + 1e-10 {
                    mod_bad = Some((x, y, t, lhs, rhs));
                    break 'outer;
                }
            }
        }
    }
    checks.push(Check {
        name: String::from("|c3(x,t)-c3(y,t)| <= L(t) omega(|x-y|)"),
        passed: mod_bad.is_none(),
        witness: mod_bad.map_or(String::new(), |(x, y, t, lhs, rhs)| {
            format!("at x={x}, y={y}, t={t}: {lhs} > {rhs}")
        }),
    });

    // L decreasing over the window (advisory proxy for L(t) -> 0).
    let mut dec_bad = None;
    for j in 1..n {
        let (t0, t1) = (ts(j - 1), ts(j));
        if spec.c3_l.eval(t1) > spec.c3_l.eval(t0) + 1e-12 {
            dec_bad = Some((t0, t1));
            break;
        }
    }
    checks.push(Check {
        name: String::from("L decreasing on sampled window (finite-horizon proxy for L(t) -> 0)"),
        passed: dec_bad.is_none(),
        witness: dec_bad.map_or(String::new(), |(t0, t1)| {
            format!("L({t1}) = {} > L({t0}) = {}", spec.c3_l.eval(t1), spec.c3_l.eval(t0))
        }),
    });

    Ok(ValidationReport {
        checks,
        t_horizon,
        sample_count: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptor::{Term, TermKind};
    use proptest::prelude::*;

    fn spec_linear_c1(lambda0: f64) -> ProblemSpec {
        let mut s = ProblemSpec::constant_coefficient(lambda0);
        s.c1 = Function1::single(TermKind::Monomial, 1.0, 1.0);
        s
    }

    #[test]
    fn mu_direct_substitution() {
        // lambda0 = 2, c1(x) = x: mu(0.5, 0.25) = 2 - 0.5 + 0.25
        let s = spec_linear_c1(2.0);
        assert_eq!(eval_mu(&s, 0.5, 0.25).unwrap(), 1.75);
    }

    #[test]
    fn mu_sine_c1() {
        let mut s = ProblemSpec::constant_coefficient(1.0);
        s.c1 = Function1::single(TermKind::Sine, 1.0, 1.0);
        let v = eval_mu(&s, 1.0, 0.0).unwrap();
        assert!((v - (1.0 - 1.0_f64.sin())).abs() < 1e-15);
        assert!((v - 0.158529).abs() < 1e-6);
    }

    #[test]
    fn mu_outside_domain() {
        let s = spec_linear_c1(2.0);
        assert!(matches!(eval_mu(&s, 0.2, 0.5), Err(CoreError::Domain { .. })));
        assert!(matches!(eval_mu(&s, 1.2, 0.5), Err(CoreError::Domain { .. })));
    }

    #[test]
    fn constants_trivial() {
        let s = ProblemSpec::constant_coefficient(1.0);
        let c = compute_constants(&s, 50).unwrap();
        assert_eq!(c.f_bar, 0.0);
        assert_eq!(c.lambda_bar, 1.0);
        assert_eq!(c.m, 0.5);
        assert!((c.bound - 0.5 * 1.0_f64.exp()).abs() < 1e-15);
    }

    #[test]
    fn constants_linear_c1() {
        // lambda0 = 2, c1(x) = x, f = 1: mu in [1, 2] on D, so Lambda_bar = 2.
        let mut s = spec_linear_c1(2.0);
        s.f = Function2::constant(1.0);
        let c = compute_constants(&s, 101).unwrap();
        assert_eq!(c.f_bar, 1.0);
        assert_eq!(c.lambda_bar, 2.0);
        assert_eq!(c.m, 1.5);
    }

    #[test]
    fn constants_negative_f() {
        let mut s = ProblemSpec::constant_coefficient(1.0);
        s.f = Function2::constant(-1.0);
        let c = compute_constants(&s, 10).unwrap();
        assert_eq!(c.f_bar, 1.0);
        assert_eq!(c.m, 1.0);
        assert!((c.bound - (2.0_f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn validate_zero_spec_passes() {
        let s = ProblemSpec::constant_coefficient(1.0);
        let r = validate_spec(&s, 1.0, 20).unwrap();
        assert!(r.all_passed());
    }

    #[test]
    fn validate_catches_large_c2() {
        let mut s = ProblemSpec::constant_coefficient(1.0);
        s.c2 = Function1::constant(2.0);
        let r = validate_spec(&s, 1.0, 20).unwrap();
        let check = &r.checks[0];
        assert!(!check.passed);
        assert!(check.witness.contains("2"));
    }

    #[test]
    fn validate_lipschitz_profile_passes() {
        // c3 = e^{-t} * x with gamma0 = 1: |x - y| <= |x - y|.
        let mut s = ProblemSpec::constant_coefficient(3.0);
        s.c3_l = Function1::single(TermKind::Exponential, 1.0, -1.0);
        s.c3_shape = Function1::single(TermKind::Monomial, 1.0, 1.0);
        s.c3_gamma0 = 1.0;
        let r = validate_spec(&s, 2.0, 15).unwrap();
        assert!(r.all_passed(), "{:?}", r.checks);
    }

    #[test]
    fn validation_deterministic() {
        let mut s = spec_linear_c1(2.0);
        s.c2 = Function1::single(TermKind::Cosine, 0.3, 1.0);
        let a = validate_spec(&s, 1.5, 25).unwrap();
        let b = validate_spec(&s, 1.5, 25).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn mu_diagonal_identity(x in 0.0..=1.0f64, lambda0 in 0.1..5.0f64) {
            let mut s = ProblemSpec::constant_coefficient(lambda0);
            s.c1 = Function1 { terms: alloc::vec![
                Term::new(TermKind::Sine, 0.7, 2.0),
                Term::new(TermKind::Monomial, -0.2, 3.0),
            ]};
            let mu = eval_mu(&s, x, x).unwrap();
            prop_assert!((mu - lambda0).abs() <= 1e-14 * (1.0 + lambda0.abs()));
        }

        #[test]
        fn mu_telescoping(a in 0.0..=1.0f64, b in 0.0..=1.0f64, c in 0.0..=1.0f64) {
            let mut v = [a, b, c];
            v.sort_by(|p, q| p.partial_cmp(q).unwrap());
            let (z, y, x) = (v[0], v[1], v[2]);
            let mut s = ProblemSpec::constant_coefficient(1.5);
            s.c1 = Function1::single(TermKind::Cosine, 0.4, 3.0);
            let lhs = eval_mu(&s, x, y).unwrap() + eval_mu(&s, y, z).unwrap() - 1.5;
            let rhs = eval_mu(&s, x, z).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn m_monotone_in_f(amp in 0.0..2.0f64, extra in 0.0..2.0f64) {
            let mut small = ProblemSpec::constant_coefficient(1.0);
            small.f = Function2::constant(amp);
            let mut big = small.clone();
            big.f = Function2::constant(amp + extra);
            let cs = compute_constants(&small, 20).unwrap();
            let cb = compute_constants(&big, 20).unwrap();
            prop_assert!(cb.m >= cs.m);
        }
    }
}
