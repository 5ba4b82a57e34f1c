//! The integral operator of the Goursat-transformed kernel equation.
//!
//! On the transformed triangle the kernel solves `G = G0 + Φ_G` with
//!
//! ```text
//! G0(ξ,η) = (λ0/4)(ξ+η) + (1/4)∫_η^ξ∫_0^η f ds dτ + (1/2)∫_0^η∫_0^τ f ds dτ
//! Φ_H(ξ,η) = (1/4)∫_η^ξ∫_0^η μ̃ H ds dτ + (1/2)∫_0^η∫_0^τ μ̃ H ds dτ
//!          + (1/4)∫_η^ξ∫_0^η∫_z^{z+η-s} Ĥ dτ ds dz
//!          + (1/2)∫_0^η∫_0^z∫_z^{2z-s} Ĥ dτ ds dz,
//! Ĥ(τ,s,z) = f((τ-s)/2, z-(τ+s)/2) H(τ,s),
//! ```
//!
//! where `f` is evaluated at `((τ+s)/2, (τ-s)/2)` inside `G0` and `μ̃` is
//! `μ` pulled back to the transformed variables. All quadrature is composite
//! trapezoid; the shared-step lattice puts every inner limit on a node.
//!
//! [`PhiOperator::apply_naive`] evaluates the four terms by direct nested
//! loops (O(n⁵) with the triple integrals) and serves as the oracle for
//! [`PhiOperator::apply_fast`], which reaches O(n³) per application through
//! prefix-summed inner-integral tables.

use crate::coefficients::ProblemSpec;
use crate::error::CoreError;
use crate::goursat::{GoursatField, GoursatGrid};
use alloc::vec;
use alloc::vec::Vec;

/// `f` sampled on the triangular `(x,y)` lattice with step `h/2`:
/// `value(a,b) = f(a h/2, b h/2)` for `0 ≤ b ≤ a ≤ n`. Every `f` argument
/// appearing in the iterated integrals is a point of this lattice.
#[derive(Debug, Clone)]
struct FTable {
    n: usize,
    values: Vec<f64>,
}

impl FTable {
    fn build(spec: &ProblemSpec, grid: GoursatGrid) -> Self {
        let n = grid.n();
        let half = 0.5 * grid.h();
        let mut values = Vec::with_capacity((n + 1) * (n + 2) / 2);
        for a in 0..=n {
            for b in 0..=a {
                values.push(spec.f.eval(a as f64 * half, b as f64 * half));
            }
        }
        Self { n, values }
    }

    #[inline]
    fn get(&self, a: usize, b: usize) -> f64 {
        debug_assert!(b <= a && a <= self.n);
        self.values[a * (a + 1) / 2 + b]
    }
}

/// Precomputed tables for evaluating `G0` and `Φ` on one grid.
pub struct PhiOperator {
    grid: GoursatGrid,
    lambda0: f64,
    /// `μ̃` at valid `(τ,s)` nodes.
    mu: GoursatField,
    /// `f` on the half-step lattice; `None` when `f ≡ 0`.
    f: Option<FTable>,
}

impl PhiOperator {
    pub fn new(spec: &ProblemSpec, grid: GoursatGrid) -> Self {
        let n = grid.n();
        let half = 0.5 * grid.h();
        // c1 on the half-step axis; mu~(t,s) = lambda0 - c1[t+s] + c1[t-s].
        let c1: Vec<f64> = (0..=n).map(|a| spec.c1.eval(a as f64 * half)).collect();
        let mut mu = GoursatField::zeros(grid);
        for (t, s) in grid.nodes() {
            mu.set(t, s, spec.lambda0 - c1[t + s] + c1[t - s]);
        }
        let f = if spec.f.is_zero() {
            None
        } else {
            Some(FTable::build(spec, grid))
        };
        Self {
            grid,
            lambda0: spec.lambda0,
            mu,
            f,
        }
    }

    #[inline]
    pub fn grid(&self) -> GoursatGrid {
        self.grid
    }

    /// `f((τ+s)/2, (τ-s)/2)` at node indices, as it appears in `G0`.
    #[inline]
    fn f_g0(&self, t: usize, s: usize) -> f64 {
        match &self.f {
            Some(tab) => tab.get(t + s, t - s),
            None => 0.0,
        }
    }

    /// `f((τ-s)/2, z-(τ+s)/2)` at node indices, as it appears in `Ĥ`.
    #[inline]
    fn f_hat(&self, t: usize, s: usize, z: usize) -> f64 {
        match &self.f {
            Some(tab) => tab.get(t - s, 2 * z - t - s),
            None => 0.0,
        }
    }

    /// The inhomogeneous part `G0`. The `η = 0` row is exactly `(λ0/4) ξ`.
    pub fn build_g0(&self) -> GoursatField {
        let grid = self.grid;
        let n = grid.n();
        let jm = grid.j_max();
        let h = grid.h();
        let mut out = GoursatField::zeros(grid);
        for (i, j) in grid.nodes() {
            out.set(i, j, 0.25 * self.lambda0 * (grid.xi(i) + grid.eta(j)));
        }
        if self.f.is_none() {
            return out;
        }

        // fa[t][j] = integral of f((t+s)/2,(t-s)/2) ds over s in [0, jh],
        // prefix-accumulated in j; stored in field layout (valid j <= min(t, n-t)).
        let mut fa = GoursatField::zeros(grid);
        for t in 0..=n {
            let s_hi = t.min(n - t).min(jm);
            let mut acc = 0.0;
            for s in 1..=s_hi {
                acc += 0.5 * h * (self.f_g0(t, s - 1) + self.f_g0(t, s));
                fa.set(t, s, acc);
            }
        }
        // term A: (1/4) * integral over tau in [jh, ih] of fa(tau, j)
        for j in 0..=jm {
            let mut acc = 0.0;
            for i in j..=n - j {
                if i > j {
                    acc += 0.5 * h * (fa.get(i - 1, j) + fa.get(i, j));
                }
                out.set(i, j, out.get(i, j) + 0.25 * acc);
            }
        }
        // term B: (1/2) * integral over tau in [0, jh] of fa(tau, tau)
        let mut acc = 0.0;
        let mut tb = vec![0.0; jm + 1];
        for t in 1..=jm {
            acc += 0.5 * h * (fa.get(t - 1, t - 1) + fa.get(t, t));
            tb[t] = acc;
        }
        for (i, j) in grid.nodes() {
            out.set(i, j, out.get(i, j) + 0.5 * tb[j]);
        }
        out
    }

    /// Reference evaluation of `Φ_H` by direct nested trapezoid loops.
    /// O(n⁵) with nonzero `f`; intended as the small-grid oracle.
    pub fn apply_naive(&self, h_field: &GoursatField) -> GoursatField {
        assert_eq!(h_field.grid(), self.grid);
        let grid = self.grid;
        let h = grid.h();
        let w = |k: usize, a: usize, b: usize| if k == a || k == b { 0.5 * h } else { h };
        let mut out = GoursatField::zeros(grid);

        for (i, j) in grid.nodes() {
            let mut t1 = 0.0;
            if i > j && j > 0 {
                for t in j..=i {
                    let mut inner = 0.0;
                    for s in 0..=j {
                        inner += w(s, 0, j) * self.mu.get(t, s) * h_field.get(t, s);
                    }
                    t1 += w(t, j, i) * inner;
                }
            }
            let mut t2 = 0.0;
            for t in 1..=j {
                let mut inner = 0.0;
                for s in 0..=t {
                    inner += w(s, 0, t) * self.mu.get(t, s) * h_field.get(t, s);
                }
                t2 += w(t, 0, j) * inner;
            }
            let mut t3 = 0.0;
            let mut t4 = 0.0;
            if self.f.is_some() {
                if i > j && j > 0 {
                    for z in j..=i {
                        let mut mid = 0.0;
                        for s in 0..=j {
                            let hi = z + j - s;
                            let mut inner = 0.0;
                            if hi > z {
                                for t in z..=hi {
                                    inner += w(t, z, hi)
                                        * self.f_hat(t, s, z)
                                        * h_field.get(t, s);
                                }
                            }
                            mid += w(s, 0, j) * inner;
                        }
                        t3 += w(z, j, i) * mid;
                    }
                }
                for z in 1..=j {
                    let mut mid = 0.0;
                    for s in 0..=z {
                        let hi = 2 * z - s;
                        let mut inner = 0.0;
                        if hi > z {
                            for t in z..=hi {
                                inner += w(t, z, hi) * self.f_hat(t, s, z) * h_field.get(t, s);
                            }
                        }
                        mid += w(s, 0, z) * inner;
                    }
                    t4 += w(z, 0, j) * mid;
                }
            }
            out.set(i, j, 0.25 * t1 + 0.5 * t2 + 0.25 * t3 + 0.5 * t4);
        }
        out
    }

    /// Fast evaluation of `Φ_H`, value-equivalent to [`Self::apply_naive`]
    /// up to summation roundoff. The double-integral terms use prefix sums
    /// in `s` and `τ`/`ξ`; the triple-integral terms precompute, for each
    /// `z`, the prefix table `F(s,m) = ∫_z^{mh} Ĥ(τ,s,z) dτ`, reduce it to
    /// `C(z,η) = ∫_0^η F(s, z+η-s) ds` (whose diagonal `C(z,z)` is the inner
    /// double integral of the fourth term), and prefix-sum over `z`.
    pub fn apply_fast(&self, h_field: &GoursatField) -> GoursatField {
        assert_eq!(h_field.grid(), self.grid);
        let grid = self.grid;
        let n = grid.n();
        let jm = grid.j_max();
        let h = grid.h();
        let mut out = GoursatField::zeros(grid);

        // mu~ * H at nodes
        let mut muh = GoursatField::zeros(grid);
        for (t, s) in grid.nodes() {
            muh.set(t, s, self.mu.get(t, s) * h_field.get(t, s));
        }

        // is(t, j) = integral of mu~ H ds over [0, jh] at fixed tau = th
        let mut is = GoursatField::zeros(grid);
        for t in 0..=n {
            let s_hi = t.min(n - t).min(jm);
            let mut acc = 0.0;
            for s in 1..=s_hi {
                acc += 0.5 * h * (muh.get(t, s - 1) + muh.get(t, s));
                is.set(t, s, acc);
            }
        }
        // T1: prefix over tau for each row j
        for j in 0..=jm {
            let mut acc = 0.0;
            for i in j..=n - j {
                if i > j {
                    acc += 0.5 * h * (is.get(i - 1, j) + is.get(i, j));
                }
                out.set(i, j, 0.25 * acc);
            }
        }
        // T2: prefix over tau of the diagonal is(t, t)
        let mut t2 = vec![0.0; jm + 1];
        let mut acc = 0.0;
        for t in 1..=jm {
            acc += 0.5 * h * (is.get(t - 1, t - 1) + is.get(t, t));
            t2[t] = acc;
        }
        for (i, j) in grid.nodes() {
            out.set(i, j, out.get(i, j) + 0.5 * t2[j]);
        }

        if self.f.is_none() {
            return out;
        }

        // C(z, j) in field layout; C(z, z) doubles as the inner integral of T4.
        let mut c = GoursatField::zeros(grid);
        let mut f_tab = vec![0.0; (jm + 1) * (n + 1)];
        for z in 0..=n {
            let s_cap = z.min(n - z);
            let m_cap = (2 * z).min(n);
            // F(s, m) = integral over tau in [zh, mh] of f_hat * H
            for s in 0..=s_cap {
                let row = s * (n + 1);
                let mut acc = 0.0;
                f_tab[row + z] = 0.0;
                for m in z + 1..=m_cap - s {
                    acc += 0.5
                        * h
                        * (self.f_hat(m - 1, s, z) * h_field.get(m - 1, s)
                            + self.f_hat(m, s, z) * h_field.get(m, s));
                    f_tab[row + m] = acc;
                }
            }
            let j_cap = s_cap.min(jm);
            for j in 0..=j_cap {
                let mut v = 0.0;
                for s in 0..=j {
                    let wgt = if s == 0 || s == j { 0.5 * h } else { h };
                    v += wgt * f_tab[s * (n + 1) + (z + j - s)];
                }
                if j == 0 {
                    v = 0.0;
                }
                c.set(z, j, v);
            }
        }
        // T3: prefix over z for each row j
        for j in 0..=jm {
            let mut acc = 0.0;
            for i in j..=n - j {
                if i > j {
                    acc += 0.5 * h * (c.get(i - 1, j) + c.get(i, j));
                }
                out.set(i, j, out.get(i, j) + 0.25 * acc);
            }
        }
        // T4: prefix over z of the diagonal C(z, z)
        let mut t4 = vec![0.0; jm + 1];
        let mut acc = 0.0;
        for z in 1..=jm {
            acc += 0.5 * h * (c.get(z - 1, z - 1) + c.get(z, z));
            t4[z] = acc;
        }
        for (i, j) in grid.nodes() {
            out.set(i, j, out.get(i, j) + 0.5 * t4[j]);
        }
        out
    }
}

/// Convenience wrapper building the operator tables for a single call.
pub fn build_g0(spec: &ProblemSpec, grid: GoursatGrid) -> GoursatField {
    PhiOperator::new(spec, grid).build_g0()
}

/// Reference `Φ_H`; see [`PhiOperator::apply_naive`].
pub fn apply_phi(spec: &ProblemSpec, grid: GoursatGrid, h_field: &GoursatField) -> GoursatField {
    PhiOperator::new(spec, grid).apply_naive(h_field)
}

/// Fast `Φ_H`; see [`PhiOperator::apply_fast`].
pub fn apply_phi_fast(
    spec: &ProblemSpec,
    grid: GoursatGrid,
    h_field: &GoursatField,
) -> GoursatField {
    PhiOperator::new(spec, grid).apply_fast(h_field)
}

/// Grid construction helper kept here so callers get grid errors eagerly.
pub fn make_grid(n: usize) -> Result<GoursatGrid, CoreError> {
    GoursatGrid::new(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptor::{Function1, Function2, TermKind};
    use crate::ProblemSpec;

    fn constant_field(grid: GoursatGrid, v: f64) -> GoursatField {
        let mut f = GoursatField::zeros(grid);
        for (i, j) in grid.nodes() {
            f.set(i, j, v);
        }
        f
    }

    #[test]
    fn g0_without_f_is_linear() {
        let spec = ProblemSpec::constant_coefficient(1.0);
        let grid = GoursatGrid::new(16).unwrap();
        let g0 = build_g0(&spec, grid);
        for (i, j) in grid.nodes() {
            let expect = 0.25 * (grid.xi(i) + grid.eta(j));
            assert!((g0.get(i, j) - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn g0_base_row_is_exact() {
        let mut spec = ProblemSpec::constant_coefficient(1.7);
        spec.f = Function2 {
            terms: alloc::vec![crate::descriptor::ProductTerm {
                amplitude: 0.8,
                x_kind: TermKind::Sine,
                x_parameter: 2.0,
                y_kind: TermKind::Cosine,
                y_parameter: 1.0,
            }],
        };
        let grid = GoursatGrid::new(20).unwrap();
        let g0 = build_g0(&spec, grid);
        for i in 0..=grid.n() {
            assert_eq!(g0.get(i, 0), 0.25 * 1.7 * grid.xi(i));
        }
    }

    #[test]
    fn g0_constant_f_closed_form() {
        // f = 1, lambda0 = 0: G0 = (xi eta - eta^2)/4 + eta^2/4 = xi eta / 4.
        let mut spec = ProblemSpec::constant_coefficient(0.0);
        spec.f = Function2::constant(1.0);
        let grid = GoursatGrid::new(16).unwrap();
        let g0 = build_g0(&spec, grid);
        for (i, j) in grid.nodes() {
            let expect = 0.25 * grid.xi(i) * grid.eta(j);
            assert!(
                (g0.get(i, j) - expect).abs() < 1e-13,
                "node ({i},{j}): {} vs {expect}",
                g0.get(i, j)
            );
        }
        // at xi = eta = 1 that is 1/4
        let (i, j) = (grid.n() / 2, grid.n() / 2);
        assert!((g0.get(i, j) - 0.25).abs() < 1e-13);
    }

    #[test]
    fn phi_of_zero_is_zero() {
        let mut spec = ProblemSpec::constant_coefficient(2.0);
        spec.f = Function2::constant(0.5);
        let grid = GoursatGrid::new(12).unwrap();
        let op = PhiOperator::new(&spec, grid);
        let zero = constant_field(grid, 0.0);
        assert_eq!(op.apply_naive(&zero).max_abs(), 0.0);
        assert_eq!(op.apply_fast(&zero).max_abs(), 0.0);
    }

    #[test]
    fn phi_constant_h_closed_form() {
        // f = 0, mu~ = lambda0, H = 1: Phi = (lambda0/4) xi eta.
        let spec = ProblemSpec::constant_coefficient(1.3);
        let grid = GoursatGrid::new(16).unwrap();
        let op = PhiOperator::new(&spec, grid);
        let one = constant_field(grid, 1.0);
        for phi in [op.apply_naive(&one), op.apply_fast(&one)] {
            for (i, j) in grid.nodes() {
                let expect = 0.25 * 1.3 * grid.xi(i) * grid.eta(j);
                assert!(
                    (phi.get(i, j) - expect).abs() < 1e-13,
                    "node ({i},{j}): {} vs {expect}",
                    phi.get(i, j)
                );
            }
        }
    }

    #[test]
    fn phi_is_linear() {
        let mut spec = ProblemSpec::constant_coefficient(1.5);
        spec.c1 = Function1::single(TermKind::Sine, 0.5, 1.0);
        spec.f = Function2::constant(0.3);
        let grid = GoursatGrid::new(12).unwrap();
        let op = PhiOperator::new(&spec, grid);
        let mut h1 = GoursatField::zeros(grid);
        let mut h2 = GoursatField::zeros(grid);
        for (i, j) in grid.nodes() {
            h1.set(i, j, (i as f64 * 0.13).sin());
            h2.set(i, j, (j as f64 * 0.07).cos());
        }
        let combo = h1.scale(2.0).add_scaled(-3.0, &h2);
        for apply in [PhiOperator::apply_naive, PhiOperator::apply_fast] {
            let lhs = apply(&op, &combo);
            let rhs = apply(&op, &h1).scale(2.0).add_scaled(-3.0, &apply(&op, &h2));
            assert!(lhs.max_abs_diff(&rhs) < 1e-13);
        }
    }

    #[test]
    fn fast_matches_naive_with_f() {
        let mut spec = ProblemSpec::constant_coefficient(2.0);
        spec.c1 = Function1::single(TermKind::Monomial, 0.4, 2.0);
        spec.f = Function2 {
            terms: alloc::vec![crate::descriptor::ProductTerm {
                amplitude: 0.7,
                x_kind: TermKind::Cosine,
                x_parameter: 3.0,
                y_kind: TermKind::Monomial,
                y_parameter: 1.0,
            }],
        };
        let grid = GoursatGrid::new(16).unwrap();
        let op = PhiOperator::new(&spec, grid);
        let mut h = GoursatField::zeros(grid);
        for (i, j) in grid.nodes() {
            h.set(i, j, 1.0 + (i as f64 - 2.0 * j as f64) * 0.05);
        }
        let a = op.apply_naive(&h);
        let b = op.apply_fast(&h);
        assert!(a.max_abs_diff(&b) < 1e-12 * (1.0 + h.max_abs()));
    }
}
