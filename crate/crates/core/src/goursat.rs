//! The transformed triangle `η ∈ [0,1]`, `ξ ∈ [η, 2-η]` and fields on its
//! lattice.
//!
//! Under `ξ = x + y`, `η = x - y` the kernel triangle `D` maps onto this
//! region and the kernel equation becomes a Goursat problem. The lattice
//! uses the same step `h = 2/n` in both axes so that the data line `η = 0`,
//! the diagonal `ξ = η` and the far edge `ξ = 2 - η` all pass through nodes,
//! and so that every inner integration limit of the iterated integrals lands
//! on a node.

use crate::error::CoreError;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// Maps `(x,y) ∈ D` to `(ξ,η)`.
pub fn to_goursat(x: f64, y: f64) -> Result<(f64, f64), CoreError> {
    if !(0.0..=1.0).contains(&x) || y < 0.0 || y > x {
        return Err(CoreError::Domain {
            what: format!("({x}, {y}) is not in D"),
        });
    }
    Ok((x + y, x - y))
}

/// Maps `(ξ,η)` back to `(x,y) ∈ D`.
pub fn from_goursat(xi: f64, eta: f64) -> Result<(f64, f64), CoreError> {
    if !(0.0..=1.0).contains(&eta) || xi < eta || xi > 2.0 - eta {
        return Err(CoreError::Domain {
            what: format!("(xi, eta) = ({xi}, {eta}) outside the transformed triangle"),
        });
    }
    Ok((0.5 * (xi + eta), 0.5 * (xi - eta)))
}

/// Lattice over the transformed triangle: `ξ_i = i h`, `η_j = j h` with
/// `h = 2/n`, valid iff `j ≤ i ≤ n - j` and `j ≤ n/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GoursatGrid {
    n: usize,
}

impl GoursatGrid {
    /// `n` must be even (diagonal alignment) and at least 8 (below that the
    /// triple-integral stencils degenerate).
    pub fn new(n: usize) -> Result<Self, CoreError> {
        if !n.is_multiple_of(2) {
            return Err(CoreError::Grid {
                what: format!("grid must be even, got n = {n}"),
            });
        }
        if n < 8 {
            return Err(CoreError::Grid {
                what: format!("grid too coarse, need n >= 8, got n = {n}"),
            });
        }
        Ok(Self { n })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn h(&self) -> f64 {
        2.0 / self.n as f64
    }

    /// Largest valid `η` index, `n/2`.
    #[inline]
    pub fn j_max(&self) -> usize {
        self.n / 2
    }

    #[inline]
    pub fn xi(&self, i: usize) -> f64 {
        i as f64 * self.h()
    }

    #[inline]
    pub fn eta(&self, j: usize) -> f64 {
        j as f64 * self.h()
    }

    #[inline]
    pub fn is_valid(&self, i: usize, j: usize) -> bool {
        j <= self.j_max() && j <= i && i <= self.n - j
    }

    /// Row-major offset of node `(i,j)`; row `j` holds `i = j ..= n-j`.
    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        debug_assert!(self.is_valid(i, j));
        // row j starts after rows 0..j, row r has n - 2r + 1 nodes
        let row_start = j * (self.n + 1) - j * j.saturating_sub(1);
        row_start + (i - j)
    }

    fn node_count(&self) -> usize {
        let m = self.j_max();
        (0..=m).map(|j| self.n - 2 * j + 1).sum()
    }

    /// Iterates all valid `(i, j)` index pairs, row by row.
    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        (0..=self.j_max()).flat_map(move |j| (j..=n - j).map(move |i| (i, j)))
    }
}

/// Real values on the valid nodes of a [`GoursatGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GoursatField {
    grid: GoursatGrid,
    values: Vec<f64>,
}

impl GoursatField {
    pub fn zeros(grid: GoursatGrid) -> Self {
        Self {
            values: vec![0.0; grid.node_count()],
            grid,
        }
    }

    #[inline]
    pub fn grid(&self) -> GoursatGrid {
        self.grid
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.offset(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let o = self.grid.offset(i, j);
        self.values[o] = v;
    }

    /// Maximum absolute value over valid nodes.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Maximum absolute difference against another field on the same grid.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| a * v).collect(),
        }
    }

    pub fn add_scaled(&self, a: f64, other: &Self) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| x + a * y)
                .collect(),
        }
    }
}
